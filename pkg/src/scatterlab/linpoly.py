"""q-polynomials sum c_i x^(q^i) over F_{q^n}, reduced modulo x^(q^n) - x.

Matrix convention: ``to_matrix(f)`` has row j equal to the F_q coordinates of
f(b_j) for the power basis b_j, so f(u . b) = (u M) . b and therefore
to_matrix(f o g) = to_matrix(g) @ to_matrix(f).
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .gf import FieldCtx


# ---- Gaussian elimination over any object with add/sub/mul/inv ----------


def field_rref(F, rows):
    """Reduced row echelon form over F; returns (rows, pivot_columns)."""
    R = [list(r) for r in rows]
    if not R:
        return R, []
    m, n = len(R), len(R[0])
    pivots = []
    r = 0
    for c in range(n):
        if r == m:
            break
        i = next((i for i in range(r, m) if R[i][c]), None)
        if i is None:
            continue
        R[r], R[i] = R[i], R[r]
        inv = F.inv(R[r][c])
        R[r] = [F.mul(inv, v) for v in R[r]]
        for k in range(m):
            if k != r and R[k][c]:
                f = R[k][c]
                R[k] = [F.sub(a, F.mul(f, b)) for a, b in zip(R[k], R[r])]
        pivots.append(c)
        r += 1
    return R, pivots


def field_solve(F, A, b):
    """One solution x of A x = b over F, or None if inconsistent."""
    n = len(A[0]) if A else 0
    aug = [list(row) + [bi] for row, bi in zip(A, b)]
    R, pivots = field_rref(F, aug)
    if n in pivots:
        return None
    x = [0] * n
    for row, pc in enumerate(pivots):
        x[pc] = R[row][n]
    return x


def field_left_nullspace(F, M):
    """Basis rows u with u M = 0, in reduced form."""
    m = len(M)
    cols = len(M[0]) if m else 0
    T = [[M[i][j] for i in range(m)] for j in range(cols)]
    R, pivots = field_rref(F, T)
    free = [c for c in range(m) if c not in pivots]
    basis = []
    for fc in free:
        u = [0] * m
        u[fc] = 1
        for row, pc in enumerate(pivots):
            u[pc] = F.neg(R[row][fc])
        basis.append(u)
    return basis


def field_inverse(F, M):
    n = len(M)
    one_hot = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    R, pivots = field_rref(F, [list(M[i]) + one_hot[i] for i in range(n)])
    if pivots[:n] != list(range(n)):
        raise ValueError("matrix is singular")
    return [row[n:] for row in R]


@functools.lru_cache(maxsize=None)
def _moore_inverse(ctx: FieldCtx):
    moore = [[ctx.frob(b, i) for i in range(ctx.n)] for b in ctx.basis_qn]
    return field_inverse(ctx, moore)


# ---- LinPoly -------------------------------------------------------------


@dataclass(frozen=True)
class LinPoly:
    ctx: FieldCtx
    coeffs: tuple

    def __post_init__(self):
        if len(self.coeffs) != self.ctx.n:
            raise ValueError(f"expected {self.ctx.n} coefficients, got {len(self.coeffs)}")
        object.__setattr__(self, "coeffs", tuple(int(c) for c in self.coeffs))

    # constructors
    @classmethod
    def from_terms(cls, ctx: FieldCtx, terms: dict) -> "LinPoly":
        cs = [0] * ctx.n
        for i, c in terms.items():
            cs[i % ctx.n] = ctx.add(cs[i % ctx.n], c)
        return cls(ctx, tuple(cs))

    @classmethod
    def monomial(cls, ctx: FieldCtx, i: int, c: int = 1) -> "LinPoly":
        return cls.from_terms(ctx, {i: c})

    @classmethod
    def identity(cls, ctx: FieldCtx) -> "LinPoly":
        return cls.monomial(ctx, 0)

    @classmethod
    def zero(cls, ctx: FieldCtx) -> "LinPoly":
        return cls(ctx, (0,) * ctx.n)

    @classmethod
    def from_matrix(cls, ctx: FieldCtx, M) -> "LinPoly":
        """Inverse of :meth:`to_matrix`, by solving the Moore system."""
        images = [ctx.from_coords(row) for row in M]
        inv = _moore_inverse(ctx)
        cs = []
        for i in range(ctx.n):
            acc = 0
            for j in range(ctx.n):
                acc = ctx.add(acc, ctx.mul(inv[i][j], images[j]))
            cs.append(acc)
        return cls(ctx, tuple(cs))

    @classmethod
    def from_json(cls, ctx: FieldCtx, data) -> "LinPoly":
        return cls(ctx, tuple(ctx.from_hex(s) for s in data))

    def to_json(self) -> list[str]:
        return [self.ctx.to_hex(c) for c in self.coeffs]

    def _check(self, other: "LinPoly"):
        if other.ctx is not self.ctx:
            raise ValueError("q-polynomials over different field contexts")

    # structure
    def support(self) -> list[int]:
        return [i for i, c in enumerate(self.coeffs) if c]

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __add__(self, other: "LinPoly") -> "LinPoly":
        self._check(other)
        return LinPoly(self.ctx, tuple(self.ctx.add(a, b) for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "LinPoly") -> "LinPoly":
        self._check(other)
        return LinPoly(self.ctx, tuple(self.ctx.sub(a, b) for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "LinPoly":
        return LinPoly(self.ctx, tuple(self.ctx.neg(a) for a in self.coeffs))

    def scale(self, a: int) -> "LinPoly":
        """The polynomial a * f(x)."""
        return LinPoly(self.ctx, tuple(self.ctx.mul(a, c) for c in self.coeffs))

    def precompose_scalar(self, a: int) -> "LinPoly":
        """The polynomial f(a x)."""
        ctx = self.ctx
        return LinPoly(ctx, tuple(ctx.mul(c, ctx.frob(a, i)) for i, c in enumerate(self.coeffs)))

    def conj(self, e: int) -> "LinPoly":
        """Apply x -> x^(p^e) to every coefficient."""
        return LinPoly(self.ctx, tuple(self.ctx.aut(c, e) for c in self.coeffs))

    # evaluation
    def __call__(self, x: int) -> int:
        ctx = self.ctx
        acc = 0
        for i, c in enumerate(self.coeffs):
            if c:
                acc = ctx.add(acc, ctx.mul(c, ctx.frob(x, i)))
        return acc

    eval = __call__

    def eval_many(self, xs) -> np.ndarray:
        ctx = self.ctx
        xs = np.asarray(xs, dtype=np.int64)
        acc = np.zeros_like(xs)
        for i, c in enumerate(self.coeffs):
            if c:
                acc = ctx.v_add(acc, ctx.v_mul(np.full_like(xs, c), ctx.v_frob(xs, i)))
        return acc

    def compose(self, other: "LinPoly") -> "LinPoly":
        """self o other."""
        self._check(other)
        ctx, n = self.ctx, self.ctx.n
        out = [0] * n
        for i, fi in enumerate(self.coeffs):
            if not fi:
                continue
            for j, gj in enumerate(other.coeffs):
                if gj:
                    k = (i + j) % n
                    out[k] = ctx.add(out[k], ctx.mul(fi, ctx.frob(gj, i)))
        return LinPoly(ctx, tuple(out))

    def adjoint(self) -> "LinPoly":
        """Adjoint for the form Tr_{q^n/q}(x y)."""
        ctx, n = self.ctx, self.ctx.n
        out = [0] * n
        out[0] = self.coeffs[0]
        for i in range(1, n):
            out[n - i] = ctx.frob(self.coeffs[i], n - i)
        return LinPoly(ctx, tuple(out))

    # linear algebra
    def to_matrix(self) -> list[list[int]]:
        return [self.ctx.coords(self(b)) for b in self.ctx.basis_qn]

    def to_fp_matrix(self) -> np.ndarray:
        """F_p matrix with row k the base-p digits of f(p^k)."""
        ctx = self.ctx
        return np.array([ctx.digits(self(ctx.p**k)) for k in range(ctx.rn)], dtype=np.int64)

    def rank(self) -> int:
        return len(field_rref(self.ctx._fq, self.to_matrix())[1])

    def kernel(self) -> list[int]:
        """An F_q-basis of ker f (reduced echelon form in coordinates)."""
        ctx = self.ctx
        return [ctx.from_coords(u) for u in field_left_nullspace(ctx._fq, self.to_matrix())]

    def rank_kernel(self) -> tuple[int, list[int]]:
        ker = self.kernel()
        return self.ctx.n - len(ker), ker

    def kernel_elements(self) -> np.ndarray:
        """All roots, sorted by code (enumeration; table fields only)."""
        ctx = self.ctx
        xs = ctx.elements()
        return xs[self.eval_many(xs) == 0]

    def image_elements(self) -> np.ndarray:
        ctx = self.ctx
        return np.unique(self.eval_many(ctx.elements()))

    def invert(self) -> "LinPoly":
        ctx = self.ctx
        try:
            Minv = field_inverse(ctx._fq, self.to_matrix())
        except ValueError:
            raise ValueError("q-polynomial is not invertible") from None
        return LinPoly.from_matrix(ctx, Minv)

    def span_membership(self, gens: list["LinPoly"]):
        """Coefficients lam with self = sum lam_j * gens[j], or None."""
        for g in gens:
            self._check(g)
        if not gens:
            return [] if self.is_zero() else None
        A = [[g.coeffs[i] for g in gens] for i in range(self.ctx.n)]
        return field_solve(self.ctx, A, list(self.coeffs))

    def __repr__(self):
        terms = [f"{self.ctx.to_hex(c)}*x^(q^{i})" for i, c in enumerate(self.coeffs) if c]
        return "LinPoly(" + (" + ".join(terms) or "0") + ")"
