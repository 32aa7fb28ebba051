"""Rank-metric codes spanned over F_(q^n) by q-polynomials: distance, MRD test, idealizers."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from . import modp
from .errors import GuardRailError
from .gf import FieldCtx
from .linpoly import LinPoly, field_rref
from .scatter import is_scattered_fiber, ratios

RANK_BATCH = 8192
DEFAULT_MAX_ENUM = 1 << 22
PROFILE_LIMIT = 1 << 12


class Residual:
    """F_(q^n)-linear map whose kernel is the span of ``gens`` (coefficient vectors)."""

    def __init__(self, gens: list[LinPoly]):
        ctx = gens[0].ctx
        self.ctx = ctx
        R, pivots = field_rref(ctx, [list(g.coeffs) for g in gens])
        self.rows = R[: len(pivots)]
        self.pivots = pivots
        self.free = [k for k in range(ctx.n) if k not in pivots]

    def __call__(self, coeffs) -> list[int]:
        ctx = self.ctx
        out = []
        for k in self.free:
            v = coeffs[k]
            for row, pc in zip(self.rows, self.pivots):
                if coeffs[pc] and row[k]:
                    v = ctx.sub(v, ctx.mul(coeffs[pc], row[k]))
            out.append(v)
        return out

    def many(self, coeff_arrays) -> list[np.ndarray]:
        """Vectorized version; ``coeff_arrays[k]`` holds slot k for a batch of polynomials."""
        ctx = self.ctx
        out = []
        for k in self.free:
            v = coeff_arrays[k]
            for row, pc in zip(self.rows, self.pivots):
                if row[k]:
                    v = ctx.v_sub(v, ctx.v_mul(coeff_arrays[pc], np.full_like(v, row[k])))
            out.append(v)
        return out

    def contains(self, g: LinPoly) -> bool:
        return not any(self(g.coeffs))


@dataclass(frozen=True)
class RankCode:
    ctx: FieldCtx
    gens: tuple

    def __post_init__(self):
        gens = tuple(self.gens)
        object.__setattr__(self, "gens", gens)
        if not gens:
            raise ValueError("a code needs at least one generator")
        if len(field_rref(self.ctx, [list(g.coeffs) for g in gens])[1]) != len(gens):
            raise ValueError("generators are not F_(q^n)-linearly independent")

    @property
    def dim(self) -> int:
        return len(self.gens)

    @property
    def log_q_size(self) -> int:
        return self.ctx.n * self.dim

    def size(self) -> int:
        return self.ctx.q**self.log_q_size

    def contains(self, g: LinPoly) -> bool:
        return Residual(list(self.gens)).contains(g)

    def is_cf_shape(self) -> bool:
        return self.dim == 2 and self.gens[0] == LinPoly.identity(self.ctx)


def code_from_scattered(f: LinPoly, verify: bool = True) -> RankCode:
    """C_f = {a x + b f(x)}."""
    ctx = f.ctx
    x = LinPoly.identity(ctx)
    if f.span_membership([x]) is not None:
        raise ValueError("f is an F_(q^n)-multiple of x, so C_f degenerates")
    if verify and not is_scattered_fiber(f):
        raise ValueError("f is not scattered")
    return RankCode(ctx, (x, f))


# ---- minimum distance -----------------------------------------------------


def _projective_reps(size: int, k: int, start: int, stop: int) -> np.ndarray:
    """Rows start..stop of the list of vectors in F^k whose last nonzero entry is 1.

    Vectors with last nonzero position l come in blocks of size^l, ordered by l.
    """
    out = []
    offset = 0
    for l in range(k):
        block = size**l
        lo, hi = max(start, offset), min(stop, offset + block)
        if lo < hi:
            idx = np.arange(lo - offset, hi - offset, dtype=np.int64)
            rows = np.zeros((idx.size, k), dtype=np.int64)
            for j in range(l):
                rows[:, j] = (idx // size**j) % size
            rows[:, l] = 1
            out.append(rows)
        offset += block
    return np.vstack(out) if out else np.zeros((0, k), dtype=np.int64)


def num_projective_reps(ctx: FieldCtx, k: int) -> int:
    return (ctx.size**k - 1) // (ctx.size - 1)


def codeword_ranks(code: RankCode, max_enum: int = DEFAULT_MAX_ENUM, progress=None):
    """F_q-ranks of a*gens for every projective representative a; returns (reps, ranks)."""
    ctx = code.ctx
    total = num_projective_reps(ctx, code.dim)
    if total > max_enum:
        raise GuardRailError(f"{total} projective codewords exceed the enumeration limit {max_enum}")
    ctx.require_tables()
    images = np.array([[g(ctx.p**k) for k in range(ctx.rn)] for g in code.gens], dtype=np.int64)
    all_reps, all_ranks = [], []
    for start in range(0, total, RANK_BATCH):
        reps = _projective_reps(ctx.size, code.dim, start, min(total, start + RANK_BATCH))
        img = np.zeros((reps.shape[0], ctx.rn), dtype=np.int64)
        for j in range(code.dim):
            img = ctx.v_add(img, ctx.v_mul(reps[:, j : j + 1], images[j][None, :]))
        ranks = modp.batched_rank(ctx.v_digits(img), ctx.p) // ctx.r
        all_reps.append(reps)
        all_ranks.append(ranks)
        if progress:
            progress(min(total, start + RANK_BATCH), total)
    return np.vstack(all_reps), np.concatenate(all_ranks)


def min_distance(code: RankCode, method: str = "rank", max_enum: int = DEFAULT_MAX_ENUM, progress=None) -> int:
    """Minimum rank over nonzero codewords.

    ``method="rank"`` eliminates over F_p for every projective representative;
    ``method="fiber"`` (C_f codes only) reads kernel sizes off the fibers of f(x)/x:
    ker(a x + f) has 1 + #{x != 0 : f(x)/x = -a} elements.
    """
    ctx = code.ctx
    if method == "rank":
        return int(codeword_ranks(code, max_enum, progress)[1].min())
    if method == "fiber":
        if not code.is_cf_shape():
            raise ValueError("the fiber method needs a code of shape span{x, f}")
        if ctx.size + 1 > max_enum:
            raise GuardRailError(f"{ctx.size + 1} projective codewords exceed the enumeration limit {max_enum}")
        counts = np.bincount(ratios(code.gens[1]), minlength=ctx.size)
        largest = int(counts.max()) + 1
        kdim = round(np.log(largest) / np.log(ctx.q))
        if ctx.q**kdim != largest:
            raise AssertionError("kernel size is not a power of q")
        return ctx.n - kdim
    raise ValueError(f"unknown method {method!r}")


def singleton_log_q_bound(n: int, d: int) -> int:
    """log_q of the largest n x n code with minimum distance d."""
    return n * (n - d + 1)


def is_mrd(code: RankCode, d: int | None = None, **kw) -> bool:
    if d is None:
        d = min_distance(code, **kw)
    return code.log_q_size == singleton_log_q_bound(code.ctx.n, d)


# ---- idealizers -----------------------------------------------------------


@dataclass
class IdealizerReport:
    side: str
    dim_fp: int
    basis: list  # LinPoly F_p-basis
    ctx: FieldCtx = field(repr=False, default=None)
    a_part: int | None = None  # sizes of the x-part and f-part (C_f codes)
    b_part: int | None = None
    elements: list | None = None
    order_profile: dict | None = None

    @property
    def size(self) -> int:
        return self.ctx.p**self.dim_fp

    @property
    def profile_hash(self) -> str | None:
        if self.order_profile is None:
            return None
        blob = json.dumps(sorted(self.order_profile.items())).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def field_degree(self) -> int | None:
        """e with size = q^e, if the size is a power of q."""
        e, s = 0, 1
        while s < self.size:
            s *= self.ctx.q
            e += 1
        return e if s == self.size else None

    def to_json(self) -> dict:
        return {
            "side": self.side,
            "size": self.size,
            "dim_over_fp": self.dim_fp,
            "a_part": self.a_part,
            "b_part": self.b_part,
            "order_profile": None if self.order_profile is None else {str(k): v for k, v in sorted(self.order_profile.items())},
            "profile_hash": self.profile_hash,
            "basis": [g.to_json() for g in self.basis],
        }


def _param_basis(ctx: FieldCtx) -> list[LinPoly]:
    """F_p-basis of all q-polynomials: p^k x^(q^i)."""
    return [LinPoly.monomial(ctx, i, ctx.p**k) for i in range(ctx.n) for k in range(ctx.rn)]


def _tests(code: RankCode, side: str, phi: LinPoly) -> list[LinPoly]:
    ctx = code.ctx
    if side == "right":
        return [g.compose(phi) for g in code.gens]
    # C is an F_(q^n)-space under left scalars, so beta g with beta in an F_q-basis spans it over F_q
    return [phi.compose(g.scale(b)) for g in code.gens for b in ctx.basis_qn]


def idealizer(code: RankCode, side: str, *, enumerate_limit: int = PROFILE_LIMIT) -> IdealizerReport:
    """{phi : c o phi in C for all c in C} (right) or {phi : phi o c in C} (left).

    Both conditions are F_p-linear in phi, so the idealizer is the kernel of
    one F_p matrix: rows are an F_p-basis of all q-polynomials, columns the
    digits of the residuals of the test compositions.
    """
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    ctx = code.ctx
    res = Residual(list(code.gens))
    params = _param_basis(ctx)
    rows = []
    for phi in params:
        digits = []
        for g in _tests(code, side, phi):
            for v in res(g.coeffs):
                digits.extend(ctx.digits(v))
        rows.append(digits)
    A = np.array(rows, dtype=np.int64)
    ker = modp.left_nullspace(A, ctx.p) if A.shape[1] else np.eye(len(params), dtype=np.int64)
    basis = []
    for vec in ker:
        phi = LinPoly.zero(ctx)
        for c, base in zip(vec, params):
            if c:
                phi = phi + base.scale(int(c))
        basis.append(phi)
    report = IdealizerReport(side, len(basis), basis, ctx)
    if code.is_cf_shape():
        # every idealizer element phi has phi o x or x o phi in C, so phi = a x + b f
        coords = [_cf_coords(ctx, phi, code.gens[0], code.gens[1]) for phi in basis]
        a_rank = modp.rank(np.array([a for a, _ in coords]), ctx.p) if coords else 0
        b_rank = modp.rank(np.array([b for _, b in coords]), ctx.p) if coords else 0
        report.a_part = ctx.p ** (len(basis) - b_rank)
        report.b_part = ctx.p ** (len(basis) - a_rank)
    if report.size <= enumerate_limit:
        report.elements = _span(ctx, basis)
        report.order_profile = _order_profile(ctx, report.elements)
    return report


def _cf_coords(ctx, phi, x, f):
    """(a, b) digits with phi = a x + b f; phi must lie in span{x, f}."""
    lam = phi.span_membership([x, f])
    if lam is None:
        raise AssertionError("idealizer element outside C_f")
    return ctx.digits(lam[0]), ctx.digits(lam[1])


def _span(ctx, basis) -> list[LinPoly]:
    els = [LinPoly.zero(ctx)]
    for b in basis:
        els = [e + b.scale(c) for e in els for c in range(ctx.p)]
    return els


def composition_order(phi: LinPoly, limit: int) -> int | None:
    ident = LinPoly.identity(phi.ctx)
    cur = phi
    for m in range(1, limit + 1):
        if cur == ident:
            return m
        cur = cur.compose(phi)
    return None


def _order_profile(ctx, elements) -> dict:
    prof = {}
    limit = len(elements)
    for e in elements:
        if e.is_zero():
            continue
        o = composition_order(e, limit)
        prof[o] = prof.get(o, 0) + 1
    return prof


@dataclass
class PairSolutions:
    """All (a, b) with g o (a x + b f) in span{x, f}.

    Stored as a product A x B when the scan decoupled, else as explicit pairs.
    """

    decoupled: bool
    A: np.ndarray | None = None
    B: np.ndarray | None = None
    pairs: np.ndarray | None = None

    def size(self) -> int:
        return int(self.A.size * self.B.size) if self.decoupled else int(len(self.pairs))

    def iter_lex(self):
        """Solutions in lexicographic (a, b) order."""
        if self.decoupled:
            for a in self.A:
                for b in self.B:
                    yield int(a), int(b)
        else:
            for a, b in self.pairs:
                yield int(a), int(b)


def composition_scan(f: LinPoly, g: LinPoly, join_limit: int = DEFAULT_MAX_ENUM) -> PairSolutions:
    """Solve Res(g o (a x)) + Res(g o (b f)) = 0 by scanning a and b separately.

    Res is the residual modulo span{x, f}.  When the a-part and b-part never
    touch a common residual slot (checked on the computed rows), each part
    must vanish on its own; otherwise rows are matched by an exact hash join.
    """
    ctx = f.ctx
    ctx.require_tables()
    res = Residual([LinPoly.identity(ctx), f])
    n, N = ctx.n, ctx.size
    zero = np.zeros(N, dtype=np.int64)
    # slot k of g o (a x) is g_k a^(q^k)
    ax = [ctx.v_mul(np.full(N, c), ctx.frob_all(k)) if c else zero for k, c in enumerate(g.coeffs)]
    # slot k of g o (b f) is sum_{i+j=k} g_i f_j^(q^i) b^(q^i)
    bf = [zero] * n
    for i, gi in enumerate(g.coeffs):
        if not gi:
            continue
        for j, fj in enumerate(f.coeffs):
            if fj:
                k = (i + j) % n
                bf[k] = ctx.v_add(bf[k], ctx.v_mul(ctx.frob_all(i), np.full(N, ctx.mul(gi, ctx.frob(fj, i)))))
    if not res.free:
        els = np.arange(N, dtype=np.int64)
        return PairSolutions(True, els, els)
    ra = np.stack(res.many(ax), axis=1)
    rb = np.stack(res.many(bf), axis=1)
    if not ((ra != 0).any(axis=0) & (rb != 0).any(axis=0)).any():
        return PairSolutions(True, np.nonzero(~ra.any(axis=1))[0], np.nonzero(~rb.any(axis=1))[0])
    table = {}
    for a, row in enumerate(ra):
        table.setdefault(row.tobytes(), []).append(a)
    pairs = []
    for b, row in enumerate(ctx.v_neg(rb)):
        for a in table.get(row.tobytes(), ()):
            pairs.append((a, b))
            if len(pairs) > join_limit:
                raise GuardRailError(f"more than {join_limit} solution pairs in the joined scan")
    pairs = np.array(sorted(pairs), dtype=np.int64).reshape(-1, 2)
    return PairSolutions(False, pairs=pairs)


def idealizer_scan(code: RankCode, side: str) -> IdealizerReport:
    """Enumeration cross-check for C_f codes, scanning a and b separately.

    Right side: phi = a x + b f lies in I_R iff f o phi lies in C_f, which is
    :func:`composition_scan` with g = f.  Left side: a is free and b must kill
    Res(b (f o (beta x))) and Res(b (f o (beta f))) for beta in an F_q-basis.
    """
    if not code.is_cf_shape():
        raise ValueError("the scan needs a code of shape span{x, f}")
    ctx = code.ctx
    ctx.require_tables()
    f = code.gens[1]
    N = ctx.size
    if side == "right":
        sol = composition_scan(f, f)
        size = sol.size()
        if sol.decoupled:
            a_part, b_part = int(sol.A.size), int(sol.B.size)
        else:
            a_part = int((sol.pairs[:, 1] == 0).sum())
            b_part = int((sol.pairs[:, 0] == 0).sum())
        pairs = list(sol.iter_lex()) if size <= PROFILE_LIMIT else None
    elif side == "left":
        res = Residual(list(code.gens))
        els = np.arange(N, dtype=np.int64)
        ok = np.ones(N, dtype=bool)
        for beta in ctx.basis_qn:
            for g in (f.precompose_scalar(beta), f.compose(f.scale(beta))):
                for v in res(g.coeffs):
                    ok &= ctx.v_mul(els, np.full(N, v)) == 0
        size = N * int(ok.sum())
        a_part, b_part = N, int(ok.sum())
        pairs = None
    else:
        raise ValueError("side must be 'left' or 'right'")
    dim = round(np.log(size) / np.log(ctx.p))
    report = IdealizerReport(side, dim, [], ctx, a_part, b_part)
    if pairs is not None:
        x = LinPoly.identity(ctx)
        report.elements = [x.scale(a) + f.scale(b) for a, b in pairs]
        report.order_profile = _order_profile(ctx, report.elements)
    return report


def code_summary(code: RankCode, h: int | None = None, **kw) -> dict:
    ctx = code.ctx
    d = min_distance(code, **kw)
    return {
        "q": ctx.q,
        "n": ctx.n,
        "h": None if h is None else ctx.to_hex(h),
        "min_distance": d,
        "is_mrd": is_mrd(code, d),
        "I_L": idealizer(code, "left").size,
        "I_R": idealizer(code, "right").size,
    }
