"""Exact arithmetic in the tower F_p < F_q = F_{p^r} < F_{q^n}, with n = 2t.

Elements are plain Python ints ("codes").  An element of F_{q^n} is the
polynomial sum c_i X^i modulo ``irr_qn``; each coordinate c_i lies in F_q and
is itself an int < q whose base-p digits are its coordinates over F_p modulo
``irr_q``.  The code packs everything as sum c_i q^i, so the base-p digits of
a code are its coordinates over F_p in the basis Y^s X^i, and ``basis_qn`` is
the power basis (1, X, ..., X^{n-1}) with codes q^i.  Integer order on codes
is the enumeration order used everywhere.

Fields with at most ``TABLE_LIMIT`` elements get log/exp tables and
vectorized ``v_*`` operations on numpy arrays; larger fields (up to 2^40
elements) only support the scalar polynomial path.
"""

from __future__ import annotations

import functools
import json
import math

import numpy as np

from .errors import ClaimCheckError, GuardRailError

MAX_FIELD_BITS = 40
TABLE_LIMIT = 1 << 21
_LIST_LIMIT = 1 << 20
_SUBFIELD_TABLE_LIMIT = 1 << 10


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def prime_factors(n: int) -> list[int]:
    out = []
    f = 2
    while f * f <= n:
        if n % f == 0:
            out.append(f)
            while n % f == 0:
                n //= f
        f += 1
    if n > 1:
        out.append(n)
    return out


class _SmallField:
    """F_p[y]/(modulus) on ints < p^r; degree-1 moduli give plain F_p."""

    def __init__(self, p: int, r: int, modulus=(0, 1)):
        self.p, self.r, self.q = p, r, p**r
        self.modulus = tuple(modulus)
        if r > 1:
            q = self.q
            digits = [[(a // p**j) % p for j in range(r)] for a in range(q)]
            pw = [p**j for j in range(r)]
            add = np.zeros((q, q), dtype=np.int64)
            mul = np.zeros((q, q), dtype=np.int64)
            for a in range(q):
                for b in range(q):
                    add[a, b] = sum(((x + y) % p) * w for x, y, w in zip(digits[a], digits[b], pw))
                    prod = [0] * (2 * r - 1)
                    for i, x in enumerate(digits[a]):
                        if x:
                            for j, y in enumerate(digits[b]):
                                prod[i + j] = (prod[i + j] + x * y) % p
                    for k in range(2 * r - 2, r - 1, -1):
                        c = prod[k]
                        if c:
                            for j in range(r + 1):
                                prod[k - r + j] = (prod[k - r + j] - c * modulus[j]) % p
                    mul[a, b] = sum(prod[j] * pw[j] for j in range(r))
            self._add = add.tolist()
            self._mul = mul.tolist()
            self._neg = [sum(((-x) % p) * w for x, w in zip(digits[a], pw)) for a in range(q)]
            self._inv = [0] * q
            for a in range(1, q):
                self._inv[a] = next(b for b in range(1, q) if self._mul[a][b] == 1)

    def add(self, a, b):
        return (a + b) % self.p if self.r == 1 else self._add[a][b]

    def neg(self, a):
        return (-a) % self.p if self.r == 1 else self._neg[a]

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        return (a * b) % self.p if self.r == 1 else self._mul[a][b]

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        return pow(a, -1, self.p) if self.r == 1 else self._inv[a]


# polynomials over a _SmallField: little-endian coefficient lists, no trailing zeros


def _trim(a):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def _psub(F, a, b):
    out = [0] * max(len(a), len(b))
    for i, c in enumerate(a):
        out[i] = c
    for i, c in enumerate(b):
        out[i] = F.sub(out[i], c)
    return _trim(out)


def _pmul(F, a, b):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    out[i + j] = F.add(out[i + j], F.mul(x, y))
    return _trim(out)


def _pmod(F, a, m):
    a = _trim(a)
    dm = len(m) - 1
    inv_lead = F.inv(m[-1])
    while len(a) - 1 >= dm:
        c = F.mul(a[-1], inv_lead)
        shift = len(a) - 1 - dm
        for j, y in enumerate(m):
            a[shift + j] = F.sub(a[shift + j], F.mul(c, y))
        a = _trim(a)
    return a


def _ppowmod(F, base, e, m):
    result = [1]
    base = _pmod(F, base, m)
    while e:
        if e & 1:
            result = _pmod(F, _pmul(F, result, base), m)
        e >>= 1
        if e:
            base = _pmod(F, _pmul(F, base, base), m)
    return result


def _pgcd(F, a, b):
    a, b = _trim(a), _trim(b)
    while b:
        a, b = b, _pmod(F, a, b)
    return a


def is_irreducible(F, f) -> bool:
    """Rabin's test for a monic polynomial over the small field ``F``."""
    f = _trim(f)
    d = len(f) - 1
    if d < 1:
        return False
    if d == 1:
        return True
    x = [0, 1]
    frob = [x]
    for _ in range(d):
        frob.append(_ppowmod(F, frob[-1], F.q, f))
    if _pmod(F, frob[d], f) != _pmod(F, x, f):
        return False
    for ell in prime_factors(d):
        g = _pgcd(F, f, _psub(F, frob[d // ell], x))
        if len(g) != 1:
            return False
    return True


def least_irreducible(F, d: int) -> tuple[int, ...]:
    """Least monic irreducible of degree d over F, ordered by the integer sum c_i Q^i."""
    Q = F.q
    for code in range(Q**d):
        coeffs = [(code // Q**i) % Q for i in range(d)] + [1]
        if is_irreducible(F, coeffs):
            return tuple(coeffs)
    raise ClaimCheckError("irreducible polynomials exist in every degree", f"none found for degree {d}")


class FieldCtx:
    """Immutable description of F_p < F_q < F_{q^n}; build it with :func:`make_field_ctx`."""

    def __init__(self, p: int, r: int, t: int):
        self.p, self.r, self.t = p, r, t
        self.q = p**r
        self.n = 2 * t
        self.rn = r * self.n
        self.size = self.q**self.n
        self.order = self.size - 1
        self._fp = _SmallField(p, 1)
        self.irr_q = least_irreducible(self._fp, r) if r > 1 else (0, 1)
        self._fq = _SmallField(p, r, self.irr_q)
        self.irr_qn = least_irreducible(self._fq, self.n)
        self.basis_qn = tuple(self.q**i for i in range(self.n))
        self.has_tables = self.size <= TABLE_LIMIT
        if self.has_tables:
            self._build_tables()

    def __repr__(self):
        return f"FieldCtx(p={self.p}, r={self.r}, t={self.t})"

    def __reduce__(self):
        return (make_field_ctx, (self.p, self.r, self.t))

    # ---- coordinates -------------------------------------------------

    def coords(self, x: int) -> list[int]:
        """F_q coordinates of x in the power basis."""
        q = self.q
        return [(x // q**i) % q for i in range(self.n)]

    def from_coords(self, cs) -> int:
        q = self.q
        return sum(int(c) * q**i for i, c in enumerate(cs))

    def digits(self, x: int) -> list[int]:
        """F_p coordinates of x (the base-p digits of its code)."""
        p = self.p
        return [(x // p**k) % p for k in range(self.rn)]

    def v_digits(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.int64)
        return (xs[..., None] // self._pw) % self.p

    def from_digits(self, ds) -> int:
        return sum(int(d) * self.p**k for k, d in enumerate(ds))

    def to_hex(self, x: int) -> str:
        return format(int(x), "x")

    def from_hex(self, s: str) -> int:
        x = int(s, 16)
        if not 0 <= x < self.size:
            raise ValueError(f"element code {s} out of range for a field of size {self.size}")
        return x

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "r": self.r,
            "t": self.t,
            "q": self.q,
            "n": self.n,
            "irr_q": list(self.irr_q),
            "irr_qn": list(self.irr_qn),
            "basis_qn": "power",
        }

    def elements(self) -> np.ndarray:
        self.require_tables()
        return np.arange(self.size, dtype=np.int64)

    def require_tables(self, max_bits: int | None = None):
        if not self.has_tables:
            raise GuardRailError(f"enumeration over {self.size} elements exceeds the table limit {TABLE_LIMIT}")
        if max_bits is not None and self.size > 1 << max_bits:
            raise GuardRailError(f"enumeration over {self.size} elements exceeds 2^{max_bits}")

    # ---- polynomial path ----------------------------------------------

    def _mul_poly(self, x: int, y: int) -> int:
        F = self._fq
        prod = _pmul(F, _trim(self.coords(x)), _trim(self.coords(y)))
        return self.from_coords(_pmod(F, prod, list(self.irr_qn)))

    def _pow_poly(self, x: int, e: int) -> int:
        """Square-and-multiply on the polynomial representation."""
        result = 1
        while e:
            if e & 1:
                result = self._mul_poly(result, x)
            e >>= 1
            if e:
                x = self._mul_poly(x, x)
        return result

    def _add_digits(self, x: int, y: int) -> int:
        p = self.p
        out, w = 0, 1
        while x or y:
            out += ((x % p + y % p) % p) * w
            x //= p
            y //= p
            w *= p
        return out

    def _neg_digits(self, x: int) -> int:
        p = self.p
        out, w = 0, 1
        while x:
            out += ((-(x % p)) % p) * w
            x //= p
            w *= p
        return out

    # ---- tables ------------------------------------------------------

    def _find_primitive(self) -> int:
        N = self.order
        ps = prime_factors(N)
        for g in range(2 if self.size > 2 else 1, self.size):
            if all(self._pow_poly(g, N // ell) != 1 for ell in ps):
                return g
        raise ClaimCheckError("F_{q^n}^* is cyclic", "no primitive element found")

    def _build_tables(self):
        p, rn, N = self.p, self.rn, self.order
        self._pw = p ** np.arange(rn, dtype=np.int64)
        g = self._find_primitive()
        self.primitive = g
        # multiplication by g as an F_p-linear map on digit rows
        Mg = np.array([self.digits(self._mul_poly(p**k, g)) for k in range(rn)], dtype=np.int64)
        B = min(N, 2048)
        V = np.zeros((B, rn), dtype=np.int64)
        v = np.array(self.digits(1), dtype=np.int64)
        for i in range(B):
            V[i] = v
            v = (v @ Mg) % p
        MB = np.eye(rn, dtype=np.int64)
        base, e = Mg, B
        while e:
            if e & 1:
                MB = (MB @ base) % p
            base = (base @ base) % p
            e >>= 1
        blocks, total, cur = [V], B, V
        while total < N:
            cur = (cur @ MB) % p
            blocks.append(cur)
            total += B
        exp = (np.vstack(blocks)[:N] @ self._pw).astype(np.int64)
        log = np.full(self.size, -1, dtype=np.int64)
        log[exp] = np.arange(N, dtype=np.int64)
        if (log[1:] < 0).any() or log[0] != -1:
            raise ClaimCheckError("powers of a primitive element exhaust F_{q^n}^*")
        self._exp, self._log = exp, log
        lo = (rn + 1) // 2
        self._P = p**lo
        self._addlo = self._digit_add_table(lo)
        self._addhi = self._digit_add_table(rn - lo)
        neg = np.zeros(self.size, dtype=np.int64)
        ar = np.arange(self.size, dtype=np.int64)
        for k in range(rn):
            neg += ((-((ar // self._pw[k]) % p)) % p) * self._pw[k]
        self._negt = neg
        if self.size <= _LIST_LIMIT:
            self._expl, self._logl, self._negl = exp.tolist(), log.tolist(), neg.tolist()
        else:
            self._expl, self._logl, self._negl = exp, log, neg

    def _digit_add_table(self, k: int) -> np.ndarray:
        p = self.p
        P = p**k
        a = np.arange(P, dtype=np.int64)
        T = np.zeros((P, P), dtype=np.int64)
        for j in range(k):
            d = (a // p**j) % p
            T += ((d[:, None] + d[None, :]) % p) * p**j
        return T

    # ---- scalar arithmetic -------------------------------------------

    def add(self, x: int, y: int) -> int:
        if self.has_tables:
            P = self._P
            return int(self._addlo[x % P, y % P]) + P * int(self._addhi[x // P, y // P])
        return self._add_digits(x, y)

    def neg(self, x: int) -> int:
        if self.has_tables:
            return int(self._negl[x])
        return self._neg_digits(x)

    def sub(self, x: int, y: int) -> int:
        return self.add(x, self.neg(y))

    def mul(self, x: int, y: int) -> int:
        if x == 0 or y == 0:
            return 0
        if self.has_tables:
            e = int(self._logl[x]) + int(self._logl[y])
            if e >= self.order:
                e -= self.order
            return int(self._expl[e])
        return self._mul_poly(x, y)

    def pow(self, x: int, e: int) -> int:
        """x**e; negative exponents are allowed for nonzero x."""
        if x == 0:
            if e < 0:
                raise ZeroDivisionError("negative power of zero")
            return 1 if e == 0 else 0
        e %= self.order
        if self.has_tables:
            return int(self._expl[(int(self._logl[x]) * e) % self.order])
        return self._pow_poly(x, e)

    def inv(self, x: int) -> int:
        if x == 0:
            raise ZeroDivisionError("inverse of zero in F_{q^n}")
        return self.pow(x, -1)

    def div(self, x: int, y: int) -> int:
        return self.mul(x, self.inv(y))

    def arith(self, x: int, y: int | None, kind: str, e: int | None = None) -> int:
        if kind == "add":
            return self.add(x, y)
        if kind == "sub":
            return self.sub(x, y)
        if kind == "mul":
            return self.mul(x, y)
        if kind == "inv":
            return self.inv(x)
        if kind == "neg":
            return self.neg(x)
        if kind == "pow":
            return self.pow(x, e)
        raise ValueError(f"unknown operation {kind!r}")

    def frob(self, x: int, j: int) -> int:
        """x^(q^j), j taken mod n."""
        return self.pow(x, self.q ** (j % self.n))

    def aut(self, x: int, e: int) -> int:
        """The field automorphism x -> x^(p^e), e taken mod rn."""
        return self.pow(x, self.p ** (e % self.rn))

    def in_subfield(self, x: int, m: int) -> bool:
        if self.n % m:
            raise ValueError(f"{m} does not divide n={self.n}")
        return self.frob(x, m) == x

    def norm(self, x: int, m: int = 1) -> int:
        """Norm from F_{q^n} down to F_{q^m}."""
        if self.n % m:
            raise ValueError(f"{m} does not divide n={self.n}")
        y = self.pow(x, (self.size - 1) // (self.q**m - 1))
        if not self.in_subfield(y, m):
            raise ClaimCheckError("the norm lands in the subfield", f"m={m}")
        return y

    def trace(self, x: int, m: int = 1) -> int:
        """Trace from F_{q^n} down to F_{q^m}."""
        if self.n % m:
            raise ValueError(f"{m} does not divide n={self.n}")
        y = 0
        for i in range(self.n // m):
            y = self.add(y, self.frob(x, m * i))
        if not self.in_subfield(y, m):
            raise ClaimCheckError("the trace lands in the subfield", f"m={m}")
        return y

    def norm_trace(self, x: int, m: int, kind: str) -> int:
        if kind == "norm":
            return self.norm(x, m)
        if kind == "trace":
            return self.trace(x, m)
        raise ValueError(f"unknown kind {kind!r}")

    @property
    def minus_one(self) -> int:
        return self.neg(1)

    def random_element(self, rng, nonzero: bool = False) -> int:
        return rng.randrange(1 if nonzero else 0, self.size)

    # ---- vectorized arithmetic (table fields only) -------------------

    def v_add(self, x, y):
        x = np.asarray(x, dtype=np.int64)
        y = np.asarray(y, dtype=np.int64)
        P = self._P
        return self._addlo[x % P, y % P] + P * self._addhi[x // P, y // P]

    def v_neg(self, x):
        return self._negt[np.asarray(x, dtype=np.int64)]

    def v_sub(self, x, y):
        return self.v_add(x, self.v_neg(y))

    def v_mul(self, x, y):
        lx = self._log[np.asarray(x, dtype=np.int64)]
        ly = self._log[np.asarray(y, dtype=np.int64)]
        res = self._exp[(lx + ly) % self.order]
        return np.where((lx < 0) | (ly < 0), 0, res)

    def v_pow(self, x, e: int):
        lx = self._log[np.asarray(x, dtype=np.int64)]
        if e < 0 and (lx < 0).any():
            raise ZeroDivisionError("negative power of zero")
        res = self._exp[(lx * (e % self.order)) % self.order]
        return np.where(lx < 0, 1 if e == 0 else 0, res)

    def v_inv(self, x):
        return self.v_pow(x, -1)

    def v_div(self, x, y):
        return self.v_mul(x, self.v_inv(y))

    def v_frob(self, x, j: int):
        return self.v_pow(x, self.q ** (j % self.n))

    def v_aut(self, x, e: int):
        return self.v_pow(x, self.p ** (e % self.rn))

    def frob_all(self, j: int) -> np.ndarray:
        """x^(q^j) for every element x, indexed by code (cached)."""
        j %= self.n
        cache = self.__dict__.setdefault("_frob_cache", {})
        if j not in cache:
            cache[j] = self.v_frob(np.arange(self.size, dtype=np.int64), j)
        return cache[j]

    def v_log(self, x):
        """Discrete logs to the primitive element; -1 marks zero."""
        return self._log[np.asarray(x, dtype=np.int64)]

    def v_exp(self, k):
        return self._exp[np.asarray(k, dtype=np.int64) % self.order]

    def v_in_subfield(self, x, m: int):
        return self.v_frob(x, m) == np.asarray(x)

    def subfield_elements(self, m: int) -> np.ndarray:
        """F_{q^m} inside F_{q^n}, sorted by code."""
        if self.n % m:
            raise ValueError(f"{m} does not divide n={self.n}")
        self.require_tables()
        step = self.order // (self.q**m - 1)
        els = np.concatenate([[0], self._exp[::step]])
        return np.sort(els)


@functools.lru_cache(maxsize=None)
def make_field_ctx(p: int, r: int, t: int, seed_policy: str = "lex-least") -> FieldCtx:
    """Build (and cache) the tower for q = p^r and n = 2t.

    Irreducibles are the least monic irreducible polynomials under the
    order ``sum c_i base^i`` of their non-leading coefficients, so equal
    inputs always give identical contexts.
    """
    if seed_policy != "lex-least":
        raise ValueError(f"unknown seed policy {seed_policy!r}")
    if not isinstance(p, int) or not is_prime(p):
        raise ValueError(f"p={p} is not prime")
    if r < 1 or t < 1:
        raise ValueError("r and t must be positive")
    if (2 * t * r) * math.log2(p) > MAX_FIELD_BITS:
        raise GuardRailError(f"q^n = {p}^{2 * t * r} exceeds 2^{MAX_FIELD_BITS}")
    if r > 1 and p**r > _SUBFIELD_TABLE_LIMIT:
        raise ValueError(f"q = {p}^{r} is out of the supported range (q <= {_SUBFIELD_TABLE_LIMIT} when r > 1)")
    return FieldCtx(p, r, t)


def admissible_h(ctx: FieldCtx) -> list[int]:
    """All h with h^(q^t+1) = -1 and h outside F_{q^t}, by full enumeration."""
    if ctx.p == 2:
        raise ValueError("admissible h needs odd q")
    ctx.require_tables()
    xs = np.arange(1, ctx.size, dtype=np.int64)
    t, q = ctx.t, ctx.q
    hit = (ctx.v_pow(xs, q**t + 1) == ctx.minus_one) & ~ctx.v_in_subfield(xs, t)
    return [int(h) for h in xs[hit]]


def field_json(ctx: FieldCtx) -> str:
    return json.dumps(ctx.to_json(), sort_keys=True)
