"""The polynomials psi_{h,t}, their L + M splitting, and the classical scattered families."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ClaimCheckError
from .gf import FieldCtx
from .linpoly import LinPoly


class InadmissibleError(ValueError):
    """Raised when h (or a family parameter) violates a defining condition."""

    def __init__(self, message, check=None):
        super().__init__(message)
        self.check = check


@dataclass(frozen=True)
class HCheck:
    norm_is_minus_one: bool
    outside_half_field: bool
    q2_condition: bool
    qt2_condition: bool

    @property
    def admissible(self) -> bool:
        return self.norm_is_minus_one and self.outside_half_field

    def failed(self) -> list[str]:
        names = {
            "norm_is_minus_one": "h^(q^t+1) = -1",
            "outside_half_field": "h not in F_(q^t)",
            "q2_condition": "h^(q^2+1) != 1",
            "qt2_condition": "h^(q^(t-2)) != -h",
        }
        return [text for key, text in names.items() if not getattr(self, key)]

    def to_json(self) -> dict:
        return {
            "norm_is_minus_one": self.norm_is_minus_one,
            "outside_half_field": self.outside_half_field,
            "q2_condition": self.q2_condition,
            "qt2_condition": self.qt2_condition,
        }


def check_h(ctx: FieldCtx, h: int) -> HCheck:
    q, t = ctx.q, ctx.t
    c = HCheck(
        norm_is_minus_one=h != 0 and ctx.pow(h, q**t + 1) == ctx.minus_one,
        outside_half_field=not ctx.in_subfield(h, t),
        q2_condition=ctx.pow(h, q**2 + 1) != 1,
        qt2_condition=ctx.frob(h, t - 2) != ctx.neg(h),
    )
    if c.admissible and not (c.q2_condition and c.qt2_condition):
        raise ClaimCheckError("admissible h satisfies h^(q^2+1) != 1 and h^(q^(t-2)) != -h", ctx.to_hex(h))
    return c


def require_admissible(ctx: FieldCtx, h: int) -> HCheck:
    if ctx.p == 2:
        raise InadmissibleError("psi_{h,t} needs odd characteristic")
    if ctx.t < 3:
        raise InadmissibleError(f"psi_{{h,t}} needs t >= 3, got t={ctx.t}")
    c = check_h(ctx, h)
    if not c.admissible:
        failed = [name for name in c.failed() if name.startswith(("h^(q^t", "h not"))]
        raise InadmissibleError(f"h={ctx.to_hex(h)} fails: " + ", ".join(failed), c)
    return c


def psi(ctx: FieldCtx, h: int, allow_half_field: bool = False) -> LinPoly:
    """x^q + x^(q^(t-1)) - h^(1-q^(t+1)) x^(q^(t+1)) + h^(1-q^(2t-1)) x^(q^(2t-1)).

    ``allow_half_field`` also accepts h in F_(q^t) with h^2 = -1, where the
    formula degenerates to x^q + x^(q^(t-1)) -+ x^(q^(t+1)) +- x^(q^(2t-1)).
    """
    if allow_half_field and ctx.in_subfield(h, ctx.t) and h and ctx.mul(h, h) == ctx.minus_one:
        if ctx.p == 2 or ctx.t < 3:
            raise InadmissibleError("psi_{h,t} needs odd characteristic and t >= 3")
    else:
        require_admissible(ctx, h)
    q, t = ctx.q, ctx.t
    return LinPoly.from_terms(
        ctx,
        {
            1: 1,
            t - 1: 1,
            t + 1: ctx.neg(ctx.pow(h, 1 - q ** (t + 1))),
            2 * t - 1: ctx.pow(h, 1 - q ** (2 * t - 1)),
        },
    )


@dataclass(frozen=True)
class Subspace:
    """An F_q-subspace given as the kernel of ``equation``, with an F_q-basis."""

    equation: LinPoly
    basis: tuple

    @classmethod
    def from_equation(cls, eq: LinPoly) -> "Subspace":
        return cls(eq, tuple(eq.kernel()))

    @property
    def dim(self) -> int:
        return len(self.basis)

    def contains(self, x: int) -> bool:
        return self.equation(x) == 0

    def elements(self) -> np.ndarray:
        return self.equation.kernel_elements()


@dataclass(frozen=True)
class LMSplit:
    L: LinPoly
    M: LinPoly
    ker_L: Subspace
    ker_M: Subspace
    im_L: Subspace
    im_M: Subspace


def lm_split(ctx: FieldCtx, h: int, verify: bool = True) -> LMSplit:
    require_admissible(ctx, h)
    q, t = ctx.q, ctx.t
    qt = q**t
    L = LinPoly.from_terms(ctx, {1: 1, t + 1: ctx.neg(ctx.pow(h, 1 - q ** (t + 1)))})
    M = LinPoly.from_terms(ctx, {t - 1: 1, 2 * t - 1: ctx.pow(h, 1 - q ** (2 * t - 1))})
    ker_L = LinPoly.from_terms(ctx, {0: 1, t: ctx.neg(ctx.pow(h, q ** (2 * t - 1) - qt))})
    ker_M = LinPoly.from_terms(ctx, {0: 1, t: ctx.pow(h, q ** (t + 1) - qt)})
    im_L = LinPoly.from_terms(ctx, {t: 1, 0: ctx.pow(h, qt - q)})
    im_M = LinPoly.from_terms(ctx, {t: 1, 0: ctx.neg(ctx.pow(h, qt - q ** (t - 1)))})
    split = LMSplit(L, M, *(Subspace.from_equation(e) for e in (ker_L, ker_M, im_L, im_M)))
    if verify:
        if L + M != psi(ctx, h):
            raise ClaimCheckError("psi = L + M")
        for name, sub in (("ker L", split.ker_L), ("ker M", split.ker_M), ("im L", split.im_L), ("im M", split.im_M)):
            if sub.dim != t:
                raise ClaimCheckError(f"{name} is a 1-dimensional F_(q^t)-subspace", f"dim over F_q = {sub.dim}")
        if ctx.has_tables:
            _same(L.kernel_elements(), split.ker_L.elements(), "ker L matches its defining equation")
            _same(M.kernel_elements(), split.ker_M.elements(), "ker M matches its defining equation")
            _same(L.image_elements(), split.im_L.elements(), "im L matches its defining equation")
            _same(M.image_elements(), split.im_M.elements(), "im M matches its defining equation")
        else:
            for b in split.ker_L.basis:
                if L(b):
                    raise ClaimCheckError("ker L matches its defining equation")
            for b in split.ker_M.basis:
                if M(b):
                    raise ClaimCheckError("ker M matches its defining equation")
    return split


def _same(a, b, claim):
    if not np.array_equal(np.sort(a), np.sort(b)):
        raise ClaimCheckError(claim)


def rt_maps(ctx: FieldCtx, h: int) -> tuple[LinPoly, LinPoly]:
    """R(x) = x^(q^t) + h^(q^(t-1)-q) x and T(x) = x^(q^t) + h^(q-q^(t-1)) x."""
    require_admissible(ctx, h)
    q, t = ctx.q, ctx.t
    R = LinPoly.from_terms(ctx, {t: 1, 0: ctx.pow(h, q ** (t - 1) - q)})
    T = LinPoly.from_terms(ctx, {t: 1, 0: ctx.pow(h, q - q ** (t - 1))})
    return R, T


def least_nonzero(sub_basis, ctx: FieldCtx) -> int:
    """Smallest nonzero code in the F_q-span of ``sub_basis``."""
    if ctx.has_tables:
        eq_elems = _span_elements(ctx, sub_basis)
        return int(eq_elems[eq_elems > 0].min())
    # reduced echelon bases have their least element among the basis vectors
    return min(sub_basis)


def _span_elements(ctx: FieldCtx, basis) -> np.ndarray:
    els = np.zeros(1, dtype=np.int64)
    for b in basis:
        multiples = ctx.v_mul(np.arange(ctx.q, dtype=np.int64), np.full(ctx.q, b))
        els = ctx.v_add(els[:, None], multiples[None, :]).ravel()
    return np.unique(els)


def kernel_generators(ctx: FieldCtx, h: int) -> tuple[int, int]:
    """Least nonzero elements rho of ker R and tau of ker T."""
    R, T = rt_maps(ctx, h)
    return least_nonzero(R.kernel(), ctx), least_nonzero(T.kernel(), ctx)


def half_field_components(ctx: FieldCtx, gamma: int, rho: int) -> tuple[int, int]:
    """(lam, mu) in F_(q^t) with gamma = lam + mu * rho, for rho outside F_(q^t)."""
    t = ctx.t
    den = ctx.sub(rho, ctx.frob(rho, t))
    if den == 0:
        raise ValueError("rho lies in F_(q^t)")
    mu = ctx.div(ctx.sub(gamma, ctx.frob(gamma, t)), den)
    lam = ctx.sub(gamma, ctx.mul(mu, rho))
    return lam, mu


def basis_change_check(ctx: FieldCtx, h: int, gamma: int, rho: int | None = None) -> bool:
    """Compare {1, tau}-components of gamma with the closed form, tau = h^(q^(t-1)-q) rho."""
    q, t = ctx.q, ctx.t
    if rho is None:
        rho = kernel_generators(ctx, h)[0]
    c = ctx.pow(h, q ** (t - 1) - q)
    tau = ctx.mul(c, rho)
    lam1, mu1 = half_field_components(ctx, gamma, rho)
    lam2, mu2 = half_field_components(ctx, gamma, tau)
    predicted = ctx.add(lam1, ctx.mul(ctx.mul(mu1, rho), ctx.sub(1, c)))
    return lam2 == predicted and mu2 == mu1 and ctx.in_subfield(predicted, t)


# ---- classical families -------------------------------------------------


def pseudo_regulus(ctx: FieldCtx, s: int) -> LinPoly:
    n = ctx.n
    if not 1 <= s <= n - 1 or math.gcd(s, n) != 1:
        raise InadmissibleError(f"x^(q^s) needs 1 <= s <= n-1 and gcd(s,n)=1 (s={s}, n={n})")
    return LinPoly.monomial(ctx, s)


def lunardon_polverino(ctx: FieldCtx, s: int, delta: int) -> LinPoly:
    n = ctx.n
    if n < 4:
        raise InadmissibleError(f"delta x^(q^s) + x^(q^(n-s)) needs n >= 4 (n={n})")
    if not 1 <= s <= n - 1 or math.gcd(s, n) != 1:
        raise InadmissibleError(f"delta x^(q^s) + x^(q^(n-s)) needs gcd(s,n)=1 (s={s}, n={n})")
    if ctx.norm(delta) in (0, 1):
        raise InadmissibleError("delta x^(q^s) + x^(q^(n-s)) needs N_(q^n/q)(delta) not in {0, 1}")
    return LinPoly.from_terms(ctx, {s: delta, n - s: 1})


def lz_base(ctx: FieldCtx) -> LinPoly:
    """(x^q + x^(q^(t-1)) - x^(q^(t+1)) + x^(q^(2t-1))) / 2."""
    t = ctx.t
    half = ctx.inv(2)
    return LinPoly.from_terms(ctx, {1: half, t - 1: half, t + 1: ctx.neg(half), 2 * t - 1: half})


def longobardi_zanella(ctx: FieldCtx, k: int) -> LinPoly:
    """k-fold composition of :func:`lz_base`."""
    q, t = ctx.q, ctx.t
    if q % 2 == 0:
        raise InadmissibleError("the psi^(k) family needs q odd")
    if k < 1:
        raise InadmissibleError("the psi^(k) family needs k >= 1")
    if t % 2 == 0:
        if math.gcd(k, t) != 1:
            raise InadmissibleError(f"t even requires gcd(k,t)=1 (k={k}, t={t})")
    elif math.gcd(k, 2 * t) != 1 or q % 4 != 1:
        raise InadmissibleError(f"t odd requires gcd(k,2t)=1 and q = 1 mod 4 (k={k}, t={t}, q={q})")
    base = lz_base(ctx)
    f = base
    for _ in range(k - 1):
        f = base.compose(f)
    return f


@dataclass(frozen=True)
class FamilySpec:
    """Parsed form of "pr:s=1", "lp:s=1,delta=<hex>", "lz:k=1" or "psi:h=<hex>"."""

    kind: str
    params: dict = field(default_factory=dict)

    KINDS = ("pr", "lp", "lz", "psi")

    @classmethod
    def parse(cls, text: str) -> "FamilySpec":
        kind, _, rest = text.strip().partition(":")
        kind = kind.lower()
        if kind not in cls.KINDS:
            raise ValueError(f"unknown family kind {kind!r} (expected one of {', '.join(cls.KINDS)})")
        params = {}
        for item in filter(None, rest.split(",")):
            key, eq, value = item.partition("=")
            if not eq:
                raise ValueError(f"malformed parameter {item!r}")
            params[key.strip()] = value.strip()
        required = {"pr": {"s"}, "lp": {"s", "delta"}, "lz": {"k"}, "psi": {"h"}}[kind]
        if set(params) != required:
            raise ValueError(f"{kind} expects parameters {sorted(required)}, got {sorted(params)}")
        return cls(kind, params)

    def __str__(self):
        return self.kind + ":" + ",".join(f"{k}={v}" for k, v in sorted(self.params.items()))

    def build(self, ctx: FieldCtx) -> LinPoly:
        P = self.params
        if self.kind == "pr":
            return pseudo_regulus(ctx, int(P["s"]))
        if self.kind == "lp":
            return lunardon_polverino(ctx, int(P["s"]), ctx.from_hex(P["delta"]))
        if self.kind == "lz":
            return longobardi_zanella(ctx, int(P["k"]))
        return psi(ctx, ctx.from_hex(P["h"]))


def known_family(spec: FamilySpec, ctx: FieldCtx) -> LinPoly:
    return spec.build(ctx)
