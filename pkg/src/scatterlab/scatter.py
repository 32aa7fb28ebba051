"""Scatteredness tests and the linear set L_f in PG(1, q^n).

A projective point <(x, y)> with x != 0 is stored as the affine code of
m = y/x (normalized to (1, m)); the point <(0, 1)> is stored as ``ctx.size``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import modp
from .gf import FieldCtx
from .linpoly import LinPoly

GAMMA_BATCH = 4096


@dataclass(frozen=True)
class ScatterResult:
    scattered: bool
    method: str
    witness: tuple | None = None  # (z, y) for the fiber test, (gamma, x) for the gamma test

    def __bool__(self):
        return self.scattered


def ratios(f: LinPoly, xs=None) -> np.ndarray:
    """f(x)/x for x in ``xs`` (default: every nonzero element)."""
    ctx = f.ctx
    if xs is None:
        ctx.require_tables()
        xs = np.arange(1, ctx.size, dtype=np.int64)
    return ctx.v_div(f.eval_many(xs), xs)


def is_scattered_fiber(f: LinPoly) -> ScatterResult:
    """Every value of f(x)/x on F_(q^n)^* is taken exactly q-1 times."""
    ctx = f.ctx
    xs = np.arange(1, ctx.size, dtype=np.int64)
    vals = ratios(f, xs)
    counts = np.bincount(vals, minlength=ctx.size)
    bad = np.nonzero(counts > ctx.q - 1)[0]
    if bad.size == 0:
        return ScatterResult(True, "fiber")
    fiber = xs[vals == bad[0]]
    z = int(fiber[0])
    quotients = ctx.v_div(fiber, np.full_like(fiber, z))
    y = int(fiber[quotients >= ctx.q][0])
    return ScatterResult(False, "fiber", (z, y))


def gamma_defect(f: LinPoly, gamma: int) -> LinPoly:
    """The q-polynomial f(gamma x) - gamma f(x)."""
    ctx = f.ctx
    return LinPoly(ctx, tuple(ctx.mul(c, ctx.sub(ctx.frob(gamma, i), gamma)) for i, c in enumerate(f.coeffs)))


def _defect_matrices(f: LinPoly, gammas: np.ndarray) -> np.ndarray:
    ctx = f.ctx
    rows = []
    for k in range(ctx.rn):
        b = ctx.p**k
        img = ctx.v_sub(f.eval_many(ctx.v_mul(gammas, np.full_like(gammas, b))), ctx.v_mul(gammas, np.full_like(gammas, f(b))))
        rows.append(ctx.v_digits(img))
    return np.stack(rows, axis=1)


def is_scattered_gamma(f: LinPoly) -> ScatterResult:
    """No gamma outside F_q has f(gamma x) = gamma f(x) for some x != 0.

    gamma runs over coset representatives of F_(q^n)^* / F_q^*; the condition
    is invariant under scaling gamma by F_q^*.
    """
    ctx = f.ctx
    ctx.require_tables()
    reps = ctx.v_exp(np.arange(1, ctx.order // (ctx.q - 1), dtype=np.int64))
    for start in range(0, reps.size, GAMMA_BATCH):
        batch = reps[start : start + GAMMA_BATCH]
        ranks = modp.batched_rank(_defect_matrices(f, batch), ctx.p)
        hit = np.nonzero(ranks < ctx.rn)[0]
        if hit.size:
            gamma = int(batch[hit[0]])
            x = int(gamma_defect(f, gamma).kernel()[0])
            return ScatterResult(False, "gamma", (gamma, x))
    return ScatterResult(True, "gamma")


def is_scattered(f: LinPoly, method: str = "fiber") -> ScatterResult:
    if method == "fiber":
        return is_scattered_fiber(f)
    if method == "gamma":
        return is_scattered_gamma(f)
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True, eq=False)
class LinearSet:
    ctx: FieldCtx
    points: np.ndarray  # sorted unique point codes
    source: LinPoly | None = None

    def __len__(self):
        return int(self.points.size)

    def __eq__(self, other):
        return isinstance(other, LinearSet) and other.ctx is self.ctx and np.array_equal(self.points, other.points)

    def __hash__(self):
        return hash(self.points.tobytes())

    def __contains__(self, code):
        i = np.searchsorted(self.points, code)
        return bool(i < self.points.size and self.points[i] == code)

    @property
    def infinity(self) -> int:
        return self.ctx.size

    def point_label(self, code: int) -> str:
        return "inf" if code == self.infinity else self.ctx.to_hex(code)

    def to_json(self) -> list[str]:
        return [self.point_label(int(m)) for m in self.points]

    def write_csv(self, stream):
        """Stream the points as homogeneous pairs, one per row."""
        w = csv.writer(stream)
        w.writerow(["x0", "x1"])
        for m in self.points:
            m = int(m)
            w.writerow(["0", "1"] if m == self.infinity else ["1", self.ctx.to_hex(m)])


def linear_set(f: LinPoly) -> LinearSet:
    """{<(1, f(x)/x)> : x != 0}."""
    return LinearSet(f.ctx, np.unique(ratios(f)), f)


def max_size(ctx: FieldCtx) -> int:
    return (ctx.size - 1) // (ctx.q - 1)
