from __future__ import annotations

import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from scatterlab.equiv import (
    CriterionUnavailable,
    EquivWitness,
    LinsetWitness,
    PairFingerprints,
    adjoint_equiv_witness,
    adjoint_normalized,
    apply_projectivity,
    aut_group,
    classify_codes,
    classify_linsets,
    code_bound,
    code_equiv_criterion,
    compose_witness,
    conj_points,
    criterion_linset_equiv,
    gammal2_equiv,
    gl2_equiv_bruteforce,
    invert_witness,
    lemma_coeff_identities,
    linset_bound,
    linset_pgammal_equiv,
    linset_pgl_equiv,
    linset_witness_from_code,
    lp_equiv_criterion,
    norm_fiber,
    verify_linset_witness,
    verify_witness,
)
from scatterlab.family import InadmissibleError, lunardon_polverino, pseudo_regulus, psi
from scatterlab.gf import admissible_h, make_field_ctx
from scatterlab.linpoly import LinPoly
from scatterlab.scatter import LinearSet, linear_set


@pytest.fixture(scope="module")
def ctx36():
    return make_field_ctx(3, 1, 6)


# ---- U_f equivalence -------------------------------------------------------


def test_gl2_methods_agree(ctx33, hs33):
    rng = random.Random(3)
    f = psi(ctx33, hs33[0])
    for k in rng.sample(hs33, 8):
        g = psi(ctx33, k)
        w1 = gl2_equiv_bruteforce(f, g, "scan")
        w2 = gl2_equiv_bruteforce(f, g, "linear")
        assert w1 == w2
        if w1 is not None:
            assert verify_witness(f, g, w1)
    with pytest.raises(ValueError):
        gl2_equiv_bruteforce(f, f, "magic")


def test_witness_algebra(ctx33, hs33):
    h = hs33[0]
    f, g, k = psi(ctx33, h), psi(ctx33, ctx33.aut(h, 1)), psi(ctx33, ctx33.aut(h, 2))
    w1, w2 = gammal2_equiv(f, g), gammal2_equiv(g, k)
    assert w1 is not None and w2 is not None
    assert verify_witness(f, g, w1) and verify_witness(g, k, w2)
    assert verify_witness(g, f, invert_witness(ctx33, w1))
    assert verify_witness(f, k, compose_witness(ctx33, w1, w2))
    assert not verify_witness(f, g, EquivWitness(1, 0, 1, 0, 0)) or f == g
    assert not verify_witness(f, f, EquivWitness(0, 0, 0, 0, 0))
    assert set(w1.to_json(ctx33)) == {"a", "b", "c", "d", "rho_exp"}


def test_identity_and_negation_witnesses(ctx35, hs35):
    h = hs35[7]
    f = psi(ctx35, h)
    for k in (h, ctx35.neg(h), ctx35.aut(h, 1), ctx35.neg(ctx35.aut(h, 3))):
        w = gammal2_equiv(f, psi(ctx35, k))
        assert w is not None and verify_witness(f, psi(ctx35, k), w)


def test_pseudo_regulus_not_gl_equivalent_to_lp_at_n4():
    ctx = make_field_ctx(3, 1, 2)
    delta = next(x for x in range(2, ctx.size) if ctx.norm(x) not in (0, 1))
    assert gammal2_equiv(pseudo_regulus(ctx, 1), lunardon_polverino(ctx, 1, delta)) is None
    assert gammal2_equiv(pseudo_regulus(ctx, 1), pseudo_regulus(ctx, 3)) is not None


def test_pseudo_regulus_powers():
    """x^q and x^(q^s) give equivalent codes iff s = +-1 mod n, checked at n = 8."""
    ctx = make_field_ctx(3, 1, 4)
    f = pseudo_regulus(ctx, 1)
    assert gl2_equiv_bruteforce(f, pseudo_regulus(ctx, 7)) is not None
    assert gammal2_equiv(f, pseudo_regulus(ctx, 3)) is None


# ---- closed-form criterion ---------------------------------------------------


def test_criterion_examples(ctx35, hs35, ctx36):
    h = hs35[0]
    assert code_equiv_criterion(ctx35, h, ctx35.neg(h))
    assert code_equiv_criterion(ctx35, h, ctx35.aut(h, 1))
    assert code_equiv_criterion(ctx35, h, h)
    hs6 = admissible_h(ctx36)
    ell = int(ctx36.v_exp(ctx36.order // 10))
    assert ctx36.pow(ell, 10) == 1
    h6 = hs6[3]
    assert code_equiv_criterion(ctx36, h6, ctx36.mul(ell, h6))
    with pytest.raises(CriterionUnavailable):
        code_equiv_criterion(make_field_ctx(3, 1, 3), 0, 0)
    with pytest.raises(InadmissibleError):
        code_equiv_criterion(ctx35, h, 1)


def test_criterion_matches_oracle_sample(ctx35, hs35):
    rng = random.Random(8)
    for _ in range(12):
        h, k = rng.sample(hs35, 2)
        assert code_equiv_criterion(ctx35, h, k) == (gammal2_equiv(psi(ctx35, h), psi(ctx35, k)) is not None)


def test_norm_fiber(ctx33, ctx53):
    assert len(norm_fiber(ctx33)) == 28
    assert len(norm_fiber(ctx53)) == 126


# ---- classification -----------------------------------------------------------


def test_classify_codes_t3_oracle(ctx33):
    rep = classify_codes(ctx33, "oracle")
    assert sorted(len(c) for c in rep.classes) == [4, 12, 12]
    assert set(rep.per_h.values()) == {2}
    assert rep.bound is None and rep.bound_ok is None
    js = rep.to_json()
    assert js["class_count"] == 3 and js["xi_uniform"]
    with pytest.raises(CriterionUnavailable):
        classify_codes(ctx33, "criterion")
    with pytest.raises(ValueError):
        classify_codes(ctx33, "guess")


def test_classify_codes_t5_t6(ctx35, ctx36):
    r5 = classify_codes(ctx35)
    assert (r5.class_count, r5.bound, set(r5.per_h.values())) == (13, 12, {2})
    assert sorted(len(c) for c in r5.classes) == [4] + [20] * 12
    r6 = classify_codes(ctx36)
    assert (r6.class_count, r6.bound, set(r6.per_h.values())) == (7, 6, {10})
    assert sum(len(c) for c in r6.classes) == 728
    assert code_bound(ctx35) == 12 and linset_bound(ctx35) == 6 and code_bound(ctx36) == 6


def test_classify_linsets_t5(ctx35):
    rep = classify_linsets(ctx35)
    assert rep.class_count == 13 and rep.bound == 6 and rep.bound_ok
    assert rep.extra["refinement_violations"] == 0
    assert sorted(set(rep.per_h.values())) == [4, 20]


def test_criterion_linset_match_is_exact(ctx35, hs35):
    h = hs35[0]
    Lh = linear_set(psi(ctx35, h))
    for k in (ctx35.neg(h), ctx35.aut(h, 2)):
        Lk = linear_set(psi(ctx35, k))
        sign, e, s = criterion_linset_equiv(ctx35, Lh, Lk)
        lam = int(ctx35.v_exp(s))
        if sign == 1:
            img = ctx35.v_mul(np.full(len(Lh), lam), ctx35.v_aut(Lh.points, e))
        else:
            img = ctx35.v_div(np.full(len(Lh), lam), ctx35.v_aut(Lh.points, e))
        assert np.array_equal(np.sort(img), Lk.points)


# ---- linear sets -----------------------------------------------------------------


def test_projectivity_action(ctx33):
    ctx = ctx33
    pts = np.array([0, 1, 5, ctx.size])
    swap = ((0, 1), (1, 0))  # (x0, x1) -> (x1, x0): m -> 1/m
    out = apply_projectivity(ctx, swap, pts)
    assert out.tolist() == [ctx.size, 1, ctx.inv(5), 0]
    assert conj_points(ctx, pts, 1).tolist() == [0, 1, ctx.pow(5, 3), ctx.size]


def test_pgl_oracle_finds_random_projectivity(ctx33, hs33):
    ctx = ctx33
    rng = random.Random(5)
    Lf = linear_set(psi(ctx, hs33[4]))
    fp_cache = {}
    for _ in range(3):
        while True:
            a, b, c, d = (rng.randrange(ctx.size) for _ in range(4))
            if ctx.sub(ctx.mul(a, d), ctx.mul(b, c)):
                break
        e = rng.randrange(ctx.rn)
        target = LinsetWitness(a, b, c, d, e)
        img = np.unique(apply_projectivity(ctx, ((a, b), (c, d)), conj_points(ctx, Lf.points, e)))
        if (img == ctx.size).any():
            continue  # the oracle anchors on affine points only
        Lg = LinearSet(ctx, img)
        fp_cache[id(Lg)] = PairFingerprints(ctx, Lg.points)
        w = linset_pgammal_equiv(Lf, Lg, fp_cache[id(Lg)])
        assert w is not None and verify_linset_witness(Lf, Lg, w)
        assert verify_linset_witness(Lf, Lg, target)


def test_pgl_oracle_rejects_inequivalent(ctx33, hs33):
    Lf = linear_set(psi(ctx33, hs33[0]))
    Lpr = linear_set(pseudo_regulus(ctx33, 1))
    assert len(Lf) == len(Lpr)
    assert linset_pgammal_equiv(Lpr, Lf) is None
    assert linset_pgl_equiv(Lf, LinearSet(ctx33, Lf.points[:-1])) is None


def test_code_witness_gives_linset_witness(ctx33, hs33):
    h = hs33[0]
    for k in (ctx33.neg(h), ctx33.aut(h, 1)):
        f, g = psi(ctx33, h), psi(ctx33, k)
        w = gammal2_equiv(f, g)
        lw = linset_witness_from_code(ctx33, w)
        assert verify_linset_witness(linear_set(f), linear_set(g), lw)


# ---- identities, adjoint, automorphisms --------------------------------------------


def test_lemma_identities(ctx33, hs33, ctx35, hs35):
    for ctx, hs in ((ctx33, hs33[:10]), (ctx35, hs35[:4])):
        for h in hs:
            f = psi(ctx, h)
            g = adjoint_normalized(ctx, h)
            assert linear_set(f) == linear_set(g)
            assert lemma_coeff_identities(f, g)
            assert lemma_coeff_identities(f, f.adjoint())
    f = psi(ctx33, hs33[0])
    ok, failed = lemma_coeff_identities(f, f.scale(ctx33.primitive), details=True)
    assert not ok and failed


@pytest.mark.parametrize("t", [3, 4, 5])
def test_adjoint_witness(t):
    ctx = make_field_ctx(3, 1, t)
    for h in admissible_h(ctx)[:6]:
        g, w = adjoint_equiv_witness(ctx, h)
        f = psi(ctx, h)
        assert w.a == 0 and w.d == 0
        assert verify_witness(g, f, w)
        # c x = psi(b g(x)) pointwise
        x = ctx.elements()
        lhs = ctx.v_mul(np.full_like(x, w.c), x)
        rhs = f.eval_many(ctx.v_mul(np.full_like(x, w.b), g.eval_many(x)))
        assert np.array_equal(lhs, rhs)
    with pytest.raises(ValueError):
        adjoint_equiv_witness(ctx, admissible_h(ctx)[0], z=0)


def test_adjoint_witness_other_z(ctx53):
    h = admissible_h(ctx53)[0]
    for z in range(1, 5):
        assert adjoint_equiv_witness(ctx53, h, z=z)[1] is not None


def test_aut_group(ctx35, hs35, ctx33, hs33):
    rep = aut_group(ctx35, hs35[0])
    assert rep.mode == "formula" and rep.right_idealizer_size == 9
    assert rep.order == (ctx35.size - 1) * 8 * len(rep.H)
    assert 0 in rep.H
    for e in rep.H:
        h_e = ctx35.aut(hs35[0], e)
        assert h_e in (hs35[0], ctx35.neg(hs35[0]))
    small = aut_group(ctx33, hs33[0])
    assert small.mode == "oracle" and small.order is None and 0 in small.H
    assert small.to_json()["H_size"] == len(small.H)


# ---- Lunardon-Polverino --------------------------------------------------------------


def test_lp_criterion_trivial_cases():
    ctx = make_field_ctx(3, 1, 3)
    rng = random.Random(9)
    good = [x for x in range(1, ctx.size) if ctx.norm(x) not in (0, 1)]
    for _ in range(10):
        eta = rng.choice(good)
        w = rng.randrange(1, ctx.size)
        assert lp_equiv_criterion(ctx, 1, 1, eta, eta)
        theta = ctx.mul(eta, ctx.pow(w, ctx.q**2 - 1))
        assert lp_equiv_criterion(ctx, 1, 1, eta, theta)
    with pytest.raises(InadmissibleError):
        lp_equiv_criterion(ctx, 3, 1, good[0], good[1])
    with pytest.raises(InadmissibleError):
        lp_equiv_criterion(ctx, 1, 1, 1, good[1])


@pytest.mark.parametrize("p,t", [(3, 2), (5, 2), (3, 3)])
def test_lp_criterion_matches_oracle(p, t):
    ctx = make_field_ctx(p, 1, t)
    rng = random.Random(p + t)
    good = [x for x in range(1, ctx.size) if ctx.norm(x) not in (0, 1)]
    seen = set()
    for _ in range(25):
        eta, theta = rng.sample(good, 2)
        crit = lp_equiv_criterion(ctx, 1, 1, eta, theta)
        seen.add(crit)
        w = gammal2_equiv(lunardon_polverino(ctx, 1, eta), lunardon_polverino(ctx, 1, theta))
        assert crit == (w is not None)
    if p == 5:
        assert seen == {True, False}
