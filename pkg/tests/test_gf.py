from __future__ import annotations

import pickle
import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracle
from scatterlab.errors import GuardRailError
from scatterlab.gf import admissible_h, field_json, is_prime, make_field_ctx, prime_factors

CONTEXTS = [(3, 1, 3), (5, 1, 3), (3, 1, 5), (3, 2, 2), (2, 1, 3), (7, 1, 2)]


def elems(ctx):
    return st.integers(0, ctx.size - 1)


@pytest.mark.parametrize("p,r,t", CONTEXTS)
def test_basic_shape(p, r, t):
    ctx = make_field_ctx(p, r, t)
    assert ctx.q == p**r and ctx.n == 2 * t and ctx.size == p ** (r * 2 * t)
    assert ctx.basis_qn == tuple(ctx.q**i for i in range(ctx.n))
    assert ctx.has_tables


@pytest.mark.parametrize("p,r,t", CONTEXTS)
def test_primitive_has_full_order(p, r, t):
    ctx = make_field_ctx(p, r, t)
    g = ctx.primitive
    assert ctx.pow(g, ctx.order) == 1
    for ell in prime_factors(ctx.order):
        assert ctx.pow(g, ctx.order // ell) != 1
    # and it is the least such element
    for x in range(2, g):
        assert any(ctx.pow(x, ctx.order // ell) == 1 for ell in prime_factors(ctx.order))


@pytest.mark.parametrize("p,t", [(3, 3), (5, 3), (3, 5), (7, 2), (2, 3)])
def test_modulus_is_least_irreducible(p, t):
    ctx = make_field_ctx(p, 1, t)
    assert oracle.irreducible(p, ctx.irr_qn)
    n = ctx.n
    code = sum(c * p**i for i, c in enumerate(ctx.irr_qn[:-1]))
    for smaller in range(min(code, 400)):
        low = [(smaller // p**i) % p for i in range(n)]
        assert not oracle.irreducible(p, low + [1])


def test_subfield_modulus_r2(ctx322):
    assert oracle.irreducible(3, ctx322.irr_q)
    # F_9 arithmetic from the small field agrees with polynomial arithmetic mod irr_q
    F = ctx322._fq
    for a in range(9):
        for b in range(9):
            assert F.add(F.mul(a, b), 0) == F.mul(b, a)


@pytest.mark.parametrize("p,t", [(3, 3), (5, 3), (3, 5)])
def test_mul_add_pow_match_reference(p, t):
    ctx = make_field_ctx(p, 1, t)
    rng = random.Random(p * 100 + t)
    for _ in range(150):
        x, y = rng.randrange(ctx.size), rng.randrange(ctx.size)
        e = rng.randrange(-ctx.size, ctx.size)
        assert ctx.mul(x, y) == oracle.mul(ctx, x, y)
        assert ctx.add(x, y) == oracle.add(ctx, x, y)
        if x:
            assert ctx.pow(x, e) == oracle.power(ctx, x, e)


@pytest.mark.parametrize("p,r,t", CONTEXTS)
def test_tables_match_polynomial_path(p, r, t):
    ctx = make_field_ctx(p, r, t)
    rng = random.Random(7)
    for _ in range(100):
        x, y = rng.randrange(ctx.size), rng.randrange(ctx.size)
        assert ctx.mul(x, y) == ctx._mul_poly(x, y)
        assert ctx.pow(x, 12345) == ctx._pow_poly(x, 12345)


def test_untabled_field_uses_polynomial_arithmetic():
    ctx = make_field_ctx(3, 1, 7)
    assert not ctx.has_tables
    with pytest.raises(GuardRailError):
        ctx.require_tables()
    rng = random.Random(3)
    for _ in range(20):
        x, y = rng.randrange(1, ctx.size), rng.randrange(ctx.size)
        assert ctx.mul(x, y) == oracle.mul(ctx, x, y)
        assert ctx.mul(x, ctx.inv(x)) == 1
        assert ctx.frob(x, ctx.n) == x


@pytest.mark.parametrize("p,r,t", [(3, 1, 3), (5, 1, 3), (3, 2, 2)])
def test_field_axioms(p, r, t):
    ctx = make_field_ctx(p, r, t)

    @given(elems(ctx), elems(ctx), elems(ctx))
    def check(x, y, z):
        add, mul = ctx.add, ctx.mul
        assert add(x, y) == add(y, x) and mul(x, y) == mul(y, x)
        assert add(add(x, y), z) == add(x, add(y, z))
        assert mul(mul(x, y), z) == mul(x, mul(y, z))
        assert mul(x, add(y, z)) == add(mul(x, y), mul(x, z))
        assert add(x, ctx.neg(x)) == 0 and ctx.sub(x, y) == add(x, ctx.neg(y))
        assert add(x, 0) == x and mul(x, 1) == x
        if x:
            assert mul(x, ctx.inv(x)) == 1
            assert ctx.div(mul(x, y), x) == y

    check()


@pytest.mark.parametrize("p,r,t", [(3, 1, 3), (3, 2, 2), (5, 1, 3)])
def test_frobenius_is_automorphism(p, r, t):
    ctx = make_field_ctx(p, r, t)

    @given(elems(ctx), elems(ctx), st.integers(0, 2 * ctx.rn))
    def check(x, y, e):
        assert ctx.aut(ctx.mul(x, y), e) == ctx.mul(ctx.aut(x, e), ctx.aut(y, e))
        assert ctx.aut(ctx.add(x, y), e) == ctx.add(ctx.aut(x, e), ctx.aut(y, e))
        assert ctx.aut(x, ctx.rn) == x
        assert ctx.frob(x, 1) == ctx.pow(x, ctx.q)
        assert ctx.aut(x, 1) == ctx.pow(x, ctx.p)

    check()


def test_norm_and_trace(ctx33, ctx322):
    for ctx in (ctx33, ctx322):
        rng = random.Random(1)
        for m in (d for d in range(1, ctx.n + 1) if ctx.n % d == 0):
            for _ in range(30):
                x, y = ctx.random_element(rng), ctx.random_element(rng)
                assert ctx.in_subfield(ctx.norm(x, m), m) and ctx.in_subfield(ctx.trace(x, m), m)
                assert ctx.norm(ctx.mul(x, y), m) == ctx.mul(ctx.norm(x, m), ctx.norm(y, m))
                assert ctx.trace(ctx.add(x, y), m) == ctx.add(ctx.trace(x, m), ctx.trace(y, m))
                assert ctx.norm_trace(x, m, "norm") == ctx.norm(x, m)


def test_subfields(ctx33, ctx322):
    for ctx in (ctx33, ctx322):
        for m in (1, ctx.t, ctx.n):
            sub = ctx.subfield_elements(m)
            assert sub.size == ctx.q**m
            assert all(ctx.in_subfield(int(v), m) for v in sub[:50])
            assert np.array_equal(np.nonzero(ctx.v_in_subfield(ctx.elements(), m))[0], sub)


@pytest.mark.parametrize("p,r,t", [(3, 1, 3), (3, 2, 2)])
def test_vector_ops_match_scalar(p, r, t):
    ctx = make_field_ctx(p, r, t)
    rng = np.random.default_rng(5)
    x = rng.integers(0, ctx.size, 300)
    y = rng.integers(1, ctx.size, 300)
    pairs = list(zip(x.tolist(), y.tolist()))
    assert ctx.v_add(x, y).tolist() == [ctx.add(a, b) for a, b in pairs]
    assert ctx.v_sub(x, y).tolist() == [ctx.sub(a, b) for a, b in pairs]
    assert ctx.v_mul(x, y).tolist() == [ctx.mul(a, b) for a, b in pairs]
    assert ctx.v_div(x, y).tolist() == [ctx.div(a, b) for a, b in pairs]
    assert ctx.v_inv(y).tolist() == [ctx.inv(b) for b in y.tolist()]
    assert ctx.v_pow(x, 17).tolist() == [ctx.pow(a, 17) for a in x.tolist()]
    assert ctx.v_frob(x, 2).tolist() == [ctx.frob(a, 2) for a in x.tolist()]
    assert ctx.v_aut(x, 1).tolist() == [ctx.aut(a, 1) for a in x.tolist()]
    assert ctx.v_exp(ctx.v_log(y)).tolist() == y.tolist()
    assert ctx.v_digits(x).tolist() == [ctx.digits(a) for a in x.tolist()]


def test_coordinates_and_hex(ctx322):
    ctx = ctx322
    for x in (0, 1, 5, ctx.size - 1):
        assert ctx.from_coords(ctx.coords(x)) == x
        assert ctx.from_digits(ctx.digits(x)) == x
        assert ctx.from_hex(ctx.to_hex(x)) == x
    with pytest.raises(ValueError):
        ctx.from_hex(format(ctx.size, "x"))
    assert ctx.arith(3, 4, "mul") == ctx.mul(3, 4)
    assert ctx.arith(3, None, "pow", 5) == ctx.pow(3, 5)


def test_constructor_errors():
    with pytest.raises(ValueError):
        make_field_ctx(4, 1, 3)
    with pytest.raises(ValueError):
        make_field_ctx(3, 0, 3)
    with pytest.raises(GuardRailError):
        make_field_ctx(3, 1, 30)
    with pytest.raises(ValueError):
        make_field_ctx(3, 7, 1)
    with pytest.raises(ValueError):
        make_field_ctx(3, 1, 3, seed_policy="random")
    assert is_prime(2) and is_prime(97) and not is_prime(91) and not is_prime(1)
    assert prime_factors(728) == [2, 7, 13]


def test_context_is_cached_and_picklable(ctx33):
    assert make_field_ctx(3, 1, 3) is ctx33
    assert pickle.loads(pickle.dumps(ctx33)) is ctx33
    assert field_json(ctx33) == field_json(make_field_ctx(3, 1, 3))


@pytest.mark.parametrize("q,p,r,t", [(3, 3, 1, 3), (5, 5, 1, 3), (3, 3, 1, 4), (3, 3, 1, 5), (3, 3, 1, 6), (9, 3, 2, 3)])
def test_admissible_count(q, p, r, t):
    ctx = make_field_ctx(p, r, t)
    assert len(admissible_h(ctx)) == oracle.admissible_count(q, t)


def test_admissible_set_matches_reference(ctx33):
    ref = [h for h in range(1, ctx33.size) if oracle.power(ctx33, h, 28) == 2 and oracle.power(ctx33, h, 27) != h]
    assert admissible_h(ctx33) == ref
    with pytest.raises(ValueError):
        admissible_h(make_field_ctx(2, 1, 3))
