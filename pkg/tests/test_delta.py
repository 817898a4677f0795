import random

import pytest

from cotame.classify import decide
from cotame.endo import AffineMap, elementary
from cotame.errors import Unsupported
from cotame.poly import Polynomial, parse_poly
from cotame.rings import PrimeField
from cotame.witness import (
    DeltaSpec,
    build_witness_with_info,
    delta_apply,
    delta_module_membership,
    delta_power,
    delta_route,
    delta_search,
    kernel_generator,
    verify_witness,
)

F2 = PrimeField(2)
F3 = PrimeField(3)
F5 = PrimeField(5)


def random_poly(rng, ring, nvars, max_deg=4, max_terms=4):
    out = Polynomial.zero(ring, nvars)
    for _ in range(rng.randint(1, max_terms)):
        exps = tuple(rng.randint(0, max_deg) for _ in range(nvars))
        out = out + Polynomial.monomial(ring, exps, rng.randrange(1, ring.order))
    return out


def test_delta_apply_example():
    f = parse_poly("x1^2", F3, 1)
    assert delta_apply(f, 1, F3.of(1)) == parse_poly("2*x1 + 1", F3, 1)


def test_delta_nilpotency():
    rng = random.Random(53)
    for _ in range(20):
        f = random_poly(rng, F3, 2)
        out = f
        for _ in range(3):
            out = delta_apply(out, 1, F3.of(1))
        assert out.is_zero()


def test_delta_degree_drops():
    for d in range(1, 8):
        f = parse_poly(f"x1^{d}", F3, 1)
        out = delta_apply(f, 1, F3.of(1))
        assert out.is_zero() or out.deg_xi(1) < d


def test_deltas_commute():
    rng = random.Random(59)
    for _ in range(15):
        f = random_poly(rng, F3, 2)
        a = delta_apply(delta_apply(f, 1, F3.of(1)), 2, F3.of(2))
        b = delta_apply(delta_apply(f, 2, F3.of(2)), 1, F3.of(1))
        assert a == b


def test_delta_kernel_linearity():
    # delta_i is linear over polynomials fixed by the translation
    rng = random.Random(61)
    q = kernel_generator(F3, 2, 1, F3.of(1))
    assert delta_apply(q, 1, F3.of(1)).is_zero()
    for _ in range(10):
        f = random_poly(rng, F3, 2)
        lhs = delta_apply(q * f, 1, F3.of(1))
        rhs = q * delta_apply(f, 1, F3.of(1))
        assert lhs == rhs


def test_delta_power_spec():
    spec = DeltaSpec.ones(F3, (0, 1, 1))
    f = parse_poly("x2^2*x3^2", F3, 3)
    out = delta_power(f, spec)
    expected = parse_poly("(x2+1)^2*(x3+1)^2 - (x2+1)^2*x3^2 - x2^2*(x3+1)^2 + x2^2*x3^2", F3, 3)
    assert out == expected
    assert out == parse_poly("x2*x3 + 2*x2 + 2*x3 + 1", F3, 3).scale(F3.of(4))


def test_delta_spec_validation():
    with pytest.raises(ValueError):
        DeltaSpec.ones(F3, (3, 0, 0))
    with pytest.raises(Unsupported):
        from cotame.rings import IntegerModRing

        DeltaSpec.ones(IntegerModRing(6), (1, 0))
    with pytest.raises(ValueError):
        DeltaSpec(F3, (1, 1), (F3.zero_value(), F3.one_value()))


def test_module_membership_examples():
    spec = DeltaSpec.ones(F3, (1, 1, 0))
    q1 = kernel_generator(F3, 3, 1, F3.of(1))
    assert delta_module_membership(q1, spec)
    assert delta_module_membership(Polynomial.constant(F3, 3, 2), spec)
    x_l = parse_poly("x1*x2", F3, 3)  # the base monomial x^l
    assert delta_module_membership(parse_poly("x1*x1*x2", F3, 3), spec)
    assert not delta_module_membership(parse_poly("x1*x2*x3", F3, 3) * x_l, spec)


def test_module_membership_rejects_target():
    # x1*x2*x^l is exactly the complement the route extracts
    spec = DeltaSpec.ones(F3, (1, 1, 0))
    target = parse_poly("x1^2*x2^2", F3, 3)
    assert not delta_module_membership(target, spec)


def test_delta_route_product_case():
    phi = elementary(parse_poly("x2^2*x3^2", F3, 3))
    spec = DeltaSpec.ones(F3, (0, 1, 1))
    out = delta_route(phi, spec, 1)
    assert out is not None
    dec, info = out
    assert dec.target == parse_poly("x2*x3", F3, 3)
    assert info["kind"] == "product" and info["pair"] == (2, 3)
    dec.validate()


def test_delta_route_affine_no_route():
    phi = AffineMap.translation(F3, [1, 0, 0]).to_endo()
    spec = DeltaSpec.ones(F3, (0, 1, 1))
    assert delta_route(phi, spec, 1) is None


def test_delta_route_bad_profile_precondition():
    phi = elementary(parse_poly("x2^2*x3^2", F3, 3))
    spec = DeltaSpec.ones(F3, (2, 1, 1))  # l_1 = p-1 admits no pattern at (1,2)
    with pytest.raises(ValueError):
        delta_route(phi, spec, 1, pair=(1, 2))


def test_delta_search_finds_certificate():
    phi = elementary(parse_poly("x2^2*x3^2", F3, 3))
    found = delta_search(phi)
    assert found is not None
    dec, spec, info = found
    dec.validate()
    exps, value = dec.single_monomial()
    assert value == F3.one_value()


def test_degree_condition_fails_but_delta_succeeds():
    # the classical span route is silent here: separable degree 2 > 3 - 2
    phi = elementary(parse_poly("x2^2*x3^2", F3, 3))
    from cotame.classify import span_good_scan

    scan = span_good_scan(phi, 3)
    assert not scan.certified_full()
    v = decide(phi)
    assert v.answer == "StablyCotame" and v.route == "delta-route"


def test_delta_route_witness_end_to_end():
    phi = elementary(parse_poly("x2^2*x3^2", F3, 3))
    f = parse_poly("x2*x3", F3, 3)
    word, info = build_witness_with_info(phi, f)
    assert info.route == "delta-route"
    assert verify_witness(word, phi, f)
