import itertools
import random

import pytest

from cotame.classify import (
    ModulePattern,
    decide,
    default_pattern,
    degree_condition,
    direct_pattern_scan,
    good_coefficients,
    good_ideal,
    good_monomial_type,
    monomial_in_pattern,
    no_good_monomials,
    pattern_membership,
    reduction_search,
    span_good_scan,
)
from cotame.endo import AffineMap, compose, elementary, identity, invert_structured
from cotame.errors import CompositeCharacteristic
from cotame.poly import Polynomial, parse_poly
from cotame.rings import (
    GaloisField,
    IntegerModRing,
    IntegerRing,
    PrimeField,
    RationalField,
)

Q = RationalField()
F2 = PrimeField(2)
F3 = PrimeField(3)
F5 = PrimeField(5)


def test_good_monomial_type_cases():
    assert good_monomial_type((0, 1, 1), 3, 5).tag == "II"
    assert good_monomial_type((0, 2, 0), 3, 2).tag == "NotGood"
    assert good_monomial_type((2, 4), 2, 2).tag == "NotGood"
    assert monomial_in_pattern((2, 4), default_pattern(2, 2))
    assert good_monomial_type((2, 4, 0), 3, 5).tag == "III"
    assert good_monomial_type((0, 2, 0), 3, 0).tag == "I"
    assert good_monomial_type((1, 2), 2, 2).tag == "IV"
    assert good_monomial_type((3, 0), 2, 2).tag == "V"
    with pytest.raises(CompositeCharacteristic):
        good_monomial_type((1, 1), 2, 6)


def test_good_matches_pattern_complement_exhaustively():
    for n, p in ((2, 2), (2, 3), (2, 5), (3, 2), (3, 3), (3, 5)):
        pattern = default_pattern(n, p)
        bound = 2 * p * p + 1
        for exps in itertools.product(range(bound), repeat=n):
            if all(e == 0 for e in exps):
                continue
            good = good_monomial_type(exps, n, p).is_good()
            inside = monomial_in_pattern(exps, pattern)
            assert good != inside, (n, p, exps)


def test_good_coefficients_examples():
    f = parse_poly("x1 + 3*x2*x3", F5, 3)
    assert good_coefficients(f) == [F5.of(3)]
    assert good_coefficients(parse_poly("x1 + 2*x2 + 1", F5, 3)) == []
    assert good_coefficients(parse_poly("x2^2", F2, 3)) == []


def test_good_ideal_examples():
    phi = elementary(parse_poly("x2^2", Q, 3))
    assert good_ideal(phi).is_full()
    phi2 = elementary(parse_poly("x2^2", F2, 3))
    assert good_ideal(phi2).is_zero()
    z6 = IntegerModRing(6)
    phi6 = elementary(parse_poly("2*x2*x3", z6, 3))
    with pytest.raises(CompositeCharacteristic):
        good_ideal(phi6)


def test_degree_condition():
    assert degree_condition(parse_poly("x2^2", F5, 3), 5)
    assert not degree_condition(parse_poly("x2^2", F3, 3), 3)
    f9 = GaloisField(3, 2)
    assert degree_condition(parse_poly("x2^5", f9, 3), 9)
    assert degree_condition(parse_poly("x2^100", Q, 3), None)


def test_span_scan_f5_product():
    phi = elementary(parse_poly("x2*x3", F5, 3))
    scan = span_good_scan(phi, 5)
    assert scan.certified_full()
    assert scan.witnesses[0].gm_type.tag == "II"


def test_span_scan_f3_square_not_certified():
    phi = elementary(parse_poly("x2^2", F3, 3))
    scan = span_good_scan(phi, 3)
    assert not scan.certified_full()
    assert scan.exhaustive


def test_span_scan_affine_is_empty():
    phi = AffineMap.translation(F5, [1, 2, 0]).to_endo()
    scan = span_good_scan(phi, 5)
    assert scan.handle.is_zero()


def test_pattern_membership_examples():
    w2 = default_pattern(2, 2)
    for t in (1, 5, 9, 13):
        assert monomial_in_pattern((t, 0), w2)
    assert not monomial_in_pattern((3, 0), w2)
    v3 = default_pattern(3, 2)
    assert not monomial_in_pattern((0, 1, 1), v3)
    f = parse_poly("x2*x3", F2, 3)
    assert not pattern_membership(f, v3)


def test_elementary_generators_escape_the_patterns():
    # the obstruction subgroup misses honest tame generators: x2*x3 escapes
    # the order-p pattern for n >= 3, x2^2 escapes it for p >= 3, and
    # x2^(p+1) escapes the two-variable refinement for n = p = 2
    for p in (2, 3, 5):
        assert not monomial_in_pattern((0, 1, 1), default_pattern(3, p))
    for p in (3, 5):
        assert not monomial_in_pattern((0, 2, 0), default_pattern(3, p))
    assert not monomial_in_pattern((0, 3), default_pattern(2, 2))


def test_pattern_high_shift_branch():
    # shift exponents at or above e: x^(p^u) is a member via t >= p^u
    pat = ModulePattern(3, 1, 1, frozenset({0, 2}))
    assert monomial_in_pattern((9, 0), pat)   # 9 = 3^2
    assert monomial_in_pattern((12, 0), pat)  # 9 + 3
    assert not monomial_in_pattern((2, 0), pat)


def test_char_two_cube_identity():
    # x1^3 + x2^3 + (x1+x2)^3 = x1^2*x2 + x1*x2^2 in characteristic 2
    lhs = parse_poly("x1^3 + x2^3 + (x1 + x2)^3", F2, 2)
    assert lhs == parse_poly("x1^2*x2 + x1*x2^2", F2, 2)


def test_pattern_closure_validation():
    with pytest.raises(ValueError):
        ModulePattern(2, 3, 3, frozenset({1}))  # 1+1=2 is neither in N nor >= d
    ModulePattern(2, 2, 2, frozenset({1}))  # 1+1=2 >= d, closure holds
    ModulePattern(2, 1, 2, frozenset({0}))


def test_ngg_membership():
    assert no_good_monomials(elementary(parse_poly("x2^2", F2, 3)))
    assert not no_good_monomials(elementary(parse_poly("x2*x3", F2, 3)))
    assert no_good_monomials(AffineMap.translation(Q, [1, 1, 1]).to_endo())
    assert not no_good_monomials(elementary(parse_poly("x2^2", Q, 3)))


def _pattern_elementary_pool(ring, n, p):
    """First-variable shifts whose added polynomial stays inside the pattern."""
    pool = []
    if (n, p) == (3, 2):
        texts = ["x2^2", "x3^2", "x2^2*x3^2", "x2^4", "x2^2 + x3^4", "x3^2 + x2^2*x3^2"]
    else:  # (2, 3)
        texts = ["x2^3", "x2^6", "x2^3 + x2^6", "2*x2^3"]
    for t in texts:
        pool.append(elementary(parse_poly(t, ring, n), nvars=n))
    return pool


def random_pattern_affine(rng, ring, n):
    from cotame.rings import enumerate_units

    units = [u.value for u in enumerate_units(ring)]
    one, zero = ring.one_value(), ring.zero_value()
    A = [[one if i == j else zero for j in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(n):
            if i != j and rng.random() < 0.4:
                A[i][j] = ring.coerce_value(rng.randrange(ring.order))
    try:
        m = AffineMap(ring, A, [ring.coerce_value(rng.randrange(ring.order)) for _ in range(n)])
    except Exception:
        return None
    return m.to_endo()


def test_ngg_closed_under_products_and_inverses():
    rng = random.Random(41)
    for ring, n in ((F2, 3), (F3, 2)):
        p = ring.characteristic
        pool = _pattern_elementary_pool(ring, n, p)
        inverses = {id(g): invert_structured(g) for g in pool}
        count = 0
        while count < 100:
            word = []
            for _ in range(rng.randint(1, 4)):
                if rng.random() < 0.4:
                    aff = random_pattern_affine(rng, ring, n)
                    if aff is None:
                        continue
                    word.append((aff, invert_structured(aff)))
                else:
                    g = rng.choice(pool)
                    word.append((g, inverses[id(g)]))
            if not word:
                continue
            value = identity(ring, n)
            inverse = identity(ring, n)
            for g, ginv in word:
                value = compose(value, g)
                inverse = compose(ginv, inverse)
            assert no_good_monomials(value), (ring.spec_string(), value)
            assert no_good_monomials(inverse)
            assert compose(value, inverse) == identity(ring, n)
            count += 1


def test_reduction_search():
    z6 = IntegerModRing(6)
    phi = elementary(parse_poly("3*x2^2 + 2*x2^3", z6, 3))
    # mod 2: x2^2 survives -> inside the pattern; mod 3: 2*x2^3 = frobenius cube
    found = reduction_search(phi)
    assert found is not None
    Z = IntegerRing()
    phiz = elementary(parse_poly("2*x2^2", Z, 3))
    found = reduction_search(phiz)
    assert found is not None and found["modulus"] == 2


def test_direct_pattern_scan():
    phi = elementary(parse_poly("x2*x3 + x2 + 1", F2, 3))
    hit = direct_pattern_scan(phi)
    assert hit is not None and hit["case"] == "a"
    assert direct_pattern_scan(identity(F2, 3)) is None


def test_decide_examples():
    v = decide(elementary(parse_poly("x2^2", F2, 3)))
    assert v.answer == "NotStablyCotame" and v.reason == "ngg-membership"
    v = decide(elementary(parse_poly("x2^2", Q, 3)))
    assert v.answer == "StablyCotame"
    v = decide(elementary(parse_poly("x2^5", F3, 3)))
    assert v.answer == "Unknown"
    f9 = GaloisField(3, 2)
    v = decide(elementary(parse_poly("x2^5", f9, 3)))
    assert v.answer == "StablyCotame"


def test_decide_affine_not_stably_cotame():
    v = decide(AffineMap.translation(Q, [1, 0, 2]).to_endo())
    assert v.answer == "NotStablyCotame"


def test_decide_proper_ideal_over_z():
    Z = IntegerRing()
    v = decide(elementary(parse_poly("2*x2^2", Z, 3)))
    assert v.answer == "NotStablyCotame"


def test_decide_composite_characteristic_ring():
    z6 = IntegerModRing(6)
    # x2*x3 has unit coefficient: the direct route applies over any ring
    v = decide(elementary(parse_poly("x2*x3", z6, 3)))
    assert v.answer == "StablyCotame" and v.route == "M-phi-case-a"
    # 3*x2^2 + 2*x2^3 dies in both prime quotients
    v = decide(elementary(parse_poly("3*x2^2 + 2*x2^3", z6, 3)))
    assert v.answer == "NotStablyCotame" and v.reason == "reduction-to-ngg"


def test_decide_soundness_certificates_verify():
    # positive verdicts must back a full generator-word witness; negative
    # pattern verdicts must survive a monomial-by-monomial recheck
    from cotame.witness import build_witness_with_info, verify_witness
    from cotame.classify import monomial_in_pattern

    cases = [
        (elementary(parse_poly("x2*x3", F5, 3)), "x2^2"),
        (elementary(parse_poly("x2^2", Q, 3)), "x2*x3"),
        (elementary(parse_poly("x2^2*x3^2", F3, 3)), "x2*x3"),
    ]
    for phi, target_text in cases:
        v = decide(phi)
        assert v.answer == "StablyCotame"
        f = parse_poly(target_text, phi.ring, 3)
        word, _ = build_witness_with_info(phi, f)
        assert verify_witness(word, phi, f)
    negative = elementary(parse_poly("x2^2", F2, 3))
    v = decide(negative)
    assert v.answer == "NotStablyCotame" and v.reason == "ngg-membership"
    pattern = default_pattern(3, 2)
    for img in negative.images:
        for exps in img.terms:
            assert monomial_in_pattern(exps, pattern)


def random_tame_2(rng, ring, max_letters=5, max_deg=4):
    from cotame.rings import enumerate_units

    units = [u.value for u in enumerate_units(ring)]
    acc = identity(ring, 2)
    for _ in range(rng.randint(1, max_letters)):
        if rng.random() < 0.5:
            u1, u2 = rng.choice(units), rng.choice(units)
            b = [rng.randrange(ring.order), rng.randrange(ring.order)]
            m = AffineMap(ring, [[u1, 0], [rng.randrange(ring.order), u2]], b)
            if rng.random() < 0.5:
                m = m.compose(AffineMap.permutation(ring, [2, 1]))
            acc = compose(acc, m.to_endo())
        else:
            exps = (0, rng.randint(0, max_deg))
            c = rng.randrange(1, ring.order)
            f = Polynomial.monomial(ring, exps, c)
            acc = compose(acc, elementary(f, nvars=2))
    return acc


def test_both_odd_coefficients_vanish_in_two_variables_char_two():
    # over a field of characteristic 2 no image of a tame map in two
    # variables carries a monomial with both exponents odd
    rng = random.Random(43)
    for ring in (F2, GaloisField(2, 2)):
        for _ in range(40):
            phi = random_tame_2(rng, ring)
            for img in phi.images:
                for exps in img.terms:
                    assert not (exps[0] % 2 == 1 and exps[1] % 2 == 1), (
                        ring.spec_string(),
                        phi,
                    )
