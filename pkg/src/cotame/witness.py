"""Constructive certificates for stable co-tameness.

The central object is SpanDecomposition: an explicit identity

    target = h + sum_j a_j * eta_j(phi(x_i_j))

with h affine and eta_j affine maps, certifying that the target lies in
the module generated by 1, the variables, and all affine transforms of
phi's coordinate images.  Everything downstream is exact bookkeeping on
such identities: scaling interpolation isolates one monomial, the
all-ones shift exposes a quadratic or cubic monomial, two conversions
normalize it, and the word compilers turn the final decomposition into a
product of affine letters and phi^{+-1} that composes to a prescribed
tame generator.  The compiled word is re-checked by a dumb evaluator.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .classify import (
    _guard_characteristic,
    degree_condition,
    direct_pattern_scan,
    resolve_k_size,
    span_good_scan,
)
from .endo import (
    AffineLetter,
    AffineMap,
    Endomorphism,
    GeneratorWord,
    PhiLetter,
    compose,
    conjugate_word,
    elementary,
    extend,
    identity,
    invert_structured,
    permutation,
    transposition_perm,
)
from .errors import (
    DegreeConditionError,
    NoRouteFound,
    NotAUnit,
    ResourceLimit,
    Unsupported,
)
from .poly import Polynomial
from .rings import RingElement, distinct_scalars, find_special_unit, is_prime

# Decompositions at most this many terms are re-validated after every
# transformation; larger ones are checked once at the end of a pipeline
# (and every compiled word is verified exactly anyway).
AUTO_VALIDATE_LIMIT = 2000


def _should_validate(flag, nterms):
    if flag == "auto":
        return nterms <= AUTO_VALIDATE_LIMIT
    return bool(flag)


class SpanDecomposition:
    """target = affine_part + sum a * eta(phi(x_i)), recomputable exactly."""

    __slots__ = ("phi", "target", "affine_part", "terms")

    def __init__(self, phi, target, affine_part, terms, validate=True):
        self.phi = phi
        self.target = target
        self.affine_part = affine_part
        self.terms = [
            (a if isinstance(a, RingElement) else RingElement(phi.ring, a), eta, i)
            for a, eta, i in terms
        ]
        if _should_validate(validate, len(self.terms)):
            self.validate()

    def recompute(self):
        acc = self.affine_part
        for a, eta, i in self.terms:
            acc = acc + eta.apply(self.phi.images[i - 1]).scale(a)
        return acc

    def validate(self):
        if not self.affine_part.is_affine():
            raise ValueError("affine part has degree > 1")
        for a, eta, i in self.terms:
            if not 1 <= i <= self.phi.nvars:
                raise ValueError(f"image index {i} out of range")
            if eta.n != self.phi.nvars:
                raise ValueError("affine map arity mismatch")
        if self.recompute() != self.target:
            raise ValueError("decomposition identity failed to revalidate")
        return True

    def single_monomial(self):
        if len(self.target.terms) != 1:
            raise ValueError("target is not a single monomial")
        ((exps, value),) = self.target.terms.items()
        return exps, value

    def to_json(self):
        return {
            "target": str(self.target),
            "affine_part": str(self.affine_part),
            "terms": [
                {
                    "a": self.phi.ring.format_value(a.value),
                    "eta": eta.to_json(),
                    "i": i,
                }
                for a, eta, i in self.terms
            ],
        }

    def __repr__(self):
        return (
            f"<decomposition of {self.target} with {len(self.terms)} terms>"
        )


def trivial_decomposition(phi, affine_poly, validate=True):
    """An affine polynomial needs no image terms at all."""
    return SpanDecomposition(phi, affine_poly, affine_poly, [], validate=validate)


def span_decomposition(phi, combo, linear=None, validate=True):
    """Decomposition of sum combo_i * phi(x_i) + linear, built from scratch."""
    ring, n = phi.ring, phi.nvars
    zero = ring.zero_value()
    h = linear if linear is not None else Polynomial.zero(ring, n)
    ident = AffineMap.identity(ring, n)
    terms = []
    target = h
    for i, c in enumerate(combo, start=1):
        cv = ring.coerce_value(c.value if isinstance(c, RingElement) else c)
        if cv == zero:
            continue
        terms.append((RingElement(ring, cv), ident, i))
        target = target + phi.images[i - 1].scale(RingElement(ring, cv))
    return SpanDecomposition(phi, target, h, terms, validate=validate)


def dec_apply_affine(dec, eta, validate="auto"):
    """Decomposition of eta(target): transport every piece through eta."""
    new_target = eta.apply(dec.target)
    new_affine = eta.apply(dec.affine_part)
    new_terms = [(a, eta.compose(eta_j), i) for a, eta_j, i in dec.terms]
    return SpanDecomposition(
        dec.phi, new_target, new_affine, new_terms, validate=validate
    )


def dec_linear_combine(pairs, validate="auto"):
    """Decomposition of sum c * target; terms with equal (eta, i) merge."""
    if not pairs:
        raise ValueError("empty combination")
    phi = pairs[0][1].phi
    ring = phi.ring
    n = phi.nvars
    zero = ring.zero_value()
    target = Polynomial.zero(ring, n)
    affine = Polynomial.zero(ring, n)
    merged = {}
    order = []
    for c, dec in pairs:
        if dec.phi is not phi and dec.phi != phi:
            raise ValueError("all decompositions must be bound to the same map")
        cv = ring.coerce_value(c.value if isinstance(c, RingElement) else c)
        if cv == zero:
            continue
        ce = RingElement(ring, cv)
        target = target + dec.target.scale(ce)
        affine = affine + dec.affine_part.scale(ce)
        for a, eta, i in dec.terms:
            key = (eta, i)
            prev = merged.get(key)
            contrib = ring.mul(cv, a.value)
            if prev is None:
                merged[key] = contrib
                order.append(key)
            else:
                merged[key] = ring.add(prev, contrib)
    terms = []
    for key in order:
        v = merged[key]
        if v != zero:
            terms.append((RingElement(ring, v), key[0], key[1]))
    return SpanDecomposition(phi, target, affine, terms, validate=validate)


def dec_scale(dec, c, validate="auto"):
    return dec_linear_combine([(c, dec)], validate=validate)


# ---------------------------------------------------------------------------
# exact linear algebra over a field (raw values)
# ---------------------------------------------------------------------------

def solve_field_system(ring, rows, rhs):
    """One solution of rows * x = rhs over a field, or None when inconsistent.

    rows may be rectangular; free variables are set to zero.
    """
    zero, one = ring.zero_value(), ring.one_value()
    m = [list(r) + [b] for r, b in zip(rows, rhs)]
    nrows = len(m)
    ncols = len(rows[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = None
        for rr in range(r, nrows):
            if m[rr][c] != zero:
                pivot = rr
                break
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        inv = ring.inv(m[r][c])
        m[r] = [ring.mul(inv, v) for v in m[r]]
        for rr in range(nrows):
            if rr != r and m[rr][c] != zero:
                factor = m[rr][c]
                m[rr] = [
                    ring.sub(v, ring.mul(factor, w)) for v, w in zip(m[rr], m[r])
                ]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    for rr in range(r, nrows):
        if m[rr][ncols] != zero:
            return None
    x = [zero] * ncols
    for row_idx, c in enumerate(pivots):
        x[c] = m[row_idx][ncols]
    return x


# ---------------------------------------------------------------------------
# scaling interpolation: isolate one monomial of a degree-condition element
# ---------------------------------------------------------------------------

def _p_power_split(exponents, p):
    """Largest p-power dividing every positive exponent; 1 when p = 0."""
    positive = [t for t in exponents if t > 0]
    if not positive or p == 0:
        return 1
    vmin = None
    for t in positive:
        v = 0
        while t % p == 0:
            t //= p
            v += 1
        vmin = v if vmin is None else min(vmin, v)
        if vmin == 0:
            break
    return p**vmin


def vandermonde_combination(g, monomial):
    """Scalars (c_l, alpha_l) with sum c_l * g(alpha_l . x) = a * monomial.

    One variable at a time: writing g as a polynomial in x_v^{p^e}, scaling
    x_v by enough distinct units sets up an invertible power matrix whose
    inverse row picks out the component carrying the monomial.  The support
    exponents alone are tried first; if that generalized matrix is singular
    the full exponent range 0..d is used, which needs sep-degree + 1 units
    and is exactly where the degree condition enters.
    """
    ring = g.ring
    if not ring.is_field:
        raise Unsupported("scaling interpolation needs a base field")
    p = ring.characteristic
    monomial = tuple(monomial)
    if monomial not in g.terms:
        raise ValueError("the requested monomial does not appear")
    combos = {tuple(ring.one_value() for _ in range(g.nvars)): ring.one_value()}
    current = g
    for v in range(1, g.nvars + 1):
        exps = sorted({e[v - 1] for e in current.terms})
        if exps[-1] == 0:
            continue
        pe = _p_power_split(exps, p)
        support = sorted({t // pe for t in exps})
        if len(support) == 1:
            continue
        target_i = monomial[v - 1] // pe
        d = max(support)
        solution = None
        for index_set in (support, list(range(d + 1))):
            k = len(index_set)
            alphas = distinct_scalars(ring, k)
            betas = [(a**pe).value for a in alphas]
            rows = []
            rhs = []
            for i in index_set:
                rows.append(
                    [pow_value(ring, b, i) for b in betas]
                )
                rhs.append(
                    ring.one_value() if i == target_i else ring.zero_value()
                )
            solution = solve_field_system(ring, rows, rhs)
            if solution is not None:
                break
        if solution is None:
            raise ValueError("power matrix unexpectedly singular")
        zero = ring.zero_value()
        new_combos = {}
        for vec, c in combos.items():
            for c_l, alpha in zip(solution, alphas):
                if c_l == zero:
                    continue
                coeff = ring.mul(c, c_l)
                if coeff == zero:
                    continue
                new_vec = list(vec)
                new_vec[v - 1] = ring.mul(new_vec[v - 1], alpha.value)
                key = tuple(new_vec)
                acc = ring.add(new_combos.get(key, zero), coeff)
                if acc == zero:
                    new_combos.pop(key, None)
                else:
                    new_combos[key] = acc
        combos = new_combos
        current = Polynomial(
            ring,
            g.nvars,
            {
                e: val
                for e, val in current.terms.items()
                if e[v - 1] == monomial[v - 1]
            },
        )
    return [
        (RingElement(ring, c), tuple(RingElement(ring, s) for s in vec))
        for vec, c in combos.items()
    ]


def pow_value(ring, base, k):
    acc = ring.one_value()
    b = base
    while k:
        if k & 1:
            acc = ring.mul(acc, b)
        b = ring.mul(b, b)
        k >>= 1
    return acc


def apply_scaling(g, scalevec):
    ring, n = g.ring, g.nvars
    out = {}
    zero = ring.zero_value()
    for exps, v in g.terms.items():
        factor = ring.one_value()
        for t, s in zip(exps, scalevec):
            if t:
                factor = ring.mul(factor, pow_value(ring, s.value, t))
        prod = ring.mul(factor, v)
        if prod != zero:
            out[exps] = prod
    return Polynomial(ring, n, out)


def vandermonde_extract(dec, monomial, validate="auto"):
    """Decomposition of a*monomial from a decomposition of g containing it."""
    ring = dec.phi.ring
    combos = vandermonde_combination(dec.target, monomial)
    pairs = []
    for c, vec in combos:
        scaled = dec_apply_affine(
            dec, AffineMap.diagonal(ring, [s.value for s in vec]), validate=False
        )
        pairs.append((c, scaled))
    out = dec_linear_combine(pairs, validate=validate)
    exps, _ = out.single_monomial()
    if exps != tuple(monomial):
        raise ValueError("interpolation did not isolate the requested monomial")
    return out


# ---------------------------------------------------------------------------
# all-ones shift: expose a quadratic or cubic monomial of a good monomial
# ---------------------------------------------------------------------------

def all_ones_shift(ring, n):
    return AffineMap.translation(ring, [ring.one_value()] * n)


def _route_for_good_monomial(exps, n, p):
    """Which extraction target the shifted monomial carries, recomputed fresh."""
    if p == 0:
        for i, t in enumerate(exps):
            if t >= 2:
                return "square", (i + 1, i + 1)
        ones = [i + 1 for i, t in enumerate(exps) if t == 1]
        if len(ones) >= 2:
            return "product", (ones[0], ones[1])
        raise ValueError("not a good monomial")
    if n == 2 and p == 2:
        for i, j in ((0, 1), (1, 0)):
            if exps[i] % 4 == 1 and exps[j] % 4 == 2:
                return "mixed-cube", (i + 1, j + 1)
        for i, t in enumerate(exps):
            if t % 4 == 3:
                return "pure-cube", (i + 1, i + 1)
        ones = [i + 1 for i, t in enumerate(exps) if t % 2 == 1]
        if len(ones) >= 2:
            return "product", (ones[0], ones[1])
        raise ValueError("not a good monomial")
    ones = [i + 1 for i, t in enumerate(exps) if t % p == 1]
    if len(ones) >= 2:
        return "product", (ones[0], ones[1])
    if p >= 3:
        for i, t in enumerate(exps):
            if t % p not in (0, 1):
                return "square", (i + 1, i + 1)
    raise ValueError("not a good monomial")


def shift_extract(dec, k_size=None, validate="auto"):
    """From a*m (m good) to a*u*(x_i x_j | x_i^2 | x_i x_j^2 | x_i^3).

    Applies the all-ones translation and interpolates the case target out
    of the shifted monomial; u collects binomial coefficients and is a
    unit exactly when m is good.
    """
    ring = dec.phi.ring
    n = dec.phi.nvars
    p = _guard_characteristic(ring.characteristic)
    exps, _ = dec.single_monomial()
    kind, (i, j) = _route_for_good_monomial(exps, n, p)
    lam = all_ones_shift(ring, n)
    shifted = dec_apply_affine(dec, lam, validate=validate)
    if not degree_condition(shifted.target, k_size):
        raise DegreeConditionError(
            "shifted monomial violates the separable degree bound"
        )
    target = [0] * n
    if kind == "product":
        target[i - 1] += 1
        target[j - 1] += 1
    elif kind == "square":
        target[i - 1] = 2
    elif kind == "mixed-cube":
        target[i - 1] += 1
        target[j - 1] += 2
    elif kind == "pure-cube":
        target[i - 1] = 3
    out = vandermonde_extract(shifted, tuple(target), validate=validate)
    return out, kind, tuple(target)


# ---------------------------------------------------------------------------
# conversions between quadratic/cubic targets
# ---------------------------------------------------------------------------

def _single_variable_of(exps):
    support = [i for i, t in enumerate(exps) if t > 0]
    return support[0] + 1


def unit_normalize(dec, validate="auto"):
    """Scale so that the single-monomial target has coefficient one."""
    exps, value = dec.single_monomial()
    ring = dec.phi.ring
    return dec_scale(dec, RingElement(ring, ring.inv(value)), validate=validate), exps


def move_monomial(dec, perm, validate="auto"):
    """Apply a permutation to relocate the target monomial's variables."""
    ring = dec.phi.ring
    return dec_apply_affine(
        dec, AffineMap.permutation(ring, perm), validate=validate
    )


def convert_square(dec, validate="auto"):
    """From c*x_i^2 to c*x1*x2; needs 2 invertible.

    Uses the difference of squares under (x1, x2) -> (x1+x2, x1-x2): the
    image of x1^2 - x2^2 is 4*x1*x2.
    """
    ring = dec.phi.ring
    n = dec.phi.nvars
    two = ring.coerce_value(2)
    if not ring.is_unit(two):
        raise NotAUnit("2 must be a unit for the square-to-product conversion")
    exps, _ = dec.single_monomial()
    i = _single_variable_of(exps)
    if exps[i - 1] != 2 or sum(exps) != 2:
        raise ValueError("target must be a single x_i^2 monomial")
    if i != 1:
        dec = move_monomial(dec, transposition_perm(n, 1, i), validate=validate)
    swapped = move_monomial(dec, transposition_perm(n, 1, 2), validate=validate)
    diff = dec_linear_combine([(1, dec), (-1, swapped)], validate=validate)
    one, zero = ring.one_value(), ring.zero_value()
    A = [[one if r == c else zero for c in range(n)] for r in range(n)]
    A[0][0], A[1][0] = one, one            # x1 -> x1 + x2
    A[0][1], A[1][1] = one, ring.neg(one)  # x2 -> x1 - x2
    eta = AffineMap(ring, A, [zero] * n)
    mixed = dec_apply_affine(diff, eta, validate=validate)
    four_inv = ring.inv(ring.coerce_value(4))
    return dec_scale(mixed, RingElement(ring, four_inv), validate=validate)


def convert_cube(dec, xi=None, validate="auto"):
    """From c*x_i^3 to c*x1*x2^2 in two variables over characteristic 2.

    x1^3 + x2^3 + (x1+x2)^3 collapses to x1^2*x2 + x1*x2^2; combining with
    its (xi*x1, x2) rescaling leaves xi*(xi+1)*x1*x2^2, and xi*(xi+1) is a
    unit by the choice of xi.
    """
    ring = dec.phi.ring
    n = dec.phi.nvars
    if n != 2 or ring.characteristic != 2:
        raise Unsupported("cube conversion applies to n = 2 in characteristic 2")
    if xi is None:
        xi = find_special_unit(ring)
    xi_v = ring.coerce_value(xi.value if isinstance(xi, RingElement) else xi)
    succ = ring.add(xi_v, ring.one_value())
    if not (ring.is_unit(xi_v) and ring.is_unit(succ)):
        raise NotAUnit("need xi and xi+1 both invertible")
    exps, _ = dec.single_monomial()
    i = _single_variable_of(exps)
    if exps[i - 1] != 3 or sum(exps) != 3:
        raise ValueError("target must be a single x_i^3 monomial")
    if i != 1:
        dec = move_monomial(dec, transposition_perm(n, 1, i), validate=validate)
    swapped = move_monomial(dec, transposition_perm(n, 1, 2), validate=validate)
    one, zero = ring.one_value(), ring.zero_value()
    # x1 -> x1 + x2, x2 -> x2
    shear = AffineMap(ring, [[one, zero], [one, one]], [zero, zero])
    summed = dec_apply_affine(dec, shear, validate=validate)
    both = dec_linear_combine(
        [(1, dec), (1, swapped), (1, summed)], validate=validate
    )
    scaling = AffineMap.diagonal(ring, [xi_v, one])
    rescaled = dec_apply_affine(both, scaling, validate=validate)
    combined = dec_linear_combine(
        [(1, rescaled), (RingElement(ring, ring.mul(xi_v, xi_v)), both)],
        validate=validate,
    )
    factor = ring.inv(ring.mul(xi_v, succ))
    return dec_scale(combined, RingElement(ring, factor), validate=validate)


def _relabel_perm(n, sources, targets):
    """A permutation whose substitution sends x_source -> x_target pairwise."""
    perm = [None] * n
    used = set(targets)
    for s, t in zip(sources, targets):
        perm[s - 1] = t
    rest = iter(v for v in range(1, n + 1) if v not in used)
    return [v if v is not None else next(rest) for v in perm]


def normalize_to_seed(dec, kind, validate="auto"):
    """Route any extracted target to x1*x2 (product seed) or x1*x2^2 (cube seed).

    Returns (dec, seed_kind) with the target coefficient scaled to one.
    """
    n = dec.phi.nvars
    dec, exps = unit_normalize(dec, validate=validate)
    if kind == "product":
        support = [i + 1 for i, t in enumerate(exps) if t > 0]
        i, j = support[0], support[1]
        dec = move_monomial(dec, _relabel_perm(n, [i, j], [1, 2]), validate=validate)
        got, _ = dec.single_monomial()
        if got != tuple(1 if t < 2 else 0 for t in range(n)):
            raise ValueError("product normalization failed")
        return dec, "product"
    if kind == "square":
        return convert_square(dec, validate=validate), "product"
    if kind == "mixed-cube":
        # want exponent pattern (1, 2)
        if exps[0] == 2:
            dec = move_monomial(dec, transposition_perm(n, 1, 2), validate=validate)
        return dec, "cube"
    if kind == "pure-cube":
        converted = convert_cube(dec, validate=validate)
        return converted, "cube"
    raise ValueError(f"unknown target kind {kind!r}")


# ---------------------------------------------------------------------------
# word compilers
# ---------------------------------------------------------------------------

def compile_last_word(dec, validate=True):
    """A word evaluating to the map that adds dec.target to x_{n+1}.

    The affine part is one affine letter; each term a*eta(phi(x_i)) becomes
    eta~ o (phi o shift(a*x_i) o phi^{-1}) o eta~^{-1} with eta~ the block
    extension of eta, since conjugating the shift of a*x_i by phi adds
    a*phi(x_i) to the last variable.
    """
    phi = dec.phi
    ring, n = phi.ring, phi.nvars
    ambient = n + 1
    if validate:
        dec.validate()
    letters = []
    if not dec.affine_part.is_zero():
        letters.append(
            AffineLetter(AffineMap.last_variable_shift(dec.affine_part, ambient))
        )
    ident = AffineMap.identity(ring, n)
    for a, eta, i in dec.terms:
        shift = AffineMap.last_variable_shift(
            Polynomial.variable(ring, n, i).scale(a), ambient
        )
        inner = [PhiLetter(1), AffineLetter(shift), PhiLetter(-1)]
        if eta == ident:
            letters.extend(inner)
        else:
            eta_ext = eta.embed(ambient)
            letters.append(AffineLetter(eta_ext))
            letters.extend(inner)
            letters.append(AffineLetter(eta_ext.inverse()))
    return GeneratorWord(ambient, letters)


def _first_variable_shift_letter(ring, ambient, poly):
    """epsilon(h) for affine h: a single affine letter."""
    return AffineLetter(AffineMap.variable_shift(poly, ambient, 1))


def compile_tame_word(seed_word, seed_kind, f, n):
    """A word for the map adding f(x_2..x_n) to x_1, from a seed word.

    seed_kind "product": the seed evaluates to the last-variable shift by
    x1*x2; conjugating by (1,n+1)(2,i) yields the first-variable shift by
    x_i*x_{n+1} and a commutator multiplies any achieved shift by x_i.
    seed_kind "cube" (n = 2 only): the seed shifts by x1*x2^2 and the
    conjugate by (1,3) climbs exponents of x2 in steps of two.
    """
    if f.is_zero():
        return GeneratorWord(n + 1, [])
    ring = f.ring
    ambient = n + 1
    if f.deg_xi(1) > 0:
        raise ValueError("target polynomial must avoid x1")
    tau = AffineMap.transposition(ring, ambient, 1, ambient)
    cache = {}

    if seed_kind == "product":
        conj = {}
        for i in range(2, n + 1):
            sigma = AffineMap.permutation(
                ring,
                _product_perm(ambient, i),
            )
            conj[i] = conjugate_word(seed_word, sigma)

        def word_for(coeff, exps):
            key = (coeff, exps)
            hit = cache.get(key)
            if hit is not None:
                return hit
            if sum(exps) <= 1:
                poly = Polynomial.monomial(ring, exps, RingElement(ring, coeff))
                out = GeneratorWord(
                    ambient, [_first_variable_shift_letter(ring, ambient, poly)]
                )
            else:
                i = next(t + 1 for t, e in enumerate(exps) if e > 0 and t >= 1)
                rest = tuple(
                    e - 1 if t + 1 == i else e for t, e in enumerate(exps)
                )
                base = word_for(coeff, rest)
                hat = conjugate_word(base, tau)
                out = hat + conj[i] + hat.inverse() + conj[i].inverse()
            cache[key] = out
            return out

    elif seed_kind == "cube":
        if n != 2:
            raise ValueError("the cube seed applies to n = 2 only")
        sigma = AffineMap.transposition(ring, 3, 1, 3)
        climb = conjugate_word(seed_word, sigma)

        def word_for(coeff, exps):
            key = (coeff, exps)
            hit = cache.get(key)
            if hit is not None:
                return hit
            if exps[1] <= 1:
                poly = Polynomial.monomial(ring, exps, RingElement(ring, coeff))
                out = GeneratorWord(
                    ambient, [_first_variable_shift_letter(ring, ambient, poly)]
                )
            else:
                base = word_for(coeff, (0, exps[1] - 2))
                hat = conjugate_word(base, tau)
                out = hat + climb + hat.inverse() + climb.inverse()
            cache[key] = out
            return out

    else:
        raise ValueError(f"unknown seed kind {seed_kind!r}")

    word = GeneratorWord(ambient, [])
    for exps in f.monomials():
        word = word + word_for(f.terms[exps], exps)
    return word


def _product_perm(ambient, i):
    """The permutation (1, ambient)(2, i) as an image list."""
    perm = list(range(1, ambient + 1))
    perm[0], perm[ambient - 1] = perm[ambient - 1], perm[0]
    perm[1], perm[i - 1] = perm[i - 1], perm[1]
    return perm


# ---------------------------------------------------------------------------
# seed construction and the full pipeline
# ---------------------------------------------------------------------------

@dataclass
class WitnessInfo:
    route: str
    seed_kind: str
    seed_dec: SpanDecomposition
    word_length: int = 0
    details: dict | None = None


def _already_case_shape(exps, kind):
    positive = sorted(t for t in exps if t > 0)
    if kind == "product":
        return positive == [1, 1]
    if kind == "square":
        return positive == [2]
    if kind == "mixed-cube":
        return positive == [1, 2]
    if kind == "pure-cube":
        return positive == [3]
    return False


def _seed_from_span(phi, k_size, budget, seed, validate="auto"):
    scan = span_good_scan(phi, k_size, budget=budget, seed=seed)
    if not scan.certified_full():
        return None
    ring, n = phi.ring, phi.nvars
    p = ring.characteristic
    # low-degree good monomials first: they need no shift, so the resulting
    # words stay shorter and avoid translation wrappers entirely
    witnesses = sorted(
        scan.witnesses, key=lambda w: (sum(w.monomial), w.monomial)
    )
    for witness in witnesses:
        if not witness.coefficient.is_unit():
            continue
        linear = Polynomial(
            ring,
            phi.nvars,
            {
                e: ring.neg(v)
                for e, v in _combo_terms_linear(phi, witness.combo).items()
            },
        )
        dec = span_decomposition(phi, witness.combo, linear=linear)
        if dec.target != witness.candidate:
            raise ValueError("span witness failed to rebuild")
        extracted = vandermonde_extract(dec, witness.monomial, validate=validate)
        kind, _ = _route_for_good_monomial(witness.monomial, n, p)
        if _already_case_shape(witness.monomial, kind):
            shifted = extracted
        else:
            shifted, kind, _ = shift_extract(extracted, k_size, validate=validate)
        seed_dec, seed_kind = normalize_to_seed(shifted, kind, validate=validate)
        return WitnessInfo(
            route="J-full",
            seed_kind=seed_kind,
            seed_dec=seed_dec,
            details=witness.describe(),
        )
    return None


def _combo_terms_linear(phi, combo):
    ring, n = phi.ring, phi.nvars
    acc = Polynomial.zero(ring, n)
    for c, img in zip(combo, phi.images):
        cv = ring.coerce_value(c.value if isinstance(c, RingElement) else c)
        if cv != ring.zero_value():
            acc = acc + img.scale(RingElement(ring, cv))
    return {e: v for e, v in acc.terms.items() if sum(e) == 1}


def _seed_from_direct(phi, validate="auto"):
    found = direct_pattern_scan(phi)
    if found is None:
        return None
    ring, n = phi.ring, phi.nvars
    j = found["image"]
    img = phi.images[j - 1]
    monomial = Polynomial.monomial(
        ring, found["monomial"], RingElement(ring, found["coefficient"])
    )
    affine_rest = img - monomial
    base = span_decomposition(phi, _unit_vector(ring, n, j))
    dec = dec_linear_combine(
        [(1, base), (-1, trivial_decomposition(phi, affine_rest))],
        validate=validate,
    )
    kind = {
        "a": "product",
        "b": "square",
        "c": "mixed-cube",
        "d": "pure-cube",
    }[found["case"]]
    seed_dec, seed_kind = normalize_to_seed(dec, kind, validate=validate)
    return WitnessInfo(
        route=f"M-phi-case-{found['case']}",
        seed_kind=seed_kind,
        seed_dec=seed_dec,
        details={
            "image": j,
            "monomial": list(found["monomial"]),
            "coefficient": ring.format_value(found["coefficient"]),
        },
    )


def _unit_vector(ring, n, j):
    vec = [ring.zero_value()] * n
    vec[j - 1] = ring.one_value()
    return vec


def _seed_from_delta(phi, delta_limit, validate="auto"):
    found = delta_search(phi, limit=delta_limit)
    if found is None:
        return None
    dec, spec, info = found
    exps, _ = dec.single_monomial()
    if sum(exps) == 2 and max(exps) == 1:
        kind = "product"
    else:
        kind = "square"
    seed_dec, seed_kind = normalize_to_seed(dec, kind, validate=validate)
    return WitnessInfo(
        route="delta-route",
        seed_kind=seed_kind,
        seed_dec=seed_dec,
        details={"l": list(spec.l), "image": info["image"]},
    )


def build_witness_with_info(
    phi,
    target,
    k_size="auto",
    budget=200000,
    seed=0,
    max_degree=4,
    delta_limit=128,
):
    """Compile a generator word evaluating to the tame generator epsilon(target).

    The word lives in n+1 variables; its evaluation against extend(phi, 1)
    equals extend(elementary(target), 1) exactly.
    """
    ring, n = phi.ring, phi.nvars
    if n < 2:
        raise ValueError("need n >= 2")
    if target.nvars != n:
        raise ValueError("target must live in R[x_1..x_n]")
    if not target.is_zero() and target.deg_xi(1) > 0:
        raise NoRouteFound("target must lie in R[x_2..x_n]")
    too_big = target.total_deg()
    if not target.is_zero() and too_big > max_degree:
        raise ResourceLimit(
            f"target degree {too_big} exceeds the word-size cap {max_degree}"
        )
    ksz = resolve_k_size(ring, k_size)
    info = None
    if ksz != "unavailable":
        info = _seed_from_span(phi, ksz, budget, seed)
    if info is None:
        info = _seed_from_direct(phi)
    if info is None and ring.is_field and ring.characteristic > 0:
        info = _seed_from_delta(phi, delta_limit)
    if info is None:
        raise NoRouteFound(
            "no span, direct, or difference-operator route certified this map"
        )
    if info.seed_kind == "cube" and n != 2:
        raise NoRouteFound("cube seed arose outside n = 2")
    seed_word = compile_last_word(info.seed_dec, validate=False)
    word = compile_tame_word(seed_word, info.seed_kind, target, n)
    info.word_length = len(word)
    return word, info


def build_witness(phi, target, k_size="auto", **kwargs):
    word, _ = build_witness_with_info(phi, target, k_size=k_size, **kwargs)
    return word


def verify_witness(word, phi, target, phi_inverse=None):
    """Exact check: the word evaluates to the target, both extended to ambient."""
    if isinstance(target, Polynomial):
        target = elementary(target)
    value = word.evaluate(phi, phi_inverse)
    expected = extend(target, word.ambient - target.nvars)
    return value == expected


# ---------------------------------------------------------------------------
# difference operators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DeltaSpec:
    """Profile for iterated translation differences: orders l_i, steps a_i."""

    ring: object
    l: tuple
    a: tuple

    def __post_init__(self):
        p = self.ring.characteristic
        if not is_prime(p):
            raise Unsupported("difference operators need prime characteristic")
        if len(self.l) != len(self.a):
            raise ValueError("order and step vectors must have equal length")
        if any(not 0 <= li <= p - 1 for li in self.l):
            raise ValueError("orders must satisfy 0 <= l_i <= p-1")
        for av in self.a:
            if not self.ring.is_unit(self.ring.coerce_value(av)):
                raise ValueError("step values must be units")

    @classmethod
    def ones(cls, ring, l):
        return cls(ring, tuple(l), tuple(ring.one_value() for _ in l))


def delta_apply(f, i, a):
    """f(..., x_i + a, ...) - f."""
    ring, n = f.ring, f.nvars
    images = [Polynomial.variable(ring, n, t + 1) for t in range(n)]
    images[i - 1] = images[i - 1] + Polynomial.constant(ring, n, a)
    return f.substitute(images) - f


def delta_power(f, spec):
    """Apply delta_i exactly l_i times for every i."""
    out = f
    for i, (li, ai) in enumerate(zip(spec.l, spec.a), start=1):
        for _ in range(li):
            out = delta_apply(out, i, ai)
    return out


def kernel_generator(ring, n, i, a):
    """x_i^p - a^{p-1} x_i, the invariant of the step-a translation in x_i."""
    p = ring.characteristic
    av = ring.coerce_value(a.value if isinstance(a, RingElement) else a)
    lead = Polynomial.monomial(
        ring, tuple(p if t == i - 1 else 0 for t in range(n)), ring.one_value()
    )
    coeff = pow_value(ring, av, p - 1)
    lin = Polynomial.variable(ring, n, i).scale(RingElement(ring, ring.neg(coeff)))
    return lead + lin


def delta_module_membership(f, spec, degree_margin=None):
    """Membership in sum_i R x_i x^l + sum_i sum_{j<l_i} A_i x_i^j.

    A_i is generated by the kernel polynomial q_i and the other variables,
    so the module is spanned by x_i*x^l and q_i^s * mu * x_i^j with mu a
    monomial in the remaining variables.  Generators up to deg(f) plus a
    small margin feed one exact linear solve over the base field.
    """
    ring, n = f.ring, f.nvars
    p = ring.characteristic
    if not ring.is_field:
        raise Unsupported("membership solving is implemented over fields")
    if f.is_zero():
        return True
    if degree_margin is None:
        degree_margin = p
    D = f.total_deg() + degree_margin
    gens = []
    l = spec.l
    base_exps = tuple(l)
    # x_0 = 1 alongside the variables
    gens.append(Polynomial.monomial(ring, base_exps, ring.one_value()))
    for i in range(1, n + 1):
        exps = list(base_exps)
        exps[i - 1] += 1
        gens.append(Polynomial.monomial(ring, tuple(exps), ring.one_value()))
    for i in range(1, n + 1):
        q = kernel_generator(ring, n, i, spec.a[i - 1])
        q_pows = [Polynomial.constant(ring, n, 1)]
        while len(q_pows) * p <= D:
            q_pows.append(q_pows[-1] * q)
        for j in range(l[i - 1]):
            for s, qp in enumerate(q_pows):
                room = D - s * p - j
                if room < 0:
                    break
                xij = Polynomial.monomial(
                    ring,
                    tuple(j if t == i - 1 else 0 for t in range(n)),
                    ring.one_value(),
                )
                base = qp * xij
                for mu in _monomials_avoiding(n, i, room):
                    gens.append(base * Polynomial.monomial(ring, mu, ring.one_value()))
    monomials = sorted(
        set(f.terms) | {e for g in gens for e in g.terms}
    )
    index = {e: r for r, e in enumerate(monomials)}
    zero = ring.zero_value()
    rows = [[zero] * len(gens) for _ in monomials]
    for c, g in enumerate(gens):
        for e, v in g.terms.items():
            rows[index[e]][c] = v
    rhs = [zero] * len(monomials)
    for e, v in f.terms.items():
        rhs[index[e]] = v
    return solve_field_system(ring, rows, rhs) is not None


def _monomials_avoiding(n, skip_i, max_total):
    """Exponent tuples in the variables other than x_skip_i, total degree bounded."""
    other = [t for t in range(n) if t != skip_i - 1]
    for degs in itertools.product(range(max_total + 1), repeat=len(other)):
        if sum(degs) <= max_total:
            exps = [0] * n
            for t, d in zip(other, degs):
                exps[t] = d
            yield tuple(exps)


def _admissible_patterns(n, p, l):
    """(kind, indices) patterns allowed by the order profile l."""
    out = []
    for u in range(1, n + 1):
        for v in range(u + 1, n + 1):
            if l[u - 1] <= p - 2 and l[v - 1] <= p - 2:
                out.append(("product", (u, v)))
    if p >= 3:
        for u in range(1, n + 1):
            if l[u - 1] <= p - 3:
                out.append(("square", (u, u)))
    return out


def delta_route(phi, spec, j, pair=None, validate="auto"):
    """A decomposition of x_u*x_v (or x_u^2) when phi(x_j) matches the
    difference-operator pattern unit*m*x^l + (delta-kernel module).

    Candidate monomials of phi(x_j) are matched against m = x_u*x_v*x^l or
    x_u^2*x^l; the remainder must solve the module membership, after which
    applying the iterated differences to the decomposition of phi(x_j)
    leaves unit*target + affine, exactly.
    """
    ring, n = phi.ring, phi.nvars
    p = ring.characteristic
    l = spec.l
    patterns = _admissible_patterns(n, p, l)
    if pair is not None:
        u, v = pair
        kind = "square" if u == v else "product"
        if (kind, (min(u, v), max(u, v)) if u != v else (u, u)) not in patterns:
            raise ValueError(
                f"order profile {l} does not admit the {kind} pattern at {pair}"
            )
        patterns = [(kind, (min(u, v), max(u, v)) if u != v else (u, u))]
    img = phi.images[j - 1]
    for kind, (u, v) in patterns:
        wanted = list(l)
        wanted[u - 1] += 1
        if kind == "product":
            wanted[v - 1] += 1
        else:
            wanted[u - 1] += 1
        wanted = tuple(wanted)
        c = img.terms.get(wanted)
        if c is None or not ring.is_unit(c):
            continue
        remainder = img - Polynomial.monomial(ring, wanted, RingElement(ring, c))
        if not delta_module_membership(remainder, spec):
            continue
        dec = span_decomposition(phi, _unit_vector(ring, n, j))
        for i, (li, ai) in enumerate(zip(spec.l, spec.a), start=1):
            eta = AffineMap.variable_shift(
                Polynomial.constant(ring, n, ai), n, i
            )
            for _ in range(li):
                moved = dec_apply_affine(dec, eta, validate=False)
                dec = dec_linear_combine([(1, moved), (-1, dec)], validate=validate)
        target = [0] * n
        target[u - 1] += 1
        if kind == "product":
            target[v - 1] += 1
        else:
            target[u - 1] += 1
        target_exps = tuple(target)
        c2 = dec.target.terms.get(target_exps)
        if c2 is None or not ring.is_unit(c2):
            continue
        rest = dec.target - Polynomial.monomial(
            ring, target_exps, RingElement(ring, c2)
        )
        if not rest.is_affine():
            continue
        dec = dec_linear_combine(
            [(1, dec), (-1, trivial_decomposition(phi, rest))], validate=validate
        )
        dec = dec_scale(dec, RingElement(ring, ring.inv(c2)), validate=validate)
        return dec, {"image": j, "monomial": wanted, "kind": kind, "pair": (u, v)}
    return None


def delta_search(phi, limit=128):
    """Sweep small order profiles; unit steps of one in every variable."""
    ring, n = phi.ring, phi.nvars
    p = ring.characteristic
    if not (is_prime(p) and ring.is_field):
        return None
    if p**n > limit:
        return None
    for l in itertools.product(range(p), repeat=n):
        if all(li == 0 for li in l):
            continue
        spec = DeltaSpec.ones(ring, l)
        if not _admissible_patterns(n, p, l):
            continue
        for j in range(1, n + 1):
            found = delta_route(phi, spec, j)
            if found is not None:
                dec, info = found
                return dec, spec, info
    return None


# ---------------------------------------------------------------------------
# the swap-conjugate gallery
# ---------------------------------------------------------------------------

def _theta_generators(ring):
    n = 3
    x1 = Polynomial.variable(ring, n, 1)
    x2 = Polynomial.variable(ring, n, 2)
    x3 = Polynomial.variable(ring, n, 3)
    bump = x2 + x3 * x3
    beta = Endomorphism(ring, [x1 + (x2 * x2) * (bump * bump), bump, x3])
    pi = permutation(ring, [2, 1, 3])
    return beta, pi


def theta_map(N, ring, max_terms=2_000_000):
    """The swap conjugated by N rounds of the triangular map and the swap.

    Returns (theta, theta_prime) where theta_prime = theta o swap strips
    the trailing transposition.  Exact composition with a term-count guard.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    beta, pi = _theta_generators(ring)
    beta_inv = invert_structured(beta, hint="triangular")
    forward = compose(beta, pi)
    backward = compose(pi, beta_inv)

    def guarded(a, b):
        out = compose(a, b)
        size = sum(len(img.terms) for img in out.images)
        if size > max_terms:
            raise ResourceLimit(
                f"theta composition grew to {size} terms (limit {max_terms})"
            )
        return out

    fwd_n = forward
    bwd_n = backward
    for _ in range(N - 1):
        fwd_n = guarded(fwd_n, forward)
        bwd_n = guarded(bwd_n, backward)
    theta = guarded(bwd_n, guarded(pi, fwd_n))
    theta_prime = guarded(theta, pi)
    return theta, theta_prime


theta = theta_map
