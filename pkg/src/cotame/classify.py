"""Good monomials, obstruction ideals, exponent patterns and the decision
procedure for stable co-tameness.

A monomial is *good* when its exponent pattern falls into one of five
characteristic-dependent cases; coefficients of good monomials in the
images of a map generate the obstruction ideal.  Maps with no good
monomial at all form a subgroup that blocks stable co-tameness, and over
a base field the good coefficients of degree-condition span elements
certify the positive direction.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from .endo import IdealHandle, reduce_mod
from .errors import CompositeCharacteristic, NoSuchUnit, Unsupported
from .poly import Polynomial
from .rings import (
    IntegerModRing,
    IntegerRing,
    PrimeField,
    RationalField,
    RingElement,
    find_special_unit,
    is_prime,
)


def _guard_characteristic(p):
    if p != 0 and not is_prime(p):
        raise CompositeCharacteristic(
            f"good-monomial machinery needs characteristic 0 or prime, not {p}"
        )
    return p


@dataclass(frozen=True)
class GoodMonomialType:
    tag: str  # one of "I".."V" or "NotGood"
    i: int | None = None  # 1-based witness indices where applicable
    j: int | None = None

    def is_good(self):
        return self.tag != "NotGood"


NOT_GOOD = GoodMonomialType("NotGood")


def good_monomial_type(exps, n, p):
    """Classify an exponent vector; the first matching case I..V is reported."""
    _guard_characteristic(p)
    if len(exps) != n:
        raise ValueError("exponent vector length must equal n")
    if p == 0:
        if sum(exps) >= 2:
            return GoodMonomialType("I")
        return NOT_GOOD
    # case II: two indices with exponent 1 mod p
    ones = [i for i, t in enumerate(exps) if t % p == 1]
    if len(ones) >= 2:
        return GoodMonomialType("II", ones[0] + 1, ones[1] + 1)
    if p >= 3:
        for i, t in enumerate(exps):
            if t % p not in (0, 1):
                return GoodMonomialType("III", i + 1)
        return NOT_GOOD
    if n == 2 and p == 2:
        for i, j in ((0, 1), (1, 0)):
            if exps[i] % 4 == 1 and exps[j] % 4 == 2:
                return GoodMonomialType("IV", i + 1, j + 1)
        for i, t in enumerate(exps):
            if t % 4 == 3:
                return GoodMonomialType("V", i + 1)
    return NOT_GOOD


def good_monomials(f):
    """All (exponents, coefficient, type) triples of good monomials in f."""
    p = _guard_characteristic(f.ring.characteristic)
    out = []
    for exps in f.monomials():
        t = good_monomial_type(exps, f.nvars, p)
        if t.is_good():
            out.append((exps, RingElement(f.ring, f.terms[exps]), t))
    return out


def good_coefficients(f):
    """The set C_f of coefficients of good monomials, in deterministic order."""
    seen = []
    for _, coeff, _ in good_monomials(f):
        if coeff not in seen:
            seen.append(coeff)
    seen.sort(key=lambda c: f.ring.sort_key(c.value))
    return seen


def good_ideal(phi):
    """The obstruction ideal generated by all good coefficients of the images."""
    gens = []
    for img in phi.images:
        gens.extend(good_coefficients(img))
    return IdealHandle(phi.ring, gens)


ideal_I_phi = good_ideal


def degree_condition(f, k_size):
    """Separable degree at most #k - 2 in every variable; vacuous when k is infinite."""
    if k_size is None:
        return True
    if k_size < 2:
        raise ValueError("a field has at least 2 elements")
    bound = k_size - 2
    for i in range(1, f.nvars + 1):
        if f.sep_deg_xi(i) > bound:
            return False
    return True


# ---------------------------------------------------------------------------
# span scan: good coefficients of degree-condition span elements
# ---------------------------------------------------------------------------

@dataclass
class SpanWitness:
    combo: tuple  # raw coefficient values c with candidate = sum c_i * phi(x_i) - linear part
    candidate: Polynomial
    monomial: tuple
    coefficient: RingElement
    gm_type: GoodMonomialType

    def describe(self):
        return {
            "combo": [
                self.candidate.ring.format_value(c) for c in self.combo
            ],
            "candidate": str(self.candidate),
            "monomial": list(self.monomial),
            "coefficient": self.candidate.ring.format_value(self.coefficient.value),
            "case": self.gm_type.tag,
        }


@dataclass
class SpanScan:
    handle: IdealHandle
    witnesses: list = field(default_factory=list)
    exhaustive: bool = False
    examined: int = 0
    diagnostics: list = field(default_factory=list)

    def certified_full(self):
        return self.handle.is_full()


def _strip_linear(f):
    """Drop degree-one monomials; the optimal span adjustment by variables."""
    return Polynomial(
        f.ring,
        f.nvars,
        {e: v for e, v in f.terms.items() if sum(e) != 1},
    )


def _combo_poly(phi, combo):
    ring, n = phi.ring, phi.nvars
    acc = Polynomial.zero(ring, n)
    for c, img in zip(combo, phi.images):
        if c != ring.zero_value():
            acc = acc + img.scale(RingElement(ring, c))
    return acc


def _span_combos(phi, budget, seed):
    """Deterministic candidate stream of coefficient vectors; singles first."""
    ring, n = phi.ring, phi.nvars
    zero, one = ring.zero_value(), ring.one_value()
    singles = []
    for i in range(n):
        vec = [zero] * n
        vec[i] = one
        singles.append(tuple(vec))
    yield from singles
    if ring.is_finite:
        values = [el.value for el in ring.elements()]
        count = 0
        for combo in itertools.product(values, repeat=n):
            if count >= budget:
                return
            count += 1
            if combo in singles or all(v == zero for v in combo):
                continue
            yield combo
    else:
        rng = random.Random(seed)
        small = list(range(-2, 3))
        for _ in range(budget):
            combo = tuple(ring.coerce_value(rng.choice(small)) for _ in range(n))
            if all(v == zero for v in combo) or combo in singles:
                continue
            yield combo


def span_good_scan(phi, k_size, budget=200000, seed=0, early_exit=True):
    """Collect good coefficients of span elements that pass the degree condition.

    Over a finite ring the c-sweep with linear parts stripped is complete:
    dropping degree-one monomials never hurts the degree condition and the
    good coefficients do not depend on them.  Over Q the degree condition
    is vacuous, so the single-image candidates already decide fullness.
    """
    ring, n = phi.ring, phi.nvars
    _guard_characteristic(ring.characteristic)
    gens = []
    witnesses = []
    examined = 0
    diagnostics = []
    exhausted_all = True
    handle = IdealHandle(ring, [])
    for combo in _span_combos(phi, budget, seed):
        examined += 1
        candidate = _strip_linear(_combo_poly(phi, combo))
        if candidate.is_zero():
            continue
        if not degree_condition(candidate, k_size):
            continue
        goods = good_monomials(candidate)
        if not goods:
            continue
        for exps, coeff, gm_type in goods:
            witnesses.append(SpanWitness(combo, candidate, exps, coeff, gm_type))
            gens.append(coeff)
        handle = IdealHandle(ring, gens)
        if early_exit and handle.is_full():
            exhausted_all = False
            break
    if ring.is_finite:
        total = ring.order**n
        exhaustive = exhausted_all and total <= budget + n
        if not exhaustive and exhausted_all:
            diagnostics.append(
                f"span scan budget {budget} below the {total} coefficient vectors"
            )
    else:
        exhaustive = False
        if exhausted_all:
            diagnostics.append(
                f"span scan sampled {examined} candidates over an infinite ring"
            )
    return SpanScan(handle, witnesses, exhaustive, examined, diagnostics)


def span_good_ideal(phi, k_size, budget=200000, seed=0):
    """Lower bound for the degree-condition obstruction ideal; exact when the
    finite coefficient sweep fits the budget."""
    return span_good_scan(phi, k_size, budget=budget, seed=seed).handle


ideal_J_phi = span_good_ideal


# ---------------------------------------------------------------------------
# exponent patterns and maps with no good monomial
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModulePattern:
    """Monomial pattern R[x^{p^d}] + sum_i sum_{u in N} R[x^{p^e}] x_i^{p^u}."""

    p: int
    d: int
    e: int
    shifts: frozenset

    def __post_init__(self):
        if not is_prime(self.p):
            raise CompositeCharacteristic(f"{self.p} is not prime")
        if not (0 <= self.d <= self.e):
            raise ValueError("need 0 <= d <= e")
        if not self.shifts:
            raise ValueError("the shift set must be nonempty")
        for u, v in itertools.product(self.shifts, repeat=2):
            if (u + v) not in self.shifts and (u + v) < self.d:
                raise ValueError(
                    f"shift set violates closure: {u}+{v} not in N and < d"
                )


def default_pattern(n, p):
    """The pattern whose complement is exactly the good monomials."""
    if n == 2 and p == 2:
        return ModulePattern(2, 1, 2, frozenset({0}))
    return ModulePattern(p, 1, 1, frozenset({0}))


def monomial_in_pattern(exps, pattern):
    p, pd, pe = pattern.p, pattern.p**pattern.d, pattern.p**pattern.e
    if all(t % pd == 0 for t in exps):
        return True
    for i, t in enumerate(exps):
        if any(e % pe for j, e in enumerate(exps) if j != i):
            continue
        for u in pattern.shifts:
            pu = p**u
            if t >= pu and (t - pu) % pe == 0:
                return True
    return False


def pattern_membership(f, pattern):
    return all(monomial_in_pattern(exps, pattern) for exps in f.terms)


def no_good_monomials(phi):
    """True when no good monomial appears in any image (affineness when p=0)."""
    p = _guard_characteristic(phi.ring.characteristic)
    if p == 0:
        return phi.is_affine()
    return all(not good_monomials(img) for img in phi.images)


ngg_membership = no_good_monomials


# ---------------------------------------------------------------------------
# reduction obstruction: pass to a quotient with no good monomials
# ---------------------------------------------------------------------------

def _reduction_moduli(ring, prime_budget=31):
    if isinstance(ring, PrimeField):
        return []
    if isinstance(ring, IntegerModRing):
        n = ring.n
        return [q for q in range(2, n) if n % q == 0 and is_prime(q)]
    if isinstance(ring, IntegerRing):
        return [q for q in range(2, prime_budget + 1) if is_prime(q)]
    return []


def reduction_search(phi):
    """A proper ideal whose quotient map has no good monomials, if one is found."""
    ring = phi.ring
    for q in _reduction_moduli(ring):
        ideal = IdealHandle(ring, [ring.of(q)])
        try:
            quotient = reduce_mod(phi, ideal)
        except Unsupported:
            continue
        if no_good_monomials(quotient):
            return {
                "modulus": q,
                "quotient_ring": quotient.ring.spec_string(),
                "quotient": quotient,
            }
    return None


# ---------------------------------------------------------------------------
# direct pattern: an image is unit * (target monomial) + affine
# ---------------------------------------------------------------------------

def direct_pattern_scan(phi):
    """Look for an image of the form unit*m + affine with m a usable target.

    Valid over any coefficient ring; this is the zero-order case of the
    difference-operator route.
    """
    ring, n = phi.ring, phi.nvars
    p = ring.characteristic
    for j, img in enumerate(phi.images, start=1):
        nonlinear = Polynomial(
            ring, n, {e: v for e, v in img.terms.items() if sum(e) > 1}
        )
        if len(nonlinear.terms) != 1:
            continue
        (exps,) = nonlinear.terms
        c = nonlinear.terms[exps]
        if not ring.is_unit(c):
            continue
        positive = [t for t in exps if t > 0]
        support = [i for i, t in enumerate(exps) if t > 0]
        if sorted(positive) == [1, 1]:
            return {
                "case": "a",
                "image": j,
                "monomial": exps,
                "coefficient": c,
            }
        if positive == [2] and ring.is_unit(ring.coerce_value(2)):
            return {
                "case": "b",
                "image": j,
                "monomial": exps,
                "coefficient": c,
            }
        if n == 2 and p == 2:
            if sorted(positive) == [1, 2]:
                return {
                    "case": "c",
                    "image": j,
                    "monomial": exps,
                    "coefficient": c,
                }
            if positive == [3]:
                try:
                    find_special_unit(ring)
                except NoSuchUnit:
                    continue
                return {
                    "case": "d",
                    "image": j,
                    "monomial": exps,
                    "coefficient": c,
                }
    return None


# ---------------------------------------------------------------------------
# top-level decision
# ---------------------------------------------------------------------------

@dataclass
class Verdict:
    answer: str  # "StablyCotame" | "NotStablyCotame" | "Unknown"
    route: str | None = None
    reason: str | None = None
    certificate: dict | None = None
    diagnostics: list = field(default_factory=list)

    def to_json(self):
        cert = None
        if self.certificate is not None:
            cert = {}
            for key, value in self.certificate.items():
                if isinstance(value, (str, int, bool, list, type(None))):
                    cert[key] = value
                elif isinstance(value, tuple):
                    cert[key] = list(value)
                else:
                    cert[key] = str(value)
        return {
            "answer": self.answer,
            "route": self.route,
            "reason": self.reason,
            "certificate": cert,
            "diagnostics": list(self.diagnostics),
        }


def resolve_k_size(ring, k_size="auto"):
    if k_size != "auto":
        return k_size
    if isinstance(ring, RationalField):
        return None
    if ring.is_field and ring.is_finite:
        return ring.order
    return "unavailable"


def decide(phi, k_size="auto", budget=200000, seed=0, delta_limit=128):
    """Decide stable co-tameness where the implemented criteria apply.

    Negative routes: no good monomials at all, a proper obstruction ideal,
    or a quotient with no good monomials.  Positive routes: a direct
    unit-monomial image, a full degree-condition span ideal over a base
    field, or the difference-operator route.  Anything else is Unknown.
    """
    ring, n = phi.ring, phi.nvars
    if n < 2:
        raise ValueError("stably co-tame analysis needs n >= 2")
    p = ring.characteristic
    composite = p != 0 and not is_prime(p)
    diagnostics = []
    if not composite:
        if no_good_monomials(phi):
            return Verdict(
                "NotStablyCotame",
                reason="ngg-membership",
                certificate={
                    "kind": "ngg",
                    "pattern": "affine" if p == 0 else repr(default_pattern(n, p)),
                },
                diagnostics=diagnostics,
            )
        ideal = good_ideal(phi)
        if not ideal.is_full():
            return Verdict(
                "NotStablyCotame",
                reason="I-phi-proper",
                certificate={"kind": "ideal", "generators": repr(ideal)},
                diagnostics=diagnostics,
            )
    else:
        diagnostics.append(
            f"characteristic {p} is composite; good-monomial criteria skipped"
        )
    reduction = reduction_search(phi)
    if reduction is not None:
        return Verdict(
            "NotStablyCotame",
            reason="reduction-to-ngg",
            certificate={
                "kind": "reduction",
                "modulus": reduction["modulus"],
                "quotient_ring": reduction["quotient_ring"],
            },
            diagnostics=diagnostics,
        )
    direct = direct_pattern_scan(phi)
    if direct is not None:
        return Verdict(
            "StablyCotame",
            route=f"M-phi-case-{direct['case']}",
            certificate={
                "kind": "direct",
                "image": direct["image"],
                "monomial": list(direct["monomial"]),
                "coefficient": ring.format_value(direct["coefficient"]),
                "case": direct["case"],
            },
            diagnostics=diagnostics,
        )
    ksz = resolve_k_size(ring, k_size)
    if ksz != "unavailable":
        scan = span_good_scan(phi, ksz, budget=budget, seed=seed)
        diagnostics.extend(scan.diagnostics)
        if scan.certified_full():
            witness = scan.witnesses[-1]
            cert = {"kind": "span-good-monomial"}
            cert.update(witness.describe())
            route = "J-full"
            if ksz is None:
                diagnostics.append(
                    "infinite base field: the degree condition is vacuous and the"
                    " obstruction ideal alone decides"
                )
            return Verdict(
                "StablyCotame",
                route=route,
                certificate=cert,
                diagnostics=diagnostics,
            )
        if scan.exhaustive:
            diagnostics.append(
                "span scan exhausted every coefficient vector without certifying"
            )
    else:
        diagnostics.append(
            "no base field available; degree-condition route skipped"
        )
    if not composite and p != 0 and ring.is_field:
        if p**n <= delta_limit:
            from .witness import delta_search

            found = delta_search(phi)
            if found is not None:
                dec, spec, info = found
                return Verdict(
                    "StablyCotame",
                    route="delta-route",
                    certificate={
                        "kind": "delta",
                        "image": info["image"],
                        "l": list(spec.l),
                        "monomial": list(info["monomial"]),
                        "target": str(dec.target),
                    },
                    diagnostics=diagnostics,
                )
            diagnostics.append("difference-operator search exhausted")
        else:
            diagnostics.append(
                f"difference-operator search skipped: {p}^{n} exceeds {delta_limit}"
            )
    return Verdict("Unknown", diagnostics=diagnostics)
