"""Exact coefficient rings: Q, Z, Z/nZ, F_p and GF(p^e).

Every ring works on canonical raw values (Fraction, int residue, or a
coefficient tuple for extension fields) so that equality of elements,
polynomials and maps is plain structural equality.  RingElement is the
public wrapper; internal hot loops call the ring's raw methods directly.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .errors import DegreeConditionError, NotAUnit, NoSuchUnit, Unsupported


def is_prime(n):
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


class RingElement:
    """An element of a Ring, stored in canonical form."""

    __slots__ = ("ring", "value")

    def __init__(self, ring, value):
        self.ring = ring
        self.value = value

    def _check(self, other):
        if not isinstance(other, RingElement) or other.ring != self.ring:
            raise ValueError("ring mismatch in element arithmetic")

    def __add__(self, other):
        self._check(other)
        return RingElement(self.ring, self.ring.add(self.value, other.value))

    def __sub__(self, other):
        self._check(other)
        return RingElement(self.ring, self.ring.sub(self.value, other.value))

    def __mul__(self, other):
        self._check(other)
        return RingElement(self.ring, self.ring.mul(self.value, other.value))

    def __neg__(self):
        return RingElement(self.ring, self.ring.neg(self.value))

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise ValueError("exponent must be a non-negative integer")
        acc = self.ring.one_value()
        base = self.value
        while k:
            if k & 1:
                acc = self.ring.mul(acc, base)
            base = self.ring.mul(base, base)
            k >>= 1
        return RingElement(self.ring, acc)

    def inv(self):
        return RingElement(self.ring, self.ring.inv(self.value))

    def is_unit(self):
        return self.ring.is_unit(self.value)

    def is_nilpotent(self):
        return self.ring.is_nilpotent(self.value)

    def is_zero(self):
        return self.value == self.ring.zero_value()

    def __eq__(self, other):
        return (
            isinstance(other, RingElement)
            and self.ring == other.ring
            and self.value == other.value
        )

    def __hash__(self):
        return hash((self.ring, self.value))

    def __repr__(self):
        return self.ring.format_value(self.value)


class Ring:
    """Common interface; concrete rings fill in the raw-value arithmetic."""

    kind = "?"
    characteristic = 0
    is_field = False
    is_finite = False
    order = None  # number of elements when finite

    # -- raw value arithmetic -------------------------------------------
    def add(self, a, b):
        raise NotImplementedError

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        raise NotImplementedError

    def neg(self, a):
        raise NotImplementedError

    def inv(self, a):
        raise NotImplementedError

    def is_unit(self, a):
        raise NotImplementedError

    def is_nilpotent(self, a):
        raise NotImplementedError

    def zero_value(self):
        raise NotImplementedError

    def one_value(self):
        raise NotImplementedError

    def coerce_value(self, x):
        """Canonical raw value from an int, RingElement or raw value."""
        raise NotImplementedError

    # -- wrapped helpers -------------------------------------------------
    @property
    def zero(self):
        return RingElement(self, self.zero_value())

    @property
    def one(self):
        return RingElement(self, self.one_value())

    def of(self, x):
        return RingElement(self, self.coerce_value(x))

    def elements(self):
        raise Unsupported(f"{self.spec_string()} is not finite")

    def unit_values(self):
        raise Unsupported(f"cannot enumerate units of {self.spec_string()}")

    def sort_key(self, value):
        """Total order on raw values, used only for deterministic output."""
        raise NotImplementedError

    def parse_literal(self, text):
        raise NotImplementedError

    def format_value(self, value):
        raise NotImplementedError

    def spec_string(self):
        raise NotImplementedError

    def _key(self):
        raise NotImplementedError

    def __eq__(self, other):
        return isinstance(other, Ring) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return self.spec_string()


def _parse_int(text):
    text = text.strip()
    sign = 1
    if text.startswith("-"):
        sign, text = -1, text[1:]
    if not text.isdigit():
        raise ValueError(f"bad integer literal {text!r}")
    return sign * int(text)


class RationalField(Ring):
    kind = "Q"
    characteristic = 0
    is_field = True

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def inv(self, a):
        if a == 0:
            raise NotAUnit("0 is not invertible in Q")
        return 1 / a

    def is_unit(self, a):
        return a != 0

    def is_nilpotent(self, a):
        return a == 0

    def zero_value(self):
        return Fraction(0)

    def one_value(self):
        return Fraction(1)

    def coerce_value(self, x):
        if isinstance(x, RingElement):
            if x.ring != self:
                raise ValueError("cannot coerce element from a different ring")
            return x.value
        if isinstance(x, (int, Fraction)):
            return Fraction(x)
        raise ValueError(f"cannot coerce {x!r} into Q")

    def sort_key(self, value):
        return (float(value), value.numerator, value.denominator)

    def parse_literal(self, text):
        text = text.strip()
        if "/" in text:
            num, den = text.split("/", 1)
            d = _parse_int(den)
            if d == 0:
                raise ValueError("zero denominator")
            return self.of(Fraction(_parse_int(num), d))
        return self.of(_parse_int(text))

    def format_value(self, value):
        if value.denominator == 1:
            return str(value.numerator)
        return f"{value.numerator}/{value.denominator}"

    def spec_string(self):
        return "Q"

    def _key(self):
        return ("Q",)


class IntegerRing(Ring):
    kind = "Z"
    characteristic = 0

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def inv(self, a):
        if a in (1, -1):
            return a
        raise NotAUnit(f"{a} is not a unit of Z")

    def is_unit(self, a):
        return a in (1, -1)

    def is_nilpotent(self, a):
        return a == 0

    def zero_value(self):
        return 0

    def one_value(self):
        return 1

    def coerce_value(self, x):
        if isinstance(x, RingElement):
            if x.ring != self:
                raise ValueError("cannot coerce element from a different ring")
            return x.value
        if isinstance(x, int):
            return x
        raise ValueError(f"cannot coerce {x!r} into Z")

    def sort_key(self, value):
        return value

    def parse_literal(self, text):
        return self.of(_parse_int(text))

    def format_value(self, value):
        return str(value)

    def spec_string(self):
        return "Z"

    def _key(self):
        return ("Z",)


class IntegerModRing(Ring):
    """Z/nZ with residues in [0, n)."""

    kind = "Zn"
    is_finite = True

    def __init__(self, n):
        if not isinstance(n, int) or n < 2:
            raise ValueError("modulus must be an integer >= 2")
        self.n = n
        self.characteristic = n
        self.is_field = is_prime(n)
        self.order = n

    def add(self, a, b):
        return (a + b) % self.n

    def sub(self, a, b):
        return (a - b) % self.n

    def mul(self, a, b):
        return (a * b) % self.n

    def neg(self, a):
        return (-a) % self.n

    def inv(self, a):
        try:
            return pow(a, -1, self.n)
        except ValueError:
            raise NotAUnit(f"{a} is not a unit of Z/{self.n}") from None

    def is_unit(self, a):
        return math.gcd(a, self.n) == 1

    def is_nilpotent(self, a):
        # max prime exponent in n is at most bit_length(n)
        return pow(a, self.n.bit_length(), self.n) == 0

    def zero_value(self):
        return 0

    def one_value(self):
        return 1

    def coerce_value(self, x):
        if isinstance(x, RingElement):
            if x.ring != self:
                raise ValueError("cannot coerce element from a different ring")
            return x.value
        if isinstance(x, int):
            return x % self.n
        raise ValueError(f"cannot coerce {x!r} into Z/{self.n}")

    def elements(self):
        return [RingElement(self, a) for a in range(self.n)]

    def unit_values(self):
        return [a for a in range(1, self.n) if math.gcd(a, self.n) == 1]

    def sort_key(self, value):
        return value

    def parse_literal(self, text):
        return self.of(_parse_int(text))

    def format_value(self, value):
        return str(value)

    def spec_string(self):
        return f"Zn:{self.n}"

    def _key(self):
        return ("Zn", self.n)


class PrimeField(IntegerModRing):
    kind = "Fp"

    def __init__(self, p):
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
        super().__init__(p)
        self.p = p

    def spec_string(self):
        return f"Fp:{self.n}"

    def _key(self):
        return ("Fp", self.n)


# Built-in irreducible moduli over F_p, ascending coefficients (constant first),
# covering every prime power p^e <= 64 with e >= 2.
DEFAULT_MODULI = {
    (2, 2): (1, 1, 1),              # y^2 + y + 1
    (2, 3): (1, 1, 0, 1),           # y^3 + y + 1
    (2, 4): (1, 1, 0, 0, 1),        # y^4 + y + 1
    (2, 5): (1, 0, 1, 0, 0, 1),     # y^5 + y^2 + 1
    (2, 6): (1, 1, 0, 0, 0, 0, 1),  # y^6 + y + 1
    (3, 2): (1, 0, 1),              # y^2 + 1
    (3, 3): (1, 2, 0, 1),           # y^3 + 2y + 1
    (5, 2): (1, 1, 1),              # y^2 + y + 1
    (7, 2): (1, 0, 1),              # y^2 + 1
}


def _poly_trim(c):
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return c


def _poly_mul_mod_p(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            out[i + j] = (out[i + j] + ai * bj) % p
    return _poly_trim(out)


def _poly_sub_p(a, b, p):
    n = max(len(a), len(b))
    a = list(a) + [0] * (n - len(a))
    b = list(b) + [0] * (n - len(b))
    return _poly_trim([(x - y) % p for x, y in zip(a, b)])


def _poly_divmod_p(a, b, p):
    # b monic-normalized by inverting its lead
    a = list(a)
    db, da = len(b) - 1, len(a) - 1
    if db < 0:
        raise ZeroDivisionError
    lead_inv = pow(b[-1], -1, p)
    q = [0] * max(da - db + 1, 0)
    while len(_poly_trim(a)) - 1 >= db:
        a = _poly_trim(a)
        shift = len(a) - 1 - db
        coef = (a[-1] * lead_inv) % p
        q[shift] = coef
        for i, bi in enumerate(b):
            a[shift + i] = (a[shift + i] - coef * bi) % p
    return _poly_trim(q), _poly_trim(a)


def _poly_is_irreducible(mod, p):
    """Trial division by all lower-degree monic polynomials; fine at this scale."""
    mod = _poly_trim(mod)
    e = len(mod) - 1
    if e < 1 or mod[-1] % p == 0:
        return False
    if e == 1:
        return True
    for d in range(1, e // 2 + 1):
        # iterate monic divisors of degree d
        for idx in range(p**d):
            cand = []
            k = idx
            for _ in range(d):
                cand.append(k % p)
                k //= p
            cand.append(1)
            _, rem = _poly_divmod_p(mod, cand, p)
            if not rem:
                return False
    return True


class GaloisField(Ring):
    """GF(p^e) as F_p[y]/(modulus); values are fixed-length coefficient tuples."""

    kind = "GF"
    is_field = True
    is_finite = True

    def __init__(self, p, e, modulus=None):
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
        if not isinstance(e, int) or e < 1:
            raise ValueError("extension degree must be >= 1")
        if modulus is None:
            if e == 1:
                modulus = (0, 1)
            elif (p, e) in DEFAULT_MODULI:
                modulus = DEFAULT_MODULI[(p, e)]
            else:
                raise ValueError(
                    f"no built-in modulus for GF({p}^{e}); pass one explicitly"
                )
        modulus = tuple(c % p for c in modulus)
        if len(modulus) != e + 1 or modulus[-1] != 1:
            raise ValueError("modulus must be monic of degree e")
        if not _poly_is_irreducible(list(modulus), p):
            raise ValueError(f"modulus {list(modulus)} is reducible over F_{p}")
        self.p = p
        self.e = e
        self.modulus = modulus
        self.characteristic = p
        self.order = p**e

    def _pad(self, c):
        c = list(c)[: self.e]
        return tuple(c + [0] * (self.e - len(c)))

    def add(self, a, b):
        return tuple((x + y) % self.p for x, y in zip(a, b))

    def sub(self, a, b):
        return tuple((x - y) % self.p for x, y in zip(a, b))

    def neg(self, a):
        return tuple((-x) % self.p for x in a)

    def mul(self, a, b):
        prod = _poly_mul_mod_p(list(a), list(b), self.p)
        _, rem = _poly_divmod_p(prod, list(self.modulus), self.p)
        return self._pad(rem)

    def inv(self, a):
        if all(x == 0 for x in a):
            raise NotAUnit("0 is not invertible")
        # extended Euclid in F_p[y]
        r0, r1 = list(self.modulus), _poly_trim(list(a))
        t0, t1 = [], [1]
        while r1:
            q, r = _poly_divmod_p(r0, r1, self.p)
            r0, r1 = r1, r
            t0, t1 = t1, _poly_sub_p(t0, _poly_mul_mod_p(q, t1, self.p), self.p)
        # r0 is the gcd, a nonzero constant since the modulus is irreducible
        c_inv = pow(r0[0], -1, self.p)
        return self._pad([(x * c_inv) % self.p for x in t0])

    def is_unit(self, a):
        return any(x != 0 for x in a)

    def is_nilpotent(self, a):
        return all(x == 0 for x in a)

    def zero_value(self):
        return (0,) * self.e

    def one_value(self):
        return self._pad([1])

    def coerce_value(self, x):
        if isinstance(x, RingElement):
            if x.ring != self:
                raise ValueError("cannot coerce element from a different ring")
            return x.value
        if isinstance(x, int):
            return self._pad([x % self.p])
        if isinstance(x, (tuple, list)):
            if len(x) > self.e:
                raise ValueError("coefficient vector too long")
            return self._pad([int(c) % self.p for c in x])
        raise ValueError(f"cannot coerce {x!r} into GF({self.p}^{self.e})")

    def elements(self):
        return [RingElement(self, self._index_value(i)) for i in range(self.order)]

    def _index_value(self, i):
        coeffs = []
        for _ in range(self.e):
            coeffs.append(i % self.p)
            i //= self.p
        return tuple(coeffs)

    def unit_values(self):
        return [self._index_value(i) for i in range(1, self.order)]

    def sort_key(self, value):
        return sum(c * self.p**i for i, c in enumerate(value))

    def parse_literal(self, text):
        text = text.strip()
        if text.startswith("["):
            if not text.endswith("]"):
                raise ValueError(f"unterminated coefficient vector {text!r}")
            inner = text[1:-1].strip()
            coeffs = [] if not inner else [_parse_int(c) for c in inner.split(",")]
            return self.of(coeffs)
        return self.of(_parse_int(text))

    def format_value(self, value):
        if all(c == 0 for c in value[1:]):
            return str(value[0])
        return "[" + ",".join(str(c) for c in value) + "]"

    def spec_string(self):
        if (self.p, self.e) in DEFAULT_MODULI and self.modulus == DEFAULT_MODULI[
            (self.p, self.e)
        ]:
            return f"GF:{self.p}^{self.e}"
        return f"GF:{self.p}^{self.e}:[" + ",".join(str(c) for c in self.modulus) + "]"

    def _key(self):
        return ("GF", self.p, self.e, self.modulus)


def ring_from_spec(text):
    """Build a ring from its CLI spec string.

    Accepted forms: ``Q``, ``Z``, ``Zn:<n>``, ``Fp:<p>``,
    ``GF:<p>^<e>`` and ``GF:<p>^<e>:[c0,c1,...]``.
    """
    text = text.strip()
    if text == "Q":
        return RationalField()
    if text == "Z":
        return IntegerRing()
    if text.startswith("Zn:"):
        return IntegerModRing(_parse_int(text[3:]))
    if text.startswith("Fp:"):
        return PrimeField(_parse_int(text[3:]))
    if text.startswith("GF:"):
        rest = text[3:]
        parts = rest.split(":", 1)
        base = parts[0]
        if "^" not in base:
            raise ValueError(f"bad GF spec {text!r}; expected GF:p^e")
        p_str, e_str = base.split("^", 1)
        p, e = _parse_int(p_str), _parse_int(e_str)
        modulus = None
        if len(parts) == 2:
            mtxt = parts[1].strip()
            if not (mtxt.startswith("[") and mtxt.endswith("]")):
                raise ValueError(f"bad modulus in {text!r}")
            modulus = tuple(_parse_int(c) for c in mtxt[1:-1].split(","))
        return GaloisField(p, e, modulus)
    raise ValueError(f"unknown ring spec {text!r}")


make_ring = ring_from_spec


def enumerate_units(ring):
    """All units of a finite ring in a fixed deterministic order."""
    if not ring.is_finite:
        raise Unsupported(f"{ring.spec_string()} has infinitely many elements")
    return [RingElement(ring, v) for v in ring.unit_values()]


def find_special_unit(ring):
    """A unit u with u+1 also a unit; used by the cube-to-product conversion."""
    if isinstance(ring, RationalField):
        return ring.one
    if isinstance(ring, IntegerRing):
        raise NoSuchUnit("Z has no unit u with u+1 a unit")
    for v in ring.unit_values():
        if ring.is_unit(ring.add(v, ring.one_value())):
            return RingElement(ring, v)
    raise NoSuchUnit(f"{ring.spec_string()} has no unit u with u+1 a unit")


def distinct_scalars(ring, count):
    """`count` pairwise distinct units, for scaling-based interpolation."""
    if isinstance(ring, RationalField):
        return [ring.of(i) for i in range(1, count + 1)]
    if not ring.is_finite:
        raise Unsupported(f"cannot pick scalars from {ring.spec_string()}")
    units = ring.unit_values()
    if len(units) < count:
        raise DegreeConditionError(
            f"need {count} distinct units but {ring.spec_string()} has {len(units)}"
        )
    return [RingElement(ring, v) for v in units[:count]]
