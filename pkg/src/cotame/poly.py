"""Sparse exact multivariate polynomials.

Terms live in a dict mapping exponent tuples to nonzero raw coefficient
values of the attached ring.  The variable count is fixed per polynomial;
moving to more variables is an explicit embed step.  Degrees of the zero
polynomial are the distinguished NEG_INF marker, never an integer.
"""

from __future__ import annotations

from .errors import (
    CompositeCharacteristic,
    PolynomialSyntaxError,
    Unsupported,
    ZeroPolynomial,
)
from .rings import RingElement, is_prime


class _NegInfinity:
    """Degree of the zero polynomial; compares below every integer."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __lt__(self, other):
        return not isinstance(other, _NegInfinity)

    def __le__(self, other):
        return True

    def __gt__(self, other):
        return False

    def __ge__(self, other):
        return isinstance(other, _NegInfinity)

    def __repr__(self):
        return "-inf"


NEG_INF = _NegInfinity()


def _term_order_key(exps):
    # graded lexicographic: total degree first, then the exponent tuple
    return (sum(exps), exps)


class Polynomial:
    __slots__ = ("ring", "nvars", "terms")

    def __init__(self, ring, nvars, terms=None):
        self.ring = ring
        self.nvars = nvars
        self.terms = {}
        if terms:
            zero = ring.zero_value()
            for exps, value in terms.items():
                if len(exps) != nvars:
                    raise ValueError("exponent tuple length must equal nvars")
                if value != zero:
                    self.terms[tuple(exps)] = value

    # -- constructors ------------------------------------------------------
    @classmethod
    def zero(cls, ring, nvars):
        return cls(ring, nvars)

    @classmethod
    def constant(cls, ring, nvars, c):
        v = ring.coerce_value(c)
        return cls(ring, nvars, {(0,) * nvars: v})

    @classmethod
    def variable(cls, ring, nvars, i):
        """x_i with 1-based index i."""
        if not 1 <= i <= nvars:
            raise ValueError(f"variable index {i} out of range 1..{nvars}")
        exps = tuple(1 if j == i - 1 else 0 for j in range(nvars))
        return cls(ring, nvars, {exps: ring.one_value()})

    @classmethod
    def monomial(cls, ring, exps, c=1):
        return cls(ring, len(exps), {tuple(exps): ring.coerce_value(c)})

    # -- basic queries -------------------------------------------------------
    def is_zero(self):
        return not self.terms

    def is_constant(self):
        return all(all(e == 0 for e in t) for t in self.terms)

    def is_affine(self):
        deg = self.total_deg()
        return deg is NEG_INF or deg <= 1

    def coefficient(self, exps):
        v = self.terms.get(tuple(exps))
        if v is None:
            return self.ring.zero
        return RingElement(self.ring, v)

    def constant_term(self):
        return self.coefficient((0,) * self.nvars)

    def monomials(self):
        """Exponent tuples in canonical (graded-lex descending) order."""
        return sorted(self.terms, key=_term_order_key, reverse=True)

    def _check(self, other):
        if not isinstance(other, Polynomial):
            raise ValueError("expected a Polynomial")
        if other.ring != self.ring or other.nvars != self.nvars:
            raise ValueError("ring or variable-count mismatch")

    # -- arithmetic ------------------------------------------------------------
    def __add__(self, other):
        self._check(other)
        ring = self.ring
        zero = ring.zero_value()
        out = dict(self.terms)
        for exps, v in other.terms.items():
            s = ring.add(out.get(exps, zero), v)
            if s == zero:
                out.pop(exps, None)
            else:
                out[exps] = s
        return Polynomial(ring, self.nvars, out)

    def __neg__(self):
        ring = self.ring
        return Polynomial(
            ring, self.nvars, {e: ring.neg(v) for e, v in self.terms.items()}
        )

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        self._check(other)
        ring = self.ring
        zero = ring.zero_value()
        out = {}
        for e1, v1 in self.terms.items():
            for e2, v2 in other.terms.items():
                prod = ring.mul(v1, v2)
                if prod == zero:
                    continue
                key = tuple(a + b for a, b in zip(e1, e2))
                s = ring.add(out.get(key, zero), prod)
                if s == zero:
                    out.pop(key, None)
                else:
                    out[key] = s
        return Polynomial(ring, self.nvars, out)

    def scale(self, c):
        ring = self.ring
        cv = ring.coerce_value(c)
        zero = ring.zero_value()
        if cv == zero:
            return Polynomial(ring, self.nvars)
        out = {}
        for exps, v in self.terms.items():
            prod = ring.mul(cv, v)
            if prod != zero:
                out[exps] = prod
        return Polynomial(ring, self.nvars, out)

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise ValueError("exponent must be a non-negative integer")
        acc = Polynomial.constant(self.ring, self.nvars, 1)
        base = self
        while k:
            if k & 1:
                acc = acc * base
            base = base * base if k > 1 else base
            k >>= 1
        return acc

    def __eq__(self, other):
        return (
            isinstance(other, Polynomial)
            and self.ring == other.ring
            and self.nvars == other.nvars
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.ring, self.nvars, frozenset(self.terms.items())))

    # -- substitution -------------------------------------------------------------
    def substitute(self, images):
        """f(images[0], ..., images[n-1]); the result lives where the images do."""
        if len(images) != self.nvars:
            raise ValueError(
                f"need {self.nvars} images, got {len(images)}"
            )
        ring = self.ring
        if not images:
            raise ValueError("substitution needs at least one variable")
        m = images[0].nvars
        for img in images:
            if img.ring != ring or img.nvars != m:
                raise ValueError("images must share the ring and a variable count")
        power_cache = {}

        def img_power(i, e):
            key = (i, e)
            hit = power_cache.get(key)
            if hit is None:
                hit = images[i] ** e
                power_cache[key] = hit
            return hit

        zero = ring.zero_value()
        acc = {}
        for exps, v in self.terms.items():
            piece = Polynomial.constant(ring, m, RingElement(ring, v))
            for i, e in enumerate(exps):
                if e:
                    piece = piece * img_power(i, e)
            for key, pv in piece.terms.items():
                s = ring.add(acc.get(key, zero), pv)
                if s == zero:
                    acc.pop(key, None)
                else:
                    acc[key] = s
        return Polynomial(ring, m, acc)

    def embed(self, nvars):
        """The same polynomial viewed inside a larger variable set."""
        if nvars < self.nvars:
            raise ValueError("cannot shrink the variable count")
        pad = (0,) * (nvars - self.nvars)
        return Polynomial(
            self.ring, nvars, {e + pad: v for e, v in self.terms.items()}
        )

    # -- degrees ------------------------------------------------------------------
    def deg_xi(self, i):
        if not self.terms:
            return NEG_INF
        return max(e[i - 1] for e in self.terms)

    def total_deg(self):
        if not self.terms:
            return NEG_INF
        return max(sum(e) for e in self.terms)

    def sep_deg_xi(self, i):
        """Degree in x_i after stripping the largest common p-power of exponents."""
        p = self.ring.characteristic
        if p != 0 and not is_prime(p):
            raise Unsupported(
                f"separable degree needs characteristic 0 or prime, not {p}"
            )
        if not self.terms:
            return NEG_INF
        exps = [e[i - 1] for e in self.terms if e[i - 1] > 0]
        if not exps:
            return 0
        d = max(exps)
        if p == 0:
            return d
        e = None
        for t in exps:
            v = 0
            while t % p == 0:
                t //= p
                v += 1
            e = v if e is None else min(e, v)
            if e == 0:
                break
        return d // (p**e)

    def weighted_deg(self, weights):
        if len(weights) != self.nvars:
            raise ValueError("weight vector length must equal nvars")
        if not self.terms:
            raise ZeroPolynomial("the zero polynomial has no weighted degree")
        return max(sum(w * e for w, e in zip(weights, exps)) for exps in self.terms)

    def top_w_part(self, weights):
        """Sum of the terms attaining the maximal weighted degree."""
        top = self.weighted_deg(weights)
        return Polynomial(
            self.ring,
            self.nvars,
            {
                exps: v
                for exps, v in self.terms.items()
                if sum(w * e for w, e in zip(weights, exps)) == top
            },
        )

    # -- printing -------------------------------------------------------------------
    def __str__(self):
        if not self.terms:
            return "0"
        ring = self.ring
        one = ring.one_value()
        parts = []
        for exps in self.monomials():
            v = self.terms[exps]
            vars_txt = "*".join(
                f"x{i + 1}^{e}" if e > 1 else f"x{i + 1}"
                for i, e in enumerate(exps)
                if e > 0
            )
            if not vars_txt:
                txt = ring.format_value(v)
            elif v == one:
                txt = vars_txt
            else:
                txt = f"{ring.format_value(v)}*{vars_txt}"
            parts.append(txt)
        out = parts[0]
        for txt in parts[1:]:
            if txt.startswith("-"):
                out += " - " + txt[1:]
            else:
                out += " + " + txt
        return out

    def __repr__(self):
        return f"<{self} over {self.ring.spec_string()}>"


def poly_ring_guard_prime(ring):
    p = ring.characteristic
    if p != 0 and not is_prime(p):
        raise CompositeCharacteristic(
            f"characteristic {p} is neither zero nor prime"
        )
    return p


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

class _Tokens:
    def __init__(self, text):
        self.text = text
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def error(self, message):
        raise PolynomialSyntaxError(message, self.pos)

    def take_int(self):
        self.skip_ws()
        start = self.pos
        if self.peek() == "-":
            self.pos += 1
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == start or self.text[start:self.pos] == "-":
            self.error("expected an integer")
        return int(self.text[start:self.pos])


def parse_poly(text, ring, nvars):
    """Parse the canonical grammar: variables x1..xn, operators + - * ^.

    Coefficients use the ring's literal forms (integers, a/b over Q,
    [c0,c1,...] over extension fields).  Parentheses group subexpressions.
    """
    tk = _Tokens(text)
    poly = _parse_expr(tk, ring, nvars)
    tk.skip_ws()
    if tk.pos != len(text):
        tk.error(f"unexpected trailing input {text[tk.pos:]!r}")
    return poly


def _parse_expr(tk, ring, nvars):
    ch = tk.peek()
    negate = False
    if ch == "-":
        tk.pos += 1
        negate = True
    elif ch == "+":
        tk.pos += 1
    acc = _parse_term(tk, ring, nvars)
    if negate:
        acc = -acc
    while True:
        ch = tk.peek()
        if ch == "+":
            tk.pos += 1
            acc = acc + _parse_term(tk, ring, nvars)
        elif ch == "-":
            tk.pos += 1
            acc = acc - _parse_term(tk, ring, nvars)
        else:
            return acc


def _parse_term(tk, ring, nvars):
    acc = _parse_factor(tk, ring, nvars)
    while tk.peek() == "*":
        tk.pos += 1
        acc = acc * _parse_factor(tk, ring, nvars)
    return acc


def _parse_factor(tk, ring, nvars):
    base = _parse_primary(tk, ring, nvars)
    while tk.peek() == "^":
        tk.pos += 1
        e = tk.take_int()
        if e < 0:
            tk.error("negative exponent")
        base = base**e
    return base


def _parse_primary(tk, ring, nvars):
    ch = tk.peek()
    if ch == "(":
        tk.pos += 1
        inner = _parse_expr(tk, ring, nvars)
        if tk.peek() != ")":
            tk.error("expected ')'")
        tk.pos += 1
        return inner
    if ch == "x":
        tk.pos += 1
        i = tk.take_int()
        if not 1 <= i <= nvars:
            tk.error(f"variable x{i} outside x1..x{nvars}")
        return Polynomial.variable(ring, nvars, i)
    if ch == "[":
        start = tk.pos
        depth = 0
        while tk.pos < len(tk.text):
            c = tk.text[tk.pos]
            tk.pos += 1
            if c == "[":
                depth += 1
            elif c == "]":
                depth -= 1
                if depth == 0:
                    break
        else:
            tk.error("unterminated '['")
        literal = tk.text[start:tk.pos]
        try:
            value = ring.parse_literal(literal)
        except ValueError as exc:
            raise PolynomialSyntaxError(str(exc), start) from None
        return Polynomial.constant(ring, nvars, value)
    if ch.isdigit() or ch == "-":
        start = tk.pos
        n = tk.take_int()
        if tk.peek() == "/":
            tk.pos += 1
            d = tk.take_int()
            try:
                value = ring.parse_literal(f"{n}/{d}")
            except ValueError as exc:
                raise PolynomialSyntaxError(str(exc), start) from None
            return Polynomial.constant(ring, nvars, value)
        return Polynomial.constant(ring, nvars, ring.coerce_value(n))
    tk.error(f"unexpected character {ch!r}" if ch else "unexpected end of input")
