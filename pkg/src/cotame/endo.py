"""Endomorphisms of R[x_1..x_n] as substitution tuples.

A tuple (f_1, ..., f_n) acts by x_i -> f_i.  Composition follows the
convention (phi o psi)(x_i) = psi(x_i) evaluated at phi's images, i.e.
apply psi's substitution first, then phi's.  Invertibility is never
inferred from a bare tuple: it is carried by construction (affine,
elementary, triangular, or word with invertible letters).
"""

from __future__ import annotations

import math

from .errors import NotAUnit, Unsupported
from .poly import Polynomial
from .rings import (
    IntegerModRing,
    IntegerRing,
    RationalField,
    RingElement,
)


class Endomorphism:
    __slots__ = ("ring", "nvars", "images")

    def __init__(self, ring, images):
        if not images:
            raise ValueError("an endomorphism needs at least one image")
        n = len(images)
        for img in images:
            if img.ring != ring or img.nvars != n:
                raise ValueError("images must live in the same R[x_1..x_n]")
        self.ring = ring
        self.nvars = n
        self.images = list(images)

    def apply(self, f):
        """The substitution action on a polynomial."""
        return f.substitute(self.images)

    def is_affine(self):
        return all(img.is_affine() for img in self.images)

    def is_identity(self):
        return all(
            img == Polynomial.variable(self.ring, self.nvars, i + 1)
            for i, img in enumerate(self.images)
        )

    def __eq__(self, other):
        return (
            isinstance(other, Endomorphism)
            and self.ring == other.ring
            and self.nvars == other.nvars
            and self.images == other.images
        )

    def __hash__(self):
        return hash((self.ring, self.nvars, tuple(self.images)))

    def __repr__(self):
        inner = ", ".join(str(img) for img in self.images)
        return f"({inner})"

    def to_json(self):
        return {
            "ring": self.ring.spec_string(),
            "n": self.nvars,
            "images": [str(img) for img in self.images],
        }

    @classmethod
    def from_json(cls, data, ring=None):
        from .poly import parse_poly
        from .rings import ring_from_spec

        if ring is None:
            ring = ring_from_spec(data["ring"])
        n = data["n"]
        images = [parse_poly(text, ring, n) for text in data["images"]]
        return cls(ring, images)


def identity(ring, n):
    return Endomorphism(ring, [Polynomial.variable(ring, n, i + 1) for i in range(n)])


def compose(phi, psi):
    """phi o psi: substitute psi first, then phi."""
    if phi.ring != psi.ring or phi.nvars != psi.nvars:
        raise ValueError("cannot compose maps over different rings or arities")
    return Endomorphism(phi.ring, [phi.apply(g) for g in psi.images])


def compose_all(maps):
    if not maps:
        raise ValueError("empty composition")
    acc = maps[0]
    for m in maps[1:]:
        acc = compose(acc, m)
    return acc


def extend(phi, r):
    """View a map in n variables inside n+r variables, fixing the new ones."""
    if r < 0:
        raise ValueError("r must be >= 0")
    if r == 0:
        return phi
    n, m = phi.nvars, phi.nvars + r
    images = [img.embed(m) for img in phi.images]
    images += [Polynomial.variable(phi.ring, m, i + 1) for i in range(n, m)]
    return Endomorphism(phi.ring, images)


def elementary(f, nvars=None):
    """The map adding f(x_2..x_n) to x_1 and fixing every other variable."""
    n = f.nvars if nvars is None else nvars
    if f.nvars != n:
        f = f.embed(n)
    if not f.is_zero() and f.deg_xi(1) > 0:
        raise ValueError("the added polynomial must not involve x1")
    images = [Polynomial.variable(f.ring, n, 1) + f]
    images += [Polynomial.variable(f.ring, n, i) for i in range(2, n + 1)]
    return Endomorphism(f.ring, images)


def elementary_last(f, ambient=None):
    """The map adding f(x_1..x_n) to the extra last variable x_{n+1}."""
    if ambient is None:
        ambient = f.nvars + 1
    if f.nvars == ambient:
        if not (f.is_zero() or f.deg_xi(ambient) == 0):
            raise ValueError("the added polynomial must not involve the last variable")
        g = f
    elif f.nvars == ambient - 1:
        g = f.embed(ambient)
    else:
        raise ValueError("ambient must be f.nvars or f.nvars + 1")
    images = [Polynomial.variable(g.ring, ambient, i) for i in range(1, ambient)]
    images.append(Polynomial.variable(g.ring, ambient, ambient) + g)
    return Endomorphism(g.ring, images)


def permutation(ring, perm):
    """The tuple (x_{perm[0]}, ..., x_{perm[n-1]}) with 1-based entries."""
    n = len(perm)
    if sorted(perm) != list(range(1, n + 1)):
        raise ValueError(f"{perm} is not a permutation of 1..{n}")
    return Endomorphism(
        ring, [Polynomial.variable(ring, n, perm[i]) for i in range(n)]
    )


def transposition_perm(n, a, b):
    perm = list(range(1, n + 1))
    perm[a - 1], perm[b - 1] = perm[b - 1], perm[a - 1]
    return perm


def conjugate(phi, sigma, sigma_inverse=None):
    """sigma^{-1} o phi o sigma for an invertible sigma."""
    if isinstance(sigma, AffineMap):
        sigma_inverse = sigma.inverse().to_endo()
        sigma = sigma.to_endo()
    elif sigma_inverse is None:
        sigma_inverse = invert_structured(sigma)
    return compose(sigma_inverse, compose(phi, sigma))


# ---------------------------------------------------------------------------
# affine maps
# ---------------------------------------------------------------------------

def _mat_minor(rows, i, j):
    return [
        [v for c, v in enumerate(row) if c != j]
        for r, row in enumerate(rows)
        if r != i
    ]


def _mat_det(ring, rows):
    n = len(rows)
    if n == 1:
        return rows[0][0]
    zero = ring.zero_value()
    acc = zero
    sign = 1
    for j in range(n):
        a = rows[0][j]
        if a == zero:
            sign = -sign
            continue
        sub = _mat_det(ring, _mat_minor(rows, 0, j))
        term = ring.mul(a, sub)
        acc = ring.add(acc, term if sign > 0 else ring.neg(term))
        sign = -sign
    return acc


def _mat_mul(ring, a, b):
    n, m, k = len(a), len(b[0]), len(b)
    zero = ring.zero_value()
    out = [[zero] * m for _ in range(n)]
    for i in range(n):
        for j in range(m):
            s = zero
            for t in range(k):
                s = ring.add(s, ring.mul(a[i][t], b[t][j]))
            out[i][j] = s
    return out


def _vec_mat(ring, v, a):
    return _mat_mul(ring, [v], a)[0]


class AffineMap:
    """x -> xA + b with A invertible over R; the inverse is kept alongside.

    Entries are raw ring values.  A[i][j] is the coefficient of x_{i+1} in
    the image of x_{j+1}.
    """

    __slots__ = ("ring", "n", "A", "b", "_inv", "_img")

    def __init__(self, ring, A, b, _inv=None):
        n = len(A)
        if any(len(row) != n for row in A) or len(b) != n:
            raise ValueError("matrix/translation shape mismatch")
        self.ring = ring
        self.n = n
        self.A = [[ring.coerce_value(v) for v in row] for row in A]
        self.b = [ring.coerce_value(v) for v in b]
        self._img = None
        if _inv is not None:
            self._inv = _inv
        else:
            self._inv = self._compute_inverse()

    def _compute_inverse(self):
        ring, n = self.ring, self.n
        det = _mat_det(ring, self.A)
        try:
            det_inv = ring.inv(det)
        except NotAUnit:
            raise NotAUnit(
                f"matrix determinant {ring.format_value(det)} is not a unit"
            ) from None
        adj = [[None] * n for _ in range(n)]
        for i in range(n):
            for j in range(n):
                if n == 1:
                    cof = ring.one_value()
                else:
                    cof = _mat_det(ring, _mat_minor(self.A, j, i))
                    if (i + j) % 2:
                        cof = ring.neg(cof)
                adj[i][j] = ring.mul(det_inv, cof)
        neg_b = [ring.neg(v) for v in self.b]
        return (adj, _vec_mat(ring, neg_b, adj))

    def inverse(self):
        A_inv, b_inv = self._inv
        return AffineMap(self.ring, A_inv, b_inv, _inv=(self.A, self.b))

    def image_polys(self):
        if self._img is not None:
            return self._img
        ring, n = self.ring, self.n
        zero = ring.zero_value()
        out = []
        for j in range(n):
            terms = {}
            for i in range(n):
                if self.A[i][j] != zero:
                    exps = tuple(1 if t == i else 0 for t in range(n))
                    terms[exps] = self.A[i][j]
            if self.b[j] != zero:
                terms[(0,) * n] = self.b[j]
            out.append(Polynomial(ring, n, terms))
        self._img = out
        return out

    def embed(self, ambient):
        """Block-extend to more variables, fixing the new ones."""
        if ambient < self.n:
            raise ValueError("cannot shrink an affine map")
        if ambient == self.n:
            return self
        ring = self.ring
        one, zero = ring.one_value(), ring.zero_value()
        A = [[zero] * ambient for _ in range(ambient)]
        b = [zero] * ambient
        for i in range(self.n):
            for j in range(self.n):
                A[i][j] = self.A[i][j]
            b[i] = self.b[i]
        for i in range(self.n, ambient):
            A[i][i] = one
        return AffineMap(ring, A, b)

    def to_endo(self):
        return Endomorphism(self.ring, self.image_polys())

    def apply(self, f):
        return f.substitute(self.image_polys())

    def compose(self, other):
        """self o other (apply other's substitution first)."""
        ring = self.ring
        A = _mat_mul(ring, self.A, other.A)
        b = [
            ring.add(v, w)
            for v, w in zip(_vec_mat(ring, self.b, other.A), other.b)
        ]
        return AffineMap(ring, A, b)

    def __eq__(self, other):
        return (
            isinstance(other, AffineMap)
            and self.ring == other.ring
            and self.A == other.A
            and self.b == other.b
        )

    def __hash__(self):
        return hash(
            (
                self.ring,
                tuple(tuple(row) for row in self.A),
                tuple(self.b),
            )
        )

    def __repr__(self):
        return f"AffineMap({self.to_endo()!r})"

    # -- constructors -----------------------------------------------------
    @classmethod
    def identity(cls, ring, n):
        one, zero = ring.one_value(), ring.zero_value()
        A = [[one if i == j else zero for j in range(n)] for i in range(n)]
        return cls(ring, A, [zero] * n)

    @classmethod
    def permutation(cls, ring, perm):
        n = len(perm)
        if sorted(perm) != list(range(1, n + 1)):
            raise ValueError(f"{perm} is not a permutation of 1..{n}")
        one, zero = ring.one_value(), ring.zero_value()
        A = [[zero] * n for _ in range(n)]
        for j in range(n):
            A[perm[j] - 1][j] = one
        return cls(ring, A, [zero] * n)

    @classmethod
    def transposition(cls, ring, n, a, b):
        return cls.permutation(ring, transposition_perm(n, a, b))

    @classmethod
    def diagonal(cls, ring, scalars):
        n = len(scalars)
        zero = ring.zero_value()
        A = [[zero] * n for _ in range(n)]
        for i, s in enumerate(scalars):
            A[i][i] = ring.coerce_value(s)
        return cls(ring, A, [zero] * n)

    @classmethod
    def translation(cls, ring, vector):
        n = len(vector)
        m = cls.identity(ring, n)
        return cls(ring, m.A, [ring.coerce_value(v) for v in vector])

    @classmethod
    def from_affine_endo(cls, phi):
        """Extract (A, b) from an affine endomorphism; checks invertibility."""
        ring, n = phi.ring, phi.nvars
        zero = ring.zero_value()
        A = [[zero] * n for _ in range(n)]
        b = [zero] * n
        for j, img in enumerate(phi.images):
            if not img.is_affine():
                raise ValueError("map is not affine")
            for exps, v in img.terms.items():
                total = sum(exps)
                if total == 0:
                    b[j] = v
                else:
                    i = exps.index(1)
                    A[i][j] = v
        return cls(ring, A, b)

    @classmethod
    def variable_shift(cls, h, ambient, index):
        """The affine map adding the affine polynomial h to x_index (1-based).

        h must avoid x_index, which keeps the map unipotent.
        """
        ring = h.ring
        if not h.is_affine():
            raise ValueError("shift polynomial must be affine")
        g = h.embed(ambient) if h.nvars < ambient else h
        m = cls.identity(ring, ambient)
        A = [row[:] for row in m.A]
        b = list(m.b)
        for exps, v in g.terms.items():
            if sum(exps) == 0:
                b[index - 1] = v
            else:
                i = exps.index(1)
                if i == index - 1:
                    raise ValueError("shift polynomial must avoid the shifted variable")
                A[i][index - 1] = v
        return cls(ring, A, b)

    @classmethod
    def last_variable_shift(cls, h, ambient):
        """The affine map adding the affine polynomial h(x_1..x_n) to x_ambient."""
        return cls.variable_shift(h, ambient, ambient)

    def to_json(self):
        fmt = self.ring.format_value
        return {
            "A": [[fmt(v) for v in row] for row in self.A],
            "b": [fmt(v) for v in self.b],
        }

    @classmethod
    def from_json(cls, ring, data):
        def val(x):
            if isinstance(x, str):
                return ring.parse_literal(x).value
            return ring.coerce_value(x)

        A = [[val(v) for v in row] for row in data["A"]]
        b = [val(v) for v in data["b"]]
        return cls(ring, A, b)


def from_affine(ring, A, b):
    """Affine endomorphism from matrix data; raises if A is not invertible."""
    return AffineMap(ring, A, b).to_endo()


def is_affine(phi):
    return phi.is_affine()


def invert_affine(ring, A, b):
    return AffineMap(ring, A, b).inverse()


# ---------------------------------------------------------------------------
# structured inversion
# ---------------------------------------------------------------------------

def _triangular_inverse(phi):
    ring, n = phi.ring, phi.nvars
    one_exps = [
        tuple(1 if j == i else 0 for j in range(n)) for i in range(n)
    ]
    later = set()
    order = []
    remaining = set(range(1, n + 1))
    while remaining:
        progressed = False
        for i in sorted(remaining):
            img = phi.images[i - 1]
            c = img.terms.get(one_exps[i - 1])
            if c is None or not ring.is_unit(c):
                continue
            ok = True
            for exps in img.terms:
                if exps[i - 1] > 0 and exps != one_exps[i - 1]:
                    ok = False
                    break
                support = {j + 1 for j, e in enumerate(exps) if e > 0}
                if not support <= later | {i}:
                    ok = False
                    break
            if not ok:
                continue
            g = img - Polynomial.monomial(ring, one_exps[i - 1], RingElement(ring, c))
            order.append((i, c, g))
            later.add(i)
            remaining.remove(i)
            progressed = True
        if not progressed:
            raise ValueError("map is not triangular in any variable order")
    inv_images = [Polynomial.variable(ring, n, i + 1) for i in range(n)]
    for i, c, g in order:
        g_sub = g.substitute(inv_images)
        xi = Polynomial.variable(ring, n, i)
        inv_images[i - 1] = (xi - g_sub).scale(RingElement(ring, ring.inv(c)))
    return Endomorphism(ring, inv_images)


def invert_structured(phi, hint=None):
    """Exact inverse of an affine / elementary / triangular map.

    The result is verified by composing with phi in both orders; anything
    that fails the check raises instead of returning a wrong inverse.
    """
    if hint == "affine" or (hint is None and phi.is_affine()):
        inverse = AffineMap.from_affine_endo(phi).inverse().to_endo()
    elif hint in (None, "triangular", "elementary"):
        inverse = _triangular_inverse(phi)
    else:
        raise ValueError(f"unknown inversion hint {hint!r}")
    ident = identity(phi.ring, phi.nvars)
    if compose(phi, inverse) != ident or compose(inverse, phi) != ident:
        raise ValueError("computed inverse failed the composition check")
    return inverse


def try_invert(phi):
    try:
        return invert_structured(phi)
    except (ValueError, NotAUnit):
        return None


# ---------------------------------------------------------------------------
# generator words
# ---------------------------------------------------------------------------

class AffineLetter:
    __slots__ = ("map",)

    def __init__(self, affine_map):
        self.map = affine_map

    def __eq__(self, other):
        return isinstance(other, AffineLetter) and self.map == other.map

    def __repr__(self):
        return f"Aff{self.map.to_endo()!r}"


class PhiLetter:
    __slots__ = ("exp",)

    def __init__(self, exp):
        if exp not in (1, -1):
            raise ValueError("phi letter exponent must be +1 or -1")
        self.exp = exp

    def __eq__(self, other):
        return isinstance(other, PhiLetter) and self.exp == other.exp

    def __repr__(self):
        return "phi" if self.exp == 1 else "phi^-1"


class GeneratorWord:
    """A product of affine letters and phi^{+-1} in the ambient variable count.

    Evaluation is left-to-right composition: the word [l1, l2, l3] denotes
    l1 o l2 o l3.
    """

    __slots__ = ("ambient", "letters")

    def __init__(self, ambient, letters=()):
        self.ambient = ambient
        self.letters = list(letters)

    def __len__(self):
        return len(self.letters)

    def __add__(self, other):
        if self.ambient != other.ambient:
            raise ValueError("ambient mismatch in word concatenation")
        return GeneratorWord(self.ambient, self.letters + other.letters)

    def inverse(self):
        out = []
        for letter in reversed(self.letters):
            if isinstance(letter, AffineLetter):
                out.append(AffineLetter(letter.map.inverse()))
            else:
                out.append(PhiLetter(-letter.exp))
        return GeneratorWord(self.ambient, out)

    def evaluate(self, phi, phi_inverse=None):
        """Exact left-to-right composition product of the letters.

        Associativity allows any parenthesization; matched phi/phi^-1
        pairs are collapsed innermost-first, which keeps every
        substitution into the (possibly high-degree) images of phi small
        without trusting anything about where the word came from.
        """
        ring = phi.ring
        if phi.nvars == self.ambient - 1:
            phi_ext = extend(phi, 1)
            inv_ext = extend(phi_inverse, 1) if phi_inverse is not None else None
        elif phi.nvars == self.ambient:
            phi_ext = phi
            inv_ext = phi_inverse
        else:
            raise ValueError(
                f"word has ambient {self.ambient}, phi has {phi.nvars} variables"
            )
        if inv_ext is None and any(
            isinstance(l, PhiLetter) and l.exp == -1 for l in self.letters
        ):
            base = try_invert(phi)
            if base is None:
                raise Unsupported(
                    "word uses phi^-1; supply the inverse tuple explicitly"
                )
            inv_ext = extend(base, self.ambient - base.nvars)
        ident = identity(ring, self.ambient)
        # stack items: ("open", None) for a pending phi, ("val", endo) otherwise
        stack = []

        def fold_value(value):
            if stack and stack[-1][0] == "val":
                stack[-1] = ("val", compose(stack[-1][1], value))
            else:
                stack.append(("val", value))

        for letter in self.letters:
            if isinstance(letter, AffineLetter):
                fold_value(letter.map.to_endo())
            elif letter.exp == 1:
                stack.append(("open", None))
            else:
                opened = any(kind == "open" for kind, _ in stack)
                if not opened:
                    fold_value(inv_ext)
                    continue
                inner = ident
                if stack[-1][0] == "val":
                    inner = stack.pop()[1]
                stack.pop()  # the matching open marker
                fold_value(compose(compose(phi_ext, inner), inv_ext))
        acc = ident
        for kind, value in stack:
            acc = compose(acc, phi_ext if kind == "open" else value)
        return acc

    def to_json(self):
        letters = []
        for letter in self.letters:
            if isinstance(letter, AffineLetter):
                entry = {"kind": "affine"}
                entry.update(letter.map.to_json())
                letters.append(entry)
            else:
                letters.append({"kind": "phi", "exp": letter.exp})
        return {"ambient": self.ambient, "letters": letters}

    @classmethod
    def from_json(cls, ring, data):
        letters = []
        for entry in data["letters"]:
            if entry["kind"] == "affine":
                letters.append(AffineLetter(AffineMap.from_json(ring, entry)))
            elif entry["kind"] == "phi":
                letters.append(PhiLetter(entry["exp"]))
            else:
                raise ValueError(f"unknown letter kind {entry['kind']!r}")
        return cls(data["ambient"], letters)


def word_eval(word, phi, phi_inverse=None):
    return word.evaluate(phi, phi_inverse)


def word_inverse(word):
    return word.inverse()


def conjugate_word(word, sigma):
    """The word for sigma^{-1} o w o sigma, sigma an affine map."""
    pre = GeneratorWord(word.ambient, [AffineLetter(sigma.inverse())])
    post = GeneratorWord(word.ambient, [AffineLetter(sigma)])
    return pre + word + post


# ---------------------------------------------------------------------------
# finitely generated ideals of R
# ---------------------------------------------------------------------------

class IdealHandle:
    """A finitely generated ideal of the coefficient ring."""

    __slots__ = ("ring", "generators")

    def __init__(self, ring, generators):
        zero = ring.zero_value()
        seen = []
        for g in generators:
            v = ring.coerce_value(g)
            if v != zero and v not in seen:
                seen.append(v)
        seen.sort(key=ring.sort_key)
        self.ring = ring
        self.generators = [RingElement(ring, v) for v in seen]

    def is_zero(self):
        return not self.generators

    def is_full(self):
        ring = self.ring
        if ring.is_field:
            return bool(self.generators)
        if isinstance(ring, IntegerRing):
            g = 0
            for gen in self.generators:
                g = math.gcd(g, abs(gen.value))
            return g == 1
        if isinstance(ring, IntegerModRing):
            g = ring.n
            for gen in self.generators:
                g = math.gcd(g, gen.value)
            return g == 1
        raise Unsupported(
            f"ideal fullness is not decidable over {ring.spec_string()}"
        )

    def to_json(self):
        return {
            "ring": self.ring.spec_string(),
            "generators": [self.ring.format_value(g.value) for g in self.generators],
        }

    def __repr__(self):
        if not self.generators:
            return "(0)"
        return "(" + ", ".join(repr(g) for g in self.generators) + ")"


def reduce_mod(phi, ideal):
    """The induced map over R/I, for quotients inside the supported tower."""
    ring = phi.ring
    if ideal.ring != ring:
        raise ValueError("ideal lives over a different ring")
    if isinstance(ring, IntegerRing):
        m = 0
        for g in ideal.generators:
            m = math.gcd(m, abs(g.value))
        if m == 0:
            return phi
        if m == 1:
            raise Unsupported("quotient by the full ideal is the zero ring")
        target = IntegerModRing(m)
        conv = lambda v: v % m
    elif isinstance(ring, IntegerModRing):
        m = ring.n
        for g in ideal.generators:
            m = math.gcd(m, g.value)
        if m == ring.n:
            return phi
        if m == 1:
            raise Unsupported("quotient by the full ideal is the zero ring")
        target = IntegerModRing(m)
        conv = lambda v: v % m
    elif ring.is_field or isinstance(ring, RationalField):
        if ideal.is_zero():
            return phi
        raise Unsupported("a field has no proper nonzero ideals")
    else:
        raise Unsupported(f"no quotient support for {ring.spec_string()}")
    images = []
    for img in phi.images:
        images.append(
            Polynomial(
                target, phi.nvars, {e: conv(v) for e, v in img.terms.items()}
            )
        )
    return Endomorphism(target, images)
