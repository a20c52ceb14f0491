"""Exact arithmetic in small cyclic field extensions with a chosen semilinear action.

The tower handled here is generated by a single element ``v`` with ``v**d = c``
for ``d`` in {1, 2, 4}.  For ``d = 4`` the base field must contain a primitive
fourth root of unity ``zeta``; the cyclic group of order ``d`` acts by
``v -> zeta * v``.  Intermediate levels are the fixed fields of subgroups:
level 1 is the base field, level 2 is generated by ``u = v**2``, level 4 is the
whole extension.  All arithmetic is exact (prime fields use canonical integer
residues, the rationals use ``fractions.Fraction``).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, NamedTuple


class GaloisError(Exception):
    """Base class for errors raised by this module."""


class IrreducibilityFailure(GaloisError):
    """The requested defining constant does not give a field extension."""


class NoFourthRoot(GaloisError):
    """The base field has no primitive fourth root of unity."""


class CharacteristicClash(GaloisError):
    """The characteristic divides a denominator the construction needs."""


class LevelMismatch(GaloisError):
    """An element or automorphism was used outside its declared subfield."""


class DivisionByZero(GaloisError):
    """Exact division by the zero element."""


class LatticeViolation(GaloisError):
    """A level or coordinate pattern falls outside the supported lattice."""


_VALID_DEGREES = (1, 2, 4)


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


class BaseField:
    """A coefficient field: either a prime field F_p (odd p >= 3) or Q.

    Scalars are plain Python values: canonical residues ``0..p-1`` for prime
    fields, ``fractions.Fraction`` for the rationals.
    """

    def __init__(self, kind: str, p: int | None = None):
        if kind == "prime":
            if p is None or not _is_prime(p) or p < 3:
                raise LatticeViolation(
                    "prime base fields require an odd prime p >= 3, got %r" % (p,)
                )
        elif kind != "rational":
            raise LatticeViolation("unknown base-field kind %r" % (kind,))
        self.kind = kind
        self.p = p

    # -- constructors -------------------------------------------------------

    @classmethod
    def prime(cls, p: int) -> "BaseField":
        return cls("prime", p)

    @classmethod
    def rationals(cls) -> "BaseField":
        return cls("rational")

    @classmethod
    def from_name(cls, name: str) -> "BaseField":
        """Parse a field name: ``"F5"`` style for primes, ``"Q"`` for rationals."""
        name = name.strip()
        if name == "Q":
            return cls.rationals()
        if name.startswith("F") and name[1:].isdigit():
            return cls.prime(int(name[1:]))
        raise LatticeViolation("unrecognized base field name %r" % (name,))

    # -- basic data ---------------------------------------------------------

    @property
    def name(self) -> str:
        return "Q" if self.kind == "rational" else "F%d" % self.p

    @property
    def characteristic(self) -> int:
        return 0 if self.kind == "rational" else self.p

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BaseField)
            and self.kind == other.kind
            and self.p == other.p
        )

    def __hash__(self):
        return hash((self.kind, self.p))

    def __repr__(self):
        return "BaseField(%s)" % self.name

    # -- scalar arithmetic --------------------------------------------------

    def from_int(self, n: int):
        return n % self.p if self.kind == "prime" else Fraction(n)

    def zero(self):
        return self.from_int(0)

    def one(self):
        return self.from_int(1)

    def coerce(self, a):
        """Canonicalize a scalar (int or Fraction) into this field."""
        if self.kind == "prime":
            if isinstance(a, Fraction):
                if a.denominator % self.p == 0:
                    raise DivisionByZero("denominator divisible by p")
                return (a.numerator * pow(a.denominator, -1, self.p)) % self.p
            return int(a) % self.p
        return Fraction(a)

    def add(self, a, b):
        return (a + b) % self.p if self.kind == "prime" else a + b

    def sub(self, a, b):
        return (a - b) % self.p if self.kind == "prime" else a - b

    def mul(self, a, b):
        return (a * b) % self.p if self.kind == "prime" else a * b

    def neg(self, a):
        return (-a) % self.p if self.kind == "prime" else -a

    def inv(self, a):
        if a == self.zero():
            raise DivisionByZero("inverse of zero in %s" % self.name)
        if self.kind == "prime":
            return pow(a, -1, self.p)
        return Fraction(1) / a

    def is_square(self, a) -> bool:
        """Exact squareness test (0 counts as a square)."""
        if self.kind == "prime":
            a = a % self.p
            return a == 0 or pow(a, (self.p - 1) // 2, self.p) == 1
        a = Fraction(a)
        if a < 0:
            return a == 0
        num, den = a.numerator, a.denominator
        return _isqrt_exact(num) and _isqrt_exact(den)

    def parse_scalar(self, text: str):
        text = text.strip()
        if self.kind == "prime":
            return int(text) % self.p
        return Fraction(text)

    def format_scalar(self, a) -> str:
        return str(a)


def _isqrt_exact(n: int) -> bool:
    import math

    r = math.isqrt(n)
    return r * r == n


class GaloisDatum:
    """A degree-``d`` cyclic extension datum (``d`` in {1, 2, 4}).

    Attributes:
        base: the BaseField F.
        degree: d.
        c: scalar with ``v**d = c`` (None when d = 1).
        zeta: primitive fourth root of unity in F (only when d = 4).
    """

    def __init__(self, base: BaseField, degree: int, c=None, zeta=None):
        self.base = base
        self.degree = degree
        self.c = c
        self.zeta = zeta

    # -- identity -----------------------------------------------------------

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, GaloisDatum)
            and self.base == other.base
            and self.degree == other.degree
            and self.c == other.c
            and self.zeta == other.zeta
        )

    def __hash__(self):
        return hash((self.base, self.degree, self.c, self.zeta))

    def __repr__(self):
        bits = [self.base.name, "degree=%d" % self.degree]
        if self.c is not None:
            bits.append("c=%s" % (self.c,))
        if self.zeta is not None:
            bits.append("zeta=%s" % (self.zeta,))
        return "GaloisDatum(%s)" % ", ".join(bits)

    # -- levels -------------------------------------------------------------

    def levels(self) -> tuple[int, ...]:
        """Subfield levels of the tower, smallest first."""
        return tuple(m for m in _VALID_DEGREES if self.degree % m == 0)

    def zeta_scalar_power(self, k: int):
        """The scalar by which the canonical generator multiplies ``v**1``... \
raised to power k.

        Degree 4: zeta**k; degree 2: (-1)**k; degree 1: 1.
        """
        F = self.base
        if self.degree == 4:
            z = F.one()
            k %= 4
            for _ in range(k):
                z = F.mul(z, self.zeta)
            return z
        if self.degree == 2:
            return F.one() if k % 2 == 0 else F.neg(F.one())
        return F.one()

    # -- element constructors ----------------------------------------------

    def element(self, coords) -> "FieldElement":
        return FieldElement(self, coords)

    def zero(self) -> "FieldElement":
        return FieldElement(self, (self.base.zero(),) * self.degree)

    def one(self) -> "FieldElement":
        return self.from_scalar(self.base.one())

    def from_scalar(self, a) -> "FieldElement":
        coords = [self.base.zero()] * self.degree
        coords[0] = self.base.coerce(a)
        return FieldElement(self, tuple(coords))

    def v_power(self, k: int) -> "FieldElement":
        """``v**k`` with wraparound ``v**d = c`` (exponent may be any integer >= 0)."""
        q, r = divmod(k, self.degree)
        coeff = self.base.one()
        if q:
            cc = self.base.coerce(self.c) if self.c is not None else self.base.one()
            for _ in range(q):
                coeff = self.base.mul(coeff, cc)
        coords = [self.base.zero()] * self.degree
        coords[r] = coeff
        return FieldElement(self, tuple(coords))

    def u(self) -> "FieldElement":
        """The level-2 generator ``u = v**(d/2)`` (requires degree >= 2)."""
        if self.degree < 2:
            raise LatticeViolation("degree-1 datum has no level-2 generator")
        return self.v_power(self.degree // 2)

    def v(self) -> "FieldElement":
        """The level-4 generator (requires degree 4)."""
        if self.degree != 4:
            raise LatticeViolation("only degree-4 data have a level-4 generator")
        return self.v_power(1)

    def level_generator(self, m: int) -> "FieldElement":
        """The eigen-generator of the level-``m`` subfield, ``v**(d/m)``."""
        if m not in self.levels():
            raise LatticeViolation("no level %d in a degree-%d tower" % (m, self.degree))
        if m == 1:
            return self.one()
        return self.v_power(self.degree // m)

    # -- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        doc = {"base": self.base.name, "degree": self.degree}
        if self.c is not None:
            doc["c"] = self.base.format_scalar(self.c)
        if self.zeta is not None:
            doc["zeta"] = self.base.format_scalar(self.zeta)
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "GaloisDatum":
        base = BaseField.from_name(doc["base"])
        c = base.parse_scalar(doc["c"]) if "c" in doc else None
        zeta = base.parse_scalar(doc["zeta"]) if "zeta" in doc else None
        return make_datum(base, int(doc["degree"]), c=c, zeta=zeta)


def _rational_candidates():
    """Defining-constant search order over Q: -1 first, then small non-squares."""
    yield Fraction(-1)
    n = 2
    while True:
        f = Fraction(n)
        yield f
        n += 1


def make_datum(base: BaseField, degree: int, c=None, zeta=None) -> GaloisDatum:
    """Construct and validate a degree-{1,2,4} extension datum.

    Args:
        base: coefficient field.
        degree: 1, 2 or 4.
        c: optional defining constant (``v**degree = c``); when omitted, the
            smallest valid constant is chosen deterministically (prime fields
            scan 0, 1, 2, ...; the rationals scan -1, 2, 3, ...).
        zeta: optional primitive fourth root of unity (degree 4 only); when
            omitted, the smallest residue with square -1 is chosen.

    Raises:
        LatticeViolation: unsupported degree.
        NoFourthRoot: degree 4 requested over a field without i.
        IrreducibilityFailure: the given ``c`` does not define a field.
        CharacteristicClash: the characteristic divides 2 * degree.
    """
    if degree not in _VALID_DEGREES:
        raise LatticeViolation("degree must be one of %s" % (_VALID_DEGREES,))
    char = base.characteristic
    if char and (2 * degree) % char == 0:
        raise CharacteristicClash(
            "characteristic %d divides 2*degree = %d" % (char, 2 * degree)
        )

    if degree == 1:
        return GaloisDatum(base, 1, None, None)

    if degree == 4:
        if base.kind == "rational":
            raise NoFourthRoot("Q contains no primitive fourth root of unity")
        if base.p % 4 != 1:
            raise NoFourthRoot(
                "F%d contains no primitive fourth root of unity (p %% 4 != 1)"
                % base.p
            )
        if zeta is None:
            zeta = _find_fourth_root(base)
        else:
            zeta = base.coerce(zeta)
            if base.mul(zeta, zeta) != base.neg(base.one()):
                raise NoFourthRoot("supplied zeta is not a primitive fourth root")
    else:
        zeta = None

    if c is None:
        c = _search_constant(base)
    else:
        c = base.coerce(c)
        if base.is_square(c):
            raise IrreducibilityFailure(
                "c = %s is a square in %s; x**%d - c is reducible"
                % (c, base.name, degree)
            )
    return GaloisDatum(base, degree, c, zeta)


def _find_fourth_root(base: BaseField):
    minus_one = base.neg(base.one())
    for z in range(2, base.p):
        if base.mul(z, z) == minus_one:
            return z
    raise NoFourthRoot("no fourth root found in %s" % base.name)  # pragma: no cover


def _search_constant(base: BaseField):
    if base.kind == "prime":
        for c in range(base.p):
            if not base.is_square(c):
                return c
        raise IrreducibilityFailure(
            "no non-square in %s" % base.name
        )  # pragma: no cover
    for cand in _rational_candidates():
        if not base.is_square(cand):
            return cand
    raise IrreducibilityFailure("unreachable")  # pragma: no cover


class FieldElement:
    """An element of the top field of a datum, as coordinates over the base.

    ``coords[k]`` is the coefficient of ``v**k``.  Instances are immutable and

    hashable; arithmetic operators are exact.
    """

    __slots__ = ("datum", "coords")

    def __init__(self, datum: GaloisDatum, coords):
        coords = tuple(datum.base.coerce(a) for a in coords)
        if len(coords) != datum.degree:
            raise LatticeViolation(
                "expected %d coordinates, got %d" % (datum.degree, len(coords))
            )
        object.__setattr__(self, "datum", datum)
        object.__setattr__(self, "coords", coords)

    def __setattr__(self, *a):  # immutable
        raise AttributeError("FieldElement is immutable")

    # -- helpers ------------------------------------------------------------

    def _check_same(self, other: "FieldElement"):
        if self.datum != other.datum:
            raise LevelMismatch("elements belong to different data")

    def is_zero(self) -> bool:
        z = self.datum.base.zero()
        return all(a == z for a in self.coords)

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FieldElement)
            and self.datum == other.datum
            and self.coords == other.coords
        )

    def __hash__(self):
        return hash((self.datum, self.coords))

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other: "FieldElement") -> "FieldElement":
        self._check_same(other)
        F = self.datum.base
        return FieldElement(
            self.datum, tuple(F.add(a, b) for a, b in zip(self.coords, other.coords))
        )

    def __sub__(self, other: "FieldElement") -> "FieldElement":
        self._check_same(other)
        F = self.datum.base
        return FieldElement(
            self.datum, tuple(F.sub(a, b) for a, b in zip(self.coords, other.coords))
        )

    def __neg__(self) -> "FieldElement":
        F = self.datum.base
        return FieldElement(self.datum, tuple(F.neg(a) for a in self.coords))

    def scale(self, a) -> "FieldElement":
        F = self.datum.base
        a = F.coerce(a)
        return FieldElement(self.datum, tuple(F.mul(a, b) for b in self.coords))

    def __mul__(self, other: "FieldElement") -> "FieldElement":
        self._check_same(other)
        d = self.datum.degree
        F = self.datum.base
        cc = F.coerce(self.datum.c) if self.datum.c is not None else F.one()
        out = [F.zero()] * d
        for i, a in enumerate(self.coords):
            if a == F.zero():
                continue
            for j, b in enumerate(other.coords):
                if b == F.zero():
                    continue
                k = i + j
                term = F.mul(a, b)
                if k >= d:
                    k -= d
                    term = F.mul(term, cc)
                out[k] = F.add(out[k], term)
        return FieldElement(self.datum, tuple(out))

    def inv(self) -> "FieldElement":
        """Exact inverse via the product of conjugates.

        Raises:
            DivisionByZero: on the zero element.
        """
        if self.is_zero():
            raise DivisionByZero("inverse of zero field element")
        d = self.datum.degree
        if d == 1:
            return FieldElement(self.datum, (self.datum.base.inv(self.coords[0]),))
        # product of the non-trivial conjugates
        y = None
        for e in range(1, d):
            conj = apply_galois(GaloisElement(d, e), self)
            y = conj if y is None else y * conj
        norm = (self * y).coords
        F = self.datum.base
        n0 = norm[0]
        if any(a != F.zero() for a in norm[1:]):  # pragma: no cover - sanity
            raise LatticeViolation("norm computation left the base field")
        return y.scale(F.inv(n0))

    def __truediv__(self, other: "FieldElement") -> "FieldElement":
        return self * other.inv()

    # -- level bookkeeping --------------------------------------------------

    def level(self) -> int:
        """The smallest tower level whose subfield contains this element."""
        d = self.datum.degree
        z = self.datum.base.zero()
        for m in self.datum.levels():
            step = d // m
            if all(
                a == z for k, a in enumerate(self.coords) if k % step != 0
            ):
                return m
        return d  # pragma: no cover

    def in_level(self, m: int) -> bool:
        if m not in self.datum.levels():
            raise LatticeViolation("level %d outside the tower" % m)
        return m % self.level() == 0

    # -- serialization ------------------------------------------------------

    def to_json(self) -> list:
        fmt = self.datum.base.format_scalar
        return [fmt(a) for a in self.coords]

    @classmethod
    def from_json(cls, datum: GaloisDatum, doc) -> "FieldElement":
        return cls(datum, tuple(datum.base.parse_scalar(t) for t in doc))

    def __repr__(self):
        return "FieldElement(%s)" % (list(self.coords),)


def subfield_level(x: FieldElement) -> int:
    """Module-level alias for :meth:`FieldElement.level`."""
    return x.level()


class GaloisElement:
    """An automorphism ``theta_m ** exp`` of the level-``m`` subfield.

    ``theta_m`` is the canonical generator sending the level generator
    ``w = v**(d/m)`` to ``zeta_m * w`` where ``zeta_m`` is the canonical
    primitive m-th root of unity of the tower.
    """

    __slots__ = ("level", "exp")

    def __init__(self, level: int, exp: int):
        if level not in _VALID_DEGREES:
            raise LatticeViolation("level must be one of %s" % (_VALID_DEGREES,))
        object.__setattr__(self, "level", level)
        object.__setattr__(self, "exp", exp % level)

    def __setattr__(self, *a):
        raise AttributeError("GaloisElement is immutable")

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, GaloisElement)
            and self.level == other.level
            and self.exp == other.exp
        )

    def __hash__(self):
        return hash((self.level, self.exp))

    def __repr__(self):
        return "GaloisElement(level=%d, exp=%d)" % (self.level, self.exp)

    def is_identity(self) -> bool:
        return self.exp == 0

    def compose(self, other: "GaloisElement") -> "GaloisElement":
        if self.level != other.level:
            raise LevelMismatch("composing automorphisms of different levels")
        return GaloisElement(self.level, self.exp + other.exp)

    def inverse(self) -> "GaloisElement":
        return GaloisElement(self.level, -self.exp)

    def restrict(self, level: int) -> "GaloisElement":
        """Restriction to a smaller level of the tower."""
        if self.level % level != 0:
            raise LevelMismatch(
                "cannot restrict a level-%d automorphism to level %d"
                % (self.level, level)
            )
        return GaloisElement(level, self.exp % level)


def apply_galois(g: GaloisElement, x: FieldElement) -> FieldElement:
    """Apply an automorphism to a field element.

    Args:
        g: automorphism of the level-``g.level`` subfield.
        x: element that must lie in that subfield.

    Raises:
        LevelMismatch: if ``x`` lies outside the subfield ``g`` acts on, or
            ``g.level`` is not a level of ``x``'s tower.
    """
    datum = x.datum
    if g.level not in datum.levels():
        raise LevelMismatch(
            "automorphism level %d outside the degree-%d tower"
            % (g.level, datum.degree)
        )
    if not x.in_level(g.level):
        raise LevelMismatch(
            "element of level %d is outside the level-%d subfield"
            % (x.level(), g.level)
        )
    F = datum.base
    out = []
    for k, a in enumerate(x.coords):
        if a == F.zero():
            out.append(a)
        else:
            out.append(F.mul(a, datum.zeta_scalar_power(g.exp * k)))
    return FieldElement(datum, tuple(out))


class FieldOps(NamedTuple):
    add: Callable
    mul: Callable
    inv: Callable
    sub: Callable


def field_ops(datum: GaloisDatum) -> FieldOps:
    """Bundle of exact field operations on elements of ``datum``."""

    def add(x, y):
        return x + y

    def mul(x, y):
        return x * y

    def inv(x):
        return x.inv()

    def sub(x, y):
        return x - y

    return FieldOps(add=add, mul=mul, inv=inv, sub=sub)


def eigenbasis(datum: GaloisDatum, level: int, over_level: int) -> list[FieldElement]:
    """Eigenvector basis of the level-``level`` subfield over level ``over_level``.

    The basis is ``{w**k : 0 <= k < level/over_level}`` with
    ``w = v**(d/level)``; each basis vector spans a simultaneous eigenline of
    the subgroup fixing the smaller field.

    Raises:
        LatticeViolation: if the two levels do not nest inside the tower.
    """
    if level not in datum.levels() or over_level not in datum.levels():
        raise LatticeViolation("levels must divide the tower degree")
    if level % over_level != 0:
        raise LatticeViolation(
            "level %d does not contain level %d" % (level, over_level)
        )
    step = datum.degree // level
    return [datum.v_power(step * k) for k in range(level // over_level)]
