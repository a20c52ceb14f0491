"""Decorated-path algebras over extension towers.

A weighted quiver assigns each vertex a subfield of a cyclic extension tower
(weight = subfield degree) and each arrow a twisted bimodule between its
endpoint fields.  The free algebra on these bimodules has an exact basis of
*decorated paths*: arrow chains carrying eigenbasis exponents in the slots
between arrows.  This module implements that normal form, the product kernel
(pushing intersection-field factors leftward through arrows via the
modulating twist), semilinear projectors, cyclic derivatives of potentials,
and ideal saturation down to finite-dimensional quotient bases for both the
derivative-ideal and the special-loop presentations.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

from .galois import (
    CharacteristicClash,
    FieldElement,
    GaloisDatum,
    GaloisElement,
    LevelMismatch,
    apply_galois,
    eigenbasis,
)
from .linalg import LinAlg


class PathAlgebraError(Exception):
    """Base class for path-algebra errors."""


class NotComposable(PathAlgebraError):
    """Arrow chain or word product with mismatched endpoints."""


class DatumMismatch(PathAlgebraError):
    """Mixed elements of algebras built over different data."""


class GradeMismatch(PathAlgebraError):
    """Operation requiring a homogeneous element got a mixed one."""


class UnknownArrow(PathAlgebraError):
    """Arrow name not present in the quiver."""


class SaturationBoundExceeded(PathAlgebraError):
    """No fully-annihilated length layer found below the configured bound."""


# --------------------------------------------------------------------- quiver


class Arrow(NamedTuple):
    name: str
    tail: str
    head: str
    special: bool = False


class WeightedQuiver:
    """Vertices with weights in {1, 2, 4} and arrows, possibly special loops.

    Special arrows must be loops; they model the quadratic-carrying loops of
    the special-loop presentations.
    """

    def __init__(self, vertices, arrows):
        self.vertex_order = []
        self.weights = {}
        for vid, w in vertices:
            vid = str(vid)
            if w not in (1, 2, 4):
                raise ValueError("vertex weight must be 1, 2 or 4: %r" % (w,))
            if vid in self.weights:
                raise ValueError("duplicate vertex id %r" % vid)
            self.vertex_order.append(vid)
            self.weights[vid] = int(w)
        self.arrow_order = []
        self.arrows = {}
        for spec in arrows:
            a = spec if isinstance(spec, Arrow) else Arrow(*spec)
            a = Arrow(str(a.name), str(a.tail), str(a.head), bool(a.special))
            if a.name in self.arrows:
                raise ValueError("duplicate arrow id %r" % a.name)
            if a.tail not in self.weights or a.head not in self.weights:
                raise ValueError("arrow %r has unknown endpoint" % (a.name,))
            if a.special and a.tail != a.head:
                raise ValueError("special arrow %r is not a loop" % (a.name,))
            self.arrow_order.append(a.name)
            self.arrows[a.name] = a

    def arrow(self, name):
        try:
            return self.arrows[name]
        except KeyError:
            raise UnknownArrow(name)

    def weight(self, vertex):
        return self.weights[str(vertex)]

    def ordinary_arrows(self):
        return [self.arrows[n] for n in self.arrow_order if not self.arrows[n].special]

    def special_loops(self):
        return [self.arrows[n] for n in self.arrow_order if self.arrows[n].special]

    def arrows_from(self, vertex):
        return [self.arrows[n] for n in self.arrow_order if self.arrows[n].tail == vertex]

    def arrows_into(self, vertex):
        return [self.arrows[n] for n in self.arrow_order if self.arrows[n].head == vertex]

    def __eq__(self, other):
        return (
            isinstance(other, WeightedQuiver)
            and self.weights == other.weights
            and self.arrows == other.arrows
        )

    def __repr__(self):
        return "WeightedQuiver(%d vertices, %d arrows)" % (
            len(self.vertex_order),
            len(self.arrow_order),
        )


class ModulatingFunction:
    """Per-arrow Galois twist, acting on the intersection field of the arrow."""

    def __init__(self, twists: Dict[str, GaloisElement]):
        self.twists = dict(twists)

    def of(self, arrow_name):
        return self.twists[arrow_name]

    def __eq__(self, other):
        return isinstance(other, ModulatingFunction) and self.twists == other.twists

    def __repr__(self):
        return "ModulatingFunction(%r)" % (self.twists,)


# ---------------------------------------------------------------------- paths


@dataclass(frozen=True)
class DecoratedPath:
    """Normal-form basis path.

    ``arrows`` are composable left-to-right with the leftmost arrow applied
    last; ``exps`` has one more entry than ``arrows``.  ``exps[0]`` is the
    full-eigenbasis exponent at the target vertex; ``exps[r]`` for r >= 1 is
    the coset-representative exponent sitting right of ``arrows[r-1]`` at
    that arrow's tail vertex.  Trivial paths have one exponent at their
    vertex.
    """

    source: str
    target: str
    arrows: Tuple[str, ...]
    exps: Tuple[int, ...]

    @property
    def length(self):
        return len(self.arrows)

    @property
    def grade(self):
        return (self.source, self.target, len(self.arrows))

    def sort_key(self):
        return (len(self.arrows), self.source, self.target, self.arrows, self.exps)

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()


Scalar = Union[int, Fraction]


class AlgebraElement:
    """Finite base-field combination of decorated paths in normal form."""

    __slots__ = ("alg", "terms")

    def __init__(self, alg, terms: Dict[DecoratedPath, Scalar]):
        self.alg = alg
        field = alg.datum.base
        clean = {}
        for path, coeff in terms.items():
            coeff = field.coerce(coeff)
            if coeff != field.zero():
                clean[path] = coeff
        self.terms = clean

    # -- structure

    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def grade(self):
        """The common (source, target, length) grade, or None if mixed."""
        grades = {p.grade for p in self.terms}
        if len(grades) == 1:
            return next(iter(grades))
        return None

    def grades(self):
        """Split into homogeneous components, keyed by grade."""
        buckets: Dict[tuple, Dict[DecoratedPath, Scalar]] = {}
        for p, c in self.terms.items():
            buckets.setdefault(p.grade, {})[p] = c
        return {g: AlgebraElement(self.alg, t) for g, t in buckets.items()}

    def coefficient(self, path):
        return self.terms.get(path, self.alg.datum.base.zero())

    def support(self):
        return sorted(self.terms)

    # -- arithmetic

    def _check(self, other):
        if not isinstance(other, AlgebraElement):
            raise TypeError("expected AlgebraElement")
        if self.alg is not other.alg and self.alg != other.alg:
            raise DatumMismatch("elements of different algebras")

    def __add__(self, other):
        self._check(other)
        field = self.alg.datum.base
        out = dict(self.terms)
        for p, c in other.terms.items():
            out[p] = field.add(out.get(p, field.zero()), c)
        return AlgebraElement(self.alg, out)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        field = self.alg.datum.base
        return AlgebraElement(self.alg, {p: field.neg(c) for p, c in self.terms.items()})

    def scale(self, scalar):
        field = self.alg.datum.base
        scalar = field.coerce(scalar)
        return AlgebraElement(
            self.alg, {p: field.mul(scalar, c) for p, c in self.terms.items()}
        )

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            return multiply(self, other)
        return self.scale(other)

    def __rmul__(self, scalar):
        return self.scale(scalar)

    def __eq__(self, other):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        self._check(other)
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __repr__(self):
        return "<%s>" % self.alg.format_element(self)


# ------------------------------------------------------------------- algebra


class ModulatedAlgebra:
    """A weighted quiver with a modulating function over one datum.

    ``special_mu`` maps each special loop to the constant term of its
    quadratic (the element mu with s**2 = mu at that vertex); when present,
    the product kernel rewrites repeated special loops accordingly.
    """

    def __init__(self, datum: GaloisDatum, quiver: WeightedQuiver,
                 modulation: ModulatingFunction,
                 special_mu: Optional[Dict[str, FieldElement]] = None):
        self.datum = datum
        self.quiver = quiver
        self.modulation = modulation
        self.special_mu = dict(special_mu or {})
        d = datum.degree
        for v in quiver.vertex_order:
            if d % quiver.weights[v] != 0:
                raise LevelMismatch(
                    "vertex %r weight %d does not divide datum degree %d"
                    % (v, quiver.weights[v], d)
                )
        for name in quiver.arrow_order:
            g = self.arrow_gcd(name)
            tw = modulation.of(name)
            if tw.level != g:
                raise LevelMismatch(
                    "twist of arrow %r has level %d, expected %d"
                    % (name, tw.level, g)
                )
        for s, mu in self.special_mu.items():
            arr = quiver.arrow(s)
            if not arr.special:
                raise ValueError("quadratic attached to non-special arrow %r" % s)
            if mu.is_zero():
                raise ValueError("special quadratic of %r has zero constant" % s)
            if not mu.in_level(quiver.weight(arr.tail)):
                raise LevelMismatch(
                    "quadratic constant of %r outside its vertex field" % s
                )

    # -- bookkeeping

    def vertex_level(self, vertex):
        return self.quiver.weight(vertex)

    def arrow_gcd(self, arrow_name):
        a = self.quiver.arrow(arrow_name)
        return gcd(self.quiver.weight(a.tail), self.quiver.weight(a.head))

    def interior_size(self, arrow_name):
        a = self.quiver.arrow(arrow_name)
        return self.quiver.weight(a.tail) // self.arrow_gcd(arrow_name)

    def __eq__(self, other):
        return (
            isinstance(other, ModulatedAlgebra)
            and self.datum == other.datum
            and self.quiver == other.quiver
            and self.modulation == other.modulation
            and self.special_mu == other.special_mu
        )

    # -- element factories

    def zero(self):
        return AlgebraElement(self, {})

    def element(self, terms):
        return AlgebraElement(self, dict(terms))

    def trivial(self, vertex, exp=0, coeff=1):
        vertex = str(vertex)
        d = self.vertex_level(vertex)
        q, r = divmod(exp, d)
        field = self.datum.base
        c = field.mul(field.coerce(coeff), self._c_power(q))
        path = DecoratedPath(vertex, vertex, (), (r,))
        return AlgebraElement(self, {path: c})

    def one(self):
        out = self.zero()
        for v in self.quiver.vertex_order:
            out = out + self.trivial(v)
        return out

    def arrow_element(self, name):
        a = self.quiver.arrow(name)
        path = DecoratedPath(a.tail, a.head, (name,), (0, 0))
        return AlgebraElement(self, {path: self.datum.base.one()})

    def path_element(self, arrows: Sequence[str], exps: Sequence[int], coeff=1):
        """Build (and normalize) a path from raw arrow names and exponents."""
        arrows = [str(a) for a in arrows]
        if not arrows:
            raise ValueError("use trivial() for length-0 paths")
        for i in range(len(arrows) - 1):
            left = self.quiver.arrow(arrows[i])
            right = self.quiver.arrow(arrows[i + 1])
            if right.head != left.tail:
                raise NotComposable(
                    "%s then %s: head %r != tail %r"
                    % (arrows[i + 1], arrows[i], right.head, left.tail)
                )
        if len(exps) != len(arrows) + 1:
            raise ValueError("need %d exponents" % (len(arrows) + 1))
        src = self.quiver.arrow(arrows[-1]).tail
        tgt = self.quiver.arrow(arrows[0]).head
        field = self.datum.base
        terms: Dict[DecoratedPath, Scalar] = {}
        for c, path in self._normal_terms(tuple(arrows), list(exps), src, tgt):
            c = field.mul(c, field.coerce(coeff))
            terms[path] = field.add(terms.get(path, field.zero()), c)
        return AlgebraElement(self, terms)

    def embed_scalar(self, value: FieldElement, vertex):
        """A tower element as a decorated trivial path at one vertex."""
        vertex = str(vertex)
        if value.datum != self.datum:
            raise DatumMismatch("scalar from a different datum")
        d = self.datum.degree
        dv = self.vertex_level(vertex)
        if not value.in_level(dv):
            raise LevelMismatch(
                "value of level %d does not lie in the weight-%d vertex field"
                % (value.level(), dv)
            )
        out = self.zero()
        step = d // dv
        for k_global, coord in enumerate(value.coords):
            if coord == self.datum.base.zero():
                continue
            out = out + self.trivial(vertex, k_global // step, coord)
        return out

    # -- kernel

    def _c_power(self, q):
        field = self.datum.base
        if q == 0:
            return field.one()
        c = field.coerce(self.datum.c)
        out = field.one()
        if q > 0:
            for _ in range(q):
                out = field.mul(out, c)
        else:
            cinv = field.inv(c)
            for _ in range(-q):
                out = field.mul(out, cinv)
        return out

    def _normal_terms(self, arrows: Tuple[str, ...], exps: List[int], src, tgt):
        """Normalize raw slot exponents; returns [(scalar, DecoratedPath)].

        Right-to-left pass: each interior slot keeps only its coset
        representative; the crossing part passes through the arrow on its
        left (picking up the twist eigenvalue) into the next slot.  The
        leftmost slot wraps modulo the vertex weight with a constant factor.
        Repeated special loops are then rewritten via their quadratic and
        the result re-normalized.
        """
        field = self.datum.base
        d = self.datum.degree
        scalar = field.one()
        exps = list(exps)
        n = len(arrows)
        for r in range(n, 0, -1):
            if exps[r] < 0:
                raise ValueError("negative slot exponent")
            a = self.quiver.arrow(arrows[r - 1])
            g = self.arrow_gcd(a.name)
            size = self.quiver.weight(a.tail) // g
            t_cross, keep = divmod(exps[r], size)
            exps[r] = keep
            if t_cross:
                tw = self.modulation.of(a.name)
                scalar = field.mul(
                    scalar,
                    self.datum.zeta_scalar_power((d // g) * tw.exp * t_cross),
                )
                exps[r - 1] += (self.quiver.weight(a.head) // g) * t_cross
        dv = self.vertex_level(tgt)
        q, keep = divmod(exps[0], dv)
        exps[0] = keep
        if q:
            scalar = field.mul(scalar, self._c_power(q))
        if self.special_mu:
            for i in range(n - 1):
                if arrows[i] == arrows[i + 1] and arrows[i] in self.special_mu:
                    if exps[i + 1] != 0:
                        raise AssertionError("unreduced slot inside special pair")
                    mu = self.special_mu[arrows[i]]
                    vertex = self.quiver.arrow(arrows[i]).tail
                    step = d // self.vertex_level(vertex)
                    out = []
                    new_arrows = arrows[:i] + arrows[i + 2:]
                    for k_global, coord in enumerate(mu.coords):
                        if coord == field.zero():
                            continue
                        new_exps = (
                            exps[:i]
                            + [exps[i] + k_global // step + exps[i + 2]]
                            + exps[i + 3:]
                        )
                        for sub_scalar, sub_path in self._normal_terms(
                            new_arrows, new_exps, src, tgt
                        ):
                            out.append(
                                (field.mul(field.mul(scalar, coord), sub_scalar),
                                 sub_path)
                            )
                    return out
        if n == 0:
            return [(scalar, DecoratedPath(src, tgt, (), (exps[0],)))]
        return [(scalar, DecoratedPath(src, tgt, tuple(arrows), tuple(exps)))]

    # -- pretty printing / parsing

    def format_decoration(self, vertex, exp):
        """Global-generator name for a local slot exponent; '' when trivial."""
        if exp == 0:
            return ""
        d = self.datum.degree
        k_global = exp * (d // self.vertex_level(vertex))
        return {1: "v", 2: "u", 3: "v3"}[k_global] if d == 4 else "u"

    def format_element(self, x: AlgebraElement):
        if x.is_zero():
            return "0"
        field = self.datum.base
        parts = []
        for path in sorted(x.terms):
            coeff = x.terms[path]
            tokens = []
            if not path.arrows:
                deco = self.format_decoration(path.source, path.exps[0])
                if deco:
                    tokens.append(deco)
                tokens.append("e%s" % path.source)
            else:
                deco = self.format_decoration(path.target, path.exps[0])
                if deco:
                    tokens.append(deco)
                for i, a in enumerate(path.arrows):
                    tokens.append(a)
                    vertex = self.quiver.arrow(a).tail
                    deco = self.format_decoration(vertex, path.exps[i + 1])
                    if deco:
                        tokens.append(deco)
            body = ".".join(tokens)
            if coeff == field.one():
                parts.append(body)
            else:
                parts.append("%s*%s" % (field.format_scalar(coeff), body))
        return " + ".join(parts)

    def parse_element(self, text: str) -> AlgebraElement:
        text = text.strip()
        if text == "0":
            return self.zero()
        out = self.zero()
        for term in text.split(" + "):
            term = term.strip()
            coeff = 1
            if "*" in term:
                coeff_txt, term = term.split("*", 1)
                coeff = self.datum.base.parse_scalar(coeff_txt)
            tokens = [t for t in term.split(".") if t]
            if not tokens:
                raise ValueError("empty term")
            out = out + normalize(self, tokens).scale(coeff)
        return out


# ----------------------------------------------------------------- operations


_DECO_GLOBAL = {"v": 1, "u": 2, "v2": 2, "v3": 3}


def normalize(alg: ModulatedAlgebra, word) -> AlgebraElement:
    """Normalize a word of arrows, decorations, and trivial paths.

    ``word`` is a string of dot-separated tokens or an iterable whose items
    are arrow names, ``e<vertex>`` tokens, decoration tokens (v, u, v3), or
    FieldElements (applied at the position they occupy).
    """
    if isinstance(word, str):
        word = [t for t in word.split(".") if t]
    items = list(word)
    if not items:
        raise NotComposable("empty word")

    datum = alg.datum

    def to_field(tok):
        if isinstance(tok, FieldElement):
            return tok
        if isinstance(tok, str) and tok in _DECO_GLOBAL and \
                tok not in alg.quiver.arrows:
            if datum.degree == 4:
                return datum.v_power(_DECO_GLOBAL[tok])
            if datum.degree == 2:
                if tok == "u":
                    return datum.v_power(1)
                raise LevelMismatch("decoration %r needs a degree-4 datum" % tok)
            raise LevelMismatch("decorations need a datum of degree > 1")
        return None

    def to_atom(tok):
        if isinstance(tok, str) and tok.startswith("e") and \
                tok[1:] in alg.quiver.weights:
            return alg.trivial(tok[1:])
        if isinstance(tok, str):
            if tok not in alg.quiver.arrows:
                raise UnknownArrow(tok)
            return alg.arrow_element(tok)
        raise TypeError("unexpected word item %r" % (tok,))

    first = None
    for i, tok in enumerate(items):
        if to_field(tok) is None:
            first = i
            break
    if first is None:
        raise NotComposable("word contains no arrows or trivial paths")

    acc = to_atom(items[first])
    for tok in items[first + 1:]:
        z = to_field(tok)
        if z is not None:
            acc = _mult_by_scalar(acc, z, side="right")
        else:
            acc = multiply(acc, to_atom(tok))
    for tok in reversed(items[:first]):
        acc = _mult_by_scalar(acc, to_field(tok), side="left")
    return acc


def _mult_by_scalar(x: AlgebraElement, z: FieldElement, side: str) -> AlgebraElement:
    alg = x.alg
    out = alg.zero()
    for path, coeff in x.terms.items():
        vertex = path.source if side == "right" else path.target
        emb = alg.embed_scalar(z, vertex)
        single = AlgebraElement(alg, {path: coeff})
        if side == "right":
            out = out + multiply(single, emb)
        else:
            out = out + multiply(emb, single)
    return out


def multiply(x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
    """Bilinear product; incomposable path pairs contribute zero."""
    if x.alg is not y.alg and x.alg != y.alg:
        raise DatumMismatch("elements of different algebras")
    alg = x.alg
    field = alg.datum.base
    terms: Dict[DecoratedPath, Scalar] = {}
    for p, cp in x.terms.items():
        for q, cq in y.terms.items():
            if p.source != q.target:
                continue
            c = field.mul(cp, cq)
            if not p.arrows:
                arrows = q.arrows
                exps = [p.exps[0] + q.exps[0]] + list(q.exps[1:])
            elif not q.arrows:
                arrows = p.arrows
                exps = list(p.exps[:-1]) + [p.exps[-1] + q.exps[0]]
            else:
                arrows = p.arrows + q.arrows
                exps = (
                    list(p.exps[:-1])
                    + [p.exps[-1] + q.exps[0]]
                    + list(q.exps[1:])
                )
            for scalar, path in alg._normal_terms(arrows, exps, q.source, p.target):
                cc = field.mul(c, scalar)
                terms[path] = field.add(terms.get(path, field.zero()), cc)
    return AlgebraElement(alg, terms)


def semilinear_part(x: AlgebraElement, rho: GaloisElement) -> AlgebraElement:
    """Projection of a homogeneous element onto its rho-semilinear component.

    Averages rho(w**-t) * x * w**t over the eigenbasis of the intersection
    field of the grade.  The projectors over all rho are idempotent,
    mutually orthogonal, and sum to the identity on the grade.
    """
    alg = x.alg
    if x.is_zero():
        return x
    grade = x.grade()
    if grade is None:
        raise GradeMismatch("semilinear_part requires a homogeneous element")
    src, tgt, _ = grade
    g = gcd(alg.vertex_level(src), alg.vertex_level(tgt))
    if rho.level != g:
        raise LevelMismatch(
            "projector level %d, intersection field has degree %d" % (rho.level, g)
        )
    datum = alg.datum
    field = datum.base
    out = alg.zero()
    for omega in eigenbasis(datum, g, 1):
        left = apply_galois(rho, omega.inv())
        term = multiply(
            multiply(alg.embed_scalar(left, tgt), x), alg.embed_scalar(omega, src)
        )
        out = out + term
    return out.scale(field.inv(field.coerce(g)))


class Potential:
    """Cyclic combination of decorated paths of length >= 2."""

    def __init__(self, element: AlgebraElement):
        for path in element.terms:
            if path.source != path.target:
                raise ValueError("potential term is not cyclic: %r" % (path,))
            if len(path.arrows) < 2:
                raise ValueError("potential term has length < 2")
        self.element = element
        self.alg = element.alg

    def __eq__(self, other):
        return isinstance(other, Potential) and self.element == other.element

    def __repr__(self):
        return "Potential(%s)" % self.alg.format_element(self.element)


def naive_cyclic_deletion(W: Potential, arrow_name: str) -> AlgebraElement:
    """Sum over occurrences of the arrow of delete-and-rotate, unaveraged."""
    alg = W.alg
    alg.quiver.arrow(arrow_name)
    out = alg.zero()
    for path, coeff in W.element.terms.items():
        n = len(path.arrows)
        for r in range(n):
            if path.arrows[r] != arrow_name:
                continue
            right_arrows = path.arrows[r + 1:]
            right_exps = path.exps[r + 1:]
            left_arrows = path.arrows[:r]
            left_exps = path.exps[: r + 1]
            if right_arrows:
                p_right = alg.path_element(right_arrows, right_exps)
            else:
                p_right = alg.trivial(path.source, right_exps[0])
            if left_arrows:
                p_left = alg.path_element(left_arrows, left_exps)
            else:
                p_left = alg.trivial(path.target, left_exps[0])
            out = out + multiply(p_right, p_left).scale(coeff)
    return out


def cyclic_derivative(W: Potential, arrow_name: str) -> AlgebraElement:
    """Averaged cyclic derivative of a potential with respect to one arrow.

    Each occurrence of the arrow in each cyclic term is deleted and the
    cycle re-read from the deletion point; the sum is then averaged with
    conjugators from the arrow's intersection field so that the result is
    purely twist-inverse-semilinear.
    """
    alg = W.alg
    a = alg.quiver.arrow(arrow_name)
    field = alg.datum.base
    d_a = alg.arrow_gcd(arrow_name)
    if field.coerce(d_a) == field.zero():
        raise CharacteristicClash("characteristic divides the averaging order")
    naive = naive_cyclic_deletion(W, arrow_name)
    if naive.is_zero():
        return naive
    datum = alg.datum
    tw_inv = alg.modulation.of(arrow_name).inverse()
    out = alg.zero()
    omega = datum.one()
    w = datum.level_generator(d_a) if d_a > 1 else datum.one()
    for _ in range(d_a):
        left = apply_galois(tw_inv, omega.inv())
        out = out + multiply(
            multiply(alg.embed_scalar(left, a.tail), naive),
            alg.embed_scalar(omega, a.head),
        )
        omega = omega * w
    return out.scale(field.inv(field.coerce(d_a)))


class Relation(NamedTuple):
    arrow: str
    element: AlgebraElement


def jacobian_relations(W: Potential) -> List[Relation]:
    """Cyclic derivatives of the potential, one per ordinary arrow."""
    alg = W.alg
    return [
        Relation(a.name, cyclic_derivative(W, a.name))
        for a in alg.quiver.ordinary_arrows()
    ]


def normality_check(datum: GaloisDatum, level: int, mu: FieldElement,
                    sigma: GaloisElement) -> bool:
    """Whether x**2 - mu is normal for the twist sigma on the level field."""
    if sigma.level != level:
        raise LevelMismatch("twist level does not match the quadratic's field")
    if not mu.in_level(level):
        return False
    if apply_galois(sigma, mu) != mu:
        return False
    sigma2 = sigma.compose(sigma)
    for lam in eigenbasis(datum, level, 1):
        if apply_galois(sigma2, lam) * mu != mu * lam:
            return False
    return True


# ------------------------------------------------------------------ quotients


class _GradeData(NamedTuple):
    paths: List[DecoratedPath]
    index: Dict[DecoratedPath, int]
    rows: list            # rref rows of the relation subspace
    pivots: List[int]
    survivors: List[DecoratedPath]


class QuotientAlgebra:
    """Finite-dimensional quotient with a surviving-path basis per grade."""

    def __init__(self, alg, grades, dead_length, mode, relations):
        self.alg = alg
        self._grades = grades
        self.dead_length = dead_length
        self.mode = mode
        self.relations = relations
        self.total_dim = sum(len(g.survivors) for g in grades.values())

    def grade_dims(self):
        return {
            key: len(g.survivors)
            for key, g in sorted(self._grades.items(), key=lambda kv: (kv[0][2], kv[0]))
            if g.survivors
        }

    def basis(self):
        out = []
        for key in sorted(self._grades, key=lambda k: (k[2], k)):
            out.extend(self._grades[key].survivors)
        return out

    def reduce(self, x: AlgebraElement) -> AlgebraElement:
        """Canonical representative of x in the surviving basis."""
        if x.alg is not self.alg and x.alg != self.alg:
            raise DatumMismatch("element of a different algebra")
        field = self.alg.datum.base
        out_terms: Dict[DecoratedPath, Scalar] = {}
        for key, part in x.grades().items():
            if key[2] >= self.dead_length:
                continue
            data = self._grades.get(key)
            if data is None:
                raise AssertionError("grade %r missing from saturation" % (key,))
            vec = [field.zero()] * len(data.paths)
            for p, c in part.terms.items():
                vec[data.index[p]] = c
            for row, piv in zip(data.rows, data.pivots):
                c = vec[piv]
                if c != field.zero():
                    for j in range(len(vec)):
                        vec[j] = field.sub(vec[j], field.mul(c, row[j]))
            for j, c in enumerate(vec):
                if c != field.zero():
                    p = data.paths[j]
                    out_terms[p] = field.add(out_terms.get(p, field.zero()), c)
        return AlgebraElement(self.alg, out_terms)

    def mul(self, x, y):
        return self.reduce(multiply(x, y))

    def is_zero_mod(self, x):
        return self.reduce(x).is_zero()

    def __repr__(self):
        return "QuotientAlgebra(dim=%d, mode=%s, dead_length=%d)" % (
            self.total_dim,
            self.mode,
            self.dead_length,
        )


def _enumerate_layer(alg: ModulatedAlgebra, length: int, s_reduced: bool):
    """All normal-form paths of the given length, grouped by grade.

    Chains grow rightward (toward the source): arrow r+1 must have its head
    at the tail of arrow r.  In special-loop mode, chains with a repeated
    special loop are excluded (they reduce via the quadratic).
    """
    quiver = alg.quiver
    out: Dict[tuple, List[DecoratedPath]] = {}
    if length == 0:
        for v in quiver.vertex_order:
            out[(v, v, 0)] = [
                DecoratedPath(v, v, (), (k,)) for k in range(quiver.weight(v))
            ]
        return out
    chains = [[name] for name in quiver.arrow_order]
    for _ in range(length - 1):
        grown = []
        for chain in chains:
            tail_vertex = quiver.arrow(chain[-1]).tail
            for name in quiver.arrow_order:
                b = quiver.arrows[name]
                if b.head != tail_vertex:
                    continue
                if s_reduced and b.special and chain[-1] == name:
                    continue
                grown.append(chain + [name])
        chains = grown
    for chain in chains:
        tgt = quiver.arrow(chain[0]).head
        src = quiver.arrow(chain[-1]).tail
        ranges = [quiver.weight(tgt)]
        ranges.extend(alg.interior_size(a) for a in chain)
        exps_list = [[]]
        for rng in ranges:
            exps_list = [e + [k] for e in exps_list for k in range(rng)]
        bucket = out.setdefault((src, tgt, length), [])
        for exps in exps_list:
            bucket.append(DecoratedPath(src, tgt, tuple(chain), tuple(exps)))
    for key in out:
        out[key].sort()
    return out


def saturate_quotient(alg: ModulatedAlgebra, relations, mode="jacobian",
                      lmax=None) -> QuotientAlgebra:
    """Grade-by-grade ideal saturation to a finite surviving basis.

    Relations may be Relation pairs or bare AlgebraElements; each must be
    homogeneous in length with a well-defined source and target.  The ideal
    layer at each length is spanned by basis-path sandwiches p*r*q; the
    iteration stops at the first length whose entire layer lies in the
    ideal (all longer layers then follow, since every longer path factors
    through a dead layer).
    """
    if mode not in ("jacobian", "clannish"):
        raise ValueError("unknown saturation mode %r" % mode)
    s_reduced = mode == "clannish"
    if s_reduced:
        for loop in alg.quiver.special_loops():
            if loop.name not in alg.special_mu:
                raise ValueError("special loop %r lacks its quadratic" % loop.name)
    rel_elems = []
    for r in relations:
        elem = r.element if isinstance(r, Relation) else r
        if elem.is_zero():
            continue
        lengths = {p.length for p in elem.terms}
        sts = {(p.source, p.target) for p in elem.terms}
        if len(lengths) != 1 or len(sts) != 1:
            raise GradeMismatch("relation is not homogeneous: %r" % (elem,))
        src, tgt = next(iter(sts))
        rel_elems.append(((src, tgt, next(iter(lengths))), elem))
    if lmax is None:
        lmax = 2 * len(alg.quiver.arrow_order) + 4
    field = alg.datum.base
    lin = LinAlg(field)

    layers: Dict[int, Dict[tuple, List[DecoratedPath]]] = {}
    by_source: Dict[int, Dict[str, List[DecoratedPath]]] = {}
    by_target: Dict[int, Dict[str, List[DecoratedPath]]] = {}

    def layer(length):
        if length not in layers:
            lay = _enumerate_layer(alg, length, s_reduced)
            layers[length] = lay
            bs: Dict[str, List[DecoratedPath]] = {}
            bt: Dict[str, List[DecoratedPath]] = {}
            for (src, tgt, _), paths in lay.items():
                bs.setdefault(src, []).extend(paths)
                bt.setdefault(tgt, []).extend(paths)
            by_source[length] = bs
            by_target[length] = bt
        return layers[length]

    grades: Dict[tuple, _GradeData] = {}
    dead_length = None
    for length in range(lmax + 1):
        lay = layer(length)
        span_vectors: Dict[tuple, List[AlgebraElement]] = {}
        for (r_src, r_tgt, r_len), elem in rel_elems:
            if r_len > length:
                continue
            for lp in range(length - r_len + 1):
                lq = length - r_len - lp
                layer(lp)
                layer(lq)
                lefts = by_source[lp].get(r_tgt, [])
                rights = by_target[lq].get(r_src, [])
                for p in lefts:
                    pr = multiply(AlgebraElement(alg, {p: field.one()}), elem)
                    if pr.is_zero():
                        continue
                    for q in rights:
                        prod = multiply(pr, AlgebraElement(alg, {q: field.one()}))
                        for key, part in prod.grades().items():
                            if key[2] != length:
                                raise AssertionError(
                                    "length-inhomogeneous sandwich at %r" % (key,)
                                )
                            span_vectors.setdefault(key, []).append(part)
        all_dead = True
        for key in sorted(lay):
            paths = lay[key]
            index = {p: i for i, p in enumerate(paths)}
            vecs = []
            for part in span_vectors.get(key, []):
                vec = [field.zero()] * len(paths)
                for pp, cc in part.terms.items():
                    vec[index[pp]] = cc
                vecs.append(vec)
            if vecs:
                rref, pivots = lin.rref(lin.matrix(vecs))
                rows = lin.to_lists(rref)
            else:
                rows, pivots = [], []
            pivot_set = set(pivots)
            survivors = [pp for i, pp in enumerate(paths) if i not in pivot_set]
            grades[key] = _GradeData(paths, index, rows, list(pivots), survivors)
            if survivors:
                all_dead = False
        if all_dead and length >= 1:
            dead_length = length
            for key in [k for k in grades if k[2] >= dead_length]:
                del grades[key]
            break
    if dead_length is None:
        raise SaturationBoundExceeded(
            "no annihilated length layer up to lmax=%d" % lmax
        )
    return QuotientAlgebra(alg, grades, dead_length, mode, rel_elems)
