"""Words and walk modules for the special-loop presentations.

A *word* is a sequence of letters over the alphabet of a loop
presentation: an ordinary arrow taken forwards, an ordinary arrow taken
backwards, or a special loop (written with a trailing ``*``).  Letters
are stored in application order — the leftmost letter acts last, exactly
like path composition — while the underlying walk visits the letters
from the right.  A finite admissible word is a *string*; a periodic
two-sided-infinite admissible word is a *band*.  Both are considered up
to inverting the letters and reversing their order (bands additionally
up to rotation), and a class fixed by that symmetry is called
*symmetric*.

Each word determines a parameterizing ring: the plain coefficient field
for an asymmetric string, a twisted quadratic quotient for a symmetric
string, a twisted Laurent ring for an asymmetric band, and a free
product of two quadratic quotients for a symmetric band.  A word plus a
module over its ring (a *fiber*) yields a representation of the loop
presentation: basis points are placed along the walk, ordinary letters
act by identities between neighbouring points, and special letters act
by pair swaps weighted so that their squares realize the loop
quadratics.  Every constructed representation is passed through the
validator; the construction refuses to return anything that fails it.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .galois import FieldElement, LatticeViolation
from .linalg import LinAlg
from .rep import Representation, validate, _mult_matrix

__all__ = [
    "BandWord",
    "Fiber",
    "Letter",
    "ParamRing",
    "QuadraticUnsatisfied",
    "StringWord",
    "ValidationFailed",
    "WordError",
    "band_module",
    "check_word",
    "default_fiber",
    "enumerate_bands",
    "enumerate_strings",
    "format_word",
    "param_ring",
    "parse_word",
    "string_module",
    "word_vertices",
]


class WordError(ValueError):
    """A letter sequence that is not an admissible word."""


class QuadraticUnsatisfied(ValueError):
    """A fiber whose operators do not solve the required quadratics."""


class ValidationFailed(RuntimeError):
    """A constructed module failed post-hoc validation."""


# ---------------------------------------------------------------- letters

_KIND_RANK = {"direct": 0, "special": 1, "inverse": 2}


@dataclass(frozen=True)
class Letter:
    """One step of a walk: an arrow forwards, backwards, or a special loop."""

    kind: str
    name: str

    def __post_init__(self):
        if self.kind not in _KIND_RANK:
            raise WordError("unknown letter kind %r" % (self.kind,))

    def inverse(self) -> "Letter":
        if self.kind == "direct":
            return Letter("inverse", self.name)
        if self.kind == "inverse":
            return Letter("direct", self.name)
        return self

    def key(self):
        return (_KIND_RANK[self.kind], self.name)

    def token(self) -> str:
        if self.kind == "inverse":
            return "%s^-1" % self.name
        if self.kind == "special":
            return "%s*" % self.name
        return self.name


def _letter_from_token(token: str) -> Letter:
    if token.endswith("^-1"):
        return Letter("inverse", token[:-3])
    if token.endswith("*"):
        return Letter("special", token[:-1])
    return Letter("direct", token)


def _invert_reverse(letters: Sequence[Letter]) -> Tuple[Letter, ...]:
    return tuple(letter.inverse() for letter in reversed(letters))


def _display_key(letters: Sequence[Letter]):
    return tuple(letter.key() for letter in letters)


class StringWord:
    """A finite word, kept in application order.

    A word with no letters is a trivial word sitting at a single vertex,
    recorded in ``base_vertex``.
    """

    def __init__(self, letters: Sequence[Letter] = (), base_vertex=None):
        self.letters = tuple(letters)
        if self.letters and base_vertex is not None:
            raise WordError("only a trivial word names its vertex directly")
        if not self.letters and base_vertex is None:
            raise WordError("a trivial word needs a vertex")
        self.base_vertex = str(base_vertex) if base_vertex is not None else None

    @property
    def trivial(self) -> bool:
        return not self.letters

    @property
    def symmetric(self) -> bool:
        return bool(self.letters) and \
            self.letters == _invert_reverse(self.letters)

    def inverse_reverse(self) -> "StringWord":
        if self.trivial:
            return self
        return StringWord(_invert_reverse(self.letters))

    def canonical(self) -> "StringWord":
        if self.trivial:
            return self
        other = _invert_reverse(self.letters)
        if _display_key(other) < _display_key(self.letters):
            return StringWord(other)
        return self

    def __len__(self):
        return len(self.letters)

    def __eq__(self, other):
        return isinstance(other, StringWord) and \
            self.letters == other.letters and \
            self.base_vertex == other.base_vertex

    def __hash__(self):
        return hash((self.letters, self.base_vertex))

    def __str__(self):
        return format_word(self)

    def __repr__(self):
        return "StringWord(%s)" % format_word(self)


class BandWord:
    """One period of a two-sided-infinite word, in application order."""

    def __init__(self, letters: Sequence[Letter]):
        if not letters:
            raise WordError("a band needs a non-empty period")
        self.letters = tuple(letters)

    @property
    def symmetric(self) -> bool:
        rotations = {_rotate(self.letters, i) for i in range(len(self.letters))}
        return _invert_reverse(self.letters) in rotations

    def canonical(self) -> "BandWord":
        return BandWord(_band_orbit_min(self.letters))

    def __len__(self):
        return len(self.letters)

    def __eq__(self, other):
        return isinstance(other, BandWord) and self.letters == other.letters

    def __hash__(self):
        return hash(("band", self.letters))

    def __str__(self):
        return format_word(self)

    def __repr__(self):
        return "BandWord(%s)" % format_word(self)


def _rotate(letters: Tuple[Letter, ...], i: int) -> Tuple[Letter, ...]:
    return letters[i:] + letters[:i]


def _band_orbit_min(letters: Tuple[Letter, ...]) -> Tuple[Letter, ...]:
    candidates = [_rotate(letters, i) for i in range(len(letters))]
    flipped = _invert_reverse(letters)
    candidates += [_rotate(flipped, i) for i in range(len(flipped))]
    return min(candidates, key=_display_key)


def format_word(word) -> str:
    if isinstance(word, BandWord):
        inner = " ".join(letter.token() for letter in word.letters)
        return "inf( %s )inf" % inner
    if word.trivial:
        return "1_%s" % word.base_vertex
    return " ".join(letter.token() for letter in word.letters)


def parse_word(pres, text: str):
    """Parse and admissibility-check a word against a presentation.

    Accepts the printed syntax: whitespace-separated tokens, ``x`` for a
    forward arrow, ``x^-1`` for a backward one, ``s*`` for a special
    loop, ``1_v`` for the trivial word at vertex ``v``, and
    ``inf( ... )inf`` wrapping one period of a band.
    """
    text = text.strip()
    if text.startswith("inf(") and text.endswith(")inf"):
        inner = text[4:-4].strip()
        letters = [_letter_from_token(t) for t in inner.split()]
        band = BandWord(letters)
        check_word(pres, band)
        return band
    if text.startswith("1_"):
        word = StringWord((), base_vertex=text[2:])
        check_word(pres, word)
        return word
    letters = [_letter_from_token(t) for t in text.split()]
    word = StringWord(letters)
    check_word(pres, word)
    return word


# ------------------------------------------------------- walks and checks


def _letter_step(quiver, letter: Letter):
    """Start and end vertex of one walk step (walk order)."""
    arrow = quiver.arrow(letter.name)
    if letter.kind == "special":
        if not arrow.special:
            raise WordError("%s is not a special loop" % letter.name)
        return arrow.tail, arrow.head
    if arrow.special:
        raise WordError(
            "special loop %s must be written %s*" % (letter.name, letter.name)
        )
    if letter.kind == "direct":
        return arrow.tail, arrow.head
    return arrow.head, arrow.tail


def _banned_pairs(pres):
    """Arrow pairs whose length-2 composition is a zero relation."""
    pairs = set()
    for rel in pres.relations:
        element = getattr(rel, "element", rel)
        for path, coeff in element.terms.items():
            if len(path.arrows) == 2:
                pairs.add(tuple(path.arrows))
    return pairs


def _special_loop_at(quiver) -> Dict[str, str]:
    return {arrow.tail: name for name, arrow in quiver.arrows.items()
            if arrow.special}


def _check_adjacent(pres, pairs, prev: Letter, nxt: Letter):
    """Walk-order adjacency rules shared by strings and bands."""
    if nxt == prev.inverse():
        raise WordError(
            "letters %s %s backtrack" % (prev.token(), nxt.token())
        )
    if prev.kind == "special" and nxt.kind == "special":
        raise WordError("two special letters may not be adjacent")
    if prev.kind == "direct" and nxt.kind == "direct":
        if (nxt.name, prev.name) in pairs:
            raise WordError(
                "steps %s %s compose into a zero relation"
                % (prev.token(), nxt.token())
            )
    if prev.kind == "inverse" and nxt.kind == "inverse":
        if (prev.name, nxt.name) in pairs:
            raise WordError(
                "steps %s %s compose into a zero relation"
                % (prev.token(), nxt.token())
            )


def word_vertices(pres, word) -> List[str]:
    """Vertices visited by the walk, from the rightmost letter onwards.

    For a band the list covers one period and repeats its first entry at
    the end.
    """
    quiver = pres.algebra.quiver
    if isinstance(word, StringWord) and word.trivial:
        if word.base_vertex not in quiver.weights:
            raise WordError("unknown vertex %r" % (word.base_vertex,))
        return [word.base_vertex]
    walk = list(reversed(word.letters))
    verts = []
    for i, letter in enumerate(walk):
        start, end = _letter_step(quiver, letter)
        if i == 0:
            verts = [start, end]
        else:
            if verts[-1] != start:
                raise WordError(
                    "letter %s does not continue the walk at vertex %s"
                    % (letter.token(), verts[-1])
                )
            verts.append(end)
    return verts


def check_word(pres, word) -> None:
    """Raise ``WordError`` unless the word is admissible.

    Strings must avoid backtracks, adjacent special letters and
    composites lying in the zero relations, and must present the special
    loop of a vertex as their outermost letter whenever they stop at a
    vertex carrying one.  Bands obey the same adjacency rules around the
    full period and must not be a repetition of a shorter period.
    """
    quiver = pres.algebra.quiver
    pairs = _banned_pairs(pres)
    loop_at = _special_loop_at(quiver)
    verts = word_vertices(pres, word)
    walk = list(reversed(word.letters))

    if isinstance(word, BandWord):
        if verts[0] != verts[-1]:
            raise WordError("a band period must close up")
        for i in range(len(walk)):
            _check_adjacent(pres, pairs, walk[i], walk[(i + 1) % len(walk)])
        n = len(walk)
        for span in range(1, n):
            if n % span == 0 and walk == walk[span:] + walk[:span]:
                raise WordError("a band period must not repeat a shorter one")
        return

    if word.trivial:
        if verts[0] in loop_at:
            raise WordError(
                "vertex %s carries the special loop %s; the trivial word "
                "is not admissible there" % (verts[0], loop_at[verts[0]])
            )
        return
    for prev, nxt in zip(walk, walk[1:]):
        _check_adjacent(pres, pairs, prev, nxt)
    first, last = walk[0], walk[-1]
    if verts[0] in loop_at and not (
        first.kind == "special" and first.name == loop_at[verts[0]]
    ):
        raise WordError(
            "the walk starts at vertex %s and must open with %s*"
            % (verts[0], loop_at[verts[0]])
        )
    if verts[-1] in loop_at and not (
        last.kind == "special" and last.name == loop_at[verts[-1]]
    ):
        raise WordError(
            "the walk stops at vertex %s and must close with %s*"
            % (verts[-1], loop_at[verts[-1]])
        )


# ------------------------------------------------------------ enumeration


def _alphabet(quiver) -> List[Letter]:
    letters = []
    for name in quiver.arrow_order:
        arrow = quiver.arrows[name]
        if arrow.special:
            letters.append(Letter("special", name))
        else:
            letters.append(Letter("direct", name))
            letters.append(Letter("inverse", name))
    return sorted(letters, key=Letter.key)


def enumerate_strings(pres, max_len: int) -> List[StringWord]:
    """Equivalence-class representatives of strings up to ``max_len`` letters.

    The search walks the quiver depth-first, applying the adjacency and
    end rules as it extends, and keeps the smaller of each word and its
    inverted reversal.  Trivial words appear for every vertex without a
    special loop.
    """
    quiver = pres.algebra.quiver
    pairs = _banned_pairs(pres)
    loop_at = _special_loop_at(quiver)
    alphabet = _alphabet(quiver)
    found = {}

    def record(walk):
        word = StringWord(tuple(reversed(walk))).canonical()
        found.setdefault((len(word.letters),) + _display_key(word.letters),
                         word)

    def start_ok(letter, vertex):
        return vertex not in loop_at or (
            letter.kind == "special" and letter.name == loop_at[vertex]
        )

    def extend(walk, end_vertex):
        if len(walk) >= max_len:
            return
        for letter in alphabet:
            start, end = _letter_step(quiver, letter)
            if start != end_vertex:
                continue
            try:
                _check_adjacent(pres, pairs, walk[-1], letter)
            except WordError:
                continue
            walk.append(letter)
            if end not in loop_at or (
                letter.kind == "special" and letter.name == loop_at[end]
            ):
                record(walk)
            extend(walk, end)
            walk.pop()

    for vertex in quiver.vertex_order:
        if vertex not in loop_at:
            found.setdefault((0, vertex), StringWord((), base_vertex=vertex))
        if max_len < 1:
            continue
        for letter in alphabet:
            start, end = _letter_step(quiver, letter)
            if start != vertex or not start_ok(letter, vertex):
                continue
            walk = [letter]
            if end not in loop_at or (
                letter.kind == "special" and letter.name == loop_at[end]
            ):
                record(walk)
            extend(walk, end)
    return [found[key] for key in sorted(found)]


def enumerate_bands(pres, max_period: int) -> List[BandWord]:
    """Equivalence-class representatives of bands up to ``max_period``."""
    quiver = pres.algebra.quiver
    pairs = _banned_pairs(pres)
    alphabet = _alphabet(quiver)
    found = {}

    def record(walk):
        band = BandWord(tuple(reversed(walk))).canonical()
        found.setdefault(_display_key(band.letters), band)

    def extend(walk, end_vertex, start_vertex):
        if len(walk) >= 2 and end_vertex == start_vertex:
            try:
                band = BandWord(tuple(reversed(walk)))
                _check_adjacent(pres, pairs, walk[-1], walk[0])
                check_word(pres, band)
            except WordError:
                pass
            else:
                record(walk)
        if len(walk) >= max_period:
            return
        for letter in alphabet:
            start, end = _letter_step(quiver, letter)
            if start != end_vertex:
                continue
            try:
                _check_adjacent(pres, pairs, walk[-1], letter)
            except WordError:
                continue
            walk.append(letter)
            extend(walk, end, start_vertex)
            walk.pop()

    for vertex in quiver.vertex_order:
        for letter in alphabet:
            start, end = _letter_step(quiver, letter)
            if start != vertex:
                continue
            extend([letter], end, vertex)
    return [found[key] for key in sorted(found)]


# ------------------------------------------------------ parameterizing ring


class ParamRing:
    """The ring a word's modules are induced from.

    ``kind`` is one of ``"scalar"`` (asymmetric string), ``"quadratic"``
    (symmetric string), ``"laurent"`` (asymmetric band) or
    ``"free-product"`` (symmetric band).  ``pivots`` lists, per
    reflection axis, the special loop, its twist exponent, and the
    effective constant of its quadratic (already conjugated by the twist
    accumulated along the walk up to the axis).
    """

    def __init__(self, kind, pivots=(), shift_exp=None):
        self.kind = kind
        self.pivots = tuple(pivots)
        self.shift_exp = shift_exp

    def describe(self) -> str:
        if self.kind == "scalar":
            return "coefficient field"
        if self.kind == "laurent":
            return "twisted Laurent ring (shift exponent %d)" % self.shift_exp
        parts = []
        for i, (loop, exp, const) in enumerate(self.pivots):
            var = "xy"[i] if len(self.pivots) > 1 else "x"
            twist = "; twist" if exp % 2 else ""
            parts.append(
                "%s^2 = %s from %s%s" % (var, _format_value(const), loop,
                                         twist)
            )
        label = "quadratic quotient" if self.kind == "quadratic" \
            else "free product of quadratic quotients"
        return "%s: %s" % (label, ", ".join(parts))

    def __repr__(self):
        return "ParamRing(%s)" % self.describe()


def _format_value(value: FieldElement) -> str:
    datum = value.datum
    base = datum.base
    names = {0: "1"}
    if datum.degree >= 2:
        names[datum.degree // 2] = "u"
    parts = []
    for k, coeff in enumerate(value.coords):
        if coeff == base.zero():
            continue
        label = names.get(k, "v^%d" % k)
        text = base.format_scalar(coeff)
        parts.append(label if text == "1" and k else
                     (text if not k else "%s*%s" % (text, label)))
    return " + ".join(parts) if parts else "0"


def _twist_exp(alg, letter: Letter) -> int:
    exp = alg.modulation.of(letter.name).exp
    return (-exp if letter.kind == "inverse" else exp) % 2


def _conjugated(datum, value: FieldElement, twist: int) -> FieldElement:
    """Apply the order-2 subfield automorphism ``twist`` times."""
    if twist % 2 == 0 or datum.degree < 2:
        return value
    half = datum.degree // 2
    base = datum.base
    coords = list(value.coords)
    for k in range(datum.degree):
        if k not in (0, half) and coords[k] != base.zero():
            raise LatticeViolation(
                "loop constant does not lie in the level-2 subfield"
            )
    coords[half] = base.neg(coords[half])
    return datum.element(tuple(coords))


def _walk_twists(alg, walk: Sequence[Letter]) -> List[int]:
    twists = [0]
    for letter in walk:
        twists.append((twists[-1] + _twist_exp(alg, letter)) % 2)
    return twists


def param_ring(pres, word) -> ParamRing:
    """The parameterizing ring of a string or band."""
    alg = pres.algebra
    datum = alg.datum
    check_word(pres, word)
    if isinstance(word, BandWord):
        walk = list(reversed(word.letters))
        split = _symmetric_band_split(pres, walk)
        if split is None:
            total = sum(_twist_exp(alg, letter) for letter in walk) % 2
            return ParamRing("laurent", shift_exp=total)
        first, run, second = split
        twists = _walk_twists(alg, run)
        mu1 = alg.special_mu[first.name]
        mu2 = _conjugated(datum, alg.special_mu[second.name], twists[-1])
        return ParamRing("free-product", pivots=[
            (first.name, _twist_exp(alg, first), mu1),
            (second.name, _twist_exp(alg, second), mu2),
        ])
    if not word.symmetric:
        return ParamRing("scalar")
    walk = list(reversed(word.letters))
    h = (len(walk) - 1) // 2
    middle = walk[h]
    twists = _walk_twists(alg, walk[:h])
    mu = _conjugated(datum, alg.special_mu[middle.name], twists[-1])
    return ParamRing("quadratic", pivots=[
        (middle.name, _twist_exp(alg, middle), mu),
    ])


def _symmetric_band_split(pres, walk: Sequence[Letter]):
    """Split a band period as pivot + run + pivot + mirrored run.

    Returns ``(first, run, second)`` in walk order, or ``None`` when no
    rotation exhibits the reflection symmetry.
    """
    n = len(walk)
    for i in range(n):
        rotated = list(walk[i:]) + list(walk[:i])
        if rotated[0].kind != "special":
            continue
        for j in range(1, n):
            if rotated[j].kind != "special":
                continue
            run = rotated[1:j]
            rest = rotated[j + 1:]
            if len(rest) == len(run) and \
                    tuple(rest) == _invert_reverse(run):
                return rotated[0], run, rotated[j]
    return None


# ------------------------------------------------------------------ fibers


class Fiber:
    """A module over a word's parameterizing ring, in matrix form.

    ``dim`` is the dimension over the coefficient field; ``generator``
    is the subfield generator action (omitted at level 1); ``x`` solves
    the quadratic of the (first) reflection axis and ``y``, present only
    for band fibers, solves the second.
    """

    def __init__(self, dim: int, x, generator=None, y=None):
        self.dim = int(dim)
        self.x = [list(row) for row in x]
        self.generator = None if generator is None else \
            [list(row) for row in generator]
        self.y = None if y is None else [list(row) for row in y]


def _scalar_sqrt(base, a):
    """A square root of ``a`` in the base field, or ``None``."""
    if base.kind == "prime":
        for w in range(base.p):
            if (w * w) % base.p == a % base.p:
                return w
        return None
    frac = Fraction(a)
    if frac < 0:
        return None
    num = _int_sqrt(frac.numerator)
    den = _int_sqrt(frac.denominator)
    if num is None or den is None:
        return None
    return Fraction(num, den)


def _int_sqrt(n: int):
    root = int(n ** 0.5)
    for w in (root - 1, root, root + 1):
        if w >= 0 and w * w == n:
            return w
    return None


def _level2_sqrt(datum, value: FieldElement):
    """``w`` in the level-2 subfield with ``w**2 == value``, or ``None``."""
    base = datum.base
    half = datum.degree // 2
    a_part = value.coords[0]
    b_part = value.coords[half]
    if base.kind == "prime":
        for x in range(base.p):
            for y in range(base.p):
                w = datum.element(tuple(
                    base.coerce(x) if k == 0 else
                    (base.coerce(y) if k == half else base.zero())
                    for k in range(datum.degree)
                ))
                if (w * w).coords == value.coords:
                    return w
        return None
    c = Fraction(datum.c)
    a_q, b_q = Fraction(a_part), Fraction(b_part)
    if b_q == 0:
        for scale, target in ((None, a_q), (c, a_q / c)):
            root = _scalar_sqrt(base, target)
            if root is not None:
                coords = [base.zero()] * datum.degree
                coords[0 if scale is None else half] = root
                return datum.element(tuple(coords))
        return None
    # (x + y*u)**2 = x**2 + c*y**2 + 2*x*y*u with u**2 = c
    disc = _scalar_sqrt(base, a_q * a_q - c * b_q * b_q)
    if disc is None:
        return None
    for branch in (disc, -disc):
        x_sq = (a_q + branch) / 2
        x_root = _scalar_sqrt(base, x_sq)
        if x_root in (None, 0):
            continue
        y_root = b_q / (2 * x_root)
        coords = [base.zero()] * datum.degree
        coords[0], coords[half] = x_root, y_root
        return datum.element(tuple(coords))
    return None


def default_fiber(pres, ring: ParamRing) -> Fiber:
    """A canonical indecomposable fiber for a symmetric string's ring.

    When the quadratic is irreducible the ring is a (possibly twisted)
    field and acts on itself; when it splits, the construction returns
    one simple summand instead.  A twisted quadratic whose ring is a
    division algebra has no canonical finite fiber here and must be
    supplied by the caller.
    """
    if ring.kind != "quadratic":
        raise WordError(
            "default fibers exist only for symmetric strings; got a %s ring"
            % ring.kind
        )
    alg = pres.algebra
    datum = alg.datum
    loop, exp, const = ring.pivots[0]
    level = alg.vertex_level(alg.quiver.arrow(loop).tail)
    base = datum.base
    if level == 1:
        a = const.coords[0]
        root = _scalar_sqrt(base, a)
        if root is None:
            return Fiber(2, [[base.zero(), a], [base.one(), base.zero()]])
        return Fiber(1, [[base.coerce(root)]])
    mu_mat = _mult_matrix(datum, 2, datum.u())
    if exp % 2:
        if const.coords[datum.degree // 2] != base.zero():
            raise QuadraticUnsatisfied(
                "a twisted quadratic needs a twist-fixed constant"
            )
        m = const.coords[0]
        witness = _anticommuting_root(datum, mu_mat, m)
        if witness is None:
            raise QuadraticUnsatisfied(
                "the twisted quadratic generates a division algebra; "
                "supply a fiber explicitly"
            )
        return Fiber(2, witness, generator=mu_mat)
    root = _level2_sqrt(datum, const)
    if root is not None:
        return Fiber(2, _mult_matrix(datum, 2, root), generator=mu_mat)
    x_mat = _regular_x(datum, exp, const)
    gen = _block_diag_lists(base, mu_mat, mu_mat)
    return Fiber(4, x_mat, generator=gen)


def _regular_x(datum, exp, const):
    """Left multiplication by ``x`` on the rank-one free module."""
    base = datum.base
    a = base.coerce(const.coords[0])
    b = base.coerce(const.coords[datum.degree // 2])
    sign = base.neg(base.one()) if exp % 2 else base.one()
    zero = base.zero()
    return [
        [zero, zero, a, base.mul(sign, base.mul(b, base.coerce(datum.c)))],
        [zero, zero, b, base.mul(sign, a)],
        [base.one(), zero, zero, zero],
        [zero, sign, zero, zero],
    ]


def _anticommuting_root(datum, mu_mat, m):
    """A 2x2 matrix anticommuting with the generator and squaring to m."""
    base = datum.base
    one, zero = base.one(), base.zero()
    root = _scalar_sqrt(base, m)
    if root is not None:
        r = base.coerce(root)
        return [[r, zero], [zero, base.neg(r)]]
    if base.kind != "prime":
        return None
    for entries in _all_2x2(base):
        sq = _mat_mul_lists(base, entries, entries)
        if sq != [[base.coerce(m), zero], [zero, base.coerce(m)]]:
            continue
        left = _mat_mul_lists(base, entries, mu_mat)
        right = _mat_scale_lists(base, base.neg(one),
                                 _mat_mul_lists(base, mu_mat, entries))
        if left == right:
            return entries
    return None


def _all_2x2(base):
    for a in range(base.p):
        for b in range(base.p):
            for c in range(base.p):
                for d in range(base.p):
                    yield [[base.coerce(a), base.coerce(b)],
                           [base.coerce(c), base.coerce(d)]]


# ---------------------------------------------------- matrix list helpers


def _zeros_lists(base, n, m):
    return [[base.zero()] * m for _ in range(n)]


def _ident_lists(base, n):
    out = _zeros_lists(base, n, n)
    for i in range(n):
        out[i][i] = base.one()
    return out


def _mat_mul_lists(base, a, b):
    n, k, m = len(a), len(b), len(b[0]) if b else 0
    out = _zeros_lists(base, n, m)
    for i in range(n):
        for j in range(m):
            acc = base.zero()
            for t in range(k):
                acc = base.add(acc, base.mul(a[i][t], b[t][j]))
            out[i][j] = acc
    return out


def _mat_add_lists(base, a, b):
    return [[base.add(x, y) for x, y in zip(ra, rb)]
            for ra, rb in zip(a, b)]


def _mat_scale_lists(base, s, a):
    return [[base.mul(s, x) for x in row] for row in a]


def _block_diag_lists(base, a, b):
    n, m = len(a), len(b)
    out = _zeros_lists(base, n + m, n + m)
    for i in range(n):
        for j in range(n):
            out[i][j] = a[i][j]
    for i in range(m):
        for j in range(m):
            out[n + i][n + j] = b[i][j]
    return out


def _slot_action(datum, level, value: FieldElement, twist, size, u_block):
    """Left multiplication by ``value`` on a twist-``twist`` slot."""
    base = datum.base
    a = base.coerce(value.coords[0])
    out = _mat_scale_lists(base, a, _ident_lists(base, size))
    if level == 1:
        for k in range(1, datum.degree):
            if value.coords[k] != base.zero():
                raise LatticeViolation(
                    "a level-1 slot only carries base scalars"
                )
        return out
    b = base.coerce(value.coords[datum.degree // 2])
    if twist % 2:
        b = base.neg(b)
    return _mat_add_lists(base, out, _mat_scale_lists(base, b, u_block))


# ------------------------------------------------------ module construction


def _fiber_contract(datum, level, pivot, fiber: Fiber, which="x"):
    """Check one quadratic of a fiber; raise QuadraticUnsatisfied."""
    base = datum.base
    _, exp, const = pivot
    op = fiber.x if which == "x" else fiber.y
    if op is None:
        raise QuadraticUnsatisfied("the fiber is missing its %s operator"
                                   % which)
    size = fiber.dim
    if len(op) != size or any(len(row) != size for row in op):
        raise QuadraticUnsatisfied("fiber operator %s is not %dx%d"
                                   % (which, size, size))
    if level > 1:
        gen = fiber.generator
        if gen is None:
            raise QuadraticUnsatisfied(
                "a level-2 fiber needs its subfield generator action"
            )
        c_mat = _mat_scale_lists(base, base.coerce(datum.c),
                                 _ident_lists(base, size))
        if _mat_mul_lists(base, gen, gen) != c_mat:
            raise QuadraticUnsatisfied(
                "the fiber generator does not square to the field constant"
            )
        sign = base.neg(base.one()) if exp % 2 else base.one()
        left = _mat_mul_lists(base, op, gen)
        right = _mat_scale_lists(base, sign, _mat_mul_lists(base, gen, op))
        if left != right:
            raise QuadraticUnsatisfied(
                "fiber operator %s has the wrong twist against the generator"
                % which
            )
    want = _slot_action(datum, level, const, 0, size, fiber.generator)
    if _mat_mul_lists(base, op, op) != want:
        raise QuadraticUnsatisfied(
            "fiber operator %s does not solve its quadratic" % which
        )


def _assemble(pres, point_vertices, point_twists, slot_size, u_block,
              blocks, check):
    """Build and validate a representation from per-point block data.

    ``blocks`` maps an arrow name to a list of (target point, source
    point, matrix) triples; points are indexed by walk position and laid
    out per vertex in walk order.
    """
    alg = pres.algebra
    datum = alg.datum
    base = datum.base
    slot_of = {}
    dims = {v: 0 for v in alg.quiver.vertex_order}
    for idx, vertex in enumerate(point_vertices):
        slot_of[idx] = dims[vertex]
        dims[vertex] += slot_size
    generators = {}
    if u_block is not None:
        for vertex in alg.quiver.vertex_order:
            pts = [i for i, v in enumerate(point_vertices) if v == vertex]
            if not pts:
                continue
            gen = None
            for i in pts:
                blk = u_block if point_twists[i] % 2 == 0 else \
                    _mat_scale_lists(base, base.neg(base.one()), u_block)
                gen = blk if gen is None else \
                    _block_diag_lists(base, gen, blk)
            generators[vertex] = gen
    maps = {}
    for name, triples in blocks.items():
        arrow = alg.quiver.arrow(name)
        mat = _zeros_lists(base, dims[arrow.head], dims[arrow.tail])
        for target, source, block in triples:
            r0, c0 = slot_of[target], slot_of[source]
            for i, row in enumerate(block):
                for j, x in enumerate(row):
                    mat[r0 + i][c0 + j] = base.add(mat[r0 + i][c0 + j], x)
        maps[name] = mat
    module = Representation(alg, dims, generators, maps)
    if check:
        report = validate(module, pres)
        if not report.ok:
            raise ValidationFailed(
                "constructed module failed validation: %s"
                % "; ".join(report.violations)
            )
    return module


def string_module(pres, word: StringWord, fiber: Optional[Fiber] = None,
                  check: bool = True) -> Representation:
    """The module of a string, induced from a fiber where one is needed.

    An asymmetric string takes no fiber: each walk point carries one
    copy of the vertex field.  A symmetric string folds in half; the
    surviving points each carry the fiber, and the middle special letter
    acts on the innermost point by the fiber's quadratic root.
    """
    alg = pres.algebra
    datum = alg.datum
    base = datum.base
    check_word(pres, word)
    verts = word_vertices(pres, word)
    walk = list(reversed(word.letters))
    level = alg.vertex_level(verts[0])
    u_block = _mult_matrix(datum, 2, datum.u()) if level > 1 else None
    twists = _walk_twists(alg, walk)

    if word.symmetric:
        ring = param_ring(pres, word)
        if fiber is None:
            fiber = default_fiber(pres, ring)
        _fiber_contract(datum, level, ring.pivots[0], fiber)
        h = (len(walk) - 1) // 2
        keep = h + 1
        size = fiber.dim
        slot_u = fiber.generator
        active = walk[:h]
        middle = walk[h]
    else:
        if fiber is not None:
            raise WordError("an asymmetric string does not take a fiber")
        keep = len(walk) + 1
        size = level
        slot_u = u_block
        active = walk
        middle = None

    blocks: Dict[str, list] = {}

    def place(name, target, source, matrix):
        blocks.setdefault(name, []).append((target, source, matrix))

    ident = _ident_lists(base, size)
    for i, letter in enumerate(active, start=1):
        if letter.kind == "direct":
            place(letter.name, i, i - 1, ident)
        elif letter.kind == "inverse":
            place(letter.name, i - 1, i, ident)
        else:
            mu = alg.special_mu[letter.name]
            back = _slot_action(datum, level, mu, twists[i - 1], size, slot_u)
            place(letter.name, i, i - 1, ident)
            place(letter.name, i - 1, i, back)
    if middle is not None:
        place(middle.name, keep - 1, keep - 1, fiber.x)
    return _assemble(pres, verts[:keep], twists[:keep], size, slot_u,
                     blocks, check)


def band_module(pres, band: BandWord, fiber: Fiber,
                check: bool = True) -> Representation:
    """The module of a symmetric band over an explicitly supplied fiber.

    The period folds about its two reflection axes; the points between
    them carry the fiber, the run letters act by identities, and the two
    pivot loops act by the fiber's two quadratic roots, which must be
    invertible.
    """
    alg = pres.algebra
    datum = alg.datum
    base = datum.base
    check_word(pres, band)
    walk = list(reversed(band.letters))
    split = _symmetric_band_split(pres, walk)
    if split is None:
        raise WordError("only symmetric bands have folded modules here")
    first, run, second = split
    ring = param_ring(pres, band)
    level = alg.vertex_level(alg.quiver.arrow(first.name).tail)
    if fiber is None or fiber.y is None:
        raise QuadraticUnsatisfied(
            "a symmetric band needs a fiber with both quadratic roots"
        )
    _fiber_contract(datum, level, ring.pivots[0], fiber, which="x")
    _fiber_contract(datum, level, ring.pivots[1], fiber, which="y")
    la = LinAlg(base)
    for which, op in (("x", fiber.x), ("y", fiber.y)):
        if not la.is_invertible(la.matrix(op)):
            raise QuadraticUnsatisfied(
                "fiber operator %s must be invertible for a band" % which
            )

    quiver = alg.quiver
    verts = [quiver.arrow(first.name).head]
    for letter in run:
        verts.append(_letter_step(quiver, letter)[1])
    twists = _walk_twists(alg, run)
    size = fiber.dim
    blocks: Dict[str, list] = {}
    ident = _ident_lists(base, size)
    for i, letter in enumerate(run, start=1):
        if letter.kind == "direct":
            blocks.setdefault(letter.name, []).append((i, i - 1, ident))
        elif letter.kind == "inverse":
            blocks.setdefault(letter.name, []).append((i - 1, i, ident))
        else:
            mu = alg.special_mu[letter.name]
            back = _slot_action(datum, level, mu, twists[i - 1], size,
                                fiber.generator)
            blocks.setdefault(letter.name, []).append((i, i - 1, ident))
            blocks.setdefault(letter.name, []).append((i - 1, i, back))
    blocks.setdefault(first.name, []).append((0, 0, fiber.x))
    blocks.setdefault(second.name, []).append(
        (len(verts) - 1, len(verts) - 1, fiber.y)
    )
    return _assemble(pres, verts, twists, size, fiber.generator, blocks,
                     check)
