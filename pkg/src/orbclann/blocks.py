"""Catalog of the ten local triangle algebras, in both presentations.

Each index ``k`` in 1..10 names one local shape: a weight triple on the
three sides of a triangle, a doubling flag for the arrow between two
equal-weight orbifold-adjacent sides, and a construction mode (the
indices 8-10 use the constant-weight mode over a degree-2 datum).  For
every index the catalog produces two algebras over the same datum:

* the potential presentation (``jacobian_block``): a modulated path
  algebra with a cyclic potential, whose relations are the averaged
  cyclic derivatives;
* the special-loop presentation (``clannish_block``): all three vertices
  carry the same field, pending sides contribute special loops with a
  quadratic, and the relations are the three length-2 zero compositions.

Vertex ids are "1", "2", "3"; the ordinary arrows are a: 2 -> 1,
b: 3 -> 2 (doubled into b0, b1 when the flag is set) and g: 1 -> 3, so
that a.b, b.g, g.a are the composable length-2 paths.  A 1-cocycle value
``xi`` is a dict over {"a", "b", "g"} with entries in {0, 1} summing to
zero mod 2; a doubled pair shares the single "b" entry.
"""

from math import gcd

from .galois import GaloisDatum, GaloisElement, LatticeViolation
from .pathalg import (
    ModulatedAlgebra,
    ModulatingFunction,
    Potential,
    WeightedQuiver,
    jacobian_relations,
    saturate_quotient,
)

__all__ = [
    "BLOCK_INDICES",
    "BlockPresentation",
    "admissible_cocycles",
    "block_shape",
    "clannish_block",
    "jacobian_block",
]

BLOCK_INDICES = tuple(range(1, 11))

# index -> (weight triple (d1, d2, d3), doubled b, constant-weight mode)
_SHAPES = {
    1: ((2, 2, 2), False, False),
    2: ((1, 2, 2), False, False),
    3: ((4, 2, 2), False, False),
    4: ((2, 1, 1), True, False),
    5: ((2, 4, 4), True, False),
    6: ((2, 4, 1), False, False),
    7: ((2, 1, 4), False, False),
    8: ((1, 1, 1), False, True),
    9: ((2, 1, 1), False, True),
    10: ((1, 2, 2), True, True),
}

# special loops of the loop presentation: index -> tuple of carrying vertices
_LOOP_VERTICES = {
    1: (),
    2: ("1",),
    3: ("1",),
    4: ("2", "3"),
    5: ("2", "3"),
    6: ("2", "3"),
    7: ("2", "3"),
    8: (),
    9: ("1",),
    10: ("2", "3"),
}

# loop data per index: vertex -> (twist exponent of theta, quadratic constant)
# where the constant "u" means the level-2 generator, "c" the defining
# constant of the datum, and "1" the identity.
_LOOP_DATA = {
    2: {"1": (1, "1")},
    3: {"1": (0, "u")},
    4: {"2": (1, "1"), "3": (1, "1")},
    5: {"2": (0, "u"), "3": (0, "u")},
    6: {"2": (0, "u"), "3": (1, "1")},
    7: {"2": (1, "1"), "3": (0, "u")},
    9: {"1": (0, "c")},
    10: {"2": (0, "c"), "3": (0, "c")},
}


def block_shape(k):
    """Weight triple, doubling flag and mode flag of block ``k``."""
    if k not in _SHAPES:
        raise ValueError("block index must be in 1..10, got %r" % (k,))
    return _SHAPES[k]


def admissible_cocycles():
    """The four {0,1}-assignments on {a, b, g} summing to zero mod 2."""
    out = []
    for xa in (0, 1):
        for xb in (0, 1):
            out.append({"a": xa, "b": xb, "g": (xa + xb) % 2})
    return out


def _check_cocycle(xi):
    if xi is None:
        return {"a": 0, "b": 0, "g": 0}
    xi = {key: int(xi[key]) % 2 for key in ("a", "b", "g")}
    if (xi["a"] + xi["b"] + xi["g"]) % 2 != 0:
        raise ValueError("cocycle values on a triangle must sum to 0 mod 2")
    return xi


def _check_datum(k, datum: GaloisDatum):
    weights, _, const = _SHAPES[k]
    if const:
        allowed = (1, 2) if k == 8 else (2,)
        if datum.degree not in allowed:
            raise LatticeViolation(
                "block %d needs a constant-mode datum of degree %s"
                % (k, "/".join(str(d) for d in allowed))
            )
    else:
        if max(weights) == 4 and datum.degree != 4:
            raise LatticeViolation(
                "block %d has a weight-4 side and needs a degree-4 datum" % k
            )
        if datum.degree not in (2, 4):
            raise LatticeViolation(
                "block %d needs a datum of degree 2 or 4" % k
            )


class BlockPresentation:
    """One side of one catalog entry: algebra, relations, and quotient."""

    def __init__(self, kind, index, xi, algebra, relations, potential=None):
        self.kind = kind
        self.index = index
        self.xi = dict(xi)
        self.algebra = algebra
        self.relations = list(relations)
        self.potential = potential
        self._quotient = None

    def quotient(self, lmax=None):
        if self._quotient is None or lmax is not None:
            q = saturate_quotient(
                self.algebra, self.relations, mode=self.kind, lmax=lmax
            )
            if lmax is not None:
                return q
            self._quotient = q
        return self._quotient

    def __repr__(self):
        return "BlockPresentation(%s, k=%d, xi=%r)" % (
            self.kind,
            self.index,
            self.xi,
        )


def jacobian_block(k, datum: GaloisDatum, xi=None) -> BlockPresentation:
    """The potential presentation of block ``k`` over ``datum``.

    The ordinary arrows carry the twist theta**xi on their intersection
    field; a doubled pair carries the two lifts of that twist to the
    common field of its endpoints (the two elements restricting to
    theta**xi[b], distinguished by the index of the component).
    """
    if k not in _SHAPES:
        raise ValueError("block index must be in 1..10, got %r" % (k,))
    xi = _check_cocycle(xi)
    _check_datum(k, datum)
    (d1, d2, d3), doubled, _ = _SHAPES[k]
    weights = {"1": d1, "2": d2, "3": d3}
    arrows = [("a", "2", "1")]
    if doubled:
        arrows += [("b0", "3", "2"), ("b1", "3", "2")]
    else:
        arrows += [("b", "3", "2")]
    arrows += [("g", "1", "3")]
    quiver = WeightedQuiver([(v, weights[v]) for v in ("1", "2", "3")], arrows)

    twists = {}
    for name, tail, head in arrows:
        g = gcd(weights[tail], weights[head])
        label = "b" if name in ("b0", "b1") else name
        exp = xi[label]
        if name == "b1":
            # the second lift of theta**xi[b] to the common endpoint field
            exp += g // 2
        twists[name] = GaloisElement(g, exp)
    alg = ModulatedAlgebra(datum, quiver, ModulatingFunction(twists))

    if not doubled:
        w_elem = alg.path_element(["a", "b", "g"], [0, 0, 0, 0])
    elif k == 4:
        # the second component of the doubled pair passes the level-2
        # generator of the top vertex on its way around the cycle
        w_elem = alg.path_element(["b0", "g", "a"], [0, 0, 0, 0]) + \
            alg.path_element(["b1", "g", "a"], [0, 0, 1, 0])
    else:
        w_elem = alg.path_element(["a", "b0", "g"], [0, 0, 0, 0]) + \
            alg.path_element(["a", "b1", "g"], [0, 0, 0, 0])
    potential = Potential(w_elem)
    relations = jacobian_relations(potential)
    return BlockPresentation("jacobian", k, xi, alg, relations, potential)


def clannish_block(k, datum: GaloisDatum, xi=None) -> BlockPresentation:
    """The special-loop presentation of block ``k`` over ``datum``.

    All three vertices carry the same field (the level-2 subfield for
    indices 1-7, the base field for the constant-weight indices 8-10);
    each ordinary arrow is twisted by theta**xi, and each special loop
    carries a fixed twist and quadratic from the catalog.
    """
    if k not in _SHAPES:
        raise ValueError("block index must be in 1..10, got %r" % (k,))
    xi = _check_cocycle(xi)
    _check_datum(k, datum)
    _, _, const = _SHAPES[k]
    level = 1 if const else 2
    vertices = [(v, level) for v in ("1", "2", "3")]
    arrows = [("a", "2", "1"), ("b", "3", "2"), ("g", "1", "3")]
    loops = _LOOP_VERTICES[k]
    for v in loops:
        arrows.append(("s%s" % v, v, v, True))
    quiver = WeightedQuiver(vertices, arrows)

    twists = {}
    for name in ("a", "b", "g"):
        twists[name] = GaloisElement(level, xi[name] if level == 2 else 0)
    special_mu = {}
    for v in loops:
        exp, mu_name = _LOOP_DATA[k][v]
        twists["s%s" % v] = GaloisElement(level, exp if level == 2 else 0)
        if mu_name == "1":
            special_mu["s%s" % v] = datum.one()
        elif mu_name == "u":
            special_mu["s%s" % v] = datum.u()
        else:
            special_mu["s%s" % v] = datum.from_scalar(datum.c)
    alg = ModulatedAlgebra(datum, quiver, ModulatingFunction(twists),
                           special_mu=special_mu)
    relations = [
        alg.path_element(["a", "b"], [0, 0, 0]),
        alg.path_element(["b", "g"], [0, 0, 0]),
        alg.path_element(["g", "a"], [0, 0, 0]),
    ]
    return BlockPresentation("clannish", k, xi, alg, relations)
