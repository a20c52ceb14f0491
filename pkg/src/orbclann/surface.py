"""Triangulated surfaces with weighted orbifold points.

An input document lists the arcs of a triangulated surface (pending arcs
carry an orbifold weight in {1, 4}), its boundary segments, and its
triangles as ordered edge triples.  From a validated triangulation this
module derives:

* the arrow quiver induced by counterclockwise succession inside each
  triangle (:func:`quiver_bar`);
* the mod-2 chain complex of the triangulation with its cocycles,
  coboundaries and first cohomology (:func:`chain_complex`,
  :func:`cocycles`, :func:`h1`, :func:`cohomologous`);
* the weighted quiver, with a doubled arrow between equal-weight pending
  neighbours (:func:`weighted_quiver`);
* the modulated algebra with its cyclic potential (:func:`build_species`)
  and the special-loop presentation with per-loop quadratics
  (:func:`build_clannish`), each in two modes: ``"arbitrary"`` (weights
  used as given) and ``"constant4"`` (all orbifold weights 4, halved
  weights, twist data independent of the cocycle);
* the decomposition into catalog triangle algebras with outlet matching
  (:func:`block_decompose`) and the reassembly of the species or the
  special-loop presentation from those catalog copies
  (:func:`glue_species`, :func:`glue_clannish`).

Orientation is an input convention: each triangle lists its three sides
counterclockwise, and every ordered pair of arc sides (i, j) with j the
counterclockwise successor of i contributes one arrow i -> j.  No arrow
touches a boundary segment.  In a triangle with two pending sides the
first-listed pending side is the tail of the connecting arrow; flipping
:data:`FIRST_PENDING_IS_TAIL` exchanges the two roles, which produces an
isomorphic algebra (swap the doubled pair and relabel).
"""

import json
import os
from dataclasses import dataclass
from math import gcd, isqrt
from typing import Dict, List, NamedTuple, Optional, Tuple

from . import blocks as _blocks
from .galois import GaloisDatum, GaloisElement, LevelMismatch
from .pathalg import (
    Arrow,
    ModulatedAlgebra,
    ModulatingFunction,
    Potential,
    WeightedQuiver,
    jacobian_relations,
    normality_check,
    saturate_quotient,
)

__all__ = [
    "Arc",
    "BlockAssignment",
    "BlockDecomposition",
    "ChainComplexData",
    "ClannishConditionViolation",
    "ClannishPresentation",
    "CocycleViolation",
    "EdgeIncidenceViolation",
    "ExcludedSurface",
    "FIRST_PENDING_IS_TAIL",
    "ModeMismatch",
    "PendingArcInTwoTriangles",
    "QuiverBar",
    "SpeciesData",
    "SurfaceError",
    "ThreeOrbifoldTriangle",
    "Triangle",
    "Triangulation",
    "block_decompose",
    "build_clannish",
    "build_species",
    "chain_complex",
    "cocycles",
    "cohomologous",
    "glue_clannish",
    "glue_species",
    "h1",
    "load_triangulation",
    "quiver_bar",
    "quiver_dot",
    "weighted_quiver",
]

MODES = ("arbitrary", "constant4")

#: Convention flag for the arrow between the two pending sides of a
#: twice-orbifolded triangle.  True: the first-listed pending side is the
#: arrow's tail.  False: the roles of the two pending sides are exchanged.
FIRST_PENDING_IS_TAIL = True


class SurfaceError(Exception):
    """Base class for triangulated-surface errors."""


class EdgeIncidenceViolation(SurfaceError):
    """An edge occurs in the wrong number of triangles, or twice in one."""


class PendingArcInTwoTriangles(SurfaceError):
    """A pending arc must lie in exactly one triangle."""


class ThreeOrbifoldTriangle(SurfaceError):
    """A triangle may contain at most two pending arcs."""


class ExcludedSurface(SurfaceError):
    """The surface is one of the small cases the construction excludes."""


class CocycleViolation(SurfaceError):
    """Arrow values fail the per-triangle sum condition over F_2."""


class ModeMismatch(SurfaceError):
    """Weights, datum and construction mode do not fit together."""


class ClannishConditionViolation(SurfaceError):
    """A special-loop presentation fails its structural conditions."""


# ------------------------------------------------------------- triangulation


@dataclass(frozen=True)
class Arc:
    ident: str
    pending: bool = False
    weight: Optional[int] = None


@dataclass(frozen=True)
class Triangle:
    edges: Tuple[str, str, str]
    interior: bool


@dataclass(frozen=True)
class Triangulation:
    """A validated triangulated surface.

    ``kind`` is derived from the document: ``"unpunctured"`` when boundary
    segments are present, ``"once-punctured-closed"`` otherwise.  The
    optional ``cocycle`` and ``mode`` fields carry document defaults for
    the construction functions.
    """

    arcs: Tuple[Arc, ...]
    boundary: Tuple[str, ...]
    triangles: Tuple[Triangle, ...]
    kind: str
    cocycle: Optional[Dict[str, int]] = None
    mode: Optional[str] = None

    def arc_ids(self):
        return [a.ident for a in self.arcs]

    def arc(self, ident):
        for a in self.arcs:
            if a.ident == ident:
                return a
        raise KeyError(ident)

    def is_arc(self, ident):
        return any(a.ident == ident for a in self.arcs)

    def is_pending(self, ident):
        return any(a.ident == ident and a.pending for a in self.arcs)

    def pending_ids(self):
        return [a.ident for a in self.arcs if a.pending]

    def interior_indices(self):
        return [i for i, t in enumerate(self.triangles) if t.interior]

    def document_omega(self):
        """Orbifold weights stored in the document, possibly incomplete."""
        return {a.ident: a.weight for a in self.arcs
                if a.pending and a.weight is not None}


def _excluded(kind, n_boundary, n_pending, n_arcs, n_triangles):
    """Excluded-surface detection from counts; returns a reason or None.

    Small discs (up to three boundary segments, or one segment with one
    orbifold point) and once-punctured spheres with fewer than four
    orbifold points are excluded.  In practice these cases cannot even be
    written down in the input format — any attempt trips a structural
    check (a repeated triangle side, three pending sides, or no arcs at
    all) — so this count test is a second line of defence.
    """
    if kind == "unpunctured":
        euler = n_pending - n_arcs + n_triangles
        if euler == 1 and (n_boundary, n_pending) in (
            (1, 0), (2, 0), (3, 0), (1, 1)
        ):
            return (
                "unpunctured disc with %d boundary segment(s) and %d "
                "orbifold point(s) is excluded" % (n_boundary, n_pending)
            )
    else:
        euler = (1 + n_pending) - n_arcs + n_triangles
        if euler == 2 and n_pending < 4:
            return (
                "once-punctured sphere with %d orbifold point(s) is "
                "excluded (needs at least 4)" % n_pending
            )
    return None


def _parse_arc(entry) -> Arc:
    if isinstance(entry, str):
        return Arc(entry)
    ident = str(entry["id"])
    pending = bool(entry.get("pending", False))
    weight = entry.get("weight")
    if weight is not None:
        weight = int(weight)
        if not pending:
            raise ValueError("non-pending arc %r carries a weight" % ident)
        if weight not in (1, 4):
            raise ValueError("orbifold weight of %r must be 1 or 4" % ident)
    return Arc(ident, pending, weight)


def _parse_triangle(entry):
    if isinstance(entry, dict):
        edges = entry["edges"]
        flag = entry.get("interior")
    else:
        edges, flag = entry, None
    edges = tuple(str(e) for e in edges)
    if len(edges) != 3:
        raise ValueError("triangle %r does not have three sides" % (edges,))
    return edges, flag


def load_triangulation(document) -> Triangulation:
    """Validate a triangulation document (a parsed JSON mapping or a path).

    Raises:
        EdgeIncidenceViolation: wrong incidence counts, or a repeated edge
            inside one triangle (self-folded configurations are rejected).
        PendingArcInTwoTriangles: a pending arc shared by two triangles.
        ThreeOrbifoldTriangle: a triangle with three pending sides.
        ExcludedSurface: one of the small excluded cases, as detectable
            from arc/boundary/triangle counts.
        ValueError: malformed documents (unknown ids, bad flags, ...).
    """
    if isinstance(document, (str, os.PathLike)):
        with open(document, "r", encoding="utf-8") as fh:
            document = json.load(fh)
    arcs = tuple(_parse_arc(e) for e in document.get("arcs", []))
    if not arcs:
        raise ValueError("a triangulation needs at least one arc")
    seen = set()
    for a in arcs:
        if a.ident in seen:
            raise ValueError("duplicate arc id %r" % a.ident)
        seen.add(a.ident)
    boundary = tuple(str(b) for b in document.get("boundary", []))
    for b in boundary:
        if b in seen:
            raise ValueError("edge id %r is both arc and boundary" % b)
        seen.add(b)

    raw_triangles = document.get("triangles", [])
    if not raw_triangles:
        raise ValueError("a triangulation needs at least one triangle")
    arc_ids = {a.ident for a in arcs}
    pending_ids = {a.ident for a in arcs if a.pending}
    counts = {e: 0 for e in seen}
    triangles = []
    for entry in raw_triangles:
        edges, flag = _parse_triangle(entry)
        if len(set(edges)) != 3:
            raise EdgeIncidenceViolation(
                "triangle %r repeats an edge (self-folded sides are not "
                "supported)" % (edges,)
            )
        for e in edges:
            if e not in counts:
                raise ValueError("triangle references unknown edge %r" % e)
            counts[e] += 1
        n_pending = sum(1 for e in edges if e in pending_ids)
        if n_pending > 2:
            raise ThreeOrbifoldTriangle(
                "triangle %r has three pending sides" % (edges,)
            )
        interior = all(e in arc_ids for e in edges)
        if flag is not None and bool(flag) != interior:
            raise ValueError(
                "triangle %r flagged interior=%r but its sides say %r"
                % (edges, bool(flag), interior)
            )
        triangles.append(Triangle(edges, interior))

    for b in boundary:
        if counts[b] != 1:
            raise EdgeIncidenceViolation(
                "boundary segment %r lies in %d triangles, expected 1"
                % (b, counts[b])
            )
    kind = "unpunctured" if boundary else "once-punctured-closed"
    for a in arcs:
        n = counts[a.ident]
        if n == 0 or n > 2:
            raise EdgeIncidenceViolation(
                "arc %r lies in %d triangles, expected 1 or 2" % (a.ident, n)
            )
        if a.pending and n == 2:
            raise PendingArcInTwoTriangles(
                "pending arc %r lies in two triangles" % a.ident
            )
        if kind == "once-punctured-closed" and not a.pending and n != 2:
            raise EdgeIncidenceViolation(
                "closed surface: arc %r must be shared by two triangles"
                % a.ident
            )

    reason = _excluded(
        kind, len(boundary), len(pending_ids), len(arcs), len(triangles)
    )
    if reason is not None:
        raise ExcludedSurface(reason)

    cocycle = document.get("cocycle")
    if cocycle is not None:
        cocycle = {str(k): int(v) % 2 for k, v in cocycle.items()}
    mode = document.get("mode")
    if mode is not None and mode not in MODES:
        raise ValueError("unknown construction mode %r" % (mode,))
    tau = Triangulation(arcs, boundary, tuple(triangles), kind, cocycle, mode)
    if cocycle is not None:
        names = {a.name for a in quiver_bar(tau).arrows}
        if set(cocycle) != names:
            raise ValueError(
                "document cocycle keys %r do not match the quiver arrows %r"
                % (sorted(cocycle), sorted(names))
            )
    return tau


# -------------------------------------------------------------- arrow quiver


class QuiverBar(NamedTuple):
    """Arrows induced by counterclockwise succession, per triangle.

    ``triples`` holds each triangle's sides in normalized rotation (pending
    sides first, else lexicographic minimum first); ``names[i][j]`` is the
    arrow from side j to side j+1 (mod 3) of triangle i, or None when one
    of the two sides is a boundary segment.
    """

    arrows: Tuple[Arrow, ...]
    triples: Tuple[Tuple[str, str, str], ...]
    names: Tuple[Tuple[Optional[str], Optional[str], Optional[str]], ...]


def _normalized_triple(tau: Triangulation, edges):
    pending = [e in set(tau.pending_ids()) for e in edges]
    n_pending = sum(pending)
    if n_pending == 2:
        for r in range(3):
            rot = edges[r:] + edges[:r]
            if tau.is_pending(rot[0]) and tau.is_pending(rot[1]):
                break
        if not FIRST_PENDING_IS_TAIL:
            rot = (rot[1], rot[0], rot[2])
        return tuple(rot)
    if n_pending == 1:
        r = pending.index(True)
        return tuple(edges[r:] + edges[:r])
    r = min(range(3), key=lambda i: edges[i])
    return tuple(edges[r:] + edges[:r])


def quiver_bar(tau: Triangulation) -> QuiverBar:
    """One arrow i -> j per triangle side i with arc successor j."""
    triples = tuple(_normalized_triple(tau, t.edges) for t in tau.triangles)
    planned = []
    for i, triple in enumerate(triples):
        for j in range(3):
            tail, head = triple[j], triple[(j + 1) % 3]
            if tau.is_arc(tail) and tau.is_arc(head):
                planned.append((i, j, tail, head))
    base_count: Dict[str, int] = {}
    for _, _, tail, head in planned:
        name = "%s_%s" % (tail, head)
        base_count[name] = base_count.get(name, 0) + 1
    arrows = []
    names = [[None, None, None] for _ in triples]
    for i, j, tail, head in planned:
        name = "%s_%s" % (tail, head)
        if base_count[name] > 1:
            name = "%s@%d" % (name, i)
        arrows.append(Arrow(name, tail, head))
        names[i][j] = name
    return QuiverBar(
        tuple(arrows), triples, tuple(tuple(row) for row in names)
    )


# ------------------------------------------------------ mod-2 linear algebra


def _f2_rref(rows):
    """Row-reduce a 0/1 matrix in place over F_2; returns (rows, pivots)."""
    rows = [list(r) for r in rows]
    pivots = []
    rank = 0
    ncols = len(rows[0]) if rows else 0
    for col in range(ncols):
        pivot = next(
            (i for i in range(rank, len(rows)) if rows[i][col]), None
        )
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        for i in range(len(rows)):
            if i != rank and rows[i][col]:
                rows[i] = [x ^ y for x, y in zip(rows[i], rows[rank])]
        pivots.append(col)
        rank += 1
    return rows[:rank], pivots


def _f2_nullspace(rows, ncols):
    rref, pivots = _f2_rref(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        vec = [0] * ncols
        vec[f] = 1
        for row, piv in zip(rref, pivots):
            if row[f]:
                vec[piv] = 1
        basis.append(vec)
    return basis


def _f2_in_span(rows, vec):
    rref, pivots = _f2_rref(rows)
    vec = list(vec)
    for row, piv in zip(rref, pivots):
        if vec[piv]:
            vec = [x ^ y for x, y in zip(vec, row)]
    return not any(vec)


class ChainComplexData(NamedTuple):
    """Bases and boundary matrices of the mod-2 complex of a triangulation.

    ``d1`` has one row per arc and one column per arrow (head plus tail);
    ``d2`` has one row per arrow and one column per interior triangle (the
    three arrows of the triangle).  Both are 0/1 row lists, and the
    composite d1 * d2 vanishes.
    """

    arcs: Tuple[str, ...]
    arrows: Tuple[str, ...]
    faces: Tuple[int, ...]
    d1: Tuple[Tuple[int, ...], ...]
    d2: Tuple[Tuple[int, ...], ...]


def chain_complex(tau: Triangulation) -> ChainComplexData:
    qb = quiver_bar(tau)
    arc_list = tuple(tau.arc_ids())
    arc_index = {a: i for i, a in enumerate(arc_list)}
    arrow_list = tuple(a.name for a in qb.arrows)
    arrow_index = {n: i for i, n in enumerate(arrow_list)}
    faces = tuple(tau.interior_indices())
    d1 = [[0] * len(arrow_list) for _ in arc_list]
    for j, arrow in enumerate(qb.arrows):
        d1[arc_index[arrow.head]][j] ^= 1
        d1[arc_index[arrow.tail]][j] ^= 1
    d2 = [[0] * len(faces) for _ in arrow_list]
    for col, tri_idx in enumerate(faces):
        for name in qb.names[tri_idx]:
            d2[arrow_index[name]][col] ^= 1
    return ChainComplexData(
        arc_list,
        arrow_list,
        faces,
        tuple(tuple(r) for r in d1),
        tuple(tuple(r) for r in d2),
    )


def _coboundary_rows(data: ChainComplexData):
    """Spanning set of the coboundary space: one row per arc."""
    return [list(row) for row in data.d1]


def _cocycle_rows(data: ChainComplexData):
    """Constraint matrix whose kernel is the cocycle space."""
    return [
        [data.d2[j][col] for j in range(len(data.arrows))]
        for col in range(len(data.faces))
    ]


def cocycles(tau: Triangulation) -> List[Dict[str, int]]:
    """A basis of the space of arrow assignments with zero triangle sums."""
    data = chain_complex(tau)
    basis = _f2_nullspace(_cocycle_rows(data), len(data.arrows))
    return [
        {name: vec[j] for j, name in enumerate(data.arrows)}
        for vec in basis
    ]


def h1(tau: Triangulation):
    """Dimension of the first cohomology and coset representatives."""
    data = chain_complex(tau)
    z_basis = _f2_nullspace(_cocycle_rows(data), len(data.arrows))
    b_rows = _coboundary_rows(data)
    b_rref, _ = _f2_rref(b_rows)
    reps = []
    chosen = [list(r) for r in b_rref]
    for vec in z_basis:
        if _f2_in_span(chosen, vec):
            continue
        reps.append({name: vec[j] for j, name in enumerate(data.arrows)})
        chosen.append(list(vec))
    return len(reps), reps


def _as_vector(data: ChainComplexData, xi: Dict[str, int]):
    if set(xi) != set(data.arrows):
        raise ValueError(
            "cocycle keys %r do not match the quiver arrows"
            % (sorted(xi),)
        )
    return [int(xi[name]) % 2 for name in data.arrows]


def cohomologous(tau: Triangulation, xi1, xi2) -> bool:
    """Whether two cocycles differ by a coboundary."""
    data = chain_complex(tau)
    v1, v2 = _as_vector(data, xi1), _as_vector(data, xi2)
    for v in (v1, v2):
        for col in range(len(data.faces)):
            s = sum(v[j] for j in range(len(data.arrows)) if data.d2[j][col])
            if s % 2:
                raise CocycleViolation("argument is not a cocycle")
    diff = [a ^ b for a, b in zip(v1, v2)]
    return _f2_in_span(_coboundary_rows(data), diff)


# ---------------------------------------------------------- weighted quiver


def _resolve_omega(tau: Triangulation, omega):
    pending = tau.pending_ids()
    if omega is None:
        omega = tau.document_omega()
    omega = {str(k): int(v) for k, v in omega.items()}
    missing = [k for k in pending if k not in omega]
    if missing:
        raise ValueError("missing orbifold weights for %r" % (missing,))
    extra = [k for k in omega if k not in pending]
    if extra:
        raise ValueError("weights given for non-pending edges %r" % (extra,))
    for k, w in omega.items():
        if w not in (1, 4):
            raise ValueError("orbifold weight of %r must be 1 or 4" % k)
    return omega


def _weight_map(tau: Triangulation, omega, mode):
    if mode == "arbitrary":
        return {
            a.ident: omega[a.ident] if a.pending else 2 for a in tau.arcs
        }
    return {a.ident: 2 if a.pending else 1 for a in tau.arcs}


def _check_mode(tau, omega, mode):
    if mode not in MODES:
        raise ValueError("unknown construction mode %r" % (mode,))
    if mode == "constant4":
        bad = [k for k, w in omega.items() if w != 4]
        if bad:
            raise ModeMismatch(
                "constant-weight mode needs weight 4 everywhere; %r is not"
                % (bad,)
            )


def _check_datum(tau, omega, mode, datum: GaloisDatum):
    if mode == "constant4":
        allowed = (2,) if tau.pending_ids() else (1, 2)
        if datum.degree not in allowed:
            raise ModeMismatch(
                "constant-weight mode needs a datum of degree %s, got %d"
                % ("/".join(str(d) for d in allowed), datum.degree)
            )
        return
    if any(w == 4 for w in omega.values()):
        if datum.degree != 4:
            raise ModeMismatch(
                "a weight-4 orbifold point needs a degree-4 datum, got %d"
                % datum.degree
            )
    elif datum.degree not in (2, 4):
        raise ModeMismatch(
            "the construction needs a datum of degree 2 or 4, got %d"
            % datum.degree
        )


class _TrianglePlan(NamedTuple):
    index: int
    interior: bool
    block: int
    vmap: Dict[str, str]             # catalog vertex "1"/"2"/"3" -> edge id
    roles: Dict[str, Optional[str]]  # catalog arrow label -> arrow name
    doubled: bool


def _plan_triangles(tau, omega, mode, qb: QuiverBar) -> List[_TrianglePlan]:
    wmap = _weight_map(tau, omega, mode)
    const = mode == "constant4"
    plans = []
    for i, tri in enumerate(tau.triangles):
        triple, names = qb.triples[i], qb.names[i]
        pend = [tau.is_pending(e) for e in triple]
        if sum(pend) == 2:
            k1, k2, base = triple
            vmap = {"3": k1, "2": k2, "1": base}
            doubled = wmap[k1] == wmap[k2]
            if const:
                block = 10
            elif doubled:
                block = 4 if omega[k1] == 1 else 5
            else:
                block = 6 if omega[k1] == 1 else 7
            roles = {"a": names[1], "g": names[2]}
            if doubled:
                roles["b0"] = names[0]
                roles["b1"] = None if names[0] is None else names[0] + "+"
            else:
                roles["b"] = names[0]
        else:
            vmap = {"1": triple[0], "3": triple[1], "2": triple[2]}
            roles = {"g": names[0], "b": names[1], "a": names[2]}
            doubled = False
            if sum(pend) == 1:
                block = 9 if const else (2 if omega[triple[0]] == 1 else 3)
            else:
                block = 8 if const else 1
        plans.append(
            _TrianglePlan(i, tri.interior, block, vmap, roles, doubled)
        )
    return plans


def weighted_quiver(tau: Triangulation, omega=None,
                    mode="arbitrary") -> WeightedQuiver:
    """Vertex weights on the arcs plus doubled pending-pair arrows.

    The second member of a doubled pair is named after the first with a
    trailing ``+``.
    """
    omega = _resolve_omega(tau, omega)
    _check_mode(tau, omega, mode)
    qb = quiver_bar(tau)
    plans = _plan_triangles(tau, omega, mode, qb)
    wmap = _weight_map(tau, omega, mode)
    arrows = []
    for plan in plans:
        for j, name in enumerate(qb.names[plan.index]):
            if name is None:
                continue
            triple = qb.triples[plan.index]
            tail, head = triple[j], triple[(j + 1) % 3]
            arrows.append(Arrow(name, tail, head))
            if plan.doubled and j == 0:
                arrows.append(Arrow(name + "+", tail, head))
    return WeightedQuiver([(a, wmap[a]) for a in tau.arc_ids()], arrows)


def _resolve_cocycle(tau, qb: QuiverBar, xi, enforce=True):
    names = [a.name for a in qb.arrows]
    if xi is None:
        xi = tau.cocycle
    if xi is None:
        xi = {n: 0 for n in names}
    else:
        xi = {str(k): int(v) % 2 for k, v in xi.items()}
        if set(xi) != set(names):
            raise ValueError(
                "cocycle keys %r do not match the quiver arrows %r"
                % (sorted(xi), sorted(names))
            )
    if enforce:
        for i in tau.interior_indices():
            total = sum(xi[n] for n in qb.names[i])
            if total % 2:
                raise CocycleViolation(
                    "arrow values on triangle %r sum to 1 mod 2"
                    % (tau.triangles[i].edges,)
                )
    return xi


def _twists(alg_quiver: WeightedQuiver, plans, xi):
    out = {}
    for plan in plans:
        for label, name in plan.roles.items():
            if name is None:
                continue
            arrow = alg_quiver.arrow(name)
            g = gcd(
                alg_quiver.weight(arrow.tail), alg_quiver.weight(arrow.head)
            )
            exp = xi[name[:-1] if label == "b1" else name]
            if label == "b1":
                exp += g // 2
            out[name] = GaloisElement(g, exp)
    return out


def _potential_terms(alg: ModulatedAlgebra, plans):
    total = alg.zero()
    for plan in plans:
        if not plan.interior:
            continue
        r = plan.roles
        if not plan.doubled:
            total = total + alg.path_element(
                [r["a"], r["b"], r["g"]], [0, 0, 0, 0]
            )
        elif plan.block == 4:
            # the second component passes the top vertex's level generator
            total = total + alg.path_element(
                [r["b0"], r["g"], r["a"]], [0, 0, 0, 0]
            ) + alg.path_element([r["b1"], r["g"], r["a"]], [0, 0, 1, 0])
        else:
            total = total + alg.path_element(
                [r["a"], r["b0"], r["g"]], [0, 0, 0, 0]
            ) + alg.path_element([r["a"], r["b1"], r["g"]], [0, 0, 0, 0])
    return total


class SpeciesData:
    """Modulated algebra, cyclic potential and derivative relations."""

    def __init__(self, triangulation, omega, xi, mode, algebra, potential,
                 relations, bar, doubled):
        self.triangulation = triangulation
        self.omega = dict(omega)
        self.xi = dict(xi)
        self.mode = mode
        self.algebra = algebra
        self.potential = potential
        self.relations = list(relations)
        self.bar = bar
        self.doubled = dict(doubled)
        self._quotient = None

    def quotient(self, lmax=None):
        """Saturated finite-dimensional quotient by the derivative ideal.

        Raises pathalg.SaturationBoundExceeded when the quotient is not
        finite-dimensional (which happens for genuinely infinite cases,
        e.g. cyclic gluings without relations).
        """
        if self._quotient is None or lmax is not None:
            q = saturate_quotient(
                self.algebra, self.relations, mode="jacobian", lmax=lmax
            )
            if lmax is not None:
                return q
            self._quotient = q
        return self._quotient

    def relation(self, arrow_name):
        for rel in self.relations:
            if rel.arrow == arrow_name:
                return rel.element
        raise KeyError(arrow_name)

    def __repr__(self):
        return "SpeciesData(%d arcs, mode=%s)" % (
            len(self.triangulation.arcs), self.mode
        )


def build_species(tau: Triangulation, datum: GaloisDatum, omega=None,
                  xi=None, mode="arbitrary") -> SpeciesData:
    """The modulated algebra with cyclic potential of a triangulation.

    Twists follow the three-case rule: identity whenever an endpoint has
    weight 1; the order-2 automorphism to the power of the arrow's cocycle
    value when both endpoints have weight at least 2 and their product is
    below 16; and the two lifts (exponents l and l+2, l the cocycle value)
    on a doubled pair between weight-4 endpoints.  In constant-weight mode
    the cocycle is ignored: every twist is the identity except on the
    second member of a doubled pair, which carries the order-2
    automorphism.

    The potential is a sum over interior triangles: a plain 3-cycle,
    except on a doubled pair, which contributes both components — with the
    base vertex's level generator inserted into the second component when
    the orbifold weights are 1.
    """
    omega = _resolve_omega(tau, omega)
    mode = mode or "arbitrary"
    _check_mode(tau, omega, mode)
    _check_datum(tau, omega, mode, datum)
    qb = quiver_bar(tau)
    if mode == "constant4":
        xi = {a.name: 0 for a in qb.arrows}
    else:
        xi = _resolve_cocycle(tau, qb, xi)
    quiver = weighted_quiver(tau, omega, mode)
    plans = _plan_triangles(tau, omega, mode, qb)
    alg = ModulatedAlgebra(
        datum, quiver, ModulatingFunction(_twists(quiver, plans, xi))
    )
    potential = Potential(_potential_terms(alg, plans))
    relations = jacobian_relations(potential)
    doubled = {
        plan.roles["b0"]: plan.roles["b1"]
        for plan in plans
        if plan.doubled and plan.roles["b0"] is not None
    }
    return SpeciesData(
        tau, omega, xi, mode, alg, potential, relations, qb, doubled
    )


# ------------------------------------------------- special-loop presentation


class ClannishPresentation:
    """Uniform-weight quiver with special loops, quadratics and relations."""

    def __init__(self, triangulation, omega, xi, mode, algebra,
                 zero_relations, special_loops):
        self.triangulation = triangulation
        self.omega = dict(omega)
        self.xi = dict(xi)
        self.mode = mode
        self.algebra = algebra
        self.zero_relations = list(zero_relations)
        self.special_loops = tuple(special_loops)
        self._quotient = None

    def quotient(self, lmax=None):
        if self._quotient is None or lmax is not None:
            q = saturate_quotient(
                self.algebra, self.zero_relations, mode="clannish", lmax=lmax
            )
            if lmax is not None:
                return q
            self._quotient = q
        return self._quotient

    def quadratic_constant(self, loop_name):
        return self.algebra.special_mu[loop_name]

    def __repr__(self):
        return "ClannishPresentation(%d arcs, %d loops, mode=%s)" % (
            len(self.triangulation.arcs), len(self.special_loops), self.mode
        )


def _loop_name(arc_id):
    return "s_%s" % arc_id


def _scalar_pow(x, e, one):
    acc = one
    sq = x
    while e:
        if e & 1:
            acc = acc * sq
        sq = sq * sq
        e >>= 1
    return acc


def _rational_sqrt(a):
    from fractions import Fraction

    a = Fraction(a)
    return Fraction(isqrt(a.numerator), isqrt(a.denominator))


def _square_in_level(datum: GaloisDatum, level, mu):
    """Exact squareness of ``mu`` inside the level-``level`` subfield."""
    base = datum.base
    if level == 1:
        return base.is_square(mu.coords[0])
    if level != 2:
        raise LevelMismatch("squareness test implemented for levels 1 and 2")
    if base.kind == "prime":
        e = (base.p * base.p - 1) // 2
        return _scalar_pow(mu, e, datum.one()) == datum.one()
    step = datum.degree // 2
    x, y = mu.coords[0], mu.coords[step]
    c = datum.c
    if y == base.zero():
        return base.is_square(x) or base.is_square(
            base.mul(x, base.inv(c))
        )
    norm = base.sub(base.mul(x, x), base.mul(c, base.mul(y, y)))
    if not base.is_square(norm):
        return False
    root = _rational_sqrt(norm)
    half = base.inv(base.from_int(2))
    for n in (root, base.neg(root)):
        t = base.mul(base.add(x, n), half)
        if t != base.zero() and base.is_square(t):
            return True
    return False


def _verify_clannish(alg: ModulatedAlgebra, zero_relations):
    """Structural conditions of a special-loop presentation.

    Per vertex at most two arrows in and two out; per ordinary arrow at
    most one composable continuation on either side outside the zero
    relations, which never start or end with a special loop; and each
    quadratic is normal, has nonzero constant term, and falls into one of
    the two certified semisimple situations (order-2 twist with constant
    one, or identity twist with a non-square constant).
    """
    quiver = alg.quiver
    for v in quiver.vertex_order:
        if len(quiver.arrows_into(v)) > 2 or len(quiver.arrows_from(v)) > 2:
            raise ClannishConditionViolation(
                "vertex %r has more than two arrows on one side" % v
            )
        loops = [a for a in quiver.special_loops() if a.tail == v]
        if len(loops) > 1:
            raise ClannishConditionViolation(
                "vertex %r carries two special loops" % v
            )
    in_z = set()
    for rel in zero_relations:
        paths = list(rel.terms)
        if len(paths) != 1:
            raise ClannishConditionViolation(
                "zero relation is not a single path"
            )
        path = paths[0]
        if len(path.arrows) < 2 or any(e != 0 for e in path.exps):
            raise ClannishConditionViolation(
                "zero relation is not a plain path of length >= 2"
            )
        if any(quiver.arrow(a).special for a in path.arrows):
            raise ClannishConditionViolation(
                "zero relation touches a special loop"
            )
        in_z.add(path.arrows)
    for a in quiver.ordinary_arrows():
        before = [
            b.name for b in quiver.arrows_from(a.head)
            if (b.name, a.name) not in in_z
        ]
        after = [
            b.name for b in quiver.arrows_into(a.tail)
            if (a.name, b.name) not in in_z
        ]
        if len(before) > 1 or len(after) > 1:
            raise ClannishConditionViolation(
                "arrow %r has more than one continuation outside the zero "
                "relations" % a.name
            )
    datum = alg.datum
    for loop in quiver.special_loops():
        level = quiver.weight(loop.tail)
        sigma = alg.modulation.of(loop.name)
        mu = alg.special_mu[loop.name]
        if mu.is_zero():
            raise ClannishConditionViolation(
                "quadratic of %r has zero constant term" % loop.name
            )
        if not normality_check(datum, level, mu, sigma):
            raise ClannishConditionViolation(
                "quadratic of %r is not normal" % loop.name
            )
        if sigma.is_identity():
            ok = not _square_in_level(datum, level, mu)
        else:
            ok = mu == datum.one()
        if not ok:
            raise ClannishConditionViolation(
                "quadratic of %r is outside the certified semisimple "
                "situations" % loop.name
            )


def build_clannish(tau: Triangulation, datum: GaloisDatum, omega=None,
                   xi=None, mode="arbitrary",
                   enforce_cocycle=True) -> ClannishPresentation:
    """The special-loop presentation of a triangulation.

    All vertices carry the level-2 subfield (arbitrary mode) or the base
    field (constant-weight mode).  Each pending arc contributes one
    special loop: twist the order-2 automorphism and constant 1 for weight
    1, identity twist and the level generator for weight 4, identity twist
    and the generator's square in constant-weight mode.  The zero
    relations are the three length-2 compositions inside each interior
    triangle.

    ``enforce_cocycle=False`` skips the per-triangle sum condition on the
    arrow values; the result is still a valid special-loop presentation.
    """
    omega = _resolve_omega(tau, omega)
    mode = mode or "arbitrary"
    _check_mode(tau, omega, mode)
    _check_datum(tau, omega, mode, datum)
    qb = quiver_bar(tau)
    const = mode == "constant4"
    if const:
        xi = {a.name: 0 for a in qb.arrows}
    else:
        xi = _resolve_cocycle(tau, qb, xi, enforce=enforce_cocycle)
    level = 1 if const else 2
    arrows = [Arrow(a.name, a.tail, a.head) for a in qb.arrows]
    loops = []
    for k in tau.pending_ids():
        loops.append(Arrow(_loop_name(k), k, k, True))
    quiver = WeightedQuiver(
        [(a, level) for a in tau.arc_ids()], arrows + loops
    )
    twists = {}
    for a in qb.arrows:
        twists[a.name] = GaloisElement(level, xi[a.name] if level == 2 else 0)
    special_mu = {}
    for k in tau.pending_ids():
        name = _loop_name(k)
        if const:
            twists[name] = GaloisElement(1, 0)
            special_mu[name] = datum.from_scalar(datum.c)
        elif omega[k] == 1:
            twists[name] = GaloisElement(2, 1)
            special_mu[name] = datum.one()
        else:
            twists[name] = GaloisElement(2, 0)
            special_mu[name] = datum.u()
    alg = ModulatedAlgebra(
        datum, quiver, ModulatingFunction(twists), special_mu=special_mu
    )
    relations = []
    for i in tau.interior_indices():
        n0, n1, n2 = qb.names[i]
        for pair in ((n0, n2), (n2, n1), (n1, n0)):
            relations.append(alg.path_element(list(pair), [0, 0, 0]))
    _verify_clannish(alg, relations)
    return ClannishPresentation(
        tau, omega, xi, mode, alg, relations, [a.name for a in loops]
    )


# --------------------------------------------------------- block structure


class BlockAssignment(NamedTuple):
    """One triangle as a copy of a catalog block.

    ``vertex_arcs`` maps the block's vertices to edge ids, with None for a
    deleted outlet (a boundary segment); ``arrow_names`` maps the block's
    arrow labels to quiver arrow names, with None for arrows lost to a
    deletion; ``xi_block`` is an admissible arrow-value triple for the
    block, padding unconstrained entries to an even sum.
    """

    triangle_index: int
    block_index: int
    vertex_arcs: Dict[str, Optional[str]]
    arrow_names: Dict[str, Optional[str]]
    xi_block: Dict[str, int]


class BlockDecomposition(NamedTuple):
    assignments: Tuple[BlockAssignment, ...]
    matched: Tuple[Tuple[Tuple[int, str], Tuple[int, str], str], ...]
    unmatched: Tuple[Tuple[int, str, str], ...]
    deleted: Tuple[Tuple[int, str, str], ...]


def _pad_cocycle(plan: _TrianglePlan, xi):
    vals = {}
    for label, name in plan.roles.items():
        if label == "b1" or name is None:
            continue
        key = "b" if label == "b0" else label
        vals[key] = xi[name]
    free = [key for key in ("a", "b", "g") if key not in vals]
    total = sum(vals.values()) % 2
    for j, key in enumerate(free):
        vals[key] = total if j == 0 else 0
    if sum(vals.values()) % 2:
        raise CocycleViolation(
            "triangle %d carries arrow values with odd sum"
            % plan.index
        )
    return vals


def block_decompose(tau: Triangulation, omega=None, mode="arbitrary",
                    xi=None) -> BlockDecomposition:
    """Each triangle as a catalog block copy, with outlet matching.

    Outlets are the non-pending vertex positions.  An arc shared by two
    triangles is a matched outlet pair; an arc in a single triangle is a
    kept unmatched outlet; a boundary segment is a deleted outlet, and the
    block arrows incident to it are absent from the surface quiver.
    """
    omega = _resolve_omega(tau, omega)
    _check_mode(tau, omega, mode)
    qb = quiver_bar(tau)
    if mode == "constant4":
        xi = {a.name: 0 for a in qb.arrows}
    else:
        xi = _resolve_cocycle(tau, qb, xi)
    plans = _plan_triangles(tau, omega, mode, qb)
    assignments = []
    outlet_sites: Dict[str, List[Tuple[int, str]]] = {}
    deleted = []
    for plan in plans:
        vertex_arcs = {}
        for pos, edge in plan.vmap.items():
            if tau.is_arc(edge):
                vertex_arcs[pos] = edge
                if not tau.is_pending(edge):
                    outlet_sites.setdefault(edge, []).append(
                        (plan.index, pos)
                    )
            else:
                vertex_arcs[pos] = None
                deleted.append((plan.index, pos, edge))
        assignments.append(
            BlockAssignment(
                plan.index,
                plan.block,
                vertex_arcs,
                dict(plan.roles),
                _pad_cocycle(plan, xi),
            )
        )
    matched = []
    unmatched = []
    for arc in tau.arc_ids():
        sites = outlet_sites.get(arc, [])
        if len(sites) == 2:
            matched.append((sites[0], sites[1], arc))
        elif len(sites) == 1:
            unmatched.append((sites[0][0], sites[0][1], arc))
    return BlockDecomposition(
        tuple(assignments), tuple(matched), tuple(unmatched), tuple(deleted)
    )


def _glued_quiver_and_twists(tau, datum, decomp, factory):
    """Union of renamed block copies; returns (quiver, twists, copies)."""
    weights: Dict[str, int] = {}
    arrows = []
    twists = {}
    copies = []
    for asg in decomp.assignments:
        blk = factory(asg.block_index, datum, asg.xi_block)
        copies.append(blk)
        bq = blk.algebra.quiver
        for pos, arc in asg.vertex_arcs.items():
            if arc is None:
                continue
            w = bq.weight(pos)
            if weights.setdefault(arc, w) != w:
                raise AssertionError(
                    "inconsistent glued weight at arc %r" % arc
                )
        for label, surf_name in asg.arrow_names.items():
            if surf_name is None:
                continue
            block_arrow = bq.arrow(label)
            tail = asg.vertex_arcs[block_arrow.tail]
            head = asg.vertex_arcs[block_arrow.head]
            if tail is None or head is None:
                raise AssertionError(
                    "surviving arrow %r touches a deleted outlet" % surf_name
                )
            arrows.append(Arrow(surf_name, tail, head))
            twists[surf_name] = blk.algebra.modulation.of(block_arrow.name)
    return weights, arrows, twists, copies


def glue_species(tau: Triangulation, datum: GaloisDatum, omega=None,
                 xi=None, mode="arbitrary") -> SpeciesData:
    """Reassemble the species from catalog block copies.

    This is the gluing route: every triangle is instantiated as its
    catalog block over the shared datum, outlets are identified along
    shared arcs, deleted outlets drop their incident arrows, and potential
    terms that lost an arrow to a deletion are discarded.  The result is
    structurally identical to :func:`build_species` output.
    """
    omega = _resolve_omega(tau, omega)
    _check_mode(tau, omega, mode)
    _check_datum(tau, omega, mode, datum)
    qb = quiver_bar(tau)
    if mode == "constant4":
        xi_full = {a.name: 0 for a in qb.arrows}
    else:
        xi_full = _resolve_cocycle(tau, qb, xi)
    decomp = block_decompose(tau, omega, mode, xi_full)
    weights, arrows, twists, copies = _glued_quiver_and_twists(
        tau, datum, decomp, _blocks.jacobian_block
    )
    for arc in tau.arc_ids():
        weights.setdefault(arc, _weight_map(tau, omega, mode)[arc])
    quiver = WeightedQuiver(
        [(a, weights[a]) for a in tau.arc_ids()], arrows
    )
    alg = ModulatedAlgebra(datum, quiver, ModulatingFunction(twists))
    total = alg.zero()
    for asg, blk in zip(decomp.assignments, copies):
        rename = dict(asg.arrow_names)
        for path, coeff in blk.potential.element.terms.items():
            renamed = [rename.get(a) for a in path.arrows]
            if any(n is None for n in renamed):
                continue
            total = total + alg.path_element(
                renamed, list(path.exps), coeff
            )
    potential = Potential(total)
    relations = jacobian_relations(potential)
    doubled = {
        asg.arrow_names["b0"]: asg.arrow_names["b1"]
        for asg in decomp.assignments
        if "b0" in asg.arrow_names and asg.arrow_names["b0"] is not None
    }
    return SpeciesData(
        tau, omega, xi_full, mode, alg, potential, relations, qb, doubled
    )


def glue_clannish(tau: Triangulation, datum: GaloisDatum, omega=None,
                  xi=None, mode="arbitrary") -> ClannishPresentation:
    """Reassemble the special-loop presentation from catalog block copies."""
    omega = _resolve_omega(tau, omega)
    _check_mode(tau, omega, mode)
    _check_datum(tau, omega, mode, datum)
    qb = quiver_bar(tau)
    if mode == "constant4":
        xi_full = {a.name: 0 for a in qb.arrows}
    else:
        xi_full = _resolve_cocycle(tau, qb, xi)
    decomp = block_decompose(tau, omega, mode, xi_full)
    level = 1 if mode == "constant4" else 2
    arrows = []
    twists = {}
    special_mu = {}
    relation_data = []
    for asg in decomp.assignments:
        blk = _blocks.clannish_block(asg.block_index, datum, asg.xi_block)
        bq = blk.algebra.quiver
        rename = {}
        for label in ("a", "b", "g"):
            surf = asg.arrow_names.get(label)
            if label == "b" and "b0" in asg.arrow_names:
                # the loop presentation does not double arrows; the pair
                # collapses back onto the plain arrow name
                surf = asg.arrow_names["b0"]
            if surf is None:
                continue
            block_arrow = bq.arrow(label)
            tail = asg.vertex_arcs[block_arrow.tail]
            head = asg.vertex_arcs[block_arrow.head]
            arrows.append(Arrow(surf, tail, head))
            twists[surf] = blk.algebra.modulation.of(label)
            rename[label] = surf
        for loop in bq.special_loops():
            arc = asg.vertex_arcs[loop.tail]
            name = _loop_name(arc)
            arrows.append(Arrow(name, arc, arc, True))
            twists[name] = blk.algebra.modulation.of(loop.name)
            special_mu[name] = blk.algebra.special_mu[loop.name]
        for rel in blk.relations:
            path = next(iter(rel.terms))
            renamed = [rename.get(a) for a in path.arrows]
            if any(n is None for n in renamed):
                continue
            relation_data.append((renamed, list(path.exps)))
    quiver = WeightedQuiver(
        [(a, level) for a in tau.arc_ids()], arrows
    )
    alg = ModulatedAlgebra(
        datum, quiver, ModulatingFunction(twists), special_mu=special_mu
    )
    relations = [
        alg.path_element(names, exps) for names, exps in relation_data
    ]
    _verify_clannish(alg, relations)
    loops = [a.name for a in quiver.special_loops()]
    return ClannishPresentation(
        tau, omega, xi_full, mode, alg, relations, loops
    )


# ------------------------------------------------------------------ export


def quiver_dot(quiver: WeightedQuiver) -> str:
    """DOT rendering: vertices labeled with weights, special loops dashed."""
    lines = ["digraph quiver {"]
    for v in quiver.vertex_order:
        lines.append(
            '  "%s" [label="%s (%d)"];' % (v, v, quiver.weight(v))
        )
    for name in quiver.arrow_order:
        a = quiver.arrows[name]
        style = ', style="dashed"' if a.special else ""
        lines.append(
            '  "%s" -> "%s" [label="%s"%s];' % (a.tail, a.head, name, style)
        )
    lines.append("}")
    return "\n".join(lines)
