"""Finite-dimensional representations with semilinear arrow operators.

A representation assigns to every vertex a finite-dimensional vector space
over the base field together with the action of the vertex field's
generator, and to every arrow a base-linear operator from the tail space
to the head space.  The vertex-field structure is carried entirely by the
generator operator: at a level-2 vertex it plays the role of ``u`` (square
equal to ``c``), at a level-4 vertex the role of ``v`` (fourth power
``c``), and level-1 vertices need no operator at all.  Arrow operators are
semilinear: pushing the shared-subfield generator through an arrow
multiplies it by the eigenvalue attached to the arrow's twist, exactly
mirroring the rewriting the path algebra performs on decorated paths.

Relations are checked by evaluating algebra elements as block operators:
a decorated path composes arrow operators right to left with generator
powers inserted at the recorded slots.  Hom spaces are cut out by the
linear system demanding commutation with the generator actions and
intertwining of the arrow operators, assembled from Kronecker products;
everything downstream (isomorphism search, endomorphism-ring analysis,
indecomposability) runs on top of that system.
"""

from __future__ import annotations

import random
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

from .linalg import LinAlg
from .pathalg import AlgebraElement, ModulatedAlgebra, Relation

__all__ = [
    "AlgebraMismatch",
    "HomSpace",
    "RadicalAlgorithmUnsupported",
    "RepError",
    "Representation",
    "ValidationReport",
    "Verdict",
    "direct_sum",
    "end",
    "hom",
    "identity_hom",
    "is_indecomposable",
    "is_isomorphic",
    "projectives",
    "simples",
    "validate",
    "zero_representation",
]


class RepError(Exception):
    pass


class AlgebraMismatch(RepError):
    """Two representations do not live over the same algebra."""


class RadicalAlgorithmUnsupported(RepError):
    """No implemented method certifies the radical of this endomorphism ring."""


def _algebra_of(context) -> ModulatedAlgebra:
    if isinstance(context, ModulatedAlgebra):
        return context
    return context.algebra


def _relation_items(context):
    """(label, element) pairs for whatever relation attribute exists."""
    if isinstance(context, ModulatedAlgebra):
        return []
    rels = getattr(context, "relations", None)
    if rels is None:
        rels = getattr(context, "zero_relations", ())
    out = []
    for i, r in enumerate(rels):
        if isinstance(r, Relation):
            out.append((r.arrow, r.element))
        else:
            out.append(("#%d" % i, r))
    return out


# ---------------------------------------------------------- representation


class Representation:
    """Vertex spaces with generator actions and semilinear arrow operators.

    ``dims`` gives the base-field dimension of every vertex space;
    ``generators`` maps a vertex to the matrix acting as its field
    generator (omitted for level-1 vertices, where the identity is
    implied); ``maps`` sends an arrow name to its operator as a
    head-dim x tail-dim matrix, with missing arrows read as zero.
    Matrix values may be given as plain row lists; they are normalized
    into the exact linear-algebra backend on construction.
    """

    def __init__(self, algebra: ModulatedAlgebra, dims: Dict[str, int],
                 generators: Optional[Dict[str, object]] = None,
                 maps: Optional[Dict[str, object]] = None):
        self.algebra = algebra
        self.la = LinAlg(algebra.datum.base)
        self.dims = {str(v): int(n) for v, n in dims.items()}
        quiver = algebra.quiver
        self.generators = {}
        for v, g in (generators or {}).items():
            v = str(v)
            self.generators[v] = self._shaped(g, self.dim(v), self.dim(v))
        self.maps = {}
        for name, m in (maps or {}).items():
            name = str(name)
            if name in quiver.arrows:
                a = quiver.arrow(name)
                m = self._shaped(m, self.dim(a.head), self.dim(a.tail))
            self.maps[name] = m

    def _shaped(self, rows, nrows, ncols):
        if not isinstance(rows, list):
            return rows  # already backend-native (prime-field array)
        if not rows or not any(len(r) for r in rows):
            return self.la.zeros(nrows, ncols)
        return self.la.matrix(rows)

    @property
    def field(self):
        return self.algebra.datum.base

    @property
    def total_dim(self) -> int:
        return sum(self.dims.get(v, 0) for v in self.algebra.quiver.vertex_order)

    def dim(self, vertex) -> int:
        return self.dims.get(str(vertex), 0)

    def generator(self, vertex):
        vertex = str(vertex)
        n = self.dim(vertex)
        g = self.generators.get(vertex)
        if g is not None and n:
            return g
        # the level-1 subfield generator is the scalar c itself (a trivial
        # path wraps once around a weight-1 vertex), so the implied action
        # at such a vertex is c times the identity
        if self.algebra.vertex_level(vertex) == 1:
            c = self.algebra.datum.c
            if c is not None:
                return self.la.scale(c, self.la.identity(n))
        return self.la.identity(n)

    def _gen_power(self, vertex, k):
        out = self.la.identity(self.dim(vertex))
        if k:
            g = self.generator(vertex)
            for _ in range(k):
                out = self.la.matmul(out, g)
        return out

    def U(self, vertex):
        """The level-2 generator action at a vertex."""
        if self.algebra.vertex_level(str(vertex)) == 4:
            g = self.generator(vertex)
            return self.la.matmul(g, g)
        return self.generator(vertex)

    def V(self, vertex):
        """The level-4 generator action; only level-4 vertices have one."""
        if self.algebra.vertex_level(str(vertex)) != 4:
            raise RepError("vertex %r carries no level-4 structure" % (vertex,))
        return self.generator(vertex)

    def arrow(self, name):
        name = str(name)
        a = self.algebra.quiver.arrow(name)
        nh, nt = self.dim(a.head), self.dim(a.tail)
        m = self.maps.get(name)
        # a matrix with a zero side is necessarily zero; rebuilding it keeps
        # the nominal shape that a row-list representation cannot carry
        if m is None or nh == 0 or nt == 0:
            return self.la.zeros(nh, nt)
        return m

    def __eq__(self, other):
        if not isinstance(other, Representation):
            return NotImplemented
        if self.algebra != other.algebra or self.dims != other.dims:
            return False
        for v in self.algebra.quiver.vertex_order:
            if not self.la.equal(self.generator(v), other.generator(v)):
                return False
        for name in self.algebra.quiver.arrow_order:
            if not self.la.equal(self.arrow(name), other.arrow(name)):
                return False
        return True

    # -- operator evaluation

    def offsets(self):
        off = {}
        pos = 0
        for v in self.algebra.quiver.vertex_order:
            off[v] = pos
            pos += self.dim(v)
        return off, pos

    def path_operator(self, path):
        """The matrix of one decorated path, target-dim x source-dim."""
        quiver = self.algebra.quiver
        ns = self.dim(path.source)
        stops = [ns] + [self.dim(quiver.arrow(a).head) for a in path.arrows]
        if 0 in stops:
            return self.la.zeros(self.dim(path.target), ns)
        cur = self._gen_power(path.source, path.exps[-1])
        for r in range(len(path.arrows) - 1, -1, -1):
            name = path.arrows[r]
            cur = self.la.matmul(self.arrow(name), cur)
            if path.exps[r]:
                head = quiver.arrow(name).head
                cur = self.la.matmul(self._gen_power(head, path.exps[r]), cur)
        return cur

    def operator(self, x: AlgebraElement):
        """The block matrix of an algebra element on the total space."""
        if x.alg is not self.algebra and x.alg != self.algebra:
            raise AlgebraMismatch("element of a different algebra")
        la = self.la
        order = self.algebra.quiver.vertex_order
        blocks = {}
        for path, coeff in x.terms.items():
            piece = la.scale(coeff, self.path_operator(path))
            key = (path.target, path.source)
            if key in blocks:
                blocks[key] = la.add(blocks[key], piece)
            else:
                blocks[key] = piece
        rows = []
        for tgt in order:
            row = []
            for src in order:
                row.append(blocks.get(
                    (tgt, src), la.zeros(self.dim(tgt), self.dim(src))
                ))
            rows.append(la.hstack(row))
        return la.vstack(rows)

    # -- serialization

    def to_json(self) -> dict:
        fmt = self.field.format_scalar
        la = self.la

        def _dump(m):
            return [[fmt(a) for a in row] for row in la.to_lists(m)]

        return {
            "dims": {v: n for v, n in sorted(self.dims.items())},
            "generators": {
                v: _dump(g) for v, g in sorted(self.generators.items())
            },
            "arrows": {
                name: _dump(m) for name, m in sorted(self.maps.items())
            },
        }

    @classmethod
    def from_json(cls, context, doc: dict) -> "Representation":
        alg = _algebra_of(context)
        parse = alg.datum.base.parse_scalar
        dims = {str(v): int(n) for v, n in doc.get("dims", {}).items()}
        gens = {
            str(v): [[parse(str(a)) for a in row] for row in g]
            for v, g in doc.get("generators", {}).items()
        }
        maps = {
            str(k): [[parse(str(a)) for a in row] for row in m]
            for k, m in doc.get("arrows", {}).items()
        }
        return cls(alg, dims, gens, maps)


def zero_representation(context) -> Representation:
    alg = _algebra_of(context)
    return Representation(alg, {v: 0 for v in alg.quiver.vertex_order})


def _block_diag(la, A, B, shape_a, shape_b):
    ra, ca = shape_a
    rb, cb = shape_b
    if ra == 0 and rb == 0:
        return la.zeros(0, ca + cb)
    rows = []
    if ra:
        rows.append(la.hstack([A, la.zeros(ra, cb)]))
    if rb:
        rows.append(la.hstack([la.zeros(rb, ca), B]))
    return la.vstack(rows)


def direct_sum(M: Representation, N: Representation) -> Representation:
    if M.algebra is not N.algebra and M.algebra != N.algebra:
        raise AlgebraMismatch("summands live over different algebras")
    alg = M.algebra
    out = Representation(alg, {
        v: M.dim(v) + N.dim(v) for v in alg.quiver.vertex_order
    })
    for v in alg.quiver.vertex_order:
        if alg.vertex_level(v) > 1:
            n, m = M.dim(v), N.dim(v)
            out.generators[v] = _block_diag(
                out.la, M.generator(v), N.generator(v), (n, n), (m, m)
            )
    for name in alg.quiver.arrow_order:
        a = alg.quiver.arrow(name)
        out.maps[name] = _block_diag(
            out.la, M.arrow(name), N.arrow(name),
            (M.dim(a.head), M.dim(a.tail)),
            (N.dim(a.head), N.dim(a.tail)),
        )
    return out


# ------------------------------------------------------------- validation


class ValidationReport(NamedTuple):
    ok: bool
    violations: Tuple[str, ...]


def validate(M: Representation, context) -> ValidationReport:
    """Itemized structural check of a representation against a presentation.

    Never raises: every problem (shape, field action, semilinearity, loop
    quadratic, relation) is reported as one line of the returned report.
    """
    alg = _algebra_of(context)
    problems: List[str] = []
    if M.algebra is not alg and M.algebra != alg:
        return ValidationReport(False, ("different algebra",))
    la = M.la
    field = M.field
    datum = alg.datum
    quiver = alg.quiver

    shape_ok = {}
    for v in quiver.vertex_order:
        n = M.dim(v)
        d = alg.vertex_level(v)
        if n % d:
            problems.append(
                "shape: dim %d at vertex %s is not divisible by the vertex "
                "field degree %d" % (n, v, d)
            )
        g = M.generator(v)
        shape_ok[v] = la.shape(g) == (n, n)
        if not shape_ok[v]:
            problems.append(
                "shape: generator at vertex %s is not %dx%d" % (v, n, n)
            )
            continue
        want = la.identity(n)
        if datum.c is not None:
            want = la.scale(field.coerce(datum.c), want)
        power = la.identity(n)
        for _ in range(d):
            power = la.matmul(power, g)
        if not la.equal(power, want):
            problems.append(
                "field-action: generator at vertex %s does not satisfy "
                "z**%d = c" % (v, d)
            )

    for name in M.maps:
        if name not in quiver.arrows:
            problems.append("shape: operator for unknown arrow %r" % (name,))

    arrow_ok = {}
    for name in quiver.arrow_order:
        a = quiver.arrow(name)
        nh, nt = M.dim(a.head), M.dim(a.tail)
        stored = M.maps.get(name)
        if stored is None:
            arrow_ok[name] = True
        else:
            got = la.shape(stored)
            # an entryless matrix cannot always carry its nominal shape
            empty_ok = (nh == 0 or nt == 0) and (got[0] == 0 or got[1] == 0)
            arrow_ok[name] = got == (nh, nt) or empty_ok
        if not arrow_ok[name]:
            problems.append(
                "shape: operator of %s is not %dx%d" % (name, nh, nt)
            )
            continue
        if nh == 0 or nt == 0:
            continue
        if not (shape_ok[a.tail] and shape_ok[a.head]):
            continue
        X = M.arrow(name)
        g = alg.arrow_gcd(name)
        st = quiver.weight(a.tail) // g
        sh = quiver.weight(a.head) // g
        eig = datum.zeta_scalar_power(
            (datum.degree // g) * alg.modulation.of(name).exp
        )
        lhs = la.matmul(X, M._gen_power(a.tail, st))
        rhs = la.scale(eig, la.matmul(M._gen_power(a.head, sh), X))
        if not la.equal(lhs, rhs):
            problems.append(
                "semilinearity: operator of %s does not intertwine the "
                "field generators" % name
            )

    for name, mu in sorted((alg.special_mu or {}).items()):
        a = quiver.arrow(name)
        if not arrow_ok.get(name) or M.dim(a.tail) != M.dim(a.head):
            continue
        X = M.arrow(name)
        sq = la.matmul(X, X)
        want = M.operator(alg.embed_scalar(mu, a.tail))
        off, total = M.offsets()
        got = la.zeros(total, total)
        got = _place_block(la, got, sq, off[a.tail], off[a.tail])
        if not la.equal(got, want):
            problems.append(
                "quadratic: %s squared is not multiplication by its "
                "constant" % name
            )

    if all(shape_ok.values()) and all(arrow_ok.values()):
        for label, element in _relation_items(context):
            if element.is_zero():
                continue
            if not la.is_zero(M.operator(element)):
                problems.append("relation %s: nonzero action" % label)

    return ValidationReport(not problems, tuple(problems))


def _place_block(la, big, block, i0, j0):
    """Assemble a copy of ``big`` with ``block`` written at (i0, j0)."""
    rows = la.to_lists(big)
    sub = la.to_lists(block)
    for i, row in enumerate(sub):
        for j, a in enumerate(row):
            rows[i0 + i][j0 + j] = a
    return la.matrix(rows) if rows else big


# ------------------------------------------------------------- hom spaces


class HomSpace:
    """Solution space of the intertwining system between two representations.

    The basis consists of vertex-indexed matrix tuples; ``compose`` and
    ``coordinates`` make the endomorphism case a ring.
    """

    def __init__(self, source: Representation, target: Representation,
                 basis: List[Dict[str, object]]):
        self.source = source
        self.target = target
        self.basis = basis
        self._flat_matrix = None

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def element(self, coeffs: Sequence) -> Dict[str, object]:
        la = self.source.la
        field = self.source.field
        if len(coeffs) != len(self.basis):
            raise ValueError("need %d coefficients" % len(self.basis))
        out = {}
        for v in self.source.algebra.quiver.vertex_order:
            block = la.zeros(self.target.dim(v), self.source.dim(v))
            for c, f in zip(coeffs, self.basis):
                c = field.coerce(c)
                if c != field.zero():
                    block = la.add(block, la.scale(c, f[v]))
            out[v] = block
        return out

    def compose(self, f: Dict[str, object], g: Dict[str, object]):
        """The composite f after g, vertex by vertex."""
        la = self.source.la
        return {
            v: la.matmul(f[v], g[v])
            for v in self.source.algebra.quiver.vertex_order
        }

    def _flatten(self, f):
        la = self.source.la
        vec = []
        for v in self.source.algebra.quiver.vertex_order:
            for row in la.to_lists(f[v]):
                vec.extend(row)
        return vec

    def coordinates(self, f) -> Tuple:
        """Coefficients of f in the basis; raises if f is outside the span."""
        la = self.source.la
        n = len(self.basis)
        vec = la.vector(self._flatten(f) or [])
        if self._flat_matrix is None:
            self._flat_matrix = la.from_columns(
                [self._flatten(b) for b in self.basis],
                nrows=la.shape(vec)[0],
            )
        sol = la.solve(self._flat_matrix, vec)
        if sol is None:
            raise ValueError("map is not in the span of the basis")
        return tuple(la.column(sol, 0)) if n else ()

    def is_invertible(self, f) -> bool:
        la = self.source.la
        return all(
            self.source.dim(v) == self.target.dim(v)
            and la.is_invertible(f[v])
            for v in self.source.algebra.quiver.vertex_order
        )


def identity_hom(M: Representation) -> Dict[str, object]:
    return {
        v: M.la.identity(M.dim(v))
        for v in M.algebra.quiver.vertex_order
    }


def hom(M: Representation, N: Representation) -> HomSpace:
    """All vertex-tuples of base-linear maps commuting with the structure.

    The system stacks, per vertex, the commutation with the generator
    action and, per arrow, the intertwining equation, each written as a
    Kronecker block acting on the row-major vectorization of the unknown
    vertex maps.
    """
    if M.algebra is not N.algebra and M.algebra != N.algebra:
        raise AlgebraMismatch("hom requires a common algebra")
    alg = M.algebra
    la = M.la
    order = alg.quiver.vertex_order
    sizes = {v: N.dim(v) * M.dim(v) for v in order}
    nvars = sum(sizes.values())

    def _system_row(blocks, nrows):
        row = []
        for v in order:
            row.append(blocks.get(v, la.zeros(nrows, sizes[v])))
        return la.hstack(row)

    chunks = []
    for v in order:
        if alg.vertex_level(v) == 1 or sizes[v] == 0:
            continue
        # f_v G - G' f_v = 0 on vec(f_v)
        A = la.kron(la.identity(N.dim(v)), la.transpose(M.generator(v)))
        B = la.kron(N.generator(v), la.identity(M.dim(v)))
        chunks.append(_system_row({v: la.sub(A, B)}, sizes[v]))
    for name in alg.quiver.arrow_order:
        a = alg.quiver.arrow(name)
        nrows = N.dim(a.head) * M.dim(a.tail)
        if nrows == 0:
            continue
        blocks = {}
        # f_h X = Y f_t
        blocks[a.head] = la.kron(
            la.identity(N.dim(a.head)), la.transpose(M.arrow(name))
        )
        Yf = la.kron(N.arrow(name), la.identity(M.dim(a.tail)))
        if a.head == a.tail:
            blocks[a.head] = la.sub(blocks[a.head], Yf)
        else:
            blocks[a.tail] = la.scale(la.field.neg(la.field.one()), Yf)
        chunks.append(_system_row(blocks, nrows))

    if chunks:
        kernel = la.nullspace(la.vstack(chunks))
    else:
        kernel = la.identity(nvars)

    basis = []
    for vec in la.columns(kernel):
        f = {}
        pos = 0
        for v in order:
            block = []
            for i in range(N.dim(v)):
                block.append(vec[pos:pos + M.dim(v)])
                pos += M.dim(v)
            f[v] = la.matrix(block) if block and M.dim(v) else \
                la.zeros(N.dim(v), M.dim(v))
        basis.append(f)
    return HomSpace(M, N, basis)


def end(M: Representation) -> HomSpace:
    return hom(M, M)


# ------------------------------------------------------------ isomorphism


class Verdict(str):
    """A yes/no/inconclusive answer carrying the search seed and witness."""

    def __new__(cls, value, seed=None, witness=None):
        obj = str.__new__(cls, value)
        obj.seed = seed
        obj.witness = witness
        return obj


def is_isomorphic(M: Representation, N: Representation, seed=0,
                  budget=4000) -> Verdict:
    """Decide isomorphism; never wrong, inconclusive when the budget runs out.

    Over a prime field the search is exhaustive whenever the hom space is
    small enough (making a failed search a proof); over the rationals the
    invertibility locus is probed at seeded integer points.
    """
    field = M.field
    if any(M.dim(v) != N.dim(v) for v in M.algebra.quiver.vertex_order):
        return Verdict("no", seed=seed)
    if M.total_dim == 0:
        return Verdict("yes", seed=seed, witness=())
    space = hom(M, N)
    back = hom(N, M)
    if space.dimension != back.dimension:
        return Verdict("no", seed=seed)
    if space.dimension == 0:
        return Verdict("no", seed=seed)
    m = space.dimension

    if field.kind == "prime" and field.p ** m <= budget:
        coeffs = [0] * m
        while True:
            pos = 0
            while pos < m and coeffs[pos] == field.p - 1:
                coeffs[pos] = 0
                pos += 1
            if pos == m:
                break
            coeffs[pos] += 1
            if space.is_invertible(space.element(coeffs)):
                return Verdict("yes", seed=seed, witness=tuple(coeffs))
        return Verdict("no", seed=seed)

    rng = random.Random(seed)
    for i, f in enumerate(space.basis):
        if space.is_invertible(f):
            coeffs = tuple(1 if j == i else 0 for j in range(m))
            return Verdict("yes", seed=seed, witness=coeffs)
    if m == 1:
        # the span is a line; scaling cannot create an invertible map
        return Verdict("no", seed=seed)
    for _ in range(budget):
        if field.kind == "prime":
            coeffs = [rng.randrange(field.p) for _ in range(m)]
        else:
            coeffs = [rng.randint(-5, 5) for _ in range(m)]
        if all(c == 0 for c in coeffs):
            continue
        if space.is_invertible(space.element(coeffs)):
            return Verdict("yes", seed=seed, witness=tuple(coeffs))
    return Verdict("inconclusive", seed=seed)


# -------------------------------------------------- endomorphism structure
#
# The endomorphism ring is handled in coordinates: elements are tuples
# over the base field, multiplied through a cached table of basis
# products.  The dimensions here are tiny (a handful of basis elements),
# so the row reductions below work scalar-by-scalar through the field.


def _coords_rref(field, rows):
    pivots = []
    r = 0
    ncols = len(rows[0]) if rows else 0
    for col in range(ncols):
        piv = None
        for i in range(r, len(rows)):
            if rows[i][col] != field.zero():
                piv = i
                break
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = field.inv(rows[r][col])
        rows[r] = [field.mul(inv, a) for a in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col] != field.zero():
                f = rows[i][col]
                rows[i] = [
                    field.sub(a, field.mul(f, b))
                    for a, b in zip(rows[i], rows[r])
                ]
        pivots.append(col)
        r += 1
        if r == len(rows):
            break
    del rows[r:]
    return pivots


def _coords_nullspace(field, rows, ncols):
    work = [list(r) for r in rows]
    pivots = _coords_rref(field, work)
    basis = []
    for j in range(ncols):
        if j in pivots:
            continue
        vec = [field.zero()] * ncols
        vec[j] = field.one()
        for row, piv in zip(work, pivots):
            vec[piv] = field.neg(row[j])
        basis.append(vec)
    return basis


class _CoordAlgebra:
    """The endomorphism ring in coordinates, with multiplication tables."""

    def __init__(self, space: HomSpace):
        self.space = space
        self.field = space.source.field
        self.dim = space.dimension
        self.unit = list(space.coordinates(identity_hom(space.source)))
        self._table = {}

    def _basis_product(self, i, j):
        key = (i, j)
        if key not in self._table:
            f = self.space.compose(self.space.basis[i], self.space.basis[j])
            self._table[key] = list(self.space.coordinates(f))
        return self._table[key]

    def mul(self, x, y):
        field = self.field
        out = [field.zero()] * self.dim
        for i, a in enumerate(x):
            if a == field.zero():
                continue
            for j, b in enumerate(y):
                if b == field.zero():
                    continue
                c = field.mul(a, b)
                for k, t in enumerate(self._basis_product(i, j)):
                    out[k] = field.add(out[k], field.mul(c, t))
        return out

    def power(self, x, k):
        out = list(self.unit)
        for _ in range(k):
            out = self.mul(out, x)
        return out

    def basis_vector(self, j):
        v = [self.field.zero()] * self.dim
        v[j] = self.field.one()
        return v

    def is_commutative(self):
        for i in range(self.dim):
            for j in range(i + 1, self.dim):
                if self._basis_product(i, j) != self._basis_product(j, i):
                    return False
        return True


class _Quotient:
    """A quotient of a coordinate algebra by a spanned ideal."""

    def __init__(self, parent: _CoordAlgebra, ideal_vectors):
        self.parent = parent
        field = parent.field
        work = [list(v) for v in ideal_vectors]
        self.pivots = _coords_rref(field, work)
        self.rows = work
        self.free = [
            j for j in range(parent.dim) if j not in set(self.pivots)
        ]
        self.dim = len(self.free)

    def project(self, x):
        field = self.parent.field
        vec = list(x)
        for row, piv in zip(self.rows, self.pivots):
            c = vec[piv]
            if c != field.zero():
                for j in range(len(vec)):
                    vec[j] = field.sub(vec[j], field.mul(c, row[j]))
        return [vec[j] for j in self.free]

    def lift(self, q):
        field = self.parent.field
        vec = [field.zero()] * self.parent.dim
        for j, c in zip(self.free, q):
            vec[j] = c
        return vec

    def mul(self, qx, qy):
        return self.project(self.parent.mul(self.lift(qx), self.lift(qy)))

    def unit(self):
        return self.project(self.parent.unit)

    def basis_vector(self, j):
        v = [self.parent.field.zero()] * self.dim
        v[j] = self.parent.field.one()
        return v


def _trace_form(field, dim, mul, basis_vector):
    """The symmetric form tr(L_x L_y) of the regular representation."""
    mats = []
    for i in range(dim):
        bi = basis_vector(i)
        cols = [mul(bi, basis_vector(j)) for j in range(dim)]
        mats.append([[cols[j][k] for j in range(dim)] for k in range(dim)])
    T = []
    for i in range(dim):
        row = []
        for j in range(dim):
            s = field.zero()
            for k in range(dim):
                for l in range(dim):
                    s = field.add(s, field.mul(mats[i][k][l], mats[j][l][k]))
            row.append(s)
        T.append(row)
    return T


def _span_is_nilpotent(E: _CoordAlgebra, vectors):
    """Whether the spanned subspace generates a nilpotent subalgebra."""
    field = E.field
    current = [list(v) for v in vectors]
    _coords_rref(field, current)
    for _ in range(E.dim + 1):
        if not current:
            return True
        nxt = [E.mul(x, y) for x in current for y in vectors]
        _coords_rref(field, nxt)
        if len(nxt) >= len(current) and nxt == current:
            return False
        current = nxt
    return not current


def _frobenius_radical(E: _CoordAlgebra):
    """Nilpotent part of a commutative algebra in characteristic p."""
    field = E.field
    p = field.p
    k = 1
    while p ** k < max(E.dim, 2):
        k += 1
    images = []
    for j in range(E.dim):
        e = E.basis_vector(j)
        for _ in range(k):
            e = E.power(e, p)
        images.append(e)
    # radical = kernel of the (linear) map x -> x**(p**k)
    mat = [[images[j][i] for j in range(E.dim)] for i in range(E.dim)]
    return _coords_nullspace(field, mat, E.dim)


def _radical(E: _CoordAlgebra):
    """A certified basis of the radical, or RadicalAlgorithmUnsupported.

    Over the rationals, and over a prime field larger than the ring's
    dimension, the kernel of the regular trace form is the radical
    outright.  In small characteristic a commutative ring falls back to
    the kernel of the iterated p-power map, and otherwise the trace
    kernel is accepted only when it is certified nilpotent with a
    semisimple quotient (nondegenerate quotient trace form).
    """
    field = E.field
    T = _trace_form(field, E.dim, E.mul, E.basis_vector)
    kernel = _coords_nullspace(field, T, E.dim)
    if field.kind == "rational" or field.p > E.dim:
        return kernel
    if E.is_commutative():
        return _frobenius_radical(E)
    if _span_is_nilpotent(E, kernel):
        quot = _Quotient(E, kernel)
        Tq = _trace_form(field, quot.dim, quot.mul, quot.basis_vector)
        work = [list(r) for r in Tq]
        if len(_coords_rref(field, work)) == quot.dim:
            return kernel
    raise RadicalAlgorithmUnsupported(
        "characteristic %d is too small for the trace-form method and no "
        "fallback certifies this %d-dimensional endomorphism ring"
        % (field.p, E.dim)
    )


def _quotient_is_division(quot: _Quotient, seed) -> bool:
    """Whether the (semisimple) quotient ring is a division algebra."""
    field = quot.parent.field
    if quot.dim == 0:
        return False
    if quot.dim == 1:
        return True
    basis = [quot.basis_vector(j) for j in range(quot.dim)]
    commutative = all(
        quot.mul(basis[i], basis[j]) == quot.mul(basis[j], basis[i])
        for i in range(quot.dim) for j in range(i + 1, quot.dim)
    )
    if field.kind == "prime":
        if not commutative:
            # a finite division ring is commutative, so a noncommutative
            # semisimple quotient cannot be one
            return False
        # the fixed space of the p-power map has one dimension per
        # simple factor
        p = field.p
        images = []
        for e in basis:
            f = e
            for _ in range(p - 1):
                f = quot.mul(f, e)
            images.append(f)
        mat = [
            [field.sub(images[j][i],
                       field.one() if i == j else field.zero())
             for j in range(quot.dim)]
            for i in range(quot.dim)
        ]
        fixed = len(_coords_nullspace(field, mat, quot.dim))
        return fixed == 1
    rng = random.Random(seed)
    if not commutative:
        # an element with a reducible minimal polynomial is a zero-divisor
        # witness; without one, division-ness cannot be certified here
        for elem in _candidate_elements(quot, basis, rng, 24):
            poly = _element_minpoly(quot, elem)
            if poly is not None and poly.degree() > 0 \
                    and not poly.is_irreducible:
                return False
        raise RadicalAlgorithmUnsupported(
            "cannot certify a noncommutative semisimple quotient over the "
            "rationals"
        )
    # rationals, commutative: find a primitive element and factor its
    # minimal polynomial
    for elem in _candidate_elements(quot, basis, rng, 12, skip_basis=True):
        poly = _element_minpoly(quot, elem)
        if poly is None or poly.degree() != quot.dim:
            continue  # not a primitive element, try again
        return bool(poly.is_irreducible)
    raise RadicalAlgorithmUnsupported(
        "no primitive element found for the rational endomorphism quotient"
    )


def _candidate_elements(quot, basis, rng, tries, skip_basis=False):
    """Deterministic then seeded-random elements of a quotient algebra."""
    field = quot.parent.field
    if not skip_basis:
        for e in basis:
            yield list(e)
    for attempt in range(tries):
        if attempt == 0:
            coeffs = [field.from_int(j + 1) for j in range(quot.dim)]
        else:
            coeffs = [
                field.from_int(rng.randint(-9, 9)) for _ in range(quot.dim)
            ]
        elem = [field.zero()] * quot.dim
        for c, e in zip(coeffs, basis):
            for k in range(quot.dim):
                elem[k] = field.add(elem[k], field.mul(c, e[k]))
        yield elem


def _element_minpoly(quot, elem):
    """Minimal polynomial of one element over the rationals, or None."""
    from sympy import QQ, Poly, Symbol

    field = quot.parent.field
    powers = [quot.unit()]
    for _ in range(quot.dim):
        powers.append(quot.mul(powers[-1], elem))
    for deg in range(1, quot.dim + 1):
        # is powers[deg] a combination of the lower powers?
        system = [
            [powers[i][k] for i in range(deg)] + [powers[deg][k]]
            for k in range(quot.dim)
        ]
        pivots = _coords_rref(field, system)
        if any(pc >= deg for pc in pivots):
            continue  # independent; minimal polynomial has higher degree
        sol = [field.zero()] * deg
        for row, piv in zip(system, pivots):
            sol[piv] = row[deg]
        x = Symbol("x")
        return Poly(
            [1] + [-(sol[deg - 1 - i]) for i in range(deg)], x, domain=QQ
        )
    return None


def is_indecomposable(M: Representation, seed=0) -> bool:
    """Locality of the endomorphism ring, certified or an honest error."""
    if M.total_dim == 0:
        raise ValueError("the zero representation is not indecomposable")
    E = _CoordAlgebra(end(M))
    if E.dim == 1:
        return True
    rad = _radical(E)
    return _quotient_is_division(_Quotient(E, rad), seed)


# ------------------------------------------------- canonical module supply


def _mult_matrix(datum, level, value):
    """Multiplication by a subfield element in the power basis."""
    field = datum.base
    step = datum.degree // level
    z = datum.level_generator(level) if level > 1 else datum.one()
    out = [[field.zero()] * level for _ in range(level)]
    power = datum.one()
    for j in range(level):
        col = value * power
        for k in range(datum.degree):
            if col.coords[k] != field.zero():
                out[k // step][j] = col.coords[k]
        power = power * z
    return out


def simples(context) -> List[Representation]:
    """One simple per vertex; special loops act through their quadratics.

    At a loop-free vertex the simple is the vertex field itself with all
    arrows zero.  A special loop with a twist acts as the field
    automorphism; an untwisted loop forces the quadratic extension by a
    root of its constant, doubling the dimension.
    """
    alg = _algebra_of(context)
    datum = alg.datum
    field = datum.base
    out = []
    special = alg.special_mu or {}
    loop_at = {}
    for name in special:
        loop_at[alg.quiver.arrow(name).tail] = name
    for v in alg.quiver.vertex_order:
        d = alg.vertex_level(v)
        dims = {w: 0 for w in alg.quiver.vertex_order}
        gens = {}
        maps = {}
        gen = _mult_matrix(datum, d, datum.level_generator(d)) if d > 1 else None
        if v in loop_at:
            name = loop_at[v]
            exp = alg.modulation.of(name).exp
            mu = special[name]
            if exp % d:
                # twisted loop: the Galois action on the vertex field
                dims[v] = d
                step = datum.degree // d
                loop = [[field.zero()] * d for _ in range(d)]
                for j in range(d):
                    loop[j][j] = datum.zeta_scalar_power(exp * j * step)
                maps[name] = loop
                if gen is not None:
                    gens[v] = gen
            else:
                # untwisted loop: adjoin a square root of the constant
                dims[v] = 2 * d
                mmu = _mult_matrix(datum, d, mu)
                loop = [[field.zero()] * (2 * d) for _ in range(2 * d)]
                for i in range(d):
                    loop[d + i][i] = field.one()
                    for j in range(d):
                        loop[i][d + j] = mmu[i][j]
                maps[name] = loop
                if gen is not None:
                    gens[v] = [
                        row + [field.zero()] * d for row in gen
                    ] + [
                        [field.zero()] * d + row for row in gen
                    ]
        else:
            dims[v] = d
            if gen is not None:
                gens[v] = gen
        out.append(Representation(alg, dims, gens, maps))
    return out


def projectives(context) -> List[Representation]:
    """Left modules on the surviving-path basis, one per source vertex."""
    alg = _algebra_of(context)
    field = alg.datum.base
    quotient = context.quotient()
    basis = quotient.basis()
    out = []
    for v in alg.quiver.vertex_order:
        mine = [p for p in basis if p.source == v]
        index = {}
        dims = {w: 0 for w in alg.quiver.vertex_order}
        for p in mine:
            index[p] = dims[p.target]
            dims[p.target] += 1

        def _coords_of(element, target):
            vec = [field.zero()] * dims[target]
            for q, c in element.terms.items():
                vec[index[q]] = c
            return vec

        gens = {}
        for w in alg.quiver.vertex_order:
            if alg.vertex_level(w) == 1 or dims[w] == 0:
                continue
            zmul = alg.trivial(w, 1)
            cols = []
            for p in mine:
                if p.target != w:
                    continue
                y = quotient.mul(zmul, AlgebraElement(alg, {p: field.one()}))
                cols.append(_coords_of(y, w))
            gens[w] = [[cols[j][i] for j in range(dims[w])]
                       for i in range(dims[w])]
        maps = {}
        for name in alg.quiver.arrow_order:
            a = alg.quiver.arrow(name)
            nh, nt = dims[a.head], dims[a.tail]
            xa = alg.arrow_element(name)
            cols = []
            for p in mine:
                if p.target != a.tail:
                    continue
                y = quotient.mul(xa, AlgebraElement(alg, {p: field.one()}))
                cols.append(_coords_of(y, a.head))
            maps[name] = [[cols[j][i] for j in range(nt)] for i in range(nh)]
        rep = Representation(alg, dims, gens, maps)
        out.append(rep)
    return out
