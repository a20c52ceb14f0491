"""Unit tests for the decorated-path kernel and its quotients."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orbclann.blocks import admissible_cocycles, clannish_block, jacobian_block
from orbclann.galois import (
    BaseField,
    GaloisElement,
    LevelMismatch,
    make_datum,
)
from orbclann.pathalg import (
    Arrow,
    DatumMismatch,
    GradeMismatch,
    ModulatedAlgebra,
    ModulatingFunction,
    NotComposable,
    Potential,
    SaturationBoundExceeded,
    UnknownArrow,
    WeightedQuiver,
    cyclic_derivative,
    jacobian_relations,
    multiply,
    naive_cyclic_deletion,
    normality_check,
    normalize,
    saturate_quotient,
    semilinear_part,
)

F5 = BaseField.prime(5)
DATUM4 = make_datum(F5, 4)
DATUM2 = make_datum(F5, 2)

XI_1 = {"a": 1, "b": 1, "g": 0}


@pytest.fixture(scope="module")
def blk1():
    return jacobian_block(1, DATUM4, XI_1)


@pytest.fixture(scope="module")
def blk2():
    return jacobian_block(2, DATUM4, XI_1)


@pytest.fixture(scope="module")
def blk3():
    return jacobian_block(3, DATUM4, XI_1)


# ------------------------------------------------------------ normalization


def test_decoration_crosses_twisted_arrow(blk2):
    # in block 2 the arrow b carries theta**xi_b on L, and theta(u) = -u
    alg = blk2.algebra
    assert alg.format_element(normalize(alg, "b.u")) == "4*u.b"


def test_decoration_crosses_untwisted_arrow(blk1):
    alg = jacobian_block(1, DATUM4).algebra  # all twists trivial
    assert alg.format_element(normalize(alg, "b.u")) == "u.b"


def test_trivial_path_is_left_identity(blk2):
    alg = blk2.algebra
    b = alg.arrow_element("b")
    assert multiply(alg.trivial("2"), b) == b
    assert multiply(alg.trivial("1"), b).is_zero()
    assert multiply(b, alg.trivial("3")) == b


def test_decoration_wraparound_collects_constant(blk3):
    # v**3 * v**2 = v**5 = c*v with c = 2 at the weight-4 vertex
    alg = blk3.algebra
    prod = multiply(alg.trivial("1", 3), alg.trivial("1", 2))
    assert prod == alg.trivial("1", 1, coeff=2)


def test_full_loop_of_decorations_is_scalar(blk3):
    alg = blk3.algebra
    prod = multiply(alg.trivial("1", 2), alg.trivial("1", 2))
    assert prod == alg.trivial("1", 0, coeff=2)


def test_normalize_rejects_unknown_arrow(blk2):
    with pytest.raises(UnknownArrow):
        normalize(blk2.algebra, "b.z")


def test_incomposable_pair_raises_in_path_element(blk1):
    with pytest.raises(NotComposable):
        blk1.algebra.path_element(["a", "a"], [0, 0, 0])


def test_incomposable_product_is_zero(blk1):
    alg = blk1.algebra
    assert multiply(alg.arrow_element("b"), alg.arrow_element("a")).is_zero()


def test_arrow_product_is_decorated_path(blk1):
    alg = blk1.algebra
    ab = multiply(alg.arrow_element("a"), alg.arrow_element("b"))
    assert ab == alg.path_element(["a", "b"], [0, 0, 0])
    assert ab.grade() == ("3", "1", 2)


def test_arrow_spaces_have_product_dimension(blk3):
    # the span of decorated single-arrow paths has dim d_h * d_t / gcd
    from orbclann.pathalg import _enumerate_layer

    alg = blk3.algebra
    layer = _enumerate_layer(alg, 1, False)
    for arrow in alg.quiver.ordinary_arrows():
        dh = alg.vertex_level(arrow.head)
        dt = alg.vertex_level(arrow.tail)
        g = alg.arrow_gcd(arrow.name)
        paths = [
            p for p in layer[(arrow.tail, arrow.head, 1)]
            if p.arrows == (arrow.name,)
        ]
        assert len(paths) == dh * dt // g


def test_mismatched_twist_level_rejected():
    quiver = WeightedQuiver(
        [("1", 2), ("2", 2)], [Arrow("a", "2", "1")]
    )
    with pytest.raises(LevelMismatch):
        ModulatedAlgebra(
            DATUM4, quiver, ModulatingFunction({"a": GaloisElement(4, 1)})
        )


def test_cross_algebra_product_rejected(blk1, blk2):
    with pytest.raises(DatumMismatch):
        multiply(blk1.algebra.arrow_element("a"),
                 blk2.algebra.arrow_element("b"))


# ----------------------------------------------------- random-element tools


def _paths_up_to(alg, max_len):
    from orbclann.pathalg import _enumerate_layer

    out = []
    for length in range(max_len + 1):
        for bucket in _enumerate_layer(alg, length, False).values():
            out.extend(bucket)
    return out


def _element_strategy(alg, max_len=2):
    paths = _paths_up_to(alg, max_len)
    coeff = st.integers(min_value=0, max_value=4)

    def build(pairs):
        from orbclann.pathalg import AlgebraElement

        terms = {}
        for idx, c in pairs:
            if c % 5:
                terms[paths[idx]] = alg.datum.base.coerce(c)
        return AlgebraElement(alg, terms)

    pair = st.tuples(st.integers(min_value=0, max_value=len(paths) - 1), coeff)
    return st.lists(pair, max_size=4).map(build)


_ALG2 = jacobian_block(2, DATUM4, XI_1).algebra


@settings(max_examples=60, deadline=None)
@given(_element_strategy(_ALG2), _element_strategy(_ALG2), _element_strategy(_ALG2))
def test_product_is_associative_and_bilinear(x, y, z):
    assert multiply(multiply(x, y), z) == multiply(x, multiply(y, z))
    assert multiply(x + y, z) == multiply(x, z) + multiply(y, z)


@settings(max_examples=30, deadline=None)
@given(_element_strategy(_ALG2, max_len=1))
def test_one_is_identity(x):
    one = _ALG2.one()
    assert multiply(one, x) == x
    assert multiply(x, one) == x


# ----------------------------------------------------------- projector suite


def _homogeneous_samples(alg, rng_seed=11, count=40):
    import random

    from orbclann.pathalg import AlgebraElement, _enumerate_layer

    rng = random.Random(rng_seed)
    by_grade = {}
    for length in range(3):
        for key, bucket in _enumerate_layer(alg, length, False).items():
            by_grade.setdefault(key, []).extend(bucket)
    out = []
    keys = sorted(by_grade)
    for _ in range(count):
        key = keys[rng.randrange(len(keys))]
        paths = by_grade[key]
        terms = {}
        for p in paths:
            c = rng.randrange(5)
            if c:
                terms[p] = alg.datum.base.coerce(c)
        if terms:
            out.append(AlgebraElement(alg, terms))
    return out


@pytest.mark.parametrize("k", [1, 2, 5, 6])
def test_projectors_resolve_the_identity(k):
    block = jacobian_block(k, DATUM4, XI_1)
    alg = block.algebra
    from math import gcd

    for x in _homogeneous_samples(alg):
        src, tgt, _ = x.grade()
        g = gcd(alg.vertex_level(src), alg.vertex_level(tgt))
        parts = []
        total = alg.zero()
        for e in range(g):
            rho = GaloisElement(g, e)
            px = semilinear_part(x, rho)
            parts.append((rho, px))
            total = total + px
        assert total == x
        for rho, px in parts:
            # idempotence
            assert semilinear_part(px, rho) == px
            # orthogonality against the other projectors
            for rho2, _ in parts:
                if rho2 != rho:
                    assert semilinear_part(px, rho2).is_zero()


def test_projector_example_two_spin_components(blk2):
    alg = blk2.algebra
    ga = alg.path_element(["g", "a"], [0, 0, 0])
    p0 = semilinear_part(ga, GaloisElement(2, 0))
    p1 = semilinear_part(ga, GaloisElement(2, 1))
    assert p0 + p1 == ga


def test_projector_requires_homogeneous_input(blk2):
    alg = blk2.algebra
    mixed = alg.arrow_element("a") + alg.arrow_element("b")
    with pytest.raises(GradeMismatch):
        semilinear_part(mixed, GaloisElement(1, 0))


def test_projector_level_must_match_grade(blk2):
    alg = blk2.algebra
    ga = alg.path_element(["g", "a"], [0, 0, 0])
    with pytest.raises(LevelMismatch):
        semilinear_part(ga, GaloisElement(4, 1))


# ------------------------------------------------------- cyclic derivatives


def test_derivative_equals_projected_deletion():
    for k in range(1, 11):
        datum = DATUM2 if k in (8, 9, 10) else DATUM4
        for xi in admissible_cocycles():
            block = jacobian_block(k, datum, xi)
            for arrow in block.algebra.quiver.ordinary_arrows():
                el = cyclic_derivative(block.potential, arrow.name)
                naive = naive_cyclic_deletion(block.potential, arrow.name)
                tw_inv = block.algebra.modulation.of(arrow.name).inverse()
                if naive.is_zero():
                    assert el.is_zero()
                else:
                    assert el == semilinear_part(naive, tw_inv)


def test_derivative_is_twist_inverse_semilinear():
    for k in (2, 5, 6, 7, 10):
        datum = DATUM2 if k in (8, 9, 10) else DATUM4
        block = jacobian_block(k, datum, XI_1)
        for rel in block.relations:
            tw_inv = block.algebra.modulation.of(rel.arrow).inverse()
            if not rel.element.is_zero():
                assert semilinear_part(rel.element, tw_inv) == rel.element


def test_derivative_grade(blk2):
    for rel in blk2.relations:
        arrow = blk2.algebra.quiver.arrow(rel.arrow)
        src, tgt, length = rel.element.grade()
        assert (src, tgt) == (arrow.head, arrow.tail)
        assert length == 2


def test_relations_one_per_ordinary_arrow(blk2):
    assert [r.arrow for r in blk2.relations] == ["a", "b", "g"]


def test_potential_rejects_open_paths(blk2):
    alg = blk2.algebra
    with pytest.raises(ValueError):
        Potential(alg.path_element(["a", "b"], [0, 0, 0]))


# ------------------------------------------------------------- normal forms


def test_normality_of_catalog_quadratics():
    # every special loop in the catalog satisfies the normality condition
    for k in range(1, 11):
        datum = DATUM2 if k in (8, 9, 10) else DATUM4
        block = clannish_block(k, datum)
        alg = block.algebra
        for loop in alg.quiver.special_loops():
            level = alg.vertex_level(loop.tail)
            ok = normality_check(
                datum, level, alg.special_mu[loop.name],
                alg.modulation.of(loop.name),
            )
            assert ok, (k, loop.name)


def test_normality_rejects_twisted_nonfixed_constant():
    # theta moves u, so x**2 - u is not normal for sigma = theta
    assert not normality_check(
        DATUM4, 2, DATUM4.u(), GaloisElement(2, 1)
    )
    assert normality_check(DATUM4, 2, DATUM4.u(), GaloisElement(2, 0))
    assert normality_check(DATUM4, 2, DATUM4.one(), GaloisElement(2, 1))


def test_normality_level_mismatch():
    with pytest.raises(LevelMismatch):
        normality_check(DATUM4, 4, DATUM4.u(), GaloisElement(2, 1))


# ---------------------------------------------------------------- quotients


def test_block2_quotient_dimensions(blk2):
    q = blk2.quotient()
    assert q.total_dim == 13
    assert q.dead_length == 3
    assert q.grade_dims() == {
        ("1", "1", 0): 1,
        ("2", "2", 0): 2,
        ("3", "3", 0): 2,
        ("1", "3", 1): 2,
        ("2", "1", 1): 2,
        ("3", "2", 1): 2,
        ("2", "3", 2): 2,
    }


def test_block2_survivors_are_the_twisted_pair(blk2):
    q = blk2.quotient()
    alg = blk2.algebra
    names = {alg.format_element(alg.element({p: F5.one()}))
             for p in q.basis() if p.length == 2}
    # pivots eliminate the lexicographically first columns, so the two
    # survivors of the 4-dim grade are the u-decorated representatives
    assert names == {"u.g.a", "u.g.a.u"}
    for rel in blk2.relations:
        assert q.is_zero_mod(rel.element)


def test_block9_survivor_is_decorated():
    block = jacobian_block(9, DATUM2)
    q = block.quotient()
    alg = block.algebra
    names = {alg.format_element(alg.element({p: F5.one()}))
             for p in q.basis() if p.length == 2}
    assert names == {"g.u.a"}


def test_clannish_block2_word_basis():
    block = clannish_block(2, DATUM4, XI_1)
    q = block.quotient()
    alg = block.algebra
    names = [alg.format_element(alg.element({p: F5.one()})) for p in q.basis()]
    assert names == [
        "e1", "u.e1", "e2", "u.e2", "e3", "u.e3",
        "s1", "u.s1", "g", "u.g", "a", "u.a", "b", "u.b",
        "g.s1", "u.g.s1", "s1.a", "u.s1.a",
        "g.s1.a", "u.g.s1.a",
    ]


def test_clannish_block9_word_basis():
    block = clannish_block(9, DATUM2)
    q = block.quotient()
    alg = block.algebra
    names = {alg.format_element(alg.element({p: F5.one()})) for p in q.basis()}
    assert names == {
        "e1", "e2", "e3", "a", "b", "g", "s1", "s1.a", "g.s1", "g.s1.a"
    }
    assert q.total_dim == 10


def test_special_loop_square_rewrites_to_quadratic_constant():
    block = clannish_block(3, DATUM4)
    alg = block.algebra
    s2 = multiply(alg.arrow_element("s1"), alg.arrow_element("s1"))
    assert s2 == alg.trivial("1", 1)  # u * e1


def test_reduce_is_idempotent_and_multiplicative():
    import random

    block = clannish_block(2, DATUM4, XI_1)
    q = block.quotient()
    alg = block.algebra
    rng = random.Random(7)
    from orbclann.pathalg import AlgebraElement, _enumerate_layer

    pool = []
    for length in range(3):
        for bucket in _enumerate_layer(alg, length, True).values():
            pool.extend(bucket)
    for _ in range(25):
        terms = {}
        for p in rng.sample(pool, 5):
            c = rng.randrange(5)
            if c:
                terms[p] = F5.coerce(c)
        x = AlgebraElement(alg, terms)
        terms = {}
        for p in rng.sample(pool, 5):
            c = rng.randrange(5)
            if c:
                terms[p] = F5.coerce(c)
        y = AlgebraElement(alg, terms)
        rx = q.reduce(x)
        assert q.reduce(rx) == rx
        assert q.reduce(multiply(x, y)) == q.reduce(multiply(rx, q.reduce(y)))


def test_saturation_detects_nonterminating_presentation():
    quiver = WeightedQuiver([("1", 1)], [Arrow("a", "1", "1")])
    alg = ModulatedAlgebra(
        DATUM2, quiver, ModulatingFunction({"a": GaloisElement(1, 0)})
    )
    with pytest.raises(SaturationBoundExceeded):
        saturate_quotient(alg, [], mode="jacobian", lmax=6)


def test_saturation_rejects_unknown_mode(blk2):
    with pytest.raises(ValueError):
        saturate_quotient(blk2.algebra, [], mode="weird")


def test_saturation_rejects_inhomogeneous_relation(blk2):
    alg = blk2.algebra
    bad = alg.arrow_element("a") + alg.path_element(["a", "b"], [0, 0, 0])
    with pytest.raises(GradeMismatch):
        saturate_quotient(alg, [bad])


# ------------------------------------------------------------ text round trip


@pytest.mark.parametrize("k", [2, 4, 5, 9])
def test_format_parse_round_trip(k):
    import random

    datum = DATUM2 if k in (8, 9, 10) else DATUM4
    block = jacobian_block(k, datum, XI_1)
    alg = block.algebra
    rng = random.Random(13)
    from orbclann.pathalg import AlgebraElement

    pool = _paths_up_to(alg, 2)
    for _ in range(20):
        terms = {}
        for p in rng.sample(pool, min(4, len(pool))):
            c = rng.randrange(1, 5)
            terms[p] = F5.coerce(c)
        x = AlgebraElement(alg, terms)
        assert alg.parse_element(alg.format_element(x)) == x


def test_parse_known_strings(blk2):
    alg = blk2.algebra
    assert alg.parse_element("0").is_zero()
    x = alg.parse_element("3*g.a + u.g.a.u")
    expected = alg.path_element(["g", "a"], [0, 0, 0], coeff=3) + \
        alg.path_element(["g", "a"], [1, 0, 1])
    assert x == expected
