"""Catalog tests: derivative-table regeneration and dimension oracles."""

import pytest

from orbclann.blocks import (
    BLOCK_INDICES,
    admissible_cocycles,
    block_shape,
    clannish_block,
    jacobian_block,
)
from orbclann.galois import BaseField, GaloisElement, LatticeViolation, make_datum
from orbclann.pathalg import multiply

import oracles

F5 = BaseField.prime(5)
DATUM4 = make_datum(F5, 4)
DATUM2 = make_datum(F5, 2)

# frozen quotient dimensions, index 1..10
JACOBIAN_DIMS = [12, 13, 20, 16, 36, 25, 25, 6, 10, 18]
CLANNISH_DIMS = [12, 20, 20, 36, 36, 36, 36, 6, 10, 18]
EQUAL_AT = {1, 3, 5, 8, 9, 10}


def datum_for(k):
    return DATUM2 if k in (8, 9, 10) else DATUM4


def conj_average(alg, x, u_sign):
    """(x + u_sign * u**-1 x u)/2 built from plain algebra operations."""
    src, tgt, _ = x.grade()
    half = F5.inv(F5.coerce(2))
    left = alg.trivial(tgt, -(alg.vertex_level(tgt) // 2))
    right = alg.trivial(src, alg.vertex_level(src) // 2)
    conj = multiply(multiply(left, x), right).scale(F5.coerce(u_sign))
    return (x + conj).scale(half)


def table_derivatives(k, alg, xi):
    """The published derivative entries, rebuilt literally per arrow."""
    sgn = lambda e: 1 if e % 2 == 0 else -1
    if k in (1, 2, 3, 6, 7, 8, 9):
        bg = alg.path_element(["b", "g"], [0, 0, 0])
        ga = alg.path_element(["g", "a"], [0, 0, 0])
        ab = alg.path_element(["a", "b"], [0, 0, 0])
        out = {"a": bg, "b": ga, "g": ab}
        if k == 2:
            out["b"] = conj_average(alg, ga, sgn(xi["b"]))
        elif k == 6:
            out["a"] = conj_average(alg, bg, sgn(xi["a"]))
        elif k == 7:
            out["g"] = conj_average(alg, ab, sgn(xi["g"]))
        return out
    b0g = alg.path_element(["b0", "g"], [0, 0, 0])
    b1g = alg.path_element(["b1", "g"], [0, 0, 0])
    ab0 = alg.path_element(["a", "b0"], [0, 0, 0])
    ab1 = alg.path_element(["a", "b1"], [0, 0, 0])
    ga = alg.path_element(["g", "a"], [0, 0, 0])
    if k == 4:
        return {
            "a": b0g + alg.path_element(["b1", "g"], [0, 0, 1]),
            "b0": ga,
            "b1": alg.path_element(["g", "a"], [0, 1, 0]),
            "g": ab0 + alg.path_element(["a", "b1"], [1, 0, 0]),
        }
    if k == 5:
        half = F5.inv(F5.coerce(2))
        zl = DATUM4.zeta_scalar_power(xi["b"])
        left = alg.trivial("3", -1)
        right = alg.trivial("2", 1)
        conj = multiply(multiply(left, ga), right).scale(zl)
        return {
            "a": b0g + b1g,
            "b0": (ga + conj).scale(half),
            "b1": (ga - conj).scale(half),
            "g": ab0 + ab1,
        }
    if k == 10:
        return {
            "a": b0g + b1g,
            "b0": conj_average(alg, ga, sgn(xi["b"])),
            "b1": conj_average(alg, ga, sgn(xi["b"] + 1)),
            "g": ab0 + ab1,
        }
    raise AssertionError(k)


# ------------------------------------------------- derivative regeneration


@pytest.mark.parametrize("k", BLOCK_INDICES)
def test_derivatives_match_published_tables(k):
    datum = datum_for(k)
    for xi in admissible_cocycles():
        block = jacobian_block(k, datum, xi)
        expected = table_derivatives(k, block.algebra, xi)
        got = {r.arrow: r.element for r in block.relations}
        assert set(got) == set(expected)
        for name in expected:
            assert got[name] == expected[name], (k, xi, name)


def test_block8_relations_are_plain_paths():
    block = jacobian_block(8, DATUM2)
    alg = block.algebra
    formatted = {r.arrow: alg.format_element(r.element)
                 for r in block.relations}
    assert formatted == {"a": "b.g", "b": "g.a", "g": "a.b"}


def test_block5_doubled_pair_carries_the_two_lifts():
    for xi in admissible_cocycles():
        block = jacobian_block(5, DATUM4, xi)
        assert block.algebra.modulation.of("b0") == GaloisElement(4, xi["b"])
        assert block.algebra.modulation.of("b1") == \
            GaloisElement(4, xi["b"] + 2)
        # both restrict to theta**xi_b on the level-2 subfield
        for name in ("b0", "b1"):
            tw = block.algebra.modulation.of(name)
            assert tw.restrict(2) == GaloisElement(2, xi["b"])


def test_block10_doubled_pair_twists_differ_by_theta():
    block = jacobian_block(10, DATUM2, {"a": 0, "b": 1, "g": 1})
    assert block.algebra.modulation.of("b0") == GaloisElement(2, 1)
    assert block.algebra.modulation.of("b1") == GaloisElement(2, 0)


# ------------------------------------------------------- dimension oracles


@pytest.mark.parametrize("k", BLOCK_INDICES)
def test_jacobian_dimensions_match_frozen_and_oracle(k):
    datum = datum_for(k)
    for xi in admissible_cocycles():
        block = jacobian_block(k, datum, xi)
        q = block.quotient()
        assert q.total_dim == JACOBIAN_DIMS[k - 1], (k, xi)
        rels = oracles.oracle_relations(k, block.algebra, xi)
        total, _ = oracles.jacobian_dim_oracle(block.algebra, rels)
        assert total == q.total_dim, (k, xi)


@pytest.mark.parametrize("k", BLOCK_INDICES)
def test_clannish_dimensions_match_frozen_and_oracle(k):
    datum = datum_for(k)
    block = clannish_block(k, datum)
    q = block.quotient()
    assert q.total_dim == CLANNISH_DIMS[k - 1]
    total, _ = oracles.clannish_dim_oracle(k)
    assert total == q.total_dim


def test_presentations_agree_exactly_on_the_isomorphic_indices():
    for k in BLOCK_INDICES:
        jac = JACOBIAN_DIMS[k - 1]
        cla = CLANNISH_DIMS[k - 1]
        assert (jac == cla) == (k in EQUAL_AT)


def test_block4_dimensions_stable_across_datum_degree():
    # weight-2 data embed in the degree-4 tower without changing anything
    for datum in (DATUM2, DATUM4):
        assert jacobian_block(4, datum).quotient().total_dim == 16


# ------------------------------------------------------------- input checks


def test_non_admissible_cocycle_rejected():
    with pytest.raises(ValueError):
        jacobian_block(1, DATUM4, {"a": 1, "b": 0, "g": 0})
    with pytest.raises(ValueError):
        clannish_block(4, DATUM4, {"a": 0, "b": 1, "g": 0})


def test_default_cocycle_is_zero():
    block = jacobian_block(1, DATUM4)
    assert block.xi == {"a": 0, "b": 0, "g": 0}


def test_weight4_blocks_need_degree4_datum():
    with pytest.raises(LatticeViolation):
        jacobian_block(3, DATUM2)
    with pytest.raises(LatticeViolation):
        jacobian_block(5, DATUM2)


def test_constant_mode_blocks_need_degree2_datum():
    with pytest.raises(LatticeViolation):
        jacobian_block(9, DATUM4)
    with pytest.raises(LatticeViolation):
        clannish_block(10, DATUM4)


def test_bad_block_index():
    with pytest.raises(ValueError):
        jacobian_block(11, DATUM4)
    with pytest.raises(ValueError):
        clannish_block(0, DATUM4)


def test_admissible_cocycles_are_the_even_assignments():
    cocycles = admissible_cocycles()
    assert len(cocycles) == 4
    for xi in cocycles:
        assert (xi["a"] + xi["b"] + xi["g"]) % 2 == 0


def test_block_shapes_expose_weights():
    assert block_shape(5) == ((2, 4, 4), True, False)
    assert block_shape(9) == ((2, 1, 1), False, True)
    with pytest.raises(ValueError):
        block_shape(12)
