import pytest
from hypothesis import given, settings, strategies as st

from extricat.category import (
    BlockMorphism,
    CategoryError,
    Mor,
    block_compose,
    block_identity,
    build_path_category,
    enumerate_formal_objects,
    formal_object,
    in_radical,
)
from extricat.exactlin import F101, FieldSpec


@pytest.fixture(scope="module")
def lam2():
    return build_path_category(
        F101, ["v"], [{"name": "x", "from": "v", "to": "v"}], [[[["x", "x"], 1]]], max_path_length=2
    )


@pytest.fixture(scope="module")
def a2():
    return build_path_category(
        F101, ["v1", "v2"], [{"name": "a", "from": "v1", "to": "v2"}], [], max_path_length=1
    )


def test_lam2_structure(lam2):
    assert lam2.hom_dim("v", "v") == 2
    assert lam2.validate() == []
    x = lam2.basis_mor(("v", "v", 1))
    sq = lam2.compose_mor(x, x)
    assert sq.is_zero()


def test_one_object_field_category():
    cat = build_path_category(F101, ["v"], [], [], max_path_length=1)
    assert cat.hom_dim("v", "v") == 1
    assert cat.validate() == []


def test_corrupted_composition_fails_validation():
    two_loops = build_path_category(
        F101,
        ["v"],
        [{"name": "x", "from": "v", "to": "v"}, {"name": "y", "from": "v", "to": "v"}],
        [[[["x", "x"], 1]], [[["x", "y"], 1]], [[["y", "x"], 1]], [[["y", "y"], 1]]],
        max_path_length=2,
    )
    assert two_loops.validate() == []
    keys = {two_loops.basis_name(k): k for k in two_loops.all_basis_keys()}
    broken = dict(two_loops.comp)
    # y ∘ x = id destroys associativity: (y∘x)∘x = x while y∘(x∘x) = 0
    ident = two_loops.identities["v"]
    broken[(keys["y"], keys["x"])] = tuple(ident)
    from extricat.category import FiniteLinearCategory

    bad = FiniteLinearCategory(
        F101, two_loops.objects, two_loops.hom_dims, broken, two_loops.identities, two_loops.basis_names
    )
    problems = bad.validate()
    assert problems
    assert any(code == "associativity" for code, _ in problems)


def test_infinite_dimensional_quiver_rejected():
    with pytest.raises(CategoryError):
        build_path_category(
            F101, ["v"], [{"name": "x", "from": "v", "to": "v"}], [], max_path_length=3
        )


def test_radical_membership(lam2, a2):
    ident = lam2.identity_mor("v")
    assert not in_radical(lam2, BlockMorphism(("v",), ("v",), ((ident,),)))
    x = lam2.basis_mor(("v", "v", 1))
    assert in_radical(lam2, BlockMorphism(("v",), ("v",), ((x,),)))
    arrow = a2.basis_mor(("v1", "v2", 0))
    assert in_radical(a2, BlockMorphism(("v1",), ("v2",), ((arrow,),)))


def test_category_algebra_dimensions(lam2, a2):
    assert lam2.category_algebra().dim == 2
    assert a2.category_algebra().dim == 3
    alg = a2.category_algebra()
    unit = alg.unit
    for i in range(alg.dim):
        e = tuple(F101.one if j == i else F101.zero for j in range(alg.dim))
        assert alg.multiply(unit, e) == e
        assert alg.multiply(e, unit) == e


def test_formal_objects_and_blocks(lam2):
    fo = formal_object(["v", "v"])
    ident = block_identity(lam2, fo)
    assert block_compose(lam2, ident, ident).blocks == ident.blocks
    assert len(list(enumerate_formal_objects(lam2, 2))) == 3


def _random_mor(draw, cat, src, tgt):
    d = cat.hom_dim(src, tgt)
    coords = draw(st.lists(st.integers(0, 100), min_size=d, max_size=d))
    return Mor(src, tgt, tuple(coords))


@st.composite
def block_triples(draw):
    cat = build_path_category(
        F101, ["v"], [{"name": "x", "from": "v", "to": "v"}], [[[["x", "x"], 1]]], max_path_length=2
    )
    fos = [("v",), ("v", "v")]
    a, b, c, d = (draw(st.sampled_from(fos)) for _ in range(4))

    def blk(src, tgt):
        rows = []
        for t in tgt:
            rows.append(tuple(_random_mor(draw, cat, s, t) for s in src))
        return BlockMorphism(src, tgt, tuple(rows))

    return cat, blk(a, b), blk(b, c), blk(c, d)


@given(block_triples())
@settings(max_examples=30, deadline=None)
def test_block_composition_associative(data):
    cat, f, g, h = data
    lhs = block_compose(cat, block_compose(cat, h, g), f)
    rhs = block_compose(cat, h, block_compose(cat, g, f))
    assert lhs.blocks == rhs.blocks


@given(block_triples())
@settings(max_examples=30, deadline=None)
def test_radical_is_an_ideal(data):
    cat, f, g, _ = data
    if in_radical(cat, f) or in_radical(cat, g):
        assert in_radical(cat, block_compose(cat, g, f))
