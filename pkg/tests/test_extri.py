import pytest

from extricat.category import BlockMorphism, Mor, block_compose
from extricat.exactlin import F101
from extricat.extri.base import ExtriError
from extricat.modules import find_isomorphism


def test_fix_a_e_dimensions(fix_a_backend):
    A = fix_a_backend
    dims = {(x, z): A.e_dim_pair(x, z) for x in A.cat.objects for z in A.cat.objects}
    assert dims == {("P", "P"): 0, ("P", "S"): 0, ("S", "P"): 0, ("S", "S"): 1}


def test_fix_a_realize_nonsplit(fix_a_backend):
    t = fix_a_backend.realize(("S",), ("S",), (1,))
    assert t.Y == ("P",)
    assert fix_a_backend.verify_long_exact(t) == []


def test_split_realization_is_canonical(fix_a_backend):
    t = fix_a_backend.realize(("S",), ("P",), ())
    assert t.Y == ("P", "S")
    assert t.g.entry(0, 0).coords == fix_a_backend.cat.identity_mor("P").coords
    assert t.f.entry(0, 1).coords == fix_a_backend.cat.identity_mor("S").coords
    assert fix_a_backend.verify_long_exact(t) == []


def test_biadditivity(fix_a_backend, fix_t_backend):
    for B in (fix_a_backend, fix_t_backend):
        for x in B.cat.objects:
            for z in B.cat.objects:
                assert B.e_dim((x, x), (z,)) == 2 * B.e_dim_pair(x, z)
                assert B.e_dim((x,), (z, z)) == 2 * B.e_dim_pair(x, z)


def test_realization_additivity_on_block_diagonal(fix_a_backend):
    A = fix_a_backend
    # delta ⊕ delta' realizes as the direct sum of the realizations
    t_single = A.realize(("S",), ("S",), (1,))
    offs = A.e_offsets(("S", "S"), ("S", "S"))
    delta = [F101.zero] * A.e_dim(("S", "S"), ("S", "S"))
    delta[offs[(0, 0)]] = F101.one
    delta[offs[(1, 1)]] = F101.one
    t_sum = A.realize(("S", "S"), ("S", "S"), tuple(delta))
    assert sorted(t_sum.Y) == sorted(t_single.Y + t_single.Y)
    assert A.verify_long_exact(t_sum) == []


def test_corrupted_delta_fails_long_exact(fix_a_backend):
    # exactness only sees the class through composition, so the detectable
    # corruption is claiming the split class for a non-split conflation
    t = fix_a_backend.realize(("S",), ("S",), (1,))
    from extricat.extri.base import ETriangle

    bad = ETriangle(t.Z, t.Y, t.X, t.g, t.f, (F101.zero,))
    problems = fix_a_backend.verify_long_exact(bad)
    assert problems
    assert any("(-,X)" in where for _, where in problems)


def test_pullback_along_identity_and_zero(fix_a_backend):
    A = fix_a_backend
    t = A.realize(("S",), ("S",), (1,))
    ident = BlockMorphism(("S",), ("S",), ((A.cat.identity_mor("S"),),))
    same, aux = A.pullback_triangle(t, ident)
    assert same.delta == t.delta and same.Y == t.Y
    assert A.verify_long_exact(aux) == []
    zero = BlockMorphism(("S",), ("S",), ((A.cat.zero_mor("S", "S"),),))
    split, aux2 = A.pullback_triangle(t, zero)
    assert all(c == F101.zero for c in split.delta)
    assert A.verify_long_exact(aux2) == []


def test_pullback_scalar_linearity(fix_a_backend):
    A = fix_a_backend
    t = A.realize(("S",), ("S",), (1,))
    c = F101.of(7)
    scal = BlockMorphism(("S",), ("S",), ((Mor("S", "S", (c,)),),))
    pulled = A.pull_delta(t, scal)
    assert pulled == (c,)


def test_pushout_triangle(fix_a_backend):
    A = fix_a_backend
    t = A.realize(("S",), ("S",), (1,))
    ident = BlockMorphism(("S",), ("S",), ((A.cat.identity_mor("S"),),))
    new, aux = A.pushout_triangle(t, ident)
    assert new.delta == t.delta
    assert A.verify_long_exact(aux) == []


def test_classify_fix_a(fix_a_backend):
    flags = fix_a_backend.classify_structure()
    assert flags["all_inflations_mono"] and flags["all_deflations_epi"]
    assert not flags["every_morphism_conflation"]


def test_classify_fix_p(fix_p_backend):
    flags = fix_p_backend.classify_structure()
    assert flags["all_inflations_mono"] and flags["all_deflations_epi"]
    assert not flags["every_morphism_conflation"]


def test_classify_fix_t(fix_t_backend):
    flags = fix_t_backend.classify_structure()
    assert not flags["all_inflations_mono"]
    assert not flags["all_deflations_epi"]
    assert flags["every_morphism_conflation"]


def test_stable_shift_and_e_spaces(fix_t_backend):
    T = fix_t_backend
    assert {x: T.shift_object(x) for x in T.cat.objects} == {
        "S1": "S3",
        "S2": "S1",
        "S3": "S2",
    }
    assert T.e_dim_pair("S1", "S2") == 1
    assert T.e_dim_pair("S1", "S1") == 0


def test_stable_zero_middle_realization(fix_t_backend):
    t = fix_t_backend.realize(("S1",), ("S2",), (1,))
    assert t.Y == ()
    assert fix_t_backend.verify_long_exact(t) == []


def test_stable_zero_map_is_deflation(fix_t_backend):
    T = fix_t_backend
    w = BlockMorphism((), ("S1",), ((),))
    t = T.is_deflation(w)
    assert t is not None
    assert t.Z == ("S2",)  # S1[-1]
    assert T.verify_long_exact(t) == []


def test_subcategory_restriction(fix_p_backend):
    FP = fix_p_backend
    assert set(FP.cat.objects) == {"P12", "S1"}
    assert all(FP.e_dim_pair(x, z) == 0 for x in FP.cat.objects for z in FP.cat.objects)
    assert FP.extension_closed_check() == []


def test_subcategory_closure_violation(fix_a2_backend):
    from extricat.extri.base import Caps
    from extricat.extri.subcat import SubcategoryBackend

    # S1, S2 span extensions hitting P12, which is outside the subset
    sub = SubcategoryBackend(fix_a2_backend, ("S1", "S2"), Caps())
    problems = sub.extension_closed_check()
    assert problems


def test_table_point_backend(fix_point_backend):
    B = fix_point_backend
    assert B.e_dim_pair("X", "X") == 1
    t = B.realize(("X",), ("X",), (1,))
    assert t.Y == ()
    assert B.verify_long_exact(t) == []
    split = B.realize(("X",), ("X",), (0,))
    assert split.Y == ("X", "X")
    ident = BlockMorphism(("X",), ("X",), ((B.cat.identity_mor("X"),),))
    fo, q, r = B.cone_data(ident)
    assert fo == ()


def test_table_rejects_underdetermined_cone(fix_point_backend):
    B = fix_point_backend
    # a 2x2 full matrix reduces (entries invertible), so build a genuinely
    # non-monomial radical-free case instead: impossible here, every entry
    # is a unit; confirm iso-reduction handles a full 2x2 matrix
    f = B.cat.field
    m = Mor("X", "X", (f.one,))
    w = BlockMorphism(("X", "X"), ("X", "X"), ((m, m), (m, Mor("X", "X", (f.of(2),)))))
    fo, q, r = B.cone_data(w)
    assert fo == ()  # invertible 2x2 matrix has zero cone


def test_every_enumerated_triangle_long_exact(fix_a2_backend):
    tris = fix_a2_backend.enumerate_triangles()
    assert len(tris) >= 10
    for t in tris:
        assert fix_a2_backend.verify_long_exact(t) == []
