import json

import numpy as np
import pytest

from skewprod import errors
from skewprod.group import build_cyclic, build_dihedral, build_quaternion, build_semidihedral, parse_descriptor
from skewprod.skew import enumerate_skew_morphisms, skew_product
from skewprod.structure import (all_subgroups, as_subgroup, aut_order, center, centralizer, core_of,
                                derived_subgroup, fitting, frattini, induced_group, is_maximal_class_2group,
                                is_normal, mho, nc_quotient_order, nilpotency_class, normal_subgroups,
                                normalizer, o_p, omega1, structure_report, subgroup_generated, sylow_p, whole)


def test_subgroup_generated():
    D8 = build_dihedral(8)
    assert subgroup_generated(D8, [D8.gen("a")]).order == 4
    assert subgroup_generated(D8, []).members == (0,)
    Q8 = build_quaternion(8)
    z = subgroup_generated(Q8, [Q8.power(Q8.gen("a"), 2)])
    assert z.order == 2
    assert [H for H in all_subgroups(Q8) if H.order == 2] == [z]
    with pytest.raises(errors.InvalidElement):
        subgroup_generated(D8, [8])


def test_as_subgroup_checks_closure():
    D8 = build_dihedral(8)
    with pytest.raises(errors.InvalidSubgroup):
        as_subgroup(D8, [0, 2])
    assert as_subgroup(D8, [0, 4]).order == 2


def test_core_examples():
    D8 = build_dihedral(8)
    B = subgroup_generated(D8, [D8.gen("b")])
    assert core_of(D8, B).order == 1
    A = subgroup_generated(D8, [D8.gen("a")])
    assert core_of(D8, A) == A


def test_core_of_family1_complement():
    from skewprod.classifier import FamilyParams, build_family_group
    sp = build_family_group(FamilyParams("F1", "D", 5, 1, r=15, s=0))
    assert core_of(sp.x, sp.c_part).order == 1


@pytest.mark.parametrize("desc", ["dihedral:8", "quaternion:8", "dihedral:12", "quaternion:16", "cyclic:6"])
def test_core_is_largest_normal(desc):
    G = parse_descriptor(desc)
    normals = normal_subgroups(G)
    for H in all_subgroups(G):
        C = core_of(G, H)
        assert is_normal(G, C)
        for N in normals:
            if N.issubset(H):
                assert N.issubset(C)


def test_characteristic_subgroups():
    Q8 = build_quaternion(8)
    assert center(Q8).members == (0, 4)
    for n in (3, 4, 5):
        D = build_dihedral(1 << n)
        a2 = subgroup_generated(D, [D.power(D.gen("a"), 2)])
        assert derived_subgroup(D) == a2
    Z8 = build_cyclic(8)
    assert mho(Z8, 1) == subgroup_generated(Z8, [2])
    assert omega1(Z8).order == 2
    with pytest.raises(errors.InvalidParameter):
        omega1(build_cyclic(6))


def test_frattini():
    D16 = build_dihedral(16)
    assert frattini(D16) == subgroup_generated(D16, [D16.power(D16.gen("a"), 2)])
    assert frattini(build_cyclic(6)).order == 1
    # non-nilpotent path through the lattice: S3 has trivial Frattini subgroup
    assert frattini(build_dihedral(6)).order == 1


def test_sylow_and_fitting_on_order_24():
    D8 = build_dihedral(8)
    s3 = next(s for s in enumerate_skew_morphisms(D8).skew_morphisms if s.sigma_order == 3)
    X = skew_product(s3).x
    assert X.order == 24
    assert sylow_p(X, 2).order == 8 and sylow_p(X, 3).order == 3
    # X is S4: O_2 is the Klein four-group, of index 6
    O2 = o_p(X, 2)
    assert O2.order == 4 and is_normal(X, O2)
    assert center(X).order == 1 and int((X.orders() == 2).sum()) == 9
    F = fitting(X)
    assert nilpotency_class(induced_group(F)) is not None
    assert centralizer(X, F).issubset(F)


@pytest.mark.parametrize("G", [build_dihedral(16), build_quaternion(16), build_cyclic(9)])
def test_p_group_fitting(G):
    W = whole(G)
    assert fitting(G) == W
    p = 3 if G.order == 9 else 2
    assert o_p(G, p) == W


def test_centralizer_normalizer():
    D8 = build_dihedral(8)
    A = subgroup_generated(D8, [D8.gen("a")])
    assert centralizer(D8, A) == A
    assert normalizer(D8, A) == whole(D8)


@pytest.mark.parametrize("G", [build_dihedral(16), build_quaternion(16)])
def test_nc_quotient_divides_aut(G):
    for H in all_subgroups(G):
        k = nc_quotient_order(G, H)
        assert aut_order(induced_group(H)) % k == 0


def test_nilpotency_and_maximal_class():
    assert nilpotency_class(build_dihedral(32)) == 4 and is_maximal_class_2group(build_dihedral(32))
    assert nilpotency_class(build_cyclic(8)) == 1 and not is_maximal_class_2group(build_cyclic(8))
    assert nilpotency_class(build_quaternion(16)) == 3 and is_maximal_class_2group(build_quaternion(16))
    assert nilpotency_class(build_dihedral(6)) is None


def test_aut_order():
    assert aut_order(build_cyclic(8)) == 4
    assert aut_order(build_quaternion(8)) == 24
    assert aut_order(build_dihedral(8)) == 8
    with pytest.raises(errors.TooLarge):
        aut_order(build_dihedral(128))


def test_structure_report_json():
    rep = structure_report(build_semidihedral(16))
    data = json.loads(rep.to_json())
    assert data["is_maximal_class"] is True
    assert data["nilpotency_class"] == 3
    for key in ("center", "derived", "frattini", "fitting", "o2"):
        assert data[key]["members"] == sorted(data[key]["members"])
