"""Presheaf layer: Yoneda, hom-sets, pointwise (co)limits, exponentials."""
import pytest

from fintopos.errors import MalformedDiagram
from fintopos.fixtures import (
    constant_presheaf,
    interval_category,
    interval_presheaf,
    interval_sub_u,
    point_category,
    set_presheaf,
    sierpinski_presheaf,
    sierpinski_site,
)
from fintopos.presheaf import (
    PresheafMap,
    bang,
    binary_product,
    exponential,
    initial,
    is_subterminal,
    join,
    nat_hom,
    presheaves_isomorphic,
    pushout,
    support,
    terminal,
    yoneda,
    yoneda_element,
    yoneda_map,
)


def test_yoneda_on_point_is_terminal():
    C = point_category()
    y = yoneda(C, "*")
    assert all(len(y.values[X]) == 1 for X in C.objects)


def test_yoneda_on_interval():
    C = interval_category()
    y0 = yoneda(C, "0")
    assert len(y0.values["0"]) == 1
    assert len(y0.values["1"]) == 0
    y1 = yoneda(C, "1")
    assert len(y1.values["0"]) == 1
    assert len(y1.values["1"]) == 1


def test_yoneda_on_sierpinski_hom_to_u():
    C = sierpinski_site()
    yU = yoneda(C, "U")
    # homs read off the poset: P→U exists, V and X have no map to U
    assert len(yU.values["P"]) == 1
    assert len(yU.values["U"]) == 1
    assert len(yU.values["V"]) == 0
    assert len(yU.values["X"]) == 0


def test_yoneda_lemma_bijection():
    for C, F in (
        (sierpinski_site(), sierpinski_presheaf()),
        (interval_category(), interval_presheaf(["a", "b"], ["x"], {"x": "a"})),
    ):
        for X in C.objects:
            homs = nat_hom(yoneda(C, X), F)
            assert len(homs) == len(F.values[X])
            # evaluation at the identity realizes the bijection
            seen = set()
            for enc in homs:
                # decode by the classifying construction round trip
                for e in F.values[X]:
                    if yoneda_element(F, X, e).key()[2] == enc:
                        seen.add(e)
            assert seen == set(F.values[X].elements)


def test_nat_hom_from_initial_is_singleton():
    C = sierpinski_site()
    assert len(nat_hom(initial(C), sierpinski_presheaf())) == 1


def test_nat_hom_constant_two_on_interval():
    C = interval_category()
    d2 = constant_presheaf(C, ["0", "1"])
    assert len(nat_hom(d2, d2)) == 4


def test_pushout_of_representables_on_sierpinski():
    C = sierpinski_site()
    yU, yV, yP = yoneda(C, "U"), yoneda(C, "V"), yoneda(C, "P")
    to_u = yoneda_map(C, "P->U")
    to_v = yoneda_map(C, "P->V")
    col, _ = pushout(to_u, to_v)
    # objectwise: at X everything is empty; at U and V a single class
    assert len(col.apex.values["X"]) == 0
    assert len(col.apex.values["U"]) == 1
    assert len(col.apex.values["V"]) == 1
    assert len(col.apex.values["P"]) == 1  # the two copies of P→U, P→V glue


def test_product_with_terminal_is_identity_sized():
    C = sierpinski_site()
    F = sierpinski_presheaf()
    P, p1, _ = binary_product(F, terminal(C))
    assert all(len(P.values[X]) == len(F.values[X]) for X in C.objects)
    assert p1.is_iso()


def test_empty_coproduct_is_initial():
    C = sierpinski_site()
    Z = initial(C)
    assert all(len(Z.values[X]) == 0 for X in C.objects)


def test_exponential_unit_laws():
    C = interval_category()
    F = interval_presheaf(["a", "b"], ["x", "y"], {"x": "a", "y": "a"})
    E, _ = exponential(F, terminal(C))
    assert presheaves_isomorphic(E, F) is not None
    E1, _ = exponential(terminal(C), F)
    assert all(len(E1.values[X]) == 1 for X in C.objects)


def test_exponential_by_interval_subterminal():
    # F^U on the interval collapses to the degenerate presheaf on F(0)
    F = interval_presheaf(["a", "b"], ["x", "y", "z"], {"x": "a", "y": "a", "z": "b"})
    U = interval_sub_u()
    E, _ = exponential(F, U)
    assert len(E.values["0"]) == 2
    assert len(E.values["1"]) == 2
    assert E.restriction["0->1"].is_bijective()


def test_exponential_adjunction_cardinalities():
    C = interval_category()
    F = interval_presheaf(["a", "b"], ["x"], {"x": "a"})
    G = interval_sub_u()
    E2 = constant_presheaf(C, ["0", "1"])
    FG, _ = exponential(F, G)
    P, _, _ = binary_product(E2, G)
    assert len(nat_hom(P, F)) == len(nat_hom(E2, FG))


def test_join_with_initial_and_terminal():
    C = interval_category()
    F = interval_presheaf(["a", "b"], ["x"], {"x": "a"})
    J, _, _ = join(initial(C), F)
    assert presheaves_isomorphic(J, F) is not None
    J1, _, _ = join(terminal(C), F)
    assert all(len(J1.values[X]) == 1 for X in C.objects)


def test_join_with_interval_subterminal():
    # U ⋈ F has F(1) at level 1 and a point at level 0
    F = interval_presheaf(["a", "b"], ["x", "y", "z"], {"x": "a", "y": "a", "z": "b"})
    U = interval_sub_u()
    J, _, _ = join(U, F)
    assert len(J.values["0"]) == 1
    assert len(J.values["1"]) == 3


def test_join_on_subterminal_is_idempotent():
    F = interval_presheaf(["a", "b"], ["x"], {"x": "a"})
    U = interval_sub_u()
    J1, _, _ = join(U, F)
    J2, _, _ = join(U, J1)
    assert presheaves_isomorphic(J1, J2) is not None


def test_support():
    C = interval_category()
    assert support(terminal(C)) == terminal(C)
    assert support(initial(C)) == initial(C)
    U = interval_sub_u()
    assert support(U) == U


def test_is_subterminal():
    C = interval_category()
    assert is_subterminal(terminal(C))
    assert is_subterminal(interval_sub_u())
    assert not is_subterminal(constant_presheaf(C, ["0", "1"]))


def test_presheaf_validate_catches_broken_functoriality():
    from fintopos.finset import SetMap

    # two sections over P separate the two restriction paths X → P, so
    # redirecting the composite breaks F(P→X) = F(P→U)∘F(U→X)
    F = sierpinski_presheaf(at_p=("p0", "p1"), res_up={"u0": "p0", "u1": "p1"})
    bad = dict(F.restriction)
    bad["P->X"] = SetMap(F.values["X"], F.values["P"], {"x0": "p1"})
    broken = type(F)(F.base, F.values, bad)
    with pytest.raises(MalformedDiagram):
        broken.validate()


def test_naturality_validation():
    C = point_category()
    F = set_presheaf(["a", "b"])
    G = set_presheaf(["x"])
    m = bang(F)
    m.validate()
    assert m.tgt == terminal(C)
