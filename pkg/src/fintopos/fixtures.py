"""Shared desk-scale fixtures: base sites, presheaves, and families.

Three recurring setups:

* the one-object base (plain finite sets seen as presheaves),
* the interval base ``I = {0 → 1}`` with its subterminal ``U`` (empty at
  1, a point at 0),
* the four-object poset site ``P → U → X, P → V → X`` with the topology
  whose only non-maximal cover of ``X`` is the sieve generated by
  ``U → X`` and ``V → X``.
"""
from __future__ import annotations

from .fincat import FinCategory, poset_category, terminal_category
from .finset import FinSet, SetMap
from .presheaf import Presheaf, PresheafMap


def point_category() -> FinCategory:
    return terminal_category("*")


def interval_category() -> FinCategory:
    return poset_category(["0", "1"], [("0", "1")])


def walking_arrow() -> FinCategory:
    return poset_category(["a", "b"], [("a", "b")])


def chain_category() -> FinCategory:
    return poset_category(["0", "1", "2"], [("0", "1"), ("1", "2")])


def sierpinski_site() -> FinCategory:
    """The poset with a top object covered by two opens meeting in a third."""
    return poset_category(
        ["P", "U", "V", "X"], [("P", "U"), ("P", "V"), ("U", "X"), ("V", "X")]
    )


def sierpinski_covers() -> dict:
    """Sieve generators for the standard topology on the sierpinski site."""
    return {
        "X": [["U->X", "V->X"], ["id_X"]],
        "U": [["id_U"]],
        "V": [["id_V"]],
        "P": [["id_P"]],
    }


# -- presheaves over the point -------------------------------------------------


def set_presheaf(elements, C: FinCategory | None = None) -> Presheaf:
    """A finite set seen as a presheaf over the one-object base."""
    C = C or point_category()
    s = FinSet(tuple(elements))
    return Presheaf(C, {"*": s}, {"id_*": SetMap.identity(s)})


def set_map_arrow(src_elements, tgt_elements, assignment) -> PresheafMap:
    """A map of finite sets as an arrow over the one-object base."""
    F = set_presheaf(src_elements)
    G = set_presheaf(tgt_elements)
    return PresheafMap(F, G, {"*": SetMap(F.values["*"], G.values["*"], assignment)})


def fix_epi() -> PresheafMap:
    """The map {a, b} → {1, 2, 3} collapsing a and b onto 1."""
    return set_map_arrow(["a", "b"], ["1", "2", "3"], {"a": "1", "b": "1"})


def sphere_zero() -> PresheafMap:
    """The fold map 2 → 1 over the point."""
    return set_map_arrow(["0", "1"], ["*"], {"0": "*", "1": "*"})


def unit_arrow() -> PresheafMap:
    """The map ∅ → 1 over the point (the tensor unit)."""
    return set_map_arrow([], ["*"], {})


# -- presheaves on the interval --------------------------------------------------


def interval_presheaf(at0, at1, res) -> Presheaf:
    """A presheaf on I = {0 → 1}: two sets and one restriction F(1) → F(0)."""
    C = interval_category()
    s0, s1 = FinSet(tuple(at0)), FinSet(tuple(at1))
    return Presheaf(
        C,
        {"0": s0, "1": s1},
        {
            "id_0": SetMap.identity(s0),
            "id_1": SetMap.identity(s1),
            "0->1": SetMap(s1, s0, dict(res)),
        },
    )


def interval_sub_u() -> Presheaf:
    """The subterminal U on I: a point at 0, empty at 1."""
    return interval_presheaf(["*"], [], {})


# -- the standard presheaf fixture on the sierpinski site ------------------------


def sierpinski_presheaf(
    at_x=("x0",),
    at_u=("u0", "u1"),
    at_v=("v0",),
    at_p=("p0",),
    res_xu=None,
    res_xv=None,
    res_up=None,
    res_vp=None,
) -> Presheaf:
    """The running non-sheaf fixture: one section on X, two on U.

    Restrictions default to the unique/first-element choices; the square
    over P automatically commutes because P has a single section.
    """
    C = sierpinski_site()
    vals = {
        "X": FinSet(tuple(at_x)),
        "U": FinSet(tuple(at_u)),
        "V": FinSet(tuple(at_v)),
        "P": FinSet(tuple(at_p)),
    }
    res_xu = res_xu or {e: at_u[0] for e in at_x}
    res_xv = res_xv or {e: at_v[0] for e in at_x}
    res_up = res_up or {e: at_p[0] for e in at_u}
    res_vp = res_vp or {e: at_p[0] for e in at_v}
    res_xp = {e: res_up[res_xu[e]] for e in at_x}
    restriction = {
        "id_X": SetMap.identity(vals["X"]),
        "id_U": SetMap.identity(vals["U"]),
        "id_V": SetMap.identity(vals["V"]),
        "id_P": SetMap.identity(vals["P"]),
        "U->X": SetMap(vals["X"], vals["U"], res_xu),
        "V->X": SetMap(vals["X"], vals["V"], res_xv),
        "P->U": SetMap(vals["U"], vals["P"], res_up),
        "P->V": SetMap(vals["V"], vals["P"], res_vp),
        "P->X": SetMap(vals["X"], vals["P"], res_xp),
    }
    F = Presheaf(C, vals, restriction)
    F.validate()
    return F


def constant_presheaf(C: FinCategory, elements) -> Presheaf:
    s = FinSet(tuple(elements))
    return Presheaf(
        C, {X: s for X in C.objects}, {m.id: SetMap.identity(s) for m in C.morphisms}
    )
