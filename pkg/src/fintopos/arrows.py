"""Arrow-category calculus: pullback-hom, tensor, codiagonal, diagonal.

Maps of presheaves are treated as objects of the arrow category; a map of
sets can act on them through copowers. The pullback-hom lands in finite
sets, the tensor (pushout-product with a set map) lands back in arrows.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import MalformedDiagram
from .finset import FinSet, SetMap, sort_key
from .guard import check_size
from .presheaf import (
    Presheaf,
    PresheafMap,
    Square,
    colimit_cogap,
    decode_nat,
    encode_components,
    limit_gap,
    nat_hom,
    pullback,
    pushout,
)


# -- squares and pullback-hom -------------------------------------------------


def square_set(w: PresheafMap, f: PresheafMap) -> FinSet:
    """All commutative squares w → f, encoded as (top, bottom) pairs."""
    tops = nat_hom(w.src, f.src)
    bots = nat_hom(w.tgt, f.tgt)
    check_size(len(tops) * max(len(bots), 1), "square enumeration")
    squares = []
    for t_enc in tops:
        top = decode_nat(w.src, f.src, t_enc)
        ft = f.compose(top)
        for b_enc in bots:
            bottom = decode_nat(w.tgt, f.tgt, b_enc)
            if bottom.compose(w) == ft:
                squares.append((t_enc, b_enc))
    return FinSet(sorted(squares, key=sort_key))


def decode_square(w: PresheafMap, f: PresheafMap, enc) -> Square:
    t_enc, b_enc = enc
    return Square(
        w,
        f,
        decode_nat(w.src, f.src, t_enc),
        decode_nat(w.tgt, f.tgt, b_enc),
    )


def pullback_hom(w: PresheafMap, f: PresheafMap) -> SetMap:
    """The gap map Hom(t w, s f) → Hom(w, f), h ↦ (h∘w, f∘h)."""
    src = nat_hom(w.tgt, f.src)
    tgt = square_set(w, f)
    assignment = {}
    for enc in src:
        h = decode_nat(w.tgt, f.src, enc)
        top = h.compose(w)
        bottom = f.compose(h)
        assignment[enc] = (
            encode_components(w.src, f.src, top.components),
            encode_components(w.tgt, f.tgt, bottom.components),
        )
    return SetMap(src, tgt, assignment)


# -- copowers and tensor -------------------------------------------------------


def copower(S: FinSet, F: Presheaf) -> Presheaf:
    """The S-indexed coproduct of copies of F; elements are (s, x) pairs."""
    check_size(len(S) * max(F.total_size(), 1), "copower")
    values = {
        X: FinSet(tuple((s, x) for s in S for x in F.values[X]))
        for X in F.base.objects
    }
    restriction = {}
    for m in F.base.morphisms:
        restriction[m.id] = SetMap(
            values[m.tgt],
            values[m.src],
            {(s, x): (s, F.restriction[m.id](x)) for (s, x) in values[m.tgt]},
        )
    return Presheaf(F.base, values, restriction)


def copower_map(u: SetMap, f: PresheafMap) -> PresheafMap:
    """The map S·F → T·G induced by u: S → T and f: F → G."""
    src = copower(u.src, f.src)
    tgt = copower(u.tgt, f.tgt)
    components = {
        X: SetMap(
            src.values[X],
            tgt.values[X],
            {(s, x): (u(s), f.at(X)(x)) for (s, x) in src.values[X]},
        )
        for X in f.src.base.objects
    }
    return PresheafMap(src, tgt, components)


@dataclass
class TensorResult:
    """The pushout-product u □ f with the square it came from."""

    arrow: PresheafMap
    left_leg: PresheafMap  # B·X → source of the arrow
    right_leg: PresheafMap  # A·Y → source of the arrow


def tensor(u: SetMap, f: PresheafMap) -> TensorResult:
    """External pushout-product: the cogap (B·X) ∐_(A·X) (A·Y) → B·Y."""
    id_A = SetMap.identity(u.src)
    id_B = SetMap.identity(u.tgt)
    id_X = PresheafMap.identity(f.src)
    id_Y = PresheafMap.identity(f.tgt)
    to_BX = copower_map(u, id_X)  # A·X → B·X
    to_AY = copower_map(id_A, f)  # A·X → A·Y
    col, D = pushout(to_BX, to_AY)
    BY = copower(u.tgt, f.tgt)
    cocone = {
        "l": copower_map(id_B, f),  # B·X → B·Y
        "r": copower_map(u, id_Y),  # A·Y → B·Y
    }
    cocone["a"] = cocone["l"].compose(to_BX)
    arrow = colimit_cogap(col, D, cocone, BY)
    return TensorResult(arrow, col.legs["l"], col.legs["r"])


# -- codiagonal and diagonal ---------------------------------------------------


def codiagonal(f: PresheafMap, n: int = 1) -> PresheafMap:
    """The n-th iterated codiagonal; ∇⁰f = f, ∇f = cogap of f∐f → t f."""
    if n < 0:
        raise ValueError("codiagonal depth must be nonnegative")
    g = f
    for _ in range(n):
        col, D = pushout(g, g)
        id_t = PresheafMap.identity(g.tgt)
        cocone = {"l": id_t, "r": id_t, "a": g}
        g = colimit_cogap(col, D, cocone, g.tgt)
    return g


def diagonal(f: PresheafMap, n: int = 1) -> PresheafMap:
    """The n-th iterated diagonal; Δ⁰f = f, Δf = gap map s f → s f ×_t f s f."""
    if n < 0:
        raise ValueError("diagonal depth must be nonnegative")
    g = f
    for _ in range(n):
        lim, D = pullback(g, g)
        id_s = PresheafMap.identity(g.src)
        cone = {"l": id_s, "r": id_s, "a": g}
        g = limit_gap(lim, D, cone, g.src)
    return g


# -- predicates ----------------------------------------------------------------


def is_cartesian(sq: Square) -> bool:
    """True iff the gap map into the pullback is an objectwise bijection."""
    sq.validate()
    lim, D = pullback(sq.bottom, sq.f)
    gap = limit_gap(
        lim, D, {"a": sq.f.compose(sq.top), "l": sq.w, "r": sq.top}, sq.w.src
    )
    return gap.is_iso()


def is_iso_whitehead(f: PresheafMap) -> bool:
    """Invertibility via covers: f and Δf objectwise surjective.

    At set level the second diagonal is always invertible, so the cover
    conditions stop at depth one; the result agrees with a direct
    objectwise-bijectivity check.
    """
    if not f.is_epi():
        return False
    return diagonal(f, 1).is_epi()


def arrow_iso(a: PresheafMap, b: PresheafMap):
    """Search for an isomorphism a ≅ b in the arrow category.

    Returns a pair of invertible maps (σ: s a → s b, τ: t a → t b) with
    b∘σ = τ∘a, or None. Candidates are pruned by value cardinalities.
    """
    for X in a.src.base.objects:
        if len(a.src.values[X]) != len(b.src.values[X]):
            return None
        if len(a.tgt.values[X]) != len(b.tgt.values[X]):
            return None
    taus = [t for t in _all_isos(a.tgt, b.tgt)]
    if not taus:
        return None
    for sigma in _all_isos(a.src, b.src):
        bs = b.compose(sigma)
        for tau in taus:
            if tau.compose(a) == bs:
                return sigma, tau
    return None


def _all_isos(F: Presheaf, G: Presheaf):
    for enc in nat_hom(F, G):
        t = decode_nat(F, G, enc)
        if t.is_iso():
            yield t


def arrows_isomorphic(a: PresheafMap, b: PresheafMap) -> bool:
    return arrow_iso(a, b) is not None
