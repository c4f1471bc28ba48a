"""Pullback-hom, tensor, (co)diagonals, cartesian squares, Whitehead."""
import random

from hypothesis import given, settings
from hypothesis import strategies as st

from fintopos.arrows import (
    codiagonal,
    copower,
    diagonal,
    is_cartesian,
    is_iso_whitehead,
    pullback_hom,
    square_set,
    tensor,
)
from fintopos.finset import FinSet, SetMap
from fintopos.fixtures import (
    fix_epi,
    interval_presheaf,
    set_map_arrow,
    set_presheaf,
    sphere_zero,
    unit_arrow,
)
from fintopos.presheaf import PresheafMap, Square, bang, presheaves_isomorphic


def random_set_arrow(rng, max_size=4):
    n_src = rng.randrange(0, max_size + 1)
    n_tgt = rng.randrange(1, max_size + 1)
    src = [f"s{i}" for i in range(n_src)]
    tgt = [f"t{i}" for i in range(n_tgt)]
    return set_map_arrow(src, tgt, {s: f"t{rng.randrange(n_tgt)}" for s in src})


def test_pullback_hom_of_identity_is_bijection():
    f = fix_epi()
    i = PresheafMap.identity(f.src)
    assert pullback_hom(i, f).is_bijective()
    assert pullback_hom(f, PresheafMap.identity(f.tgt)).is_bijective()


def test_pullback_hom_fold_versus_partial_collapse():
    # w = 2→1 against m: {a,b}→{1,2,3} with m(a)=m(b)=1: by hand there are
    # 4 commuting squares (all pairs (x,x') with common image) and
    # Hom(1, {a,b}) has 2 elements; the gap map is the diagonal h ↦ (h,h)
    w = sphere_zero()
    m = fix_epi()
    ph = pullback_hom(w, m)
    assert len(ph.src) == 2
    assert len(ph.tgt) == 4
    assert ph.is_injective() and not ph.is_surjective()


def test_tensor_unit_is_identity_up_to_iso():
    f = fix_epi()
    t = tensor(unit_arrow().at("*"), f)
    assert presheaves_isomorphic(t.arrow.src, f.src) is not None
    assert presheaves_isomorphic(t.arrow.tgt, f.tgt) is not None


def test_tensor_with_identity_arrow_is_invertible():
    u = SetMap(FinSet.of_size(2), FinSet.of_size(1), {"e0": "e0", "e1": "e0"})
    f = PresheafMap.identity(set_presheaf(["a", "b", "c"]))
    assert tensor(u, f).arrow.is_iso()


def test_tensor_fold_with_unit_arrow():
    # (2→1) □ (∅→1) should be the fold 2 → 1
    u = SetMap(FinSet.of_size(2), FinSet.of_size(1), {"e0": "e0", "e1": "e0"})
    t = tensor(u, unit_arrow())
    assert len(t.arrow.src.values["*"]) == 2
    assert len(t.arrow.tgt.values["*"]) == 1
    assert t.arrow.is_epi()


@given(seed=st.integers(0, 10**6))
@settings(max_examples=25, deadline=None)
def test_tensor_absorbs_isos(seed):
    rng = random.Random(seed)
    f = random_set_arrow(rng)
    n = rng.randrange(1, 4)
    perm = list(range(n))
    rng.shuffle(perm)
    u = SetMap(
        FinSet.of_size(n),
        FinSet.of_size(n),
        {f"e{i}": f"e{perm[i]}" for i in range(n)},
    )
    assert tensor(u, f).arrow.is_iso()
    i = PresheafMap.identity(f.src)
    v = SetMap(FinSet.of_size(2), FinSet.of_size(1), {"e0": "e0", "e1": "e0"})
    assert tensor(v, i).arrow.is_iso()


@given(seed=st.integers(0, 10**6))
@settings(max_examples=25, deadline=None)
def test_pullback_hom_absorbs_isos(seed):
    rng = random.Random(seed)
    f = random_set_arrow(rng)
    iso = PresheafMap.identity(f.src)
    assert pullback_hom(iso, f).is_bijective()
    assert pullback_hom(f, PresheafMap.identity(f.tgt)).is_bijective()


def test_codiagonal_of_identity():
    i = PresheafMap.identity(set_presheaf(["a"]))
    assert codiagonal(i).is_iso()


def test_codiagonal_of_fold():
    # ∇(2→1) = (1∐₂1 → 1) = id up to iso
    assert codiagonal(sphere_zero()).is_iso()


def test_codiagonal_of_unit_arrow_is_fold():
    nabla = codiagonal(unit_arrow())
    assert len(nabla.src.values["*"]) == 2
    assert len(nabla.tgt.values["*"]) == 1


def test_codiagonal_depth_zero_is_input():
    f = fix_epi()
    assert codiagonal(f, 0) == f


def test_diagonal_of_mono_is_invertible():
    m = set_map_arrow(["a"], ["1", "2"], {"a": "1"})
    assert diagonal(m).is_iso()


def test_diagonal_of_fold():
    # Δ(2→1): 2 → 2×2, injective, not surjective
    d = diagonal(sphere_zero())
    assert len(d.src.values["*"]) == 2
    assert len(d.tgt.values["*"]) == 4
    assert d.is_mono() and not d.is_epi()


def test_second_diagonal_always_invertible_at_set_level():
    rng = random.Random(7)
    for _ in range(20):
        f = random_set_arrow(rng)
        assert diagonal(f, 2).is_iso()


def test_whitehead_trivial_cases():
    i = PresheafMap.identity(set_presheaf(["a", "b"]))
    assert is_iso_whitehead(i)
    assert not is_iso_whitehead(sphere_zero())
    assert not is_iso_whitehead(unit_arrow())


def test_whitehead_agrees_with_bijectivity_on_random_maps():
    rng = random.Random(20240713)
    for _ in range(200):
        f = random_set_arrow(rng, max_size=6)
        assert is_iso_whitehead(f) == f.is_iso()


def test_whitehead_on_interval_presheaf_maps():
    F = interval_presheaf(["a", "b"], ["x", "y"], {"x": "a", "y": "b"})
    assert is_iso_whitehead(PresheafMap.identity(F))
    assert not is_iso_whitehead(bang(F))


def test_identity_square_is_cartesian():
    f = fix_epi()
    sq = Square(f, f, PresheafMap.identity(f.src), PresheafMap.identity(f.tgt))
    assert is_cartesian(sq)


def test_composition_square_is_bicartesian_in_arrows():
    # the square of arrows [f → gf over 1_B → g] is a pullback computed
    # componentwise: sources give B ×_B A = A, targets give B ×_C C = B
    from fintopos.presheaf import limit_gap, pullback

    f = set_map_arrow(["a", "b"], ["m", "n"], {"a": "m", "b": "m"})
    g = set_map_arrow(["m", "n"], ["z"], {"m": "z", "n": "z"})
    gf = g.compose(f)
    id_B = PresheafMap.identity(f.tgt)

    # source level: cospan B --id--> B <--f-- A, cone legs (f, id_A)
    lim_s, D_s = pullback(id_B, f)
    gap_s = limit_gap(lim_s, D_s, {"a": f, "l": f, "r": PresheafMap.identity(f.src)}, f.src)
    assert gap_s.is_iso()

    # target level: cospan B --g--> C <--id-- C, cone legs (id_B, g)
    lim_t, D_t = pullback(g, PresheafMap.identity(g.tgt))
    gap_t = limit_gap(lim_t, D_t, {"a": g, "l": id_B, "r": g}, f.tgt)
    assert gap_t.is_iso()


def test_non_cartesian_square_detected():
    # collapse a fiber: top kills the distinction the pullback keeps
    f = set_map_arrow(["a", "b"], ["z"], {"a": "z", "b": "z"})
    g = set_map_arrow(["c"], ["z"], {"c": "z"})
    top = PresheafMap(
        g.src, f.src, {"*": SetMap(g.src.values["*"], f.src.values["*"], {"c": "a"})}
    )
    sq = Square(g, f, top, PresheafMap.identity(f.tgt))
    assert not is_cartesian(sq)


def test_pullback_hom_tensor_adjunction():
    # ⟨⟨u□w, f⟩⟩ is the set-level pullback-hom of u against ⟨⟨w,f⟩⟩:
    # with u = 2→1 the transposed square set consists of pairs of points
    # of Hom(t w, s f) sharing an image square, and sources agree
    rng = random.Random(3)
    u = SetMap(FinSet.of_size(2), FinSet.of_size(1), {"e0": "e0", "e1": "e0"})
    for _ in range(10):
        w = random_set_arrow(rng, 3)
        f = random_set_arrow(rng, 3)
        uw = tensor(u, w).arrow
        left = pullback_hom(uw, f)
        inner = pullback_hom(w, f)
        assert len(left.src) == len(inner.src)
        sq_left = len(square_set(uw, f))
        sq_right = sum(
            1
            for a in inner.src
            for b in inner.src
            if inner(a) == inner(b)
        )
        assert sq_left == sq_right


def test_diagonal_of_pullback_hom_matches_codiagonal_transpose():
    # Δ⟨⟨g,f⟩⟩ and ⟨⟨∇g,f⟩⟩ have the same source and target sizes (n = 1)
    rng = random.Random(11)
    for _ in range(8):
        g = random_set_arrow(rng, 3)
        f = random_set_arrow(rng, 3)
        lhs = pullback_hom(codiagonal(g), f)
        rhs = pullback_hom(g, f)
        # Δ of a set map X → Y is X → X×_Y X
        src_pairs = sum(
            1
            for a in rhs.src
            for b in rhs.src
            if rhs(a) == rhs(b)
        )
        assert len(lhs.tgt) == src_pairs
        assert len(lhs.src) == len(rhs.src)


def test_copower_sizes():
    S = FinSet.of_size(3)
    F = set_presheaf(["a", "b"])
    assert len(copower(S, F).values["*"]) == 6
