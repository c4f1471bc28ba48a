"""Factorization machines and the bounded fixed-point iteration driver.

Four ways to improve a map towards the right class of the system a family
generates: the free-lift step (``q``), the same step over the
codiagonal-completed family (``gabriel_ulmer``), the coend-corrected step
(``kelly``), and the comma-colimit step (``plus``). The driver composes
units until the fixed-point criterion fires, and always certifies the
resulting right factor by explicit orthogonality checks.

Comma categories of a family over a map are built through
:func:`fincat.comma` against the finite full subcategory of the arrow
category spanned by the family and the target.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .arrows import is_iso_whitehead, square_set
from .errors import NonConvergence, StepUndefined
from .fincat import CommaCategory, FinCategory, Functor, Morphism, comma, discrete_category, render_id, terminal_category
from .finset import FinSet, SetMap, sort_key
from .guard import check_size
from .ortho import right_class_membership, unique_filler
from .presheaf import (
    Presheaf,
    PresheafColimit,
    PresheafDiagram,
    PresheafMap,
    Square,
    bang,
    colimit_cogap,
    decode_nat,
    encode_components,
    nat_hom,
    pointwise_colimit,
    pushout,
    yoneda,
    yoneda_map,
)


# -- map families --------------------------------------------------------------


@dataclass
class MapFamily:
    """A functor from a finite indexing category into the arrow category.

    ``arrows`` assigns a presheaf map to every indexing object and
    ``squares`` a commutative square ``(top, bottom)`` to every indexing
    morphism.
    """

    indexing: FinCategory
    arrows: dict
    squares: dict
    base: FinCategory

    def validate(self) -> None:
        for w in self.indexing.objects:
            a = self.arrows.get(w)
            if a is None or a.src.base != self.base:
                raise StepUndefined(f"family arrow missing or off-base at {w}")
        for m in self.indexing.morphisms:
            top, bottom = self.squares[m.id]
            left, right = self.arrows[m.src], self.arrows[m.tgt]
            if right.compose(top) != bottom.compose(left):
                raise StepUndefined(f"family square does not commute at {m.id}")
        for w in self.indexing.objects:
            top, bottom = self.squares[self.indexing.id_of(w)]
            if top != PresheafMap.identity(self.arrows[w].src):
                raise StepUndefined(f"identity square broken at {w}")
        for (g, f), gf in self.indexing.compose_table.items():
            tg, bg = self.squares[g]
            tf, bf = self.squares[f]
            if self.squares[gf] != (tg.compose(tf), bg.compose(bf)):
                raise StepUndefined(f"square composition broken at ({g},{f})")

    @staticmethod
    def discrete(arrows: dict, base: FinCategory | None = None) -> "MapFamily":
        """A family with no morphisms besides identities."""
        if base is None:
            if not arrows:
                raise StepUndefined("empty discrete family needs an explicit base")
            base = next(iter(arrows.values())).src.base
        names = sorted(arrows)
        indexing = discrete_category(names)
        squares = {
            f"id_{w}": (
                PresheafMap.identity(arrows[w].src),
                PresheafMap.identity(arrows[w].tgt),
            )
            for w in names
        }
        fam = MapFamily(indexing, dict(arrows), squares, base)
        fam.validate()
        return fam

    @staticmethod
    def full(arrows: dict, base: FinCategory | None = None) -> "MapFamily":
        """The full subcategory of the arrow category spanned by ``arrows``."""
        if base is None:
            if not arrows:
                raise StepUndefined("empty full family needs an explicit base")
            base = next(iter(arrows.values())).src.base
        named = sorted(arrows.items())
        indexing, registry = arr_subcategory(named)
        squares = {mid: (data[2], data[3]) for mid, data in registry.items()}
        fam = MapFamily(indexing, dict(arrows), squares, base)
        fam.validate()
        return fam

    def objects(self):
        return self.indexing.objects

    def arrow(self, name: str) -> PresheafMap:
        return self.arrows[name]


def arr_subcategory(named_arrows):
    """The finite full subcategory of the arrow category on given arrows.

    Returns a FinCategory whose objects are the arrow names, plus a
    registry mapping each morphism id to ``(src name, tgt name, top map,
    bottom map)``. Hom sets are all commutative squares.
    """
    names = [n for n, _ in named_arrows]
    arrows = dict(named_arrows)
    mors = []
    registry = {}
    for a in names:
        for b in names:
            sqs = square_set(arrows[a], arrows[b])
            check_size(len(mors) + len(sqs), "arrow subcategory morphisms")
            for enc in sqs:
                mid = render_id(["sq", a, b, enc])
                top = decode_nat(arrows[a].src, arrows[b].src, enc[0])
                bottom = decode_nat(arrows[a].tgt, arrows[b].tgt, enc[1])
                mors.append(Morphism(mid, a, b))
                registry[mid] = (a, b, top, bottom)

    def square_id(a, b, top, bottom):
        enc = (
            encode_components(arrows[a].src, arrows[b].src, top.components),
            encode_components(arrows[a].tgt, arrows[b].tgt, bottom.components),
        )
        return render_id(["sq", a, b, enc])

    identity = {
        n: square_id(
            n, n, PresheafMap.identity(arrows[n].src), PresheafMap.identity(arrows[n].tgt)
        )
        for n in names
    }
    compose = {}
    for f in mors:
        for g in mors:
            if f.tgt != g.src:
                continue
            a, b, top_f, bot_f = registry[f.id]
            _b, c, top_g, bot_g = registry[g.id]
            compose[(g.id, f.id)] = square_id(
                a, c, top_g.compose(top_f), bot_g.compose(bot_f)
            )
    cat = FinCategory(names, mors, identity, compose)
    cat.validate()
    return cat, registry


# -- comma categories of a family over a map ----------------------------------


_TARGET = "⟨target⟩"


@dataclass
class CommaData:
    """The comma category of a family over one arrow, with its diagrams.

    ``tops[o]`` and ``bottoms[o]`` are the square components of the comma
    object ``o``; the domain and codomain diagrams send ``o`` to the source
    and target of its family arrow.
    """

    shape: FinCategory
    windex: dict  # comma object -> family object name
    tops: dict  # comma object -> PresheafMap s w → s f
    bottoms: dict  # comma object -> PresheafMap t w → t f
    domain: PresheafDiagram
    codomain: PresheafDiagram
    by_square: dict  # (family object, top enc, bottom enc) -> comma object id


def comma_over_arrow(W: MapFamily, f: PresheafMap) -> CommaData:
    """W↓f: objects are pairs (family object, commutative square into f)."""
    if _TARGET in W.indexing.objects:
        raise StepUndefined("reserved target name used by a family")
    named = [(w, W.arrows[w]) for w in W.indexing.objects] + [(_TARGET, f)]
    T, registry = arr_subcategory(named)

    F = Functor(
        W.indexing,
        T,
        {w: w for w in W.indexing.objects},
        {
            m.id: render_id(
                [
                    "sq",
                    m.src,
                    m.tgt,
                    (
                        encode_components(
                            W.arrows[m.src].src,
                            W.arrows[m.tgt].src,
                            W.squares[m.id][0].components,
                        ),
                        encode_components(
                            W.arrows[m.src].tgt,
                            W.arrows[m.tgt].tgt,
                            W.squares[m.id][1].components,
                        ),
                    ),
                ]
            )
            for m in W.indexing.morphisms
        },
    )
    point = terminal_category("!")
    G = Functor(point, T, {"!": _TARGET}, {"id_!": T.id_of(_TARGET)})
    c = comma(F, G)

    windex, tops, bottoms, by_square = {}, {}, {}, {}
    for oid, (w, _pt, mid) in c.triples.items():
        _a, _b, top, bottom = registry[mid]
        windex[oid] = w
        tops[oid] = top
        bottoms[oid] = bottom
        by_square[
            (
                w,
                encode_components(W.arrows[w].src, f.src, top.components),
                encode_components(W.arrows[w].tgt, f.tgt, bottom.components),
            )
        ] = oid

    dom_presheaves = {o: W.arrows[windex[o]].src for o in c.category.objects}
    cod_presheaves = {o: W.arrows[windex[o]].tgt for o in c.category.objects}
    dom_maps, cod_maps = {}, {}
    for m in c.category.morphisms:
        u, _v = c.pairs[m.id]
        top, bottom = W.squares[u]
        dom_maps[m.id] = top
        cod_maps[m.id] = bottom
    domain = PresheafDiagram(c.category, W.base, dom_presheaves, dom_maps)
    codomain = PresheafDiagram(c.category, W.base, cod_presheaves, cod_maps)
    return CommaData(c.category, windex, tops, bottoms, domain, codomain, by_square)


def comma_over_object(W: MapFamily, X: Presheaf) -> CommaData:
    """W↓X: squares into the identity of X, i.e. maps t w → X."""
    return comma_over_arrow(W, PresheafMap.identity(X))


def induced_between_colimits(
    src: CommaData,
    src_col: PresheafColimit,
    src_diag: PresheafDiagram,
    tgt_col: PresheafColimit,
    tgt_diag: PresheafDiagram,
    obj_map: dict,
    comp: dict,
) -> PresheafMap:
    """The map of colimits induced by an assignment of indexing objects.

    ``comp[o]`` carries the source diagram value at ``o`` into the target
    diagram value at ``obj_map[o]``. Well-definedness on classes is
    verified elementwise.
    """
    components = {}
    for X in src_diag.base.objects:
        assignment = {}
        for o in src_diag.shape.objects:
            P = src_diag.presheaves[o]
            for e in P.values[X]:
                rep = src_col.pointwise[X].legs[o](e)
                val = tgt_col.pointwise[X].legs[obj_map[o]](comp[o].at(X)(e))
                if assignment.setdefault(rep, val) != val:
                    raise StepUndefined("induced colimit map is not well defined")
        components[X] = SetMap(
            src_col.apex.values[X], tgt_col.apex.values[X], assignment
        )
    return PresheafMap(src_col.apex, tgt_col.apex, components)


# -- the q construction --------------------------------------------------------


@dataclass
class QStep:
    unit: PresheafMap
    arrow: PresheafMap


def q_step(f: PresheafMap, W: MapFamily) -> QStep:
    """Free-lift step: push out the sum of all squares of generators into f.

    The family is treated objectwise; its morphisms are ignored.
    """
    W_disc = MapFamily.discrete(dict(W.arrows), base=W.base)
    C = comma_over_arrow(W_disc, f)
    src_col = pointwise_colimit(C.domain)
    tgt_col = pointwise_colimit(C.codomain)
    left = induced_between_colimits(
        C, src_col, C.domain, tgt_col, C.codomain,
        {o: o for o in C.shape.objects},
        {o: W_disc.arrows[C.windex[o]] for o in C.shape.objects},
    )
    top_eval = colimit_cogap(
        src_col, C.domain, {o: C.tops[o] for o in C.shape.objects}, f.src
    )
    bottom_eval = colimit_cogap(
        tgt_col, C.codomain, {o: C.bottoms[o] for o in C.shape.objects}, f.tgt
    )
    col, D = pushout(top_eval, left)
    unit = col.legs["l"]
    arrow = colimit_cogap(
        col, D, {"l": f, "r": bottom_eval, "a": f.compose(top_eval)}, f.tgt
    )
    return QStep(unit, arrow)


def codiagonal_completion(W: MapFamily) -> MapFamily:
    """W ∪ ∇W as a discrete family.

    At set level the closure stops at depth one: a map is invertible as
    soon as it and its first diagonal are covers, so deeper codiagonals
    add no lifting strength.
    """
    from .arrows import codiagonal

    arrows = dict(W.arrows)
    for name in sorted(W.arrows):
        arrows[f"nabla_{name}"] = codiagonal(W.arrows[name])
    return MapFamily.discrete(arrows, base=W.base)


# -- the kelly construction -----------------------------------------------------


@dataclass
class KellyStep:
    unit: PresheafMap
    arrow: PresheafMap
    epsilon: PresheafMap  # plus domain → kelly middle
    plus_domain: Presheaf
    counit: Square
    comma: CommaData
    comma_source: CommaData


def kelly_step(f: PresheafMap, W: MapFamily) -> KellyStep:
    """Coend-corrected step: glue free lifts with the already-present ones.

    The four corner coends are computed as colimits over the comma
    categories of the family over the source and over the map itself; the
    counit square is pushed out to produce the factorization.
    """
    Csf = comma_over_object(W, f.src)
    Cf = comma_over_arrow(W, f)

    col_dom_sf = pointwise_colimit(Csf.domain)  # ∐-coend of s w over W↓sf
    col_cod_sf = pointwise_colimit(Csf.codomain)  # of t w over W↓sf
    col_dom_f = pointwise_colimit(Cf.domain)  # of s w over W↓f
    col_cod_f = pointwise_colimit(Cf.codomain)  # of t w over W↓f (the chase target)

    ident = {o: o for o in Csf.shape.objects}
    alpha = induced_between_colimits(
        Csf, col_dom_sf, Csf.domain, col_cod_sf, Csf.codomain,
        ident, {o: W.arrows[Csf.windex[o]] for o in Csf.shape.objects},
    )

    # (w, h: t w → s f) ↦ (w, the square with top h∘w and bottom f∘h)
    to_f = {}
    for o in Csf.shape.objects:
        w = Csf.windex[o]
        h = Csf.bottoms[o]
        top = h.compose(W.arrows[w])
        bottom = f.compose(h)
        to_f[o] = Cf.by_square[
            (
                w,
                encode_components(W.arrows[w].src, f.src, top.components),
                encode_components(W.arrows[w].tgt, f.tgt, bottom.components),
            )
        ]
    beta = induced_between_colimits(
        Csf, col_dom_sf, Csf.domain, col_dom_f, Cf.domain,
        to_f, {o: PresheafMap.identity(W.arrows[Csf.windex[o]].src) for o in Csf.shape.objects},
    )

    b_map = induced_between_colimits(
        Cf, col_dom_f, Cf.domain, col_cod_f, Cf.codomain,
        {o: o for o in Cf.shape.objects},
        {o: W.arrows[Cf.windex[o]] for o in Cf.shape.objects},
    )

    eval_cod_sf = colimit_cogap(
        col_cod_sf, Csf.codomain, {o: Csf.bottoms[o] for o in Csf.shape.objects}, f.src
    )
    gamma = colimit_cogap(
        col_dom_f, Cf.domain, {o: Cf.tops[o] for o in Cf.shape.objects}, f.src
    )
    eval_cod_f = colimit_cogap(
        col_cod_f, Cf.codomain, {o: Cf.bottoms[o] for o in Cf.shape.objects}, f.tgt
    )

    a_map = induced_between_colimits(
        Csf, col_cod_sf, Csf.codomain, col_cod_f, Cf.codomain,
        to_f, {o: PresheafMap.identity(W.arrows[Csf.windex[o]].tgt) for o in Csf.shape.objects},
    )

    col_q, D_q = pushout(alpha, beta)
    w_kelly = colimit_cogap(
        col_q, D_q,
        {"l": a_map, "r": b_map, "a": b_map.compose(beta)},
        col_cod_f.apex,
    )
    delta = colimit_cogap(
        col_q, D_q,
        {"l": eval_cod_sf, "r": gamma, "a": gamma.compose(beta)},
        f.src,
    )

    col_k, D_k = pushout(delta, w_kelly)
    unit = col_k.legs["l"]
    epsilon = col_k.legs["r"]
    arrow = colimit_cogap(
        col_k, D_k, {"l": f, "r": eval_cod_f, "a": f.compose(delta)}, f.tgt
    )
    counit = Square(w_kelly, f, delta, eval_cod_f)
    return KellyStep(unit, arrow, epsilon, col_cod_f.apex, counit, Cf, Csf)


def kelly_counit(W: MapFamily, f: PresheafMap) -> Square:
    """The single counit square whose lift characterizes membership in W⊥."""
    return kelly_step(f, W).counit


# -- the plus construction -------------------------------------------------------


@dataclass
class PlusStep:
    unit: PresheafMap | None  # s f → ⁺F, defined when γ inverts
    plus_domain: Presheaf  # ⁺F = colim over W↓f of t w
    raw_arrow: PresheafMap  # ⁺F → colim over W↓tf of t w (verbatim codomain)
    arrow: PresheafMap  # ⁺F → t f (codomain normalized along ζ)
    gamma: PresheafMap  # colim over W↓f of s w → s f
    zeta: PresheafMap  # colim over W↓tf of t w → t f
    zeta_iso: bool
    comma: CommaData
    colim: PresheafColimit


def plus_step(f: PresheafMap, W: MapFamily) -> PlusStep:
    """Comma-colimit step: ⁺f = colim over W↓f of codomains.

    The verbatim codomain of the step is the colimit over W↓tf; the
    comparison ζ to t f is always computed and reported, and the arrow is
    also returned normalized to land in t f (composition of the raw arrow
    with ζ's evaluation legs).
    """
    Cf = comma_over_arrow(W, f)
    col_f = pointwise_colimit(Cf.codomain)

    Ctf = comma_over_object(W, f.tgt)
    col_tf = pointwise_colimit(Ctf.codomain)

    to_tf = {}
    for o in Cf.shape.objects:
        w = Cf.windex[o]
        bottom = Cf.bottoms[o]
        to_tf[o] = Ctf.by_square[
            (
                w,
                encode_components(
                    W.arrows[w].src, f.tgt, bottom.compose(W.arrows[w]).components
                ),
                encode_components(W.arrows[w].tgt, f.tgt, bottom.components),
            )
        ]
    raw_arrow = induced_between_colimits(
        Cf, col_f, Cf.codomain, col_tf, Ctf.codomain,
        to_tf, {o: PresheafMap.identity(W.arrows[Cf.windex[o]].tgt) for o in Cf.shape.objects},
    )
    zeta = colimit_cogap(
        col_tf, Ctf.codomain, {o: Ctf.bottoms[o] for o in Ctf.shape.objects}, f.tgt
    )
    arrow = colimit_cogap(
        col_f, Cf.codomain, {o: Cf.bottoms[o] for o in Cf.shape.objects}, f.tgt
    )

    col_dom = pointwise_colimit(Cf.domain)
    gamma = colimit_cogap(
        col_dom, Cf.domain, {o: Cf.tops[o] for o in Cf.shape.objects}, f.src
    )
    unit = None
    if gamma.is_iso():
        b_map = induced_between_colimits(
            Cf, col_dom, Cf.domain, col_f, Cf.codomain,
            {o: o for o in Cf.shape.objects},
            {o: W.arrows[Cf.windex[o]] for o in Cf.shape.objects},
        )
        unit = b_map.compose(gamma.inverse())
    return PlusStep(
        unit, col_f.apex, raw_arrow, arrow, gamma, zeta, zeta.is_iso(), Cf, col_f
    )


def plus_functorial_square(W: MapFamily, alpha: Square) -> Square:
    """The action of the plus step on a map of arrows ``alpha: g → f``.

    Returns the square from the normalized plus arrow of g to the one of
    f, with top the induced map of comma colimits and bottom that of
    alpha.
    """
    g, f = alpha.w, alpha.f
    sg = plus_step(g, W)
    sf = plus_step(f, W)
    obj_map = {}
    for o in sg.comma.shape.objects:
        w = sg.comma.windex[o]
        top = alpha.top.compose(sg.comma.tops[o])
        bottom = alpha.bottom.compose(sg.comma.bottoms[o])
        obj_map[o] = sf.comma.by_square[
            (
                w,
                encode_components(W.arrows[w].src, f.src, top.components),
                encode_components(W.arrows[w].tgt, f.tgt, bottom.components),
            )
        ]
    top_plus = induced_between_colimits(
        sg.comma, sg.colim, sg.comma.codomain, sf.colim, sf.comma.codomain,
        obj_map,
        {o: PresheafMap.identity(W.arrows[sg.comma.windex[o]].tgt) for o in sg.comma.shape.objects},
    )
    return Square(sg.arrow, sf.arrow, top_plus, alpha.bottom)


# -- classic sheafification formula ---------------------------------------------


def plus_classic(F: Presheaf, J) -> tuple[Presheaf, PresheafMap]:
    """One plus application from covering-sieve matching families.

    ``J`` is a modulators.Topology. The value at X is the colimit, over
    covering sieves of X ordered by reverse refinement, of the sets of
    natural maps from the sieve into F; an independent implementation
    path from the comma-colimit step.
    """
    C = F.base
    values = {}
    colims = {}
    for X in C.objects:
        sieves = J.covering(X)
        names = {}
        for s in sieves:
            names[s.name()] = s
        shape_objs = sorted(names)
        mors = []
        for a in shape_objs:
            for b in shape_objs:
                if a == b or names[a].contained_in(names[b]):
                    # restriction goes from the larger sieve to the smaller
                    mors.append(Morphism(render_id(["res", b, a]), b, a))
        seen = {}
        for m in mors:
            seen.setdefault(m.id, m)
        mors = sorted(seen.values(), key=lambda m: m.id)
        identity = {o: render_id(["res", o, o]) for o in shape_objs}
        compose = {}
        for m1 in mors:
            for m2 in mors:
                if m1.tgt == m2.src:
                    compose[(m2.id, m1.id)] = render_id(["res", m1.src, m2.tgt])
        shape = FinCategory(shape_objs, mors, identity, compose)
        shape.validate()

        sets = {o: nat_hom(names[o].as_presheaf(), F) for o in shape_objs}
        maps = {}
        for m in mors:
            big, small = names[m.src], names[m.tgt]
            inc = small.inclusion_into(big)
            assignment = {}
            for enc in sets[m.src]:
                eta = decode_nat(big.as_presheaf(), F, enc)
                assignment[enc] = encode_components(
                    small.as_presheaf(), F, eta.compose(inc).components
                )
            maps[m.id] = SetMap(sets[m.src], sets[m.tgt], assignment)
        from .finset import SetDiagram, colimit as set_colimit

        D = SetDiagram(shape, sets, maps)
        colims[X] = (set_colimit(D), names, D)
        values[X] = colims[X][0].apex

    restriction = {}
    for m in C.morphisms:
        X, Y = m.src, m.tgt  # restriction F⁺(Y) → F⁺(X) along m: X → Y
        col_Y, names_Y, _ = colims[Y]
        col_X, names_X, _ = colims[X]
        assignment = {}
        for sname, s in names_Y.items():
            pulled = s.pullback_along(m.id)
            inc_ps = pulled.as_presheaf()
            for enc in nat_hom(s.as_presheaf(), F):
                eta = decode_nat(s.as_presheaf(), F, enc)
                comps = {}
                for Z in C.objects:
                    comps[Z] = SetMap(
                        inc_ps.values[Z],
                        F.values[Z],
                        {h: eta.at(Z)(C.compose(m.id, h)) for h in inc_ps.values[Z]},
                    )
                pulled_enc = encode_components(inc_ps, F, comps)
                rep = col_Y.legs[sname](enc)
                val = col_X.legs[pulled.name()](pulled_enc)
                if assignment.setdefault(rep, val) != val:
                    raise StepUndefined("classic plus restriction ill-defined")
        restriction[m.id] = SetMap(values[Y], values[X], assignment)
    F_plus = Presheaf(C, values, restriction)
    F_plus.validate()

    unit_components = {}
    for X in C.objects:
        col_X, names_X, _ = colims[X]
        maximal = None
        for s in names_X.values():
            if s.is_maximal():
                maximal = s
        if maximal is None:
            raise StepUndefined(f"topology lacks the maximal sieve at {X}")
        m_ps = maximal.as_presheaf()
        assignment = {}
        for e in F.values[X]:
            comps = {
                Z: SetMap(
                    m_ps.values[Z],
                    F.values[Z],
                    {h: F.restriction[h](e) for h in m_ps.values[Z]},
                )
                for Z in C.objects
            }
            assignment[e] = col_X.legs[maximal.name()](
                encode_components(m_ps, F, comps)
            )
        unit_components[X] = SetMap(F.values[X], values[X], assignment)
    unit = PresheafMap(F, F_plus, unit_components)
    unit.validate()
    return F_plus, unit


# -- comparison of kelly and plus -------------------------------------------------


@dataclass
class Comparison:
    """The eight comparison maps of the coincidence diagram, with verdicts."""

    maps: dict  # name -> PresheafMap
    iso: dict  # name -> bool
    kelly: KellyStep
    plus: PlusStep

    @property
    def all_iso(self) -> bool:
        return all(self.iso.values())


def compare_kelly_plus(f: PresheafMap, W: MapFamily) -> Comparison:
    """Build α, β, γ, α', β', δ, ε, ζ and test each for invertibility.

    When all eight are isomorphisms the kelly and plus steps of ``f``
    coincide up to the exhibited maps (ε mediates the middles, ζ the
    codomains), and their factorizations agree under t f.
    """
    ks = kelly_step(f, W)
    ps = plus_step(f, W)

    Csf = ks.comma_source
    col_dom_sf = pointwise_colimit(Csf.domain)
    col_cod_sf = pointwise_colimit(Csf.codomain)
    col_dom_f = pointwise_colimit(ks.comma.domain)

    ident = {o: o for o in Csf.shape.objects}
    alpha = induced_between_colimits(
        Csf, col_dom_sf, Csf.domain, col_cod_sf, Csf.codomain,
        ident, {o: W.arrows[Csf.windex[o]] for o in Csf.shape.objects},
    )
    to_f = {}
    for o in Csf.shape.objects:
        w = Csf.windex[o]
        h = Csf.bottoms[o]
        top = h.compose(W.arrows[w])
        bottom = f.compose(h)
        to_f[o] = ks.comma.by_square[
            (
                w,
                encode_components(W.arrows[w].src, f.src, top.components),
                encode_components(W.arrows[w].tgt, f.tgt, bottom.components),
            )
        ]
    beta = induced_between_colimits(
        Csf, col_dom_sf, Csf.domain, col_dom_f, ks.comma.domain,
        to_f, {o: PresheafMap.identity(W.arrows[Csf.windex[o]].src) for o in Csf.shape.objects},
    )
    gamma = ps.gamma
    col_q, _D_q = pushout(alpha, beta)
    beta_prime = col_q.legs["l"]
    alpha_prime = col_q.legs["r"]
    delta = ks.counit.top
    epsilon = ks.epsilon
    zeta = ps.zeta

    maps = {
        "alpha": alpha,
        "beta": beta,
        "gamma": gamma,
        "alpha_prime": alpha_prime,
        "beta_prime": beta_prime,
        "delta": delta,
        "epsilon": epsilon,
        "zeta": zeta,
    }
    iso = {k: v.is_iso() for k, v in maps.items()}
    if iso["epsilon"] and iso["zeta"]:
        # the mediated factorizations agree on the nose
        if ks.arrow.compose(epsilon) != ps.arrow:
            raise StepUndefined("coincidence mediators do not commute")
    return Comparison(maps, iso, ks, ps)


# -- the iteration driver ---------------------------------------------------------


@dataclass
class FactorizationResult:
    lam: PresheafMap
    rho: PresheafMap
    middle: Presheaf
    iterations: int
    certificate: dict
    machine: str


MACHINES = ("q", "gabriel_ulmer", "kelly", "plus")


def iterate(machine: str, f: PresheafMap, W: MapFamily, max_iter: int = 64) -> FactorizationResult:
    """Compose steps of the chosen machine until the fixed point.

    ``kelly`` and ``plus`` stop when the next unit is invertible; the weak
    machines stop on right-class membership (with respect to the relation
    each supports). Exhausting ``max_iter`` raises NonConvergence with the
    last iterate attached.
    """
    if machine not in MACHINES:
        raise ValueError(f"unknown machine {machine!r}")
    lam = PresheafMap.identity(f.src)
    current = f

    if machine in ("q", "gabriel_ulmer"):
        weak = machine == "q"
        W_run = W if weak else codiagonal_completion(W)
        for i in range(max(max_iter, 0) + 1):
            if right_class_membership(current, W, weak=weak).overall:
                return _finish(machine, f, lam, current, i, W, weak)
            if i == max_iter:
                raise NonConvergence(max_iter, last=current)
            step = q_step(current, W_run)
            lam = step.unit.compose(lam)
            current = step.arrow

    for i in range(max(max_iter, 0) + 1):
        if i == max_iter:
            raise NonConvergence(max_iter, last=current)
        if machine == "kelly":
            step = kelly_step(current, W)
            unit = step.unit
        else:
            pstep = plus_step(current, W)
            if pstep.unit is None:
                raise StepUndefined(
                    "plus unit undefined: the family does not invert the "
                    "source comparison (no generator identities)"
                )
            if not pstep.zeta_iso:
                raise StepUndefined(
                    "plus codomain comparison is not invertible; iteration "
                    "would change the target"
                )
            step, unit = pstep, pstep.unit
        if is_iso_whitehead(unit):
            return _finish(machine, f, lam, current, i, W, weak=False)
        lam = unit.compose(lam)
        current = step.arrow
    raise NonConvergence(max_iter, last=current)


def _finish(machine, f, lam, rho, iterations, W, weak) -> FactorizationResult:
    if rho.compose(lam) != f:
        raise StepUndefined("factorization does not compose to the input")
    report = right_class_membership(rho, W, weak=weak)
    certificate = {
        "rho_in_right_class": report.overall,
        "per_generator": dict(report.verdicts),
        "relation": report.relation,
        "comparison_converged": True,
    }
    return FactorizationResult(lam, rho, rho.src, iterations, certificate, machine)


def factorization_iso(f: PresheafMap, first: FactorizationResult, second: FactorizationResult) -> PresheafMap:
    """The unique middle comparison of two factorizations of the same map.

    Solves the lifting problem of the first λ against the second ρ; with
    both factorizations certified, the filler is unique and invertible.
    """
    comparison = unique_filler(first.lam, second.rho, second.lam, first.rho)
    if not comparison.is_iso():
        raise StepUndefined("middle comparison is not invertible")
    return comparison


# -- reflection and localized hom-sets ---------------------------------------------


def reflect(X: Presheaf, W: MapFamily, max_iter: int = 64):
    """The local reflection of an object: factorize X → 1 with kelly."""
    result = iterate("kelly", bang(X), W, max_iter)
    return result.middle, result.lam


def localized_hom(C: FinCategory, W_mors, x: str, y: str, max_iter: int = 64) -> FinSet:
    """Hom-set from x to y in the localization of C at a set of morphisms.

    Promotes the morphisms to representable arrows, reflects y's
    representable, and evaluates at x.
    """
    arrows = {m: yoneda_map(C, m) for m in W_mors}
    if arrows:
        fam = MapFamily.discrete(arrows, base=C)
    else:
        fam = MapFamily.discrete({}, base=C)
    middle, _unit = reflect(yoneda(C, y), fam, max_iter)
    return middle.values[x]
