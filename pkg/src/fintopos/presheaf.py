"""Finite-set-valued presheaves on a finite category.

A presheaf assigns a FinSet to every object and a restriction SetMap to
every morphism, contravariantly: for ``f: X → Y`` the restriction
``F(f)`` maps ``F(Y)`` to ``F(X)``. Natural transformations are encoded
as nested tuples (one component table per object, in sorted object
order), which keeps hom-sets ordinary finite sets whose members can be
decoded back into maps.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

from .errors import MalformedDiagram, UnknownObject
from .fincat import FinCategory, Morphism, render_id
from .finset import (
    Colimit,
    FinSet,
    Limit,
    SetDiagram,
    SetMap,
    colimit,
    colimit_induced,
    limit,
    limit_induced,
    sort_key,
)
from .guard import check_size


class Presheaf:
    """A contravariant finite-set-valued functor on a finite category."""

    __slots__ = ("base", "values", "restriction", "_key")

    def __init__(self, base: FinCategory, values, restriction):
        self.base = base
        self.values: dict = dict(values)
        self.restriction: dict = dict(restriction)
        self._key = None

    def value(self, obj: str) -> FinSet:
        if obj not in self.values:
            raise UnknownObject(obj)
        return self.values[obj]

    def res(self, mid: str) -> SetMap:
        return self.restriction[mid]

    def validate(self) -> None:
        for x in self.base.objects:
            if x not in self.values:
                raise MalformedDiagram(f"no value at {x}")
        for m in self.base.morphisms:
            r = self.restriction.get(m.id)
            if r is None or r.src != self.values[m.tgt] or r.tgt != self.values[m.src]:
                raise MalformedDiagram(f"bad restriction at {m.id}")
        for x in self.base.objects:
            if self.restriction[self.base.id_of(x)] != SetMap.identity(self.values[x]):
                raise MalformedDiagram(f"identity restriction at {x}")
        for (g, f), gf in self.base.compose_table.items():
            # F(g∘f) = F(f)∘F(g)
            if self.restriction[f].compose(self.restriction[g]) != self.restriction[gf]:
                raise MalformedDiagram(f"restriction functoriality at ({g},{f})")

    def key(self):
        if self._key is None:
            self._key = (
                tuple((x, self.values[x].elements) for x in self.base.objects),
                tuple(
                    (m.id, tuple(sorted(self.restriction[m.id].assignment.items(), key=lambda kv: sort_key(kv[0]))))
                    for m in self.base.morphisms
                ),
            )
        return self._key

    def total_size(self) -> int:
        return sum(len(self.values[x]) for x in self.base.objects)

    def __eq__(self, other):
        return (
            isinstance(other, Presheaf)
            and self.base == other.base
            and self.key() == other.key()
        )

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        sizes = {x: len(self.values[x]) for x in self.base.objects}
        return f"Presheaf({sizes})"


class PresheafMap:
    """A natural transformation between presheaves on the same base."""

    __slots__ = ("src", "tgt", "components", "_key")

    def __init__(self, src: Presheaf, tgt: Presheaf, components):
        self.src = src
        self.tgt = tgt
        self.components: dict = dict(components)
        self._key = None

    def at(self, obj: str) -> SetMap:
        return self.components[obj]

    def validate(self) -> None:
        if self.src.base != self.tgt.base:
            raise MalformedDiagram("presheaf map across different bases")
        for x in self.src.base.objects:
            c = self.components.get(x)
            if c is None or c.src != self.src.values[x] or c.tgt != self.tgt.values[x]:
                raise MalformedDiagram(f"bad component at {x}")
        for m in self.src.base.morphisms:
            left = self.components[m.src].compose(self.src.restriction[m.id])
            right = self.tgt.restriction[m.id].compose(self.components[m.tgt])
            if left != right:
                raise MalformedDiagram(f"naturality fails at {m.id}")

    def compose(self, other: "PresheafMap") -> "PresheafMap":
        """self ∘ other."""
        if other.tgt is not self.src and other.tgt != self.src:
            raise MalformedDiagram("presheaf map composition mismatch")
        return PresheafMap(
            other.src,
            self.tgt,
            {x: self.components[x].compose(other.components[x]) for x in self.components},
        )

    @staticmethod
    def identity(F: Presheaf) -> "PresheafMap":
        return PresheafMap(F, F, {x: SetMap.identity(F.values[x]) for x in F.base.objects})

    def is_iso(self) -> bool:
        return all(c.is_bijective() for c in self.components.values())

    def is_mono(self) -> bool:
        return all(c.is_injective() for c in self.components.values())

    def is_epi(self) -> bool:
        return all(c.is_surjective() for c in self.components.values())

    def inverse(self) -> "PresheafMap":
        return PresheafMap(self.tgt, self.src, {x: c.inverse() for x, c in self.components.items()})

    def key(self):
        if self._key is None:
            self._key = (
                self.src.key(),
                self.tgt.key(),
                encode_components(self.src, self.tgt, self.components),
            )
        return self._key

    def __eq__(self, other):
        return isinstance(other, PresheafMap) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"PresheafMap({self.src!r} → {self.tgt!r})"


@dataclass
class Square:
    """A commutative square ``f∘top = bottom∘w`` from ``w`` to ``f``."""

    w: PresheafMap
    f: PresheafMap
    top: PresheafMap
    bottom: PresheafMap

    def validate(self) -> None:
        if self.f.compose(self.top) != self.bottom.compose(self.w):
            raise MalformedDiagram("square does not commute")


# -- encodings for natural transformations ----------------------------------


def encode_components(F: Presheaf, G: Presheaf, components) -> tuple:
    """Encode a transformation as nested tuples, per sorted base object."""
    return tuple(
        tuple(components[x](e) for e in F.values[x]) for x in F.base.objects
    )


def decode_nat(F: Presheaf, G: Presheaf, enc) -> PresheafMap:
    """Rebuild the PresheafMap a ``nat_hom`` element encodes."""
    components = {}
    for i, x in enumerate(F.base.objects):
        table = enc[i]
        components[x] = SetMap(
            F.values[x], G.values[x], {e: table[j] for j, e in enumerate(F.values[x])}
        )
    return PresheafMap(F, G, components)


_NAT_HOM_CACHE: dict = {}


def nat_hom(F: Presheaf, G: Presheaf) -> FinSet:
    """The set of natural transformations F → G.

    Computed by backtracking over objects in sorted order, pruning with
    every naturality square whose two endpoints are already assigned. The
    raw product bound is checked against the size guard first.
    """
    if F.base != G.base:
        raise MalformedDiagram("nat_hom across different bases")
    cache_key = (F.key(), G.key())
    hit = _NAT_HOM_CACHE.get(cache_key)
    if hit is not None:
        return hit

    objs = list(F.base.objects)
    bound = 1
    for x in objs:
        bound *= max(len(G.values[x]), 1) ** len(F.values[x])
    check_size(bound, "nat_hom raw product")

    mors_between: dict = {}
    for m in F.base.morphisms:
        mors_between.setdefault((m.src, m.tgt), []).append(m.id)

    partial: list[tuple] = [()]
    for i, x in enumerate(objs):
        tables = _component_tables(F.values[x], G.values[x])
        new = []
        for assigned in partial:
            for table in tables:
                cand = assigned + (table,)
                if _natural_so_far(F, G, objs, cand, mors_between):
                    new.append(cand)
        partial = new
    result = FinSet(sorted(partial, key=sort_key))
    _NAT_HOM_CACHE[cache_key] = result
    return result


def _component_tables(src: FinSet, tgt: FinSet):
    if len(src) == 0:
        return [()]
    tables = [()]
    for _e in src:
        tables = [t + (v,) for t in tables for v in tgt]
    return tables


def _natural_so_far(F, G, objs, cand, mors_between) -> bool:
    pos = {x: i for i, x in enumerate(objs[: len(cand)])}
    last = objs[len(cand) - 1]
    for x in pos:
        for (a, b) in ((x, last), (last, x)):
            if a not in pos or b not in pos:
                continue
            for mid in mors_between.get((a, b), ()):
                # component at src ∘ F(m) == G(m) ∘ component at tgt
                Fm = F.restriction[mid]
                Gm = G.restriction[mid]
                ta, tb = cand[pos[a]], cand[pos[b]]
                for j, e in enumerate(F.values[b]):
                    lhs = ta[F.values[a]._index[Fm(e)]]
                    if Gm(tb[j]) != lhs:
                        return False
    return True


def hom_maps(F: Presheaf, G: Presheaf):
    """All natural transformations F → G as PresheafMaps, in canonical order."""
    return [decode_nat(F, G, enc) for enc in nat_hom(F, G)]


# -- Yoneda ------------------------------------------------------------------


def yoneda(C: FinCategory, X: str) -> Presheaf:
    """The representable presheaf y(X)(Y) = Hom(Y, X)."""
    if X not in C.objects:
        raise UnknownObject(X)
    values = {Y: FinSet(C.hom(Y, X)) for Y in C.objects}
    restriction = {}
    for m in C.morphisms:
        restriction[m.id] = SetMap(
            values[m.tgt], values[m.src], {h: C.compose(h, m.id) for h in values[m.tgt]}
        )
    return Presheaf(C, values, restriction)


def yoneda_map(C: FinCategory, mid: str) -> PresheafMap:
    """The representable map y(src) → y(tgt) induced by a base morphism."""
    m = C.mor(mid)
    F, G = yoneda(C, m.src), yoneda(C, m.tgt)
    components = {
        Y: SetMap(F.values[Y], G.values[Y], {h: C.compose(mid, h) for h in F.values[Y]})
        for Y in C.objects
    }
    return PresheafMap(F, G, components)


def yoneda_element(F: Presheaf, X: str, e) -> PresheafMap:
    """The classifying map y(X) → F of an element ``e ∈ F(X)``."""
    C = F.base
    yX = yoneda(C, X)
    components = {}
    for Y in C.objects:
        components[Y] = SetMap(
            yX.values[Y], F.values[Y], {h: F.restriction[h](e) for h in yX.values[Y]}
        )
    return PresheafMap(yX, F, components)


# -- pointwise (co)limits ----------------------------------------------------


@dataclass
class PresheafDiagram:
    """A functor from a finite shape into presheaves over a common base."""

    shape: FinCategory
    base: FinCategory
    presheaves: dict
    maps: dict  # shape morphism id -> PresheafMap

    def validate(self) -> None:
        for j in self.shape.objects:
            P = self.presheaves.get(j)
            if P is None or P.base != self.base:
                raise MalformedDiagram(f"bad presheaf at {j}")
        for m in self.shape.morphisms:
            f = self.maps.get(m.id)
            if f is None or f.src != self.presheaves[m.src] or f.tgt != self.presheaves[m.tgt]:
                raise MalformedDiagram(f"bad map at {m.id}")
        for j in self.shape.objects:
            if self.maps[self.shape.id_of(j)] != PresheafMap.identity(self.presheaves[j]):
                raise MalformedDiagram(f"identity not preserved at {j}")
        for (g, f), gf in self.shape.compose_table.items():
            if self.maps[g].compose(self.maps[f]) != self.maps[gf]:
                raise MalformedDiagram(f"composition not preserved at ({g},{f})")

    def objectwise(self, X: str) -> SetDiagram:
        return SetDiagram(
            self.shape,
            {j: self.presheaves[j].values[X] for j in self.shape.objects},
            {m.id: self.maps[m.id].at(X) for m in self.shape.morphisms},
        )


@dataclass
class PresheafColimit:
    apex: Presheaf
    legs: dict  # shape object -> PresheafMap
    pointwise: dict  # base object -> finset.Colimit


@dataclass
class PresheafLimit:
    apex: Presheaf
    legs: dict
    pointwise: dict


def pointwise_colimit(D: PresheafDiagram) -> PresheafColimit:
    cols = {X: colimit(D.objectwise(X)) for X in D.base.objects}
    values = {X: cols[X].apex for X in D.base.objects}
    restriction = {}
    for m in D.base.morphisms:
        # induced on classes: [(j, e)] ↦ [(j, P_j(m)(e))]
        assignment = {}
        for j in D.shape.objects:
            P = D.presheaves[j]
            for e in P.values[m.tgt]:
                rep = cols[m.tgt].legs[j](e)
                val = cols[m.src].legs[j](P.restriction[m.id](e))
                if assignment.setdefault(rep, val) != val:
                    raise MalformedDiagram("colimit restriction ill-defined")
        restriction[m.id] = SetMap(values[m.tgt], values[m.src], assignment)
    apex = Presheaf(D.base, values, restriction)
    legs = {
        j: PresheafMap(
            D.presheaves[j], apex, {X: cols[X].legs[j] for X in D.base.objects}
        )
        for j in D.shape.objects
    }
    return PresheafColimit(apex, legs, cols)


def pointwise_limit(D: PresheafDiagram) -> PresheafLimit:
    lims = {X: limit(D.objectwise(X)) for X in D.base.objects}
    values = {X: lims[X].apex for X in D.base.objects}
    restriction = {}
    objs = list(D.shape.objects)
    for m in D.base.morphisms:
        assignment = {}
        for fam in values[m.tgt]:
            assignment[fam] = tuple(
                D.presheaves[j].restriction[m.id](fam[i]) for i, j in enumerate(objs)
            )
        restriction[m.id] = SetMap(values[m.tgt], values[m.src], assignment)
    apex = Presheaf(D.base, values, restriction)
    legs = {
        j: PresheafMap(apex, D.presheaves[j], {X: lims[X].legs[j] for X in D.base.objects})
        for j in D.shape.objects
    }
    return PresheafLimit(apex, legs, lims)


def colimit_cogap(col: PresheafColimit, D: PresheafDiagram, cocone: dict, tgt: Presheaf) -> PresheafMap:
    """The induced map out of a pointwise colimit, verified well-defined."""
    components = {}
    for X in D.base.objects:
        components[X] = colimit_induced(
            col.pointwise[X],
            D.objectwise(X),
            {j: cocone[j].at(X) for j in D.shape.objects},
            tgt.values[X],
        )
    return PresheafMap(col.apex, tgt, components)


def limit_gap(lim: PresheafLimit, D: PresheafDiagram, cone: dict, src: Presheaf) -> PresheafMap:
    """The induced map into a pointwise limit, verified to be a cone."""
    components = {}
    for X in D.base.objects:
        components[X] = limit_induced(
            lim.pointwise[X],
            D.objectwise(X),
            {j: cone[j].at(X) for j in D.shape.objects},
            src.values[X],
        )
    return PresheafMap(src, lim.apex, components)


# -- canonical shapes --------------------------------------------------------


def _span_shape() -> FinCategory:
    mors = [
        Morphism("id_a", "a", "a"),
        Morphism("id_l", "l", "l"),
        Morphism("id_r", "r", "r"),
        Morphism("a->l", "a", "l"),
        Morphism("a->r", "a", "r"),
    ]
    compose = {}
    for m in mors:
        compose[(m.id, f"id_{m.src}")] = m.id
        compose[(f"id_{m.tgt}", m.id)] = m.id
    return FinCategory(
        ["a", "l", "r"], mors, {"a": "id_a", "l": "id_l", "r": "id_r"}, compose
    )


def _cospan_shape() -> FinCategory:
    mors = [
        Morphism("id_a", "a", "a"),
        Morphism("id_l", "l", "l"),
        Morphism("id_r", "r", "r"),
        Morphism("l->a", "l", "a"),
        Morphism("r->a", "r", "a"),
    ]
    compose = {}
    for m in mors:
        compose[(m.id, f"id_{m.src}")] = m.id
        compose[(f"id_{m.tgt}", m.id)] = m.id
    return FinCategory(
        ["a", "l", "r"], mors, {"a": "id_a", "l": "id_l", "r": "id_r"}, compose
    )


def pushout(f: PresheafMap, g: PresheafMap) -> PresheafColimit:
    """Pushout of the span ``tgt f ← src f = src g → tgt g``; legs are
    keyed ``l`` (through f) and ``r`` (through g)."""
    if f.src != g.src:
        raise MalformedDiagram("pushout legs must share their source")
    shape = _span_shape()
    D = PresheafDiagram(
        shape,
        f.src.base,
        {"a": f.src, "l": f.tgt, "r": g.tgt},
        {
            "id_a": PresheafMap.identity(f.src),
            "id_l": PresheafMap.identity(f.tgt),
            "id_r": PresheafMap.identity(g.tgt),
            "a->l": f,
            "a->r": g,
        },
    )
    return pointwise_colimit(D), D


def pullback(f: PresheafMap, g: PresheafMap) -> PresheafLimit:
    """Pullback of the cospan ``src f → tgt f = tgt g ← src g``; legs are
    keyed ``l`` (to src f) and ``r`` (to src g)."""
    if f.tgt != g.tgt:
        raise MalformedDiagram("pullback legs must share their target")
    shape = _cospan_shape()
    D = PresheafDiagram(
        shape,
        f.src.base,
        {"a": f.tgt, "l": f.src, "r": g.src},
        {
            "id_a": PresheafMap.identity(f.tgt),
            "id_l": PresheafMap.identity(f.src),
            "id_r": PresheafMap.identity(g.src),
            "l->a": f,
            "r->a": g,
        },
    )
    return pointwise_limit(D), D


def coproduct(presheaves: list) -> PresheafColimit:
    """Coproduct over a discrete shape ``0..n-1`` (string keys)."""
    from .fincat import discrete_category

    names = [str(i) for i in range(len(presheaves))]
    base = presheaves[0].base if presheaves else None
    if base is None:
        raise MalformedDiagram("empty coproduct needs an explicit base; use initial()")
    shape = discrete_category(names)
    D = PresheafDiagram(
        shape,
        base,
        dict(zip(names, presheaves)),
        {f"id_{n}": PresheafMap.identity(P) for n, P in zip(names, presheaves)},
    )
    return pointwise_colimit(D), D


def product(presheaves: list, base=None) -> PresheafLimit:
    """Product over a discrete shape; the empty product is the terminal."""
    from .fincat import discrete_category

    if presheaves:
        base = presheaves[0].base
    if base is None:
        raise MalformedDiagram("empty product needs an explicit base")
    names = [str(i) for i in range(len(presheaves))]
    shape = discrete_category(names)
    D = PresheafDiagram(
        shape,
        base,
        dict(zip(names, presheaves)),
        {f"id_{n}": PresheafMap.identity(P) for n, P in zip(names, presheaves)},
    )
    return pointwise_limit(D), D


def terminal(C: FinCategory) -> Presheaf:
    one = FinSet(("*",))
    return Presheaf(
        C,
        {X: one for X in C.objects},
        {m.id: SetMap.identity(one) for m in C.morphisms},
    )


def initial(C: FinCategory) -> Presheaf:
    empty = FinSet(())
    return Presheaf(
        C,
        {X: empty for X in C.objects},
        {m.id: SetMap.identity(empty) for m in C.morphisms},
    )


def bang(F: Presheaf) -> PresheafMap:
    """The unique map F → 1."""
    one = terminal(F.base)
    return PresheafMap(
        F,
        one,
        {X: SetMap(F.values[X], one.values[X], {e: "*" for e in F.values[X]}) for X in F.base.objects},
    )


def from_initial(F: Presheaf) -> PresheafMap:
    zero = initial(F.base)
    return PresheafMap(zero, F, {X: SetMap(zero.values[X], F.values[X], {}) for X in F.base.objects})


def binary_product(F: Presheaf, G: Presheaf):
    """F × G with its two projections (elements are pairs)."""
    values = {X: FinSet(tuple((a, b) for a in F.values[X] for b in G.values[X])) for X in F.base.objects}
    restriction = {}
    for m in F.base.morphisms:
        restriction[m.id] = SetMap(
            values[m.tgt],
            values[m.src],
            {(a, b): (F.restriction[m.id](a), G.restriction[m.id](b)) for (a, b) in values[m.tgt]},
        )
    P = Presheaf(F.base, values, restriction)
    p1 = PresheafMap(P, F, {X: SetMap(values[X], F.values[X], {(a, b): a for (a, b) in values[X]}) for X in F.base.objects})
    p2 = PresheafMap(P, G, {X: SetMap(values[X], G.values[X], {(a, b): b for (a, b) in values[X]}) for X in F.base.objects})
    return P, p1, p2


def pair_into_product(f: PresheafMap, g: PresheafMap, prod: Presheaf) -> PresheafMap:
    """The gap map ⟨f, g⟩ into a binary product built by binary_product."""
    if f.src != g.src:
        raise MalformedDiagram("pairing needs a common source")
    components = {}
    for X in f.src.base.objects:
        components[X] = SetMap(
            f.src.values[X],
            prod.values[X],
            {e: (f.at(X)(e), g.at(X)(e)) for e in f.src.values[X]},
        )
    return PresheafMap(f.src, prod, components)


# -- exponentials, join, support ---------------------------------------------


def exponential(F: Presheaf, G: Presheaf):
    """The internal hom F^G, with (F^G)(X) = Hom(y(X) × G, F).

    Returns ``(E, data)`` where data maps each base object X to the product
    presheaf y(X) × G used to carve the value set, so callers can decode
    elements back into maps.
    """
    C = F.base
    products = {}
    for X in C.objects:
        yX = yoneda(C, X)
        P, p1, p2 = binary_product(yX, G)
        products[X] = (yX, P, p1, p2)
    values = {X: nat_hom(products[X][1], F) for X in C.objects}

    restriction = {}
    for m in C.morphisms:
        # precompose with y(m) × id_G
        X, Y = m.src, m.tgt
        _yX, PX, _p1x, _p2x = products[X]
        _yY, PY, _p1y, _p2y = products[Y]
        ym = yoneda_map(C, m.id)
        assignment = {}
        for enc in values[Y]:
            eta = decode_nat(PY, F, enc)
            components = {}
            for Z in C.objects:
                components[Z] = SetMap(
                    PX.values[Z],
                    F.values[Z],
                    {(h, g): eta.at(Z)((ym.at(Z)(h), g)) for (h, g) in PX.values[Z]},
                )
            assignment[enc] = encode_components(PX, F, components)
        restriction[m.id] = SetMap(values[Y], values[X], assignment)
    E = Presheaf(C, values, restriction)
    return E, products


def join(U: Presheaf, F: Presheaf):
    """The join U ⋈ F: pushout of U ← U×F → F along the projections."""
    _P, p1, p2 = binary_product(U, F)
    col, _D = pushout(p1, p2)
    return col.apex, col.legs["l"], col.legs["r"]


def support(F: Presheaf) -> Presheaf:
    """The image of F → 1: the subterminal with a point wherever F has one."""
    one = FinSet(("*",))
    empty = FinSet(())
    values = {X: (one if len(F.values[X]) else empty) for X in F.base.objects}
    restriction = {}
    for m in F.base.morphisms:
        src_v, tgt_v = values[m.tgt], values[m.src]
        if len(src_v) and not len(tgt_v):
            raise MalformedDiagram("support is not a presheaf; restriction undefined")
        restriction[m.id] = SetMap(src_v, tgt_v, {e: "*" for e in src_v})
    return Presheaf(F.base, values, restriction)


def is_subterminal(U: Presheaf) -> bool:
    return all(len(U.values[X]) <= 1 for X in U.base.objects)


def presheaf_isos(F: Presheaf, G: Presheaf):
    """All natural isomorphisms F → G (possibly empty), canonical order."""
    if any(len(F.values[X]) != len(G.values[X]) for X in F.base.objects):
        return []
    return [t for t in hom_maps(F, G) if t.is_iso()]


def presheaves_isomorphic(F: Presheaf, G: Presheaf):
    """The first natural isomorphism F ≅ G, or None."""
    isos = presheaf_isos(F, G)
    return isos[0] if isos else None
