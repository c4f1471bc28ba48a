"""The modulator hierarchy, envelopes, and Grothendieck topologies.

A family of arrows earns successively stronger names: pre-modulator
(representable codomains, generator identities, fully faithful indexing),
modulator (closed under base change over generators), lex modulator
(cofiltered fibers), mono-saturated (contains every left-class mono with
representable codomain). Each check returns the first violated axiom with
a witness; envelopes repair a family into the next level.
"""
from __future__ import annotations

from dataclasses import dataclass

from .arrows import arrows_isomorphic, diagonal
from .errors import MalformedDocument, NonConvergence, UnknownObject
from .fincat import FinCategory, Morphism, has_cone_over_every_finite_diagram, render_id
from .finset import FinSet, SetMap
from .guard import check_size
from .presheaf import (
    Presheaf,
    PresheafMap,
    hom_maps,
    presheaves_isomorphic,
    pullback,
    yoneda,
)
from .soa import MapFamily, iterate


# -- sieves and topologies -------------------------------------------------------


@dataclass(frozen=True)
class Sieve:
    """A right-closed set of morphisms into one object."""

    base: FinCategory
    obj: str
    morphisms: frozenset

    def validate(self) -> None:
        for h in self.morphisms:
            if self.base.tgt(h) != self.obj:
                raise MalformedDocument(f"sieve member {h} does not target {self.obj}")
        for h in self.morphisms:
            for g in self.base.morphisms:
                if g.tgt == self.base.src(h) and self.base.compose(h, g.id) not in self.morphisms:
                    raise MalformedDocument(f"sieve not closed under precomposition at {h}")

    @staticmethod
    def generated(base: FinCategory, obj: str, generators) -> "Sieve":
        mors = set()
        for g in generators:
            if base.tgt(g) != obj:
                raise MalformedDocument(f"generator {g} does not target {obj}")
            for h in base.morphisms:
                if h.tgt == base.src(g):
                    mors.add(base.compose(g, h.id))
            mors.add(g)
        return Sieve(base, obj, frozenset(mors))

    @staticmethod
    def maximal(base: FinCategory, obj: str) -> "Sieve":
        return Sieve(
            base, obj, frozenset(m.id for m in base.morphisms if m.tgt == obj)
        )

    def is_maximal(self) -> bool:
        return self.base.id_of(self.obj) in self.morphisms

    def contained_in(self, other: "Sieve") -> bool:
        return self.obj == other.obj and self.morphisms <= other.morphisms

    def name(self) -> str:
        return render_id([self.obj, sorted(self.morphisms)])

    def pullback_along(self, mid: str) -> "Sieve":
        """The sieve ``{h : m∘h ∈ S}`` on the source of ``m``."""
        m = self.base.mor(mid)
        if m.tgt != self.obj:
            raise MalformedDocument(f"{mid} does not target {self.obj}")
        mors = frozenset(
            h.id
            for h in self.base.morphisms
            if h.tgt == m.src and self.base.compose(mid, h.id) in self.morphisms
        )
        return Sieve(self.base, m.src, mors)

    def as_presheaf(self) -> Presheaf:
        values = {
            Y: FinSet(tuple(h for h in self.base.hom(Y, self.obj) if h in self.morphisms))
            for Y in self.base.objects
        }
        restriction = {}
        for m in self.base.morphisms:
            restriction[m.id] = SetMap(
                values[m.tgt],
                values[m.src],
                {h: self.base.compose(h, m.id) for h in values[m.tgt]},
            )
        return Presheaf(self.base, values, restriction)

    def inclusion(self) -> PresheafMap:
        """The inclusion into the representable of the sieve's object."""
        S = self.as_presheaf()
        Y = yoneda(self.base, self.obj)
        return PresheafMap(
            S,
            Y,
            {
                Z: SetMap(S.values[Z], Y.values[Z], {h: h for h in S.values[Z]})
                for Z in self.base.objects
            },
        )

    def inclusion_into(self, other: "Sieve") -> PresheafMap:
        if not self.contained_in(other):
            raise MalformedDocument("sieve inclusion into a non-superset")
        S, T = self.as_presheaf(), other.as_presheaf()
        return PresheafMap(
            S,
            T,
            {
                Z: SetMap(S.values[Z], T.values[Z], {h: h for h in S.values[Z]})
                for Z in self.base.objects
            },
        )


def all_sieves(base: FinCategory, obj: str):
    """Every sieve on one object, in canonical order."""
    into = [m.id for m in base.morphisms if m.tgt == obj]
    check_size(2 ** len(into), "sieve enumeration")
    found = []
    for mask in range(2 ** len(into)):
        subset = frozenset(m for i, m in enumerate(into) if mask >> i & 1)
        closed = all(
            base.compose(h, g.id) in subset
            for h in subset
            for g in base.morphisms
            if g.tgt == base.src(h)
        )
        if closed:
            found.append(Sieve(base, obj, subset))
    return sorted(found, key=lambda s: s.name())


@dataclass
class Topology:
    """Per-object sets of covering sieves."""

    base: FinCategory
    sieves: dict  # object -> tuple of Sieves

    def covering(self, obj: str):
        if obj not in self.sieves:
            raise UnknownObject(obj)
        return self.sieves[obj]

    @staticmethod
    def from_covers(base: FinCategory, covers: dict) -> "Topology":
        """Build from generator lists; sieves are saturated on load."""
        sieves = {}
        for X in base.objects:
            listed = covers.get(X, [])
            sx = [Sieve.generated(base, X, gens) for gens in listed]
            dedup = {}
            for s in sx:
                dedup[s.name()] = s
            sieves[X] = tuple(sorted(dedup.values(), key=lambda s: s.name()))
        return Topology(base, sieves)

    def has(self, sieve: Sieve) -> bool:
        return any(s.morphisms == sieve.morphisms for s in self.covering(sieve.obj))


@dataclass
class Verdict:
    ok: bool
    axiom: str | None = None
    witness: object = None

    def __bool__(self):
        return self.ok


def check_topology(J: Topology) -> Verdict:
    """Maximality, pullback-stability and locality, by full enumeration."""
    C = J.base
    for X in C.objects:
        if not any(s.is_maximal() for s in J.covering(X)):
            return Verdict(False, "maximality", X)
        for s in J.covering(X):
            try:
                s.validate()
            except MalformedDocument:
                return Verdict(False, "sieve-closure", (X, s.name()))
    for X in C.objects:
        for s in J.covering(X):
            for m in C.morphisms:
                if m.tgt != X:
                    continue
                if not J.has(s.pullback_along(m.id)):
                    return Verdict(False, "pullback-stability", (X, s.name(), m.id))
    for X in C.objects:
        for r in all_sieves(C, X):
            local = any(
                all(
                    J.has(r.pullback_along(h))
                    for h in s.morphisms
                )
                for s in J.covering(X)
            )
            if local != J.has(r):
                return Verdict(False, "locality", (X, r.name()))
    return Verdict(True)


def topology_to_family(J: Topology) -> MapFamily:
    """The full family of covering-sieve inclusions."""
    arrows = {}
    for X in J.base.objects:
        for i, s in enumerate(J.covering(X)):
            arrows[render_id(["cov", X, i])] = s.inclusion()
    return MapFamily.full(arrows, base=J.base)


# -- the axiom hierarchy -----------------------------------------------------------


def generator_objects(C: FinCategory, generators=None):
    return tuple(generators) if generators is not None else C.objects


def _codomain_generator(arrow: PresheafMap, C: FinCategory, gens) -> str | None:
    """The generator whose representable the codomain matches, if any."""
    for X in gens:
        if arrow.tgt == yoneda(C, X):
            return X
    for X in gens:
        if presheaves_isomorphic(arrow.tgt, yoneda(C, X)) is not None:
            return X
    return None


def check_premodulator(W: MapFamily, generators=None) -> Verdict:
    """Axioms: fully faithful indexing, representable codomains, identities."""
    gens = generator_objects(W.base, generators)
    # (ii) full faithfulness: indexing homs must match square sets exactly
    from .arrows import square_set
    from .presheaf import encode_components

    for a in W.indexing.objects:
        for b in W.indexing.objects:
            squares = set(square_set(W.arrows[a], W.arrows[b]).elements)
            seen = set()
            for u in W.indexing.hom(a, b):
                top, bottom = W.squares[u]
                enc = (
                    encode_components(W.arrows[a].src, W.arrows[b].src, top.components),
                    encode_components(W.arrows[a].tgt, W.arrows[b].tgt, bottom.components),
                )
                if enc in seen:
                    return Verdict(False, "fully-faithful", (a, b, "not injective"))
                seen.add(enc)
            if seen != squares:
                return Verdict(False, "fully-faithful", (a, b, "not full"))
    # (iii) codomains are representables of the generators
    for w in W.indexing.objects:
        if _codomain_generator(W.arrows[w], W.base, gens) is None:
            return Verdict(False, "representable-codomains", w)
    # (iv) the identities of the generators occur in the family
    for X in gens:
        yX = yoneda(W.base, X)
        hit = any(
            W.arrows[w].is_iso()
            and presheaves_isomorphic(W.arrows[w].tgt, yX) is not None
            for w in W.indexing.objects
        )
        if not hit:
            return Verdict(False, "generator-identities", X)
    return Verdict(True)


def check_modulator(W: MapFamily, generators=None) -> Verdict:
    """Pre-modulator plus stability under base change over generators."""
    pre = check_premodulator(W, generators)
    if not pre:
        return pre
    gens = generator_objects(W.base, generators)
    for w in W.indexing.objects:
        arrow = W.arrows[w]
        for X in gens:
            yX = yoneda(W.base, X)
            for i, g in enumerate(hom_maps(yX, arrow.tgt)):
                lim, _ = pullback(arrow, g)
                changed = lim.legs["r"]
                if not any(
                    arrows_isomorphic(changed, W.arrows[v]) for v in W.indexing.objects
                ):
                    return Verdict(False, "base-change", (w, X, i))
    return Verdict(True)


def family_fiber(W: MapFamily, X: str, generators=None) -> FinCategory:
    """The fiber of the codomain functor at a generator.

    Objects are the family members whose codomain is the representable of
    X; morphisms are the indexing morphisms whose bottom component
    classifies to the identity of X.
    """
    gens = generator_objects(W.base, generators)
    members = [
        w
        for w in W.indexing.objects
        if _codomain_generator(W.arrows[w], W.base, (X,)) is not None
    ]
    yX = yoneda(W.base, X)
    id_mor = W.base.id_of(X)

    def classifies_to_identity(w, v, bottom):
        if W.arrows[w].tgt == yX and W.arrows[v].tgt == yX:
            return bottom.at(X)(id_mor) == id_mor
        return bottom.is_iso() and W.arrows[w].tgt == W.arrows[v].tgt

    mors = []
    for m in W.indexing.morphisms:
        if m.src in members and m.tgt in members:
            _top, bottom = W.squares[m.id]
            if classifies_to_identity(m.src, m.tgt, bottom):
                mors.append(Morphism(m.id, m.src, m.tgt))
    identity = {w: W.indexing.id_of(w) for w in members}
    keep = {m.id for m in mors}
    compose = {
        (g, f): gf
        for (g, f), gf in W.indexing.compose_table.items()
        if g in keep and f in keep and gf in keep
    }
    fiber = FinCategory(members, mors, identity, compose)
    fiber.validate()
    return fiber


def check_lex_modulator(W: MapFamily, generators=None) -> Verdict:
    """Modulator plus cofiltered fibers of the codomain functor."""
    mod = check_modulator(W, generators)
    if not mod:
        return mod
    gens = generator_objects(W.base, generators)
    for X in gens:
        fiber = family_fiber(W, X, generators)
        if not has_cone_over_every_finite_diagram(fiber):
            return Verdict(False, "cofiltered-fibers", X)
    return Verdict(True)


# -- envelopes ------------------------------------------------------------------


def modulator_envelope(W: MapFamily, generators=None) -> MapFamily:
    """Generator identities plus all base changes of the family's arrows."""
    gens = generator_objects(W.base, generators)
    arrows = {}
    keys = set()

    def add(name, arrow):
        k = arrow.key()
        if k in keys:
            return
        keys.add(k)
        arrows[name] = arrow

    for X in gens:
        add(render_id(["idgen", X]), PresheafMap.identity(yoneda(W.base, X)))
    for w in sorted(W.indexing.objects):
        arrow = W.arrows[w]
        for X in gens:
            yX = yoneda(W.base, X)
            for i, g in enumerate(hom_maps(yX, arrow.tgt)):
                lim, _ = pullback(arrow, g)
                add(render_id(["bc", w, X, i]), lim.legs["r"])
    return MapFamily.full(arrows, base=W.base)


def diagonal_completion(W: MapFamily) -> MapFamily:
    """W ∪ ΔW as a discrete family; deeper diagonals are already invertible."""
    arrows = dict(W.arrows)
    for name in sorted(W.arrows):
        arrows[f"delta_{name}"] = diagonal(W.arrows[name])
    return MapFamily.discrete(arrows, base=W.base)


def delta_mod_envelope(W: MapFamily, generators=None) -> MapFamily:
    """The modulator envelope of the diagonal completion."""
    return modulator_envelope(diagonal_completion(W), generators)


def check_delta_modulator(W: MapFamily, generators=None, max_iter: int = 64) -> Verdict:
    """Each diagonal of a member must land in the generated left class.

    Decided by factorizing the diagonal with the kelly machine and
    checking the right part inverts; NonConvergence propagates.
    """
    mod = check_modulator(W, generators)
    if not mod:
        return mod
    for w in sorted(W.indexing.objects):
        d = diagonal(W.arrows[w])
        result = iterate("kelly", d, W, max_iter)
        if not result.rho.is_iso():
            return Verdict(False, "diagonal-in-left-class", w)
    return Verdict(True)


def mono_saturate(W: MapFamily, generators=None, max_iter: int = 64) -> MapFamily:
    """Adjoin every subrepresentable whose inclusion the family inverts.

    Subpresheaves of representables are exactly sieves, so the probe space
    is finite; left-class membership of each inclusion is tested by kelly
    iteration.
    """
    gens = generator_objects(W.base, generators)
    arrows = dict(W.arrows)
    keys = {a.key() for a in arrows.values()}
    for X in gens:
        for s in all_sieves(W.base, X):
            inc = s.inclusion()
            if inc.key() in keys:
                continue
            if any(arrows_isomorphic(inc, a) for a in W.arrows.values()):
                continue
            result = iterate("kelly", inc, W, max_iter)
            if result.rho.is_iso():
                arrows[render_id(["sat", X, s.name()])] = inc
                keys.add(inc.key())
    return MapFamily.full(arrows, base=W.base)


# -- closure checks used by the idempotency results --------------------------------


def check_tower_stability(W: MapFamily, max_probes: int | None = None) -> Verdict:
    """For members v, w and any map s v → t w, the composite of v with the
    base-changed w must stay in the family."""
    count = 0
    for v in sorted(W.indexing.objects):
        for w in sorted(W.indexing.objects):
            av, aw = W.arrows[v], W.arrows[w]
            for i, m in enumerate(hom_maps(av.src, aw.tgt)):
                if max_probes is not None and count >= max_probes:
                    return Verdict(True, witness="probe budget reached")
                count += 1
                lim, _ = pullback(aw, m)
                u = av.compose(lim.legs["r"])
                if not any(
                    arrows_isomorphic(u, W.arrows[x]) for x in W.indexing.objects
                ):
                    return Verdict(False, "tower", (v, w, i))
    return Verdict(True)


def representable_family(C: FinCategory, morphisms=None) -> MapFamily:
    """The full family of representable arrows on a set of base morphisms
    (all of them by default)."""
    from .presheaf import yoneda_map

    mors = [m.id for m in C.morphisms] if morphisms is None else list(morphisms)
    arrows = {render_id(["rep", m]): yoneda_map(C, m) for m in mors}
    return MapFamily.full(arrows, base=C)


def check_composition_closed(C: FinCategory, morphisms) -> Verdict:
    """Closure of a set of base morphisms under composition."""
    mors = set(morphisms)
    for f in mors:
        for g in mors:
            if C.tgt(f) == C.src(g) and C.compose(g, f) not in mors:
                return Verdict(False, "composition", (g, f))
    return Verdict(True)
