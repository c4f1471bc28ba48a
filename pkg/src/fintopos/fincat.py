"""Finite categories, functors between them, opposites and comma categories.

Categories are fully materialized: an ordered object list, an ordered
morphism list, explicit identities and a total composition table. All
generated ids and enumeration orders are sorted, so every construction is
reproducible bit for bit.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import product

from .errors import MalformedCategory, TargetMismatch, UnknownObject
from .guard import check_size


def render_id(parts) -> str:
    """Collision-free string id for generated objects and morphisms."""
    return json.dumps(parts, separators=(",", ":"), ensure_ascii=False)


@dataclass(frozen=True, order=True)
class Morphism:
    id: str
    src: str
    tgt: str


class FinCategory:
    """A finite category with explicit identity morphisms.

    The composition table must be defined exactly on composable pairs
    ``(g, f)`` with ``tgt f == src g`` and records ``g∘f``. Use
    :func:`check_category` to validate raw data; the constructors in this
    package always produce valid categories.
    """

    def __init__(self, objects, morphisms, identity, compose):
        self.objects: tuple[str, ...] = tuple(sorted(objects))
        mors = sorted(morphisms, key=lambda m: m.id)
        self.morphisms: tuple[Morphism, ...] = tuple(mors)
        self.identity: dict[str, str] = dict(identity)
        self.compose_table: dict[tuple[str, str], str] = dict(compose)
        self._by_id = {m.id: m for m in self.morphisms}
        self._hom: dict[tuple[str, str], tuple[str, ...]] = {}

    # -- accessors ---------------------------------------------------------

    def mor(self, mid: str) -> Morphism:
        return self._by_id[mid]

    def has_mor(self, mid: str) -> bool:
        return mid in self._by_id

    def src(self, mid: str) -> str:
        return self._by_id[mid].src

    def tgt(self, mid: str) -> str:
        return self._by_id[mid].tgt

    def id_of(self, obj: str) -> str:
        if obj not in self.identity:
            raise UnknownObject(obj)
        return self.identity[obj]

    def compose(self, g: str, f: str) -> str:
        """Return ``g∘f`` (first ``f``, then ``g``)."""
        return self.compose_table[(g, f)]

    def hom(self, x: str, y: str) -> tuple[str, ...]:
        key = (x, y)
        if key not in self._hom:
            self._hom[key] = tuple(
                m.id for m in self.morphisms if m.src == x and m.tgt == y
            )
        return self._hom[key]

    def is_identity(self, mid: str) -> bool:
        m = self._by_id[mid]
        return self.identity.get(m.src) == mid

    # -- comparison --------------------------------------------------------

    def __eq__(self, other):
        return (
            isinstance(other, FinCategory)
            and self.objects == other.objects
            and self.morphisms == other.morphisms
            and self.identity == other.identity
            and self.compose_table == other.compose_table
        )

    def __hash__(self):
        return hash((self.objects, self.morphisms))

    def __repr__(self):
        return f"FinCategory({len(self.objects)} objects, {len(self.morphisms)} morphisms)"

    # -- validation --------------------------------------------------------

    def validate(self) -> None:
        """Raise MalformedCategory at the first violated law."""
        seen = set()
        for m in self.morphisms:
            if m.id in seen:
                raise MalformedCategory("unique-ids", m.id)
            seen.add(m.id)
            if m.src not in self.objects or m.tgt not in self.objects:
                raise MalformedCategory("typing", m.id, f"morphism {m.id} has unknown endpoint")
        for x in self.objects:
            i = self.identity.get(x)
            if i is None or i not in self._by_id:
                raise MalformedCategory("identity-presence", x)
            m = self._by_id[i]
            if m.src != x or m.tgt != x:
                raise MalformedCategory("identity-typing", (x, i))
        composable = {
            (g.id, f.id)
            for f in self.morphisms
            for g in self.morphisms
            if f.tgt == g.src
        }
        extra = set(self.compose_table) - composable
        if extra:
            raise MalformedCategory("composition-domain", sorted(extra)[0])
        for (g, f) in sorted(composable):
            if (g, f) not in self.compose_table:
                raise MalformedCategory("composition-totality", (g, f))
            gf = self.compose_table[(g, f)]
            if gf not in self._by_id:
                raise MalformedCategory("composition-typing", (g, f, gf))
            m = self._by_id[gf]
            if m.src != self.src(f) or m.tgt != self.tgt(g):
                raise MalformedCategory("composition-typing", (g, f, gf))
        for f in self.morphisms:
            if self.compose_table[(self.identity[f.tgt], f.id)] != f.id:
                raise MalformedCategory("left-identity", f.id)
            if self.compose_table[(f.id, self.identity[f.src])] != f.id:
                raise MalformedCategory("right-identity", f.id)
        for f in self.morphisms:
            for g in self.morphisms:
                if g.src != f.tgt:
                    continue
                for h in self.morphisms:
                    if h.src != g.tgt:
                        continue
                    left = self.compose_table[(h.id, self.compose_table[(g.id, f.id)])]
                    right = self.compose_table[(self.compose_table[(h.id, g.id)], f.id)]
                    if left != right:
                        raise MalformedCategory("associativity", (h.id, g.id, f.id))


def check_category(data: dict) -> FinCategory:
    """Validate a raw category description and return a FinCategory.

    Expected schema::

        {"objects": [...],
         "morphisms": [{"id": ..., "src": ..., "tgt": ...}, ...],
         "identity": {obj: morphism id, ...},
         "compose": [{"g": ..., "f": ..., "gf": ...}, ...]}
    """
    try:
        objects = list(data["objects"])
        morphisms = [Morphism(m["id"], m["src"], m["tgt"]) for m in data["morphisms"]]
        identity = dict(data["identity"])
        compose = {(c["g"], c["f"]): c["gf"] for c in data["compose"]}
    except (KeyError, TypeError) as exc:
        raise MalformedCategory("schema", str(exc))
    cat = FinCategory(objects, morphisms, identity, compose)
    cat.validate()
    return cat


def opposite(C: FinCategory) -> FinCategory:
    """The opposite category, on the same object and morphism ids."""
    mors = [Morphism(m.id, m.tgt, m.src) for m in C.morphisms]
    compose = {(f, g): gf for (g, f), gf in C.compose_table.items()}
    return FinCategory(C.objects, mors, C.identity, compose)


@dataclass(frozen=True)
class Functor:
    """A functor between finite categories, given by explicit maps."""

    src: FinCategory
    tgt: FinCategory
    on_objects: dict
    on_morphisms: dict

    def obj(self, x: str) -> str:
        return self.on_objects[x]

    def mor(self, f: str) -> str:
        return self.on_morphisms[f]

    def validate(self) -> None:
        for x in self.src.objects:
            if self.on_objects.get(x) not in self.tgt.objects:
                raise MalformedCategory("functor-objects", x)
        for m in self.src.morphisms:
            img = self.on_morphisms.get(m.id)
            if img is None or not self.tgt.has_mor(img):
                raise MalformedCategory("functor-morphisms", m.id)
            im = self.tgt.mor(img)
            if im.src != self.obj(m.src) or im.tgt != self.obj(m.tgt):
                raise MalformedCategory("functor-typing", m.id)
        for x in self.src.objects:
            if self.mor(self.src.id_of(x)) != self.tgt.id_of(self.obj(x)):
                raise MalformedCategory("functor-identity", x)
        for (g, f), gf in self.src.compose_table.items():
            if self.tgt.compose(self.mor(g), self.mor(f)) != self.mor(gf):
                raise MalformedCategory("functor-composition", (g, f))

    @staticmethod
    def identity(C: FinCategory) -> "Functor":
        return Functor(C, C, {x: x for x in C.objects}, {m.id: m.id for m in C.morphisms})

    @staticmethod
    def constant(src: FinCategory, tgt: FinCategory, obj: str) -> "Functor":
        """The functor collapsing ``src`` onto one object of ``tgt``."""
        if obj not in tgt.objects:
            raise UnknownObject(obj)
        i = tgt.id_of(obj)
        return Functor(
            src, tgt, {x: obj for x in src.objects}, {m.id: i for m in src.morphisms}
        )


@dataclass
class CommaCategory:
    """F↓G together with its projection functors.

    ``triples`` maps each object id to its ``(a, b, m)`` data and
    ``pairs`` maps each morphism id to its ``(u, v)`` components.
    """

    category: FinCategory
    left: Functor
    right: Functor
    triples: dict
    pairs: dict


def comma(F: Functor, G: Functor) -> CommaCategory:
    """The comma category of a cospan of functors F: A → T ← B : G."""
    if F.tgt != G.tgt:
        raise TargetMismatch("comma requires functors with equal targets")
    A, B, T = F.src, G.src, F.tgt

    objs = []
    triples = {}
    for a in A.objects:
        for b in B.objects:
            for m in T.hom(F.obj(a), G.obj(b)):
                oid = render_id(["o", a, b, m])
                objs.append(oid)
                triples[oid] = (a, b, m)
    check_size(len(objs), "comma objects")

    mors = []
    pairs = {}
    for o1, o2 in product(objs, objs):
        a1, b1, m1 = triples[o1]
        a2, b2, m2 = triples[o2]
        for u in A.hom(a1, a2):
            for v in B.hom(b1, b2):
                if T.compose(m2, F.mor(u)) == T.compose(G.mor(v), m1):
                    mid = render_id(["m", o1, o2, u, v])
                    mors.append(Morphism(mid, o1, o2))
                    pairs[mid] = (u, v)
    check_size(len(mors), "comma morphisms")

    identity = {}
    for oid, (a, b, _m) in triples.items():
        identity[oid] = render_id(["m", oid, oid, A.id_of(a), B.id_of(b)])

    by_pair = {(m.src, m.tgt, *pairs[m.id]): m.id for m in mors}
    compose = {}
    for f in mors:
        for g in mors:
            if f.tgt != g.src:
                continue
            u1, v1 = pairs[f.id]
            u2, v2 = pairs[g.id]
            compose[(g.id, f.id)] = by_pair[(f.src, g.tgt, A.compose(u2, u1), B.compose(v2, v1))]

    cat = FinCategory(objs, mors, identity, compose)
    cat.validate()
    left = Functor(cat, A, {o: triples[o][0] for o in objs}, {m.id: pairs[m.id][0] for m in mors})
    right = Functor(cat, B, {o: triples[o][1] for o in objs}, {m.id: pairs[m.id][1] for m in mors})
    left.validate()
    right.validate()
    return CommaCategory(cat, left, right, triples, pairs)


def has_cone_over_every_finite_diagram(C: FinCategory) -> bool:
    """Cofilteredness of a finite category.

    Uses the finite criterion: nonempty, every pair of objects admits a
    common source, and every parallel pair of morphisms is equalized by
    some incoming morphism. For finite categories this is equivalent to
    every finite diagram admitting a cone.
    """
    if not C.objects:
        return False
    for x in C.objects:
        for y in C.objects:
            if not any(C.hom(z, x) and C.hom(z, y) for z in C.objects):
                return False
    for f in C.morphisms:
        for g in C.morphisms:
            if f.id >= g.id or f.src != g.src or f.tgt != g.tgt:
                continue
            if not any(
                C.compose(f.id, h.id) == C.compose(g.id, h.id)
                for h in C.morphisms
                if h.tgt == f.src
            ):
                return False
    return True


# -- small builders --------------------------------------------------------


def terminal_category(obj: str = "*") -> FinCategory:
    i = f"id_{obj}"
    return FinCategory([obj], [Morphism(i, obj, obj)], {obj: i}, {(i, i): i})


def discrete_category(objects) -> FinCategory:
    objects = sorted(objects)
    mors = [Morphism(f"id_{x}", x, x) for x in objects]
    identity = {x: f"id_{x}" for x in objects}
    compose = {(m.id, m.id): m.id for m in mors}
    return FinCategory(objects, mors, identity, compose)


def poset_category(objects, pairs) -> FinCategory:
    """The category of a poset: one morphism x→y whenever ``(x, y)`` is in
    the reflexive-transitive closure of ``pairs``."""
    objects = sorted(objects)
    rel = {(x, x) for x in objects} | {tuple(p) for p in pairs}
    changed = True
    while changed:
        changed = False
        for (a, b) in list(rel):
            for (c, d) in list(rel):
                if b == c and (a, d) not in rel:
                    rel.add((a, d))
                    changed = True
    mors = []
    for (x, y) in sorted(rel):
        mid = f"id_{x}" if x == y else f"{x}->{y}"
        mors.append(Morphism(mid, x, y))
    by_pair = {(m.src, m.tgt): m.id for m in mors}
    identity = {x: f"id_{x}" for x in objects}
    compose = {}
    for f in mors:
        for g in mors:
            if f.tgt == g.src:
                compose[(g.id, f.id)] = by_pair[(f.src, g.tgt)]
    cat = FinCategory(objects, mors, identity, compose)
    cat.validate()
    return cat
