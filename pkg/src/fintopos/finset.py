"""Finite sets and maps with exact (co)limit kernels.

Elements are strings or nested tuples of elements; generated elements
(tags in disjoint unions, matching families in limits) are tuples, so the
whole element universe stays hashable and canonically sortable. Quotients
use union-find, and every class is represented by its least member, which
makes construction outputs bit-identical across runs.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from .errors import MalformedDiagram
from .fincat import FinCategory
from .guard import check_size


def sort_key(e):
    """Canonical total order on elements (strings before tuples)."""
    if isinstance(e, tuple):
        return (1, tuple(sort_key(x) for x in e))
    return (0, str(e))


class FinSet:
    """An ordered finite set of element ids."""

    __slots__ = ("elements", "_index")

    def __init__(self, elements):
        self.elements = tuple(elements)
        self._index = {e: i for i, e in enumerate(self.elements)}
        if len(self._index) != len(self.elements):
            raise MalformedDiagram("duplicate elements in FinSet")

    @staticmethod
    def canonical(elements) -> "FinSet":
        return FinSet(sorted(set(elements), key=sort_key))

    @staticmethod
    def of_size(n: int, prefix: str = "e") -> "FinSet":
        return FinSet(tuple(f"{prefix}{i}" for i in range(n)))

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, e):
        return e in self._index

    def __eq__(self, other):
        return isinstance(other, FinSet) and self.elements == other.elements

    def __hash__(self):
        return hash(self.elements)

    def __repr__(self):
        return f"FinSet({list(self.elements)!r})"


class SetMap:
    """A total map of finite sets."""

    __slots__ = ("src", "tgt", "assignment")

    def __init__(self, src: FinSet, tgt: FinSet, assignment):
        self.src = src
        self.tgt = tgt
        self.assignment = dict(assignment)
        for e in src:
            v = self.assignment.get(e, _MISSING)
            if v is _MISSING:
                raise MalformedDiagram(f"assignment not total at {e!r}")
            if v not in tgt:
                raise MalformedDiagram(f"value {v!r} outside target")
        if len(self.assignment) != len(src):
            raise MalformedDiagram("assignment defined outside source")

    def __call__(self, e):
        return self.assignment[e]

    def compose(self, other: "SetMap") -> "SetMap":
        """self ∘ other."""
        if other.tgt != self.src:
            raise MalformedDiagram("composition mismatch")
        return SetMap(other.src, self.tgt, {e: self(other(e)) for e in other.src})

    @staticmethod
    def identity(s: FinSet) -> "SetMap":
        return SetMap(s, s, {e: e for e in s})

    def is_injective(self) -> bool:
        return len(set(self.assignment.values())) == len(self.src)

    def is_surjective(self) -> bool:
        return set(self.assignment.values()) == set(self.tgt.elements)

    def is_bijective(self) -> bool:
        return self.is_injective() and self.is_surjective()

    def inverse(self) -> "SetMap":
        if not self.is_bijective():
            raise MalformedDiagram("inverse of a non-bijective map")
        return SetMap(self.tgt, self.src, {v: k for k, v in self.assignment.items()})

    def image(self) -> FinSet:
        return FinSet.canonical(self.assignment.values())

    def __eq__(self, other):
        return (
            isinstance(other, SetMap)
            and self.src == other.src
            and self.tgt == other.tgt
            and self.assignment == other.assignment
        )

    def __hash__(self):
        return hash((self.src, self.tgt, tuple(sorted(self.assignment.items(), key=lambda kv: sort_key(kv[0])))))

    def __repr__(self):
        return f"SetMap({len(self.src)}→{len(self.tgt)})"


_MISSING = object()


class UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x, y):
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            self.parent[ry] = rx

    def classes(self) -> dict:
        """Map each item to the least member of its class."""
        groups: dict = {}
        for x in self.parent:
            groups.setdefault(self.find(x), []).append(x)
        rep = {}
        for members in groups.values():
            least = min(members, key=sort_key)
            for m in members:
                rep[m] = least
        return rep


@dataclass
class SetDiagram:
    """A covariant functor from a finite shape category to finite sets."""

    shape: FinCategory
    sets: dict
    maps: dict

    def validate(self) -> None:
        for x in self.shape.objects:
            if x not in self.sets:
                raise MalformedDiagram(f"no set at {x}")
        for m in self.shape.morphisms:
            f = self.maps.get(m.id)
            if f is None or f.src != self.sets[m.src] or f.tgt != self.sets[m.tgt]:
                raise MalformedDiagram(f"bad map at {m.id}")
        for x in self.shape.objects:
            if self.maps[self.shape.id_of(x)] != SetMap.identity(self.sets[x]):
                raise MalformedDiagram(f"identity not preserved at {x}")
        for (g, f), gf in self.shape.compose_table.items():
            if self.maps[g].compose(self.maps[f]) != self.maps[gf]:
                raise MalformedDiagram(f"composition not preserved at ({g},{f})")


@dataclass
class Colimit:
    apex: FinSet
    legs: dict  # object id -> SetMap into apex


@dataclass
class Limit:
    apex: FinSet
    legs: dict  # object id -> SetMap out of apex


def colimit(D: SetDiagram) -> Colimit:
    """Quotient of the disjoint union by the relation generated by the maps.

    Class representatives are the least tagged element ``(object, elem)``;
    legs send each element to its class representative.
    """
    tags = [(x, e) for x in D.shape.objects for e in D.sets[x]]
    check_size(len(tags), "colimit tags")
    uf = UnionFind(tags)
    for m in D.shape.morphisms:
        f = D.maps[m.id]
        for e in D.sets[m.src]:
            uf.union((m.src, e), (m.tgt, f(e)))
    rep = uf.classes()
    apex = FinSet.canonical(rep.values())
    legs = {
        x: SetMap(D.sets[x], apex, {e: rep[(x, e)] for e in D.sets[x]})
        for x in D.shape.objects
    }
    return Colimit(apex, legs)


def limit(D: SetDiagram) -> Limit:
    """Matching families in the product, with projection legs.

    Elements are tuples listing one choice per shape object, in sorted
    object order. The limit over the empty shape is a singleton whose
    element is the empty tuple.
    """
    objs = list(D.shape.objects)
    size = 1
    for x in objs:
        size *= max(len(D.sets[x]), 1)
    check_size(size, "limit product")

    families = [()]
    for x in objs:
        new = []
        for fam in families:
            for e in D.sets[x]:
                cand = fam + (e,)
                if _consistent(D, objs[: len(cand)], cand):
                    new.append(cand)
        families = new
    apex = FinSet(sorted(families, key=sort_key))
    legs = {
        x: SetMap(apex, D.sets[x], {fam: fam[objs.index(x)] for fam in apex})
        for x in objs
    }
    return Limit(apex, legs)


def _consistent(D: SetDiagram, assigned, fam) -> bool:
    pos = {x: i for i, x in enumerate(assigned)}
    for m in D.shape.morphisms:
        if m.src in pos and m.tgt in pos:
            if D.maps[m.id](fam[pos[m.src]]) != fam[pos[m.tgt]]:
                return False
    return True


def colimit_induced(col: Colimit, D: SetDiagram, cocone: dict, tgt: FinSet) -> SetMap:
    """The unique map out of a colimit determined by a competing cocone.

    Verifies that ``cocone`` really is a cocone and that the induced
    assignment is well defined on classes.
    """
    for m in D.shape.morphisms:
        if cocone[m.tgt].compose(D.maps[m.id]) != cocone[m.src]:
            raise MalformedDiagram(f"not a cocone at {m.id}")
    assignment: dict = {}
    for x in D.shape.objects:
        for e in D.sets[x]:
            rep = col.legs[x](e)
            val = cocone[x](e)
            if assignment.setdefault(rep, val) != val:
                raise MalformedDiagram("cocone not constant on a colimit class")
    return SetMap(col.apex, tgt, assignment)


def limit_induced(lim: Limit, D: SetDiagram, cone: dict, src: FinSet) -> SetMap:
    """The unique map into a limit determined by a competing cone."""
    for m in D.shape.morphisms:
        if D.maps[m.id].compose(cone[m.src]) != cone[m.tgt]:
            raise MalformedDiagram(f"not a cone at {m.id}")
    assignment = {}
    for e in src:
        fam = tuple(cone[x](e) for x in D.shape.objects)
        if fam not in lim.apex:
            raise MalformedDiagram("cone lands outside the limit")
        assignment[e] = fam
    return SetMap(src, lim.apex, assignment)


# -- coends ----------------------------------------------------------------


@dataclass
class TwoVarSetDiagram:
    """A functor Wᵒᵖ × W → FinSet given by its two partial actions.

    ``sets[(a, b)]`` is the value at ``(a, b)``; ``contra[(u, b)]`` is the
    action of ``u: a → a'`` in the first variable, mapping ``sets[(a', b)]``
    to ``sets[(a, b)]``; ``cova[(a, v)]`` is the action of ``v: b → b'`` in
    the second, mapping ``sets[(a, b)]`` to ``sets[(a, b')]``.
    """

    shape: FinCategory
    sets: dict
    contra: dict
    cova: dict

    def validate(self) -> None:
        W = self.shape
        for a, b in product(W.objects, W.objects):
            if (a, b) not in self.sets:
                raise MalformedDiagram(f"no value at ({a},{b})")
        for m in W.morphisms:
            for b in W.objects:
                f = self.contra.get((m.id, b))
                if f is None or f.src != self.sets[(m.tgt, b)] or f.tgt != self.sets[(m.src, b)]:
                    raise MalformedDiagram(f"bad contra action at ({m.id},{b})")
            for a in W.objects:
                f = self.cova.get((a, m.id))
                if f is None or f.src != self.sets[(a, m.src)] or f.tgt != self.sets[(a, m.tgt)]:
                    raise MalformedDiagram(f"bad cova action at ({a},{m.id})")
        for x in W.objects:
            i = W.id_of(x)
            for b in W.objects:
                if self.contra[(i, b)] != SetMap.identity(self.sets[(x, b)]):
                    raise MalformedDiagram(f"contra identity at ({x},{b})")
                if self.cova[(b, i)] != SetMap.identity(self.sets[(b, x)]):
                    raise MalformedDiagram(f"cova identity at ({b},{x})")
        for (g, f), gf in W.compose_table.items():
            for b in W.objects:
                if self.contra[(f, b)].compose(self.contra[(g, b)]) != self.contra[(gf, b)]:
                    raise MalformedDiagram(f"contra composition at ({g},{f})")
                if self.cova[(b, g)].compose(self.cova[(b, f)]) != self.cova[(b, gf)]:
                    raise MalformedDiagram(f"cova composition at ({g},{f})")
        for m1 in W.morphisms:
            for m2 in W.morphisms:
                left = self.cova[(m1.src, m2.id)].compose(self.contra[(m1.id, m2.src)])
                right = self.contra[(m1.id, m2.tgt)].compose(self.cova[(m1.tgt, m2.id)])
                if left != right:
                    raise MalformedDiagram(f"actions do not commute at ({m1.id},{m2.id})")


def coend(T: TwoVarSetDiagram) -> Colimit:
    """Coequalizer of the two actions on the diagonal values.

    Computes ∐_w S(w, w) modulo the relations identifying, for each
    ``u: a → b`` and ``s ∈ S(b, a)``, the two transports of ``s`` to the
    diagonal. Legs are indexed by the shape objects.
    """
    W = T.shape
    tags = [(w, e) for w in W.objects for e in T.sets[(w, w)]]
    check_size(len(tags), "coend tags")
    uf = UnionFind(tags)
    for m in W.morphisms:
        a, b = m.src, m.tgt
        for s in T.sets[(b, a)]:
            uf.union((a, T.contra[(m.id, a)](s)), (b, T.cova[(b, m.id)](s)))
    rep = uf.classes()
    apex = FinSet.canonical(rep.values())
    legs = {
        w: SetMap(T.sets[(w, w)], apex, {e: rep[(w, e)] for e in T.sets[(w, w)]})
        for w in W.objects
    }
    return Colimit(apex, legs)
