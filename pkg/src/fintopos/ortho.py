"""Lifting problems and the two orthogonality relations.

``is_weak_orthogonal`` and ``is_orthogonal`` go through the pullback-hom
(surjective resp. bijective); exhaustive filler enumeration is kept as an
independent oracle and the two must agree.
"""
from __future__ import annotations

from dataclasses import dataclass

from .arrows import decode_square, pullback_hom, square_set
from .finset import FinSet, sort_key
from .presheaf import PresheafMap, Square, bang, decode_nat, encode_components, nat_hom


@dataclass
class LiftingProblem:
    square: Square


@dataclass
class FillerSet:
    """Diagonal fillers of a lifting problem, as an ordinary finite set.

    Each element encodes a transformation t w → s f; ``decode`` recovers
    the PresheafMap.
    """

    problem: LiftingProblem
    fillers: FinSet

    def decode(self, enc) -> PresheafMap:
        sq = self.problem.square
        return decode_nat(sq.w.tgt, sq.f.src, enc)

    def __len__(self):
        return len(self.fillers)


def fillers(p: LiftingProblem) -> FillerSet:
    """Exhaustive enumeration of diagonal fillers of a commutative square."""
    sq = p.square
    sq.validate()
    found = []
    for enc in nat_hom(sq.w.tgt, sq.f.src):
        h = decode_nat(sq.w.tgt, sq.f.src, enc)
        if h.compose(sq.w) == sq.top and sq.f.compose(h) == sq.bottom:
            found.append(enc)
    return FillerSet(p, FinSet(sorted(found, key=sort_key)))


def is_weak_orthogonal(w: PresheafMap, f: PresheafMap) -> bool:
    """w ⋔ f: the pullback-hom is surjective (every square has a filler)."""
    return pullback_hom(w, f).is_surjective()


def is_orthogonal(w: PresheafMap, f: PresheafMap) -> bool:
    """w ⊥ f: the pullback-hom is bijective (unique fillers)."""
    return pullback_hom(w, f).is_bijective()


def is_weak_orthogonal_oracle(w: PresheafMap, f: PresheafMap) -> bool:
    """Filler-count oracle for ⋔; must agree with the pullback-hom path."""
    for enc in square_set(w, f):
        if len(fillers(LiftingProblem(decode_square(w, f, enc)))) < 1:
            return False
    return True


def is_orthogonal_oracle(w: PresheafMap, f: PresheafMap) -> bool:
    """Filler-count oracle for ⊥; must agree with the pullback-hom path."""
    for enc in square_set(w, f):
        if len(fillers(LiftingProblem(decode_square(w, f, enc)))) != 1:
            return False
    return True


@dataclass
class MembershipReport:
    """Per-generator orthogonality verdicts for one candidate map."""

    verdicts: dict  # family object id -> bool
    overall: bool
    relation: str  # "orthogonal" or "weak"


def right_class_membership(f: PresheafMap, family, weak: bool = False) -> MembershipReport:
    """Decide membership of ``f`` in the right class of a map family.

    Only membership is decidable; the class itself is never materialized.
    ``family`` is a soa.MapFamily; its morphisms are irrelevant here.
    """
    test = is_weak_orthogonal if weak else is_orthogonal
    verdicts = {}
    for name in family.indexing.objects:
        verdicts[name] = test(family.arrows[name], f)
    return MembershipReport(verdicts, all(verdicts.values()), "weak" if weak else "orthogonal")


def is_local(X, family) -> bool:
    """An object is local when its map to the terminal is right-orthogonal."""
    return right_class_membership(bang(X), family).overall


def unique_filler(w: PresheafMap, f: PresheafMap, top: PresheafMap, bottom: PresheafMap) -> PresheafMap:
    """The unique diagonal of a square known to have exactly one filler.

    Raises if the filler count is not exactly one; used to build canonical
    comparison maps between factorizations.
    """
    fs = fillers(LiftingProblem(Square(w, f, top, bottom)))
    if len(fs) != 1:
        raise ValueError(f"expected exactly one filler, found {len(fs)}")
    return fs.decode(fs.fillers.elements[0])
