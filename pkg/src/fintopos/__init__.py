"""Factorization systems and sheafification in finite presheaf topoi.

The package computes, at desk scale, the structures a finite-set-valued
presheaf category carries: orthogonal factorization systems generated by
a family of maps, reflections onto local objects, Grothendieck-topology
sheafification by iterated plus steps, and the modulator conditions under
which these constructions are stable or left-exact. Every construction is
deterministic and ships its own certificate (explicit comparison maps,
checked for bijectivity).
"""

from .errors import (
    FinToposError,
    MalformedCategory,
    MalformedDiagram,
    MalformedDocument,
    NonConvergence,
    SizeExceeded,
    StepUndefined,
    TargetMismatch,
    UnknownObject,
)
from .fincat import (
    CommaCategory,
    FinCategory,
    Functor,
    Morphism,
    check_category,
    comma,
    discrete_category,
    has_cone_over_every_finite_diagram,
    opposite,
    poset_category,
    terminal_category,
)
from .finset import FinSet, SetDiagram, SetMap, TwoVarSetDiagram, coend, colimit, limit
from .presheaf import (
    Presheaf,
    PresheafMap,
    Square,
    bang,
    exponential,
    initial,
    is_subterminal,
    join,
    nat_hom,
    pushout,
    pullback,
    support,
    terminal,
    yoneda,
    yoneda_element,
    yoneda_map,
)
from .arrows import (
    codiagonal,
    diagonal,
    is_cartesian,
    is_iso_whitehead,
    pullback_hom,
    tensor,
)
from .ortho import (
    FillerSet,
    LiftingProblem,
    fillers,
    is_local,
    is_orthogonal,
    is_weak_orthogonal,
    right_class_membership,
)
from .soa import (
    Comparison,
    FactorizationResult,
    MapFamily,
    codiagonal_completion,
    compare_kelly_plus,
    iterate,
    kelly_step,
    localized_hom,
    plus_classic,
    plus_step,
    q_step,
    reflect,
)

__all__ = [name for name in dir() if not name.startswith("_")]
