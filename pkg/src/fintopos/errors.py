"""Exception types shared across the package."""
from __future__ import annotations


class FinToposError(Exception):
    """Base class for all package errors."""


class MalformedCategory(FinToposError):
    """A category description violates typing, identity or associativity laws.

    ``law`` names the violated law, ``witness`` holds the offending ids.
    """

    def __init__(self, law: str, witness, message: str = ""):
        self.law = law
        self.witness = witness
        super().__init__(message or f"{law}: {witness!r}")


class MalformedDiagram(FinToposError):
    """A diagram (of sets or presheaves) is not functorial."""


class TargetMismatch(FinToposError):
    """Two functors fed to a comma construction do not share their target."""


class UnknownObject(FinToposError):
    """An object id is not part of the category it was used with."""


class SizeExceeded(FinToposError):
    """A construction would materialize more elements than the size guard allows."""


class NonConvergence(FinToposError):
    """A factorization iteration hit its step budget before reaching a fixed point.

    ``last`` carries the final iterate so callers can inspect how far the
    run got; this error is never downgraded to a silent truncation.
    """

    def __init__(self, iterations: int, last=None, message: str = ""):
        self.iterations = iterations
        self.last = last
        super().__init__(message or f"no fixed point after {iterations} iteration(s)")


class StepUndefined(FinToposError):
    """A construction needs structure the given map family does not provide.

    Raised e.g. when the unit of a plus-step is requested for a family that
    does not contain the generator identities.
    """


class MalformedDocument(FinToposError):
    """An input document does not match the expected schema."""
