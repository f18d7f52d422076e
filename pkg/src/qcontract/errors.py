"""Exception types shared across the toolkit."""

from __future__ import annotations


class ContractViolation(Exception):
    """Base class for failures of the contract machinery at run time."""

    def __init__(self, message: str, *, tag: str | None = None, path: str | None = None):
        super().__init__(message)
        self.tag = tag
        self.path = path


class StateConditionError(ContractViolation):
    """A named pre/post-state condition evaluated to false."""


class MeasureConditionError(ContractViolation):
    """A named measurement condition evaluated to false."""


class EntangledSubsetError(ContractViolation):
    """A qubit subset was entangled with its environment when a pure
    partial state was required."""

    def __init__(self, message: str, *, purity: float, tag: str | None = None, path: str | None = None):
        super().__init__(message, tag=tag, path=path)
        self.purity = purity


class BuildError(ContractViolation):
    """Invalid circuit construction (bad size, indices, arity, duplicate tags)."""


class PostprocessError(ContractViolation):
    """The user-supplied postprocess function raised while digesting counts."""


class UnsupportedGateError(ValueError):
    """A gate that the basis rewriter cannot express in the requested basis."""
