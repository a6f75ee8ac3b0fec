"""Exception hierarchy.

Two families: structural/input problems (trees, files, arguments) and
numerical preconditions (SPD failures, entropy mismatch). The CLI maps
them to distinct exit codes, so keep new exceptions under one of the
two bases.
"""


class GtcError(Exception):
    """Base for all library errors."""


class InputError(GtcError):
    """Invalid input: bad tree structure, bad file, bad argument."""


class NumericalError(GtcError):
    """A numerical precondition does not hold for otherwise valid input."""


# -- tree / input problems ------------------------------------------------

class CycleError(InputError):
    pass


class DisconnectedError(InputError):
    pass


class WeightRangeError(InputError):
    pass


class DuplicateEdgeError(InputError):
    pass


class NodeNotFoundError(InputError):
    pass


class EdgeNotFoundError(InputError):
    pass


class NotALeafError(InputError):
    pass


class NotDegreeTwoError(InputError):
    pass


class SplitInfeasibleError(InputError):
    pass


class NoOpError(InputError):
    pass


class EmptySubsetError(InputError):
    pass


class ParameterRangeError(InputError):
    pass


class DimensionMismatchError(InputError):
    pass


class SizeLimitExceededError(InputError):
    pass


class InapplicableChainError(InputError):
    pass


class NotOrthogonalError(InputError):
    pass


class ParseError(InputError):
    """Syntax error in a gtree/chain file, with 1-based position."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


# -- numerical preconditions ----------------------------------------------

class NotSpdError(NumericalError):
    pass


class EntropyMismatchError(NumericalError):
    """Log-determinants differ beyond tolerance where equality is assumed."""


class ToleranceExceededError(NumericalError):
    """An internal consistency residual exceeded its bound."""
