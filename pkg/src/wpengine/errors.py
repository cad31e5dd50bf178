"""Exception hierarchy shared by all engine modules."""


class EngineError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(EngineError):
    """Malformed concrete syntax; carries 1-based line and column."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


class ProbabilityOutOfRange(EngineError):
    """Probabilistic-choice bias outside [0, 1]."""


class IllegalProduct(EngineError):
    """Attempt to multiply two non-arithmetic expectations."""


class ContainsLoop(EngineError):
    """A syntactic transformer was applied to a program with a while loop."""


class FuelExceeded(EngineError):
    """A bounded exploration blew past its configured state or path cap."""


class SummandBlowup(EngineError):
    """Too many guarded summands for the 2^n cut construction."""


class NotPrenex(EngineError):
    """A first-order formula was required to be in prenex form."""


class FreeVarsOutsideVarSet(EngineError):
    """An expectation mentions variables outside the declared variable set."""
