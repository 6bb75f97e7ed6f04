"""Exception hierarchy shared across the package."""


class KnotdynError(Exception):
    """Base class for all package-specific errors."""


class TangleSyntaxError(KnotdynError):
    """Notation string does not conform to the grammar.

    `offset` is the byte offset of the first offending character.
    """

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class IntegerOverflowError(TangleSyntaxError):
    """Integer literal outside the signed 64-bit range."""


class IndeterminateFormError(KnotdynError):
    """Arithmetic combination with no defined extended-rational value."""


class EmptyOperandError(KnotdynError):
    """Operation requires a non-empty term list."""


class NonRationalClosureError(KnotdynError):
    """Closure expression outside the supported reducible shapes."""


class ParameterRangeError(KnotdynError):
    """Parameter violates a documented range constraint."""


class CoincidentPointsError(KnotdynError):
    """Two beads occupy the same position."""


class DegenerateCurveError(KnotdynError):
    """Curve is too short or otherwise unusable."""


class UnsupportedExpressionError(KnotdynError):
    """Expression shape not supported by the embedding constructor."""


class BeadBudgetError(KnotdynError):
    """Requested bead count too small for the diagram's crossings."""


class NonGenericProjectionError(KnotdynError):
    """No generic projection direction found after perturbation attempts."""


class StepCollapseError(KnotdynError):
    """Time step collapsed: 20 halvings without an acceptable step."""


class PerturbationFailedError(KnotdynError):
    """No safe perturbation found within the retry budget."""


class MalformedFileError(KnotdynError):
    """On-disk curve/trajectory file violates its schema."""


class UnknownScenarioError(KnotdynError):
    """Scenario name not in the registry."""


class ProtocolError(KnotdynError):
    """Malformed or invalid service protocol message."""
