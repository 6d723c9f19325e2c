"""Exception hierarchy shared by all holoflow modules."""


class HoloflowError(Exception):
    """Base class for domain errors (mapped to exit code 1 by the CLI)."""


class DimensionError(HoloflowError, ValueError):
    pass


class IndexRangeError(HoloflowError, IndexError):
    pass


class SubstitutionError(HoloflowError, ValueError):
    pass


class DegenerateFieldError(HoloflowError, ValueError):
    """A zero eigenvalue where a nonzero one is required."""


class EnumerationUnboundedError(HoloflowError, ValueError):
    """Resonance search would not terminate without a degree cap."""


class InvalidNormalFormError(HoloflowError, ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations)
        super().__init__(f"field is not a valid normal form: {lines}")


class PreconditionError(HoloflowError, ValueError):
    pass


class StepTooLargeError(HoloflowError, ValueError):
    pass


class TrajectoryEscapeError(HoloflowError, ArithmeticError):
    pass


class RayNotFoundError(HoloflowError):
    pass


class PoleError(HoloflowError, ZeroDivisionError):
    pass


class ParameterError(HoloflowError, ValueError):
    pass


class SingularEvaluationError(HoloflowError, ArithmeticError):
    pass
