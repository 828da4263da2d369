"""Exception types shared across the package."""


class AlipDomainError(ValueError):
    """Input outside the physical domain of an operation (e.g. r_c <= 0)."""


class CurveRangeError(ValueError):
    """Curve evaluated outside its parameter interval."""


class CurveFitError(ValueError):
    """Not enough distinct samples to determine the curve."""


class OrbitSynthesisError(RuntimeError):
    """Periodic orbit synthesis failed (infeasible geometry or no closure)."""


class ReductionError(RuntimeError):
    """Constrained-dynamics reduction failed (singular lambda block)."""


class ControlError(RuntimeError):
    """Output torque solve failed (rank-deficient decoupling matrix)."""


class NumericalError(RuntimeError):
    """Non-finite values encountered during integration."""


class ScenarioError(ValueError):
    """Scenario file is missing, malformed, or violates an invariant."""

    def __init__(self, message, path=None, line=None):
        loc = ""
        if path is not None:
            loc = f"{path}:"
            if line is not None:
                loc += f"{line}:"
            loc += " "
        super().__init__(f"{loc}{message}")
        self.path = path
        self.line = line
