"""Exception hierarchy. The CLI maps these onto exit codes."""


class VibronicaError(Exception):
    pass


class ConfigError(VibronicaError, ValueError):
    """Bad or inconsistent user input (exit code 2)."""


class NumericalError(VibronicaError, ArithmeticError):
    """A computation could not be carried out reliably (exit code 3)."""


class SingularMatrixError(NumericalError):
    def __init__(self, msg, condition=float("inf")):
        super().__init__(msg)
        self.condition = condition


class StiffnessError(NumericalError):
    pass


class TruncationError(NumericalError):
    pass


class DegenerateSteadyStateError(NumericalError):
    pass
