"""Exception hierarchy.

Two families matter to callers: ``InapplicableError`` (the requested
computation does not apply to this regime/profile) and ``NumericalError``
(the computation applies but failed numerically). The CLI maps them to exit
codes 2 and 3.
"""


class LabError(Exception):
    pass


class InapplicableError(LabError):
    pass


class WrongRegimeError(InapplicableError):
    pass


class AdmissibilityError(InapplicableError):
    pass


class NumericalError(LabError):
    pass


class AccuracyError(NumericalError):
    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class RangeError(NumericalError):
    pass


class LinearBlowupError(NumericalError):
    """The free (linear) evolution itself does not exist at the requested time."""


class StepFailureError(NumericalError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class DomainError(LabError, ValueError):
    pass
