"""Exception hierarchy shared by all modules.

Every error raised on bad input derives from ``CuspedError`` so the CLI can map
it to exit status 1 with a single ``except`` clause.
"""


class CuspedError(ValueError):
    pass


class InvalidFieldError(CuspedError):
    pass


class UnsupportedError(CuspedError):
    pass


class SingularPairingError(CuspedError):
    pass


class InvalidMonodromyError(CuspedError):
    pass


class WrongGeometryError(CuspedError):
    pass


class NonIntegralMatrixError(CuspedError):
    pass


class NoRepresentationError(CuspedError):
    pass


class ConstraintError(CuspedError):
    pass


class InconsistencyError(CuspedError):
    pass


class GroupClosureError(CuspedError):
    pass


class AlreadyMemberError(CuspedError):
    pass


class InputError(CuspedError):
    pass
