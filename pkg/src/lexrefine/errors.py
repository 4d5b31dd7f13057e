"""Exception hierarchy.

Every error raised on purpose by the package derives from ``LexRefineError``.
Each class carries the process exit code the CLI uses for it.
"""


class LexRefineError(Exception):
    exit_code = 1


# -- model / parse errors (exit 2) ------------------------------------------

class ModelError(LexRefineError):
    exit_code = 2


class ModelSyntaxError(ModelError):
    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"{line}:{col}: {message}"
        super().__init__(message)


class UnknownTag(ModelError):
    pass


class DuplicateName(ModelError):
    pass


class ValueOutOfType(ModelError):
    pass


# -- unsupported features (exit 3) --------------------------------------------

class UnsupportedFeature(LexRefineError):
    exit_code = 3


class InvalidRepr(UnsupportedFeature):
    pass


class UnsupportedReprAtConstraintLevel(UnsupportedFeature):
    pass


class UnsupportedConstraint(UnsupportedFeature):
    pass


class NotTwoDimensional(UnsupportedFeature):
    pass


class NotInImage(LexRefineError):
    pass


# -- resource limits (exit 4) ---------------------------------------------------

class ResourceError(LexRefineError):
    exit_code = 4


class CapExceeded(ResourceError):
    pass


class InfiniteType(ResourceError):
    pass


class SizeOverflow(ResourceError):
    pass


class ResourceLimit(ResourceError):
    pass
