"""Exception hierarchy shared by every module."""


class FolnerkitError(Exception):
    pass


class StructuralError(FolnerkitError, ValueError):
    """Input does not belong to the expected group, or breaks a canonical-form invariant."""


class DegenerateInputError(FolnerkitError, ValueError):
    pass


class UnsupportedError(FolnerkitError, NotImplementedError):
    pass


class ResourceError(FolnerkitError, RuntimeError):
    """A computation would exceed its element or length budget.

    ``layer`` records how far the computation got (a BFS layer, a time
    horizon, ...) so callers can retry with a smaller request.
    """

    def __init__(self, message, layer=None):
        super().__init__(message)
        self.layer = layer


class HypothesisError(FolnerkitError, ValueError):
    """A theorem's precondition does not hold; ``ratio`` is the offending exact value."""

    def __init__(self, message, ratio=None, required=None):
        super().__init__(message)
        self.ratio = ratio
        self.required = required


class CertificateError(FolnerkitError, AssertionError):
    """A theorem-backed inequality failed on concrete data. This is never expected."""
