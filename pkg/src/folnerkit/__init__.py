"""Exact group arithmetic, Folner-set certificates and random-walk statistics."""

__version__ = "0.1.0"

from .core import Ball, Group, GroupSpec, ball, boundary_set, inner_boundary, word_length  # noqa: E402
from .errors import (CertificateError, DegenerateInputError, FolnerkitError,  # noqa: E402
                     HypothesisError, ResourceError, StructuralError, UnsupportedError)

__all__ = [
    "Ball", "Group", "GroupSpec", "ball", "boundary_set", "inner_boundary", "word_length",
    "CertificateError", "DegenerateInputError", "FolnerkitError", "HypothesisError",
    "ResourceError", "StructuralError", "UnsupportedError", "__version__",
]
