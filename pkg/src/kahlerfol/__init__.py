"""Local-chart construction and numerical verification of Kähler metrics on circle and sphere bundles."""

from .tensor.metric import DegeneracyError, DomainError, NumericError

__version__ = "0.1.0"

__all__ = ["DegeneracyError", "DomainError", "NumericError", "__version__"]
