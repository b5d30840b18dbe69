"""
This module defines the exceptions raised across the `iceemu` package.

Every error derives from `IceEmuError` and carries the process exit code the
command-line front end returns when the error aborts a command:

- `ConfigError` (2): invalid configuration values or refused output paths.
- `ValidationError` (3): malformed meshes, frame files, splits or artifacts.
- `NumericalError` (4): degenerate geometry, unstable steps, diverging training
  and failed gradient checks.
"""

from typing import Optional


class IceEmuError(Exception):
    """Base class for all errors raised by the package."""

    exit_code = 1


class ConfigError(IceEmuError, ValueError):
    """Raised when a configuration value is missing, unknown or out of range."""

    exit_code = 2


class ValidationError(IceEmuError, ValueError):
    """Raised when input data violates a structural invariant."""

    exit_code = 3

    def __init__(self, message: str, row: Optional[int] = None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class MeshError(ValidationError):
    """Raised when a mesh is malformed."""

    pass


class FrameValidationError(ValidationError):
    """Raised when a frame set or frames file is incomplete or non-finite."""

    pass


class SplitError(ValidationError):
    """Raised when a melting-rate split leaves a partition empty."""

    pass


class NormalizationError(ValidationError):
    """Raised when normalization statistics cannot be fitted."""

    pass


class ShapeError(ValidationError):
    """Raised when array dimensions do not line up."""

    pass


class DomainError(ValidationError):
    """Raised when a point lies outside the oracle domain."""

    pass


class ArtifactError(ValidationError):
    """Raised when a model artifact cannot be decoded."""

    pass


class NumericalError(IceEmuError, ArithmeticError):
    """Base class for numerical aborts."""

    exit_code = 4


class DegenerateEdgeError(NumericalError):
    """Raised when two connected nodes coincide, leaving the edge weight undefined."""

    pass


class StabilityError(NumericalError):
    """Raised when a transport step would violate the CFL bound."""

    pass


class DivergenceError(NumericalError):
    """Raised when the training loss becomes non-finite."""

    def __init__(self, epoch: int, loss: float):
        super().__init__(f"training diverged at epoch {epoch} (loss={loss})")
        self.epoch = epoch
        self.loss = loss


class GradientCheckError(NumericalError):
    """Raised when an analytic gradient disagrees with finite differences."""

    pass


class UndefinedMetricError(NumericalError):
    """Raised when a metric is undefined for its input, e.g. correlation of a constant."""

    pass
