"""Exception hierarchy shared by every fhm_lab module."""

from __future__ import annotations

from typing import Any, Sequence

import numpy as np


class FhmLabError(Exception):
    """Base class for all laboratory errors."""


class InputError(FhmLabError, ValueError):
    """Invalid argument or precondition violation."""


class SingularityError(FhmLabError):
    """Evaluation at a point where the requested derivative does not exist."""


class NumericalError(FhmLabError):
    """A numerical procedure failed to reach its tolerance."""

    def __init__(self, message: str, residual: float | None = None) -> None:
        super().__init__(message)
        self.residual = residual


class NewtonDivergenceError(NumericalError):
    """Damped Newton failed; carries the last iterate and the residual history."""

    def __init__(
        self,
        message: str,
        iterate: np.ndarray,
        residual_history: Sequence[float],
    ) -> None:
        super().__init__(message, residual_history[-1] if residual_history else None)
        self.iterate = iterate
        self.residual_history = list(residual_history)


class MeshGenerationError(FhmLabError):
    """The mesher rejected the geometry or produced an unusable mesh."""


class MeasureExtractionError(NumericalError):
    """Boundary measure extraction saw too much negative mass."""


class WindingError(FhmLabError):
    """A level curve vertex has a vanishing gradient; the winding number is undefined."""

    def __init__(self, message: str, vertex: Any = None) -> None:
        super().__init__(message)
        self.vertex = vertex


class ConfigError(FhmLabError, ValueError):
    """Run configuration failed validation."""


class ChecksumError(FhmLabError):
    """A stage input does not match the checksum recorded upstream."""
