"""Mesh and truncation parameters derived from the error targets."""

import logging
import math

from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import fft

from prv_composer.config import DELTA_FLOOR
from prv_composer.discretization.discretize import lattice_index
from prv_composer.errors import ParameterError, PrecisionFloorError

logger = logging.getLogger(__name__)

# Float slack when rounding onto the lattice, in units of the mesh.
_ROUNDING_SLACK = 1e-9


def mesh_size(k: int, eps_error: float, delta_error: float) -> float:
    """h = eps_error / sqrt((k / 2) log(12 / delta_error))."""
    if k < 1:
        raise ParameterError(f"k must be a positive integer, got {k}")
    if not eps_error > 0.0:
        raise ParameterError(f"eps_error must be positive, got {eps_error}")
    if not 0.0 < delta_error < 12.0:
        raise ParameterError(f"delta_error must lie in (0, 12), got {delta_error}")
    return eps_error / math.sqrt(0.5 * k * math.log(12.0 / delta_error))


def round_half_width(length: float, mesh: float) -> float:
    """Smallest lattice-valid half-width mesh/2 + n*mesh (n >= 1) not below ``length``."""
    n = max(1, math.ceil((length - 0.5 * mesh) / mesh - _ROUNDING_SLACK))
    return (n + 0.5) * mesh


def truncation_bound(
    eps_upper_total: float,
    eps_upper_each: float,
    eps_error: float,
    mesh: float,
) -> float:
    """Lattice-valid L >= 2 + max(eps_error + eps_upper_total, eps_upper_each)."""
    for label, value in (("eps_upper_total", eps_upper_total), ("eps_upper_each", eps_upper_each)):
        if value < 0.0 or not math.isfinite(value):
            raise ParameterError(f"{label} must be finite and nonnegative, got {value}")
    if not eps_error > 0.0:
        raise ParameterError(f"eps_error must be positive, got {eps_error}")
    if not mesh > 0.0:
        raise ParameterError(f"mesh must be positive, got {mesh}")
    return round_half_width(2.0 + max(eps_error + eps_upper_total, eps_upper_each), mesh)


def fast_half_width(half_width: float, mesh: float) -> float:
    """Widen L on the lattice until the grid length 2n+1 is a fast FFT size."""
    length = 2 * lattice_index(mesh, half_width) + 1
    while fft.next_fast_len(length) != length:
        length += 2
    return (length // 2 + 0.5) * mesh


class ErrorBudget(BaseModel):
    """Error targets together with the mesh and half-width they imply."""

    model_config = ConfigDict(frozen=True)

    eps_error: float = Field(..., gt=0.0)
    delta_error: float = Field(..., ge=DELTA_FLOOR, lt=1.0)
    k: int = Field(..., ge=1)
    mesh: float = Field(..., gt=0.0)
    half_width: float = Field(..., gt=0.0)
    eps_upper_total: float = Field(default=0.0, ge=0.0)
    eps_upper_each: float = Field(default=0.0, ge=0.0)
    eps_upper_method: str = "advanced"

    @model_validator(mode="after")
    def _check_lattice(self) -> "ErrorBudget":
        lattice_index(self.mesh, self.half_width)
        if self.half_width < 2.0 + self.eps_error - _ROUNDING_SLACK:
            raise ValueError(
                f"half_width {self.half_width} must be at least "
                f"2 + eps_error = {2 + self.eps_error}"
            )
        return self

    @property
    def n(self) -> int:
        return lattice_index(self.mesh, self.half_width)

    @property
    def eps_window(self) -> float:
        """Largest epsilon the sandwich covers."""
        return self.half_width - self.eps_error

    @classmethod
    def create(
        cls,
        k: int,
        eps_error: float,
        delta_error: float,
        eps_upper_total: float,
        eps_upper_each: float,
        fast_transform_length: bool = True,
        eps_upper_method: str = "advanced",
        delta_floor: float = DELTA_FLOOR,
    ) -> "ErrorBudget":
        """Derive h and L for k compositions."""
        if delta_error < delta_floor:
            raise PrecisionFloorError(
                f"delta_error {delta_error:g} is below the supported floor {delta_floor:g}"
            )
        if delta_error >= 1.0:
            raise ParameterError(f"delta_error must be below 1, got {delta_error}")
        mesh = mesh_size(k, eps_error, delta_error)
        half_width = truncation_bound(eps_upper_total, eps_upper_each, eps_error, mesh)
        if fast_transform_length:
            half_width = fast_half_width(half_width, mesh)
        budget = cls(
            eps_error=eps_error,
            delta_error=delta_error,
            k=k,
            mesh=mesh,
            half_width=half_width,
            eps_upper_total=eps_upper_total,
            eps_upper_each=eps_upper_each,
            eps_upper_method=eps_upper_method,
        )
        logger.info(
            f"budget: k={k}, h={mesh:.6g}, L={half_width:.6g}, n={budget.n}, "
            f"eps_upper_total={eps_upper_total:.6g} ({eps_upper_method})"
        )
        return budget

    def with_mesh(self, mesh: float, fast_transform_length: bool = False) -> "ErrorBudget":
        """Same targets on another mesh, with L rounded up onto the new lattice."""
        half_width = round_half_width(self.half_width, mesh)
        if fast_transform_length:
            half_width = fast_half_width(half_width, mesh)
        return ErrorBudget(**{**self.model_dump(), "mesh": mesh, "half_width": half_width})

    def with_half_width(
        self, half_width: float, fast_transform_length: bool = False
    ) -> "ErrorBudget":
        """Same mesh with L rounded up onto the lattice."""
        widened = round_half_width(half_width, self.mesh)
        if fast_transform_length:
            widened = fast_half_width(widened, self.mesh)
        return ErrorBudget(**{**self.model_dump(), "half_width": widened})
