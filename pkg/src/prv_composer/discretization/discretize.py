"""Lattice discretization of a PRV with mean matching."""

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from prv_composer.errors import DomainError, NumericalGuardError, ParameterError
from prv_composer.mechanisms.prv import (
    FloatArray,
    MechanismPrv,
    conditional_mean,
    evaluate,
)
from prv_composer.mechanisms.standard import discrete_prv

logger = logging.getLogger(__name__)

LATTICE_TOLERANCE = 1e-9
SHIFT_TOLERANCE = 1e-9


def lattice_index(mesh: float, half_width: float) -> int:
    """n such that ``half_width = mesh / 2 + n * mesh``; raises on an invalid pair."""
    if not mesh > 0.0:
        raise ParameterError(f"mesh must be positive, got {mesh}")
    if not half_width > 0.0:
        raise ParameterError(f"half_width must be positive, got {half_width}")
    ratio = (half_width - 0.5 * mesh) / mesh
    n = int(round(ratio))
    if n < 1 or abs(ratio - n) > LATTICE_TOLERANCE * max(1.0, float(n)):
        raise ParameterError(
            f"half_width {half_width} is not of the form mesh/2 + n*mesh (n >= 1) for mesh {mesh}"
        )
    return n


@dataclass(frozen=True, eq=False)
class DiscretePrv:
    """A PRV supported on ``shift + mesh * {-n, ..., n}``."""

    mesh: float
    half_width: float
    shift: float
    probs: FloatArray
    mass_inf: float = 0.0
    trunc_mass: float = 0.0
    name: str = "discrete"

    def __post_init__(self) -> None:
        n = lattice_index(self.mesh, self.half_width)
        if self.probs.ndim != 1 or self.probs.size != 2 * n + 1:
            raise ParameterError(
                f"expected {2 * n + 1} probabilities, got shape {self.probs.shape}"
            )

    @property
    def n(self) -> int:
        return (self.probs.size - 1) // 2

    @cached_property
    def values(self) -> FloatArray:
        return np.arange(-self.n, self.n + 1, dtype=np.float64) * self.mesh + self.shift

    def mean(self) -> float:
        return float(np.dot(self.values, self.probs))

    def as_mechanism(self) -> MechanismPrv:
        """The atoms as a mechanism PRV; raises DomainError if they are not a privacy loss."""
        finite = 1.0 - self.mass_inf
        return discrete_prv(
            self.values, self.probs * finite, mass_inf=self.mass_inf, name=self.name
        )


def discretize(
    prv: MechanismPrv,
    mesh: float,
    half_width: float,
    refine: int = 64,
    chunk: int = 1 << 20,
) -> DiscretePrv:
    """Bin Y onto the lattice ``mesh * Z`` within [-L, L] and match its truncated mean.

    Bins are the half-open intervals (i h - h/2, i h + h/2]. The returned shift moves
    every atom so that the lattice mean equals E[Y | -L < Y <= L].
    """
    n = lattice_index(mesh, half_width)
    edges = (np.arange(-n, n + 2, dtype=np.float64) - 0.5) * mesh
    cdf = np.asarray(prv.cdf_y(edges), dtype=np.float64)
    weights = np.clip(np.diff(cdf), 0.0, None)
    in_window = float(weights.sum())
    if in_window <= 0.0:
        raise DomainError(f"{prv.name} has no mass in (-{half_width}, {half_width}]")

    probs = weights / in_window
    trunc_mass = evaluate(prv.cdf_y, -half_width) + evaluate(prv.y_above, half_width)

    target = conditional_mean(prv, half_width, refine=refine, mesh=mesh, chunk=chunk)
    lattice_mean = mesh * float(np.dot(np.arange(-n, n + 1, dtype=np.float64), probs))
    shift = target - lattice_mean
    limit = 0.5 * mesh
    if abs(shift) > limit + SHIFT_TOLERANCE:
        raise NumericalGuardError(
            f"{prv.name}: mean-matching shift {shift:.3e} exceeds half the mesh {limit:.3e}"
        )
    shift = min(limit, max(-limit, shift))

    logger.debug(
        f"discretized {prv.name}: n={n}, window mass={in_window:.12g}, "
        f"trunc_mass={trunc_mass:.3e}, shift={shift:.3e}"
    )
    return DiscretePrv(
        mesh=mesh,
        half_width=half_width,
        shift=shift,
        probs=probs,
        mass_inf=prv.mass_y_inf,
        trunc_mass=max(0.0, trunc_mass),
        name=prv.name,
    )
