"""Privacy loss random variable pairs (X, Y) exposed through their CDFs."""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
from scipy import integrate

from prv_composer.errors import DomainError, ParameterError
from prv_composer.utils.search import expand_upper, invert_nonincreasing

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]
CdfFn = Callable[[FloatArray], FloatArray]
TruncatedMeanFn = Callable[[float, float], float]

# Node spacing scale used by conditional_mean when the caller has no mesh to match.
DEFAULT_QUADRATURE_MESH = 1e-3


@dataclass(frozen=True)
class MechanismPrv:
    """The PRV pair of a mechanism's privacy curve.

    ``cdf_y``/``cdf_x`` are distribution functions of the finite parts only: they
    tend to ``1 - mass_y_inf`` and ``1 - mass_x_neg_inf`` at +inf. Y never sits at
    -inf and X never at +inf. All callables accept and return float arrays.
    """

    cdf_y: CdfFn
    cdf_x: CdfFn
    mass_y_inf: float = 0.0
    mass_x_neg_inf: float = 0.0
    truncated_mean_y: TruncatedMeanFn | None = None
    truncated_mean_x: TruncatedMeanFn | None = None
    # Pr[. < t]; None when the variable has no atoms.
    cdf_y_left: CdfFn | None = None
    cdf_x_left: CdfFn | None = None
    # Pr[t < . < inf], for tails far below double precision of 1 - cdf.
    sf_y: CdfFn | None = None
    sf_x: CdfFn | None = None
    gaussian_mu: float | None = None
    name: str = "mechanism"

    def __post_init__(self) -> None:
        masses = (("mass_y_inf", self.mass_y_inf), ("mass_x_neg_inf", self.mass_x_neg_inf))
        for label, mass in masses:
            if not 0.0 <= mass < 1.0:
                raise ParameterError(f"{label} must lie in [0, 1), got {mass}")

    def y_below(self, t: FloatArray) -> FloatArray:
        """Pr[Y < t] over the finite part."""
        if self.cdf_y_left is None:
            return self.cdf_y(t)
        return self.cdf_y_left(t)

    def x_below(self, t: FloatArray) -> FloatArray:
        """Pr[X < t] over the finite part."""
        if self.cdf_x_left is None:
            return self.cdf_x(t)
        return self.cdf_x_left(t)

    def y_above(self, t: FloatArray) -> FloatArray:
        """Pr[t < Y < inf]."""
        if self.sf_y is None:
            return (1.0 - self.mass_y_inf) - self.cdf_y(t)
        return self.sf_y(t)

    def x_above(self, t: FloatArray) -> FloatArray:
        """Pr[t < X < inf]."""
        if self.sf_x is None:
            return (1.0 - self.mass_x_neg_inf) - self.cdf_x(t)
        return self.sf_x(t)


def evaluate(fn: CdfFn, t: float) -> float:
    """Evaluate a vectorized distribution function at a single point."""
    return float(np.asarray(fn(np.asarray([t], dtype=np.float64)))[0])


def _integrate_cdf(cdf: CdfFn, lower: float, upper: float, intervals: int, chunk: int) -> float:
    """Composite Simpson integral of ``cdf`` over [lower, upper].

    The grid is evaluated in pieces of at most ``chunk`` nodes so memory stays flat
    for fine meshes; each piece has an even number of intervals, which makes the sum
    of the pieces the composite rule on the whole grid.
    """
    spacing = (upper - lower) / intervals
    piece = max(2, (chunk - 1) // 2 * 2)
    total = 0.0
    start = 0
    while start < intervals:
        stop = min(start + piece, intervals)
        nodes = lower + spacing * np.arange(start, stop + 1, dtype=np.float64)
        values = np.asarray(cdf(nodes), dtype=np.float64)
        total += float(integrate.simpson(values, x=nodes))
        start = stop
    return total


def conditional_mean(
    prv: MechanismPrv,
    half_width: float,
    refine: int = 64,
    mesh: float | None = None,
    chunk: int = 1 << 20,
) -> float:
    """E[Y | -L < Y <= L] for L = ``half_width``.

    Uses the analytic truncated mean when the mechanism provides one. Otherwise
    integrates by parts, ``E[Y 1{-L<Y<=L}] = L F(L) + L F(-L) - int_{-L}^{L} F``, with
    ``refine`` quadrature intervals per output bin of width ``mesh``.
    """
    if half_width <= 0.0:
        raise ParameterError(f"half_width must be positive, got {half_width}")
    if refine < 1:
        raise ParameterError(f"refine must be a positive integer, got {refine}")

    upper_cdf = evaluate(prv.cdf_y, half_width)
    lower_cdf = evaluate(prv.cdf_y, -half_width)
    mass = upper_cdf - lower_cdf
    if mass <= 0.0:
        raise DomainError(f"Y has no mass in (-{half_width}, {half_width}]")

    if prv.truncated_mean_y is not None:
        return float(prv.truncated_mean_y(-half_width, half_width))

    step = DEFAULT_QUADRATURE_MESH if mesh is None else mesh
    bins = max(1, math.ceil(2.0 * half_width / step))
    intervals = 2 * math.ceil(refine * bins / 2)
    integral = _integrate_cdf(prv.cdf_y, -half_width, half_width, intervals, chunk)
    partial = half_width * upper_cdf + half_width * lower_cdf - integral
    logger.debug(
        f"quadrature mean for {prv.name}: L={half_width}, intervals={intervals}, mass={mass:.6g}"
    )
    return partial / mass


def mechanism_delta(prv: MechanismPrv, eps: float) -> float:
    """delta(eps) = Pr[Y > eps] - e^eps Pr[X > eps] of a single mechanism."""
    above_y = evaluate(prv.y_above, eps) + prv.mass_y_inf
    above_x = evaluate(prv.x_above, eps)
    delta = above_y - math.exp(eps) * above_x
    return min(1.0, max(0.0, delta))


def finite_part_delta(prv: MechanismPrv, eps: float) -> float:
    """Privacy curve of the pair conditioned on being finite."""
    above_y = evaluate(prv.y_above, eps) / (1.0 - prv.mass_y_inf)
    above_x = evaluate(prv.x_above, eps) / (1.0 - prv.mass_x_neg_inf)
    delta = above_y - math.exp(eps) * above_x
    return min(1.0, max(0.0, delta))


def mechanism_epsilon(
    prv: MechanismPrv,
    delta: float,
    finite_part: bool = True,
    tolerance: float = 1e-9,
    limit: float = 1e4,
) -> float:
    """Smallest eps >= 0 at which the mechanism's curve is at most ``delta``.

    With ``finite_part`` the curve of the pair conditioned on being finite is
    inverted, so mechanisms carrying mass at infinity still have a finite answer.
    The returned value is the upper end of the final bracket.
    """
    if not 0.0 < delta < 1.0:
        raise ParameterError(f"delta must lie in (0, 1), got {delta}")

    def curve(eps: float) -> float:
        if finite_part:
            return finite_part_delta(prv, eps)
        return mechanism_delta(prv, eps)

    if curve(0.0) <= delta:
        return 0.0
    upper = expand_upper(curve, delta, 1.0, limit)
    if upper is None:
        raise DomainError(f"{prv.name}: delta stays above {delta} for eps <= {limit}")
    bracket = invert_nonincreasing(curve, delta, 0.0, upper, tolerance=tolerance, max_iter=200)
    if bracket is None:
        raise DomainError(f"{prv.name}: cannot invert the privacy curve at delta={delta}")
    return bracket.upper
