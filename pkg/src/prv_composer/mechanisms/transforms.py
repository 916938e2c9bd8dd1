"""Subsampling and direction inversion of PRV pairs."""

import logging
import math
from dataclasses import dataclass

import numpy as np

from prv_composer.errors import ParameterError, UnsupportedMechanismError
from prv_composer.mechanisms.prv import CdfFn, FloatArray, MechanismPrv, TruncatedMeanFn

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SubsampleParams:
    """Poisson sampling probability of a subsampled mechanism."""

    p: float

    def __post_init__(self) -> None:
        if not 0.0 < self.p <= 1.0:
            raise ParameterError(f"sampling probability must lie in (0, 1], got {self.p}")


def subsample_prv(inner: MechanismPrv, params: SubsampleParams) -> MechanismPrv:
    """PRV pair of the curve delta(P || p P + (1 - p) Q) given the inner pair of (P, Q).

    With g(t) = log((e^t - (1 - p)) / p), X_p has CDF cdf_X(g(t)) and Y_p has CDF
    p cdf_Y(g(t)) + (1 - p) cdf_X(g(t)); both vanish below log(1 - p).
    """
    if inner.mass_y_inf > 0.0 or inner.mass_x_neg_inf > 0.0:
        raise UnsupportedMechanismError(
            f"cannot subsample {inner.name}: PRVs with mass at infinity are not supported"
        )
    p = params.p
    if p == 1.0:
        return inner

    threshold = math.log1p(-p)

    def g(t: FloatArray) -> FloatArray:
        t = np.asarray(t, dtype=np.float64)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            mapped = np.log1p(np.expm1(t) / p)
        return np.where(t > threshold, mapped, -np.inf)

    def cdf_y(t: FloatArray) -> FloatArray:
        s = g(t)
        return p * inner.cdf_y(s) + (1.0 - p) * inner.cdf_x(s)

    def cdf_x(t: FloatArray) -> FloatArray:
        return inner.cdf_x(g(t))

    def sf_y(t: FloatArray) -> FloatArray:
        s = g(t)
        return p * inner.y_above(s) + (1.0 - p) * inner.x_above(s)

    def sf_x(t: FloatArray) -> FloatArray:
        return inner.x_above(g(t))

    def y_below(t: FloatArray) -> FloatArray:
        s = g(t)
        return p * inner.y_below(s) + (1.0 - p) * inner.x_below(s)

    def x_below(t: FloatArray) -> FloatArray:
        return inner.x_below(g(t))

    has_atoms = inner.cdf_y_left is not None or inner.cdf_x_left is not None
    logger.debug(f"subsampling {inner.name} with p={p}, support starts at {threshold:.6g}")
    return MechanismPrv(
        cdf_y=cdf_y,
        cdf_x=cdf_x,
        cdf_y_left=y_below if has_atoms else None,
        cdf_x_left=x_below if has_atoms else None,
        sf_y=sf_y,
        sf_x=sf_x,
        name=f"subsampled({inner.name}, p={p:g})",
    )


def _reflected_mean(mean: TruncatedMeanFn | None, atomless: bool) -> TruncatedMeanFn | None:
    # E[-V | a < -V <= b] = -E[V | -b <= V < -a]; equal to the half-open form only without atoms.
    if mean is None or not atomless:
        return None
    source: TruncatedMeanFn = mean
    return lambda a, b: -source(-b, -a)


def invert_direction(prv: MechanismPrv) -> MechanismPrv:
    """PRV pair of the reversed curve: new Y = -X and new X = -Y."""
    x_atomless = prv.cdf_x_left is None
    y_atomless = prv.cdf_y_left is None

    def cdf_y(t: FloatArray) -> FloatArray:
        s = -np.asarray(t, dtype=np.float64)
        if x_atomless:
            return prv.x_above(s)
        return prv.x_above(s) + (prv.cdf_x(s) - prv.x_below(s))

    def cdf_x(t: FloatArray) -> FloatArray:
        s = -np.asarray(t, dtype=np.float64)
        if y_atomless:
            return prv.y_above(s)
        return prv.y_above(s) + (prv.cdf_y(s) - prv.y_below(s))

    def sf_y(t: FloatArray) -> FloatArray:
        return prv.x_below(-np.asarray(t, dtype=np.float64))

    def sf_x(t: FloatArray) -> FloatArray:
        return prv.y_below(-np.asarray(t, dtype=np.float64))

    def y_below(t: FloatArray) -> FloatArray:
        return prv.x_above(-np.asarray(t, dtype=np.float64))

    def x_below(t: FloatArray) -> FloatArray:
        return prv.y_above(-np.asarray(t, dtype=np.float64))

    cdf_y_left: CdfFn | None = None if x_atomless else y_below
    cdf_x_left: CdfFn | None = None if y_atomless else x_below
    return MechanismPrv(
        cdf_y=cdf_y,
        cdf_x=cdf_x,
        mass_y_inf=prv.mass_x_neg_inf,
        mass_x_neg_inf=prv.mass_y_inf,
        truncated_mean_y=_reflected_mean(prv.truncated_mean_x, x_atomless),
        truncated_mean_x=_reflected_mean(prv.truncated_mean_y, y_atomless),
        cdf_y_left=cdf_y_left,
        cdf_x_left=cdf_x_left,
        sf_y=sf_y,
        sf_x=sf_x,
        gaussian_mu=prv.gaussian_mu,
        name=f"inverted({prv.name})",
    )
