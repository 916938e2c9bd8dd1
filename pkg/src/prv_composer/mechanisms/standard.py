"""PRV pairs of the standard mechanisms."""

import math
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt
from scipy import special

from prv_composer.errors import DomainError, ParameterError
from prv_composer.mechanisms.prv import FloatArray, MechanismPrv

_SQRT_2PI = math.sqrt(2.0 * math.pi)
# Normalization slack accepted on user-supplied atom tables.
_NORMALIZATION_TOLERANCE = 1e-9


def _normal_pdf(z: float) -> float:
    return math.exp(-0.5 * z * z) / _SQRT_2PI


def _normal_truncated_mean(center: float, scale: float, lower: float, upper: float) -> float:
    """Mean of N(center, scale^2) conditioned on (lower, upper]."""
    alpha = (lower - center) / scale
    beta = (upper - center) / scale
    if alpha > 0.0:
        # Both ends in the right tail: use survival functions.
        mass = float(special.ndtr(-alpha) - special.ndtr(-beta))
    else:
        mass = float(special.ndtr(beta) - special.ndtr(alpha))
    if mass <= 0.0:
        raise DomainError(f"no normal mass in ({lower}, {upper}]")
    return center + scale * (_normal_pdf(alpha) - _normal_pdf(beta)) / mass


def gaussian_prv(noise_scale: float, sensitivity: float = 1.0) -> MechanismPrv:
    """Gaussian mechanism: Y ~ N(mu^2/2, mu^2) and X ~ N(-mu^2/2, mu^2), mu = s / sigma."""
    if noise_scale <= 0.0 or not math.isfinite(noise_scale):
        raise ParameterError(f"noise_scale must be positive, got {noise_scale}")
    if sensitivity < 0.0 or not math.isfinite(sensitivity):
        raise ParameterError(f"sensitivity must be nonnegative, got {sensitivity}")

    name = f"gaussian(sigma={noise_scale:g}, s={sensitivity:g})"
    if sensitivity == 0.0:
        return discrete_prv([0.0], [1.0], name=name)

    mu = sensitivity / noise_scale
    half = 0.5 * mu * mu

    def cdf_y(t: FloatArray) -> FloatArray:
        return special.ndtr((np.asarray(t) - half) / mu)

    def sf_y(t: FloatArray) -> FloatArray:
        return special.ndtr((half - np.asarray(t)) / mu)

    def cdf_x(t: FloatArray) -> FloatArray:
        return special.ndtr((np.asarray(t) + half) / mu)

    def sf_x(t: FloatArray) -> FloatArray:
        return special.ndtr((-half - np.asarray(t)) / mu)

    return MechanismPrv(
        cdf_y=cdf_y,
        cdf_x=cdf_x,
        truncated_mean_y=lambda a, b: _normal_truncated_mean(half, mu, a, b),
        truncated_mean_x=lambda a, b: _normal_truncated_mean(-half, mu, a, b),
        sf_y=sf_y,
        sf_x=sf_x,
        gaussian_mu=mu,
        name=name,
    )


def laplace_prv(shift: float) -> MechanismPrv:
    """Laplace mechanism with PRVs Y = |Z - mu| - |Z| and X = -Y, Z ~ Lap(0, 1).

    Y has atoms e^{-mu}/2 at -mu and 1/2 at +mu and density e^{(t-mu)/2}/4 between.
    """
    if shift <= 0.0 or not math.isfinite(shift):
        raise ParameterError(f"shift must be positive, got {shift}")
    mu = shift

    def ramp(t: FloatArray) -> FloatArray:
        return 0.5 * np.exp(0.5 * (np.minimum(np.asarray(t, dtype=np.float64), mu) - mu))

    def cdf_y(t: FloatArray) -> FloatArray:
        t = np.asarray(t, dtype=np.float64)
        return np.where(t < -mu, 0.0, np.where(t >= mu, 1.0, ramp(t)))

    def cdf_y_left(t: FloatArray) -> FloatArray:
        t = np.asarray(t, dtype=np.float64)
        return np.where(t <= -mu, 0.0, np.where(t > mu, 1.0, ramp(t)))

    def cdf_x(t: FloatArray) -> FloatArray:
        return 1.0 - cdf_y_left(-np.asarray(t, dtype=np.float64))

    def cdf_x_left(t: FloatArray) -> FloatArray:
        return 1.0 - cdf_y(-np.asarray(t, dtype=np.float64))

    def sf_x(t: FloatArray) -> FloatArray:
        return cdf_y_left(-np.asarray(t, dtype=np.float64))

    def partial_mean(lower: float, upper: float) -> tuple[float, float]:
        """Mass and first moment of Y on (lower, upper]."""
        mass = 0.0
        moment = 0.0
        if lower < -mu <= upper:
            atom = 0.5 * math.exp(-mu)
            mass += atom
            moment -= mu * atom
        if lower < mu <= upper:
            mass += 0.5
            moment += 0.5 * mu
        a = max(lower, -mu)
        b = min(upper, mu)
        if a < b:
            mass += 0.5 * (math.exp(0.5 * (b - mu)) - math.exp(0.5 * (a - mu)))
            moment += 0.5 * (
                math.exp(0.5 * (b - mu)) * (b - 2.0) - math.exp(0.5 * (a - mu)) * (a - 2.0)
            )
        return mass, moment

    def truncated_mean_y(lower: float, upper: float) -> float:
        mass, moment = partial_mean(lower, upper)
        if mass <= 0.0:
            raise DomainError(f"no Laplace PRV mass in ({lower}, {upper}]")
        return moment / mass

    def truncated_mean_x(lower: float, upper: float) -> float:
        # X = -Y, so (lower, upper] maps to [-upper, -lower) of Y.
        mass, moment = partial_mean(-upper, -lower)
        for atom_at, atom in ((-mu, 0.5 * math.exp(-mu)), (mu, 0.5)):
            if atom_at == -upper:
                mass += atom
                moment += atom_at * atom
            if atom_at == -lower:
                mass -= atom
                moment -= atom_at * atom
        if mass <= 0.0:
            raise DomainError(f"no Laplace PRV mass in ({lower}, {upper}]")
        return -moment / mass

    return MechanismPrv(
        cdf_y=cdf_y,
        cdf_x=cdf_x,
        truncated_mean_y=truncated_mean_y,
        truncated_mean_x=truncated_mean_x,
        cdf_y_left=cdf_y_left,
        cdf_x_left=cdf_x_left,
        sf_x=sf_x,
        name=f"laplace(shift={shift:g})",
    )


@dataclass(frozen=True)
class _AtomTable:
    """Sorted atoms with cumulative and suffix sums for O(log n) CDF lookups."""

    values: FloatArray
    probs: FloatArray
    cumulative: FloatArray = field(init=False)
    tail: FloatArray = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "cumulative", np.concatenate(([0.0], np.cumsum(self.probs))))
        suffix = np.cumsum(self.probs[::-1])[::-1]
        object.__setattr__(self, "tail", np.concatenate((suffix, [0.0])))

    def cdf(self, t: FloatArray) -> FloatArray:
        return self.cumulative[np.searchsorted(self.values, t, side="right")]

    def cdf_left(self, t: FloatArray) -> FloatArray:
        return self.cumulative[np.searchsorted(self.values, t, side="left")]

    def sf(self, t: FloatArray) -> FloatArray:
        return self.tail[np.searchsorted(self.values, t, side="right")]

    def truncated_mean(self, lower: float, upper: float) -> float:
        inside = (self.values > lower) & (self.values <= upper)
        mass = float(self.probs[inside].sum())
        if mass <= 0.0:
            raise DomainError(f"no atoms in ({lower}, {upper}]")
        return float(np.dot(self.probs[inside], self.values[inside])) / mass


def discrete_prv(
    values: npt.ArrayLike,
    probs: npt.ArrayLike,
    mass_inf: float = 0.0,
    name: str = "discrete",
) -> MechanismPrv:
    """PRV pair whose finite Y part is the given atoms.

    X puts mass ``p * e^{-v}`` on every atom ``v`` of Y and the remainder at -inf.
    """
    v = np.asarray(values, dtype=np.float64).ravel()
    p = np.asarray(probs, dtype=np.float64).ravel()
    if v.shape != p.shape or v.size == 0:
        raise ParameterError("values and probs must be non-empty and of equal length")
    if not np.all(np.isfinite(v)):
        raise ParameterError("atom values must be finite")
    if np.any(p < 0.0) or not np.all(np.isfinite(p)):
        raise ParameterError("atom probabilities must be finite and nonnegative")
    if not 0.0 <= mass_inf < 1.0:
        raise ParameterError(f"mass_inf must lie in [0, 1), got {mass_inf}")
    total = float(p.sum()) + mass_inf
    if abs(total - 1.0) > _NORMALIZATION_TOLERANCE:
        raise ParameterError(f"probabilities and mass_inf must sum to 1, got {total}")

    support, inverse = np.unique(v, return_inverse=True)
    merged = np.bincount(inverse, weights=p, minlength=support.size)
    keep = merged > 0.0
    support, merged = support[keep], merged[keep]

    with np.errstate(over="ignore"):
        x_probs = merged * np.exp(-support)
    mass_x = 1.0 - float(x_probs.sum())
    if not mass_x >= -_NORMALIZATION_TOLERANCE:
        raise DomainError(f"{name}: implied X mass exceeds 1, atoms are not a privacy loss")
    # Rounding residue of a fully normalized X is not mass at -inf.
    mass_x = 0.0 if mass_x <= _NORMALIZATION_TOLERANCE else mass_x

    y_atoms = _AtomTable(support, merged)
    # X atoms sit on the same support; their order is unchanged.
    x_atoms = _AtomTable(support, x_probs)
    return MechanismPrv(
        cdf_y=y_atoms.cdf,
        cdf_x=x_atoms.cdf,
        mass_y_inf=mass_inf,
        mass_x_neg_inf=mass_x,
        truncated_mean_y=y_atoms.truncated_mean,
        truncated_mean_x=x_atoms.truncated_mean,
        cdf_y_left=y_atoms.cdf_left,
        cdf_x_left=x_atoms.cdf_left,
        sf_y=y_atoms.sf,
        sf_x=x_atoms.sf,
        name=name,
    )


def approx_dp_prv(eps: float, delta: float) -> MechanismPrv:
    """PRV pair of an (eps, delta)-DP mechanism.

    Y is -eps with probability (1 - delta) / (e^eps + 1), +eps with probability
    (1 - delta) e^eps / (e^eps + 1) and +inf with probability delta.
    """
    if eps < 0.0 or not math.isfinite(eps):
        raise ParameterError(f"eps must be nonnegative, got {eps}")
    if not 0.0 <= delta < 1.0:
        raise ParameterError(f"delta must lie in [0, 1), got {delta}")
    finite = 1.0 - delta
    return discrete_prv(
        [-eps, eps],
        [finite * float(special.expit(-eps)), finite * float(special.expit(eps))],
        mass_inf=delta,
        name=f"approx_dp(eps={eps:g}, delta={delta:g})",
    )
