"""Closed-form privacy bounds: composition theorems, PRV tails and the Gaussian curve."""

import math
from collections.abc import Sequence

from scipy import special

from prv_composer.errors import DomainError, ParameterError
from prv_composer.utils.search import expand_upper, invert_nonincreasing


def advanced_composition_eps(eps: float, k: int, delta_prime: float) -> float:
    """eps * sqrt(2 k log(1/delta')) + k eps (e^eps - 1)."""
    if eps < 0.0 or not math.isfinite(eps):
        raise ParameterError(f"eps must be finite and nonnegative, got {eps}")
    if k < 1:
        raise ParameterError(f"k must be a positive integer, got {k}")
    if not 0.0 < delta_prime < 1.0:
        raise ParameterError(f"delta_prime must lie in (0, 1), got {delta_prime}")
    return eps * math.sqrt(2.0 * k * math.log(1.0 / delta_prime)) + k * eps * math.expm1(eps)


def basic_composition_eps(eps_list: Sequence[float], counts: Sequence[int]) -> float:
    if len(eps_list) != len(counts):
        raise ParameterError("eps_list and counts must have the same length")
    return math.fsum(count * eps for eps, count in zip(eps_list, counts, strict=True))


def prv_tail_bound(eps: float, delta: float, t: float) -> float:
    """Upper bound on Pr[|Y| >= eps + t] for a PRV whose curve has delta(eps) = delta."""
    if not t > 0.0:
        raise ParameterError(f"t must be positive, got {t}")
    if eps < 0.0:
        raise ParameterError(f"eps must be nonnegative, got {eps}")
    if not 0.0 <= delta <= 1.0:
        raise ParameterError(f"delta must lie in [0, 1], got {delta}")
    bound = delta * (1.0 + math.exp(-eps - t)) / -math.expm1(-t)
    return min(1.0, bound)


def analytic_gaussian_delta(mu: float, eps: float) -> float:
    """Exact privacy curve of the Gaussian PRV pair with parameter mu."""
    if not mu > 0.0:
        raise ParameterError(f"mu must be positive, got {mu}")
    first = float(special.ndtr(-eps / mu + mu / 2.0))
    second = math.exp(eps + float(special.log_ndtr(-eps / mu - mu / 2.0)))
    return min(1.0, max(0.0, first - second))


def gaussian_epsilon(mu: float, delta: float, tolerance: float = 1e-12) -> float:
    """Smallest eps >= 0 with analytic_gaussian_delta(mu, eps) <= delta."""
    if not 0.0 < delta < 1.0:
        raise ParameterError(f"delta must lie in (0, 1), got {delta}")

    def curve(eps: float) -> float:
        return analytic_gaussian_delta(mu, eps)

    upper = expand_upper(curve, delta, 1.0, 1e6)
    if upper is None:
        raise DomainError(f"Gaussian curve with mu={mu} stays above {delta}")
    bracket = invert_nonincreasing(curve, delta, 0.0, upper, tolerance=tolerance, max_iter=200)
    if bracket is None:
        raise DomainError(f"cannot invert the Gaussian curve with mu={mu} at {delta}")
    return bracket.upper


def composed_gaussian_mu(mus: Sequence[float], counts: Sequence[int]) -> float:
    """Gaussian PRVs compose to a Gaussian PRV with mu = sqrt(sum count * mu_i^2)."""
    if len(mus) != len(counts):
        raise ParameterError("mus and counts must have the same length")
    return math.sqrt(math.fsum(count * mu * mu for mu, count in zip(mus, counts, strict=True)))
