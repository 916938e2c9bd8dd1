"""Privacy curve queries on a composed PRV, with error-budget sandwiches."""

import logging
import math
from collections.abc import Callable

import numpy as np
import numpy.typing as npt

from prv_composer.budget.params import ErrorBudget
from prv_composer.composition.convolve import ComposedPrv
from prv_composer.config import DELTA_FLOOR
from prv_composer.errors import ParameterError, PrecisionFloorError, QueryRangeError
from prv_composer.models import DeltaEstimate, EpsEstimate, LedgerReport
from prv_composer.utils.search import Bracket, invert_nonincreasing

logger = logging.getLogger(__name__)

_WINDOW_SLACK = 1e-12


def _fold(composed: ComposedPrv, delta: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    """Add back the mass at +inf: (1 - q) + q * delta."""
    return (1.0 - composed.q_finite) + composed.q_finite * delta


def _check_window(composed: ComposedPrv, eps: npt.NDArray[np.float64], budget: ErrorBudget) -> None:
    upper = composed.half_width - budget.eps_error
    if eps.size and (eps.min() < -_WINDOW_SLACK or eps.max() > upper + _WINDOW_SLACK):
        raise QueryRangeError(
            f"eps must lie in [0, {upper:.6g}] (half-width {composed.half_width:.6g} "
            f"minus eps_error {budget.eps_error:g})"
        )


def delta_curve(
    composed: ComposedPrv, eps_grid: npt.ArrayLike, budget: ErrorBudget
) -> list[DeltaEstimate]:
    """Delta bounds at every epsilon of the grid."""
    eps = np.atleast_1d(np.asarray(eps_grid, dtype=np.float64))
    _check_window(composed, eps, budget)

    estimate = _fold(composed, composed.lattice_delta(eps))
    upper = np.minimum(
        1.0, _fold(composed, composed.lattice_delta(eps - budget.eps_error) + budget.delta_error)
    )
    lower = np.maximum(
        0.0, _fold(composed, composed.lattice_delta(eps + budget.eps_error) - budget.delta_error)
    )
    estimate = np.clip(estimate, lower, upper)
    return [
        DeltaEstimate(lower=float(lo), estimate=float(est), upper=float(up))
        for lo, est, up in zip(lower, estimate, upper, strict=True)
    ]


def delta_at(composed: ComposedPrv, eps: float, budget: ErrorBudget) -> DeltaEstimate:
    """Delta bounds at a single epsilon."""
    return delta_curve(composed, [eps], budget)[0]


def epsilon_at(
    composed: ComposedPrv,
    delta_target: float,
    budget: ErrorBudget,
    tolerance: float = 1e-6,
    max_iter: int = 60,
    delta_floor: float = DELTA_FLOOR,
) -> EpsEstimate:
    """Epsilon bounds at ``delta_target`` by bisection of the delta bounds.

    The upper epsilon comes from the upper delta curve and the lower epsilon from the
    lower one. Fields are +inf when the corresponding curve does not reach the target
    inside [0, L - eps_error].
    """
    if not delta_target < 1.0:
        raise ParameterError(f"delta_target must be below 1, got {delta_target}")
    if delta_target < delta_floor:
        raise PrecisionFloorError(
            f"delta_target {delta_target:g} is below the supported floor {delta_floor:g}"
        )
    window = composed.half_width - budget.eps_error

    def solve(pick: Callable[[DeltaEstimate], float]) -> Bracket | None:
        return invert_nonincreasing(
            lambda e: pick(delta_at(composed, min(e, window), budget)),
            delta_target,
            0.0,
            window,
            tolerance=tolerance,
            max_iter=max_iter,
        )

    upper_bracket = solve(lambda d: d.upper)
    lower_bracket = solve(lambda d: d.lower)
    estimate_bracket = solve(lambda d: d.estimate)

    upper = math.inf if upper_bracket is None else upper_bracket.upper
    lower = math.inf if lower_bracket is None else lower_bracket.lower
    estimate = math.inf if estimate_bracket is None else estimate_bracket.midpoint
    if math.isinf(upper):
        logger.warning(
            f"delta_target {delta_target:g} is not reached by the upper bound within "
            f"eps <= {window:.6g}; reporting eps_upper=inf"
        )
    estimate = min(max(estimate, lower), upper)
    return EpsEstimate(lower=lower, estimate=estimate, upper=upper)


def edge_mass(composed: ComposedPrv, threshold: float) -> float:
    """Probability of lattice values with |y| >= threshold."""
    return float(composed.probs[np.abs(composed.values) >= threshold].sum())


def diagnose(composed: ComposedPrv, budget: ErrorBudget) -> LedgerReport:
    """Check the recorded error terms against the budget; violations are logged, not raised."""
    trunc_budget = budget.delta_error / 6.0
    wrap_budget = budget.delta_error
    wrap_mass = edge_mass(composed, composed.half_width - budget.eps_error)
    ledger = composed.ledger
    report = LedgerReport(
        compositions=ledger.compositions,
        trunc_mass=ledger.trunc_mass,
        trunc_budget=trunc_budget,
        trunc_ok=ledger.trunc_mass <= trunc_budget,
        wrap_mass=wrap_mass,
        wrap_budget=wrap_budget,
        wrap_ok=wrap_mass <= wrap_budget,
        clamped_mass=ledger.clamped_mass,
        hoeffding_eta=ledger.hoeffding_eta(composed.mesh, budget.eps_error),
    )
    if not report.trunc_ok:
        logger.warning(
            f"truncated mass {ledger.trunc_mass:.3e} exceeds delta_error/6 = {trunc_budget:.3e}"
        )
    if not report.wrap_ok:
        logger.warning(
            f"mass {wrap_mass:.3e} within eps_error of the wrap-around edge exceeds "
            f"delta_error = {wrap_budget:.3e}"
        )
    return report
