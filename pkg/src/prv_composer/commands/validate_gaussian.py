"""validate-gaussian command handler."""

import logging
import math

import numpy as np

from prv_composer import __version__
from prv_composer.accountant import PrvAccountant
from prv_composer.budget.bounds import analytic_gaussian_delta
from prv_composer.commands.report import budget_summary
from prv_composer.mechanisms.standard import gaussian_prv
from prv_composer.models import GaussianCheck, GaussianValidation


def handle_validate_gaussian(
    sigma: float,
    steps: int,
    eps_error: float,
    accountant: PrvAccountant,
    logger: logging.Logger,
    delta_error: float = 1e-10,
    num_points: int = 21,
) -> GaussianValidation:
    """Compare the composed bounds with the closed-form curve of the composed Gaussian."""
    accounting = accountant.compose([(gaussian_prv(sigma), steps)], eps_error, delta_error)
    mu = math.sqrt(steps) / sigma
    window = min(3.0, accounting.budget.eps_window)
    grid = np.linspace(0.0, window, num_points)

    checks = []
    for eps, estimate in zip(grid, accountant.delta_curve(accounting, grid), strict=True):
        exact = analytic_gaussian_delta(mu, float(eps))
        passed = estimate.lower <= exact <= estimate.upper
        if not passed:
            logger.warning(
                f"closed-form delta {exact:.6e} at eps={eps:.6g} is outside "
                f"[{estimate.lower:.6e}, {estimate.upper:.6e}]"
            )
        checks.append(
            GaussianCheck(
                eps=float(eps),
                lower=estimate.lower,
                exact=exact,
                upper=estimate.upper,
                passed=passed,
            )
        )
    return GaussianValidation(
        version=__version__,
        mu=mu,
        budget=budget_summary(accounting.budget),
        checks=checks,
    )
