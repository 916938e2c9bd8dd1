"""compose command handler."""

import logging
from typing import Literal

import numpy as np

from prv_composer import __version__
from prv_composer.accountant import Accounting, PrvAccountant
from prv_composer.commands.report import budget_summary, mechanism_summaries
from prv_composer.models import (
    ComposeConfig,
    CurvePoint,
    CurveQuery,
    CurveSpec,
    DeltaQuery,
    Report,
)


def run_accounting(config: ComposeConfig, accountant: PrvAccountant) -> Accounting:
    """Validate the job against the precision policy, then plan and compose."""
    accountant.policy.check_compose(config)
    mechanisms = [(accountant.build_mechanism(entry), entry.count) for entry in config.mechanisms]
    return accountant.compose(
        mechanisms,
        eps_error=config.eps_error,
        delta_error=config.resolved_delta_error(),
        eps_upper_override=config.eps_upper_override,
    )


def curve_points(
    spec: CurveSpec, accountant: PrvAccountant, accounting: Accounting
) -> list[CurvePoint]:
    """Delta bounds on an evenly spaced epsilon grid."""
    grid = np.linspace(spec.eps_min, spec.eps_max, spec.num_points)
    return [
        CurvePoint(
            eps=float(eps),
            delta_lower=estimate.lower,
            delta_est=estimate.estimate,
            delta_upper=estimate.upper,
        )
        for eps, estimate in zip(grid, accountant.delta_curve(accounting, grid), strict=True)
    ]


def handle_compose(
    config: ComposeConfig,
    accountant: PrvAccountant,
    logger: logging.Logger,
    command: Literal["compose", "dpsgd"] = "compose",
) -> Report:
    """Handle the compose command: build, compose and answer the configured query."""
    logger.info(f"{command}: {len(config.mechanisms)} mechanism kinds, k={config.total_count}")
    accounting = run_accounting(config, accountant)

    report = Report(
        version=__version__,
        command=command,
        budget=budget_summary(accounting.budget),
        mechanisms=mechanism_summaries(accounting),
        q_finite=accounting.composed.q_finite,
        ledger=accounting.ledger,
    )
    query = config.query
    if isinstance(query, DeltaQuery):
        report.delta_target = query.delta_target
        report.eps = accountant.epsilon(accounting, query.delta_target)
    elif isinstance(query, CurveQuery):
        report.curve = curve_points(query.curve, accountant, accounting)
    else:
        report.eps_target = query.eps_target
        report.delta = accountant.delta(accounting, query.eps_target)
    return report
