"""Accountant: budget planning, discretization, composition and queries."""

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy.typing as npt

from prv_composer.budget.bounds import (
    advanced_composition_eps,
    basic_composition_eps,
    composed_gaussian_mu,
    gaussian_epsilon,
)
from prv_composer.budget.params import ErrorBudget, mesh_size, truncation_bound
from prv_composer.composition.convolve import ComposedPrv, compose
from prv_composer.composition.query import delta_at, delta_curve, diagnose, edge_mass, epsilon_at
from prv_composer.config import Config
from prv_composer.discretization.discretize import DiscretePrv, discretize
from prv_composer.errors import NumericalGuardError, ParameterError
from prv_composer.mechanisms.prv import MechanismPrv, mechanism_epsilon
from prv_composer.mechanisms.standard import approx_dp_prv, gaussian_prv, laplace_prv
from prv_composer.mechanisms.transforms import SubsampleParams, invert_direction, subsample_prv
from prv_composer.models import (
    ApproxDpEntry,
    DeltaEstimate,
    EpsEstimate,
    GaussianEntry,
    LaplaceEntry,
    LedgerReport,
    MechanismEntry,
)
from prv_composer.validation.policy import PrecisionPolicy

Weighted = Sequence[tuple[MechanismPrv, int]]


@dataclass(frozen=True)
class Accounting:
    """A composed PRV with the budget and discretizations it was built from."""

    budget: ErrorBudget
    composed: ComposedPrv
    discretized: list[DiscretePrv]
    counts: list[int]
    ledger: LedgerReport


class PrvAccountant:
    """Composes mechanisms under an (eps_error, delta_error) budget."""

    def __init__(self, config: Config | None = None, logger: logging.Logger | None = None):
        self.config = config or Config()
        self.logger = logger or logging.getLogger(__name__)
        self.policy = PrecisionPolicy(self.config.numerics, self.logger)

    def build_mechanism(self, entry: MechanismEntry) -> MechanismPrv:
        """PRV pair of one configured mechanism."""
        if isinstance(entry, GaussianEntry):
            return gaussian_prv(entry.params.noise_scale, entry.params.sensitivity)
        if isinstance(entry, LaplaceEntry):
            return laplace_prv(entry.params.sensitivity / entry.params.scale)
        if isinstance(entry, ApproxDpEntry):
            return approx_dp_prv(entry.params.eps, entry.params.delta)
        params = entry.params
        prv = subsample_prv(
            gaussian_prv(params.noise_scale, params.sensitivity),
            SubsampleParams(params.sampling_prob),
        )
        return invert_direction(prv) if params.inverted else prv

    def plan(
        self,
        mechanisms: Weighted,
        eps_error: float,
        delta_error: float,
        eps_upper_override: float | None = None,
    ) -> ErrorBudget:
        """Derive (h, L) from the targets and an upper bound on the composed epsilon.

        The returned budget's ``eps_upper_method`` is "adaptive" when L should be
        found by recomposition instead of the static bound.
        """
        self.policy.check_delta(delta_error, "delta_error")
        counts = [count for _, count in mechanisms]
        if not counts or min(counts) < 1:
            raise ParameterError("at least one mechanism with a positive count is required")
        k = sum(counts)
        numerics = self.config.numerics
        method = self.config.budget.eps_upper_method

        each = [mechanism_epsilon(prv, delta_error / (8 * k)) for prv, _ in mechanisms]
        eps_upper_each = max(each)

        mus = [prv.gaussian_mu for prv, _ in mechanisms]
        closed_form = all(mu is not None for mu in mus)

        if eps_upper_override is not None:
            eps_upper_total = eps_upper_override
            method_used = "override"
        elif method == "adaptive":
            return self._adaptive_start(k, eps_error, delta_error, eps_upper_each)
        else:
            candidates = {
                "advanced": advanced_composition_eps(eps_upper_each, k, delta_error / 8),
                "basic": basic_composition_eps(each, counts),
            }
            if closed_form:
                mu = composed_gaussian_mu([m for m in mus if m is not None], counts)
                candidates["gaussian"] = gaussian_epsilon(mu, delta_error / 4)
            method_used = min(candidates, key=lambda name: candidates[name])
            eps_upper_total = candidates[method_used]
            self.logger.info(
                "eps upper candidates: "
                + ", ".join(f"{name}={value:.6g}" for name, value in candidates.items())
            )

            mesh = mesh_size(k, eps_error, delta_error)
            static_width = truncation_bound(eps_upper_total, eps_upper_each, eps_error, mesh)
            if (
                method == "auto"
                and not closed_form
                and static_width > self.config.budget.max_static_half_width
            ):
                self.logger.info(
                    f"static half-width {static_width:.6g} exceeds "
                    f"{self.config.budget.max_static_half_width:g}; switching to adaptive"
                )
                return self._adaptive_start(k, eps_error, delta_error, eps_upper_each)

        return ErrorBudget.create(
            k=k,
            eps_error=eps_error,
            delta_error=delta_error,
            eps_upper_total=eps_upper_total,
            eps_upper_each=eps_upper_each,
            fast_transform_length=numerics.fast_transform_length,
            eps_upper_method=method_used,
            delta_floor=numerics.delta_floor,
        )

    def _adaptive_start(
        self, k: int, eps_error: float, delta_error: float, eps_upper_each: float
    ) -> ErrorBudget:
        return ErrorBudget.create(
            k=k,
            eps_error=eps_error,
            delta_error=delta_error,
            eps_upper_total=eps_upper_each,
            eps_upper_each=eps_upper_each,
            fast_transform_length=self.config.numerics.fast_transform_length,
            eps_upper_method="adaptive",
            delta_floor=self.config.numerics.delta_floor,
        )

    def compose_with_budget(self, mechanisms: Weighted, budget: ErrorBudget) -> Accounting:
        """Discretize every mechanism on the budget's lattice and compose once."""
        numerics = self.config.numerics
        discretized = [
            discretize(
                prv,
                budget.mesh,
                budget.half_width,
                refine=numerics.quadrature_refine,
                chunk=numerics.quadrature_chunk,
            )
            for prv, _ in mechanisms
        ]
        counts = [count for _, count in mechanisms]
        composed = compose(
            list(zip(discretized, counts, strict=True)),
            clamp_threshold=numerics.clamp_threshold,
        )
        return Accounting(
            budget=budget,
            composed=composed,
            discretized=discretized,
            counts=counts,
            ledger=diagnose(composed, budget),
        )

    def compose(
        self,
        mechanisms: Weighted,
        eps_error: float,
        delta_error: float,
        eps_upper_override: float | None = None,
    ) -> Accounting:
        """Plan the budget and compose; grows L when the adaptive rule is in effect."""
        budget = self.plan(mechanisms, eps_error, delta_error, eps_upper_override)
        if budget.eps_upper_method != "adaptive":
            return self.compose_with_budget(mechanisms, budget)

        settings = self.config.budget
        fast = self.config.numerics.fast_transform_length
        for round_index in range(settings.adaptive_max_rounds):
            accounting = self.compose_with_budget(mechanisms, budget)
            margin = budget.half_width - 2.0 - budget.eps_error
            tail = edge_mass(accounting.composed, margin)
            self.logger.info(
                f"adaptive round {round_index + 1}: L={budget.half_width:.6g}, "
                f"mass beyond {margin:.6g} = {tail:.3e}"
            )
            if tail <= budget.delta_error / 4.0:
                accepted = ErrorBudget(
                    **{**budget.model_dump(), "eps_upper_total": max(0.0, margin)}
                )
                return Accounting(
                    budget=accepted,
                    composed=accounting.composed,
                    discretized=accounting.discretized,
                    counts=accounting.counts,
                    ledger=accounting.ledger,
                )
            budget = budget.with_half_width(
                budget.half_width * settings.adaptive_growth, fast_transform_length=fast
            )
        raise NumericalGuardError(
            f"adaptive truncation did not converge in {settings.adaptive_max_rounds} rounds "
            f"(last half-width {budget.half_width:.6g})"
        )

    def delta(self, accounting: Accounting, eps: float) -> DeltaEstimate:
        return delta_at(accounting.composed, eps, accounting.budget)

    def delta_curve(self, accounting: Accounting, eps_grid: npt.ArrayLike) -> list[DeltaEstimate]:
        return delta_curve(accounting.composed, eps_grid, accounting.budget)

    def epsilon(self, accounting: Accounting, delta_target: float) -> EpsEstimate:
        self.policy.check_delta(delta_target, "delta_target")
        numerics = self.config.numerics
        return epsilon_at(
            accounting.composed,
            delta_target,
            accounting.budget,
            tolerance=numerics.bisection_tolerance,
            max_iter=numerics.bisection_max_iter,
            delta_floor=numerics.delta_floor,
        )

