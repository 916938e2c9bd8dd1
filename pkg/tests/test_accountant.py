"""Tests for budget planning and end-to-end accounting."""

import math
import time

import numpy as np
import pytest

from prv_composer.accountant import PrvAccountant
from prv_composer.budget.bounds import gaussian_epsilon
from prv_composer.budget.params import mesh_size
from prv_composer.config import BudgetConfig, Config
from prv_composer.errors import NumericalGuardError, ParameterError, PrecisionFloorError
from prv_composer.mechanisms.prv import mechanism_delta
from prv_composer.mechanisms.standard import approx_dp_prv, gaussian_prv
from prv_composer.mechanisms.transforms import SubsampleParams, subsample_prv
from prv_composer.models import (
    ApproxDpEntry,
    ApproxDpParams,
    GaussianEntry,
    GaussianParams,
    LaplaceEntry,
    LaplaceParams,
    SubsampledGaussianEntry,
    SubsampledGaussianParams,
)


def budget_accountant(**budget: float | int | str) -> PrvAccountant:
    return PrvAccountant(Config(budget=BudgetConfig(**budget)))


class TestBuildMechanism:
    def test_gaussian(self, accountant: PrvAccountant) -> None:
        entry = GaussianEntry(kind="gaussian", params=GaussianParams(noise_scale=2.0))
        prv = accountant.build_mechanism(entry)
        assert prv.gaussian_mu == pytest.approx(0.5)

    def test_laplace_uses_sensitivity_over_scale(self, accountant: PrvAccountant) -> None:
        entry = LaplaceEntry(kind="laplace", params=LaplaceParams(scale=2.0, sensitivity=1.0))
        prv = accountant.build_mechanism(entry)
        assert mechanism_delta(prv, 0.0) == pytest.approx(1.0 - math.exp(-0.25))

    def test_approx_dp(self, accountant: PrvAccountant) -> None:
        entry = ApproxDpEntry(kind="approx_dp", params=ApproxDpParams(eps=1.0, delta=0.01))
        assert accountant.build_mechanism(entry).mass_y_inf == pytest.approx(0.01)

    def test_subsampled_directions(self, accountant: PrvAccountant) -> None:
        params = SubsampledGaussianParams(noise_scale=1.0, sampling_prob=0.2)
        forward = accountant.build_mechanism(
            SubsampledGaussianEntry(kind="subsampled_gaussian", params=params)
        )
        reverse = accountant.build_mechanism(
            SubsampledGaussianEntry(
                kind="subsampled_gaussian", params=params.model_copy(update={"inverted": True})
            )
        )
        assert forward.name.startswith("subsampled")
        assert reverse.name.startswith("inverted")


class TestPlan:
    def test_gaussian_uses_closed_form(self, accountant: PrvAccountant) -> None:
        budget = accountant.plan([(gaussian_prv(2.0), 16)], eps_error=0.1, delta_error=1e-10)
        assert budget.eps_upper_method == "gaussian"
        assert budget.k == 16
        assert budget.mesh == pytest.approx(mesh_size(16, 0.1, 1e-10))

    def test_pure_dp_uses_basic_composition(self, accountant: PrvAccountant) -> None:
        budget = accountant.plan([(approx_dp_prv(0.1, 0.0), 10)], eps_error=0.1, delta_error=1e-10)
        assert budget.eps_upper_method == "basic"
        assert budget.eps_upper_total == pytest.approx(1.0, abs=1e-6)

    def test_override(self, accountant: PrvAccountant) -> None:
        budget = accountant.plan(
            [(gaussian_prv(2.0), 4)], eps_error=0.1, delta_error=1e-8, eps_upper_override=3.0
        )
        assert budget.eps_upper_method == "override"
        assert budget.eps_upper_total == 3.0

    def test_auto_switches_to_adaptive_without_closed_form(self) -> None:
        accountant = budget_accountant(max_static_half_width=2.5)
        budget = accountant.plan([(approx_dp_prv(0.1, 0.0), 10)], eps_error=0.1, delta_error=1e-10)
        assert budget.eps_upper_method == "adaptive"

    def test_auto_keeps_closed_form(self) -> None:
        accountant = budget_accountant(max_static_half_width=2.5)
        budget = accountant.plan([(gaussian_prv(2.0), 16)], eps_error=0.1, delta_error=1e-10)
        assert budget.eps_upper_method == "gaussian"

    def test_rejects_empty(self, accountant: PrvAccountant) -> None:
        with pytest.raises(ParameterError):
            accountant.plan([], eps_error=0.1, delta_error=1e-6)

    def test_rejects_delta_error_below_floor(self, accountant: PrvAccountant) -> None:
        with pytest.raises(PrecisionFloorError):
            accountant.plan([(gaussian_prv(1.0), 1)], eps_error=0.1, delta_error=1e-12)


class TestCompose:
    @pytest.mark.parametrize("k", [2, 10, 50])
    def test_pure_dp_is_exact_at_composed_epsilon(self, accountant: PrvAccountant, k: int) -> None:
        eps_error, delta_error = 0.1, 1e-10
        mesh = mesh_size(k, eps_error, delta_error)
        eps0 = round(0.1 / mesh) * mesh
        accounting = accountant.compose([(approx_dp_prv(eps0, 0.0), k)], eps_error, delta_error)
        assert accounting.budget.mesh == pytest.approx(mesh)
        at_top = accountant.delta(accounting, k * eps0)
        assert at_top.estimate == 0.0
        assert at_top.lower == 0.0
        past_top = accountant.delta(accounting, k * eps0 + eps_error)
        assert past_top.upper <= delta_error + 1e-11
        assert past_top.lower == 0.0

    def test_infinity_mass_is_folded_back(self, accountant: PrvAccountant) -> None:
        accounting = accountant.compose(
            [(approx_dp_prv(0.2, 0.01), 3)], eps_error=0.1, delta_error=1e-8
        )
        assert accounting.composed.q_finite == pytest.approx(0.99**3)
        result = accountant.delta(accounting, 0.7)
        # Past the largest finite loss only the mass at infinity remains.
        assert result.estimate == pytest.approx(1.0 - 0.99**3, abs=1e-9)

    def test_adaptive_grows_half_width(self) -> None:
        accountant = budget_accountant(eps_upper_method="adaptive")
        accounting = accountant.compose(
            [(approx_dp_prv(0.1, 0.0), 10)], eps_error=0.1, delta_error=1e-10
        )
        budget = accounting.budget
        assert budget.eps_upper_method == "adaptive"
        assert budget.eps_upper_total >= 1.0
        assert accountant.delta(accounting, 1.2).upper <= 2e-10

    def test_adaptive_gives_up(self) -> None:
        accountant = budget_accountant(eps_upper_method="adaptive", adaptive_max_rounds=1)
        with pytest.raises(NumericalGuardError):
            accountant.compose([(approx_dp_prv(0.1, 0.0), 10)], eps_error=0.1, delta_error=1e-10)

    def test_single_gaussian_estimate(self, accountant: PrvAccountant) -> None:
        accounting = accountant.compose([(gaussian_prv(1.0), 1)], eps_error=0.01, delta_error=1e-8)
        result = accountant.epsilon(accounting, mechanism_delta(gaussian_prv(1.0), 1.0))
        assert result.estimate == pytest.approx(1.0, abs=1e-3)
        assert result.lower <= 1.0 <= result.upper

    def test_epsilon_below_floor(self, accountant: PrvAccountant) -> None:
        accounting = accountant.compose([(gaussian_prv(1.0), 1)], eps_error=0.1, delta_error=1e-8)
        with pytest.raises(PrecisionFloorError):
            accountant.epsilon(accounting, 1e-11)

    @pytest.mark.slow
    def test_dpsgd_bounds_are_tight(self, accountant: PrvAccountant) -> None:
        step = subsample_prv(gaussian_prv(0.8), SubsampleParams(0.001))
        accounting = accountant.compose([(step, 2000)], eps_error=0.1, delta_error=1e-10)
        result = accountant.epsilon(accounting, 1e-7)
        assert math.isfinite(result.upper)
        assert result.lower <= result.estimate <= result.upper
        assert result.upper - result.lower <= 0.201
        assert accounting.ledger.wrap_ok


class TestGaussianSandwich:
    MU = math.sqrt(1000) / 30.0

    @pytest.mark.parametrize("eps_error", [0.1, 0.5, 1.0])
    def test_closed_form_lies_within_bounds(
        self, accountant: PrvAccountant, eps_error: float
    ) -> None:
        accounting = accountant.compose([(gaussian_prv(30.0), 1000)], eps_error, 1e-10)
        for delta in np.logspace(-9.0, -1.0, 9):
            result = accountant.epsilon(accounting, float(delta))
            exact = gaussian_epsilon(self.MU, float(delta))
            assert result.lower <= exact <= result.upper
            if delta >= 1e-7:
                # Below this the delta_error slack dominates the curve's slope.
                assert result.upper - result.lower <= 2 * eps_error + 1e-3


@pytest.mark.slow
class TestDpsgd:
    DELTA = 1e-7

    def test_estimates_grow_with_steps(self, accountant: PrvAccountant) -> None:
        step = subsample_prv(gaussian_prv(0.8), SubsampleParams(0.001))
        estimates: list[float] = []
        for k in (500, 1000, 2000):
            accounting = accountant.compose([(step, k)], eps_error=0.1, delta_error=1e-10)
            result = accountant.epsilon(accounting, self.DELTA)
            assert result.upper - result.lower <= 0.201
            estimates.append(result.estimate)
        assert estimates == sorted(estimates)

        budget = accounting.budget
        dense = accountant.compose_with_budget([(step, 2000)], budget.with_mesh(budget.mesh / 2))
        assert dense.budget.n >= 2 * budget.n
        assert abs(accountant.epsilon(dense, self.DELTA).estimate - estimates[-1]) <= 2 * 0.1

    def test_long_run_finishes(self, accountant: PrvAccountant) -> None:
        step = subsample_prv(gaussian_prv(0.8), SubsampleParams(0.001))
        started = time.perf_counter()
        accounting = accountant.compose([(step, 100_000)], eps_error=0.1, delta_error=1e-10)
        result = accountant.epsilon(accounting, self.DELTA)
        assert time.perf_counter() - started < 60.0
        assert math.isfinite(result.upper)
        assert result.lower <= result.estimate <= result.upper
