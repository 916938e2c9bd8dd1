"""Data models for prv-composer inputs and reports."""

from typing import Annotated, Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from prv_composer.config import DELTA_FLOOR


class ReportModel(BaseModel):
    """Base for report payloads; infinite values serialize as the strings "Infinity"."""

    model_config = ConfigDict(ser_json_inf_nan="strings")


class DeltaEstimate(ReportModel):
    """Bounds on delta at one epsilon."""

    lower: float
    estimate: float
    upper: float


class EpsEstimate(ReportModel):
    """Bounds on epsilon at one delta; +inf when the target is not reached in the window."""

    lower: float
    estimate: float
    upper: float


class CurvePoint(ReportModel):
    """One row of a delta curve."""

    eps: float
    delta_lower: float
    delta_est: float
    delta_upper: float


class LedgerReport(ReportModel):
    """A-posteriori checks of the error terms a composed distribution was built under."""

    compositions: int
    trunc_mass: float
    trunc_budget: float
    trunc_ok: bool
    wrap_mass: float
    wrap_budget: float
    wrap_ok: bool
    clamped_mass: float
    hoeffding_eta: float


class BudgetSummary(ReportModel):
    """Derived numerical configuration of a run."""

    k: int
    eps_error: float
    delta_error: float
    mesh: float
    half_width: float
    n: int
    eps_upper_total: float
    eps_upper_each: float
    eps_upper_method: str


class MechanismSummary(ReportModel):
    """Per-mechanism discretization statistics."""

    name: str
    count: int
    mass_inf: float
    trunc_mass: float
    shift: float


class Report(ReportModel):
    """Result of a compose or dpsgd run."""

    version: str
    command: Literal["compose", "dpsgd"]
    budget: BudgetSummary
    mechanisms: list[MechanismSummary]
    q_finite: float
    ledger: LedgerReport
    delta_target: float | None = None
    eps: EpsEstimate | None = None
    eps_target: float | None = None
    delta: DeltaEstimate | None = None
    curve: list[CurvePoint] | None = None


class InputModel(BaseModel):
    """Base for user-supplied configuration; unknown keys are rejected."""

    model_config = ConfigDict(extra="forbid")


class GaussianParams(InputModel):
    noise_scale: float = Field(..., gt=0.0, description="Standard deviation of the added noise")
    sensitivity: float = Field(default=1.0, ge=0.0, description="L2 sensitivity")


class LaplaceParams(InputModel):
    scale: float = Field(..., gt=0.0, description="Laplace noise scale b")
    sensitivity: float = Field(default=1.0, gt=0.0, description="L1 sensitivity")


class ApproxDpParams(InputModel):
    eps: float = Field(..., ge=0.0)
    delta: float = Field(default=0.0, ge=0.0, lt=1.0)


class SubsampledGaussianParams(InputModel):
    noise_scale: float = Field(..., gt=0.0)
    sampling_prob: float = Field(..., gt=0.0, le=1.0)
    sensitivity: float = Field(default=1.0, ge=0.0)
    inverted: bool = Field(default=False, description="Use the reversed neighbouring direction")


class GaussianEntry(InputModel):
    kind: Literal["gaussian"]
    params: GaussianParams
    count: int = Field(default=1, ge=1)


class LaplaceEntry(InputModel):
    kind: Literal["laplace"]
    params: LaplaceParams
    count: int = Field(default=1, ge=1)


class ApproxDpEntry(InputModel):
    kind: Literal["approx_dp"]
    params: ApproxDpParams
    count: int = Field(default=1, ge=1)


class SubsampledGaussianEntry(InputModel):
    kind: Literal["subsampled_gaussian"]
    params: SubsampledGaussianParams
    count: int = Field(default=1, ge=1)


MechanismEntry = Annotated[
    GaussianEntry | LaplaceEntry | ApproxDpEntry | SubsampledGaussianEntry,
    Field(discriminator="kind"),
]


class DeltaQuery(InputModel):
    delta_target: float = Field(..., gt=0.0, lt=1.0)


class EpsQuery(InputModel):
    eps_target: float = Field(..., ge=0.0)


class CurveSpec(InputModel):
    eps_min: float = Field(default=0.0, ge=0.0)
    eps_max: float = Field(..., ge=0.0)
    num_points: int = Field(default=101, ge=1, le=1_000_000)

    @model_validator(mode="after")
    def _ordered(self) -> "CurveSpec":
        if self.eps_max < self.eps_min:
            raise ValueError("eps_max must not be below eps_min")
        return self


class CurveQuery(InputModel):
    curve: CurveSpec


class ComposeConfig(InputModel):
    """A composition job: mechanisms with repetition counts and one query."""

    mechanisms: list[MechanismEntry] = Field(..., min_length=1)
    query: DeltaQuery | EpsQuery | CurveQuery
    eps_error: float = Field(default=0.1, gt=0.0)
    delta_error: float | None = Field(default=None, gt=0.0, lt=1.0)
    eps_upper_override: float | None = Field(default=None, ge=0.0)

    @property
    def total_count(self) -> int:
        return sum(entry.count for entry in self.mechanisms)

    def resolved_delta_error(self) -> float:
        """delta_error, defaulting to delta_target / 1000 floored at the delta floor."""
        if self.delta_error is not None:
            return self.delta_error
        if isinstance(self.query, DeltaQuery):
            return max(self.query.delta_target / 1000.0, DELTA_FLOOR)
        return DELTA_FLOOR


class CurveMetadata(ReportModel):
    """Sidecar of a curve CSV: everything needed to reproduce it."""

    version: str
    mesh: float
    half_width: float
    k: int
    eps_error: float
    delta_error: float
    q_finite: float
    eps_upper_method: str


class GaussianCheck(ReportModel):
    """One grid point of the closed-form Gaussian comparison."""

    eps: float
    lower: float
    exact: float
    upper: float
    passed: bool


class GaussianValidation(ReportModel):
    """Closed-form Gaussian curve checked against the composed bounds."""

    version: str
    mu: float
    budget: BudgetSummary
    checks: list[GaussianCheck]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)
