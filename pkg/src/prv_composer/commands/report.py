"""Report assembly, text rendering and file writers."""

import csv
import io
from collections.abc import Sequence
from pathlib import Path

import numpy as np

from prv_composer import __version__
from prv_composer.accountant import Accounting
from prv_composer.budget.params import ErrorBudget
from prv_composer.errors import OutputError
from prv_composer.models import (
    BudgetSummary,
    ComposeConfig,
    CurveMetadata,
    CurvePoint,
    GaussianValidation,
    MechanismSummary,
    Report,
    ReportModel,
)

CURVE_HEADER = ("eps", "delta_lower", "delta_est", "delta_upper")


def budget_summary(budget: ErrorBudget) -> BudgetSummary:
    return BudgetSummary(
        k=budget.k,
        eps_error=budget.eps_error,
        delta_error=budget.delta_error,
        mesh=budget.mesh,
        half_width=budget.half_width,
        n=budget.n,
        eps_upper_total=budget.eps_upper_total,
        eps_upper_each=budget.eps_upper_each,
        eps_upper_method=budget.eps_upper_method,
    )


def mechanism_summaries(accounting: Accounting) -> list[MechanismSummary]:
    return [
        MechanismSummary(
            name=item.name,
            count=count,
            mass_inf=item.mass_inf,
            trunc_mass=item.trunc_mass,
            shift=item.shift,
        )
        for item, count in zip(accounting.discretized, accounting.counts, strict=True)
    ]


def curve_metadata(accounting: Accounting) -> CurveMetadata:
    budget = accounting.budget
    return CurveMetadata(
        version=__version__,
        mesh=budget.mesh,
        half_width=budget.half_width,
        k=budget.k,
        eps_error=budget.eps_error,
        delta_error=budget.delta_error,
        q_finite=accounting.composed.q_finite,
        eps_upper_method=budget.eps_upper_method,
    )


def load_compose_config(path: str | Path) -> ComposeConfig:
    """Read and validate a JSON compose job.

    Raises:
        OutputError: the file cannot be read.
        ValidationError: the content does not describe a valid job.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise OutputError(f"cannot read config {path}: {e}") from e
    return ComposeConfig.model_validate_json(text)


def _number(value: float) -> str:
    """Shortest positional decimal that parses back to the same double."""
    return np.format_float_positional(float(value), unique=True, trim="0")


def render_report(report: Report) -> str:
    """Human-readable summary of a compose or dpsgd run."""
    budget = report.budget
    lines = [
        f"prv-composer {report.version} {report.command}",
        f"  compositions k     : {budget.k}",
        f"  eps_error          : {_number(budget.eps_error)}",
        f"  delta_error        : {_number(budget.delta_error)}",
        f"  mesh h             : {_number(budget.mesh)}",
        f"  half-width L       : {_number(budget.half_width)}",
        f"  grid n             : {budget.n}",
        f"  eps upper bound    : {_number(budget.eps_upper_total)} ({budget.eps_upper_method})",
        f"  finite mass q      : {_number(report.q_finite)}",
    ]
    for mechanism in report.mechanisms:
        lines.append(
            f"  mechanism {mechanism.name} x{mechanism.count}: "
            f"trunc_mass={_number(mechanism.trunc_mass)} shift={_number(mechanism.shift)}"
        )
    ledger = report.ledger
    lines.append(
        f"  ledger             : trunc={_number(ledger.trunc_mass)} "
        f"wrap={_number(ledger.wrap_mass)} clamped={_number(ledger.clamped_mass)}"
        + ("" if ledger.trunc_ok and ledger.wrap_ok else " [over budget]")
    )
    if report.eps is not None and report.delta_target is not None:
        lines.append(
            f"eps(delta={_number(report.delta_target)}): lower={_number(report.eps.lower)} "
            f"estimate={_number(report.eps.estimate)} upper={_number(report.eps.upper)}"
        )
    if report.delta is not None and report.eps_target is not None:
        lines.append(
            f"delta(eps={_number(report.eps_target)}): lower={_number(report.delta.lower)} "
            f"estimate={_number(report.delta.estimate)} upper={_number(report.delta.upper)}"
        )
    if report.curve is not None:
        lines.append(f"curve: {len(report.curve)} points")
    return "\n".join(lines) + "\n"


def render_validation(validation: GaussianValidation) -> str:
    lines = [f"prv-composer {validation.version} validate-gaussian mu={_number(validation.mu)}"]
    for check in validation.checks:
        lines.append(
            f"{'PASS' if check.passed else 'FAIL'} eps={_number(check.eps)} "
            f"lower={_number(check.lower)} exact={_number(check.exact)} "
            f"upper={_number(check.upper)}"
        )
    return "\n".join(lines) + "\n"


def _write_text(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    except OSError as e:
        raise OutputError(f"cannot write {path}: {e}") from e


def write_json(model: ReportModel, path: str | Path) -> None:
    _write_text(Path(path), model.model_dump_json(indent=2) + "\n")


def curve_csv(points: Sequence[CurvePoint]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CURVE_HEADER)
    for point in points:
        writer.writerow(
            [
                _number(point.eps),
                _number(point.delta_lower),
                _number(point.delta_est),
                _number(point.delta_upper),
            ]
        )
    return buffer.getvalue()


def metadata_path(out_path: str | Path) -> Path:
    """Sibling metadata file: ``<out>.json``, or ``<out>.meta.json`` for a .json output."""
    path = Path(out_path)
    if path.suffix == ".json":
        return path.with_name(path.name[: -len(".json")] + ".meta.json")
    return path.with_name(path.name + ".json")


def write_curve(
    points: Sequence[CurvePoint], metadata: CurveMetadata, out_path: str | Path
) -> Path:
    """Write the curve CSV and its metadata sidecar; returns the sidecar path."""
    sidecar = metadata_path(out_path)
    _write_text(Path(out_path), curve_csv(points))
    write_json(metadata, sidecar)
    return sidecar

