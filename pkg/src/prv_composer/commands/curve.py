"""curve command handler."""

import logging
from pathlib import Path

from prv_composer.accountant import PrvAccountant
from prv_composer.commands.compose import curve_points, run_accounting
from prv_composer.commands.report import curve_metadata, write_curve
from prv_composer.errors import ParameterError
from prv_composer.models import ComposeConfig, CurveMetadata, CurveQuery


def handle_curve(
    config: ComposeConfig,
    out_path: str | Path,
    accountant: PrvAccountant,
    logger: logging.Logger,
) -> CurveMetadata:
    """Handle the curve command: write the delta curve CSV and its metadata."""
    if not isinstance(config.query, CurveQuery):
        raise ParameterError("the curve command needs a config with a curve query")
    accounting = run_accounting(config, accountant)
    points = curve_points(config.query.curve, accountant, accounting)
    metadata = curve_metadata(accounting)
    sidecar = write_curve(points, metadata, out_path)
    logger.info(f"curve: wrote {len(points)} rows to {out_path} and metadata to {sidecar}")
    return metadata
