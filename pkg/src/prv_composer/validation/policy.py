"""Floating-point floor policy for delta targets and delta errors."""

import logging

from prv_composer.config import NumericsConfig
from prv_composer.errors import ParameterError, PrecisionFloorError
from prv_composer.models import ComposeConfig, DeltaQuery


class PrecisionPolicy:
    """Rejects deltas the composed curve cannot resolve in double precision."""

    def __init__(
        self,
        config: NumericsConfig,
        logger: logging.Logger | None = None,
        audit_log: bool = True,
    ):
        self.config = config
        self.logger = logger or logging.getLogger(__name__)
        self.audit_log = audit_log

    @property
    def floor(self) -> float:
        return self.config.delta_floor

    def check_delta(self, value: float, label: str) -> None:
        """Raise PrecisionFloorError if ``value`` is below the floor."""
        if not value < 1.0:
            raise ParameterError(f"{label} must be below 1, got {value}")
        if value < self.floor:
            if self.audit_log:
                self.logger.warning(
                    f"Rejected {label}={value:g} (floor {self.floor:g})",
                    extra={"audit": True, "field": label, "value": value},
                )
            raise PrecisionFloorError(
                f"{label} {value:g} is below the supported floor {self.floor:g}"
            )

    def check_compose(self, config: ComposeConfig) -> None:
        """Validate every delta of a compose job against the floor."""
        if isinstance(config.query, DeltaQuery):
            self.check_delta(config.query.delta_target, "delta_target")
        self.check_delta(config.resolved_delta_error(), "delta_error")

        if self.audit_log:
            self.logger.info(
                f"Compose job validated: {config.total_count} compositions, "
                f"delta_error={config.resolved_delta_error():g}",
                extra={"audit": True},
            )
