"""Configuration management for prv-composer."""

import os
from pathlib import Path
from typing import Literal

import yaml
from pydantic import BaseModel, Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

# Below this, δ values are dominated by floating-point error of the composed curve.
DELTA_FLOOR = 1e-10


class NumericsConfig(BaseModel):
    """Numerical knobs of discretization, composition and curve inversion."""

    quadrature_refine: int = Field(
        default=64,
        ge=2,
        le=4096,
        description="Quadrature nodes per output bin when a truncated mean has no closed form",
    )
    quadrature_chunk: int = Field(
        default=1 << 20,
        ge=1024,
        description="Maximum number of CDF nodes evaluated in one vectorized call",
    )
    bisection_tolerance: float = Field(
        default=1e-6,
        gt=0.0,
        le=1e-2,
        description="Width of the epsilon bracket at which bisection stops",
    )
    bisection_max_iter: int = Field(
        default=60,
        ge=10,
        le=200,
        description="Maximum bisection steps",
    )
    clamp_threshold: float = Field(
        default=1e-8,
        gt=0.0,
        le=1e-4,
        description="Largest negative FFT mass that may be clamped away",
    )
    delta_floor: float = Field(
        default=DELTA_FLOOR,
        description="Smallest accepted delta target or delta error",
    )
    fast_transform_length: bool = Field(
        default=True,
        description="Widen the grid so that its length is a smooth FFT size",
    )

    @field_validator("delta_floor")
    @classmethod
    def _floor_not_below_hard_floor(cls, value: float) -> float:
        if value < DELTA_FLOOR:
            raise ValueError(f"delta_floor cannot be below {DELTA_FLOOR}")
        return value


class BudgetConfig(BaseModel):
    """How the truncation half-width L is chosen."""

    eps_upper_method: Literal["auto", "static", "adaptive"] = Field(
        default="auto",
        description="Oracle for the composed epsilon upper bound",
    )
    max_static_half_width: float = Field(
        default=40.0,
        gt=2.0,
        description="Above this half-width, auto switches to the adaptive rule",
    )
    adaptive_max_rounds: int = Field(
        default=8,
        ge=1,
        le=32,
        description="Maximum recompositions of the adaptive rule",
    )
    adaptive_growth: float = Field(
        default=2.0,
        gt=1.0,
        le=8.0,
        description="Half-width growth factor between adaptive rounds",
    )


class LoggingConfig(BaseModel):
    """Logging configuration."""

    level: str = Field(
        default="warning",
        description="Log level (debug, info, warning, error, critical)",
    )
    format: Literal["json", "console"] = Field(
        default="console",
        description="Log format (json or console)",
    )


class Config(BaseSettings):
    """Main configuration container."""

    model_config = SettingsConfigDict(
        env_prefix="PRV_COMPOSER_",
        env_nested_delimiter="__",
        case_sensitive=False,
    )

    numerics: NumericsConfig = Field(default_factory=NumericsConfig)
    budget: BudgetConfig = Field(default_factory=BudgetConfig)
    logging: LoggingConfig = Field(default_factory=LoggingConfig)

    config_file: str = Field(default="", description="Optional YAML settings overlay")

    @classmethod
    def load(cls, path: str | None = None) -> "Config":
        """Load configuration from environment and an optional YAML file."""
        config = cls()

        config_file_path = path or os.environ.get("PRV_COMPOSER_CONFIG_FILE", config.config_file)
        if config_file_path and Path(config_file_path).exists():
            with open(config_file_path) as f:
                yaml_data = yaml.safe_load(f)

            if yaml_data:
                if "numerics" in yaml_data:
                    config.numerics = NumericsConfig(**yaml_data["numerics"])
                if "budget" in yaml_data:
                    config.budget = BudgetConfig(**yaml_data["budget"])
                if "logging" in yaml_data:
                    config.logging = LoggingConfig(**yaml_data["logging"])
            config.config_file = str(config_file_path)

        return config
