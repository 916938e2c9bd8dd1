"""dpsgd command handler."""

import logging

from prv_composer.accountant import PrvAccountant
from prv_composer.commands.compose import handle_compose
from prv_composer.models import ComposeConfig, Report


def dpsgd_config(
    sigma: float,
    sampling_prob: float,
    steps: int,
    delta: float,
    eps_error: float = 0.1,
    delta_error: float | None = None,
    inverted: bool = False,
) -> ComposeConfig:
    """Compose job for ``steps`` iterations of the subsampled Gaussian mechanism."""
    return ComposeConfig.model_validate(
        {
            "mechanisms": [
                {
                    "kind": "subsampled_gaussian",
                    "params": {
                        "noise_scale": sigma,
                        "sampling_prob": sampling_prob,
                        "inverted": inverted,
                    },
                    "count": steps,
                }
            ],
            "query": {"delta_target": delta},
            "eps_error": eps_error,
            "delta_error": delta_error,
        }
    )


def handle_dpsgd(
    sigma: float,
    sampling_prob: float,
    steps: int,
    delta: float,
    accountant: PrvAccountant,
    logger: logging.Logger,
    eps_error: float = 0.1,
    delta_error: float | None = None,
    inverted: bool = False,
) -> Report:
    """Handle the dpsgd command: epsilon of DP-SGD at ``delta``."""
    config = dpsgd_config(sigma, sampling_prob, steps, delta, eps_error, delta_error, inverted)
    logger.info(
        f"dpsgd: sigma={sigma:g}, p={sampling_prob:g}, steps={steps}, delta={delta:g}"
        + (", inverted direction" if inverted else "")
    )
    return handle_compose(config, accountant, logger, command="dpsgd")
