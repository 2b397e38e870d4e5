"""Ambient backscatter detection: TED, IED and JCED detectors with Monte Carlo experiments.

Configs are JSON strings in the same format as the ambc-detect tool.
"""

from ._core import (
    ConfigError,
    DomainError,
    NumericError,
    auc_closed_form,
    ber,
    default_config,
    mcleish_abs_moment,
    q_function,
    q_inverse,
    run,
    run_csv,
    validate,
)

__all__ = [
    "ConfigError",
    "DomainError",
    "NumericError",
    "auc_closed_form",
    "ber",
    "default_config",
    "mcleish_abs_moment",
    "q_function",
    "q_inverse",
    "run",
    "run_csv",
    "validate",
]
