"""Python access to the ecl library.

Configurations are passed as JSON text, the same documents the ``ecl``
command-line tool reads.
"""

import json as _json

from ._core import (
    Error,
    ParseError,
    ValidationError,
    build_partition,
    class_wise_accuracy,
    compare,
    default_config,
    entropy,
    gen_data,
    generate,
    load_dataset,
    normalize_config,
    plan_batch,
    run_pair,
)


def config(**overrides):
    """Default configuration as a dict, with top-level keys replaced and
    nested dicts merged one level deep."""
    cfg = _json.loads(default_config())
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(cfg.get(key), dict):
            cfg[key].update(value)
        else:
            cfg[key] = value
    return cfg


__all__ = [
    "Error",
    "ParseError",
    "ValidationError",
    "build_partition",
    "class_wise_accuracy",
    "compare",
    "config",
    "default_config",
    "entropy",
    "gen_data",
    "generate",
    "load_dataset",
    "normalize_config",
    "plan_batch",
    "run_pair",
]
