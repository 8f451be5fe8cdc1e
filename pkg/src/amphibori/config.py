"""Default-knob handling: one documented JSON file, overridable per run.

Precedence: built-in defaults < --config file (or AMPHIBORI_CONFIG) < CLI
flags < scenario sim{} block.
"""

from __future__ import annotations

import json
import os
from importlib import resources

ENV_VAR = "AMPHIBORI_CONFIG"


def builtin_defaults() -> dict:
    with resources.files("amphibori").joinpath("defaults.json").open() as fh:
        return json.load(fh)


def load_config(path: str | None = None) -> dict:
    """Built-in defaults merged with an optional user JSON config."""
    cfg = builtin_defaults()
    path = path or os.environ.get(ENV_VAR)
    if path:
        with open(path, encoding="utf-8") as fh:
            user = json.load(fh)
        unknown = set(user) - set(cfg)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(user)
    return cfg
