"""Pipeline configuration files.

A pipeline config is a flat JSON object; every key is optional and
command-line flags override file values. Recognized keys:

============== ======= ==========================================
key            type    meaning
============== ======= ==========================================
a              number  LINEX asymmetry parameter (nonzero)
b              number  LINEX magnitude parameter (positive)
tau            number  logistic prior scale
gamma          number  exponent of the level-dependent weight
alpha          number  global point-mass weight in [0, 1)
sigma          number  noise scale override (skips estimation)
primary_level  int     coarsest detail level kept smooth (J0)
vanishing_moments int  Daubechies filter order, 1..10
node_count     int     Gauss-Hermite nodes (>= 16)
truncation     number  validation-integral half-width (>= 6)
rule           string  linex_logistic | posterior_mean |
                       soft_universal | soft_sure
threshold      number  fixed soft threshold (optional)
============== ======= ==========================================
"""

from __future__ import annotations

import json

from .errors import InputError

_NUMBER_KEYS = {"a", "b", "tau", "gamma", "alpha", "sigma", "truncation", "threshold"}
_INT_KEYS = {"primary_level", "vanishing_moments", "node_count"}
_STRING_KEYS = {"rule"}
PIPELINE_KEYS = _NUMBER_KEYS | _INT_KEYS | _STRING_KEYS


def pipeline_config_from_dict(raw: dict) -> dict:
    """Validate a pipeline config mapping; lists every offending key."""
    if not isinstance(raw, dict):
        raise InputError("pipeline config must be a JSON object")
    offending = sorted(set(raw) - PIPELINE_KEYS)
    out: dict = {}
    for key, value in raw.items():
        if key in offending:
            continue
        try:
            if key in _NUMBER_KEYS:
                out[key] = float(value)
            elif key in _INT_KEYS:
                out[key] = int(value)
            else:
                out[key] = str(value)
        except (TypeError, ValueError):
            offending.append(key)
    if offending:
        raise InputError(
            "invalid pipeline config; offending keys: " + ", ".join(sorted(offending))
        )
    return out


def load_pipeline_config(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"config {path} is not valid JSON: {exc}") from exc
    return pipeline_config_from_dict(raw)
