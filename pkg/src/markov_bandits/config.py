"""JSON experiment files.

Top-level keys: ``arms`` (list of ``{states, transition, rewards, passive?}``)
or ``preset`` (``"S1"``..``"S4"``), plus ``policy``, ``M``, ``L``,
``horizon``, ``runs``, ``seed``, ``checkpoints``, ``mode``, ``initial`` and
``allow_mismatch``.  Everything except the arms is optional.
"""

from __future__ import annotations

import json
from pathlib import Path

from .harness import ConfigError, ExperimentConfig
from .markov import ChainError, ChainSpec
from .presets import PRESET_NAMES, preset

KNOWN_KEYS = {"arms", "preset", "policy", "M", "L", "horizon", "runs", "seed",
              "checkpoints", "mode", "initial", "allow_mismatch"}


class ConfigParseError(ConfigError):
    """Syntax error in the JSON document; carries the line and column."""

    def __init__(self, path, line: int, col: int, message: str):
        self.line, self.col = line, col
        ValueError.__init__(self, f"{path}:{line}:{col}: {message}")
        self.field = f"line {line}"


def parse_arm(raw, k: int) -> tuple[ChainSpec, object]:
    where = f"arms[{k}]"
    if not isinstance(raw, dict):
        raise ConfigError(where, "must be an object")
    for key in ("transition", "rewards"):
        if key not in raw:
            raise ConfigError(f"{where}.{key}", "missing")
    try:
        spec = ChainSpec(raw["transition"], raw["rewards"], name=str(raw.get("name", f"arm{k + 1}")))
    except (ChainError, ValueError, TypeError) as exc:
        field = "rewards" if "rewards" in str(exc) else "transition"
        raise ConfigError(f"{where}.{field}", str(exc)) from exc
    if "states" in raw and raw["states"] != spec.num_states:
        raise ConfigError(f"{where}.states", f"says {raw['states']} but transition is {spec.num_states}x{spec.num_states}")
    return spec, raw.get("passive")


def config_from_dict(doc: dict, **overrides) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "must be a JSON object")
    unknown = set(doc) - KNOWN_KEYS
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown key")
    doc = {**doc, **{k: v for k, v in overrides.items() if v is not None}}
    if "arms" in doc:
        if not isinstance(doc["arms"], list):
            raise ConfigError("arms", "must be a list")
        parsed = [parse_arm(a, k) for k, a in enumerate(doc["arms"])]
        arms = [p[0] for p in parsed]
        passive = [p[1] for p in parsed]
    elif "preset" in doc:
        if doc["preset"] not in PRESET_NAMES:
            raise ConfigError("preset", f"unknown preset {doc['preset']!r}")
        arms, passive = preset(doc["preset"]), None
    else:
        raise ConfigError("arms", "missing (give 'arms' or 'preset')")
    kwargs = {k: doc[k] for k in ("policy", "M", "L", "horizon", "runs", "seed", "checkpoints",
                                  "mode", "initial", "allow_mismatch") if k in doc}
    try:
        return ExperimentConfig(arms=arms, passive=passive, **kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError("<root>", str(exc)) from exc


def read_document(path) -> dict:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigParseError(path, exc.lineno, exc.colno, exc.msg) from exc


def load_config(path, **overrides) -> ExperimentConfig:
    return config_from_dict(read_document(path), **overrides)
