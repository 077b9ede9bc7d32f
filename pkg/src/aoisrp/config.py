"""JSON configuration files.

Layout::

    {
      "source":      {"p01": .., "p10": ..},
      "channel":     {"p01": .., "p10": .., "p1r": .., "p0p": ..},
      "costs":       {"c1": .., "c2": .., "c3": ..},
      "constraints": {"a_bar": .., "c_bar": ..},
      "policy":      {"p0": .., "p1": .., "p2": .., "p3": ..},   # optional
      "sim":         {"slots": .., "warmup": .., "seed": .., "runs": ..},  # optional
      "pomdp":       {"a_max": .., "weights": [wd, wa, wc]}      # optional
    }

Every problem is reported as a :class:`~aoisrp.errors.ConfigError` whose
``path`` names the field, e.g. ``channel.p0p``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from .errors import ConfigError
from .model import ChannelModel, Constraints, CostVector, SourceChain, SrpPolicy, SystemConfig

REQUIRED = {
    "source": ("p01", "p10"),
    "channel": ("p01", "p10", "p1r", "p0p"),
    "costs": ("c1", "c2", "c3"),
    "constraints": ("a_bar", "c_bar"),
}
BUILDERS = {
    "source": SourceChain,
    "channel": ChannelModel,
    "costs": CostVector,
    "constraints": Constraints,
}


@dataclass(frozen=True)
class SimSettings:
    slots: int = 1_000_000
    warmup: int = 10_000
    seed: int = 0
    runs: int = 1


@dataclass(frozen=True)
class PomdpSettings:
    a_max: int = 64
    weights: tuple[float, float, float] = (1.0, 0.0, 0.0)


@dataclass(frozen=True)
class ConfigFile:
    system: SystemConfig
    policy: Optional[SrpPolicy] = None
    sim: SimSettings = field(default_factory=SimSettings)
    pomdp: PomdpSettings = field(default_factory=PomdpSettings)


def _section(doc: dict, name: str, keys, required: bool = True) -> Optional[dict]:
    if name not in doc:
        if required:
            raise ConfigError(name, "missing section")
        return None
    sec = doc[name]
    if not isinstance(sec, dict):
        raise ConfigError(name, "expected an object")
    extra = sorted(set(sec) - set(keys))
    if extra:
        raise ConfigError(f"{name}.{extra[0]}", "unknown field")
    return sec


def _number(sec: dict, section: str, key: str) -> float:
    path = f"{section}.{key}"
    if key not in sec:
        raise ConfigError(path, "missing field")
    v = sec[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(path, f"expected a number, got {v!r}")
    if v != v or v in (float("inf"), float("-inf")):
        raise ConfigError(path, "must be finite")
    return float(v)


def _integer(sec: dict, section: str, key: str, default: int, minimum: int) -> int:
    path = f"{section}.{key}"
    if key not in sec:
        return default
    v = sec[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(path, f"expected an integer, got {v!r}")
    if v < minimum:
        raise ConfigError(path, f"must be >= {minimum}")
    return v


def parse_config(doc: Any) -> ConfigFile:
    """Validate a decoded JSON document and build the typed configuration."""
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "expected a JSON object")
    extra = sorted(set(doc) - set(REQUIRED) - {"policy", "sim", "pomdp"})
    if extra:
        raise ConfigError(extra[0], "unknown section")
    parts = {}
    for name, keys in REQUIRED.items():
        sec = _section(doc, name, keys)
        parts[name] = BUILDERS[name](**{k: _number(sec, name, k) for k in keys})
    system = SystemConfig(**parts)

    policy = None
    sec = _section(doc, "policy", ("p0", "p1", "p2", "p3"), required=False)
    if sec is not None:
        policy = SrpPolicy(*(_number(sec, "policy", k) for k in ("p0", "p1", "p2", "p3")))

    sim = SimSettings()
    sec = _section(doc, "sim", ("slots", "warmup", "seed", "runs"), required=False)
    if sec is not None:
        sim = SimSettings(
            slots=_integer(sec, "sim", "slots", sim.slots, 1),
            warmup=_integer(sec, "sim", "warmup", sim.warmup, 0),
            seed=_integer(sec, "sim", "seed", sim.seed, 0),
            runs=_integer(sec, "sim", "runs", sim.runs, 1),
        )

    pomdp = PomdpSettings()
    sec = _section(doc, "pomdp", ("a_max", "weights"), required=False)
    if sec is not None:
        weights = sec.get("weights", list(pomdp.weights))
        if (
            not isinstance(weights, list)
            or len(weights) != 3
            or any(isinstance(w, bool) or not isinstance(w, (int, float)) or w < 0 for w in weights)
        ):
            raise ConfigError("pomdp.weights", "expected three nonnegative numbers")
        pomdp = PomdpSettings(
            a_max=_integer(sec, "pomdp", "a_max", pomdp.a_max, 1),
            weights=tuple(float(w) for w in weights),
        )
    return ConfigFile(system, policy, sim, pomdp)


def load_config(path) -> ConfigFile:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read file ({exc.strerror})") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(str(path), f"invalid JSON: {exc}") from exc
    return parse_config(doc)


def config_to_dict(cfg: SystemConfig) -> dict:
    return {
        "source": {"p01": cfg.source.p01, "p10": cfg.source.p10},
        "channel": {
            "p01": cfg.channel.p01,
            "p10": cfg.channel.p10,
            "p1r": cfg.channel.p1r,
            "p0p": cfg.channel.p0p,
        },
        "costs": {"c1": cfg.costs.c1, "c2": cfg.costs.c2, "c3": cfg.costs.c3},
        "constraints": {"a_bar": cfg.constraints.a_bar, "c_bar": cfg.constraints.c_bar},
    }
