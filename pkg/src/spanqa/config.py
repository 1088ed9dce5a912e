"""``key = value`` run configuration with typed defaults."""
from __future__ import annotations

import os
from dataclasses import asdict, dataclass, field, fields

from .errors import ConfigError


def _floats(v):
    return tuple(float(x) for x in str(v).split(",") if x.strip())


def _ints(v):
    return tuple(int(x) for x in str(v).split(",") if x.strip())


def _strs(v):
    return tuple(x.strip() for x in str(v).split(",") if x.strip())


@dataclass
class RunConfig:
    k: int = 15
    lam: float = 1.0
    decoder: str = "proj"
    epochs: int = 10
    lr: float = 0.5
    lr_decay: float = 0.1
    l2: float = 0.0
    feature_bits: int = 20
    seed: int = 0
    lambda_grid: tuple = (0.25, 0.5, 1.0, 2.0, 4.0)
    sweep: tuple = (1, 2, 5, 10, 15)
    punct: tuple = ("PUNCT",)
    nonproj_threshold: float = 0.05
    jobs: int = 1

    _parsers = {"lambda_grid": _floats, "sweep": _ints, "punct": _strs}
    _aliases = {"lambda": "lam"}

    def update(self, values: dict) -> "RunConfig":
        known = {f.name: f for f in fields(self)}
        for key, raw in values.items():
            if raw is None:
                continue
            name = self._aliases.get(key, key).replace("-", "_")
            if name not in known:
                raise ConfigError(f"unknown config key {key!r}")
            cur = getattr(self, name)
            try:
                if name in self._parsers:
                    val = self._parsers[name](raw) if isinstance(raw, str) else tuple(raw)
                elif isinstance(cur, bool):
                    val = raw if isinstance(raw, bool) else str(raw).lower() in ("1", "true", "yes")
                else:
                    val = type(cur)(raw)
            except ValueError:
                raise ConfigError(f"bad value for {key!r}: {raw!r}") from None
            setattr(self, name, val)
        if self.decoder not in ("proj", "mst"):
            raise ConfigError(f"decoder must be proj or mst, not {self.decoder!r}")
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        return self

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def read_config_file(path) -> dict:
    values = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, val = line.split("=", 1)
            values[key.strip()] = val.strip()
    return values


def resolve(config_path=None, overrides: dict | None = None) -> RunConfig:
    """Defaults < SPANQA_SEED (seed only) < config file < command-line flags."""
    cfg = RunConfig()
    env_seed = os.environ.get("SPANQA_SEED")
    if env_seed:
        cfg.update({"seed": env_seed})
    if config_path:
        cfg.update(read_config_file(config_path))
    cfg.update(overrides or {})
    return cfg
