"""Simulator configuration and its TOML form.

Every section of the TOML file maps onto one dataclass; unknown keys are
rejected so typos do not silently fall back to defaults.
"""
from __future__ import annotations

import dataclasses
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import tomli_w

from .arbiter import ArbiterConfig
from .h2p_cache import H2PConfig
from .hit import HitConfig
from .perceptrons import GlobalPerceptronConfig, LocalPerceptronConfig
from .tage_scl import TageConfig

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class ConfigError(ValueError):
    pass


@dataclass
class SimConfig:
    tage: TageConfig = field(default_factory=TageConfig)
    hit: HitConfig = field(default_factory=HitConfig)
    h2p: H2PConfig = field(default_factory=H2PConfig)
    local: LocalPerceptronConfig = field(default_factory=LocalPerceptronConfig)
    global_: GlobalPerceptronConfig = field(default_factory=GlobalPerceptronConfig)
    arbiter: ArbiterConfig = field(default_factory=ArbiterConfig)
    bullseye_enabled: bool = True
    penalty_cycles: int = 20
    top_k: int = 10

    def validate(self) -> None:
        try:
            for part in (self.tage, self.hit, self.h2p, self.local, self.global_, self.arbiter):
                part.validate()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.penalty_cycles < 1 or self.top_k < 1:
            raise ConfigError("penalty_cycles and top_k must be >= 1")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["global"] = d.pop("global_")
        return d

    def to_toml(self) -> str:
        d = self.to_dict()
        scalars = {k: v for k, v in d.items() if not isinstance(v, dict)}
        tables = {k: v for k, v in d.items() if isinstance(v, dict)}
        return tomli_w.dumps({"sim": scalars, **tables})

    @classmethod
    def from_dict(cls, d: dict) -> SimConfig:
        d = dict(d)
        sim = dict(d.pop("sim", {}))
        sections = {
            "tage": TageConfig, "hit": HitConfig, "h2p": H2PConfig,
            "local": LocalPerceptronConfig, "global": GlobalPerceptronConfig,
            "arbiter": ArbiterConfig,
        }
        kwargs = {}
        for name, klass in sections.items():
            if name in d:
                kwargs["global_" if name == "global" else name] = _build(klass, d.pop(name), name)
        for key in list(d):
            if not isinstance(d[key], dict):
                sim[key] = d.pop(key)
        if d:
            raise ConfigError(f"unknown config sections: {sorted(d)}")
        top = {f.name for f in dataclasses.fields(cls)} - set(sections) - {"global_"}
        bad = set(sim) - top
        if bad:
            raise ConfigError(f"unknown [sim] keys: {sorted(bad)}")
        cfg = cls(**kwargs, **sim)
        cfg.validate()
        return cfg

    @classmethod
    def from_toml(cls, text: str) -> SimConfig:
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"bad TOML: {exc}") from None
        return cls.from_dict(data)

    @classmethod
    def load(cls, path: str | Path) -> SimConfig:
        return cls.from_toml(Path(path).read_text())


def _build(klass, values: dict, section: str):
    names = {f.name for f in dataclasses.fields(klass)}
    bad = set(values) - names
    if bad:
        raise ConfigError(f"unknown keys in [{section}]: {sorted(bad)}")
    return klass(**values)


def preset_path(name: str) -> Path:
    return Path(str(resources.files("bullseye") / "presets" / name))


def load_preset(name: str = "default.toml") -> SimConfig:
    return SimConfig.load(preset_path(name))
