"""
Run configuration files: parsing, validation and canonical serialization.

Layout (JSON or YAML):

    protocol:    ProtocolParams fields (p_d and c0 optional)
    cavity:      CavityParams fields (optional section)
    sim:         trials, seed, memory_coherence_time, time_model, workers (optional section)
    output:      csv | json | pretty
    output_path: file to write instead of stdout
"""

import os
from dataclasses import MISSING, dataclass, fields, replace
from typing import Any, Dict, Mapping, Optional

import config
from .analytics import CavityParams, ProtocolParams
from .common import ConfigError, canonical_json, load_structured, log
from .simulation import SimConfig

TOP_LEVEL_KEYS = ("protocol", "cavity", "sim", "output", "output_path")
SIM_KEYS = tuple(f.name for f in fields(SimConfig) if f.name != "params")


@dataclass(frozen=True)
class RunConfig:
    protocol: ProtocolParams
    cavity: Optional[CavityParams] = None
    sim: Optional[SimConfig] = None
    output: str = config.DEFAULT_OUTPUT
    output_path: Optional[str] = None


def _section(data: Mapping[str, Any], name: str, cls, allowed, skip=()) -> Dict[str, Any]:
    """Check keys of one section against a dataclass and return its kwargs."""
    section = data[name]
    if not isinstance(section, Mapping):
        raise ConfigError(f"{name}: expected a mapping")
    for key in section:
        if key not in allowed:
            raise ConfigError(f"{name}.{key}: unknown key")
    for f in fields(cls):
        if f.name in skip:
            continue
        required = f.default is MISSING and f.default_factory is MISSING
        if required and f.name not in section:
            raise ConfigError(f"{name}.{f.name}: missing required field")
    return dict(section)


def parse_run_config(data: Mapping[str, Any]) -> RunConfig:
    if not isinstance(data, Mapping):
        raise ConfigError("config: top level must be a mapping")
    for key in data:
        if key not in TOP_LEVEL_KEYS:
            raise ConfigError(f"{key}: unknown key")
    if "protocol" not in data:
        raise ConfigError("protocol: missing required section")

    protocol = ProtocolParams(**_section(data, "protocol", ProtocolParams, ProtocolParams.field_names()))

    cavity = None
    if data.get("cavity") is not None:
        cavity = CavityParams(**_section(data, "cavity", CavityParams, CavityParams.field_names()))

    sim = None
    if data.get("sim") is not None:
        kwargs = _section(data, "sim", SimConfig, SIM_KEYS, skip=("params",))
        sim = SimConfig(params=protocol, **kwargs)

    output = data.get("output", config.DEFAULT_OUTPUT)
    if output not in config.OUTPUT_FORMATS:
        raise ConfigError(f"output: expected one of {config.OUTPUT_FORMATS}, got {output!r}")
    output_path = data.get("output_path")
    if output_path is not None and not isinstance(output_path, str):
        raise ConfigError(f"output_path: expected a string, got {output_path!r}")

    return RunConfig(protocol=protocol, cavity=cavity, sim=sim, output=output, output_path=output_path)


def to_dict(cfg: RunConfig) -> Dict[str, Any]:
    """Full dict form, defaults included."""
    data: Dict[str, Any] = {
        "protocol": {name: getattr(cfg.protocol, name) for name in ProtocolParams.field_names()},
        "cavity": None,
        "sim": None,
        "output": cfg.output,
        "output_path": cfg.output_path,
    }
    if cfg.cavity is not None:
        data["cavity"] = {name: getattr(cfg.cavity, name) for name in CavityParams.field_names()}
    if cfg.sim is not None:
        data["sim"] = {name: getattr(cfg.sim, name) for name in SIM_KEYS}
    return data


def dumps(cfg: RunConfig) -> str:
    return canonical_json(to_dict(cfg))


def load_run_config(path: str) -> RunConfig:
    cfg = parse_run_config(load_structured(path))
    log(f"Loaded run config from {path}", "DEBUG")
    return cfg


def resolve_config_path(explicit: Optional[str] = None) -> str:
    """--config, else the environment variable, else the bundled preset."""
    if explicit:
        return explicit
    from_env = os.environ.get(config.CONFIG_ENV_VAR)
    if from_env:
        return from_env
    return config.PAPER_PRESET


def with_overrides(cfg: RunConfig, output: Optional[str] = None, output_path: Optional[str] = None,
                   seed: Optional[int] = None, trials: Optional[int] = None,
                   workers: Optional[int] = None) -> RunConfig:
    """Apply command-line overrides. Sim overrides need a sim section."""
    if output is not None:
        if output not in config.OUTPUT_FORMATS:
            raise ConfigError(f"output: expected one of {config.OUTPUT_FORMATS}, got {output!r}")
        cfg = replace(cfg, output=output)
    if output_path is not None:
        cfg = replace(cfg, output_path=output_path)
    sim_overrides = {k: v for k, v in (("seed", seed), ("trials", trials), ("workers", workers))
                     if v is not None}
    if sim_overrides:
        if cfg.sim is None:
            raise ConfigError(f"sim: missing section, cannot apply {sorted(sim_overrides)}")
        cfg = replace(cfg, sim=replace(cfg.sim, **sim_overrides))
    return cfg
