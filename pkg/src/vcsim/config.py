"""Experiment configuration: JSON files with exact fractions as strings.

Example::

    {
      "topology": {"pods": 2, "racks_per_pod": 4, "hosts_per_rack": 8,
                   "oversub_tor_agg": "4"},
      "workload": {"mean_n": 12, "demand_values": ["1/8", "1/4", "1/2"],
                   "target_load": "4/5", "total_requests": 4000,
                   "warmup_requests": 500},
      "prices": {"p_c": "1", "p_b": "1"},
      "lambdas": {"lambda_c": "1/6", "lambda_b": "1/6"},
      "templates": ["1/8", "1/4", "1/2"],
      "arms": [["oktopus", "drp"], ["oktopus", "dsp"], ["tetris", "dsp"]],
      "sweep": {"oversub": ["4"], "load": ["4/5"]},
      "seeds": [1, 2, 3, 4, 5]
    }

Every section is optional; missing keys take the defaults below.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Tuple

from .pricing import SCHEMES, LambdaParams, UnitPrices
from .request import TemplateSet, as_fraction
from .simulator import EMBEDDERS, Scenario
from .topology import FatTreeSpec
from .workload import WorkloadConfig

DEFAULT_ARMS = (("oktopus", "drp"), ("oktopus", "dsp"), ("tetris", "dsp"))


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    tree_spec: FatTreeSpec
    workload: WorkloadConfig
    prices: UnitPrices = field(default_factory=UnitPrices)
    lambdas: LambdaParams = field(default_factory=LambdaParams)
    templates: TemplateSet = field(default_factory=TemplateSet)
    arms: Tuple[Tuple[str, str], ...] = DEFAULT_ARMS
    oversub: Tuple[Fraction, ...] = (Fraction(4),)
    loads: Tuple[Fraction, ...] = (Fraction(4, 5),)
    seeds: Tuple[int, ...] = (1,)

    def __post_init__(self):
        if not (self.arms and self.oversub and self.loads and self.seeds):
            raise ConfigError("arms, oversub, load and seed lists must be non-empty")
        for emb, scheme in self.arms:
            if emb not in EMBEDDERS:
                raise ConfigError(f"unknown embedder {emb!r}")
            if scheme not in SCHEMES:
                raise ConfigError(f"unknown pricing scheme {scheme!r}")

    def cells(self):
        """``(oversub, load, seed)`` grid in a fixed order."""
        for ov in self.oversub:
            for load in self.loads:
                for seed in self.seeds:
                    yield ov, load, seed

    def scenarios_for(self, ov, load, seed) -> List[Scenario]:
        spec = replace(self.tree_spec, oversub_tor_agg=ov)
        wl = replace(self.workload, target_load=load, seed=seed)
        return [Scenario(spec, wl, emb, scheme, self.prices, self.lambdas, self.templates)
                for emb, scheme in self.arms]


def _section(raw: Dict[str, Any], key: str) -> Dict[str, Any]:
    sec = raw.get(key, {})
    if not isinstance(sec, dict):
        raise ConfigError(f"'{key}' must be an object")
    return sec


def _frac(v, where: str) -> Fraction:
    try:
        return as_fraction(v)
    except (ValueError, ZeroDivisionError, TypeError) as e:
        raise ConfigError(f"{where}: cannot read {v!r} as a number") from e


def from_dict(raw: Dict[str, Any]) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    known = {"topology", "workload", "prices", "lambdas", "templates", "arms", "sweep", "seeds"}
    extra = set(raw) - known
    if extra:
        raise ConfigError(f"unknown config keys: {sorted(extra)}")
    try:
        topo = dict(_section(raw, "topology"))
        for k in ("host_compute_capacity", "host_link_capacity",
                  "oversub_tor_agg", "oversub_agg_core"):
            if k in topo:
                topo[k] = _frac(topo[k], f"topology.{k}")
        spec = FatTreeSpec(**{"pods": 2, "racks_per_pod": 4, "hosts_per_rack": 8, **topo})

        wl_raw = dict(_section(raw, "workload"))
        if "demand_values" in wl_raw:
            wl_raw["demand_values"] = tuple(_frac(v, "workload.demand_values")
                                            for v in wl_raw["demand_values"])
        if "target_load" in wl_raw:
            wl_raw["target_load"] = _frac(wl_raw["target_load"], "workload.target_load")
        wl = WorkloadConfig(**wl_raw)

        prices = UnitPrices(**{k: _frac(v, f"prices.{k}")
                               for k, v in _section(raw, "prices").items()})
        lambdas = LambdaParams(**{k: _frac(v, f"lambdas.{k}")
                                  for k, v in _section(raw, "lambdas").items()})
        templates = (TemplateSet.of(_frac(v, "templates") for v in raw["templates"])
                     if "templates" in raw else TemplateSet())
        arms = tuple(tuple(a) for a in raw.get("arms", DEFAULT_ARMS))
        if any(len(a) != 2 for a in arms):
            raise ConfigError("each arm must be [embedder, scheme]")
        sweep = _section(raw, "sweep")
        oversub = tuple(_frac(v, "sweep.oversub") for v in sweep.get("oversub", [spec.oversub_tor_agg]))
        loads = tuple(_frac(v, "sweep.load") for v in sweep.get("load", [wl.target_load]))
        seeds = tuple(int(s) for s in raw.get("seeds", [wl.seed]))
        cfg = ExperimentConfig(spec, wl, prices, lambdas, templates, arms, oversub, loads, seeds)
        # surface bad sweep values (oversub < 1, load > 1, uncovered templates) now
        for cell in cfg.cells():
            cfg.scenarios_for(*cell)
        return cfg
    except ConfigError:
        raise
    except (TypeError, ValueError) as e:
        raise ConfigError(str(e)) from e


def load_file(path) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON ({e})") from e
    return from_dict(raw)


PRESETS: Dict[str, Dict[str, Any]] = {
    # full-size datacenter and request count; hours of CPU time
    "paper_defaults": {
        "topology": {"pods": 10, "racks_per_pod": 40, "hosts_per_rack": 40,
                     "oversub_tor_agg": "4", "oversub_agg_core": "1"},
        "workload": {"mean_n": 49, "target_load": "4/5", "total_requests": 80000,
                     "warmup_requests": 10000},
        "seeds": [1],
    },
    # scaled-down datacenter used by the acceptance suite
    "desk": {
        "topology": {"pods": 2, "racks_per_pod": 4, "hosts_per_rack": 8,
                     "oversub_tor_agg": "4", "oversub_agg_core": "1"},
        "workload": {"mean_n": 12, "target_load": "4/5", "total_requests": 4000,
                     "warmup_requests": 500},
        "seeds": [1, 2, 3, 4, 5],
    },
}


def resolve(name_or_path: str) -> ExperimentConfig:
    if name_or_path in PRESETS:
        return from_dict(PRESETS[name_or_path])
    if not Path(name_or_path).exists():
        raise ConfigError(
            f"no preset or file named {name_or_path!r} (presets: {', '.join(PRESETS)})")
    return load_file(name_or_path)
