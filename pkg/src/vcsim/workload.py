"""Random VC request streams: Poisson arrivals, exponential lifetimes,
geometric VC sizes and per-VM demands drawn from a small set of values."""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, List, TextIO, Union

import numpy as np

from .request import VCRequest, as_fraction
from .topology import FatTreeSpec

DEFAULT_DEMANDS = (Fraction(1, 8), Fraction(1, 4), Fraction(1, 2))
REPLAY_HEADER = "# id,arrival,duration,n,c,b"


@dataclass(frozen=True)
class WorkloadConfig:
    mean_n: float = 49
    demand_values: tuple = field(default=DEFAULT_DEMANDS)
    target_load: Fraction = Fraction(4, 5)
    mean_duration: float = 1.0
    total_requests: int = 80000
    warmup_requests: int = 10000
    seed: int = 0

    def __post_init__(self):
        vals = tuple(as_fraction(v) for v in self.demand_values)
        if not vals:
            raise ValueError("demand_values must not be empty")
        if any(not 0 < v <= 1 for v in vals):
            raise ValueError(f"demand values must lie in (0, 1], got {[str(v) for v in vals]}")
        object.__setattr__(self, "demand_values", vals)
        object.__setattr__(self, "target_load", as_fraction(self.target_load))
        if not 0 < self.target_load <= 1:
            raise ValueError(f"target_load must lie in (0, 1], got {self.target_load}")
        if self.mean_n < 1:
            raise ValueError("mean_n must be at least 1")
        if self.mean_duration <= 0:
            raise ValueError("mean_duration must be positive")
        if self.total_requests < 0 or not 0 <= self.warmup_requests:
            raise ValueError("request counts must be non-negative")
        if self.total_requests and self.warmup_requests >= self.total_requests:
            raise ValueError("warmup_requests must be smaller than total_requests")

    @property
    def mean_demand(self) -> Fraction:
        return sum(self.demand_values, Fraction(0)) / len(self.demand_values)


def arrival_rate_for(config: WorkloadConfig, tree_spec: FatTreeSpec) -> float:
    """Poisson rate that keeps the expected compute load at ``target_load``.

    By Little's law the mean number of live VCs is ``rate * mean_duration``,
    each using ``E[n] * E[c]`` hosts' worth of compute on average.
    """
    per_vc = config.mean_n * float(config.mean_demand)
    return float(config.target_load) * float(tree_spec.total_compute) / (
        config.mean_duration * per_vc)


def generate(config: WorkloadConfig, tree_spec: FatTreeSpec) -> List[VCRequest]:
    """Materialize the request stream for ``config``; deterministic in the seed."""
    rng = np.random.default_rng(config.seed)
    m = config.total_requests
    rate = arrival_rate_for(config, tree_spec)
    gaps = rng.exponential(1.0 / rate, size=m)
    durations = rng.exponential(config.mean_duration, size=m)
    sizes = rng.geometric(1.0 / config.mean_n, size=m)
    vals = config.demand_values
    ci = rng.integers(len(vals), size=m)
    bi = rng.integers(len(vals), size=m)

    out = []
    t = 0.0
    for i in range(m):
        nxt = t + float(gaps[i])
        while nxt <= t:
            # zero gap (or one lost to rounding): keep events strictly ordered
            nxt = t + float(rng.exponential(1.0 / rate))
        t = nxt
        d = float(durations[i])
        while d <= 0.0:
            d = float(rng.exponential(config.mean_duration))
        out.append(VCRequest(i, int(sizes[i]), vals[ci[i]], vals[bi[i]], t, d))
    return out


def dump(stream: Iterable[VCRequest], dest: Union[str, Path, TextIO]) -> None:
    """Write one request per line; times use ``repr`` so floats round-trip."""
    lines = [REPLAY_HEADER]
    for r in stream:
        lines.append(f"{r.id},{r.arrival!r},{r.duration!r},{r.n},{r.c},{r.b}")
    text = "\n".join(lines) + "\n"
    if isinstance(dest, (str, Path)):
        Path(dest).write_text(text)
    else:
        dest.write(text)


def load(src: Union[str, Path, TextIO]) -> List[VCRequest]:
    if isinstance(src, (str, Path)):
        text = Path(src).read_text()
    else:
        text = src.read()
    out = []
    for lineno, line in enumerate(io.StringIO(text), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 6:
            raise ValueError(f"line {lineno}: expected 6 fields, got {len(parts)}")
        rid, arrival, duration, n, c, b = parts
        out.append(VCRequest(int(rid), int(n), Fraction(c), Fraction(b),
                             float(arrival), float(duration)))
    for a, b in zip(out, out[1:]):
        if not b.arrival > a.arrival:
            raise ValueError(f"arrivals not strictly increasing at request {b.id}")
    return out
