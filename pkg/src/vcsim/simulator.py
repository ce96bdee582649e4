"""Discrete-event simulation of online VC embedding and pricing.

Each arrival is embedded immediately or rejected; accepted VCs hold their
reservation until departure. Requests before ``warmup_requests`` occupy the
datacenter like any other but are not scored.

The headline metric is the resource sum: an accepted VC(n, c, b) contributes
``8 n c`` VM slots and ``8 n b`` bandwidth units (both in 1/8-host units)
while it is alive. Under DRP the *upgraded* demand is embedded, but the
credit is always the original request, since the customer gains nothing from
the over-provisioning.
"""

from __future__ import annotations

import csv
import heapq
import io
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from . import oktopus, tetris
from .pricing import SCHEMES, LambdaParams, UnitPrices, format_money, quote
from .request import TemplateSet, VCRequest, upgraded
from .topology import FatTree, FatTreeSpec, build
from .workload import WorkloadConfig, generate

log = logging.getLogger(__name__)

EMBEDDERS: Dict[str, Callable] = {"oktopus": oktopus.embed, "tetris": tetris.embed}
SLOT_UNIT = 8  # resource sums are reported in 1/8-host units

SERIES_HEADER = ("time", "slots_sum", "bw_sum", "accepted", "rejected", "revenue")
SUMMARY_HEADER = ("scenario", "embedder", "scheme", "oversub", "load", "seed",
                  "mean_slots_sum", "mean_bw_sum", "acceptance", "revenue")


class SimulationError(RuntimeError):
    """The simulation reached a state that only a bug can produce."""


@dataclass(frozen=True)
class Scenario:
    tree_spec: FatTreeSpec
    workload: WorkloadConfig
    embedder: str = "tetris"
    scheme: str = "dsp"
    prices: UnitPrices = field(default_factory=UnitPrices)
    lambdas: LambdaParams = field(default_factory=LambdaParams)
    templates: TemplateSet = field(default_factory=TemplateSet)
    name: str = ""

    def __post_init__(self):
        if self.embedder not in EMBEDDERS:
            raise ValueError(f"unknown embedder {self.embedder!r}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown pricing scheme {self.scheme!r}")
        if self.scheme == "drp" and not self.templates.covers(self.workload.demand_values):
            raise ValueError("DRP templates do not cover every demand value")
        if not self.name:
            object.__setattr__(self, "name", f"{self.embedder}+{self.scheme}")


@dataclass
class MetricsReport:
    scenario: str
    embedder: str
    scheme: str
    mean_slots_sum: float = 0.0
    mean_bw_sum: float = 0.0
    accepted: int = 0
    rejected: int = 0
    revenue: Fraction = Fraction(0)
    revenue_by_scheme: Dict[str, Fraction] = field(default_factory=dict)
    window: Tuple[float, float] = (0.0, 0.0)
    # duration-weighted VM totals of accepted skewed requests, for calibration
    skew: Dict[str, Dict[str, Fraction]] = field(default_factory=dict)
    series: List[tuple] = field(default_factory=list)

    @property
    def acceptance(self) -> float:
        total = self.accepted + self.rejected
        return self.accepted / total if total else 0.0

    def scalars(self) -> dict:
        return {
            "scenario": self.scenario,
            "embedder": self.embedder,
            "scheme": self.scheme,
            "mean_slots_sum": self.mean_slots_sum,
            "mean_bw_sum": self.mean_bw_sum,
            "accepted": self.accepted,
            "rejected": self.rejected,
            "acceptance": self.acceptance,
            "revenue": str(self.revenue),
            "revenue_by_scheme": {k: str(v) for k, v in self.revenue_by_scheme.items()},
            "window": list(self.window),
            "skew": {d: {k: str(v) for k, v in s.items()} for d, s in self.skew.items()},
        }


def _fmt(x) -> str:
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else repr(float(x))
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_series(report: MetricsReport, dest) -> None:
    w = csv.writer(dest, lineterminator="\n")
    w.writerow(SERIES_HEADER)
    for t, slots, bw, acc, rej, rev in report.series:
        w.writerow((repr(t), _fmt(slots), _fmt(bw), acc, rej, format_money(rev)))


def series_csv(report: MetricsReport) -> str:
    buf = io.StringIO()
    write_series(report, buf)
    return buf.getvalue()


def summary_row(report: MetricsReport, scenario: Scenario) -> tuple:
    return (scenario.name, scenario.embedder, scenario.scheme,
            _fmt(scenario.tree_spec.oversub_tor_agg), _fmt(scenario.workload.target_load),
            scenario.workload.seed, f"{report.mean_slots_sum:.6f}",
            f"{report.mean_bw_sum:.6f}", f"{report.acceptance:.6f}",
            format_money(report.revenue))


def run(scenario: Scenario, stream: Optional[Sequence[VCRequest]] = None,
        on_event: Optional[Callable[[FatTree, float], None]] = None) -> MetricsReport:
    """Simulate ``scenario`` and return its metrics.

    ``stream`` replaces the generated workload (replay). ``on_event`` is
    called with the tree after every arrival and departure.

    Scoring covers the window from the first scored arrival to the last
    arrival; the tail while the datacenter drains is left out so paired
    scenarios share the same window. With a single scored request the
    window runs to the end of the drain instead.
    """
    wl = scenario.workload
    if stream is None:
        stream = generate(wl, scenario.tree_spec)
    tree = build(scenario.tree_spec)
    embed = EMBEDDERS[scenario.embedder]
    warmup = min(wl.warmup_requests, len(stream))
    report = MetricsReport(scenario.name, scenario.embedder, scenario.scheme,
                           revenue_by_scheme={s: Fraction(0) for s in SCHEMES})
    skew = {d: {"vm_time": Fraction(0), "c": Fraction(0), "b": Fraction(0)}
            for d in ("c>b", "b>c")}
    if warmup >= len(stream):
        report.skew = skew
        _drain_check(tree, [])
        return report

    start = stream[warmup].arrival
    end = stream[-1].arrival
    horizon = end if end > start else float("inf")
    slots = bw = Fraction(0)
    slots_int = bw_int = 0.0
    last_t = start
    departures: list = []
    seq = 0

    def advance(t: float) -> None:
        nonlocal slots_int, bw_int, last_t
        t = min(t, horizon)
        if t > last_t:
            slots_int += float(slots) * (t - last_t)
            bw_int += float(bw) * (t - last_t)
            last_t = t

    def sample(t: float) -> None:
        if t >= start:
            report.series.append((t, slots, bw, report.accepted, report.rejected,
                                  report.revenue))

    def depart_until(t: float) -> None:
        nonlocal slots, bw
        while departures and departures[0][0] <= t:
            dt, _, placement, scored, credit = heapq.heappop(departures)
            advance(dt)
            tree.release(placement)
            if scored:
                slots -= credit[0]
                bw -= credit[1]
            if on_event:
                on_event(tree, dt)
            sample(dt)

    for i, req in enumerate(stream):
        depart_until(req.arrival)
        advance(req.arrival)
        scored = i >= warmup
        target = upgraded(req, scenario.templates) if scenario.scheme == "drp" else req
        placement = embed(tree, target)
        if placement is None:
            if scored:
                report.rejected += 1
        else:
            try:
                tree.reserve(placement)
            except Exception as e:
                raise SimulationError(f"embedder returned an unusable placement: {e}") from e
            credit = (SLOT_UNIT * req.n * req.c, SLOT_UNIT * req.n * req.b)
            heapq.heappush(departures,
                           (req.arrival + req.duration, seq, placement, scored, credit))
            seq += 1
            if scored:
                report.accepted += 1
                slots += credit[0]
                bw += credit[1]
                dur = Fraction(req.duration)
                for s in SCHEMES:
                    amount = quote(s, req, scenario.prices, scenario.lambdas).total * dur
                    report.revenue_by_scheme[s] += amount
                report.revenue = report.revenue_by_scheme[scenario.scheme]
                if req.c != req.b:
                    d = skew["c>b" if req.c > req.b else "b>c"]
                    w = req.n * dur
                    d["vm_time"] += w
                    d["c"] += w * req.c
                    d["b"] += w * req.b
        if on_event:
            on_event(tree, req.arrival)
        sample(req.arrival)

    # the integral stops at the horizon; departures after it only free capacity
    depart_until(float("inf"))
    if end <= start:
        end = last_t

    span = end - start
    report.mean_slots_sum = slots_int / span if span > 0 else 0.0
    report.mean_bw_sum = bw_int / span if span > 0 else 0.0
    report.window = (start, end)
    report.skew = skew
    _drain_check(tree, departures)
    return report


def _drain_check(tree: FatTree, departures) -> None:
    if departures or not tree.is_pristine():
        raise SimulationError("residual capacity not restored after all departures")


def _run_one(args):
    scenario, stream = args
    return run(scenario, stream)


def default_threads() -> int:
    env = os.environ.get("VCSIM_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            log.warning("ignoring non-integer VCSIM_THREADS=%r", env)
    return os.cpu_count() or 1


def run_all(scenarios: Sequence[Scenario], streams: Optional[Sequence] = None,
            threads: Optional[int] = None) -> List[MetricsReport]:
    """Run independent scenarios, in parallel processes when allowed."""
    streams = list(streams) if streams is not None else [None] * len(scenarios)
    threads = default_threads() if threads is None else threads
    jobs = list(zip(scenarios, streams))
    if threads <= 1 or len(jobs) <= 1:
        return [_run_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=min(threads, len(jobs))) as pool:
        return list(pool.map(_run_one, jobs))


@dataclass
class Comparison:
    scenarios: List[Scenario]
    reports: List[MetricsReport]

    def relative(self, i: int, j: int) -> Tuple[float, float]:
        """``(slots, bw)`` relative gain of scenario ``j`` over scenario ``i``."""
        a, b = self.reports[i], self.reports[j]
        rs = (b.mean_slots_sum - a.mean_slots_sum) / a.mean_slots_sum if a.mean_slots_sum else 0.0
        rb = (b.mean_bw_sum - a.mean_bw_sum) / a.mean_bw_sum if a.mean_bw_sum else 0.0
        return rs, rb

    def table(self) -> str:
        lines = [f"{'scenario':<22}{'slots':>12}{'bw':>12}{'accept':>9}{'revenue':>14}"]
        for s, r in zip(self.scenarios, self.reports):
            lines.append(f"{s.name:<22}{r.mean_slots_sum:>12.2f}{r.mean_bw_sum:>12.2f}"
                         f"{r.acceptance:>9.3f}{format_money(r.revenue):>14}")
        base = 0
        for j in range(1, len(self.reports)):
            rs, rb = self.relative(base, j)
            lines.append(f"{self.scenarios[j].name} vs {self.scenarios[base].name}: "
                         f"slots {rs:+.2%}, bw {rb:+.2%}")
        return "\n".join(lines)


def compare(scenarios: Sequence[Scenario], threads: Optional[int] = None) -> Comparison:
    """Run scenarios on one shared request stream and compare them pairwise."""
    if not scenarios:
        raise ValueError("nothing to compare")
    wl = scenarios[0].workload
    total = scenarios[0].tree_spec.total_compute
    for s in scenarios[1:]:
        if s.workload != wl or s.tree_spec.total_compute != total:
            raise ValueError("paired comparison needs identical workloads")
    stream = generate(wl, scenarios[0].tree_spec)
    reports = run_all(scenarios, [stream] * len(scenarios), threads)
    return Comparison(list(scenarios), reports)
