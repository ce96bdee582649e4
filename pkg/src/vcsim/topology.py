"""Three-layer fat-tree with residual compute and uplink bandwidth.

Capacities are normalized: every host has compute 1 and an access link of
rate 1 unless the FatTreeSpec says otherwise. Each rack (ToR -> aggregation) and each
pod (aggregation -> core) has one logical uplink whose capacity follows from
the oversubscription factors. The core is a single non-blocking root.

Internally all quantities are integers in units of ``1 / quantum``. The
quantum grows (and every stored value is rescaled) whenever a request uses a
denominator that does not divide it, so accounting stays exact without paying
for Fraction arithmetic in the embedding loops.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterator, List, Tuple

from .hose import Violation, subtree_counts, validate
from .request import VCRequest, as_fraction

LEVELS = ("host", "rack", "pod", "root")


class CapacityError(RuntimeError):
    """A reservation does not fit the tree's residual capacity."""


class ReleaseError(RuntimeError):
    """A placement was released that is not currently reserved."""


@dataclass(frozen=True)
class FatTreeSpec:
    pods: int
    racks_per_pod: int
    hosts_per_rack: int
    host_compute_capacity: Fraction = Fraction(1)
    host_link_capacity: Fraction = Fraction(1)
    oversub_tor_agg: Fraction = Fraction(1)
    oversub_agg_core: Fraction = Fraction(1)

    def __post_init__(self):
        for name in ("pods", "racks_per_pod", "hosts_per_rack"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
        for name in ("host_compute_capacity", "host_link_capacity",
                     "oversub_tor_agg", "oversub_agg_core"):
            object.__setattr__(self, name, as_fraction(getattr(self, name)))
        if self.host_compute_capacity <= 0 or self.host_link_capacity <= 0:
            raise ValueError("host capacities must be positive")
        if self.oversub_tor_agg < 1 or self.oversub_agg_core < 1:
            raise ValueError("oversubscription factors must be >= 1")

    @property
    def n_hosts(self) -> int:
        return self.pods * self.racks_per_pod * self.hosts_per_rack

    @property
    def n_racks(self) -> int:
        return self.pods * self.racks_per_pod

    @property
    def rack_uplink_capacity(self) -> Fraction:
        return self.hosts_per_rack * self.host_link_capacity / self.oversub_tor_agg

    @property
    def pod_uplink_capacity(self) -> Fraction:
        return self.racks_per_pod * self.rack_uplink_capacity / self.oversub_agg_core

    @property
    def total_compute(self) -> Fraction:
        return self.n_hosts * self.host_compute_capacity


@dataclass(frozen=True)
class Placement:
    """Per-host VM counts for one embedded VC.

    ``req`` is the demand actually embedded (for DRP the upgraded template).
    ``counts`` is a sorted tuple of ``(host, k)`` pairs with ``k >= 1``.
    """

    req: VCRequest
    counts: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        counts = tuple(sorted((int(h), int(k)) for h, k in dict(self.counts).items() if k))
        if any(k < 0 for _, k in counts):
            raise ValueError("negative VM count")
        if sum(k for _, k in counts) != self.req.n:
            raise ValueError(
                f"counts sum to {sum(k for _, k in counts)}, VC has {self.req.n} VMs")
        object.__setattr__(self, "counts", counts)

    @classmethod
    def of(cls, req: VCRequest, counts) -> "Placement":
        return cls(req, tuple(dict(counts).items()))

    @property
    def vc_id(self) -> int:
        return self.req.id

    @property
    def hosts(self) -> List[int]:
        return [h for h, _ in self.counts]


class FatTree:
    def __init__(self, spec: FatTreeSpec):
        self.spec = spec
        self.H = spec.hosts_per_rack
        self.R = spec.racks_per_pod
        q = 1
        for x in (spec.host_compute_capacity, spec.host_link_capacity,
                  spec.rack_uplink_capacity, spec.pod_uplink_capacity):
            q = math.lcm(q, x.denominator)
        self.quantum = q
        self.cap_comp = self._to_units(spec.host_compute_capacity)
        self.cap_hbw = self._to_units(spec.host_link_capacity)
        self.cap_rbw = self._to_units(spec.rack_uplink_capacity)
        self.cap_pbw = self._to_units(spec.pod_uplink_capacity)
        n_hosts, n_racks = spec.n_hosts, spec.n_racks
        self.comp = [self.cap_comp] * n_hosts
        self.hbw = [self.cap_hbw] * n_hosts
        self.rbw = [self.cap_rbw] * n_racks
        self.pbw = [self.cap_pbw] * spec.pods
        # aggregate residual compute, used to skip hopeless candidates quickly
        self.rack_comp = [self.cap_comp * self.H] * n_racks
        self.pod_comp = [self.cap_comp * self.H * self.R] * spec.pods
        self.active: Dict[int, Placement] = {}

    # -- exact unit conversion ------------------------------------------------

    def _to_units(self, x: Fraction) -> int:
        num = x.numerator * self.quantum
        assert num % x.denominator == 0
        return num // x.denominator

    def units(self, x) -> int:
        """``x`` in internal integer units, growing the quantum if needed."""
        x = as_fraction(x)
        if self.quantum % x.denominator:
            self._rescale(math.lcm(self.quantum, x.denominator))
        return x.numerator * (self.quantum // x.denominator)

    def demand_units(self, req: VCRequest) -> Tuple[int, int]:
        """``(c, b)`` of ``req`` in units; both denominators admitted first."""
        self.units(req.c)
        self.units(req.b)
        return self.units(req.c), self.units(req.b)

    def _rescale(self, new_q: int) -> None:
        f = new_q // self.quantum
        self.quantum = new_q
        self.cap_comp *= f
        self.cap_hbw *= f
        self.cap_rbw *= f
        self.cap_pbw *= f
        for arr in (self.comp, self.hbw, self.rbw, self.pbw, self.rack_comp, self.pod_comp):
            arr[:] = [v * f for v in arr]

    def frac(self, units: int) -> Fraction:
        return Fraction(units, self.quantum)

    # -- structure -------------------------------------------------------------

    @property
    def n_hosts(self) -> int:
        return len(self.comp)

    def rack_of(self, h: int) -> int:
        return h // self.H

    def pod_of_rack(self, r: int) -> int:
        return r // self.R

    def pod_of(self, h: int) -> int:
        return h // (self.H * self.R)

    def hosts_in_rack(self, r: int) -> range:
        return range(r * self.H, (r + 1) * self.H)

    def racks_in_pod(self, p: int) -> range:
        return range(p * self.R, (p + 1) * self.R)

    def hosts_in_pod(self, p: int) -> range:
        span = self.H * self.R
        return range(p * span, (p + 1) * span)

    def candidates(self, level: str) -> Iterator[Tuple[int, range, int]]:
        """Subtrees at ``level`` in index order as ``(index, hosts, free compute units)``."""
        if level == "host":
            for h, free in enumerate(self.comp):
                yield h, range(h, h + 1), free
        elif level == "rack":
            for r, free in enumerate(self.rack_comp):
                yield r, self.hosts_in_rack(r), free
        elif level == "pod":
            for p, free in enumerate(self.pod_comp):
                yield p, self.hosts_in_pod(p), free
        elif level == "root":
            yield 0, range(self.n_hosts), sum(self.pod_comp)
        else:
            raise ValueError(f"unknown level {level!r}")

    # -- residuals as exact fractions -----------------------------------------

    def residual_compute(self, h: int) -> Fraction:
        return self.frac(self.comp[h])

    def residual_host_bw(self, h: int) -> Fraction:
        return self.frac(self.hbw[h])

    def residual_rack_bw(self, r: int) -> Fraction:
        return self.frac(self.rbw[r])

    def residual_pod_bw(self, p: int) -> Fraction:
        return self.frac(self.pbw[p])

    def snapshot(self) -> Tuple[Tuple[Fraction, ...], ...]:
        """All residuals as fractions; equal snapshots mean identical state."""
        return tuple(tuple(self.frac(v) for v in arr)
                     for arr in (self.comp, self.hbw, self.rbw, self.pbw))

    def is_pristine(self) -> bool:
        return (all(v == self.cap_comp for v in self.comp)
                and all(v == self.cap_hbw for v in self.hbw)
                and all(v == self.cap_rbw for v in self.rbw)
                and all(v == self.cap_pbw for v in self.pbw)
                and not self.active)

    # -- reservations ----------------------------------------------------------

    def _deltas(self, p: Placement):
        cu, bu = self.demand_units(p.req)
        n = p.req.n
        hosts, racks, pods = subtree_counts(p, self)
        host_d = [(h, k * cu, min(k, n - k) * bu) for h, k in hosts.items()]
        rack_d = [(r, min(k, n - k) * bu) for r, k in racks.items()]
        pod_d = [(q, min(k, n - k) * bu) for q, k in pods.items()]
        return host_d, rack_d, pod_d

    def violations(self, p: Placement) -> List[Violation]:
        return validate(p, self)

    def fits(self, p: Placement) -> bool:
        host_d, rack_d, pod_d = self._deltas(p)
        return (all(dc <= self.comp[h] and db <= self.hbw[h] for h, dc, db in host_d)
                and all(d <= self.rbw[r] for r, d in rack_d)
                and all(d <= self.pbw[q] for q, d in pod_d))

    def reserve(self, p: Placement) -> None:
        """Subtract ``p``'s demands; all-or-nothing."""
        if p.vc_id in self.active:
            raise CapacityError(f"VC {p.vc_id} is already reserved")
        if not self.fits(p):
            bad = ", ".join(f"{v.element}: {v.demand} > {v.residual}" for v in self.violations(p))
            raise CapacityError(f"placement of VC {p.vc_id} does not fit ({bad})")
        host_d, rack_d, pod_d = self._deltas(p)
        for h, dc, db in host_d:
            self.comp[h] -= dc
            self.hbw[h] -= db
            r = h // self.H
            self.rack_comp[r] -= dc
            self.pod_comp[r // self.R] -= dc
        for r, d in rack_d:
            self.rbw[r] -= d
        for q, d in pod_d:
            self.pbw[q] -= d
        self.active[p.vc_id] = p

    def release(self, p: Placement) -> None:
        """Give back exactly what ``reserve(p)`` took."""
        if self.active.get(p.vc_id) is not p and self.active.get(p.vc_id) != p:
            raise ReleaseError(f"VC {p.vc_id} is not reserved with this placement")
        host_d, rack_d, pod_d = self._deltas(p)
        for h, dc, db in host_d:
            self.comp[h] += dc
            self.hbw[h] += db
            r = h // self.H
            self.rack_comp[r] += dc
            self.pod_comp[r // self.R] += dc
        for r, d in rack_d:
            self.rbw[r] += d
        for q, d in pod_d:
            self.pbw[q] += d
        del self.active[p.vc_id]
        for h, _, _ in host_d:
            if self.comp[h] > self.cap_comp or self.hbw[h] > self.cap_hbw:
                raise ReleaseError(f"host {h} residual exceeds its capacity after release")


def accounting_consistent(tree: FatTree) -> bool:
    """Residuals equal capacity minus the sum of every live reservation."""
    fresh = FatTree(tree.spec)
    if fresh.quantum != tree.quantum:
        fresh._rescale(tree.quantum)
    for p in tree.active.values():
        fresh.reserve(p)
    return (fresh.comp == tree.comp and fresh.hbw == tree.hbw
            and fresh.rbw == tree.rbw and fresh.pbw == tree.pbw
            and fresh.rack_comp == tree.rack_comp and fresh.pod_comp == tree.pod_comp)


def build(spec: FatTreeSpec) -> FatTree:
    return FatTree(spec)
