"""Hose-model bandwidth for virtual clusters.

A VC connects its ``n`` VMs to one virtual switch at rate ``b`` each. If a
subtree holds ``k`` of those VMs, at most ``min(k, n - k) * b`` can cross the
subtree's uplink in either direction, so that is what gets reserved there.
VMs collocated on one host talk without touching any link.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Tuple

Element = Tuple[str, int]


def uplink_demand(k, n, b):
    """Worst-case traffic over a cut separating ``k`` of ``n`` VMs."""
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got k={k}, n={n}")
    return min(k, n - k) * b


def subtree_counts(placement, tree) -> Tuple[Dict[int, int], Dict[int, int], Dict[int, int]]:
    """Per-host, per-rack and per-pod VM counts of a placement."""
    hosts = dict(placement.counts)
    racks: Dict[int, int] = defaultdict(int)
    pods: Dict[int, int] = defaultdict(int)
    for h, k in hosts.items():
        r = tree.rack_of(h)
        racks[r] += k
        pods[tree.pod_of_rack(r)] += k
    return hosts, dict(racks), dict(pods)


def demands_of(placement, tree) -> Dict[Element, Fraction]:
    """Bandwidth the placement reserves on every uplink it touches.

    Keys are ``("host", i)``, ``("rack", r)`` and ``("pod", p)``; elements
    with zero demand are included so callers can see what was considered.
    """
    req = placement.req
    hosts, racks, pods = subtree_counts(placement, tree)
    out: Dict[Element, Fraction] = {}
    for kind, counts in (("host", hosts), ("rack", racks), ("pod", pods)):
        for i, k in sorted(counts.items()):
            out[(kind, i)] = uplink_demand(k, req.n, req.b)
    return out


@dataclass(frozen=True)
class Violation:
    element: Element
    demand: Fraction
    residual: Fraction


def validate(placement, tree) -> List[Violation]:
    """Overloaded elements for ``placement`` against the tree's residuals.

    An empty list means the placement is feasible. Host compute shows up as
    ``("compute", i)``.
    """
    req = placement.req
    out: List[Violation] = []
    for h, k in placement.counts:
        need = k * req.c
        have = tree.residual_compute(h)
        if need > have:
            out.append(Violation(("compute", h), need, have))
    residual = {
        "host": tree.residual_host_bw,
        "rack": tree.residual_rack_bw,
        "pod": tree.residual_pod_bw,
    }
    for (kind, i), need in demands_of(placement, tree).items():
        have = residual[kind](i)
        if need > have:
            out.append(Violation((kind, i), need, have))
    return out


def is_feasible(placement, tree) -> bool:
    return not validate(placement, tree)
