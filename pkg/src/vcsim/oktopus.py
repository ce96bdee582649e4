"""Oktopus-style dense embedding.

Levels are tried bottom-up (single host, rack, pod, whole tree). Inside a
candidate subtree hosts are filled greedily in index order, each taking as
many VMs as it can. A host or non-candidate subtree that does not hold the
whole VC must be able to carry ``k * b`` on its uplink, which bounds ``k``
by ``floor(residual / b)``; this never under-reserves, since the hose demand
``min(k, n - k) * b`` is at most ``k * b``.
"""

from __future__ import annotations

from typing import Dict, Optional

from .request import VCRequest
from .topology import LEVELS, FatTree, Placement


def max_vms_on_host(free_compute, free_bw, req: VCRequest, limit: Optional[int] = None) -> int:
    """How many of ``req``'s VMs a host with the given residuals takes.

    Full collocation (``k == n``) needs no uplink bandwidth, so it is
    checked first. Otherwise ``k`` is capped by compute and by ``k * b``
    fitting on the access link.
    """
    n = req.n
    limit = n if limit is None else min(limit, n)
    if limit == n and n * req.c <= free_compute:
        return n
    return max(0, min(limit, free_compute // req.c, free_bw // req.b))


def _fill_hosts(tree: FatTree, hosts, limit, n, cu, bu, counts: Dict[int, int]) -> int:
    comp, hbw = tree.comp, tree.hbw
    placed = 0
    for h in hosts:
        left = limit - placed
        if left == 0:
            break
        if left == n and n * cu <= comp[h]:
            k = n
        else:
            k = min(left, comp[h] // cu, hbw[h] // bu)
        if k > 0:
            counts[h] = k
            placed += k
    return placed


def _fill_racks(tree: FatTree, racks, limit, n, cu, bu, counts) -> int:
    placed = 0
    for r in racks:
        left = limit - placed
        if left == 0:
            break
        budget = min(left, tree.rbw[r] // bu)
        if budget > 0 and tree.rack_comp[r] >= cu:
            placed += _fill_hosts(tree, tree.hosts_in_rack(r), budget, n, cu, bu, counts)
    return placed


def _fill_pods(tree: FatTree, pods, limit, n, cu, bu, counts) -> int:
    placed = 0
    for p in pods:
        left = limit - placed
        if left == 0:
            break
        budget = min(left, tree.pbw[p] // bu)
        if budget > 0 and tree.pod_comp[p] >= cu:
            placed += _fill_racks(tree, tree.racks_in_pod(p), budget, n, cu, bu, counts)
    return placed


def embed_at(tree: FatTree, req: VCRequest, level: str, index: int) -> Optional[Placement]:
    """Try to put all of ``req`` inside one subtree; None if it does not fit."""
    n = req.n
    cu, bu = tree.demand_units(req)
    counts: Dict[int, int] = {}
    if level == "host":
        placed = n if n * cu <= tree.comp[index] else 0
        counts[index] = n
    elif level == "rack":
        placed = _fill_hosts(tree, tree.hosts_in_rack(index), n, n, cu, bu, counts)
    elif level == "pod":
        placed = _fill_racks(tree, tree.racks_in_pod(index), n, n, cu, bu, counts)
    else:
        placed = _fill_pods(tree, range(tree.spec.pods), n, n, cu, bu, counts)
    if placed != n:
        return None
    return Placement.of(req, counts)


def embed(tree: FatTree, req: VCRequest) -> Optional[Placement]:
    """First feasible dense placement, scanning levels and subtrees in order."""
    cu, _ = tree.demand_units(req)
    need = req.n * cu
    for level in LEVELS:
        for index, _, free in tree.candidates(level):
            if free < need:
                continue
            p = embed_at(tree, req, level, index)
            if p is not None:
                assert tree.fits(p), f"greedy fill produced an infeasible placement for VC {req.id}"
                return p
    return None
