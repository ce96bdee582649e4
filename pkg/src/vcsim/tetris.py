"""Tetris: balance-aware VC embedding.

Like Oktopus it walks the levels of the fat-tree bottom-up, but inside a
candidate subtree it hands out the VMs one at a time, each to the host whose
residual compute and residual access bandwidth end up closest to each other
(measured as the ratio of the smaller to the larger residual fraction). A
skewed VC therefore spreads over hosts where it complements what is already
there instead of piling onto one host and stranding the other resource.

Only host compute and access links are considered while distributing. The
finished placement must still pass the full hose check on rack and pod
uplinks; if no level produces one, embedding falls back to Oktopus.
"""

from __future__ import annotations

import heapq
from fractions import Fraction
from typing import List, Optional

from . import oktopus
from .hose import uplink_demand
from .request import VCRequest
from .topology import LEVELS, FatTree, Placement

ONE = Fraction(1)


def _ratio(x, y) -> Fraction:
    if x == y:
        return ONE
    return Fraction(x, y) if x < y else Fraction(y, x)


def score(free_compute, free_bw, req: VCRequest, k: int,
          compute_capacity=1, bw_capacity=1) -> Optional[Fraction]:
    """Balance of a host after it takes VM number ``k + 1`` of ``req``.

    Returns ``min(fc, fb) / max(fc, fb)`` over the residual compute and
    bandwidth fractions, 1 when they are equal (including a host that is
    used up exactly), or None if the host cannot take the VM.
    """
    k1 = k + 1
    if k1 > req.n:
        return None
    rc = free_compute - k1 * req.c
    rb = free_bw - uplink_demand(k1, req.n, req.b)
    if rc < 0 or rb < 0:
        return None
    return _ratio(Fraction(rc) / compute_capacity, Fraction(rb) / bw_capacity)


def _key(tree: FatTree, h: int, k1: int, n: int, cu: int, bu: int):
    rc = tree.comp[h] - k1 * cu
    if rc < 0:
        return None
    rb = tree.hbw[h] - (k1 if 2 * k1 < n else n - k1) * bu
    if rb < 0:
        return None
    # cross-scale so both residuals are fractions of their own capacity
    return -_ratio(rc * tree.cap_hbw, rb * tree.cap_comp)


def spread(tree: FatTree, hosts, n: int, cu: int, bu: int) -> Optional[dict]:
    """Distribute ``n`` VMs over ``hosts`` greedily by balance score.

    Scores of untouched hosts do not change while a VC is being placed, so a
    heap keyed on ``(-score, host)`` gives the best host (lowest index on
    ties) in logarithmic time per VM.
    """
    heap: List[tuple] = []
    for h in hosts:
        key = _key(tree, h, 1, n, cu, bu)
        if key is not None:
            heap.append((key, h))
    heapq.heapify(heap)
    counts = {}
    for _ in range(n):
        if not heap:
            return None
        _, h = heapq.heappop(heap)
        k = counts.get(h, 0) + 1
        counts[h] = k
        key = _key(tree, h, k + 1, n, cu, bu)
        if key is not None:
            heapq.heappush(heap, (key, h))
    return counts


def embed(tree: FatTree, req: VCRequest) -> Optional[Placement]:
    n = req.n
    cu, bu = tree.demand_units(req)
    need = n * cu
    for level in LEVELS:
        for index, hosts, free in tree.candidates(level):
            if free < need:
                continue
            if level == "host":
                # one host has no distribution freedom: collocate everything
                return Placement.of(req, {index: n})
            counts = spread(tree, hosts, n, cu, bu)
            if counts is None:
                continue
            p = Placement.of(req, counts)
            if tree.fits(p):
                return p
    return oktopus.embed(tree, req)
