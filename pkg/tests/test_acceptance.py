"""Acceptance criteria, one test per criterion.

Run with ``pytest tests/test_acceptance.py -v``; a PASS/FAIL line per
criterion is printed at the end of the session (see conftest.py).
The desk-scale experiments take a couple of minutes on one core.
"""

import random
import time
from dataclasses import replace
from fractions import Fraction as F

import pytest

from test_hose import B_VALUES, brute_force_cut
from vcsim import oktopus, tetris
from vcsim.config import resolve
from vcsim.hose import uplink_demand
from vcsim.pricing import (CalibrationInput, LambdaParams, UnitPrices, calibrate_lambda_b,
                           price_drp, price_dsp, price_ideal)
from vcsim.request import VCRequest
from vcsim.simulator import Scenario, run_all, series_csv
from vcsim.topology import FatTreeSpec, accounting_consistent, build
from vcsim.workload import generate

DESK = resolve("desk")
SEEDS = DESK.seeds
ARMS = {"okt_drp": ("oktopus", "drp"), "okt_dsp": ("oktopus", "dsp"), "tet_dsp": ("tetris", "dsp")}


def _scenario(arm, oversub=F(4), load=F(4, 5), seed=1):
    emb, scheme = ARMS[arm]
    spec = replace(DESK.tree_spec, oversub_tor_agg=oversub)
    wl = replace(DESK.workload, target_load=load, seed=seed)
    return Scenario(spec, wl, emb, scheme, DESK.prices, DESK.lambdas, DESK.templates)


class _Grid:
    """Runs desk-scale cells on demand and memoizes them across criteria."""

    def __init__(self):
        self.cache = {}

    def get(self, cells):
        todo = [c for c in cells if c not in self.cache]
        if todo:
            scenarios = [_scenario(*c) for c in todo]
            streams = [generate(s.workload, s.tree_spec) for s in scenarios]
            for c, rep in zip(todo, run_all(scenarios, streams)):
                self.cache[c] = rep
        return [self.cache[c] for c in cells]


@pytest.fixture(scope="module")
def grid():
    return _Grid()


def test_criterion_1_skewed_pair_exact():
    """Two complementary skewed VCs on six hosts: placements and residuals, exact."""
    t0 = time.perf_counter()
    spec = FatTreeSpec(pods=1, racks_per_pod=1, hosts_per_rack=6)
    vc2 = VCRequest(2, 9, F(2, 6), F(1, 6))
    vc1 = VCRequest(1, 9, F(1, 6), F(2, 6))

    tree = build(spec)
    p2 = oktopus.embed(tree, vc2)
    tree.reserve(p2)
    p1 = oktopus.embed(tree, vc1)
    tree.reserve(p1)
    assert [k for _, k in p2.counts] == [3, 3, 3]
    assert [k for _, k in p1.counts] == [3, 3, 3]
    for h in p1.hosts:
        assert (tree.residual_compute(h), tree.residual_host_bw(h)) == (F(1, 2), 0)
    for h in p2.hosts:
        assert (tree.residual_compute(h), tree.residual_host_bw(h)) == (0, F(1, 2))

    tree = build(spec)
    for vc in (vc2, vc1):
        tree.reserve(tetris.embed(tree, vc))
    res = sorted((tree.residual_compute(h), tree.residual_host_bw(h)) for h in range(6))
    assert res == [(0, 0)] * 3 + [(F(1, 2), F(1, 2))] * 3
    assert time.perf_counter() - t0 < 1.0


def test_criterion_2_pricing_identities():
    """Pricing endpoint identities over 12000 random requests, exact."""
    rng = random.Random(2024)

    def frac(lo_den=64):
        return F(rng.randint(1, lo_den), lo_den)

    for i in range(12000):
        req = VCRequest(i, rng.randint(1, 500), frac(), frac())
        prices = UnitPrices(F(rng.randint(1, 64), rng.randint(1, 16)),
                            F(rng.randint(1, 64), rng.randint(1, 16)))
        ideal = price_ideal(req, prices).total
        drp = price_drp(req, prices).total
        assert price_dsp(req, prices, LambdaParams(1, 1)).total == drp
        assert price_dsp(req, prices, LambdaParams(0, 0)).total == ideal
        lam = LambdaParams(F(rng.randint(0, 32), 32), F(rng.randint(0, 32), 32))
        assert ideal <= price_dsp(req, prices, lam).total <= drp
        bal = req.with_demand(req.c, req.c)
        assert (price_ideal(bal, prices).total == price_drp(bal, prices).total
                == price_dsp(bal, prices, lam).total)


def test_criterion_3_hose_oracle():
    """uplink_demand equals brute-force worst-case cut traffic for n <= 6."""
    for n in range(1, 7):
        for k in range(n + 1):
            for b in B_VALUES:
                assert uplink_demand(k, n, b) == brute_force_cut(k, n, b)


def test_criterion_4_conservation():
    """2000 random reserve/release operations restore the tree exactly."""
    rng = random.Random(7)
    tree = build(FatTreeSpec(pods=2, racks_per_pod=4, hosts_per_rack=8, oversub_tor_agg=4))
    start = tree.snapshot()
    demands = (F(1, 8), F(1, 4), F(1, 2))
    live, ops, vid = [], 0, 0
    while ops < 2000:
        if live and rng.random() < 0.4:
            tree.release(live.pop(rng.randrange(len(live))))
        else:
            req = VCRequest(vid, rng.randint(1, 30), rng.choice(demands), rng.choice(demands))
            vid += 1
            p = (oktopus.embed if rng.random() < 0.5 else tetris.embed)(tree, req)
            if p is None:
                continue
            tree.reserve(p)
            live.append(p)
        ops += 1
        assert all(x >= 0 for arr in (tree.comp, tree.hbw, tree.rbw, tree.pbw) for x in arr)
        for arr, cap in ((tree.comp, tree.cap_comp), (tree.hbw, tree.cap_hbw),
                         (tree.rbw, tree.cap_rbw), (tree.pbw, tree.cap_pbw)):
            assert all(x <= cap for x in arr)
    assert accounting_consistent(tree)
    while live:
        tree.release(live.pop())
    assert tree.snapshot() == start


def test_criterion_5_desk_ordering(grid):
    """Tetris+DSP >= Oktopus+DSP >= Oktopus+DRP per seed; DSP >= DRP + 5% on average."""
    t0 = time.perf_counter()
    rows = {}
    for arm in ARMS:
        rows[arm] = grid.get([(arm, F(4), F(4, 5), s) for s in SEEDS])
    elapsed = time.perf_counter() - t0
    failures = []
    for i, seed in enumerate(SEEDS):
        d, o, t = rows["okt_drp"][i], rows["okt_dsp"][i], rows["tet_dsp"][i]
        print(f"seed {seed}: slots drp {d.mean_slots_sum:.2f} dsp {o.mean_slots_sum:.2f} "
              f"tetris {t.mean_slots_sum:.2f} | bw drp {d.mean_bw_sum:.2f} "
              f"dsp {o.mean_bw_sum:.2f} tetris {t.mean_bw_sum:.2f}")
        for dim in ("mean_slots_sum", "mean_bw_sum"):
            if not getattr(o, dim) >= getattr(d, dim):
                failures.append(f"seed {seed} {dim}: Oktopus+DSP < Oktopus+DRP")
            if not getattr(t, dim) >= getattr(o, dim):
                failures.append(f"seed {seed} {dim}: Tetris+DSP < Oktopus+DSP")
    gain = sum(o.mean_slots_sum / d.mean_slots_sum - 1
               for o, d in zip(rows["okt_dsp"], rows["okt_drp"])) / len(SEEDS)
    print(f"mean Oktopus+DSP gain over Oktopus+DRP in slots: {gain:+.2%}; runtime {elapsed:.1f}s")
    if gain < 0.05:
        failures.append(f"DSP gain {gain:.2%} < 5%")
    assert elapsed < 120, f"runtime {elapsed:.0f}s"
    assert not failures, "; ".join(failures)


def _gap(grid, oversub, load):
    tet = grid.get([("tet_dsp", oversub, load, s) for s in SEEDS])
    okt = grid.get([("okt_dsp", oversub, load, s) for s in SEEDS])
    return sum(t.mean_slots_sum - o.mean_slots_sum for t, o in zip(tet, okt)) / len(SEEDS)


def test_criterion_6_trends(grid):
    """Tetris-Oktopus gap grows with oversubscription (4 vs 1) and with load from 0.6."""
    ov_gaps = {ov: _gap(grid, F(ov), F(4, 5)) for ov in (1, 2, 4, 8)}
    load_gaps = {ld: _gap(grid, F(4), ld) for ld in (F(2, 5), F(3, 5), F(4, 5), F(1))}
    print("gap by oversubscription: " + ", ".join(f"{k}: {v:+.2f}" for k, v in ov_gaps.items()))
    print("gap by load: " + ", ".join(f"{float(k)}: {v:+.2f}" for k, v in load_gaps.items()))
    failures = []
    if not ov_gaps[4] > ov_gaps[1]:
        failures.append(f"gap at oversub 4 ({ov_gaps[4]:+.2f}) <= gap at 1 ({ov_gaps[1]:+.2f})")
    seq = [load_gaps[F(3, 5)], load_gaps[F(4, 5)], load_gaps[F(1)]]
    if not all(a <= b for a, b in zip(seq, seq[1:])):
        failures.append("gap not non-decreasing in load from 0.6: "
                        + ", ".join(f"{g:+.2f}" for g in seq))
    assert not failures, "; ".join(failures)


def test_criterion_7_lambda_calibration():
    """N=100, E[c]-E[b]=1/10, p_b=1, delta=10 gives lambda_b=1/2 exactly."""
    inp = CalibrationInput(100, F(3, 10), F(2, 10), 10)
    lam = calibrate_lambda_b(inp, UnitPrices(1, 1))
    assert lam == F(1, 2)
    assert inp.N * (inp.e_c - inp.e_b) * 1 * (1 - lam) == inp.delta / 2


@pytest.mark.parametrize("arm", sorted(ARMS))
def test_criterion_8_determinism(arm):
    """Two runs with the same seed write byte-identical CSVs."""
    sc = replace(_scenario(arm, seed=3))
    sc = replace(sc, workload=replace(sc.workload, total_requests=1500, warmup_requests=200))
    a = run_all([sc], threads=1)[0]
    b = run_all([sc], threads=1)[0]
    assert series_csv(a).encode() == series_csv(b).encode()
