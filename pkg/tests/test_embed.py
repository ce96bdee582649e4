from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from vcsim import oktopus, tetris
from vcsim.hose import validate
from vcsim.request import VCRequest
from vcsim.topology import FatTreeSpec, build

EMBEDDERS = {"oktopus": oktopus.embed, "tetris": tetris.embed}
DEMANDS = (F(1, 8), F(1, 4), F(1, 2))


def residuals(tree):
    return [(tree.residual_compute(h), tree.residual_host_bw(h)) for h in range(tree.n_hosts)]


# -- oktopus ------------------------------------------------------------------

def test_max_vms_bandwidth_bound():
    assert oktopus.max_vms_on_host(F(1), F(1), VCRequest(0, 9, F(1, 6), F(2, 6))) == 3


def test_max_vms_whole_vc_fits():
    assert oktopus.max_vms_on_host(F(1), F(1), VCRequest(0, 4, F(1, 4), F(1, 8))) == 4


def test_max_vms_no_compute():
    assert oktopus.max_vms_on_host(F(0), F(1), VCRequest(0, 4, F(1, 4), F(1, 8))) == 0


def test_oktopus_skewed_pair_dense(six_hosts, skewed_pair):
    vc2, vc1 = skewed_pair
    p2 = oktopus.embed(six_hosts, vc2)
    six_hosts.reserve(p2)
    p1 = oktopus.embed(six_hosts, vc1)
    six_hosts.reserve(p1)
    assert p2.counts == ((0, 3), (1, 3), (2, 3))
    assert p1.counts == ((3, 3), (4, 3), (5, 3))
    res = residuals(six_hosts)
    assert res[:3] == [(0, F(1, 2))] * 3
    assert res[3:] == [(F(1, 2), 0)] * 3


# -- tetris -------------------------------------------------------------------

def test_score_fresh_host():
    # residuals after one VM: compute 5/6, bandwidth 4/6
    assert tetris.score(F(1), F(1), VCRequest(0, 9, F(1, 6), F(2, 6)), 0) == F(4, 5)


def test_score_balanced_is_one():
    assert tetris.score(F(1), F(1), VCRequest(0, 2, F(1, 2), F(1, 2)), 0) == 1


def test_score_infeasible_bandwidth():
    assert tetris.score(F(1), F(1), VCRequest(0, 9, F(1, 6), F(2, 6)), 3) is None


def test_score_no_compute():
    assert tetris.score(F(0), F(1), VCRequest(0, 9, F(1, 6), F(2, 6)), 0) is None


def test_tetris_skewed_pair_interleaved(six_hosts, skewed_pair):
    vc2, vc1 = skewed_pair
    p2 = tetris.embed(six_hosts, vc2)
    six_hosts.reserve(p2)
    p1 = tetris.embed(six_hosts, vc1)
    six_hosts.reserve(p1)
    assert sorted(k for _, k in p2.counts) == [1, 1, 1, 2, 2, 2]
    assert sorted(k for _, k in p1.counts) == [1, 1, 1, 2, 2, 2]
    res = residuals(six_hosts)
    assert sorted(res) == [(0, 0)] * 3 + [(F(1, 2), F(1, 2))] * 3


# -- shared -------------------------------------------------------------------

@pytest.mark.parametrize("name", EMBEDDERS)
def test_single_vm_goes_to_host_zero(name):
    tree = build(FatTreeSpec(pods=2, racks_per_pod=2, hosts_per_rack=3))
    p = EMBEDDERS[name](tree, VCRequest(0, 1, F(1, 8), F(1, 8)))
    assert p.counts == ((0, 1),)


@pytest.mark.parametrize("name", EMBEDDERS)
def test_too_big_rejected(name):
    tree = build(FatTreeSpec(pods=1, racks_per_pod=2, hosts_per_rack=2))
    assert EMBEDDERS[name](tree, VCRequest(0, 9, F(1, 2), F(1, 8))) is None


@pytest.mark.parametrize("name", EMBEDDERS)
def test_oversubscribed_uplink_rejects(name):
    # one VM per host in both racks would need 1/2 on a rack uplink of 1/4
    spec = FatTreeSpec(pods=1, racks_per_pod=2, hosts_per_rack=2, oversub_tor_agg=8)
    tree = build(spec)
    assert EMBEDDERS[name](tree, VCRequest(0, 4, F(1), F(1, 2))) is None


request_st = st.builds(lambda n, c, b: (n, c, b), st.integers(1, 20),
                       st.sampled_from(DEMANDS), st.sampled_from(DEMANDS))


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(sorted(EMBEDDERS)), st.sampled_from([1, 2, 4]),
       st.lists(request_st, min_size=1, max_size=25))
def test_placements_always_valid(name, oversub, reqs):
    tree = build(FatTreeSpec(pods=2, racks_per_pod=2, hosts_per_rack=4, oversub_tor_agg=oversub))
    for i, (n, c, b) in enumerate(reqs):
        req = VCRequest(i, n, c, b)
        p = EMBEDDERS[name](tree, req)
        if p is None:
            continue
        assert sum(k for _, k in p.counts) == n
        assert validate(p, tree) == []
        tree.reserve(p)


@settings(max_examples=40, deadline=None)
@given(st.lists(request_st, min_size=1, max_size=25))
def test_tetris_accepts_when_oktopus_does_on_same_state(reqs):
    # tetris falls back to the oktopus traversal, so it never rejects a
    # request that oktopus could place on the same residual state
    tree = build(FatTreeSpec(pods=2, racks_per_pod=2, hosts_per_rack=4, oversub_tor_agg=2))
    for i, (n, c, b) in enumerate(reqs):
        req = VCRequest(i, n, c, b)
        po, pt = oktopus.embed(tree, req), tetris.embed(tree, req)
        if po is not None:
            assert pt is not None
        if pt is not None:
            tree.reserve(pt)
