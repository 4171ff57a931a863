import pytest
from hypothesis import given, strategies as st

from manetsim.clustering import (Cluster, ElectionMetrics, ElectionWeights,
                                 composite_score, designate_gateways, dnc,
                                 elect_ch, maintain_membership,
                                 mobility_membership, res_eng)
from manetsim.errors import InvalidClusterHead, InvalidEnergy, NoCandidates

W = ElectionWeights()


def cand(node_id, r=1.0, t=0.5, m=1.0, d=0.5):
    return ElectionMetrics(node_id, r, t, m, d)


# ---- membership functions ----

def test_res_eng_anchors():
    assert res_eng(0.0, 10.0) == 1.0
    assert res_eng(6.0, 10.0) == pytest.approx(0.4)
    assert res_eng(10.0, 10.0) == 0.0


def test_res_eng_rejects_zero_total():
    with pytest.raises(InvalidEnergy):
        res_eng(1.0, 0.0)


def test_dnc_anchors():
    assert dnc(4, 4) == 0.5       # matching the head is the midpoint
    assert dnc(10, 4) == 1.0      # saturates at twice the head's count
    assert dnc(8, 4) == 1.0
    assert dnc(0, 4) == 0.0


def test_dnc_rejects_isolated_head():
    with pytest.raises(InvalidClusterHead):
        dnc(3, 0)


def test_mobility_membership_anchors():
    assert mobility_membership(0.0, 30.0) == 1.0
    assert mobility_membership(15.0, 30.0) == 0.5
    assert mobility_membership(-15.0, 30.0) == 0.5
    assert mobility_membership(30.0, 30.0) == 0.0
    assert mobility_membership(99.0, 30.0) == 0.0


def test_composite_score_anchor():
    m = cand(0, r=0.8, t=0.5, m=0.6, d=0.5)
    assert composite_score(m, W) == pytest.approx(0.6)


def test_composite_is_projection_at_unit_weight():
    m = cand(0, r=0.3, t=0.9, m=0.1, d=0.7)
    w = ElectionWeights(energy=0.0, trust=1.0, mobility=0.0, dnc=0.0)
    assert composite_score(m, w) == pytest.approx(0.9)


def test_weights_must_sum_to_one():
    with pytest.raises(ValueError):
        ElectionWeights(energy=0.5, trust=0.5, mobility=0.5, dnc=0.5)


@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
def test_composite_stays_in_unit_interval(r, t, m, d):
    assert 0.0 <= composite_score(cand(0, r, t, m, d), W) <= 1.0


# ---- election ----

def test_elect_highest_score():
    assert elect_ch([cand(1, t=0.5), cand(2, t=0.9)], W) == 2


def test_elect_tie_breaks_to_lowest_id():
    assert elect_ch([cand(7), cand(3)], W) == 3


def test_elect_skips_under_energy_floor():
    # node 1 scores higher but sits below the 40% floor
    assert elect_ch([cand(1, r=0.39, t=1.0, d=1.0), cand(2)], W) == 2


def test_elect_floor_waived_when_nobody_qualifies():
    assert elect_ch([cand(5, r=0.1), cand(6, r=0.2)], W) == 6


def test_elect_empty_pool():
    with pytest.raises(NoCandidates):
        elect_ch([], W)


# ---- membership upkeep ----

def upkeep(clusters, alive, adjacency, res=None):
    res = res or {}

    def metrics_fn(n, ch):
        return cand(n, r=res.get(n, 1.0))

    return maintain_membership(clusters, alive, adjacency, metrics_fn, W,
                               may_head=lambda n: True,
                               may_join=lambda n, c: True)


def test_out_of_range_member_rejoins_reachable_head():
    clusters = {0: Cluster(0, {1, 2}), 5: Cluster(5, {6})}
    adjacency = {0: {1}, 1: {0}, 2: {5}, 5: {2, 6}, 6: {5}}
    events = upkeep(clusters, {0, 1, 2, 5, 6}, adjacency)
    assert ("member_left", 2, 0) in events
    assert ("member_joined", 2, 5) in events
    assert clusters[5].members == {2, 6}


def test_dead_head_dissolves_and_members_reelect():
    clusters = {0: Cluster(0, {1, 2})}
    adjacency = {1: {2}, 2: {1}}
    events = upkeep(clusters, {1, 2}, adjacency)
    assert ("cluster_dissolved", 0, "head_dead") in events
    assert ("head_elected", 1, (2,)) in events
    assert set(clusters) == {1}


def test_drained_head_steps_down():
    clusters = {0: Cluster(0, {1})}
    adjacency = {0: {1}, 1: {0}}
    events = upkeep(clusters, {0, 1}, adjacency, res={0: 0.39})
    assert ("cluster_dissolved", 0, "head_energy_floor") in events
    # the stronger node now heads the re-formed cluster
    assert set(clusters) == {1}
    assert clusters[1].members == {0}


def test_adjacent_heads_merge_to_better_one():
    clusters = {0: Cluster(0, {1}), 2: Cluster(2, {3})}
    adjacency = {0: {1, 2, 3}, 1: {0}, 2: {0, 3}, 3: {0, 2}}
    events = upkeep(clusters, {0, 1, 2, 3}, adjacency, res={2: 0.8})
    assert ("clusters_merged", 0, 2) in events
    assert set(clusters) == {0}
    assert clusters[0].members == {1, 2, 3}


def test_isolated_node_heads_itself():
    clusters = {}
    events = upkeep(clusters, {9}, {})
    assert events == [("head_elected", 9, ())]
    assert clusters[9].members == set()


# ---- gateway designation ----

def adjacency_from(edges):
    adj = {}
    for a, b in edges:
        adj.setdefault(a, set()).add(b)
        adj.setdefault(b, set()).add(a)
    return adj


def test_single_node_bridge_beats_relay_pair():
    clusters = {0: Cluster(0, {1, 2}), 5: Cluster(5, {6, 7})}
    # node 2 hears both heads; 1-6 would also work as a pair
    adj = adjacency_from([(0, 1), (0, 2), (2, 5), (5, 6), (5, 7), (1, 6)])
    edges = designate_gateways(clusters, adj, score_fn=lambda n: 0.5, excluded=set())
    assert edges == {(0, 5): (2,)}
    # the bridge is a member of cluster 0 only, so only 0 records it
    assert clusters[0].gateways == {2}
    assert clusters[5].gateways == set()


def test_relay_pair_when_no_single_bridge():
    clusters = {0: Cluster(0, {1}), 5: Cluster(5, {6})}
    adj = adjacency_from([(0, 1), (1, 6), (6, 5)])
    edges = designate_gateways(clusters, adj, score_fn=lambda n: 0.5, excluded=set())
    assert edges == {(0, 5): (1, 6)}
    assert clusters[0].gateways == {1}
    assert clusters[5].gateways == {6}


def test_gateway_choice_prefers_higher_score_then_lower_id():
    clusters = {0: Cluster(0, {1, 2}), 5: Cluster(5, {6})}
    adj = adjacency_from([(0, 1), (0, 2), (1, 5), (2, 5), (5, 6)])
    score = {1: 0.2, 2: 0.9}
    edges = designate_gateways(clusters, adj, score_fn=score.get, excluded=set())
    assert edges == {(0, 5): (2,)}
    tied = designate_gateways(clusters, adj, score_fn=lambda n: 0.5, excluded=set())
    assert tied == {(0, 5): (1,)}


def test_excluded_members_never_serve_as_gateways():
    clusters = {0: Cluster(0, {1, 2}), 5: Cluster(5, {6})}
    adj = adjacency_from([(0, 1), (0, 2), (1, 5), (2, 5), (5, 6)])
    edges = designate_gateways(clusters, adj, score_fn=lambda n: 0.5, excluded={1})
    assert edges == {(0, 5): (2,)}


def test_unreachable_pair_gets_no_edge():
    clusters = {0: Cluster(0, {1}), 5: Cluster(5, {6})}
    adj = adjacency_from([(0, 1), (5, 6)])
    assert designate_gateways(clusters, adj, score_fn=lambda n: 0.5,
                              excluded=set()) == {}
