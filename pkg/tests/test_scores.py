import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netpolar.graph import Graph, preprocess
from netpolar.nullmodels import gen_er
from netpolar.scores import (
    DOMAINS,
    SCORE_IDS,
    ConvergenceError,
    ScoreConfig,
    absorption_probabilities,
    aei_index,
    arwc,
    bcc,
    bp,
    dp,
    edge_betweenness,
    ei_index,
    influencer_count,
    modularity,
    rwc,
    score_all,
    top_degree_influencers,
)

from oracles import (
    bf_edge_betweenness,
    dense_absorption,
    naive_aei,
    naive_ei,
    naive_modularity,
    random_connected_graph,
    random_partition,
)


def random_case(seed, n_max=24):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, n_max))
    g = random_connected_graph(n, rng)
    return g, random_partition(g.n, rng)


class TestInfluencerSelection:
    def test_count_rounds_half_up(self):
        assert influencer_count(250, 0.01) == 3  # 2.5 -> 3
        assert influencer_count(240, 0.01) == 2  # 2.4 -> 2
        assert influencer_count(10, 0.01) == 1  # floor of 1
        assert influencer_count(100, 1.0) == 100

    def test_count_rejects_bad_fraction(self):
        with pytest.raises(ValueError):
            influencer_count(10, 0.0)
        with pytest.raises(ValueError):
            influencer_count(10, 1.5)

    def test_top_degree_breaks_ties_by_id(self, bridge_graph, bridge_labels):
        # block 0 degrees: node0=2, node1=2, node2=3
        picks = top_degree_influencers(bridge_graph, bridge_labels, 0, 2)
        assert list(picks) == [2, 0]

    def test_empty_block_raises(self, bridge_graph):
        with pytest.raises(ValueError, match="empty"):
            top_degree_influencers(
                bridge_graph, np.zeros(6, dtype=np.int8), 1, 1
            )


class TestAbsorption:
    @pytest.mark.parametrize("seed", range(6))
    def test_matches_dense_solver(self, seed):
        g, labels = random_case(seed)
        ia = top_degree_influencers(g, labels, 0, 1)
        ib = top_degree_influencers(g, labels, 1, 1)
        p = absorption_probabilities(g, labels, ia, ib)
        f = dense_absorption(g, ia, ib)
        assert p[0, 0] == pytest.approx(f[labels == 0].mean(), abs=1e-10)
        assert p[1, 0] == pytest.approx(f[labels == 1].mean(), abs=1e-10)
        np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-12)

    def test_rejects_overlapping_sets(self, bridge_graph, bridge_labels):
        with pytest.raises(ValueError, match="overlap"):
            absorption_probabilities(bridge_graph, bridge_labels, [2], [2])

    def test_rejects_disconnected(self):
        g = Graph.from_edges(4, np.array([[0, 1], [2, 3]]))
        with pytest.raises(ValueError, match="not connected"):
            absorption_probabilities(g, np.array([0, 0, 1, 1]), [0], [2])


class TestRwc:
    def test_k4_half_split_is_half(self, k4_graph):
        res = rwc(k4_graph, np.array([0, 0, 1, 1]), k=1)
        assert res.value == pytest.approx(0.5, abs=1e-12)
        assert res.params["k_eff_a"] == 1

    def test_bridge_is_fully_polarized(self, bridge_graph, bridge_labels):
        res = rwc(bridge_graph, bridge_labels, k=1)
        assert res.value == pytest.approx(1.0, abs=1e-12)

    def test_k_capped_by_block_size(self, bridge_graph, bridge_labels):
        res = rwc(bridge_graph, bridge_labels, k=10)
        assert res.params["k_eff_a"] == 3
        assert res.params["k_eff_b"] == 3

    def test_montecarlo_tracks_exact(self, k4_pair):
        labels = np.array([0] * 4 + [1] * 4, dtype=np.int8)
        exact = rwc(k4_pair, labels, k=2)
        mc = rwc(k4_pair, labels, k=2, method="montecarlo", n_walks=200_000,
                 random_state=11)
        assert abs(mc.value - exact.value) < 0.02
        assert mc.params["method"] == "montecarlo"

    def test_unknown_method(self, k4_graph):
        with pytest.raises(ValueError, match="unknown method"):
            rwc(k4_graph, np.array([0, 0, 1, 1]), method="quantum")

    def test_arwc_uses_fractional_count(self, k4_pair):
        labels = np.array([0] * 4 + [1] * 4, dtype=np.int8)
        res = arwc(k4_pair, labels, K=0.5)
        assert res.params["k_a"] == 2
        assert DOMAINS["ARWC"][0] <= res.value <= DOMAINS["ARWC"][1]


class TestEdgeBetweenness:
    @pytest.mark.parametrize("seed", range(5))
    def test_matches_brute_force(self, seed):
        rng = np.random.default_rng(seed)
        g = random_connected_graph(int(rng.integers(4, 9)), rng)
        values = edge_betweenness(g)
        expected = bf_edge_betweenness(g)
        for eid, (u, v) in enumerate(g.edges):
            assert values[eid] == pytest.approx(
                expected[(int(u), int(v))], abs=1e-9
            )

    def test_bridge_fixture_values(self, bridge_graph):
        values = edge_betweenness(bridge_graph)
        expected = {
            (0, 1): 1.0, (0, 2): 4.0, (1, 2): 4.0, (2, 3): 9.0,
            (3, 4): 4.0, (3, 5): 4.0, (4, 5): 1.0,
        }
        for eid, (u, v) in enumerate(bridge_graph.edges):
            assert values[eid] == expected[(int(u), int(v))]


class TestBcc:
    def test_disconnected_blocks_flag(self):
        g = Graph.from_edges(4, np.array([[0, 1], [2, 3]]))
        res = bcc(g, np.array([0, 0, 1, 1]))
        assert res.value == 1.0
        assert res.flags == ("empty_cut",)

    def test_all_cut_flag(self):
        # complete bipartite K_{2,3} split by sides: no within-block edge
        edges = [[u, v] for u in (0, 1) for v in (2, 3, 4)]
        g = Graph.from_edges(5, np.array(edges, dtype=np.int64))
        res = bcc(g, np.array([0, 0, 1, 1, 1]))
        assert res.value == 1.0
        assert res.flags == ("empty_noncut",)

    def test_identical_distributions_score_zero(self):
        # 6-cycle: every edge has identical betweenness
        edges = [[i, (i + 1) % 6] for i in range(6)]
        g = Graph.from_edges(6, np.array(edges, dtype=np.int64))
        res = bcc(g, np.array([0, 0, 0, 1, 1, 1]))
        assert res.value == pytest.approx(0.0, abs=1e-9)

    def test_separated_bridge_scores_high(self, bridge_graph, bridge_labels):
        res = bcc(bridge_graph, bridge_labels)
        assert res.value > 0.5
        assert 0.0 <= res.value <= 1.0
        assert "bandwidth_cut" in res.params


class TestBp:
    def test_bridge_value(self, bridge_graph, bridge_labels):
        # boundary nodes 2 and 3: each d_I=2, d_C=1 -> 2/3 - 1/2
        res = bp(bridge_graph, bridge_labels)
        assert res.value == pytest.approx(1 / 6, abs=1e-12)
        assert res.params["n_boundary"] == 2

    def test_single_edge_has_no_qualifying_boundary(self):
        g = Graph.from_edges(2, np.array([[0, 1]]))
        res = bp(g, np.array([0, 1]))
        assert res.value == -0.5
        assert res.flags == ("no_qualifying_boundary",)

    def test_disconnected_blocks(self):
        g = Graph.from_edges(4, np.array([[0, 1], [2, 3]]))
        res = bp(g, np.array([0, 0, 1, 1]))
        assert res.value == 0.5
        assert res.flags == ("disconnected_blocks",)


class TestDp:
    def test_all_influencers_fully_polarized(self, bridge_graph, bridge_labels):
        res = dp(bridge_graph, bridge_labels, K=1.0)
        assert res.value == pytest.approx(1.0, abs=1e-12)
        assert res.params["iterations"] <= 1

    def test_convergence_error_carries_state(self, bridge_graph, bridge_labels):
        with pytest.raises(ConvergenceError) as exc_info:
            dp(bridge_graph, bridge_labels, K=0.3, max_iter=1)
        err = exc_info.value
        assert err.iterations == 1
        assert err.residual > 1e-6

    @pytest.mark.parametrize("seed", range(4))
    def test_fixed_point_residual_below_tol(self, seed):
        g, labels = random_case(seed, n_max=40)
        tol = 1e-6
        res = dp(g, labels, K=0.2, tol=tol)
        # rebuild the converged state and apply one synchronous step
        finals = _propagate_reference(g, labels, K=0.2, tol=tol)
        assert np.max(np.abs(finals["step"] - finals["r"])) <= tol

    def test_balanced_poles_keep_full_weight(self, k4_pair):
        labels = np.array([0] * 4 + [1] * 4, dtype=np.int8)
        res = dp(k4_pair, labels, K=0.5)
        assert res.params["k_a"] == 2
        assert 0.0 <= res.value <= 1.0


def _propagate_reference(g, labels, K, tol):
    """Re-run the propagation in plain numpy and return r and one more step."""
    n_a = int(np.count_nonzero(labels == 0))
    ia = top_degree_influencers(g, labels, 0, influencer_count(n_a, K))
    ib = top_degree_influencers(g, labels, 1, influencer_count(g.n - n_a, K))
    fixed = np.zeros(g.n, dtype=bool)
    fixed[ia] = fixed[ib] = True
    r = np.zeros(g.n)
    r[ia], r[ib] = 1.0, -1.0
    for _ in range(10 * g.n):
        nxt = r.copy()
        for v in range(g.n):
            if not fixed[v]:
                nxt[v] = r[g.neighbors(v)].mean()
        if np.max(np.abs(nxt - r)) < tol:
            r = nxt
            break
        r = nxt
    step = r.copy()
    for v in range(g.n):
        if not fixed[v]:
            step[v] = r[g.neighbors(v)].mean()
    return {"r": r, "step": step}


class TestCountScores:
    def test_worked_constants(self, bridge_graph, bridge_labels):
        assert modularity(bridge_graph, bridge_labels).value == pytest.approx(
            0.3571, abs=1e-4
        )
        assert ei_index(bridge_graph, bridge_labels).value == pytest.approx(
            0.7143, abs=1e-4
        )
        assert aei_index(bridge_graph, bridge_labels).value == pytest.approx(
            0.8000, abs=1e-4
        )

    @pytest.mark.parametrize("seed", range(8))
    def test_match_naive_implementations(self, seed):
        g, labels = random_case(seed)
        assert modularity(g, labels).value == pytest.approx(
            naive_modularity(g, labels), abs=1e-12
        )
        assert ei_index(g, labels).value == pytest.approx(
            naive_ei(g, labels), abs=1e-12
        )
        if min((labels == 0).sum(), (labels == 1).sum()) >= 2:
            assert aei_index(g, labels).value == pytest.approx(
                naive_aei(g, labels), abs=1e-12
            )

    def test_ei_aei_coincide_without_cross_edges(self):
        g = Graph.from_edges(4, np.array([[0, 1], [2, 3]]))
        labels = np.array([0, 0, 1, 1])
        assert ei_index(g, labels).value == 1.0
        assert aei_index(g, labels).value == 1.0

    def test_ei_aei_coincide_without_internal_edges(self):
        edges = [[u, v] for u in (0, 1) for v in (2, 3)]
        g = Graph.from_edges(4, np.array(edges, dtype=np.int64))
        labels = np.array([0, 0, 1, 1])
        assert ei_index(g, labels).value == -1.0
        assert aei_index(g, labels).value == -1.0

    def test_ei_aei_gap_shrinks_with_size(self):
        # same wiring pattern scaled up: densities converge to counts
        gaps = []
        for scale in (8, 32, 128):
            g = preprocess(gen_er(2 * scale, 6 * scale, random_state=scale))
            labels = (np.arange(g.n) >= g.n // 2).astype(np.int8)
            gap = abs(
                ei_index(g, labels).value - aei_index(g, labels).value
            )
            gaps.append(gap)
        assert gaps[2] < gaps[0]

    def test_aei_degenerate_block(self):
        g = Graph.from_edges(3, np.array([[0, 1], [1, 2]]))
        with pytest.raises(ValueError, match="degenerate block"):
            aei_index(g, np.array([0, 0, 1]))

    def test_a_b_relabeling_symmetry(self, bridge_graph, bridge_labels):
        flipped = 1 - bridge_labels
        for fn in (modularity, ei_index, aei_index, bp, bcc):
            assert fn(bridge_graph, bridge_labels).value == pytest.approx(
                fn(bridge_graph, flipped).value, abs=1e-12
            )
        assert rwc(bridge_graph, bridge_labels, k=2).value == pytest.approx(
            rwc(bridge_graph, flipped, k=2).value, abs=1e-12
        )


class TestScoreAll:
    def test_all_ids_present_in_order(self, bridge_graph, bridge_labels):
        results = score_all(bridge_graph, bridge_labels)
        assert tuple(r.score_id for r in results) == SCORE_IDS
        assert all(r.error is None for r in results)

    def test_unknown_id_rejected(self, bridge_graph, bridge_labels):
        with pytest.raises(ValueError, match="unknown score ids"):
            score_all(bridge_graph, bridge_labels, score_ids=("RWC", "PAC"))

    def test_errors_are_trapped_per_score(self):
        # 1-node block: AEI degenerate, everything else still scores
        edges = np.array([[0, 1], [1, 2], [2, 3], [3, 0], [0, 2]])
        g = Graph.from_edges(4, edges)
        labels = np.array([0, 0, 0, 1], dtype=np.int8)
        results = {r.score_id: r for r in score_all(g, labels)}
        assert "degenerate block" in results["AEI"].error
        assert results["Q"].error is None
        assert results["EI"].error is None

    def test_config_is_threaded_through(self, k4_pair):
        labels = np.array([0] * 4 + [1] * 4, dtype=np.int8)
        cfg = ScoreConfig(k=1, K=0.5, dp_K=1.0)
        results = {r.score_id: r for r in score_all(k4_pair, labels, cfg)}
        assert results["RWC"].params["k"] == 1
        assert results["ARWC"].params["K"] == 0.5
        assert results["DP"].params["K"] == 1.0

    def test_polarized_fixture_is_positive_everywhere(
        self, bridge_graph, bridge_labels
    ):
        for r in score_all(bridge_graph, bridge_labels):
            assert r.value > 0, r.score_id

    @given(st.integers(0, 2**20))
    @settings(max_examples=20)
    def test_values_stay_in_domain(self, seed):
        g, labels = random_case(seed, n_max=30)
        for r in score_all(g, labels):
            if r.error is not None:
                continue
            lo, hi = DOMAINS[r.score_id]
            assert lo - 1e-9 <= r.value <= hi + 1e-9, r.score_id

    def test_to_dict_shape(self, bridge_graph, bridge_labels):
        d = score_all(bridge_graph, bridge_labels, score_ids=("Q",))[0].to_dict()
        assert d["score_id"] == "Q"
        assert set(d) == {"score_id", "value", "params", "flags", "error"}
