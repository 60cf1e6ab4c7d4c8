import numpy as np
import pytest

from gcnet.graphs import (
    DirectedGraph,
    ancestors,
    confounders,
    is_dag,
    is_strongly_causal,
    load_edge_list,
    random_dag,
    random_scg,
    save_edge_list,
)

FIG_EDGES = frozenset({(1, 3), (3, 4), (2, 4), (3, 5), (4, 6)})


def fig_graph():
    return DirectedGraph(6, FIG_EDGES)


def count_simple_paths(g, src, dst, banned=None):
    """Brute-force enumeration of simple directed paths src -> dst."""
    total = 0
    banned = banned or set()
    if src in banned or dst in banned:
        return 0

    def walk(v, visited):
        nonlocal total
        if v == dst:
            total += 1
            return
        for child in g.children(v):
            if child not in visited and child not in banned:
                walk(child, visited | {child})

    walk(src, {src})
    return total


class TestConstruction:
    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            DirectedGraph(3, frozenset({(1, 4)}))

    def test_rejects_self_loop(self):
        with pytest.raises(ValueError):
            DirectedGraph(3, frozenset({(2, 2)}))

    def test_rejects_nonpositive_n(self):
        with pytest.raises(ValueError):
            DirectedGraph(0)


class TestAncestors:
    def test_chain(self):
        g = DirectedGraph(3, frozenset({(1, 2), (2, 3)}))
        assert ancestors(g, 3) == {1, 2}

    def test_worked_example(self):
        assert ancestors(fig_graph(), 6) == {1, 2, 3, 4}

    def test_edgeless(self):
        g = DirectedGraph(4)
        for i in range(1, 5):
            assert ancestors(g, i) == set()

    def test_self_on_cycle(self):
        g = DirectedGraph(2, frozenset({(1, 2), (2, 1)}))
        assert ancestors(g, 1) == {1, 2}

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            ancestors(DirectedGraph(2), 3)

    def test_monotone_under_edge_addition(self):
        rng = np.random.default_rng(11)
        for _ in range(30):
            g = random_dag(8, 0.3, rng)
            pairs = [(a, b) for a in range(1, 9) for b in range(1, 9)
                     if a != b and (a, b) not in g.edges]
            extra = pairs[rng.integers(len(pairs))]
            bigger = DirectedGraph(8, g.edges | {extra})
            for i in range(1, 9):
                assert ancestors(g, i) <= ancestors(bigger, i)


class TestIsDag:
    def test_chain(self):
        assert is_dag(DirectedGraph(3, frozenset({(1, 2), (2, 3)})))

    def test_two_cycle(self):
        assert not is_dag(DirectedGraph(2, frozenset({(1, 2), (2, 1)})))

    def test_worked_example(self):
        assert is_dag(fig_graph())


class TestStronglyCausal:
    def test_diamond_fails(self):
        g = DirectedGraph(4, frozenset({(1, 2), (1, 3), (2, 4), (3, 4)}))
        assert not is_strongly_causal(g)

    def test_trees_pass(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            assert is_strongly_causal(random_scg(12, rng))

    def test_complete_bipartite(self):
        left, right = range(1, 5), range(5, 9)
        g = DirectedGraph(8, frozenset((a, b) for a in left for b in right))
        assert is_strongly_causal(g)

    def test_cycle_fails(self):
        assert not is_strongly_causal(DirectedGraph(3, frozenset({(1, 2), (2, 3), (3, 1)})))

    def test_inherited_by_subgraphs(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            g = random_scg(10, rng)
            keep = frozenset(e for e in g.edges if rng.random() < 0.6)
            assert is_strongly_causal(DirectedGraph(10, keep))

    def test_matches_path_enumeration(self):
        rng = np.random.default_rng(3)
        for _ in range(40):
            g = random_dag(7, 0.35, rng)
            expected = all(
                count_simple_paths(g, a, b) <= 1
                for a in range(1, 8)
                for b in range(1, 8)
                if a != b
            )
            assert is_strongly_causal(g) == expected


class TestConfounders:
    def test_fork(self):
        g = DirectedGraph(3, frozenset({(1, 2), (1, 3)}))
        assert confounders(g, 2, 3) == {1}

    def test_chain_mediator_is_not_confounder(self):
        g = DirectedGraph(3, frozenset({(1, 2), (2, 3)}))
        assert confounders(g, 2, 3) == set()

    def test_worked_example_pair(self):
        assert confounders(fig_graph(), 4, 5) == {1, 3}

    def test_same_node_rejected(self):
        with pytest.raises(ValueError):
            confounders(fig_graph(), 2, 2)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(9)
        for _ in range(25):
            g = random_dag(7, 0.3, rng)
            for i in range(1, 8):
                for j in range(1, 8):
                    if i == j:
                        continue
                    common = ancestors(g, i) & ancestors(g, j) - {i, j}
                    expected = {
                        k
                        for k in common
                        if count_simple_paths(g, k, i, banned={j}) > 0
                        and count_simple_paths(g, k, j, banned={i}) > 0
                    }
                    assert confounders(g, i, j) == expected

    def test_no_confounder_below_ancestor_in_scg(self):
        # in a strongly causal graph an ancestor pair cannot be confounded
        rng = np.random.default_rng(21)
        for _ in range(20):
            g = random_scg(10, rng)
            for i in range(1, 11):
                for j in ancestors(g, i):
                    assert confounders(g, i, j) == set()


class TestRandomScg:
    def test_single_node(self):
        g = random_scg(1, 0)
        assert g.n == 1 and g.edges == frozenset()

    def test_tree_edge_count(self):
        g = random_scg(50, 123)
        assert len(g.edges) == 49

    def test_deterministic(self):
        assert random_scg(20, 42).edges == random_scg(20, 42).edges

    def test_is_strongly_causal_dag(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            g = random_scg(int(rng.integers(2, 30)), rng)
            assert is_dag(g) and is_strongly_causal(g)

    def test_exactly_one_path_between_connected_pairs(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            g = random_scg(8, rng)
            assert len(g.edges) == 7
            for a in range(1, 9):
                for b in range(1, 9):
                    if a != b:
                        assert count_simple_paths(g, a, b) <= 1


class TestRandomDag:
    def test_q_zero(self):
        assert random_dag(10, 0.0, 0).edges == frozenset()

    def test_q_one_complete(self):
        g = random_dag(3, 1.0, 0)
        assert g.edges == frozenset({(1, 2), (1, 3), (2, 3)})

    def test_always_dag(self):
        rng = np.random.default_rng(4)
        for _ in range(30):
            assert is_dag(random_dag(12, 0.4, rng))

    def test_expected_edge_count(self):
        # n=50, q=2/50: mean edge count is q*n(n-1)/2 = 49
        counts = [len(random_dag(50, 2 / 50, seed).edges) for seed in range(1000)]
        assert abs(np.mean(counts) - 49.0) < 3.0

    def test_bad_q(self):
        with pytest.raises(ValueError):
            random_dag(5, 1.5, 0)


class TestSerialization:
    def test_roundtrip(self, tmp_path):
        g = fig_graph()
        path = tmp_path / "g.txt"
        save_edge_list(g, path)
        assert load_edge_list(path) == g
        assert path.read_text().splitlines()[0] == "n 6"

    def test_bad_header(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("6\n1 2\n")
        with pytest.raises(ValueError):
            load_edge_list(path)

    def test_bad_line(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("n 3\n1 2 3\n")
        with pytest.raises(ValueError):
            load_edge_list(path)
