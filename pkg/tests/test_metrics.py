import numpy as np
import pytest

from gcnet.errors import DegenerateMetricError
from gcnet.graphs import DirectedGraph, random_scg
from gcnet.metrics import ConfusionCounts, confusion, fdp, lre, mcc, one_step_predictions
from gcnet.varsim import VarModel, population_autocovariance, simulate
from conftest import FIG_EDGES, fig_graph


class TestConfusion:
    def test_perfect(self):
        g = fig_graph()
        c = confusion(g, g)
        assert (c.tp, c.fp, c.tn, c.fn) == (5, 0, 25, 0)

    def test_complement(self):
        g = DirectedGraph(3, frozenset({(1, 2)}))
        comp = DirectedGraph(3, frozenset(
            (a, b) for a in range(1, 4) for b in range(1, 4)
            if a != b and (a, b) not in g.edges
        ))
        c = confusion(g, comp)
        assert c.tp == 0 and c.tn == 0
        assert c.fp == 5 and c.fn == 1

    def test_worked_example_counts(self):
        truth = fig_graph()
        kept = sorted(FIG_EDGES)[:3]
        est = DirectedGraph(6, frozenset(kept) | {(6, 1), (5, 2)})
        c = confusion(truth, est)
        assert (c.tp, c.fp, c.fn, c.tn) == (3, 2, 2, 23)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            confusion(DirectedGraph(3), DirectedGraph(4))


class TestMcc:
    def test_perfect_is_one(self):
        assert mcc(confusion(fig_graph(), fig_graph())) == 1.0

    def test_empty_estimate_zero_factor(self):
        assert mcc(confusion(fig_graph(), DirectedGraph(6))) == 0.0

    def test_hand_value(self):
        c = ConfusionCounts(tp=3, fp=2, tn=23, fn=2)
        assert mcc(c) == pytest.approx(65 / 125)

    def test_symmetry(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            tp, fp, tn, fn = rng.integers(0, 20, size=4)
            assert mcc(ConfusionCounts(tp, fp, tn, fn)) == pytest.approx(
                mcc(ConfusionCounts(tn, fn, tp, fp)), abs=1e-12
            )

    def test_random_estimate_concentrates_near_zero(self):
        rng = np.random.default_rng(1)
        scores = []
        for _ in range(200):
            truth = random_scg(50, rng)
            k = len(truth.edges)
            pairs = [(a, b) for a in range(1, 51) for b in range(1, 51) if a != b]
            chosen = rng.choice(len(pairs), size=k, replace=False)
            est = DirectedGraph(50, frozenset(pairs[c] for c in chosen))
            scores.append(mcc(confusion(truth, est)))
        assert abs(np.median(scores)) < 0.1


class TestFdp:
    def test_no_false_edges(self):
        assert fdp(ConfusionCounts(5, 0, 20, 3)) == 0.0

    def test_no_discoveries(self):
        assert fdp(ConfusionCounts(0, 0, 25, 5)) == 0.0

    def test_hand_value(self):
        assert fdp(ConfusionCounts(3, 2, 23, 2)) == pytest.approx(0.4)


def scalar_model(b, var):
    return VarModel(np.array([[[b]]]), np.array([var]), DirectedGraph(1))


class TestLre:
    def test_true_model_near_one(self):
        m = VarModel(np.zeros((2, 2, 1)), np.array([3.0, 4.0]), DirectedGraph(2))
        assert lre(m, m, 100_000, rng=0) == pytest.approx(1.0, abs=0.02)

    def test_zero_predictor_on_white_noise(self):
        truth = VarModel(np.zeros((2, 2, 1)), np.array([2.0, 2.5]), DirectedGraph(2))
        zero = VarModel(np.zeros((2, 2, 1)), np.array([2.0, 2.5]), DirectedGraph(2))
        assert lre(truth, zero, 100_000, rng=1) == pytest.approx(1.0, abs=0.02)

    def test_zero_predictor_on_ar_truth(self):
        # truth: scalar AR(1), b=0.5, noise variance e so ln tr Sigma_v = 1;
        # the zero predictor's error is the process variance R(0)
        truth = scalar_model(0.5, np.e)
        zero = scalar_model(0.0, np.e)
        expected = np.log(population_autocovariance(truth, 0)[0, 0, 0])
        assert expected == pytest.approx(1.0 - np.log(0.75), abs=1e-10)
        assert lre(truth, zero, 100_000, rng=2) == pytest.approx(expected, rel=0.02)

    def test_degenerate_denominator(self):
        truth = scalar_model(0.3, 1.0)  # tr Sigma_v = 1 -> ln = 0
        with pytest.raises(DegenerateMetricError):
            lre(truth, truth, 100)

    def test_unstable_estimate_is_fine(self):
        truth = scalar_model(0.5, 2.0)
        wild = scalar_model(1.5, 2.0)  # unstable, but 1-step prediction is defined
        value = lre(truth, wild, 20_000, rng=3)
        assert np.isfinite(value) and value > 1.0


class TestOneStepPredictions:
    def test_ar1_alignment(self):
        m = scalar_model(0.5, 1.0)
        x = simulate(m, 500, rng=4)
        pred = one_step_predictions(m, x)
        assert np.allclose(pred[:, 0], 0.5 * x[:-1, 0])

    def test_paired_rng_reproducible(self):
        truth = scalar_model(0.4, 2.0)
        a = lre(truth, truth, 5000, rng=7)
        b = lre(truth, truth, 5000, rng=7)
        assert a == b
