import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from dylink2vec.dyngraph import from_edge_sets
from dylink2vec.evalmetrics import (RankedScores, SamplerConfig, metric_report, ndcg_at_k, pr_curve,
                                    prauc, sample_non_edges, sample_training_pairs)


def ranked(scores, labels, pairs=None):
    pairs = pairs or [(i, i + 1) for i in range(len(scores))]
    return RankedScores(pairs, np.asarray(scores, dtype=float), np.asarray(labels))


def brute_prauc(scores, labels):
    """Sweep every distinct score as a threshold, counting from scratch."""
    n_pos = sum(labels)
    points = []
    for thr in sorted(set(scores), reverse=True):
        picked = [y for s, y in zip(scores, labels) if s >= thr]
        tp = sum(picked)
        if tp == 0:
            continue
        points.append((tp / n_pos, tp / len(picked)))
        if tp == n_pos:
            break
    points.insert(0, (0.0, points[0][1]))
    area = 0.0
    for (r0, p0), (r1, p1) in zip(points, points[1:]):
        area += (r1 - r0) * (p0 + p1) / 2
    return area


def brute_ndcg(scores, labels, pairs, k):
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], pairs[i]))
    dcg = sum(labels[i] / math.log2(rank + 2) for rank, i in enumerate(order[:k]))
    ideal = sum(1 / math.log2(rank + 2) for rank in range(min(k, sum(labels), len(scores))))
    return dcg / ideal


def test_pr_curve_hand_case():
    pts = pr_curve(ranked([0.9, 0.8, 0.7], [1, 0, 1]))
    assert pts == [(0.0, 1.0), (0.5, 1.0), (0.5, 0.5), (1.0, 2 / 3)]
    assert prauc(ranked([0.9, 0.8, 0.7], [1, 0, 1])) == pytest.approx(0.5 + 0.5 * (0.5 + 2 / 3) / 2,
                                                                    abs=1e-12)


def test_pr_curve_perfect_ranking():
    rs = ranked([5, 4, 3, 2, 1], [1, 1, 0, 0, 0])
    pts = pr_curve(rs)
    assert pts == [(0.0, 1.0), (0.5, 1.0), (1.0, 1.0)]
    assert prauc(rs) == 1.0
    assert ndcg_at_k(rs, 2) == 1.0


def test_pr_curve_all_tied():
    pts = pr_curve(ranked([0.3] * 5, [1, 0, 0, 1, 0]))
    # one threshold, preceded by the recall-0 anchor
    assert pts[1:] == [(1.0, 0.4)]
    assert pts[0] == (0.0, 0.4)


def test_pr_curve_starts_at_first_positive():
    pts = pr_curve(ranked([0.9, 0.8, 0.7, 0.1], [0, 1, 1, 0]))
    assert pts == [(0.0, 0.5), (0.5, 0.5), (1.0, 2 / 3)]


def test_pr_curve_single_class():
    with pytest.raises(ValueError):
        pr_curve(ranked([0.1, 0.2], [1, 1]))
    with pytest.raises(ValueError):
        prauc(ranked([0.1, 0.2], [0, 0]))


def test_ndcg_examples():
    assert ndcg_at_k(ranked([0.9, 0.8, 0.1], [0, 1, 0]), 2) == pytest.approx(1 / math.log2(3), abs=1e-15)
    rs = ranked([0.9, 0.5, 0.4, 0.1], [0, 1, 0, 1])
    assert ndcg_at_k(rs, 100) == ndcg_at_k(rs, 4)
    with pytest.raises(ValueError):
        ndcg_at_k(ranked([0.1, 0.2], [0, 0]), 2)


def test_ndcg_ties_break_by_pair_id():
    # equal scores: the lower pair id ranks first
    rs = RankedScores([(2, 3), (0, 1)], np.array([0.5, 0.5]), np.array([1, 0]))
    assert ndcg_at_k(rs, 1) == 0.0
    rs = RankedScores([(0, 1), (2, 3)], np.array([0.5, 0.5]), np.array([1, 0]))
    assert ndcg_at_k(rs, 1) == 1.0


def test_random_scores_give_prevalence():
    for seed in range(10):
        rng = np.random.default_rng(seed)
        labels = rng.permutation(np.r_[np.ones(500, int), np.zeros(500, int)])
        assert abs(prauc(ranked(rng.random(1000), labels)) - 0.5) <= 0.1


def test_metric_oracles_on_random_lists():
    rng = np.random.default_rng(2024)
    for _ in range(300):
        n = int(rng.integers(2, 51))
        scores = np.round(rng.random(n), int(rng.integers(1, 3))).tolist()
        labels = rng.integers(0, 2, size=n).tolist()
        if sum(labels) in (0, n):
            labels[0] = 1 - labels[0]
        pairs = [tuple(sorted(rng.choice(100, size=2, replace=False).tolist())) for _ in range(n)]
        rs = RankedScores(pairs, np.array(scores), np.array(labels))
        assert abs(prauc(rs) - brute_prauc(scores, labels)) <= 1e-9
        k = int(rng.integers(1, 60))
        if sum(labels):
            assert abs(ndcg_at_k(rs, k) - brute_ndcg(scores, labels, pairs, k)) <= 1e-9


@settings(max_examples=80, deadline=None)
@given(st.lists(st.tuples(st.integers(-500, 500), st.integers(0, 1)), min_size=2, max_size=30))
def test_metrics_invariant_under_monotone_transform(entries):
    scores = [s / 100 for s, _ in entries]
    labels = [y for _, y in entries]
    if sum(labels) in (0, len(labels)):
        return
    a = ranked(scores, labels)
    b = ranked(np.exp(np.array(scores)) * 3 + 1, labels)
    assert prauc(a) == pytest.approx(prauc(b), abs=1e-12)
    assert ndcg_at_k(a, 10) == pytest.approx(ndcg_at_k(b, 10), abs=1e-12)


@settings(max_examples=80, deadline=None)
@given(st.lists(st.tuples(st.floats(-5, 5), st.integers(0, 1)), min_size=2, max_size=30))
def test_pr_curve_shape(entries):
    scores = [s for s, _ in entries]
    labels = [y for _, y in entries]
    if sum(labels) in (0, len(labels)):
        return
    pts = pr_curve(ranked(scores, labels))
    rec = [r for r, _ in pts]
    assert all(0 < p <= 1 for _, p in pts[1:])
    assert rec == sorted(rec) and rec[-1] == 1.0
    assert 0.0 <= prauc(ranked(scores, labels)) <= 1.0


@pytest.mark.parametrize("n_pos,n_neg", [(1, 3), (3, 4), (5, 5)])
def test_swap_below_top_positive_lowers_metrics(n_pos, n_neg):
    labels = [1] * n_pos + [0] * n_neg
    scores = list(range(len(labels), 0, -1))
    perfect = ranked(scores, labels)
    swapped_labels = list(labels)
    i = n_pos - 1
    swapped_labels[i], swapped_labels[i + 1] = swapped_labels[i + 1], swapped_labels[i]
    worse = ranked(scores, swapped_labels)
    assert prauc(worse) < prauc(perfect) == 1.0
    assert ndcg_at_k(worse, 50) < ndcg_at_k(perfect, 50) == 1.0


def test_metric_report_schema():
    rep = metric_report("cn", ranked([0.9, 0.8, 0.7], [1, 0, 1]), 2)
    assert set(rep) == {"method", "prauc", "ndcg_k", "k", "n_pos", "n_neg"}
    assert (rep["method"], rep["k"], rep["n_pos"], rep["n_neg"]) == ("cn", 2, 2, 1)


def test_ranked_scores_validation():
    with pytest.raises(ValueError):
        RankedScores([(0, 1)], np.array([0.1, 0.2]))
    with pytest.raises(ValueError):
        RankedScores([(0, 1)], np.array([0.1]), np.array([1, 0]))


# --- sampling -------------------------------------------------------------

def five_edge_net():
    return from_edge_sets(8, [[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)]])


def test_sample_counts():
    pairs = sample_training_pairs(five_edge_net(), 1, SamplerConfig(1.0, seed=0))
    labels = [y for _, y in pairs]
    assert len(pairs) == 10 and sum(labels) == 5
    pairs3 = sample_training_pairs(five_edge_net(), 1, SamplerConfig(3.0, seed=0))
    assert [y for _, y in pairs3].count(0) == 15
    assert len({p for p, _ in pairs3}) == 20
    g = five_edge_net().snapshot(1)
    assert all(not g.has_edge(*p) for p, y in pairs3 if y == 0)


def test_sample_is_seeded():
    cfg = SamplerConfig(2.0, seed=7)
    assert sample_training_pairs(five_edge_net(), 1, cfg) == sample_training_pairs(five_edge_net(), 1, cfg)
    other = sample_training_pairs(five_edge_net(), 1, SamplerConfig(2.0, seed=8))
    assert other != sample_training_pairs(five_edge_net(), 1, cfg)


def test_sample_errors():
    with pytest.raises(ValueError):
        SamplerConfig(0.5)
    with pytest.raises(ValueError):
        sample_training_pairs(five_edge_net(), 1, SamplerConfig(10.0))
    with pytest.raises(ValueError):
        sample_training_pairs(from_edge_sets(4, [[]]), 1, SamplerConfig(1.0))


def test_negative_sample_is_uniform():
    net = five_edge_net()
    g = net.snapshot(1)
    non_edges = [(u, v) for u in range(8) for v in range(u + 1, 8) if not g.has_edge(u, v)]
    counts = dict.fromkeys(non_edges, 0)
    draws = 1000
    for seed in range(draws):
        for p, y in sample_training_pairs(net, 1, SamplerConfig(3.0, seed=seed)):
            if y == 0:
                counts[p] += 1
    observed = np.array(list(counts.values()))
    expected = np.full(len(observed), draws * 15 / len(non_edges))
    assert stats.chisquare(observed, expected).pvalue > 0.01


def test_sample_non_edges_excludes():
    got = sample_non_edges(5, [(0, 1), (2, 3)], 8, seed=1)
    assert len(got) == len(set(got)) == 8
    assert (0, 1) not in got and (2, 3) not in got
    assert all(u < v for u, v in got)
