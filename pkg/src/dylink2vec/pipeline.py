"""End-to-end link forecasting and the experiment suites built on it.

:func:`run_dylink2vec` works on an *observed* network ``G_1..G_t`` and scores
candidate pairs for ``G_{t+1}``:

1. pair features over ``[from, t-1]`` for the training pairs,
2. labels from ``G_t``,
3. pair features over ``[from+1, t]`` for the prediction pairs,
4. the coding model is fitted on the training features only,
5. both feature sets are embedded with it,
6. a classifier is fitted on the training embeddings and labels,
7. the prediction embeddings are scored.

The forecast target is never passed to training code; it is only used to
attach labels to the finished scores.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import autoenc, baselines, classify
from .config import METHODS, ExperimentConfig
from .dyngraph import DynamicNetwork, Snapshot, collapse
from .evalmetrics import RankedScores, SamplerConfig, metric_report, sample_non_edges, \
    sample_training_pairs
from .pairfeat import all_pairs, build_dataset, iter_dataset

logger = logging.getLogger(__name__)

Pair = tuple[int, int]


@dataclass(eq=False)
class DyLinkResult:
    scores: RankedScores
    model: autoenc.EmbeddingModel
    classifier: object
    train_pairs: list[Pair]
    train_labels: np.ndarray
    train_embedding: np.ndarray
    train_window: tuple[int, int]
    predict_window: tuple[int, int]


def split_holdout(net: DynamicNetwork) -> tuple[DynamicNetwork, Snapshot]:
    """Observed prefix ``G_1..G_{t-1}`` and the final snapshot as forecast target."""
    if net.t < 4:
        raise ValueError(f"holding out a target needs t >= 4 snapshots, got {net.t}")
    return net.prefix(net.t - 1), net.snapshot(net.t)


def prediction_pairs(n: int, cfg: ExperimentConfig, target: Snapshot | None = None) -> list[Pair]:
    """Every pair for small ``n``; otherwise a seeded sample that keeps all target edges."""
    if n <= cfg.evaluation.max_all_pairs_n:
        return all_pairs(n)
    keep = sorted(target.edges) if target is not None else []
    total = n * (n - 1) // 2
    extra = min(cfg.evaluation.sample_pairs, total - len(keep))
    sampled = sample_non_edges(n, keep, extra, cfg.seed + 1)
    return sorted(set(keep) | set(sampled))


def labels_for(pairs: Sequence[Pair], target: Snapshot) -> np.ndarray:
    return np.array([1 if tuple(p) in target.edges else 0 for p in pairs], dtype=np.int64)


def _attach(pairs, scores, target):
    rs = RankedScores(list(pairs), scores)
    return rs.with_labels(labels_for(pairs, target)) if target is not None else rs


def _train_config(cfg: ExperimentConfig) -> autoenc.TrainConfig:
    e = cfg.embedding
    return autoenc.TrainConfig(sigma=e.sigma, max_iters=e.max_iters, tol=e.tol, seed=cfg.seed,
                               init_scale=e.init_scale or None, step_policy=e.step_policy)


def _check_observed(net: DynamicNetwork, train_from: int):
    if net.t < 3:
        raise ValueError(f"need t >= 3 observed snapshots (train window, labels, predict window), got {net.t}")
    if not 1 <= train_from <= net.t - 1:
        raise ValueError(f"train_from={train_from} outside [1, {net.t - 1}]")


def training_set(net: DynamicNetwork, cfg: ExperimentConfig) -> tuple[list[Pair], np.ndarray]:
    labeled = sample_training_pairs(net, net.t, SamplerConfig(cfg.sampler.ratio, cfg.seed))
    pairs = [p for p, _ in labeled]
    return pairs, np.array([y for _, y in labeled], dtype=np.int64)


def run_dylink2vec(net: DynamicNetwork, cfg: ExperimentConfig, target: Snapshot | None = None,
                   pairs: Sequence[Pair] | None = None) -> DyLinkResult:
    """Forecast ``G_{t+1}`` from the observed snapshots of ``net``.

    ``target`` (the true ``G_{t+1}``) only labels the returned scores.
    """
    t = net.t
    start = cfg.experiment.train_from
    _check_observed(net, start)
    train_window, predict_window = (start, t - 1), (start + 1, t)

    train_pairs, y = training_set(net, cfg)
    E_hat = build_dataset(net, train_window, train_pairs)
    l = autoenc.default_code_length(E_hat.shape[1], cfg.embedding.l)
    model = autoenc.train(E_hat, l, cfg.embedding.lam, _train_config(cfg))
    alpha_hat = autoenc.embed(model, E_hat)

    c = cfg.classifier
    clf, scorer = classify.fit_scorer(c.kind, classify.as_dataset(alpha_hat, y, train_pairs),
                                      c.rounds, c.steps, c.rate)

    if pairs is None:
        pairs = prediction_pairs(net.n, cfg, target)
    scores = np.concatenate([scorer(autoenc.embed(model, E_bar))
                             for E_bar in iter_dataset(net, predict_window, pairs)]) \
        if len(pairs) else np.zeros(0)
    logger.info("dylink2vec: %d training pairs, k=%d, l=%d, %d iterations, %d candidates",
                len(train_pairs), E_hat.shape[1], l, len(model.loss_trace) - 1, len(pairs))
    return DyLinkResult(_attach(pairs, scores, target), model, clf, train_pairs, y, alpha_hat,
                        train_window, predict_window)


def run_baseline(net: DynamicNetwork, method: str, cfg: ExperimentConfig,
                 target: Snapshot | None = None, pairs: Sequence[Pair] | None = None) -> RankedScores:
    """Score candidate pairs for ``G_{t+1}`` with one competing method."""
    if method not in METHODS or method == "dylink2vec":
        raise ValueError(f"unknown baseline method {method!r}")
    t = net.t
    b = cfg.baselines
    if pairs is None:
        pairs = prediction_pairs(net.n, cfg, target)
    if method in ("cn", "aa", "jaccard", "katz"):
        g = collapse(net, b.topo_from, t)
        fn = {"cn": baselines.cn_scores, "aa": baselines.aa_scores,
              "jaccard": baselines.jaccard_scores}.get(method)
        s = fn(g, pairs) if fn else baselines.katz_scores(g, pairs, b.katz_beta, b.katz_max_len)
    elif method == "jack":
        if not 2 <= b.topo_from <= t - 1:
            raise ValueError(f"JACK needs topo_from in [2, {t - 1}]")
        train_pairs, y = training_set(net, cfg)
        g_train = collapse(net, b.topo_from - 1, t - 1)
        g_pred = collapse(net, b.topo_from, t)
        X = baselines.jack_features(g_train, train_pairs, b.katz_beta, b.katz_max_len)
        c = cfg.classifier
        _, scorer = classify.fit_scorer(c.kind, classify.as_dataset(X, y, train_pairs),
                                        c.rounds, c.steps, c.rate)
        s = scorer(baselines.jack_features(g_pred, pairs, b.katz_beta, b.katz_max_len))
    else:
        metric = method.split("-")[1].upper()
        s = baselines.ts_scores(net, metric, pairs)
    return _attach(pairs, np.asarray(s, dtype=float), target)


def run_method(net: DynamicNetwork, method: str, cfg: ExperimentConfig,
               target: Snapshot | None = None, pairs: Sequence[Pair] | None = None) -> RankedScores:
    if method == "dylink2vec":
        return run_dylink2vec(net, cfg, target, pairs).scores
    return run_baseline(net, method, cfg, target, pairs)


def compare(net: DynamicNetwork, cfg: ExperimentConfig, methods: Sequence[str] | None = None) -> list[dict]:
    """Metric report per method, holding out the last snapshot of ``net`` as target."""
    observed, target = split_holdout(net)
    pairs = prediction_pairs(observed.n, cfg, target)
    reports = []
    for m in (methods or cfg.methods):
        rs = run_method(observed, m, cfg, target, pairs)
        reports.append(metric_report(m, rs, cfg.evaluation.ndcg_k))
    return reports


def window_sweep(net: DynamicNetwork, cfg: ExperimentConfig, sizes: Sequence[int]) -> list[dict]:
    """Vary how many past snapshots feed the features.

    ``net`` holds ``G_1..G_T`` with ``G_T`` the target. For size ``s`` the
    training window is ``[T-1-s, T-2]``, labels come from ``G_{T-1}`` and the
    prediction window is ``[T-s, T-1]``.
    """
    observed, target = split_holdout(net)
    largest = observed.t - 1
    bad = [s for s in sizes if not 1 <= s <= largest]
    if bad:
        raise ValueError(f"window sizes {bad} unavailable; sizes must lie in [1, {largest}]")
    pairs = prediction_pairs(observed.n, cfg, target)
    rows = []
    for s in sizes:
        c = cfg.with_values(experiment={"train_from": observed.t - s})
        res = run_dylink2vec(observed, c, target, pairs)
        rep = metric_report("dylink2vec", res.scores, cfg.evaluation.ndcg_k)
        rows.append({"size": s, "train_window": list(res.train_window),
                     "predict_window": list(res.predict_window),
                     "prauc": rep["prauc"], "ndcg_k": rep["ndcg_k"]})
    return rows


def imbalance_sweep(net: DynamicNetwork, cfg: ExperimentConfig, ratios: Sequence[float]) -> list[dict]:
    """Repeat the forecast varying only the negative:positive training ratio."""
    observed, target = split_holdout(net)
    pairs = prediction_pairs(observed.n, cfg, target)
    rows = []
    for r in ratios:
        c = cfg.with_values(sampler={"ratio": float(r)})
        res = run_dylink2vec(observed, c, target, pairs)
        rep = metric_report("dylink2vec", res.scores, cfg.evaluation.ndcg_k)
        rows.append({"ratio": float(r), "prauc": rep["prauc"], "ndcg_k": rep["ndcg_k"],
                     "n_train": len(res.train_pairs)})
    return rows
