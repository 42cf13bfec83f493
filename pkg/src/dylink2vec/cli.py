"""Command-line entry point: ``dylink2vec <subcommand> [options]``."""
from __future__ import annotations

import argparse
import contextlib
import csv
import json
import logging
import sys
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from . import autoenc, classify, pipeline
from .config import ConfigError, ExperimentConfig, apply_overrides, describe_defaults, load_config
from .dyngraph import DynamicNetwork, IngestSpec, ingest, read_edge_list, read_snapshots, \
    write_snapshots
from .evalmetrics import metric_report
from .pairfeat import build_dataset, write_dataset
from .synth import synth_generate

logger = logging.getLogger("dylink2vec")

BUNDLED_CONFIGS = ("toy",)


def bundled_config(name: str) -> Path:
    return Path(str(resources.files("dylink2vec") / "data" / f"{name}.ini"))


def _resolve_config(path: str | None) -> ExperimentConfig:
    if path and not Path(path).exists() and path in BUNDLED_CONFIGS:
        path = str(bundled_config(path))
    return load_config(path)


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    raw: dict[str, dict[str, str]] = {}
    for item in args.set or []:
        key, sep, value = item.partition("=")
        section, dot, name = key.partition(".")
        if not sep or not dot:
            raise ConfigError(f"override {item!r} must look like section.key=value")
        raw.setdefault(section.strip(), {})[name.strip()] = value
    if raw:
        cfg = apply_overrides(cfg, raw)
    exp = {}
    if args.seed is not None:
        exp["seed"] = args.seed
    if args.out is not None:
        exp["out"] = args.out
    if getattr(args, "method", None):
        exp["methods"] = args.method
    if exp:
        cfg = cfg.with_values(experiment=exp)
    return cfg.validate()


def load_network(cfg: ExperimentConfig) -> DynamicNetwork:
    d = cfg.data
    if d.source == "synth":
        return synth_generate(cfg.synth)
    if not d.path:
        raise ConfigError(f"[data] path is required for source '{d.source}'")
    if d.source == "snapshots":
        return read_snapshots(d.path)
    spec = IngestSpec(d.window_length, d.min_active_snapshots, d.min_degree)
    return ingest(read_edge_list(d.path), spec)


def _out_dir(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.experiment.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _observed(net: DynamicNetwork, cfg: ExperimentConfig):
    if cfg.experiment.holdout:
        return pipeline.split_holdout(net)
    return net, None


def _dump_json(obj, path: Path):
    path.write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")


def _write_rows(rows: Sequence[dict], path: Path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0].keys()), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (" ".join(map(str, v)) if isinstance(v, list) else v) for k, v in r.items()})


def write_scores(rs, path: Path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        has_labels = rs.labels is not None
        w.writerow(["u", "v", "score"] + (["label"] if has_labels else []))
        for idx, ((u, v), s) in enumerate(zip(rs.pairs, rs.scores)):
            row = [u, v, format(float(s), ".17g")]
            if has_labels:
                row.append(int(rs.labels[idx]))
            w.writerow(row)


# --- subcommands ----------------------------------------------------------

def cmd_ingest(args, cfg):
    d = cfg.data
    spec = IngestSpec(args.window_length if args.window_length is not None else d.window_length,
                      args.min_active if args.min_active is not None else d.min_active_snapshots,
                      args.min_degree if args.min_degree is not None else d.min_degree)
    net = ingest(read_edge_list(args.input), spec)
    path = _out_dir(cfg) / "network.txt"
    write_snapshots(net, path)
    print(json.dumps({"n": net.n, "t": net.t, "edges": [len(g) for g in net.snapshots],
                      "path": str(path)}))


def cmd_synth(args, cfg):
    net = synth_generate(cfg.synth)
    path = _out_dir(cfg) / "network.txt"
    write_snapshots(net, path)
    print(json.dumps({"n": net.n, "t": net.t, "edges": [len(g) for g in net.snapshots],
                      "path": str(path)}))


def cmd_run(args, cfg):
    from . import plotting
    methods = cfg.methods
    if len(methods) != 1:
        raise ConfigError(f"'run' takes exactly one method, got {','.join(methods)}")
    method = methods[0]
    net = load_network(cfg)
    observed, target = _observed(net, cfg)
    out = _out_dir(cfg)
    if method == "dylink2vec":
        res = pipeline.run_dylink2vec(observed, cfg, target)
        rs = res.scores
        autoenc.write_model(res.model, out / "model.txt")
        if isinstance(res.classifier, classify.StumpEnsemble):
            classify.write_ensemble(res.classifier, out / "ensemble.txt")
        with open(out / "loss_trace.csv", "w", encoding="utf-8") as fh:
            fh.write("iteration,J\n")
            for i, j in enumerate(res.model.loss_trace):
                fh.write(f"{i},{j:.17g}\n")
        plotting.plot_loss_trace(res.model.loss_trace, out / "loss_trace.png")
    else:
        rs = pipeline.run_baseline(observed, method, cfg, target)
    write_scores(rs, out / "scores.csv")
    if rs.labels is not None:
        report = [metric_report(method, rs, cfg.evaluation.ndcg_k)]
        _dump_json(report, out / "metrics.json")
        print(json.dumps(report))


def cmd_compare(args, cfg):
    from . import plotting
    net = load_network(cfg)
    reports = pipeline.compare(net, cfg)
    out = _out_dir(cfg)
    _dump_json(reports, out / "metrics.json")
    _write_rows(reports, out / "metrics.csv")
    plotting.plot_method_comparison(reports, out / "comparison.png")
    print(json.dumps(reports))


def _number_list(text: str, kind=int) -> list:
    try:
        return [kind(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse list {text!r}") from None


def cmd_window_sweep(args, cfg):
    from . import plotting
    net = load_network(cfg)
    sizes = _number_list(args.sizes) if args.sizes else list(range(1, net.t - 1))
    rows = pipeline.window_sweep(net, cfg, sizes)
    out = _out_dir(cfg)
    _dump_json(rows, out / "window_sweep.json")
    _write_rows(rows, out / "window_sweep.csv")
    plotting.plot_sweep(rows, "size", out / "window_sweep.png", "training window size")
    print(json.dumps(rows))


def cmd_imbalance_sweep(args, cfg):
    from . import plotting
    net = load_network(cfg)
    rows = pipeline.imbalance_sweep(net, cfg, _number_list(args.ratios, float))
    out = _out_dir(cfg)
    _dump_json(rows, out / "imbalance_sweep.json")
    _write_rows(rows, out / "imbalance_sweep.csv")
    plotting.plot_sweep(rows, "ratio", out / "imbalance_sweep.png", "negatives per positive")
    print(json.dumps(rows))


def cmd_embed(args, cfg):
    net = load_network(cfg)
    observed, _ = _observed(net, cfg)
    t, start = observed.t, cfg.experiment.train_from
    pairs, y = pipeline.training_set(observed, cfg)
    E = build_dataset(observed, (start, t - 1), pairs)
    l = autoenc.default_code_length(E.shape[1], cfg.embedding.l)
    model = autoenc.train(E, l, cfg.embedding.lam, pipeline._train_config(cfg))
    out = _out_dir(cfg)
    autoenc.write_model(model, out / "model.txt")
    write_dataset(autoenc.embed(model, E), out / "embedding.txt")
    with open(out / "embedding_pairs.csv", "w", encoding="utf-8") as fh:
        fh.write("u,v,label\n")
        for (u, v), lab in zip(pairs, y):
            fh.write(f"{u},{v},{lab}\n")
    print(json.dumps({"rows": len(pairs), "k": E.shape[1], "l": l,
                      "iterations": len(model.loss_trace) - 1, "out": str(out)}))


COMMANDS = {
    "ingest": cmd_ingest,
    "synth": cmd_synth,
    "run": cmd_run,
    "compare": cmd_compare,
    "window-sweep": cmd_window_sweep,
    "imbalance-sweep": cmd_imbalance_sweep,
    "embed": cmd_embed,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH",
                        help="sectioned key=value config file, or a bundled name (toy)")
    common.add_argument("--seed", type=int, help="experiment seed (sampling, init)")
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--deterministic", action="store_true",
                        help="single-threaded numerics for bitwise-reproducible output")
    common.add_argument("--method", metavar="NAME[,NAME...]",
                        help="methods to run: dylink2vec, cn, aa, jaccard, katz, jack, ts-{cn,aa,j,pa}-adj")
    common.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                        help="override one config value (repeatable)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="dylink2vec",
        description="Link forecasting in dynamic networks with node-pair embeddings.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="config defaults:\n" + describe_defaults())
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="edge list -> snapshot file")
    p.add_argument("input", help="u<TAB>v<TAB>time edge list")
    p.add_argument("--window-length", type=float)
    p.add_argument("--min-active", type=int)
    p.add_argument("--min-degree", type=int)
    sub.add_parser("synth", parents=[common], help="write a synthetic network")
    sub.add_parser("run", parents=[common], help="score one method; writes scores.csv, metrics.json")
    sub.add_parser("compare", parents=[common], help="metric report for every configured method")
    p = sub.add_parser("window-sweep", parents=[common], help="vary the training window length")
    p.add_argument("--sizes", help="comma-separated window sizes (default: all)")
    p = sub.add_parser("imbalance-sweep", parents=[common], help="vary the negative:positive ratio")
    p.add_argument("--ratios", default="1,2,5,10", help="comma-separated ratios")
    sub.add_parser("embed", parents=[common], help="train the coding model and dump embeddings")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = _apply_overrides(_resolve_config(args.config), args)
        with _thread_limit(args.deterministic):
            COMMANDS[args.command](args, cfg)
    except (ConfigError, ValueError, IndexError, OSError, autoenc.DivergenceError) as exc:
        print(f"dylink2vec {args.command}: error: {exc}", file=sys.stderr)
        return 2 if isinstance(exc, ConfigError) else 1
    return 0


@contextlib.contextmanager
def _thread_limit(deterministic: bool):
    if not deterministic:
        yield
        return
    from threadpoolctl import threadpool_limits
    with threadpool_limits(limits=1):
        np.random.seed(0)
        yield


if __name__ == "__main__":
    sys.exit(main())
