"""Command-line surface: local/global explanation runs, synthetic figures,
and approximation-bound audits.

Exit codes: 0 success (explanation feasible), 2 explanation infeasible,
1 any error. Set MAIRE_LOG to a logging level name for diagnostics.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .blackbox import (
    ExternalCommandProvider,
    PredictionProvider,
    StoredColumnProvider,
    SyntheticOracle,
    predict_batch,
)
from .errors import MaireError
from .explain import Explanation, explain_encoded
from .global_explain import msd_select
from .indicator import ApproxConstants, audit_bounds, cov_exact, cov_hat, pre_exact_or_none, pre_hat
from .optimize import OptimizerConfig
from .schema import encode, load_schema, load_table
from .svg import render_figure
from .synthetic import DEFAULT_QUERIES, SHAPES, synthetic_dataset

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 2


def _add_data_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", help="CSV table (UTF-8, header row)")
    p.add_argument("--schema", help="attribute declaration JSON")
    p.add_argument("--label-column", help="CSV column holding stored black-box labels")
    p.add_argument("--oracle", choices=sorted(SHAPES), help="built-in synthetic oracle")
    p.add_argument("--predictor-cmd", help="external predictor command (JSON line protocol)")
    p.add_argument("--predictor-timeout-s", type=float, default=30.0)


def _add_optimizer_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--precision", type=float, default=0.95, help="precision threshold P")
    p.add_argument("--max-attrs", type=int, default=None, help="max clauses K")
    p.add_argument("--lambda1", type=float, default=5.0)
    p.add_argument("--lambda2", type=float, default=5.0)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--iters", type=int, default=2500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--trace", action="store_true", help="write trace.jsonl per query")
    p.add_argument("--out-dir", default=".", help="output directory")
    p.add_argument("--no-containment-snap", action="store_true",
                   help="skip the final snap of bounds onto the query (figure/testing mode)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="maire",
                                     description="Box-rule explanations for black-box classifiers")
    sub = parser.add_subparsers(dest="command", required=True)

    p_explain = sub.add_parser("explain", help="explain one query instance")
    _add_data_flags(p_explain)
    _add_optimizer_flags(p_explain)
    group = p_explain.add_mutually_exclusive_group(required=True)
    group.add_argument("--query-row", type=int, help="row index of the query in --data")
    group.add_argument("--query-json", help="query instance as a JSON array of raw values")

    p_synth = sub.add_parser("synth", help="run a synthetic shape and plot it")
    p_synth.add_argument("shape", choices=sorted(SHAPES))
    p_synth.add_argument("--n-samples", type=int, default=3000)
    p_synth.add_argument("--query-json", help="query point as a JSON array (encoded units)")
    _add_optimizer_flags(p_synth)

    p_audit = sub.add_parser("bounds-audit",
                             help="measure exact-vs-approximate gaps over random queries")
    _add_data_flags(p_audit)
    _add_optimizer_flags(p_audit)
    p_audit.add_argument("--c1", type=float, default=0.4)
    p_audit.add_argument("--c2", type=float, default=15.0)
    p_audit.add_argument("--cl", type=float, default=0.02)
    p_audit.add_argument("--ch", type=float, default=0.8)
    p_audit.add_argument("--queries", type=int, default=100)

    p_global = sub.add_parser("global", help="compose local explanations into a global one")
    _add_data_flags(p_global)
    _add_optimizer_flags(p_global)
    p_global.add_argument("--anchors", type=int, default=200,
                          help="number of randomly chosen anchor rows")
    p_global.add_argument("--budget", type=int, default=None,
                          help="max explanations in the global set")
    return parser


def _configure_logging() -> None:
    level = os.environ.get("MAIRE_LOG", "WARNING").upper()
    logging.basicConfig(stream=sys.stderr, level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _optimizer_config(args) -> OptimizerConfig:
    return OptimizerConfig(
        precision_threshold=args.precision,
        learning_rate=args.lr,
        max_iters=args.iters,
        lambda1=args.lambda1,
        lambda2=args.lambda2,
        seed=args.seed,
        containment_snap=not args.no_containment_snap,
    )


def _load_tabular(args) -> tuple:
    """(space, labels, provider, table) from the data flags."""
    sources = [s for s in (args.label_column, args.oracle, args.predictor_cmd) if s]
    if len(sources) != 1:
        raise MaireError("exactly one of --label-column, --oracle, --predictor-cmd is required")
    if not args.data or not args.schema:
        raise MaireError("--data and --schema are required")
    schema = load_schema(args.schema)
    table = load_table(args.data, schema, label_column=args.label_column)
    space = encode(table, schema)
    if args.label_column:
        provider: PredictionProvider = StoredColumnProvider(space.matrix, table.labels)
    elif args.oracle:
        provider = SyntheticOracle(SHAPES[args.oracle])
    else:
        provider = ExternalCommandProvider(args.predictor_cmd, timeout_s=args.predictor_timeout_s)
    labels = predict_batch(provider, space.matrix)
    return space, labels, provider, table


def _write_explanation(expl: Explanation, out_dir: Path, stem: str, trace: bool) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    record = expl.to_record()
    if trace and expl.trace is not None:
        trace_path = out_dir / f"{stem}_trace.jsonl"
        expl.trace.write_jsonl(str(trace_path))
        record["trace"] = trace_path.name
    (out_dir / f"{stem}.json").write_text(json.dumps(record, indent=2, sort_keys=True) + "\n",
                                          encoding="utf-8")
    (out_dir / f"{stem}.rule.txt").write_text(expl.rule_text() + "\n", encoding="utf-8")
    print(expl.rule_text())


def cmd_explain(args) -> int:
    space, labels, provider, table = _load_tabular(args)
    if args.query_row is not None:
        if not 0 <= args.query_row < table.n_rows:
            raise MaireError(f"--query-row {args.query_row} outside table of {table.n_rows} rows")
        q = space.matrix[args.query_row].copy()
        query_raw = [_jsonable(v) for v in table.row(args.query_row)]
    else:
        values = json.loads(args.query_json)
        q = space.encode_instance(values)
        query_raw = values
    query_label = int(predict_batch(provider, q[None, :])[0])
    expl = explain_encoded(q, space, labels, query_label, _optimizer_config(args),
                           max_attrs=args.max_attrs, query_raw=query_raw)
    _write_explanation(expl, Path(args.out_dir), "explanation", args.trace)
    return EXIT_OK if expl.feasible else EXIT_INFEASIBLE


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return float(v)
    return v


def cmd_synth(args) -> int:
    shape, space, labels = synthetic_dataset(args.shape, args.n_samples, args.seed)
    if args.query_json:
        q = np.asarray(json.loads(args.query_json), dtype=np.float64)
    else:
        q = np.asarray(DEFAULT_QUERIES[args.shape], dtype=np.float64)
    query_label = int(SyntheticOracle(shape).predict(q[None, :])[0])
    # figure mode shows the raw optimizer outcome: containment comes from the
    # lambda2 penalty alone, never from the final snap
    cfg = replace(_optimizer_config(args), containment_snap=False)
    expl = explain_encoded(q, space, labels, query_label, cfg,
                           max_attrs=args.max_attrs, query_raw=[float(v) for v in q])
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / f"{args.shape}.svg").write_text(render_figure(shape, expl.bounds, q),
                                               encoding="utf-8")
    _write_explanation(expl, out_dir, args.shape, args.trace)
    return EXIT_OK if expl.feasible else EXIT_INFEASIBLE


def cmd_bounds_audit(args) -> int:
    space, labels, provider, table = _load_tabular(args)
    constants = ApproxConstants.with_c1(args.c1, c2=args.c2, cl=args.cl, ch=args.ch)
    cfg = _optimizer_config(args)
    rng = np.random.default_rng(args.seed)
    n = space.matrix.shape[0]
    picks = rng.choice(n, size=min(args.queries, n), replace=False)

    cov_gaps, pre_gaps = [], []
    audit = None
    for row in picks:
        q = space.matrix[row]
        query_label = int(labels[row])
        expl = explain_encoded(q, space, labels, query_label, cfg, k=constants)
        cov = cov_exact(expl.bounds, space.matrix)
        ch_ = cov_hat(expl.bounds, space.matrix, constants)
        cov_gaps.append((cov - ch_) ** 2)
        pre = pre_exact_or_none(expl.bounds, space.matrix, labels, query_label)
        if pre is not None:
            ph = pre_hat(expl.bounds, space.matrix, labels, query_label, constants)
            pre_gaps.append((pre - ph) ** 2)
        audit = audit_bounds(expl.bounds, space.matrix, labels, query_label, constants, audit)

    report = {
        "queries": int(len(picks)),
        "mse_coverage": float(np.mean(cov_gaps)),
        "mse_precision": float(np.mean(pre_gaps)) if pre_gaps else None,
        "audit": audit.to_dict(),
    }
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "bounds_audit.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n",
                                               encoding="utf-8")
    print(json.dumps({k: report[k] for k in ("queries", "mse_coverage", "mse_precision")}))
    return EXIT_OK


def cmd_global(args) -> int:
    space, labels, provider, table = _load_tabular(args)
    cfg = _optimizer_config(args)
    rng = np.random.default_rng(args.seed)
    n = space.matrix.shape[0]
    anchors = [int(i) for i in rng.choice(n, size=min(args.anchors, n), replace=False)]

    def one(row: int) -> Explanation:
        return explain_encoded(space.matrix[row], space, labels, int(labels[row]), cfg,
                               max_attrs=args.max_attrs)

    threads = max(1, args.threads)
    if threads > 1 and args.predictor_cmd:
        log.warning("external predictor is single-threaded; ignoring --threads %d", threads)
        threads = 1
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            candidates = list(pool.map(one, anchors))
    else:
        candidates = [one(row) for row in anchors]

    budget = args.budget if args.budget is not None else len(candidates)
    selection = msd_select(candidates, space.matrix, labels, budget)
    selection.anchor_set = anchors

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "global.json").write_text(selection.to_json() + "\n", encoding="utf-8")
    lines = ["count,coverage,precision"]
    for i, (cov, pre) in enumerate(selection.curves, start=1):
        lines.append(f"{i},{cov:.6f},{'' if pre is None else f'{pre:.6f}'}")
    (out_dir / "curves.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"selected {len(selection.members)} of {len(candidates)} candidate explanations")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "explain":
            return cmd_explain(args)
        if args.command == "synth":
            return cmd_synth(args)
        if args.command == "bounds-audit":
            return cmd_bounds_audit(args)
        return cmd_global(args)
    except (MaireError, OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
