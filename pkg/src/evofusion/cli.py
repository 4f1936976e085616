"""Command-line entry points.

Subcommands: ``gen`` (write a synthetic benchmark), ``evolve`` (run the
search and dump Pareto sets, strategies, histories and a metric
summary), ``predict`` (score a pool with a saved strategy), ``eval``
(metrics for a prediction file). Exit codes: 0 success, 1 usage error,
2 data or format error.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import re
import sys
from pathlib import Path

import numpy as np

from .data import (
    SynthConfig,
    TaskData,
    generate_synthetic,
    load_all_tasks,
    load_strategy,
    read_fmat,
    read_labels,
    read_manifest,
    save_strategy,
    FormatError,
)
from .driver import (
    RunResult,
    TaskResult,
    evaluate_naive_mean,
    predict,
    run_evolution,
)
from .metrics import auprc, confusion, fpr, mcc, supplementary_metrics
from .nsga3 import environmental_selection
from .operators import EvoConfig
from .proxy import DECISION_THRESHOLD, ProxyConfig

SUMMARY_KEYS = ("auprc", "mcc", "fpr", "sen", "pre", "spe", "acc")

SELECTORS = {"nsga3": environmental_selection}


class CliError(Exception):
    def __init__(self, message: str, code: int = 2):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; this artifact reserves 2 for
    data errors, so usage problems exit 1 instead."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _section(doc: dict, name: str, cls):
    """Build a config dataclass from one document section, rejecting
    unknown keys."""
    raw = doc.get(name, {})
    if not isinstance(raw, dict):
        raise CliError(f"config section {name!r} must be an object")
    known = {f.name for f in dataclasses.fields(cls)}
    for key in raw:
        if key not in known:
            raise CliError(f"unknown key {key!r} in config section {name!r}")
    kwargs = dict(raw)
    if cls is SynthConfig and "informative" in kwargs and kwargs["informative"] is not None:
        kwargs["informative"] = tuple(tuple(int(k) for k in row) for row in kwargs["informative"])
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise CliError(f"invalid value in config section {name!r}: {exc}") from exc


def load_run_config(path) -> tuple[EvoConfig, ProxyConfig, SynthConfig]:
    path = Path(path)
    if not path.is_file():
        raise CliError(f"config file not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CliError(f"config parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}")
    if not isinstance(doc, dict):
        raise CliError("config document must be a JSON object")
    for key in doc:
        if key not in ("evolution", "proxy", "synthetic"):
            raise CliError(f"unknown key {key!r} at config top level")
    return (
        _section(doc, "evolution", EvoConfig),
        _section(doc, "proxy", ProxyConfig),
        _section(doc, "synthetic", SynthConfig),
    )


def _task_summary_lines(name: str, values: dict[str, float]) -> list[str]:
    lines = [f"task: {name}"]
    lines += [f"{key}: {values[key]!r}" for key in SUMMARY_KEYS]
    lines.append("")
    return lines


def _validation_metrics(task: TaskData, strategy) -> dict[str, float]:
    probs = predict(strategy, task.pool)[task.val_idx]
    y_val = task.labels[task.val_idx]
    counts = confusion(probs, y_val, DECISION_THRESHOLD)
    values = {"auprc": auprc(probs, y_val), "mcc": mcc(counts), "fpr": fpr(counts)}
    values.update(supplementary_metrics(counts))
    return values


def _write_outputs(out_dir: Path, tasks: list[TaskData], results: list[TaskResult]) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    task_names = [t.descriptor.name for t in tasks]
    summary_lines: list[str] = []
    for task, result in zip(tasks, results):
        name = result.task_name
        with open(out_dir / f"pareto.{name}.out", "w", encoding="utf-8") as fh:
            for ind in result.pareto:
                fh.write(
                    json.dumps(
                        {
                            "id": ind.id,
                            "g1": ind.objectives.g1,
                            "g2": ind.objectives.g2,
                            "genes": [[g.pool_index, g.op, g.w_c, g.w_f] for g in ind.genotype.genes],
                        },
                        sort_keys=True,
                    )
                    + "\n"
                )
        save_strategy(
            out_dir / f"strategy.{name}.out",
            result.strategy,
            name,
            task.pool[0].shape[1],
            task.descriptor.pool_size,
        )
        others = [n for n in task_names if n != name]
        with open(out_dir / f"history.{name}.csv", "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["generation", "task", "best_g1", "best_g2", "mean_g1"]
                + [f"transfers_from_{n}" for n in others]
            )
            for stat in result.history:
                row = [stat.generation, name, repr(stat.best_g1), repr(stat.best_g2), repr(stat.mean_g1)]
                row += [stat.transfers.get(task_names.index(n), 0) for n in others]
                writer.writerow(row)
        summary_lines += _task_summary_lines(name, _validation_metrics(task, result.strategy))
    (out_dir / "summary.out").write_text("\n".join(summary_lines), encoding="utf-8")


def cmd_gen(args) -> int:
    _, _, synth_cfg = load_run_config(args.config)
    manifest = generate_synthetic(synth_cfg, args.out)
    print(f"benchmark written to {args.out}")
    print(f"tasks: {manifest.task_count}, pool entries per task: {2 * manifest.task_count - 1}")
    for entry in manifest.tasks:
        print(
            f"  {entry.name}: residues={entry.residues} dim={entry.feature_dim} "
            f"positives={entry.positive_count} informative={list(entry.informative_indices)}"
        )
    return 0


def cmd_evolve(args) -> int:
    evo_cfg, proxy_cfg, _ = load_run_config(args.config)
    if args.seed is not None:
        evo_cfg = dataclasses.replace(evo_cfg, seed=args.seed)
    if args.no_enm:
        if args.naive_mean:
            print("warning: --no-enm is redundant with --naive-mean", file=sys.stderr)
        evo_cfg = dataclasses.replace(evo_cfg, transfer_prob=0.0)
    try:
        manifest = read_manifest(args.data)
        tasks = load_all_tasks(manifest)
    except (ValueError, OSError) as exc:
        raise CliError(f"cannot load benchmark: {exc}") from exc
    try:
        if args.naive_mean:
            results = []
            for task in tasks:
                ind = evaluate_naive_mean(task, proxy_cfg)
                if ind.failed:
                    raise CliError(f"naive mean evaluation failed on task {task.descriptor.name}")
                results.append(
                    TaskResult(
                        task_name=task.descriptor.name,
                        task_position=task.descriptor.position,
                        population=None,
                        pareto=[ind],
                        strategy=ind,
                        initial_best=ind.objectives,
                        history=[],
                    )
                )
            run = RunResult(results)
        else:
            selector = SELECTORS[args.selector]
            run = run_evolution(tasks, evo_cfg, proxy_cfg, threads=args.threads, selector=selector)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    _write_outputs(Path(args.out), tasks, run.tasks)
    print(f"results written to {args.out}")
    return 0


def _load_pool_dir(pool_dir: Path) -> list[np.ndarray]:
    entries = {}
    for path in pool_dir.iterdir():
        match = re.fullmatch(r"pool_(\d+)\.fmat", path.name)
        if match:
            entries[int(match.group(1))] = path
    if not entries:
        raise CliError(f"no pool_<k>.fmat files under {pool_dir}")
    if sorted(entries) != list(range(len(entries))):
        raise CliError(f"pool indices under {pool_dir} are not contiguous from 0")
    return [read_fmat(entries[k]) for k in sorted(entries)]


def cmd_predict(args) -> int:
    pool_dir = Path(args.pool_dir)
    if not pool_dir.is_dir():
        raise CliError(f"pool directory not found: {pool_dir}")
    try:
        strategy = load_strategy(args.strategy)
        pool = _load_pool_dir(pool_dir)
        probs = predict(strategy, pool)
    except FormatError as exc:
        raise CliError(str(exc)) from exc
    except (ValueError, KeyError, OSError) as exc:
        raise CliError(f"prediction failed: {exc}") from exc
    Path(args.out).write_text("".join(f"{float(p)!r}\n" for p in probs), encoding="utf-8")
    print(f"{probs.size} probabilities written to {args.out}")
    return 0


def cmd_eval(args) -> int:
    pred_path = Path(args.pred)
    if not pred_path.is_file():
        raise CliError(f"prediction file not found: {pred_path}")
    lines = [ln for ln in pred_path.read_text(encoding="utf-8").splitlines() if ln.strip()]
    if not lines:
        raise CliError(f"prediction file {pred_path} is empty")
    try:
        scores = np.array([float(ln) for ln in lines])
        labels = read_labels(args.labels)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    if scores.size != labels.size:
        raise CliError(f"{scores.size} predictions vs {labels.size} labels")
    try:
        counts = confusion(scores, labels, DECISION_THRESHOLD)
        values = {"auprc": auprc(scores, labels), "mcc": mcc(counts), "fpr": fpr(counts)}
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    values.update(supplementary_metrics(counts))
    for key in SUMMARY_KEYS:
        print(f"{key}: {values[key]!r}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="evofusion", description=__doc__)
    sub = parser.add_subparsers(dest="command")

    p_gen = sub.add_parser("gen", help="generate a synthetic benchmark")
    p_gen.add_argument("--config", required=True, help="JSON run configuration")
    p_gen.add_argument("--out", required=True, help="output benchmark directory")
    p_gen.set_defaults(func=cmd_gen)

    p_evo = sub.add_parser("evolve", help="run the multi-task search")
    p_evo.add_argument("--data", required=True, help="benchmark directory (with manifest)")
    p_evo.add_argument("--config", required=True, help="JSON run configuration")
    p_evo.add_argument("--out", required=True, help="output directory")
    p_evo.add_argument("--seed", type=int, default=None, help="override the configured seed")
    p_evo.add_argument("--no-enm", action="store_true", help="disable cross-task neighborhoods")
    p_evo.add_argument(
        "--naive-mean",
        action="store_true",
        help="skip evolution; evaluate the equal-weight mean of all pool entries",
    )
    p_evo.add_argument("--selector", choices=sorted(SELECTORS), default="nsga3")
    p_evo.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p_evo.set_defaults(func=cmd_evolve)

    p_pred = sub.add_parser("predict", help="score a pool directory with a saved strategy")
    p_pred.add_argument("--strategy", required=True)
    p_pred.add_argument("--pool-dir", dest="pool_dir", required=True)
    p_pred.add_argument("--out", required=True)
    p_pred.set_defaults(func=cmd_predict)

    p_eval = sub.add_parser("eval", help="print metrics for a prediction file")
    p_eval.add_argument("--pred", required=True)
    p_eval.add_argument("--labels", required=True)
    p_eval.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if not getattr(args, "func", None):
        parser.print_usage(sys.stderr)
        return 1
    try:
        return args.func(args)
    except CliError as exc:
        print(f"evofusion: error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
