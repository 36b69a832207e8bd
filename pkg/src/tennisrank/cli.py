"""Command line entry point: ingest, rank, evaluate, search, fit-prob, auroc, report."""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

from . import dataset
from .config import RunConfig, load_config, parse_years
from .errors import ConfigError, InsufficientDataError, TennisRankError
from .evaluation import SLICES, EvalReport, Predictor, PredictorKind, evaluate_years
from .probability import (
    bin_hit_rates,
    build_tree,
    fit_logistic,
    model_json,
    score_predictor,
    tree_from_json,
)
from .ranking import rank_players, window_graph
from .search import HitRateEvaluator, coordinate_search, sample_test_set, separable_objective
from .weights import parse_params

logger = logging.getLogger("tennisrank")

KINDS = [k.value for k in PredictorKind]


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _require_dir(path: Path | None, what: str) -> Path:
    if path is None:
        raise ConfigError(f"no {what} given (config or flag)")
    if not path.is_dir():
        raise ConfigError(f"{what} {path} does not exist")
    return path


def _predictors(cfg: RunConfig, which: str | None) -> list[Predictor]:
    kinds = KINDS if which == "all" else [which or cfg.predictor.value]
    out = []
    for kind in kinds:
        kind = PredictorKind(kind)
        if kind is PredictorKind.OFFICIAL:
            out.append(Predictor.official())
        elif kind is PredictorKind.UNIFORM:
            out.append(Predictor.uniform(cfg.uniform_age, cfg.pagerank))
        else:
            out.append(Predictor.parametric(cfg.params, cfg.pagerank))
    return out


class _Session:
    """Store plus evaluation cache shared across one invocation."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.store = dataset.load_store(_require_dir(cfg.store, "store"))
        self._reports: dict[Predictor, EvalReport] = {}

    def evaluate(self, predictor: Predictor) -> EvalReport:
        if predictor not in self._reports:
            self._reports[predictor] = evaluate_years(
                self.store, self.cfg.years, predictor, SLICES, keep_predictions=True,
                workers=self.cfg.workers,
            )
        return self._reports[predictor]


# ---------------------------------------------------------------------------
# Commands


def cmd_ingest(cfg: RunConfig, args) -> int:
    raw = _require_dir(cfg.raw_dir, "raw directory")
    if cfg.column_map is None:
        args.parser.error("ingest needs a column map (--column-map or [store] column_map)")
    if cfg.store is None:
        raise ConfigError("ingest needs an output store (--store or [store] path)")
    column_map = dataset.load_column_map(cfg.column_map)
    rows = dataset.parse_raw_files(raw, column_map)
    store = dataset.build_store(rows, column_map.aliases)
    dataset.save_store(store, cfg.store)
    completed = sum(m.completed for m in store.matches)
    print(f"rows\t{len(rows)}")
    print(f"players\t{len(store.players)}")
    print(f"tournaments\t{len(store.tournaments)}")
    print(f"matches\t{len(store.matches)}")
    print(f"completed\t{completed}")
    return 0


def cmd_rank(cfg: RunConfig, args) -> int:
    session = _Session(cfg)
    store = session.store
    if args.tournament_id is not None:
        target = store.tournament(args.tournament_id)
    elif args.tournament and args.year:
        target = store.find_tournament(args.tournament, args.year)
    else:
        raise ConfigError("rank needs --tournament NAME --year YEAR or --tournament-id ID")
    (predictor,) = _predictors(cfg, args.predictor)
    if predictor.kind is PredictorKind.OFFICIAL:
        raise ConfigError("rank builds a PageRank table; choose uniform or parametric")
    params = None if predictor.kind is PredictorKind.UNIFORM else predictor.params
    graph = window_graph(store, target.tournament_id, params, age_years=predictor.params.age_years)
    table = rank_players(graph, predictor.config, target.tournament_id)
    path = cfg.out_dir / f"rating_{target.tournament_id}_{predictor.kind.value}.tsv"
    _write(path, table.to_tsv())
    print(f"# {target.name} {target.year} ({target.surface.value}, {target.category.value}); {predictor.label()}")
    for e in table.entries[: args.top]:
        print(f"{e.position}\t{e.name}\t{e.score:.10g}")
    print(f"# {len(table.entries)} players -> {path}")
    return 0


def _eval_summary(report: EvalReport) -> str:
    o = report.overall
    return (f"{report.predictor}\tpooled={o.rate:.5%}\tmean_of_years={report.mean_of_years:.5%}"
            f"\thits={o.hits}\ttotal={o.total}\tskipped={report.skipped}")


def cmd_evaluate(cfg: RunConfig, args) -> int:
    session = _Session(cfg)
    for predictor in _predictors(cfg, args.predictor):
        report = session.evaluate(predictor)
        kind = predictor.kind.value
        _write(cfg.out_dir / f"eval_{kind}.json", report.to_json())
        for name in report.cells:
            _write(cfg.out_dir / f"eval_{kind}_{name}.tsv", report.slice_tsv(name))
        print(_eval_summary(report))
    return 0


def cmd_search(cfg: RunConfig, args) -> int:
    if args.synthetic == "separable":
        evaluator = separable_objective()
        test_set: list[int] = []
    else:
        session = _Session(cfg)
        test_set = sample_test_set(session.store, cfg.test_years or cfg.years, cfg.per_year, cfg.seed)
        evaluator = HitRateEvaluator(session.store, test_set, cfg.pagerank)
    state = coordinate_search(cfg.grid, evaluator, cfg.init)
    _write(cfg.out_dir / "search_trace.tsv", state.trace_tsv())
    summary = {
        "best": str(state.best),
        "score": state.best_score,
        "rounds": state.rounds,
        "converged": state.converged,
        "seed": cfg.seed,
        "test_set": test_set,
    }
    _write(cfg.out_dir / "search_result.json", json.dumps(summary, indent=2) + "\n")
    age, decay, surface, base = state.best.as_tuple()
    print(f"best\t({age:g}, {decay:g}, {surface:g}, {base:g})\t{state.best}")
    print(f"score\t{state.best_score:.6f}\trounds={state.rounds}\tconverged={state.converged}")
    return 0 if state.converged else 10


def _fit(cfg: RunConfig, report: EvalReport):
    bins = bin_hit_rates(report.predictions)
    global_model = fit_logistic(bins, cfg.min_bin_total)
    tree = build_tree(report.predictions, cfg.leaf_threshold, global_model, cfg.min_bin_total)
    return bins, tree


def cmd_fitprob(cfg: RunConfig, args) -> int:
    from .plots import plot_fit

    session = _Session(cfg)
    for predictor in _predictors(cfg, args.predictor):
        kind = predictor.kind.value
        report = session.evaluate(predictor)
        bins, tree = _fit(cfg, report)
        _write(cfg.out_dir / f"prob_{kind}.json", model_json(tree, bins, predictor.label()))
        _write(cfg.out_dir / f"prob_{kind}_bins.tsv",
               "diff\thits\ttotal\trate\n" + "".join(f"{b.diff}\t{b.hits}\t{b.total}\t{b.rate:.6f}\n" for b in bins))
        plot_fit([b for b in bins if b.total >= cfg.min_bin_total], tree.global_model,
                 cfg.out_dir / f"prob_{kind}.svg", predictor.label())
        fitted = sum(m is not None for m in tree.leaves.values())
        flag = " (degenerate)" if tree.global_model.degenerate else ""
        print(f"{predictor.label()}\ta={tree.global_model.a:.4f}{flag}\tbins={tree.global_model.n_points}"
              f"\tleaves_fitted={fitted}/{len(tree.leaves)}")
    return 0


def cmd_auroc(cfg: RunConfig, args) -> int:
    from .plots import plot_roc

    session = _Session(cfg)
    curves = {}
    for predictor in _predictors(cfg, args.predictor):
        kind = predictor.kind.value
        report = session.evaluate(predictor)
        model_path = cfg.out_dir / f"prob_{kind}.json"
        if args.use_saved_model and model_path.exists():
            tree = tree_from_json(model_path.read_text(encoding="utf-8"))
        else:
            _, tree = _fit(cfg, report)
        roc_global = score_predictor(report.predictions, tree.global_model, cfg.mirrored)
        roc_tree = score_predictor(report.predictions, tree, cfg.mirrored)
        _write(cfg.out_dir / f"roc_{kind}.tsv", roc_global.to_tsv())
        _write(cfg.out_dir / f"roc_{kind}_tree.tsv", roc_tree.to_tsv())
        curves[kind] = roc_global
        print(f"AUROC\t{kind}\tglobal={roc_global.auroc:.4f}\ttree={roc_tree.auroc:.4f}")
    plot_roc(curves, cfg.out_dir / "roc.svg")
    return 0


def _pct(x: float) -> str:
    return "n/a" if math.isnan(x) else f"{x:.3%}"


def cmd_report(cfg: RunConfig, args) -> int:
    session = _Session(cfg)
    predictors = _predictors(cfg, "all")
    reports = [session.evaluate(p) for p in predictors]
    labels = [p.kind.value for p in predictors]
    lines = ["# Predictive comparison", ""]
    lines.append("| year | " + " | ".join(labels) + " |")
    lines.append("|---" * (len(labels) + 1) + "|")
    for y in cfg.years:
        row = [_pct(r.cells["year"][str(y)].rate) for r in reports]
        lines.append(f"| {y} | " + " | ".join(row) + " |")
    lines.append("| mean of years | " + " | ".join(_pct(r.mean_of_years) for r in reports) + " |")
    lines.append("| pooled | " + " | ".join(_pct(r.pooled_rate) for r in reports) + " |")
    for name in ("surface", "category", "rank_band"):
        keys = sorted({k for r in reports for k in r.cells[name]},
                      key=lambda k: list(reports[0].cells[name]).index(k) if k in reports[0].cells[name] else 99)
        lines += ["", f"## By {name.replace('_', ' ')}", ""]
        lines.append(f"| {name} | " + " | ".join(labels) + " | matches |")
        lines.append("|---" * (len(labels) + 2) + "|")
        for k in keys:
            cells = [r.cells[name].get(k) for r in reports]
            total = max((c.total for c in cells if c), default=0)
            lines.append(f"| {k} | " + " | ".join(_pct(c.rate) if c else "n/a" for c in cells) + f" | {total} |")

    auroc = {}
    for p, r in zip(predictors, reports):
        try:
            _, tree = _fit(cfg, r)
            auroc[p.kind.value] = (score_predictor(r.predictions, tree.global_model, cfg.mirrored).auroc,
                                   score_predictor(r.predictions, tree, cfg.mirrored).auroc,
                                   tree.global_model.a)
        except InsufficientDataError as exc:
            logger.warning("%s: no probability model (%s)", p.label(), exc)
    lines += ["", "## Victory probability", "", "| predictor | a | AUROC global | AUROC tree |", "|---|---|---|---|"]
    for kind in labels:
        if kind in auroc:
            g, t, a = auroc[kind]
            lines.append(f"| {kind} | {a:.3f} | {g:.4f} | {t:.4f} |")
        else:
            lines.append(f"| {kind} | n/a | n/a | n/a |")
    text = "\n".join(lines) + "\n"
    _write(cfg.out_dir / "report.md", text)
    doc = {
        "evaluations": {p.kind.value: r.to_dict() for p, r in zip(predictors, reports)},
        "auroc": {k: {"global": v[0], "tree": v[1], "a": v[2]} for k, v in auroc.items()},
    }
    _write(cfg.out_dir / "report.json", json.dumps(doc, indent=2, sort_keys=True) + "\n")
    print(text, end="")
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tennisrank", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=Path, help="INI run configuration")
        p.add_argument("--out", type=Path, help="output directory")
        p.add_argument("--store", type=Path, help="store directory")
        p.add_argument("--seed", type=int)
        p.add_argument("--params", help="age=4,decay=5,surface=0.3,round=1.7")
        p.add_argument("--years", help="e.g. 2005-2013")
        p.add_argument("--workers", type=int)
        p.set_defaults(func=func, parser=p)
        return p

    p = add("ingest", cmd_ingest, "parse season files into a store")
    p.add_argument("--raw", type=Path, help="directory of season files")
    p.add_argument("--column-map", type=Path)

    p = add("rank", cmd_rank, "rank players before one tournament")
    p.add_argument("--tournament")
    p.add_argument("--year", type=int)
    p.add_argument("--tournament-id", type=int)
    p.add_argument("--predictor", choices=["uniform", "parametric"])
    p.add_argument("--top", type=int, default=10)

    p = add("evaluate", cmd_evaluate, "backtest predictors")
    p.add_argument("--predictor", choices=KINDS + ["all"])

    p = add("search", cmd_search, "coordinate search over weight parameters")
    p.add_argument("--synthetic", choices=["separable"], help="test hook: search a synthetic objective")

    p = add("fit-prob", cmd_fitprob, "fit victory-probability models")
    p.add_argument("--predictor", choices=KINDS + ["all"])

    p = add("auroc", cmd_auroc, "ROC / AUROC of victory probabilities")
    p.add_argument("--predictor", choices=KINDS + ["all"])
    p.add_argument("--mirrored", action="store_true", default=None,
                   help="also score each match from the underdog's side")
    p.add_argument("--use-saved-model", action="store_true", help="reuse prob_<kind>.json from the output dir")

    add("report", cmd_report, "collate comparison tables")
    return parser


def _config_from_args(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    try:
        cfg = cfg.override(
            out_dir=args.out,
            store=args.store,
            seed=args.seed,
            params=parse_params(args.params, cfg.params) if args.params else None,
            years=parse_years(args.years) if args.years else None,
            workers=args.workers,
            raw_dir=getattr(args, "raw", None),
            column_map=getattr(args, "column_map", None),
            mirrored=getattr(args, "mirrored", None),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _config_from_args(args)
        return args.func(cfg, args)
    except TennisRankError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
