"""Command-line front end.

Subcommands: stats, evaluate, grid, evidence, ablation, selection, shift,
adjacency, pseudoword.  Every run writes its report CSVs plus a ``run.meta``
JSON capturing the full configuration, so any run can be replayed exactly.
Exit codes: 0 success, 2 bad configuration, 3 corpus parse error, 4 empty
result set.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .analysis import (
    adjacency_experiment,
    content_ablation,
    context_report,
    evidence_profile,
    selection_comparison,
    shift_study,
    write_ablation_csv,
    write_adjacency_csv,
    write_context_csv,
    write_context_curves_csv,
    write_evidence_profile_csv,
    write_evidence_space_csv,
    write_evidence_summary_csv,
    write_selection_csv,
    write_shift_csv,
)
from .classifiers import SmoothingParams, PRIOR_MODES
from .corpus import (
    CorpusParseError,
    category_averages,
    extract_occurrences,
    generate_pseudoword_corpus,
    parse_corpus,
    parse_pseudoword_config,
    parse_targets,
    serialize_corpus,
    word_stats,
)
from .criteria import (
    CriterionParseError,
    CONTENT_MODES,
    default_grid,
    parse_criterion,
    parse_grid_config,
)
from .evaluation import (
    cross_validate,
    grid_search,
    kfold_split,
    write_grid_csv,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PARSE = 3
EXIT_EMPTY = 4

EVAL_COMMANDS = ("evaluate", "grid", "evidence", "ablation", "selection",
                 "shift", "adjacency")
COMMANDS = ("stats",) + EVAL_COMMANDS + ("pseudoword",)

STATS_HEADER = ("word", "category", "frequency", "senses", "entropy", "mfs")


@dataclass
class RunConfig:
    subcommand: str
    output: Path
    corpus: Path | None = None
    targets: Path | None = None
    criterion: str | None = None
    grid: str | None = None
    classifier: str = "nb"
    m: float = 1.0
    prior_mode: str = "feature-values"
    k: int = 10
    seed: int = 0
    jobs: int = 1
    shifts: tuple[int, ...] = (0, 1)
    content_mode: str = "reindex"
    config: Path | None = None
    diagnostics: list[str] = field(default_factory=list)


def validate_config(config: RunConfig) -> list[str]:
    """All configuration violations at once, not just the first."""
    problems = list(config.diagnostics)
    if config.subcommand not in COMMANDS:
        problems.append(f"unknown subcommand {config.subcommand!r}")
    if config.subcommand == "pseudoword":
        if config.config is None:
            problems.append("pseudoword needs --config")
        elif not config.config.is_file():
            problems.append(f"config file not found: {config.config}")
        return problems

    if config.corpus is None:
        problems.append("a corpus file is required (--corpus)")
    elif not config.corpus.is_file():
        problems.append(f"corpus file not found: {config.corpus}")
    if config.targets is None:
        problems.append("a targets file is required (--targets)")
    elif not config.targets.is_file():
        problems.append(f"targets file not found: {config.targets}")

    if config.subcommand in EVAL_COMMANDS:
        if config.classifier not in ("nb", "dl"):
            problems.append(
                f"unknown classifier {config.classifier!r}: valid ids are nb, dl"
            )
        if config.k < 2:
            problems.append("k must be >= 2")
        if config.m < 0:
            problems.append("smoothing strength m must be >= 0")
        if config.prior_mode not in PRIOR_MODES:
            problems.append(f"prior mode must be one of {PRIOR_MODES}")
        if config.jobs < 1:
            problems.append("jobs must be >= 1")
        if config.content_mode not in CONTENT_MODES:
            problems.append(f"content mode must be one of {CONTENT_MODES}")
    if config.subcommand in ("evaluate", "evidence", "selection", "shift"):
        if config.criterion:
            try:
                for part in config.criterion.split("+"):
                    parse_criterion(part)
            except CriterionParseError as exc:
                problems.append(str(exc))
    if config.subcommand in ("grid", "ablation") and config.grid not in (None, "default"):
        if not Path(config.grid).is_file():
            problems.append(f"grid config file not found: {config.grid}")
    if config.subcommand == "shift" and 0 not in config.shifts:
        problems.append("the shift list must include 0")
    if config.subcommand == "evidence" and config.criterion:
        if "+" in config.criterion:
            problems.append("evidence profiles take a single unigram criterion")
        else:
            try:
                parsed = parse_criterion(config.criterion)
                if parsed.order != 1:
                    problems.append("evidence profiles need a unigram criterion")
            except CriterionParseError:
                pass  # already reported above
    return problems


def _load_grid(config: RunConfig):
    if config.grid in (None, "default"):
        return default_grid()
    return parse_grid_config(Path(config.grid).read_text(encoding="utf-8"))


def _write(path: Path, writer_fn) -> None:
    with open(path, "w", encoding="utf-8", newline="") as stream:
        writer_fn(stream)


def _write_meta(config: RunConfig, outdir: Path, extra: dict) -> None:
    meta = {
        "tool": "wsdlab",
        "version": __version__,
        "subcommand": config.subcommand,
        "corpus": str(config.corpus) if config.corpus else None,
        "targets": str(config.targets) if config.targets else None,
        "criterion": config.criterion,
        "grid": config.grid,
        "classifier": config.classifier,
        "m": config.m,
        "prior_mode": config.prior_mode,
        "k": config.k,
        "seed": config.seed,
        "jobs": config.jobs,
        "shifts": list(config.shifts),
        "content_mode": config.content_mode,
        "config": str(config.config) if config.config else None,
        "output": str(config.output),
    }
    meta.update(extra)
    path = outdir / "run.meta"
    path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _format_stat(value) -> str:
    return "" if value is None else f"{value:.6f}"


def run(config: RunConfig) -> int:
    """Execute one subcommand; returns the process exit code."""
    problems = validate_config(config)
    if problems:
        for problem in problems:
            print(f"error: {problem}", file=sys.stderr)
        return EXIT_CONFIG

    outdir = config.output
    smoothing = SmoothingParams(config.m, config.prior_mode)

    if config.subcommand == "pseudoword":
        pw_config = parse_pseudoword_config(config.config.read_text(encoding="utf-8"))
        seed = config.seed if config.seed is not None else pw_config.seed
        corpus = generate_pseudoword_corpus(pw_config, seed)
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / "corpus.tsv").write_text(serialize_corpus(corpus), encoding="utf-8")
        (outdir / "targets.tsv").write_text(
            f"{pw_config.target_lemma}\t{pw_config.category}\n", encoding="utf-8"
        )
        _write_meta(config, outdir, {"pseudoword_seed": seed,
                                     "occurrences": len(corpus.documents)})
        return EXIT_OK

    try:
        corpus = parse_corpus(config.corpus.read_text(encoding="utf-8"))
    except CorpusParseError as exc:
        print(f"error: corpus {config.corpus}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        targets = parse_targets(config.targets.read_text(encoding="utf-8"))
    except ValueError as exc:
        print(f"error: targets {config.targets}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if not targets:
        print("error: the targets file lists no targets", file=sys.stderr)
        return EXIT_EMPTY

    meta_extra: dict = {}

    if config.subcommand == "stats":
        stats = word_stats(corpus, targets)
        averages = category_averages(stats)

        def write_stats(stream) -> None:
            writer = csv.writer(stream, lineterminator="\n")
            writer.writerow(STATS_HEADER)
            for row in stats:
                writer.writerow(
                    (row.lemma, row.category, row.frequency, row.senses,
                     _format_stat(row.entropy), _format_stat(row.mfs))
                )
            for category, avg in averages.items():
                writer.writerow(
                    ("AVERAGE", category, f"{avg.frequency:.1f}", f"{avg.senses:.1f}",
                     f"{avg.entropy:.6f}", f"{avg.mfs:.6f}")
                )

        outdir.mkdir(parents=True, exist_ok=True)
        _write(outdir / "stats.csv", write_stats)
        _write_meta(config, outdir, meta_extra)
        return EXIT_OK

    if config.subcommand == "evaluate":
        criteria = [parse_criterion(part) for part in config.criterion.split("+")]
        results = []
        skipped = []
        for lemma, category in sorted(targets):
            occurrences = extract_occurrences(corpus, lemma, category)
            if len(occurrences) < config.k:
                skipped.append((lemma, category, len(occurrences)))
                continue
            plan = kfold_split(occurrences, config.k, config.seed)
            results.append(
                cross_validate(corpus, plan, criteria, config.classifier, smoothing,
                               content_mode=config.content_mode, keep_records=False)
            )
        for lemma, category, n in skipped:
            print(f"warning: skipping {lemma} ({category}): {n} occurrences < k",
                  file=sys.stderr)
        if not results:
            print("error: no target word has enough occurrences", file=sys.stderr)
            return EXIT_EMPTY
        outdir.mkdir(parents=True, exist_ok=True)
        _write(outdir / "evaluate.csv", lambda s: write_grid_csv(results, s))
        meta_extra["skipped"] = [f"{lemma} ({category})" for lemma, category, _ in skipped]
        _write_meta(config, outdir, meta_extra)
        return EXIT_OK

    if config.subcommand in ("grid", "ablation"):
        grid = _load_grid(config)
        result = grid_search(
            corpus, targets, grid, config.classifier, smoothing,
            config.k, config.seed, jobs=config.jobs, content_mode=config.content_mode,
        )
        for item in result.skipped:
            print(f"warning: skipping {item.lemma} ({item.category}): {item.reason}",
                  file=sys.stderr)
        if not result.results:
            print("error: no target word has enough occurrences", file=sys.stderr)
            return EXIT_EMPTY
        outdir.mkdir(parents=True, exist_ok=True)
        meta_extra["skipped"] = [f"{s.lemma} ({s.category})" for s in result.skipped]
        if config.subcommand == "grid":
            _write(outdir / "grid.csv", lambda s: write_grid_csv(result.results, s))
            report = context_report(result)
            _write(outdir / "context.csv", lambda s: write_context_csv(report, s))
            _write(outdir / "context_curves.csv",
                   lambda s: write_context_curves_csv(report, s))
        else:
            try:
                report = content_ablation(result)
            except ValueError as exc:
                print(f"error: {exc}", file=sys.stderr)
                return EXIT_CONFIG
            _write(outdir / "ablation.csv", lambda s: write_ablation_csv(report, s))
        _write_meta(config, outdir, meta_extra)
        return EXIT_OK

    if config.subcommand == "evidence":
        criterion = parse_criterion(config.criterion)
        profiles = {}
        records_by_category: dict[str, list] = {}
        skipped = []
        for lemma, category in sorted(targets):
            occurrences = extract_occurrences(corpus, lemma, category)
            if len(occurrences) < config.k:
                skipped.append((lemma, category))
                continue
            plan = kfold_split(occurrences, config.k, config.seed)
            result = cross_validate(corpus, plan, criterion, "dl", smoothing,
                                    content_mode=config.content_mode)
            records_by_category.setdefault(category, []).extend(result.records)
        if not records_by_category:
            print("error: no target word has enough occurrences", file=sys.stderr)
            return EXIT_EMPTY
        for category, records in sorted(records_by_category.items()):
            profiles[category] = evidence_profile(records)
        outdir.mkdir(parents=True, exist_ok=True)
        _write(outdir / "evidence_profile.csv",
               lambda s: write_evidence_profile_csv(profiles, s))
        _write(outdir / "evidence_space.csv",
               lambda s: write_evidence_space_csv(profiles, s))
        _write(outdir / "evidence_summary.csv",
               lambda s: write_evidence_summary_csv(profiles, s))
        meta_extra["skipped"] = [f"{lemma} ({category})" for lemma, category in skipped]
        _write_meta(config, outdir, meta_extra)
        return EXIT_OK

    if config.subcommand == "selection":
        criterion = parse_criterion(config.criterion)
        try:
            report = selection_comparison(
                corpus, targets, criterion, config.classifier, smoothing,
                config.k, config.seed, content_mode=config.content_mode,
            )
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_EMPTY
        outdir.mkdir(parents=True, exist_ok=True)
        _write(outdir / "selection.csv", lambda s: write_selection_csv(report, s))
        _write_meta(config, outdir, meta_extra)
        return EXIT_OK

    if config.subcommand == "shift":
        criterion = parse_criterion(config.criterion)
        try:
            report = shift_study(
                corpus, targets, criterion, config.shifts, config.classifier,
                smoothing, config.k, config.seed, content_mode=config.content_mode,
            )
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_EMPTY
        outdir.mkdir(parents=True, exist_ok=True)
        _write(outdir / "shift.csv", lambda s: write_shift_csv(report, s))
        _write_meta(config, outdir, meta_extra)
        return EXIT_OK

    if config.subcommand == "adjacency":
        try:
            result = adjacency_experiment(
                corpus, targets, config.classifier, smoothing,
                config.k, config.seed, content_mode=config.content_mode,
            )
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_EMPTY
        outdir.mkdir(parents=True, exist_ok=True)
        _write(outdir / "adjacency.csv", lambda s: write_adjacency_csv(result, s))
        _write_meta(config, outdir, meta_extra)
        return EXIT_OK

    raise AssertionError(f"unhandled subcommand {config.subcommand}")


def _add_common(parser: argparse.ArgumentParser, *, evaluation: bool) -> None:
    parser.add_argument("--corpus", type=Path, required=False, help="corpus file (vertical TSV)")
    parser.add_argument("--targets", type=Path, required=False,
                        help="targets file (lemma<TAB>category per line)")
    parser.add_argument("-o", "--output", type=Path, required=True, help="output directory")
    if evaluation:
        parser.add_argument("--classifier", default="nb", help="classifier id: nb or dl")
        parser.add_argument("--m", type=float, default=1.0, help="m-estimate strength")
        parser.add_argument("--prior-mode", default="feature-values",
                            choices=PRIOR_MODES, dest="prior_mode")
        parser.add_argument("--k", type=int, default=10, help="cross-validation folds")
        parser.add_argument("--seed", type=int, default=0, help="fold-plan seed")
        parser.add_argument("--jobs", type=int, default=1, help="worker processes")
        parser.add_argument("--content-mode", default="reindex", dest="content_mode",
                            choices=CONTENT_MODES,
                            help="filtered-window indexing: re-index survivors or keep gaps")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wsdlab",
        description="Systematic evaluation of word-sense-disambiguation criteria.",
    )
    parser.add_argument("--version", action="version", version=f"wsdlab {__version__}")
    subparsers = parser.add_subparsers(dest="subcommand", required=True)

    p = subparsers.add_parser("stats", help="per-word frequency/sense/entropy/MFS table")
    _add_common(p, evaluation=False)

    p = subparsers.add_parser("evaluate", help="cross-validate one criterion")
    _add_common(p, evaluation=True)
    p.add_argument("--criterion", required=True,
                   help="criterion string; combine several with '+'")

    p = subparsers.add_parser("grid", help="cross-validate a criterion grid")
    _add_common(p, evaluation=True)
    p.add_argument("--grid", default="default",
                   help="'default' (the 576-criterion space) or a grid config file")

    p = subparsers.add_parser("evidence", help="decision-evidence profile (DL)")
    _add_common(p, evaluation=True)
    p.add_argument("--criterion", default="[1gr|mform|ordered|all]@2",
                   help="unigram criterion to profile")

    p = subparsers.add_parser("ablation", help="all-words vs content-words decrease")
    _add_common(p, evaluation=True)
    p.add_argument("--grid", default="default",
                   help="'default' or a grid config file (must pair all/content)")

    p = subparsers.add_parser("selection", help="all/content/selected filter comparison")
    _add_common(p, evaluation=True)
    p.add_argument("--criterion", default="[1gr|mform|ordered|all]@2",
                   help="base criterion (filter must be 'all')")

    p = subparsers.add_parser("shift", help="shifted-window study")
    _add_common(p, evaluation=True)
    p.add_argument("--criterion", default="[1gr|lemma|ordered|all]@2")
    p.add_argument("--shifts", default="0,1",
                   help="comma-separated signed shifts; must include 0")

    p = subparsers.add_parser("adjacency", help="anchored n-gram combination experiment")
    _add_common(p, evaluation=True)

    p = subparsers.add_parser("pseudoword", help="generate a pseudo-word corpus")
    p.add_argument("--config", type=Path, required=True, help="pseudo-word config file")
    p.add_argument("--seed", type=int, default=None,
                   help="generation seed (defaults to the config seed)")
    p.add_argument("-o", "--output", type=Path, required=True, help="output directory")

    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    config = RunConfig(subcommand=args.subcommand, output=args.output)
    for name in ("corpus", "targets", "criterion", "grid", "classifier", "m",
                 "prior_mode", "k", "jobs", "content_mode", "config"):
        if hasattr(args, name) and getattr(args, name) is not None:
            setattr(config, name, getattr(args, name))
    if hasattr(args, "seed") and args.seed is not None:
        config.seed = args.seed
    elif args.subcommand == "pseudoword":
        config.seed = None  # resolved from the config file
    if hasattr(args, "shifts"):
        try:
            config.shifts = tuple(int(s) for s in args.shifts.split(","))
        except ValueError:
            config.diagnostics.append(f"bad shift list {args.shifts!r}")
    return config


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    config = config_from_args(args)
    try:
        return run(config)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
