"""Cross-validation harness and criterion grid search.

Folds are stratified by gold sense and fully determined by (occurrences, k,
seed), so any run is reproducible bit-for-bit.  The (word x criterion) grid is
evaluated cell by cell; cells are independent, so they can be dispatched to a
worker pool without affecting the results.
"""

from __future__ import annotations

import csv
import multiprocessing
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

from .classifiers import (
    Prediction,
    SmoothingParams,
    classify_dl,
    classify_nb,
    majority_sense,
    train_dl,
    train_nb,
)
from .corpus import Corpus, Occurrence, extract_occurrences
from .criteria import (
    DEFAULT_FILTER_SETS,
    Criterion,
    CriterionGrid,
    FilterSets,
    combine_features,
    enumerate_grid,
    extract_features,
    format_criterion,
    parse_criterion,
)

CLASSIFIERS = ("nb", "dl", "mfs")

GRID_CSV_HEADER = ("word", "category", "criterion", "size", "classifier",
                   "precision", "fold_precisions")


@dataclass(frozen=True)
class FoldPlan:
    """Stratified partition of one word's occurrences into k folds."""

    k: int
    seed: int
    occurrences: tuple[Occurrence, ...]
    assignment: tuple[int, ...]

    @property
    def as_mapping(self) -> dict[Occurrence, int]:
        return dict(zip(self.occurrences, self.assignment))

    def test_indices(self, fold: int) -> tuple[int, ...]:
        return tuple(i for i, f in enumerate(self.assignment) if f == fold)

    def train_indices(self, fold: int) -> tuple[int, ...]:
        return tuple(i for i, f in enumerate(self.assignment) if f != fold)


def kfold_split(occurrences: Sequence[Occurrence], k: int, seed: int) -> FoldPlan:
    """Deterministic stratified k-fold assignment.

    Each sense group is shuffled and dealt round-robin, rotating the starting
    fold between groups, so fold sizes differ by at most one overall and
    within every sense.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if len(occurrences) < k:
        raise ValueError(f"need at least k={k} occurrences, got {len(occurrences)}")
    groups: dict[str, list[int]] = {}
    for position, occ in enumerate(occurrences):
        groups.setdefault(occ.sense, []).append(position)
    rng = random.Random(seed)
    assignment = [0] * len(occurrences)
    offset = 0
    for sense in sorted(groups):
        positions = groups[sense][:]
        rng.shuffle(positions)
        for j, position in enumerate(positions):
            assignment[position] = (offset + j) % k
        offset = (offset + len(positions)) % k
    return FoldPlan(k, seed, tuple(occurrences), tuple(assignment))


@dataclass(frozen=True)
class DecisionRecord:
    """Trace of one classified occurrence; evidence fields are present only
    for decision-list decisions that did not fall back."""

    occurrence_id: str
    fold: int
    gold: str
    predicted: str
    used_fallback: bool
    evidence_offsets: tuple[int, ...] | None = None
    evidence_cgems: tuple[str, ...] | None = None

    @property
    def correct(self) -> bool:
        return self.predicted == self.gold


@dataclass(frozen=True)
class WordResult:
    lemma: str
    category: str
    criterion: str
    classifier: str
    precision: float
    fold_precisions: tuple[float, ...]
    records: tuple[DecisionRecord, ...]


@dataclass(frozen=True)
class SkippedWord:
    lemma: str
    category: str
    reason: str


def _classify_fold(
    classifier: str,
    training: list[tuple],
    test_vectors: list,
    smoothing: SmoothingParams,
) -> list[Prediction]:
    if classifier == "nb":
        model = train_nb(training, smoothing)
        return [classify_nb(model, v) for v in test_vectors]
    if classifier == "dl":
        model = train_dl(training, smoothing)
        return [classify_dl(model, v) for v in test_vectors]
    if classifier == "mfs":
        fallback = majority_sense([sense for _, sense in training])
        return [Prediction(fallback, 0.0, None, True) for _ in test_vectors]
    raise ValueError(f"unknown classifier {classifier!r}; expected one of {CLASSIFIERS}")


def cross_validate(
    corpus: Corpus,
    plan: FoldPlan,
    criteria: Criterion | Sequence[Criterion],
    classifier: str,
    smoothing: SmoothingParams = SmoothingParams(),
    *,
    filter_sets: FilterSets = DEFAULT_FILTER_SETS,
    content_mode: str = "reindex",
    keep_records: bool = True,
) -> WordResult:
    """Train on k-1 folds, classify the held-out fold, for every fold.

    ``criteria`` may be a single criterion or several; several are combined
    into one namespaced feature vector per occurrence.  Precision pools
    correct decisions over all folds, so every occurrence counts exactly once.
    """
    if isinstance(criteria, Criterion):
        criteria = (criteria,)
    else:
        criteria = tuple(criteria)
    if not criteria:
        raise ValueError("at least one criterion is required")
    occurrences = plan.occurrences
    if len(criteria) == 1:
        vectors = [
            extract_features(corpus, occ, criteria[0],
                             filter_sets=filter_sets, content_mode=content_mode)
            for occ in occurrences
        ]
    else:
        vectors = [
            combine_features([
                extract_features(corpus, occ, criterion,
                                 filter_sets=filter_sets, content_mode=content_mode)
                for criterion in criteria
            ])
            for occ in occurrences
        ]

    records: list[DecisionRecord] = []
    fold_precisions: list[float] = []
    total_correct = 0
    for fold in range(plan.k):
        train_idx = plan.train_indices(fold)
        test_idx = plan.test_indices(fold)
        training = [(vectors[i], occurrences[i].sense) for i in train_idx]
        predictions = _classify_fold(
            classifier, training, [vectors[i] for i in test_idx], smoothing
        )
        correct = 0
        for i, prediction in zip(test_idx, predictions):
            occ = occurrences[i]
            if prediction.sense == occ.sense:
                correct += 1
            if keep_records:
                evidence = prediction.evidence
                records.append(
                    DecisionRecord(
                        occurrence_id=occ.id,
                        fold=fold,
                        gold=occ.sense,
                        predicted=prediction.sense,
                        used_fallback=prediction.used_fallback,
                        evidence_offsets=evidence.offsets if evidence else None,
                        evidence_cgems=evidence.cgems if evidence else None,
                    )
                )
        fold_precisions.append(correct / len(test_idx) if test_idx else 0.0)
        total_correct += correct

    return WordResult(
        lemma=occurrences[0].lemma,
        category=occurrences[0].category,
        criterion="+".join(format_criterion(c) for c in criteria),
        classifier=classifier,
        precision=total_correct / len(occurrences),
        fold_precisions=tuple(fold_precisions),
        records=tuple(records),
    )


@dataclass(frozen=True)
class GridResult:
    """Full (word x criterion) precision matrix plus run coordinates."""

    results: tuple[WordResult, ...]
    skipped: tuple[SkippedWord, ...]
    criteria: tuple[str, ...]
    classifier: str
    k: int
    seed: int

    def by_word(self) -> dict[tuple[str, str], list[WordResult]]:
        grouped: dict[tuple[str, str], list[WordResult]] = {}
        for result in self.results:
            grouped.setdefault((result.lemma, result.category), []).append(result)
        return grouped

    def best_by_word(self) -> dict[tuple[str, str], WordResult]:
        """Per word, the best criterion: highest precision, ties to the
        smaller context size, then to grid order."""
        best: dict[tuple[str, str], WordResult] = {}
        for key, rows in self.by_word().items():
            chosen = rows[0]
            chosen_size = parse_criterion(chosen.criterion).size
            for row in rows[1:]:
                size = parse_criterion(row.criterion).size
                if row.precision > chosen.precision or (
                    row.precision == chosen.precision and size < chosen_size
                ):
                    chosen, chosen_size = row, size
            best[key] = chosen
        return best

    def category_averages(self) -> dict[tuple[str, str], float]:
        """Macro (unweighted over words) precision per (category, criterion)."""
        sums: dict[tuple[str, str], list[float]] = {}
        for result in self.results:
            sums.setdefault((result.category, result.criterion), []).append(result.precision)
        return {key: sum(values) / len(values) for key, values in sorted(sums.items())}


def macro_average(results: Sequence[WordResult]) -> dict[str, float]:
    """Unweighted mean of per-word precisions, grouped by category."""
    if not results:
        raise ValueError("cannot average zero results")
    groups: dict[str, list[float]] = {}
    for result in results:
        groups.setdefault(result.category, []).append(result.precision)
    return {category: sum(vals) / len(vals) for category, vals in sorted(groups.items())}


# Worker-pool state: populated in the parent before forking so child
# processes inherit it without per-task pickling of the corpus.
_POOL_STATE: dict = {}


def _init_pool(state: dict) -> None:
    global _POOL_STATE
    _POOL_STATE = state


def _eval_cell(cell: tuple[int, int]) -> WordResult:
    word_index, criterion_index = cell
    state = _POOL_STATE
    return cross_validate(
        state["corpus"],
        state["plans"][word_index],
        state["criteria"][criterion_index],
        state["classifier"],
        state["smoothing"],
        filter_sets=state["filter_sets"],
        content_mode=state["content_mode"],
        keep_records=False,
    )


def grid_search(
    corpus: Corpus,
    targets: Sequence[tuple[str, str]],
    grid: CriterionGrid | Sequence[Criterion],
    classifier: str,
    smoothing: SmoothingParams = SmoothingParams(),
    k: int = 10,
    seed: int = 0,
    *,
    jobs: int = 1,
    filter_sets: FilterSets = DEFAULT_FILTER_SETS,
    content_mode: str = "reindex",
) -> GridResult:
    """Cross-validate every (target word, criterion) pair.

    Words with fewer occurrences than k are skipped with a warning record
    rather than failing the run.  Results are ordered word-ascending then
    grid-order, independent of the worker count.
    """
    criteria = enumerate_grid(grid) if isinstance(grid, CriterionGrid) else list(grid)
    if not criteria:
        raise ValueError("empty criterion list")
    if not targets:
        raise ValueError("empty target list")
    if classifier not in CLASSIFIERS:
        raise ValueError(f"unknown classifier {classifier!r}; expected one of {CLASSIFIERS}")

    plans: list[FoldPlan] = []
    skipped: list[SkippedWord] = []
    for lemma, category in sorted(targets):
        occurrences = extract_occurrences(corpus, lemma, category)
        if len(occurrences) < k:
            skipped.append(
                SkippedWord(lemma, category, f"{len(occurrences)} occurrences < k={k}")
            )
            continue
        plans.append(kfold_split(occurrences, k, seed))

    cells = [(wi, ci) for wi in range(len(plans)) for ci in range(len(criteria))]
    state = {
        "corpus": corpus,
        "plans": plans,
        "criteria": criteria,
        "classifier": classifier,
        "smoothing": smoothing,
        "filter_sets": filter_sets,
        "content_mode": content_mode,
    }
    if jobs > 1 and cells:
        try:
            context = multiprocessing.get_context("fork")
        except ValueError:
            context = None
        if context is not None:
            with ProcessPoolExecutor(
                max_workers=jobs,
                mp_context=context,
                initializer=_init_pool,
                initargs=(state,),
            ) as pool:
                results = list(pool.map(_eval_cell, cells, chunksize=8))
        else:
            _init_pool(state)
            results = [_eval_cell(cell) for cell in cells]
    else:
        _init_pool(state)
        results = [_eval_cell(cell) for cell in cells]

    return GridResult(
        results=tuple(results),
        skipped=tuple(skipped),
        criteria=tuple(format_criterion(c) for c in criteria),
        classifier=classifier,
        k=k,
        seed=seed,
    )


def criterion_size(criterion: str) -> int:
    """Window size of a criterion string; the maximum for combined criteria."""
    return max(parse_criterion(part).size for part in criterion.split("+"))


def write_grid_csv(results: Iterable[WordResult], stream: TextIO) -> None:
    """One row per (word, criterion), in the given order."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(GRID_CSV_HEADER)
    for result in results:
        writer.writerow(
            (
                result.lemma,
                result.category,
                result.criterion,
                criterion_size(result.criterion),
                result.classifier,
                f"{result.precision:.6f}",
                ";".join(f"{p:.6f}" for p in result.fold_precisions),
            )
        )
