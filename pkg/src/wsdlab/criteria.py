"""Homogeneous disambiguation criteria and contextual feature extraction.

A criterion is named ``[<n>gr|<tag>|<positioning>|<filter>]@<size>`` with
optional ``shift<sign><digits>`` and ``anchored`` suffixes, e.g.
``[2gr|lemma|leftright|all]@4`` or ``[1gr|mform|ordered|all]@2shift+1``.
It maps a target occurrence to a set of features: n-grams of tag values drawn
from the context window ``[-size+shift, size+shift]`` around the target.

Positioning decides how much location information a feature key retains:

* ``ordered``    - keys carry the exact window offsets;
* ``leftright``  - keys carry only the side of the target (left or right);
* ``unordered``  - keys carry the values alone.

Word filters (``content``, ``selected``) remove closed-class context tokens
*before* the window is applied: surviving tokens are re-indexed so that the
nearest kept token on each side sits at offset +/-1.  This widens the lexical
reach of a fixed window size.  The alternative ``keep_gaps`` extraction mode
preserves original offsets instead (n-grams then only form across adjacent
survivors).

Non-anchored n-grams never span the target; anchored criteria instead keep
exactly the n-grams that contain it, with the target's own tag value filling
its slot.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .corpus import Corpus, Occurrence, Token

TAGS = ("mform", "lemma", "ems", "cgems")
POSITIONINGS = ("ordered", "leftright", "unordered")
FILTERS = ("all", "content", "selected")
CONTENT_MODES = ("reindex", "keep_gaps")

# Coarse tags counted as content words (open classes); configurable via FilterSets.
CONTENT_TAGS = frozenset({"NCOM", "NPRO", "ADJ", "ADV", "VCON", "VINF", "VPAR"})

# Per-category tag lists for the "selected" filter: the coarse parts-of-speech
# that act as the most reliable indicators for each target category.
SELECTED_TAGS: Mapping[str, frozenset[str]] = {
    "noun": frozenset({"NCOM", "PREP", "ADJ", "SUB", "VINF", "NPRO", "VPAR", "PRODE"}),
    "adjective": frozenset({"NCOM", "DET", "ADJ", "ADV", "VINF", "NPRO"}),
    "verb": frozenset(
        {"NCOM", "ADJ", "PROPE", "PCTFORTE", "SUB", "VINF", "NPRO", "VPAR", "PRODE"}
    ),
}


class CriterionParseError(ValueError):
    pass


@dataclass(frozen=True)
class Criterion:
    """One feature-extraction recipe: n-gram order, tag, positioning, filter,
    window size, window shift, and whether n-grams must contain the target."""

    order: int
    tag: str
    positioning: str
    filter: str
    size: int
    shift: int = 0
    anchored: bool = False

    def __post_init__(self) -> None:
        if self.order < 1:
            raise ValueError("n-gram order must be >= 1")
        if self.tag not in TAGS:
            raise ValueError(f"unknown tag {self.tag!r}; expected one of {TAGS}")
        if self.positioning not in POSITIONINGS:
            raise ValueError(
                f"unknown positioning {self.positioning!r}; expected one of {POSITIONINGS}"
            )
        if self.filter not in FILTERS:
            raise ValueError(f"unknown filter {self.filter!r}; expected one of {FILTERS}")
        if self.size < 1:
            raise ValueError("context size must be >= 1")
        if self.anchored and self.order < 2:
            raise ValueError("anchored criteria need n-gram order >= 2")

    def __str__(self) -> str:
        return format_criterion(self)


def format_criterion(criterion: Criterion) -> str:
    """Canonical string form; round-trips through parse_criterion."""
    text = (
        f"[{criterion.order}gr|{criterion.tag}|{criterion.positioning}"
        f"|{criterion.filter}]@{criterion.size}"
    )
    if criterion.shift:
        text += f"shift{criterion.shift:+d}"
    if criterion.anchored:
        text += "anchored"
    return text


_SUFFIX_RE = re.compile(r"^(\d+)(?:shift([+-]\d+))?(anchored)?$")


def parse_criterion(text: str) -> Criterion:
    """Parse the criterion grammar; accepts ``position`` as an alias of
    ``ordered``."""
    stripped = text.strip()
    if not stripped.startswith("[") or "]@" not in stripped:
        raise CriterionParseError(f"expected '[...]@<size>' syntax in {text!r}")
    body, _, suffix = stripped[1:].partition("]@")
    params = body.split("|")
    if len(params) != 4:
        raise CriterionParseError(
            f"expected 4 '|'-separated parameters, got {len(params)} in {text!r}"
        )
    par1, tag, positioning, filt = params
    match = re.fullmatch(r"(\d+)gr", par1)
    if not match:
        raise CriterionParseError(f"bad n-gram parameter {par1!r} (expected e.g. '2gr')")
    order = int(match.group(1))
    if tag not in TAGS:
        raise CriterionParseError(f"bad tag parameter {tag!r} (expected one of {TAGS})")
    if positioning == "position":
        positioning = "ordered"
    if positioning not in POSITIONINGS:
        raise CriterionParseError(
            f"bad positioning parameter {positioning!r} "
            f"(expected one of {POSITIONINGS + ('position',)})"
        )
    if filt not in FILTERS:
        raise CriterionParseError(f"bad filter parameter {filt!r} (expected one of {FILTERS})")
    suffix_match = _SUFFIX_RE.match(suffix)
    if not suffix_match:
        raise CriterionParseError(f"bad size/shift/anchored suffix {suffix!r}")
    size = int(suffix_match.group(1))
    shift = int(suffix_match.group(2)) if suffix_match.group(2) else 0
    anchored = suffix_match.group(3) is not None
    try:
        return Criterion(order, tag, positioning, filt, size, shift, anchored)
    except ValueError as exc:
        raise CriterionParseError(f"{text!r}: {exc}") from exc


@dataclass(frozen=True)
class CriterionGrid:
    """Finite parameter sets whose Cartesian product is a criterion space."""

    orders: tuple[int, ...] = (1, 2, 3)
    tags: tuple[str, ...] = TAGS
    positionings: tuple[str, ...] = POSITIONINGS
    filters: tuple[str, ...] = ("all", "content")
    sizes: tuple[int, ...] = (1, 2, 3, 4, 5, 6, 7, 8)

    def __len__(self) -> int:
        return (
            len(self.orders) * len(self.tags) * len(self.positionings)
            * len(self.filters) * len(self.sizes)
        )


def default_grid() -> CriterionGrid:
    """The standard 576-criterion grid: 3 orders x 4 tags x 3 positionings
    x 2 filters x sizes 1..8."""
    return CriterionGrid()


def enumerate_grid(grid: CriterionGrid) -> list[Criterion]:
    """Cartesian product in deterministic order: orders, then tags, then
    positionings, then filters, then sizes.  Shift 0 and non-anchored
    throughout."""
    for name in ("orders", "tags", "positionings", "filters", "sizes"):
        if not getattr(grid, name):
            raise ValueError(f"grid parameter set {name!r} is empty")
    return [
        Criterion(order, tag, positioning, filt, size)
        for order, tag, positioning, filt, size in itertools.product(
            grid.orders, grid.tags, grid.positionings, grid.filters, grid.sizes
        )
    ]


def _parse_int_list(value: str) -> tuple[int, ...]:
    items: list[int] = []
    for part in value.split(","):
        part = part.strip()
        if not part:
            continue
        span = re.fullmatch(r"(\d+)-(\d+)", part)
        if span:
            items.extend(range(int(span.group(1)), int(span.group(2)) + 1))
        else:
            items.append(int(part))
    return tuple(items)


def parse_grid_config(text: str) -> CriterionGrid:
    """Parse a grid config file: ``orders/tags/positionings/filters/sizes``
    keys with comma-separated values (sizes also accept ``1-8`` ranges)."""
    raw: dict[str, str] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, sep, value = stripped.partition("=")
        if not sep:
            raise ValueError(f"grid config line {number}: expected 'key = value'")
        raw[key.strip()] = value.strip()
    known = {"orders", "tags", "positionings", "filters", "sizes"}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ValueError(f"unknown grid config keys: {', '.join(unknown)}")
    kwargs: dict = {}
    if "orders" in raw:
        kwargs["orders"] = _parse_int_list(raw["orders"])
    if "sizes" in raw:
        kwargs["sizes"] = _parse_int_list(raw["sizes"])
    if "tags" in raw:
        kwargs["tags"] = tuple(t for t in (s.strip() for s in raw["tags"].split(",")) if t)
    if "positionings" in raw:
        kwargs["positionings"] = tuple(
            "ordered" if p == "position" else p
            for p in (s.strip() for s in raw["positionings"].split(","))
            if p
        )
    if "filters" in raw:
        kwargs["filters"] = tuple(
            f for f in (s.strip() for s in raw["filters"].split(",")) if f
        )
    grid = CriterionGrid(**kwargs)
    # Validate through the Criterion constructor using the first combination.
    enumerate_grid(
        CriterionGrid(
            grid.orders[:1], grid.tags[:1], grid.positionings[:1],
            grid.filters[:1], grid.sizes[:1],
        )
    )
    return grid


@dataclass(frozen=True)
class FilterSets:
    """Coarse-tag sets backing the content and selected word filters."""

    content: frozenset[str] = CONTENT_TAGS
    selected: Mapping[str, frozenset[str]] = field(
        default_factory=lambda: dict(SELECTED_TAGS)
    )

    def tags_for(self, filter_name: str, category: str) -> frozenset[str] | None:
        """Allowed cgems set for a filter, or None when all tokens pass."""
        if filter_name == "all":
            return None
        if filter_name == "content":
            return self.content
        if filter_name == "selected":
            if category not in self.selected:
                raise ValueError(f"no selected tag set for category {category!r}")
            return self.selected[category]
        raise ValueError(f"unknown filter {filter_name!r}")


DEFAULT_FILTER_SETS = FilterSets()


@dataclass(frozen=True)
class Feature:
    """One piece of contextual evidence: an identity key plus the window
    offsets and coarse tags of the tokens it was built from."""

    key: str
    offsets: tuple[int, ...]
    cgems: tuple[str, ...]


@dataclass(frozen=True)
class FeatureVector:
    """Deduplicated feature set extracted from one occurrence; iteration is
    sorted by key so downstream arithmetic is order-independent."""

    features: tuple[Feature, ...]
    criterion: Criterion | None = None

    @classmethod
    def build(cls, features: Iterable[Feature], criterion: Criterion | None) -> "FeatureVector":
        unique: dict[str, Feature] = {}
        for feat in features:
            unique.setdefault(feat.key, feat)
        ordered = tuple(unique[key] for key in sorted(unique))
        return cls(ordered, criterion)

    def __iter__(self):
        return iter(self.features)

    def __len__(self) -> int:
        return len(self.features)

    def keys(self) -> frozenset[str]:
        return frozenset(f.key for f in self.features)


def _escape(value: str) -> str:
    return value.replace("\\", "\\\\").replace("_", "\\_")


def _span_key(criterion: Criterion, span: Sequence[tuple[int, str]]) -> str:
    values = "_".join(_escape(value) for _, value in span)
    start = span[0][0]
    if criterion.positioning == "ordered":
        return f"{start}:{values}"
    if criterion.positioning == "leftright":
        if criterion.anchored:
            return f"A{start}:{values}"
        return f"{'L' if start < 0 else 'R'}:{values}"
    return values  # unordered: values alone, internal order preserved


def _consecutive_runs(entries: list[tuple[int, Token]]) -> list[list[tuple[int, Token]]]:
    runs: list[list[tuple[int, Token]]] = []
    for offset, token in entries:
        if runs and offset == runs[-1][-1][0] + 1:
            runs[-1].append((offset, token))
        else:
            runs.append([(offset, token)])
    return runs


def extract_features(
    corpus: Corpus,
    occurrence: Occurrence,
    criterion: Criterion,
    *,
    filter_sets: FilterSets = DEFAULT_FILTER_SETS,
    content_mode: str = "reindex",
) -> FeatureVector:
    """Extract the feature vector a criterion yields for one occurrence.

    Pure function of the occurrence's document slice and the criterion; an
    occurrence at a document edge may yield an empty vector (windows truncate
    silently, spans are never padded).
    """
    if content_mode not in CONTENT_MODES:
        raise ValueError(f"content_mode must be one of {CONTENT_MODES}")
    doc = corpus.document(occurrence.document_id)
    tokens = doc.tokens
    index = occurrence.token_index
    allowed = filter_sets.tags_for(criterion.filter, occurrence.category)

    # Indexed context, offsets relative to the target.  With a word filter in
    # reindex mode, offsets count surviving tokens only.
    if allowed is None:
        left = [(-(k + 1), tokens[index - 1 - k]) for k in range(index)]
        right = [(k + 1, tokens[index + 1 + k]) for k in range(len(tokens) - index - 1)]
    elif content_mode == "reindex":
        kept_left = [t for t in tokens[:index] if t.cgems in allowed]
        left = [(-(k + 1), t) for k, t in enumerate(reversed(kept_left))]
        kept_right = [t for t in tokens[index + 1:] if t.cgems in allowed]
        right = [(k + 1, t) for k, t in enumerate(kept_right)]
    else:
        left = [
            (-(k + 1), tokens[index - 1 - k])
            for k in range(index)
            if tokens[index - 1 - k].cgems in allowed
        ]
        right = [
            (k + 1, tokens[index + 1 + k])
            for k in range(len(tokens) - index - 1)
            if tokens[index + 1 + k].cgems in allowed
        ]

    low = -criterion.size + criterion.shift
    high = criterion.size + criterion.shift
    window = sorted(
        [(o, t) for o, t in left if low <= o <= high]
        + [(o, t) for o, t in right if low <= o <= high]
    )

    features: list[Feature] = []

    def emit(span: list[tuple[int, Token]]) -> None:
        keyed = [(o, getattr(t, criterion.tag)) for o, t in span]
        features.append(
            Feature(
                key=_span_key(criterion, keyed),
                offsets=tuple(o for o, _ in span),
                cgems=tuple(t.cgems for _, t in span),
            )
        )

    if criterion.anchored:
        entries = sorted(window + [(0, tokens[index])])
        for run in _consecutive_runs(entries):
            for start in range(len(run) - criterion.order + 1):
                span = run[start:start + criterion.order]
                if any(o == 0 for o, _ in span):
                    emit(span)
    else:
        for run in _consecutive_runs(window):
            for start in range(len(run) - criterion.order + 1):
                emit(run[start:start + criterion.order])

    return FeatureVector.build(features, criterion)


def combine_features(vectors: Sequence[FeatureVector]) -> FeatureVector:
    """Union of feature vectors extracted from the same occurrence.

    With a single source criterion the union is the identity; with several,
    keys are namespaced by their criterion's canonical string so features
    from different criteria can never collide.
    """
    if not vectors:
        return FeatureVector((), None)
    criteria = []
    for vector in vectors:
        if vector.criterion is None:
            raise ValueError("combine_features needs vectors that carry their criterion")
        if vector.criterion not in criteria:
            criteria.append(vector.criterion)
    if len(criteria) == 1:
        return FeatureVector.build(
            (f for v in vectors for f in v), criteria[0]
        )
    namespaced = (
        Feature(f"{format_criterion(v.criterion)}::{f.key}", f.offsets, f.cgems)
        for v in vectors
        for f in v
    )
    return FeatureVector.build(namespaced, None)
