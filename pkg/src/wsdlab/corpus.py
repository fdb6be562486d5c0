"""Tagged-corpus handling: parsing, target statistics, pseudo-word generation.

The corpus file format is vertical UTF-8 text, one token per line with five
tab-separated columns ``mform<TAB>lemma<TAB>ems<TAB>cgems<TAB>sense`` where the
sense column may be empty.  A line starting with ``#doc `` opens a new document
whose id is the remainder of the line; blank lines are ignored.  Context
windows never cross document boundaries, so documents are the unit of context.
"""

from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

CATEGORIES = ("noun", "adjective", "verb")

# Document id assigned to tokens that appear before any "#doc " header.
IMPLICIT_DOC_ID = "doc0"


class CorpusParseError(ValueError):
    """Raised on malformed corpus input; carries the 1-based line number."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


@dataclass(frozen=True)
class Token:
    """One corpus word with its four tags and an optional sense label."""

    mform: str
    lemma: str
    ems: str
    cgems: str
    sense: str | None = None

    def __post_init__(self) -> None:
        for name in ("mform", "lemma", "ems", "cgems"):
            if not getattr(self, name):
                raise ValueError(f"token field {name!r} must be non-empty")
        if self.sense == "":
            raise ValueError("sense must be None when absent, not empty")


@dataclass(frozen=True)
class Document:
    id: str
    tokens: tuple[Token, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "tokens", tuple(self.tokens))


@dataclass(frozen=True)
class Corpus:
    documents: tuple[Document, ...]
    _by_id: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "documents", tuple(self.documents))
        by_id: dict[str, Document] = {}
        for doc in self.documents:
            if doc.id in by_id:
                raise ValueError(f"duplicate document id {doc.id!r}")
            by_id[doc.id] = doc
        object.__setattr__(self, "_by_id", by_id)

    def document(self, doc_id: str) -> Document:
        return self._by_id[doc_id]

    def __len__(self) -> int:
        return len(self.documents)


@dataclass(frozen=True)
class Occurrence:
    """A single sense-tagged instance of a target word."""

    document_id: str
    token_index: int
    lemma: str
    category: str
    sense: str

    @property
    def id(self) -> str:
        return f"{self.document_id}:{self.token_index}"


@dataclass(frozen=True)
class WordStats:
    """Per-target frequency, sense count, sense entropy and MFS baseline."""

    lemma: str
    category: str
    frequency: int
    senses: int
    entropy: float | None
    mfs: float | None


@dataclass(frozen=True)
class CategoryAverage:
    """Unweighted means of WordStats columns over one category's words."""

    category: str
    words: int
    frequency: float
    senses: float
    entropy: float
    mfs: float


def _iter_lines(source: str | TextIO | Iterable[str]) -> Iterable[str]:
    if isinstance(source, str):
        return source.splitlines()
    return (line.rstrip("\r\n") for line in source)


def parse_corpus(source: str | TextIO | Iterable[str]) -> Corpus:
    """Parse vertical corpus text into a Corpus.

    ``source`` may be a string, an open text file, or any iterable of lines.
    Raises CorpusParseError on a wrong column count or an empty tag field.
    """
    documents: list[Document] = []
    current_id: str | None = None
    current_tokens: list[Token] = []

    def flush() -> None:
        if current_id is not None:
            documents.append(Document(current_id, tuple(current_tokens)))

    for number, line in enumerate(_iter_lines(source), start=1):
        if not line.strip():
            continue
        if line.startswith("#doc "):
            flush()
            current_id = line[len("#doc "):]
            current_tokens = []
            continue
        fields = line.split("\t")
        if len(fields) != 5:
            raise CorpusParseError(
                number, f"expected 5 tab-separated columns, got {len(fields)}"
            )
        for position, name in enumerate(("mform", "lemma", "ems", "cgems")):
            if not fields[position]:
                raise CorpusParseError(number, f"empty {name} field (column {position + 1})")
        if current_id is None:
            current_id = IMPLICIT_DOC_ID
            current_tokens = []
        current_tokens.append(
            Token(fields[0], fields[1], fields[2], fields[3], fields[4] or None)
        )
    flush()
    return Corpus(tuple(documents))


def serialize_corpus(corpus: Corpus) -> str:
    """Render a Corpus back to the vertical format (inverse of parse_corpus)."""
    lines: list[str] = []
    for doc in corpus.documents:
        lines.append(f"#doc {doc.id}")
        for tok in doc.tokens:
            lines.append(
                "\t".join((tok.mform, tok.lemma, tok.ems, tok.cgems, tok.sense or ""))
            )
    return "\n".join(lines) + ("\n" if lines else "")


def extract_occurrences(corpus: Corpus, lemma: str, category: str) -> tuple[Occurrence, ...]:
    """All sense-tagged tokens of ``lemma``, in corpus order.

    Tokens with a matching lemma but no sense label are excluded: they cannot
    serve as training or test instances.
    """
    if category not in CATEGORIES:
        raise ValueError(f"unknown category {category!r}; expected one of {CATEGORIES}")
    found = []
    for doc in corpus.documents:
        for index, tok in enumerate(doc.tokens):
            if tok.lemma == lemma and tok.sense is not None:
                found.append(Occurrence(doc.id, index, lemma, category, tok.sense))
    return tuple(found)


def sense_distribution(occurrences: Sequence[Occurrence]) -> dict[str, float]:
    """Relative frequency of each sense; fractions sum to 1."""
    if not occurrences:
        raise ValueError("cannot compute a sense distribution of zero occurrences")
    counts = Counter(occ.sense for occ in occurrences)
    total = len(occurrences)
    return {sense: counts[sense] / total for sense in sorted(counts)}


def sense_entropy(distribution: dict[str, float]) -> float:
    """Shannon entropy of a sense distribution, in bits."""
    total = sum(distribution.values())
    if not math.isclose(total, 1.0, abs_tol=1e-6):
        raise ValueError(f"distribution sums to {total}, not 1")
    entropy = 0.0
    for p in distribution.values():
        if p < 0.0 or p > 1.0:
            raise ValueError(f"fraction {p} outside [0, 1]")
        if p > 0.0:
            entropy -= p * math.log2(p)
    return entropy


def mfs_baseline(occurrences: Sequence[Occurrence]) -> float:
    """Fraction held by the most frequent sense (the no-context baseline)."""
    if not occurrences:
        raise ValueError("cannot compute an MFS baseline of zero occurrences")
    counts = Counter(occ.sense for occ in occurrences)
    return max(counts.values()) / len(occurrences)


def word_stats(corpus: Corpus, targets: Sequence[tuple[str, str]]) -> list[WordStats]:
    """Frequency, sense count, entropy and MFS baseline for each target.

    Targets with zero sense-tagged occurrences are reported with frequency 0
    and null entropy/mfs.
    """
    stats = []
    for lemma, category in targets:
        occurrences = extract_occurrences(corpus, lemma, category)
        if not occurrences:
            stats.append(WordStats(lemma, category, 0, 0, None, None))
            continue
        distribution = sense_distribution(occurrences)
        stats.append(
            WordStats(
                lemma,
                category,
                len(occurrences),
                len(distribution),
                sense_entropy(distribution),
                mfs_baseline(occurrences),
            )
        )
    return stats


def category_averages(stats: Sequence[WordStats]) -> dict[str, CategoryAverage]:
    """Unweighted per-category means over words with at least one occurrence."""
    groups: dict[str, list[WordStats]] = {}
    for row in stats:
        if row.frequency > 0:
            groups.setdefault(row.category, []).append(row)
    averages = {}
    for category in CATEGORIES:
        rows = groups.get(category)
        if not rows:
            continue
        n = len(rows)
        averages[category] = CategoryAverage(
            category,
            n,
            sum(r.frequency for r in rows) / n,
            sum(r.senses for r in rows) / n,
            sum(r.entropy for r in rows) / n,
            sum(r.mfs for r in rows) / n,
        )
    return averages


def parse_targets(text: str) -> list[tuple[str, str]]:
    """Parse a targets file: one ``lemma<TAB>category`` per line.

    Blank lines and lines starting with ``#`` are ignored.
    """
    targets: list[tuple[str, str]] = []
    seen = set()
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise ValueError(
                f"targets line {number}: expected 'lemma<TAB>category', got {line!r}"
            )
        lemma, category = fields
        if category not in CATEGORIES:
            raise ValueError(
                f"targets line {number}: unknown category {category!r}; "
                f"expected one of {CATEGORIES}"
            )
        if (lemma, category) in seen:
            raise ValueError(f"targets line {number}: duplicate target {lemma!r}")
        seen.add((lemma, category))
        targets.append((lemma, category))
    return targets


# --- pseudo-word corpus generation -----------------------------------------

SIGNAL_MODES = ("unigram", "pair")


@dataclass(frozen=True)
class PseudowordConfig:
    """Recipe for a synthetic ambiguous-word corpus.

    Two or more source lemmas are merged into one pseudo-target; each source
    acts as a "sense".  Discriminative context tokens are planted at
    ``signal_offsets`` around every occurrence, then destroyed with
    probability ``noise``.  In ``pair`` mode the two planted tokens are only
    informative jointly: each token value occurs equally often with both
    senses, but the pair determines the sense.
    """

    sources: tuple[str, ...]
    counts: tuple[int, ...]
    signal_offsets: tuple[int, ...] = (-1,)
    signal_mode: str = "unigram"
    signal_values: tuple[str, ...] | None = None
    noise: float = 0.0
    vocabulary: int = 50
    width: int = 8
    category: str = "noun"
    target: str | None = None
    target_pos: str = "NCOM"
    signal_pos: str = "NCOM"
    filler_pos: tuple[str, ...] = ("NCOM", "DET", "PREP", "ADJ", "ADV", "VCON")
    seed: int = 0

    def __post_init__(self) -> None:
        if len(self.sources) < 2:
            raise ValueError("a pseudo-word needs at least 2 source lemmas")
        if len(self.counts) != len(self.sources):
            raise ValueError("counts must match sources one-to-one")
        if any(c < 1 for c in self.counts):
            raise ValueError("per-sense counts must be positive")
        if self.signal_mode not in SIGNAL_MODES:
            raise ValueError(f"signal_mode must be one of {SIGNAL_MODES}")
        if not self.signal_offsets:
            raise ValueError("at least one signal offset is required")
        if any(o == 0 for o in self.signal_offsets):
            raise ValueError("signal offsets must be non-zero")
        if any(abs(o) > self.width for o in self.signal_offsets):
            raise ValueError("signal offsets must lie within the context width")
        if self.signal_mode == "pair":
            offsets = sorted(self.signal_offsets)
            if len(self.sources) != 2:
                raise ValueError("pair mode supports exactly 2 sources")
            if len(offsets) != 2 or offsets[1] != offsets[0] + 1:
                raise ValueError("pair mode needs exactly 2 consecutive offsets")
            if self.signal_values is not None:
                raise ValueError("signal_values apply to unigram mode only")
        if self.signal_values is not None and len(self.signal_values) != len(self.sources):
            raise ValueError("signal_values must match sources one-to-one")
        if not 0.0 <= self.noise <= 1.0:
            raise ValueError("noise must be in [0, 1]")
        if self.vocabulary < 1:
            raise ValueError("vocabulary size must be >= 1")
        if self.width < 1:
            raise ValueError("context width must be >= 1")
        if self.category not in CATEGORIES:
            raise ValueError(f"category must be one of {CATEGORIES}")
        if not self.filler_pos:
            raise ValueError("filler_pos must be non-empty")

    @property
    def target_lemma(self) -> str:
        return self.target if self.target else "".join(self.sources)


def _parse_csv_list(value: str) -> list[str]:
    return [item.strip() for item in value.split(",") if item.strip()]


def parse_pseudoword_config(text: str) -> PseudowordConfig:
    """Parse the flat ``key = value`` pseudo-word config format."""
    raw: dict[str, str] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, sep, value = stripped.partition("=")
        if not sep:
            raise ValueError(f"config line {number}: expected 'key = value', got {line!r}")
        raw[key.strip()] = value.strip()

    known = {
        "sources", "counts", "signal_offsets", "signal_mode", "signal_values",
        "noise", "vocabulary", "width", "category", "target", "target_pos",
        "signal_pos", "filler_pos", "seed",
    }
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(unknown)}")
    if "sources" not in raw:
        raise ValueError("config is missing the required 'sources' key")

    sources = tuple(_parse_csv_list(raw["sources"]))
    if "counts" in raw:
        counts = tuple(int(c) for c in _parse_csv_list(raw["counts"]))
        if len(counts) == 1:
            counts = counts * len(sources)
    else:
        counts = (100,) * len(sources)

    kwargs: dict = {"sources": sources, "counts": counts}
    if "signal_offsets" in raw:
        kwargs["signal_offsets"] = tuple(int(o) for o in _parse_csv_list(raw["signal_offsets"]))
    if "signal_mode" in raw:
        kwargs["signal_mode"] = raw["signal_mode"]
    if "signal_values" in raw:
        kwargs["signal_values"] = tuple(_parse_csv_list(raw["signal_values"]))
    if "noise" in raw:
        kwargs["noise"] = float(raw["noise"])
    if "vocabulary" in raw:
        kwargs["vocabulary"] = int(raw["vocabulary"])
    if "width" in raw:
        kwargs["width"] = int(raw["width"])
    if "category" in raw:
        kwargs["category"] = raw["category"]
    if "target" in raw:
        kwargs["target"] = raw["target"]
    if "target_pos" in raw:
        kwargs["target_pos"] = raw["target_pos"]
    if "signal_pos" in raw:
        kwargs["signal_pos"] = raw["signal_pos"]
    if "filler_pos" in raw:
        kwargs["filler_pos"] = tuple(_parse_csv_list(raw["filler_pos"]))
    if "seed" in raw:
        kwargs["seed"] = int(raw["seed"])
    return PseudowordConfig(**kwargs)


def generate_pseudoword_corpus(config: PseudowordConfig, seed: int) -> Corpus:
    """Build a deterministic pseudo-word corpus: one document per occurrence.

    Every occurrence is a run of filler tokens with the pseudo-target in the
    middle; its gold sense is the source lemma it stands for.  Pure function
    of (config, seed).
    """
    rng = random.Random(seed)
    target = config.target_lemma
    pair_offsets = tuple(sorted(config.signal_offsets))

    def filler_token() -> Token:
        lemma = f"w{rng.randrange(config.vocabulary)}"
        pos = config.filler_pos[rng.randrange(len(config.filler_pos))]
        return Token(lemma, lemma, pos, pos)

    def signal_token(lemma: str) -> Token:
        if rng.random() < config.noise:
            return filler_token()
        return Token(lemma, lemma, config.signal_pos, config.signal_pos)

    documents = []
    serial = 0
    for sense_index, (source, count) in enumerate(zip(config.sources, config.counts)):
        for _ in range(count):
            if config.signal_mode == "pair":
                flip = rng.randrange(2)
                pair_values = {
                    pair_offsets[0]: f"u{flip}",
                    pair_offsets[1]: f"v{flip if sense_index == 0 else 1 - flip}",
                }
            tokens = []
            for offset in range(-config.width, config.width + 1):
                if offset == 0:
                    tokens.append(
                        Token(target, target, config.target_pos, config.target_pos, source)
                    )
                elif offset in config.signal_offsets:
                    if config.signal_mode == "pair":
                        tokens.append(signal_token(pair_values[offset]))
                    elif config.signal_values is not None:
                        tokens.append(signal_token(config.signal_values[sense_index]))
                    else:
                        tokens.append(signal_token(f"cue{sense_index}"))
                else:
                    tokens.append(filler_token())
            documents.append(Document(f"{target}-{serial:05d}", tuple(tokens)))
            serial += 1
    return Corpus(tuple(documents))
