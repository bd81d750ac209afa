"""Text corpus ingestion, adjective extraction, and storage.

A corpus is a set of scored text samples plus an adjective table derived
from them.  Adjective detection is lexicon membership: a token counts as an
adjective exactly when it appears in the lexicon supplied at ingest time.
That keeps extraction deterministic and dependency free, at the cost of
missing words outside the shipped list.

Samples carry optional per-trait scores in [0, 1] for the five traits
O, C, E, A, N (openness, conscientiousness, extraversion, agreeableness,
neuroticism).
"""

import json
import re
from collections import Counter
from dataclasses import dataclass, field, replace
from functools import cached_property
from importlib import resources
from pathlib import Path

from ._util import atomic_write_text, checksum
from .errors import CorpusFormatError, DatasetError

TRAITS = ("O", "C", "E", "A", "N")

CORPUS_FORMAT = "traitlex-corpus"
CORPUS_FORMAT_VERSION = 1

# Maximal runs of ASCII letters, allowing internal apostrophes and hyphens,
# so "don't" and "state-of-the-art" stay single tokens.
_TOKEN_RE = re.compile(r"[a-z]+(?:['\-][a-z]+)*")

# A text whose tokens contain at least this fraction of common English
# function words is assumed to be English when no language tag is present.
_STOPWORD_RATIO = 0.02


def tokenize(text: str) -> list[str]:
    """Lowercase and split into word tokens."""
    return _TOKEN_RE.findall(text.replace("’", "'").lower())


def _load_wordlist(name: str) -> frozenset:
    text = resources.files(__package__).joinpath(f"data/{name}").read_text("utf-8")
    return frozenset(line.strip() for line in text.splitlines() if line.strip())


_STOPWORDS = _load_wordlist("stopwords.txt")


def looks_english(tokens: list[str]) -> bool:
    """Stopword-ratio heuristic used when a record carries no language tag."""
    if not tokens:
        return False
    hits = sum(1 for t in tokens if t in _STOPWORDS)
    return hits / len(tokens) >= _STOPWORD_RATIO


@dataclass(frozen=True)
class AdjectiveLexicon:
    """A named, versioned set of lowercase adjective forms."""

    words: frozenset
    name: str
    version: str

    def __post_init__(self):
        if not self.words:
            raise DatasetError("lexicon is empty")
        bad = [w for w in self.words if not w or w != w.lower()]
        if bad:
            raise DatasetError(f"lexicon entries must be lowercase: {sorted(bad)[:5]}")

    def __contains__(self, word: str) -> bool:
        return word in self.words

    def __len__(self) -> int:
        return len(self.words)

    @classmethod
    def from_words(cls, words, name: str, version: str | None = None):
        words = frozenset(words)
        if version is None:
            version = "sha256:" + checksum("\n".join(sorted(words)))[:12]
        return cls(words=words, name=name, version=version)

    @classmethod
    def from_file(cls, path, name: str | None = None):
        path = Path(path)
        words = [
            line.strip().lower()
            for line in path.read_text("utf-8").splitlines()
            if line.strip()
        ]
        return cls.from_words(words, name=name or path.stem)


_BUNDLED: AdjectiveLexicon | None = None


def bundled_lexicon() -> AdjectiveLexicon:
    """The adjective list shipped with the package."""
    global _BUNDLED
    if _BUNDLED is None:
        _BUNDLED = AdjectiveLexicon.from_words(
            _load_wordlist("adjectives.txt"), name="builtin"
        )
    return _BUNDLED


def extract_adjectives(tokens: list[str], lexicon: AdjectiveLexicon) -> dict:
    """Count the tokens that are lexicon members, keyed by word."""
    return dict(Counter(t for t in tokens if t in lexicon))


@dataclass(frozen=True)
class TextSample:
    id: str
    text: str
    lang: str
    word_count: int
    adj_freqs: dict
    scores: dict | None = None

    def __post_init__(self):
        if not self.id or not isinstance(self.id, str):
            raise CorpusFormatError(f"sample id must be a non-empty string: {self.id!r}")
        if self.word_count < 0:
            raise CorpusFormatError(f"sample {self.id!r}: negative word_count")
        for word, freq in self.adj_freqs.items():
            if word != word.lower():
                raise CorpusFormatError(
                    f"sample {self.id!r}: adjective key {word!r} is not lowercase"
                )
            if not isinstance(freq, int) or freq < 1:
                raise CorpusFormatError(
                    f"sample {self.id!r}: adjective frequency must be a positive "
                    f"integer, got {word!r}: {freq!r}"
                )
        if self.scores is not None:
            _validate_scores(self.scores, where=f"sample {self.id!r}")

    @classmethod
    def from_text(cls, id, text, lexicon, lang=None, scores=None):
        tokens = tokenize(text)
        if lang is None:
            lang = "en" if looks_english(tokens) else "und"
        return cls(
            id=id,
            text=text,
            lang=lang,
            word_count=len(tokens),
            adj_freqs=extract_adjectives(tokens, lexicon),
            scores=scores,
        )


def _validate_scores(scores: dict, where: str) -> None:
    if not isinstance(scores, dict):
        raise CorpusFormatError(f"{where}: scores must be a mapping")
    for trait, value in scores.items():
        if trait not in TRAITS:
            raise CorpusFormatError(f"{where}: unknown trait {trait!r}")
        if not isinstance(value, (int, float)) or value != value:
            raise CorpusFormatError(f"{where}: score for {trait!r} is not a number")
        if not 0.0 <= value <= 1.0:
            raise CorpusFormatError(
                f"{where}: score out of range for trait {trait!r}: {value!r}"
            )


@dataclass(frozen=True)
class FilterPolicy:
    """Sample admission rules.

    Word-count bounds are exclusive on both sides: min_words=600 admits
    only samples with more than 600 words.  min_adjective_total_freq acts
    corpus-wide at ingest, dropping adjectives whose total count across all
    accepted samples is below the threshold.
    """

    min_words: int | None = None
    max_words: int | None = None
    required_lang: str | None = None
    min_adjective_total_freq: int = 0

    def __post_init__(self):
        if self.min_words is not None and self.min_words < 0:
            raise DatasetError("min_words must be non-negative")
        if (
            self.min_words is not None
            and self.max_words is not None
            and self.max_words <= self.min_words
        ):
            raise DatasetError("max_words must exceed min_words")
        if self.min_adjective_total_freq < 0:
            raise DatasetError("min_adjective_total_freq must be non-negative")

    def to_dict(self) -> dict:
        return {
            "min_words": self.min_words,
            "max_words": self.max_words,
            "required_lang": self.required_lang,
            "min_adjective_total_freq": self.min_adjective_total_freq,
        }

    @classmethod
    def from_dict(cls, d) -> "FilterPolicy":
        return cls(**d)


# Policy used when loading raw text into a store.
INGEST_DEFAULT = FilterPolicy(min_words=600, required_lang="en")
# Stricter length band applied before density-model prediction.
PDF_STAGE = FilterPolicy(min_words=1000, max_words=6000)

SHIPPED_POLICIES = {
    "none": FilterPolicy(),
    "ingest-default": INGEST_DEFAULT,
    "pdf-stage": PDF_STAGE,
}


def filter_sample(sample: TextSample, policy: FilterPolicy) -> str | None:
    """Return None when the sample is admitted, else the first failing rule."""
    if policy.required_lang is not None and sample.lang != policy.required_lang:
        return "lang"
    if policy.min_words is not None and sample.word_count <= policy.min_words:
        return "min_words"
    if policy.max_words is not None and sample.word_count >= policy.max_words:
        return "max_words"
    return None


@dataclass(frozen=True)
class AdjectiveEntry:
    """One adjective's total count and its per-sample occurrences."""

    word: str
    total_frequency: int
    occurrences: tuple  # of (sample_id, count, scores-or-None)


def derive_adjective_table(samples) -> dict:
    """Build the word table implied by a sequence of samples."""
    rows: dict[str, list] = {}
    for sample in samples:
        for word, count in sample.adj_freqs.items():
            rows.setdefault(word, []).append((sample.id, count, sample.scores))
    return {
        word: AdjectiveEntry(
            word=word,
            total_frequency=sum(c for _, c, _ in occ),
            occurrences=tuple(occ),
        )
        for word, occ in sorted(rows.items())
    }


@dataclass(frozen=True)
class CorpusStore:
    """Immutable sample collection with a derived adjective table."""

    samples: tuple
    lexicon_name: str
    lexicon_version: str
    policy: FilterPolicy | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        seen = set()
        for s in self.samples:
            if s.id in seen:
                raise CorpusFormatError(f"duplicate sample id {s.id!r}")
            seen.add(s.id)

    @cached_property
    def adjectives(self) -> dict:
        return derive_adjective_table(self.samples)

    @cached_property
    def _by_id(self) -> dict:
        return {s.id: s for s in self.samples}

    def get(self, sample_id: str) -> TextSample:
        try:
            return self._by_id[sample_id]
        except KeyError:
            raise CorpusFormatError(f"no sample with id {sample_id!r}") from None

    def __len__(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class IngestResult:
    store: CorpusStore
    rejections: tuple  # of (sample_id, rule-name)
    n_read: int


def _apply_min_total_freq(samples: list, threshold: int) -> list:
    if threshold <= 0:
        return samples
    totals: Counter = Counter()
    for s in samples:
        totals.update(s.adj_freqs)
    keep = {w for w, t in totals.items() if t >= threshold}
    return [
        replace(s, adj_freqs={w: c for w, c in s.adj_freqs.items() if w in keep})
        for s in samples
    ]


def ingest_jsonl(path, lexicon=None, policy=INGEST_DEFAULT) -> IngestResult:
    """Read one JSON record per line and build a store.

    Each record needs "id" and "text"; "lang" and "scores" are optional.
    Records with a missing language tag are classified by the stopword
    heuristic.  Malformed records abort the ingest with the line number;
    records that merely fail the policy are collected in the rejection
    report instead.
    """
    lexicon = lexicon or bundled_lexicon()
    path = Path(path)
    accepted: list[TextSample] = []
    rejections: list = []
    seen: set = set()
    n_read = 0
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            n_read += 1
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise CorpusFormatError(f"line {lineno}: invalid JSON ({e.msg})") from None
            if not isinstance(record, dict):
                raise CorpusFormatError(f"line {lineno}: record is not an object")
            for key in ("id", "text"):
                if not isinstance(record.get(key), str) or not record.get(key):
                    raise CorpusFormatError(
                        f"line {lineno}: missing or invalid {key!r} field"
                    )
            sample_id = record["id"]
            if sample_id in seen:
                raise CorpusFormatError(
                    f"line {lineno}: duplicate sample id {sample_id!r}"
                )
            seen.add(sample_id)
            scores = record.get("scores")
            if scores is not None:
                _validate_scores(scores, where=f"line {lineno}")
                scores = {t: float(v) for t, v in scores.items()}
            lang = record.get("lang")
            if lang is not None and not isinstance(lang, str):
                raise CorpusFormatError(f"line {lineno}: invalid 'lang' field")
            try:
                sample = TextSample.from_text(
                    sample_id, record["text"], lexicon, lang=lang, scores=scores
                )
            except CorpusFormatError as e:
                raise CorpusFormatError(f"line {lineno}: {e}") from None
            reason = filter_sample(sample, policy)
            if reason is None:
                accepted.append(sample)
            else:
                rejections.append((sample_id, reason))
    accepted = _apply_min_total_freq(accepted, policy.min_adjective_total_freq)
    store = CorpusStore(
        samples=tuple(accepted),
        lexicon_name=lexicon.name,
        lexicon_version=lexicon.version,
        policy=policy,
    )
    return IngestResult(store=store, rejections=tuple(rejections), n_read=n_read)


def _sample_to_record(sample: TextSample) -> dict:
    return {
        "id": sample.id,
        "text": sample.text,
        "lang": sample.lang,
        "word_count": sample.word_count,
        "adj_freqs": dict(sorted(sample.adj_freqs.items())),
        "scores": sample.scores,
    }


def _sample_from_record(record: dict, where: str) -> TextSample:
    try:
        return TextSample(
            id=record["id"],
            text=record["text"],
            lang=record["lang"],
            word_count=record["word_count"],
            adj_freqs={str(w): int(c) for w, c in record["adj_freqs"].items()},
            scores=record["scores"],
        )
    except (KeyError, TypeError, AttributeError) as e:
        raise CorpusFormatError(f"{where}: malformed sample record ({e})") from None


def persist_store(store: CorpusStore, directory) -> None:
    """Write samples, the adjective table, and a manifest to a directory."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    sample_lines = [
        json.dumps(_sample_to_record(s), ensure_ascii=False) for s in store.samples
    ]
    atomic_write_text(directory / "samples.jsonl", "".join(l + "\n" for l in sample_lines))
    adj_lines = [
        json.dumps(
            {
                "word": e.word,
                "total_frequency": e.total_frequency,
                "occurrences": [list(o) for o in e.occurrences],
            },
            ensure_ascii=False,
        )
        for e in store.adjectives.values()
    ]
    atomic_write_text(directory / "adjectives.jsonl", "".join(l + "\n" for l in adj_lines))
    manifest = {
        "format": CORPUS_FORMAT,
        "format_version": CORPUS_FORMAT_VERSION,
        "lexicon_name": store.lexicon_name,
        "lexicon_version": store.lexicon_version,
        "policy": store.policy.to_dict() if store.policy else None,
        "n_samples": len(store.samples),
        "n_adjectives": len(store.adjectives),
        "extra": store.extra,
    }
    atomic_write_text(
        directory / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    )


def load_store(directory) -> CorpusStore:
    """Read a persisted store back, verifying the adjective table."""
    directory = Path(directory)
    manifest_path = directory / "manifest.json"
    if not manifest_path.exists():
        raise CorpusFormatError(f"{directory} is not a corpus store (no manifest.json)")
    try:
        manifest = json.loads(manifest_path.read_text("utf-8"))
    except json.JSONDecodeError as e:
        raise CorpusFormatError(f"manifest.json: invalid JSON ({e.msg})") from None
    if manifest.get("format") != CORPUS_FORMAT:
        raise CorpusFormatError(f"unknown corpus format {manifest.get('format')!r}")
    if manifest.get("format_version") != CORPUS_FORMAT_VERSION:
        raise CorpusFormatError(
            f"unsupported corpus format version {manifest.get('format_version')!r}"
        )
    samples = []
    with (directory / "samples.jsonl").open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise CorpusFormatError(
                    f"samples.jsonl line {lineno}: invalid JSON ({e.msg})"
                ) from None
            samples.append(_sample_from_record(record, f"samples.jsonl line {lineno}"))
    policy = manifest.get("policy")
    store = CorpusStore(
        samples=tuple(samples),
        lexicon_name=manifest["lexicon_name"],
        lexicon_version=manifest["lexicon_version"],
        policy=FilterPolicy.from_dict(policy) if policy else None,
        extra=manifest.get("extra", {}),
    )
    stored_table = {}
    with (directory / "adjectives.jsonl").open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise CorpusFormatError(
                    f"adjectives.jsonl line {lineno}: invalid JSON ({e.msg})"
                ) from None
            stored_table[record["word"]] = AdjectiveEntry(
                word=record["word"],
                total_frequency=record["total_frequency"],
                occurrences=tuple(
                    (o[0], o[1], o[2]) for o in record["occurrences"]
                ),
            )
    if stored_table != store.adjectives:
        raise CorpusFormatError(
            "adjective table does not match the one derived from samples"
        )
    return store
