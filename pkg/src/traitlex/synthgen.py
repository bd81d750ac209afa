"""Seeded synthetic corpora and surveys with known ground truth.

The corpus generator draws, for each sample, a score bin (by weight), a
score uniform within that bin, a length uniform within the configured
range, and that many words i.i.d. from the bin's vocabulary table.  The
survey generator draws Likert answers uniformly and derives multiple
choice answers either uniformly or from threshold rules, which makes the
right answer a pure function of the questionnaire.

All randomness comes from numpy's PCG64 generator.  Corpus, survey, and
vocabulary synthesis use separate streams keyed off the spec seed, so
adding a survey does not disturb the corpus bytes.  The generator name
and seed are recorded in the output manifest.
"""

import json
import string
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._util import atomic_write_text
from .binning import DEFAULT_BINNING, BinningScheme
from .commonsense import (
    LIKERT_MAX,
    LIKERT_MIN,
    N_ITEMS,
    CommonsenseQuestion,
    QuestionnaireResponse,
    SurveyDataset,
)
from .corpus import AdjectiveLexicon, CorpusStore, TextSample, tokenize
from .errors import DatasetError, SurveyError

GENERATOR_NAME = "numpy-PCG64"
SPEC_FORMAT = "traitlex-generator-spec"
SPEC_FORMAT_VERSION = 1

# Stream keys appended to the seed; one independent stream per concern.
_STREAM_CORPUS, _STREAM_SURVEY, _STREAM_VOCAB = 0, 1, 2


def _rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, stream])))


@dataclass(frozen=True)
class SurveyRule:
    """Answer is label_if_true when every (item, minimum) condition holds."""

    conditions: tuple  # of (item 1-based, minimum Likert value)
    label_if_true: int = 1
    label_if_false: int = 0

    def __post_init__(self):
        if not self.conditions:
            raise SurveyError("rule needs at least one condition")
        for item, minimum in self.conditions:
            if not 1 <= item <= N_ITEMS:
                raise SurveyError(f"rule condition on invalid item {item}")
            if not 1 <= minimum <= 5:
                raise SurveyError(f"rule condition with invalid minimum {minimum}")

    def evaluate(self, answers) -> int:
        ok = all(answers[item - 1] >= minimum for item, minimum in self.conditions)
        return self.label_if_true if ok else self.label_if_false

    @property
    def items(self) -> tuple:
        return tuple(item for item, _ in self.conditions)


@dataclass(frozen=True)
class SurveyQuestionSpec:
    id: str
    n_labels: int
    rule: SurveyRule | None = None

    def __post_init__(self):
        if self.n_labels < 2:
            raise SurveyError(f"question {self.id!r}: needs at least 2 labels")
        if self.rule is not None:
            for label in (self.rule.label_if_true, self.rule.label_if_false):
                if not 0 <= label < self.n_labels:
                    raise SurveyError(f"question {self.id!r}: rule label out of range")


@dataclass(frozen=True)
class SurveySpec:
    n_respondents: int
    questions: tuple

    def __post_init__(self):
        if self.n_respondents < 1:
            raise SurveyError("survey needs at least one respondent")
        ids = [q.id for q in self.questions]
        if len(set(ids)) != len(ids):
            raise SurveyError("duplicate question ids in survey spec")


@dataclass(frozen=True)
class GeneratorSpec:
    seed: int
    n_samples: int
    words_per_sample: tuple  # inclusive (low, high)
    vocab: tuple  # one {word: probability} table per bin
    trait: str = "N"
    binning: BinningScheme = DEFAULT_BINNING
    score_weights: tuple = ()
    survey: SurveySpec | None = None

    def __post_init__(self):
        if self.n_samples < 0:
            raise DatasetError("n_samples must be non-negative")
        low, high = self.words_per_sample
        if not (1 <= low <= high):
            raise DatasetError(f"invalid words_per_sample range ({low}, {high})")
        if not self.score_weights:
            object.__setattr__(
                self, "score_weights", tuple(1.0 for _ in range(self.binning.n_bins))
            )
        if len(self.score_weights) != self.binning.n_bins:
            raise DatasetError("score_weights length must equal the bin count")
        if any(w < 0 for w in self.score_weights) or sum(self.score_weights) <= 0:
            raise DatasetError("score_weights must be non-negative with positive sum")
        if len(self.vocab) != self.binning.n_bins:
            raise DatasetError("vocab needs one table per bin")
        normalized = []
        for k, table in enumerate(self.vocab):
            if not table:
                raise DatasetError(f"bin {k}: empty vocabulary table")
            total = float(sum(table.values()))
            if total <= 0 or any(p <= 0 for p in table.values()):
                raise DatasetError(f"bin {k}: word probabilities must be positive")
            for word in table:
                if tokenize(word) != [word]:
                    raise DatasetError(f"bin {k}: word {word!r} is not a clean token")
            normalized.append({w: p / total for w, p in table.items()})
        object.__setattr__(self, "vocab", tuple(normalized))

    def all_words(self) -> frozenset:
        return frozenset(w for table in self.vocab for w in table)


def make_bin_vocab(
    n_bins: int,
    words_per_bin: int,
    overlap_fraction: float,
    seed: int,
    word_length: int = 7,
) -> tuple:
    """Uniform per-bin tables sharing round(overlap * size) common words.

    The shared pool appears in every bin; the remainder of each table is
    unique to its bin.  All words are random lowercase letter strings.
    """
    if words_per_bin < 1:
        raise DatasetError("words_per_bin must be positive")
    if not 0.0 <= overlap_fraction <= 1.0:
        raise DatasetError("overlap_fraction must lie in [0, 1]")
    n_shared = round(overlap_fraction * words_per_bin)
    n_unique = words_per_bin - n_shared
    needed = n_shared + n_bins * n_unique
    rng = _rng(seed, _STREAM_VOCAB)
    letters = np.array(list(string.ascii_lowercase))
    words: list[str] = []
    seen = set()
    while len(words) < needed:
        candidate = "".join(rng.choice(letters, size=word_length))
        if candidate not in seen:
            seen.add(candidate)
            words.append(candidate)
    shared = words[:n_shared]
    tables = []
    p = 1.0 / words_per_bin
    for k in range(n_bins):
        unique = words[n_shared + k * n_unique: n_shared + (k + 1) * n_unique]
        tables.append({w: p for w in shared + unique})
    return tuple(tables)


def spec_lexicon(spec: GeneratorSpec) -> AdjectiveLexicon:
    """Lexicon matching the spec's full vocabulary."""
    return AdjectiveLexicon.from_words(
        spec.all_words(), name="synthetic", version=f"pcg64-{spec.seed}"
    )


def generate_corpus(spec: GeneratorSpec) -> CorpusStore:
    """Deterministic corpus whose per-sample bin and score are known."""
    rng = _rng(spec.seed, _STREAM_CORPUS)
    weights = np.array(spec.score_weights, dtype=float)
    weights /= weights.sum()
    width = spec.binning.width
    # sort so draws depend on table content, not dict insertion order
    tables = [
        (sorted(table), np.array([table[w] for w in sorted(table)], dtype=float))
        for table in spec.vocab
    ]
    low, high = spec.words_per_sample
    samples = []
    for i in range(spec.n_samples):
        k = int(rng.choice(spec.binning.n_bins, p=weights))
        # cap the uniform draw so the score cannot round up into the next bin
        u = min(float(rng.random()), 1.0 - 1e-6)
        score = spec.binning.lo + (k + u) * width
        length = int(rng.integers(low, high + 1))
        words, probs = tables[k]
        drawn = rng.choice(len(words), size=length, p=probs)
        tokens = [words[j] for j in drawn]
        counts = Counter(tokens)
        samples.append(
            TextSample(
                id=f"s{i:05d}",
                text=" ".join(tokens),
                lang="en",
                word_count=length,
                adj_freqs=dict(sorted(counts.items())),
                scores={spec.trait: score},
            )
        )
    return CorpusStore(
        samples=tuple(samples),
        lexicon_name="synthetic",
        lexicon_version=f"pcg64-{spec.seed}",
        policy=None,
        extra={"generator": GENERATOR_NAME, "seed": spec.seed},
    )


def generate_survey(spec: GeneratorSpec):
    """Survey dataset plus matching question definitions.

    Returns (SurveyDataset, list of CommonsenseQuestion).  Questionnaire
    answers are uniform on 1..5; each ruleless question's answers are
    uniform over its labels, while rule-bound answers follow the rule
    exactly.
    """
    if spec.survey is None:
        raise SurveyError("generator spec has no survey section")
    survey_spec = spec.survey
    rng = _rng(spec.seed, _STREAM_SURVEY)
    grid = rng.integers(
        LIKERT_MIN, LIKERT_MAX + 1, size=(survey_spec.n_respondents, N_ITEMS)
    )
    responses = tuple(
        QuestionnaireResponse(
            respondent_id=f"r{i:04d}", answers=tuple(int(v) for v in grid[i])
        )
        for i in range(survey_spec.n_respondents)
    )
    answers = {}
    for question in survey_spec.questions:
        if question.rule is None:
            answers[question.id] = rng.integers(
                0, question.n_labels, size=survey_spec.n_respondents
            ).astype(int)
        else:
            answers[question.id] = np.array(
                [question.rule.evaluate(r.answers) for r in responses], dtype=int
            )
    questions = [
        CommonsenseQuestion(
            id=q.id,
            text=f"synthetic question {q.id}",
            answer_labels=tuple(f"option_{j}" for j in range(q.n_labels)),
            fusion_map=None,
        )
        for q in survey_spec.questions
    ]
    return SurveyDataset(responses=responses, answers=answers), questions


# --- spec files -----------------------------------------------------------------

def _spec_to_payload(spec: GeneratorSpec) -> dict:
    payload = {
        "format": SPEC_FORMAT,
        "format_version": SPEC_FORMAT_VERSION,
        "seed": spec.seed,
        "n_samples": spec.n_samples,
        "trait": spec.trait,
        "words_per_sample": list(spec.words_per_sample),
        "binning": spec.binning.to_dict(),
        "score_weights": list(spec.score_weights),
        "vocab": {"tables": [dict(t) for t in spec.vocab]},
        "survey": None,
    }
    if spec.survey is not None:
        payload["survey"] = {
            "n_respondents": spec.survey.n_respondents,
            "questions": [
                {
                    "id": q.id,
                    "n_labels": q.n_labels,
                    "rule": None if q.rule is None else {
                        "conditions": [list(c) for c in q.rule.conditions],
                        "label_if_true": q.rule.label_if_true,
                        "label_if_false": q.rule.label_if_false,
                    },
                }
                for q in spec.survey.questions
            ],
        }
    return payload


def save_generator_spec(spec: GeneratorSpec, path) -> None:
    atomic_write_text(
        Path(path), json.dumps(_spec_to_payload(spec), indent=2, sort_keys=True) + "\n"
    )


def load_generator_spec(path) -> GeneratorSpec:
    """Read a spec file; "vocab" may give explicit tables or auto parameters.

    The auto form {"words_per_bin": W, "overlap_fraction": F} synthesizes
    tables from the spec seed via make_bin_vocab.
    """
    path = Path(path)
    try:
        payload = json.loads(path.read_text("utf-8"))
    except json.JSONDecodeError as e:
        raise DatasetError(f"{path}: invalid JSON ({e.msg})") from None
    if payload.get("format") != SPEC_FORMAT:
        raise DatasetError(f"{path}: not a generator spec file")
    if payload.get("format_version") != SPEC_FORMAT_VERSION:
        raise DatasetError(
            f"{path}: unsupported format version {payload.get('format_version')!r}"
        )
    binning = BinningScheme.from_dict(payload["binning"])
    vocab_section = payload["vocab"]
    if "tables" in vocab_section:
        vocab = tuple({str(w): float(p) for w, p in t.items()}
                      for t in vocab_section["tables"])
    else:
        vocab = make_bin_vocab(
            n_bins=binning.n_bins,
            words_per_bin=int(vocab_section["words_per_bin"]),
            overlap_fraction=float(vocab_section["overlap_fraction"]),
            seed=int(payload["seed"]),
        )
    survey = None
    if payload.get("survey"):
        s = payload["survey"]
        survey = SurveySpec(
            n_respondents=int(s["n_respondents"]),
            questions=tuple(
                SurveyQuestionSpec(
                    id=q["id"],
                    n_labels=int(q["n_labels"]),
                    rule=None if q.get("rule") is None else SurveyRule(
                        conditions=tuple(
                            (int(i), int(m)) for i, m in q["rule"]["conditions"]
                        ),
                        label_if_true=int(q["rule"].get("label_if_true", 1)),
                        label_if_false=int(q["rule"].get("label_if_false", 0)),
                    ),
                )
                for q in s["questions"]
            ),
        )
    return GeneratorSpec(
        seed=int(payload["seed"]),
        n_samples=int(payload["n_samples"]),
        words_per_sample=tuple(int(v) for v in payload["words_per_sample"]),
        vocab=vocab,
        trait=payload.get("trait", "N"),
        binning=binning,
        score_weights=tuple(float(w) for w in payload["score_weights"]),
        survey=survey,
    )
