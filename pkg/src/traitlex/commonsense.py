"""Predicting multiple-choice answers from personality questionnaires.

Respondents fill a 50-item Likert questionnaire (1 to 5) and answer a set
of multiple-choice opinion questions.  Each opinion question gets its own
classifier over the questionnaire items, after two preprocessing steps:

* label fusion: sparse answer options can be merged via a question's
  fusion map, which conserves answer counts while thickening classes;
* correlation filtering: questionnaire items whose Pearson correlation
  with the (possibly fused) answer falls below a threshold are dropped.

The questionnaire contains deliberately repeated items; respondents whose
answers to a repeated pair differ by more than one Likert step fail the
consistency check and are rejected at survey ingest.
"""

import csv
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from ._util import atomic_write_text, canonical_json, checksum, fmt_float
from .errors import (
    ModelFormatError,
    ModelIntegrityError,
    SurveyError,
    TrainingError,
)
from .evaluation import cross_validate
from .mlcore import (
    Dataset,
    TrainConfig,
    model_from_payload,
    model_to_payload,
    predict as ml_predict,
    train as ml_train,
)

N_ITEMS = 50
LIKERT_MIN, LIKERT_MAX = 1, 5
DEFAULT_MIN_ABS_R = 0.05

CATALOG_FORMAT = "traitlex-question-catalog"
CATALOG_FORMAT_VERSION = 1
BANK_FORMAT = "traitlex-question-bank"
BANK_FORMAT_VERSION = 1


@dataclass(frozen=True)
class QuestionnaireResponse:
    respondent_id: str
    answers: tuple  # 50 integers, 1..5

    def __post_init__(self):
        if not self.respondent_id:
            raise SurveyError("respondent id must be non-empty")
        if len(self.answers) != N_ITEMS:
            raise SurveyError(
                f"respondent {self.respondent_id!r}: expected {N_ITEMS} answers, "
                f"got {len(self.answers)}"
            )
        for i, a in enumerate(self.answers, start=1):
            if not isinstance(a, int) or not LIKERT_MIN <= a <= LIKERT_MAX:
                raise SurveyError(
                    f"respondent {self.respondent_id!r}, item {i}: "
                    f"invalid Likert value {a!r}"
                )


@dataclass(frozen=True)
class CommonsenseQuestion:
    id: str
    text: str
    answer_labels: tuple
    fusion_map: dict | None = None  # original index -> fused index

    def __post_init__(self):
        if not self.id:
            raise SurveyError("question id must be non-empty")
        n = len(self.answer_labels)
        if not 2 <= n <= 7:
            raise SurveyError(f"question {self.id!r}: needs 2..7 answer labels, got {n}")
        if len(set(self.answer_labels)) != n:
            raise SurveyError(f"question {self.id!r}: answer labels are not unique")
        if self.fusion_map is not None:
            if set(self.fusion_map) != set(range(n)):
                raise SurveyError(
                    f"question {self.id!r}: fusion map must cover every original label"
                )
            targets = set(self.fusion_map.values())
            if targets != set(range(len(targets))) or len(targets) < 2:
                raise SurveyError(
                    f"question {self.id!r}: fusion targets must be 0..m-1 with m >= 2"
                )

    @property
    def fused_labels(self) -> tuple:
        """Output label names; merged options are joined with ' / '."""
        if self.fusion_map is None:
            return self.answer_labels
        m = max(self.fusion_map.values()) + 1
        groups = [[] for _ in range(m)]
        for orig in range(len(self.answer_labels)):
            groups[self.fusion_map[orig]].append(self.answer_labels[orig])
        return tuple(" / ".join(g) for g in groups)

    def label_for(self, output_index: int) -> str:
        return self.fused_labels[output_index]


@dataclass(frozen=True)
class SurveyDataset:
    """Questionnaire responses plus per-question answer index vectors."""

    responses: tuple
    answers: dict  # question id -> np.ndarray of label indices

    def __post_init__(self):
        ids = [r.respondent_id for r in self.responses]
        if len(set(ids)) != len(ids):
            raise SurveyError("duplicate respondent ids")
        for qid, values in self.answers.items():
            values = np.asarray(values, dtype=int)
            if values.shape != (len(self.responses),):
                raise SurveyError(
                    f"question {qid!r}: answer vector length does not match respondents"
                )
            if np.any(values < 0):
                raise SurveyError(f"question {qid!r}: negative answer index")
            self.answers[qid] = values

    @property
    def n(self) -> int:
        return len(self.responses)

    def item_matrix(self) -> np.ndarray:
        return np.array([r.answers for r in self.responses], dtype=float)


@dataclass(frozen=True)
class Catalog:
    questionnaire_items: tuple
    duplicate_pairs: tuple  # of (item_a, item_b), 1-based
    questions: tuple

    def __post_init__(self):
        if len(self.questionnaire_items) != N_ITEMS:
            raise SurveyError(
                f"catalog must list {N_ITEMS} questionnaire items, "
                f"got {len(self.questionnaire_items)}"
            )
        for a, b in self.duplicate_pairs:
            if not (1 <= a <= N_ITEMS and 1 <= b <= N_ITEMS and a != b):
                raise SurveyError(f"invalid duplicate pair ({a}, {b})")
        ids = [q.id for q in self.questions]
        if len(set(ids)) != len(ids):
            raise SurveyError("duplicate question ids in catalog")

    def question(self, qid: str) -> CommonsenseQuestion:
        for q in self.questions:
            if q.id == qid:
                return q
        raise SurveyError(f"no question with id {qid!r}")


def load_catalog(path=None) -> Catalog:
    """Read a question catalog; default is the bundled one."""
    if path is None:
        text = resources.files(__package__).joinpath(
            "data/question_catalog.json"
        ).read_text("utf-8")
        where = "bundled catalog"
    else:
        text = Path(path).read_text("utf-8")
        where = str(path)
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as e:
        raise SurveyError(f"{where}: invalid JSON ({e.msg})") from None
    if payload.get("format") != CATALOG_FORMAT:
        raise SurveyError(f"{where}: not a question catalog")
    if payload.get("format_version") != CATALOG_FORMAT_VERSION:
        raise SurveyError(
            f"{where}: unsupported catalog version {payload.get('format_version')!r}"
        )
    questions = tuple(
        CommonsenseQuestion(
            id=q["id"],
            text=q["text"],
            answer_labels=tuple(q["labels"]),
            fusion_map=(
                None if q.get("fusion_map") is None
                else {int(k): int(v) for k, v in q["fusion_map"].items()}
            ),
        )
        for q in payload["questions"]
    )
    return Catalog(
        questionnaire_items=tuple(payload["questionnaire_items"]),
        duplicate_pairs=tuple((int(a), int(b)) for a, b in payload["duplicate_pairs"]),
        questions=questions,
    )


# --- label fusion ------------------------------------------------------------

def fuse_labels(answers, fusion_map: dict) -> np.ndarray:
    """Remap answer indices; every answer must be covered by the map."""
    answers = np.asarray(answers, dtype=int)
    table = np.full(max(fusion_map) + 1, -1, dtype=int)
    for orig, fused in fusion_map.items():
        table[orig] = fused
    if np.any(answers < 0) or np.any(answers > max(fusion_map)):
        bad = int(answers[(answers < 0) | (answers > max(fusion_map))][0])
        raise SurveyError(f"answer index {bad} not covered by the fusion map")
    fused = table[answers]
    if np.any(fused < 0):
        bad = int(answers[fused < 0][0])
        raise SurveyError(f"answer index {bad} not covered by the fusion map")
    return fused


# --- feature selection ---------------------------------------------------------

def correlation_filter(X, y, min_abs_r: float = DEFAULT_MIN_ABS_R) -> np.ndarray:
    """Indices of columns whose |Pearson r| with y meets the threshold.

    Constant columns have no defined correlation and are dropped.  The
    result may be empty; callers decide what to fall back to.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise SurveyError("feature matrix and target must have matching rows")
    if X.shape[0] < 2:
        raise SurveyError("correlation needs at least 2 rows")
    if np.all(y == y[0]):
        raise SurveyError("target has a single distinct value")
    yc = y - y.mean()
    sy = np.sqrt((yc ** 2).sum())
    keep = []
    for j in range(X.shape[1]):
        xc = X[:, j] - X[:, j].mean()
        sx = np.sqrt((xc ** 2).sum())
        if sx == 0.0:
            continue
        r = float((xc * yc).sum() / (sx * sy))
        if abs(r) >= min_abs_r:
            keep.append(j)
    return np.array(keep, dtype=int)


# --- per-question models ---------------------------------------------------------

@dataclass
class QuestionModel:
    question: CommonsenseQuestion
    selected_items: tuple  # 0-based questionnaire item indices
    used_fallback: bool  # correlation filter matched nothing, kept all items
    model: object  # TrainedModel


def _question_dataset(survey, question, min_abs_r, fused):
    X = survey.item_matrix()
    selected = correlation_filter(X, fused, min_abs_r)
    used_fallback = selected.size == 0
    if used_fallback:
        selected = np.arange(N_ITEMS)
    names = tuple(f"q{j + 1}" for j in selected)
    ds = Dataset(feature_names=names, X=X[:, selected], y_class=fused)
    return ds, tuple(int(j) for j in selected), used_fallback


def _fused_answers(survey, question) -> np.ndarray:
    if question.id not in survey.answers:
        raise SurveyError(f"survey has no answers for question {question.id!r}")
    answers = survey.answers[question.id]
    if np.any(answers >= len(question.answer_labels)):
        bad = int(answers[answers >= len(question.answer_labels)][0])
        raise SurveyError(
            f"question {question.id!r}: answer index {bad} out of range"
        )
    if question.fusion_map is not None:
        return fuse_labels(answers, question.fusion_map)
    return answers.copy()


def train_question_model(
    config: TrainConfig,
    survey: SurveyDataset,
    question: CommonsenseQuestion,
    min_abs_r: float = DEFAULT_MIN_ABS_R,
) -> QuestionModel:
    """Fuse labels, filter items by correlation, and fit one classifier."""
    fused = _fused_answers(survey, question)
    if np.unique(fused).size < 2:
        raise TrainingError(
            f"question {question.id!r}: answers contain a single class"
        )
    ds, selected, used_fallback = _question_dataset(survey, question, min_abs_r, fused)
    model = ml_train(config, ds)
    return QuestionModel(
        question=question,
        selected_items=selected,
        used_fallback=used_fallback,
        model=model,
    )


def predict_answer(qmodel: QuestionModel, response) -> str:
    """Answer label for one respondent's questionnaire."""
    if not isinstance(response, QuestionnaireResponse):
        response = QuestionnaireResponse(
            respondent_id="anonymous", answers=tuple(response)
        )
    x = np.array(response.answers, dtype=float)[list(qmodel.selected_items)]
    output = ml_predict(qmodel.model, x)
    return qmodel.question.label_for(int(output))


# --- the full pipeline ------------------------------------------------------------

@dataclass(frozen=True)
class TrainAllRow:
    qid: str
    algorithm: str
    cv_accuracy_prefusion: float
    cv_accuracy_postfusion: float


@dataclass(frozen=True)
class TrainAllResult:
    rows: tuple
    failures: tuple  # of (qid, algorithm, message)
    bank: dict  # (qid, algorithm) -> QuestionModel
    best: dict  # qid -> algorithm name


def _cv_accuracy(config, survey, question, labels, min_abs_r, k, seed):
    ds, _, _ = _question_dataset(survey, question, min_abs_r, labels)
    return cross_validate(config, ds, k=k, seed=seed).mean_accuracy


def train_all(
    survey: SurveyDataset,
    questions,
    configs,
    k: int = 10,
    seed: int = 0,
    min_abs_r: float = DEFAULT_MIN_ABS_R,
) -> TrainAllResult:
    """Cross-validate every (question, algorithm) pair and keep fitted models.

    Pre-fusion accuracy uses the raw answer indices, post-fusion the fused
    ones; questions without a fusion map score identically on both.  A
    failure on one pair (single answer class, for instance) is recorded
    and the sweep continues.
    """
    rows = []
    failures = []
    bank = {}
    best = {}
    for question in questions:
        for config in configs:
            try:
                raw = _fused_answers(
                    survey,
                    CommonsenseQuestion(
                        id=question.id,
                        text=question.text,
                        answer_labels=question.answer_labels,
                        fusion_map=None,
                    ),
                )
                if np.unique(raw).size < 2:
                    raise TrainingError(
                        f"question {question.id!r}: answers contain a single class"
                    )
                pre = _cv_accuracy(config, survey, question, raw, min_abs_r, k, seed)
                if question.fusion_map is None:
                    post = pre
                else:
                    fused = fuse_labels(raw, question.fusion_map)
                    if np.unique(fused).size < 2:
                        raise TrainingError(
                            f"question {question.id!r}: fusion left a single class"
                        )
                    post = _cv_accuracy(
                        config, survey, question, fused, min_abs_r, k, seed
                    )
                qmodel = train_question_model(config, survey, question, min_abs_r)
            except (TrainingError, SurveyError) as e:
                failures.append((question.id, config.algorithm, str(e)))
                continue
            rows.append(
                TrainAllRow(
                    qid=question.id,
                    algorithm=config.algorithm,
                    cv_accuracy_prefusion=pre,
                    cv_accuracy_postfusion=post,
                )
            )
            bank[(question.id, config.algorithm)] = qmodel
            current = best.get(question.id)
            if current is None or post > current[0]:
                best[question.id] = (post, config.algorithm)
    return TrainAllResult(
        rows=tuple(rows),
        failures=tuple(failures),
        bank=bank,
        best={qid: algo for qid, (_, algo) in best.items()},
    )


def report_to_csv(result: TrainAllResult) -> str:
    lines = ["qid,algorithm,cv_accuracy_prefusion,cv_accuracy_postfusion"]
    for row in result.rows:
        lines.append(
            f"{row.qid},{row.algorithm},"
            f"{fmt_float(row.cv_accuracy_prefusion)},"
            f"{fmt_float(row.cv_accuracy_postfusion)}"
        )
    return "\n".join(lines) + "\n"


# --- survey files -------------------------------------------------------------------

@dataclass(frozen=True)
class SurveyIngestResult:
    survey: SurveyDataset
    rejected: tuple  # of (respondent_id, item_a, item_b)


def check_consistency(response: QuestionnaireResponse, duplicate_pairs):
    """First violated duplicate pair, or None when answers are consistent."""
    for a, b in duplicate_pairs:
        if abs(response.answers[a - 1] - response.answers[b - 1]) > 1:
            return (a, b)
    return None


def load_survey_csv(path, catalog: Catalog) -> SurveyIngestResult:
    """Read respondent rows, dropping those that fail the consistency check.

    Expected header: respondent_id, q1..q50, then one a_<qid> column per
    catalog question that the survey covers.
    """
    path = Path(path)
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SurveyError(f"{path}: empty survey file") from None
        data_rows = [row for row in reader if row]
    expected = ["respondent_id"] + [f"q{i}" for i in range(1, N_ITEMS + 1)]
    if header[: N_ITEMS + 1] != expected:
        raise SurveyError(
            f"{path}: header must start with respondent_id,q1..q{N_ITEMS}"
        )
    qids = []
    for name in header[N_ITEMS + 1:]:
        if not name.startswith("a_"):
            raise SurveyError(f"{path}: unexpected column {name!r}")
        qid = name[2:]
        catalog.question(qid)  # raises on unknown ids
        qids.append(qid)
    responses = []
    kept_answers: dict[str, list] = {qid: [] for qid in qids}
    rejected = []
    for lineno, row in enumerate(data_rows, start=2):
        if len(row) != len(header):
            raise SurveyError(f"{path} line {lineno}: expected {len(header)} cells")
        try:
            answers = tuple(int(v) for v in row[1:N_ITEMS + 1])
            indices = [int(v) for v in row[N_ITEMS + 1:]]
        except ValueError:
            raise SurveyError(f"{path} line {lineno}: non-integer cell") from None
        try:
            response = QuestionnaireResponse(respondent_id=row[0], answers=answers)
        except SurveyError as e:
            raise SurveyError(f"{path} line {lineno}: {e}") from None
        violation = check_consistency(response, catalog.duplicate_pairs)
        if violation is not None:
            rejected.append((response.respondent_id, violation[0], violation[1]))
            continue
        responses.append(response)
        for qid, idx in zip(qids, indices):
            kept_answers[qid].append(idx)
    survey = SurveyDataset(
        responses=tuple(responses),
        answers={qid: np.array(v, dtype=int) for qid, v in kept_answers.items()},
    )
    for qid in qids:
        question = catalog.question(qid)
        values = survey.answers[qid]
        if values.size and np.any(values >= len(question.answer_labels)):
            raise SurveyError(
                f"{path}: question {qid!r} has an answer index out of range"
            )
    return SurveyIngestResult(survey=survey, rejected=tuple(rejected))


def save_survey_csv(survey: SurveyDataset, path) -> None:
    qids = sorted(survey.answers)
    header = (
        ["respondent_id"]
        + [f"q{i}" for i in range(1, N_ITEMS + 1)]
        + [f"a_{qid}" for qid in qids]
    )
    lines = [",".join(header)]
    for i, response in enumerate(survey.responses):
        cells = [response.respondent_id]
        cells += [str(a) for a in response.answers]
        cells += [str(int(survey.answers[qid][i])) for qid in qids]
        lines.append(",".join(cells))
    atomic_write_text(Path(path), "\n".join(lines) + "\n")


# --- model bank persistence -----------------------------------------------------------

def _question_to_payload(question: CommonsenseQuestion) -> dict:
    return {
        "id": question.id,
        "text": question.text,
        "labels": list(question.answer_labels),
        "fusion_map": (
            None if question.fusion_map is None
            else {str(k): v for k, v in question.fusion_map.items()}
        ),
    }


def _question_from_payload(payload: dict) -> CommonsenseQuestion:
    return CommonsenseQuestion(
        id=payload["id"],
        text=payload["text"],
        answer_labels=tuple(payload["labels"]),
        fusion_map=(
            None if payload.get("fusion_map") is None
            else {int(k): int(v) for k, v in payload["fusion_map"].items()}
        ),
    )


def save_bank(result: TrainAllResult, path) -> None:
    """Persist every fitted question model plus the per-question winner."""
    questions: dict[str, dict] = {}
    for (qid, algorithm), qmodel in result.bank.items():
        entry = questions.setdefault(
            qid,
            {
                "question": _question_to_payload(qmodel.question),
                "best": result.best.get(qid),
                "models": {},
            },
        )
        entry["models"][algorithm] = {
            "selected_items": list(qmodel.selected_items),
            "used_fallback": qmodel.used_fallback,
            "model": model_to_payload(qmodel.model),
        }
    payload = {
        "format": BANK_FORMAT,
        "format_version": BANK_FORMAT_VERSION,
        "questions": questions,
    }
    body = dict(payload)
    body["checksum"] = checksum(canonical_json(payload))
    atomic_write_text(Path(path), json.dumps(body, sort_keys=True) + "\n")


def load_bank(path) -> TrainAllResult:
    path = Path(path)
    try:
        payload = json.loads(path.read_text("utf-8"))
    except json.JSONDecodeError:
        raise ModelIntegrityError(
            f"{path}: not valid JSON (file truncated or corrupt)"
        ) from None
    if not isinstance(payload, dict) or payload.get("format") != BANK_FORMAT:
        raise ModelFormatError(f"{path}: not a question bank file")
    if payload.get("format_version") != BANK_FORMAT_VERSION:
        raise ModelFormatError(
            f"{path}: unsupported format version {payload.get('format_version')!r}"
        )
    stated = payload.pop("checksum", None)
    if stated != checksum(canonical_json(payload)):
        raise ModelIntegrityError(f"{path}: checksum mismatch")
    bank = {}
    best = {}
    for qid, entry in payload["questions"].items():
        question = _question_from_payload(entry["question"])
        if entry.get("best"):
            best[qid] = entry["best"]
        for algorithm, record in entry["models"].items():
            bank[(qid, algorithm)] = QuestionModel(
                question=question,
                selected_items=tuple(int(j) for j in record["selected_items"]),
                used_fallback=bool(record["used_fallback"]),
                model=model_from_payload(
                    record["model"], where=f"{path}:{qid}/{algorithm}"
                ),
            )
    return TrainAllResult(rows=(), failures=(), bank=bank, best=best)


def predict_with_bank(result: TrainAllResult, response) -> dict:
    """Best-model answer for every question in the bank."""
    out = {}
    for qid, algorithm in sorted(result.best.items()):
        out[qid] = predict_answer(result.bank[(qid, algorithm)], response)
    return out
