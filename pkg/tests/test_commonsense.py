import numpy as np
import pytest

from traitlex.commonsense import (
    Catalog,
    CommonsenseQuestion,
    QuestionnaireResponse,
    SurveyDataset,
    check_consistency,
    correlation_filter,
    fuse_labels,
    load_bank,
    load_catalog,
    load_survey_csv,
    predict_answer,
    predict_with_bank,
    report_to_csv,
    save_bank,
    save_survey_csv,
    train_all,
    train_question_model,
)
from traitlex.errors import SurveyError, TrainingError
from traitlex.mlcore import TrainConfig


def response(answers, rid="r1"):
    return QuestionnaireResponse(respondent_id=rid, answers=tuple(answers))


def flat_answers(value=3):
    return [value] * 50


# --- response validation -----------------------------------------------------------

def test_response_requires_50_items():
    with pytest.raises(SurveyError, match="expected 50"):
        response([3] * 49)


def test_response_rejects_likert_6():
    bad = flat_answers()
    bad[7] = 6
    with pytest.raises(SurveyError, match="item 8"):
        response(bad)


def test_response_rejects_non_integers():
    bad = flat_answers()
    bad[0] = 2.5
    with pytest.raises(SurveyError):
        response(bad)


# --- question validation ----------------------------------------------------------

def test_question_label_arity_bounds():
    with pytest.raises(SurveyError):
        CommonsenseQuestion(id="q", text="t", answer_labels=("only",))
    with pytest.raises(SurveyError):
        CommonsenseQuestion(id="q", text="t",
                            answer_labels=tuple(f"l{i}" for i in range(8)))


def test_fusion_map_must_cover_all_labels():
    with pytest.raises(SurveyError, match="cover every"):
        CommonsenseQuestion(id="q", text="t",
                            answer_labels=("a", "b", "c"),
                            fusion_map={0: 0, 1: 1})


def test_fusion_targets_must_be_dense():
    with pytest.raises(SurveyError, match="0..m-1"):
        CommonsenseQuestion(id="q", text="t",
                            answer_labels=("a", "b", "c"),
                            fusion_map={0: 0, 1: 2, 2: 2})


def test_fused_label_names_join_merged_options():
    q = CommonsenseQuestion(
        id="q", text="t",
        answer_labels=("Strongly agree", "Agree", "Disagree", "Strongly disagree"),
        fusion_map={0: 0, 1: 0, 2: 1, 3: 1},
    )
    assert q.fused_labels == ("Strongly agree / Agree", "Disagree / Strongly disagree")


# --- fusion ------------------------------------------------------------------------

def counts_to_answers(counts):
    out = []
    for idx, c in enumerate(counts):
        out.extend([idx] * c)
    return np.array(out, dtype=int)


def fused_counts(counts, fusion_map):
    fused = fuse_labels(counts_to_answers(counts), fusion_map)
    m = max(fusion_map.values()) + 1
    return [int((fused == j).sum()) for j in range(m)]


def test_fusion_conserves_counts():
    counts = (5, 33, 46, 16)
    fused = fused_counts(counts, {0: 0, 1: 0, 2: 1, 3: 0})
    assert sum(fused) == sum(counts)
    assert fused == [54, 46]


def test_fusion_two_sided_merge():
    assert fused_counts((25, 17, 10, 48), {0: 0, 2: 0, 1: 1, 3: 1}) == [35, 65]


def test_fusion_partial_merge_keeps_three_labels():
    assert fused_counts((26, 39, 19, 16), {0: 0, 1: 1, 2: 2, 3: 2}) == [26, 39, 35]


def test_fusion_collapse_three_into_one():
    assert fused_counts((54, 20, 14, 12), {0: 0, 1: 1, 2: 1, 3: 1}) == [54, 46]


def test_fusion_rejects_uncovered_answers():
    with pytest.raises(SurveyError, match="not covered"):
        fuse_labels([0, 5], {0: 0, 1: 1})


# --- correlation filter -------------------------------------------------------------

def test_filter_keeps_driving_item(rng):
    X = rng.integers(1, 6, (200, 50)).astype(float)
    y = (X[:, 6] >= 3).astype(float)
    kept = correlation_filter(X, y)
    assert 6 in kept


def test_filter_drops_constant_columns(rng):
    X = rng.integers(1, 6, (100, 5)).astype(float)
    X[:, 2] = 4.0
    y = (X[:, 0] >= 3).astype(float)
    kept = correlation_filter(X, y, min_abs_r=0.0)
    assert 2 not in kept
    assert 0 in kept


def test_filter_may_return_empty():
    X = np.array([[1.0], [1.0], [2.0], [2.0]])
    y = np.array([0.0, 1.0, 0.0, 1.0])  # exactly uncorrelated with the column
    kept = correlation_filter(X, y, min_abs_r=0.5)
    assert kept.size == 0


def test_filter_threshold_is_inclusive():
    X = np.array([[1.0], [2.0], [2.0], [5.0]])
    y = np.array([0.0, 1.0, 0.0, 1.0])
    xc = X[:, 0] - X[:, 0].mean()
    yc = y - y.mean()
    sx, sy = np.sqrt((xc ** 2).sum()), np.sqrt((yc ** 2).sum())
    r = float((xc * yc).sum() / (sx * sy))
    kept = correlation_filter(X, y, min_abs_r=abs(r))
    assert list(kept) == [0]
    assert correlation_filter(X, y, min_abs_r=abs(r) + 1e-12).size == 0


def test_filter_rejects_constant_target():
    X = np.ones((5, 2))
    with pytest.raises(SurveyError, match="single distinct"):
        correlation_filter(X, np.ones(5))


# --- synthetic rule survey ---------------------------------------------------------

def rule_survey(n=200, seed=11):
    """Answers driven by item 7: label 1 iff q7 >= 3."""
    gen = np.random.Generator(np.random.PCG64(seed))
    grid = gen.integers(1, 6, (n, 50))
    responses = tuple(
        QuestionnaireResponse(respondent_id=f"r{i}",
                              answers=tuple(int(v) for v in grid[i]))
        for i in range(n)
    )
    labels = (grid[:, 6] >= 3).astype(int)
    return SurveyDataset(responses=responses, answers={"toy": labels})


TOY_QUESTION = CommonsenseQuestion(
    id="toy", text="synthetic", answer_labels=("no", "yes"), fusion_map=None,
)


def test_rule_model_recovers_the_rule():
    survey = rule_survey()
    qmodel = train_question_model(
        TrainConfig(algorithm="decision_tree"), survey, TOY_QUESTION
    )
    assert 6 in qmodel.selected_items
    assert not qmodel.used_fallback
    hits = 0
    for i, resp in enumerate(survey.responses):
        want = "yes" if resp.answers[6] >= 3 else "no"
        hits += predict_answer(qmodel, resp) == want
    assert hits / survey.n >= 0.99


def test_predict_answer_accepts_raw_sequences():
    survey = rule_survey()
    qmodel = train_question_model(
        TrainConfig(algorithm="decision_tree"), survey, TOY_QUESTION
    )
    high = flat_answers(5)
    low = flat_answers(1)
    assert predict_answer(qmodel, high) == "yes"
    assert predict_answer(qmodel, low) == "no"


def test_predict_answer_validates_likert_range():
    survey = rule_survey()
    qmodel = train_question_model(
        TrainConfig(algorithm="decision_tree"), survey, TOY_QUESTION
    )
    bad = flat_answers()
    bad[0] = 6
    with pytest.raises(SurveyError):
        predict_answer(qmodel, bad)


def test_single_class_answers_rejected():
    survey = rule_survey()
    constant = SurveyDataset(
        responses=survey.responses,
        answers={"toy": np.zeros(survey.n, dtype=int)},
    )
    with pytest.raises(TrainingError, match="single class"):
        train_question_model(TrainConfig(algorithm="knn"), constant, TOY_QUESTION)


def test_majority_label_on_uninformative_features():
    gen = np.random.Generator(np.random.PCG64(3)); n = 60
    grid = gen.integers(1, 6, (n, 50))
    responses = tuple(
        QuestionnaireResponse(respondent_id=f"r{i}",
                              answers=tuple(int(v) for v in grid[i]))
        for i in range(n)
    )
    labels = np.zeros(n, dtype=int)
    labels[:5] = 1  # dominant class 0
    survey = SurveyDataset(responses=responses, answers={"toy": labels})
    qmodel = train_question_model(
        TrainConfig(algorithm="random_forest_clf", hyperparams={"n_trees": 20}),
        survey, TOY_QUESTION, min_abs_r=0.9,  # force the all-items fallback
    )
    assert qmodel.used_fallback
    votes = [predict_answer(qmodel, r) for r in responses]
    assert votes.count("no") > votes.count("yes")


# --- train_all --------------------------------------------------------------------

def fused_survey(n=120, seed=5):
    gen = np.random.Generator(np.random.PCG64(seed))
    grid = gen.integers(1, 6, (n, 50))
    responses = tuple(
        QuestionnaireResponse(respondent_id=f"r{i}",
                              answers=tuple(int(v) for v in grid[i]))
        for i in range(n)
    )
    # 4 raw labels collapsing pairwise to 2, driven by item 3
    raw = np.where(grid[:, 2] >= 3,
                   np.where(grid[:, 9] >= 3, 0, 1),
                   np.where(grid[:, 9] >= 3, 2, 3))
    question = CommonsenseQuestion(
        id="fused", text="t",
        answer_labels=("a1", "a2", "b1", "b2"),
        fusion_map={0: 0, 1: 0, 2: 1, 3: 1},
    )
    survey = SurveyDataset(responses=responses, answers={"fused": raw})
    return survey, question


def test_train_all_reports_both_accuracies():
    survey, question = fused_survey()
    result = train_all(
        survey, [question],
        [TrainConfig(algorithm="decision_tree")],
        k=5,
    )
    assert len(result.rows) == 1
    row = result.rows[0]
    # fusing makes the target depend on a single item, so it gets easier
    assert row.cv_accuracy_postfusion >= row.cv_accuracy_prefusion
    assert result.best["fused"] == "decision_tree"


def test_train_all_prefusion_equals_postfusion_without_map():
    survey = rule_survey(n=100)
    result = train_all(
        survey, [TOY_QUESTION], [TrainConfig(algorithm="knn")], k=5
    )
    row = result.rows[0]
    assert row.cv_accuracy_prefusion == row.cv_accuracy_postfusion


def test_train_all_records_failures_and_continues():
    survey = rule_survey(n=80)
    constant = SurveyDataset(
        responses=survey.responses,
        answers={
            "toy": survey.answers["toy"],
            "stuck": np.zeros(80, dtype=int),
        },
    )
    stuck_q = CommonsenseQuestion(id="stuck", text="t", answer_labels=("x", "y"))
    result = train_all(
        constant, [TOY_QUESTION, stuck_q],
        [TrainConfig(algorithm="decision_tree")], k=5,
    )
    assert [r.qid for r in result.rows] == ["toy"]
    assert len(result.failures) == 1
    assert result.failures[0][0] == "stuck"
    assert "stuck" not in result.best


def test_train_all_best_prefers_earlier_config_on_ties():
    survey = rule_survey(n=100)
    result = train_all(
        survey, [TOY_QUESTION],
        [TrainConfig(algorithm="decision_tree"),
         TrainConfig(algorithm="random_forest_clf", hyperparams={"n_trees": 20})],
        k=5,
    )
    by_algo = {r.algorithm: r for r in result.rows}
    winner = result.best["toy"]
    best_acc = by_algo[winner].cv_accuracy_postfusion
    for r in result.rows:
        assert r.cv_accuracy_postfusion <= best_acc
    if len({r.cv_accuracy_postfusion for r in result.rows}) == 1:
        assert winner == "decision_tree"


def test_report_csv_shape():
    survey = rule_survey(n=80)
    result = train_all(survey, [TOY_QUESTION],
                       [TrainConfig(algorithm="knn")], k=4)
    text = report_to_csv(result)
    lines = text.strip().splitlines()
    assert lines[0] == "qid,algorithm,cv_accuracy_prefusion,cv_accuracy_postfusion"
    assert lines[1].startswith("toy,knn,")


# --- consistency screening --------------------------------------------------------

def test_consistency_flags_far_duplicates():
    answers = flat_answers()
    answers[0], answers[6] = 1, 4
    violation = check_consistency(response(answers), [(1, 7)])
    assert violation == (1, 7)


def test_consistency_allows_one_step():
    answers = flat_answers()
    answers[0], answers[6] = 3, 4
    assert check_consistency(response(answers), [(1, 7)]) is None


# --- catalog ----------------------------------------------------------------------

def test_bundled_catalog_loads():
    catalog = load_catalog()
    assert len(catalog.questionnaire_items) == 50
    assert catalog.duplicate_pairs
    assert len(catalog.questions) >= 10
    q = catalog.question("travel_ban")
    assert q.fusion_map == {0: 0, 2: 0, 1: 1, 3: 1}


def test_bundled_duplicate_pairs_reference_matching_items():
    catalog = load_catalog()
    for a, b in catalog.duplicate_pairs:
        assert catalog.questionnaire_items[a - 1] == catalog.questionnaire_items[b - 1]


def test_unknown_question_id_rejected():
    catalog = load_catalog()
    with pytest.raises(SurveyError, match="no question"):
        catalog.question("nope")


# --- survey CSV -------------------------------------------------------------------

def small_catalog(duplicate_pairs=((1, 7),)):
    return Catalog(
        questionnaire_items=tuple(f"item {i}" for i in range(1, 51)),
        duplicate_pairs=tuple(duplicate_pairs),
        questions=(TOY_QUESTION,),
    )


def test_survey_csv_round_trip(tmp_path):
    survey = rule_survey(n=30)
    save_survey_csv(survey, tmp_path / "s.csv")
    loaded = load_survey_csv(tmp_path / "s.csv", small_catalog(duplicate_pairs=()))
    assert loaded.survey.responses == survey.responses
    np.testing.assert_array_equal(loaded.survey.answers["toy"],
                                  survey.answers["toy"])


def test_survey_csv_rejects_inconsistent_respondents(tmp_path):
    answers = flat_answers()
    answers[0], answers[6] = 1, 5
    survey = SurveyDataset(
        responses=(response(flat_answers(), "ok"), response(answers, "bad")),
        answers={"toy": np.array([0, 1])},
    )
    save_survey_csv(survey, tmp_path / "s.csv")
    loaded = load_survey_csv(tmp_path / "s.csv", small_catalog())
    assert [r.respondent_id for r in loaded.survey.responses] == ["ok"]
    assert loaded.rejected == (("bad", 1, 7),)


def test_survey_csv_rejects_unknown_answer_column(tmp_path):
    survey = rule_survey(n=5)
    save_survey_csv(survey, tmp_path / "s.csv")
    text = (tmp_path / "s.csv").read_text("utf-8").replace("a_toy", "a_nope")
    (tmp_path / "s.csv").write_text(text, "utf-8")
    with pytest.raises(SurveyError):
        load_survey_csv(tmp_path / "s.csv", small_catalog())


# --- bank persistence ---------------------------------------------------------------

def test_bank_round_trip_preserves_predictions(tmp_path):
    survey = rule_survey(n=100)
    result = train_all(
        survey, [TOY_QUESTION],
        [TrainConfig(algorithm="decision_tree"),
         TrainConfig(algorithm="knn")],
        k=5,
    )
    save_bank(result, tmp_path / "bank.json")
    loaded = load_bank(tmp_path / "bank.json")
    assert loaded.best == result.best
    assert set(loaded.bank) == set(result.bank)
    probe = flat_answers(5)
    assert predict_with_bank(loaded, probe) == predict_with_bank(result, probe)


def test_bank_file_checksum_guard(tmp_path):
    survey = rule_survey(n=60)
    result = train_all(survey, [TOY_QUESTION],
                       [TrainConfig(algorithm="knn")], k=4)
    save_bank(result, tmp_path / "bank.json")
    text = (tmp_path / "bank.json").read_text("utf-8")
    (tmp_path / "bank.json").write_text(text.replace('"best"', '"Best"', 1), "utf-8")
    from traitlex.errors import ModelIntegrityError
    with pytest.raises(ModelIntegrityError):
        load_bank(tmp_path / "bank.json")
