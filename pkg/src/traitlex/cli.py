"""Command line front end.

Every subcommand takes --out DIR, writes its artifacts there atomically,
and records the fully resolved configuration in DIR/run.json, so reruns
with the same inputs and seed produce byte-identical outputs.  Exit codes:
0 on success, 1 on usage errors, 2 on data errors.
"""

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, commonsense, evaluation, mlcore, pdfmodel, synthgen
from ._util import atomic_write_text, fmt_float
from .binning import BinningScheme
from .corpus import (
    SHIPPED_POLICIES,
    AdjectiveLexicon,
    bundled_lexicon,
    ingest_jsonl,
    load_store,
    persist_store,
)
from .errors import TraitlexError

FORMAT_VERSIONS = {
    "corpus": 1,
    "pdf-model": pdfmodel.MODEL_FORMAT_VERSION,
    "ml-model": mlcore.base.ML_MODEL_FORMAT_VERSION,
    "catalog": commonsense.CATALOG_FORMAT_VERSION,
    "bank": commonsense.BANK_FORMAT_VERSION,
    "generator-spec": synthgen.SPEC_FORMAT_VERSION,
}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _write_run_manifest(out_dir: Path, command: str, args: dict) -> None:
    manifest = {
        "tool": "traitlex",
        "tool_version": __version__,
        "format_versions": FORMAT_VERSIONS,
        "command": command,
        "arguments": {
            k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(args.items())
        },
    }
    atomic_write_text(
        out_dir / "run.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    )


def _csv(out_dir: Path, name: str, header: str, rows) -> None:
    atomic_write_text(
        out_dir / name, "\n".join([header] + [",".join(r) for r in rows]) + "\n"
    )


def _policy_from_args(args):
    policy = SHIPPED_POLICIES[args.policy]
    overrides = {}
    if getattr(args, "min_words", None) is not None:
        overrides["min_words"] = args.min_words
    if getattr(args, "max_words", None) is not None:
        overrides["max_words"] = args.max_words
    if getattr(args, "lang", None) is not None:
        overrides["required_lang"] = args.lang
    if getattr(args, "min_adj_total", None) is not None:
        overrides["min_adjective_total_freq"] = args.min_adj_total
    return replace(policy, **overrides) if overrides else policy


def _binning_from_args(args) -> BinningScheme:
    return BinningScheme(lo=args.lo, hi=args.hi, n_bins=args.bins)


def _report_rows(report):
    return [
        [
            str(report.n),
            fmt_float(report.mae),
            fmt_float(report.rmse),
            fmt_float(report.marginal_accuracy),
            fmt_float(report.margin),
        ]
    ]


# --- subcommand handlers ------------------------------------------------------

def _cmd_ingest(args):
    out = Path(args.out)
    lexicon = (
        AdjectiveLexicon.from_file(args.lexicon) if args.lexicon else bundled_lexicon()
    )
    policy = _policy_from_args(args)
    result = ingest_jsonl(args.input, lexicon=lexicon, policy=policy)
    persist_store(result.store, out)
    _csv(out, "rejections.csv", "sample_id,reason",
         [[sid, reason] for sid, reason in result.rejections])
    _write_run_manifest(out, "ingest", {
        "input": args.input, "out": args.out, "lexicon": args.lexicon or "builtin",
        "policy": policy.to_dict(),
    })
    print(
        f"ingested {len(result.store)} of {result.n_read} records "
        f"({len(result.rejections)} rejected) into {out}"
    )
    return 0


def _cmd_distribution(args):
    out = Path(args.out)
    store = load_store(args.corpus)
    rows = evaluation.score_distribution(store, args.trait, n_bins=args.bins)
    _csv(out, "distribution.csv", "lo,hi,count,percent",
         [[fmt_float(r.lo), fmt_float(r.hi), str(r.count), fmt_float(r.percent)]
          for r in rows])
    _write_run_manifest(out, "distribution", {
        "corpus": args.corpus, "trait": args.trait, "bins": args.bins, "out": args.out,
    })
    print(f"wrote score distribution for trait {args.trait} to {out}")
    return 0


def _cmd_pdf_build(args):
    out = Path(args.out)
    store = load_store(args.corpus)
    binning = _binning_from_args(args)
    model = pdfmodel.build_model(
        store, args.trait, binning=binning,
        min_word_freq=args.min_word_freq, smoothing_alpha=args.alpha,
    )
    pdfmodel.save_model(model, out / "model.json")
    _write_run_manifest(out, "pdf-build", {
        "corpus": args.corpus, "trait": args.trait, "out": args.out,
        "lo": args.lo, "hi": args.hi, "bins": args.bins,
        "min_word_freq": args.min_word_freq, "alpha": args.alpha,
    })
    print(
        f"built density model for trait {args.trait}: "
        f"{len(model.pdfs)} words over {binning.n_bins} bins"
    )
    return 0


def _predict_rows(model, store, policy):
    from .corpus import filter_sample
    from .errors import DegenerateDistributionError

    rows, skipped = [], []
    for sample in store.samples:
        if policy is not None:
            reason = filter_sample(sample, policy)
            if reason is not None:
                skipped.append([sample.id, reason])
                continue
        try:
            pred = pdfmodel.predict(model, sample)
        except DegenerateDistributionError:
            skipped.append([sample.id, "degenerate"])
            continue
        truth = ""
        if sample.scores and model.trait in sample.scores:
            truth = fmt_float(sample.scores[model.trait])
        rows.append([
            sample.id, fmt_float(pred.label), fmt_float(pred.confidence),
            str(pred.words_used), truth,
        ])
    return rows, skipped


def _cmd_pdf_predict(args):
    out = Path(args.out)
    model = pdfmodel.load_model(args.model)
    store = load_store(args.corpus)
    policy = None if args.policy == "none" else SHIPPED_POLICIES[args.policy]
    rows, skipped = _predict_rows(model, store, policy)
    _csv(out, "predictions.csv", "sample_id,label,confidence,words_used,truth", rows)
    _csv(out, "skipped.csv", "sample_id,reason", skipped)
    _write_run_manifest(out, "pdf-predict", {
        "model": args.model, "corpus": args.corpus, "policy": args.policy,
        "out": args.out,
    })
    print(f"predicted {len(rows)} samples ({len(skipped)} skipped)")
    return 0


def _cmd_pdf_eval(args):
    out = Path(args.out)
    model = pdfmodel.load_model(args.model)
    store = load_store(args.corpus)
    policy = None if args.policy == "none" else SHIPPED_POLICIES[args.policy]
    result = evaluation.evaluate_pdf_model(
        model, store, policy=policy, margin=args.margin
    )
    _csv(out, "report.csv", "n,mae,rmse,marginal_accuracy,margin",
         _report_rows(result.report))
    _csv(out, "curve.csv", "threshold,mae,n_retained",
         [[fmt_float(p.threshold), "" if p.mae is None else fmt_float(p.mae),
           str(p.n_retained)] for p in result.curve])
    _csv(out, "predictions.csv", "sample_id,label,confidence,words_used,truth",
         [[r.sample_id, fmt_float(r.label), fmt_float(r.confidence),
           str(r.words_used), fmt_float(r.truth)] for r in result.records])
    _csv(out, "skipped.csv", "sample_id,reason",
         [[sid, reason] for sid, reason in result.skipped])
    _write_run_manifest(out, "pdf-eval", {
        "model": args.model, "corpus": args.corpus, "policy": args.policy,
        "margin": args.margin, "out": args.out,
    })
    r = result.report
    print(
        f"n={r.n} mae={r.mae:.4f} rmse={r.rmse:.4f} "
        f"marginal_accuracy={r.marginal_accuracy:.4f} (margin {r.margin})"
    )
    return 0


def _dataset_from_args(args, need_labels: str | None):
    if args.data:
        return mlcore.load_dataset_csv(args.data)
    if not args.corpus or not args.trait:
        raise _UsageError("provide either --data or both --corpus and --trait")
    store = load_store(args.corpus)
    binning = _binning_from_args(args) if need_labels == "class" else None
    return mlcore.corpus_to_dataset(store, args.trait, binning=binning)


def _cmd_ml_train(args):
    out = Path(args.out)
    config_hp = {}
    if args.k is not None:
        config_hp["k"] = args.k
    if args.trees is not None:
        config_hp["n_trees"] = args.trees
    config = mlcore.TrainConfig(
        algorithm=args.algorithm, seed=args.seed, hyperparams=config_hp
    )
    need = "class" if config.kind == "classifier" else "score"
    ds = _dataset_from_args(args, need_labels=need)
    if args.min_feature_share is not None:
        ds = mlcore.select_features_by_frequency(ds, args.min_feature_share)
    if args.min_coverage is not None:
        ds = mlcore.filter_datapoints_by_coverage(ds, args.min_coverage)
    model = mlcore.train(config, ds)
    mlcore.save_trained_model(model, out / "model.json")
    _write_run_manifest(out, "ml-train", {
        "data": args.data, "corpus": args.corpus, "trait": args.trait,
        "algorithm": args.algorithm, "seed": args.seed,
        "hyperparams": model.hyperparams, "out": args.out,
        "min_feature_share": args.min_feature_share,
        "min_coverage": args.min_coverage,
        "lo": args.lo, "hi": args.hi, "bins": args.bins,
    })
    print(f"trained {args.algorithm} on {ds.n} rows x {ds.n_features} features")
    return 0


def _cmd_ml_eval(args):
    out = Path(args.out)
    model = mlcore.load_trained_model(args.model)
    ds = _dataset_from_args(
        args, need_labels="class" if model.kind == "classifier" else "score"
    )
    pred = mlcore.predict_dataset(model, ds)
    if model.kind == "classifier":
        if ds.y_class is None:
            raise TraitlexError("dataset has no class labels to evaluate against")
        accuracy = evaluation.exact_accuracy(pred, ds.y_class)
        _csv(out, "report.csv", "n,accuracy",
             [[str(ds.n), fmt_float(accuracy)]])
        truth_col = [str(int(v)) for v in ds.y_class]
        pred_col = [str(int(v)) for v in pred]
        summary = f"n={ds.n} accuracy={accuracy:.4f}"
    else:
        if ds.y_score is None:
            raise TraitlexError("dataset has no score labels to evaluate against")
        report = evaluation.evaluate_scores(pred, ds.y_score, margin=args.margin)
        _csv(out, "report.csv", "n,mae,rmse,marginal_accuracy,margin",
             _report_rows(report))
        truth_col = [fmt_float(v) for v in ds.y_score]
        pred_col = [fmt_float(v) for v in pred]
        summary = f"n={report.n} mae={report.mae:.4f} rmse={report.rmse:.4f}"
    _csv(out, "predictions.csv", "row,predicted,truth",
         [[str(i), p, t] for i, (p, t) in enumerate(zip(pred_col, truth_col))])
    _write_run_manifest(out, "ml-eval", {
        "model": args.model, "data": args.data, "corpus": args.corpus,
        "trait": args.trait, "margin": args.margin, "out": args.out,
        "lo": args.lo, "hi": args.hi, "bins": args.bins,
    })
    print(summary)
    return 0


def _cmd_cs_train(args):
    out = Path(args.out)
    catalog = commonsense.load_catalog(args.catalog)
    ingest = commonsense.load_survey_csv(args.survey, catalog)
    survey = ingest.survey
    if survey.n == 0:
        raise TraitlexError("every respondent failed the consistency check")
    questions = [catalog.question(qid) for qid in survey.answers]
    configs = []
    for name in args.algorithms.split(","):
        name = name.strip()
        hp = {}
        if args.trees is not None and name.startswith("random_forest"):
            hp["n_trees"] = args.trees
        configs.append(
            mlcore.TrainConfig(algorithm=name, seed=args.seed, hyperparams=hp)
        )
    result = commonsense.train_all(
        survey, questions, configs, k=args.k, seed=args.seed,
        min_abs_r=args.min_abs_r,
    )
    commonsense.save_bank(result, out / "bank.json")
    atomic_write_text(out / "report.csv", commonsense.report_to_csv(result))
    _csv(out, "rejected.csv", "respondent_id,item_a,item_b",
         [[rid, str(a), str(b)] for rid, a, b in ingest.rejected])
    _csv(out, "failures.csv", "qid,algorithm,message",
         [[qid, algo, msg.replace(",", ";")] for qid, algo, msg in result.failures])
    _write_run_manifest(out, "cs-train", {
        "survey": args.survey, "catalog": args.catalog or "builtin",
        "algorithms": args.algorithms, "k": args.k, "seed": args.seed,
        "min_abs_r": args.min_abs_r, "trees": args.trees, "out": args.out,
    })
    print(
        f"trained {len(result.rows)} (question, algorithm) pairs on "
        f"{survey.n} respondents ({len(ingest.rejected)} rejected, "
        f"{len(result.failures)} failures)"
    )
    return 0


def _read_answers(args):
    if args.answers_file:
        text = Path(args.answers_file).read_text("utf-8")
    else:
        if sys.stdin.isatty():
            print(
                f"enter {commonsense.N_ITEMS} Likert answers (1-5), "
                "whitespace separated:", file=sys.stderr
            )
        text = sys.stdin.read()
    parts = text.replace(",", " ").split()
    try:
        values = [int(p) for p in parts]
    except ValueError:
        raise TraitlexError(f"answers must be integers, got {parts[:3]}...") from None
    if len(values) != commonsense.N_ITEMS:
        raise TraitlexError(
            f"expected {commonsense.N_ITEMS} answers, got {len(values)}"
        )
    return values


def _cmd_cs_predict(args):
    bank = commonsense.load_bank(args.bank)
    answers = _read_answers(args)
    predictions = commonsense.predict_with_bank(bank, answers)
    rows = [[qid, label] for qid, label in predictions.items()]
    if args.out:
        out = Path(args.out)
        _csv(out, "answers.csv", "qid,predicted_label", rows)
        _write_run_manifest(out, "cs-predict", {
            "bank": args.bank, "answers_file": args.answers_file, "out": args.out,
        })
        print(f"wrote {len(rows)} predicted answers to {out}")
    else:
        for qid, label in rows:
            print(f"{qid},{label}")
    return 0


def _cmd_synth(args):
    out = Path(args.out)
    spec = synthgen.load_generator_spec(args.spec)
    wrote = []
    if spec.n_samples > 0:
        store = synthgen.generate_corpus(spec)
        persist_store(store, out / "corpus")
        wrote.append(f"{len(store)} corpus samples")
    if spec.survey is not None:
        survey, questions = synthgen.generate_survey(spec)
        commonsense.save_survey_csv(survey, out / "survey.csv")
        catalog_payload = {
            "format": commonsense.CATALOG_FORMAT,
            "format_version": commonsense.CATALOG_FORMAT_VERSION,
            "questionnaire_items": [
                f"questionnaire item {i}" for i in range(1, commonsense.N_ITEMS + 1)
            ],
            "duplicate_pairs": [],
            "questions": [
                {
                    "id": q.id,
                    "text": q.text,
                    "labels": list(q.answer_labels),
                    "fusion_map": None,
                }
                for q in questions
            ],
        }
        atomic_write_text(
            out / "catalog.json",
            json.dumps(catalog_payload, indent=2, sort_keys=True) + "\n",
        )
        wrote.append(f"{survey.n} survey respondents")
    _write_run_manifest(out, "synth", {
        "spec": args.spec, "out": args.out,
        "seed": spec.seed, "generator": synthgen.GENERATOR_NAME,
    })
    print("generated " + (", ".join(wrote) if wrote else "nothing (empty spec)"))
    return 0


# --- parser ----------------------------------------------------------------------

def _add_binning_flags(p):
    p.add_argument("--lo", type=float, default=0.1, help="lower edge of the score range")
    p.add_argument("--hi", type=float, default=0.9, help="upper edge of the score range")
    p.add_argument("--bins", type=int, default=8, help="number of score bins")


def build_parser() -> _Parser:
    parser = _Parser(
        prog="traitlex",
        description="Lexical trait estimation and questionnaire answer prediction.",
    )
    parser.add_argument(
        "--version", action="version",
        version=f"traitlex {__version__} "
                + " ".join(f"{k}-format={v}" for k, v in sorted(FORMAT_VERSIONS.items())),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="read raw JSONL records into a corpus store")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--policy", choices=sorted(SHIPPED_POLICIES), default="ingest-default")
    p.add_argument("--lexicon", help="adjective list file, one word per line")
    p.add_argument("--min-words", type=int, dest="min_words")
    p.add_argument("--max-words", type=int, dest="max_words")
    p.add_argument("--lang", dest="lang")
    p.add_argument("--min-adj-total", type=int, dest="min_adj_total",
                   help="drop adjectives rarer than this across the corpus")
    p.set_defaults(handler=_cmd_ingest)

    p = sub.add_parser("distribution", help="histogram of a trait's scores")
    p.add_argument("--corpus", required=True)
    p.add_argument("--trait", required=True)
    p.add_argument("--bins", type=int, default=10)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_distribution)

    p = sub.add_parser("pdf-build", help="estimate per-word densities from a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--trait", required=True)
    p.add_argument("--out", required=True)
    _add_binning_flags(p)
    p.add_argument("--min-word-freq", type=int, default=300, dest="min_word_freq")
    p.add_argument("--alpha", type=float, default=0.0,
                   help="additive smoothing for per-word bin counts")
    p.set_defaults(handler=_cmd_pdf_build)

    p = sub.add_parser("pdf-predict", help="predict trait labels for a corpus")
    p.add_argument("--model", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--policy", choices=sorted(SHIPPED_POLICIES), default="pdf-stage")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_pdf_predict)

    p = sub.add_parser("pdf-eval", help="score density-model predictions against truth")
    p.add_argument("--model", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--policy", choices=sorted(SHIPPED_POLICIES), default="pdf-stage")
    p.add_argument("--margin", type=float, default=0.10)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_pdf_eval)

    p = sub.add_parser("ml-train", help="train one learner on a dataset")
    p.add_argument("--data", help="dataset CSV (features plus class/score column)")
    p.add_argument("--corpus", help="corpus store to build the dataset from")
    p.add_argument("--trait")
    p.add_argument("--algorithm", required=True, choices=sorted(mlcore.ALGORITHMS))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int, help="neighbour count for knn")
    p.add_argument("--trees", type=int, help="tree count for the forests")
    p.add_argument("--min-feature-share", type=float, dest="min_feature_share",
                   help="drop features below this share of the total frequency")
    p.add_argument("--min-coverage", type=float, dest="min_coverage",
                   help="drop rows with non-zero entries in fewer than this "
                        "fraction of columns")
    p.add_argument("--out", required=True)
    _add_binning_flags(p)
    p.set_defaults(handler=_cmd_ml_train)

    p = sub.add_parser("ml-eval", help="evaluate a trained learner on a dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--data")
    p.add_argument("--corpus")
    p.add_argument("--trait")
    p.add_argument("--margin", type=float, default=0.10)
    p.add_argument("--out", required=True)
    _add_binning_flags(p)
    p.set_defaults(handler=_cmd_ml_eval)

    p = sub.add_parser("cs-train", help="train answer models from a survey")
    p.add_argument("--survey", required=True)
    p.add_argument("--catalog", help="question catalog JSON (default: bundled)")
    p.add_argument("--algorithms", default="random_forest_clf",
                   help="comma separated algorithm names")
    p.add_argument("--k", type=int, default=10, help="cross-validation folds")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-abs-r", type=float, default=0.05, dest="min_abs_r")
    p.add_argument("--trees", type=int, default=100,
                   help="tree count for forest algorithms")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_cs_train)

    p = sub.add_parser("cs-predict", help="answer questions for one questionnaire")
    p.add_argument("--bank", required=True)
    p.add_argument("--answers-file", dest="answers_file",
                   help="file of 50 Likert values; stdin when omitted")
    p.add_argument("--out", help="output directory; stdout when omitted")
    p.set_defaults(handler=_cmd_cs_predict)

    p = sub.add_parser("synth", help="generate synthetic corpora and surveys")
    p.add_argument("--spec", required=True, help="generator spec JSON")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as e:
        print(f"traitlex: {e}", file=sys.stderr)
        return 1
    try:
        return args.handler(args)
    except _UsageError as e:
        print(f"traitlex: {e}", file=sys.stderr)
        return 1
    except TraitlexError as e:
        print(f"traitlex: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"traitlex: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
