"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data or validation error, 3 internal
error. Every run echoes its resolved configuration on stderr.

A ``--config`` file is INI-style. Keys in ``[global]`` apply to every
subcommand; keys in a section named after the subcommand (``[train]``,
``[compare-splits]``...) apply to that subcommand only. Key names are the
long flag names without dashes (``batch-size`` or ``batch_size``). Flags on
the command line override file values.
"""

from __future__ import annotations

import argparse
import configparser
import json
import logging
import os
import sys
import traceback
from dataclasses import replace
from pathlib import Path

from .classical import ClassicalHyperparams, predict_proba
from .corpus import load_csv, synthesize_corpus, write_csv
from .errors import DataError, ManasError
from .harness import (
    ALGORITHMS, CLASSICAL, DEFAULT_FRACTIONS, ExperimentConfig, ExperimentResult, SweepTable,
    compare_splits, default_neural_config, run_experiment, word_frequencies,
)
from .neural import add_special_tokens, encode_tokens, pad_and_mask
from .persistence import read_model_file, save_model
from .preprocess import PreprocessConfig, load_stopwords, preprocess_document
from .report import render_figures_csv, render_report, render_wordfreq_csv
from .vectorize import vectorize

log = logging.getLogger("manas")

SUBCOMMANDS = ("ingest", "synth", "train", "evaluate", "compare-splits", "predict", "wordfreq", "report")
SEED_ENV = "MANAS_SEED"


class UsageError(Exception):
    def __init__(self, message: str, usage: str = ""):
        super().__init__(message)
        self.usage = usage


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message, self.format_usage())


def _fraction(s: str) -> float:
    v = float(s)
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError(f"fraction must be in (0, 1), got {s}")
    return v


def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s}")
    return v


def _seed(s: str) -> int:
    v = int(s)
    if v < 0:
        raise argparse.ArgumentTypeError(f"seed must be non-negative, got {s}")
    return v


def _global_options(defaults_suppressed: bool) -> argparse.ArgumentParser:
    # Shared by the top-level parser and every subparser so the global flags
    # may appear before or after the subcommand.
    p = argparse.ArgumentParser(add_help=False)
    d = {"default": argparse.SUPPRESS} if defaults_suppressed else {}
    g = p.add_argument_group("global options")
    g.add_argument("--seed", type=_seed, help=f"master seed (falls back to ${SEED_ENV}, then 0)", **d)
    g.add_argument("--config", metavar="FILE", help="INI file supplying flag values", **d)
    g.add_argument("--jobs", type=_positive_int, help="worker processes for split sweeps", **d)
    v = g.add_mutually_exclusive_group()
    v.add_argument("--quiet", action="store_true", help="only print errors", **d)
    v.add_argument("--verbose", action="store_true", help="per-epoch progress lines", **d)
    return p


def _corpus_option(p):
    p.add_argument("--corpus", default="corpus.csv", help="survey CSV (default: corpus.csv)")


def _pipeline_options(p):
    g = p.add_argument_group("pipeline options")
    g.add_argument("--fraction", type=_fraction,
                   help="train fraction (default: 0.90 classical, 0.75 rnn, 0.80 bert)")
    g.add_argument("--min-count", type=_positive_int, default=1, help="minimum token count in vocabulary")
    g.add_argument("--stopwords", metavar="FILE", help="stopword list (default: bundled Bangla list)")
    g.add_argument("--casefold-ascii", action="store_true", help="lowercase ASCII letters")
    c = p.add_argument_group("classical hyperparameters")
    c.add_argument("--alpha", type=float, default=1.0, help="naive Bayes smoothing")
    c.add_argument("--k", type=_positive_int, default=5, help="K-NN neighbours (odd)")
    c.add_argument("--max-depth", type=_positive_int, help="tree depth limit (default: unlimited)")
    c.add_argument("--n-trees", type=_positive_int, default=100, help="random forest size")
    c.add_argument("--max-features", choices=("sqrt", "all"), default="sqrt",
                   help="features tried per forest split")
    c.add_argument("--no-bootstrap", action="store_true", help="grow forest trees on the full train set")
    c.add_argument("--svc-c", type=float, default=1.0, help="SVC regularization strength")
    n = p.add_argument_group("neural hyperparameters")
    n.add_argument("--epochs", type=_positive_int, help="default: 15 rnn, 3 bert")
    n.add_argument("--batch-size", type=_positive_int, help="default: 52 rnn, 8 bert")
    n.add_argument("--learning-rate", type=float, help="Adam step size (default: 0.0005)")
    n.add_argument("--validation-split", type=float, help="held-out share of train (default: 0.15)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="manas", description="Depression classification of Bangla survey opinions.",
                     parents=[_global_options(False)])
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True
    common = [_global_options(True)]

    p = sub.add_parser("ingest", parents=common, help="validate a survey CSV and write it normalized")
    p.add_argument("--input", required=True, help="raw survey CSV (TypeOfOpinion, Status)")
    p.add_argument("--output", default="corpus.csv")

    p = sub.add_parser("synth", parents=common, help="generate a synthetic labelled corpus")
    p.add_argument("--n", type=_positive_int, default=400, help="number of documents")
    p.add_argument("--balance", type=float, default=0.5, help="share of depressed documents")
    p.add_argument("--signal", type=float, default=0.9, help="probability a token is class-indicative")
    p.add_argument("--output", default="corpus.csv")

    p = sub.add_parser("train", parents=common, help="train one model and save it")
    p.add_argument("--algo", required=True, choices=ALGORITHMS)
    _corpus_option(p)
    _pipeline_options(p)
    p.add_argument("--model", help="output model file (default: model.<algo>.mdl)")
    p.add_argument("--results", default="results.json")
    p.add_argument("--history", default="history.csv", help="epoch history for neural models")

    p = sub.add_parser("evaluate", parents=common, help="run experiments and write reports")
    p.add_argument("--algos", nargs="+", choices=ALGORITHMS, default=list(CLASSICAL))
    _corpus_option(p)
    _pipeline_options(p)
    p.add_argument("--results", default="results.json")
    p.add_argument("--report-md", default="report.md")
    p.add_argument("--report-csv", default="report.csv")
    p.add_argument("--figures", default="figures.csv")
    p.add_argument("--history", default="history.csv", help="epoch history for neural models")

    p = sub.add_parser("compare-splits", parents=common, help="test accuracy across train/test splits")
    p.add_argument("--algos", nargs="+", choices=ALGORITHMS, default=list(CLASSICAL))
    p.add_argument("--fractions", nargs="+", type=_fraction, default=list(DEFAULT_FRACTIONS))
    _corpus_option(p)
    _pipeline_options(p)
    p.add_argument("--results", default="results.json")
    p.add_argument("--report-md", default="report.md")
    p.add_argument("--report-csv", default="report.csv")

    p = sub.add_parser("predict", parents=common, help="classify one text with a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--text", required=True)

    p = sub.add_parser("wordfreq", parents=common, help="most frequent tokens after preprocessing")
    _corpus_option(p)
    p.add_argument("--top", type=_positive_int, default=50)
    p.add_argument("--stopwords", metavar="FILE", help="stopword list (default: bundled Bangla list)")
    p.add_argument("--casefold-ascii", action="store_true")
    p.add_argument("--output", default="wordfreq.csv")

    p = sub.add_parser("report", parents=common, help="re-render saved results")
    p.add_argument("--results", default="results.json")
    p.add_argument("--format", choices=("markdown", "csv", "both"), default="both")
    p.add_argument("--report-md", default="report.md")
    p.add_argument("--report-csv", default="report.csv")
    return parser


def _to_bool(value: str) -> bool:
    v = value.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


def _apply_config_file(parser: argparse.ArgumentParser, path: str, command: str) -> dict:
    """Install file values as defaults on the subcommand parser.

    Returns the global values that have no subcommand flag (seed, jobs...).
    """
    cp = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc.strerror}")
    except configparser.Error as exc:
        raise UsageError(f"bad config file {path}: {exc}")
    unknown = [s for s in cp.sections() if s != "global" and s not in SUBCOMMANDS]
    if unknown:
        raise UsageError(f"unknown config sections {unknown}")
    values = dict(cp["global"]) if cp.has_section("global") else {}
    if cp.has_section(command):
        values.update(cp[command])

    subparser = next(a for a in parser._subparsers._group_actions).choices[command]
    actions = {a.dest: a for a in subparser._actions if a.dest not in ("help", argparse.SUPPRESS)}
    defaults, global_values = {}, {}
    for key, raw in values.items():
        dest = key.replace("-", "_")
        action = actions.get(dest)
        if action is None:
            raise UsageError(f"unknown config key {key!r} for {command}")
        try:
            if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
                value = _to_bool(raw)
            elif action.nargs in ("+", "*"):
                items = raw.replace(",", " ").split()
                value = [action.type(x) if action.type else x for x in items]
            else:
                value = action.type(raw) if action.type else raw
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise UsageError(f"config key {key!r}: {exc}")
        choices = action.choices
        if choices is not None:
            for v in value if isinstance(value, list) else [value]:
                if v not in choices:
                    raise UsageError(f"config key {key!r}: {v!r} not in {sorted(choices)}")
        if dest in ("seed", "jobs", "quiet", "verbose"):
            global_values[dest] = value
        else:
            defaults[dest] = value
    subparser.set_defaults(**defaults)
    return global_values


def parse_args(argv) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    file_globals = {}
    if getattr(args, "config", None):
        file_globals = _apply_config_file(parser, args.config, args.command)
        args = parser.parse_args(argv)
    for name in ("jobs", "quiet", "verbose"):
        if getattr(args, name, None) in (None, False) and name in file_globals:
            setattr(args, name, file_globals[name])
    if getattr(args, "seed", None) is None:
        if "seed" in file_globals:
            args.seed = file_globals["seed"]
        elif os.environ.get(SEED_ENV, "").strip():
            try:
                args.seed = _seed(os.environ[SEED_ENV])
            except (ValueError, argparse.ArgumentTypeError):
                raise UsageError(f"${SEED_ENV} must be a non-negative integer")
        else:
            args.seed = 0
    args.jobs = getattr(args, "jobs", None) or 1
    args.quiet = bool(getattr(args, "quiet", False))
    args.verbose = bool(getattr(args, "verbose", False))
    if args.quiet and args.verbose:
        raise UsageError("--quiet and --verbose are mutually exclusive")
    return args


# ---------------------------------------------------------------- helpers

class _stage:
    def __init__(self, name):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if isinstance(exc, ManasError) and exc.stage is None:
            exc.stage = self.name
        return False


def _write(path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8", newline="")
    log.info("wrote %s", path)


def _preprocess_config(args) -> PreprocessConfig:
    stop = load_stopwords(args.stopwords) if args.stopwords else load_stopwords()
    return PreprocessConfig(stopword_list=stop, casefold_ascii=args.casefold_ascii)


def _experiment_config(args, algorithm: str, fraction=None) -> ExperimentConfig:
    with _stage("config"):
        pre = _preprocess_config(args)
        classical = ClassicalHyperparams(
            algorithm=algorithm if algorithm in CLASSICAL else "rfc",
            mnb_alpha=args.alpha, knn_k=args.k, tree_max_depth=args.max_depth,
            rfc_n_trees=args.n_trees, rfc_max_features=args.max_features,
            rfc_bootstrap=not args.no_bootstrap, svc_c=args.svc_c,
        )
        # untouched neural settings stay None so each model keeps its own defaults
        neural = None
        overrides = {k: v for k, v in (("epochs", args.epochs), ("batch_size", args.batch_size),
                                       ("learning_rate", args.learning_rate),
                                       ("validation_split", args.validation_split)) if v is not None}
        if algorithm not in CLASSICAL and overrides:
            neural = replace(default_neural_config(algorithm), **overrides)
        return ExperimentConfig(algorithm, fraction if fraction is not None else args.fraction, args.seed,
                                pre, classical, neural, args.min_count)


def _load_corpus(path):
    with _stage("corpus"):
        return load_csv(path)


def _echo_config(args, extra: dict | None = None) -> None:
    skip = {"config"}
    resolved = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    if extra:
        resolved.update(extra)
    print("config: " + json.dumps(resolved, ensure_ascii=False, sort_keys=True, default=str),
          file=sys.stderr)


def _dump_results(path, results, sweep=None) -> None:
    doc = {"results": [r.to_dict() for r in results], "sweep": None if sweep is None else sweep.to_dict()}
    _write(path, json.dumps(doc, ensure_ascii=False, indent=2, sort_keys=True) + "\n")


def _write_history(path, results) -> None:
    neural = [r for r in results if r.history is not None]
    if not neural:
        return
    if len(neural) == 1:
        _write(path, neural[0].history.to_csv())
        return
    # one file, model column first
    lines = []
    for i, r in enumerate(neural):
        rows = r.history.to_csv().splitlines()
        if i == 0:
            lines.append("model," + rows[0])
        lines += [f"{r.display_name},{row}" for row in rows[1:]]
    _write(path, "\n".join(lines) + "\n")


# ---------------------------------------------------------------- commands

def cmd_ingest(args) -> int:
    _echo_config(args)
    corpus = _load_corpus(args.input)
    with _stage("ingest"):
        write_csv(corpus, args.output)
    counts = corpus.class_counts
    if not args.quiet:
        print(f"{len(corpus)} records ({counts.get(1, 0)} yes / {counts.get(0, 0)} no) -> {args.output}")
    return 0


def cmd_synth(args) -> int:
    _echo_config(args)
    with _stage("synth"):
        corpus = synthesize_corpus(args.n, args.balance, args.signal, seed=args.seed)
        write_csv(corpus, args.output)
    if not args.quiet:
        print(f"{len(corpus)} synthetic records -> {args.output}")
    return 0


def cmd_train(args) -> int:
    config = _experiment_config(args, args.algo)
    _echo_config(args, {"experiment": config.to_dict()})
    corpus = _load_corpus(args.corpus)
    result = run_experiment(corpus, config, keep_model=True)
    path = args.model or f"model.{args.algo}.mdl"
    with _stage("save"):
        save_model(result.model, result.vocabulary, path, config.preprocess)
    _dump_results(args.results, [result])
    _write_history(args.history, [result])
    if not args.quiet:
        print(f"{result.display_name}: test accuracy {result.accuracy:.4f} "
              f"({result.n_train} train / {result.n_test} test) -> {path}")
    return 0


def cmd_evaluate(args) -> int:
    configs = [_experiment_config(args, a) for a in dict.fromkeys(args.algos)]
    _echo_config(args, {"experiments": [c.to_dict() for c in configs]})
    corpus = _load_corpus(args.corpus)
    results = [run_experiment(corpus, c) for c in configs]
    _dump_results(args.results, results)
    with _stage("report"):
        _write(args.report_md, render_report(results, "markdown"))
        _write(args.report_csv, render_report(results, "csv"))
        _write(args.figures, render_figures_csv(results))
    _write_history(args.history, results)
    if not args.quiet:
        for r in results:
            print(f"{r.display_name}: accuracy {r.accuracy:.4f}")
    return 0


def cmd_compare_splits(args) -> int:
    base = _experiment_config(args, args.algos[0], fraction=0.5)
    _echo_config(args, {"experiment": base.to_dict()})
    corpus = _load_corpus(args.corpus)
    sweep = compare_splits(corpus, args.algos, args.fractions, seed=args.seed, base=base, jobs=args.jobs)
    _dump_results(args.results, [], sweep)
    with _stage("report"):
        md = render_report([], "markdown", sweep=sweep)
        _write(args.report_md, md)
        _write(args.report_csv, render_report([], "csv", sweep=sweep))
    if not args.quiet:
        print(md, end="")
    return 0


def cmd_predict(args) -> int:
    _echo_config(args)
    with _stage("model"):
        saved = read_model_file(args.model)
    with _stage("predict"):
        pre = saved.preprocess or PreprocessConfig()
        tokens = preprocess_document(args.text, pre)
        model = saved.model
        if saved.algorithm in CLASSICAL:
            prob = predict_proba(model, vectorize(tokens, saved.vocabulary))
        else:
            body = model.max_len - 2 if saved.algorithm == "bert" else None
            ids = add_special_tokens(encode_tokens(tokens, saved.vocabulary, body))
            prob = float(model.forward(pad_and_mask([ids]))[0])
    label = int(prob >= 0.5)
    print(f"label: {label} ({'Yes' if label else 'No'})")
    print(f"probability: {prob:.6f}")
    return 0


def cmd_wordfreq(args) -> int:
    _echo_config(args)
    corpus = _load_corpus(args.corpus)
    with _stage("wordfreq"):
        ranked = word_frequencies(corpus, _preprocess_config(args), args.top)
    _write(args.output, render_wordfreq_csv(ranked))
    if not args.quiet:
        for tok, n in ranked:
            print(f"{n}\t{tok}")
    return 0


def cmd_report(args) -> int:
    _echo_config(args)
    with _stage("report"):
        try:
            doc = json.loads(Path(args.results).read_text(encoding="utf-8"))
            results = [ExperimentResult.from_dict(d) for d in doc["results"]]
            sweep = None if doc.get("sweep") is None else SweepTable.from_dict(doc["sweep"])
        except FileNotFoundError:
            raise DataError(f"no such results file: {args.results}") from None
        except (ValueError, KeyError, TypeError) as exc:
            raise DataError(f"unreadable results file {args.results}: {exc}") from None
        if args.format in ("markdown", "both"):
            _write(args.report_md, render_report(results, "markdown", sweep))
        if args.format in ("csv", "both"):
            _write(args.report_csv, render_report(results, "csv", sweep))
    return 0


COMMANDS = {
    "ingest": cmd_ingest, "synth": cmd_synth, "train": cmd_train, "evaluate": cmd_evaluate,
    "compare-splits": cmd_compare_splits, "predict": cmd_predict, "wordfreq": cmd_wordfreq,
    "report": cmd_report,
}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(exc.usage)
        print(f"manas: error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)

    level = logging.WARNING
    if args.verbose:
        level = logging.INFO
    elif args.quiet:
        level = logging.ERROR
    logging.basicConfig(level=level, format="%(message)s", stream=sys.stderr, force=True)
    try:
        return COMMANDS[args.command](args)
    except DataError as exc:
        print(f"manas: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except ManasError as exc:
        print(f"manas: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # noqa: BLE001
        if args.verbose:
            traceback.print_exc()
        print(f"manas: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
