"""Command-line entry point.

Subcommands::

    validate   parse a corpus (and lexicon), print counts and constraint coverage
    prune      print the itemset every sentence keeps under a strategy
    mine       mine a rule file from a corpus
    classify   classify documents with a rule file
    evaluate   threshold search plus k-fold cross-validation report
    sweep      evaluate across tfidf N or hyperonymic order
    serve      MCP server over stdio answering from a rule file
    synth      write a synthetic corpus

Settings come from ``--config`` (JSON, see config.json), then CAR_WORDNET_DIR
and CAR_FREQ_FILE, then flags. Exit status: 0 ok, 1 invalid input data,
2 configuration error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Callable, Optional, Sequence

from . import __version__, file_log
from .classifier import Classifier
from .config import ConfigError, ConfigManager, RunConfig
from .corpus import UNLABELED, Corpus, corpus_digest, corpus_statistics, forgetful, parse_corpus, write_corpus
from .evaluation import (
    CrossValidator,
    curve_to_json,
    curve_to_tsv,
    evaluate,
    sweep,
)
from .handler_wrappers import EXIT_OK, EXIT_RUNTIME, HandlerError, exit_code_for
from .mining import fit, hyperonymizer_for
from .pruning import (
    BUILTIN_CONSTRAINTS,
    SentenceFrequencies,
    TfidfStrategy,
    average_transaction_size,
    constraint_coverage,
    format_strategy,
    prune,
)
from .rules_io import check_compatible, read_rules, write_rules
from .synthetic import make_corpus, make_graded_corpus
from .wordnet import Lexicon, load_lexicon

logger = logging.getLogger(__name__)

# flag dest -> RunConfig field
_OVERRIDES = {
    "corpus": "corpus_path",
    "wordnet_dir": "wordnet_dir",
    "freq_file": "freq_file",
    "strategy": "strategy",
    "hyper_n": "hyper_n",
    "min_support": "min_support",
    "min_confidence": "min_confidence",
    "max_itemset_size": "max_itemset_size",
    "rho0": "target_rules",
    "tolerance": "tolerance",
    "seed": "seed",
    "max_probes": "max_probes",
    "folds": "folds",
    "output_dir": "output_dir",
    "format": "format",
    "disambiguation": "disambiguation",
    "workers": "workers",
}


def _common_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global")
    g.add_argument("--config", help="JSON config file")
    g.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug")
    g.add_argument("--log-file-dir", help="also log to <dir>/car_classifier.log")

    s = argparse.SUPPRESS
    o = p.add_argument_group("config overrides")
    o.add_argument("--corpus", default=s, help="corpus file")
    o.add_argument("--wordnet-dir", default=s, help="WordNet dict/ directory")
    o.add_argument("--freq-file", default=s, help="synset frequency file")
    o.add_argument("--strategy", default=s, help="dep:I0|I1|I1'|I2|I2', dep:custom(...), tfidf:N=<n>")
    o.add_argument("--hyper-n", type=int, default=s, help="hyperonymic order (0 = off)")
    o.add_argument("--min-support", type=float, default=s)
    o.add_argument("--min-confidence", type=float, default=s)
    o.add_argument("--max-itemset-size", type=int, default=s)
    o.add_argument("--rho0", type=int, default=s, help="target rule count")
    o.add_argument("--tolerance", type=int, default=s)
    o.add_argument("--seed", type=int, default=s)
    o.add_argument("--max-probes", type=int, default=s)
    o.add_argument("--folds", type=int, default=s)
    o.add_argument("--output-dir", default=s)
    o.add_argument("--format", choices=["tsv", "json"], default=s)
    o.add_argument("--disambiguation", choices=["most_frequent", "context_overlap"], default=s)
    o.add_argument("--workers", type=int, default=s)
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    ap = argparse.ArgumentParser(
        prog="car_classifier", description="Class-association-rule text classification."
    )
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    sub.add_parser("validate", parents=[common], help="check a corpus and lexicon")
    p = sub.add_parser("prune", parents=[common], help="preview pruned itemsets")
    p.add_argument("--limit", type=int, default=0, help="show at most this many sentences")

    p = sub.add_parser("mine", parents=[common], help="mine a rule file")
    p.add_argument("-o", "--output", help="rule file (default <output_dir>/rules.<format>)")

    p = sub.add_parser("classify", parents=[common], help="classify documents")
    p.add_argument("rules", help="rule file written by mine")
    p.add_argument("documents", help="corpus-format file; class annotations optional")
    p.add_argument("-o", "--output", help="write JSON results here instead of stdout")

    p = sub.add_parser("evaluate", parents=[common], help="search thresholds and cross-validate")
    p.add_argument("--no-search", action="store_true", help="use --min-support/--min-confidence as given")

    p = sub.add_parser("sweep", parents=[common], help="evaluate along one axis")
    p.add_argument("axis", choices=["tfidf_n", "hyper_order"])
    p.add_argument("values", help="range 'a..b' or comma list")

    p = sub.add_parser("serve", parents=[common], help="MCP server over stdio")
    p.add_argument("rules", help="rule file written by mine")

    p = sub.add_parser("synth", parents=[common], help="write a synthetic corpus")
    p.add_argument("output", help="corpus file to write")
    p.add_argument("--kind", choices=["heads", "subjects", "graded"], default="heads")
    p.add_argument("--documents", type=int, default=200)
    p.add_argument("--classes", type=int, default=4)
    return ap


def parse_values(text: str) -> list[int]:
    """``"1..13"`` or ``"1,2,5"``."""
    try:
        if ".." in text:
            lo, hi = (int(x) for x in text.split("..", 1))
            values = list(range(lo, hi + 1))
        else:
            values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse values '{text}'", hint="Use 'a..b' or a comma list") from None
    if not values:
        raise ConfigError(f"empty value range '{text}'")
    return values


# ---------------------------------------------------------------------------
# Shared loading
# ---------------------------------------------------------------------------
def _emit(text: str) -> None:
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


def load_corpus(config: RunConfig) -> Corpus:
    if not config.corpus_path:
        raise ConfigError("no corpus given", hint="Pass --corpus or set corpus_path in the config")
    return parse_corpus(config.corpus_path)


def load_lexicon_for(config: RunConfig, hyper_n: int) -> Optional[Lexicon]:
    """The configured lexicon; None when hyperonymization is off and none is configured."""
    if config.wordnet_dir:
        return load_lexicon(config.wordnet_dir, config.freq_file or None)
    if hyper_n > 0:
        raise ConfigError("hyper_n > 0 requires wordnet_dir and freq_file")
    return None


def _output_path(config: RunConfig, name: str) -> Path:
    directory = Path(config.output_dir)
    directory.mkdir(parents=True, exist_ok=True)
    return directory / name


def _pipeline_kwargs(config: RunConfig) -> dict:
    return {"policy": config.disambiguation, "pos_filter": tuple(config.hyperonymize_pos)}


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------
def cmd_validate(config: RunConfig, args: argparse.Namespace) -> int:
    corpus = load_corpus(config)
    stats = corpus_statistics(corpus)
    sentences = corpus.sentences()
    coverage = {
        f"dep:{cid.value}": constraint_coverage(sentences, spec) for cid, spec in BUILTIN_CONSTRAINTS.items()
    }
    summary: dict = {"corpus": config.corpus_path, **stats.to_dict(), "classes": len(corpus.classes)}
    summary["constraint_coverage"] = coverage
    if config.wordnet_dir:
        lexicon = load_lexicon(config.wordnet_dir, config.freq_file or None)
        summary["lexicon"] = {
            "synsets": len(lexicon),
            "lemma_entries": len(lexicon.lemma_index),
            "noun_sinks": len(lexicon.sinks("noun")),
            "verb_sinks": len(lexicon.sinks("verb")),
        }

    if config.format == "json":
        _emit(json.dumps(summary, indent=2, sort_keys=True))
        return EXIT_OK
    lines = [
        f"{stats.documents} documents, {stats.sentences} sentences, {stats.tokens} tokens, "
        f"{len(corpus.classes)} classes",
    ]
    for label, count in sorted(stats.class_counts.items()):
        lines.append(f"  class {label}: {count} documents")
    lines.append(
        f"document length: mean {stats.mean_document_length:.2f} words, std {stats.std_document_length:.2f}"
    )
    lines.append(f"sentence head is a verb: {stats.head_verb_fraction * 100:.2f}%")
    for name, value in coverage.items():
        lines.append(f"coverage {name}: {value * 100:.2f}%")
    if "lexicon" in summary:
        lex = summary["lexicon"]
        lines.append(
            f"lexicon: {lex['synsets']} synsets, {lex['lemma_entries']} lemma entries, "
            f"{lex['noun_sinks']} noun sinks, {lex['verb_sinks']} verb sinks"
        )
    _emit("\n".join(lines))
    return EXIT_OK


def cmd_prune(config: RunConfig, args: argparse.Namespace) -> int:
    corpus = load_corpus(config)
    strategy = config.prune_strategy()
    pairs = forgetful(corpus)
    frequencies = None
    if isinstance(strategy, TfidfStrategy):
        frequencies = SentenceFrequencies.from_sentences(s for s, _ in pairs)
    pruned = prune(pairs, strategy, frequencies)
    hyperonymizer = hyperonymizer_for(
        load_lexicon_for(config, config.hyper_n), config.hyper_n, **_pipeline_kwargs(config)
    )
    if hyperonymizer is not None:
        pruned = hyperonymizer.corpus(pruned)
    shown = pruned[: args.limit] if args.limit > 0 else pruned
    lines = ["SENTENCE\tCLASS\tITEMS"]
    lines += [f"{p.sentence_id}\t{p.class_label}\t{' '.join(i.lemma for i in p.items)}" for p in shown]
    kept = [p for p in pruned if p.items]
    avg = average_transaction_size(kept) if kept else 0.0
    lines.append(
        f"# {format_strategy(strategy)} hyper_n={config.hyper_n}: "
        f"{len(kept)}/{len(pruned)} sentences keep items, avg transaction size {avg:.2f}"
    )
    _emit("\n".join(lines))
    return EXIT_OK


def cmd_mine(config: RunConfig, args: argparse.Namespace) -> int:
    corpus = load_corpus(config)
    model = fit(
        corpus,
        config.mining_params(),
        config.prune_strategy(),
        config.hyper_n,
        load_lexicon_for(config, config.hyper_n),
        digest=corpus_digest(corpus),
        **_pipeline_kwargs(config),
    )
    if not model.rules:
        logger.warning("No rule reached min_support=%s and min_confidence=%s", config.min_support, config.min_confidence)
    path = Path(args.output) if args.output else _output_path(config, f"rules.{config.format}")
    write_rules(model, path, None if args.output else config.format)
    _emit(f"rules: {model.rule_count}\navg transaction size: {model.avg_transaction_size:.2f}\nwritten: {path}")
    return EXIT_OK


def cmd_classify(config: RunConfig, args: argparse.Namespace) -> int:
    model = read_rules(args.rules)
    check_compatible(model, config.prune_strategy(), config.hyper_n)
    lexicon = load_lexicon_for(config, model.hyper_n)
    classifier = Classifier(model, lexicon)
    docs = parse_corpus(args.documents, default_class=UNLABELED)
    results = []
    for doc in docs.documents:
        record = classifier.classify(doc).to_dict()
        if doc.class_label != UNLABELED:
            record["gold_class"] = doc.class_label
        results.append(record)
    text = json.dumps(results, indent=2, sort_keys=True) + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        logger.info("Wrote %d results to %s", len(results), args.output)
    else:
        _emit(text)
    return EXIT_OK


def cmd_evaluate(config: RunConfig, args: argparse.Namespace) -> int:
    corpus = load_corpus(config)
    strategy = config.prune_strategy()
    lexicon = load_lexicon_for(config, config.hyper_n)
    search = config.search_config()
    if args.no_search:
        report = CrossValidator(
            corpus, strategy, config.hyper_n, lexicon,
            folds=search.folds, seed=search.seed, max_itemset_size=search.max_itemset_size,
            workers=config.workers, **_pipeline_kwargs(config),
        ).evaluate(config.min_support, config.min_confidence)
    else:
        report = evaluate(
            corpus, search, strategy, config.hyper_n, lexicon, workers=config.workers, **_pipeline_kwargs(config)
        )
    _output_path(config, "report.json").write_text(report.to_json(), encoding="utf-8")
    _output_path(config, "report.tsv").write_text(report.to_tsv(), encoding="utf-8")
    if report.within_window is False:
        logger.warning("Rule count %.1f is outside %d +/- %d", report.rule_count, search.target_rules, search.tolerance)
    _emit(report.to_json() if config.format == "json" else report.to_tsv())
    return EXIT_OK


def cmd_sweep(config: RunConfig, args: argparse.Namespace) -> int:
    corpus = load_corpus(config)
    values = parse_values(args.values)
    needs_lexicon = max(values) if args.axis == "hyper_order" else config.hyper_n
    lexicon = load_lexicon_for(config, needs_lexicon)
    rows = sweep(
        corpus,
        config.search_config(),
        config.prune_strategy(),
        args.axis,
        values,
        config.hyper_n,
        lexicon,
        workers=config.workers,
        **_pipeline_kwargs(config),
    )
    text = curve_to_json(rows) if config.format == "json" else curve_to_tsv(rows)
    _output_path(config, f"curve_{args.axis}.{config.format}").write_text(text, encoding="utf-8")
    _emit(text)
    return EXIT_OK


def cmd_serve(config: RunConfig, args: argparse.Namespace) -> int:
    from .mcp_server import create_server, run_stdio

    model = read_rules(args.rules)
    lexicon = load_lexicon_for(config, model.hyper_n)
    mcp = create_server(model, lexicon, rules_path=args.rules, disabled_tools=config.disabled_tools)
    run_stdio(mcp)
    return EXIT_OK


def cmd_synth(config: RunConfig, args: argparse.Namespace) -> int:
    if args.kind == "graded":
        corpus = make_graded_corpus(items=args.documents, classes=args.classes)
    else:
        corpus = make_corpus(documents=args.documents, classes=args.classes, seed=config.seed, flavour=args.kind)
    Path(args.output).parent.mkdir(parents=True, exist_ok=True)
    write_corpus(corpus, args.output)
    _emit(f"wrote {len(corpus)} documents ({args.kind}) to {args.output}")
    return EXIT_OK


COMMANDS: dict[str, Callable[[RunConfig, argparse.Namespace], int]] = {
    "validate": cmd_validate,
    "prune": cmd_prune,
    "mine": cmd_mine,
    "classify": cmd_classify,
    "evaluate": cmd_evaluate,
    "sweep": cmd_sweep,
    "serve": cmd_serve,
    "synth": cmd_synth,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    file_log.init_console_logging(args.verbose)
    try:
        overrides = {field: getattr(args, dest) for dest, field in _OVERRIDES.items() if hasattr(args, dest)}
        config = ConfigManager(args.config).load(overrides)
        log_dir = args.log_file_dir or (config.log_dir if config.log_to_file else None)
        if log_dir:
            file_log.init_file_logging(True, log_dir)
            file_log.log_diagnostics_snapshot(__version__)
        config.check()
        logger.info("Running %s", args.command)
        return COMMANDS[args.command](config, args)
    except HandlerError as exc:
        logger.debug("%s failed", args.command, exc_info=True)
        print(f"error: {exc.describe()}", file=sys.stderr)
        return exit_code_for(exc)
    except Exception as exc:
        logger.exception("Unexpected error in %s", args.command)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    finally:
        file_log.shutdown()


def _entry() -> None:
    """Console and zipapp entry point."""
    sys.exit(main())
