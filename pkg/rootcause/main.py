#!/usr/bin/env python3
"""
Root-Cause Toolkit Command Line

Subcommands:
    ingest     validate a CSV/JSONL file or a tracker export into a canonical corpus
    stats      root-cause frequency and ecosystem characteristics
    train      fit the classifier and save the model
    classify   predict root causes for (unlabeled) reports
    evaluate   repeated stratified k-fold cross-validation
    topics     LDA-GA topics per root-cause category
    timefix    bug-fixing delay box statistics (CSV)

Usage:
    python3 -m rootcause evaluate corpus.jsonl --evaluate-runs 10 --seed 7
    python3 -m rootcause ingest https://tracker.example/rest/bugs --query "product=Ant" --out ant.jsonl

Every configuration key has a mirrored flag (MODEL_L2_STRENGTH -> --model-l2-strength).
Precedence: defaults < environment / .env < --config FILE < flags.

Exit codes: 0 success, 2 completed with rejected rows, 1 error (JSON on stderr).
"""

import argparse
import json
import logging
import sys
from dataclasses import fields
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import List, Optional, Tuple

from rootcause.config import settings
from rootcause.config.settings import RunConfig
from rootcause.core.corpus import (
    Corpus,
    RejectedRow,
    ecosystem_summary,
    frequency,
    frequency_by_ecosystem,
    guess_format,
    load_corpus,
    save_corpus,
    write_rejects,
)
from rootcause.core.evaluate import cross_validate
from rootcause.core.model import Model
from rootcause.core.pipeline import (
    PipelineOptions,
    classify_reports,
    fit_model,
    hyperparams_from_config,
    prep_from_config,
)
from rootcause.core.textprep import Pipeline
from rootcause.core.timefix import DelayMetric, delay_report, to_csv
from rootcause.core.topics import GaConfig, topics_by_category
from rootcause.core.tracker_client import FieldMapping, ingest_tracker

logger = logging.getLogger("rootcause")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_REJECTS = 2


class UsageError(Exception):
    """Raised for invalid command-line usage"""
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ============================================================================
# Logging
# ============================================================================

def setup_logging(level: str, log_file: Optional[str] = None) -> None:
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        handlers.append(RotatingFileHandler(
            log_file, maxBytes=settings.LOG_MAX_BYTES, backupCount=settings.LOG_BACKUP_COUNT
        ))
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format=settings.LOG_FORMAT,
        datefmt=settings.LOG_DATE_FORMAT,
        handlers=handlers,
    )
    logger.setLevel(getattr(logging, level.upper(), logging.INFO))


# ============================================================================
# Argument parsing
# ============================================================================

def _common_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument('--config', help='Flat KEY=VALUE config file (dotenv syntax)')
    common.add_argument('--json', action='store_true', help='Machine-readable JSON output')
    common.add_argument('--dump-config', action='store_true',
                        help='Print the effective configuration as JSON and exit')
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument('-v', '--verbose', action='store_true', help='Debug logging')
    verbosity.add_argument('-q', '--quiet', action='store_true', help='Warnings and errors only')
    common.add_argument('--log-file', default=settings.LOG_FILE or None,
                        help='Also log to a rotating file')

    tunables = common.add_argument_group('configuration overrides')
    defaults = RunConfig()
    for f in fields(RunConfig):
        shown = '***' if f.name == 'tracker_token' else getattr(defaults, f.name)
        tunables.add_argument(
            '--' + f.name.replace('_', '-'),
            dest=f.name,
            default=None,
            metavar=RunConfig.field_types()[f.name].__name__.upper(),
            help=f'{f.name.upper()} (default: {shown})'
        )
    return common


def _add_corpus_argument(parser: argparse.ArgumentParser, name: str = 'corpus') -> None:
    parser.add_argument(name, help='Corpus file (.jsonl or .csv)')
    parser.add_argument('--format', choices=['csv', 'jsonl'], default=None,
                        help='Corpus format (default: from the file extension)')


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = _Parser(
        prog='rootcause',
        description='Bug root-cause classification and characterization toolkit',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python3 -m rootcause stats corpus.jsonl
  python3 -m rootcause evaluate corpus.jsonl --evaluate-runs 100 --evaluate-folds 10 --jobs 4
  python3 -m rootcause train corpus.jsonl --out model.json
  python3 -m rootcause classify new_reports.jsonl --model model.json
  python3 -m rootcause topics corpus.jsonl --json
  python3 -m rootcause timefix corpus.jsonl --timefix-metric dbr
        """
    )
    commands = parser.add_subparsers(dest='command', metavar='COMMAND')
    commands.required = True

    ingest = commands.add_parser('ingest', parents=[common], help='Validate and canonicalize a corpus')
    ingest.add_argument('source', help='Corpus file or tracker REST endpoint URL')
    ingest.add_argument('--format', choices=['csv', 'jsonl'], default=None,
                        help='Source file format (default: from the file extension)')
    ingest.add_argument('--query', default='', help='Tracker query (endpoint sources only)')
    ingest.add_argument('--out', required=True, help='Canonical corpus output (.jsonl or .csv)')

    stats = commands.add_parser('stats', parents=[common], help='Root-cause frequency table')
    _add_corpus_argument(stats)

    train = commands.add_parser('train', parents=[common], help='Train and save the classifier')
    _add_corpus_argument(train)
    train.add_argument('--out', required=True, help='Model file to write (JSON)')

    classify = commands.add_parser('classify', parents=[common], help='Predict root causes')
    _add_corpus_argument(classify, 'input')
    classify.add_argument('--model', required=True, help='Model file written by train')
    classify.add_argument('--out', help='Predictions JSONL (default: stdout)')

    evaluate = commands.add_parser('evaluate', parents=[common], help='Repeated stratified k-fold CV')
    _add_corpus_argument(evaluate)

    topics = commands.add_parser('topics', parents=[common], help='LDA-GA topics per category')
    _add_corpus_argument(topics)

    timefix = commands.add_parser('timefix', parents=[common], help='Delay box statistics as CSV')
    _add_corpus_argument(timefix)
    timefix.add_argument('--out', help='CSV output (default: stdout)')

    return parser


# ============================================================================
# Commands
# ============================================================================

def _load(path: str, fmt: Optional[str]) -> Tuple[Corpus, List[RejectedRow]]:
    corpus, rejects = load_corpus(path, fmt or guess_format(path))
    for reject in rejects:
        logger.warning(f"⚠️ Row {reject.row} rejected ({reject.reason}) {reject.detail}".rstrip())
    return corpus, rejects


def _emit(text: str, out: Optional[str] = None) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _dumps(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True)


def cmd_ingest(args, config: RunConfig) -> int:
    if args.source.startswith(('http://', 'https://')):
        mapping = FieldMapping.load(config.tracker_mapping_file) if config.tracker_mapping_file else FieldMapping()
        corpus, rejects = ingest_tracker(
            args.source, args.query, config.tracker_page_size, mapping,
            token=config.tracker_token,
            timeout=config.tracker_timeout,
            max_retries=config.tracker_max_retries,
            backoff_base=config.tracker_backoff_base,
            backoff_cap=config.tracker_backoff_cap,
        )
    else:
        corpus, rejects = _load(args.source, args.format)

    save_corpus(corpus, args.out, guess_format(args.out))
    sidecar = None
    if rejects:
        sidecar = f"{args.out}.rejects.jsonl"
        write_rejects(rejects, sidecar)

    if args.json:
        _emit(_dumps({"accepted": len(corpus), "rejected": len(rejects), "out": args.out, "rejects_file": sidecar}))
    else:
        _emit(f"Ingested {len(corpus)} reports into {args.out}; {len(rejects)} rejected"
              + (f" (see {sidecar})" if sidecar else ""))
    return EXIT_REJECTS if rejects else EXIT_OK


def cmd_stats(args, config: RunConfig) -> int:
    corpus, rejects = _load(args.corpus, args.format)
    shares = frequency(corpus)
    summary = ecosystem_summary(corpus)
    by_ecosystem = frequency_by_ecosystem(corpus)

    if args.json:
        _emit(_dumps({
            "frequency": {c.value: {"count": s.count, "share": s.share} for c, s in shares.items()},
            "ecosystems": [{"ecosystem": r.ecosystem, "projects": r.projects, "reports": r.reports} for r in summary],
            "frequency_by_ecosystem": {
                eco: {c.value: {"count": s.count, "share": s.share} for c, s in table.items()}
                for eco, table in by_ecosystem.items()
            },
        }))
    else:
        lines = [f"{'Category':<32}{'Count':>8}{'Share':>9}", "-" * 49]
        for cause, share in shares.items():
            lines.append(f"{cause.display_name:<32}{share.count:>8}{share.share * 100:>8.1f}%")
        lines.append(f"{'Total labeled':<32}{sum(s.count for s in shares.values()):>8}")
        lines += ["", f"{'Ecosystem':<20}{'Projects':>10}{'Reports':>10}", "-" * 40]
        lines += [f"{r.ecosystem:<20}{r.projects:>10}{r.reports:>10}" for r in summary]
        _emit("\n".join(lines))
    return EXIT_REJECTS if rejects else EXIT_OK


def cmd_train(args, config: RunConfig) -> int:
    corpus, rejects = _load(args.corpus, args.format)
    result = fit_model(
        list(corpus), prep_from_config(config), hyperparams_from_config(config),
        PipelineOptions.from_run_config(config), seed=config.seed, jobs=config.jobs,
    )
    result.model.save(args.out)

    payload = {
        "model": args.out,
        "reports": sum(1 for r in corpus if r.label is not None),
        "features": result.model.n_features,
        "epochs": len(result.model.loss_history) - 1,
        "final_loss": result.model.loss_history[-1],
        "hyperparams": result.model.hyper.to_dict(),
        "grid": [score.to_dict() for score in result.grid_table],
        "warnings": result.warnings,
    }
    if args.json:
        _emit(_dumps(payload))
    else:
        lines = [
            f"Model written to {args.out}",
            f"  reports: {payload['reports']}  features: {payload['features']}  "
            f"epochs: {payload['epochs']}  final loss: {payload['final_loss']:.6f}",
            f"  hyperparams: {payload['hyperparams']}",
        ]
        lines += [f"  grid {s['params']}: macro F {s['macro_f']:.4f} {s['note']}".rstrip() for s in payload["grid"]]
        lines += [f"  warning: {w}" for w in result.warnings]
        _emit("\n".join(lines))
    return EXIT_REJECTS if rejects else EXIT_OK


def cmd_classify(args, config: RunConfig) -> int:
    model = Model.load(args.model)
    corpus, rejects = _load(args.input, args.format)
    predictions = classify_reports(model, list(corpus))
    _emit("".join(json.dumps(p.to_record(), sort_keys=True) + "\n" for p in predictions), args.out)
    return EXIT_REJECTS if rejects else EXIT_OK


def cmd_evaluate(args, config: RunConfig) -> int:
    corpus, rejects = _load(args.corpus, args.format)
    report = cross_validate(
        corpus, prep_from_config(config), hyperparams_from_config(config),
        k=config.evaluate_folds, runs=config.evaluate_runs, seed=config.seed,
        options=PipelineOptions.from_run_config(config), jobs=config.jobs,
    )
    _emit(report.to_json() if args.json else report.to_table())
    return EXIT_REJECTS if rejects else EXIT_OK


def cmd_topics(args, config: RunConfig) -> int:
    corpus, rejects = _load(args.corpus, args.format)
    ga = GaConfig(
        population=config.topics_population,
        generations=config.topics_generations,
        k_min=config.topics_k_min,
        k_max=config.topics_k_max,
        mutation_rate=config.topics_mutation_rate,
        elitism=config.topics_elitism,
    )
    report = topics_by_category(
        corpus, prep_from_config(config, Pipeline.LDA), ga, seed=config.seed,
        lda_iterations=config.topics_lda_iterations,
        burn_in=config.topics_burn_in,
        beta=config.topics_beta,
        max_topics=config.topics_max_topics,
        terms_per_topic=config.topics_top_terms,
        min_reports=settings.TOPICS_MIN_REPORTS,
        jobs=config.jobs,
    )
    _emit(report.to_json() if args.json else report.to_table())
    return EXIT_REJECTS if rejects else EXIT_OK


def cmd_timefix(args, config: RunConfig) -> int:
    corpus, rejects = _load(args.corpus, args.format)
    metric = config.timefix_metric.lower()
    metrics = list(DelayMetric) if metric == 'all' else [DelayMetric.parse(metric)]
    report = delay_report(corpus, metrics)

    if args.json:
        _emit(_dumps({
            stats.metric.label: {
                cause.value: {
                    "n": box.n, "min": box.min, "q1": box.q1, "median": box.median,
                    "mean": box.mean, "q3": box.q3, "max": box.max,
                }
                for cause, box in stats.per_category.items()
            }
            for stats in report
        }), args.out)
    else:
        _emit(to_csv(report), args.out)
    return EXIT_REJECTS if rejects else EXIT_OK


COMMANDS = {
    'ingest': cmd_ingest,
    'stats': cmd_stats,
    'train': cmd_train,
    'classify': cmd_classify,
    'evaluate': cmd_evaluate,
    'topics': cmd_topics,
    'timefix': cmd_timefix,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Run one subcommand and return its exit code"""
    command = None
    try:
        args = build_parser().parse_args(argv)
        command = args.command

        level = 'DEBUG' if args.verbose else 'WARNING' if args.quiet else settings.LOG_LEVEL
        setup_logging(level, args.log_file)

        overrides = {f.name: getattr(args, f.name) for f in fields(RunConfig)}
        config = RunConfig.load(args.config, overrides)
        if args.dump_config:
            _emit(config.dump())
            return EXIT_OK

        logger.debug(f"Running {command} with seed {config.seed}, {config.jobs} job(s)")
        return COMMANDS[command](args, config)

    except Exception as e:
        logger.debug("Command failed", exc_info=True)
        sys.stderr.write(json.dumps({
            "error": type(e).__name__,
            "message": str(e),
            "command": command,
        }) + "\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
