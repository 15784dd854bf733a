import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv

load_dotenv()

from frugal.config import ExperimentConfig, load_config
from frugal.connectors import artifacts
from frugal.errors import ConfigError, FrugalError
from frugal.models import Corpus, Goal, LdaConfig, TopicModel
from frugal.services import fft, svm
from frugal.services.corpus import summary
from frugal.services.evalrig import parse_method
from frugal.services.features import lda_fit, tfidf, topic_features
from frugal.services.report import fit_rules, render_report
from frugal.services.scheduler import load_dataset, run_experiment
from frugal.services.stats import rank_records, rankings_frame
from frugal.services.tuner import DifferentialEvolution

logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s"
)
logger = logging.getLogger("frugal")


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    methods = None
    if args.methods:
        methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    return {
        "datasets": args.dataset or None,
        "methods": methods,
        "goal": args.goal,
        "repeats": args.repeats,
        "bins": args.bins,
        "seed": args.seed,
        "out": args.out,
        "workers": args.workers,
    }


def _goal(cfg: ExperimentConfig) -> Goal:
    return cfg.goal or Goal.RECALL


def _single_dataset(cfg: ExperimentConfig) -> List[Corpus]:
    if not cfg.datasets:
        raise ConfigError("--dataset is required")
    return [load_dataset(path, cfg) for path in cfg.datasets]


def _k_for(args: argparse.Namespace, cfg: ExperimentConfig) -> int:
    if args.k:
        return args.k
    spec = parse_method(cfg.methods[0])
    if spec.k is None:
        raise ConfigError(f"{spec.name} has no topic count; pass --k")
    return spec.k


def _lda(corpus: Corpus, k: int, cfg: ExperimentConfig) -> TopicModel:
    return lda_fit(corpus, LdaConfig.with_defaults(k, cfg.lda_alpha, cfg.lda_beta, cfg.lda_iterations, cfg.seed))


def cmd_prep(args: argparse.Namespace, cfg: ExperimentConfig) -> int:
    for corpus in _single_dataset(cfg):
        path = artifacts.save_corpus(Path(cfg.out) / f"{corpus.name}.corpus.json", corpus)
        print(f"{corpus.name}: {summary(corpus)} -> {path}")
    return 0


def cmd_features(args: argparse.Namespace, cfg: ExperimentConfig) -> int:
    for corpus in _single_dataset(cfg):
        out = Path(cfg.out)
        if args.kind == "tfidf":
            artifacts.save_features(out / f"{corpus.name}.tfidf.csv", tfidf(corpus))
            continue
        k = _k_for(args, cfg)
        model = _lda(corpus, k, cfg)
        artifacts.save_topic_model(out / f"{corpus.name}.lda_k{k}.json", model)
        artifacts.save_features(out / f"{corpus.name}.lda_k{k}.csv", topic_features(model, corpus.doc_ids()))
    return 0


def cmd_train(args: argparse.Namespace, cfg: ExperimentConfig) -> int:
    goal = _goal(cfg)
    spec = parse_method(cfg.methods[0])
    for corpus in _single_dataset(cfg):
        y = corpus.labels()
        if spec.features == "tfidf":
            X = tfidf(corpus).values
        elif args.topic_model:
            model = artifacts.load_topic_model(args.topic_model)
            if model.doc_topic.shape[0] != corpus.n_docs:
                raise ConfigError(f"topic model covers {model.doc_topic.shape[0]} documents, "
                                  f"corpus has {corpus.n_docs}")
            X = model.doc_topic
        elif spec.features == "lda":
            X = _lda(corpus, args.k or spec.k, cfg).doc_topic
        else:
            tuner = DifferentialEvolution(cfg.de_config())
            best = tuner.optimize(corpus)
            artifacts.save_frame(Path(cfg.out) / f"{corpus.name}.{spec.name}.trace.csv", tuner.trace_frame())
            X = lda_fit(corpus, LdaConfig(k=best.k, alpha=best.alpha, beta=best.beta,
                                          iterations=cfg.lda_iterations, seed=cfg.seed)).doc_topic

        target = Path(cfg.out) / f"{corpus.name}.{spec.name}"
        if spec.classifier == "fft":
            tree = fft.train_best(X, y, cfg.fft_depth, goal)
            artifacts.save_tree(f"{target}.{goal.value}.tree.json", tree)
            logger.info(f"[{corpus.name}] {spec.name}: training {goal.value} {tree.training_score:.3f}")
        else:
            model = svm.svm_fit(X, y, cfg.svm_lambda, cfg.svm_epochs, cfg.seed)
            artifacts.save_svm(f"{target}.svm.json", model)
    return 0


def cmd_rules(args: argparse.Namespace, cfg: ExperimentConfig) -> int:
    goal = _goal(cfg)
    k = _k_for(args, cfg)
    for corpus in _single_dataset(cfg):
        rules = fit_rules(corpus, k, goal, cfg)
        path = artifacts.write_text(Path(cfg.out) / f"{corpus.name}.fft_k{k}.{goal.value}.rules.txt", rules.text)
        print(rules.text, end="")
        logger.info(f"Wrote rules: {path}")
    return 0


def cmd_experiment(args: argparse.Namespace, cfg: ExperimentConfig) -> int:
    cfg.check_inputs()
    outcome = run_experiment(cfg)
    for dataset, reason in outcome.failed.items():
        logger.error(f"{dataset} did not complete: {reason}")
    return 0 if outcome.ok else 1


def cmd_stats(args: argparse.Namespace, cfg: ExperimentConfig) -> int:
    out = Path(cfg.out)
    records = artifacts.load_results(args.results or out / "results.csv")
    rankings = rankings_frame(rank_records(records, cfg.bootstraps, cfg.confidence, cfg.seed))
    artifacts.save_frame(out / "rankings.csv", rankings)
    print(rankings.to_string(index=False))
    return 0


def cmd_report(args: argparse.Namespace, cfg: ExperimentConfig) -> int:
    out = Path(cfg.out)
    rankings = artifacts.load_frame(out / "rankings.csv")
    runtimes_path = out / "runtimes.csv"
    runtimes = artifacts.load_frame(runtimes_path) if runtimes_path.exists() else None
    path = artifacts.write_text(out / "report.md", render_report(rankings, runtimes))
    logger.info(f"Wrote report: {path}")
    return 0


COMMANDS = {
    "prep": cmd_prep,
    "features": cmd_features,
    "train": cmd_train,
    "rules": cmd_rules,
    "experiment": cmd_experiment,
    "stats": cmd_stats,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value experiment config file")
    common.add_argument("--dataset", action="append", help="dataset CSV or prepared corpus JSON (repeatable)")
    common.add_argument("--methods", help="comma-separated methods, e.g. tfidf_svm,fft_k10")
    common.add_argument("--goal", choices=[g.value for g in Goal], help="metric FFTs optimize")
    common.add_argument("--repeats", type=int)
    common.add_argument("--bins", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output directory")
    common.add_argument("--workers", type=int, help="parallel dataset x method cells")
    common.add_argument("--verbose", action="store_true", help="debug logging")

    parser = argparse.ArgumentParser(description="LDA + Fast-and-Frugal Tree bug-report analytics")
    subparsers = parser.add_subparsers(dest="command", required=True)

    subparsers.add_parser("prep", parents=[common], help="Preprocess a CSV into a corpus artifact")

    features_parser = subparsers.add_parser("features", parents=[common], help="Build a feature matrix")
    features_parser.add_argument("--kind", choices=["tfidf", "lda"], default="lda")
    features_parser.add_argument("--k", type=int, help="LDA topic count")

    train_parser = subparsers.add_parser("train", parents=[common], help="Fit one method on a whole dataset")
    train_parser.add_argument("--k", type=int, help="LDA topic count")
    train_parser.add_argument("--topic-model", help="reuse a topic model written by `features`")

    rules_parser = subparsers.add_parser("rules", parents=[common], help="Emit FFT rules with topic words")
    rules_parser.add_argument("--k", type=int, help="LDA topic count")

    subparsers.add_parser("experiment", parents=[common], help="Run the cross-validation matrix")

    stats_parser = subparsers.add_parser("stats", parents=[common], help="Scott-Knott ranks from results.csv")
    stats_parser.add_argument("--results", help="results CSV (default: <out>/results.csv)")

    subparsers.add_parser("report", parents=[common], help="Markdown report from rankings.csv")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)

    try:
        cfg = load_config(args.config, _overrides(args))
        return COMMANDS[args.command](args, cfg)
    except FrugalError as e:
        logger.error(f"{args.command} failed: {e}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
