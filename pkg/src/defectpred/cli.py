"""Command-line entry point: ``defectpred <subcommand>``.

Exit codes: 0 success, 2 config error, 3 repository error, 4 data error,
5 internal invariant violation.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from defectpred import pipeline
from defectpred.config import PipelineConfig, load_config
from defectpred.errors import ConfigError
from defectpred.pipeline import StageError


def _add_eval_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--folds", type=int, help="number of CV folds (default 10)")
    p.add_argument("--seed", type=int, help="seed for folds, SMOTE and forests (default 42)")
    p.add_argument("--smote-k", type=int, dest="smote_k", help="SMOTE neighbours (default 5)")
    p.add_argument("--no-smote", action="store_true", help="disable oversampling")
    p.add_argument("--models", help="comma list of nb,cart,knn,lda,lr,svm,rf,vote or 'all'")
    p.add_argument("--average", choices=("weighted", "binary"))
    p.add_argument("--vote-scheme", dest="vote_scheme", choices=("soft", "hard"))
    p.add_argument("--vote-weights", dest="vote_weights", help="comma list of member weights")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override any config key, e.g. --set rf.trees=50")


def _add_szz_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--keywords", help="comma list of fix keywords")
    p.add_argument("--issue-pattern", dest="issue_pattern", help="regex for issue keys")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="defectpred", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mine", help="extract commit/file history as JSON-Lines")
    p.add_argument("--config")
    p.add_argument("--repo")
    p.add_argument("--branch")
    p.add_argument("--out", required=True)

    p = sub.add_parser("label", help="SZZ labels per (commit, path)")
    p.add_argument("--config")
    p.add_argument("--history", required=True)
    p.add_argument("--repo", help="repository to blame in (default: path recorded in the history)")
    _add_szz_flags(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("featurize", help="join process metrics with labels")
    p.add_argument("--history", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("evaluate", help="stratified cross-validation of every model")
    p.add_argument("--config")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    _add_eval_flags(p)

    p = sub.add_parser("report", help="render report.json as a markdown table")
    p.add_argument("--report", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("run", help="mine, label, featurize, evaluate and report")
    p.add_argument("--config")
    p.add_argument("--repo")
    p.add_argument("--branch")
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--resume", action="store_true", help="skip stages whose output already exists")
    _add_szz_flags(p)
    _add_eval_flags(p)
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    keys = ("repo", "branch", "keywords", "issue_pattern", "folds", "seed", "smote_k", "models",
            "average", "vote_scheme", "vote_weights", "out_dir")
    out = {}
    for k in keys:
        v = getattr(args, k, None)
        if v is not None:
            out[k.replace("vote_", "vote.") if k.startswith("vote_") else k] = v
    if getattr(args, "no_smote", False):
        out["smote"] = False
    for item in getattr(args, "set", []) or []:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        from defectpred.config import parse_value

        key, _, value = item.partition("=")
        out[key.strip()] = parse_value(value)
    return out


def _config(args) -> PipelineConfig:
    return load_config(getattr(args, "config", None), _overrides(args))


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "mine":
            cfg = _config(args)
            if cfg.repo is None:
                raise ConfigError("--repo is required")
            pipeline.run_stage("mine", pipeline.mine, cfg.repo, cfg.branch, Path(args.out))
        elif args.command == "label":
            cfg = _config(args)
            pipeline.run_stage("label", pipeline.label, Path(args.history), Path(args.out),
                               cfg.keywords, cfg.issue_pattern, args.repo)
        elif args.command == "featurize":
            pipeline.run_stage("featurize", pipeline.featurize, Path(args.history), Path(args.labels),
                               Path(args.out))
        elif args.command == "evaluate":
            cfg = _config(args)
            pipeline.run_stage("evaluate", pipeline.evaluate, Path(args.dataset), Path(args.out), cfg)
        elif args.command == "report":
            md = pipeline.run_stage("report", pipeline.report, Path(args.report), Path(args.out))
            sys.stdout.write(md)
        elif args.command == "run":
            cfg = _config(args)
            ran = pipeline.run_pipeline(cfg, resume=args.resume)
            print("stages run: " + ", ".join(ran))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return exc.exit_code
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
