"""Stage functions behind the CLI. Each reads and writes artifact files."""

from __future__ import annotations

import logging
from pathlib import Path

from defectpred import features, mining, szz
from defectpred.config import PipelineConfig
from defectpred.errors import DefectPredError
from defectpred.evaluation import EvaluationReport, PreprocessConfig, cross_validate, render_markdown
from defectpred.preprocess import stratified_folds

log = logging.getLogger(__name__)

STAGES = ("mine", "label", "featurize", "evaluate", "report")


class StageError(Exception):
    def __init__(self, stage: str, cause: BaseException, exit_code: int):
        self.stage = stage
        self.cause = cause
        self.exit_code = exit_code
        super().__init__(f"stage '{stage}' failed: {cause}")


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, DefectPredError):
        return exc.exit_code
    if isinstance(exc, (ValueError, KeyError, OSError)):
        return 4
    return 5


def mine(repo: str, branch: str, out: Path) -> mining.History:
    history = mining.walk_history(repo, branch)
    out.parent.mkdir(parents=True, exist_ok=True)
    mining.write_history(history, out)
    log.info("mined %d commits, %d events", len(history.commits), len(history.events))
    return history


def label(history_path: Path, out: Path, keywords, issue_pattern, repo: str | None = None):
    history = mining.read_history(history_path)
    heuristic = szz.FixHeuristic(tuple(keywords), issue_pattern)
    intros = szz.collect_introductions(history, heuristic, repo_path=repo)
    labels = szz.label_samples(history, intros)
    out.parent.mkdir(parents=True, exist_ok=True)
    szz.write_labels(history, labels, out)
    log.info("%d bug introductions, %d buggy events", len(intros), sum(labels.values()))
    return labels


def featurize(history_path: Path, labels_path: Path, out: Path) -> features.Dataset:
    history = mining.read_history(history_path)
    labels = szz.read_labels(labels_path)
    dataset = features.build_dataset(features.compute_features(history), labels)
    out.parent.mkdir(parents=True, exist_ok=True)
    dataset.write(out)
    return dataset


def evaluate(dataset_path: Path, out: Path, cfg: PipelineConfig) -> EvaluationReport:
    dataset = features.Dataset.read(dataset_path)
    plan = stratified_folds(dataset.y, cfg.folds, cfg.seed)
    report = cross_validate(
        dataset.X, dataset.y, plan,
        models=cfg.models,
        preprocess_config=PreprocessConfig(smote=cfg.smote, smote_k=cfg.smote_k),
        seed=cfg.seed,
        hp=cfg.hyper,
        vote=cfg.vote_spec(),
        average=cfg.average,
        dataset_name=Path(dataset_path).stem,
    )
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(report.to_json(), encoding="utf-8")
    return report


def report(report_path: Path, out: Path) -> str:
    import json

    data = json.loads(Path(report_path).read_text(encoding="utf-8"))
    md = render_markdown(data)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(md, encoding="utf-8")
    return md


def run_stage(name: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except Exception as exc:
        raise StageError(name, exc, _exit_code(exc)) from exc


def run_pipeline(cfg: PipelineConfig, resume: bool = False) -> list[str]:
    """Run every stage in order; with ``resume`` a stage whose output exists is skipped.

    The markdown report is always regenerated. Returns the names of stages that ran.
    """
    cfg.validate()
    history, labels_csv, dataset_csv = cfg.path("history"), cfg.path("labels"), cfg.path("dataset")
    report_json, report_md = cfg.path("report"), cfg.path("report_md")
    ran = []

    def want(path: Path) -> bool:
        return not (resume and path.exists())

    if want(history):
        if cfg.repo is None:
            raise StageError("mine", ValueError("no repository given (repo = ...)"), 2)
        run_stage("mine", mine, cfg.repo, cfg.branch, history)
        ran.append("mine")
    if want(labels_csv):
        run_stage("label", label, history, labels_csv, cfg.keywords, cfg.issue_pattern, cfg.repo)
        ran.append("label")
    if want(dataset_csv):
        run_stage("featurize", featurize, history, labels_csv, dataset_csv)
        ran.append("featurize")
    if want(report_json):
        run_stage("evaluate", evaluate, dataset_csv, report_json, cfg)
        ran.append("evaluate")
    run_stage("report", report, report_json, report_md)
    ran.append("report")
    return ran
