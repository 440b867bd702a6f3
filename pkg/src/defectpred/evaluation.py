"""Confusion metrics, rank-sum AUC and the cross-validation driver."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from defectpred import preprocess
from defectpred.ensemble import VotingSpec, fit_vote
from defectpred.errors import EmptyEvaluationSet, LengthMismatch, SingleClassEvaluationSet
from defectpred.learners import ALL_KINDS, DISPLAY, HyperParams, canonical_kind, fit_model
from defectpred.preprocess import FoldPlan

log = logging.getLogger(__name__)

METRICS = ("precision", "recall", "f1", "accuracy", "auc")


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


def _pair(labels, predicted) -> tuple[np.ndarray, np.ndarray]:
    y = np.asarray(labels, dtype=int).ravel()
    p = np.asarray(predicted, dtype=int).ravel()
    if len(y) != len(p):
        raise LengthMismatch(f"{len(y)} labels vs {len(p)} predictions")
    if len(y) == 0:
        raise EmptyEvaluationSet("nothing to evaluate")
    return y, p


def confusion(labels, predicted) -> ConfusionCounts:
    y, p = _pair(labels, predicted)
    return ConfusionCounts(
        tp=int(np.sum((p == 1) & (y == 1))),
        fp=int(np.sum((p == 1) & (y == 0))),
        fn=int(np.sum((p == 0) & (y == 1))),
        tn=int(np.sum((p == 0) & (y == 0))),
    )


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


def weighted_metrics(labels, predicted, average: str = "weighted") -> tuple[float, float, float, float]:
    """(precision, recall, f1, accuracy).

    ``average="weighted"`` averages per-class scores with weights support/n;
    ``average="binary"`` reports the buggy class only. 0/0 counts as 0.
    """
    c = confusion(labels, predicted)
    n = c.total
    accuracy = (c.tp + c.tn) / n
    per_class = {
        1: (c.tp, c.tp + c.fp, c.tp + c.fn),
        0: (c.tn, c.tn + c.fn, c.tn + c.fp),
    }
    prec, rec, f1, support = {}, {}, {}, {}
    for cls, (hit, predicted_n, support_n) in per_class.items():
        prec[cls] = _ratio(hit, predicted_n)
        rec[cls] = _ratio(hit, support_n)
        f1[cls] = _ratio(2 * prec[cls] * rec[cls], prec[cls] + rec[cls]) if prec[cls] + rec[cls] else 0.0
        support[cls] = support_n
    if average == "binary":
        return prec[1], rec[1], f1[1], accuracy
    if average != "weighted":
        raise ValueError(f"unknown average {average!r}")
    w_prec = (support[0] * prec[0] + support[1] * prec[1]) / n
    # support * (hit / support) == hit, so weighted recall is the hit total over n
    w_rec = (c.tp + c.tn) / n
    w_f1 = (support[0] * f1[0] + support[1] * f1[1]) / n
    return w_prec, w_rec, w_f1, accuracy


def roc_auc(positive_scores, labels) -> float:
    """Area under the ROC curve as the Mann-Whitney statistic, via average ranks."""
    s = np.asarray(positive_scores, dtype=float).ravel()
    y = np.asarray(labels, dtype=int).ravel()
    if len(s) != len(y):
        raise LengthMismatch(f"{len(s)} scores vs {len(y)} labels")
    if np.isnan(s).any():
        raise ValueError("scores contain NaN")
    n_pos = int(np.sum(y == 1))
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClassEvaluationSet("AUC needs both classes")
    _, inverse, counts = np.unique(s, return_inverse=True, return_counts=True)
    before = np.concatenate([[0], np.cumsum(counts)[:-1]])
    avg_rank = before + (counts + 1) / 2.0
    rank_sum = avg_rank[inverse][y == 1].sum()
    u = rank_sum - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


@dataclass(frozen=True)
class PreprocessConfig:
    scale: bool = True
    smote: bool = True
    smote_k: int = 5


def _sub_seed(seed: int, *keys: int) -> int:
    return int(np.random.SeedSequence([seed, *keys]).generate_state(1, dtype=np.uint64)[0])


def _fold_scores(y, proba, average) -> dict:
    pred = (proba[:, 1] > proba[:, 0]).astype(int)
    p, r, f, a = weighted_metrics(y, pred, average)
    try:
        auc = roc_auc(proba[:, 1], y)
    except SingleClassEvaluationSet:
        auc = None
    return {"precision": p, "recall": r, "f1": f, "accuracy": a, "auc": auc}


def _mean(rows: list[dict]) -> dict:
    out = {}
    for m in METRICS:
        vals = [r[m] for r in rows if r[m] is not None]
        out[m] = float(np.mean(vals)) if vals else None
    return out


@dataclass
class EvaluationReport:
    dataset: str
    seed: int
    folds: int
    models: dict[str, dict] = field(default_factory=dict)
    average: str = "weighted"
    smote: bool = True

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "seed": self.seed,
            "folds": self.folds,
            "average": self.average,
            "smote": self.smote,
            "models": self.models,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def mean(self, model: str, metric: str) -> float | None:
        return self.models[model]["mean"][metric]

    @classmethod
    def from_dict(cls, d: dict) -> "EvaluationReport":
        return cls(dataset=d["dataset"], seed=d["seed"], folds=d["folds"], models=d["models"],
                   average=d.get("average", "weighted"), smote=d.get("smote", True))


def cross_validate(X, y, fold_plan: FoldPlan, models=ALL_KINDS, preprocess_config: PreprocessConfig | None = None,
                   seed: int = 42, hp: HyperParams | None = None, vote: VotingSpec | None = None,
                   average: str = "weighted", dataset_name: str = "") -> EvaluationReport:
    """Per fold: scale on the training part, oversample it, fit every model, score the held-out part.

    Validation rows only ever reach ``predict_proba``.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    if len(fold_plan.assignment) != len(y):
        raise ValueError("fold plan does not cover the dataset")
    cfg = preprocess_config or PreprocessConfig()
    vote = vote or VotingSpec()
    kinds = [canonical_kind(m) for m in models]
    if not kinds:
        raise ValueError("no models requested")
    needed = []
    for k in kinds:
        for member in (vote.members if k == "vote" else (k,)):
            if member not in needed:
                needed.append(member)

    per_fold = {k: [] for k in kinds}
    per_fold_train = {k: [] for k in kinds}
    for fold, tr, va in fold_plan.splits():
        X_tr, y_tr, X_va, y_va = X[tr], y[tr], X[va], y[va]
        if cfg.scale:
            scaler = preprocess.fit_scaler(X_tr)
            X_tr = preprocess.apply_scaler(scaler, X_tr)
            X_va = preprocess.apply_scaler(scaler, X_va)
        if cfg.smote:
            X_fit, y_fit = preprocess.smote_oversample(X_tr, y_tr, cfg.smote_k, _sub_seed(seed, fold, 0))
        else:
            X_fit, y_fit = X_tr, y_tr
        model_seed = _sub_seed(seed, fold, 1)
        fitted = {k: fit_model(k, X_fit, y_fit, hp, model_seed) for k in needed}
        if "vote" in kinds:
            fitted["vote"] = fit_vote(X_fit, y_fit, vote, hp, model_seed, fitted=fitted)
        for k in kinds:
            model = fitted[k]
            scores = _fold_scores(y_va, model.predict_proba(X_va), average)
            per_fold[k].append({"fold": fold, **scores})
            per_fold_train[k].append(_fold_scores(y_tr, model.predict_proba(X_tr), average))
        log.info("fold %d/%d done", fold + 1, fold_plan.k)

    report = EvaluationReport(dataset=dataset_name, seed=seed, folds=fold_plan.k, average=average,
                              smote=cfg.smote)
    for k in kinds:
        undefined = sum(1 for r in per_fold[k] if r["auc"] is None)
        report.models[k] = {
            "mean": _mean(per_fold[k]),
            "per_fold": per_fold[k],
            "auc_undefined_folds": undefined,
            "train_metrics": _mean(per_fold_train[k]),
        }
    return report


def _fmt(v) -> str:
    return "n/a" if v is None else f"{v:.4f}"


def render_markdown(report: EvaluationReport | dict) -> str:
    """Model rows by the five metric columns, one table per report."""
    if isinstance(report, dict):
        report = EvaluationReport.from_dict(report)
    title = report.dataset or "dataset"
    lines = [
        f"# Results for {title}",
        "",
        f"{report.folds}-fold stratified cross-validation, seed {report.seed}, "
        f"{report.average} averaging, SMOTE {'on' if report.smote else 'off'}.",
        "",
        "| Model | Precision | Recall | F1 | Accuracy | AUC |",
        "|---|---|---|---|---|---|",
    ]
    for kind, entry in report.models.items():
        m = entry["mean"]
        lines.append(f"| {DISPLAY.get(kind, kind)} | " + " | ".join(_fmt(m[x]) for x in METRICS) + " |")
    lines.append("")
    return "\n".join(lines)
