"""Seven binary classifiers behind one ``predict_proba`` contract."""

from __future__ import annotations

from defectpred.learners.base import HyperParams, ProbabilisticModel
from defectpred.learners.gnb import fit_gnb
from defectpred.learners.knn import fit_knn
from defectpred.learners.lda import fit_lda
from defectpred.learners.logreg import fit_logreg
from defectpred.learners.svm import fit_svm
from defectpred.learners.tree import fit_cart, fit_rf

BASE_KINDS = ("gnb", "cart", "knn", "lda", "logreg", "svm", "rf")
ALL_KINDS = BASE_KINDS + ("vote",)

ALIASES = {"nb": "gnb", "lr": "logreg", "evc": "vote"}
DISPLAY = {"gnb": "NB", "cart": "CART", "knn": "KNN", "lda": "LDA", "logreg": "LR",
           "svm": "SVM", "rf": "RF", "vote": "Vote"}


def canonical_kind(name: str) -> str:
    name = name.strip().lower()
    name = ALIASES.get(name, name)
    if name not in ALL_KINDS:
        raise KeyError(name)
    return name


def fit_model(kind: str, X, y, hp: HyperParams | None = None, seed: int = 42) -> ProbabilisticModel:
    hp = hp or HyperParams()
    kind = canonical_kind(kind)
    if kind == "cart":
        return fit_cart(X, y, hp.cart)
    if kind == "knn":
        return fit_knn(X, y, hp.knn)
    if kind == "lda":
        return fit_lda(X, y, hp.lda)
    if kind == "logreg":
        return fit_logreg(X, y, hp.logreg)
    if kind == "gnb":
        return fit_gnb(X, y, hp.gnb)
    if kind == "rf":
        return fit_rf(X, y, hp.rf, seed=seed, cart_params=hp.cart)
    if kind == "svm":
        return fit_svm(X, y, hp.svm)
    raise ValueError("the voting ensemble is built by defectpred.ensemble")


__all__ = ["ALL_KINDS", "BASE_KINDS", "DISPLAY", "HyperParams", "ProbabilisticModel",
           "canonical_kind", "fit_cart", "fit_gnb", "fit_knn", "fit_lda", "fit_logreg",
           "fit_model", "fit_rf", "fit_svm"]
