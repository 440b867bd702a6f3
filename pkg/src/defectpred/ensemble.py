"""Soft and hard voting over fitted base models."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from defectpred.errors import ConfigError, NoMembers
from defectpred.learners import BASE_KINDS, HyperParams, ProbabilisticModel, canonical_kind, fit_model


@dataclass(frozen=True)
class VotingSpec:
    members: tuple[str, ...] = BASE_KINDS
    scheme: str = "soft"
    weights: tuple[float, ...] | None = None

    def __post_init__(self):
        members = tuple(canonical_kind(m) for m in self.members)
        if "vote" in members:
            raise ConfigError("a voting ensemble cannot contain itself")
        object.__setattr__(self, "members", members)
        if len(members) < 2:
            raise ConfigError("voting needs at least two members")
        if self.scheme not in ("soft", "hard"):
            raise ConfigError(f"unknown vote scheme {self.scheme!r}")
        if self.weights is not None:
            w = tuple(float(x) for x in self.weights)
            if len(w) != len(members):
                raise ConfigError(f"{len(w)} weights for {len(members)} members")
            if any(x < 0 for x in w) or sum(w) <= 0:
                raise ConfigError("weights must be non-negative with a positive sum")
            object.__setattr__(self, "weights", w)

    def resolved_weights(self) -> np.ndarray:
        if self.weights is None:
            return np.ones(len(self.members))
        return np.asarray(self.weights, dtype=float)


def soft_vote(member_probas, weights=None) -> np.ndarray:
    """Weighted mean of member probability arrays, renormalized per row.

    ``member_probas`` has shape (members, n, 2) or (members, 2).
    """
    P = np.asarray(member_probas, dtype=float)
    if P.shape[0] == 0:
        raise NoMembers("soft vote over zero members")
    w = np.ones(P.shape[0]) if weights is None else np.asarray(weights, dtype=float)
    avg = np.tensordot(w, P, axes=1) / w.sum()
    return avg / avg.sum(axis=-1, keepdims=True)


def hard_vote(member_classes, weights=None) -> np.ndarray:
    """Class with the larger total vote weight; an exact tie goes to class 0.

    ``member_classes`` has shape (members,) or (members, n).
    """
    C = np.asarray(member_classes, dtype=int)
    if C.shape[0] == 0:
        raise NoMembers("hard vote over zero members")
    w = np.ones(C.shape[0]) if weights is None else np.asarray(weights, dtype=float)
    w = w.reshape((-1,) + (1,) * (C.ndim - 1))
    for_one = (w * (C == 1)).sum(axis=0)
    for_zero = (w * (C == 0)).sum(axis=0)
    return (for_one > for_zero).astype(int)


class VotingModel(ProbabilisticModel):
    model_kind = "vote"

    def __init__(self, members: list[ProbabilisticModel], spec: VotingSpec):
        self.members = members
        self.spec = spec
        self.feature_count = members[0].feature_count

    def predict_proba(self, X) -> np.ndarray:
        w = self.spec.resolved_weights()
        if self.spec.scheme == "soft":
            return soft_vote([m.predict_proba(X) for m in self.members], w)
        cls = hard_vote([m.predict(X) for m in self.members], w)
        return np.column_stack([1 - cls, cls]).astype(float)


def fit_vote(X, y, spec: VotingSpec | None = None, hp: HyperParams | None = None, seed: int = 42,
             fitted: dict[str, ProbabilisticModel] | None = None) -> VotingModel:
    """Fit every member on the same data; already-fitted members in ``fitted`` are reused."""
    spec = spec or VotingSpec()
    fitted = fitted or {}
    members = [fitted[k] if k in fitted else fit_model(k, X, y, hp, seed) for k in spec.members]
    return VotingModel(members, spec)
