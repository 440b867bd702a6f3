"""Six process metrics per (commit, file) change event, joined with SZZ labels."""

from __future__ import annotations

import csv
import io
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from defectpred import FEATURE_NAMES
from defectpred.mining import History

log = logging.getLogger(__name__)

SECONDS_PER_DAY = 86400.0
CSV_HEADER = ("commit_hash", "path") + FEATURE_NAMES + ("buggy",)


@dataclass(frozen=True)
class FeatureRow:
    commit_hash: str
    path: str
    n_authors: int
    age_days: float
    n_changes: int
    loc: int
    lines_added: int
    lines_deleted: int
    deleted: bool = False


@dataclass(frozen=True)
class LabeledSample:
    commit_hash: str
    path: str
    n_authors: int
    age_days: float
    n_changes: int
    loc: int
    lines_added: int
    lines_deleted: int
    buggy: int

    def vector(self) -> list[float]:
        return [float(getattr(self, name)) for name in FEATURE_NAMES]


@dataclass
class _Lineage:
    authors: set = field(default_factory=set)
    n_changes: int = 0
    last_timestamp: int | None = None


def compute_features(history: History) -> list[FeatureRow]:
    """Walk the history in order, carrying per-file state across renames."""
    state: dict[str, _Lineage] = {}
    rows: list[FeatureRow] = []
    for commit, events in history.iter_commits_with_events():
        for ev in events:
            if ev.change_kind == "renamed" and ev.old_path in state:
                lineage = state.pop(ev.old_path)
            elif ev.change_kind == "added":
                lineage = _Lineage()
            else:
                lineage = state.get(ev.path) or _Lineage()
            lineage.authors.add(commit.author_id)
            lineage.n_changes += 1
            if lineage.last_timestamp is None:
                age = 0.0
            else:
                age = max(0, commit.timestamp - lineage.last_timestamp) / SECONDS_PER_DAY
            lineage.last_timestamp = commit.timestamp
            if ev.change_kind == "deleted":
                state.pop(ev.path, None)
            else:
                state[ev.path] = lineage
            rows.append(FeatureRow(
                commit_hash=ev.commit_hash,
                path=ev.path,
                n_authors=len(lineage.authors),
                age_days=age,
                n_changes=lineage.n_changes,
                loc=ev.loc_after,
                lines_added=ev.lines_added,
                lines_deleted=ev.lines_deleted,
                deleted=ev.change_kind == "deleted",
            ))
    return rows


@dataclass
class Dataset:
    samples: list[LabeledSample]
    feature_names: tuple[str, ...] = FEATURE_NAMES
    missing_labels: int = 0

    def __post_init__(self):
        seen = set()
        for s in self.samples:
            key = (s.commit_hash, s.path)
            if key in seen:
                raise ValueError(f"duplicate sample {key}")
            seen.add(key)

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def X(self) -> np.ndarray:
        return np.array([s.vector() for s in self.samples], dtype=float).reshape(len(self.samples), len(FEATURE_NAMES))

    @property
    def y(self) -> np.ndarray:
        return np.array([s.buggy for s in self.samples], dtype=int)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for s in self.samples:
            w.writerow([s.commit_hash, s.path, s.n_authors, repr(float(s.age_days)), s.n_changes,
                        s.loc, s.lines_added, s.lines_deleted, s.buggy])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "Dataset":
        reader = csv.reader(io.StringIO(text))
        header = next(reader, None)
        if tuple(header or ()) != CSV_HEADER:
            raise ValueError(f"expected header {','.join(CSV_HEADER)}, got {header}")
        samples = []
        for row in reader:
            if not row:
                continue
            commit, path, na, age, nc, loc, add, dele, buggy = row
            samples.append(LabeledSample(commit, path, int(na), float(age), int(nc), int(loc),
                                         int(add), int(dele), int(buggy)))
        return cls(samples)

    def write(self, path: str | os.PathLike) -> None:
        Path(path).write_text(self.to_csv(), encoding="utf-8")

    @classmethod
    def read(cls, path: str | os.PathLike) -> "Dataset":
        return cls.from_csv(Path(path).read_text(encoding="utf-8"))


def build_dataset(features: list[FeatureRow], labels: dict[tuple[str, str], int]) -> Dataset:
    """Join features with labels in history order; deletion events are dropped.

    Rows without a label are kept as clean and counted in ``missing_labels``.
    """
    samples = []
    missing = 0
    for f in features:
        if f.deleted:
            continue
        key = (f.commit_hash, f.path)
        if key in labels:
            buggy = int(labels[key])
        else:
            missing += 1
            buggy = 0
        samples.append(LabeledSample(f.commit_hash, f.path, f.n_authors, f.age_days, f.n_changes,
                                     f.loc, f.lines_added, f.lines_deleted, buggy))
    if missing:
        log.warning("%d feature rows had no label; treated as clean", missing)
    return Dataset(samples, missing_labels=missing)
