"""Annotate-based SZZ: fix detection, blame of removed lines, and per-event labels."""

from __future__ import annotations

import csv
import io
import logging
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from defectpred import mining
from defectpred.errors import ConfigError, RootFixCommit, UnknownIntroduction
from defectpred.mining import History

log = logging.getLogger(__name__)

DEFAULT_KEYWORDS = ("fix", "bug", "defect", "fault", "patch", "error")
DEFAULT_ISSUE_PATTERN = r"[A-Z][A-Z0-9]+-[0-9]+"
TEST_SEGMENTS = frozenset({"test", "tests"})


@dataclass(frozen=True)
class FixHeuristic:
    keywords: tuple[str, ...] = DEFAULT_KEYWORDS
    issue_pattern: str | None = DEFAULT_ISSUE_PATTERN
    _keyword_re: re.Pattern = field(default=None, init=False, repr=False, compare=False)
    _issue_re: re.Pattern | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        kws = tuple(k.strip().lower() for k in self.keywords if k.strip())
        if not kws:
            raise ConfigError("fix heuristic needs at least one keyword")
        object.__setattr__(self, "keywords", kws)
        alternation = "|".join(re.escape(k) for k in kws)
        object.__setattr__(self, "_keyword_re", re.compile(rf"\b(?:{alternation})(?:s|es|d|ed|ing)?\b"))
        if self.issue_pattern:
            try:
                object.__setattr__(self, "_issue_re", re.compile(self.issue_pattern))
            except re.error as exc:
                raise ConfigError(f"issue pattern does not compile: {exc}") from None

    def is_fix(self, message: str) -> bool:
        if self._keyword_re.search(message.lower()):
            return True
        return bool(self._issue_re and self._issue_re.search(message))


@dataclass(frozen=True, order=True)
class BugIntroduction:
    introducing_commit: str
    fixing_commit: str
    path: str


def is_test_path(path: str) -> bool:
    return any(seg.lower() in TEST_SEGMENTS for seg in path.split("/")[:-1])


def identify_fix_commits(history: History, heuristic: FixHeuristic | None = None) -> set[str]:
    heuristic = heuristic or FixHeuristic()
    return {c.hash for c in history.commits if heuristic.is_fix(c.message)}


def locate_bug_introducers(history: History, fix_commit: str,
                           repo_path: str | os.PathLike | None = None) -> set[BugIntroduction]:
    """Blame every substantive line the fix removed, at the fix's first parent.

    Pure additions contribute nothing; whitespace-only removed lines, test files
    and binary files are skipped.
    """
    repo = repo_path or history.repo_path
    if repo is None:
        raise ValueError("repository path unknown; pass repo_path")
    fix = history.commit(fix_commit)
    if not fix.parent_hashes:
        raise RootFixCommit(f"fix commit {fix_commit} has no parent")
    parent = fix.parent_hashes[0]

    found: set[BugIntroduction] = set()
    for ev in history.events_for(fix_commit):
        if ev.change_kind == "added" or is_test_path(ev.path):
            continue
        if ev.lines_deleted == 0:
            continue
        old_path = ev.old_path if ev.change_kind == "renamed" else ev.path
        new_path = None if ev.change_kind == "deleted" else ev.path
        removed = [n for n, text in mining.deleted_lines(repo, parent, fix_commit, old_path, new_path)
                   if text.strip()]
        if not removed:
            continue
        origins = mining.blame_origins(repo, old_path, parent)
        for n in removed:
            sha, origin_path, _ = origins[n - 1]
            found.add(BugIntroduction(sha, fix_commit, origin_path))
    return found


def collect_introductions(history: History, heuristic: FixHeuristic | None = None,
                          repo_path=None) -> set[BugIntroduction]:
    intros: set[BugIntroduction] = set()
    for fix in sorted(identify_fix_commits(history, heuristic), key=history.position):
        try:
            intros |= locate_bug_introducers(history, fix, repo_path)
        except RootFixCommit as exc:
            log.warning("skipping %s", exc)
    return intros


def label_samples(history: History, introductions: Iterable[BugIntroduction]) -> dict[tuple[str, str], int]:
    """Label every (commit, path) event: 1 if some introduction points at it, else 0."""
    labels = {(e.commit_hash, e.path): 0 for e in history.events}
    for intro in introductions:
        key = (intro.introducing_commit, intro.path)
        if key not in labels:
            raise UnknownIntroduction(f"no change event for {intro.path} at {intro.introducing_commit}")
        labels[key] = 1
    return labels


LABEL_HEADER = ("commit_hash", "path", "buggy")


def labels_to_csv(history: History, labels: dict[tuple[str, str], int]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(LABEL_HEADER)
    for e in history.events:
        key = (e.commit_hash, e.path)
        if key in labels:
            w.writerow([e.commit_hash, e.path, labels[key]])
    return buf.getvalue()


def read_labels(path: str | os.PathLike) -> dict[tuple[str, str], int]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != LABEL_HEADER:
            raise ValueError(f"{path}: expected header {','.join(LABEL_HEADER)}")
        return {(row["commit_hash"], row["path"]): int(row["buggy"]) for row in reader}


def write_labels(history: History, labels, path: str | os.PathLike) -> None:
    Path(path).write_text(labels_to_csv(history, labels), encoding="utf-8")
