"""Change-history extraction from a git repository.

Everything goes through the ``git`` executable. The walk follows the
first-parent chain of a branch, so merge commits contribute only their
first-parent diff and every line change is counted once.
"""

from __future__ import annotations

import json
import os
import re
import subprocess
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from defectpred.errors import (
    CorruptObject,
    LineOutOfRange,
    NotARepository,
    PathAbsentAtCommit,
    RepositoryError,
    UnknownBranch,
)

CHANGE_KINDS = ("added", "modified", "deleted", "renamed")
RENAME_THRESHOLD = "-M50%"

_STATUS_KIND = {"A": "added", "M": "modified", "T": "modified", "D": "deleted", "R": "renamed"}
_HUNK_RE = re.compile(rb"^@@ -(\d+)(?:,(\d+))? \+(\d+)(?:,(\d+))? @@")
_ZERO_SHA = "0" * 40


@dataclass(frozen=True)
class CommitMeta:
    hash: str
    author_id: str
    timestamp: int
    parent_hashes: tuple[str, ...]
    message: str


@dataclass(frozen=True)
class FileChangeEvent:
    commit_hash: str
    path: str
    change_kind: str
    lines_added: int
    lines_deleted: int
    loc_after: int
    old_path: str | None = None


@dataclass(frozen=True)
class History:
    commits: tuple[CommitMeta, ...]
    events: tuple[FileChangeEvent, ...]
    repo_path: str | None = None
    branch: str | None = None
    _index: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {c.hash: i for i, c in enumerate(self.commits)})

    def position(self, commit_hash: str) -> int:
        """Index of a commit in history order; raises KeyError if absent."""
        return self._index[commit_hash]

    def __contains__(self, commit_hash: str) -> bool:
        return commit_hash in self._index

    def commit(self, commit_hash: str) -> CommitMeta:
        return self.commits[self._index[commit_hash]]

    def events_for(self, commit_hash: str) -> list[FileChangeEvent]:
        return [e for e in self.events if e.commit_hash == commit_hash]

    def iter_commits_with_events(self) -> Iterator[tuple[CommitMeta, list[FileChangeEvent]]]:
        grouped: dict[str, list[FileChangeEvent]] = {c.hash: [] for c in self.commits}
        for e in self.events:
            grouped[e.commit_hash].append(e)
        for c in self.commits:
            yield c, grouped[c.hash]


def author_identity(name: str, email: str) -> str:
    return f"{name.strip().lower()}<{email.strip().lower()}>"


def _git(repo: str | os.PathLike, *args: str, input: bytes | None = None) -> bytes:
    env = dict(os.environ, LC_ALL="C", GIT_PAGER="cat", GIT_TERMINAL_PROMPT="0")
    proc = subprocess.run(
        ["git", "-C", str(repo), *args],
        input=input,
        capture_output=True,
        env=env,
    )
    if proc.returncode != 0:
        raise RepositoryError(proc.stderr.decode("utf-8", "replace").strip() or f"git {args[0]} failed")
    return proc.stdout


def _check_repository(repo: str | os.PathLike) -> None:
    if not Path(repo).is_dir():
        raise NotARepository(f"{repo}: no such directory")
    try:
        _git(repo, "rev-parse", "--git-dir")
    except RepositoryError as exc:
        raise NotARepository(f"{repo}: {exc}") from None
    try:
        _git(repo, "rev-parse", "--verify", "-q", "HEAD^{commit}")
    except RepositoryError:
        raise NotARepository(f"{repo}: no HEAD (empty repository)") from None


def _resolve(repo: str | os.PathLike, rev: str) -> str:
    try:
        return _git(repo, "rev-parse", "--verify", "-q", f"{rev}^{{commit}}").decode().strip()
    except RepositoryError:
        raise UnknownBranch(f"unknown branch or revision: {rev}") from None


class _BlobReader:
    """Persistent ``git cat-file --batch`` session."""

    def __init__(self, repo: str | os.PathLike):
        self._proc = subprocess.Popen(
            ["git", "-C", str(repo), "cat-file", "--batch"],
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL,
        )

    def read(self, sha: str) -> bytes:
        self._proc.stdin.write(sha.encode() + b"\n")
        self._proc.stdin.flush()
        header = self._proc.stdout.readline()
        parts = header.split()
        if len(parts) != 3 or parts[1] == b"missing":
            raise CorruptObject(sha, header.decode("utf-8", "replace").strip())
        size = int(parts[2])
        data = self._proc.stdout.read(size + 1)
        return data[:size]

    def close(self) -> None:
        if self._proc.stdin:
            self._proc.stdin.close()
        self._proc.wait()


def count_lines(data: bytes) -> int:
    """Line count as git's numstat sees it: a trailing unterminated line still counts."""
    if not data:
        return 0
    n = data.count(b"\n")
    return n if data.endswith(b"\n") else n + 1


def _parse_diff_tree(out: bytes) -> list[tuple[str, str, str | None, str, int | None, int | None]]:
    """Parse ``diff-tree -z --raw --numstat`` into (kind, path, old_path, new_sha, added, deleted)."""
    tokens = out.split(b"\0")
    raw: list[tuple[str, str, str | None, str, str]] = []
    stats: list[tuple[int | None, int | None]] = []
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if not tok:
            i += 1
            continue
        if tok.startswith(b":"):
            old_mode, new_mode, _old_sha, new_sha, status = tok[1:].decode().split(" ")
            letter = status[0]
            if letter in "RC":
                old, new = tokens[i + 1].decode("utf-8", "surrogateescape"), tokens[i + 2].decode("utf-8", "surrogateescape")
                i += 3
            else:
                old = None
                new = tokens[i + 1].decode("utf-8", "surrogateescape")
                i += 2
            mode = new_mode if letter != "D" else old_mode
            raw.append((letter, new, old, new_sha, mode))
        else:
            added, deleted, path = tok.split(b"\t", 2)
            i += 3 if path == b"" else 1
            if added == b"-":
                stats.append((None, None))
            else:
                stats.append((int(added), int(deleted)))
    if len(raw) != len(stats):
        raise RepositoryError("unexpected diff-tree output: raw/numstat mismatch")
    entries = []
    for (letter, path, old, sha, mode), (added, deleted) in zip(raw, stats):
        if mode == "160000":   # submodule gitlink
            continue
        kind = _STATUS_KIND.get(letter)
        if kind is None:
            raise RepositoryError(f"unsupported change status {letter!r} for {path}")
        entries.append((kind, path, old if kind == "renamed" else None, sha, added, deleted))
    return entries


def walk_history(repo_path: str | os.PathLike, branch: str = "HEAD") -> History:
    """Collect commits and per-file change events along the first-parent chain of ``branch``."""
    _check_repository(repo_path)
    tip = _resolve(repo_path, branch)
    try:
        log = _git(
            repo_path, "log", "--first-parent", "--reverse",
            "--format=%H%x1f%P%x1f%an%x1f%ae%x1f%ct%x1f%B%x1e", tip,
        )
    except RepositoryError as exc:
        raise CorruptObject(tip, str(exc)) from None

    commits: list[CommitMeta] = []
    for record in log.decode("utf-8", "replace").split("\x1e"):
        record = record.lstrip("\n")
        if not record:
            continue
        sha, parents, name, email, ts, message = record.split("\x1f", 5)
        commits.append(CommitMeta(
            hash=sha,
            author_id=author_identity(name, email),
            timestamp=max(0, int(ts)),
            parent_hashes=tuple(parents.split()),
            message=message.rstrip("\n"),
        ))

    events: list[FileChangeEvent] = []
    reader = _BlobReader(repo_path)
    try:
        for c in commits:
            base = [c.parent_hashes[0], c.hash] if c.parent_hashes else ["--root", c.hash]
            try:
                out = _git(repo_path, "diff-tree", "-r", "-z", "--no-commit-id", RENAME_THRESHOLD,
                           "--raw", "--numstat", *base)
            except RepositoryError as exc:
                raise CorruptObject(c.hash, str(exc)) from None
            for kind, path, old, sha, added, deleted in _parse_diff_tree(out):
                binary = added is None
                if kind == "deleted" or binary or sha == _ZERO_SHA:
                    loc = 0
                else:
                    loc = count_lines(reader.read(sha))
                events.append(FileChangeEvent(
                    commit_hash=c.hash,
                    path=path,
                    change_kind=kind,
                    lines_added=0 if binary else added,
                    lines_deleted=0 if binary else deleted,
                    loc_after=loc,
                    old_path=old,
                ))
    finally:
        reader.close()
    return History(tuple(commits), tuple(events), repo_path=str(repo_path), branch=branch)


def blame_origins(repo_path, path: str, commit: str) -> list[tuple[str, str, str]]:
    """Per-line (originating commit, path at that commit, line text) for ``path`` at ``commit``.

    Follows renames and restricts attribution to the first-parent chain, so a line
    merged from a side branch is attributed to the merge commit.
    """
    try:
        _git(repo_path, "cat-file", "-e", f"{commit}:{path}")
    except RepositoryError:
        raise PathAbsentAtCommit(f"{path} does not exist at {commit}") from None
    out = _git(repo_path, "blame", "--first-parent", "--line-porcelain", commit, "--", path)
    result = []
    sha = fname = None
    for line in out.split(b"\n"):
        if line.startswith(b"\t"):
            result.append((sha, fname, line[1:].decode("utf-8", "surrogateescape")))
            sha = fname = None
        elif sha is None and line:
            sha = line.split(b" ", 1)[0].decode()
        elif line.startswith(b"filename "):
            fname = line[len(b"filename "):].decode("utf-8", "surrogateescape")
    return result


def blame_lines(repo_path, path: str, commit: str, lines: Iterable[int]) -> dict[int, str]:
    """Map each 1-based line number of ``path`` at ``commit`` to the commit that last changed it."""
    origins = blame_origins(repo_path, path, commit)
    wanted = sorted(set(lines))
    for n in wanted:
        if n < 1 or n > len(origins):
            raise LineOutOfRange(f"line {n} outside 1..{len(origins)} of {path} at {commit}")
    return {n: origins[n - 1][0] for n in wanted}


def deleted_lines(repo_path, parent: str, commit: str, old_path: str, new_path: str | None) -> list[tuple[int, str]]:
    """Lines of ``old_path`` at ``parent`` that ``commit`` removed or rewrote, as (line number, text).

    ``new_path`` is None when the file was deleted outright.
    """
    if new_path is None:
        data = _git(repo_path, "cat-file", "blob", f"{parent}:{old_path}")
        text = data.decode("utf-8", "surrogateescape").splitlines()
        return list(enumerate(text, start=1))
    out = _git(repo_path, "diff", "-U0", "--no-color", "--no-ext-diff", "--no-textconv",
               f"{parent}:{old_path}", f"{commit}:{new_path}")
    removed: list[tuple[int, str]] = []
    old_line = 0
    in_hunk = False
    for line in out.split(b"\n"):
        m = _HUNK_RE.match(line)
        if m:
            old_line = int(m.group(1))
            # -U0 reports an empty old side as "-N,0" meaning "after line N"
            in_hunk = True
            continue
        if not in_hunk:
            continue
        if line.startswith(b"-"):
            removed.append((old_line, line[1:].decode("utf-8", "surrogateescape")))
            old_line += 1
    return removed


# JSON-Lines serialization

def _commit_record(c: CommitMeta) -> dict:
    d = asdict(c)
    d["parent_hashes"] = list(c.parent_hashes)
    return {"record": "commit", **d}


def history_to_jsonl(history: History) -> str:
    lines = [json.dumps({"record": "history", "repo_path": history.repo_path, "branch": history.branch})]
    for c, evs in history.iter_commits_with_events():
        lines.append(json.dumps(_commit_record(c)))
        for e in evs:
            lines.append(json.dumps({"record": "event", **asdict(e)}))
    return "\n".join(lines) + "\n"


def write_history(history: History, path: str | os.PathLike) -> None:
    Path(path).write_text(history_to_jsonl(history), encoding="utf-8")


def history_from_jsonl(text: str) -> History:
    commits: list[CommitMeta] = []
    events: list[FileChangeEvent] = []
    repo_path = branch = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        rec = json.loads(line)
        kind = rec.pop("record", None)
        if kind == "history":
            repo_path, branch = rec.get("repo_path"), rec.get("branch")
        elif kind == "commit":
            rec["parent_hashes"] = tuple(rec["parent_hashes"])
            commits.append(CommitMeta(**rec))
        elif kind == "event":
            events.append(FileChangeEvent(**rec))
        else:
            raise ValueError(f"line {lineno}: unknown record type {kind!r}")
    known = {c.hash for c in commits}
    for e in events:
        if e.commit_hash not in known:
            raise ValueError(f"event for unknown commit {e.commit_hash}")
    return History(tuple(commits), tuple(events), repo_path=repo_path, branch=branch)


def read_history(path: str | os.PathLike) -> History:
    return history_from_jsonl(Path(path).read_text(encoding="utf-8"))
