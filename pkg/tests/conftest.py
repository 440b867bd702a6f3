import os
import subprocess
from pathlib import Path

import pytest

from fixture_repo import build_fixture_repo


class GitScript:
    """Tiny helper for building throwaway repositories with pinned dates."""

    def __init__(self, path: Path):
        self.path = path
        path.mkdir(parents=True, exist_ok=True)
        self.env = dict(os.environ, GIT_CONFIG_NOSYSTEM="1", GIT_CONFIG_GLOBAL=os.devnull, LC_ALL="C")
        self.git("init", "-q", "-b", "main")
        self.git("config", "commit.gpgsign", "false")
        self.clock = 1_600_000_000

    def git(self, *args, env=None) -> str:
        return subprocess.run(["git", "-C", str(self.path), *args], check=True, capture_output=True,
                              text=True, env=env or self.env).stdout

    def write(self, rel: str, content: str | bytes) -> None:
        target = self.path / rel
        target.parent.mkdir(parents=True, exist_ok=True)
        if isinstance(content, bytes):
            target.write_bytes(content)
        else:
            target.write_text(content)

    def commit(self, message: str, author: str = "Dev", email: str = "dev@example.org",
               ts: int | None = None) -> str:
        self.git("add", "-A")
        if ts is None:
            self.clock += 3600
            ts = self.clock
        stamp = f"{ts} +0000"
        env = dict(self.env, GIT_AUTHOR_NAME=author, GIT_AUTHOR_EMAIL=email, GIT_AUTHOR_DATE=stamp,
                   GIT_COMMITTER_NAME=author, GIT_COMMITTER_EMAIL=email, GIT_COMMITTER_DATE=stamp)
        self.git("commit", "-q", "--allow-empty", "-m", message, env=env)
        return self.git("rev-parse", "HEAD").strip()


@pytest.fixture
def gitscript(tmp_path):
    return GitScript(tmp_path / "repo")


@pytest.fixture(scope="session")
def fixture_repo(tmp_path_factory):
    path = tmp_path_factory.mktemp("fixture") / "repo"
    hashes = build_fixture_repo(path)
    return path, hashes


@pytest.fixture(scope="session")
def fixture_history(fixture_repo):
    from defectpred.mining import walk_history

    path, _ = fixture_repo
    return walk_history(path, "main")


DATA = Path(__file__).parent / "data"


# One line per acceptance criterion, filled in by test_acceptance.py.
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
