"""Pipeline configuration: a plain ``key = value`` file plus command-line overrides.

Example::

    repo = ../commons-cli
    branch = master
    folds = 10
    models = all
    vote.scheme = soft
    vote.weights = [1, 1, 1, 1, 1, 1, 2]
    rf.trees = 100
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from defectpred.errors import ConfigError
from defectpred.learners import ALL_KINDS, ALIASES, HyperParams, canonical_kind
from defectpred.szz import DEFAULT_ISSUE_PATTERN, DEFAULT_KEYWORDS


@dataclass
class PipelineConfig:
    repo: str | None = None
    branch: str = "HEAD"
    keywords: list[str] = field(default_factory=lambda: list(DEFAULT_KEYWORDS))
    issue_pattern: str | None = DEFAULT_ISSUE_PATTERN
    folds: int = 10
    seed: int = 42
    smote: bool = True
    smote_k: int = 5
    models: list[str] = field(default_factory=lambda: list(ALL_KINDS))
    average: str = "weighted"
    vote_scheme: str = "soft"
    vote_weights: list[float] | None = None
    vote_members: list[str] | None = None
    hyper: HyperParams = field(default_factory=HyperParams)
    out_dir: str = "."
    history: str = "history.jsonl"
    labels: str = "labels.csv"
    dataset: str = "dataset.csv"
    report: str = "report.json"
    report_md: str = "report.md"

    def path(self, name: str) -> Path:
        p = Path(getattr(self, name))
        return p if p.is_absolute() else Path(self.out_dir) / p

    def validate(self) -> "PipelineConfig":
        if self.folds < 2:
            raise ConfigError("folds must be at least 2")
        if self.smote_k < 1:
            raise ConfigError("smote_k must be positive")
        if self.average not in ("weighted", "binary"):
            raise ConfigError(f"average must be weighted or binary, not {self.average!r}")
        if not self.keywords:
            raise ConfigError("keywords must not be empty")
        if not self.models:
            raise ConfigError("models must not be empty")
        self.vote_spec()
        hp = self.hyper
        positives = {"knn.k": hp.knn.k, "cart.min_split": hp.cart.min_split, "rf.trees": hp.rf.trees,
                     "logreg.max_iter": hp.logreg.max_iter, "svm.epochs": hp.svm.epochs,
                     "svm.platt_max_iter": hp.svm.platt_max_iter, "logreg.lam": hp.logreg.lam,
                     "logreg.tol": hp.logreg.tol, "svm.lam": hp.svm.lam}
        for key, val in positives.items():
            if val <= 0:
                raise ConfigError(f"{key} must be positive")
        return self

    def vote_spec(self):
        from defectpred.ensemble import VotingSpec

        kwargs = {"scheme": self.vote_scheme,
                  "weights": tuple(self.vote_weights) if self.vote_weights is not None else None}
        if self.vote_members is not None:
            kwargs["members"] = tuple(self.vote_members)
        try:
            return VotingSpec(**kwargs)
        except KeyError as exc:
            raise ConfigError(f"vote.members: unknown model {exc.args[0]!r}") from None


def parse_value(text: str):
    """Parse one config value: list, bool, none, int, float, or bare string."""
    text = text.strip()
    if text.startswith("["):
        try:
            return json.loads(text)
        except json.JSONDecodeError:
            inner = text[1:-1] if text.endswith("]") else text[1:]
            return [parse_value(part) for part in inner.split(",") if part.strip()]
    low = text.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    if low in ("none", "null"):
        return None
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        return text[1:-1]
    return text


def _as_list(value) -> list:
    if value is None:
        return []
    if isinstance(value, str):
        return [v.strip() for v in value.split(",") if v.strip()]
    if isinstance(value, (list, tuple)):
        return list(value)
    return [value]


def _coerce(key: str, value, annotation: str):
    allow_none = "None" in annotation
    if value is None:
        if allow_none:
            return None
        raise ConfigError(f"{key}: value required")
    try:
        if annotation.startswith("bool"):
            if isinstance(value, bool):
                return value
            raise ValueError
        if annotation.startswith("int"):
            if isinstance(value, bool) or float(value) != int(float(value)):
                raise ValueError
            return int(float(value))
        if annotation.startswith("float"):
            if isinstance(value, bool):
                raise ValueError
            return float(value)
        if annotation.startswith("list[float]"):
            return [float(v) for v in _as_list(value)]
        if annotation.startswith("list[str]"):
            return [str(v) for v in _as_list(value)]
        return str(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: invalid value {value!r} (expected {annotation})") from None


_TOP_LEVEL = {f.name: f.type for f in dataclasses.fields(PipelineConfig) if f.name != "hyper"
              and not f.name.startswith("vote_")}
_VOTE = {"vote.scheme": "vote_scheme", "vote.weights": "vote_weights", "vote.members": "vote_members"}
_SECTIONS = {f.name: {g.name: g.type for g in dataclasses.fields(f.default_factory)}
             for f in dataclasses.fields(HyperParams)}
_SECTION_ALIASES = {alias: kind for alias, kind in ALIASES.items() if kind in _SECTIONS}


def known_keys() -> list[str]:
    keys = list(_TOP_LEVEL) + list(_VOTE)
    keys += [f"{s}.{k}" for s, fields in _SECTIONS.items() for k in fields]
    return keys


def apply_setting(cfg: PipelineConfig, key: str, value) -> None:
    key = key.strip().replace("-", "_") if "." not in key else key.strip()
    if key in _VOTE:
        attr = _VOTE[key]
        ann = dict((f.name, f.type) for f in dataclasses.fields(PipelineConfig))[attr]
        val = _coerce(key, value, ann)
        if attr == "vote_members" and val is not None:
            val = [_model_name(key, m) for m in val]
        setattr(cfg, attr, val)
        return
    if "." in key:
        section, _, name = key.partition(".")
        section = _SECTION_ALIASES.get(section, section)
        if section not in _SECTIONS or name not in _SECTIONS[section]:
            raise ConfigError(f"unknown config key {key!r}")
        setattr(getattr(cfg.hyper, section), name, _coerce(key, value, _SECTIONS[section][name]))
        return
    if key not in _TOP_LEVEL:
        raise ConfigError(f"unknown config key {key!r}")
    if key == "models":
        names = _as_list(value)
        if len(names) == 1 and str(names[0]).lower() == "all":
            cfg.models = list(ALL_KINDS)
        else:
            cfg.models = [_model_name(key, m) for m in names]
        return
    setattr(cfg, key, _coerce(key, value, _TOP_LEVEL[key]))


def _model_name(key: str, name) -> str:
    try:
        return canonical_kind(str(name))
    except KeyError:
        raise ConfigError(f"{key}: unknown model {name!r}") from None


def parse_config_text(text: str, cfg: PipelineConfig | None = None) -> PipelineConfig:
    cfg = cfg or PipelineConfig()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        apply_setting(cfg, key.strip(), parse_value(value))
    return cfg


def load_config(path: str | Path | None, overrides: dict | None = None) -> PipelineConfig:
    cfg = PipelineConfig()
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        parse_config_text(text, cfg)
    for key, value in (overrides or {}).items():
        if value is not None:
            apply_setting(cfg, key, value)
    return cfg.validate()
