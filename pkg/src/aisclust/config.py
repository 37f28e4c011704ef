"""Run configuration: a flat key=value file format plus validation.

Every run is described by one :class:`RunConfig`. The on-disk form is one
``key=value`` pair per line (``#`` starts a comment, blank lines are
ignored); unknown keys are an error so typos fail loudly. ``serialize``
always writes every field, so the resolved config dropped next to a run's
outputs replays that run exactly.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from ._validation import check_int, check_real

#: Environment variable naming the default output root for runs.
OUTPUT_ROOT_ENV = "AISCLUST_OUT"

_FORMATS = ("sgml", "plaintext")
_METRICS = ("euclidean", "minkowski4", "cosine")


@dataclass
class RunConfig:
    corpus: str = ""
    format: str = "sgml"
    per_source: int | None = None
    n: int = 3
    k_per_doc: int = 10
    metric: str = "cosine"
    seed: int = 0
    out: str | None = None
    baseline_kmeans: int | None = None
    affinity_threshold: float | None = None
    clone_budget: int = 5
    mutation_scale: float = 0.1
    suppression_threshold: float = 0.15
    max_iterations: int = 50
    stall_window: int = 5
    repertoire_size: int | None = None
    beta: float = 1.0
    allow_unigrams: bool = False
    fold_case: bool = True
    strip_punctuation: bool = True

    def validate(self):
        if not self.corpus:
            raise ValueError("corpus path is required")
        if self.format not in _FORMATS:
            raise ValueError(f"format must be one of {_FORMATS}, got {self.format!r}")
        if self.metric not in _METRICS:
            raise ValueError(f"metric must be one of {_METRICS}, got {self.metric!r}")
        low = 1 if self.allow_unigrams else 2
        if not (low <= self.n <= 5):
            if self.n == 1:
                raise ValueError(
                    "n=1 produces single-character grams and is rejected; "
                    "pass allow_unigrams=true (--allow-unigrams) to override")
            raise ValueError(f"n must be between {low} and 5, got {self.n}")
        check_int(self.k_per_doc, "k_per_doc", minimum=1)
        check_int(self.seed, "seed")
        if self.per_source is not None:
            check_int(self.per_source, "per_source", minimum=1)
        if self.baseline_kmeans is not None:
            check_int(self.baseline_kmeans, "baseline_kmeans", minimum=1)
        if self.affinity_threshold is not None:
            check_real(self.affinity_threshold, "affinity_threshold", strict_min=0.0)
        check_int(self.clone_budget, "clone_budget", minimum=0)
        check_real(self.mutation_scale, "mutation_scale", minimum=0.0)
        check_real(self.suppression_threshold, "suppression_threshold", minimum=0.0)
        check_int(self.max_iterations, "max_iterations", minimum=1)
        check_int(self.stall_window, "stall_window", minimum=1)
        if self.repertoire_size is not None:
            check_int(self.repertoire_size, "repertoire_size", minimum=1)
        check_real(self.beta, "beta", strict_min=0.0)
        return self


def _format_value(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def serialize_config(config):
    """Render every field as ``key=value``, one per line, in field order."""
    lines = []
    for f in dataclasses.fields(RunConfig):
        lines.append(f"{f.name}={_format_value(getattr(config, f.name))}")
    return "\n".join(lines) + "\n"


def _parse_bool(raw, key):
    lowered = raw.lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise ValueError(f"{key} expects true/false, got {raw!r}")


_OPTIONAL_INT = ("per_source", "baseline_kmeans", "repertoire_size")
_OPTIONAL_FLOAT = ("affinity_threshold",)
_OPTIONAL_STR = ("out",)


def _convert(key, raw, field_type):
    raw = raw.strip()
    if key in _OPTIONAL_INT:
        return int(raw) if raw else None
    if key in _OPTIONAL_FLOAT:
        return float(raw) if raw else None
    if key in _OPTIONAL_STR:
        return raw or None
    if field_type is int:
        return int(raw)
    if field_type is float:
        return float(raw)
    if field_type is bool:
        return _parse_bool(raw, key)
    return raw


def parse_config(text, base=None):
    """Parse ``key=value`` lines into a RunConfig.

    Starts from ``base`` (or defaults) and overrides the keys present in the
    text. Unknown keys and malformed lines raise ValueError.
    """
    config = dataclasses.replace(base) if base is not None else RunConfig()
    by_name = {f.name: f for f in dataclasses.fields(RunConfig)}
    defaults = RunConfig()
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValueError(f"line {lineno}: expected key=value, got {line!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if key not in by_name:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        field_type = type(getattr(defaults, key)) if getattr(defaults, key) is not None else str
        try:
            value = _convert(key, raw, field_type)
        except ValueError as exc:
            raise ValueError(f"line {lineno}: bad value for {key}: {exc}") from None
        setattr(config, key, value)
    return config


def load_config(path, base=None):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read(), base=base)
