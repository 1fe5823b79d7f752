"""Pipeline hyperparameters and the key=value config file format."""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path

SOLVERS = ("graphcut", "bruteforce")


@dataclass(frozen=True)
class PipelineConfig:
    components: int = 5
    split: int = 10
    theta: float = 20.0
    lambda_: float = 2.0
    clip: float = 100.0
    seed: int = 0
    solver: str = "graphcut"

    def __post_init__(self):
        if self.components < 1:
            raise ValueError("components must be a positive integer")
        if self.split < 1:
            raise ValueError("split must be a positive integer")
        if not self.theta > 0:
            raise ValueError("theta must be positive")
        if not self.lambda_ >= 0:
            raise ValueError("lambda must be nonnegative")
        if not self.clip > 0:
            raise ValueError("clip must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.solver not in SOLVERS:
            raise ValueError(f"solver must be one of {SOLVERS}")

    def updated(self, **overrides) -> PipelineConfig:
        """Copy with the non-None overrides applied."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


# file key -> (dataclass attribute, parser)
_KEYS = {
    "components": ("components", int),
    "split": ("split", int),
    "theta": ("theta", float),
    "lambda": ("lambda_", float),
    "clip": ("clip", float),
    "seed": ("seed", int),
    "solver": ("solver", str),
}
assert {attr for attr, _ in _KEYS.values()} == {f.name for f in fields(PipelineConfig)}


def parse_config_text(text: str) -> dict:
    """Parse key=value lines into PipelineConfig keyword arguments."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, raw = line.partition("=")
        key = key.strip()
        if not sep or key not in _KEYS:
            raise ValueError(f"bad config line {lineno}: {line!r}")
        attr, parse = _KEYS[key]
        try:
            values[attr] = parse(raw.strip())
        except ValueError as exc:
            raise ValueError(f"bad value for {key!r} at line {lineno}") from exc
    return values


def load_config(path=None, **overrides) -> PipelineConfig:
    """Defaults < config file < explicit overrides (None means not given)."""
    base = {}
    if path is not None:
        base = parse_config_text(Path(path).read_text(encoding="utf-8"))
    base.update({k: v for k, v in overrides.items() if v is not None})
    return PipelineConfig(**base)
