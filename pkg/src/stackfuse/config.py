"""Run configuration: JSON file describing a grid run end to end.

Defaults reproduce the standard setup: the seven operators with their
stock parameters, the six default projections and all three metrics.
Unknown keys anywhere in the file are rejected so typos fail loudly.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from . import preprocess
from .errors import ConfigError
from .projections import DEFAULT_PROJECTIONS, canonical_projection

_TOP_KEYS = {
    "input_dir", "output_dir", "frame_pattern", "families", "operators",
    "projections", "quantile", "metrics", "niqe_model", "brisque_model",
    "jobs", "pipelines",
}
_FAMILY_KEYS = set(preprocess.DEFAULT_FAMILIES)
_METRICS = {"piqe", "niqe", "brisque"}


@dataclass
class RunConfig:
    input_dir: str = "input"
    output_dir: str = "output"
    frame_pattern: str = "*.png"
    families: dict[str, list[str]] = field(
        default_factory=lambda: {k: list(v) for k, v in preprocess.DEFAULT_FAMILIES.items()}
    )
    operators: dict[str, dict] = field(default_factory=dict)
    projections: list[str] = field(default_factory=lambda: list(DEFAULT_PROJECTIONS))
    quantile: float = 0.75
    metrics: list[str] = field(default_factory=lambda: ["piqe", "niqe", "brisque"])
    niqe_model: str | None = None  # None -> bundled default
    brisque_model: str | None = None
    jobs: int = 0  # 0 -> all available cores
    pipelines: list[str] | None = None  # e.g. ["QP_CH_NF"]; None -> full grid

    def resolved_jobs(self) -> int:
        return self.jobs if self.jobs > 0 else (os.cpu_count() or 1)

    def operator_params(self) -> dict:
        try:
            return preprocess.resolve_params(self.operators)
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from exc

    def validate(self) -> "RunConfig":
        if set(self.families) != _FAMILY_KEYS:
            raise ConfigError(
                f"families must define exactly {sorted(_FAMILY_KEYS)}, got {sorted(self.families)}"
            )
        known_ops = {op for ops in preprocess.DEFAULT_FAMILIES.values() for op in ops}
        for fam, ops in self.families.items():
            bad = set(ops) - known_ops
            if bad:
                raise ConfigError(f"unknown operators in family {fam!r}: {sorted(bad)}")
        self.operator_params()
        try:
            self.projections = [canonical_projection(p) for p in self.projections]
        except Exception as exc:
            raise ConfigError(str(exc)) from exc
        bad = set(self.metrics) - _METRICS
        if bad:
            raise ConfigError(f"unknown metrics: {sorted(bad)}")
        if not 0.0 < self.quantile < 1.0:
            raise ConfigError(f"quantile must be in (0, 1), got {self.quantile}")
        if self.jobs < 0:
            raise ConfigError("jobs must be >= 0")
        return self

    @classmethod
    def from_file(cls, path: Path | str) -> "RunConfig":
        path = Path(path)
        try:
            doc = json.loads(path.read_text())
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
        return cls.from_dict(doc, source=str(path))

    @classmethod
    def from_dict(cls, doc: dict, source: str = "<dict>") -> "RunConfig":
        if not isinstance(doc, dict):
            raise ConfigError(f"{source}: config must be a JSON object")
        unknown = set(doc) - _TOP_KEYS
        if unknown:
            raise ConfigError(f"{source}: unknown config keys: {sorted(unknown)}")
        cfg = cls()
        for key, value in doc.items():
            setattr(cfg, key, value)
        try:
            return cfg.validate()
        except ConfigError:
            raise
        except (TypeError, AttributeError) as exc:
            raise ConfigError(f"{source}: malformed value: {exc}") from exc

    def to_json(self) -> str:
        doc = {
            "input_dir": self.input_dir,
            "output_dir": self.output_dir,
            "frame_pattern": self.frame_pattern,
            "families": self.families,
            "operators": self.operators,
            "projections": self.projections,
            "quantile": self.quantile,
            "metrics": self.metrics,
            "niqe_model": self.niqe_model,
            "brisque_model": self.brisque_model,
            "jobs": self.jobs,
            "pipelines": self.pipelines,
        }
        return json.dumps(doc, indent=2)


def default_config() -> RunConfig:
    return RunConfig().validate()
