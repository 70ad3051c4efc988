"""Run configuration: a JSON document with params, task and io blocks.

Unknown keys are rejected at every level so that a typo never silently
falls back to a default.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from typing import Any

from .core.params import ModelParams, make_params
from .core.scalars import parse_complex
from .errors import ConfigError, DegenerateParameters

SUITES = ("algebra", "transfer", "qop", "wronskian", "tq", "vertex")

# a well-separated family near the unit circle; the first n entries are used
DEFAULT_A = ("1.0", "-0.95+0.1i", "0.05+1.05i", "0.1-0.97i", "0.72+0.68i", "-0.69-0.75i",
             "0.36-0.93i", "-0.31+0.96i")
DEFAULT_HBAR = "0.35"

DEFAULT_TOLERANCES: dict[str, float] = {
    "algebra": 1e-10,
    "transfer_commute": 1e-11,
    "aba_eigen": 1e-8,
    "qop_eigen": 1e-8,
    "qop_identity": 1e-9,
    "line_bundle": 1e-10,
    "classical": 1e-4,
    "wronskian": 1e-8,
    "tq": 1e-8,
    "vertex": 1e-3,
}


def _reject_unknown(cls: type, data: dict[str, Any], where: str) -> None:
    if not isinstance(data, dict):
        raise ConfigError(f"{where} must be an object")
    known = {f.name for f in fields(cls)}
    extra = sorted(set(data) - known)
    if extra:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(extra)}")


@dataclass
class ParamsBlock:
    n: int = 2
    a: list[str] | None = None
    hbar: str = DEFAULT_HBAR
    q: str = "0.9"
    precision: int = 53

    def resolved_a(self) -> list[str]:
        if self.a is not None:
            return [str(x) for x in self.a]
        if self.n > len(DEFAULT_A):
            raise ConfigError(f"no default characters for n={self.n}; pass a explicitly")
        return list(DEFAULT_A[: self.n])

    def build(self) -> ModelParams:
        try:
            a = [parse_complex(str(x)) for x in self.resolved_a()]
            hbar = parse_complex(str(self.hbar))
            q = parse_complex(str(self.q))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"malformed number: {exc}") from exc
        if self.n < 1 or len(a) != self.n:
            raise ConfigError(f"need n >= 1 and exactly n characters, got n={self.n}, {len(a)} values")
        if self.precision < 53:
            raise ConfigError("precision must be at least 53 bits")
        try:
            return make_params(self.n, a, hbar, q=q, precision=self.precision)
        except DegenerateParameters as exc:
            raise ConfigError(str(exc)) from exc


@dataclass
class TaskBlock:
    suites: list[str] = field(default_factory=lambda: list(SUITES))
    z: list[str] = field(default_factory=lambda: ["0.1", "0.25"])
    k: list[int] | None = None
    M: int = 6
    d_max: int = 14
    vertex_z: str = "0.05"
    index_range: int = 2
    seed: int = 0
    tolerances: dict[str, float] = field(default_factory=dict)

    def tolerance(self, name: str) -> float:
        return float(self.tolerances.get(name, DEFAULT_TOLERANCES[name]))

    def validate(self) -> None:
        bad = [s for s in self.suites if s not in SUITES]
        if bad:
            raise ConfigError(f"unknown suite(s): {', '.join(bad)}")
        unknown = sorted(set(self.tolerances) - set(DEFAULT_TOLERANCES))
        if unknown:
            raise ConfigError(f"unknown tolerance name(s): {', '.join(unknown)}")
        if self.M < 0 or self.d_max < 0:
            raise ConfigError("M and d_max must be non-negative")

    def z_values(self) -> list[complex]:
        try:
            return [parse_complex(str(v)) for v in self.z]
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"malformed z value: {exc}") from exc


@dataclass
class IOBlock:
    cache: str | None = None
    report: str | None = None
    format: str = "json"

    def validate(self) -> None:
        if self.format not in ("json", "csv"):
            raise ConfigError(f"format must be json or csv, got {self.format!r}")


@dataclass
class RunConfig:
    params: ParamsBlock = field(default_factory=ParamsBlock)
    task: TaskBlock = field(default_factory=TaskBlock)
    io: IOBlock = field(default_factory=IOBlock)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RunConfig":
        _reject_unknown(cls, data, "config")
        blocks = {}
        for name, block_cls in (("params", ParamsBlock), ("task", TaskBlock), ("io", IOBlock)):
            raw = data.get(name, {})
            _reject_unknown(block_cls, raw, name)
            try:
                blocks[name] = block_cls(**raw)
            except TypeError as exc:
                raise ConfigError(f"bad {name} block: {exc}") from exc
        cfg = cls(**blocks)
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        return cls.from_dict(data)

    @classmethod
    def load(cls, path: str) -> "RunConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                return cls.from_json(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc

    def validate(self) -> None:
        self.task.validate()
        self.io.validate()

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


__all__ = ["DEFAULT_A", "DEFAULT_HBAR", "DEFAULT_TOLERANCES", "IOBlock", "ParamsBlock", "RunConfig", "SUITES",
           "TaskBlock"]
