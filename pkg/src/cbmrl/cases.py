"""The seven benchmark scenarios and loading of user-supplied case files.

Every case shares the replacement cost (3500) and degradation shape
coefficient (0.0115 per time unit); the remaining parameters vary one at a
time around the baseline, case 2.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

from .degradation import GammaProcessParams
from .environment import CostParams

__all__ = ["CaseConfig", "BUILTIN_CASES", "BASELINE_CASE_ID", "load_case", "CaseFormatError"]


class CaseFormatError(ValueError):
    """Raised when a case file cannot be parsed or fails validation."""


@dataclass(frozen=True, slots=True)
class CaseConfig:
    """One scenario: degradation, costs, and evaluation defaults."""

    case_id: int
    label: str
    beta: float
    c_p: float
    c_down: float
    failure_threshold: float
    delta_t: float
    c_r: float = 3500.0
    v_coeff: float = 0.0115
    horizon: int = 1000
    iterations: int = 200
    seed: int = 0

    def __post_init__(self):
        for name in ("beta", "failure_threshold", "delta_t", "v_coeff"):
            if getattr(self, name) <= 0.0:
                raise CaseFormatError(f"field {name!r} must be positive, got {getattr(self, name)}")
        for name in ("c_p", "c_r", "c_down"):
            if getattr(self, name) < 0.0:
                raise CaseFormatError(f"field {name!r} must be nonnegative, got {getattr(self, name)}")
        if self.horizon < 1 or self.iterations < 1:
            raise CaseFormatError("horizon and iterations must be positive")

    def process(self) -> GammaProcessParams:
        return GammaProcessParams(self.v_coeff, self.beta, self.delta_t)

    def costs(self) -> CostParams:
        return CostParams(self.c_p, self.c_r, self.c_down, self.failure_threshold)


BASELINE_CASE_ID = 2

BUILTIN_CASES = {
    1: CaseConfig(1, "Reduced repair costs", beta=4.63, c_p=300.0, c_down=2000.0,
                  failure_threshold=8.0, delta_t=100.0),
    2: CaseConfig(2, "Baseline", beta=4.63, c_p=600.0, c_down=2000.0,
                  failure_threshold=8.0, delta_t=100.0),
    3: CaseConfig(3, "Increased repair costs", beta=4.63, c_p=1500.0, c_down=2000.0,
                  failure_threshold=8.0, delta_t=100.0),
    4: CaseConfig(4, "Increased failure limit", beta=4.63, c_p=600.0, c_down=2000.0,
                  failure_threshold=12.0, delta_t=100.0),
    5: CaseConfig(5, "Reduced downtimes cost", beta=4.63, c_p=600.0, c_down=500.0,
                  failure_threshold=8.0, delta_t=100.0),
    6: CaseConfig(6, "Slower degradation", beta=6.5, c_p=600.0, c_down=2000.0,
                  failure_threshold=8.0, delta_t=100.0),
    7: CaseConfig(7, "Longer inspection period", beta=4.63, c_p=600.0, c_down=2000.0,
                  failure_threshold=8.0, delta_t=150.0),
}

_REQUIRED_FIELDS = ("beta", "c_p", "c_down", "failure_threshold", "delta_t")
_OPTIONAL_FIELDS = ("case_id", "label", "c_r", "v_coeff", "horizon", "iterations", "seed")


def load_case(source) -> CaseConfig:
    """Resolve a builtin case id (1-7, as int or digit string) or load a JSON
    case file with at least the fields beta, c_p, c_down, failure_threshold,
    delta_t."""
    if isinstance(source, int) or (isinstance(source, str) and source.strip().isdigit()):
        case_id = int(source)
        if case_id not in BUILTIN_CASES:
            raise CaseFormatError(f"unknown builtin case id {case_id}; valid ids are 1..7")
        return BUILTIN_CASES[case_id]
    try:
        with open(source) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise CaseFormatError(f"cannot read case file {source}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CaseFormatError(
            f"{source}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(raw, dict):
        raise CaseFormatError(f"{source}: expected a JSON object of case fields")
    unknown = set(raw) - set(_REQUIRED_FIELDS) - set(_OPTIONAL_FIELDS)
    if unknown:
        raise CaseFormatError(f"{source}: unknown fields {sorted(unknown)}")
    missing = [f for f in _REQUIRED_FIELDS if f not in raw]
    if missing:
        raise CaseFormatError(f"{source}: missing required fields {missing}")
    fields = dict(raw)
    fields.setdefault("case_id", 0)
    fields.setdefault("label", "custom")
    try:
        return CaseConfig(**fields)
    except TypeError as exc:
        raise CaseFormatError(f"{source}: {exc}") from exc


def with_overrides(case: CaseConfig, **kwargs) -> CaseConfig:
    """Copy of ``case`` with selected fields replaced (used by the CLI)."""
    return replace(case, **{k: v for k, v in kwargs.items() if v is not None})
