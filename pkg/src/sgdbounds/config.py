"""Experiment configuration: a TOML file of flat dotted keys.

Example::

    problem.kind = "linreg"
    problem.dim = 3
    schedule.c_gamma = 0.5
    schedule.alpha = 0.75
    run.theta0_offset = [2.0, 0.0, 0.0]
    verify.theorems = ["lemma1", "thm1", "thm3", "thm4"]
"""

from __future__ import annotations

import json
import math
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .algorithms import StepSchedule
from .bounds import THEOREMS
from .problems import KINDS, Problem, make_problem


@dataclass
class ExperimentConfig:
    problem_kind: str = "linreg"
    problem_dim: int = 3
    problem_scale: float = 1.0
    problem_noise: float = 1.0
    problem_theta: Optional[list] = None
    problem_r_lambda0: Optional[float] = None
    problem_safety: float = 2.0
    problem_audit_budget: int = 200_000
    problem_audit_seed: int = 20240607
    schedule_c_gamma: float = 0.5
    schedule_alpha: float = 0.75
    run_theta0: Optional[list] = None
    run_theta0_offset: Optional[list] = None
    run_n_max: int = 10 ** 4
    run_replicates: int = 1000
    run_checkpoints: object = "geometric"
    run_seed: int = 0
    run_subopt_budget: int = 10 ** 4
    verify_theorems: list = field(default_factory=lambda: ["thm1"])
    verify_confidence: float = 0.99
    verify_min_checkpoint: int = 1
    output_dir: str = "out"

    def __post_init__(self):
        if self.problem_kind not in KINDS:
            raise ValueError(f"problem.kind must be one of {sorted(KINDS)}")
        unknown = [t for t in self.verify_theorems if t not in THEOREMS]
        if unknown:
            raise ValueError(f"unknown theorems {unknown}; choose from {list(THEOREMS)}")
        if self.run_theta0 is not None and self.run_theta0_offset is not None:
            raise ValueError("give run.theta0 or run.theta0_offset, not both")
        for name in ("problem_theta", "run_theta0", "run_theta0_offset"):
            vec = getattr(self, name)
            if vec is not None and len(vec) != self.problem_dim:
                raise ValueError(f"{_key(name)} must have {self.problem_dim} entries")
        if isinstance(self.run_checkpoints, str) and self.run_checkpoints != "geometric":
            raise ValueError('run.checkpoints must be "geometric" or a list of integers')
        StepSchedule(self.schedule_c_gamma, self.schedule_alpha)

    # -- derived objects ------------------------------------------------------
    def schedule(self) -> StepSchedule:
        return StepSchedule(self.schedule_c_gamma, self.schedule_alpha)

    def problem(self) -> Problem:
        return make_problem(self.problem_kind, dim=self.problem_dim, theta=self.problem_theta,
                            scale=self.problem_scale, noise=self.problem_noise, r_lambda0=self.problem_r_lambda0,
                            safety=self.problem_safety, audit_budget=self.problem_audit_budget,
                            audit_seed=self.problem_audit_seed)

    def theta0(self, problem: Problem) -> np.ndarray:
        if self.run_theta0 is not None:
            return np.asarray(self.run_theta0, dtype=float)
        if self.run_theta0_offset is not None:
            return problem.theta + np.asarray(self.run_theta0_offset, dtype=float)
        return np.zeros(problem.dim)

    def checkpoints(self) -> np.ndarray:
        from .verify import geometric_checkpoints

        if self.run_checkpoints == "geometric":
            return geometric_checkpoints(self.run_n_max)
        return np.asarray(self.run_checkpoints, dtype=np.int64)

    # -- text form ------------------------------------------------------------
    def to_flat(self) -> dict:
        """Dotted keys mapped to values, omitting unset optional entries."""
        return {_key(f.name): getattr(self, f.name) for f in fields(self) if getattr(self, f.name) is not None}

    @classmethod
    def from_flat(cls, flat: dict) -> "ExperimentConfig":
        names = {_key(f.name): f.name for f in fields(cls)}
        unknown = sorted(set(flat) - set(names))
        if unknown:
            raise ValueError(f"unknown configuration keys: {unknown}")
        return cls(**{names[k]: v for k, v in flat.items()})

    def dumps(self) -> str:
        return "".join(f"{k} = {_format(v)}\n" for k, v in self.to_flat().items())


def _key(name: str) -> str:
    section, _, rest = name.partition("_")
    return f"{section}.{rest}"


def _format(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_format(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {value!r}")


def _flatten(table: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in table.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def loads(text: str) -> ExperimentConfig:
    return ExperimentConfig.from_flat(_flatten(tomllib.loads(text)))


def load(path) -> ExperimentConfig:
    return loads(Path(path).read_text(encoding="utf-8"))
