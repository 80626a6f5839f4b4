"""Run configuration shared by the harness and the CLI."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, fields, replace
from typing import Optional

from .logmean import DEFAULT_ABS_TOL
from .statlimit import DEFAULT_DECAY_THRESHOLD, DEFAULT_EPSILONS, DEFAULT_ORDINARY_TOL
from .tauber import DEFAULT_GRID_DENSITY


@dataclass(frozen=True)
class RunConfig:
    log_horizons: tuple = (4.0, 8.0, 16.0, 32.0)
    abs_tol: float = DEFAULT_ABS_TOL
    grid_density: int = DEFAULT_GRID_DENSITY
    window_eps: tuple = (1.0, 0.5, 0.1)
    epsilons: tuple = DEFAULT_EPSILONS
    decay_threshold: float = DEFAULT_DECAY_THRESHOLD
    ordinary_tol: float = DEFAULT_ORDINARY_TOL
    search_budget: int = 64
    lambdas: tuple = (2.0, 1.5, 1.25, 1.125, 1.0625)
    tau_points: int = 2001
    corpus: Optional[tuple] = None  # None selects every built-in function
    out_dir: Optional[str] = None
    seed: int = 20240101
    jobs: int = 0  # 0 means os.cpu_count()

    def __post_init__(self):
        for name in ("abs_tol", "decay_threshold", "ordinary_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if any(e <= 0 for e in self.window_eps + self.epsilons):
            raise ValueError("epsilons must be positive")
        h = self.log_horizons
        if any(v <= 0 for v in h) or any(a >= b for a, b in zip(h, h[1:])):
            raise ValueError("horizons must exceed 1 and increase")
        if self.grid_density < 1 or self.search_budget < 1 or self.tau_points < 3:
            raise ValueError("grid density, search budget and tau points must be positive")

    @property
    def workers(self):
        return self.jobs or os.cpu_count() or 1

    def merged(self, overrides: dict) -> "RunConfig":
        known = {f.name for f in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
        clean = {k: tuple(v) if isinstance(v, list) else v for k, v in overrides.items()}
        return replace(self, **clean)

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        with open(path) as fh:
            return cls().merged(json.load(fh))

    def as_dict(self):
        d = asdict(self)
        return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}
