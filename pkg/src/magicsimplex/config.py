"""Run configuration for the explorer, optionally loaded from a JSON file."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path


@dataclass
class ExplorerConfig:
    psd_tol: float = 1e-10
    mub_tol: float = 1e-10
    # q1, q2, q3, q ranges for the coarse direction grid of the optimizer
    search_box: list[list[float]] = field(
        default_factory=lambda: [[-1.0, 1.0], [-1.0, 1.0], [-0.5, 1.0], [-0.5, 1.0]]
    )
    coarse_points: int = 21
    refine_starts: int = 5
    refine_step_tol: float = 1e-6
    refine_max_evals: int = 4000
    scan_grid: int = 200
    seed: int = 20140101

    @classmethod
    def from_dict(cls, data: dict) -> "ExplorerConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "ExplorerConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return asdict(self)
