"""Experiment configuration: JSON schema with lossless round-trip."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import ConfigInvalid, InvalidSpec
from .evolution import EvolutionParams
from .grid import Grid, make_grid
from .shapes import shape_from_dict, shape_to_dict

__all__ = ["OutputSpec", "ExperimentConfig"]


@dataclass
class OutputSpec:
    snapshots: bool = False
    time_series: bool = True
    arrival: bool = False
    analysis: bool = False

    def to_dict(self) -> dict:
        return {
            "snapshots": self.snapshots,
            "time_series": self.time_series,
            "arrival": self.arrival,
            "analysis": self.analysis,
        }


@dataclass
class ExperimentConfig:
    name: str
    dim: int
    extents: list
    resolution: list
    shape: object
    evolution: EvolutionParams
    outputs: OutputSpec = field(default_factory=OutputSpec)
    out_dir: str | None = None

    def make_grid(self) -> Grid:
        return make_grid(self.dim, self.extents, self.resolution)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "grid": {
                "dim": self.dim,
                "extents": [list(e) for e in self.extents],
                "resolution": list(self.resolution),
            },
            "shape": shape_to_dict(self.shape),
            "evolution": {
                "epsilon": self.evolution.epsilon,
                "cfl_factor": self.evolution.cfl_factor,
                "t_max": self.evolution.t_max,
                "snapshot_stride": self.evolution.snapshot_stride,
                "event_detection": self.evolution.event_detection,
            },
            "outputs": self.outputs.to_dict(),
            "out_dir": self.out_dir,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        try:
            grid = d["grid"]
            ev = d.get("evolution", {})
            out = d.get("outputs", {})
            cfg = cls(
                name=str(d.get("name", "experiment")),
                dim=int(grid["dim"]),
                extents=[[float(a), float(b)] for a, b in grid["extents"]],
                resolution=[int(n) for n in grid["resolution"]],
                shape=shape_from_dict(d["shape"]),
                evolution=EvolutionParams(
                    epsilon=float(ev.get("epsilon", 1e-6)),
                    cfl_factor=float(ev.get("cfl_factor", 0.25)),
                    t_max=float(ev.get("t_max", 1.0)),
                    snapshot_stride=int(ev.get("snapshot_stride", 200)),
                    event_detection=bool(ev.get("event_detection", False)),
                ),
                outputs=OutputSpec(
                    snapshots=bool(out.get("snapshots", False)),
                    time_series=bool(out.get("time_series", True)),
                    arrival=bool(out.get("arrival", False)),
                    analysis=bool(out.get("analysis", False)),
                ),
                out_dir=d.get("out_dir"),
            )
        except (KeyError, TypeError, ValueError, InvalidSpec) as e:
            raise ConfigInvalid(f"bad config: {e}") from e
        # fail fast on an unusable grid before any file is written
        try:
            cfg.make_grid()
        except Exception as e:
            raise ConfigInvalid(f"bad grid spec: {e}") from e
        return cfg

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigInvalid(f"config is not valid JSON: {e}") from e
        if not isinstance(d, dict):
            raise ConfigInvalid("config root must be a JSON object")
        return cls.from_dict(d)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as e:
            raise ConfigInvalid(f"cannot read config {path}: {e}") from e
        return cls.from_json(text)
