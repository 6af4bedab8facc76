"""Experiment configuration: JSON round-trip, validation, derived schedules.

The file format is a UTF-8 JSON object with the sections below (all optional
unless noted). Configurations round-trip losslessly through their file form.

    {
      "grid":    {"L": 10.0, "n": 256},                     # required
      "solver":  {"nu": 1e-3, "cfl": 0.4, "t_end": 1.0,
                  "diag_times": [...] | "diag_count": 11,
                  "snapshot_times": [...], "dealias": true,
                  "sign_abort_tol": 1e-3},
      "layout":  [{"center": [x, y], "eps": 0.02, "a": 1.0,
                   "profile": "gaussian" | "disc" | "stretched_gaussian",
                   "mollify_width": ..., "aspect": ...}, ...],  # required
      "pv":      {"dt": 1e-3, "collision_floor": null},
      "metrics": {"R": [0.5], "p": [4], "gamma": 2.0, "beta": 3.0},
      "sweep":   {"eps": [...], "nu": [...], "jobs": 1},
      "output":  {"snapshots": false},
      "seed":    0
    }
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .initial_data import PROFILES, BlobSpec


def _require(cond: bool, message: str):
    if not cond:
        raise ConfigError(message)


def _take(section: dict, name: str, allowed: set):
    unknown = set(section) - allowed
    _require(not unknown, f"unknown {name} keys: {sorted(unknown)}")


@dataclass
class GridConfig:
    L: float
    n: int

    def validate(self):
        _require(self.L > 0, f"grid.L must be positive, got {self.L}")
        _require(self.n >= 8 and self.n % 2 == 0, f"grid.n must be even and >= 8, got {self.n}")


@dataclass
class SolverConfig:
    nu: float
    cfl: float = 0.4
    t_end: float = 1.0
    diag_times: list[float] | None = None
    diag_count: int = 11
    snapshot_times: list[float] = field(default_factory=list)
    dealias: bool = True
    sign_abort_tol: float | None = 1e-3

    def validate(self):
        _require(self.nu >= 0, f"solver.nu must be nonnegative, got {self.nu}")
        _require(0 < self.cfl <= 1, f"solver.cfl must lie in (0,1], got {self.cfl}")
        _require(self.t_end >= 0, f"solver.t_end must be nonnegative, got {self.t_end}")
        _require(self.diag_count >= 2, "solver.diag_count must be at least 2")
        for name, times in (("diag_times", self.diag_times), ("snapshot_times", self.snapshot_times)):
            if not times:
                continue
            _require(all(b > a for a, b in zip(times, times[1:])),
                     f"solver.{name} must be strictly increasing")
            _require(times[0] >= 0 and times[-1] <= self.t_end,
                     f"solver.{name} must lie within [0, t_end]")

    def resolve_diag_times(self) -> list[float]:
        if self.diag_times is not None:
            return list(self.diag_times)
        if self.t_end == 0:
            return [0.0]
        return [float(t) for t in np.linspace(0.0, self.t_end, self.diag_count)]


@dataclass
class PVConfig:
    dt: float = 1e-3
    collision_floor: float | None = None

    def validate(self):
        _require(self.dt > 0, f"pv.dt must be positive, got {self.dt}")
        if self.collision_floor is not None:
            _require(self.collision_floor >= 0, "pv.collision_floor must be nonnegative")


@dataclass
class MetricsConfig:
    R: list[float] = field(default_factory=list)
    p: list[float] = field(default_factory=lambda: [4.0])
    gamma: float = 2.0
    beta: float = 3.0

    def validate(self):
        _require(all(r >= 0 for r in self.R), "metrics.R entries must be nonnegative")
        _require(all(p >= 1 for p in self.p), "metrics.p entries must be >= 1")
        _require(self.gamma > 0, "metrics.gamma must be positive")
        _require(self.beta > 0, "metrics.beta must be positive")


@dataclass
class SweepConfig:
    eps: list[float] = field(default_factory=list)
    nu: list[float] = field(default_factory=list)
    jobs: int = 1

    def validate(self):
        _require(all(e > 0 for e in self.eps), "sweep.eps entries must be positive")
        _require(all(n >= 0 for n in self.nu), "sweep.nu entries must be nonnegative")
        _require(self.jobs >= 1, "sweep.jobs must be at least 1")


@dataclass
class OutputConfig:
    snapshots: bool = False


@dataclass
class ExperimentConfig:
    grid: GridConfig
    layout: list[BlobSpec]
    solver: SolverConfig
    pv: PVConfig = field(default_factory=PVConfig)
    metrics: MetricsConfig = field(default_factory=MetricsConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    seed: int = 0

    def validate(self):
        self.grid.validate()
        self.solver.validate()
        self.pv.validate()
        self.metrics.validate()
        self.sweep.validate()
        _require(len(self.layout) >= 1, "layout must contain at least one blob")
        for k, blob in enumerate(self.layout):
            _require(blob.profile in PROFILES, f"layout[{k}].profile unknown: {blob.profile}")
            _require(blob.eps > 0, f"layout[{k}].eps must be positive")
            _require(blob.a != 0, f"layout[{k}].a must be nonzero")
            _require(len(blob.center) == 2, f"layout[{k}].center must be a point")
            _require(
                0 <= blob.center[0] < self.grid.L and 0 <= blob.center[1] < self.grid.L,
                f"layout[{k}].center outside the domain",
            )
        return self

    def with_overrides(self, eps: float | None = None, nu: float | None = None) -> "ExperimentConfig":
        """Sweep helper: a copy with every blob scale and/or the viscosity replaced."""
        d = self.to_dict()
        if eps is not None:
            for blob in d["layout"]:
                blob["eps"] = eps
        if nu is not None:
            d["solver"]["nu"] = nu
        return ExperimentConfig.from_dict(d)

    # -- serialization ------------------------------------------------------

    @staticmethod
    def from_dict(data: dict) -> "ExperimentConfig":
        _take(data, "top-level", {"grid", "solver", "layout", "pv", "metrics", "sweep", "output", "seed"})
        try:
            gsec = dict(data["grid"])
            lsec = list(data["layout"])
            ssec = dict(data["solver"])
        except KeyError as exc:
            raise ConfigError(f"missing required config section: {exc}") from None

        _take(gsec, "grid", {"L", "n"})
        grid = GridConfig(L=float(gsec.get("L", 0.0)), n=int(gsec.get("n", 0)))

        _take(ssec, "solver", {"nu", "cfl", "t_end", "diag_times", "diag_count",
                               "snapshot_times", "dealias", "sign_abort_tol"})
        _require("nu" in ssec, "solver.nu is required")
        solver = SolverConfig(
            nu=float(ssec["nu"]),
            cfl=float(ssec.get("cfl", 0.4)),
            t_end=float(ssec.get("t_end", 1.0)),
            diag_times=[float(t) for t in ssec["diag_times"]] if ssec.get("diag_times") is not None else None,
            diag_count=int(ssec.get("diag_count", 11)),
            snapshot_times=[float(t) for t in ssec.get("snapshot_times", [])],
            dealias=bool(ssec.get("dealias", True)),
            sign_abort_tol=None if ssec.get("sign_abort_tol", 1e-3) is None
            else float(ssec.get("sign_abort_tol", 1e-3)),
        )

        layout = []
        for k, entry in enumerate(lsec):
            entry = dict(entry)
            _take(entry, f"layout[{k}]", {"center", "eps", "a", "profile", "mollify_width", "aspect"})
            try:
                center = tuple(float(c) for c in entry["center"])
                layout.append(
                    BlobSpec(
                        center=center,
                        eps=float(entry["eps"]),
                        a=float(entry["a"]),
                        profile=str(entry.get("profile", "gaussian")),
                        mollify_width=None if entry.get("mollify_width") is None
                        else float(entry["mollify_width"]),
                        aspect=float(entry.get("aspect", 1.0)),
                    )
                )
            except (KeyError, ValueError) as exc:
                raise ConfigError(f"bad layout entry {k}: {exc}") from None

        psec = dict(data.get("pv", {}))
        _take(psec, "pv", {"dt", "collision_floor"})
        pv = PVConfig(
            dt=float(psec.get("dt", 1e-3)),
            collision_floor=None if psec.get("collision_floor") is None
            else float(psec["collision_floor"]),
        )

        msec = dict(data.get("metrics", {}))
        _take(msec, "metrics", {"R", "p", "gamma", "beta"})
        metrics = MetricsConfig(
            R=[float(r) for r in msec.get("R", [])],
            p=[float(p) for p in msec.get("p", [4.0])],
            gamma=float(msec.get("gamma", 2.0)),
            beta=float(msec.get("beta", 3.0)),
        )

        wsec = dict(data.get("sweep", {}))
        _take(wsec, "sweep", {"eps", "nu", "jobs"})
        sweep = SweepConfig(
            eps=[float(e) for e in wsec.get("eps", [])],
            nu=[float(n) for n in wsec.get("nu", [])],
            jobs=int(wsec.get("jobs", 1)),
        )

        osec = dict(data.get("output", {}))
        _take(osec, "output", {"snapshots"})
        output = OutputConfig(snapshots=bool(osec.get("snapshots", False)))

        cfg = ExperimentConfig(
            grid=grid, layout=layout, solver=solver, pv=pv,
            metrics=metrics, sweep=sweep, output=output,
            seed=int(data.get("seed", 0)),
        )
        return cfg.validate()

    def to_dict(self) -> dict:
        return {
            "grid": {"L": self.grid.L, "n": self.grid.n},
            "solver": {
                "nu": self.solver.nu,
                "cfl": self.solver.cfl,
                "t_end": self.solver.t_end,
                "diag_times": self.solver.diag_times,
                "diag_count": self.solver.diag_count,
                "snapshot_times": self.solver.snapshot_times,
                "dealias": self.solver.dealias,
                "sign_abort_tol": self.solver.sign_abort_tol,
            },
            "layout": [
                {
                    "center": list(b.center),
                    "eps": b.eps,
                    "a": b.a,
                    "profile": b.profile,
                    "mollify_width": b.mollify_width,
                    "aspect": b.aspect,
                }
                for b in self.layout
            ],
            "pv": {"dt": self.pv.dt, "collision_floor": self.pv.collision_floor},
            "metrics": {
                "R": self.metrics.R,
                "p": self.metrics.p,
                "gamma": self.metrics.gamma,
                "beta": self.metrics.beta,
            },
            "sweep": {"eps": self.sweep.eps, "nu": self.sweep.nu, "jobs": self.sweep.jobs},
            "output": {"snapshots": self.output.snapshots},
            "seed": self.seed,
        }

    @staticmethod
    def load(path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} must contain a JSON object")
        return ExperimentConfig.from_dict(data)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")


def first_radius(cfg: ExperimentConfig, d: float) -> float:
    """Radius used for the outer-mass column: metrics.R[0], else d/6, else L/4."""
    if cfg.metrics.R:
        return cfg.metrics.R[0]
    if math.isfinite(d):
        return d / 6.0
    return cfg.grid.L / 4.0
