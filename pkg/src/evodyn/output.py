"""Run configuration and file output: CSV trajectories, sweeps, metadata.

Numbers are serialized with 17 significant digits so that a written file
parses back to bit-identical floats.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import OutputError, ValidationError

ARTIFACT_VERSION = "0.1.0"

CLASSICAL_HEADER = "t,x_T,y_T,u_A,u_B"
QUANTUM_HEADER = ("t,re_a00,im_a00,re_a01,im_a01,re_a10,im_a10,re_a11,im_a11,"
                  "p_TT,p_TF,p_FT,p_FF,u_A,u_B,norm")
MIXED_HEADER = "t,re_q0,im_q0,re_q1,im_q1,y_T,u_A,u_B,norm"
SWEEP_HEADER = "x0,y0,label,residual"


def fmt(v: float) -> str:
    return "%.17g" % v


@dataclass
class InitConfig:
    x0: float = 0.5
    y0: float = 0.5
    theta0: float = 0.0
    phi0: float = 0.0
    alpha0: float = 0.0


@dataclass
class DynamicsConfig:
    gamma: float = 1.0
    dt: float = 1e-3
    t_max: float = 200.0
    stride: int = 10
    hamiltonian_mode: str = "h-def"
    renormalize: bool = True


@dataclass
class ToleranceConfig:
    eps_conv: float = 1e-6
    eps_cycle: float = 1e-3


@dataclass
class OutputConfig:
    path: str = ""
    format: str = "csv"


@dataclass
class RunConfig:
    game: object = "trading-farming"     # preset name or {"A": [[...]], "B": [[...]]}
    mode: str = "classical"              # classical | quantum | mixed
    init: InitConfig = field(default_factory=InitConfig)
    dynamics: DynamicsConfig = field(default_factory=DynamicsConfig)
    tolerances: ToleranceConfig = field(default_factory=ToleranceConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    grid_n: int | None = None
    quantum_player: int = 0

    def validate(self):
        for name in ("x0", "y0"):
            v = getattr(self.init, name)
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"{name}={v} outside [0, 1]")
        d = self.dynamics
        if d.dt <= 0 or d.t_max <= 0 or d.gamma <= 0:
            raise ValidationError("dt, t_max and gamma must be positive")
        if d.stride < 1:
            raise ValidationError("stride must be >= 1")
        if self.grid_n is not None and self.grid_n < 2:
            raise ValidationError("grid_n must be >= 2 when sweeping")
        if self.mode not in ("classical", "quantum", "mixed"):
            raise ValidationError(f"unknown run mode {self.mode!r}")
        return self

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        d = dict(d)
        for key, sub in (("init", InitConfig), ("dynamics", DynamicsConfig),
                         ("tolerances", ToleranceConfig), ("output", OutputConfig)):
            if key in d and isinstance(d[key], dict):
                d[key] = sub(**d[key])
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls.from_dict(json.loads(text))


def default_output_dir() -> Path:
    return Path(os.environ.get("EVODYN_OUTPUT_DIR", "."))


def _open_out(path):
    try:
        return open(path, "w")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc


def write_classical_csv(path, traj):
    with _open_out(path) as fh:
        fh.write(CLASSICAL_HEADER + "\n")
        for t, s, (ua, ub) in zip(traj.times, traj.states, traj.payoffs):
            fh.write(",".join(fmt(v) for v in (t, s[0].real, s[2].real, ua, ub)) + "\n")


def write_quantum_csv(path, traj):
    with _open_out(path) as fh:
        fh.write(QUANTUM_HEADER + "\n")
        for k, t in enumerate(traj.times):
            amps = traj.states[k, :4]
            p = np.abs(amps) ** 2
            p = p / p.sum()
            row = [t]
            for a in amps:
                row += [a.real, a.imag]
            row += list(p) + list(traj.payoffs[k]) + [traj.norms[k]]
            fh.write(",".join(fmt(v) for v in row) + "\n")


def write_mixed_csv(path, traj):
    with _open_out(path) as fh:
        fh.write(MIXED_HEADER + "\n")
        for k, t in enumerate(traj.times):
            q = traj.states[k, :2]
            row = [t, q[0].real, q[0].imag, q[1].real, q[1].imag,
                   traj.states[k, 2].real, traj.payoffs[k, 0], traj.payoffs[k, 1],
                   traj.norms[k]]
            fh.write(",".join(fmt(v) for v in row) + "\n")


def write_sweep_csv(path, sweep):
    with _open_out(path) as fh:
        fh.write(SWEEP_HEADER + "\n")
        for x0, y0, lbl in sweep.points:
            fh.write(f"{fmt(x0)},{fmt(y0)},{lbl.describe()},{fmt(lbl.residual)}\n")


def write_metadata(path, config: RunConfig, extra=None):
    meta = {"artifact_version": ARTIFACT_VERSION, "config": asdict(config)}
    if extra:
        meta["result"] = extra
    with _open_out(path) as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")


def read_csv(path):
    """Parse a file written by one of the writers back into header + float
    columns (the sweep label column stays a string)."""
    with open(path) as fh:
        header = fh.readline().strip()
        rows = [line.strip().split(",") for line in fh if line.strip()]
    return header, rows
