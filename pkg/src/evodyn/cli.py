"""Command-line interface.

Subcommands: analyze | simulate | sweep | match | verify.
Exit codes: 0 success, 2 invalid input, 3 numerical or output failure,
4 verify failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import experiments, output, quantum, verify
from .engine import IntegrationParams
from .errors import NumericalError, OutputError, ValidationError
from .games import Game, MixedStrategy, equilibrium_report
from .output import RunConfig

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3
EXIT_VERIFY = 4


def _add_common(p):
    p.add_argument("--game", help="preset name (trading-farming, prisoners-dilemma, "
                                  "hawk-dove, dominant)")
    p.add_argument("--config", help="JSON run-config file; flags override its values")


def _add_dynamics(p):
    p.add_argument("--gamma", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--t-max", type=float, dest="t_max")
    p.add_argument("--stride", type=int)
    p.add_argument("--hamiltonian-mode", choices=quantum.MODES, dest="hamiltonian_mode")
    p.add_argument("--no-renormalize", action="store_true")
    p.add_argument("--eps-conv", type=float, dest="eps_conv")
    p.add_argument("--eps-cycle", type=float, dest="eps_cycle")
    p.add_argument("--out", help="output CSV path (default derived from subcommand)")
    p.add_argument("--plot", action="store_true", help="also render a PNG figure")


def build_parser():
    parser = argparse.ArgumentParser(prog="evodyn",
                                     description="Classical and quantum replicator "
                                                 "dynamics for 2x2 games")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="equilibria and game classification")
    _add_common(p)

    p = sub.add_parser("simulate", help="integrate one trajectory")
    _add_common(p)
    p.add_argument("--mode", choices=("classical", "quantum"), default="classical")
    p.add_argument("--x0", type=float)
    p.add_argument("--y0", type=float)
    p.add_argument("--theta0", type=float)
    p.add_argument("--phi0", type=float)
    p.add_argument("--alpha0", type=float)
    _add_dynamics(p)

    p = sub.add_parser("sweep", help="basin-of-attraction grid sweep")
    _add_common(p)
    p.add_argument("--mode", choices=("classical", "quantum"), default="classical")
    p.add_argument("--grid-n", type=int, dest="grid_n")
    _add_dynamics(p)

    p = sub.add_parser("match", help="quantum-vs-classical unfair game")
    _add_common(p)
    p.add_argument("--quantum-player", type=int, choices=(0, 1), dest="quantum_player")
    p.add_argument("--theta0", type=float)
    p.add_argument("--alpha0", type=float)
    p.add_argument("--x0", type=float, help="classical player's initial share")
    p.add_argument("--y0", type=float, help="alias for --x0 when the classical "
                                            "player is the column player")
    _add_dynamics(p)

    sub.add_parser("verify", help="run the invariant diagnostic suite")
    return parser


def _load_config(args) -> RunConfig:
    if getattr(args, "config", None):
        cfg = RunConfig.from_json(Path(args.config).read_text())
    else:
        cfg = RunConfig()
    if getattr(args, "game", None):
        cfg.game = args.game
    if getattr(args, "mode", None):
        cfg.mode = args.mode
    for name in ("x0", "y0", "theta0", "phi0", "alpha0"):
        v = getattr(args, name, None)
        if v is not None:
            setattr(cfg.init, name, v)
    for name in ("gamma", "dt", "t_max", "stride", "hamiltonian_mode"):
        v = getattr(args, name, None)
        if v is not None:
            setattr(cfg.dynamics, name, v)
    if getattr(args, "no_renormalize", False):
        cfg.dynamics.renormalize = False
    for name in ("eps_conv", "eps_cycle"):
        v = getattr(args, name, None)
        if v is not None:
            setattr(cfg.tolerances, name, v)
    if getattr(args, "grid_n", None) is not None:
        cfg.grid_n = args.grid_n
    if getattr(args, "quantum_player", None) is not None:
        cfg.quantum_player = args.quantum_player
    if getattr(args, "out", None):
        cfg.output.path = args.out
    return cfg


def _resolve_game(cfg: RunConfig) -> Game:
    if isinstance(cfg.game, str):
        return experiments.preset_game(cfg.game)
    if isinstance(cfg.game, dict) and "A" in cfg.game:
        return Game(np.array(cfg.game["A"], dtype=float),
                    None if cfg.game.get("B") is None else np.array(cfg.game["B"], dtype=float))
    raise ValidationError("game must be a preset name or a matrix specification")


def _out_path(cfg: RunConfig, stem: str) -> Path:
    if cfg.output.path:
        return Path(cfg.output.path)
    return output.default_output_dir() / f"{stem}.csv"


def _int_params(cfg: RunConfig) -> IntegrationParams:
    d = cfg.dynamics
    return IntegrationParams(dt=d.dt, t_max=d.t_max, stride=d.stride)


def cmd_analyze(args) -> int:
    cfg = _load_config(args)
    g = _resolve_game(cfg)
    rep = equilibrium_report(g)
    print(f"game class: {rep.game_class.value}")
    print(f"pure equilibria: {', '.join(rep.pure) if rep.pure else 'none'}")
    if rep.internal is not None:
        xs, ys = rep.internal
        print(f"internal equilibrium: ({output.fmt(xs.p)}, {output.fmt(ys.p)})")
    else:
        print("internal equilibrium: none")
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _load_config(args).validate()
    g = _resolve_game(cfg)
    d = cfg.dynamics
    path = _out_path(cfg, f"simulate-{cfg.mode}")
    if cfg.mode == "classical":
        traj = experiments.simulate_classical(
            g, MixedStrategy.from_prob(cfg.init.x0), MixedStrategy.from_prob(cfg.init.y0),
            gamma=d.gamma, params=_int_params(cfg))
        output.write_classical_csv(path, traj)
        writer = "classical"
    else:
        q0 = quantum.JointQuantumState.from_locals(
            quantum.LocalQuantumState.from_angles(cfg.init.theta0, cfg.init.alpha0),
            quantum.LocalQuantumState.from_angles(cfg.init.phi0, cfg.init.alpha0))
        traj = quantum.evolve_quantum(q0, g, quantum.QuantumParams(
            gamma=d.gamma, dt=d.dt, t_max=d.t_max, stride=d.stride,
            mode=d.hamiltonian_mode, renormalize=d.renormalize))
        output.write_quantum_csv(path, traj)
        writer = "quantum"
    label = experiments.label_trajectory(g, traj, cfg.tolerances.eps_conv,
                                         cfg.tolerances.eps_cycle)
    output.write_metadata(str(path) + ".meta.json", cfg,
                          extra={"label": label.describe(), "residual": label.residual})
    if args.plot:
        png = path.with_suffix(".png")
        from . import plotting
        if writer == "classical":
            plotting.plot_classical_trajectory(traj, png)
        else:
            plotting.plot_quantum_trajectory(traj, png)
    print(f"simulate {cfg.mode}: {len(traj)} samples, attractor={label.describe()}, "
          f"wrote {path}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load_config(args).validate()
    if cfg.grid_n is None:
        cfg.grid_n = 21
    g = _resolve_game(cfg)
    sweep = experiments.basin_sweep(g, mode=cfg.mode, grid_n=cfg.grid_n,
                                    gamma=cfg.dynamics.gamma, params=_int_params(cfg),
                                    eps_conv=cfg.tolerances.eps_conv,
                                    eps_cycle=cfg.tolerances.eps_cycle)
    path = _out_path(cfg, f"sweep-{cfg.mode}-{cfg.grid_n}")
    output.write_sweep_csv(path, sweep)
    output.write_metadata(str(path) + ".meta.json", cfg,
                          extra={"summary": dict(sweep.summary)})
    if args.plot:
        from . import plotting
        plotting.plot_sweep(sweep, path.with_suffix(".png"))
    summary = ", ".join(f"{k}:{v}" for k, v in sorted(sweep.summary.items()))
    print(f"sweep {cfg.mode} grid {cfg.grid_n}: {summary}, wrote {path}")
    return EXIT_OK


def cmd_match(args) -> int:
    cfg = _load_config(args).validate()
    if cfg.mode == "classical":
        cfg.mode = "mixed"
    g = _resolve_game(cfg)
    d = cfg.dynamics
    q_init = quantum.LocalQuantumState.from_angles(cfg.init.theta0, cfg.init.alpha0)
    c_share = cfg.init.y0 if cfg.quantum_player == 0 else cfg.init.x0
    result = experiments.mixed_match(
        g, cfg.quantum_player, q_init, MixedStrategy.from_prob(c_share),
        quantum.QuantumParams(gamma=d.gamma, dt=d.dt, t_max=d.t_max, stride=d.stride,
                              mode=d.hamiltonian_mode, renormalize=d.renormalize))
    path = _out_path(cfg, "match")
    output.write_mixed_csv(path, result.traj)
    extra = {"acc_a": result.acc_a, "acc_b": result.acc_b,
             "label": result.label.describe(), "baseline": result.baseline}
    output.write_metadata(str(path) + ".meta.json", cfg, extra=extra)
    if args.plot:
        from . import plotting
        plotting.plot_mixed_trajectory(result.traj, path.with_suffix(".png"))
    base = ""
    if result.baseline:
        base = f" (classical baseline acc_a={result.baseline['acc_a']:.6g})"
    print(f"match quantum_player={cfg.quantum_player} mode={d.hamiltonian_mode}: "
          f"acc_a={result.acc_a:.6g} acc_b={result.acc_b:.6g} "
          f"label={result.label.describe()}{base}, wrote {path}")
    return EXIT_OK


def cmd_verify(args) -> int:
    ok = verify.run_all()
    return EXIT_OK if ok else EXIT_VERIFY


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"analyze": cmd_analyze, "simulate": cmd_simulate,
                "sweep": cmd_sweep, "match": cmd_match, "verify": cmd_verify}
    try:
        return handlers[args.command](args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (NumericalError, OutputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except json.JSONDecodeError as exc:
        print(f"error: invalid config file: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
