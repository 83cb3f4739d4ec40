"""Command-line front end: `rda-wave <subcommand> --config FILE [options]`.

Exit codes: 0 all assertions pass, 1 assertion failure, 2 usage/config error,
3 numerical divergence.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, parse_config
from .energy import PSI_TERM_NAMES, EnergyObserver, energy_identity_residual
from .experiments import (TemperedFamilySpec, absorption_experiment,
                          cocycle_experiment, gaussian_state,
                          pullback_convergence_experiment, random_state,
                          tail_experiment)
from .grid import Field, norm_h1, norm_l2
from .model import Model
from .oracles import run_convergence_study
from .paths import generate_path
from .reporting import header_lines, read_embedded_hash, write_csv, write_json
from .solver import DivergenceError, SolveSpec, StateUV, evolve, reconstruct_z

EXIT_OK = 0
EXIT_ASSERT = 1
EXIT_USAGE = 2
EXIT_DIVERGED = 3

SUBCOMMANDS = ("simulate", "absorb", "tails", "pullback", "cocycle", "oracle", "check")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rda-wave",
        description="Pathwise simulation and random-attractor diagnostics "
                    "for the damped stochastic wave equation.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="flat key=value config file")
        p.add_argument("--seed-panel", type=int, default=None,
                       help="override the seed list with seeds 0..N-1")
        p.add_argument("--deterministic", action="store_true",
                       help="omit timestamps so repeated runs are byte-identical")
        p.add_argument("--out", default="out", help="output directory")
    return parser


def _load(args) -> RunConfig:
    text = Path(args.config).read_text()
    cfg = parse_config(text)
    if args.seed_panel is not None:
        cfg.values["path.seeds"] = list(range(args.seed_panel))
    return cfg


def _paths_for(cfg: RunConfig, t_max: float = 0.0):
    return [generate_path(seed, cfg["path.t_min"], t_max, cfg.dt_path)
            for seed in cfg.seeds]


def _initial_state(cfg: RunConfig, model: Model, seed: int):
    kind = cfg["experiment.initial"]
    radius = cfg["experiment.radius_0"]
    if kind == "zero":
        z = np.zeros(model.grid.shape)
        return Field(model.grid, z), Field(model.grid, z.copy())
    if kind == "gaussian":
        return gaussian_state(model.grid, radius)
    return random_state(model.grid, seed, radius)


def _emit_report(report, out_dir: Path, name: str, cfg: RunConfig,
                 deterministic: bool) -> int:
    write_json(out_dir / f"{name}_report.json", report.to_jsonable(),
               cfg.hash, deterministic)
    text = report.to_text()
    (out_dir / f"{name}_report.txt").write_text(
        f"# config_hash={cfg.hash}\n" + text)
    sys.stdout.write(text)
    return EXIT_OK if report.passed else EXIT_ASSERT


def _cmd_simulate(cfg: RunConfig, out_dir: Path, deterministic: bool) -> int:
    model = cfg.build_model()
    spec = cfg.build_solve_spec()
    seed = cfg.seeds[0]
    t_end = cfg["experiment.t_end"]
    path = generate_path(seed, cfg["path.t_min"], t_end, cfg.dt_path)
    u0, z0 = _initial_state(cfg, model, seed)
    v0 = Field(model.grid, z0.values - model.h.values * path.evaluate(0.0))

    obs = EnergyObserver(path, model, k_list=cfg["experiment.k_list"])
    traj_rows = []

    def snapshot(state: StateUV) -> None:
        z = reconstruct_z(state, path, model)
        rec = obs.records[-1]
        traj_rows.append([state.t, norm_h1(state.u), norm_l2(state.v),
                          norm_l2(z), rec.E, rec.Psi]
                         + [rec.tail[k] for k in obs.k_list])

    def observer(state: StateUV) -> None:
        obs(state)
        snapshot(state)

    evolve(StateUV(u0, v0, 0.0), 0.0, t_end, path, model, spec,
           observers=[observer])

    headers = header_lines(cfg.hash, deterministic)
    tail_cols = [f"tail_k{k:g}" for k in obs.k_list]
    write_csv(out_dir / f"trajectory_seed{seed}.csv",
              ["t", "norm_u_h1", "norm_v_l2", "norm_z_l2", "E", "Psi"] + tail_cols,
              traj_rows, headers)

    res = energy_identity_residual(obs.records, model.sigma)
    term_cols = [f"term_{i + 1:02d}" for i in range(len(PSI_TERM_NAMES))]
    energy_rows = []
    for i, rec in enumerate(obs.records):
        rd = res.residual_diff[i - 1] if i >= 1 else 0.0
        energy_rows.append([rec.t, rec.E, rec.Psi]
                           + [rec.terms[name] for name in PSI_TERM_NAMES]
                           + [float(rd), float(res.residual_int[i])])
    write_csv(out_dir / f"energy_seed{seed}.csv",
              ["t", "E", "Psi"] + term_cols + ["residual_diff", "residual_int"],
              energy_rows, headers)
    sys.stdout.write(
        f"simulate: seed={seed} t_end={t_end} steps recorded={len(traj_rows)} "
        f"final E={obs.records[-1].E!r}\n")
    return EXIT_OK


def _cmd_absorb(cfg: RunConfig, out_dir: Path, deterministic: bool) -> int:
    model = cfg.build_model()
    spec = cfg.build_solve_spec()
    family = TemperedFamilySpec(
        kind="subexponential_growth" if cfg["experiment.growth_beta"] > 0 else "fixed_ball",
        radius_0=cfg["experiment.radius_0"],
        growth_beta=cfg["experiment.growth_beta"])
    report = absorption_experiment(family, cfg["experiment.tau_list"],
                                   _paths_for(cfg), model, spec,
                                   config_hash=cfg.hash)
    return _emit_report(report, out_dir, "absorb", cfg, deterministic)


def _cmd_tails(cfg: RunConfig, out_dir: Path, deterministic: bool) -> int:
    model = cfg.build_model()
    spec = cfg.build_solve_spec()
    report = tail_experiment(cfg["experiment.epsilon"], cfg["experiment.k_list"],
                             cfg["experiment.tau_list"], _paths_for(cfg),
                             model, spec, config_hash=cfg.hash,
                             initial_radius=cfg["experiment.radius_0"])
    return _emit_report(report, out_dir, "tails", cfg, deterministic)


def _cmd_pullback(cfg: RunConfig, out_dir: Path, deterministic: bool) -> int:
    model = cfg.build_model()
    spec = cfg.build_solve_spec()
    family = TemperedFamilySpec(
        kind="subexponential_growth" if cfg["experiment.growth_beta"] > 0 else "fixed_ball",
        radius_0=cfg["experiment.radius_0"],
        growth_beta=cfg["experiment.growth_beta"])
    report = pullback_convergence_experiment(family, cfg["experiment.tau_list"],
                                             _paths_for(cfg), model, spec,
                                             config_hash=cfg.hash)
    return _emit_report(report, out_dir, "pullback", cfg, deterministic)


def _cmd_cocycle(cfg: RunConfig, out_dir: Path, deterministic: bool) -> int:
    model = cfg.build_model()
    spec = cfg.build_solve_spec()
    report = cocycle_experiment(cfg["experiment.splits"], cfg.seeds, model,
                                spec, config_hash=cfg.hash,
                                initial_radius=cfg["experiment.radius_0"])
    return _emit_report(report, out_dir, "cocycle", cfg, deterministic)


def _cmd_oracle(cfg: RunConfig, out_dir: Path, deterministic: bool) -> int:
    from .model import PowerNonlinearity, make_model
    from .model import FieldProfile

    grid = cfg.build_grid()
    model = make_model(grid, alpha=cfg["model.alpha"], lam=cfg["model.lambda"],
                       nonlin=PowerNonlinearity(a=0.0, gamma=cfg["model.gamma"]),
                       g=FieldProfile("zero"), h=FieldProfile("zero"),
                       delta=cfg["model.delta"])
    study = run_convergence_study(model)
    write_json(out_dir / "oracle_report.json", study.to_jsonable(),
               cfg.hash, deterministic)
    rows = list(zip(study.dts, study.semi_implicit_errors, study.crank_nicolson_errors))
    write_csv(out_dir / "oracle_errors.csv",
              ["dt", "semi_implicit_error", "crank_nicolson_error"],
              rows, header_lines(cfg.hash, deterministic))
    ok = (min(study.semi_implicit_orders) >= 0.9
          and min(study.crank_nicolson_orders) >= 1.8)
    sys.stdout.write(
        f"oracle: semi-implicit orders {study.semi_implicit_orders}, "
        f"crank-nicolson orders {study.crank_nicolson_orders} -> "
        f"{'PASS' if ok else 'FAIL'}\n")
    return EXIT_OK if ok else EXIT_ASSERT


def _cmd_check(cfg: RunConfig, out_dir: Path, deterministic: bool) -> int:
    mismatches = []
    files = sorted(list(out_dir.glob("*.csv")) + list(out_dir.glob("*.json"))
                   + list(out_dir.glob("*.txt")))
    if not files:
        sys.stdout.write(f"check: no output files in {out_dir}\n")
        return EXIT_USAGE
    for f in files:
        embedded = read_embedded_hash(f)
        if embedded != cfg.hash:
            mismatches.append((f.name, embedded))
    for name, embedded in mismatches:
        sys.stdout.write(f"check: {name}: embedded hash {embedded!r} != {cfg.hash}\n")
    sys.stdout.write(f"check: {len(files) - len(mismatches)}/{len(files)} files match "
                     f"config hash {cfg.hash}\n")
    return EXIT_OK if not mismatches else EXIT_ASSERT


_HANDLERS = {
    "simulate": _cmd_simulate,
    "absorb": _cmd_absorb,
    "tails": _cmd_tails,
    "pullback": _cmd_pullback,
    "cocycle": _cmd_cocycle,
    "oracle": _cmd_oracle,
    "check": _cmd_check,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        cfg = _load(args)
    except FileNotFoundError as exc:
        sys.stderr.write(f"config file not found: {exc.filename}\n")
        return EXIT_USAGE
    except ConfigError as exc:
        for err in exc.errors:
            sys.stderr.write(f"config error: {err}\n")
        return EXIT_USAGE

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        return _HANDLERS[args.command](cfg, out_dir, args.deterministic)
    except DivergenceError as exc:
        sys.stderr.write(f"divergence: {exc}\n")
        return EXIT_DIVERGED
    except (ValueError, ArithmeticError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
