"""Command-line entry point: ``raa-isac <subcommand> [--config ...] [--seed ...] [--out ...]``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .beam_analysis import (ResolutionError, gamma_raa, raa_beam_pattern, raa_resolution,
                            ula_beam_pattern, ula_domain, ula_resolution)
from .array_model import RaaConfig, UlaConfig
from .comms import expected_rate
from .config import ConfigError, ExperimentConfig, resolve_config
from .experiment import RATE_COLUMNS, acquire, draw_scenario, estimate, front_end, run_montecarlo
from .io import (read_scenario, read_tensor, write_dd_map, write_estimates, write_music, write_rows,
                 write_scenario, write_tensor)
from .metrics import aoa_rmse
from .signal_model import SymbolGrid, data_removal, probe_outputs, select_rays_energy, synthesize_tensor

EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="INI config file or bundled preset name (paper_table1, paper_desk)")
    p.add_argument("--seed", type=int, help="master seed (overrides [montecarlo] seed)")
    p.add_argument("--out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="raa-isac", description="Ray antenna array ISAC simulator")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("beampattern", help="RAA and ULA beam patterns as CSV")
    _common(p)
    p.add_argument("--M", type=int)
    p.add_argument("--theta-prime", type=float, nargs="+", default=[0.0, 30.0, 60.0], help="degrees")
    p.add_argument("--step", type=float, default=0.05, help="theta grid step in degrees")

    p = sub.add_parser("resolution", help="angular resolution versus desired direction")
    _common(p)
    p.add_argument("--M", type=int)
    p.add_argument("--step", type=float, default=0.5, help="theta' grid step in degrees")

    p = sub.add_parser("simulate", help="synthesize a received tensor for one scenario draw")
    _common(p)
    p.add_argument("--array", choices=("raa", "ula"), default="raa")
    p.add_argument("--centroid", type=float, help="swarm centroid in degrees (default: first in config)")
    p.add_argument("--kind", choices=("raw", "data_removed"), default="data_removed")
    p.add_argument("--noiseless", action="store_true")

    p = sub.add_parser("sense", help="run the estimation pipeline on a tensor file or a fresh scenario")
    _common(p)
    p.add_argument("--tensor", help="tensor file written by 'simulate' (data_removed kind)")
    p.add_argument("--scenario", help="scenario CSV with the true paths (for RMSE reporting)")
    p.add_argument("--array", choices=("raa", "ula"), default="raa")
    p.add_argument("--centroid", type=float)
    p.add_argument("--noiseless", action="store_true")

    p = sub.add_parser("rate", help="expected uplink rate for RAA and ULA front-ends")
    _common(p)
    p.add_argument("--trials", type=int, help="rate Monte-Carlo trials (default: [montecarlo] rate_trials)")

    p = sub.add_parser("montecarlo", help="full RAA vs ULA campaign")
    _common(p)
    p.add_argument("--trials", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--noiseless", action="store_true")

    p = sub.add_parser("oracle-check", help="run the independent reference checks")
    _common(p)
    return parser


def _load(args) -> ExperimentConfig:
    cfg = resolve_config(args.config)
    if args.seed is not None:
        cfg = cfg.replace(montecarlo={"seed": args.seed})
    return cfg


def _out_dir(args, cfg: ExperimentConfig) -> Path:
    out = Path(args.out if args.out else cfg.output.directory)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_beampattern(args, cfg):
    M = args.M or cfg.array.M
    if args.M:
        cfg = cfg.replace(array={"M": M})
    raa, ula = cfg.raa(), cfg.ula()
    theta = np.deg2rad(np.arange(-90, 90 + 1e-9, args.step))
    rows = []
    for tp_deg in args.theta_prime:
        tp = np.deg2rad(tp_deg)
        for name, pat in (("raa", raa_beam_pattern(theta, tp, raa)), ("ula", ula_beam_pattern(theta, tp, ula))):
            db = 20 * np.log10(np.maximum(pat, 1e-300))
            rows.extend((t, tp_deg, name, v) for t, v in zip(np.rad2deg(theta), db))
    path = _out_dir(args, cfg) / "beampattern.csv"
    write_rows(path, ["theta_deg", "theta_prime_deg", "array", "magnitude_db"], rows)
    print(path)


def cmd_resolution(args, cfg):
    M = args.M or cfg.array.M
    raa = RaaConfig.design(M)
    ula = UlaConfig(M)
    k = int(np.floor(np.rad2deg(ula_domain(M)) / args.step + 1e-9))
    grid_deg = np.arange(-k, k + 1) * args.step
    rows = []
    for tp_deg in grid_deg:
        tp = np.deg2rad(tp_deg)
        try:
            g_ula = ula_resolution(ula, tp).resolution
        except ResolutionError:
            g_ula = None
        rows.append((tp_deg, raa_resolution(raa, tp).resolution, g_ula))
    path = _out_dir(args, cfg) / f"resolution_M{M}.csv"
    write_rows(path, ["theta_prime_deg", "gamma_raa_rad", "gamma_ula_rad"], rows)
    print(f"{path} (gamma_raa closed form {gamma_raa(M):.12g} rad)")


def _fresh_scenario(args, cfg):
    centroid = cfg.scenario.centroids_deg[0] if args.centroid is None else args.centroid
    seeds = np.random.SeedSequence([cfg.montecarlo.seed, 0, 0]).spawn(4)
    ofdm = cfg.ofdm_config()
    paths = draw_scenario(cfg, centroid, seeds[0])
    grid = SymbolGrid.qpsk(ofdm.n_sc, ofdm.m_sym, ofdm.tx_power, seeds[1])
    return paths, grid, seeds[2], seeds[3]


def cmd_simulate(args, cfg):
    ofdm = cfg.ofdm_config()
    array = front_end(cfg, args.array)
    paths, grid, probe_seed, noise_seed = _fresh_scenario(args, cfg)
    probe = probe_outputs(paths, array, ofdm, None if args.noiseless else probe_seed, cfg.pipeline.probe_symbols)
    sel = select_rays_energy(probe, ofdm.n_rf, array)
    y = synthesize_tensor(paths, array, ofdm, sel, grid, None if args.noiseless else noise_seed)
    if args.kind == "data_removed":
        y = data_removal(y, grid)
    out = _out_dir(args, cfg)
    write_tensor(out / "tensor.bin", y, sel, args.array)
    write_scenario(out / "scenario.csv", paths)
    print(out / "tensor.bin")


def cmd_sense(args, cfg):
    out = _out_dir(args, cfg)
    paths = read_scenario(args.scenario) if args.scenario else None
    if args.tensor:
        y, sel, frontend = read_tensor(args.tensor)
        if y.kind != "data_removed":
            raise ValueError("sense expects a data_removed tensor")
        ofdm = cfg.ofdm_config()
        if y.samples.shape[1:] != (ofdm.n_sc, ofdm.m_sym):
            raise ValueError(f"tensor grid {y.samples.shape[1:]} does not match config ({ofdm.n_sc}, {ofdm.m_sym})")
        array = front_end(cfg, frontend)
    else:
        array = front_end(cfg, args.array)
        fresh, grid, probe_seed, noise_seed = _fresh_scenario(args, cfg)
        paths = paths or fresh
        sel, y = acquire(cfg, fresh, array, grid, probe_seed, noise_seed, args.noiseless)
    result = estimate(cfg, y, array, sel, keep_maps=True)
    write_estimates(out / "estimates.csv", result)
    if result.music_grid is not None and len(result.music_grid):
        write_music(out / "music.csv", result.music_grid, result.music_power)
    for k, dd in enumerate(result.dd_maps or []):
        write_dd_map(out / f"dd_map_{k}.csv", dd, (cfg.pipeline.pad_p, cfg.pipeline.pad_q), cfg.ofdm_config())
    print(f"detected {result.detected_count} of {cfg.source_count}")
    if paths is not None:
        rmse = aoa_rmse([p.aoa for p in paths], result.aoas)
        print(f"aoa_rmse_deg {np.rad2deg(rmse):.6g}")
    if result.failure:
        print(f"pipeline failure: {result.failure}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_rate(args, cfg):
    ofdm = cfg.ofdm_config()
    trials = args.trials or cfg.montecarlo.rate_trials
    rows = []
    for ci, centroid in enumerate(cfg.scenario.centroids_deg):
        sampler = lambda seed, c=centroid: draw_scenario(cfg, c, seed)
        reps = [expected_rate(sampler, front_end(cfg, name), ofdm, trials, seed=[cfg.montecarlo.seed, ci])
                for name in ("raa", "ula", "ula_iso")]
        rows.append([centroid] + [r.rate for r in reps] + [r.stderr for r in reps])
        print(f"centroid {centroid:g} deg: " + " ".join(f"{n}={r.rate:.4f}" for n, r in zip(("raa", "ula", "ula_iso"), reps)))
    write_rows(_out_dir(args, cfg) / "rates.csv", RATE_COLUMNS, rows)


def cmd_montecarlo(args, cfg):
    overrides = {}
    if args.trials:
        overrides["trials"] = args.trials
    if args.workers:
        overrides["workers"] = args.workers
    if overrides:
        cfg = cfg.replace(montecarlo=overrides)
    manifest = run_montecarlo(cfg, _out_dir(args, cfg), noiseless=args.noiseless)
    for row in manifest.summary:
        print(f"centroid {row['centroid_deg']:g} deg: rmse_raa={row['rmse_raa_deg']:.4g} "
              f"rmse_ula={row['rmse_ula_deg']:.4g} eps_raa={row['eps_raa']:g} eps_ula={row['eps_ula']:g}")
    print(f"manifest: {manifest.files[-1]} ({len(manifest.failures)} trial failures)")


def cmd_oracle_check(args, cfg):
    from .oracles import run_all

    results = run_all()
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.ok for r in results) else EXIT_RUNTIME


COMMANDS = {
    "beampattern": cmd_beampattern,
    "resolution": cmd_resolution,
    "simulate": cmd_simulate,
    "sense": cmd_sense,
    "rate": cmd_rate,
    "montecarlo": cmd_montecarlo,
    "oracle-check": cmd_oracle_check,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # argparse help/usage
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        cfg = _load(args)
        status = COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK if status is None else status


if __name__ == "__main__":
    sys.exit(main())
