"""Single-shot and Monte-Carlo RAA vs ULA-HBF campaigns."""

from __future__ import annotations

import dataclasses
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .comms import instantaneous_rate
from .config import ExperimentConfig
from .io import write_rows
from .metrics import average_missing_shots, match_estimates, matched_squared_errors
from .sensing import EstimationResult, safe_pipeline
from .signal_model import (SymbolGrid, data_removal, make_swarm_scenario, probe_outputs,
                           select_rays_energy, synthesize_tensor)

FRONTENDS = ("raa", "ula")


@dataclass
class RunManifest:
    config_hash: str
    seed: int
    files: list
    version: str = __version__
    timings: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    def write(self, path) -> None:
        lines = [f"config_hash: {self.config_hash}", f"seed: {self.seed}", f"version: {self.version}"]
        lines += [f"file: {f}" for f in self.files]
        lines += [f"timing_s.{k}: {v:.3f}" for k, v in self.timings.items()]
        lines += [f"failure: {f}" for f in self.failures] or ["failures: none"]
        Path(path).write_text("\n".join(lines) + "\n")


def trial_seed(master: int, centroid_index: int, trial: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([master, centroid_index, trial])


def draw_scenario(cfg: ExperimentConfig, centroid_deg: float, seed):
    s = cfg.scenario
    ofdm = cfg.ofdm_config()
    paths = make_swarm_scenario(np.deg2rad(centroid_deg), s.swarm_size, np.deg2rad(s.spacing_deg),
                                s.delay_mean, s.delay_var, s.doppler_mean, s.doppler_var,
                                seed, ofdm.t_cp)
    scale = 10 ** (s.path_gain_db / 20)
    return [dataclasses.replace(p, gain=p.gain * scale) for p in paths]


def front_end(cfg: ExperimentConfig, name: str):
    if name == "raa":
        return cfg.raa()
    if name == "ula":
        return cfg.ula()
    if name == "ula_iso":
        return cfg.ula(isotropic=True)
    raise ValueError(f"unknown front-end {name!r}")


def acquire(cfg: ExperimentConfig, paths, array, grid: SymbolGrid, probe_seed, noise_seed, noiseless=False):
    """Probe-select the RF chains, synthesise and strip the data symbols."""
    ofdm = cfg.ofdm_config()
    probe = probe_outputs(paths, array, ofdm, None if noiseless else probe_seed, cfg.pipeline.probe_symbols)
    sel = select_rays_energy(probe, ofdm.n_rf, array)
    y = synthesize_tensor(paths, array, ofdm, sel, grid, None if noiseless else noise_seed)
    return sel, data_removal(y, grid)


def estimate(cfg: ExperimentConfig, y, array, sel, keep_maps=False) -> EstimationResult:
    p = cfg.pipeline
    min_sep = None if p.min_separation_deg is None else np.deg2rad(p.min_separation_deg)
    return safe_pipeline(y, array, sel, cfg.ofdm_config(), cfg.source_count, grid=cfg.music_grid(),
                         pads=(p.pad_p, p.pad_q), min_separation=min_sep,
                         min_prominence_db=p.min_prominence_db, coverage_db=p.coverage_db,
                         keep_maps=keep_maps)


def run_trial(cfg: ExperimentConfig, centroid_index: int, trial: int, noiseless: bool = False) -> dict:
    """One scenario draw processed by both front-ends (plus the rate comparison)."""
    centroid = cfg.scenario.centroids_deg[centroid_index]
    seeds = trial_seed(cfg.montecarlo.seed, centroid_index, trial).spawn(8)
    ofdm = cfg.ofdm_config()
    paths = draw_scenario(cfg, centroid, seeds[0])
    grid = SymbolGrid.qpsk(ofdm.n_sc, ofdm.m_sym, ofdm.tx_power, seeds[1])
    record = {"centroid_index": centroid_index, "centroid_deg": centroid, "trial": trial,
              "paths": paths, "results": {}, "rates": {}, "failures": []}
    for k, name in enumerate(FRONTENDS):
        array = front_end(cfg, name)
        try:
            sel, y = acquire(cfg, paths, array, grid, seeds[2 + 2 * k], seeds[3 + 2 * k], noiseless)
            result = estimate(cfg, y, array, sel)
            record["rates"][name] = instantaneous_rate(paths, array, sel, ofdm)[1]
        except Exception as exc:  # recorded, the campaign continues
            result = EstimationResult([], [], [], np.array([]), np.array([]), failure=f"{type(exc).__name__}: {exc}")
            record["rates"].setdefault(name, float("nan"))
        if result.failure:
            record["failures"].append(f"centroid={centroid:g} trial={trial} {name}: {result.failure}")
        result.music_grid = result.music_power = None  # keep records small
        record["results"][name] = result
    iso = front_end(cfg, "ula_iso")
    probe = probe_outputs(paths, iso, ofdm, None if noiseless else seeds[6], cfg.pipeline.probe_symbols)
    record["rates"]["ula_iso"] = instantaneous_rate(paths, iso, select_rays_energy(probe, ofdm.n_rf, iso), ofdm)[1]
    return record


def _run_trial_args(args):
    return run_trial(*args)


def run_trials(cfg: ExperimentConfig, noiseless: bool = False) -> list:
    tasks = [(cfg, ci, t, noiseless) for ci in range(len(cfg.scenario.centroids_deg))
             for t in range(cfg.montecarlo.trials)]
    if cfg.montecarlo.workers > 1:
        with ProcessPoolExecutor(cfg.montecarlo.workers) as pool:
            records = list(pool.map(_run_trial_args, tasks))
    else:
        records = [_run_trial_args(t) for t in tasks]
    return sorted(records, key=lambda r: (r["centroid_index"], r["trial"]))


def summarize(cfg: ExperimentConfig, records: list) -> list:
    """Per-centroid dict rows of RMSE (deg), missing shots and mean rates."""
    rows = []
    for ci, centroid in enumerate(cfg.scenario.centroids_deg):
        recs = [r for r in records if r["centroid_index"] == ci]
        row = {"centroid_deg": centroid}
        for name in FRONTENDS:
            runs, se = [], []
            for r in recs:
                true = [p.aoa for p in r["paths"]]
                est = r["results"][name].aoas
                runs.append((true, est))
                se.extend(matched_squared_errors(true, est))
            row[f"rmse_{name}_deg"] = float(np.rad2deg(np.sqrt(np.mean(se)))) if se else float("nan")
            row[f"eps_{name}"] = average_missing_shots(runs)
        for name in ("raa", "ula", "ula_iso"):
            vals = np.array([r["rates"][name] for r in recs], dtype=float)
            row[f"rate_{name}"] = float(np.nanmean(vals))
            row[f"stderr_{name}"] = float(np.nanstd(vals, ddof=1) / np.sqrt(len(vals))) if len(vals) > 1 else float("nan")
        rows.append(row)
    return rows


SUMMARY_COLUMNS = ["centroid_deg", "rmse_raa_deg", "rmse_ula_deg", "eps_raa", "eps_ula", "rate_raa", "rate_ula"]
RATE_COLUMNS = ["centroid_deg", "rate_raa", "rate_ula_directional", "rate_ula_isotropic",
                "stderr_raa", "stderr_ula_directional", "stderr_ula_isotropic"]
TRIAL_COLUMNS = ["trial", "centroid_deg", "array", "target", "true_aoa_deg", "true_delay_s", "true_doppler_hz",
                 "est_aoa_deg", "est_delay_s", "est_doppler_hz"]


def _trial_rows(records):
    for r in records:
        for name in FRONTENDS:
            res = r["results"][name]
            est_i, true_i = match_estimates([p.aoa for p in r["paths"]], res.aoas)
            match = dict(zip(true_i.tolist(), est_i.tolist()))
            for k, p in enumerate(r["paths"]):
                e = match.get(k)
                est = (np.rad2deg(res.aoas[e]), res.delays[e], res.dopplers[e]) if e is not None else (None,) * 3
                yield (r["trial"], r["centroid_deg"], name, k, np.rad2deg(p.aoa), p.delay, p.doppler) + est


def run_montecarlo(cfg: ExperimentConfig, out_dir=None, noiseless: bool = False) -> RunManifest:
    """Run the campaign and write summary.csv, trials.csv, rates.csv and manifest.txt."""
    out = Path(out_dir if out_dir is not None else cfg.output.directory)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    records = run_trials(cfg, noiseless)
    t1 = time.perf_counter()
    rows = summarize(cfg, records)
    files = [out / "summary.csv", out / "trials.csv", out / "rates.csv"]
    write_rows(files[0], SUMMARY_COLUMNS, [[r[c] for c in SUMMARY_COLUMNS] for r in rows])
    write_rows(files[1], TRIAL_COLUMNS, _trial_rows(records))
    write_rows(files[2], RATE_COLUMNS,
               [[r["centroid_deg"], r["rate_raa"], r["rate_ula"], r["rate_ula_iso"],
                 r["stderr_raa"], r["stderr_ula"], r["stderr_ula_iso"]] for r in rows])
    failures = [f for r in records for f in r["failures"]]
    manifest = RunManifest(cfg.fingerprint(), cfg.montecarlo.seed, [str(f) for f in files],
                           timings={"trials": t1 - t0, "total": time.perf_counter() - t0}, failures=failures)
    manifest.files.append(str(out / "manifest.txt"))
    manifest.write(out / "manifest.txt")
    manifest.summary = rows
    return manifest
