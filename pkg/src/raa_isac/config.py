"""INI-style experiment configuration.

Sections ``[array]``, ``[ofdm]``, ``[scenario]``, ``[pipeline]``,
``[montecarlo]`` and ``[output]``. Missing keys take the system-settings
defaults (39 GHz, 512 x 2048 OFDM grid, M = 128, N = 201, 8 RF chains,
Pt/sigma^2 = 20 dB); unknown keys are rejected.
"""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .array_model import ElementPattern, RaaConfig, UlaConfig, design_orientations
from .signal_model import OfdmConfig


class ConfigError(ValueError):
    """Parse or validation failure; the message names the line or invariant."""


@dataclass(frozen=True)
class ArraySection:
    M: int = 128
    N: int | None = None
    N_RF: int = 8
    eta_max_deg: float = 90.0
    N_prime: int | None = None
    raa_g0_db: float = 5.1335
    raa_theta3db_deg: float = 54.0
    ula_g0_db: float = 0.0
    ula_theta3db_deg: float = 180.0
    iso_g0_db: float = -2.816


@dataclass(frozen=True)
class OfdmSection:
    f_c: float = 39e9
    B: float | None = None
    N_sc: int = 512
    M_sym: int = 2048
    delta_f: float = 120e3
    T_cp: float = 9e-6 - 1 / 120e3
    P_t: float = 1.0
    Pt_over_sigma2_db: float = 20.0


@dataclass(frozen=True)
class ScenarioSection:
    centroids_deg: tuple = (0.0, 20.0, 40.0, 60.0)
    swarm_size: int = 5
    spacing_deg: float = 0.5
    delay_mean: float = 1e-6 / 3
    delay_var: float = 4e-16
    doppler_mean: float = 300.0
    doppler_var: float = 6400.0
    path_gain_db: float = 0.0


@dataclass(frozen=True)
class PipelineSection:
    grid_step_deg: float = 0.02
    grid_limit_deg: float = 89.9
    pad_p: int = 8
    pad_q: int = 8
    source_count: int | None = None
    min_separation_deg: float | None = None
    min_prominence_db: float = 10.0
    coverage_db: float = 20.0
    probe_symbols: int = 1


@dataclass(frozen=True)
class MonteCarloSection:
    trials: int = 20
    seed: int = 2025
    rate_trials: int = 40
    workers: int = 1


@dataclass(frozen=True)
class OutputSection:
    directory: str = "results"


@dataclass(frozen=True)
class ExperimentConfig:
    array: ArraySection = field(default_factory=ArraySection)
    ofdm: OfdmSection = field(default_factory=OfdmSection)
    scenario: ScenarioSection = field(default_factory=ScenarioSection)
    pipeline: PipelineSection = field(default_factory=PipelineSection)
    montecarlo: MonteCarloSection = field(default_factory=MonteCarloSection)
    output: OutputSection = field(default_factory=OutputSection)

    # builders

    def raa(self) -> RaaConfig:
        a = self.array
        element = ElementPattern(a.raa_g0_db, np.deg2rad(a.raa_theta3db_deg))
        return RaaConfig.design(a.M, np.deg2rad(a.eta_max_deg), self.ofdm.f_c, element, N=a.N)

    def ula(self, isotropic: bool = False) -> UlaConfig:
        a = self.array
        if isotropic:
            element = ElementPattern(a.iso_g0_db, kind="isotropic")
        else:
            element = ElementPattern(a.ula_g0_db, np.deg2rad(a.ula_theta3db_deg))
        return UlaConfig(a.M, element, a.N_prime)

    def ofdm_config(self) -> OfdmConfig:
        o = self.ofdm
        noise_var = o.P_t / 10 ** (o.Pt_over_sigma2_db / 10)
        return OfdmConfig(f_c=o.f_c, n_sc=o.N_sc, m_sym=o.M_sym, delta_f=o.delta_f,
                          t_cp=o.T_cp, tx_power=o.P_t, noise_var=noise_var, n_rf=self.array.N_RF)

    @property
    def source_count(self) -> int:
        sc = self.pipeline.source_count
        return self.scenario.swarm_size if sc is None else sc

    def music_grid(self) -> np.ndarray:
        p = self.pipeline
        k = int(np.floor(p.grid_limit_deg / p.grid_step_deg + 1e-9))
        return np.deg2rad(np.arange(-k, k + 1) * p.grid_step_deg)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def fingerprint(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, default=repr)
        return hashlib.sha256(blob.encode()).hexdigest()

    def replace(self, **sections) -> "ExperimentConfig":
        """Return a copy with per-section overrides, e.g. ``replace(ofdm={"N_sc": 64})``.

        Derived quantities (N, N_prime, B) are re-derived when the values they
        depend on change and they are not overridden explicitly.
        """
        sections = {name: dict(vals) for name, vals in sections.items()}
        arr = sections.get("array", {})
        if {"M", "eta_max_deg"} & arr.keys():
            arr.setdefault("N", None)
            arr.setdefault("N_prime", None)
        ofd = sections.get("ofdm", {})
        if {"N_sc", "delta_f"} & ofd.keys():
            ofd.setdefault("B", None)
        updated = {name: dataclasses.replace(getattr(self, name), **vals) for name, vals in sections.items()}
        cfg = normalize(dataclasses.replace(self, **updated))
        validate(cfg)
        return cfg


_SECTIONS = {
    "array": ArraySection,
    "ofdm": OfdmSection,
    "scenario": ScenarioSection,
    "pipeline": PipelineSection,
    "montecarlo": MonteCarloSection,
    "output": OutputSection,
}


def _convert(raw: str, f: dataclasses.Field, where: str):
    kind = f.type if isinstance(f.type, str) else getattr(f.type, "__name__", str(f.type))
    text = raw.strip()
    try:
        if kind.startswith("tuple"):
            return tuple(float(v) for v in text.replace(",", " ").split())
        if text.lower() in ("", "none") and "None" in kind:
            return None
        if kind.startswith("int"):
            value = float(text)
            if value != int(value):
                raise ValueError("not an integer")
            return int(value)
        if kind.startswith("float"):
            return float(text)
        return text
    except ValueError as exc:
        raise ConfigError(f"{where}: cannot parse {raw!r} ({exc})") from None


def parse_config(text: str, source: str = "<string>") -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    # remember the line each key came from for error messages
    lines = {}
    section = None
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if s.startswith("[") and s.endswith("]"):
            section = s[1:-1].strip()
        elif section and "=" in s and not s.startswith(("#", ";")):
            lines[(section, s.split("=", 1)[0].strip())] = lineno
    sections = {}
    for name in parser.sections():
        if name not in _SECTIONS:
            raise ConfigError(f"{source}: unknown section [{name}]")
        cls = _SECTIONS[name]
        fields = {f.name: f for f in dataclasses.fields(cls)}
        values = {}
        for key, raw in parser.items(name):
            where = f"{source}:{lines.get((name, key), '?')}"
            if key not in fields:
                raise ConfigError(f"{where}: unknown key {key!r} in [{name}]")
            values[key] = _convert(raw, fields[key], where)
        sections[name] = cls(**values)
    cfg = ExperimentConfig(**sections)
    validate(cfg)
    return normalize(cfg)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    return parse_config(path.read_text(), str(path))


def preset_text(name: str) -> str:
    try:
        return resources.files("raa_isac.presets").joinpath(f"{name}.cfg").read_text()
    except FileNotFoundError:
        raise ConfigError(f"unknown preset {name!r}") from None


def load_preset(name: str) -> ExperimentConfig:
    return parse_config(preset_text(name), f"preset:{name}")


def resolve_config(source: str | None) -> ExperimentConfig:
    """Path to a config file, a bundled preset name, or None for defaults."""
    if source is None:
        return default_config()
    if Path(source).exists():
        return load_config(source)
    stem = Path(source).stem
    return load_preset(stem)


def normalize(cfg: ExperimentConfig) -> ExperimentConfig:
    """Fill the derived keys N, N_prime and B left unset."""
    a, o = cfg.array, cfg.ofdm
    n = a.N if a.N is not None else design_orientations(a.M, np.deg2rad(a.eta_max_deg))[0]
    array = dataclasses.replace(a, N=n, N_prime=a.M if a.N_prime is None else a.N_prime)
    ofdm = dataclasses.replace(o, B=o.N_sc * o.delta_f if o.B is None else o.B)
    return dataclasses.replace(cfg, array=array, ofdm=ofdm)


def default_config() -> ExperimentConfig:
    """All-defaults configuration with derived keys filled in."""
    return normalize(ExperimentConfig())


def validate(cfg: ExperimentConfig) -> None:
    a, o, s, p, mc = cfg.array, cfg.ofdm, cfg.scenario, cfg.pipeline, cfg.montecarlo
    if a.M < 2:
        raise ConfigError("array.M must be >= 2")
    if not 0 < a.eta_max_deg <= 90:
        raise ConfigError("array.eta_max_deg must lie in (0, 90]")
    n_designed, _ = design_orientations(a.M, np.deg2rad(a.eta_max_deg))
    n_sulas = n_designed if a.N is None else a.N
    if a.N is not None and (a.N % 2 != 1 or a.N > n_designed or a.N < 1):
        raise ConfigError(f"array.N={a.N} must be odd and <= {n_designed} (designed count for M={a.M})")
    n_codewords = a.M if a.N_prime is None else a.N_prime
    if not 1 <= a.N_RF <= n_sulas:
        raise ConfigError(f"array.N_RF={a.N_RF} violates N_RF <= N={n_sulas}")
    if a.N_RF > n_codewords:
        raise ConfigError(f"array.N_RF={a.N_RF} violates N_RF <= N'={n_codewords}")
    if o.N_sc < 1 or o.M_sym < 1 or o.delta_f <= 0 or o.T_cp <= 0 or o.f_c <= 0 or o.P_t <= 0:
        raise ConfigError("ofdm sizes, delta_f, T_cp, f_c and P_t must be positive")
    if o.B is not None and abs(o.B - o.N_sc * o.delta_f) > 1e-6 * o.B:
        raise ConfigError(f"ofdm.B={o.B:g} violates B = N_sc * delta_f = {o.N_sc * o.delta_f:g}")
    if s.swarm_size < 1:
        raise ConfigError("scenario.swarm_size must be >= 1")
    if not 0 < s.delay_mean < o.T_cp:
        raise ConfigError("scenario.delay_mean must lie in (0, T_cp)")
    if s.delay_var < 0 or s.doppler_var < 0:
        raise ConfigError("scenario variances must be non-negative")
    half_span = (s.swarm_size - 1) / 2 * s.spacing_deg
    for c in s.centroids_deg:
        if c - half_span <= -90 or c + half_span > 90:
            raise ConfigError(f"scenario centroid {c} deg puts swarm AoAs outside (-90, 90]")
    if not cfg.source_count < a.N_RF:
        raise ConfigError(f"source_count={cfg.source_count} must be < N_RF={a.N_RF}")
    if p.pad_p < 1 or p.pad_q < 1:
        raise ConfigError("pipeline pads must be >= 1")
    if p.grid_step_deg <= 0 or not 0 < p.grid_limit_deg < 90:
        raise ConfigError("pipeline grid must have positive step and limit in (0, 90)")
    if p.coverage_db <= 0:
        raise ConfigError("pipeline.coverage_db must be positive")
    if mc.trials < 1 or mc.rate_trials < 1:
        raise ConfigError("montecarlo.trials (Q) must be >= 1")
    if mc.workers < 1:
        raise ConfigError("montecarlo.workers must be >= 1")


def dump_config(cfg: ExperimentConfig) -> str:
    """Serialise back to the INI format (round-trips through :func:`parse_config`)."""
    out = []
    for name in _SECTIONS:
        out.append(f"[{name}]")
        for key, value in dataclasses.asdict(getattr(cfg, name)).items():
            if value is None:
                continue
            if isinstance(value, (tuple, list)):
                value = ", ".join(repr(float(v)) for v in value)
            elif isinstance(value, float):
                value = repr(value)
            out.append(f"{key} = {value}")
        out.append("")
    return "\n".join(out)
