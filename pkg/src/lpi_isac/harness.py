"""Scenario execution, Monte-Carlo campaigns, presets and golden vectors."""

from __future__ import annotations

import csv
import json
import logging
import tempfile
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import io
from .channel import SceneConfig, Target, propagate
from .errors import FormatError, LpiSimError, WeakLosWarning
from .frame import FrameConfig, PilotLattice, build_pilot_lattice, demodulate, generate_frame, modulate
from .impair import ImpairmentMode, LpiSecret, apply_doppler, apply_phase, generate_secret
from .metrics import MaskSpec, MetricsReport, evaluate
from .rdmap import CHEBYSHEV_100, RangeDopplerMap, WindowSpec
from .rx_eve import blind_pipeline, eve_demap_and_ser, smart_pipeline
from .rx_legit import demap_and_ser, legit_pipeline, legit_receive, nearest_pilot_equalize

log = logging.getLogger(__name__)

RECEIVERS = ("legit", "blind_eve", "smart_eve")
METRIC_KEYS = ("image_sinr_db", "pslr_db", "islr_db", "ser")


class ScenarioError(LpiSimError):
    """A pipeline stage failed; the message names the scenario."""


class CampaignError(LpiSimError):
    """A Monte-Carlo trial failed; the message names the scenario and seed."""


@dataclass(frozen=True)
class Scenario:
    name: str
    frame: FrameConfig
    scene: SceneConfig
    mode: ImpairmentMode = ImpairmentMode.SUBCARRIER_WISE
    receiver: str = "legit"
    window: WindowSpec = CHEBYSHEV_100
    mask: MaskSpec = MaskSpec()
    secret_seed: int = 1
    data_seed: int = 2
    noise_seed: int = 3
    n_trials: int = 1
    geometry: str = "monostatic"
    correct_residual: bool = True

    def __post_init__(self):
        object.__setattr__(self, "mode", ImpairmentMode(self.mode))
        if self.receiver not in RECEIVERS:
            raise ValueError(f"receiver must be one of {RECEIVERS}, got {self.receiver!r}")
        if self.n_trials < 1:
            raise ValueError(f"n_trials must be >= 1, got {self.n_trials}")

    def trial(self, i: int) -> "Scenario":
        """The ``i``-th Monte-Carlo variant: secret and noise seeds XOR-ed with ``i``."""
        return replace(self, secret_seed=self.secret_seed ^ i, noise_seed=self.noise_seed ^ i)


@dataclass
class Trial:
    scenario: Scenario
    tx_grid: np.ndarray
    secret: LpiSecret
    rx: np.ndarray
    rdm: RangeDopplerMap
    report: MetricsReport
    ser: float

    def record(self) -> dict:
        s = self.scenario
        return self.report.to_record(
            scenario=s.name, seed=s.secret_seed, noise_seed=s.noise_seed, ser=self.ser,
            receiver=s.receiver, mode=s.mode.value,
        )


def expected_peak(target: Target, cfg: FrameConfig, rdm: RangeDopplerMap) -> tuple[int, int]:
    """Range bin and signed Doppler bin where ``target`` should focus on ``rdm``."""
    if rdm.grid == "pilot":
        freq_step, time_step = cfg.pilot_spacing_freq, cfg.pilot_spacing_time
    else:
        freq_step = time_step = 1
    delay_bin = 1.0 / (rdm.n_range * freq_step * cfg.subcarrier_spacing)
    doppler_bin = 1.0 / (rdm.n_doppler * time_step * cfg.symbol_duration)
    r = int(np.rint(target.delay_samples(cfg) * cfg.sample_interval / delay_bin)) % rdm.n_range
    q = int(np.rint(target.doppler / doppler_bin))
    q = (q + rdm.n_doppler // 2) % rdm.n_doppler - rdm.n_doppler // 2
    return r, q


def transmit(s: Scenario) -> tuple[PilotLattice, np.ndarray, LpiSecret, np.ndarray]:
    cfg = s.frame
    lattice = build_pilot_lattice(cfg)
    tx_grid = generate_frame(cfg, lattice, s.data_seed)
    secret = generate_secret(cfg, s.mode, s.secret_seed)
    tf = apply_doppler(modulate(apply_phase(tx_grid, secret), cfg), secret, cfg)
    return lattice, tx_grid, secret, tf


def receive(s: Scenario, rx: np.ndarray, tx_grid: np.ndarray, lattice: PilotLattice,
            secret: LpiSecret) -> tuple[RangeDopplerMap, float]:
    """Run the scenario's receiver; only the legitimate one is handed the secret."""
    cfg = s.frame
    if s.receiver == "legit":
        rdm = legit_pipeline(rx, tx_grid, secret, cfg, s.window, s.correct_residual, s.geometry)
        eq = nearest_pilot_equalize(legit_receive(rx, secret, cfg), tx_grid, lattice)
        return rdm, demap_and_ser(eq, tx_grid, lattice)
    pipeline = blind_pipeline if s.receiver == "blind_eve" else smart_pipeline
    # a weak LoS is the expected outcome under subcarrier-wise phases; log it
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", WeakLosWarning)
        rdm = pipeline(rx, tx_grid, lattice, cfg, s.window, s.geometry)
        ser = eve_demap_and_ser(demodulate(rx, cfg), tx_grid, lattice,
                                track_phase=s.receiver == "smart_eve")
    for w in caught:
        if issubclass(w.category, WeakLosWarning):
            log.info("%s: %s", s.name, w.message)
        else:
            warnings.warn(w.message, w.category, stacklevel=2)
    return rdm, ser


def score(s: Scenario, rdm: RangeDopplerMap) -> MetricsReport:
    near = None
    if s.scene.targets:
        near = expected_peak(s.scene.strongest_target(), s.frame, rdm)
    return evaluate(rdm, s.mask, near)


def simulate(s: Scenario) -> Trial:
    try:
        lattice, tx_grid, secret, tf = transmit(s)
        rx = propagate(tf, replace(s.scene, noise_seed=s.noise_seed), s.frame)
        rdm, ser = receive(s, rx, tx_grid, lattice, secret)
        report = score(s, rdm)
    except LpiSimError as exc:
        raise ScenarioError(f"scenario {s.name!r}: {exc}") from exc
    return Trial(s, tx_grid, secret, rx, rdm, report, ser)


def run_scenario(s: Scenario) -> tuple[RangeDopplerMap, MetricsReport]:
    trial = simulate(s)
    return trial.rdm, trial.report


def _trial_record(s: Scenario) -> dict:
    return simulate(s).record()


@dataclass
class CampaignResult:
    records: dict[str, list[dict]] = field(default_factory=dict)

    def summary(self) -> dict[str, dict[str, dict[str, float]]]:
        out = {}
        for name, trials in self.records.items():
            out[name] = {}
            for key in METRIC_KEYS:
                values = np.array([t[key] for t in trials], dtype=float)
                q25, q50, q75 = np.percentile(values, [25, 50, 75])
                out[name][key] = {"median": float(q50), "iqr": float(q75 - q25),
                                  "n": int(values.size)}
        return out

    def median(self, scenario: str, key: str) -> float:
        return self.summary()[scenario][key]["median"]

    def write(self, out_dir) -> list[Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        written = [io.write_json({"trials": self.records, "summary": self.summary()},
                                 out_dir / "campaign.json")]
        path = out_dir / "summary.csv"
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["scenario", *(f"{k}_{stat}" for k in METRIC_KEYS
                                           for stat in ("median", "iqr")), "n_trials"])
            for name, stats in self.summary().items():
                writer.writerow([name, *(repr(stats[k][stat]) for k in METRIC_KEYS
                                         for stat in ("median", "iqr")),
                                 stats[METRIC_KEYS[0]]["n"]])
        written.append(path)
        return written


def run_campaign(scenarios, n_trials: int | None = None, workers: int = 1) -> CampaignResult:
    """Every scenario over ``n_trials`` seeds (default: each scenario's own count)."""
    result = CampaignResult()
    for s in scenarios:
        count = n_trials if n_trials is not None else s.n_trials
        variants = [s.trial(i) for i in range(count)]
        log.info("scenario %s: %d trials", s.name, count)
        try:
            if workers > 1:
                with ProcessPoolExecutor(workers) as pool:
                    records = list(pool.map(_trial_record, variants))
            else:
                records = [_trial_record(v) for v in variants]
        except ScenarioError as exc:
            raise CampaignError(f"{exc} (campaign seed base {s.secret_seed})") from exc
        result.records[s.name] = records
    return result


# --- presets ---------------------------------------------------------------

DESK_FRAME = FrameConfig(n_subcarriers=256, n_symbols=64, cp_length=64, bandwidth=100e6,
                         carrier_freq=27e9, pilot_spacing_freq=2, pilot_spacing_time=2)
FULL_FRAME = FrameConfig(n_subcarriers=6756, n_symbols=1024, cp_length=3378, bandwidth=1e9,
                          carrier_freq=27e9, pilot_spacing_freq=2, pilot_spacing_time=2)

CANONICAL = (
    ("a_legit", "legit", ImpairmentMode.SUBCARRIER_WISE),
    ("b_blind_eve", "blind_eve", ImpairmentMode.SYMBOL_WISE),
    ("c_smart_eve_symbol_wise", "smart_eve", ImpairmentMode.SYMBOL_WISE),
    ("d_smart_eve_subcarrier_wise", "smart_eve", ImpairmentMode.SUBCARRIER_WISE),
)


def desk_scene(cfg: FrameConfig = DESK_FRAME, snr_db: float | None = 40.0,
               los_gain: complex = 1.0) -> SceneConfig:
    """LoS plus two moving echoes 20 and 23 dB below it."""
    return SceneConfig(
        targets=(Target.from_bins(0.1, 24, cfg, 8),
                 Target.from_bins(0.07 * np.exp(1j), 44, cfg, -12)),
        los_gain=los_gain, snr_db=snr_db, noise_seed=3,
    )


def full_scene(cfg: FrameConfig = FULL_FRAME, snr_db: float | None = 40.0) -> SceneConfig:
    return SceneConfig(
        targets=(Target.from_bins(0.1, 240, cfg, 40),
                 Target.from_bins(0.07 * np.exp(1j), 440, cfg, -60)),
        los_gain=1.0, snr_db=snr_db, noise_seed=3,
    )


def canonical_scenarios(frame: FrameConfig, scene: SceneConfig, **common) -> list[Scenario]:
    return [Scenario(name=name, frame=frame, scene=scene, mode=mode, receiver=receiver, **common)
            for name, receiver, mode in CANONICAL]


PRESETS = {
    "fig3": lambda: canonical_scenarios(DESK_FRAME, desk_scene(), n_trials=20),
    "fig3-full": lambda: canonical_scenarios(FULL_FRAME, full_scene(), n_trials=1),
    "golden": lambda: canonical_scenarios(DESK_FRAME, desk_scene(), n_trials=1),
}


def preset(name: str) -> list[Scenario]:
    try:
        return PRESETS[name]()
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


# --- goldens ---------------------------------------------------------------

def golden_paths(name: str, out_dir) -> dict[str, Path]:
    out_dir = Path(out_dir)
    return {kind: out_dir / f"{name}.{suffix}" for kind, suffix in
            (("map", "rdmap.bin"), ("wave", "wave.bin"),
             ("secret", "secret.json"), ("metrics", "metrics.json"))}


def emit_goldens(s: Scenario, out_dir) -> dict[str, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    trial = simulate(s)
    paths = golden_paths(s.name, out_dir)
    try:
        io.write_map_bin(trial.rdm, paths["map"])
        io.write_wave_bin(trial.rx, s.frame, paths["wave"])
        io.write_secret(trial.secret, s.frame, paths["secret"])
        io.write_json(trial.record(), paths["metrics"])
    except OSError as exc:
        raise OSError(f"writing goldens for {s.name!r} under {out_dir}: {exc}") from exc
    return paths


def verify_goldens(s: Scenario, golden_dir) -> list[str]:
    """Problems found when checking ``s`` against stored goldens (empty means pass).

    Two checks: a fresh run must reproduce every file byte for byte, and
    re-processing the stored waveform with the stored secret must reproduce
    the stored map and metrics.
    """
    stored = golden_paths(s.name, golden_dir)
    problems = [f"missing {p}" for p in stored.values() if not p.exists()]
    if problems:
        return problems

    with tempfile.TemporaryDirectory() as tmp:
        fresh = emit_goldens(s, tmp)
        for kind, path in fresh.items():
            if path.read_bytes() != stored[kind].read_bytes():
                problems.append(f"{s.name}: regenerated {kind} differs from {stored[kind]}")

    cfg = s.frame
    lattice = build_pilot_lattice(cfg)
    tx_grid = generate_frame(cfg, lattice, s.data_seed)
    try:
        secret = io.read_secret(stored["secret"], cfg)
        rx = io.read_wave_bin(stored["wave"], cfg)
        rdm, ser = receive(s, rx, tx_grid, lattice, secret)
        if io.map_to_bytes(rdm) != stored["map"].read_bytes():
            problems.append(f"{s.name}: map from stored waveform differs from {stored['map']}")
        reread = io.read_map_bin(stored["map"], s.window, rdm.grid)
        stored_metrics = io.read_json(stored["metrics"])
    except FormatError as exc:
        return problems + [f"{s.name}: {exc}"]
    record = score(s, reread).to_record(
        scenario=s.name, seed=s.secret_seed, noise_seed=s.noise_seed, ser=ser,
        receiver=s.receiver, mode=s.mode.value,
    )
    if stored_metrics != json.loads(json.dumps(record)):
        problems.append(f"{s.name}: metrics from stored map differ from {stored['metrics']}")
    return problems
