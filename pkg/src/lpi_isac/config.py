"""JSON scenario configuration.

A document describes one base scenario; an optional ``"scenarios"`` list
holds per-scenario overrides of the top-level keys::

    {
      "name": "desk",
      "frame": {"n_subcarriers": 256, "n_symbols": 64, "cp_length": 64,
                "bandwidth": 1e8, "carrier_freq": 2.7e10,
                "pilot_spacing_freq": 2, "pilot_spacing_time": 2},
      "scene": {"los_gain_db": 0, "snr_db": 40,
                "targets": [{"gain_db": -20, "range_bin": 24, "doppler_bin": 8}]},
      "impairment": {"mode": "subcarrier_wise"},
      "receiver": "legit",
      "window": {"kind": "chebyshev", "sidelobe_db": 100},
      "mask": {"zero_velocity_halfwidth": 5},
      "seeds": {"secret": 1, "data": 2, "noise": 3},
      "n_trials": 20,
      "scenarios": [{"name": "blind", "receiver": "blind_eve",
                     "impairment": {"mode": "symbol_wise"}}]
    }

Targets take one of three placements: ``range_bin``/``doppler_bin`` (bins of
the full-grid map), ``range_m``/``velocity_mps`` (monostatic geometry) or
``delay_s``/``doppler_hz``. Gains are ``gain`` (number or ``[re, im]``) or
``gain_db`` with an optional ``phase_deg``.
"""

from __future__ import annotations

import json
from dataclasses import asdict, fields
from pathlib import Path

import numpy as np

from .channel import SceneConfig, Target
from .errors import ConfigError
from .frame import FrameConfig
from .harness import Scenario
from .metrics import MaskSpec
from .rdmap import WindowSpec

TOP_LEVEL = {"name", "frame", "scene", "impairment", "receiver", "window", "mask", "seeds",
             "n_trials", "geometry", "correct_residual", "scenarios"}


def _complex(entry: dict, key: str, default: complex) -> complex:
    if key in entry:
        value = entry[key]
        if isinstance(value, (list, tuple)):
            if len(value) != 2:
                raise ConfigError(f"{key} must be a number or [re, im], got {value!r}")
            return complex(value[0], value[1])
        return complex(value)
    if f"{key}_db" in entry:
        mag = 10 ** (float(entry[f"{key}_db"]) / 20)
        return mag * np.exp(1j * np.deg2rad(float(entry.get("phase_deg", 0.0))))
    return default


def _target(entry: dict, cfg: FrameConfig) -> Target:
    gain = _complex(entry, "gain", 1.0)
    if "range_bin" in entry:
        return Target.from_bins(gain, int(entry["range_bin"]), cfg, float(entry.get("doppler_bin", 0)))
    if "range_m" in entry:
        return Target.from_physical(gain, float(entry["range_m"]),
                                    float(entry.get("velocity_mps", 0.0)), cfg)
    if "delay_s" in entry:
        return Target(gain, float(entry["delay_s"]), float(entry.get("doppler_hz", 0.0)))
    raise ConfigError(f"target needs range_bin, range_m or delay_s: {entry!r}")


def _scene(entry: dict, cfg: FrameConfig, noise_seed: int) -> SceneConfig:
    targets = tuple(_target(t, cfg) for t in entry.get("targets", []))
    snr = entry.get("snr_db")
    return SceneConfig(targets=targets, los_gain=_complex(entry, "los_gain", 1.0),
                       snr_db=None if snr is None else float(snr), noise_seed=noise_seed)


def _build(doc: dict) -> Scenario:
    unknown = set(doc) - TOP_LEVEL
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
    try:
        frame = FrameConfig(**doc["frame"])
        seeds = {"secret": 1, "data": 2, "noise": 3, **doc.get("seeds", {})}
        return Scenario(
            name=doc.get("name", "scenario"),
            frame=frame,
            scene=_scene(doc.get("scene", {}), frame, int(seeds["noise"])),
            mode=doc.get("impairment", {}).get("mode", "subcarrier_wise"),
            receiver=doc.get("receiver", "legit"),
            window=WindowSpec(**doc.get("window", {})),
            mask=MaskSpec(**doc.get("mask", {})),
            secret_seed=int(seeds["secret"]),
            data_seed=int(seeds["data"]),
            noise_seed=int(seeds["noise"]),
            n_trials=int(doc.get("n_trials", 1)),
            geometry=doc.get("geometry", "monostatic"),
            correct_residual=bool(doc.get("correct_residual", True)),
        )
    except ConfigError:
        raise
    except KeyError as exc:
        raise ConfigError(f"missing configuration key {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def scenarios_from_dict(doc: dict) -> list[Scenario]:
    overrides = doc.get("scenarios")
    base = {k: v for k, v in doc.items() if k != "scenarios"}
    if not overrides:
        return [_build(base)]
    return [_build({**base, **o}) for o in overrides]


def load_config(path) -> list[Scenario]:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return scenarios_from_dict(doc)


def _gain(z: complex) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


def scenario_to_dict(s: Scenario) -> dict:
    """Inverse of the loader; targets are written as delay/Doppler pairs."""
    return {
        "name": s.name,
        "frame": asdict(s.frame),
        "scene": {
            "los_gain": _gain(s.scene.los_gain),
            "snr_db": s.scene.snr_db,
            "targets": [{"gain": _gain(t.gain), "delay_s": t.delay, "doppler_hz": t.doppler}
                        for t in s.scene.targets],
        },
        "impairment": {"mode": s.mode.value},
        "receiver": s.receiver,
        "window": asdict(s.window),
        "mask": {f.name: getattr(s.mask, f.name) for f in fields(s.mask)},
        "seeds": {"secret": s.secret_seed, "data": s.data_seed, "noise": s.noise_seed},
        "n_trials": s.n_trials,
        "geometry": s.geometry,
        "correct_residual": s.correct_residual,
    }
