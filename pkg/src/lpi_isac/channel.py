"""Discrete-time bistatic channel: delayed, Doppler-shifted echoes plus LoS and AWGN."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import UnsupportedDelayError
from .frame import SPEED_OF_LIGHT, FrameConfig, check_frame


@dataclass(frozen=True)
class Target:
    gain: complex
    delay: float  # s
    doppler: float = 0.0  # Hz

    def __post_init__(self):
        if self.delay < 0:
            raise ValueError(f"target delay must be >= 0, got {self.delay}")

    def delay_samples(self, cfg: FrameConfig) -> int:
        return int(np.rint(self.delay / cfg.sample_interval))

    @classmethod
    def from_bins(cls, gain: complex, range_bin: int, cfg: FrameConfig,
                  doppler_bin: float = 0.0) -> "Target":
        """Target sitting exactly on a legitimate-receiver range/Doppler bin."""
        return cls(
            gain=gain,
            delay=range_bin * cfg.sample_interval,
            doppler=doppler_bin / (cfg.n_symbols * cfg.symbol_duration),
        )

    @classmethod
    def from_physical(cls, gain: complex, range_m: float, velocity_mps: float,
                      cfg: FrameConfig, bistatic: bool = False) -> "Target":
        """Monostatic (two-way) geometry by default; ``bistatic`` uses one-way."""
        factor = 1.0 if bistatic else 2.0
        return cls(
            gain=gain,
            delay=factor * range_m / SPEED_OF_LIGHT,
            doppler=factor * velocity_mps * cfg.carrier_freq / SPEED_OF_LIGHT,
        )


@dataclass(frozen=True)
class SceneConfig:
    targets: tuple[Target, ...] = ()
    los_gain: complex = 1.0
    snr_db: float | None = None  # None means noise-free
    noise_seed: int = 0

    def paths(self) -> list[Target]:
        """Targets with the LoS prepended as a zero-delay, zero-Doppler path."""
        los = [Target(self.los_gain, 0.0, 0.0)] if self.los_gain != 0 else []
        return los + list(self.targets)

    def strongest_target(self) -> Target:
        return max(self.targets, key=lambda t: abs(t.gain))


def _delayed_path(stream: np.ndarray, path: Target, cfg: FrameConfig) -> np.ndarray:
    n_p = path.delay_samples(cfg)
    if n_p >= cfg.symbol_length:
        raise UnsupportedDelayError(
            f"delay of {n_p} samples reaches beyond one symbol ({cfg.symbol_length} samples)"
        )
    delayed = np.zeros_like(stream)
    delayed[n_p:] = stream[: stream.size - n_p]
    out = path.gain * delayed
    if path.doppler != 0.0:
        # continuous across symbols: global sample index m*(N+N_cp) + n
        t = np.arange(stream.size) * cfg.sample_interval
        out *= np.exp(2j * np.pi * path.doppler * t)
    return out


def propagate(tf: np.ndarray, scene: SceneConfig, cfg: FrameConfig) -> np.ndarray:
    check_frame(tf, cfg)
    stream = tf.reshape(-1)
    rx = np.zeros_like(stream, dtype=complex)
    for path in scene.paths():
        rx += _delayed_path(stream, path, cfg)
    rx = rx.reshape(cfg.frame_shape)
    return add_awgn(rx, scene.snr_db, scene.noise_seed)


def add_awgn(tf: np.ndarray, snr_db: float | None, noise_seed: int) -> np.ndarray:
    """Complex Gaussian noise at ``snr_db`` below the mean power of ``tf``."""
    if snr_db is None or np.isinf(snr_db):
        return tf
    signal_power = np.mean(np.abs(tf) ** 2)
    variance = signal_power / 10 ** (snr_db / 10)
    rng = np.random.default_rng(noise_seed)
    noise = rng.standard_normal(tf.shape) + 1j * rng.standard_normal(tf.shape)
    return tf + np.sqrt(variance / 2) * noise
