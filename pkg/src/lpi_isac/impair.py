"""Shared LPI secret and the artificial phase / Doppler impairments.

The secret is a pure function of ``(mode, seed, N, M, subcarrier spacing)``.
Draw order from a single PCG64 stream: the phase draws first (row-major
``(N, M)`` for subcarrier-wise, ``M`` values for symbol-wise), then the ``M``
virtual Doppler offsets.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .frame import FrameConfig, check_frame


class ImpairmentMode(str, enum.Enum):
    NONE = "none"
    SYMBOL_WISE = "symbol_wise"
    SUBCARRIER_WISE = "subcarrier_wise"


@dataclass(frozen=True)
class LpiSecret:
    mode: ImpairmentMode
    seed: int
    phase: np.ndarray  # (N, M) radians in (-pi, pi]
    doppler: np.ndarray  # (M,) Hz in [-df/2, df/2]

    @property
    def shape(self) -> tuple[int, int]:
        return self.phase.shape


def _uniform_phase(rng: np.random.Generator, size) -> np.ndarray:
    # random() is in [0, 1) so this lands in (-pi, pi]
    return np.pi - 2.0 * np.pi * rng.random(size)


def generate_secret(cfg: FrameConfig, mode, seed: int) -> LpiSecret:
    mode = ImpairmentMode(mode)
    n, m = cfg.grid_shape
    if mode is ImpairmentMode.NONE:
        return LpiSecret(mode, seed, np.zeros((n, m)), np.zeros(m))

    rng = np.random.default_rng(seed)
    if mode is ImpairmentMode.SUBCARRIER_WISE:
        phase = _uniform_phase(rng, (n, m))
    else:
        phase = np.broadcast_to(_uniform_phase(rng, m), (n, m)).copy()
    half = cfg.subcarrier_spacing / 2
    doppler = rng.uniform(-half, half, m)
    return LpiSecret(mode, seed, phase, doppler)


def _check_secret(secret: LpiSecret, shape: tuple[int, int]) -> None:
    if secret.shape != shape:
        raise DimensionError(f"secret shape {secret.shape} != grid shape {shape}")


def apply_phase(grid: np.ndarray, secret: LpiSecret) -> np.ndarray:
    _check_secret(secret, grid.shape)
    return grid * np.exp(1j * secret.phase)


def remove_phase(grid: np.ndarray, secret: LpiSecret) -> np.ndarray:
    _check_secret(secret, grid.shape)
    return grid * np.exp(-1j * secret.phase)


def _doppler_ramp(secret: LpiSecret, cfg: FrameConfig, sign: float) -> np.ndarray:
    if secret.doppler.shape != (cfg.n_symbols,):
        raise DimensionError(
            f"doppler vector length {secret.doppler.shape} != n_symbols {cfg.n_symbols}"
        )
    # sample index restarts at 0 on every symbol, CP included
    n = np.arange(cfg.symbol_length)
    return np.exp(sign * 2j * np.pi * np.outer(secret.doppler, n) * cfg.sample_interval)


def apply_doppler(tf: np.ndarray, secret: LpiSecret, cfg: FrameConfig) -> np.ndarray:
    check_frame(tf, cfg)
    return tf * _doppler_ramp(secret, cfg, +1.0)


def remove_doppler(tf: np.ndarray, secret: LpiSecret, cfg: FrameConfig) -> np.ndarray:
    check_frame(tf, cfg)
    return tf * _doppler_ramp(secret, cfg, -1.0)
