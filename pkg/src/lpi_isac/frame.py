"""OFDM numerology, pilot lattice, frame generation and (de)modulation.

Grids are ``(N, M)`` complex arrays indexed ``[subcarrier, symbol]``.
Time frames are ``(M, N + N_cp)`` complex arrays, one row per OFDM symbol
with the cyclic prefix first; ``serialize`` flattens them symbol by symbol.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DimensionError

SPEED_OF_LIGHT = 299_792_458.0

# QPSK points at pi/4 + i*pi/2, i = 0..3
QPSK_POINTS = np.exp(1j * (np.pi / 4 + np.pi / 2 * np.arange(4)))


@dataclass(frozen=True)
class FrameConfig:
    n_subcarriers: int
    n_symbols: int
    cp_length: int
    bandwidth: float
    carrier_freq: float
    pilot_spacing_freq: int = 2
    pilot_spacing_time: int = 2
    modulation_order: int = 4

    def __post_init__(self):
        if self.n_subcarriers < 2:
            raise ConfigError(f"n_subcarriers must be >= 2, got {self.n_subcarriers}")
        if self.n_symbols < 1:
            raise ConfigError(f"n_symbols must be >= 1, got {self.n_symbols}")
        if not 0 <= self.cp_length < self.n_subcarriers:
            raise ConfigError(
                f"cp_length must lie in [0, {self.n_subcarriers}), got {self.cp_length}"
            )
        if not self.bandwidth > 0:
            raise ConfigError(f"bandwidth must be positive, got {self.bandwidth}")
        if not self.carrier_freq > 0:
            raise ConfigError(f"carrier_freq must be positive, got {self.carrier_freq}")
        if self.pilot_spacing_freq < 1 or self.pilot_spacing_time < 1:
            raise ConfigError("pilot spacings must be >= 1")

    @property
    def subcarrier_spacing(self) -> float:
        return self.bandwidth / self.n_subcarriers

    @property
    def sample_interval(self) -> float:
        return 1.0 / self.bandwidth

    @property
    def symbol_length(self) -> int:
        """Samples per OFDM symbol including the cyclic prefix."""
        return self.n_subcarriers + self.cp_length

    @property
    def symbol_duration(self) -> float:
        return self.symbol_length * self.sample_interval

    @property
    def grid_shape(self) -> tuple[int, int]:
        return (self.n_subcarriers, self.n_symbols)

    @property
    def frame_shape(self) -> tuple[int, int]:
        return (self.n_symbols, self.symbol_length)


def nominal_pilot_count(n: int, spacing: int) -> int:
    """Unclamped pilot count ``floor(n / spacing) + 1``."""
    return n // spacing + 1


@dataclass(frozen=True)
class PilotLattice:
    subcarriers: np.ndarray
    symbols: np.ndarray

    @property
    def n_pilot_subcarriers(self) -> int:
        return len(self.subcarriers)

    @property
    def n_pilot_symbols(self) -> int:
        return len(self.symbols)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_pilot_subcarriers, self.n_pilot_symbols)

    def mask(self, grid_shape: tuple[int, int]) -> np.ndarray:
        """Boolean ``(N, M)`` array, True on pilot cells."""
        out = np.zeros(grid_shape, dtype=bool)
        out[np.ix_(self.subcarriers, self.symbols)] = True
        return out


def build_pilot_lattice(cfg: FrameConfig) -> PilotLattice:
    # Multiples of the spacing that address a real subcarrier/symbol.
    # When the spacing divides N (or M) this is one fewer than nominal_pilot_count.
    return PilotLattice(
        subcarriers=np.arange(0, cfg.n_subcarriers, cfg.pilot_spacing_freq),
        symbols=np.arange(0, cfg.n_symbols, cfg.pilot_spacing_time),
    )


def qpsk(indices: np.ndarray) -> np.ndarray:
    return QPSK_POINTS[indices]


def generate_frame(cfg: FrameConfig, lattice: PilotLattice, seed: int) -> np.ndarray:
    """Draw a QPSK transmit grid; pilots and payload come from independent streams."""
    if cfg.modulation_order != 4:
        raise ConfigError(f"only QPSK (modulation_order=4) is supported, got {cfg.modulation_order}")
    pilot_ss, data_ss = np.random.SeedSequence(seed).spawn(2)
    data_rng = np.random.default_rng(data_ss)
    pilot_rng = np.random.default_rng(pilot_ss)

    grid = qpsk(data_rng.integers(0, 4, size=cfg.grid_shape))
    grid[np.ix_(lattice.subcarriers, lattice.symbols)] = qpsk(
        pilot_rng.integers(0, 4, size=lattice.shape)
    )
    return grid


def _check_grid(grid: np.ndarray, cfg: FrameConfig) -> None:
    if grid.shape != cfg.grid_shape:
        raise DimensionError(f"grid shape {grid.shape} != expected {cfg.grid_shape}")


def check_frame(tf: np.ndarray, cfg: FrameConfig) -> None:
    if tf.shape != cfg.frame_shape:
        raise DimensionError(f"time frame shape {tf.shape} != expected {cfg.frame_shape}")


def modulate(grid: np.ndarray, cfg: FrameConfig) -> np.ndarray:
    """Unitary IDFT per symbol, then prepend the last N_cp samples."""
    _check_grid(grid, cfg)
    body = np.fft.ifft(grid, axis=0, norm="ortho").T
    if cfg.cp_length == 0:
        return np.ascontiguousarray(body)
    return np.concatenate([body[:, -cfg.cp_length:], body], axis=1)


def demodulate(tf: np.ndarray, cfg: FrameConfig) -> np.ndarray:
    """Drop the cyclic prefix and apply a unitary DFT per symbol."""
    check_frame(tf, cfg)
    return np.fft.fft(tf[:, cfg.cp_length:], axis=1, norm="ortho").T


def serialize(tf: np.ndarray) -> np.ndarray:
    return tf.reshape(-1)


def deserialize(stream: np.ndarray, cfg: FrameConfig) -> np.ndarray:
    if stream.size != cfg.n_symbols * cfg.symbol_length:
        raise DimensionError(
            f"stream of {stream.size} samples does not hold {cfg.n_symbols} symbols "
            f"of {cfg.symbol_length} samples"
        )
    return stream.reshape(cfg.frame_shape)
