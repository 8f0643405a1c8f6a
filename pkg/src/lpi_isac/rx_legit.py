"""Legitimate receiver: undoes the artificial impairments and forms the radar image."""

from __future__ import annotations

import numpy as np

from .errors import DegenerateReferenceError, DimensionError
from .frame import FrameConfig, PilotLattice, demodulate
from .impair import LpiSecret, remove_doppler, remove_phase
from .rdmap import (
    CHEBYSHEV_100,
    RECTANGULAR,
    RangeDopplerMap,
    WindowSpec,
    axis_bins,
    doppler_transform,
    range_transform,
)

__all__ = [
    "estimate_channel",
    "range_transform",
    "residual_correction",
    "doppler_transform",
    "legit_receive",
    "legit_pipeline",
    "nearest_pilot_equalize",
    "demap_and_ser",
]

MIN_REFERENCE_MAGNITUDE = 1e-6


def estimate_channel(rx_grid: np.ndarray, tx_grid: np.ndarray) -> np.ndarray:
    if rx_grid.shape != tx_grid.shape:
        raise DimensionError(f"rx shape {rx_grid.shape} != tx shape {tx_grid.shape}")
    if np.any(np.abs(tx_grid) < MIN_REFERENCE_MAGNITUDE):
        raise DegenerateReferenceError("reference grid has near-zero cells")
    return rx_grid / tx_grid


def residual_correction(i_r: np.ndarray, secret: LpiSecret, cfg: FrameConfig) -> np.ndarray:
    """Undo the delay-dependent phase left on each symbol after Doppler removal.

    Range bin ``r`` sits at delay ``r / B``; multiply it by
    ``exp(+j 2 pi f_v[m] r / B)``.
    """
    tau = np.arange(i_r.shape[0]) / cfg.bandwidth
    return i_r * np.exp(2j * np.pi * np.outer(tau, secret.doppler))


def legit_receive(rx: np.ndarray, secret: LpiSecret, cfg: FrameConfig) -> np.ndarray:
    """Received frequency-domain frame with both artificial impairments removed."""
    return remove_phase(demodulate(remove_doppler(rx, secret, cfg), cfg), secret)


def legit_pipeline(rx: np.ndarray, tx_grid: np.ndarray, secret: LpiSecret, cfg: FrameConfig,
                   window: WindowSpec = CHEBYSHEV_100, correct_residual: bool = True,
                   geometry: str = "monostatic") -> RangeDopplerMap:
    d = estimate_channel(legit_receive(rx, secret, cfg), tx_grid)
    if correct_residual:
        # The correction is exact only while each echo occupies a single range
        # bin, so it runs on the untapered profile; the taper is then applied
        # to the corrected response.
        i_r = residual_correction(range_transform(d, RECTANGULAR), secret, cfg)
        d = np.fft.fft(i_r, axis=0, norm="ortho")
    i_r = range_transform(d, window)
    values = doppler_transform(i_r, window)
    range_bin, velocity_bin = axis_bins(cfg, *values.shape, geometry=geometry)
    return RangeDopplerMap(values, range_bin, velocity_bin, window, grid="full")


def _nearest(indices: np.ndarray, n: int) -> np.ndarray:
    """Position in ``indices`` of the closest entry for every 0..n-1 (ties go low)."""
    if len(indices) == 1:
        return np.zeros(n, dtype=int)
    cells = np.arange(n)
    pos = np.clip(np.searchsorted(indices, cells), 1, len(indices) - 1)
    go_left = cells - indices[pos - 1] <= indices[pos] - cells
    return np.where(go_left, pos - 1, pos)


def nearest_pilot_channel(rx_grid: np.ndarray, tx_grid: np.ndarray,
                          lattice: PilotLattice) -> np.ndarray:
    """Channel estimate on every cell, copied from the closest pilot cell."""
    d_pil = estimate_channel(
        rx_grid[np.ix_(lattice.subcarriers, lattice.symbols)],
        tx_grid[np.ix_(lattice.subcarriers, lattice.symbols)],
    )
    kk = _nearest(lattice.subcarriers, rx_grid.shape[0])
    mm = _nearest(lattice.symbols, rx_grid.shape[1])
    return d_pil[np.ix_(kk, mm)]


def nearest_pilot_equalize(rx_grid: np.ndarray, tx_grid: np.ndarray,
                           lattice: PilotLattice) -> np.ndarray:
    return rx_grid / nearest_pilot_channel(rx_grid, tx_grid, lattice)


def _quadrant(z: np.ndarray) -> np.ndarray:
    return (np.real(z) >= 0).astype(np.int8) * 2 + (np.imag(z) >= 0)


def demap_and_ser(rx_grid_equalized: np.ndarray, tx_grid: np.ndarray,
                  lattice: PilotLattice) -> float:
    """Hard QPSK decisions on payload cells; fraction that disagree with ``tx_grid``."""
    data = ~lattice.mask(tx_grid.shape)
    wrong = _quadrant(rx_grid_equalized[data]) != _quadrant(tx_grid[data])
    return float(np.mean(wrong)) if wrong.size else 0.0
