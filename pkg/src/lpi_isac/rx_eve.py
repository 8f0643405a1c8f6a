"""Eavesdropper processing on the pilot lattice.

Nothing here accepts an ``LpiSecret``: Eve only sees the received frame and
the publicly known pilot symbols.
"""

from __future__ import annotations

import warnings

import numpy as np

from .errors import DimensionError, WeakLosWarning
from .frame import FrameConfig, PilotLattice, demodulate
from .rdmap import (
    CHEBYSHEV_100,
    RECTANGULAR,
    RangeDopplerMap,
    WindowSpec,
    axis_bins,
    doppler_transform,
    range_transform,
)
from .rx_legit import _nearest, _quadrant, estimate_channel

WEAK_LOS_RATIO = 10.0


def extract_pilot_grid(grid: np.ndarray, lattice: PilotLattice) -> np.ndarray:
    return grid[np.ix_(lattice.subcarriers, lattice.symbols)]


def pilot_channel(rx: np.ndarray, tx_grid: np.ndarray, lattice: PilotLattice,
                  cfg: FrameConfig) -> np.ndarray:
    """``R_pil / X_pil`` after a plain OFDM demodulation."""
    r_pil = extract_pilot_grid(demodulate(rx, cfg), lattice)
    return estimate_channel(r_pil, extract_pilot_grid(tx_grid, lattice))


def _eve_map(values: np.ndarray, lattice: PilotLattice, cfg: FrameConfig,
             window: WindowSpec, geometry: str) -> RangeDopplerMap:
    range_bin, velocity_bin = axis_bins(
        cfg, *values.shape, freq_step=cfg.pilot_spacing_freq,
        time_step=cfg.pilot_spacing_time, geometry=geometry,
    )
    return RangeDopplerMap(values, range_bin, velocity_bin, window, grid="pilot")


def blind_pipeline(rx: np.ndarray, tx_grid: np.ndarray, lattice: PilotLattice,
                   cfg: FrameConfig, window: WindowSpec = CHEBYSHEV_100,
                   geometry: str = "monostatic") -> RangeDopplerMap:
    """Standard OFDM radar processing restricted to the pilot cells."""
    i_r = range_transform(pilot_channel(rx, tx_grid, lattice, cfg), window)
    return _eve_map(doppler_transform(i_r, window), lattice, cfg, window, geometry)


def track_los_phase(i_r_eve: np.ndarray) -> np.ndarray:
    """Phase of range bin 0 on every pilot symbol.

    Warns with :class:`WeakLosWarning` when that bin is under ten times the
    median magnitude of its range profile on any symbol.
    """
    mag = np.abs(i_r_eve)
    weak = mag[0] < WEAK_LOS_RATIO * np.median(mag, axis=0)
    if np.any(weak):
        warnings.warn(
            f"LoS bin weak on {int(weak.sum())} of {weak.size} pilot symbols",
            WeakLosWarning, stacklevel=2,
        )
    return np.angle(i_r_eve[0])


def smart_pipeline(rx: np.ndarray, tx_grid: np.ndarray, lattice: PilotLattice,
                   cfg: FrameConfig, window: WindowSpec = CHEBYSHEV_100,
                   geometry: str = "monostatic") -> RangeDopplerMap:
    """Blind chain plus per-symbol derotation by the tracked LoS phase."""
    i_r = range_transform(pilot_channel(rx, tx_grid, lattice, cfg), window)
    theta = track_los_phase(i_r)
    values = doppler_transform(i_r * np.exp(-1j * theta)[None, :], window)
    return _eve_map(values, lattice, cfg, window, geometry)


def eve_equalize(rx_grid: np.ndarray, tx_grid: np.ndarray, lattice: PilotLattice,
                 track_phase: bool = False) -> np.ndarray:
    """Eve's pilot-assisted estimate of every transmitted cell.

    Without tracking, each cell is divided by the channel at its nearest
    pilot. With tracking, pilot channels are first derotated by the LoS
    phase, averaged over time (static channel), and the phase of the nearest
    pilot symbol is put back.
    """
    if rx_grid.shape != tx_grid.shape:
        raise DimensionError(f"rx shape {rx_grid.shape} != tx shape {tx_grid.shape}")
    d_pil = estimate_channel(extract_pilot_grid(rx_grid, lattice),
                             extract_pilot_grid(tx_grid, lattice))
    kk = _nearest(lattice.subcarriers, rx_grid.shape[0])
    mm = _nearest(lattice.symbols, rx_grid.shape[1])
    if track_phase:
        theta = track_los_phase(range_transform(d_pil, RECTANGULAR))
        static = np.mean(d_pil * np.exp(-1j * theta)[None, :], axis=1)
        h = static[kk][:, None] * np.exp(1j * theta[mm])[None, :]
    else:
        h = d_pil[np.ix_(kk, mm)]
    return rx_grid / h


def eve_demap_and_ser(rx_grid: np.ndarray, tx_grid: np.ndarray, lattice: PilotLattice,
                      track_phase: bool = False) -> float:
    """Symbol error rate of Eve's hard decisions on the payload cells.

    ``rx_grid`` is Eve's plainly demodulated frame; ``tx_grid`` supplies the
    pilots she knows and the ground truth for scoring.
    """
    est = eve_equalize(rx_grid, tx_grid, lattice, track_phase)
    data = ~lattice.mask(tx_grid.shape)
    return float(np.mean(_quadrant(est[data]) != _quadrant(tx_grid[data])))
