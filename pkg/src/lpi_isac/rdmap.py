"""Range-Doppler map container, tapering windows and axis conventions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import windows as _windows

from .frame import SPEED_OF_LIGHT, FrameConfig

POWER_FLOOR = 1e-30


@dataclass(frozen=True)
class WindowSpec:
    kind: str = "chebyshev"
    sidelobe_db: float = 100.0

    def __post_init__(self):
        if self.kind not in ("rectangular", "chebyshev"):
            raise ValueError(f"unknown window kind {self.kind!r}")
        if not self.sidelobe_db > 0:
            raise ValueError(f"sidelobe_db must be positive, got {self.sidelobe_db}")

    def taps(self, n: int) -> np.ndarray:
        if self.kind == "rectangular" or n == 1:
            return np.ones(n)
        return _windows.chebwin(n, at=self.sidelobe_db, sym=True)

    def first_null_bins(self, n: int) -> float:
        """Distance from mainlobe peak to first null, in DFT bins of length ``n``."""
        if self.kind == "rectangular" or n < 3:
            return 1.0
        ripple = 10 ** (self.sidelobe_db / 20)
        x0 = math.cosh(math.acosh(ripple) / (n - 1))
        first_zero = math.cos(math.pi / (2 * (n - 1)))
        return n * math.acos(first_zero / x0) / math.pi

    def mainlobe_halfwidth(self, n: int) -> int:
        # tiny epsilon so 1.0000000001 does not round up to 2
        return max(1, math.ceil(self.first_null_bins(n) - 1e-9))


RECTANGULAR = WindowSpec("rectangular")
CHEBYSHEV_100 = WindowSpec("chebyshev", 100.0)


@dataclass
class RangeDopplerMap:
    """Complex range-Doppler image, Doppler axis FFT-shifted (zero velocity centred)."""

    values: np.ndarray  # (n_range, n_doppler)
    range_bin_m: float
    velocity_bin_mps: float
    window: WindowSpec = field(default_factory=lambda: CHEBYSHEV_100)
    grid: str = "full"

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def n_range(self) -> int:
        return self.values.shape[0]

    @property
    def n_doppler(self) -> int:
        return self.values.shape[1]

    @property
    def range_axis(self) -> np.ndarray:
        return np.arange(self.n_range) * self.range_bin_m

    @property
    def doppler_bins(self) -> np.ndarray:
        """Signed Doppler bin index of each column."""
        return np.arange(self.n_doppler) - self.n_doppler // 2

    @property
    def velocity_axis(self) -> np.ndarray:
        return self.doppler_bins * self.velocity_bin_mps

    def column_of(self, doppler_bin: int) -> int:
        return (doppler_bin + self.n_doppler // 2) % self.n_doppler

    @property
    def power(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def power_db(self, normalize: bool = True) -> np.ndarray:
        p = np.maximum(self.power, POWER_FLOOR)
        if normalize:
            p = p / p.max()
        return 10 * np.log10(p)


def axis_bins(cfg: FrameConfig, n_range: int, n_doppler: int, freq_step: int = 1,
              time_step: int = 1, geometry: str = "monostatic") -> tuple[float, float]:
    """Range and velocity bin sizes for a transform over a (possibly decimated) grid.

    ``freq_step``/``time_step`` are the subcarrier and symbol spacings of the
    cells that were transformed (1 for the full grid, the pilot spacings for
    a pilot-only grid).
    """
    if geometry not in ("monostatic", "bistatic"):
        raise ValueError(f"unknown geometry {geometry!r}")
    factor = 2.0 if geometry == "monostatic" else 1.0
    delay_bin = 1.0 / (n_range * freq_step * cfg.subcarrier_spacing)
    doppler_bin = 1.0 / (n_doppler * time_step * cfg.symbol_duration)
    range_bin_m = SPEED_OF_LIGHT * delay_bin / factor
    velocity_bin_mps = SPEED_OF_LIGHT * doppler_bin / (factor * cfg.carrier_freq)
    return range_bin_m, velocity_bin_mps


def range_transform(d: np.ndarray, window: WindowSpec) -> np.ndarray:
    """Window across subcarriers, then unitary IDFT per symbol."""
    w = window.taps(d.shape[0])[:, None]
    return np.fft.ifft(d * w, axis=0, norm="ortho")


def doppler_transform(i_r: np.ndarray, window: WindowSpec) -> np.ndarray:
    """Window across symbols, unitary DFT per range bin, zero Doppler centred."""
    w = window.taps(i_r.shape[1])[None, :]
    return np.fft.fftshift(np.fft.fft(i_r * w, axis=1, norm="ortho"), axes=1)
