"""Image SINR, PSLR and ISLR on range-Doppler maps."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.ndimage import maximum_filter

from .errors import DegenerateMaskError, NoTargetError
from .rdmap import POWER_FLOOR, RangeDopplerMap

ISLR_FLOOR_DB = -300.0


@dataclass(frozen=True)
class MaskSpec:
    """Masking and mainlobe conventions.

    ``None`` widths are resolved per map: the mainlobe half-width is the
    first-null distance of the map's window, and the peak-exclusion
    half-width is three mainlobe half-widths.
    """

    zero_velocity_halfwidth: float = 5.0  # m/s
    mainlobe_halfwidth_bins: int | None = None
    peak_exclusion_halfwidth_bins: int | None = None
    detection_threshold_db: float = 20.0
    peak_search_halfwidth_bins: int = 0

    def __post_init__(self):
        for name in ("zero_velocity_halfwidth", "mainlobe_halfwidth_bins",
                     "peak_exclusion_halfwidth_bins", "peak_search_halfwidth_bins"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise ValueError(f"{name} must be >= 0, got {value}")

    def mainlobe(self, rdm: RangeDopplerMap) -> tuple[int, int]:
        if self.mainlobe_halfwidth_bins is not None:
            return (self.mainlobe_halfwidth_bins,) * 2
        return (rdm.window.mainlobe_halfwidth(rdm.n_range),
                rdm.window.mainlobe_halfwidth(rdm.n_doppler))

    def exclusion(self, rdm: RangeDopplerMap) -> tuple[int, int]:
        if self.peak_exclusion_halfwidth_bins is not None:
            return (self.peak_exclusion_halfwidth_bins,) * 2
        h_r, h_v = self.mainlobe(rdm)
        return 3 * h_r, 3 * h_v


@dataclass(frozen=True)
class MetricsReport:
    image_sinr_db: float
    pslr_db: float
    islr_db: float
    peak: tuple[int, int]  # (range bin, map column)
    peak_range_m: float
    peak_velocity_mps: float
    mask: MaskSpec

    def to_record(self, scenario: str = "", seed: int | None = None, **extra) -> dict:
        record = {
            "scenario": scenario,
            "seed": seed,
            "image_sinr_db": self.image_sinr_db,
            "pslr_db": self.pslr_db,
            "islr_db": self.islr_db,
            "peak": {"range_m": self.peak_range_m, "velocity_mps": self.peak_velocity_mps,
                     "range_bin": int(self.peak[0]), "column": int(self.peak[1])},
            "mask": asdict(self.mask),
        }
        record.update(extra)
        return record


def zero_velocity_columns(rdm: RangeDopplerMap, mask: MaskSpec) -> np.ndarray:
    # small slack so a bin landing exactly on the boundary counts as masked
    return np.abs(rdm.velocity_axis) <= mask.zero_velocity_halfwidth * (1 + 1e-12)


def find_strongest_target(rdm: RangeDopplerMap, mask: MaskSpec,
                          near: tuple[int, int] | None = None) -> tuple[int, int]:
    """Brightest unmasked bin, as ``(range bin, column)``.

    With ``near`` (range bin, signed Doppler bin) the search is restricted to
    ``mask.peak_search_halfwidth_bins`` around that cell, wrapping circularly.
    """
    allowed = np.broadcast_to(~zero_velocity_columns(rdm, mask)[None, :], rdm.shape).copy()
    if near is not None:
        h = mask.peak_search_halfwidth_bins
        rows = np.arange(near[0] - h, near[0] + h + 1) % rdm.n_range
        cols = np.array([rdm.column_of(q) for q in range(near[1] - h, near[1] + h + 1)])
        window = np.zeros(rdm.shape, dtype=bool)
        window[np.ix_(rows, cols)] = True
        allowed &= window
    if not allowed.any():
        raise NoTargetError("every candidate bin lies inside the zero-velocity mask")
    power = np.where(allowed, rdm.power, -np.inf)
    r, c = np.unravel_index(np.argmax(power), rdm.shape)
    return int(r), int(c)


def noise_region(rdm: RangeDopplerMap, peak: tuple[int, int], mask: MaskSpec) -> np.ndarray:
    """Bins used for the noise floor: unmasked and away from every strong peak."""
    power = rdm.power
    usable = np.broadcast_to(~zero_velocity_columns(rdm, mask)[None, :], rdm.shape)
    if not usable.any():
        raise DegenerateMaskError("zero-velocity mask covers the whole map")
    floor = np.median(power[usable])
    hot = usable & (power > floor * 10 ** (mask.detection_threshold_db / 10))
    hot = hot.copy()
    hot[peak] = True
    e_r, e_v = mask.exclusion(rdm)
    excluded = maximum_filter(hot, size=(2 * e_r + 1, 2 * e_v + 1), mode="wrap")
    region = usable & ~excluded
    if not region.any():
        raise DegenerateMaskError("no bins left for the noise floor")
    return region


def image_sinr(rdm: RangeDopplerMap, peak: tuple[int, int], mask: MaskSpec) -> float:
    power = rdm.power
    floor = np.mean(power[noise_region(rdm, peak, mask)])
    return float(10 * np.log10(max(power[peak], POWER_FLOOR) / max(floor, POWER_FLOOR)))


def _cut_lobes(rdm: RangeDopplerMap, peak: tuple[int, int], mask: MaskSpec):
    cut = np.maximum(rdm.power[peak[0]], POWER_FLOOR)
    h = mask.mainlobe(rdm)[1]
    if cut.size <= 2 * h + 1:
        raise DegenerateMaskError(f"velocity cut of {cut.size} bins has no room outside "
                                  f"a +-{h} bin mainlobe")
    # mainlobe centred on the cut maximum so the ratios stay peak-relative
    centre = int(np.argmax(cut))
    offset = (np.arange(cut.size) - centre) % cut.size
    main = np.minimum(offset, cut.size - offset) <= h
    return cut, centre, main


def pslr(rdm: RangeDopplerMap, peak: tuple[int, int], mask: MaskSpec) -> float:
    cut, centre, main = _cut_lobes(rdm, peak, mask)
    return float(10 * np.log10(cut[~main].max() / cut[centre]))


def islr(rdm: RangeDopplerMap, peak: tuple[int, int], mask: MaskSpec) -> float:
    cut, _, main = _cut_lobes(rdm, peak, mask)
    side = cut[~main].sum()
    # bins clamped at POWER_FLOOR still sum to something; treat that as empty
    if side <= POWER_FLOOR * np.count_nonzero(~main):
        return ISLR_FLOOR_DB
    return float(max(10 * np.log10(side / cut[main].sum()), ISLR_FLOOR_DB))


def peak_to_average_db(rdm: RangeDopplerMap, peak: tuple[int, int]) -> float:
    """Peak power over the mean power of the whole map (coherent processing gain)."""
    power = rdm.power
    return float(10 * np.log10(power[peak] / power.mean()))


def evaluate(rdm: RangeDopplerMap, mask: MaskSpec = MaskSpec(),
             near: tuple[int, int] | None = None) -> MetricsReport:
    peak = find_strongest_target(rdm, mask, near)
    return MetricsReport(
        image_sinr_db=image_sinr(rdm, peak, mask),
        pslr_db=pslr(rdm, peak, mask),
        islr_db=islr(rdm, peak, mask),
        peak=peak,
        peak_range_m=float(rdm.range_axis[peak[0]]),
        peak_velocity_mps=float(rdm.velocity_axis[peak[1]]),
        mask=mask,
    )
