"""On-disk formats: binary maps and waveforms, CSV exports, JSON records.

Binary layout (little-endian, no padding)::

    6 bytes   magic: b"RDMAP1" for maps, b"WAVE1\\0" for waveforms
    u32       rows    (range bins | OFDM symbols)
    u32       columns (Doppler bins | samples per symbol incl. CP)
    f64       row step    (range bin in m | symbol duration in s)
    f64       column step (velocity bin in m/s | sample interval in s)
    f64 * 2 * rows * columns   row-major interleaved re, im
"""

from __future__ import annotations

import csv
import json
import struct
from pathlib import Path

import numpy as np

from .errors import FormatError
from .frame import FrameConfig
from .impair import LpiSecret, generate_secret
from .rdmap import CHEBYSHEV_100, RangeDopplerMap, WindowSpec

MAP_MAGIC = b"RDMAP1"
WAVE_MAGIC = b"WAVE1\x00"
_HEADER = struct.Struct("<6sIIdd")


def _pack(magic: bytes, values: np.ndarray, row_step: float, col_step: float) -> bytes:
    rows, cols = values.shape
    body = np.ascontiguousarray(values, dtype="<c16").tobytes()
    return _HEADER.pack(magic, rows, cols, row_step, col_step) + body


def _unpack(data: bytes, magic: bytes, path) -> tuple[np.ndarray, float, float]:
    if len(data) < _HEADER.size:
        raise FormatError(f"{path}: file too short for a header ({len(data)} bytes)")
    found, rows, cols, row_step, col_step = _HEADER.unpack_from(data)
    if found != magic:
        raise FormatError(f"{path}: bad magic {found!r}, expected {magic!r}")
    expected = _HEADER.size + 16 * rows * cols
    if len(data) != expected:
        raise FormatError(f"{path}: {len(data)} bytes, header promises {expected}")
    values = np.frombuffer(data, dtype="<c16", offset=_HEADER.size).reshape(rows, cols)
    return values.astype(complex), row_step, col_step


def map_to_bytes(rdm: RangeDopplerMap) -> bytes:
    return _pack(MAP_MAGIC, rdm.values, rdm.range_bin_m, rdm.velocity_bin_mps)


def write_map_bin(rdm: RangeDopplerMap, path) -> Path:
    path = Path(path)
    path.write_bytes(map_to_bytes(rdm))
    return path


def read_map_bin(path, window: WindowSpec = CHEBYSHEV_100, grid: str = "full") -> RangeDopplerMap:
    values, range_bin, velocity_bin = _unpack(Path(path).read_bytes(), MAP_MAGIC, path)
    return RangeDopplerMap(values, range_bin, velocity_bin, window, grid)


def write_wave_bin(tf: np.ndarray, cfg: FrameConfig, path) -> Path:
    path = Path(path)
    path.write_bytes(_pack(WAVE_MAGIC, tf, cfg.symbol_duration, cfg.sample_interval))
    return path


def read_wave_bin(path, cfg: FrameConfig | None = None) -> np.ndarray:
    tf, symbol_duration, sample_interval = _unpack(Path(path).read_bytes(), WAVE_MAGIC, path)
    if cfg is not None and (tf.shape != cfg.frame_shape
                            or not np.isclose(sample_interval, cfg.sample_interval)):
        raise FormatError(f"{path}: waveform {tf.shape} at {sample_interval} s does not match "
                          f"frame {cfg.frame_shape} at {cfg.sample_interval} s")
    return tf


def write_map_csv(rdm: RangeDopplerMap, path) -> Path:
    """Normalized dB power; first row holds velocities, first column ranges."""
    path = Path(path)
    db = rdm.power_db()
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["range_m\\velocity_mps", *(repr(float(v)) for v in rdm.velocity_axis)])
        for r, row in zip(rdm.range_axis, db):
            writer.writerow([repr(float(r)), *(repr(float(x)) for x in row)])
    return path


def read_map_csv(path, window: WindowSpec = CHEBYSHEV_100, grid: str = "full") -> RangeDopplerMap:
    """Back to a (real, power-equivalent) map; enough for every metric."""
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    try:
        velocity = np.array([float(v) for v in rows[0][1:]])
        ranges = np.array([float(r[0]) for r in rows[1:]])
        db = np.array([[float(x) for x in r[1:]] for r in rows[1:]])
    except (ValueError, IndexError) as exc:
        raise FormatError(f"{path}: not a range-Doppler CSV ({exc})") from exc
    range_bin = float(ranges[1] - ranges[0]) if len(ranges) > 1 else 0.0
    velocity_bin = float(velocity[1] - velocity[0]) if len(velocity) > 1 else 0.0
    return RangeDopplerMap(np.sqrt(10 ** (db / 10)), range_bin, velocity_bin, window, grid)


def write_cut_csv(rdm: RangeDopplerMap, range_bin: int, path) -> Path:
    """Velocity cut through one range bin, normalized to the cut maximum."""
    path = Path(path)
    cut = rdm.power[range_bin]
    db = 10 * np.log10(np.maximum(cut / cut.max(), 1e-30))
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["velocity_mps", "power_db"])
        for v, x in zip(rdm.velocity_axis, db):
            writer.writerow([repr(float(v)), repr(float(x))])
    return path


def secret_record(secret: LpiSecret, cfg: FrameConfig) -> dict:
    return {
        "mode": secret.mode.value,
        "seed": secret.seed,
        "n_subcarriers": cfg.n_subcarriers,
        "n_symbols": cfg.n_symbols,
        "subcarrier_spacing_hz": cfg.subcarrier_spacing,
    }


def write_secret(secret: LpiSecret, cfg: FrameConfig, path) -> Path:
    return write_json(secret_record(secret, cfg), path)


def load_secret(record: dict, cfg: FrameConfig) -> LpiSecret:
    """Regenerate a secret from its record, refusing a mismatched frame."""
    try:
        n, m = record["n_subcarriers"], record["n_symbols"]
        spacing = record["subcarrier_spacing_hz"]
        mode, seed = record["mode"], int(record["seed"])
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"incomplete secret record: {exc}") from exc
    if (n, m) != cfg.grid_shape or not np.isclose(spacing, cfg.subcarrier_spacing):
        raise FormatError(f"secret for {n}x{m} at {spacing} Hz does not match frame "
                          f"{cfg.grid_shape} at {cfg.subcarrier_spacing} Hz")
    return generate_secret(cfg, mode, seed)


def read_secret(path, cfg: FrameConfig) -> LpiSecret:
    return load_secret(read_json(path), cfg)


def write_json(record, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(record, indent=2, sort_keys=True) + "\n")
    return path


def read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from exc
