import numpy as np
import pytest

from conftest import SMALL
from lpi_isac.channel import SceneConfig, Target, propagate
from lpi_isac.errors import DegenerateReferenceError, DimensionError
from lpi_isac.frame import FrameConfig, build_pilot_lattice, generate_frame, modulate
from lpi_isac.harness import DESK_FRAME
from lpi_isac.impair import (
    ImpairmentMode,
    LpiSecret,
    apply_doppler,
    apply_phase,
    generate_secret,
)
from lpi_isac.metrics import MaskSpec, islr
from lpi_isac.rdmap import (
    CHEBYSHEV_100,
    RECTANGULAR,
    WindowSpec,
    axis_bins,
    doppler_transform,
    range_transform,
)
from lpi_isac.rx_legit import (
    demap_and_ser,
    estimate_channel,
    legit_pipeline,
    legit_receive,
    nearest_pilot_equalize,
    residual_correction,
)


def chebyshev_oracle(n, sidelobe_db):
    """Dolph-Chebyshev taps from the frequency-sampled Chebyshev polynomial, summed directly."""
    ripple = 10 ** (sidelobe_db / 20)
    x0 = np.cosh(np.arccosh(ripple) / (n - 1))
    taps = np.zeros(n)
    for i in range(n):
        acc = 0j
        for k in range(n):
            x = x0 * np.cos(np.pi * k / n)
            if abs(x) <= 1:
                t = np.cos((n - 1) * np.arccos(x))
            elif x > 1:
                t = np.cosh((n - 1) * np.arccosh(x))
            else:
                t = (-1) ** (n - 1) * np.cosh((n - 1) * np.arccosh(-x))
            acc += t * np.exp(2j * np.pi * k * (i - (n - 1) / 2) / n)
        taps[i] = acc.real / n
    return taps / taps.max()


def dtft_db(taps, pad=64):
    resp = np.abs(np.fft.fft(taps, pad * len(taps))) ** 2
    return 10 * np.log10(np.maximum(resp / resp.max(), 1e-300))


def impaired_rx(cfg, grid, secret, scene):
    tf = apply_doppler(modulate(apply_phase(grid, secret), cfg), secret, cfg)
    return propagate(tf, scene, cfg)


def static_scene(cfg):
    return SceneConfig((Target.from_bins(0.1, 24, cfg), Target.from_bins(0.07j, 56, cfg)))


class TestWindow:
    @pytest.mark.parametrize("n", [8, 31, 32, 64, 128, 256])
    def test_taps_match_oracle(self, n):
        assert np.max(np.abs(CHEBYSHEV_100.taps(n) - chebyshev_oracle(n, 100.0))) < 1e-9

    @pytest.mark.parametrize("n", [32, 64, 128, 256])
    def test_sidelobes_sit_at_the_design_level(self, n):
        pad = 64
        resp = dtft_db(CHEBYSHEV_100.taps(n), pad)
        null = int(np.ceil(CHEBYSHEV_100.first_null_bins(n) * pad))
        side = resp[null:len(resp) - null]
        assert side.max() <= -95.0
        # equiripple: the highest sidelobe is at the design level, not far below it
        assert side.max() == pytest.approx(-100.0, abs=0.5)

    @pytest.mark.parametrize("n", [32, 64, 128])
    def test_first_null_location(self, n):
        pad = 256
        resp = dtft_db(CHEBYSHEV_100.taps(n), pad)
        first_min = np.argmax(np.diff(resp[: pad * 8]) > 0)
        assert first_min / pad == pytest.approx(CHEBYSHEV_100.first_null_bins(n), abs=2 / pad)

    def test_mainlobe_widths(self):
        assert RECTANGULAR.mainlobe_halfwidth(64) == 1
        assert CHEBYSHEV_100.mainlobe_halfwidth(32) == 4
        assert CHEBYSHEV_100.mainlobe_halfwidth(128) == 4

    def test_invalid(self):
        with pytest.raises(ValueError):
            WindowSpec("hann")
        with pytest.raises(ValueError):
            WindowSpec("chebyshev", 0)


class TestTransforms:
    def test_range_and_doppler_focus(self):
        n, m, r0, q = 64, 16, 9, -3
        k = np.arange(n)[:, None]
        mm = np.arange(m)[None, :]
        d = np.exp(-2j * np.pi * k * r0 / n) * np.exp(2j * np.pi * q * mm / m)
        i_r = range_transform(d, RECTANGULAR)
        assert np.abs(i_r[r0]) == pytest.approx(np.sqrt(n) * np.ones(m))
        assert np.allclose(np.delete(i_r, r0, axis=0), 0, atol=1e-12)
        rd = doppler_transform(i_r, RECTANGULAR)
        assert np.abs(rd[r0, m // 2 + q]) == pytest.approx(np.sqrt(n * m))

    def test_axis_bins(self):
        range_bin, velocity_bin = axis_bins(DESK_FRAME, 256, 64)
        assert range_bin == pytest.approx(299_792_458.0 / (2 * 100e6))
        tsym = DESK_FRAME.symbol_duration
        assert velocity_bin == pytest.approx(299_792_458.0 / (2 * 27e9) / (64 * tsym))
        pil_range, pil_velocity = axis_bins(DESK_FRAME, 128, 32, 2, 2)
        assert (pil_range, pil_velocity) == pytest.approx((range_bin, velocity_bin))
        bi_range, _ = axis_bins(DESK_FRAME, 256, 64, geometry="bistatic")
        assert bi_range == pytest.approx(2 * range_bin)
        with pytest.raises(ValueError):
            axis_bins(DESK_FRAME, 256, 64, geometry="tristatic")


class TestChannelEstimate:
    def test_division(self, small_grid):
        assert np.allclose(estimate_channel(2 * small_grid, small_grid), 2)

    def test_degenerate_reference(self, small_grid):
        tx = small_grid.copy()
        tx[3, 4] = 1e-9
        with pytest.raises(DegenerateReferenceError):
            estimate_channel(small_grid, tx)

    def test_shape_mismatch(self, small_grid):
        with pytest.raises(DimensionError):
            estimate_channel(small_grid, small_grid[:, :-1])


class TestCompensation:
    def test_los_only_returns_the_transmit_grid(self, small_grid):
        s = generate_secret(SMALL, "subcarrier_wise", 31)
        rx = impaired_rx(SMALL, small_grid, s, SceneConfig())
        assert np.max(np.abs(legit_receive(rx, s, SMALL) - small_grid)) < 1e-12

    def test_delayed_echo_keeps_a_delay_dependent_phase(self, small_grid):
        s = generate_secret(SMALL, "subcarrier_wise", 31)
        n_p, gain = 6, 0.4 + 0.1j
        scene = SceneConfig((Target(gain, n_p * SMALL.sample_interval),), los_gain=0.0)
        d = estimate_channel(legit_receive(impaired_rx(SMALL, small_grid, s, scene), s, SMALL),
                             small_grid)
        k = np.arange(SMALL.n_subcarriers)[:, None]
        expected = (gain * np.exp(-2j * np.pi * k * n_p / SMALL.n_subcarriers)
                    * np.exp(-2j * np.pi * s.doppler[None, :] * n_p * SMALL.sample_interval))
        assert np.allclose(d, expected, atol=1e-12)

    def test_correction_phase_value(self):
        cfg = FrameConfig(6756, 1, 0, 1e9, 27e9)
        s = LpiSecret(ImpairmentMode.SYMBOL_WISE, 0, np.zeros((6756, 1)), np.array([6e4]))
        out = residual_correction(np.ones((101, 1), complex), s, cfg)
        assert np.angle(out[100, 0]) == pytest.approx(0.0377, abs=1e-4)
        assert np.angle(out[0, 0]) == 0.0

    def test_corrected_phase_matches_unimpaired(self):
        cfg = DESK_FRAME
        grid = generate_frame(cfg, build_pilot_lattice(cfg), 2)
        scene = SceneConfig((Target.from_bins(0.1, 56, cfg),))
        none = generate_secret(cfg, "none", 0)
        ref = range_transform(
            estimate_channel(legit_receive(impaired_rx(cfg, grid, none, scene), none, cfg), grid),
            RECTANGULAR)
        s = generate_secret(cfg, "subcarrier_wise", 5)
        d = estimate_channel(legit_receive(impaired_rx(cfg, grid, s, scene), s, cfg), grid)
        raw = range_transform(d, RECTANGULAR)
        fixed = residual_correction(raw, s, cfg)
        assert np.max(np.abs(np.angle(fixed[56] / ref[56]))) < 1e-9
        assert np.max(np.abs(np.angle(raw[56] / ref[56]))) > 0.1

    @pytest.mark.parametrize("mode", ["symbol_wise", "subcarrier_wise"])
    def test_transparency(self, mode):
        cfg = DESK_FRAME
        lattice = build_pilot_lattice(cfg)
        grid = generate_frame(cfg, lattice, 2)
        scene = static_scene(cfg)
        none = generate_secret(cfg, "none", 0)
        ref = legit_pipeline(impaired_rx(cfg, grid, none, scene), grid, none, cfg).values
        for seed in range(5):
            s = generate_secret(cfg, mode, seed)
            rx = impaired_rx(cfg, grid, s, scene)
            out = legit_pipeline(rx, grid, s, cfg).values
            assert np.max(np.abs(out - ref)) / np.max(np.abs(ref)) <= 1e-6
            eq = nearest_pilot_equalize(legit_receive(rx, s, cfg), grid, lattice)
            assert demap_and_ser(eq, grid, lattice) == 0.0

    def test_moving_targets_stay_close(self):
        # the echoes' own Doppler leaks between subcarriers differently for
        # impaired and unimpaired frames; the mismatch is small, not zero
        cfg = DESK_FRAME
        grid = generate_frame(cfg, build_pilot_lattice(cfg), 2)
        scene = SceneConfig((Target.from_bins(0.1, 24, cfg, 8),))
        none = generate_secret(cfg, "none", 0)
        ref = legit_pipeline(impaired_rx(cfg, grid, none, scene), grid, none, cfg).values
        s = generate_secret(cfg, "subcarrier_wise", 1)
        out = legit_pipeline(impaired_rx(cfg, grid, s, scene), grid, s, cfg).values
        assert np.max(np.abs(out - ref)) / np.max(np.abs(ref)) < 1e-2

    def test_skipping_the_correction_raises_islr(self):
        cfg = DESK_FRAME
        grid = generate_frame(cfg, build_pilot_lattice(cfg), 2)
        scene = SceneConfig((Target.from_bins(0.1, 80, cfg),))
        s = generate_secret(cfg, "subcarrier_wise", 3)
        rx = impaired_rx(cfg, grid, s, scene)
        on = legit_pipeline(rx, grid, s, cfg)
        off = legit_pipeline(rx, grid, s, cfg, correct_residual=False)
        cell = (80, on.column_of(0))
        assert islr(off, cell, MaskSpec()) > islr(on, cell, MaskSpec()) + 3

    def test_map_metadata(self, small_grid):
        s = generate_secret(SMALL, "none", 0)
        rdm = legit_pipeline(modulate(small_grid, SMALL), small_grid, s, SMALL, geometry="bistatic")
        assert rdm.shape == SMALL.grid_shape and rdm.grid == "full"
        assert rdm.range_bin_m == pytest.approx(299_792_458.0 / SMALL.bandwidth)


class TestSer:
    def test_perfect_and_flipped(self, small_grid, small_lattice):
        assert demap_and_ser(small_grid, small_grid, small_lattice) == 0.0
        assert demap_and_ser(-small_grid, small_grid, small_lattice) == 1.0

    def test_uniform_phase_gives_three_quarters(self):
        cfg = FrameConfig(512, 256, 0, 512e3, 27e9)
        lattice = build_pilot_lattice(cfg)
        grid = generate_frame(cfg, lattice, 1)
        rotated = apply_phase(grid, generate_secret(cfg, "subcarrier_wise", 2))
        n = (~lattice.mask(cfg.grid_shape)).sum()
        sigma = np.sqrt(0.75 * 0.25 / n)
        assert abs(demap_and_ser(rotated, grid, lattice) - 0.75) < 4 * sigma
