import numpy as np
import pytest

from conftest import SMALL
from lpi_isac.channel import SceneConfig, Target, add_awgn, propagate
from lpi_isac.errors import UnsupportedDelayError
from lpi_isac.frame import SPEED_OF_LIGHT, FrameConfig, demodulate, modulate
from lpi_isac.harness import DESK_FRAME
from lpi_isac.impair import ImpairmentMode, generate_secret
from lpi_isac.rdmap import RECTANGULAR
from lpi_isac.rx_legit import estimate_channel, legit_pipeline, legit_receive


def test_los_only_is_identity(small_grid):
    tf = modulate(small_grid, SMALL)
    assert np.array_equal(propagate(tf, SceneConfig(), SMALL), tf)


def test_los_zero_gain_drops_the_path(small_grid):
    tf = modulate(small_grid, SMALL)
    assert not propagate(tf, SceneConfig(los_gain=0.0), SMALL).any()


def test_static_echo_is_a_linear_phase(small_grid):
    # a delay inside the CP is a per-subcarrier phase ramp after demodulation
    tf = modulate(small_grid, SMALL)
    echo = Target(0.3 - 0.2j, 5 * SMALL.sample_interval)
    rx = propagate(tf, SceneConfig((echo,), los_gain=0.0), SMALL)
    h = estimate_channel(demodulate(rx, SMALL), small_grid)
    k = np.arange(SMALL.n_subcarriers)[:, None]
    assert np.allclose(h, echo.gain * np.exp(-2j * np.pi * k * 5 / SMALL.n_subcarriers), atol=1e-12)


def test_delay_is_a_prepended_zero_run():
    tf = np.arange(1, 1 + np.prod(SMALL.frame_shape), dtype=complex).reshape(SMALL.frame_shape)
    rx = propagate(tf, SceneConfig((Target(1.0, 3 * SMALL.sample_interval),), los_gain=0.0), SMALL)
    stream = rx.reshape(-1)
    assert not stream[:3].any()
    assert np.array_equal(stream[3:], tf.reshape(-1)[:-3])


def test_doppler_phase_is_continuous_across_symbols():
    tf = np.ones(SMALL.frame_shape, complex)
    f = 123e3
    rx = propagate(tf, SceneConfig((Target(1.0, 0.0, f),), los_gain=0.0), SMALL).reshape(-1)
    n = np.arange(rx.size)
    assert np.allclose(rx, np.exp(2j * np.pi * f * n * SMALL.sample_interval), atol=1e-12)


def test_superposition(small_grid):
    tf = modulate(small_grid, SMALL)
    a = Target(0.5, 2 * SMALL.sample_interval, 1e4)
    b = Target(0.2j, 7 * SMALL.sample_interval, -3e4)
    both = propagate(tf, SceneConfig((a, b)), SMALL)
    parts = sum(propagate(tf, SceneConfig((t,), los_gain=0.0), SMALL) for t in (a, b)) + tf
    assert np.allclose(both, parts, atol=1e-14)


def test_delay_beyond_one_symbol_is_rejected(small_grid):
    tf = modulate(small_grid, SMALL)
    far = Target(1.0, SMALL.symbol_length * SMALL.sample_interval)
    with pytest.raises(UnsupportedDelayError):
        propagate(tf, SceneConfig((far,)), SMALL)


def test_negative_delay_is_rejected():
    with pytest.raises(ValueError):
        Target(1.0, -1e-9)


def test_awgn_variance():
    tf = np.ones((1000, 1000), complex) * 2.0
    noisy = add_awgn(tf, 10.0, noise_seed=1)
    noise = noisy - tf
    assert np.mean(np.abs(noise) ** 2) == pytest.approx(0.4, rel=0.03)
    assert abs(np.mean(noise)) < 0.01
    assert np.var(noise.real) == pytest.approx(np.var(noise.imag), rel=0.03)


def test_awgn_seeded_and_optional():
    tf = np.ones(SMALL.frame_shape, complex)
    assert add_awgn(tf, None, 1) is tf
    assert np.array_equal(add_awgn(tf, 20, 5), add_awgn(tf, 20, 5))
    assert not np.array_equal(add_awgn(tf, 20, 5), add_awgn(tf, 20, 6))


def test_physical_target_conversion():
    cfg = DESK_FRAME
    t = Target.from_physical(1.0, 15.0, 10.0, cfg)
    assert t.delay == pytest.approx(2 * 15.0 / SPEED_OF_LIGHT)
    assert t.doppler == pytest.approx(2 * 10.0 * cfg.carrier_freq / SPEED_OF_LIGHT)
    one_way = Target.from_physical(1.0, 15.0, 10.0, cfg, bistatic=True)
    assert one_way.delay == pytest.approx(t.delay / 2)


@pytest.mark.parametrize("q", [-20, -7, 3, 12, 31])
def test_target_lands_on_its_doppler_bin(q):
    # a Doppler of q/(M*T_sym) focuses on Doppler bin q of the legitimate map
    cfg = DESK_FRAME
    grid = np.exp(1j * np.pi / 4) * np.ones(cfg.grid_shape)
    target = Target.from_bins(1.0, 10, cfg, q)
    rx = propagate(modulate(grid, cfg), SceneConfig((target,), los_gain=0.0), cfg)
    none = generate_secret(cfg, ImpairmentMode.NONE, 0)
    rdm = legit_pipeline(rx, grid, none, cfg, RECTANGULAR)
    r, c = np.unravel_index(np.argmax(rdm.power), rdm.shape)
    assert (r, c) == (10, rdm.column_of(q))


def test_subcarrier_spacing_multiple_is_not_a_doppler_bin():
    # q * df * N / (N + N_cp) is a whole number of cycles per symbol and
    # aliases back to zero Doppler
    cfg = FrameConfig(64, 32, 16, 64e6, 27e9)
    grid = np.ones(cfg.grid_shape, complex)
    f = 3 * cfg.subcarrier_spacing * cfg.n_subcarriers / cfg.symbol_length
    rx = propagate(modulate(grid, cfg), SceneConfig((Target(1.0, 0.0, f),), los_gain=0.0), cfg)
    none = generate_secret(cfg, ImpairmentMode.NONE, 0)
    d = estimate_channel(legit_receive(rx, none, cfg), grid)
    phase_step = np.angle(d[0, 1:] / d[0, :-1])
    assert np.allclose(phase_step, 0.0, atol=1e-9)
