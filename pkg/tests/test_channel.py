import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maofdm.channel import (
    PathGeometry,
    Region,
    TapCluster,
    WidebandChannel,
    as_position,
    cfr,
    cir,
    cir_batch,
    cir_tap,
    clamp_to_region,
    frv,
    wave_vector,
)
from maofdm.scenario import ScenarioConfig, sample_channel
from maofdm.theory import periodic_channel

from conftest import random_channel, random_tap, single_path_channel

coord = st.floats(-10, 10, allow_nan=False)
position = st.tuples(coord, coord, coord)


def test_wave_vector_is_unit_and_matches_trig():
    rng = np.random.default_rng(0)
    for _ in range(50):
        el, az = np.arcsin(rng.uniform(-1, 1)), rng.uniform(-np.pi, np.pi)
        k = wave_vector(el, az)
        assert np.linalg.norm(k) == pytest.approx(1.0, abs=1e-14)
        assert k[0] == pytest.approx(np.cos(el) * np.cos(az))
        assert k[1] == pytest.approx(np.cos(el) * np.sin(az))
        assert k[2] == pytest.approx(np.sin(el))


def test_path_geometry_rejects_bad_elevation():
    with pytest.raises(ValueError):
        PathGeometry(2.0, 0.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        PathGeometry(0.0, 0.0, -1.6, 0.0)


def test_tap_cluster_validation():
    p = PathGeometry(0, 0, 0, 0)
    with pytest.raises(ValueError):
        TapCluster([], [])
    with pytest.raises(ValueError):
        TapCluster([p, p], [1.0])


def test_channel_validation():
    with pytest.raises(ValueError):
        WidebandChannel(())
    with pytest.raises(ValueError):
        WidebandChannel(single_path_channel().taps, wavelength=0.0)


def test_position_must_be_finite():
    with pytest.raises(ValueError):
        as_position([0, np.nan, 0])


def test_frv_origin_is_all_ones(rng):
    tap = random_tap(rng, 5)
    assert np.allclose(frv(tap, np.zeros(3), "tx"), 1.0)
    assert np.allclose(frv(tap, np.zeros(3), "rx"), 1.0)


def test_frv_half_wavelength_along_zenith():
    tap = TapCluster([PathGeometry(np.pi / 2, 0.0, 0.0, 0.0)], [1.0])
    assert frv(tap, [0, 0, 0.5], "tx") == pytest.approx(np.array([-1.0]), abs=1e-14)


def test_frv_matches_scalar_recomputation(rng):
    tap = random_tap(rng, 3)
    pos = (0.37, -1.2, 0.05)
    got = frv(tap, pos, "tx")
    for l, path in enumerate(tap.paths):
        ce = np.cos(path.elev_aod)
        k = (ce * np.cos(path.azim_aod), ce * np.sin(path.azim_aod), np.sin(path.elev_aod))
        phase = 2 * np.pi * (pos[0] * k[0] + pos[1] * k[1] + pos[2] * k[2])
        assert got[l] == pytest.approx(complex(np.cos(phase), np.sin(phase)), abs=1e-13)


def test_frv_bad_side(rng):
    with pytest.raises(ValueError):
        frv(random_tap(rng, 1), np.zeros(3), "up")


@settings(max_examples=50, deadline=None)
@given(position)
def test_frv_unit_modulus(pos):
    tap = random_tap(np.random.default_rng(7), 6)
    assert np.allclose(np.abs(frv(tap, pos, "tx")), 1.0, atol=1e-12)
    assert np.allclose(np.abs(frv(tap, pos, "rx")), 1.0, atol=1e-12)


def test_cir_tap_at_origin_sums_coefficients(rng):
    tap = random_tap(rng, 4)
    assert cir_tap(tap, np.zeros(3), np.zeros(3)) == pytest.approx(tap.coeffs.sum())


def test_cir_tap_single_path_magnitude(rng):
    tap = random_tap(rng, 1)
    for _ in range(10):
        t, r = rng.uniform(-3, 3, 3), rng.uniform(-3, 3, 3)
        assert abs(cir_tap(tap, t, r)) == pytest.approx(abs(tap.coeffs[0]), rel=1e-13)


def test_cir_tap_matches_extended_precision_sum(rng):
    tap = random_tap(rng, 5)
    t, r = rng.uniform(-2, 2, 3), rng.uniform(-2, 2, 3)
    mpmath.mp.dps = 40
    acc = mpmath.mpc(0)
    for b, path in zip(tap.coeffs, tap.paths):
        kt = [mpmath.cos(path.elev_aod) * mpmath.cos(path.azim_aod),
              mpmath.cos(path.elev_aod) * mpmath.sin(path.azim_aod),
              mpmath.sin(path.elev_aod)]
        kr = [mpmath.cos(path.elev_aoa) * mpmath.cos(path.azim_aoa),
              mpmath.cos(path.elev_aoa) * mpmath.sin(path.azim_aoa),
              mpmath.sin(path.elev_aoa)]
        ph = 2 * mpmath.pi * (sum(mpmath.mpf(t[i]) * kt[i] for i in range(3))
                              - sum(mpmath.mpf(r[i]) * kr[i] for i in range(3)))
        acc += mpmath.mpc(b.real, b.imag) * mpmath.expj(ph)
    assert cir_tap(tap, t, r) == pytest.approx(complex(acc), abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(position, position)
def test_cir_tap_triangle_bound(t, r):
    tap = random_tap(np.random.default_rng(3), 5)
    assert abs(cir_tap(tap, t, r)) <= tap.l1_norm + 1e-12


def test_cir_single_tap_and_origin(rng):
    ch = random_channel(rng, T=1, L=3)
    t, r = rng.normal(size=3), rng.normal(size=3)
    assert cir(ch, t, r) == pytest.approx(np.array([cir_tap(ch.taps[0], t, r)]))
    ch = random_channel(rng, T=4, L=2)
    assert cir(ch, np.zeros(3), np.zeros(3)) == pytest.approx(
        np.array([tap.coeffs.sum() for tap in ch.taps])
    )


def test_cir_batch_matches_per_tap_on_scenario_channel(rng):
    ch = sample_channel(ScenarioConfig(), 3)
    ts = rng.uniform(-2, 2, (20, 3))
    rs = rng.uniform(-2, 2, (20, 3))
    h = cir_batch(ch, ts, rs)
    assert h.shape == (20, ch.n_taps)
    for q in range(20):
        ref = [cir_tap(tap, ts[q], rs[q]) for tap in ch.taps]
        assert np.allclose(h[q], ref, atol=1e-12)


def direct_dft(h, M):
    c = np.zeros(M, dtype=complex)
    for m in range(M):
        for tau in range(len(h)):
            c[m] += h[tau] * np.exp(-2j * np.pi * m * tau / M)
    return c


def test_cfr_of_delta_is_flat():
    assert np.allclose(cfr([1.0], 8), np.ones(8))


def test_cfr_one_sample_delay():
    assert np.allclose(cfr([0.0, 1.0], 4), [1, -1j, -1, 1j])


def test_cfr_matches_direct_sum(rng):
    h = rng.normal(size=6) + 1j * rng.normal(size=6)
    assert np.allclose(cfr(h, 64), direct_dft(h, 64), atol=1e-12)


def test_cfr_rejects_too_few_subcarriers():
    with pytest.raises(ValueError):
        cfr(np.ones(5), 4)


def test_parseval(rng):
    for _ in range(20):
        h = rng.normal(size=6) + 1j * rng.normal(size=6)
        c = cfr(h, 64)
        assert np.sum(np.abs(c) ** 2) == pytest.approx(64 * np.sum(np.abs(h) ** 2), rel=1e-10)


def test_clamp_to_region():
    reg = Region.cube(2.0)
    inside = np.array([0.5, -1.0, 1.9])
    assert np.array_equal(clamp_to_region(inside, reg), inside)
    assert np.array_equal(clamp_to_region([3, 0, 0], reg), [2, 0, 0])
    assert np.array_equal(clamp_to_region([5, -7, 9], reg), [2, -2, 2])


@settings(max_examples=50, deadline=None)
@given(position)
def test_clamp_idempotent_and_inside(pos):
    reg = Region(np.array([-1.0, 0.0, 0.5]), np.array([1.0, 0.0, 2.0]))
    once = clamp_to_region(pos, reg)
    assert reg.contains(once)
    assert np.array_equal(clamp_to_region(once, reg), once)


def test_region_validation_and_degenerate_axes():
    with pytest.raises(ValueError):
        Region(np.ones(3), np.zeros(3))
    reg = Region(np.array([-1.0, 0.0, 0.0]), np.array([1.0, 0.0, 0.0]))
    assert list(reg.degenerate_axes) == [False, True, True]
    assert np.all(Region.point().degenerate_axes)


def test_translation_multiplies_path_terms(rng):
    ch = WidebandChannel(tuple(random_tap(rng, 1) for _ in range(3)))
    t, r, d = rng.normal(size=3), rng.normal(size=3), rng.normal(size=3)
    h0, h1 = cir(ch, t, r), cir(ch, t + d, r)
    assert np.allclose(np.abs(h0), np.abs(h1), rtol=1e-12)
    shift = np.exp(2j * np.pi * ch.k_tx @ d)
    assert np.allclose(h1, h0 * shift, atol=1e-12)


def test_rational_angles_give_periodic_cir(rng):
    base = 1 / 7
    ch = periodic_channel([1, 2, 3, -4, 5], base, coeffs=rng.normal(size=5) + 1j)
    period = 1 / base
    for _ in range(5):
        t, r = rng.uniform(-2, 2, 3), rng.uniform(-2, 2, 3)
        assert np.allclose(cir(ch, t + [period, 0, 0], r), cir(ch, t, r), atol=1e-9)


def test_random_angles_are_not_periodic():
    ch = sample_channel(ScenarioConfig(), 0)
    t, r = np.zeros(3), np.zeros(3)
    h0 = cir(ch, t, r)
    shifts = np.arange(1, 200, dtype=float)
    diffs = [np.max(np.abs(cir(ch, t + [x, 0, 0], r) - h0)) for x in shifts]
    assert min(diffs) > 1e-6


def test_to_meters():
    ch = single_path_channel()
    assert np.allclose(ch.to_meters([1, 2, 0]), [0.125, 0.25, 0])
