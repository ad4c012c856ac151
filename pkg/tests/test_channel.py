"""Array, codebook, beam training, and refinement tests.

Sweep correctness is checked against a brute-force oracle that forms
the full channel matrix and scores every codeword pair one by one.
"""

import math

import numpy as np
import pytest

from mm3nlos.channel import (
    AZIMUTH_HALF_SPAN,
    ELEVATION_MAX,
    ELEVATION_MIN,
    ChannelRealization,
    UpaGeometry,
    array_response,
    aux_beam_refine,
    beam_sweep,
    build_codebook,
    channel_matrix,
    direction_cosines,
    received_snr,
    steering_from_cosines,
)
from mm3nlos.geom import SphericalAngles

WAVELENGTH = 299792458.0 / 60e9


def upa(n_h, n_v=None):
    return UpaGeometry.half_wavelength(n_h, n_v if n_v is not None else n_h, WAVELENGTH)


def random_coverage_angles(rng):
    az = rng.uniform(-AZIMUTH_HALF_SPAN, AZIMUTH_HALF_SPAN)
    el = rng.uniform(ELEVATION_MIN, ELEVATION_MAX)
    return SphericalAngles(float(az), float(el))


def cosine_error(a: SphericalAngles, b: SphericalAngles) -> float:
    ua, va = direction_cosines(a)
    ub, vb = direction_cosines(b)
    return math.hypot(ua - ub, va - vb)


# ---------------------------------------------------------------------------
# array responses

def test_geometry_validation():
    with pytest.raises(ValueError):
        UpaGeometry(0, 4, 0.0025, 0.005)
    with pytest.raises(ValueError):
        UpaGeometry(4, 4, -1.0, 0.005)
    g = upa(4, 2)
    assert g.n_elements == 8
    assert math.isclose(g.phase_pitch, math.pi)  # half-wavelength spacing


def test_direction_cosines_formula():
    u, v = direction_cosines(SphericalAngles(math.pi / 6, math.pi / 3))
    assert math.isclose(u, 0.5 * math.sin(math.pi / 3))
    assert math.isclose(v, 0.5)


def test_broadside_response_is_uniform():
    g = upa(4)
    a = array_response(g, SphericalAngles(0.0, math.pi / 2))
    np.testing.assert_allclose(a, np.full(16, 0.25), atol=1e-15)


def test_response_matches_the_per_element_phase():
    g = upa(3, 2)
    ang = SphericalAngles(0.4, 1.2)
    u, v = direction_cosines(ang)
    a = array_response(g, ang)
    for p in range(3):
        for q in range(2):
            want = np.exp(-1j * g.phase_pitch * (p * u + q * v)) / math.sqrt(6)
            assert abs(a[p * 2 + q] - want) < 1e-12


def test_response_unit_norm_and_conjugate_symmetry():
    g = upa(8, 4)
    rng = np.random.default_rng(2)
    for _ in range(25):
        ang = random_coverage_angles(rng)
        a = array_response(g, ang)
        assert math.isclose(float(np.linalg.norm(a)), 1.0, rel_tol=1e-12)
        mirrored = array_response(g, SphericalAngles(-ang.azimuth, math.pi - ang.elevation))
        np.testing.assert_allclose(np.conj(a), mirrored, atol=1e-12)


def test_channel_matrix_is_rank_one_with_matched_gain():
    g_tx, g_rx = upa(4), upa(2)
    ch = ChannelRealization(0.3 - 0.8j, SphericalAngles(0.2, 1.4), SphericalAngles(-0.5, 1.9), 3.0)
    h = channel_matrix(ch, g_tx, g_rx)
    assert h.shape == (4, 16)
    s = np.linalg.svd(h, compute_uv=False)
    assert s[1] < 1e-12 * s[0]
    # Frobenius norm carries the sqrt(Nt Nr) power scale.
    want = math.sqrt(g_tx.n_elements * g_rx.n_elements) * abs(ch.gain)
    assert math.isclose(float(np.linalg.norm(h)), want, rel_tol=1e-12)


def test_received_snr_matched_beams():
    g_tx, g_rx = upa(8), upa(4)
    ch = ChannelRealization(0.7 + 0.2j, SphericalAngles(0.3, 1.1), SphericalAngles(0.1, 2.0), 4.0)
    f = array_response(g_tx, ch.aod)
    w = array_response(g_rx, ch.aoa)
    p_t, noise = 50.0, 2.0
    got = received_snr(ch, f, w, g_tx, g_rx, p_t, noise)
    want = 10.0 * math.log10(p_t * g_tx.n_elements * g_rx.n_elements * abs(ch.gain) ** 2 / noise)
    assert math.isclose(got, want, rel_tol=1e-12)


def test_received_snr_vanishing_coupling():
    g = upa(8, 1)
    ch = ChannelRealization(1.0, SphericalAngles(0.0, math.pi / 2), SphericalAngles(0.0, math.pi / 2), 1.0)
    zero_gain = ChannelRealization(0.0, ch.aod, ch.aoa, 1.0)
    f = array_response(g, ch.aod)
    assert received_snr(zero_gain, f, np.ones(1), g, upa(1, 1), 1.0, 1.0) == -math.inf
    # Steering one full grating-null offset away cancels the array sum.
    f_null = steering_from_cosines(g, 2.0 / 8, 0.0)
    assert received_snr(ch, f_null, np.ones(1), g, upa(1, 1), 1.0, 1.0) < -100.0


# ---------------------------------------------------------------------------
# codebooks

def test_codebook_covers_the_sector_grid():
    g = upa(8, 4)
    cb = build_codebook(g, oversampling=2)
    assert len(cb) == (2 * 8) * (2 * 4)
    sin_span = math.sin(AZIMUTH_HALF_SPAN)
    assert cb.sin_az_grid.min() > -sin_span and cb.sin_az_grid.max() < sin_span
    assert cb.cos_el_grid.min() > math.cos(ELEVATION_MAX)
    assert cb.cos_el_grid.max() < math.cos(ELEVATION_MIN)
    # Cell-centered uniform grid: constant pitch equal to the cell width.
    np.testing.assert_allclose(np.diff(cb.sin_az_grid), cb.az_cell_width, atol=1e-12)
    np.testing.assert_allclose(np.diff(cb.cos_el_grid), cb.el_cell_width, atol=1e-12)
    norms = np.linalg.norm(cb.weights, axis=1)
    np.testing.assert_allclose(norms, 1.0, atol=1e-12)


def test_single_element_codebook_is_the_trivial_beam():
    cb = build_codebook(upa(1, 1))
    assert len(cb) == 1
    np.testing.assert_allclose(cb.weights[0], [1.0], atol=1e-15)
    assert math.isclose(cb.steerings[0].elevation, math.pi / 2)


def test_codebook_rejects_bad_oversampling():
    with pytest.raises(ValueError):
        build_codebook(upa(4), oversampling=0)


def quantization_loss_db(cb, ang):
    a = array_response(cb.geom, ang)
    best = float(np.max(np.abs(cb.weights.conj() @ a)))
    return -20.0 * math.log10(best)


def test_codebook_quantization_loss_is_bounded():
    g = upa(8)
    cb1 = build_codebook(g, oversampling=1)
    cb2 = build_codebook(g, oversampling=2)
    rng = np.random.default_rng(7)
    angles = [random_coverage_angles(rng) for _ in range(200)]
    loss1 = [quantization_loss_db(cb1, a) for a in angles]
    loss2 = [quantization_loss_db(cb2, a) for a in angles]
    assert float(np.median(loss1)) < 3.0
    assert max(loss2) < 3.0
    assert float(np.median(loss2)) < float(np.median(loss1))


# ---------------------------------------------------------------------------
# beam training

def exhaustive_best_pair(ch, tx_cb, rx_cb, p_t):
    """Independent sweep oracle over the explicit channel matrix."""
    h = channel_matrix(ch, tx_cb.geom, rx_cb.geom)
    best, arg = -math.inf, None
    for i in range(len(tx_cb)):
        for j in range(len(rx_cb)):
            w, _ = rx_cb[j]
            f, _ = tx_cb[i]
            power = p_t * abs(np.conj(w) @ h @ f) ** 2
            if power > best:
                best, arg = power, (i, j)
    return arg


def test_noiseless_sweep_matches_the_exhaustive_oracle():
    tx_cb = build_codebook(upa(8), 1)
    rx_cb = build_codebook(upa(4), 1)
    rng = np.random.default_rng(21)
    for _ in range(10):
        ch = ChannelRealization(
            complex(rng.standard_normal(), rng.standard_normal()) / math.sqrt(2),
            random_coverage_angles(rng),
            random_coverage_angles(rng),
            3.0,
        )
        got_tx, got_rx, snr = beam_sweep(ch, tx_cb, rx_cb, p_t=1.0, noise_power=0.0, rng=rng)
        i, j = exhaustive_best_pair(ch, tx_cb, rx_cb, p_t=1.0)
        assert got_tx == tx_cb.steerings[i]
        assert got_rx == rx_cb.steerings[j]
        assert snr == math.inf


def test_noiseless_sweep_picks_the_nearest_cell_per_axis():
    # Single-row and single-column arrays decouple the two steering axes,
    # so the winning codeword must be the nearest grid cell in sin-space.
    rng = np.random.default_rng(31)
    trivial = build_codebook(upa(1, 1))
    cb_az = build_codebook(upa(8, 1), 1)
    cb_el = build_codebook(upa(1, 8), 1)
    for _ in range(20):
        truth = random_coverage_angles(rng)
        ch = ChannelRealization(1.0, truth, SphericalAngles(0.0, math.pi / 2), 1.0)
        u, _ = direction_cosines(truth)
        got_az, _, _ = beam_sweep(ch, cb_az, trivial, 1.0, 0.0, rng)
        want = cb_az.sin_az_grid[np.argmin(np.abs(cb_az.sin_az_grid - u))]
        assert math.isclose(math.sin(got_az.azimuth), want, abs_tol=1e-12)
        got_el, _, _ = beam_sweep(ch, cb_el, trivial, 1.0, 0.0, rng)
        want = cb_el.cos_el_grid[np.argmin(np.abs(cb_el.cos_el_grid - math.cos(truth.elevation)))]
        assert math.isclose(math.cos(got_el.elevation), want, abs_tol=1e-12)


def test_oversampling_helps_on_average_but_is_not_nested():
    # Cell-centered grids shift when the density doubles, so a direction
    # sitting on a coarse center can lose up to a quarter cell; the gain
    # must still improve in the median and in the worst case.
    g = upa(8)
    cb1 = build_codebook(g, 1)
    cb2 = build_codebook(g, 2)
    rng = np.random.default_rng(123)
    deltas = []
    for _ in range(300):
        a = array_response(g, random_coverage_angles(rng))
        b1 = float(np.max(np.abs(cb1.weights.conj() @ a)))
        b2 = float(np.max(np.abs(cb2.weights.conj() @ a)))
        deltas.append(20.0 * math.log10(b2 / b1))
    assert float(np.median(deltas)) > 0.0
    assert min(deltas) > -1.5


def test_noisy_sweep_reports_the_winning_power():
    tx_cb = build_codebook(upa(4), 1)
    rx_cb = build_codebook(upa(4), 1)
    rng = np.random.default_rng(3)
    ch = ChannelRealization(0.9, random_coverage_angles(rng), random_coverage_angles(rng), 2.0)
    _, _, snr = beam_sweep(ch, tx_cb, rx_cb, p_t=100.0, noise_power=1.0, rng=rng)
    assert math.isfinite(snr)


def test_noise_dominated_sweep_picks_uniformly():
    # With the signal 160 dB under the noise the argmax must be uniform
    # over the 16 codeword pairs; chi-square test at the 1% level.
    tx_cb = build_codebook(upa(2), 1)
    rx_cb = build_codebook(upa(2), 1)
    rng = np.random.default_rng(0)
    counts = np.zeros((4, 4))
    sweeps = 2000
    for _ in range(sweeps):
        ch = ChannelRealization(1e-8, random_coverage_angles(rng), random_coverage_angles(rng), 2.0)
        got_tx, got_rx, _ = beam_sweep(ch, tx_cb, rx_cb, p_t=1.0, noise_power=1.0, rng=rng)
        counts[tx_cb.steerings.index(got_tx), rx_cb.steerings.index(got_rx)] += 1
    expected = sweeps / counts.size
    stat = float(((counts - expected) ** 2 / expected).sum())
    assert stat < 30.578  # chi-square critical value, 15 dof, 1%


# ---------------------------------------------------------------------------
# auxiliary refinement

def test_refine_validates_inputs():
    g = upa(8)
    ch = ChannelRealization(1.0, SphericalAngles(0.1, 1.5), SphericalAngles(0.0, 1.5), 1.0)
    coarse = SphericalAngles(0.1, 1.5)
    rng = np.random.default_rng(1)
    with pytest.raises(ValueError):
        aux_beam_refine(ch, coarse, "uplink", g, 0.01, 1.0, 0.0, rng)
    with pytest.raises(ValueError):
        aux_beam_refine(ch, coarse, "tx", g, 0.0, 1.0, 0.0, rng)
    with pytest.raises(ValueError):
        aux_beam_refine(ch, coarse, "tx", g, 0.01, 1.0, 0.0, rng, other_weights=np.ones(1))


def test_noiseless_refinement_lands_on_the_truth():
    g = upa(8)
    cb = build_codebook(g, 1)
    rng = np.random.default_rng(13)
    delta = 0.5 * cb.az_cell_width
    for _ in range(100):
        truth = random_coverage_angles(rng)
        ch = ChannelRealization(1.0, truth, SphericalAngles(0.0, math.pi / 2), 2.0)
        coarse, _, _ = beam_sweep(ch, cb, build_codebook(upa(1, 1)), 1.0, 0.0, rng)
        refined = aux_beam_refine(ch, coarse, "tx", g, delta, 1.0, 0.0, rng)
        before = cosine_error(coarse, truth)
        after = cosine_error(refined, truth)
        assert after < before
        assert after < 1e-9


def test_noisy_refinement_beats_the_codebook_grid_on_average():
    g = upa(8)
    cb = build_codebook(g, 1)
    rng = np.random.default_rng(29)
    delta = 0.5 * cb.az_cell_width
    p_t = 10.0 ** (30.0 / 10.0)  # 30 dB over unit noise
    before, after = [], []
    for _ in range(60):
        truth = random_coverage_angles(rng)
        ch = ChannelRealization(1.0, truth, SphericalAngles(0.0, math.pi / 2), 2.0)
        coarse, _, _ = beam_sweep(ch, cb, build_codebook(upa(1, 1)), p_t, 1.0, rng)
        refined = aux_beam_refine(ch, coarse, "tx", g, delta, p_t, 1.0, rng)
        before.append(cosine_error(coarse, truth))
        after.append(cosine_error(refined, truth))
    assert float(np.mean(after)) < 0.5 * float(np.mean(before))


class ZeroNoise:
    """Generator stub whose Gaussian draws are all zero."""

    def standard_normal(self, shape=None):
        return 0.0 if shape in ((), None) else np.zeros(shape)


def test_noise_floor_measurements_keep_the_coarse_beam():
    # A dead channel measures exactly zero power on every auxiliary beam,
    # which is at the noise floor, so both axes keep their coarse values.
    g = upa(8)
    coarse = SphericalAngles(0.2, 1.4)
    ch = ChannelRealization(0.0, SphericalAngles(0.21, 1.41), SphericalAngles(0.0, 1.5), 1.0)
    refined = aux_beam_refine(ch, coarse, "tx", g, 0.05, 1.0, 1.0, ZeroNoise())
    assert refined == coarse


def test_refinement_stays_inside_coverage():
    g = upa(4)
    rng = np.random.default_rng(17)
    edge = SphericalAngles(AZIMUTH_HALF_SPAN - 1e-3, ELEVATION_MAX - 1e-3)
    ch = ChannelRealization(1.0, edge, SphericalAngles(0.0, math.pi / 2), 1.0)
    refined = aux_beam_refine(ch, edge, "tx", g, 0.1, 1.0, 0.0, rng)
    assert abs(refined.azimuth) <= AZIMUTH_HALF_SPAN + 1e-12
    assert ELEVATION_MIN - 1e-12 <= refined.elevation <= ELEVATION_MAX + 1e-12
