"""mmWave physical layer: planar arrays, beams, sweeps, refinement.

Models a single-path link between two uniform planar arrays (UPAs).  The
channel is rank one: a complex gain times the outer product of receive
and transmit steering vectors.  Angle estimation is simulated two ways:

* an exhaustive sweep over a Kronecker-product codebook, taking the
  transmit/receive pair with the highest noisy received power, and
* an auxiliary-beam refinement step that steers two beams slightly off
  the coarse estimate per angular coordinate and inverts the measured
  power ratio through the array factor (amplitude-comparison monopulse).

Directions use the global azimuth/elevation convention of
:mod:`mm3nlos.geom`; arrays are addressed in their own local frame, so
callers rotate angles into that frame first.  Only NumPy and the
standard library are used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geom import SphericalAngles

SPEED_OF_LIGHT = 299792458.0

#: Codebook coverage: azimuth within +-60 degrees of broadside.
AZIMUTH_HALF_SPAN = math.pi / 3.0

#: Codebook coverage: elevation within [45, 135] degrees.
ELEVATION_MIN = math.pi / 4.0
ELEVATION_MAX = 3.0 * math.pi / 4.0

# Fraction of the first array-factor null kept for monopulse inversion;
# beyond it the log-ratio is no longer monotone-safe.
_MAINLOBE_FRACTION = 0.95

_TINY_POWER = 1e-300


@dataclass(frozen=True)
class UpaGeometry:
    """Uniform planar array: n_h x n_v elements on a rectangular grid.

    spacing and wavelength are in meters.  The horizontal axis indexes
    azimuth steering (direction cosine u = sin(az) * sin(el)), the
    vertical axis elevation steering (v = cos(el)).
    """

    n_h: int
    n_v: int
    spacing: float
    wavelength: float

    def __post_init__(self) -> None:
        if self.n_h < 1 or self.n_v < 1:
            raise ValueError("antenna counts must be positive")
        if not (self.spacing > 0.0 and self.wavelength > 0.0):
            raise ValueError("spacing and wavelength must be > 0")

    @classmethod
    def half_wavelength(cls, n_h: int, n_v: int, wavelength: float) -> "UpaGeometry":
        return cls(n_h, n_v, 0.5 * wavelength, wavelength)

    @property
    def n_elements(self) -> int:
        return self.n_h * self.n_v

    @property
    def wavenumber(self) -> float:
        return 2.0 * math.pi / self.wavelength

    @property
    def phase_pitch(self) -> float:
        """k * d: phase advance per element per unit direction cosine."""
        return self.wavenumber * self.spacing


@dataclass(frozen=True)
class ChannelRealization:
    """One single-bounce path between the arrays.

    gain is the small-scale complex amplitude (drawn CN(0,1) by the
    simulator); aod/aoa are the path directions in the transmit and
    receive array frames; path_length is carried along for ranging.
    """

    gain: complex
    aod: SphericalAngles
    aoa: SphericalAngles
    path_length: float


def direction_cosines(angles: SphericalAngles) -> tuple[float, float]:
    """(u, v) = (sin(az) sin(el), cos(el)) steering coordinates."""
    return (
        math.sin(angles.azimuth) * math.sin(angles.elevation),
        math.cos(angles.elevation),
    )


def steering_from_cosines(geom: UpaGeometry, u: float, v: float) -> np.ndarray:
    """Unit-norm weight vector with phase -k*d*(p*u + q*v) at element (p, q).

    (u, v) need not come from a physical direction; auxiliary beams may
    step slightly outside the reachable direction-cosine disk.
    """
    pitch = geom.phase_pitch
    h = np.exp(-1j * pitch * u * np.arange(geom.n_h)) / math.sqrt(geom.n_h)
    w = np.exp(-1j * pitch * v * np.arange(geom.n_v)) / math.sqrt(geom.n_v)
    return np.kron(h, w)


def array_response(geom: UpaGeometry, angles: SphericalAngles) -> np.ndarray:
    """Unit-norm steering vector of the array toward the given direction.

    Element (p, q) carries phase -k*d*(p*u + q*v); the vector is the
    Kronecker product of the horizontal and vertical factors, indexed
    p * n_v + q.
    """
    u, v = direction_cosines(angles)
    return steering_from_cosines(geom, u, v)


def channel_matrix(ch: ChannelRealization, tx: UpaGeometry, rx: UpaGeometry) -> np.ndarray:
    """Rank-one channel: sqrt(N_t N_r) * g * a_rx * a_tx^H."""
    a_t = array_response(tx, ch.aod)
    a_r = array_response(rx, ch.aoa)
    scale = math.sqrt(tx.n_elements * rx.n_elements)
    return scale * ch.gain * np.outer(a_r, a_t.conj())


def _beam_coupling(
    ch: ChannelRealization,
    f: np.ndarray,
    w: np.ndarray,
    tx: UpaGeometry,
    rx: UpaGeometry,
) -> complex:
    """w^H H f without forming H."""
    a_t = array_response(tx, ch.aod)
    a_r = array_response(rx, ch.aoa)
    scale = math.sqrt(tx.n_elements * rx.n_elements)
    return scale * ch.gain * complex(np.vdot(w, a_r)) * complex(np.vdot(a_t, f))


def received_snr(
    ch: ChannelRealization,
    f: np.ndarray,
    w: np.ndarray,
    tx: UpaGeometry,
    rx: UpaGeometry,
    p_t: float,
    noise_power: float,
) -> float:
    """Post-beamforming SNR, dB: 10 log10(p_t |w^H H f|^2 / noise_power).

    Zero coupling returns -inf.
    """
    power = p_t * abs(_beam_coupling(ch, f, w, tx, rx)) ** 2
    if power <= 0.0:
        return -math.inf
    return 10.0 * math.log10(power / noise_power)


class Codebook:
    """Beam codebook on a Kronecker product of per-axis steering grids.

    Grid points sample the direction-cosine coverage spans uniformly
    with oversampling * n_h (or n_v) cells, steering at cell centers.
    Codeword i * m_v + j pairs horizontal cell i with vertical cell j.
    """

    def __init__(self, geom: UpaGeometry, sin_az_grid: np.ndarray, cos_el_grid: np.ndarray) -> None:
        self.geom = geom
        self.sin_az_grid = np.asarray(sin_az_grid, dtype=float)
        self.cos_el_grid = np.asarray(cos_el_grid, dtype=float)
        self.steerings: list[SphericalAngles] = []
        weights = np.empty((self.sin_az_grid.size * self.cos_el_grid.size, geom.n_elements), dtype=complex)
        idx = 0
        for s in self.sin_az_grid:
            az = math.asin(float(s))
            for c in self.cos_el_grid:
                ang = SphericalAngles(az, math.acos(float(c)))
                self.steerings.append(ang)
                weights[idx] = array_response(geom, ang)
                idx += 1
        self.weights = weights

    def __len__(self) -> int:
        return self.weights.shape[0]

    def __getitem__(self, i: int) -> tuple[np.ndarray, SphericalAngles]:
        return self.weights[i], self.steerings[i]

    @property
    def az_cell_width(self) -> float:
        """Horizontal grid pitch in direction-cosine units."""
        return 2.0 * math.sin(AZIMUTH_HALF_SPAN) / self.sin_az_grid.size

    @property
    def el_cell_width(self) -> float:
        return (math.cos(ELEVATION_MIN) - math.cos(ELEVATION_MAX)) / self.cos_el_grid.size


def _cell_centers(lo: float, hi: float, count: int) -> np.ndarray:
    step = (hi - lo) / count
    return lo + (np.arange(count) + 0.5) * step


def build_codebook(geom: UpaGeometry, oversampling: int = 1) -> Codebook:
    """Codebook covering azimuth +-60 deg and elevation 45..135 deg."""
    if oversampling < 1:
        raise ValueError("oversampling must be >= 1")
    sin_span = math.sin(AZIMUTH_HALF_SPAN)
    sin_az = _cell_centers(-sin_span, sin_span, oversampling * geom.n_h)
    cos_el = _cell_centers(math.cos(ELEVATION_MAX), math.cos(ELEVATION_MIN), oversampling * geom.n_v)
    return Codebook(geom, sin_az, cos_el)


def _complex_noise(rng: np.random.Generator, shape, noise_power: float) -> np.ndarray:
    if noise_power == 0.0:
        return np.zeros(shape, dtype=complex)
    sigma = math.sqrt(noise_power / 2.0)
    return sigma * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def beam_sweep(
    ch: ChannelRealization,
    tx_cb: Codebook,
    rx_cb: Codebook,
    p_t: float,
    noise_power: float,
    rng: np.random.Generator,
) -> tuple[SphericalAngles, SphericalAngles, float]:
    """Exhaustive beam training over all codeword pairs.

    Each pair gets one noisy measurement; the pair with the highest
    measured power wins.  Returns its steering angles and the measured
    SNR estimate in dB (infinite when noise_power is zero).
    """
    a_t = array_response(tx_cb.geom, ch.aod)
    a_r = array_response(rx_cb.geom, ch.aoa)
    tx_gain = tx_cb.weights.conj() @ a_t  # f_i^H a_t
    rx_gain = rx_cb.weights.conj() @ a_r  # w_j^H a_r
    amp = math.sqrt(p_t * tx_cb.geom.n_elements * rx_cb.geom.n_elements) * ch.gain
    signal = amp * np.outer(rx_gain, tx_gain.conj())
    meas = signal + _complex_noise(rng, signal.shape, noise_power)
    power = np.abs(meas) ** 2
    j, i = np.unravel_index(int(np.argmax(power)), power.shape)
    best = float(power[j, i])
    snr_db = math.inf if noise_power == 0.0 else (
        10.0 * math.log10(best / noise_power) if best > 0.0 else -math.inf
    )
    return tx_cb.steerings[int(i)], rx_cb.steerings[int(j)], snr_db


def _array_factor_sq(n: int, pitch: float, offset: float) -> float:
    """|sin(n x)/ (n sin x)|^2 at x = pitch * offset / 2 (power gain)."""
    x = 0.5 * pitch * offset
    s = math.sin(x)
    if abs(s) < 1e-12:
        return 1.0
    val = math.sin(n * x) / (n * s)
    return val * val


def _log_gain_ratio(n: int, pitch: float, half: float, x: float) -> float:
    """ln of the power ratio between beams at +-half for truth offset x."""
    plus = _array_factor_sq(n, pitch, x - half)
    minus = _array_factor_sq(n, pitch, x + half)
    return math.log(max(plus, _TINY_POWER)) - math.log(max(minus, _TINY_POWER))


def _invert_ratio(n: int, pitch: float, half: float, measured: float, reach: float) -> float:
    """Bisection inverse of the monotone log power ratio on [-reach, reach]."""
    lo, hi = -reach, reach
    g_lo = _log_gain_ratio(n, pitch, half, lo)
    g_hi = _log_gain_ratio(n, pitch, half, hi)
    if measured <= g_lo:
        return lo
    if measured >= g_hi:
        return hi
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if _log_gain_ratio(n, pitch, half, mid) < measured:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _measure_power(
    ch: ChannelRealization,
    beam: np.ndarray,
    side: str,
    geom: UpaGeometry,
    other_factor: complex,
    p_t: float,
    noise_power: float,
    rng: np.random.Generator,
) -> float:
    a_own = array_response(geom, ch.aod if side == "tx" else ch.aoa)
    own = complex(np.vdot(a_own, beam)) if side == "tx" else complex(np.vdot(beam, a_own))
    amp = math.sqrt(p_t) * ch.gain * other_factor * own
    # N_t N_r scale: own side contributes sqrt(n); the other side's
    # sqrt(n) is folded into other_factor by the caller.
    amp *= math.sqrt(geom.n_elements)
    meas = amp + complex(_complex_noise(rng, (), noise_power))
    return abs(meas) ** 2


def aux_beam_refine(
    ch: ChannelRealization,
    coarse: SphericalAngles,
    side: str,
    geom: UpaGeometry,
    delta_offset: float,
    p_t: float,
    noise_power: float,
    rng: np.random.Generator,
    *,
    other_weights: np.ndarray | None = None,
    other_geom: UpaGeometry | None = None,
) -> SphericalAngles:
    """Refine one side's coarse beam-training angles with auxiliary beams.

    Two beams are steered at the coarse direction offset by +-delta in
    the horizontal direction cosine (u) and two more in the vertical
    one (v); each gets one noisy power measurement and the log power
    ratio of a pair is inverted through the known array factor to place
    the true coordinate inside the main lobe.  delta_offset is an angle
    in radians; it maps to direction-cosine offsets through the local
    Jacobian at the coarse angles.  The opposite side keeps a fixed
    beam (an ideal unit-gain side unless other_weights/other_geom name
    its actual codeword) so its gain cancels from each ratio.  A
    coordinate whose both measurements fall
    at or below the noise floor keeps its coarse value.  The result is
    clamped to codebook coverage.
    """
    if side not in ("tx", "rx"):
        raise ValueError(f"side must be 'tx' or 'rx', got {side!r}")
    if delta_offset <= 0.0:
        raise ValueError("delta_offset must be > 0")

    if other_weights is None:
        # Matched opposite side; its gain cancels from each ratio anyway.
        other_factor = 1.0 + 0.0j
    else:
        if other_geom is None:
            raise ValueError("other_geom is required with other_weights")
        a_other = array_response(other_geom, ch.aoa if side == "tx" else ch.aod)
        # For side='tx' the other side receives (factor w^H a_r), else it
        # transmits (factor a_t^H f); each carries its sqrt(n) scale.
        if side == "tx":
            other_factor = math.sqrt(other_geom.n_elements) * complex(np.vdot(other_weights, a_other))
        else:
            other_factor = math.sqrt(other_geom.n_elements) * complex(np.vdot(a_other, other_weights))

    u0, v0 = direction_cosines(coarse)
    sin_el = math.sin(coarse.elevation)
    pitch = geom.phase_pitch

    def refine_axis(n_axis: int, anchor: float, half: float, along_u: bool) -> float:
        null = 2.0 * math.pi / (n_axis * pitch)
        half = min(half, 0.45 * null)
        reach = _MAINLOBE_FRACTION * null - half
        if along_u:
            beam_p = steering_from_cosines(geom, anchor + half, v0)
            beam_m = steering_from_cosines(geom, anchor - half, v0)
        else:
            beam_p = steering_from_cosines(geom, u0, anchor + half)
            beam_m = steering_from_cosines(geom, u0, anchor - half)
        p_plus = _measure_power(ch, beam_p, side, geom, other_factor, p_t, noise_power, rng)
        p_minus = _measure_power(ch, beam_m, side, geom, other_factor, p_t, noise_power, rng)
        if noise_power > 0.0 and p_plus <= noise_power and p_minus <= noise_power:
            return anchor
        ratio = math.log(max(p_plus, _TINY_POWER)) - math.log(max(p_minus, _TINY_POWER))
        return anchor + _invert_ratio(n_axis, pitch, half, ratio, reach)

    half_u = max(delta_offset * abs(math.cos(coarse.azimuth)) * sin_el, 1e-6)
    half_v = max(delta_offset * sin_el, 1e-6)
    # A single-element axis has no angular resolution to refine.
    u_hat = refine_axis(geom.n_h, u0, half_u, along_u=True) if geom.n_h > 1 else u0
    v_hat = refine_axis(geom.n_v, v0, half_v, along_u=False) if geom.n_v > 1 else v0

    v_hat = max(math.cos(ELEVATION_MAX), min(math.cos(ELEVATION_MIN), v_hat))
    el = math.acos(v_hat)
    s = math.sin(el)
    az = math.asin(max(-1.0, min(1.0, u_hat / s)))
    az = max(-AZIMUTH_HALF_SPAN, min(AZIMUTH_HALF_SPAN, az))
    return SphericalAngles(az, el)
