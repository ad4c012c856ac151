"""Monte Carlo harness: scenes, trials, and error-curve experiments.

A trial drops two reflectors into a box beside the AP/STA baseline,
derives the exact two-path observations, then re-estimates them through
the physical layer: one beam-trained angle set per path (optionally
refined with auxiliary beams) and one noisy range per path.  The
estimated observations go through the measurement table and the
closed-form solver; the trial's score is the Euclidean distance between
the true and estimated reflector-1 positions.  Experiments run grids of
(array size, SNR, ranging noise, beam mode) and aggregate per-point
statistics into CSV-ready rows.

Randomness is split into four named substreams per trial (scenario,
channel, sweep, ftm), each seeded by (seed, trial, stream).  Grid points
therefore share scenes, channel gains, and ranging noise, which pairs
their comparisons and pins every output byte for a given seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from itertools import product
from typing import Callable, Sequence

import numpy as np

from .channel import (
    AZIMUTH_HALF_SPAN,
    ELEVATION_MAX,
    ELEVATION_MIN,
    SPEED_OF_LIGHT,
    ChannelRealization,
    Codebook,
    UpaGeometry,
    array_response,
    aux_beam_refine,
    beam_sweep,
    build_codebook,
)
from .geom import (
    DegenerateProjection,
    InconsistentGeometry,
    PathObservation,
    ProjectionPlane,
    SceneType,
    SphericalAngles,
    Unsolvable,
    angles_from_direction,
    clockwise_angle,
    localize,
    project,
    solve,
)
from .measure import FtmConfig, MeasurementTable, NoUsableHistory, ftm_distance, select_historical

TAU = 2.0 * math.pi

# Substream tags: one independent generator per randomness source.
_STREAM_SCENARIO = 0
_STREAM_CHANNEL = 1
_STREAM_SWEEP = 2
_STREAM_FTM = 3

_SAMPLER_MAX_TRIES = 100000


class EmptyInput(Exception):
    """An aggregate was requested over zero successful trials."""


@dataclass(frozen=True)
class TrialRng:
    """Named random substreams of one trial."""

    scenario: np.random.Generator
    channel: np.random.Generator
    sweep: np.random.Generator
    ftm: np.random.Generator

    @classmethod
    def from_seed(cls, seed: int, trial: int) -> "TrialRng":
        def gen(stream: int) -> np.random.Generator:
            return np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, trial, stream))))

        return cls(
            scenario=gen(_STREAM_SCENARIO),
            channel=gen(_STREAM_CHANNEL),
            sweep=gen(_STREAM_SWEEP),
            ftm=gen(_STREAM_FTM),
        )


@dataclass(frozen=True)
class Scenario:
    """Fixed terminals, two reflector positions, and a working plane."""

    ap_pos: np.ndarray
    sta_pos: np.ndarray
    target1_pos: np.ndarray
    target2_pos: np.ndarray
    plane_name: str = "yoz"

    def __post_init__(self) -> None:
        pts = [
            np.asarray(p, dtype=float)
            for p in (self.ap_pos, self.sta_pos, self.target1_pos, self.target2_pos)
        ]
        for name, p in zip(("ap_pos", "sta_pos", "target1_pos", "target2_pos"), pts):
            object.__setattr__(self, name, p)
        for i in range(4):
            for j in range(i + 1, 4):
                if float(np.linalg.norm(pts[i] - pts[j])) < 1e-9:
                    raise ValueError("scenario points must be pairwise distinct")


@dataclass(frozen=True)
class ExperimentConfig:
    """Experiment grid and physical constants.

    tx_upa/rx_upa, snr_db, ftm_sigma_m, and beam are grid axes; the UPA
    lists advance together (a length-1 list broadcasts).  Angles are
    estimated in each terminal's local frame: a terminal's array faces
    the direction given by its yaw (degrees, 0 = +x).  By default both
    arrays lie in the yz plane facing each other along the x axis (AP
    broadside +x, STA broadside -x), so the reflector box sits between
    them and every direction splits into an in-plane (yz) part measured
    by the array and an off-plane part along the baseline.
    """

    tx_upa: tuple[tuple[int, int], ...] = ((32, 32),)
    rx_upa: tuple[tuple[int, int], ...] = ((32, 32),)
    snr_db: tuple[float, ...] = (20.0,)
    ftm_sigma_m: tuple[float, ...] = (0.01,)
    beam: tuple[str, ...] = ("best",)
    trials: int = 2000
    oversampling: int = 1
    delta_offset: float | None = None
    seed: int = 0
    planes: tuple[str, ...] = ("yoz",)
    carrier_hz: float = 60e9
    noise_power: float = 1.0
    ap_pos: tuple[float, float, float] = (0.0, 0.0, 0.0)
    sta_pos: tuple[float, float, float] = (2.0, 0.0, 0.0)
    ap_yaw_deg: float = 0.0
    sta_yaw_deg: float = 180.0
    target_box: tuple[tuple[float, float], ...] = ((0.0, 2.0), (0.5, 4.0), (-1.0, 1.0))
    table_capacity: int = 32
    eps_col: float = 1e-6
    min_pair_angle: float = 0.02

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.oversampling < 1:
            raise ValueError("oversampling must be >= 1")
        for name in ("tx_upa", "rx_upa", "snr_db", "ftm_sigma_m", "beam", "planes"):
            if len(getattr(self, name)) == 0:
                raise ValueError(f"{name} must be nonempty")
        for mode in self.beam:
            if mode not in ("best", "aux"):
                raise ValueError(f"beam mode must be 'best' or 'aux', got {mode!r}")
        if len(self.tx_upa) != len(self.rx_upa) and 1 not in (len(self.tx_upa), len(self.rx_upa)):
            raise ValueError("tx_upa and rx_upa lists must match in length (or broadcast from 1)")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_hz

    def upa_pairs(self) -> list[tuple[tuple[int, int], tuple[int, int]]]:
        tx, rx = self.tx_upa, self.rx_upa
        if len(tx) == 1 and len(rx) > 1:
            tx = tx * len(rx)
        if len(rx) == 1 and len(tx) > 1:
            rx = rx * len(tx)
        return list(zip(tx, rx))

    def single(self) -> "ExperimentConfig":
        """This config, asserting every grid axis is a single point."""
        for name in ("snr_db", "ftm_sigma_m", "beam"):
            if len(getattr(self, name)) != 1:
                raise ValueError(f"run_trial needs a single-point grid, {name} has several values")
        if len(self.upa_pairs()) != 1:
            raise ValueError("run_trial needs a single UPA pair")
        return self


@dataclass
class TrialResult:
    true_position: np.ndarray
    est_position: np.ndarray
    distance_error: float
    scene: SceneType | None
    realized_snr_db: float
    status: str


def _wrap_angle(a: float) -> float:
    return (a + math.pi) % TAU - math.pi


def _to_local(angles: SphericalAngles, yaw_rad: float) -> SphericalAngles:
    """Rotate a global direction into a terminal frame yawed about z."""
    return SphericalAngles(_wrap_angle(angles.azimuth - yaw_rad), angles.elevation)


def _to_global(angles: SphericalAngles, yaw_rad: float) -> SphericalAngles:
    return SphericalAngles(_wrap_angle(angles.azimuth + yaw_rad), angles.elevation)


def synthesize_observations(s: Scenario) -> tuple[PathObservation, PathObservation]:
    """Exact observations of the two single-bounce paths.

    Path 1 (reflector 1) is stamped as the newer measurement.
    """

    def one(target: np.ndarray, timestamp: int) -> PathObservation:
        d_ap = float(np.linalg.norm(target - s.ap_pos))
        d_sta = float(np.linalg.norm(target - s.sta_pos))
        return PathObservation(
            aod=angles_from_direction(target - s.ap_pos),
            aoa=angles_from_direction(target - s.sta_pos),
            path_length=d_ap + d_sta,
            snr_db=math.inf,
            timestamp=timestamp,
        )

    return one(s.target1_pos, 1), one(s.target2_pos, 0)


def _in_coverage(local: SphericalAngles) -> bool:
    return (
        abs(local.azimuth) <= AZIMUTH_HALF_SPAN
        and ELEVATION_MIN <= local.elevation <= ELEVATION_MAX
    )


def make_scenario_sampler(cfg: ExperimentConfig) -> Callable[[np.random.Generator], Scenario]:
    """Uniform reflector placement in the config box, rejecting scenes
    that are out of angular coverage or degenerate on the primary plane.

    Degenerate means: a direction (nearly) normal to the plane, or a
    projected pair angle within min_pair_angle of collinear, where the
    solution is unstable under measurement noise.
    """
    ap = np.asarray(cfg.ap_pos, dtype=float)
    sta = np.asarray(cfg.sta_pos, dtype=float)
    plane = ProjectionPlane.from_name(cfg.planes[0])
    ap_yaw = math.radians(cfg.ap_yaw_deg)
    sta_yaw = math.radians(cfg.sta_yaw_deg)
    (x_lo, x_hi), (y_lo, y_hi), (z_lo, z_hi) = cfg.target_box

    def sample(rng: np.random.Generator) -> Scenario:
        for _ in range(_SAMPLER_MAX_TRIES):
            t1 = np.array([rng.uniform(x_lo, x_hi), rng.uniform(y_lo, y_hi), rng.uniform(z_lo, z_hi)])
            t2 = np.array([rng.uniform(x_lo, x_hi), rng.uniform(y_lo, y_hi), rng.uniform(z_lo, z_hi)])
            if min(
                float(np.linalg.norm(t1 - t2)),
                float(np.linalg.norm(t1 - ap)),
                float(np.linalg.norm(t1 - sta)),
                float(np.linalg.norm(t2 - ap)),
                float(np.linalg.norm(t2 - sta)),
            ) < 1e-3:
                continue
            dirs = {
                "aod1": t1 - ap, "aod2": t2 - ap,
                "aoa1": t1 - sta, "aoa2": t2 - sta,
            }
            units = {k: v / np.linalg.norm(v) for k, v in dirs.items()}
            covered = all(
                _in_coverage(_to_local(angles_from_direction(v), ap_yaw if k.startswith("aod") else sta_yaw))
                for k, v in units.items()
            )
            if not covered:
                continue
            try:
                proj = {k: project(plane, v) for k, v in units.items()}
            except DegenerateProjection:
                continue
            aod_pair = clockwise_angle(plane, proj["aod1"], proj["aod2"])
            aoa_pair = clockwise_angle(plane, proj["aoa1"], proj["aoa2"])
            off_collinear = min(
                aod_pair, abs(aod_pair - math.pi), TAU - aod_pair,
                aoa_pair, abs(aoa_pair - math.pi), TAU - aoa_pair,
            )
            if off_collinear < cfg.min_pair_angle:
                continue
            return Scenario(ap, sta, t1, t2, cfg.planes[0])
        raise RuntimeError("scenario sampler exhausted its rejection budget")

    return sample


def _estimate_path(
    cfg: ExperimentConfig,
    truth: PathObservation,
    gain: complex,
    tx_cb: Codebook,
    rx_cb: Codebook,
    p_t: float,
    noise: float,
    rng: TrialRng,
    timestamp: int,
) -> tuple[PathObservation, float]:
    """Physical-layer estimate of one path; returns (obs, matched SNR dB)."""
    ap_yaw = math.radians(cfg.ap_yaw_deg)
    sta_yaw = math.radians(cfg.sta_yaw_deg)
    ch = ChannelRealization(
        gain=gain,
        aod=_to_local(truth.aod, ap_yaw),
        aoa=_to_local(truth.aoa, sta_yaw),
        path_length=truth.path_length,
    )
    best_tx, best_rx, snr_est = beam_sweep(ch, tx_cb, rx_cb, p_t, noise, rng.sweep)
    if cfg.beam[0] == "aux":
        delta_tx = cfg.delta_offset if cfg.delta_offset is not None else 0.5 * tx_cb.az_cell_width
        delta_rx = cfg.delta_offset if cfg.delta_offset is not None else 0.5 * rx_cb.az_cell_width
        fixed_rx = array_response(rx_cb.geom, best_rx)
        fixed_tx = array_response(tx_cb.geom, best_tx)
        refined_tx = aux_beam_refine(
            ch, best_tx, "tx", tx_cb.geom, delta_tx, p_t, noise, rng.sweep,
            other_weights=fixed_rx, other_geom=rx_cb.geom,
        )
        refined_rx = aux_beam_refine(
            ch, best_rx, "rx", rx_cb.geom, delta_rx, p_t, noise, rng.sweep,
            other_weights=fixed_tx, other_geom=tx_cb.geom,
        )
        best_tx, best_rx = refined_tx, refined_rx

    n_total = tx_cb.geom.n_elements * rx_cb.geom.n_elements
    matched = p_t * n_total * abs(gain) ** 2
    matched_db = 10.0 * math.log10(matched / noise) if noise > 0.0 and matched > 0.0 else math.inf
    c_hat = ftm_distance(truth.path_length, FtmConfig(cfg.ftm_sigma_m[0]), rng.ftm)
    obs = PathObservation(
        aod=_to_global(best_tx, ap_yaw),
        aoa=_to_global(best_rx, sta_yaw),
        path_length=c_hat,
        snr_db=snr_est,
        timestamp=timestamp,
    )
    return obs, matched_db


def run_trial(
    cfg: ExperimentConfig,
    scenario: Scenario,
    rng: TrialRng,
    codebooks: tuple[Codebook, Codebook] | None = None,
) -> TrialResult:
    """One end-to-end localization attempt; failures become data."""
    cfg = cfg.single()
    (tx_pair, rx_pair) = cfg.upa_pairs()[0]
    if codebooks is None:
        tx_cb = build_codebook(UpaGeometry.half_wavelength(*tx_pair, cfg.wavelength), cfg.oversampling)
        rx_cb = build_codebook(UpaGeometry.half_wavelength(*rx_pair, cfg.wavelength), cfg.oversampling)
    else:
        tx_cb, rx_cb = codebooks

    snr = cfg.snr_db[0]
    if math.isinf(snr) and snr > 0:
        p_t, noise = cfg.noise_power, 0.0  # exact, noise-free measurements
    else:
        p_t, noise = cfg.noise_power * 10.0 ** (snr / 10.0), cfg.noise_power
    truth1, truth2 = synthesize_observations(scenario)
    gains = [
        complex(rng.channel.standard_normal(), rng.channel.standard_normal()) / math.sqrt(2.0)
        for _ in range(2)
    ]
    obs1, snr1 = _estimate_path(cfg, truth1, gains[0], tx_cb, rx_cb, p_t, noise, rng, timestamp=1)
    obs2, snr2 = _estimate_path(cfg, truth2, gains[1], tx_cb, rx_cb, p_t, noise, rng, timestamp=0)
    realized = 0.5 * (snr1 + snr2)

    table = MeasurementTable(cfg.table_capacity)
    table.add(obs2)

    positions = []
    scene: SceneType | None = None
    first_failure: str | None = None
    for plane_name in cfg.planes:
        plane = ProjectionPlane.from_name(plane_name)
        try:
            partner = select_historical(table, obs1, 1, plane=plane, eps_col=cfg.eps_col)[0]
            result = solve(obs1, partner, plane, eps_col=cfg.eps_col)
        except NoUsableHistory:
            first_failure = first_failure or "no_history"
            continue
        except Unsolvable:
            first_failure = first_failure or "unsolvable"
            continue
        except InconsistentGeometry:
            first_failure = first_failure or "inconsistent_geometry"
            continue
        except DegenerateProjection:
            first_failure = first_failure or "degenerate_projection"
            continue
        positions.append(localize(result, scenario.sta_pos))
        if scene is None:
            scene = result.scene

    if positions:
        est = np.mean(positions, axis=0)
        err = float(np.linalg.norm(est - scenario.target1_pos))
        return TrialResult(scenario.target1_pos, est, err, scene, realized, "ok")
    nan3 = np.full(3, math.nan)
    return TrialResult(scenario.target1_pos, nan3, math.nan, None, realized, first_failure or "no_history")


def mean_distance_error(results: Sequence[TrialResult]) -> float:
    """Arithmetic mean error over successful trials."""
    errs = [r.distance_error for r in results if r.status == "ok"]
    if not errs:
        raise EmptyInput("no successful trials to average")
    return float(np.mean(errs))


@dataclass(frozen=True)
class CurveRow:
    """Aggregated statistics of one experiment grid point."""

    tx_upa: str
    rx_upa: str
    beam: str
    snr_db: float
    ftm_sigma_m: float
    trials: int
    n_success: int
    n_fail: int
    failure_rate: float
    mean_error_m: float
    stderr_m: float
    p50: float
    p90: float
    realized_snr_db_mean: float


@dataclass
class ExperimentResult:
    curve: list[CurveRow]
    raw: list[TrialResult] | None = None
    raw_keys: list[tuple] = field(default_factory=list)


def _upa_label(pair: tuple[int, int]) -> str:
    return f"{pair[0]}x{pair[1]}"


def _aggregate(point_cfg: ExperimentConfig, results: list[TrialResult]) -> CurveRow:
    errs = np.array([r.distance_error for r in results if r.status == "ok"])
    n_ok = errs.size
    n_fail = len(results) - n_ok
    realized = np.array([r.realized_snr_db for r in results if math.isfinite(r.realized_snr_db)])
    if n_ok:
        mean = float(errs.mean())
        stderr = float(errs.std(ddof=1) / math.sqrt(n_ok)) if n_ok > 1 else math.nan
        p50 = float(np.percentile(errs, 50))
        p90 = float(np.percentile(errs, 90))
    else:
        mean = stderr = p50 = p90 = math.nan
    return CurveRow(
        tx_upa=_upa_label(point_cfg.upa_pairs()[0][0]),
        rx_upa=_upa_label(point_cfg.upa_pairs()[0][1]),
        beam=point_cfg.beam[0],
        snr_db=point_cfg.snr_db[0],
        ftm_sigma_m=point_cfg.ftm_sigma_m[0],
        trials=len(results),
        n_success=int(n_ok),
        n_fail=int(n_fail),
        failure_rate=n_fail / len(results) if results else math.nan,
        mean_error_m=mean,
        stderr_m=stderr,
        p50=p50,
        p90=p90,
        realized_snr_db_mean=float(realized.mean()) if realized.size else math.nan,
    )


def run_experiment(
    cfg: ExperimentConfig,
    scenario_sampler: Callable[[np.random.Generator], Scenario] | None = None,
    *,
    collect_raw: bool = False,
    progress: Callable[[CurveRow], None] | None = None,
) -> ExperimentResult:
    """Run the full grid; one CurveRow per (UPA pair, SNR, sigma, mode).

    Scenario, channel, and ranging substreams depend only on (seed,
    trial), so every grid point sees the same scenes, gains, and
    ranging noise draws.
    """
    sampler = scenario_sampler or make_scenario_sampler(cfg)
    codebook_cache: dict[tuple[int, int, int], Codebook] = {}

    def codebook_for(pair: tuple[int, int]) -> Codebook:
        key = (pair[0], pair[1], cfg.oversampling)
        if key not in codebook_cache:
            geom = UpaGeometry.half_wavelength(pair[0], pair[1], cfg.wavelength)
            codebook_cache[key] = build_codebook(geom, cfg.oversampling)
        return codebook_cache[key]

    out = ExperimentResult(curve=[], raw=[] if collect_raw else None)
    grid = [
        (pair, snr, sigma, mode)
        for pair, snr, sigma, mode in product(
            cfg.upa_pairs(), cfg.snr_db, cfg.ftm_sigma_m, cfg.beam
        )
    ]
    for (tx_pair, rx_pair), snr, sigma, mode in grid:
        point_cfg = replace(
            cfg,
            tx_upa=(tx_pair,),
            rx_upa=(rx_pair,),
            snr_db=(snr,),
            ftm_sigma_m=(sigma,),
            beam=(mode,),
        )
        books = (codebook_for(tx_pair), codebook_for(rx_pair))
        results = []
        for trial in range(cfg.trials):
            rng = TrialRng.from_seed(cfg.seed, trial)
            scenario = sampler(rng.scenario)
            results.append(run_trial(point_cfg, scenario, rng, codebooks=books))
        out.curve.append(_aggregate(point_cfg, results))
        if collect_raw:
            out.raw.extend(results)
            out.raw_keys.extend(
                (_upa_label(tx_pair), _upa_label(rx_pair), mode, snr, sigma, t)
                for t in range(cfg.trials)
            )
        if progress is not None:
            progress(out.curve[-1])
    return out


_CURVE_COLUMNS = (
    "tx_upa", "rx_upa", "beam", "snr_db", "ftm_sigma_m", "trials",
    "n_success", "n_fail", "failure_rate", "mean_error_m", "stderr_m",
    "p50", "p90", "realized_snr_db_mean",
)

_RAW_COLUMNS = (
    "tx_upa", "rx_upa", "beam", "snr_db", "ftm_sigma_m", "trial", "status",
    "scene", "true_x", "true_y", "true_z", "est_x", "est_y", "est_z",
    "error_m", "realized_snr_db",
)


def _cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def curve_csv_header() -> str:
    return ",".join(_CURVE_COLUMNS)


def format_curve_row(row: CurveRow) -> str:
    return ",".join(_cell(getattr(row, c)) for c in _CURVE_COLUMNS)


def format_curve_csv(rows: Sequence[CurveRow]) -> str:
    lines = [curve_csv_header()]
    lines.extend(format_curve_row(r) for r in rows)
    return "\n".join(lines) + "\n"


def format_raw_csv(result: ExperimentResult) -> str:
    if result.raw is None:
        raise ValueError("experiment was run without collect_raw")
    lines = [",".join(_RAW_COLUMNS)]
    for key, r in zip(result.raw_keys, result.raw):
        tx, rx, mode, snr, sigma, trial = key
        scene = "" if r.scene is None else str(r.scene.code)
        cells = (
            tx, rx, mode, repr(float(snr)), repr(float(sigma)), str(trial), r.status, scene,
            repr(float(r.true_position[0])), repr(float(r.true_position[1])), repr(float(r.true_position[2])),
            repr(float(r.est_position[0])), repr(float(r.est_position[1])), repr(float(r.est_position[2])),
            repr(float(r.distance_error)), repr(float(r.realized_snr_db)),
        )
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def run_oracle_suite(seed: int = 0, scenes: int = 500) -> list[tuple[str, bool, str]]:
    """Noiseless round-trip checks used by the command-line oracle-check.

    Returns (name, passed, detail) triples; all should pass on a healthy
    build.
    """
    rng = np.random.default_rng(seed)
    cfg = ExperimentConfig()
    sampler = make_scenario_sampler(cfg)
    out: list[tuple[str, bool, str]] = []

    worst = 0.0
    failures = 0
    for _ in range(scenes):
        s = sampler(rng)
        obs1, obs2 = synthesize_observations(s)
        try:
            res = solve(obs1, obs2, ProjectionPlane.from_name(s.plane_name))
        except Exception:
            failures += 1
            continue
        err = float(np.linalg.norm(localize(res, s.sta_pos) - s.target1_pos))
        worst = max(worst, err)
    out.append((
        "random-scene round-trip",
        failures == 0 and worst < 1e-6,
        f"{scenes} scenes, worst position error {worst:.3e} m, {failures} failures",
    ))

    # One reflector pair collinear with the AP in projection.
    ap = np.array([0.0, 0.0, 0.0])
    sta = np.array([2.0, 0.0, 0.0])
    u = np.array([math.cos(1.1), math.sin(1.1), 0.0])
    t1 = ap + 1.0 * u + np.array([0.0, 0.0, 0.3])
    t2 = ap + 2.2 * u + np.array([0.0, 0.0, -0.4])
    s = Scenario(ap, sta, t1, t2, "xoy")
    obs1, obs2 = synthesize_observations(s)
    try:
        res = solve(obs1, obs2, ProjectionPlane.from_name("xoy"))
        err = float(np.linalg.norm(localize(res, sta) - t1))
        ok = res.scene.code == 5 and res.scene.collinear_with == "ap" and err < 1e-6
        detail = f"scene {res.scene.code}/{res.scene.collinear_with}, error {err:.3e} m"
    except Exception as exc:
        ok, detail = False, f"raised {type(exc).__name__}"
    out.append(("collinear-pair round-trip", ok, detail))

    # Second path degenerated to the line of sight.  The default working
    # plane is normal to the AP-STA baseline, so this case solves on a
    # plane that contains the baseline instead.
    worst_rel = 0.0
    bad = 0
    for _ in range(scenes):
        s = sampler(rng)
        obs1, _ = synthesize_observations(s)
        los = PathObservation(
            aod=angles_from_direction(s.sta_pos - s.ap_pos),
            aoa=angles_from_direction(s.ap_pos - s.sta_pos),
            path_length=float(np.linalg.norm(s.sta_pos - s.ap_pos)),
            snr_db=math.inf,
            timestamp=0,
        )
        want = float(np.linalg.norm(s.target1_pos - s.sta_pos))
        try:
            res = solve(obs1, los, ProjectionPlane.from_name("xoy"))
        except Exception:
            bad += 1
            continue
        worst_rel = max(worst_rel, abs(res.distance - want) / want)
    out.append((
        "line-of-sight partner round-trip",
        bad == 0 and worst_rel < 1e-6,
        f"{scenes} scenes, worst relative distance error {worst_rel:.3e}, {bad} failures",
    ))

    return out
