"""Closed-form localization of a reflector from two single-bounce paths.

A transmitter (AP) and a receiver (STA) share a global angular reference but
do not know each other's position.  For each single-bounce reflection path
between them three quantities are measured: the departure direction at the
AP, the arrival direction at the STA, and the total path length.  Given two
such paths this module recovers the distance from the STA to the reflector
of the first path, and with it the reflector position.

The solution works on a 2D projection: both paths' direction vectors are
projected onto a chosen plane, clockwise angles between the projections
classify the scene into one of six configurations, and per configuration a
sine-rule system over the two projected triangles (AP, reflector 1,
reflector 2) and (STA, reflector 1, reflector 2) reduces to a one-variable
tangent equation.  Out-of-plane tilts enter only through cosine factors that
rescale each 3D length to its in-plane shadow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TAU = 2.0 * math.pi

#: Below this norm a projected direction is considered normal to the plane.
EPS_PROJECTION = 1e-9

#: Angular tolerance for treating a clockwise angle as 0 or pi (collinear).
EPS_COLLINEAR = 1e-6

#: Acceptable relative residual of the sine-rule ratio equation.
TOL_RESIDUAL = 1e-6

# Relative threshold under which both tangent-equation coefficients are
# treated as identically zero (the one-parameter family of solutions that a
# virtual reflector on the AP-STA line produces).
_EPS_DEGENERATE_FAMILY = 1e-9

# Strict-interior margin for triangle angles, in radians.
_EPS_ANGLE = 1e-12


class GeomError(Exception):
    """Base class for geometry failures."""


class DegenerateProjection(GeomError):
    """A direction vector is (nearly) normal to the projection plane."""


class ZeroVector(GeomError):
    """An angle was requested between vectors with (nearly) zero norm."""


class Unsolvable(GeomError):
    """Both projected path pairs are collinear; the scene carries no
    information about the reflector distance (scene code 0)."""


class InconsistentGeometry(GeomError):
    """The measurements admit no reflector placement in the classified
    configuration (out-of-range angles, distance outside (0, c1), or a
    sine-rule residual above tolerance)."""


@dataclass(frozen=True)
class SphericalAngles:
    """Direction in the global frame.

    azimuth: angle in the XY plane from +x toward +y, in [-pi, pi].
    elevation: polar angle from +z, in [0, pi].
    """

    azimuth: float
    elevation: float


@dataclass(frozen=True)
class PathObservation:
    """One measured single-bounce path.

    aod/aoa are the departure (at the AP) and arrival (at the STA)
    directions in the shared global frame; path_length is the AP to
    reflector to STA length in meters; snr_db ranks the measurement for
    history selection; timestamp orders records.
    """

    aod: SphericalAngles
    aoa: SphericalAngles
    path_length: float
    snr_db: float
    timestamp: int

    def __post_init__(self) -> None:
        if not self.path_length > 0.0:
            raise ValueError(f"path_length must be > 0, got {self.path_length}")


@dataclass(frozen=True)
class SceneType:
    """Configuration class of a projected two-path scene.

    code 0: both projected pairs collinear, unsolvable.
    codes 1-4: both pairs open angles; the code records on which sides of
        the projected reflector-pair line the two terminals fall.
    code 5: exactly one pair collinear; collinear_with says which terminal
        sees the two reflectors on one projected line ('ap' or 'sta').
    """

    code: int
    collinear_with: str | None = None

    def __post_init__(self) -> None:
        if self.code not in range(6):
            raise ValueError(f"scene code must be 0..5, got {self.code}")
        if (self.code == 5) != (self.collinear_with is not None):
            raise ValueError("collinear_with is set exactly for code 5")
        if self.collinear_with not in (None, "ap", "sta"):
            raise ValueError(f"bad collinear_with: {self.collinear_with}")


@dataclass
class SolverIntermediates:
    """Audit trail of one solve.

    Angles are radians.  cw_* are clockwise angles between projected
    directions; tilt_* are out-of-plane tilts of the four direction
    vectors; apex_* are the reduced angles at the projected terminals;
    t1_angle_* are the triangle angles at reflector 1's projection in the
    AP-side and STA-side triangles; coef_sin/coef_cos are the tangent
    equation coefficients; weight_ap/weight_sta split c1 between the two
    legs; sign_* are the configuration signs; projected_pair_distance is
    the in-plane distance between the two projected reflectors.
    """

    cw_aod_pair: float = math.nan
    cw_aoa_pair: float = math.nan
    cw_cross_1: float = math.nan
    cw_cross_2: float = math.nan
    tilt_aod_1: float = math.nan
    tilt_aod_2: float = math.nan
    tilt_aoa_1: float = math.nan
    tilt_aoa_2: float = math.nan
    apex_ap: float = math.nan
    apex_sta: float = math.nan
    t1_angle_ap: float = math.nan
    t1_angle_sta: float = math.nan
    sign_link: float = math.nan
    coef_sin: float = math.nan
    coef_cos: float = math.nan
    weight_ap: float = math.nan
    weight_sta: float = math.nan
    sign_leg_1: float = math.nan
    sign_leg_2: float = math.nan
    residual: float = math.nan
    projected_pair_distance: float = math.nan


@dataclass
class SolveResult:
    """Reflector 1 of the current path, as seen from the STA.

    direction is the unit arrival vector (global frame), distance the
    STA-to-reflector range in meters, so the reflector position is
    sta + distance * direction.
    """

    direction: np.ndarray
    distance: float
    scene: SceneType
    intermediates: SolverIntermediates = field(repr=False, default_factory=SolverIntermediates)


def direction_from_angles(angles: SphericalAngles) -> np.ndarray:
    """Unit vector (x, y, z) for the given azimuth/elevation."""
    sin_el = math.sin(angles.elevation)
    return np.array(
        [
            sin_el * math.cos(angles.azimuth),
            sin_el * math.sin(angles.azimuth),
            math.cos(angles.elevation),
        ]
    )


def angles_from_direction(vec: np.ndarray) -> SphericalAngles:
    """Inverse of :func:`direction_from_angles`; the input is normalized.

    At the poles (|z| = norm) the azimuth is defined as 0.
    """
    norm = float(np.linalg.norm(vec))
    if norm < EPS_PROJECTION:
        raise ZeroVector("cannot take angles of a zero vector")
    x, y, z = (float(c) / norm for c in vec)
    elevation = math.acos(max(-1.0, min(1.0, z)))
    if math.hypot(x, y) < _EPS_ANGLE:
        return SphericalAngles(0.0, elevation)
    return SphericalAngles(math.atan2(y, x), elevation)


class ProjectionPlane:
    """Plane through the origin spanned by two independent vectors.

    Clockwise angles are measured about the normal n = b1 x b2 (viewed
    from the +n side, a counter-clockwise rotation is a clockwise angle
    of 2*pi minus that rotation).
    """

    def __init__(self, b1, b2) -> None:
        b1 = np.asarray(b1, dtype=float)
        b2 = np.asarray(b2, dtype=float)
        normal = np.cross(b1, b2)
        norm = np.linalg.norm(normal)
        if norm < 1e-12:
            raise ValueError("plane basis vectors are (nearly) parallel")
        self.b1 = b1
        self.b2 = b2
        self.normal = normal / norm
        basis = np.stack([b1, b2], axis=1)
        # Orthogonal projector onto span(b1, b2).
        self.matrix = basis @ np.linalg.solve(basis.T @ basis, basis.T)
        self._u1 = b1 / np.linalg.norm(b1)
        self._u2 = np.cross(self.normal, self._u1)

    @classmethod
    def from_name(cls, name: str) -> "ProjectionPlane":
        axes = {"x": np.array([1.0, 0, 0]), "y": np.array([0, 1.0, 0]), "z": np.array([0, 0, 1.0])}
        key = name.strip().lower()
        if len(key) != 3 or key[1] != "o" or key[0] not in axes or key[2] not in axes or key[0] == key[2]:
            raise ValueError(f"unknown plane name: {name!r} (expected e.g. 'yoz')")
        return cls(axes[key[0]], axes[key[2]])

    def coords(self, vec: np.ndarray) -> tuple[float, float]:
        """In-plane coordinates of a (projected) vector."""
        return float(vec @ self._u1), float(vec @ self._u2)

    def __repr__(self) -> str:
        return f"ProjectionPlane(b1={self.b1.tolist()}, b2={self.b2.tolist()})"


def project(plane: ProjectionPlane, direction: np.ndarray, eps_proj: float = EPS_PROJECTION) -> np.ndarray:
    """Orthogonal projection of a direction onto the plane."""
    shadow = plane.matrix @ np.asarray(direction, dtype=float)
    if np.linalg.norm(shadow) < eps_proj:
        raise DegenerateProjection(
            f"direction {np.asarray(direction).tolist()} is normal to the projection plane"
        )
    return shadow


def clockwise_angle(plane: ProjectionPlane, p: np.ndarray, q: np.ndarray) -> float:
    """Clockwise angle from p to q about the plane normal, in [0, 2*pi)."""
    px, py = plane.coords(p)
    qx, qy = plane.coords(q)
    if math.hypot(px, py) < EPS_PROJECTION or math.hypot(qx, qy) < EPS_PROJECTION:
        raise ZeroVector("clockwise angle of a (nearly) zero in-plane vector")
    return (math.atan2(py, px) - math.atan2(qy, qx)) % TAU


def reflex_reduce(alpha: float) -> float:
    """Fold an angle in [0, 2*pi] to the unoriented value min(a, 2*pi - a)."""
    return min(alpha, TAU - alpha)


def _near_collinear(alpha: float, eps_col: float) -> bool:
    return min(alpha, abs(alpha - math.pi), TAU - alpha) <= eps_col


def classify_scene(
    cw_aod_pair: float,
    cw_aoa_pair: float,
    cw_cross: float,
    eps_col: float = EPS_COLLINEAR,
) -> SceneType:
    """Classify a projected two-path scene from its three clockwise angles.

    cw_aod_pair / cw_aoa_pair are the clockwise angles between the two
    projected departure / arrival directions; cw_cross is the clockwise
    angle from path 1's projected departure to its projected arrival
    direction.  Angles within eps_col of {0, pi, 2*pi} count as collinear.
    The six outcomes partition the angle cube.
    """

    ap_col = _near_collinear(cw_aod_pair, eps_col)
    sta_col = _near_collinear(cw_aoa_pair, eps_col)
    if ap_col and sta_col:
        return SceneType(0)
    if ap_col:
        return SceneType(5, "ap")
    if sta_col:
        return SceneType(5, "sta")

    ap_open = cw_aod_pair < math.pi  # clockwise angle in (0, pi)
    sta_open = cw_aoa_pair < math.pi
    if ap_open and not sta_open:
        return SceneType(1)
    if not ap_open and sta_open:
        return SceneType(2)
    # Both pair angles share a half-plane class; the cross angle breaks the tie.
    if _near_collinear(cw_cross, eps_col):
        # Boundary: reflex(cross) ~ 0 and the code 3/4 formulas coincide.
        return SceneType(4)
    cross_open = cw_cross < math.pi
    if cross_open == ap_open:
        return SceneType(4)
    return SceneType(3)


@dataclass
class _ProjectedPair:
    """Projected geometry shared by the solvers."""

    e_aoa_1: np.ndarray
    c1: float
    c2: float
    cw_aod_pair: float
    cw_aoa_pair: float
    cw_cross_1: float
    cw_cross_2: float
    tilt_aod_1: float
    tilt_aod_2: float
    tilt_aoa_1: float
    tilt_aoa_2: float

    @property
    def cos_tilts(self) -> tuple[float, float, float, float]:
        return (
            math.cos(self.tilt_aod_1),
            math.cos(self.tilt_aod_2),
            math.cos(self.tilt_aoa_1),
            math.cos(self.tilt_aoa_2),
        )


def _tilt(plane: ProjectionPlane, direction: np.ndarray, eps_proj: float) -> float:
    """Angle between a unit direction and its in-plane shadow."""
    shadow = project(plane, direction, eps_proj)
    return math.acos(max(-1.0, min(1.0, float(np.linalg.norm(shadow)))))


def _project_pair(
    obs1: PathObservation,
    obs2: PathObservation,
    plane: ProjectionPlane,
    eps_proj: float,
) -> _ProjectedPair:
    e_aod_1 = direction_from_angles(obs1.aod)
    e_aod_2 = direction_from_angles(obs2.aod)
    e_aoa_1 = direction_from_angles(obs1.aoa)
    e_aoa_2 = direction_from_angles(obs2.aoa)
    p_aod_1 = project(plane, e_aod_1, eps_proj)
    p_aod_2 = project(plane, e_aod_2, eps_proj)
    p_aoa_1 = project(plane, e_aoa_1, eps_proj)
    p_aoa_2 = project(plane, e_aoa_2, eps_proj)
    return _ProjectedPair(
        e_aoa_1=e_aoa_1,
        c1=obs1.path_length,
        c2=obs2.path_length,
        cw_aod_pair=clockwise_angle(plane, p_aod_1, p_aod_2),
        cw_aoa_pair=clockwise_angle(plane, p_aoa_1, p_aoa_2),
        cw_cross_1=clockwise_angle(plane, p_aod_1, p_aoa_1),
        cw_cross_2=clockwise_angle(plane, p_aod_2, p_aoa_2),
        tilt_aod_1=math.acos(max(-1.0, min(1.0, float(np.linalg.norm(p_aod_1))))),
        tilt_aod_2=math.acos(max(-1.0, min(1.0, float(np.linalg.norm(p_aod_2))))),
        tilt_aoa_1=math.acos(max(-1.0, min(1.0, float(np.linalg.norm(p_aoa_1))))),
        tilt_aoa_2=math.acos(max(-1.0, min(1.0, float(np.linalg.norm(p_aoa_2))))),
    )


def _feasible_midpoint(sign_link: float, offset: float) -> float:
    """Midpoint of the t1_angle_ap interval keeping both triangle angles
    inside (0, pi), used when the tangent equation degenerates to an
    identity (virtual reflector on the AP-STA line)."""
    if sign_link < 0.0:
        lo, hi = max(0.0, offset - math.pi), min(math.pi, offset)
    else:
        lo, hi = max(0.0, -offset), min(math.pi, math.pi - offset)
    if not hi - lo > 2.0 * _EPS_ANGLE:
        raise InconsistentGeometry("degenerate scene admits no valid triangle angles")
    return 0.5 * (lo + hi)


def solve_separate(
    obs1: PathObservation,
    obs2: PathObservation,
    plane: ProjectionPlane,
    scene: SceneType,
    *,
    eps_proj: float = EPS_PROJECTION,
    tol_residual: float = TOL_RESIDUAL,
) -> SolveResult:
    """Solve a scene whose projected reflectors are separate from both
    terminals' viewpoints (codes 1 to 4).

    The two projected triangles share the reflector-pair line.  Writing
    the sine rule in both and eliminating every length yields one ratio
    equation; substituting the configuration-dependent linear relation
    between the two reflector-1 angles turns it into
    coef_sin * sin(t1_angle_ap) + coef_cos * cos(t1_angle_ap) = 0, solved
    by arctangent.  c1 then splits between its legs by the weight ratio.
    """

    if scene.code not in (1, 2, 3, 4):
        raise ValueError(f"solve_separate expects scene codes 1..4, got {scene.code}")
    g = _project_pair(obs1, obs2, plane, eps_proj)
    inter = SolverIntermediates(
        cw_aod_pair=g.cw_aod_pair,
        cw_aoa_pair=g.cw_aoa_pair,
        cw_cross_1=g.cw_cross_1,
        cw_cross_2=g.cw_cross_2,
        tilt_aod_1=g.tilt_aod_1,
        tilt_aod_2=g.tilt_aod_2,
        tilt_aoa_1=g.tilt_aoa_1,
        tilt_aoa_2=g.tilt_aoa_2,
    )

    apex_ap = reflex_reduce(g.cw_aod_pair)
    apex_sta = reflex_reduce(g.cw_aoa_pair)
    inter.apex_ap, inter.apex_sta = apex_ap, apex_sta

    # Linear relation t1_angle_sta = sign_link * t1_angle_ap + offset per
    # configuration; the offset comes from the measured cross angle.
    sign_link = -1.0 if scene.code in (1, 2) else 1.0
    if scene.code == 1:
        offset = TAU - g.cw_cross_1
    elif scene.code == 2:
        offset = g.cw_cross_1
    elif scene.code == 3:
        offset = -reflex_reduce(g.cw_cross_1)
    else:
        offset = reflex_reduce(g.cw_cross_1)
    inter.sign_link = sign_link

    ca1, ca2, cs1, cs2 = g.cos_tilts
    ratio = g.c1 / g.c2
    sin_aa, cos_aa = math.sin(apex_ap), math.cos(apex_ap)
    sin_as = math.sin(apex_sta)
    sin_shift = math.sin(offset + apex_sta)
    cos_shift = math.cos(offset + apex_sta)

    # Coefficient of sin(t1_angle_ap) ...
    s_terms = (
        cos_aa * sin_as * ca2 * cs1 * cs2,
        sign_link * cos_shift * sin_aa * ca1 * ca2 * cs2,
        -ratio * sin_as * ca1 * cs1 * cs2,
        -sign_link * ratio * math.cos(offset) * sin_aa * ca1 * ca2 * cs1,
    )
    # ... and of cos(t1_angle_ap) in the cleared ratio equation.
    c_terms = (
        sin_aa * sin_as * ca2 * cs1 * cs2,
        sin_shift * sin_aa * ca1 * ca2 * cs2,
        -ratio * math.sin(offset) * sin_aa * ca1 * ca2 * cs1,
    )
    coef_sin = math.fsum(s_terms)
    coef_cos = math.fsum(c_terms)
    inter.coef_sin, inter.coef_cos = coef_sin, coef_cos

    scale_sin = sum(abs(t) for t in s_terms)
    scale_cos = sum(abs(t) for t in c_terms)
    if abs(coef_sin) <= _EPS_DEGENERATE_FAMILY * scale_sin and abs(coef_cos) <= _EPS_DEGENERATE_FAMILY * scale_cos:
        # Identity: every angle solves the equation.  This is the virtual
        # reflector on the AP-STA line; the c1 split is invariant along
        # the family, so any interior angle yields the same distance.
        t1_ap = _feasible_midpoint(sign_link, offset)
    else:
        t1_ap = math.atan2(-coef_cos, coef_sin) % math.pi
    t1_sta = offset + sign_link * t1_ap
    inter.t1_angle_ap, inter.t1_angle_sta = t1_ap, t1_sta

    if not (_EPS_ANGLE < t1_ap < math.pi - _EPS_ANGLE):
        raise InconsistentGeometry("reflector-1 angle at the AP triangle collapsed")
    if not (_EPS_ANGLE < t1_sta < math.pi - _EPS_ANGLE):
        raise InconsistentGeometry("implied reflector-1 angle at the STA triangle is out of range")

    weight_ap = math.sin(apex_ap + t1_ap) * sin_as * cs1
    weight_sta = math.sin(apex_sta + t1_sta) * sin_aa * ca1
    inter.weight_ap, inter.weight_sta = weight_ap, weight_sta
    weight_sum = weight_ap + weight_sta
    if abs(weight_sum) < 1e-300:
        raise InconsistentGeometry("degenerate weight split")
    distance = weight_sta * g.c1 / weight_sum
    if not (0.0 < distance < g.c1):
        raise InconsistentGeometry(
            f"reflector distance {distance:.6g} outside (0, c1={g.c1:.6g})"
        )

    # Residual of the ratio equation at the returned angles.
    lhs_num = weight_sum
    lhs_den = math.sin(t1_ap) * sin_as * cs2 + math.sin(t1_sta) * sin_aa * ca2
    rhs = ratio * ca1 * cs1 / (ca2 * cs2)
    residual = abs(lhs_num - rhs * lhs_den) / (abs(lhs_num) + abs(rhs * lhs_den) + 1e-300)
    inter.residual = residual
    if residual > tol_residual:
        raise InconsistentGeometry(f"sine-rule residual {residual:.3g} above tolerance")

    denom = math.sin(apex_sta + t1_sta)
    if abs(denom) > _EPS_ANGLE:
        inter.projected_pair_distance = distance * cs1 * sin_as / denom

    return SolveResult(direction=g.e_aoa_1, distance=distance, scene=scene, intermediates=inter)


def _collinear_split(
    reduced_pair: float,
    cross_1: float,
    cross_2: float,
    eps_col: float,
) -> tuple[float, float, float]:
    """Leg signs and the reflector-1 angle for a collinear terminal.

    The two projected reflectors sit on one line through the terminal.
    When both are on the same ray (reduced pair angle ~ 0) the cross
    angles decide which is farther; on opposite rays (~ pi) the shadows
    add.  Returns (sign_leg_1, sign_leg_2, angle at reflector 1 in the
    other terminal's triangle).
    """
    if reduced_pair < 0.5 * math.pi:
        # Same ray.  A smaller cross angle means a farther reflector.
        if abs(cross_1 - cross_2) <= eps_col:
            raise InconsistentGeometry("collinear reflectors project to the same point")
        if cross_1 < cross_2:
            return 1.0, -1.0, cross_1
        return -1.0, 1.0, math.pi - cross_1
    return 1.0, 1.0, cross_1


def solve_collinear(
    obs1: PathObservation,
    obs2: PathObservation,
    plane: ProjectionPlane,
    scene: SceneType,
    *,
    eps_col: float = EPS_COLLINEAR,
    eps_proj: float = EPS_PROJECTION,
) -> SolveResult:
    """Solve a scene whose projected reflectors are collinear with exactly
    one terminal (code 5).

    The open triangle at the other terminal still obeys the sine rule,
    while along the collinear line the projected reflector separation is
    a signed sum of the two leg shadows.  Eliminating the separation
    gives the reflector-1 leg in closed form.  For a collinear STA the
    same formulas apply with the AP and STA roles swapped, and c1 minus
    the AP leg gives the STA distance.
    """

    if scene.code != 5:
        raise ValueError(f"solve_collinear expects scene code 5, got {scene.code}")
    g = _project_pair(obs1, obs2, plane, eps_proj)
    inter = SolverIntermediates(
        cw_aod_pair=g.cw_aod_pair,
        cw_aoa_pair=g.cw_aoa_pair,
        cw_cross_1=g.cw_cross_1,
        cw_cross_2=g.cw_cross_2,
        tilt_aod_1=g.tilt_aod_1,
        tilt_aod_2=g.tilt_aod_2,
        tilt_aoa_1=g.tilt_aoa_1,
        tilt_aoa_2=g.tilt_aoa_2,
    )
    if _near_collinear(g.cw_aod_pair, eps_col) and _near_collinear(g.cw_aoa_pair, eps_col):
        raise Unsolvable("both projected pairs are collinear")

    ca1, ca2, cs1, cs2 = g.cos_tilts
    cross_1 = reflex_reduce(g.cw_cross_1)
    cross_2 = reflex_reduce(g.cw_cross_2)

    if scene.collinear_with == "ap":
        apex = reflex_reduce(g.cw_aoa_pair)
        inter.apex_sta = apex
        reduced_pair = reflex_reduce(g.cw_aod_pair)
        s1, s2, angle = _collinear_split(reduced_pair, cross_1, cross_2, eps_col)
        inter.t1_angle_sta = angle
        near_cos, near_sin = cs1, cs2  # tilts on the open-triangle side
        far_cos_1, far_cos_2 = ca1, ca2
    else:
        apex = reflex_reduce(g.cw_aod_pair)
        inter.apex_ap = apex
        reduced_pair = reflex_reduce(g.cw_aoa_pair)
        s1, s2, angle = _collinear_split(reduced_pair, cross_1, cross_2, eps_col)
        inter.t1_angle_ap = angle
        near_cos, near_sin = ca1, ca2
        far_cos_1, far_cos_2 = cs1, cs2
    inter.sign_leg_1, inter.sign_leg_2 = s1, s2

    sin_angle = math.sin(angle)
    sin_apex = math.sin(apex)
    sin_both = math.sin(angle + apex)
    if sin_angle <= _EPS_ANGLE or sin_apex <= _EPS_ANGLE:
        raise InconsistentGeometry("collinear configuration with a collapsed triangle")

    weight_top = (
        g.c2 * sin_apex * near_cos * near_sin
        + s1 * g.c2 * sin_both * far_cos_1 * near_sin
        - s1 * g.c1 * sin_angle * far_cos_1 * near_cos
    )
    weight_bottom = (
        sin_apex * near_cos * near_sin
        + s1 * sin_both * far_cos_1 * near_sin
        + s2 * sin_angle * far_cos_2 * near_cos
    )
    inter.weight_ap, inter.weight_sta = weight_top, weight_bottom
    if abs(weight_bottom) < 1e-300:
        raise InconsistentGeometry("degenerate collinear weight split")

    leg = (sin_both * near_sin / (sin_angle * near_cos)) * (g.c2 - weight_top / weight_bottom)
    if scene.collinear_with == "ap":
        distance = leg
        open_leg_shadow = distance * near_cos  # reflector 1 to the STA, in plane
    else:
        distance = g.c1 - leg
        open_leg_shadow = leg * near_cos  # reflector 1 to the AP, in plane
    if not (0.0 < distance < g.c1):
        raise InconsistentGeometry(
            f"reflector distance {distance:.6g} outside (0, c1={g.c1:.6g})"
        )

    # Sine rule in the open triangle: the pair separation faces the apex.
    if sin_both > _EPS_ANGLE:
        inter.projected_pair_distance = open_leg_shadow * sin_apex / sin_both

    return SolveResult(direction=g.e_aoa_1, distance=distance, scene=scene, intermediates=inter)


def solve(
    obs1: PathObservation,
    obs2: PathObservation,
    plane: ProjectionPlane,
    *,
    eps_col: float = EPS_COLLINEAR,
    eps_proj: float = EPS_PROJECTION,
    tol_residual: float = TOL_RESIDUAL,
) -> SolveResult:
    """Classify the scene for the given plane and dispatch to a solver.

    obs1 is the current path whose reflector is located; obs2 supplies
    the second path (usually a historical record).
    """
    g = _project_pair(obs1, obs2, plane, eps_proj)
    scene = classify_scene(g.cw_aod_pair, g.cw_aoa_pair, g.cw_cross_1, eps_col)
    if scene.code == 0:
        raise Unsolvable("both projected pairs are collinear (scene code 0)")
    if scene.code == 5:
        return solve_collinear(obs1, obs2, plane, scene, eps_col=eps_col, eps_proj=eps_proj)
    return solve_separate(obs1, obs2, plane, scene, eps_proj=eps_proj, tol_residual=tol_residual)


def localize(result: SolveResult, sta_position: np.ndarray) -> np.ndarray:
    """Reflector position implied by a solve, given the STA position."""
    return np.asarray(sta_position, dtype=float) + result.distance * result.direction
