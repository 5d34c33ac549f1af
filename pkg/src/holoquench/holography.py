"""Closed-form minimal-surface predictions for disk and wormhole geometries.

Distances come from embedding the spatial slices as hyperboloids in a flat
(2+2)-signature space.  Entropy models are expressed in boundary-site units
with interval angle 2 pi ell / L; cutoff-dependent constants are absorbed
into the additive offset epsilon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

_HYPERBOLOID_TOL = 1e-9
_ACOSH_CLAMP = 1e-9
_DIAMETER_TOL = 1e-12


@dataclass(frozen=True)
class EmbeddingPoint:
    """Point (T1, T2, X1, X2) on the hyperboloid -T1^2 - T2^2 + X1^2 + X2^2 = -ell^2."""

    t1: float
    t2: float
    x1: float
    x2: float

    def inner(self, other: "EmbeddingPoint") -> float:
        return (
            -self.t1 * other.t1
            - self.t2 * other.t2
            + self.x1 * other.x1
            + self.x2 * other.x2
        )

    def hyperboloid_residual(self, ell: float = 1.0) -> float:
        return abs(self.inner(self) + ell**2)


def ads_embedding_point(
    r: float, theta: float, t: float = 0.0, ell: float = 1.0
) -> EmbeddingPoint:
    """Embed the global-coordinate point (r, t, theta) of the constant-curvature disk."""
    radial = math.sqrt(ell**2 + r**2)
    return EmbeddingPoint(
        radial * math.sin(t / ell),
        radial * math.cos(t / ell),
        r * math.cos(theta),
        r * math.sin(theta),
    )


def btz_embedding_point(
    r: float, theta: float, r_plus: float, t: float = 0.0, ell: float = 1.0
) -> EmbeddingPoint:
    """Embed an exterior point (r >= r_plus) of the static two-sided black hole slice."""
    if r < r_plus:
        raise ValueError("radius must not be inside the horizon")
    outer = ell * math.sqrt(r**2 - r_plus**2) / r_plus
    ring = ell * r / r_plus
    return EmbeddingPoint(
        outer * math.sinh(r_plus * t / ell**2),
        ring * math.cosh(r_plus * theta / ell),
        outer * math.cosh(r_plus * t / ell**2),
        ring * math.sinh(r_plus * theta / ell),
    )


def geodesic_distance(p: EmbeddingPoint, q: EmbeddingPoint, ell: float = 1.0) -> float:
    """d = ell * arccosh(-P.Q / ell^2) for two points on the same hyperboloid."""
    for point in (p, q):
        if point.hyperboloid_residual(ell) > _HYPERBOLOID_TOL * ell**2:
            raise ValueError("point is not on the hyperboloid")
    arg = -p.inner(q) / ell**2
    if arg < 1.0 - _ACOSH_CLAMP:
        raise ValueError(f"embedding pair is spacelike separated (arccosh arg {arg!r})")
    return ell * math.acosh(max(arg, 1.0))


@dataclass(frozen=True)
class CftEntropyModel:
    """Ground-state entropy model S(ell) = (c/3) ln sin(pi ell / L) + epsilon."""

    c: float
    epsilon: float
    num_sites: int

    def __post_init__(self) -> None:
        if self.c <= 0:
            raise ValueError("central charge must be positive")
        if self.num_sites < 2:
            raise ValueError("need at least two boundary sites")


def cft_ground_state_entropy(model: CftEntropyModel, ell_sites) -> np.ndarray | float:
    """Evaluate the ground-state entropy model at region size(s) ell."""
    ell = np.asarray(ell_sites, dtype=float)
    if np.any(ell <= 0) or np.any(ell >= model.num_sites):
        raise ValueError("region size must lie strictly between 0 and L")
    out = (model.c / 3.0) * np.log(np.sin(np.pi * ell / model.num_sites)) + model.epsilon
    return float(out) if np.isscalar(ell_sites) else out


@dataclass(frozen=True)
class BtzEntropyModel:
    """Thermal-state entropy model with inverse temperature beta in site units."""

    c: float
    epsilon: float
    beta: float
    num_sites: int

    def __post_init__(self) -> None:
        if self.c <= 0:
            raise ValueError("central charge must be positive")
        if self.beta <= 0:
            raise ValueError("inverse temperature must be positive")
        if self.num_sites < 2:
            raise ValueError("need at least two boundary sites")

    @property
    def thermal_entropy(self) -> float:
        """Entropy of one full side, pi c L / (3 beta)."""
        return math.pi * self.c * self.num_sites / (3.0 * self.beta)


def btz_one_sided_entropy(model: BtzEntropyModel, ell_sites) -> np.ndarray | float:
    """min(S1, S2): the interval's own curve vs horizon plus complement curve.

    S1(ell) = (c/3) ln sinh(pi ell / beta) + epsilon
    S2(ell) = S_th + (c/3) ln sinh(pi (L - ell) / beta) + epsilon
    """
    ell = np.asarray(ell_sites, dtype=float)
    if np.any(ell <= 0) or np.any(ell >= model.num_sites):
        raise ValueError("region size must lie strictly between 0 and L")
    third = model.c / 3.0
    s1 = third * np.log(np.sinh(np.pi * ell / model.beta)) + model.epsilon
    s2 = (
        model.thermal_entropy
        + third * np.log(np.sinh(np.pi * (model.num_sites - ell) / model.beta))
        + model.epsilon
    )
    out = np.minimum(s1, s2)
    return float(out) if np.isscalar(ell_sites) else out


def btz_crossover_length(model: BtzEntropyModel) -> float:
    """Interval size where the two-sided candidates exchange dominance.

    Solves sinh(pi ell / beta) = 1, i.e. ell* = (beta / pi) arcsinh(1).
    """
    return model.beta / math.pi * math.asinh(1.0)


def btz_one_sided_branch_crossover(model: BtzEntropyModel) -> float:
    """Region size where the two one-sided candidates are equal.

    Closed form from S1 = S2 with s = pi L / beta:
    tanh(pi ell / beta) = e^s sinh(s) / (1 + e^s cosh(s)).
    """
    s = math.pi * model.num_sites / model.beta
    rhs = math.exp(s) * math.sinh(s) / (1.0 + math.exp(s) * math.cosh(s))
    return model.beta / math.pi * math.atanh(rhs)


def btz_two_sided_entropy(
    model: BtzEntropyModel, ell_sites, plateau: float | None = None
) -> np.ndarray | float:
    """S = 2 min(S1(ell), plateau) for equal-angle interval pairs.

    The default plateau is S1 at the candidate crossover, which equals
    epsilon; an override accounts for extra interior length, which delays
    the transition.
    """
    ell = np.asarray(ell_sites, dtype=float)
    if np.any(ell <= 0) or np.any(ell >= model.num_sites):
        raise ValueError("region size must lie strictly between 0 and L")
    third = model.c / 3.0
    s1 = third * np.log(np.sinh(np.pi * ell / model.beta)) + model.epsilon
    if plateau is None:
        crossing = btz_crossover_length(model)
        plateau = third * math.log(math.sinh(math.pi * crossing / model.beta)) + model.epsilon
    out = 2.0 * np.minimum(s1, plateau)
    return float(out) if np.isscalar(ell_sites) else out


# --- Geodesic arcs on the unit disk ---------------------------------------


@dataclass(frozen=True)
class GeodesicArc:
    """Circular arc orthogonal to the unit circle between two anchor angles."""

    theta_a: float
    theta_b: float
    points: np.ndarray

    def __post_init__(self) -> None:
        points = np.array(self.points, dtype=float)
        if points.ndim != 2 or points.shape[1] != 2:
            raise ValueError("polyline must be an (n, 2) array")
        points.setflags(write=False)
        object.__setattr__(self, "points", points)


@dataclass(frozen=True)
class RtCandidate:
    """One candidate minimal surface: a set of arcs plus its regularized length."""

    pairing: str
    arcs: tuple[GeodesicArc, ...]
    regularized_length: float


@dataclass(frozen=True)
class RtSurface:
    """All candidate pairings for a region, with the minimal one marked."""

    candidates: tuple[RtCandidate, ...]
    minimal: RtCandidate


def _wrap_angle(angle: float) -> float:
    out = math.fmod(angle, 2.0 * math.pi)
    return out + 2.0 * math.pi if out < 0 else out


def _interval_anchor_angles(start: int, length: int, num_sites: int) -> tuple[float, float]:
    """Anchor angles half a lattice spacing outside the covered sites."""
    step = 2.0 * math.pi / num_sites
    return _wrap_angle((start - 0.5) * step), _wrap_angle((start + length - 0.5) * step)


def geodesic_arc(theta_a: float, theta_b: float, samples: int = 101) -> GeodesicArc:
    """Geodesic of the disk between two ideal boundary points.

    Returns the diameter when the anchors are antipodal, otherwise the
    circular arc centered at sec(D/2) e^{i gamma} with radius tan(D/2),
    where D is the minor angular separation and gamma its midpoint.
    """
    theta_a = _wrap_angle(theta_a)
    theta_b = _wrap_angle(theta_b)
    delta = _wrap_angle(theta_b - theta_a)
    if delta == 0.0:
        raise ValueError("arc anchors must be distinct")
    pa = np.array([math.cos(theta_a), math.sin(theta_a)])
    pb = np.array([math.cos(theta_b), math.sin(theta_b)])
    if abs(delta - math.pi) < _DIAMETER_TOL:
        ts = np.linspace(0.0, 1.0, samples)[:, None]
        points = (1 - ts) * pa + ts * pb
        return GeodesicArc(theta_a, theta_b, points)
    if delta < math.pi:
        gamma = _wrap_angle(theta_a + delta / 2.0)
        minor = delta
    else:
        minor = 2.0 * math.pi - delta
        gamma = _wrap_angle(theta_b + minor / 2.0)
    center = np.array([math.cos(gamma), math.sin(gamma)]) / math.cos(minor / 2.0)
    radius = math.tan(minor / 2.0)
    ang_a = math.atan2(pa[1] - center[1], pa[0] - center[0])
    ang_b = math.atan2(pb[1] - center[1], pb[0] - center[0])
    sweep = ang_b - ang_a
    if sweep > math.pi:
        sweep -= 2.0 * math.pi
    elif sweep < -math.pi:
        sweep += 2.0 * math.pi
    angles = ang_a + sweep * np.linspace(0.0, 1.0, samples)
    points = center[None, :] + radius * np.stack([np.cos(angles), np.sin(angles)], axis=1)
    return GeodesicArc(theta_a, theta_b, points)


def _regularized_arc_length(theta_a: float, theta_b: float) -> float:
    """Cutoff-independent part of the geodesic length, 2 ln sin(D/2)."""
    delta = _wrap_angle(theta_b - theta_a)
    delta = min(delta, 2.0 * math.pi - delta)
    return 2.0 * math.log(math.sin(delta / 2.0))


def hyperbolic_disk_distance(xy_a: Sequence[float], xy_b: Sequence[float]) -> float:
    """Distance between interior points of the unit disk (curvature -1)."""
    a = np.asarray(xy_a, dtype=float)
    b = np.asarray(xy_b, dtype=float)
    norm_a = float(a @ a)
    norm_b = float(b @ b)
    if norm_a >= 1.0 or norm_b >= 1.0:
        raise ValueError("points must lie strictly inside the unit disk")
    diff = float((a - b) @ (a - b))
    return math.acosh(1.0 + 2.0 * diff / ((1.0 - norm_a) * (1.0 - norm_b)))


def _normalize_intervals(
    intervals: Sequence[tuple[int, int]], num_sites: int
) -> list[tuple[int, int]]:
    out = []
    for start, length in intervals:
        if not 1 <= length <= num_sites:
            raise ValueError("interval length out of range")
        out.append((start % num_sites, length))
    return out


def _gaps_between(intervals: list[tuple[int, int]], num_sites: int) -> list[tuple[int, int]]:
    """Complementary intervals of two disjoint intervals on the ring."""
    (s1, l1), (s2, l2) = sorted(intervals)
    g1 = (s1 + l1, s2 - (s1 + l1))
    g2 = (s2 + l2, (s1 + num_sites) - (s2 + l2))
    if g1[1] <= 0 or g2[1] <= 0:
        raise ValueError("intervals must be separated by nonempty gaps")
    return [g1, g2]


def rt_geodesic_arc(intervals: Sequence[tuple[int, int]], num_sites: int) -> RtSurface:
    """Minimal-surface arcs on the unit disk for a one- or two-interval region.

    For two intervals both candidate pairings are returned: arcs subtending
    the intervals themselves (disconnected wedge) and arcs subtending the
    gaps (connected wedge).  The minimal one has the smaller total
    regularized length.
    """
    intervals = _normalize_intervals(intervals, num_sites)
    if len(intervals) == 1:
        start, length = intervals[0]
        if length >= num_sites:
            raise ValueError("single interval must leave a complement on the ring")
        arc = geodesic_arc(*_interval_anchor_angles(start, length, num_sites))
        candidate = RtCandidate(
            "single", (arc,), _regularized_arc_length(arc.theta_a, arc.theta_b)
        )
        return RtSurface((candidate,), candidate)
    if len(intervals) != 2:
        raise ValueError("regions with more than two intervals are not supported")
    gaps = _gaps_between(intervals, num_sites)
    candidates = []
    for pairing, pieces in (("disconnected", intervals), ("connected", gaps)):
        arcs = tuple(
            geodesic_arc(*_interval_anchor_angles(start, length, num_sites))
            for start, length in pieces
        )
        total = sum(_regularized_arc_length(a.theta_a, a.theta_b) for a in arcs)
        candidates.append(RtCandidate(pairing, arcs, total))
    minimal = min(candidates, key=lambda cand: cand.regularized_length)
    return RtSurface(tuple(candidates), minimal)


def _interval_wedge_contains(
    start: int, length: int, num_sites: int, xy: Sequence[float]
) -> bool:
    """Whether a disk point lies between an interval and its geodesic."""
    theta_a, theta_b = _interval_anchor_angles(start, length, num_sites)
    delta = _wrap_angle(theta_b - theta_a)
    point = np.asarray(xy, dtype=float)
    if abs(delta - math.pi) < _DIAMETER_TOL:
        gamma = _wrap_angle(theta_a + delta / 2.0)
        return float(point @ np.array([math.cos(gamma), math.sin(gamma)])) > 0.0
    if delta < math.pi:
        gamma = _wrap_angle(theta_a + delta / 2.0)
        minor = delta
        inside_side = True
    else:
        minor = 2.0 * math.pi - delta
        gamma = _wrap_angle(theta_b + minor / 2.0)
        inside_side = False
    center = np.array([math.cos(gamma), math.sin(gamma)]) / math.cos(minor / 2.0)
    radius = math.tan(minor / 2.0)
    inside_circle = float((point - center) @ (point - center)) < radius**2
    return inside_circle if inside_side else not inside_circle


def entanglement_wedge_contains(
    intervals: Sequence[tuple[int, int]],
    num_sites: int,
    xy: Sequence[float],
    pairing: str | None = None,
) -> bool:
    """Whether a disk point lies in the region's entanglement wedge.

    For two intervals the pairing defaults to the minimal candidate; the
    connected wedge is the complement of the two gap wedges.
    """
    intervals = _normalize_intervals(intervals, num_sites)
    if len(intervals) == 1:
        return _interval_wedge_contains(*intervals[0], num_sites, xy)
    if pairing is None:
        pairing = rt_geodesic_arc(intervals, num_sites).minimal.pairing
    if pairing == "disconnected":
        return any(
            _interval_wedge_contains(start, length, num_sites, xy)
            for start, length in intervals
        )
    if pairing == "connected":
        return not any(
            _interval_wedge_contains(start, length, num_sites, xy)
            for start, length in _gaps_between(intervals, num_sites)
        )
    raise ValueError(f"unknown pairing {pairing!r}")
