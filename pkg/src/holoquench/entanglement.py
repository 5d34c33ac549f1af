"""Entropies, spectra, correlations and mutual-information diagnostics.

Everything here reduces to the symplectic eigenvalues nu_m of subsystem
covariance matrices.  Entropies are in nats.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .phase_space import GaussianState, williamson_values

_NU_TOL = 1e-9
_RENYI_VN_WINDOW = 1e-6


@dataclass(frozen=True)
class SymplecticSpectrum:
    """Symplectic eigenvalues of a subsystem covariance, sorted descending."""

    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.sort(np.array(self.values, dtype=float).reshape(-1))[::-1].copy()
        if values.size == 0:
            raise ValueError("spectrum must contain at least one value")
        if values[-1] < 0.5 - _NU_TOL:
            raise ValueError(
                f"unphysical symplectic eigenvalue {values[-1]!r} below 1/2"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)


def _spectrum_values(spectrum) -> np.ndarray:
    values = getattr(spectrum, "values", spectrum)
    return np.asarray(values, dtype=float).reshape(-1)


def symplectic_spectrum(cov: np.ndarray) -> SymplecticSpectrum:
    """Symplectic eigenvalues of a positive-definite covariance in xxpp order."""
    return SymplecticSpectrum(williamson_values(cov))


def von_neumann_entropy(spectrum) -> float:
    """S = sum (nu+1/2) ln(nu+1/2) - (nu-1/2) ln(nu-1/2), zero at nu = 1/2."""
    nu = _spectrum_values(spectrum)
    if np.any(nu < 0.5 - _NU_TOL):
        raise ValueError("unphysical symplectic eigenvalue below 1/2")
    nu = np.maximum(nu, 0.5)
    up = nu + 0.5
    dn = nu - 0.5
    positive = dn > 0
    lower = np.zeros_like(dn)
    lower[positive] = dn[positive] * np.log(dn[positive])
    return float(np.sum(up * np.log(up) - lower))


def renyi_entropy(spectrum, alpha: float) -> float:
    """S_alpha = (1/(alpha-1)) sum ln[(nu+1/2)^alpha - (nu-1/2)^alpha].

    Delegates to the von Neumann formula within 1e-6 of alpha = 1.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if abs(alpha - 1.0) <= _RENYI_VN_WINDOW:
        return von_neumann_entropy(spectrum)
    nu = _spectrum_values(spectrum)
    if np.any(nu < 0.5 - _NU_TOL):
        raise ValueError("unphysical symplectic eigenvalue below 1/2")
    nu = np.maximum(nu, 0.5)
    up = nu + 0.5
    ratio = (nu - 0.5) / up
    terms = alpha * np.log(up) + np.log1p(-(ratio**alpha))
    return float(np.sum(terms) / (alpha - 1.0))


def quadrature_indices(num_modes: int, modes: Sequence[int]) -> list[int]:
    return list(modes) + [num_modes + m for m in modes]


def subsystem_covariance(state: GaussianState, modes: Sequence[int]) -> np.ndarray:
    modes = list(modes)
    if not modes:
        raise ValueError("subsystem must contain at least one mode")
    if len(set(modes)) != len(modes):
        raise ValueError("duplicate mode indices in subsystem")
    if min(modes) < 0 or max(modes) >= state.num_modes:
        raise ValueError("subsystem mode index out of range")
    idx = quadrature_indices(state.num_modes, modes)
    return state.covariance[np.ix_(idx, idx)]


def subsystem_spectrum(state: GaussianState, modes: Sequence[int]) -> SymplecticSpectrum:
    return symplectic_spectrum(subsystem_covariance(state, modes))


def entropy_of_modes(state: GaussianState, modes: Sequence[int], alpha: float = 1.0) -> float:
    spectrum = subsystem_spectrum(state, modes)
    if abs(alpha - 1.0) <= _RENYI_VN_WINDOW:
        return von_neumann_entropy(spectrum)
    return renyi_entropy(spectrum, alpha)


def mutual_information(
    state: GaussianState, modes_a: Sequence[int], modes_b: Sequence[int]
) -> float:
    """I(A:B) = S(A) + S(B) - S(A u B) for disjoint mode sets."""
    set_a, set_b = set(modes_a), set(modes_b)
    if set_a & set_b:
        raise ValueError("mutual information requires disjoint mode sets")
    s_a = entropy_of_modes(state, list(modes_a))
    s_b = entropy_of_modes(state, list(modes_b))
    s_ab = entropy_of_modes(state, list(modes_a) + list(modes_b))
    return s_a + s_b - s_ab


@dataclass(frozen=True)
class Region:
    """Union of intervals on an ordered boundary ring.

    Intervals are (start, length) pairs in ring positions; starts wrap
    around the ring.  side selects the wormhole boundary the ring lives on.
    """

    intervals: tuple[tuple[int, int], ...]
    side: str = "single"

    def __post_init__(self) -> None:
        if self.side not in ("single", "left", "right"):
            raise ValueError("side must be 'single', 'left' or 'right'")
        if not self.intervals:
            raise ValueError("region must contain at least one interval")
        for start, length in self.intervals:
            if length < 1:
                raise ValueError("interval lengths must be >= 1")

    @property
    def size(self) -> int:
        return sum(length for _, length in self.intervals)

    def positions(self, ring_size: int) -> list[int]:
        """Ring positions covered by the region, in interval order."""
        out: list[int] = []
        seen: set[int] = set()
        for start, length in self.intervals:
            if length > ring_size:
                raise ValueError("interval longer than the ring")
            for k in range(length):
                pos = (start + k) % ring_size
                if pos in seen:
                    raise ValueError("region intervals overlap after wrap-around")
                seen.add(pos)
                out.append(pos)
        return out

    def modes(self, ring: Sequence[int]) -> list[int]:
        """State mode indices covered by the region on the given ring."""
        return [ring[pos] for pos in self.positions(len(ring))]


@dataclass(frozen=True)
class EntropyCurve:
    """Entropy samples S(ell) over region sizes, with run metadata."""

    sizes: np.ndarray
    entropies: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        sizes = np.array(self.sizes, dtype=int).reshape(-1)
        entropies = np.array(self.entropies, dtype=float).reshape(-1)
        if sizes.size != entropies.size or sizes.size == 0:
            raise ValueError("sizes and entropies must be equal-length and nonempty")
        if np.any(np.diff(sizes) <= 0):
            raise ValueError("region sizes must be strictly increasing")
        if not np.all(np.isfinite(entropies)) or np.any(entropies < -1e-9):
            raise ValueError("entropies must be finite and nonnegative")
        sizes.setflags(write=False)
        entropies.setflags(write=False)
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "entropies", entropies)


@dataclass(frozen=True)
class CorrelationCurve:
    """Site-averaged two-point values vs boundary separation.

    values holds raw covariances (or mutual information for label 'mi');
    normalized holds Cov/sqrt(Var Var) where applicable.
    """

    separations: np.ndarray
    values: np.ndarray
    normalized: np.ndarray | None
    label: str
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        separations = np.array(self.separations, dtype=int).reshape(-1)
        values = np.array(self.values, dtype=float).reshape(-1)
        if separations.size != values.size or separations.size == 0:
            raise ValueError("separations and values must be equal-length and nonempty")
        if np.any(np.diff(separations) <= 0):
            raise ValueError("separations must be strictly increasing")
        separations.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "separations", separations)
        object.__setattr__(self, "values", values)
        if self.normalized is not None:
            normalized = np.array(self.normalized, dtype=float).reshape(-1)
            if normalized.size != separations.size:
                raise ValueError("normalized values must match separations")
            normalized.setflags(write=False)
            object.__setattr__(self, "normalized", normalized)


def _offset_list(
    ring_size: int, average_offsets: bool, offsets: Sequence[int] | None
) -> list[int]:
    if offsets is not None:
        return [int(o) % ring_size for o in offsets]
    return list(range(ring_size)) if average_offsets else [0]


def region_entropy_curve(
    state: GaussianState,
    ring: Sequence[int],
    alpha: float = 1.0,
    average_offsets: bool = True,
    offsets: Sequence[int] | None = None,
    sizes: Sequence[int] | None = None,
    metadata: Mapping | None = None,
) -> EntropyCurve:
    """Entropy of contiguous boundary regions of each size ell.

    By default averages over every starting offset on the ring; pass an
    explicit offsets list to average over representatives only (e.g. one
    offset per rotational symmetry class of the coupling graph).
    """
    ring = list(ring)
    length = len(ring)
    if length < 2:
        raise ValueError("ring must contain at least two sites")
    used_offsets = _offset_list(length, average_offsets, offsets)
    size_list = list(sizes) if sizes is not None else list(range(1, length))
    entropies = []
    for ell in size_list:
        if not 1 <= ell <= length:
            raise ValueError(f"region size {ell} out of range")
        values = [
            entropy_of_modes(state, [ring[(o + k) % length] for k in range(ell)], alpha)
            for o in used_offsets
        ]
        entropies.append(float(np.mean(values)))
    meta = {
        "num_sites": length,
        "alpha": alpha,
        "offset_mode": _describe_offsets(length, average_offsets, offsets),
    }
    if metadata:
        meta.update(metadata)
    return EntropyCurve(np.array(size_list), np.array(entropies), meta)


def two_sided_entropy_curve(
    state: GaussianState,
    left_ring: Sequence[int],
    right_ring: Sequence[int],
    alpha: float = 1.0,
    average_offsets: bool = True,
    offsets: Sequence[int] | None = None,
    metadata: Mapping | None = None,
) -> EntropyCurve:
    """Entropy of equal-angle interval pairs, one interval on each boundary."""
    left = list(left_ring)
    right = list(right_ring)
    if len(left) != len(right):
        raise ValueError("boundary rings must have equal length")
    length = len(left)
    used_offsets = _offset_list(length, average_offsets, offsets)
    sizes = list(range(1, length))
    entropies = []
    for ell in sizes:
        values = []
        for o in used_offsets:
            modes = [left[(o + k) % length] for k in range(ell)]
            modes += [right[(o + k) % length] for k in range(ell)]
            values.append(entropy_of_modes(state, modes, alpha))
        entropies.append(float(np.mean(values)))
    meta = {
        "num_sites": length,
        "alpha": alpha,
        "offset_mode": _describe_offsets(length, average_offsets, offsets),
    }
    if metadata:
        meta.update(metadata)
    return EntropyCurve(np.array(sizes), np.array(entropies), meta)


def _describe_offsets(
    ring_size: int, average_offsets: bool, offsets: Sequence[int] | None
) -> str:
    if offsets is not None:
        return f"classes:{len(list(offsets))}"
    return "all" if average_offsets else "single"


def correlation_curve(
    state: GaussianState,
    ring: Sequence[int],
    quadrature: str,
    metadata: Mapping | None = None,
) -> CorrelationCurve:
    """Covariance of one quadrature between ring sites at each separation.

    Values are averaged over all starting sites at fixed separation; the
    normalized channel carries Cov/sqrt(Var Var) averaged the same way.
    """
    if quadrature not in ("x", "p"):
        raise ValueError("quadrature must be 'x' or 'p'")
    ring = list(ring)
    length = len(ring)
    n = state.num_modes
    idx = ring if quadrature == "x" else [n + m for m in ring]
    sub = state.covariance[np.ix_(idx, idx)]
    var = np.diag(sub)
    base = np.arange(length)
    covs = []
    corrs = []
    for d in range(1, length):
        partner = (base + d) % length
        vals = sub[base, partner]
        covs.append(float(np.mean(vals)))
        corrs.append(float(np.mean(vals / np.sqrt(var[base] * var[partner]))))
    meta = {"num_sites": length, "quadrature": quadrature}
    if metadata:
        meta.update(metadata)
    return CorrelationCurve(
        np.arange(1, length), np.array(covs), np.array(corrs), quadrature, meta
    )


def mutual_information_curve(
    state: GaussianState, ring: Sequence[int], metadata: Mapping | None = None
) -> CorrelationCurve:
    """Site-averaged mutual information between ring sites at each separation."""
    ring = list(ring)
    length = len(ring)
    single = [entropy_of_modes(state, [m]) for m in ring]
    values = []
    for d in range(1, length):
        total = 0.0
        for i in range(length):
            j = (i + d) % length
            pair = entropy_of_modes(state, [ring[i], ring[j]])
            total += single[i] + single[j] - pair
        values.append(total / length)
    meta = {"num_sites": length, "quadrature": "mi"}
    if metadata:
        meta.update(metadata)
    return CorrelationCurve(np.arange(1, length), np.array(values), None, "mi", meta)


@dataclass(frozen=True)
class MiBoundReport:
    """Correlation-vs-mutual-information bound check for one site pair."""

    mutual_information: float
    corr_sq: dict[str, float]
    gaussian_bound: float
    linear_bound: float
    satisfied: dict[str, bool]


def mi_bound_report(
    state: GaussianState, i: int, j: int, tol: float = 1e-10
) -> MiBoundReport:
    """Check Corr(phi_i, phi_j)^2 <= 1 - e^(-2I) <= 2I for phi in {x, p}."""
    if i == j:
        raise ValueError("sites must be distinct")
    info = mutual_information(state, [i], [j])
    n = state.num_modes
    cov = state.covariance
    corr_sq = {}
    for name, (a, b) in (("x", (i, j)), ("p", (n + i, n + j))):
        corr_sq[name] = float(cov[a, b] ** 2 / (cov[a, a] * cov[b, b]))
    gaussian_bound = float(-np.expm1(-2.0 * info))
    linear_bound = 2.0 * info
    satisfied = {
        "x": corr_sq["x"] <= gaussian_bound + tol,
        "p": corr_sq["p"] <= gaussian_bound + tol,
        "gaussian_le_linear": gaussian_bound <= linear_bound + tol,
    }
    return MiBoundReport(info, corr_sq, gaussian_bound, linear_bound, satisfied)
