"""Gaussian states of N bosonic modes: covariance propagation and conditioning.

Quadratures are ordered positions first, xi = (x_1..x_N, p_1..p_N), with
hbar = 1 so every vacuum quadrature has variance 1/2 and pure states have
all symplectic eigenvalues equal to 1/2.  All operations are pure functions
of immutable inputs; sampling takes an explicit seed and never touches
global RNG state.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
import scipy.linalg

ROLES = ("boundary", "bulk", "split", "probe")

#: roles whose modes are homodyned away by the measurement step
MEASURED_ROLES = ("bulk", "split")

_SYMMETRY_TOL = 1e-12
_SYMPLECTIC_TOL = 1e-10
_NU_FLOOR_TOL = 1e-9
_PINV_CUTOFF = 1e-12


@lru_cache(maxsize=None)
def _commutation_form_cached(num_modes: int) -> np.ndarray:
    n = num_modes
    omega = np.zeros((2 * n, 2 * n))
    omega[:n, n:] = np.eye(n)
    omega[n:, :n] = -np.eye(n)
    omega.setflags(write=False)
    return omega


def commutation_form(num_modes: int) -> np.ndarray:
    """Commutation form Omega = [[0, I], [-I, 0]] in the xxpp ordering."""
    if num_modes < 1:
        raise ValueError("num_modes must be >= 1")
    return _commutation_form_cached(num_modes)


def williamson_values(cov: np.ndarray) -> np.ndarray:
    """Symplectic (Williamson) eigenvalues of a covariance matrix, descending.

    With cov = T T^T (Cholesky), the spectrum of i Omega cov equals that of
    the antisymmetric matrix T^T Omega T, whose singular values come in
    equal pairs (nu_m, nu_m).  Raises ValueError if cov is not positive
    definite.
    """
    cov = np.asarray(cov, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or cov.shape[0] % 2:
        raise ValueError("covariance must be a square matrix of even dimension")
    n = cov.shape[0] // 2
    try:
        chol = scipy.linalg.cholesky(cov, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise ValueError("covariance matrix is not positive definite") from exc
    core = chol.T @ commutation_form(n) @ chol
    core = 0.5 * (core - core.T)
    sing = scipy.linalg.svd(core, compute_uv=False)
    return 0.5 * (sing[0::2] + sing[1::2])


@dataclass(frozen=True)
class QuadratureLayout:
    """Mode bookkeeping: count, fixed xxpp index maps, and one role per mode."""

    num_modes: int
    roles: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.num_modes < 1:
            raise ValueError("layout needs at least one mode")
        if len(self.roles) != self.num_modes:
            raise ValueError("exactly one role per mode is required")
        unknown = set(self.roles) - set(ROLES)
        if unknown:
            raise ValueError(f"unknown roles: {sorted(unknown)}")

    @classmethod
    def uniform(cls, num_modes: int, role: str = "boundary") -> "QuadratureLayout":
        return cls(num_modes, (role,) * num_modes)

    def x_index(self, mode: int) -> int:
        return mode

    def p_index(self, mode: int) -> int:
        return self.num_modes + mode

    def omega(self) -> np.ndarray:
        return commutation_form(self.num_modes)

    def modes_with_role(self, *roles: str) -> tuple[int, ...]:
        return tuple(i for i, r in enumerate(self.roles) if r in roles)

    def restricted(self, modes: Sequence[int]) -> "QuadratureLayout":
        return QuadratureLayout(len(modes), tuple(self.roles[m] for m in modes))


@dataclass(frozen=True)
class GaussianState:
    """Gaussian state given by a 2N x 2N covariance matrix and a 2N mean vector.

    Construction symmetrizes the covariance, then checks positive
    definiteness and the uncertainty bound (all symplectic eigenvalues at
    least 1/2 up to round-off).
    """

    layout: QuadratureLayout
    covariance: np.ndarray
    mean: np.ndarray

    def __post_init__(self) -> None:
        dim = 2 * self.layout.num_modes
        cov = np.array(self.covariance, dtype=float)
        mean = np.array(self.mean, dtype=float).reshape(-1)
        if cov.shape != (dim, dim):
            raise ValueError(f"covariance must have shape {(dim, dim)}, got {cov.shape}")
        if mean.shape != (dim,):
            raise ValueError(f"mean must have length {dim}, got {mean.shape}")
        scale = max(1.0, float(np.max(np.abs(cov))))
        if np.max(np.abs(cov - cov.T)) > _SYMMETRY_TOL * scale:
            raise ValueError("covariance is not symmetric")
        cov = 0.5 * (cov + cov.T)
        nu = williamson_values(cov)
        if nu.min() < 0.5 - _NU_FLOOR_TOL:
            raise ValueError(
                f"uncertainty bound violated: smallest symplectic eigenvalue {nu.min()!r}"
            )
        cov.setflags(write=False)
        mean.setflags(write=False)
        object.__setattr__(self, "covariance", cov)
        object.__setattr__(self, "mean", mean)

    @property
    def num_modes(self) -> int:
        return self.layout.num_modes

    def symplectic_eigenvalues(self) -> np.ndarray:
        return williamson_values(self.covariance)


@dataclass(frozen=True)
class SymplecticMatrix:
    """Linear phase-space map preserving the commutation form."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        mat = np.array(self.matrix, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] % 2:
            raise ValueError("symplectic matrix must be square of even dimension")
        omega = commutation_form(mat.shape[0] // 2)
        residual = np.max(np.abs(mat @ omega @ mat.T - omega))
        if residual > _SYMPLECTIC_TOL:
            raise ValueError(f"matrix is not symplectic (residual {residual:.3e})")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def num_modes(self) -> int:
        return self.matrix.shape[0] // 2


@dataclass(frozen=True)
class MeasurementRecord:
    """Momentum homodyne outcomes for an ordered set of measured modes."""

    measured_modes: tuple[int, ...]
    outcomes: np.ndarray
    seed: int

    def __post_init__(self) -> None:
        outcomes = np.array(self.outcomes, dtype=float).reshape(-1)
        if len(outcomes) != len(self.measured_modes):
            raise ValueError("one outcome per measured mode is required")
        outcomes.setflags(write=False)
        object.__setattr__(self, "outcomes", outcomes)


def make_initial_state(
    num_modes: int, mu: float, roles: Sequence[str] | None = None
) -> GaussianState:
    """Unentangled product state with Var(x) = 1/(2 mu) and Var(p) = mu/2 per mode.

    mu = 1 is the vacuum; mu < 1 squeezes momentum fluctuations below the
    vacuum level.  Every mode is pure (symplectic eigenvalue exactly 1/2).
    """
    if num_modes < 1:
        raise ValueError("num_modes must be >= 1")
    if mu <= 0:
        raise ValueError("mu must be positive")
    if roles is None:
        layout = QuadratureLayout.uniform(num_modes)
    else:
        layout = QuadratureLayout(num_modes, tuple(roles))
    variances = np.concatenate(
        [np.full(num_modes, 1.0 / (2.0 * mu)), np.full(num_modes, mu / 2.0)]
    )
    return GaussianState(layout, np.diag(variances), np.zeros(2 * num_modes))


def quench_propagator(coupling: np.ndarray, t: float) -> SymplecticMatrix:
    """Propagator [[I, 0], [-J t, I]] of the quadratic quench x^T J x / 2."""
    j = np.asarray(coupling, dtype=float)
    if j.ndim != 2 or j.shape[0] != j.shape[1]:
        raise ValueError("coupling matrix must be square")
    if np.max(np.abs(j - j.T)) > _SYMMETRY_TOL * max(1.0, float(np.max(np.abs(j)))):
        raise ValueError("coupling matrix must be symmetric")
    n = j.shape[0]
    mat = np.eye(2 * n)
    mat[n:, :n] = -t * j
    return SymplecticMatrix(mat)


def apply_quench(state: GaussianState, coupling: np.ndarray, t: float) -> GaussianState:
    """Evolve covariance and mean through the quench: V -> S V S^T, mean -> S mean."""
    j = np.asarray(coupling, dtype=float)
    n = state.num_modes
    if j.shape != (n, n):
        raise ValueError(f"coupling matrix must have shape {(n, n)}, got {j.shape}")
    s = quench_propagator(j, t).matrix
    cov = s @ state.covariance @ s.T
    cov = 0.5 * (cov + cov.T)
    return GaussianState(state.layout, cov, s @ state.mean)


def _split_measured(num_modes: int, measured_modes: Sequence[int]) -> tuple[list[int], list[int]]:
    measured = sorted(set(int(m) for m in measured_modes))
    if not measured:
        raise ValueError("measured mode set is empty")
    if measured[0] < 0 or measured[-1] >= num_modes:
        raise ValueError("measured mode index out of range")
    if len(measured) == num_modes:
        raise ValueError("measuring every mode leaves no conditional state")
    measured_set = set(measured)
    kept = [m for m in range(num_modes) if m not in measured_set]
    return kept, measured


def _momentum_conditioner(
    cross: np.ndarray, bulk_cov: np.ndarray, num_measured: int
) -> np.ndarray:
    """C (Pi_p W Pi_p)^+ restricted to momentum inputs, as a (2K, M) matrix.

    Inverts the momentum-momentum sub-block of W directly when it is
    positive definite; otherwise falls back to a Moore-Penrose inverse of
    the projected block with relative singular-value cutoff 1e-12.
    """
    w_pp = bulk_cov[num_measured:, num_measured:]
    c_p = cross[:, num_measured:]
    try:
        factor = scipy.linalg.cho_factor(w_pp)
        return scipy.linalg.cho_solve(factor, c_p.T).T
    except scipy.linalg.LinAlgError:
        projected = np.zeros_like(bulk_cov)
        projected[num_measured:, num_measured:] = w_pp
        pinv = np.linalg.pinv(projected, rcond=_PINV_CUTOFF, hermitian=True)
        return (cross @ pinv)[:, num_measured:]


def condition_on_momentum_measurement(
    state: GaussianState, measured_modes: Sequence[int]
) -> GaussianState:
    """Conditional state of the unmeasured modes after momentum homodyne.

    Partitions the covariance into kept block B, measured block W and cross
    block C and returns B - C (Pi_p W Pi_p)^+ C^T on the kept modes.  The
    result does not depend on the measurement outcomes; the returned mean
    is zero (outcome displacements are assumed fed back).
    """
    kept, measured = _split_measured(state.num_modes, measured_modes)
    n = state.num_modes
    keep_idx = kept + [n + m for m in kept]
    meas_idx = measured + [n + m for m in measured]
    cov = state.covariance
    b = cov[np.ix_(keep_idx, keep_idx)]
    c = cov[np.ix_(keep_idx, meas_idx)]
    w = cov[np.ix_(meas_idx, meas_idx)]
    conditioner = _momentum_conditioner(c, w, len(measured))
    cond = b - conditioner @ c[:, len(measured):].T
    cond = 0.5 * (cond + cond.T)
    return GaussianState(state.layout.restricted(kept), cond, np.zeros(2 * len(kept)))


def conditional_mean_map(state: GaussianState, measured_modes: Sequence[int]) -> np.ndarray:
    """Linear map from momentum outcomes to the conditional mean of kept modes.

    Returns M of shape (2K, M_measured) such that the kept-mode mean vector
    equals M @ outcomes, in the kept modes' xxpp ordering.
    """
    kept, measured = _split_measured(state.num_modes, measured_modes)
    n = state.num_modes
    keep_idx = kept + [n + m for m in kept]
    meas_idx = measured + [n + m for m in measured]
    cov = state.covariance
    c = cov[np.ix_(keep_idx, meas_idx)]
    w = cov[np.ix_(meas_idx, meas_idx)]
    return _momentum_conditioner(c, w, len(measured))


def sample_measurement(
    state: GaussianState, measured_modes: Sequence[int], seed: int
) -> MeasurementRecord:
    """Draw momentum outcomes for the measured modes from their marginal.

    Deterministic for a fixed seed.  Sampling all modes is allowed (unlike
    conditioning, which needs a nonempty remainder).
    """
    measured = sorted(set(int(m) for m in measured_modes))
    if not measured:
        raise ValueError("measured mode set is empty")
    if measured[0] < 0 or measured[-1] >= state.num_modes:
        raise ValueError("measured mode index out of range")
    n = state.num_modes
    p_idx = [n + m for m in measured]
    mean = state.mean[p_idx]
    cov = state.covariance[np.ix_(p_idx, p_idx)]
    rng = np.random.default_rng(seed)
    outcomes = rng.multivariate_normal(mean, cov, method="cholesky")
    return MeasurementRecord(tuple(measured), outcomes, seed)
