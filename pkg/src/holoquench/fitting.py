"""Least-squares extraction of entropy-model and power-law parameters.

Standard errors follow the usual asymptotic estimator: residual variance
times the diagonal of the inverted normal matrix (or of (J^T J)^-1 at the
optimum for nonlinear fits).  All fitters are deterministic: fixed
multi-start grids, no RNG.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from .entanglement import CorrelationCurve, EntropyCurve

_MAX_EVALS = 500
_BETA_GRID_FRACTIONS = (0.125, 0.25, 0.5, 1.0)


class FitError(RuntimeError):
    """A fit could not be carried out on the given data."""


class DegenerateFitError(FitError):
    """The design matrix is singular (no information on a parameter)."""


class FitConvergenceError(FitError):
    """The optimizer hit its evaluation budget; best-so-far is attached."""

    def __init__(self, message: str, best: "FitResult"):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True)
class FitResult:
    """Fitted parameters with standard errors and the abscissae used."""

    model_id: str
    params: dict[str, float]
    std_errors: dict[str, float]
    residual_norm: float
    domain: tuple[float, ...]
    extra: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.domain:
            raise ValueError("fit domain must be nonempty")
        if any(not math.isfinite(v) for v in self.params.values()):
            raise ValueError("fitted parameters must be finite")
        if any(v < 0 for v in self.std_errors.values()):
            raise ValueError("standard errors must be nonnegative")

    @property
    def rms_residual(self) -> float:
        return self.residual_norm / math.sqrt(len(self.domain))


def _curve_sites(curve: EntropyCurve) -> int:
    num_sites = curve.metadata.get("num_sites")
    if num_sites is None:
        raise FitError("entropy curve metadata lacks 'num_sites'")
    return int(num_sites)


def _linear_fit(design: np.ndarray, target: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """Solve min ||design @ beta - target||; return (beta, std_errors, rss)."""
    n, p = design.shape
    beta, _, rank, _ = np.linalg.lstsq(design, target, rcond=None)
    if rank < p:
        raise DegenerateFitError("design matrix is singular")
    residuals = design @ beta - target
    rss = float(residuals @ residuals)
    dof = max(n - p, 1)
    cov = rss / dof * np.linalg.inv(design.T @ design)
    return beta, np.sqrt(np.diag(cov)), rss


def fit_cft_entropy(curve: EntropyCurve, exclude_margin: int = 0) -> FitResult:
    """Fit S(ell) = (c/3) ln sin(pi ell / L) + epsilon by linear least squares."""
    num_sites = _curve_sites(curve)
    mask = (curve.sizes > exclude_margin) & (curve.sizes < num_sites - exclude_margin)
    ell = curve.sizes[mask].astype(float)
    entropy = curve.entropies[mask]
    if ell.size < 4:
        raise FitError("need at least four points for the entropy fit")
    design = np.column_stack([np.log(np.sin(np.pi * ell / num_sites)), np.ones_like(ell)])
    beta, errors, rss = _linear_fit(design, entropy)
    return FitResult(
        model_id="cft_disk",
        params={"c": 3.0 * beta[0], "epsilon": beta[1]},
        std_errors={"c": 3.0 * errors[0], "epsilon": errors[1]},
        residual_norm=math.sqrt(rss),
        domain=tuple(ell),
        extra={"num_sites": num_sites},
    )


def _btz_one_sided_curve(
    ell: np.ndarray, num_sites: int, c: float, epsilon: float, beta: float
) -> np.ndarray:
    third = c / 3.0
    s1 = third * np.log(np.sinh(np.pi * ell / beta)) + epsilon
    s2 = (
        np.pi * c * num_sites / (3.0 * beta)
        + third * np.log(np.sinh(np.pi * (num_sites - ell) / beta))
        + epsilon
    )
    return np.minimum(s1, s2)


def _btz_linear_init(
    ell: np.ndarray, entropy: np.ndarray, num_sites: int, beta: float
) -> tuple[float, float]:
    """Best (c, epsilon) for a frozen beta; the model is linear in both."""
    basis = _btz_one_sided_curve(ell, num_sites, 3.0, 0.0, beta) / 3.0
    design = np.column_stack([basis, np.ones_like(ell)])
    beta_vec, _, _ = _linear_fit(design, entropy)
    return float(beta_vec[0]), float(beta_vec[1])


def _beta_slope_heuristic(
    ell: np.ndarray, entropy: np.ndarray, num_sites: int
) -> float | None:
    """Rough beta from the small-ell growth and the thermal offset at large ell.

    Small regions grow like (c/3) ln(ell), so the initial slope estimates c;
    the rise S(L-1) - S(1) approximates the one-side thermal entropy
    pi c L / (3 beta), which then yields beta.
    """
    head = max(4, len(ell) // 4)
    design = np.column_stack([np.log(ell[:head]), np.ones(head)])
    try:
        beta_vec, _, _ = _linear_fit(design, entropy[:head])
    except DegenerateFitError:
        return None
    c0 = 3.0 * float(beta_vec[0])
    rise = float(entropy[-1] - entropy[0])
    if c0 <= 0 or rise <= 0:
        return None
    return math.pi * c0 * num_sites / (3.0 * rise)


def fit_btz_entropy(
    one_sided: EntropyCurve,
    two_sided: EntropyCurve | None = None,
    exclude_margin: int = 0,
) -> FitResult:
    """Fit (c, epsilon, beta) to a one-sided entropy curve.

    Damped least squares in (c, epsilon, ln beta), multi-started from a
    small-ell slope heuristic plus the fixed grid {L/8, L/4, L/2, L}.  When
    a two-sided curve is supplied, the plateau height of 2 min(S1, plateau)
    is co-fit as a fourth parameter on sizes up to L/2 (beyond that the
    two-sided data bends back down because the global state is pure, which
    the model does not describe).
    """
    num_sites = _curve_sites(one_sided)
    mask = (one_sided.sizes > exclude_margin) & (
        one_sided.sizes < num_sites - exclude_margin
    )
    ell = one_sided.sizes[mask].astype(float)
    entropy = one_sided.entropies[mask]
    if ell.size < 5:
        raise FitError("need at least five points for the thermal entropy fit")

    ell2 = entropy2 = None
    if two_sided is not None:
        if _curve_sites(two_sided) != num_sites:
            raise FitError("one- and two-sided curves must share the boundary size")
        half = (two_sided.sizes >= 1) & (two_sided.sizes <= num_sites // 2)
        ell2 = two_sided.sizes[half].astype(float)
        entropy2 = two_sided.entropies[half]

    with_plateau = two_sided is not None

    def residuals(theta: np.ndarray) -> np.ndarray:
        c, eps, log_beta = theta[:3]
        beta = math.exp(log_beta)
        res = _btz_one_sided_curve(ell, num_sites, c, eps, beta) - entropy
        if with_plateau:
            s1 = (c / 3.0) * np.log(np.sinh(np.pi * ell2 / beta)) + eps
            res2 = 2.0 * np.minimum(s1, theta[3]) - entropy2
            res = np.concatenate([res, res2])
        return res

    starts: list[float] = []
    heuristic = _beta_slope_heuristic(ell, entropy, num_sites)
    if heuristic is not None and 1.0 <= heuristic <= 100.0 * num_sites:
        starts.append(heuristic)
    starts.extend(fraction * num_sites for fraction in _BETA_GRID_FRACTIONS)

    attempts = []
    for order, beta0 in enumerate(starts):
        try:
            c0, eps0 = _btz_linear_init(ell, entropy, num_sites, beta0)
        except DegenerateFitError:
            continue
        theta0 = [c0, eps0, math.log(beta0)]
        if with_plateau:
            theta0.append(max(float(np.max(entropy2)) / 2.0, eps0))
        solution = scipy.optimize.least_squares(
            residuals, np.array(theta0), method="lm", max_nfev=_MAX_EVALS
        )
        converged = solution.status > 0
        attempts.append((solution.cost, order, converged, solution))
    if not attempts:
        raise FitError("no usable starting point for the thermal entropy fit")

    def build_result(solution) -> FitResult:
        c, eps, log_beta = solution.x[:3]
        beta = math.exp(log_beta)
        n_res = len(solution.fun)
        n_par = len(solution.x)
        dof = max(n_res - n_par, 1)
        sigma_sq = 2.0 * solution.cost / dof
        cov = sigma_sq * np.linalg.pinv(solution.jac.T @ solution.jac)
        se = np.sqrt(np.maximum(np.diag(cov), 0.0))
        params = {"c": float(c), "epsilon": float(eps), "beta": float(beta)}
        errors = {"c": float(se[0]), "epsilon": float(se[1]), "beta": float(se[2] * beta)}
        model_id = "btz_one_sided"
        extra = {"num_sites": num_sites, "converged": bool(solution.status > 0)}
        if with_plateau:
            params["plateau"] = float(solution.x[3])
            errors["plateau"] = float(se[3])
            model_id = "btz_two_sided"
        domain = tuple(ell) + (tuple(ell2) if with_plateau else ())
        return FitResult(
            model_id=model_id,
            params=params,
            std_errors=errors,
            residual_norm=math.sqrt(2.0 * solution.cost),
            domain=domain,
            extra=extra,
        )

    converged_attempts = [a for a in attempts if a[2]]
    if not converged_attempts:
        best = min(attempts, key=lambda a: (a[0], a[1]))
        raise FitConvergenceError(
            f"thermal entropy fit did not converge within {_MAX_EVALS} evaluations",
            build_result(best[3]),
        )
    best = min(converged_attempts, key=lambda a: (a[0], a[1]))
    return build_result(best[3])


def fit_power_law(curve: CorrelationCurve) -> FitResult:
    """Fit |values| ~ A sin(pi d / L)^(-2 Delta) on the large-sine third.

    Linear regression in log-log space over the third of the points with
    the largest sin(pi d / L); values there must be positive.
    """
    num_sites = curve.metadata.get("num_sites")
    if num_sites is None:
        raise FitError("correlation curve metadata lacks 'num_sites'")
    num_sites = int(num_sites)
    d = curve.separations.astype(float)
    chord = np.sin(np.pi * d / num_sites)
    order = sorted(range(len(d)), key=lambda k: (-chord[k], d[k]))
    keep = max(2, len(d) // 3)
    picked = sorted(order[:keep])
    dom = d[picked]
    values = curve.values[picked]
    bad = dom[values <= 0]
    if bad.size:
        raise FitError(
            "power-law fit needs positive values; non-positive at separations "
            + ", ".join(str(int(b)) for b in bad)
        )
    design = np.column_stack([np.log(chord[picked]), np.ones(len(picked))])
    beta, errors, rss = _linear_fit(design, np.log(values))
    delta = -float(beta[0]) / 2.0
    amplitude = math.exp(float(beta[1]))
    return FitResult(
        model_id="power_law",
        params={"delta": delta, "amplitude": amplitude},
        std_errors={"delta": float(errors[0]) / 2.0, "amplitude": amplitude * float(errors[1])},
        residual_norm=math.sqrt(rss),
        domain=tuple(dom),
        extra={"num_sites": num_sites, "label": curve.label},
    )
