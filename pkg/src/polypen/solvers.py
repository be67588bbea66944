"""OLS, weighted ridge and weighted LASSO fits of polynomial models.

All objectives use the unscaled sum of squared residuals,

    SSR(theta) + sum_m w_m * theta_m**2        (ridge)
    SSR(theta) + sum_m w_m * |theta_m|         (LASSO)

where coefficients with norm ``NONE`` are left unpenalized (the intercept of
RRBLUP, for instance).
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy import linalg
from scipy.linalg import lapack

from .coding import DesignMatrix, build_design_matrix
from .polynomial import Monomial, PolynomialCoefficients, PolynomialModel, total_degree

CONDITION_LIMIT = 1e12
LASSO_TOL = 1e-10
LASSO_MAX_SWEEPS = 100_000
ORACLE_MAX_MONOMIALS = 6


class RankDeficient(np.linalg.LinAlgError):
    """The (penalized) Gram matrix is singular or too ill-conditioned to solve."""


class NonConvergence(RuntimeError):
    pass


class TooLarge(ValueError):
    pass


class Norm(enum.Enum):
    NONE = "none"
    L2 = "l2"
    L1 = "l1"

    @classmethod
    def parse(cls, text: str) -> "Norm":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise ValueError(f"unknown penalty norm {text!r}; use none, l2 or l1") from None


@dataclass(frozen=True, eq=False)
class PenaltySpec:
    """One (norm, weight) entry per monomial of ``model``, in model order."""

    model: PolynomialModel
    norms: tuple[Norm, ...]
    weights: np.ndarray

    def __post_init__(self):
        norms = tuple(Norm(n) if not isinstance(n, Norm) else n for n in self.norms)
        weights = np.array(self.weights, dtype=float).reshape(-1)
        if len(norms) != len(self.model) or weights.shape[0] != len(self.model):
            raise ValueError("penalty needs exactly one entry per model monomial")
        if np.any(weights < 0) or not np.all(np.isfinite(weights)):
            raise ValueError("penalty weights must be finite and non-negative")
        if Norm.L1 in norms and Norm.L2 in norms:
            raise ValueError("a penalty cannot mix L1 and L2 entries")
        weights = np.where([n is Norm.NONE for n in norms], 0.0, weights)
        weights.setflags(write=False)
        object.__setattr__(self, "norms", norms)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def none(cls, model: PolynomialModel) -> "PenaltySpec":
        return cls(model, (Norm.NONE,) * len(model), np.zeros(len(model)))

    @classmethod
    def by_degree(cls, model: PolynomialModel, weights: Mapping[int, float], norm: Norm | str = Norm.L2) -> "PenaltySpec":
        """Penalize every monomial of total degree K with ``weights[K]``.

        Degrees absent from ``weights`` stay unpenalized.
        """
        norm = Norm(norm) if not isinstance(norm, Norm) else norm
        norms, w = [], []
        for m in model.monomials:
            K = total_degree(m)
            if K in weights:
                norms.append(norm)
                w.append(weights[K])
            else:
                norms.append(Norm.NONE)
                w.append(0.0)
        return cls(model, tuple(norms), np.array(w))

    @property
    def norm(self) -> Norm:
        """The single penalizing norm used, or NONE if nothing is penalized."""
        for n in self.norms:
            if n is not Norm.NONE:
                return n
        return Norm.NONE

    @property
    def penalized(self) -> np.ndarray:
        return np.array([n is not Norm.NONE for n in self.norms], dtype=bool)

    def penalty_value(self, theta: np.ndarray) -> float:
        if self.norm is Norm.L1:
            return float(np.sum(self.weights * np.abs(theta)))
        if self.norm is Norm.L2:
            return float(np.sum(self.weights * theta**2))
        return 0.0


@dataclass(frozen=True)
class FitResult:
    coefficients: PolynomialCoefficients
    fitted: np.ndarray
    residuals: np.ndarray
    ssr: float
    objective: float
    iterations: int = 0

    @property
    def theta(self) -> np.ndarray:
        return self.coefficients.values


def _finish(X: DesignMatrix, y: np.ndarray, theta: np.ndarray, penalty: PenaltySpec | None, iterations: int = 0) -> FitResult:
    fitted = X.values @ theta
    residuals = y - fitted
    ssr = float(residuals @ residuals)
    objective = ssr + (penalty.penalty_value(theta) if penalty is not None else 0.0)
    return FitResult(PolynomialCoefficients(X.model, theta), fitted, residuals, ssr, objective, iterations)


def _check_inputs(X: DesignMatrix, y, penalty: PenaltySpec | None = None) -> np.ndarray:
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.shape[0] != X.values.shape[0]:
        raise ValueError(f"y has {y.shape[0]} entries, design matrix has {X.values.shape[0]} rows")
    if not np.all(np.isfinite(y)):
        raise ValueError("y contains non-finite entries")
    if penalty is not None and penalty.model != X.model:
        raise ValueError("penalty and design matrix are over different models")
    return y


def condition_estimate(A: np.ndarray) -> float:
    """1-norm condition estimate of an SPD matrix via Cholesky; inf if not PD."""
    if A.shape[0] == 0:
        return 1.0
    c, info = lapack.dpotrf(A, lower=False, clean=True)
    if info != 0:
        return np.inf
    anorm = np.linalg.norm(A, 1)
    rcond, info = lapack.dpocon(c, anorm)
    if info != 0 or rcond <= 0:
        return np.inf
    return 1.0 / rcond


def _spd_solve(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    if A.shape[0] == 0:
        return np.zeros(0)
    try:
        factor = linalg.cho_factor(A, lower=False, check_finite=False)
    except linalg.LinAlgError:
        raise RankDeficient("Gram matrix is not positive definite; the solution is not unique") from None
    rcond, info = lapack.dpocon(factor[0], np.linalg.norm(A, 1))
    if info != 0 or rcond <= 0 or 1.0 / rcond > CONDITION_LIMIT:
        cond = np.inf if rcond <= 0 else 1.0 / rcond
        raise RankDeficient(f"condition estimate {cond:.3g} exceeds {CONDITION_LIMIT:.0e}")
    return linalg.cho_solve(factor, b, check_finite=False)


def fit_ols(X: DesignMatrix, y) -> FitResult:
    """Least squares through the normal equations (X'X) theta = X'y."""
    y = _check_inputs(X, y)
    if X.values.shape[0] < X.values.shape[1]:
        raise RankDeficient(
            f"{X.values.shape[0]} observations cannot determine {X.values.shape[1]} coefficients"
        )
    A = X.values.T @ X.values
    theta = _spd_solve(A, X.values.T @ y)
    return _finish(X, y, theta, None)


def fit_ridge_weighted(X: DesignMatrix, y, penalty: PenaltySpec) -> FitResult:
    """Solve (X'X + diag(w)) theta = X'y, w = 0 on unpenalized monomials."""
    y = _check_inputs(X, y, penalty)
    if penalty.norm is Norm.L1:
        raise ValueError("fit_ridge_weighted needs an L2 (or empty) penalty")
    A = X.values.T @ X.values + np.diag(penalty.weights)
    theta = _spd_solve(A, X.values.T @ y)
    return _finish(X, y, theta, penalty)


def soft_threshold(z, t):
    return np.sign(z) * np.maximum(np.abs(z) - t, 0.0)


def _lasso_pattern_solve(G, c, weights, free, signs):
    """Stationary point with coordinates outside ``free`` fixed at zero.

    On the free set: G_FF theta_F = c_F - (w_F / 2) * signs_F.
    Returns None if the reduced system is singular.
    """
    theta = np.zeros(G.shape[0])
    if not np.any(free):
        return theta
    A = G[np.ix_(free, free)]
    b = c[free] - 0.5 * weights[free] * signs[free]
    try:
        factor = linalg.cho_factor(A, check_finite=False)
    except linalg.LinAlgError:
        return None
    rcond, info = lapack.dpocon(factor[0], np.linalg.norm(A, 1))
    if info != 0 or rcond <= 0 or 1.0 / rcond > CONDITION_LIMIT:
        return None
    theta[free] = linalg.cho_solve(factor, b, check_finite=False)
    return theta


def kkt_violation(X: DesignMatrix, y, penalty: PenaltySpec, theta) -> float:
    """Largest violation of the LASSO optimality conditions at ``theta``.

    With r = y - X theta and g = 2 X'r: unpenalized g_m = 0; penalized nonzero
    g_m = w_m sign(theta_m); penalized zero |g_m| <= w_m.
    """
    y = np.asarray(y, dtype=float)
    theta = np.asarray(theta, dtype=float)
    g = 2.0 * X.values.T @ (y - X.values @ theta)
    w = penalty.weights
    pen = penalty.penalized & (w > 0)
    viol = np.where(~pen, np.abs(g), 0.0)
    nz = pen & (theta != 0)
    viol = np.where(nz, np.abs(g - w * np.sign(theta)), viol)
    z = pen & (theta == 0)
    viol = np.where(z, np.maximum(np.abs(g) - w, 0.0), viol)
    return float(np.max(viol, initial=0.0))


def fit_lasso_weighted(
    X: DesignMatrix,
    y,
    penalty: PenaltySpec,
    tol: float = LASSO_TOL,
    max_sweeps: int = LASSO_MAX_SWEEPS,
    polish_every: int = 25,
) -> FitResult:
    """Weighted LASSO by cyclic coordinate descent.

    Penalized coordinates are visited in model order and updated by
    soft-thresholding. The unpenalized coordinates form one block that is
    refit exactly by least squares after each sweep.

    Every ``polish_every`` sweeps, and again at convergence, the current
    active set and signs are frozen and the stationarity system on that set
    is solved directly. A polished point that is sign-consistent and meets
    the optimality conditions to ``1e-10 * (1 + max|2 X'y|)`` is returned at
    once; on correlated columns this cuts thousands of sweeps.
    """
    y = _check_inputs(X, y, penalty)
    if penalty.norm is Norm.L2:
        raise ValueError("fit_lasso_weighted needs an L1 (or empty) penalty")
    Xv = X.values
    G = Xv.T @ Xv
    c = Xv.T @ y
    w = penalty.weights
    pen_idx = np.flatnonzero(penalty.penalized & (w > 0))
    free_idx = np.flatnonzero(~(penalty.penalized & (w > 0)))
    k = Xv.shape[1]
    diag = np.diag(G).copy()

    block = None
    if free_idx.size:
        Gff = G[np.ix_(free_idx, free_idx)]
        try:
            block = linalg.cho_factor(Gff, check_finite=False)
        except linalg.LinAlgError:
            raise RankDeficient("unpenalized columns are linearly dependent") from None
        if condition_estimate(Gff) > CONDITION_LIMIT:
            raise RankDeficient("unpenalized columns are too ill-conditioned")

    active_pen = penalty.penalized & (w > 0)
    kkt_tol = 1e-10 * (1.0 + 2.0 * float(np.max(np.abs(c), initial=0.0)))

    def polish(theta):
        signs = np.sign(theta)
        free = (signs != 0) | ~active_pen
        cand = _lasso_pattern_solve(G, c, w, free, signs)
        if cand is None:
            return None
        nz = free & (signs != 0)
        if np.any(cand[nz] * signs[nz] <= 0):
            return None
        g = 2.0 * (c - G @ cand)
        viol = np.where(active_pen & ~free, np.maximum(np.abs(g) - w, 0.0), 0.0)
        viol = np.where(nz, np.abs(g - w * signs), viol)
        viol = np.where(~active_pen, np.abs(g), viol)
        return cand if float(np.max(viol, initial=0.0)) <= kkt_tol else None

    theta = np.zeros(k)
    # G @ theta kept up to date incrementally
    Gt = np.zeros(k)
    for sweeps in range(1, max_sweeps + 1):
        max_change = 0.0
        if block is not None:
            # exact refit of the unpenalized block given the penalized ones
            rhs = c[free_idx] - (Gt[free_idx] - G[np.ix_(free_idx, free_idx)] @ theta[free_idx])
            new = linalg.cho_solve(block, rhs, check_finite=False)
            delta = new - theta[free_idx]
            if np.any(delta):
                Gt += G[:, free_idx] @ delta
                theta[free_idx] = new
                max_change = max(max_change, float(np.max(np.abs(delta))))
        for j in pen_idx:
            if diag[j] == 0.0:
                continue
            old = theta[j]
            z = c[j] - Gt[j] + diag[j] * old
            new = soft_threshold(z, 0.5 * w[j]) / diag[j]
            if new != old:
                Gt += G[:, j] * (new - old)
                theta[j] = new
                max_change = max(max_change, abs(new - old))
        converged = max_change <= tol
        if converged or sweeps % polish_every == 0:
            polished = polish(theta)
            if polished is not None:
                return _finish(X, y, polished, penalty, sweeps)
        if converged:
            return _finish(X, y, theta, penalty, sweeps)
    raise NonConvergence(f"coordinate descent did not reach {tol:g} in {max_sweeps} sweeps")


def lasso_oracle_small(X: DesignMatrix, y, penalty: PenaltySpec) -> FitResult:
    """Exact weighted LASSO by enumerating sign patterns of the penalized coordinates.

    For every pattern s in {-1, 0, +1}^k the stationarity system is solved on
    the coordinates with s != 0 (plus the unpenalized ones); solutions whose
    signs disagree with s are discarded and the cheapest survivor wins.
    """
    y = _check_inputs(X, y, penalty)
    if penalty.norm is Norm.L2:
        raise ValueError("lasso_oracle_small needs an L1 (or empty) penalty")
    k = X.values.shape[1]
    if k > ORACLE_MAX_MONOMIALS:
        raise TooLarge(f"oracle handles at most {ORACLE_MAX_MONOMIALS} monomials, got {k}")
    G = X.values.T @ X.values
    c = X.values.T @ y
    w = penalty.weights
    pen = penalty.penalized & (w > 0)
    pen_idx = np.flatnonzero(pen)

    best = None
    for pattern in itertools.product((-1.0, 0.0, 1.0), repeat=pen_idx.size):
        signs = np.zeros(k)
        signs[pen_idx] = pattern
        free = ~pen | (signs != 0)
        theta = _lasso_pattern_solve(G, c, w, free, signs)
        if theta is None:
            continue
        active = pen & (signs != 0)
        if np.any(theta[active] * signs[active] < 0):
            continue
        fit = _finish(X, y, theta, penalty)
        if best is None or fit.objective < best.objective:
            best = fit
    if best is None:
        raise RankDeficient("no sign pattern gave a solvable stationarity system")
    return best


def predict(f: PolynomialCoefficients, M) -> np.ndarray:
    """Fitted values f(M_i) for every row of ``M``."""
    X = build_design_matrix(M, f.model)
    return X.values @ f.values


def fit(X: DesignMatrix, y, method: str, penalty: PenaltySpec | None = None) -> FitResult:
    """Dispatch on ``method`` ('ols', 'ridge' or 'lasso')."""
    method = method.lower()
    if penalty is None:
        penalty = PenaltySpec.none(X.model)
    if method == "ols":
        if penalty.norm is not Norm.NONE:
            raise ValueError("OLS does not take a penalty")
        return fit_ols(X, y)
    if method == "ridge":
        if penalty.norm is Norm.L1:
            raise ValueError("ridge needs an L2 penalty")
        return fit_ridge_weighted(X, y, penalty)
    if method == "lasso":
        if penalty.norm is Norm.L2:
            raise ValueError("lasso needs an L1 penalty")
        return fit_lasso_weighted(X, y, penalty)
    raise ValueError(f"unknown method {method!r}")
