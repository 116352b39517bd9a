"""Restartable online learners for the aggregation layer.

Four non-kernel subroutines: a restarted moving average, projected online
gradient descent, an online Newton step with rank-one inverse maintenance,
and the forecaster that solves ridge regression with the current query point
counted in the regularizer (Vovk-Azoury-Warmuth style).

All of them satisfy the ``core.Subroutine`` contract: ``predict`` is pure,
``observe`` transitions state, and a fresh instance predicts 0 on an empty
history.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .core import Subroutine, SubroutineFactory

# Rank-one inverse updates fall back to a direct solve below this.
_SM_FLOOR = 1e-12


def _project_l2(theta: np.ndarray, radius: float) -> np.ndarray:
    nrm = float(np.linalg.norm(theta))
    if nrm <= radius:
        return theta
    return theta * (radius / nrm)


def _project_weighted(z: np.ndarray, a_mat: np.ndarray, radius: float) -> np.ndarray:
    """Project z onto the l2 ball of the given radius in the A-weighted norm.

    Minimizes (u - z)^T A (u - z) subject to ||u|| <= radius.  The KKT system
    gives u = (A + mu I)^{-1} A z with mu >= 0 chosen so that ||u|| = radius;
    ||u(mu)|| is monotone decreasing so bisection on mu converges.
    """
    if float(np.linalg.norm(z)) <= radius:
        return z
    evals, evecs = np.linalg.eigh(a_mat)
    w = evecs.T @ z

    def norm_sq(mu: float) -> float:
        r = (evals * w) / (evals + mu)
        return float(r @ r)

    lo, hi = 0.0, 1.0
    while norm_sq(hi) > radius * radius:
        hi *= 2.0
        if hi > 1e30:
            break
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if norm_sq(mid) > radius * radius:
            lo = mid
        else:
            hi = mid
    mu = 0.5 * (lo + hi)
    return evecs @ ((evals * w) / (evals + mu))


class MovingAverage:
    """Mean of the outputs seen since birth; 0 before any observation."""

    __slots__ = ("count", "sum")

    def __init__(self):
        self.count = 0
        self.sum = 0.0

    def predict(self, x: Optional[np.ndarray] = None) -> float:
        if self.count == 0:
            return 0.0
        return self.sum / self.count

    def observe(self, x: Optional[np.ndarray], y: float) -> None:
        self.count += 1
        self.sum += float(y)


class Ogd:
    """Projected online gradient descent on the squared loss.

    Step size B / (G sqrt(k)) with k the per-instance round counter; the
    gradient bound G starts at a supplied guess and is tightened online to
    the running max of observed gradient norms (the step uses the value
    carried into the round).  Iterates stay inside the l2 ball of radius B.
    """

    __slots__ = ("theta", "radius", "grad_bound", "steps")

    def __init__(self, dim: int, radius: float, grad_bound: float = 1.0):
        if radius <= 0 or grad_bound <= 0:
            raise ValueError("radius and grad_bound must be positive")
        self.theta = np.zeros(dim)
        self.radius = float(radius)
        self.grad_bound = float(grad_bound)
        self.steps = 0

    def predict(self, x: np.ndarray) -> float:
        return float(x @ self.theta)

    def observe(self, x: np.ndarray, y: float) -> None:
        k = self.steps + 1
        resid = float(x @ self.theta) - float(y)
        g = (2.0 * resid) * x
        eta = self.radius / (self.grad_bound * np.sqrt(k))
        self.theta = _project_l2(self.theta - eta * g, self.radius)
        self.steps = k
        self.grad_bound = max(self.grad_bound, float(np.linalg.norm(g)))


class Ons:
    """Online Newton step for the squared loss with ball projection.

    Maintains A = eps*I + sum of gradient outer products in inverse form via
    rank-one (Sherman-Morrison) updates, stepping theta <- theta -
    (1/gamma) A^{-1} g and projecting back onto the l2 ball in the A-weighted
    norm.  When ``gamma``/``epsilon`` are not supplied they are estimated:
    gamma tracks the curvature-matched value 1/(2 * mean squared residual),
    which makes the step coincide with recursive least squares when the
    stream is realizable (gradient outer products concentrate around
    4 * resid^2 * x x^T), and eps = 1/(gamma0^2 D^2) with D = 2B from the
    first residual.  Residual statistics are estimated online because the
    noise level is unknown by design; explicit gamma/epsilon stay fixed.
    """

    def __init__(
        self,
        dim: int,
        radius: float,
        gamma: Optional[float] = None,
        epsilon: Optional[float] = None,
    ):
        if radius <= 0:
            raise ValueError("radius must be positive")
        self.dim = dim
        self.radius = float(radius)
        self.theta = np.zeros(dim)
        self._adaptive = gamma is None
        self.gamma = float(gamma) if gamma is not None else 0.0
        self.epsilon = float(epsilon) if epsilon is not None else 0.0
        self._resid_sq_sum = 0.0
        self._resid_count = 0
        self.a_mat: Optional[np.ndarray] = None
        self.a_inv: Optional[np.ndarray] = None
        if epsilon is not None:
            if epsilon <= 0:
                raise ValueError("epsilon must be positive")
            self.a_mat = epsilon * np.eye(dim)
            self.a_inv = np.eye(dim) / epsilon

    def _tuned_gamma(self) -> float:
        if self._resid_count == 0:
            return 1.0
        mean_sq = self._resid_sq_sum / self._resid_count
        return 1.0 / max(2.0 * mean_sq, 1e-12)

    def predict(self, x: np.ndarray) -> float:
        return float(x @ self.theta)

    def observe(self, x: np.ndarray, y: float) -> None:
        resid = float(x @ self.theta) - float(y)
        g = (2.0 * resid) * x
        gnorm = float(np.linalg.norm(g))
        if gnorm == 0.0:
            return  # perfect fit: no update
        self._resid_sq_sum += resid * resid
        self._resid_count += 1
        if self.a_mat is None:
            # Lazy start: constants need a residual scale, which only exists now.
            gamma0 = self._tuned_gamma() if self._adaptive else self.gamma
            diam = 2.0 * self.radius
            self.epsilon = 1.0 / (gamma0 * gamma0 * diam * diam)
            self.a_mat = self.epsilon * np.eye(self.dim)
            self.a_inv = np.eye(self.dim) / self.epsilon
            if self._adaptive:
                self.gamma = gamma0
        gamma = self.gamma if self.gamma > 0 else self._tuned_gamma()

        a_inv_g = self.a_inv @ g
        denom = 1.0 + float(g @ a_inv_g)
        self.a_mat = self.a_mat + np.outer(g, g)
        if denom <= _SM_FLOOR:
            # Ill-conditioned rank-one update: direct SPD solve with jitter.
            jitter = 1e-12 * max(1.0, float(np.trace(self.a_mat)) / self.dim)
            self.a_inv = np.linalg.inv(self.a_mat + jitter * np.eye(self.dim))
        else:
            self.a_inv = self.a_inv - np.outer(a_inv_g, a_inv_g) / denom
        theta_raw = self.theta - (1.0 / gamma) * (self.a_inv @ g)
        self.theta = _project_weighted(theta_raw, self.a_mat, self.radius)
        if self._adaptive:
            self.gamma = self._tuned_gamma()


class Awv:
    """Online ridge forecaster with the query point in the regularizer.

    Predicts x^T (lam*I + sum_{s<t} x_s x_s^T + x x^T)^{-1} b with
    b = sum y_s x_s.  The state keeps P, the inverse of the un-queried Gram
    matrix, updated by rank-one steps; the query-augmented prediction folds
    into the closed form x^T P b / (1 + x^T P x), which never mutates state.
    """

    __slots__ = ("lam", "p_mat", "b_vec", "_gram")

    def __init__(self, dim: int, lam: float = 1.0):
        if lam <= 0:
            raise ValueError("lam must be positive")
        self.lam = float(lam)
        self.p_mat = np.eye(dim) / lam
        self.b_vec = np.zeros(dim)
        self._gram = np.zeros((dim, dim))  # kept for the direct-solve fallback

    def predict(self, x: np.ndarray) -> float:
        px = self.p_mat @ x
        return float(x @ (self.p_mat @ self.b_vec)) / (1.0 + float(x @ px))

    def observe(self, x: np.ndarray, y: float) -> None:
        px = self.p_mat @ x
        denom = 1.0 + float(x @ px)
        self._gram += np.outer(x, x)
        if denom <= _SM_FLOOR:
            dim = self.b_vec.shape[0]
            self.p_mat = np.linalg.inv(self.lam * np.eye(dim) + self._gram)
        else:
            self.p_mat = self.p_mat - np.outer(px, px) / denom
        self.b_vec = self.b_vec + float(y) * x


def moving_average_factory() -> SubroutineFactory:
    return lambda birth: MovingAverage()


def ogd_factory(dim: int, radius: float, grad_bound: float = 1.0) -> SubroutineFactory:
    return lambda birth: Ogd(dim, radius, grad_bound)


def ons_factory(
    dim: int,
    radius: float,
    gamma: Optional[float] = None,
    epsilon: Optional[float] = None,
) -> SubroutineFactory:
    return lambda birth: Ons(dim, radius, gamma, epsilon)


def awv_factory(dim: int, lam: float = 1.0) -> SubroutineFactory:
    return lambda birth: Awv(dim, lam)
