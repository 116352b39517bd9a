"""Kernel functions, the kernelized ridge forecaster, and capacity measures.

The forecaster keeps the full history since birth and extends a Cholesky
factor of (K + lam*I) by one row per observation, so the per-round cost is
O(t^2) in the rounds seen so far.  ``effective_dimension`` and
``lambda_schedule`` expose the capacity measure and the regularization
schedule used by the kernel experiments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .core import SubroutineFactory

# Cholesky pivots at or below this get jittered rather than aborting.
_PIVOT_FLOOR = 1e-10
_JITTER_SCALE = 1e-8


@dataclass(frozen=True)
class KernelFunction:
    """Positive definite kernel: linear, gaussian(bandwidth), or polynomial.

    gaussian uses exp(-||x - x'||^2 / (2 bw^2)); polynomial uses
    (x.x' + offset)^degree.  k(x, x) is 1 for gaussian, ||x||^2 for linear,
    and (||x||^2 + offset)^degree for polynomial.
    """

    kind: str
    bandwidth: float = 1.0
    degree: int = 2
    offset: float = 0.0

    def __post_init__(self):
        if self.kind not in ("linear", "gaussian", "polynomial"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "gaussian" and self.bandwidth <= 0:
            raise ValueError("gaussian bandwidth must be positive")
        if self.kind == "polynomial" and (self.degree < 1 or self.offset < 0):
            raise ValueError("polynomial needs degree >= 1 and offset >= 0")

    def pairwise(self, xs: np.ndarray, zs: np.ndarray) -> np.ndarray:
        """Gram block between row-stacked inputs xs (m,d) and zs (k,d)."""
        xs = np.atleast_2d(xs)
        zs = np.atleast_2d(zs)
        if self.kind == "linear":
            return xs @ zs.T
        if self.kind == "polynomial":
            return (xs @ zs.T + self.offset) ** self.degree
        sq = (
            np.sum(xs * xs, axis=1)[:, None]
            + np.sum(zs * zs, axis=1)[None, :]
            - 2.0 * (xs @ zs.T)
        )
        np.maximum(sq, 0.0, out=sq)
        return np.exp(-sq / (2.0 * self.bandwidth * self.bandwidth))

    def __call__(self, x: np.ndarray, z: np.ndarray) -> float:
        return float(self.pairwise(np.atleast_2d(x), np.atleast_2d(z))[0, 0])


def linear_kernel() -> KernelFunction:
    return KernelFunction("linear")


def gaussian_kernel(bandwidth: float) -> KernelFunction:
    return KernelFunction("gaussian", bandwidth=bandwidth)


def polynomial_kernel(degree: int, offset: float = 0.0) -> KernelFunction:
    return KernelFunction("polynomial", degree=degree, offset=offset)


def kernel_eval(kernel: KernelFunction, x: np.ndarray, z: np.ndarray) -> float:
    """Evaluate k(x, z) for two single inputs of matching dimension."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if x.shape != z.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {z.shape}")
    return kernel(x, z)


class KernelAwv:
    """Kernelized ridge forecaster with the query point regularized.

    Prediction at x solves the query-augmented system in representer form:
    with A = K_hist + lam*I, k the kernel column against history, and
    c = k(x, x) + lam, the prediction is lam * k^T A^{-1} y / (c - k^T A^{-1} k),
    which equals the final coordinate pairing of (K + lam*I)^{-1} (y, 0)
    against the query column.  ``observe`` appends one row to the Cholesky
    factor of A; earlier rows are never touched.
    """

    def __init__(self, kernel: KernelFunction, lam: float, capacity: int = 16):
        if lam <= 0:
            raise ValueError("lam must be positive")
        self.kernel = kernel
        self.lam = float(lam)
        self._n = 0
        self._xs = np.zeros((capacity, 0))
        self._ys = np.zeros(capacity)
        self._chol = np.zeros((capacity, capacity))
        self._alpha = np.zeros(0)  # A^{-1} ys, refreshed on observe
        self.kappa_sq = 1.0  # running max of k(x, x), scales the jitter
        self.jittered = False

    @property
    def n_obs(self) -> int:
        return self._n

    @property
    def xs(self) -> np.ndarray:
        return self._xs[: self._n]

    @property
    def ys(self) -> np.ndarray:
        return self._ys[: self._n]

    @property
    def chol(self) -> np.ndarray:
        """Lower-triangular factor of (K + lam*I) over the observed inputs."""
        return self._chol[: self._n, : self._n]

    def _grow(self, dim: int) -> None:
        cap = self._xs.shape[0]
        if self._xs.shape[1] != dim:
            if self._n > 0:
                raise ValueError("input dimension changed mid-stream")
            self._xs = np.zeros((cap, dim))
        if self._n < cap:
            return
        new_cap = max(2 * cap, 16)
        xs = np.zeros((new_cap, dim))
        xs[: self._n] = self._xs[: self._n]
        ys = np.zeros(new_cap)
        ys[: self._n] = self._ys[: self._n]
        chol = np.zeros((new_cap, new_cap))
        chol[: self._n, : self._n] = self._chol[: self._n, : self._n]
        self._xs, self._ys, self._chol = xs, ys, chol

    def predict(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        kxx = self.kernel(x, x)
        if self._n == 0:
            return 0.0
        k_vec = self.kernel.pairwise(self._xs[: self._n], x[None, :])[:, 0]
        lower = self._chol[: self._n, : self._n]
        z = solve_triangular(lower, k_vec, lower=True, check_finite=False)
        schur = (kxx + self.lam) - float(z @ z)
        return self.lam * float(k_vec @ self._alpha) / schur

    def observe(self, x: np.ndarray, y: float) -> None:
        x = np.asarray(x, dtype=float)
        self._grow(x.shape[0])
        kxx = self.kernel(x, x)
        self.kappa_sq = max(self.kappa_sq, kxx)
        n = self._n
        if n == 0:
            pivot_sq = kxx + self.lam
        else:
            k_vec = self.kernel.pairwise(self._xs[:n], x[None, :])[:, 0]
            z = solve_triangular(
                self._chol[:n, :n], k_vec, lower=True, check_finite=False
            )
            pivot_sq = (kxx + self.lam) - float(z @ z)
            self._chol[n, :n] = z
        if pivot_sq <= _PIVOT_FLOOR:
            pivot_sq += _JITTER_SCALE * self.kappa_sq
            self.jittered = True
        self._chol[n, n] = np.sqrt(pivot_sq)
        self._xs[n] = x
        self._ys[n] = float(y)
        self._n = n + 1
        lower = self._chol[: self._n, : self._n]
        tmp = solve_triangular(lower, self._ys[: self._n], lower=True, check_finite=False)
        self._alpha = solve_triangular(
            lower.T, tmp, lower=False, check_finite=False
        )


def kernel_awv_factory(kernel: KernelFunction, lam: float) -> SubroutineFactory:
    return lambda birth: KernelAwv(kernel, lam)


def effective_dimension(k_mat: np.ndarray, lam: float) -> float:
    """Tr(K (K + lam*I)^{-1}) for a symmetric PSD matrix K.

    Computed through a direct solve; raises for lam <= 0, asymmetric input,
    or an eigenvalue below -1e-8.
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    k_mat = np.asarray(k_mat, dtype=float)
    if k_mat.ndim != 2 or k_mat.shape[0] != k_mat.shape[1]:
        raise ValueError("K must be square")
    n = k_mat.shape[0]
    if n == 0:
        return 0.0
    if not np.allclose(k_mat, k_mat.T, atol=1e-10):
        raise ValueError("K must be symmetric")
    if float(np.linalg.eigvalsh(k_mat)[0]) < -1e-8:
        raise ValueError("K must be positive semi-definite")
    sol = np.linalg.solve(k_mat + lam * np.eye(n), k_mat)
    return float(np.trace(sol))


def lambda_schedule(n: int, m: int, beta: float) -> float:
    """Regularization (n/m)^(beta/(beta+1)) for m restarts over n rounds."""
    if not 0.0 < beta < 1.0:
        raise ValueError("beta must lie in (0, 1)")
    if m < 1 or n < m:
        raise ValueError("need n >= m >= 1")
    return float((n / m) ** (beta / (beta + 1.0)))
