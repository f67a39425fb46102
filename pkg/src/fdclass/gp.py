"""Gaussian processes with triangular covariance, and the two benchmark models.

A triangular covariance has the form ``Gamma(s, t) = u(min(s, t)) * v(max(s, t))``.
The factor functions and their derivatives are kept analytically because the
closed-form density ratios in :mod:`fdclass.bayes` need them at the nodes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import linalg

from .core import Grid
from .exceptions import (
    EvaluationError,
    HypothesisError,
    ParameterError,
    SingularCovarianceError,
)

__all__ = [
    "TriangularCovariance",
    "GPModel",
    "covariance_matrix",
    "jittered_cholesky",
    "sample_gaussian_paths",
    "ou_model",
    "brownian_model",
    "model1_population",
    "model2_means",
    "model2_sample",
    "hat_function",
]

Func = Callable[[np.ndarray], np.ndarray]

# u(a) below this is treated as zero (process pinned at the left endpoint).
ZERO_TOL = 1e-12


def _const(c):
    return lambda t: np.full(np.shape(t), float(c))


@dataclass(frozen=True)
class TriangularCovariance:
    """Covariance ``u(min(s,t)) v(max(s,t))`` with the factor derivatives."""

    u: Func
    v: Func
    du: Func
    dv: Func

    def factors(self, t):
        """``(u, v, u', v')`` evaluated at ``t``; raises on non-finite values."""
        t = np.asarray(t, dtype=float)
        vals = tuple(np.asarray(f(t), dtype=float) * np.ones_like(t) for f in (self.u, self.v, self.du, self.dv))
        if not all(np.all(np.isfinite(x)) for x in vals):
            raise EvaluationError("covariance factors are not finite on the requested nodes")
        return vals

    def __call__(self, s, t):
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        return self.u(np.minimum(s, t)) * self.v(np.maximum(s, t))

    def wronskian(self, t):
        """``v u' - u v'``, the local variance rate of the process."""
        u, v, du, dv = self.factors(t)
        return v * du - u * dv


@dataclass(frozen=True)
class GPModel:
    """Gaussian process on ``[a, b]`` with mean ``mean``, its derivative and a triangular covariance."""

    mean: Func
    dmean: Func
    cov: TriangularCovariance
    a: float = 0.0
    b: float = 1.0

    def __post_init__(self):
        if not self.a < self.b:
            raise ParameterError(f"need a < b, got [{self.a}, {self.b}]")
        m_a = float(np.asarray(self.mean(np.array([self.a])))[0])
        u_a = float(np.asarray(self.cov.u(np.array([self.a])))[0])
        if not np.isfinite(m_a):
            raise EvaluationError("mean is not finite at the left endpoint")
        if abs(u_a) <= ZERO_TOL and abs(m_a) > ZERO_TOL:
            raise HypothesisError(
                f"mean must vanish at a={self.a} when u(a)=0 (got m(a)={m_a:g})"
            )

    def mean_on(self, t):
        m = np.asarray(self.mean(np.asarray(t, dtype=float)), dtype=float) * np.ones(np.shape(t))
        if not np.all(np.isfinite(m)):
            raise EvaluationError("mean function is not finite on the requested nodes")
        return m

    def dmean_on(self, t):
        dm = np.asarray(self.dmean(np.asarray(t, dtype=float)), dtype=float) * np.ones(np.shape(t))
        if not np.all(np.isfinite(dm)):
            raise EvaluationError("mean derivative is not finite on the requested nodes")
        return dm


def _nodes(g):
    if isinstance(g, Grid):
        return g.nodes
    return np.asarray(g, dtype=float).ravel()


def covariance_matrix(c, g):
    """Covariance matrix ``Gamma(t_j, t_k)`` on the grid nodes (exactly symmetric)."""
    t = _nodes(g)
    lo = np.minimum.outer(t, t)
    hi = np.maximum.outer(t, t)
    K = np.asarray(c.u(lo), dtype=float) * np.asarray(c.v(hi), dtype=float)
    if not np.all(np.isfinite(K)):
        raise EvaluationError("covariance factors are not finite on the grid")
    return K


def jittered_cholesky(K, start=1e-12, attempts=6):
    """Lower Cholesky factor of ``K``, adding ``eps * I`` with ``eps`` growing tenfold on failure."""
    try:
        return linalg.cholesky(K, lower=True)
    except linalg.LinAlgError:
        pass
    eye = np.eye(K.shape[0])
    eps = start
    for _ in range(attempts):
        try:
            return linalg.cholesky(K + eps * eye, lower=True)
        except linalg.LinAlgError:
            eps *= 10
    raise SingularCovarianceError(
        f"covariance not factorizable after {attempts} jitter steps (last eps={eps / 10:g})"
    )


def sample_gaussian_paths(model, g, n, rng):
    """Draw ``n`` discretized paths of ``model`` on the grid.

    Cholesky factorization with escalating diagonal jitter; nodes where the
    process has zero variance (Brownian motion at 0) are set to the mean.
    Returns an ``(n, N)`` array.
    """
    if n < 0:
        raise ParameterError("sample size must be nonnegative")
    t = _nodes(g)
    if n == 0:
        return np.empty((0, t.size))
    K = covariance_matrix(model.cov, t)
    L = jittered_cholesky(K)
    z = rng.standard_normal((n, t.size))
    paths = model.mean_on(t)[None, :] + z @ L.T
    # nodes with zero variance are deterministic; undo the jitter there
    pinned = np.diag(K) <= ZERO_TOL
    paths[:, pinned] = model.mean_on(t[pinned])
    return paths


def ou_model(sigma, beta):
    """Ornstein-Uhlenbeck covariance ``sigma^2 exp(-beta |s - t|)`` in triangular form."""
    if not (sigma > 0 and beta > 0):
        raise ParameterError("sigma and beta must be positive")
    s2 = float(sigma) ** 2
    beta = float(beta)
    return TriangularCovariance(
        u=lambda t: s2 * np.exp(beta * np.asarray(t)),
        v=lambda t: np.exp(-beta * np.asarray(t)),
        du=lambda t: s2 * beta * np.exp(beta * np.asarray(t)),
        dv=lambda t: -beta * np.exp(-beta * np.asarray(t)),
    )


BROWNIAN = TriangularCovariance(
    u=lambda t: np.asarray(t, dtype=float) * 1.0,
    v=_const(1.0),
    du=_const(1.0),
    dv=_const(0.0),
)


def brownian_model(mean=None, dmean=None, b=1.0):
    """Brownian motion on ``[0, b]`` plus a deterministic trend (zero by default).

    The trend must vanish at 0, since the process starts there.
    """
    if mean is None:
        mean, dmean = _const(0.0), _const(0.0)
    elif dmean is None:
        raise ParameterError("the trend derivative must be supplied with the trend")
    return GPModel(mean=mean, dmean=dmean, cov=BROWNIAN, a=0.0, b=b)


def _model1_mean(i):
    p, q = 1.1**i, 1.1 ** (1 - i)

    def m(t):
        t = np.asarray(t, dtype=float)
        return 30.0 * (1 - t) ** p * t**q

    def dm(t):
        t = np.asarray(t, dtype=float)
        return 30.0 * (q * (1 - t) ** p * t ** (q - 1) - p * (1 - t) ** (p - 1) * t**q)

    return m, dm


def model1_population(i):
    """Benchmark Model 1, class ``i``: mean ``30 (1-t)^(1.1^i) t^(1.1^(1-i))``, OU covariance."""
    if i not in (0, 1):
        raise ParameterError("class index must be 0 or 1")
    m, dm = _model1_mean(i)
    return GPModel(mean=m, dmean=dm, cov=ou_model(0.5, 1 / 0.3), a=0.0, b=1.0)


def hat_function(t, shift=0.0):
    """``2 max(3 - 5|2(t - shift) - 1|, 0)``: a tent of height 6 centred at ``0.5 + shift``."""
    t = np.asarray(t, dtype=float) - shift
    return 2.0 * np.maximum(3.0 - 5.0 * np.abs(2.0 * t - 1.0), 0.0)


def model2_means(i, t):
    """The two tents mixed by Model 2 for class ``i``: ``(h_1, h_{i+2})`` on the nodes."""
    shift = 0.2 if i == 0 else -0.2
    return hat_function(t), hat_function(t, shift)


def model2_sample(i, g, n, rng, noise_sd=1.0, U=None):
    """Benchmark Model 2, class ``i``: ``U h_1 + (1 - U) h_{i+2} + white noise``.

    ``U`` is uniform on ``[0, 1]`` per curve unless given explicitly.
    """
    if i not in (0, 1):
        raise ParameterError("class index must be 0 or 1")
    t = _nodes(g)
    h1, hi = model2_means(i, t)
    if U is None:
        U = rng.uniform(0.0, 1.0, size=n)
    U = np.broadcast_to(np.asarray(U, dtype=float), (n,))
    eps = rng.standard_normal((n, t.size)) * noise_sd
    return U[:, None] * h1 + (1 - U)[:, None] * hi + eps
