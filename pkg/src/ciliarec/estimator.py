"""Scikit-learn style wrapper around the mesh reconstruction pipeline."""

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .forward import SampledSignal
from .kernels import GeometricMeshSpec, default_params, geometric_partition
from .reconstruct import (
    build_mesh,
    density_from_G,
    g_from_signal,
    interpolation_error_bound,
    reconstruct_G,
)
from .special import hill_F

__all__ = ["DensityReconstructor"]


class DensityReconstructor(RegressorMixin, BaseEstimator):
    """Recover a channel density from a sampled current trace.

    fit(X, y) takes sample times X (n, 1) or (n,) and currents y; predict(X)
    evaluates the reconstructed piecewise-constant density at positions X in
    (0, L).
    """

    def __init__(self, beta=0.8, beta0=1.0, m=8, p=20, q=16, base_rule="uniform",
                 D=1.0, L=1.0, c0=1.0, J0=1.0, hill_n=2.0, hill_K=0.5):
        self.beta = beta
        self.beta0 = beta0
        self.m = m
        self.p = p
        self.q = q
        self.base_rule = base_rule
        self.D = D
        self.L = L
        self.c0 = c0
        self.J0 = J0
        self.hill_n = hill_n
        self.hill_K = hill_K

    def _build(self):
        pp = default_params(D=self.D, L=self.L, c0=self.c0, J0=self.J0,
                            n=self.hill_n, K_half=self.hill_K)
        spec = GeometricMeshSpec(beta=self.beta, beta0=self.beta0, m=self.m)
        return pp, spec

    def fit(self, X, y):
        X = check_array(X, ensure_2d=False)
        if X.ndim == 2:
            if X.shape[1] != 1:
                raise ValueError("X must be a single column of sample times")
            X = X[:, 0]
        y = check_array(y, ensure_2d=False)
        order = np.argsort(X)
        sig = SampledSignal(times=X[order], values=y[order])
        pp, spec = self._build()
        self.params_ = pp
        self.partition_ = geometric_partition(spec, pp)
        self.mesh_ = build_mesh(spec, pp, self.p, self.q, self.base_rule)
        g = g_from_signal(sig, self.partition_, spec, pp)
        self.G_ = reconstruct_G(g, self.mesh_, self.partition_, spec)
        Fc0 = pp.J0 * hill_F(pp.c0, pp.hill)
        offset = float(np.interp(self.partition_.L_m**2, sig.times, sig.values)) / Fc0
        self.density_ = density_from_G(self.mesh_, self.G_, offset)
        self.interp_bound_ = interpolation_error_bound(sig)
        return self

    def predict(self, X):
        check_is_fitted(self, "density_")
        X = check_array(X, ensure_2d=False)
        if X.ndim == 2:
            X = X[:, 0]
        d = self.density_
        idx = np.clip(np.searchsorted(d.X, X, side="right") - 1, 0, len(d.Y) - 1)
        out = d.Y[idx]
        # outside the resolved mesh range the estimate carries no information
        out = np.where((X < d.X[0]) | (X >= self.L), 0.0, out)
        return out
