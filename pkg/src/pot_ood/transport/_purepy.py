"""NumPy reference implementation of the Sinkhorn iteration kernels.

Both kernels share a contract: run matrix-scaling iterations until the
worst marginal violation of the current plan drops to ``tol`` or the
iteration budget runs out, and return

    (plan, iterations, residual, converged, underflow)

where ``underflow`` reports a mid-solve numerical breakdown (a scaling
denominator hit exact zero against positive target mass, or the residual
stopped being finite).  The caller decides whether that is fatal.
"""

from __future__ import annotations

import numpy as np
from scipy.special import logsumexp

BACKEND = "numpy"


def plain_kernel(K, mu, nu, tol, max_iter):
    """Sinkhorn in the linear domain: plan = diag(a) @ K @ diag(b)."""
    C, m = K.shape
    b = np.ones(m)
    plan = np.full((C, m), np.nan)
    iterations = 0
    residual = np.inf
    converged = False
    underflow = False
    while iterations < max_iter:
        iterations += 1
        Kb = K @ b
        if np.any((Kb == 0.0) & (mu > 0.0)):
            underflow = True
            break
        a = np.divide(mu, Kb, out=np.zeros_like(mu), where=Kb != 0.0)
        Ka = K.T @ a
        if np.any((Ka == 0.0) & (nu > 0.0)):
            underflow = True
            break
        b = np.divide(nu, Ka, out=np.zeros_like(nu), where=Ka != 0.0)
        plan = (a[:, None] * K) * b[None, :]
        row_err = np.abs(plan.sum(axis=1) - mu).max()
        col_err = np.abs(plan.sum(axis=0) - nu).max()
        residual = max(row_err, col_err)
        if not np.isfinite(residual):
            underflow = True
            break
        if residual <= tol:
            converged = True
            break
    return plan, iterations, residual, converged, underflow


def log_kernel(logK, log_mu, log_nu, mu, nu, tol, max_iter):
    """Sinkhorn in the log domain: plan = exp(f + logK + g).

    The dual potentials f, g absorb the scaling vectors, so entries of K
    that would underflow to zero in the linear domain stay representable.
    """
    C, m = logK.shape
    f = np.zeros(C)
    g = np.zeros(m)
    plan = np.full((C, m), np.nan)
    iterations = 0
    residual = np.inf
    converged = False
    underflow = False
    while iterations < max_iter:
        iterations += 1
        f = log_mu - logsumexp(logK + g[None, :], axis=1)
        g = log_nu - logsumexp(logK + f[:, None], axis=0)
        plan = np.exp(f[:, None] + logK + g[None, :])
        row_err = np.abs(plan.sum(axis=1) - mu).max()
        col_err = np.abs(plan.sum(axis=0) - nu).max()
        residual = max(row_err, col_err)
        if not np.isfinite(residual):
            underflow = True
            break
        if residual <= tol:
            converged = True
            break
    return plan, iterations, residual, converged, underflow
