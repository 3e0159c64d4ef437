# cython: boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled Sinkhorn iteration kernels.

Same contract as ``_purepy``: each kernel returns
``(plan, iterations, residual, converged, underflow)``.  All reductions are
sequential loops in a fixed order, so results are reproducible run to run.
"""

import numpy as np

from libc.math cimport INFINITY, exp, fabs, isfinite, log


BACKEND = "cython"


def plain_kernel(double[:, ::1] K, double[::1] mu, double[::1] nu,
                 double tol, long max_iter):
    cdef Py_ssize_t C = K.shape[0]
    cdef Py_ssize_t m = K.shape[1]
    a_arr = np.ones(C)
    b_arr = np.ones(m)
    plan_arr = np.full((C, m), np.nan)
    colsum_arr = np.empty(m)
    cdef double[::1] a = a_arr
    cdef double[::1] b = b_arr
    cdef double[:, ::1] plan = plan_arr
    cdef double[::1] colsum = colsum_arr
    cdef Py_ssize_t i, j
    cdef long iterations = 0
    cdef double s, v, rowsum, err
    cdef double residual = INFINITY
    cdef bint converged = False
    cdef bint underflow = False

    while iterations < max_iter:
        iterations += 1
        for i in range(C):
            s = 0.0
            for j in range(m):
                s += K[i, j] * b[j]
            if s == 0.0:
                if mu[i] != 0.0:
                    underflow = True
                    break
                a[i] = 0.0
            else:
                a[i] = mu[i] / s
        if underflow:
            break
        for j in range(m):
            colsum[j] = 0.0
        for i in range(C):
            for j in range(m):
                colsum[j] += K[i, j] * a[i]
        for j in range(m):
            s = colsum[j]
            if s == 0.0:
                if nu[j] != 0.0:
                    underflow = True
                    break
                b[j] = 0.0
            else:
                b[j] = nu[j] / s
        if underflow:
            break
        residual = 0.0
        for j in range(m):
            colsum[j] = 0.0
        for i in range(C):
            rowsum = 0.0
            for j in range(m):
                v = a[i] * K[i, j] * b[j]
                plan[i, j] = v
                rowsum += v
                colsum[j] += v
            err = fabs(rowsum - mu[i])
            if err > residual:
                residual = err
        for j in range(m):
            err = fabs(colsum[j] - nu[j])
            if err > residual:
                residual = err
        if not isfinite(residual):
            underflow = True
            break
        if residual <= tol:
            converged = True
            break
    return plan_arr, iterations, residual, converged, underflow


def log_kernel(double[:, ::1] logK, double[::1] log_mu, double[::1] log_nu,
               double[::1] mu, double[::1] nu, double tol, long max_iter):
    cdef Py_ssize_t C = logK.shape[0]
    cdef Py_ssize_t m = logK.shape[1]
    f_arr = np.zeros(C)
    g_arr = np.zeros(m)
    plan_arr = np.full((C, m), np.nan)
    colsum_arr = np.empty(m)
    colmax_arr = np.empty(m)
    cdef double[::1] f = f_arr
    cdef double[::1] g = g_arr
    cdef double[:, ::1] plan = plan_arr
    cdef double[::1] colsum = colsum_arr
    cdef double[::1] colmax = colmax_arr
    cdef Py_ssize_t i, j
    cdef long iterations = 0
    cdef double mx, s, v, rowsum, err
    cdef double residual = INFINITY
    cdef bint converged = False
    cdef bint underflow = False

    while iterations < max_iter:
        iterations += 1
        # f_i = log_mu_i - LSE_j(logK_ij + g_j)
        for i in range(C):
            mx = -INFINITY
            for j in range(m):
                v = logK[i, j] + g[j]
                if v > mx:
                    mx = v
            if mx == -INFINITY:
                # unreachable for valid marginals; yields inf/nan, which the
                # residual check reports as underflow (same as the numpy twin)
                f[i] = log_mu[i] - mx
            else:
                s = 0.0
                for j in range(m):
                    s += exp(logK[i, j] + g[j] - mx)
                f[i] = log_mu[i] - (mx + log(s))
        # g_j = log_nu_j - LSE_i(logK_ij + f_i)
        for j in range(m):
            colmax[j] = -INFINITY
        for i in range(C):
            for j in range(m):
                v = logK[i, j] + f[i]
                if v > colmax[j]:
                    colmax[j] = v
        for j in range(m):
            colsum[j] = 0.0
        for i in range(C):
            for j in range(m):
                if colmax[j] > -INFINITY:
                    colsum[j] += exp(logK[i, j] + f[i] - colmax[j])
        for j in range(m):
            if colmax[j] == -INFINITY:
                g[j] = log_nu[j] - colmax[j]
            else:
                g[j] = log_nu[j] - (colmax[j] + log(colsum[j]))
        # plan and marginal residual
        residual = 0.0
        for j in range(m):
            colsum[j] = 0.0
        for i in range(C):
            rowsum = 0.0
            for j in range(m):
                v = exp(f[i] + logK[i, j] + g[j])
                plan[i, j] = v
                rowsum += v
                colsum[j] += v
            err = fabs(rowsum - mu[i])
            if err > residual:
                residual = err
        for j in range(m):
            err = fabs(colsum[j] - nu[j])
            if err > residual:
                residual = err
        if not isfinite(residual):
            underflow = True
            break
        if residual <= tol:
            converged = True
            break
    return plan_arr, iterations, residual, converged, underflow
