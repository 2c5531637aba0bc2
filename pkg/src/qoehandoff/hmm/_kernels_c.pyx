# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled forward / forward-backward kernels.

Same contract as the pure-Python backend; typed inner loops over the
(frames x states) recursions.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log

cnp.import_array()

BACKEND = "cython"


def forward(cnp.ndarray[cnp.float64_t, ndim=2] frame_logprob,
            cnp.ndarray[cnp.float64_t, ndim=1] prior,
            cnp.ndarray[cnp.float64_t, ndim=2] tm):
    cdef Py_ssize_t T = frame_logprob.shape[0]
    cdef Py_ssize_t N = frame_logprob.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] filtered = np.empty((T, N))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] pred = prior.copy()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] nxt = np.empty(N)
    cdef double loglik = 0.0, m, c, a
    cdef Py_ssize_t t, i, j

    for t in range(T):
        m = frame_logprob[t, 0]
        for i in range(1, N):
            if frame_logprob[t, i] > m:
                m = frame_logprob[t, i]
        c = 0.0
        for i in range(N):
            a = pred[i] * exp(frame_logprob[t, i] - m)
            filtered[t, i] = a
            c += a
        for i in range(N):
            filtered[t, i] /= c
        loglik += log(c) + m
        for j in range(N):
            a = 0.0
            for i in range(N):
                a += filtered[t, i] * tm[i, j]
            nxt[j] = a
        for j in range(N):
            pred[j] = nxt[j]
    return filtered, loglik


def forward_backward(cnp.ndarray[cnp.float64_t, ndim=2] frame_logprob,
                     cnp.ndarray[cnp.float64_t, ndim=1] prior,
                     cnp.ndarray[cnp.float64_t, ndim=2] tm):
    cdef Py_ssize_t T = frame_logprob.shape[0]
    cdef Py_ssize_t N = frame_logprob.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] b = np.empty((T, N))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] alpha = np.empty((T, N))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] beta = np.empty((T, N))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] gamma = np.empty((T, N))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] xi_sum = np.zeros((N, N))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] scale = np.empty(T)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w = np.empty(N)
    cdef double loglik = 0.0, m, c, a
    cdef Py_ssize_t t, i, j

    for t in range(T):
        m = frame_logprob[t, 0]
        for i in range(1, N):
            if frame_logprob[t, i] > m:
                m = frame_logprob[t, i]
        for i in range(N):
            b[t, i] = exp(frame_logprob[t, i] - m)
        loglik += m

    c = 0.0
    for i in range(N):
        alpha[0, i] = prior[i] * b[0, i]
        c += alpha[0, i]
    scale[0] = c
    for i in range(N):
        alpha[0, i] /= c
    for t in range(1, T):
        c = 0.0
        for j in range(N):
            a = 0.0
            for i in range(N):
                a += alpha[t - 1, i] * tm[i, j]
            alpha[t, j] = a * b[t, j]
            c += alpha[t, j]
        scale[t] = c
        for j in range(N):
            alpha[t, j] /= c
    for t in range(T):
        loglik += log(scale[t])

    for i in range(N):
        beta[T - 1, i] = 1.0
    for t in range(T - 2, -1, -1):
        for j in range(N):
            w[j] = b[t + 1, j] * beta[t + 1, j]
        for i in range(N):
            a = 0.0
            for j in range(N):
                a += tm[i, j] * w[j]
            beta[t, i] = a / scale[t + 1]
        for i in range(N):
            for j in range(N):
                xi_sum[i, j] += alpha[t, i] * tm[i, j] * w[j] / scale[t + 1]

    for t in range(T):
        c = 0.0
        for i in range(N):
            gamma[t, i] = alpha[t, i] * beta[t, i]
            c += gamma[t, i]
        for i in range(N):
            gamma[t, i] /= c
    return gamma, xi_sum, loglik
