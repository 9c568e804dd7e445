# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Spectral functionals of block-diagonal Hermitian matrices.

For y = ⊕_k y_k (row-major blocks in one flat buffer) and block weights w_k,
computes a scalar F(y) and the matrix G with dF = Σ_k w_k Tr(G_k dy_k).
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport log, pow, fmax
from libc.stdlib cimport malloc, free
from scipy.linalg.cython_lapack cimport zheev

cnp.import_array()

cdef double EIG_FLOOR = 1e-14


cdef int _eigh(double complex *a, int n, double *w, double complex *work, int lwork, double *rwork) noexcept nogil:
    cdef char jobz = b'V'
    cdef char uplo = b'L'
    cdef int info = 0
    zheev(&jobz, &uplo, &n, a, &n, w, work, &lwork, rwork, &info)
    return info


def block_spectral(const double complex[::1] y, const long[::1] offsets, const long[::1] sizes,
                   const double[::1] weights, int mode, double p=1.0):
    """Return (value, gradient) for mode 0 (entropy), 1 (τ(y^p)) or 2 (largest eigenvalue)."""
    cdef Py_ssize_t nb = sizes.shape[0]
    cdef Py_ssize_t total = y.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] grad_arr = np.zeros(total, dtype=np.complex128)
    cdef double complex[::1] grad = grad_arr
    cdef Py_ssize_t k, i, r, c
    cdef int n, nmax = 1, info
    cdef long off
    cdef double value = 0.0, mu, wk, fval, best = -1e308
    cdef Py_ssize_t best_block = -1
    cdef double complex acc

    for k in range(nb):
        if sizes[k] > nmax:
            nmax = <int>sizes[k]
    cdef int lwork = 4 * nmax
    cdef double complex *a = <double complex *> malloc(nmax * nmax * sizeof(double complex))
    cdef double complex *work = <double complex *> malloc(lwork * sizeof(double complex))
    cdef double complex *best_vec = <double complex *> malloc(nmax * sizeof(double complex))
    cdef double *rwork = <double *> malloc((3 * nmax) * sizeof(double))
    cdef double *w = <double *> malloc(nmax * sizeof(double))
    cdef double *fw = <double *> malloc(nmax * sizeof(double))
    if a == NULL or work == NULL or rwork == NULL or w == NULL or fw == NULL or best_vec == NULL:
        free(a); free(work); free(rwork); free(w); free(fw); free(best_vec)
        raise MemoryError()

    try:
        with nogil:
            for k in range(nb):
                n = <int>sizes[k]
                off = offsets[k]
                wk = weights[k]
                # the row-major buffer read column-major is conj(y_k); eigenvectors come back conjugated
                for i in range(n * n):
                    a[i] = y[off + i]
                if n == 1:
                    w[0] = a[0].real
                    a[0] = 1.0
                    info = 0
                else:
                    info = _eigh(a, n, w, work, lwork, rwork)
                if info != 0:
                    break
                if mode == 2:
                    if w[n - 1] > best:
                        best = w[n - 1]
                        best_block = k
                        for r in range(n):
                            best_vec[r] = a[(n - 1) * n + r]
                    continue
                for i in range(n):
                    mu = fmax(w[i], 0.0)
                    if mode == 0:
                        if mu > 0.0:
                            value -= wk * mu * log(mu)
                        fw[i] = -(log(fmax(mu, EIG_FLOOR)) + 1.0)
                    else:
                        value += wk * pow(mu, p)
                        fw[i] = p * pow(mu, p - 1.0) if mu > 0.0 else (p if p == 1.0 else 0.0)
                # G[r, c] = Σ_i f_i Z[c, i] conj(Z[r, i]) with Z the returned (conjugated) eigenvectors
                for r in range(n):
                    for c in range(r, n):
                        acc = 0.0
                        for i in range(n):
                            acc = acc + fw[i] * a[i * n + c] * a[i * n + r].conjugate()
                        grad[off + r * n + c] = acc
                        if c != r:
                            grad[off + c * n + r] = acc.conjugate()
        if info != 0:
            raise np.linalg.LinAlgError(f"zheev failed with info={info}")
        if mode == 2:
            n = <int>sizes[best_block]
            off = offsets[best_block]
            wk = weights[best_block]
            for r in range(n):
                for c in range(n):
                    grad[off + r * n + c] = best_vec[c] * best_vec[r].conjugate() / wk
            value = best
    finally:
        free(a); free(work); free(rwork); free(w); free(fw); free(best_vec)
    return value, grad_arr
