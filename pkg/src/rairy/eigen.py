"""Hermitian eigenvalues by Householder tridiagonalization followed by
implicit-shift QL on the real symmetric tridiagonal."""
from __future__ import annotations

import numpy as np
from numba import njit

__all__ = ["hermitian_eigenvalues", "tridiagonalize", "tridiagonal_eigenvalues",
           "NonHermitianError"]


class NonHermitianError(ValueError):
    pass


@njit(cache=True)
def _tridiag_kernel(A):
    """In-place reduction of a Hermitian matrix.  ``A`` holds conj(H) so
    that the lower triangle of H is read along contiguous rows.
    Returns the diagonal and the moduli of the sub-diagonal."""
    n = A.shape[0]
    d = np.empty(n)
    e = np.zeros(max(n - 1, 0))
    v = np.empty(n, dtype=np.complex128)
    p = np.empty(n, dtype=np.complex128)
    for k in range(n - 2):
        m = n - k - 1
        norm2 = 0.0
        for i in range(m):
            z = A[k, k + 1 + i]
            norm2 += z.real * z.real + z.imag * z.imag
        xnorm = np.sqrt(norm2)
        x0 = A[k, k + 1]
        if xnorm == 0.0:
            e[k] = 0.0
            continue
        ax0 = abs(x0)
        ph = x0 / ax0 if ax0 > 0 else 1.0 + 0j
        alpha = -ph * xnorm
        e[k] = xnorm
        for i in range(m):
            v[i] = A[k, k + 1 + i]
        v[0] -= alpha
        vn = 0.0
        for i in range(m):
            vn += v[i].real * v[i].real + v[i].imag * v[i].imag
        vn = np.sqrt(vn)
        for i in range(m):
            v[i] /= vn
        # p = A22 v from the lower triangle
        for i in range(m):
            p[i] = 0.0
        for j in range(m):
            vj = v[j]
            aj = A[k + 1 + j, k + 1 + j].real
            p[j] += aj * vj
            for i in range(j + 1, m):
                aij = A[k + 1 + j, k + 1 + i]
                p[i] += aij * vj
                p[j] += np.conj(aij) * v[i]
        K = 0.0
        for i in range(m):
            K += (np.conj(v[i]) * p[i]).real
        for i in range(m):
            p[i] -= K * v[i]
        # A22 <- A22 - 2 (v w* + w v*) on the lower triangle
        for j in range(m):
            cvj = np.conj(v[j])
            cwj = np.conj(p[j])
            for i in range(j, m):
                A[k + 1 + j, k + 1 + i] -= 2.0 * (v[i] * cwj + p[i] * cvj)
    for k in range(n):
        d[k] = A[k, k].real
    if n >= 2:
        e[n - 2] = abs(A[n - 2, n - 1])
    return d, e


@njit(cache=True)
def _tql(d, e):
    """Implicit QL with Wilkinson-type shifts (eigenvalues only)."""
    n = d.shape[0]
    d = d.copy()
    f = np.zeros(n)
    f[: n - 1] = e
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(f[m]) <= 2.2e-16 * dd:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > 60:
                raise RuntimeError("QL iteration did not converge")
            g = (d[l + 1] - d[l]) / (2.0 * f[l])
            r = np.hypot(g, 1.0)
            g = d[m] - d[l] + f[l] / (g + (r if g >= 0 else -r))
            s = 1.0
            c = 1.0
            p = 0.0
            i = m - 1
            underflow = False
            while i >= l:
                ff = s * f[i]
                b = c * f[i]
                r = np.hypot(ff, g)
                f[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    f[m] = 0.0
                    underflow = True
                    break
                s = ff / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                i -= 1
            if underflow:
                continue
            d[l] -= p
            f[l] = g
            f[m] = 0.0
    return np.sort(d)


def tridiagonalize(H: np.ndarray):
    """Diagonal and (nonnegative) sub-diagonal of a unitarily similar real
    symmetric tridiagonal matrix."""
    A = np.ascontiguousarray(np.conj(H), dtype=np.complex128)
    return _tridiag_kernel(A)


def tridiagonal_eigenvalues(d, e) -> np.ndarray:
    d = np.ascontiguousarray(d, dtype=float)
    e = np.ascontiguousarray(e, dtype=float)
    if d.size == 0:
        return d.copy()
    return _tql(d, e)


def hermitian_eigenvalues(H, tol: float = 1e-12) -> np.ndarray:
    """All eigenvalues of a Hermitian matrix, ascending."""
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise NonHermitianError("matrix must be square")
    if H.size and np.max(np.abs(H - H.conj().T)) > tol * max(1.0, np.max(np.abs(H))):
        raise NonHermitianError("matrix is not Hermitian within tolerance")
    return tridiagonal_eigenvalues(*tridiagonalize(H))
