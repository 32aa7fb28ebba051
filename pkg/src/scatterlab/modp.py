"""Dense linear algebra over a prime field F_p on numpy integer arrays.

Everything F_q-linear in the package is expanded to F_p coordinates and
solved here, so this module only ever sees prime moduli.
"""

from __future__ import annotations

import numpy as np


def inverse_table(p: int) -> np.ndarray:
    inv = np.zeros(p, dtype=np.int64)
    for a in range(1, p):
        inv[a] = pow(a, -1, p)
    return inv


def rref(A, p: int):
    """Reduced row echelon form of ``A`` mod ``p``; returns (R, pivot_columns)."""
    R = np.array(A, dtype=np.int64) % p
    m, n = R.shape
    pivots = []
    r = 0
    for c in range(n):
        if r == m:
            break
        nz = np.nonzero(R[r:, c])[0]
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            R[[r, i]] = R[[i, r]]
        R[r] = (R[r] * pow(int(R[r, c]), -1, p)) % p
        f = R[:, c].copy()
        f[r] = 0
        R = (R - f[:, None] * R[r][None, :]) % p
        pivots.append(c)
        r += 1
    return R, pivots


def rank(A, p: int) -> int:
    return len(rref(A, p)[1])


def right_nullspace(A, p: int) -> np.ndarray:
    """Basis (as rows) of {x : A x = 0} over F_p."""
    A = np.asarray(A, dtype=np.int64)
    n = A.shape[1]
    R, pivots = rref(A, p)
    free = [c for c in range(n) if c not in pivots]
    basis = np.zeros((len(free), n), dtype=np.int64)
    for k, fcol in enumerate(free):
        basis[k, fcol] = 1
        for row, pc in enumerate(pivots):
            basis[k, pc] = (-R[row, fcol]) % p
    return basis


def left_nullspace(A, p: int) -> np.ndarray:
    """Basis (as rows) of {u : u A = 0} over F_p."""
    return right_nullspace(np.asarray(A, dtype=np.int64).T, p)


def inverse(A, p: int) -> np.ndarray:
    A = np.asarray(A, dtype=np.int64) % p
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("inverse needs a square matrix")
    R, pivots = rref(np.hstack([A, np.eye(n, dtype=np.int64)]), p)
    if pivots[:n] != list(range(n)):
        raise ValueError("matrix is singular")
    return R[:, n:]


def solve(A, b, p: int):
    """One solution x of A x = b mod p, or None when the system is inconsistent."""
    A = np.asarray(A, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64).reshape(-1, 1)
    m, n = A.shape
    R, pivots = rref(np.hstack([A, b]), p)
    if n in pivots:
        return None
    x = np.zeros(n, dtype=np.int64)
    for row, pc in enumerate(pivots):
        x[pc] = R[row, n]
    return x


def _small_dtype(p: int):
    """Narrowest signed type holding (p-1)^2 and its negation."""
    if (p - 1) ** 2 < 2**7:
        return np.int8
    if (p - 1) ** 2 < 2**15:
        return np.int16
    return np.int64


def batched_rank(mats, p: int) -> np.ndarray:
    """Ranks of a stack of matrices, shape (B, m, n), by simultaneous elimination."""
    A = (np.asarray(mats, dtype=np.int64) % p).astype(_small_dtype(p))
    if A.ndim != 3:
        raise ValueError("expected a (B, m, n) stack")
    B, m, n = A.shape
    rk = np.zeros(B, dtype=np.int64)
    rows = np.arange(m)
    inv = inverse_table(p).astype(A.dtype)
    for c in range(n):
        cand = (A[:, :, c] != 0) & (rows[None, :] >= rk[:, None])
        has = cand.any(axis=1)
        if not has.any():
            continue
        full = bool(has.all())
        idx = None if full else np.nonzero(has)[0]
        sub = A if full else A[idx]
        ar = np.arange(sub.shape[0])
        piv = cand.argmax(axis=1) if full else cand[idx].argmax(axis=1)
        r = rk if full else rk[idx]
        prow = sub[ar, piv].copy()
        sub[ar, piv] = sub[ar, r]
        prow = (prow * inv[prow[:, c]][:, None]) % p
        sub[ar, r] = prow
        fac = sub[:, :, c].copy()
        fac[ar, r] = 0
        # rows above the current rank already have zeros below their pivots
        fac[rows[None, :] < r[:, None]] = 0
        sub -= fac[:, :, None] * prow[:, None, :]
        sub %= p
        if full:
            rk += 1
        else:
            A[idx] = sub
            rk[idx] += 1
    return rk
