"""Tridiagonal linear solves (Thomas algorithm)."""

from __future__ import annotations

import numpy as np


def thomas_solve(lower: np.ndarray, diag: np.ndarray, upper: np.ndarray,
                 rhs: np.ndarray) -> np.ndarray:
    """Solve T x = rhs for tridiagonal T by forward elimination and back substitution.

    lower has length n-1 (subdiagonal), diag length n, upper length n-1.
    No pivoting; raises ZeroDivisionError-like ValueError on a vanishing pivot,
    which for our symmetric positive or shifted systems signals a (near-)singular
    shift rather than a programming error.
    """
    n = diag.size
    cp = np.empty(n)
    dp = np.empty(n)
    piv = diag[0]
    if piv == 0.0:
        raise ValueError("zero pivot in tridiagonal solve")
    cp[0] = upper[0] / piv if n > 1 else 0.0
    dp[0] = rhs[0] / piv
    for i in range(1, n):
        piv = diag[i] - lower[i - 1] * cp[i - 1]
        if piv == 0.0:
            raise ValueError("zero pivot in tridiagonal solve")
        if i < n - 1:
            cp[i] = upper[i] / piv
        dp[i] = (rhs[i] - lower[i - 1] * dp[i - 1]) / piv
    x = np.empty(n)
    x[-1] = dp[-1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return x


def symmetric_tridiag_apply(diag: np.ndarray, off: np.ndarray,
                            x: np.ndarray) -> np.ndarray:
    """Matrix-vector product for a symmetric tridiagonal matrix."""
    y = diag * x
    y[:-1] += off * x[1:]
    y[1:] += off * x[:-1]
    return y
