"""Shared linear-algebra helpers: guarded pseudo-inverses and SPD solves."""

import warnings

import numpy as np

# relative singular-value cutoff used by every pseudo-inverse in the package
PINV_CUTOFF = 1e-12
# condition number above which SPD solves emit a warning
COND_WARN = 1e12


class IllConditionedWarning(UserWarning):
    """Emitted when a solve touches a matrix with condition number > 1e12."""


def sym(a):
    """Symmetrize a square matrix (cheap guard against roundoff drift)."""
    return 0.5 * (a + a.T)


def pinv(a):
    """Pseudo-inverse via SVD with a relative cutoff of 1e-12 * sigma_1."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros(a.T.shape)
    keep = s > PINV_CUTOFF * s[0]
    return (vt[keep].T / s[keep]) @ u[:, keep].T


def solve_spd(a, b):
    """Solve a @ x = b for symmetric positive definite a.

    Uses Cholesky; falls back to an SVD pseudo-solve when the
    factorization fails.  Conditioning beyond 1e12 produces a warning,
    never an error.
    """
    a = sym(np.asarray(a, dtype=float))
    b = np.asarray(b, dtype=float)
    cond = _spd_cond(a)
    if cond > COND_WARN:
        warnings.warn(
            f"solving system with condition number {cond:.3e}",
            IllConditionedWarning,
            stacklevel=2,
        )
    try:
        c = np.linalg.cholesky(a)
        y = np.linalg.solve(c, b if b.ndim > 0 else b[None])
        return np.linalg.solve(c.T, y)
    except np.linalg.LinAlgError:
        return pinv(a) @ b


def inv_spd(a):
    """Inverse of a symmetric positive definite matrix (Cholesky-backed)."""
    a = np.asarray(a, dtype=float)
    return sym(solve_spd(a, np.eye(a.shape[0])))


def _spd_cond(a):
    w = np.linalg.eigvalsh(sym(a))
    lo = w.min()
    hi = w.max()
    if hi <= 0:
        return np.inf
    return np.inf if lo <= 0 else hi / lo


def min_eig(a):
    """Smallest eigenvalue of a symmetric matrix."""
    return float(np.linalg.eigvalsh(sym(np.asarray(a, dtype=float))).min())


def dedupe_rows(x, y=None):
    """Collapse byte-identical rows of x; y values of duplicates are averaged.

    Returns (x_unique, y_avg) preserving first-appearance order; y_avg is
    None when y is None.
    """
    x = np.ascontiguousarray(np.asarray(x, dtype=float))
    seen = {}
    order = []
    for i in range(x.shape[0]):
        key = x[i].tobytes()
        if key not in seen:
            seen[key] = []
            order.append(key)
        seen[key].append(i)
    idx_groups = [seen[k] for k in order]
    xu = np.stack([x[g[0]] for g in idx_groups])
    if y is None:
        return xu, None
    y = np.asarray(y, dtype=float)
    yu = np.array([y[g].mean(axis=0) for g in idx_groups])
    return xu, yu
