"""Cubic B-spline design matrices on [0, 1] via the Cox-de Boor recursion."""

from __future__ import annotations

import numpy as np

DEGREE = 3
N_INTERIOR_KNOTS = 20


def knot_vector(n_interior: int = N_INTERIOR_KNOTS, degree: int = DEGREE) -> np.ndarray:
    """Clamped knot vector with equally spaced interior knots on (0, 1)."""
    interior = np.arange(1, n_interior + 1) / (n_interior + 1)
    return np.concatenate([np.zeros(degree + 1), interior, np.ones(degree + 1)])


def n_basis(n_interior: int = N_INTERIOR_KNOTS, degree: int = DEGREE) -> int:
    return n_interior + degree + 1


def design_matrix(t: np.ndarray, knots: np.ndarray, degree: int = DEGREE) -> np.ndarray:
    """Basis matrix B with B[i, j] = B_j(t_i); rows sum to 1 on [0, 1]."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0) or np.any(t > 1.0):
        raise ValueError("evaluation points must lie in [0, 1]")
    q = knots.shape[0] - degree - 1
    out = np.zeros((t.shape[0], q))

    # zeroth order: indicator of the half-open knot span, closed at the right
    # boundary so t=1 lands in the last non-empty span
    span = np.searchsorted(knots, t, side="right") - 1
    span = np.clip(span, degree, q - 1)

    basis = np.zeros((t.shape[0], degree + 1))
    basis[:, 0] = 1.0
    for d in range(1, degree + 1):
        saved = np.zeros(t.shape[0])
        for r in range(d):
            left = knots[span - d + 1 + r]
            right = knots[span + 1 + r]
            denom = right - left
            term = np.where(denom > 0, basis[:, r] / np.where(denom > 0, denom, 1.0), 0.0)
            basis[:, r] = saved + (right - t) * term
            saved = (t - left) * term
        basis[:, d] = saved

    for offset in range(degree + 1):
        cols = span - degree + offset
        out[np.arange(t.shape[0]), cols] = basis[:, offset]
    return out


def second_difference_matrix(q: int) -> np.ndarray:
    """(q-2, q) second-order difference operator for the coefficient penalty."""
    d = np.zeros((q - 2, q))
    for i in range(q - 2):
        d[i, i : i + 3] = (1.0, -2.0, 1.0)
    return d
