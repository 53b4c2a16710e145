"""Chebyshev collocation utilities on the unit interval.

Differentiation matrices follow Weideman & Reddy's trigonometric
construction with the negative-sum trick, which keeps rounding errors
acceptable up to ~100 points.
"""

import numpy as np

__all__ = ["chebyshev_points", "diff_matrices", "clenshaw_curtis_weights"]


def chebyshev_points(n: int) -> np.ndarray:
    """Chebyshev-Gauss-Lobatto points mapped to [0, 1], ascending.

    Parameters
    ----------
    n : int
        Polynomial degree; returns n + 1 points.
    """
    if n < 1:
        raise ValueError("need at least degree 1")
    k = np.arange(n + 1)
    # sin form is symmetric to rounding, unlike cos(pi k / n)
    x = np.sin(np.pi * (n - 2 * k) / (2 * n))
    return (1.0 - x) / 2.0


def diff_matrices(n: int, order: int = 2) -> list[np.ndarray]:
    """First `order` differentiation matrices on the [0, 1] points.

    Row/column ordering matches :func:`chebyshev_points` (ascending in x).
    """
    if n < 1:
        raise ValueError("need at least degree 1")
    m = n + 1
    k = np.arange(m)
    th = k * np.pi / n
    x = np.sin(np.pi * (n - 2 * k) / (2 * n))
    T = np.tile(th / 2, (m, 1))
    dx = 2 * np.sin(T.T + T) * np.sin(T.T - T)
    dx[n // 2 + 1:, :] = -np.flipud(np.fliplr(dx[: (n + 1) // 2, :]))
    np.fill_diagonal(dx, 1.0)
    c = (-1.0) ** (k[:, None] + k[None, :])
    c[0, :] *= 2
    c[n, :] *= 2
    c[:, 0] /= 2
    c[:, n] /= 2
    z = 1.0 / dx
    np.fill_diagonal(z, 0.0)
    d = np.eye(m)
    out = []
    for ell in range(1, order + 1):
        d = ell * z * (c * np.tile(np.diag(d), (m, 1)).T - d)
        np.fill_diagonal(d, -d.sum(axis=1))
        # native x is descending on [-1,1]; the [0,1] map x -> (1-x)/2 flips
        # and halves, so d/dxi = (-2)^ell * D^(ell)
        out.append((-2.0) ** ell * d)
    return out


def clenshaw_curtis_weights(n: int) -> np.ndarray:
    """Quadrature weights for the [0, 1] Chebyshev points, same ordering."""
    if n < 1:
        raise ValueError("need at least degree 1")
    theta = np.pi * np.arange(n + 1) / n
    v = np.ones(n - 1)
    for k in range(1, n // 2 + 1):
        if 2 * k != n:
            v -= 2.0 * np.cos(2 * k * theta[1:n]) / (4 * k * k - 1)
        else:
            v -= np.cos(2 * k * theta[1:n]) / (4 * k * k - 1)
    w = np.empty(n + 1)
    w[0] = w[n] = 1.0 / (n * n - 1) if n % 2 == 0 else 1.0 / (n * n)
    w[1:n] = 2.0 * v / n
    return w / 2.0
