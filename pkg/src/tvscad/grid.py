"""Image container helpers and discrete differential operators.

Images are plain 2-D ``float64`` numpy arrays indexed ``[row, col]``.
Gradients use forward differences with a homogeneous Neumann boundary
(the difference across the last column/row is zero); :func:`divergence`
is the exact negative adjoint of :func:`gradient`.
"""

from typing import NamedTuple

import numpy as np

DEFAULT_BETA = 1e-3


def as_image(data, name="image"):
    """Validate and return ``data`` as a finite 2-D float64 array (copying only if needed)."""
    img = np.asarray(data, dtype=np.float64)
    if img.ndim != 2 or img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError(f"{name} must be a non-empty 2-D array, got shape {img.shape}")
    if not np.all(np.isfinite(img)):
        raise ValueError(f"{name} contains non-finite values")
    return img


class GradientField(NamedTuple):
    gx: np.ndarray
    gy: np.ndarray
    beta: float = 0.0


def gradient(u, beta=0.0):
    """Forward differences ``gx = u[i, j+1] - u[i, j]``, ``gy = u[i+1, j] - u[i, j]``."""
    u = np.asarray(u, dtype=np.float64)
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    gx = np.zeros_like(u)
    gy = np.zeros_like(u)
    gx[:, :-1] = u[:, 1:] - u[:, :-1]
    gy[:-1, :] = u[1:, :] - u[:-1, :]
    return GradientField(gx, gy, float(beta))


def divergence(px, py):
    """Backward-difference divergence, satisfying ``<grad u, p> = -<u, div p>``.

    Only ``px[:, :-1]`` and ``py[:-1, :]`` contribute, mirroring the zero
    boundary differences produced by :func:`gradient`.
    """
    px = np.asarray(px, dtype=np.float64)
    py = np.asarray(py, dtype=np.float64)
    if px.shape != py.shape or px.ndim != 2:
        raise ValueError(f"field shapes differ or are not 2-D: {px.shape} vs {py.shape}")
    d = np.zeros_like(px)
    d[:, :-1] += px[:, :-1]
    d[:, 1:] -= px[:, :-1]
    d[:-1, :] += py[:-1, :]
    d[1:, :] -= py[:-1, :]
    return d


def smoothed_magnitude(g: GradientField):
    """Per-pixel ``sqrt(gx**2 + gy**2 + beta**2)``."""
    return np.sqrt(g.gx**2 + g.gy**2 + g.beta**2)


def total_variation(u):
    """Anisotropic total variation: sum of absolute forward differences."""
    g = gradient(u)
    return float(np.abs(g.gx).sum() + np.abs(g.gy).sum())
