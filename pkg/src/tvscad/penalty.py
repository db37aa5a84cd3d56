"""SCAD penalty, its derivative and the SATV edge weight.

All functions accept scalars or numpy arrays and broadcast elementwise.
Arguments are gradient magnitudes, so negative values are a domain error.
"""

from dataclasses import dataclass

import numpy as np

DEFAULT_A = 3.7


@dataclass(frozen=True)
class ScadParams:
    """Regularization strength ``lam`` and shape parameter ``a`` (a > 2)."""

    lam: float
    a: float = DEFAULT_A

    def __post_init__(self):
        if not (np.isfinite(self.lam) and self.lam > 0):
            raise ValueError(f"lam must be positive and finite, got {self.lam!r}")
        # a > 2 keeps the middle branch of x + p'(x) strictly increasing
        if not (np.isfinite(self.a) and self.a > 2):
            raise ValueError(f"a must be > 2, got {self.a!r}")


@dataclass(frozen=True)
class SatvParams:
    lam: float
    e: float = 10.0

    def __post_init__(self):
        if not (np.isfinite(self.lam) and self.lam > 0):
            raise ValueError(f"lam must be positive and finite, got {self.lam!r}")
        if not (np.isfinite(self.e) and self.e > 0):
            raise ValueError(f"e must be positive and finite, got {self.e!r}")


def _nonnegative(x, name):
    x = np.asarray(x, dtype=float)
    if np.any(np.isnan(x)) or np.any(x < 0):
        raise ValueError(f"{name} must be nonnegative")
    return x


def _out(values):
    return values.item() if values.ndim == 0 else values


def scad_derivative(theta, p: ScadParams):
    """Derivative of the SCAD penalty for ``theta >= 0``.

    Equal to ``lam`` on ``[0, lam]``, decreasing linearly to zero on
    ``(lam, a*lam]`` and identically zero beyond.
    """
    theta = _nonnegative(theta, "theta")
    lam, a = p.lam, p.a
    tail = np.maximum(a * lam - theta, 0.0) / (a - 1.0)
    return _out(np.where(theta <= lam, lam, tail))


def scad_value(theta, p: ScadParams):
    """SCAD penalty value, the antiderivative of :func:`scad_derivative` with p(0) = 0.

    Linear (``lam * theta``) up to ``lam``, quadratic up to ``a * lam`` and
    constant ``(a + 1) * lam**2 / 2`` afterwards.
    """
    theta = _nonnegative(theta, "theta")
    lam, a = p.lam, p.a
    linear = lam * theta
    quadratic = (2.0 * a * lam * theta - theta**2 - lam**2) / (2.0 * (a - 1.0))
    plateau = (a + 1.0) * lam**2 / 2.0
    out = np.where(theta <= lam, linear, np.where(theta <= a * lam, quadratic, plateau))
    return _out(out)


def stationarity_lhs(x, p: ScadParams):
    """``x + p'(x)`` written out branch by branch.

    This is the left-hand side of the stationarity equation for the
    difference of a two-pixel minimizer. It is strictly increasing on
    ``x > 0`` with infimum ``lam``.
    """
    x = _nonnegative(x, "x")
    lam, a = p.lam, p.a
    middle = a * lam / (a - 1.0) + (1.0 - 1.0 / (a - 1.0)) * x
    out = np.where(x < lam, lam + x, np.where(x <= a * lam, middle, x))
    return _out(out)


def satv_weight(gx, gy, e):
    """Spatially adaptive TV weight ``1/(|gx| + e) + 1/(|gy| + e)``.

    Magnitudes are used so the weight stays positive; it is bounded by ``2/e``.
    """
    if not (np.isfinite(e) and e > 0):
        raise ValueError(f"e must be positive and finite, got {e!r}")
    gx = np.asarray(gx, dtype=float)
    gy = np.asarray(gy, dtype=float)
    return _out(1.0 / (np.abs(gx) + e) + 1.0 / (np.abs(gy) + e))
