import numpy as np


def _pair(truth, estimate):
    truth = np.asarray(truth, dtype=np.float64)
    estimate = np.asarray(estimate, dtype=np.float64)
    if truth.shape != estimate.shape:
        raise ValueError(f"shape mismatch: {truth.shape} vs {estimate.shape}")
    return truth, estimate


def mse(truth, estimate):
    """Mean squared pixel difference."""
    truth, estimate = _pair(truth, estimate)
    return float(np.mean((truth - estimate) ** 2))


def histogram(img, bins=256, range=(0.0, 255.0)):
    """Counts in ``bins`` equal-width bins over ``range``.

    Values outside the range land in the first or last bin, so the counts
    always add up to the number of pixels.
    """
    lo, hi = range
    if not lo < hi:
        raise ValueError("range must satisfy lo < hi")
    if bins < 1:
        raise ValueError("bins must be >= 1")
    x = np.asarray(img, dtype=np.float64).ravel()
    idx = np.floor((x - lo) / (hi - lo) * bins).astype(np.int64)
    idx = np.clip(idx, 0, bins - 1)
    return np.bincount(idx, minlength=bins)


def level_shift(truth, estimate, level, tol=0.5):
    """Mean of ``estimate - truth`` over pixels whose true value is within ``tol`` of ``level``.

    Positive values mean that intensity level drifted upward.
    """
    truth, estimate = _pair(truth, estimate)
    mask = np.abs(truth - level) <= tol
    if not mask.any():
        raise ValueError(f"no truth pixels within {tol} of level {level}")
    return float(np.mean(estimate[mask] - truth[mask]))
