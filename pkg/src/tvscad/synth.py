"""Synthetic piecewise-constant test images and seeded Gaussian noise."""

from dataclasses import dataclass, field
from typing import List

import numpy as np

KINDS = ("nested_squares", "nested_squares_thick", "rotated_diamonds")

_DEFAULTS = {
    "nested_squares": dict(band_width=16, levels=[0.0, 255.0]),
    "nested_squares_thick": dict(band_width=32, levels=[0.0, 255.0]),
    "rotated_diamonds": dict(band_width=16, levels=[0.0, 85.0, 170.0, 255.0]),
}


@dataclass(frozen=True)
class PatternSpec:
    kind: str = "nested_squares"
    size: int = 256
    levels: List[float] = field(default_factory=lambda: [0.0, 255.0])
    band_width: int = 16

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown pattern {self.kind!r}; expected one of {KINDS}")
        if not self.levels:
            raise ValueError("levels must be nonempty")
        if any(not 0 <= v <= 255 for v in self.levels):
            raise ValueError("levels must lie in [0, 255]")
        if self.band_width < 1 or self.size < 1:
            raise ValueError("size and band_width must be positive")
        if self.size < 2 * self.band_width * len(self.levels):
            raise ValueError(
                f"size {self.size} too small for {len(self.levels)} levels of width {self.band_width}")

    @classmethod
    def default(cls, kind, size=256, levels=None, band_width=None):
        """Default geometry for ``kind``; non-None arguments override it."""
        if kind not in _DEFAULTS:
            raise ValueError(f"unknown pattern {kind!r}; expected one of {KINDS}")
        d = _DEFAULTS[kind]
        return cls(kind=kind, size=size,
                   levels=list(d["levels"] if levels is None else levels),
                   band_width=d["band_width"] if band_width is None else band_width)


def generate(spec: PatternSpec):
    """Render concentric bands; band ``i`` takes ``levels[i % len(levels)]``.

    Squares count bands by Chebyshev distance to the border, diamonds by
    L1 distance from the image centre, so both are exactly piecewise constant.
    """
    n = spec.size
    i, j = np.indices((n, n))
    if spec.kind == "rotated_diamonds":
        c = (n - 1) / 2.0
        dist = np.floor(np.abs(i - c) + np.abs(j - c)).astype(int)
    else:
        dist = np.minimum(np.minimum(i, j), np.minimum(n - 1 - i, n - 1 - j))
    band = dist // spec.band_width
    levels = np.asarray(spec.levels, dtype=np.float64)
    return levels[band % levels.size]


def add_gaussian_noise(img, sigma, seed):
    """Return ``img`` plus i.i.d. N(0, sigma**2) noise; the result is not clipped."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    img = np.asarray(img, dtype=np.float64)
    rng = np.random.default_rng(seed)
    return img + rng.normal(0.0, sigma, size=img.shape)


def make_scenario(kind="nested_squares_thick", sigma=20.0, seed=0, size=256):
    """Bundled test case: ``(truth, noisy)`` for a default pattern and noise level."""
    truth = generate(PatternSpec.default(kind, size))
    return truth, add_gaussian_noise(truth, sigma, seed)
