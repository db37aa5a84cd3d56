"""Variational denoising of blocky images: TV, spatially adaptive TV and SCAD."""

from .estimators import SureConfig, estimate_sigma, monte_carlo_sure, select_lambda_sure
from .grid import as_image, divergence, gradient, smoothed_magnitude
from .imageio import SweepRecord, read_pgm, write_csv, write_pgm
from .metrics import histogram, level_shift, mse
from .penalty import SatvParams, ScadParams, satv_weight, scad_derivative, scad_value, stationarity_lhs
from .solvers import (DivergenceError, SolverConfig, objective, satv_denoise, scad_denoise, tv_denoise,
                      weighted_tv_denoise)
from .synth import PatternSpec, add_gaussian_noise, generate, make_scenario
from .two_pixel import TwoPixelSolution, two_pixel_brute_force, two_pixel_scad, two_pixel_tv

__version__ = "0.1.0"
