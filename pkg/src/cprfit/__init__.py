"""Chest-compression frequency and depth from wrist accelerometer data.

A second-derivative sine model is fitted to 3 s windows of
gravity-compensated acceleration magnitude with an evolutionary optimizer
that keeps part of its population from one window to the next.
"""

from .errors import (
    CprFitError,
    EmptyReportError,
    EmptyWindowError,
    InsufficientParentsError,
    InvalidSampleError,
    NoPeakError,
    RateMismatchError,
)
from .evaluation import AlignedPrediction, CompressionEvent, ErrorReport, align, error_report
from .evo import EvoConfig, FitterState, SineFitter, fit_window, init_population
from .hyperopt import HyperVector, MetaConfig, de_optimize, meta_cost
from .model import CprEstimate, SineParams, model_accel, rmse_loss, to_estimate
from .signal import ImuSample, StreamConfig, Window, total_acceleration, windows
from .spectral import SpectralEstimate, fft_ccf
from .synth import SynthSpec, random_corpus, synthesize, synthesize_recording

__version__ = "0.1.0"
