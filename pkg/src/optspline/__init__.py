"""Least-squares design of compact-support interpolation kernels.

The package is split by concern:

``seqalg``     two-sided sequences, convolution and stable inversion
``kernels``    B-splines, compact kernels and their interpolating forms
``designer``   the Toeplitz design of optimised kernels
``resample``   1-D interpolation and image enlargement
``metrics``    SNR/PSNR and the enlargement experiment
``cli``        the ``optspline`` command
"""
__version__ = "0.1.0"

from ._backend import BACKEND
from .designer import (DesignProblem, DesignResult, FilterTarget, IdealLowpass, SignalTarget,
                       check_stationarity, default_rho_d, design, design_kernel, error_functional)
from .errors import *  # noqa: F401,F403
from .kernels import (CompactKernel, SampledFunction, bspline_eval, bspline_kernel, cardinal_spline,
                      hat_transform, kernel_eval)
from .metrics import ExperimentConfig, experiment_report, hat_snr, psnr, snr
from .resample import (ImageBuffer, antialias_downsample, baseline_kernels, enlarge_image,
                       interpolate_1d, prefilter)
from .seqalg import (DiscreteSequence, ProperSequence, autocorrelation, certify_proper, convolve,
                     hermitian_reverse, invert_fir)
