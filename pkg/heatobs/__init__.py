from .gaussian_field import GaussianMixtureField, GaussianTerm, gaussian
from .spectral_field import FrequencyGrid, SpectralGridField
from .sinc_basis import LatticeIndexSet, SampleVector, SincSeries, shannon_check
from .observability import calibrate_constant, perturbed_residual, residual
from .weak_window import WindowedExperiment, counterexample_gap, windowed_residual
from .impulse_control import ClosedLoopRun, ControlVector, closed_loop_final, feedback_gain, feedback_norm_report
from .hs_analysis import commutator_inequality_check, hs_residual, local_sup_report
from .reports import BoundReport, ConstantCalibration
from .calibration import CalibrationTable
from .runner import ExperimentConfig, calibrate, run
from .util import Certified, CertificationError, PreconditionError
from .__version__ import __version__
