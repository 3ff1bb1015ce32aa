"""RIS-aided passive DOA estimation toolkit.

Simulates a RIS-aided single-receiver sensing link, estimates target
directions of arrival via atomic-norm denoising plus Hankel-MUSIC,
optimizes the RIS measurement matrix to null the access-point
interference, and evaluates estimators against the Cramer-Rao lower bound.
"""

from .anm import AnmProblem, AnmSolution, default_rho, solve_anm, toeplitz_from_generator
from .crlb import FisherInfo, crlb_doa, crlb_map, crlb_single_target, fisher_matrix
from .harness import ExperimentConfig, RmseTable, associate_and_score, run_sweep
from .measmat import GramCandidate, SinrReport, interference_gain, optimize_gram, round_rows, sinr
from .scene import Point2D, Scene, SceneDerived, derive_scene, load_scene, nominal_scene
from .sdp import SolverOptions
from .signal_model import (
    MeasurementMatrix,
    Snapshot,
    SteeringVector,
    random_measurement_matrix,
    simulate_snapshot,
    steering_matrix,
    steering_vector,
)
from .subspace import (
    HankelLift,
    SpatialSpectrum,
    hankel_lift,
    music_spectrum,
    noise_subspace,
    pick_peaks,
)

__version__ = "0.1.0"
