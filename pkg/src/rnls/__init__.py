"""Stabilized gradient-flow solver for action ground states of the rotating NLS."""

from .dgf import (
    ACTION_INCREMENT_MET,
    DECAY_VIOLATION,
    MAX_ITERS,
    RESIDUAL_MET,
    DgfConfig,
    IterationRecord,
    RunResult,
    adaptive_alpha,
    dgf_step,
    residual_max,
    run_dgf,
)
from .elliptic1d import EllipticGS1D, agm_K, analytic_gs_1d, jacobi_sn, solve_modulus
from .errors import *  # noqa: F401,F403
from .fieldio import read_field, write_field
from .grid import DIRICHLET, PERIODIC, Grid, h1_norm, inner_products
from .metrics import (
    PhaseAlignment,
    RateFit,
    dist_h1,
    estimate_lambda0,
    fit_exponential_rate,
    lojasiewicz_report,
    phase_align,
    sgap_dist_equivalence,
)
from .model import ModelParams, check_admissibility, evaluate_potential, initial_data
from .ops import (
    action,
    apply_hamiltonian,
    apply_lz,
    first_variation,
    functionals,
    h_minus1_norm,
    second_variation,
)

__version__ = "0.1.0"
