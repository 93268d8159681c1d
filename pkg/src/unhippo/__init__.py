"""HiPPO and uncertainty-aware (UnHiPPO) state-space-model initializations.

The library maintains Legendre-coefficient representations of streaming
signals, regularizes the data-free latent dynamics, derives discrete
transition pairs through a Kalman filter, and evaluates inference-only
linear state space layers built from those pairs.
"""

from ._version import __version__
from .container import (
    ContainerFormatError,
    load_bank,
    load_layer,
    read_container,
    save_bank,
    save_layer,
    write_container,
)
from .dynamics import (
    RegularizedSystem,
    data_free_matrix,
    make_q,
    make_regularized,
    transition,
)
from .errors import NumericError
from .hippo import DiscretePair, HippoSystem, discretize_hippo, hippo_rhs, init_pair, make_hippo
from .kalman import (
    InitBank,
    KalmanState,
    NoiseConfig,
    build_init_bank,
    extract_unhippo_pair,
    kalman_predict,
    kalman_update,
    run_filter,
    select_timescales,
)
from .legendre import Basis, basis_eval, legendre_eval, project, reconstruct
from .matfun import expm, pinv, solve, symmetrize
from .signals import SignalTrace, add_noise, mse, read_trace, sample_gp, write_trace
from .ssm import LsslLayer, SsmCore, gelu, krylov_conv, krylov_kernel, layer_forward, ssm_recurrence

__all__ = [
    "Basis",
    "ContainerFormatError",
    "DiscretePair",
    "HippoSystem",
    "InitBank",
    "KalmanState",
    "LsslLayer",
    "NoiseConfig",
    "NumericError",
    "RegularizedSystem",
    "SignalTrace",
    "SsmCore",
    "add_noise",
    "basis_eval",
    "build_init_bank",
    "data_free_matrix",
    "discretize_hippo",
    "expm",
    "extract_unhippo_pair",
    "gelu",
    "hippo_rhs",
    "init_pair",
    "kalman_predict",
    "kalman_update",
    "krylov_conv",
    "krylov_kernel",
    "layer_forward",
    "legendre_eval",
    "load_bank",
    "load_layer",
    "make_hippo",
    "make_q",
    "make_regularized",
    "mse",
    "pinv",
    "project",
    "read_container",
    "read_trace",
    "reconstruct",
    "run_filter",
    "sample_gp",
    "save_bank",
    "save_layer",
    "select_timescales",
    "solve",
    "ssm_recurrence",
    "symmetrize",
    "transition",
    "write_container",
    "write_trace",
]
