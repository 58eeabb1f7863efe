"""Multiscale online forecasters for square-loss regression on [0, 1]."""

from .errors import (CertificationError, ChainregError, DimensionError,
                     DomainError, ParameterError, ResourceError)
from .simplex import clip, gibbs_weights, uniform_weights
from .ewa import EwaState, square_loss_expconcave_eta
from .meg import BlockSpec, MultivarEG, adaptive_regret_bound, fixed_eta, meg_regret_bound
from .nets import (ClippedPolynomial, FiniteFunctionClass, HolderNetConfig,
                   LipschitzNetConfig, build_explicit_nets, lipschitz_cell_index,
                   project_lipschitz, q_increment, taylor_project_holder)
from .chaining import ChainingConfig, ChainingForecaster, theorem2_quantities
from .dyadic import DyadicConfig, DyadicForecaster, theorem3_bound
from .holder import HolderForecaster, HolderForecasterConfig, theoremC_bound
from .oracle import (OracleResult, RoundData, best_chained_finite, best_finite,
                     best_lipschitz_dp, empirical_regret)

__version__ = "0.1.0"
