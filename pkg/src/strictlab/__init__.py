"""Monte Carlo, exact-enumeration and analytic-bound toolkit for an Ising
model whose couplings depend on elastic bond lengths."""

from .lattice import Lattice
from .model import (
    Configuration,
    InteractionProfile,
    ModelParams,
    delta_energy_bond_move,
    delta_energy_spin_flip,
    j_of_r,
    preset_params,
    total_energy,
)
from .observables import BondClass, ObservableRecord, Phase, binned_stats, classify_bond, classify_state, measure
from .sampler import RunSpec, SamplerConfig, hysteresis_run, init_configuration, metropolis_sweep, run

__version__ = "0.1.0"
