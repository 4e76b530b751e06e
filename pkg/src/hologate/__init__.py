"""Adiabatic holonomic gates on driven (d+2)-level atoms.

The package computes the same gate three independent ways (closed form,
parallel-transport ODE, full Schrodinger evolution) and quantifies its
robustness to coherent loop deformations, finite protocol time, Rydberg
decay, and stochastic drive noise.
"""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    ModelConfig,
    NullFrame,
    ParameterPoint,
    SpectrumReport,
    single_atom_hamiltonian,
    single_atom_null_frame,
    spectral_gap,
    two_atom_hamiltonian,
    two_atom_null_frame,
)
from .gates import (  # noqa: F401
    GateReport,
    Loop,
    PhasePair,
    analytic_gate,
    gate_fidelity,
    pacman_loop,
    phase_integrals,
    solve_beta_for_phase,
)
from .geometry import (  # noqa: F401
    ConnectionSample,
    Holonomy,
    TangentConnection,
    connection_at,
    parallel_transport,
    tangent_connection,
)
from .dynamics import (  # noqa: F401
    EvolutionResult,
    SweepTable,
    effective_gate,
    fidelity_time_sweep,
    schrodinger_evolve,
)
from .noise import (  # noqa: F401
    LoopPerturbation,
    MixedState,
    NoiseProcessSpec,
    coherent_error_sweep,
    delta_alpha_bound,
    noisy_average_vs_master,
    perturb_loop,
    sample_noise_trajectories,
)
