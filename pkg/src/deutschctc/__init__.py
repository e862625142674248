"""Deutsch closed-timelike-curve consistency as an eigenvalue problem."""

__version__ = "0.1.0"

from .deutsch import (  # noqa: E402
    DensityMatrix,
    InteractionUnitary,
    Superoperator,
    apply_ctc_channel,
    build_superoperator_mixed,
    build_superoperator_pure,
    consistency_residual,
    cr_output,
    extract_blocks,
    gauge_reduce,
)
from .entanglement import concurrence, is_product, purity, von_neumann_entropy  # noqa: E402
from .fixed_point import (  # noqa: E402
    FixedPointSet,
    SelectionRule,
    density_solutions,
    feasible_interval,
    fixed_subspace,
    hermitian_fixed_basis,
    iterate_channel_fixed_point,
    select,
    solution_set,
)
from .linalg import Spectrum, Tolerances, eigenvalues, kron, nullspace, partial_trace  # noqa: E402
from .scenarios import (  # noqa: E402
    build_epr_interaction,
    dejonghe_M,
    dejonghe_unitary,
    run_dejonghe,
    run_epr_scenario,
    solve,
    sweep_epsilon,
)
