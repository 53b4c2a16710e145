"""Impact mechanics of elastic structures via memory-kernel delay equations.

The package builds finite modal or collocation models of impacting
structures, reduces them exactly to the contact-point pair with a memory
kernel, classifies models as regular or singular by the kernel's
short-time level, and simulates impacts with finite contact forces next to
a coefficient-of-restitution baseline.
"""

from ._kernels import BACKEND as backend
from .asymptotics import (
    AsymptoticsReport,
    asymptotics_report,
    constant_force_bvp,
    force_sensitivity,
    mode_count_estimate,
    measured_mode_count,
    reversal_check,
)
from .config import RunConfig, load_config, parse_config
from .cor import chatter_metrics, cor_impact_map, simulate_cor
from .errors import (
    ChatterOverflowError,
    ConfigurationError,
    DiscretizationError,
    NumericalError,
    SingularModelError,
)
from .reduction import (
    ForcingTerm,
    KernelJump,
    MemoryKernel,
    Projection,
    RegularityReport,
    build_projection,
    drift_constant,
    estimate_plateau,
    fit_alpha,
    forcing_term,
    memory_kernel,
    regularity_sweep,
)
from .simulate import (
    ContactConfig,
    SimEvent,
    SimulationResult,
    backend_name,
    predict_secondary_jump,
    simulate,
)
from .structures import (
    CollocationOperator,
    FirstOrderSystem,
    HarmonicForcing,
    ModalStructure,
    assemble_first_order,
    eb_frequencies,
    eb_structure,
    string_structure,
    timoshenko_collocation,
    tip_normalized_ic,
    to_modal,
)

__version__ = "0.1.0"
