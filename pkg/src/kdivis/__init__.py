"""k-divisibility classification, phase diagrams and non-Markovianity measures
for qubit open-system dynamics.
"""

from .config import DEFAULT, Tolerances
from .divisibility import (
    DivisibilityClass,
    DivisibilityVerdict,
    ComplementStep,
    classify,
    complement_map,
    constant_pauli_class,
    is_cp,
    is_positive,
    is_positive_pauli_diagonal,
)
from .errors import (
    AllStepsSingular,
    IntegrationUnstable,
    KdivisError,
    NotHermitian,
    QuadratureFailure,
    SingularMap,
)
from .measures import (
    BlpResult,
    RhpResult,
    blp_detects,
    blp_measure,
    rhp_detects,
    rhp_g,
    rhp_measure,
)
from .models import (
    AmplitudeDampingModel,
    CnotControlModel,
    PauliChannelModel,
    RateFn,
    SuperradianceModel,
    amplitude_damping_propagator,
    damping_superop,
    joint_generator,
    pauli_generator,
    pauli_propagator_analytic,
    propagate_rk4,
    propagator_grid,
    reduced_propagator,
)
from .sweep import (
    CellResult,
    GridSpec,
    ParamRange,
    PhaseDiagramGrid,
    encode_csv,
    encode_svg,
    parse_csv,
    run_sweep,
)

__version__ = "0.1.0"
