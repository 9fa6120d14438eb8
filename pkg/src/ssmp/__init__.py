"""Signal space matching pursuit for joint sparse recovery, with baselines,
exhaustive guarantee verifiers and a Monte Carlo experiment harness."""
from .baselines import ALGORITHM_IDS, oracle_ls, ra_omp_recover, run_algorithm, somp_recover
from .core import (
    ObservationMatrix,
    RecoveryResult,
    SamplingMatrix,
    SsmpConfig,
    calibrated_epsilon,
    least_squares_estimate,
    normalized_projected_dictionary,
    ra_ormp_recover,
    ssmp_identify,
    ssmp_recover,
    ssmp_recover_extended,
)
from .exceptions import (
    InvalidInputError,
    NotComputableError,
    OverdeterminedSupportError,
    SelectionExhaustedError,
    ShapeError,
    SsmpError,
)
from .linalg import (
    OrthonormalBasis,
    RankTolerance,
    orthonormal_basis,
    project,
    project_out,
    residual_subspace_distance,
    subspace_distance,
)
from .verifiers import (
    GuaranteeReport,
    RipEstimate,
    fundamental_limit,
    krank,
    rip_constant,
    table3_guarantee,
    theorem1_guarantee,
    theorem3_noise_guarantee,
)

__version__ = "0.1.0"
