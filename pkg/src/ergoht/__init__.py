"""Exact machinery for one-sided ergodic Hilbert transforms of circle rotations.

Core objects: continued fractions with cached big-integer convergents,
exact interval unions of measure 1/2 on the circle, certified signs of
f = 2*chi_U - 1 along rotation orbits, weighted partial sums, the N*
divergence certificate, explicit divergent and convergent-Liouville
constructions, the near-alternating decomposition apparatus, and exact
discrepancy of Kronecker samples.
"""

from .cf import CFNumber, CylinderSet, RationalEnclosure, cf_value
from .circle import (
    UNDETERMINED,
    IntervalUnion,
    OrbitSegment,
    PointEnclosure,
    UnitPoint,
    distance_to_zero,
    eval_sign,
    orbit_point,
    segment_sum,
    sign_at,
)
from .constructors import (
    DivergentBuildConfig,
    LiouvilleWitness,
    SigmaBlocks,
    build_divergent,
    build_liouville_convergent,
    sigma_blocks,
    verify_growth_bounds,
    verify_liouville,
)
from .decomp import (
    DecompositionEngine,
    NearAlternatingSeq,
    ParitySequence,
    check_index_bounds,
    decompose,
    level_bound,
    parity_sequence,
    recombine_bound,
    shifted_ladder,
)
from .discrepancy import (
    DiscrepancyReport,
    PointSample,
    brute_force_discrepancy,
    discrepancy,
    eht_via_parts,
    sn_growth,
)
from .eht import (
    GapWitness,
    NStarCertificate,
    PartialSumTrace,
    WeightScheme,
    cauchy_gap_scan,
    check_weight_condition,
    compute_nstar,
    merge_scan_stats,
    summation_by_parts,
    weighted_partial_sums,
)
from .errors import (
    ConfigError,
    CountShortfallError,
    DecompositionError,
    DigitExhaustionError,
    ErgohtError,
    InfeasibleSizeError,
    InvariantViolationError,
    MeasureError,
    WeightMismatchError,
)
from .signs import sign_range

__version__ = "0.1.0"
