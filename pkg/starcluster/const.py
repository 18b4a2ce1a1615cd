"""Constants for the starcluster package."""

from typing import Final

# Package identity
DOMAIN: Final = "starcluster"

# Environment overrides
ENV_SEED: Final = "STARCLUSTER_SEED"
DEFAULT_SEED: Final = 20100101

# Protocol variants
VARIANT_P1: Final = "p1"
VARIANT_P2: Final = "p2"
VARIANTS: Final = (VARIANT_P1, VARIANT_P2)

# Near-deterministic connection
REQUIRED_CONNECTIONS: Final = 4  # neighbor roots in the 3D lattice
MIN_LEAVES: Final = REQUIRED_CONNECTIONS
DEFAULT_P_F_MAX: Final = 0.01
MIN_LEAVES_CAP: Final = 1_000_000

# Surface-code layer (imported, never recomputed)
SURFACE_CODE_THRESHOLD: Final = 0.033  # independent errors
CORRELATED_THRESHOLD: Final = 0.0205  # with 0.26% correlated errors
CORRELATED_ERROR_RATE: Final = 0.0026
DEFAULT_TARGET_P_R: Final = 0.02

# Gate-error coefficients (intercept, slope per leaf) of the full renormalized error
GATE_COEFFICIENTS: Final = {
    VARIANT_P1: (7.7, 0.64),
    VARIANT_P2: (11.0, 0.90),
}
COEFFICIENT_TOLERANCE_FACTOR: Final = 2.0

# Threshold solver
BISECTION_LOWER: Final = 0.0
BISECTION_UPPER: Final = 0.1
BISECTION_XTOL: Final = 1e-12
BISECTION_MAXITER: Final = 200
P_R_TOLERANCE: Final = 1e-8

# Sampling
MIN_SAMPLES_PER_POINT: Final = 1000
MIN_FIT_POINTS: Final = 5
DEFAULT_SAMPLES: Final = 10_000
DEFAULT_L_GRID: Final = (4, 7, 10, 13, 17)
CORRELATION_RATIO_LIMIT: Final = 0.1

# Stabilizer oracle
ORACLE_QUBIT_CAP: Final = 64
ORACLE_EXTRA_REFERENCE_RUNS: Final = 16

# Conventions
CONVENTION_FACE_VALUE: Final = "face_value"
CONVENTION_DEPOLARIZING: Final = "depolarizing"
ERROR_CONVENTIONS: Final = (CONVENTION_FACE_VALUE, CONVENTION_DEPOLARIZING)
ATTRIBUTION_CONNECTION: Final = "connection"
ATTRIBUTION_ROOT: Final = "root"
ATTRIBUTIONS: Final = (ATTRIBUTION_CONNECTION, ATTRIBUTION_ROOT)

# Geometry presets
DEFAULT_GEOMETRY: Final = "default"
STAR_GEOMETRY: Final = "star"

# Resources
DEFAULT_LOG_BASE: Final = 2.0
DEFAULT_IMPROVED_CONSTANT: Final = 1.0
TYPICAL_R_TOWC: Final = 1e7  # p_r ~ 1%, computation size 1e9
SENSITIVITY_LOG_BASES: Final = (2.0, 10.0, 2.718281828459045)

# Published orders of magnitude of other schemes, used as fixed annotations
LITERATURE_SCHEMES: Final = (
    {"scheme": "dawson", "p_s": 0.5, "r_total_log10": 23.0, "source": "cited"},
    {"scheme": "cho", "p_s": 0.5, "r_total_log10": 18.0, "source": "cited"},
    {"scheme": "goto", "p_s": 0.9, "r_total_log10": 7.0, "source": "cited"},
)

# Output
THRESHOLD_CSV_HEADER: Final = ("p_s", "variant", "L", "p_f", "p_u_threshold")
RESOURCE_CSV_HEADER: Final = (
    "scheme",
    "p_s",
    "p_u",
    "L",
    "r_star_log10",
    "r_towc_log10",
    "r_total_log10",
    "source",
)
FORMAT_CSV: Final = "csv"
FORMAT_JSON: Final = "json"

# CLI exit codes
EXIT_OK: Final = 0
EXIT_INVALID_ARGUMENT: Final = 2
EXIT_INFEASIBLE: Final = 3
EXIT_RESOURCE: Final = 4
EXIT_VERIFICATION: Final = 5
EXIT_OUTPUT: Final = 6
