"""Constants for dioapprox."""
from __future__ import annotations

from typing import Final

DOMAIN = "dioapprox"

# working precision of extended reals, in mantissa bits
CONF_PRECISION_BITS = "precision_bits"
DEFAULT_PRECISION_BITS = 256

CONF_SEED = "seed"
DEFAULT_SEED = 0

# arith_core
CONF_TRIAL_BOUND = "trial_bound"
DEFAULT_TRIAL_BOUND = 1_000_000

CONF_RHO_ITERATIONS = "rho_iterations"
DEFAULT_RHO_ITERATIONS = 2_000_000

CONF_RHO_ATTEMPTS = "rho_attempts"
DEFAULT_RHO_ATTEMPTS = 8

# largest sieve array (in flags) we are willing to allocate
CONF_SIEVE_MEMORY = "sieve_memory"
DEFAULT_SIEVE_MEMORY = 500_000_000

# Miller-Rabin with the first 13 prime bases is deterministic below this
DETERMINISTIC_PRIMALITY_LIMIT = 3_317_044_064_679_887_385_961_981
DETERMINISTIC_PRIMALITY_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
# 4^-64 = 2^-128
PROBABILISTIC_PRIMALITY_ROUNDS = 64

# additive functions
BUILTIN_TOTIENT_LOG = "totient_log"
BUILTIN_SIGMA_LOG = "sigma_log"

CONF_DELTA = "delta"
CONF_LAMBDA = "lambda"
CONF_C = "C"
CONF_T0 = "t0"
CONF_EXPRESSION = "expression"
CONF_RESIDUE_FILTER = "residue_filter"
CONF_MONOTONE_FROM = "monotone_from"

DEFAULT_DELTA = 1.0
DEFAULT_LAMBDA = 0.45
DEFAULT_C = 2.0
DEFAULT_T0 = 0.5
DEFAULT_MONOTONE_FROM = 2

BUILTIN_FUNCTIONS: Final[dict[str, dict]] = {
    BUILTIN_TOTIENT_LOG: {
        "description": "log(n/phi(n)), f(p^v) = log(p/(p-1))",
        CONF_DELTA: DEFAULT_DELTA,
        CONF_MONOTONE_FROM: 2,
        "multiplicative": "totient",
    },
    BUILTIN_SIGMA_LOG: {
        "description": "log(sigma(n)/n), f(p^v) = log((p^(v+1)-1)/(p^v (p-1)))",
        CONF_DELTA: DEFAULT_DELTA,
        CONF_MONOTONE_FROM: 2,
        "multiplicative": "sigma",
    },
}

# empirical membership checks
CONF_MEMBERSHIP_PRIME_LIMIT = "membership_prime_limit"
DEFAULT_MEMBERSHIP_PRIME_LIMIT = 10_000
CONF_MEMBERSHIP_SAMPLES = "membership_samples"
DEFAULT_MEMBERSHIP_SAMPLES = 32

# ladder / greedy
CONF_XI = "xi"
DEFAULT_XI = 0.3
CONF_XI_PRIME = "xi_prime"
CONF_V0 = "v0"
CONF_ETA = "eta"
CONF_DEPTH = "depth"
DEFAULT_DEPTH = 4
# fraction of the admissible maximum used when v0 / eta / xi are derived
DEFAULT_SAFETY = 0.5
DEFAULT_XI_PRIME_SHARE = 0.95
# n_0 stops once f(n_0) passes gamma - BASE_FILL * eta; must lie in (1/2, 1]
DEFAULT_BASE_FILL = 0.6

# sieve
CONF_EPSILON = "epsilon"
DEFAULT_EPSILON = 0.05
CONF_MU = "mu"
CONF_Z = "z"
CONF_MAX_Z = "max_z"
DEFAULT_MAX_Z = 1_000_000
CONF_SEGMENT_SIZE = "segment_size"
DEFAULT_SEGMENT_SIZE = 1 << 18
CONF_SEARCH_LIMIT = "search_limit"
DEFAULT_SEARCH_LIMIT = 2_000_000
CONF_WORKERS = "workers"
DEFAULT_WORKERS = 1
CONF_EH = "eh"
DEFAULT_EH = False

# sieve limits; only beta_1 and beta_2 are known values
BETA_TABLE: Final[dict[int, float]] = {1: 2.0, 2: 4.2665}
BETA_PLACEHOLDER_FACTOR = 3.0

# density sanity is a warning when observed / predicted leaves this band
DENSITY_TOLERANCE = 3.0
# exhaustive dimension-constant scan up to this many primes
DIMENSION_EXHAUSTIVE_PRIMES = 2000

# pipelines
MODE_THEOREM1 = "theorem1"
MODE_THEOREM2 = "theorem2"
MODE_ERDOS = "erdos"
MODE_POLY = "poly"
MODES = [MODE_THEOREM1, MODE_THEOREM2, MODE_ERDOS, MODE_POLY]

CONF_MAX_MODULUS_BITS = "max_modulus_bits"
DEFAULT_MAX_MODULUS_BITS = 96
CONF_MAX_CERTIFICATES = "max_certificates"
DEFAULT_MAX_CERTIFICATES = 3
# survivors examined per depth before giving up on it
CONF_MAX_CANDIDATES = "max_candidates"
DEFAULT_MAX_CANDIDATES = 64
CONF_GAMMA_ASSUMED = "gamma_assumed"
DEFAULT_GAMMA_ASSUMED = 0.525
CONF_GAMMA_PRIME_ASSUMED = "gamma_prime_assumed"
DEFAULT_GAMMA_PRIME_ASSUMED = 0.53
CONF_N0_MARGIN = "n0_margin"
DEFAULT_N0_MARGIN = 0.05
CONF_ERDOS_BOUND = "erdos_bound"
DEFAULT_ERDOS_BOUND = 100_000
# multiplicative-scale target reported alongside polynomial certificates
CONF_ZETA_MULTIPLICATIVE = "zeta_multiplicative"

# quadratic rows of the polynomial mode: m^2 + c
POLY_ROW_N0 = 2
POLY_ROW_N1 = 1
# residue classes allowed for the two moduli of the polynomial mode
POLY_N0_RESIDUES = (8, (1, 3))
POLY_N1_RESIDUES = (4, (1,))

# certificates
CERTIFICATE_SCHEMA_VERSION = 1
# rounding slack on certified real inequalities is 2^-(precision - SLACK_BITS)
SLACK_BITS = 16
# exact rational exponents are used when the denominator stays below this
EXACT_EXPONENT_DENOMINATOR = 1000

# cli
SUBCOMMAND_LADDER = "ladder"
SUBCOMMAND_CONSTRUCT = "construct"
SUBCOMMAND_SEARCH = "search"
SUBCOMMAND_SOLVE = "solve"
SUBCOMMAND_VERIFY = "verify"

EXIT_CERTIFICATES = 0
EXIT_EMPTY = 1
EXIT_REJECTED = 2
EXIT_INTERNAL = 3
