#!/usr/bin/env python3
"""
Shared defaults for permspec.

Library functions take these as keyword defaults; the command-line tool
exposes flags to override them.
"""

import logging
import os

logger = logging.getLogger(__name__)

VERSION = "1.0.0"
SCHEMA_VERSION = 1

# Angle precision (fraction bits of irrational approximations)
DEFAULT_BITS = 256
MIN_BITS = 128

# Working precision (mantissa bits) for Euler products and series values
MPMATH_PREC = 128

# Limit-process truncation
DEFAULT_RESIDUAL_EPS = 1e-3
DEFAULT_PRIME_CUTOFF_INDEX = 10_000
DENSE_PRIME_ROWS = 25
DEFAULT_TRUNCATION_TOL = 1.0

# Gap series
DEFAULT_PSI_TOL = 1e-8
HYPERGRAPH_SIZE_LIMIT = 12

# Largest n whose cycle types are enumerated for the sampling goodness-of-fit table
SAMPLE_CHECK_MAX_N = 30
MAX_EULER_PRIME = 2 ** 20
INITIAL_EULER_PRIME = 64
LOG_SERIES_TERMS = 30

# Replicates sharing one random stream; fixed so output does not depend on threads
REPLICATE_BLOCK_SIZE = 256

THREADS_ENV_VAR = "PERMSPEC_THREADS"
SLOW_TESTS_ENV_VAR = "PERMSPEC_SLOW_TESTS"


def get_thread_count(requested=None):
    """
    Resolve the worker count.

    Args:
        requested: Explicit value from the command line, or None

    Returns:
        Number of worker threads (at least 1), capped by PERMSPEC_THREADS
    """
    cap = os.cpu_count() or 1
    env_value = os.environ.get(THREADS_ENV_VAR)
    if env_value:
        try:
            cap = max(1, int(env_value))
        except ValueError:
            logger.warning(f"Ignoring non-integer {THREADS_ENV_VAR}={env_value!r}")
            env_value = None

    if requested is None:
        return cap
    return max(1, min(int(requested), cap)) if env_value else max(1, int(requested))
