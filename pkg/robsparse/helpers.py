import os
import sys
import logging

import numpy as np


def setup_logger(name, level=logging.INFO, fname=None, silent=False):
    """Logger with custom prefix"""

    logger = logging.getLogger()
    logger.setLevel(level)

    # Drop handlers from a previous call so repeated CLI invocations
    # in the same process do not duplicate output
    for handler in list(logger.handlers):
        if getattr(handler, '_robsparse', False):
            logger.removeHandler(handler)

    # Create console handler
    if fname is None:
        ch = logging.StreamHandler(sys.stderr)
    else:
        ch = logging.FileHandler(fname, mode='w')
    if silent:
        ch = logging.NullHandler()
    ch._robsparse = True

    ch.setLevel(level)

    # Create formatter
    formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')

    # Add formatter to console handler
    ch.setFormatter(formatter)

    # Add console handler to logger
    logger.addHandler(ch)


def make_rng(seed, *stream):
    """
    Seeded numpy generator.

    Extra integers select an independent child stream of the same seed,
    so e.g. the contamination mask never shifts the clean draws.
    """
    if stream:
        return np.random.default_rng([int(seed), *map(int, stream)])
    return np.random.default_rng(int(seed))


def symmetrize(M):
    """Return (M + M^T)/2, exactly symmetric."""
    M = np.asarray(M, dtype=float)
    return 0.5 * (M + M.T)


def weighted_scatter(points, weights, center):
    """sum_i w_i (p_i - c)(p_i - c)^T, exactly symmetric."""
    dev = points - center
    S = (dev * weights[:, None]).T @ dev
    return symmetrize(S)


def env_threads(default=1):
    """Default sweep thread count from ROBSPARSE_THREADS."""
    value = os.environ.get('ROBSPARSE_THREADS')
    if value is None:
        return default
    try:
        return max(1, int(value))
    except ValueError:
        logging.getLogger("Helpers").warning(f"ignoring ROBSPARSE_THREADS={value!r}, not an integer")
        return default


def format_duration(seconds):
    """
    Convert seconds into a string in the format "Hh:Mm:Ss".
    """
    try:
        if seconds is None:
            return "N/A"
        seconds = int(seconds)
        hours, remainder = divmod(seconds, 3600)
        minutes, secs = divmod(remainder, 60)
        return f"{hours}h:{minutes}m:{secs}s"
    except (ValueError, TypeError):
        return "N/A"
