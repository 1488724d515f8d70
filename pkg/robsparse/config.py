"""
Package-wide defaults and the `config.toml` loader.

Every knob the analysis leaves as an unspecified constant (pruning
constant, separation constant, solver tolerances, iteration caps)
lives here, so experiments can change them without touching code.
Values found in the TOML file are overlaid section by section onto
a copy of `DEFAULT_CONFIG`; sections unknown to the defaults are kept.
"""
import copy
import os
import logging

import toml


# Default configuration values to be used if `config.toml` cannot be found
DEFAULT_CONFIG = {
    "pruning": {
        # Constant multiplying every Omega(.) pruning threshold
        "c_prune": 4.0,
        "tau_prune": 0.01,
    },
    "oracle": {
        # tau_sep = c_sep * (L_F^2 + L_cov) * delta + c_stat * L_cov * s * sqrt(log(2 d_g) / m)
        # with m the number of samples left after pruning. c_sep is set per model.
        "c_sep": {
            "mean": 1.0,
            "covariance": 0.01,
            "regression": 1.0,
            "glm": 1.0,
            "logistic": 1.0,
        },
        "c_stat": 1.5,
    },
    "spca": {
        # "tol" is optional: without it the tolerance is eps/10 (L_F^2 + L_cov)
        "max_iters": 5000,
        # Initial ADMM penalty and residual-balancing factor
        "rho": 1.0,
        "adapt_factor": 2.0,
    },
    "ellipsoid": {
        # Initial ball radius in reduced coordinates
        "radius": 2.0,
        # max_iters = max_iters_factor * m^2 unless set explicitly
        "max_iters_factor": 500,
        "feasibility_tol": 1e-8,
        # Check the determinant decrease at every update
        "debug": False,
    },
    "harness": {
        "threads": 1,
        "record_runtime": False,
    },
    "testkit": {
        "condition_constant": 1.0,
        "weight_samples": 50,
        "tolerance_scale": 5.0,
    },
    "files": {
        "logger_fname": None,
    },
}


def load_config(config_file="config.toml"):
    """Load TOML and overlay DEFAULT_CONFIG, but keep new sections intact."""
    logger = logging.getLogger("Config")
    cfg_file = {}
    if config_file is not None and os.path.exists(config_file):
        try:
            cfg_file = toml.load(config_file)
        except Exception as e:
            logger.warning(f"error loading {config_file}: {e}. Using defaults.")
    else:
        logger.info(f"no configuration file '{config_file}' found. Using defaults.")

    # Start with a deep copy of the defaults
    config = copy.deepcopy(DEFAULT_CONFIG)

    # Overlay everything that came from the file
    for section, data in cfg_file.items():
        if isinstance(data, dict) and isinstance(config.get(section), dict):
            config[section].update(data)
        else:
            config[section] = data

    return config
