import os
from dotenv import load_dotenv

load_dotenv()

# Runtime settings
LOG_LEVEL = os.getenv("LINKOPT_LOG_LEVEL", "INFO")
WORKERS = int(os.getenv("LINKOPT_WORKERS", "1"))
OUTPUT_DIR = os.getenv("LINKOPT_OUTPUT_DIR", "results")
DEFAULT_SEED = int(os.getenv("LINKOPT_DEFAULT_SEED", "7"))

# Link budget
THERMAL_NOISE_DBM_PER_HZ = -174.0
NOISE_FIGURE_DB = 10.0
SELF_INTERFERENCE_ATTENUATION_DB = 100.0
SPEED_OF_LIGHT = 299792458.0

# Default system parameters (source at (0,0), destination at (d_sd,0), node at (d_1,d_r))
SYSTEM_DEFAULTS = {
    "M": 4,
    "N": 4,
    "K": 200,
    "L": 4,
    "l": 4,
    "P_s_dbm": 43.0,
    "P_r_dbm": 43.0,
    "carrier_ghz": 3.0,
    "bandwidth_hz": 100e6,
    "d_sd": 100.0,
    "d_1": 50.0,
    "d_r": 10.0,
    "bs_height_m": 10.0,
    "ut_height_m": 1.5,
}

# Solver configuration per scheme
SOLVER_CONFIGS = {
    "ris": {
        "max_outer_iters": 500,
        "eps_rel": 1e-4,
        "init_mode": "deterministic",
    },
    "fdr": {
        "max_outer_iters": 500,
        "eps_rel": 1e-4,
        "init_mode": "deterministic",
    },
    "hdr": {
        "max_outer_iters": 500,
        "eps_rel": 1e-4,
        "init_mode": "deterministic",
    },
    "direct": {
        "max_outer_iters": 200,
        "eps_rel": 1e-6,
        "init_mode": "deterministic",
    },
}

# Inner tolerances shared by the subproblem solvers
SUBSOLVER_TOLERANCES = {
    "bisection_rel_tol": 1e-12,
    "bisection_max_steps": 200,
    "cd_rel_tol": 1e-8,
    "cd_max_cycles": 500,
    "dual_outer_steps": 200,
    "jitter": 1e-12,
}

# Optimizer sanity thresholds
MONOTONE_SLACK_REL = 1e-6
FEASIBILITY_SLACK = 1e-9

# Desk-scale sweep used by CI and the validation suite
DESK_SCALE = {
    "k_values": [20, 60, 100],
    "drops": 20,
}

# Output formats
CSV_COLUMNS = [
    "scheme",
    "sweep_param",
    "sweep_value",
    "drop",
    "rate_bps",
    "spectral_efficiency_bphz",
    "energy_efficiency_bpj",
    "iterations",
    "converged",
]
CSV_FLOAT_FORMAT = "%.12g"
