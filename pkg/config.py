"""
Centralized configuration for the PME repeater toolkit.
"""
import os
import sys


# Environment
CONFIG_ENV_VAR = "REPEATER_CONFIG"
LOG_LEVEL = os.environ.get("REPEATER_LOG_LEVEL", "INFO")

# Files
PROJECT_DIR = os.path.dirname(os.path.abspath(__file__))
PAPER_PRESET = os.path.join(PROJECT_DIR, "paper.json")
OUTPUT_FORMATS = ("csv", "json", "pretty")
DEFAULT_OUTPUT = "pretty"

# Fock-space engine
DEFAULT_N_MAX = 2
AMPLITUDE_TOLERANCE = 1e-14    # amplitudes below this are pruned
NORM_TOLERANCE = 1e-12
PME_FIDELITY_TOLERANCE = 1e-9

# Cited reference totals in seconds for the same parameter set (2500 km, n=4).
# Taken from the literature; the toolkit does not model these protocols.
DLCZ_TOTAL_TIME = 650000.0
SPS_TOTAL_TIME = 15300.0
PAPER_TOTAL_TIME = 2251.0

# Monte Carlo
SIM_DEFAULT_TRIALS = 1000
SIM_DEFAULT_SEED = 42
SIM_DEFAULT_WORKERS = 4
SIM_CHUNK_TRIALS = 2048
SIM_CONFIDENCE = 0.997
SIM_CONVERGENCE_BAND = (0.75, 1.35)
SIM_HISTOGRAM_BUCKETS = 64
SIM_MIN_PROBABILITY = 1e-12    # below this retry counts overflow 64-bit integers
SIM_TIME_MODELS = ("attempt-slotted", "continuous")

# Verification battery
VERIFY_PHASE_GRID = 8
VERIFY_SEED = 20240101
DARK_STATE_SAMPLES = 100
DARK_STATE_TOLERANCE = 1e-12
VERIFY_FIDELITY_TOLERANCE = 1e-10
VERIFY_PROBABILITY_TOLERANCE = 1e-9


def validate_config() -> bool:
    """
    Validate environment-driven configuration.
    Returns True if everything needed is present, False otherwise.
    Prints warnings for suspicious settings.
    """
    warnings = []
    ok = True

    env_path = os.environ.get(CONFIG_ENV_VAR)
    if env_path and not os.path.exists(env_path):
        warnings.append(f"{CONFIG_ENV_VAR}={env_path} does not exist - falling back to --config or the bundled preset")

    if not os.path.exists(PAPER_PRESET):
        warnings.append(f"Bundled preset missing at {PAPER_PRESET}")
        ok = False

    if LOG_LEVEL.upper() not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
        warnings.append(f"REPEATER_LOG_LEVEL={LOG_LEVEL} is not a logging level - using INFO")

    for warning in warnings:
        print(f"[CONFIG WARNING] {warning}", file=sys.stderr)

    return ok
