import os
import logging
from dotenv import load_dotenv
from pydantic import ValidationError

# Get logger
logger = logging.getLogger(__name__)


def validate_environment():
    """Validate project environment variables against schema.

    Reads OWNERSHIP_ENTROPY_* variables (after loading a local .env file) and
    checks them with the EnvConfig schema. Returns None when validation fails
    so callers can fall back to the built-in defaults below.
    """
    from ownership_entropy.models import EnvConfig

    load_dotenv()
    try:
        values = {
            'log_level': os.getenv('OWNERSHIP_ENTROPY_LOG_LEVEL', 'INFO'),
            'log_file': os.getenv('OWNERSHIP_ENTROPY_LOG_FILE', LOG_FILE),
            'workers': os.getenv('OWNERSHIP_ENTROPY_WORKERS', str(DEFAULT_WORKERS)),
            'coarse_points': os.getenv('OWNERSHIP_ENTROPY_COARSE_POINTS', str(COARSE_POINTS)),
        }
        return EnvConfig(**values)
    except ValidationError as e:
        logger.critical(f"Environment configuration failed validation: {str(e)}")
        return None


# === FILE PATHS ===
# Sample ownership network shipped with the project (src/ownership_entropy -> project root -> data)
DATA_DIR = os.path.join(os.path.dirname(__file__), '..', '..', 'data')
SAMPLE_EDGE_FILE = os.path.join(DATA_DIR, 'sample_ownership.csv')
# Case-study scale network: 25 companies with both degrees positive on [1..10]x[1..19],
# plus investor and subsidiary leaves
CASE_STUDY_EDGE_FILE = os.path.join(DATA_DIR, 'case_study_ownership.csv')

# Log file for run events
LOG_FILE = 'ownership_entropy.log'

# === NUMERICAL TOLERANCES ===
# Sum-to-one tolerance of a marginal PMF
PMF_TOLERANCE = 1e-12
# Rectangle cells above -CLAMP_TOLERANCE are round-off and get clamped to 0
CLAMP_TOLERANCE = 1e-12
# Total-mass and marginal-recovery tolerance of a joint PMF
MASS_TOLERANCE = 1e-10
# Below this |theta| the Frank and Clayton formulas route to the product copula
THETA_ZERO_CUTOFF = 1e-6

# === CALIBRATION SETTINGS ===
# Coarse grid points per connected theta-branch before golden-section refinement
COARSE_POINTS = 256
# Golden-section stopping width on theta
GOLDEN_TOLERANCE = 1e-6
# Distance kept from open endpoints (Frank/Clayton theta -> 0)
OPEN_ENDPOINT_INSET = 1e-4
# Refined optima within this fraction of one coarse grid cell of a window edge
# are labelled boundary/asymptotic
EDGE_FRACTION = 0.01
# Upper end of the default theta windows
THETA_WINDOW_MAX = 50.0
# Default theta windows per family, one tuple per connected branch
DEFAULT_THETA_WINDOWS = {
    'gumbel': ((1.0, THETA_WINDOW_MAX),),
    'clayton': ((-1.0, -OPEN_ENDPOINT_INSET), (OPEN_ENDPOINT_INSET, THETA_WINDOW_MAX)),
    'frank': ((-THETA_WINDOW_MAX, -OPEN_ENDPOINT_INSET), (OPEN_ENDPOINT_INSET, THETA_WINDOW_MAX)),
}
# Closed domain edges: an optimum here is a genuine boundary optimum
CLOSED_THETA_EDGES = {'gumbel': (1.0,), 'clayton': (-1.0,), 'frank': ()}
# Threads used for independent grid evaluations (results merge in grid order)
DEFAULT_WORKERS = 1

# === MARGINAL FITTING ===
# Bracket and tolerance of the power-law maximum-likelihood search
MLE_GAMMA_BRACKET = (0.01, 10.0)
MLE_TOLERANCE = 1e-8
# Minimum strictly positive PMF entries for a least-squares fit
MIN_FIT_POINTS = 3
# Two-sided confidence level of fitted parameter intervals
CONFIDENCE_LEVEL = 0.95

# === SYNTHESIZED CASE-STUDY FIXTURE ===
# k_out: power law with the density-fit exponent; k_in: exponential with the fitted rate
FIXTURE_OUT_GAMMA = 2.159
FIXTURE_OUT_N = 19
FIXTURE_IN_RATE = -0.9727
FIXTURE_IN_N = 10

# === OUTPUT FORMAT ===
# Significant digits of every serialized float
FLOAT_DIGITS = 12
FORMAT_VERSION = 1

# === REPORT GRIDS ===
# Marginal-exponent grid and theta steps used by the Case 3 part of `report`
REPORT_K_GRID = (0.1, 4.0, 40)
REPORT_THETA_STEPS = 48
