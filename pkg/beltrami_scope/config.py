# beltrami_scope/config.py

import logging
import os

from dotenv import load_dotenv

# --- Load Environment Variables ---
# Load a .env file from the working directory if there is one.
load_dotenv()

# --- Process Settings ---
# Worker cap for seed searches and other embarrassingly parallel sweeps.
BSCOPE_THREADS = max(1, int(os.environ.get("BSCOPE_THREADS", "4")))

BSCOPE_LOG_LEVEL = os.environ.get("BSCOPE_LOG_LEVEL", "WARNING").upper()
logging.getLogger("beltrami_scope").setLevel(BSCOPE_LOG_LEVEL)

# --- Geometry ---
SPD_TOLERANCE = 1e-12
CORE_PATCH_FRACTION = 0.05  # Cartesian interpolation inside r < 0.05 R

# --- Vector Calculus ---
FD_STEP_MIN = 1e-5
FD_STEP_RELATIVE = 1e-4
VANISHING_FIELD_FLOOR = 1e-10
CURL_TOL_ANALYTIC = 1e-6
CURL_TOL_SAMPLED = 5e-3
DIV_TOL_ANALYTIC = 1e-6
DIV_TOL_SAMPLED = 5e-3
LAMBDA_ZERO_RELATIVE = 1e-6

# --- Disc Index ---
# Global calibration sign: the Lundquist field at R = 1 must give slk = -1.
S_STAR = -1
DISC_SCAN_RESOLUTION = 97
MERGE_RADIUS = 1e-4
NEWTON_TOLERANCE = 1e-10
NEWTON_MAX_ITER = 50
WINDING_SAMPLES = 64
WINDING_RADIUS_CAP = 0.1
SIGMA_FLOOR = 1e-8
TRANSVERSE_MIN_ANGLE = 1e-3
BUMP_RETRY_FRACTION = 0.05
PERTURB_RETRY_AMPLITUDE = 1e-3

# --- Boundary ---
BOUNDARY_GRID = 256
MERIDIONAL_TOLERANCE = 1e-5
CLOSED_LEAF_TOLERANCE = 1e-6
INVARIANCE_TOLERANCE = 1e-6

# --- Verification ---
PUSH_OFF_FRACTION = 1e-2
ORACLE_SAMPLES = 512
ORACLE_RESIDUAL_MAX = 0.1
ORBIT_SEEDS = 64
ORBIT_MAX_PERIOD_FACTOR = 50.0
ORBIT_TOLERANCE = 1e-7
ORBIT_CLOSURE_MAX = 1e-6
