"""
Settings for the cavity_qed project.

Environment variables are read once at import time (a ``.env`` file in the
repository root is honoured); numerical tolerances are plain constants so
runs are reproducible regardless of the shell they start from.

Units used throughout: time in microseconds, angular frequencies in
rad/microsecond. Experimental "kHz" figures are read as 10^3 rad/s, so a
dispersive frequency of 6.25 kHz is 6.25e-3 rad/us.
"""

import math
import os

from dotenv import load_dotenv

# Load the .env file
load_dotenv()

# Build paths inside the project like this: os.path.join(BASE_DIR, ...)
BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

# Default directory for CSV output; the CLI --out flag overrides it.
OUTPUT_DIR = os.getenv("CAVITY_QED_OUTPUT_DIR", os.path.join(BASE_DIR, "output"))

LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"


# Density matrix invariants

HERMITICITY_TOLERANCE = 1e-12
TRACE_TOLERANCE = 1e-10
POSITIVITY_TOLERANCE = -1e-9
ORACLE_POSITIVITY_TOLERANCE = -1e-7
# Eigenvalue positivity checks above this dimension are left to the
# explicit invariant suites.
POSITIVITY_CHECK_MAX_DIM = 600


# Fock space truncation

TAIL_TOLERANCE = 1e-10
CONVERGENCE_STEP = 5
CONVERGENCE_TOLERANCE = 1e-6
CONVERGENCE_MAX_ROUNDS = 10


# Dissipative map

# |(2*gamma + i*omega*lambda)*tau| below which F is evaluated by its series
SERIES_THRESHOLD = 1e-6


# Entanglement

SUPPORT_TOLERANCE = 1e-10
DISCARDED_WARNING = 1e-10
DISCARDED_FLAG = 1e-3
MONOGAMY_PURITY = 1 - 1e-6


# Dispersive approximation: warn when |Delta| / (Omega sqrt(n + 1)) is below this
DISPERSIVE_RATIO_THRESHOLD = 2.0


# Experimental parameter set (rad/us, us)

DEFAULT_OMEGA_A = 5.11e4
DEFAULT_DELTA = 0.1
DEFAULT_RABI = 0.025
DEFAULT_DISPERSIVE = DEFAULT_RABI**2 / DEFAULT_DELTA
DEFAULT_STAGE_DURATIONS = (30.0, 10.0, 10.0, 10.0, 30.0)
DEFAULT_AMPLITUDE = 0.5
DEFAULT_RAMSEY_ANGLE = math.pi / 4
DEFAULT_SAMPLES = 181


# celery configuration

CELERY_BROKER_URL = os.getenv("CELERY_BROKER_URL", "redis://localhost:6379/0")
CELERY_RESULT_BACKEND = os.getenv("CELERY_RESULT_BACKEND", CELERY_BROKER_URL)
CELERY_ACCEPT_CONTENT = ["json"]
CELERY_TASK_SERIALIZER = "json"
CELERY_RESULT_SERIALIZER = "json"
