import os
from dotenv import load_dotenv

load_dotenv()

# Working precision for every approximate (mpmath) computation, in significand bits
PRECISION_BITS = int(os.getenv("ELLHEIGHT_PRECISION_BITS", "64"))

TORSION_BOUND = int(os.getenv("ELLHEIGHT_TORSION_BOUND", "16"))

# Doubling budget for geometric canonical heights
GEOM_MAX_DEPTH = int(os.getenv("ELLHEIGHT_GEOM_MAX_DEPTH", "8"))
GEOM_MAX_DEGREE = int(os.getenv("ELLHEIGHT_GEOM_MAX_DEGREE", "4096"))
GEOM_MIN_DEPTH = int(os.getenv("ELLHEIGHT_GEOM_MIN_DEPTH", "4"))

QUAD_TOL = float(os.getenv("ELLHEIGHT_QUAD_TOL", "1e-6"))
QUAD_MAX_ANGULAR_NODES = int(os.getenv("ELLHEIGHT_QUAD_MAX_ANGULAR_NODES", "1024"))

RANK_TOL = float(os.getenv("ELLHEIGHT_RANK_TOL", "1e-6"))
TORSION_HEIGHT_EPS = 1e-10

DEFAULT_JOBS = int(os.getenv("ELLHEIGHT_JOBS", "1"))
LOG_LEVEL = os.getenv("ELLHEIGHT_LOG_LEVEL", "WARNING")

# Printed next to every numeric result
NORMALIZATION_TAG = "norm=hhat~h(x),ln"


def precision_bits(override: int | None = None) -> int:
    return override if override is not None else PRECISION_BITS


def set_precision_bits(bits: int):
    """Process-wide override; exported to the environment so worker processes see it"""
    global PRECISION_BITS
    if bits < 16:
        raise ValueError("precision must be at least 16 bits")
    PRECISION_BITS = bits
    os.environ["ELLHEIGHT_PRECISION_BITS"] = str(bits)
