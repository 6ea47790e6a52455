"""Global tolerances and the numba switch.

Tolerances are module-level constants; override them per process with
environment variables (``GEOROUGH_CERT_TOL``, ``GEOROUGH_ARITH_TOL``), or
pass explicit ``tol=`` arguments where an operation accepts one.
"""
import os

#: certification tolerance for group-likeness (Dynkin residual)
CERT_TOL = float(os.environ.get("GEOROUGH_CERT_TOL", "1e-9"))
#: algebraic identities (inverse, exp/log round trips, Chen)
ARITH_TOL = float(os.environ.get("GEOROUGH_ARITH_TOL", "1e-12"))
#: closure of group-likeness under products/inverse/dilation
CLOSURE_TOL = 1e-8

MAX_STEP = 5
MAX_DIM = 6


def _numba_wanted() -> bool:
    flag = os.environ.get("GEOROUGH_DISABLE_NUMBA", "").strip().lower()
    return flag not in ("1", "true", "yes", "on")


USE_NUMBA = _numba_wanted()
