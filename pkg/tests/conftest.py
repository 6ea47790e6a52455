import numpy as np
import pytest

from georough import _config
from georough.lyndon import bracket_matrix
from georough.tensor import GroupElement, LieElement, flat_exp, offsets, tensor_size


@pytest.fixture(params=["numba", "numpy"])
def backend(request, monkeypatch):
    monkeypatch.setattr(_config, "USE_NUMBA", request.param == "numba")
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_lie(rng, d, m, scale=1.0):
    """A random Lie element, built from Lyndon brackets with per-level scales."""
    off = offsets(d, m)
    x = np.zeros(tensor_size(d, m))
    for k in range(1, m + 1):
        B = bracket_matrix(d, k)
        x[off[k]:off[k + 1]] = B @ (rng.normal(size=B.shape[1]) * scale**k)
    return LieElement._trusted(d, m, x)


def random_group(rng, d, m, scale=1.0):
    ell = random_lie(rng, d, m, scale)
    return GroupElement._trusted(d, m, flat_exp(ell.data, d, m))


def random_points(rng, d, k):
    return np.cumsum(np.vstack([np.zeros(d), rng.normal(size=(k, d))]), axis=0)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.RESULTS):
        ok, detail = mod.RESULTS[k]
        terminalreporter.write_line(f"CRITERION {k}: {'PASS' if ok else 'FAIL'}  {detail}")
