import functools

import pytest

from qes2.geometry import build_solution

# (m, lambda, c) of the five representative sphere profiles
REFERENCE_SETS = [
    (3.0, 1.0, 1.0),
    (3.0, -1.0, 3.0),
    (-3.0, 1.0, -0.2),
    (-0.5, 1.0, 3.0),
    (-1.0, 1.0, 1.0),
]
KERR = (2.0, 0.0, 1.0)


@functools.lru_cache(maxsize=None)
def solution(m, lam, c):
    return build_solution(m, lam, c)


def set_id(params):
    m, lam, c = params
    return f"m={m:g},lam={lam:g},c={c:g}"


@pytest.fixture(params=REFERENCE_SETS, ids=set_id)
def reference_solution(request):
    return solution(*request.param)


@pytest.fixture(params=REFERENCE_SETS + [KERR], ids=set_id)
def any_solution(request):
    return solution(*request.param)


@pytest.fixture
def kerr():
    return solution(*KERR)
