from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from margulis.groups import make_schottky, random_deformation
from margulis.lorentz import boost, random_isometry, rotation

settings.register_profile(
    "default", max_examples=60, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

BETA = math.sqrt(2.0) / 2.0

finite = st.floats(-10.0, 10.0, allow_nan=False, allow_infinity=False)
vectors = st.lists(finite, min_size=3, max_size=3).map(np.array)
seeds = st.integers(0, 2**32 - 1)


def random_hyperbolic(rng, t_range=(0.3, 2.0)):
    r = rotation(rng.uniform(0, 2 * math.pi))
    f = random_isometry(rng)
    return f @ r @ boost(rng.uniform(*t_range)) @ r.inverse() @ f.inverse()


def schottky_deformation(seed: int, rank: int = 2):
    rng = np.random.default_rng(seed)
    return random_deformation(make_schottky(rank, rng), rng)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE: dict[int, str] = {}


def record(n: int, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}"
    ACCEPTANCE[n] = line
    print(line, flush=True)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
