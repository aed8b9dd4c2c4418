from fractions import Fraction

import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from crnhopf.dsl import NetworkSource, Reaction

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

NAMES = ("X", "Y", "Z", "W", "A_1")

rates = st.builds(Fraction, st.integers(1, 50), st.integers(1, 20))


@st.composite
def networks(draw, max_species: int = 3, max_coeff: int = 3, max_reactions: int = 6):
    n = draw(st.integers(1, max_species))
    species = tuple(draw(st.permutations(NAMES))[:n])
    cplx = st.tuples(*[st.integers(0, max_coeff)] * n)
    edges = draw(
        st.lists(st.tuples(cplx, cplx), min_size=1, max_size=max_reactions, unique=True).filter(
            lambda es: all(a != b for a, b in es)
        )
    )
    return NetworkSource(species, tuple(Reaction(a, b, draw(rates)) for a, b in edges))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
