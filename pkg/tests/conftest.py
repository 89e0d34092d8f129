import sys
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from toeplitz_reduce import construct, seq  # noqa: E402

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def bernoulli_instance():
    """k=2, bernoulli seed 42, epsilon 3/10, two stages (l_1=20, l_2=2400)."""
    a = seq.bernoulli(2, 42)
    b, trace = construct.build(a, Fraction(3, 10), 2)
    return a, b, trace


@pytest.fixture(scope="session")
def hand_instance():
    """periodic 1,2,2 with l_1=4, l_2=16; epsilon 9 keeps the default epsilon_M rule valid."""
    a = seq.periodic(2, [1, 2, 2])
    b, trace = construct.build(a, Fraction(9), 2, l_overrides={1: 4, 2: 16}, window_range=(-16, 15))
    return a, b, trace
