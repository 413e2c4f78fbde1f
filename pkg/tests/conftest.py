from pathlib import Path

import pytest
from hypothesis import settings, strategies as st

from ordinalvm.assembler import assemble
from ordinalvm.ordinal import Ordinal

settings.register_profile("default", deadline=None, max_examples=200)
settings.load_profile("default")

PROGRAMS = Path(__file__).resolve().parent.parent / "programs"

# the waiter with a scratch register for the unconditional jump
WAITER_T = "0: BEQ x y 3\n1: INC x\n2: BEQ t t 0\n3: HALT"


def ordinals(max_degree=3, max_coef=6, max_terms=3):
    term = st.tuples(st.integers(0, max_degree), st.integers(0, max_coef))
    return st.lists(term, max_size=max_terms).map(Ordinal)


@pytest.fixture
def waiter():
    return assemble((PROGRAMS / "waiter.ovm").read_text())


@pytest.fixture
def waiter_t():
    return assemble(WAITER_T)
