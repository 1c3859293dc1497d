import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

from hfgt.boolmat import BoolMatrix, BoolTensor

DATA = Path(__file__).parent / "data"


@pytest.fixture
def toy_expected():
    return json.loads((DATA / "toy_water_expected.json").read_text())


@pytest.fixture
def toy_path():
    return DATA / "toy_water.yaml"


def dense_bool(draw, shape, p=None):
    n = int(np.prod(shape))
    bits = draw(st.lists(st.booleans(), min_size=n, max_size=n))
    return np.array(bits, dtype=np.int8).reshape(shape)


@st.composite
def bool_matrices(draw, max_rows=6, max_cols=6, shape=None):
    if shape is None:
        shape = (draw(st.integers(1, max_rows)), draw(st.integers(1, max_cols)))
    return BoolMatrix.from_dense(dense_bool(draw, shape))


@st.composite
def bool_tensors(draw, max_rank=4, max_dim=4):
    rank = draw(st.integers(1, max_rank))
    dims = tuple(draw(st.integers(1, max_dim)) for _ in range(rank))
    return BoolTensor.from_dense(dense_bool(draw, dims))


def random_dense(rng, shape, p=0.4):
    return (rng.random(shape) < p).astype(np.int8)
