import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "methods"))

from sequence_core import CylinderMeasure, CocycleSequence, MatrixCocycle  # noqa: E402
from shift_core import Sft  # noqa: E402

CONFIGS = Path(__file__).resolve().parents[1] / "materials" / "configs"
GOLDEN_RATIO = (1 + np.sqrt(5)) / 2


@pytest.fixture
def full2():
    return Sft.full(2)


@pytest.fixture
def golden():
    return Sft.golden_mean()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def cocycle_seq(full2):
    cocycle = MatrixCocycle(np.array([[[2.0, 1.0], [1.0, 1.0]], [[1.0, 1.0], [1.0, 2.0]]]))
    return CocycleSequence(full2, cocycle)


@pytest.fixture
def positive_hmm(full2):
    """Strictly positive 2-state hidden-Markov measure on the full 2-shift."""
    return CylinderMeasure(
        full2,
        np.array([0.5, 0.5]),
        np.array([[[0.5, 0.1], [0.2, 0.2]], [[0.2, 0.2], [0.1, 0.5]]]),
    )
