import numpy as np
import pytest

from convsys import GridFn, make_grid


@pytest.fixture
def freq_1024():
    return make_grid(1, -8.0, 8.0, 1024)


@pytest.fixture
def freq_2048():
    return make_grid(1, -16.0, 16.0, 2048)


def l1_distance(fn: GridFn, reference) -> float:
    """L1 distance between a real grid function and a callable truth."""
    x = fn.spec.axis(0)
    ref = reference(x) if callable(reference) else reference
    return float(np.trapezoid(np.abs(fn.values.real - ref), dx=fn.spec.step[0]))


def sup_distance(fn: GridFn, reference, where=None) -> float:
    x = fn.spec.axis(0)
    ref = reference(x) if callable(reference) else reference
    diff = np.abs(fn.values - ref)
    if where is not None:
        diff = diff[where]
    return float(np.max(diff))
