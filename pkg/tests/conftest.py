import numpy as np
import pytest

from todex import example_library, make_grid, sample_smooth


@pytest.fixture(scope="session")
def library():
    return example_library()


def interior_mask(n_nodes, pad=1):
    """Lower-triangular boolean mask with ``pad`` boundary rows/cols removed."""
    mask = np.tril(np.ones((n_nodes, n_nodes), dtype=bool))
    mask[:pad, :] = False
    mask[-pad:, :] = False
    mask[:, :pad] = False
    mask[:, -pad:] = False
    return mask


def kernel_diff(op, fn, pad=1):
    """Max abs difference between an operator and a sampled kernel, interior only."""
    ref = sample_smooth(op.grid, fn)
    mask = interior_mask(op.grid.n_nodes, pad)
    return float(np.max(np.abs((op.data - ref.data)[mask])))


def build(spec, n_nodes=None):
    return spec.build(n_nodes=n_nodes)
