import numpy as np
import pytest

from ridg import _kernels
from ridg.corrector import LinearScheme
from ridg.linear_predictor import AdvectionConfig, Scheme

rng = np.random.default_rng(5)
needs_numba = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not installed")


def test_backend_name():
    assert _kernels.backend() in ("numba", "numpy")


@needs_numba
@pytest.mark.parametrize("shape,nu", [((9,), (0.7,)), ((5, 4), (0.5, -0.3)), ((3, 4, 3), (0.2, 0.2, 0.2))])
def test_stencil_backends_agree(shape, nu):
    offsets, blocks = LinearScheme(Scheme.RIDG, 2, AdvectionConfig(nu)).update_stencil()
    src = rng.normal(size=shape + (blocks.shape[1],))
    a = _kernels.stencil_apply_numpy(src, offsets, blocks)
    b = _kernels.stencil_apply_numba(src, offsets, blocks)
    assert np.abs(a - b).max() < 1e-12


def test_stencil_identity_shift():
    src = rng.normal(size=(6, 2))
    out = _kernels.stencil_apply(src, np.array([[1]]), np.eye(2)[None])
    assert np.allclose(out, np.roll(src, -1, axis=0))


@needs_numba
def test_rusanov_backends_agree():
    a, b = rng.normal(size=200), rng.normal(size=200)
    for x, y in zip(_kernels.burgers_rusanov_numpy(a, b), _kernels.burgers_rusanov_numba(a, b)):
        assert np.allclose(x, y, atol=0, rtol=0)
