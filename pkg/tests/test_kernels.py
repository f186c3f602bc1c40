"""Kernel backends: numerical correctness against naive oracles, and
bitwise agreement between the compiled and pure implementations."""

import numpy as np
import pytest

from oldb2d import parallel
from oldb2d.kernels import pure

try:
    from oldb2d.kernels import _core
    BACKENDS = [pure, _core]
except ImportError:
    _core = None
    BACKENDS = [pure]


@pytest.fixture(params=BACKENDS, ids=lambda m: getattr(m, "BACKEND", "compiled"))
def impl(request):
    return request.param


def naive_pairwise(a):
    """Reference pairwise tree, independent loop implementation."""
    vals = list(a)
    if not vals:
        return 0.0
    # pad each leaf block to a power of two with zeros, fold pairwise
    def fold(block):
        n = 1
        while n < len(block):
            n *= 2
        block = block + [0.0] * (n - len(block))
        while len(block) > 1:
            block = [block[i] + block[i + 1] for i in range(0, len(block), 2)]
        return block[0]
    sums = [fold(vals[i:i + 1024]) for i in range(0, len(vals), 1024)]
    return fold(sums)


def test_pairwise_sum_matches_naive_tree(impl):
    rng = np.random.default_rng(1)
    for n in (1, 5, 1023, 1024, 1025, 4096, 10_000):
        a = rng.standard_normal(n)
        assert impl.pairwise_sum(a) == naive_pairwise(list(a))


def test_pairwise_sum_empty(impl):
    assert impl.pairwise_sum(np.empty(0)) == 0.0


def test_backends_bitwise_identical():
    if _core is None:
        pytest.skip("compiled backend unavailable")
    rng = np.random.default_rng(2)
    a = rng.standard_normal((37, 53))
    p = np.pad(a, 1, mode="wrap")
    assert np.array_equal(pure.laplacian(p, 0.1, 0.2), _core.laplacian(p, 0.1, 0.2))
    assert np.array_equal(pure.ddx(p, 0.1), _core.ddx(p, 0.1))
    assert np.array_equal(pure.ddy(p, 0.2), _core.ddy(p, 0.2))
    phix = np.pad(a, ((2, 2), (0, 0)), mode="wrap")
    phiy = np.pad(a, ((0, 0), (2, 2)), mode="wrap")
    uf = rng.standard_normal((38, 53))
    vf = rng.standard_normal((37, 54))
    assert np.array_equal(pure.muscl_div_x(phix, uf, 0.1),
                          _core.muscl_div_x(phix, uf, 0.1))
    assert np.array_equal(pure.muscl_div_y(phiy, vf, 0.2),
                          _core.muscl_div_y(phiy, vf, 0.2))
    big = rng.standard_normal(300_000)
    assert pure.pairwise_sum(big) == _core.pairwise_sum(big)


def test_laplacian_exact_on_quadratic(impl):
    # u = x^2 + 3 y^2 has Laplacian 8 under the 5-point stencil exactly
    nx, ny, dx, dy = 16, 12, 0.1, 0.2
    x = np.arange(-1, nx + 1) * dx
    y = np.arange(-1, ny + 1) * dy
    p = x[:, None] ** 2 + 3.0 * y[None, :] ** 2
    lap = impl.laplacian(p, dx, dy)
    assert np.allclose(lap, 8.0, atol=1e-10)


def test_ddx_ddy_exact_on_linear(impl):
    nx, ny, dx, dy = 9, 7, 0.3, 0.5
    x = np.arange(-1, nx + 1) * dx
    y = np.arange(-1, ny + 1) * dy
    p = 2.0 * x[:, None] - 5.0 * y[None, :]
    assert np.allclose(impl.ddx(p, dx), 2.0, atol=1e-12)
    assert np.allclose(impl.ddy(p, dy), -5.0, atol=1e-12)


def naive_muscl_div_x(phi, uf, dx):
    """Loop reference for the x-direction MUSCL/minmod flux divergence."""
    nxp4, ny = phi.shape
    nx = nxp4 - 4
    out = np.zeros((nx, ny))
    def minmod(a, b):
        if a * b <= 0:
            return 0.0
        return a if abs(a) < abs(b) else b
    for j in range(ny):
        flux = np.zeros(nx + 1)
        for f in range(nx + 1):
            il, ir = f + 1, f + 2  # padded indices of the cells astride face f
            sl = minmod(phi[il, j] - phi[il - 1, j], phi[il + 1, j] - phi[il, j])
            sr = minmod(phi[ir, j] - phi[ir - 1, j], phi[ir + 1, j] - phi[ir, j])
            left = phi[il, j] + 0.5 * sl
            right = phi[ir, j] - 0.5 * sr
            flux[f] = uf[f, j] * (left if uf[f, j] >= 0 else right)
        for i in range(nx):
            out[i, j] = (flux[i + 1] - flux[i]) / dx
    return out


def test_muscl_div_x_matches_naive(impl):
    rng = np.random.default_rng(3)
    phi = rng.standard_normal((20 + 4, 9))
    uf = rng.standard_normal((21, 9))
    got = impl.muscl_div_x(phi, uf, 0.25)
    want = naive_muscl_div_x(phi, uf, 0.25)
    assert np.allclose(got, want, rtol=0, atol=1e-14)


def test_muscl_div_y_is_transposed_x(impl):
    rng = np.random.default_rng(4)
    phi = rng.standard_normal((9, 20 + 4))
    vf = rng.standard_normal((9, 21))
    got = impl.muscl_div_y(phi, vf, 0.25)
    want = naive_muscl_div_x(phi.T.copy(), vf.T.copy(), 0.25).T
    assert np.allclose(got, want, rtol=0, atol=1e-14)


def test_deterministic_sum_thread_invariant():
    rng = np.random.default_rng(5)
    a = rng.standard_normal(1_000_003)
    results = []
    for n in (1, 2, 8):
        parallel.set_num_threads(n)
        results.append(parallel.deterministic_sum(a))
    parallel.set_num_threads(1)
    assert results[0] == results[1] == results[2]


def test_deterministic_sum_matches_tree():
    rng = np.random.default_rng(6)
    a = rng.standard_normal(5000)
    assert parallel.deterministic_sum(a) == naive_pairwise(list(a))
