import numpy as np
import pytest

from oldb2d.constitutive import ModelParams
from oldb2d.grid import Grid
from oldb2d.state import State


@pytest.fixture
def prm():
    return ModelParams()


def periodic_grid(n=32, lx=1.0, ly=1.0):
    return Grid(nx=n, ny=n, lx=lx, ly=ly, boundary_mode="periodic")


def physical_grid(n=32, lx=1.0, ly=1.0):
    return Grid(nx=n, ny=n, lx=lx, ly=ly, boundary_mode="physical")


def smooth_state(grid, prm, amp=1.0):
    """Smooth non-equilibrium state with positive density/eta and PSD stress."""
    X, Y = grid.cell_centers()
    kx = 2 * np.pi / grid.lx
    ky = 2 * np.pi / grid.ly
    s = State.uniform(grid, 1.0, 1.0, k=prm.k)
    s.rho = 1.0 + 0.15 * amp * np.sin(kx * X) * np.cos(ky * Y)
    s.mx = s.rho * 0.1 * amp * np.sin(kx * X) * np.cos(ky * Y)
    s.my = s.rho * (-0.1 * amp * np.cos(kx * X) * np.sin(ky * Y))
    s.eta = 1.0 + 0.1 * amp * np.cos(kx * X) * np.cos(ky * Y)
    s.t11 = prm.k * s.eta + 0.05 * amp * np.sin(kx * X) * np.sin(ky * Y)
    s.t22 = prm.k * s.eta - 0.05 * amp * np.sin(kx * X) * np.sin(ky * Y)
    s.t12 = 0.03 * amp * np.cos(kx * X) * np.cos(ky * Y)
    return s


def random_smooth_state(grid, prm, rng):
    """Random low-mode smooth state (positive rho/eta, PSD-margin stress)."""
    X, Y = grid.cell_centers()
    def noise():
        out = np.zeros(grid.shape)
        for _ in range(3):
            mx_, my_ = rng.integers(1, 4, size=2)
            phx, phy = rng.uniform(0, 2 * np.pi, size=2)
            out += rng.uniform(0.3, 1.0) * np.sin(
                2 * np.pi * mx_ * X / grid.lx + phx) * np.sin(
                2 * np.pi * my_ * Y / grid.ly + phy)
        return out / max(np.max(np.abs(out)), 1e-30)
    s = State.uniform(grid, 1.0, 1.0, k=prm.k)
    s.rho = 1.0 + 0.2 * noise()
    s.eta = 1.0 + 0.2 * noise()
    s.mx = s.rho * 0.1 * noise()
    s.my = s.rho * 0.1 * noise()
    s.t11 = prm.k * s.eta + 0.1 * noise()
    s.t22 = prm.k * s.eta + 0.1 * noise()
    s.t12 = 0.05 * noise()
    return s
