"""Structured cell-centered grid and ghost-cell extension rules.

Arrays are indexed ``[i, j]`` with ``i`` along x and ``j`` along y.
Cell centers sit at ``((i + 1/2) dx, (j + 1/2) dy)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PERIODIC = "periodic"
PHYSICAL = "physical"

#: ghost-layer width; the MUSCL reconstruction needs two cells
NG = 2


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    nx: int
    ny: int
    lx: float
    ly: float
    boundary_mode: str = PERIODIC
    dx: float = field(init=False)
    dy: float = field(init=False)

    def __post_init__(self):
        if self.nx < 8 or self.ny < 8:
            raise GridError(f"need at least 8 cells per direction, got {self.nx}x{self.ny}")
        if self.lx <= 0 or self.ly <= 0:
            raise GridError("domain extents must be positive")
        if self.boundary_mode not in (PERIODIC, PHYSICAL):
            raise GridError(f"unknown boundary mode {self.boundary_mode!r}")
        object.__setattr__(self, "dx", self.lx / self.nx)
        object.__setattr__(self, "dy", self.ly / self.ny)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    @property
    def periodic(self) -> bool:
        return self.boundary_mode == PERIODIC

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Meshgrid of cell-center coordinates, shape (nx, ny) each."""
        x = (np.arange(self.nx) + 0.5) * self.dx
        y = (np.arange(self.ny) + 0.5) * self.dy
        return np.meshgrid(x, y, indexing="ij")

    def compatible(self, other: "Grid") -> bool:
        return (
            self.shape == other.shape
            and np.isclose(self.lx, other.lx)
            and np.isclose(self.ly, other.ly)
            and self.boundary_mode == other.boundary_mode
        )


def require_same_grid(a, b):
    ga = a if isinstance(a, Grid) else a.grid
    gb = b if isinstance(b, Grid) else b.grid
    if ga is not gb and not ga.compatible(gb):
        raise GridError("operands live on different grids")


# --- ghost extension -------------------------------------------------------
#
# Extension modes for a single axis:
#   periodic : wrap-around
#   even     : mirror across the boundary face (discrete homogeneous Neumann)
#   odd      : anti-mirror (zero value at the face; no-slip velocity)
#   extrap   : quadratic extrapolation through the first three interior
#              cells; makes a central difference at the boundary cell equal
#              to the one-sided second-order formula


def _extend_axis(a: np.ndarray, axis: int, mode: str, width: int = NG) -> np.ndarray:
    if width > a.shape[axis]:
        raise GridError("ghost width exceeds interior size")
    a = np.moveaxis(a, axis, 0)
    if mode == "periodic":
        lo, hi = a[-width:], a[:width]
    elif mode == "even":
        lo, hi = a[width - 1 :: -1], a[: -width - 1 : -1]
    elif mode == "odd":
        lo, hi = -a[width - 1 :: -1], -a[: -width - 1 : -1]
    elif mode == "extrap":
        # p quadratic through cells 0,1,2 evaluated at -1 and -2
        g1_lo = 3.0 * a[0] - 3.0 * a[1] + a[2]
        g2_lo = 6.0 * a[0] - 8.0 * a[1] + 3.0 * a[2]
        g1_hi = 3.0 * a[-1] - 3.0 * a[-2] + a[-3]
        g2_hi = 6.0 * a[-1] - 8.0 * a[-2] + 3.0 * a[-3]
        lo = np.stack([g2_lo, g1_lo][2 - width :])
        hi = np.stack([g1_hi, g2_hi][:width])
    else:
        raise GridError(f"unknown extension mode {mode!r}")
    out = np.concatenate([lo, a, hi], axis=0)
    return np.moveaxis(out, 0, axis)


def extend(a: np.ndarray, mode_x: str, mode_y: str, width: int = NG) -> np.ndarray:
    """Pad a (nx, ny) interior array with ghost layers along both axes."""
    return _extend_axis(_extend_axis(a, 0, mode_x, width), 1, mode_y, width)


def extension_mode(grid: Grid, kind: str) -> str:
    """Extension rule for a field of the given kind on this grid.

    kind: 'even', 'odd' or 'generic'. Periodic grids always wrap; on
    physical grids 'generic' uses quadratic extrapolation (one-sided
    differencing at the boundary), while 'even'/'odd' are the reflection
    rules of the no-slip / zero-flux boundary conditions.
    """
    if grid.periodic:
        return "periodic"
    if kind == "generic":
        return "extrap"
    if kind in ("even", "odd"):
        return kind
    raise GridError(f"unknown field kind {kind!r}")
