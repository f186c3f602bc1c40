"""Semi-discrete right-hand sides, time-step control and the explicit
SSP-RK2 integrator.

Advective fluxes use MUSCL/minmod upwinding; diffusion, pressure and
elastic terms use central stencils. Boundary conditions enter through the
ghost-extension rules (periodic wrap, or odd/even reflection for no-slip
velocity and zero-flux scalars).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import kernels
from .constitutive import ModelParams, polymer_pressure_q, pressure
from .fields import (advective_div_array, face_velocities, grad_array,
                     integrate_array, laplacian_array, pad1)
from .grid import Grid
from .state import Accumulators, NumericalError, State, Trajectory


class BlowupAbort(RuntimeError):
    """Raised when a blow-up monitor crosses its configured threshold."""

    def __init__(self, monitor: str, value: float, threshold: float,
                 trajectory: Trajectory | None = None):
        super().__init__(f"blow-up monitor {monitor} crossed threshold: "
                         f"{value:g} > {threshold:g}")
        self.monitor = monitor
        self.value = value
        self.threshold = threshold
        self.trajectory = trajectory


@dataclass
class SolverOptions:
    cfl: float = 0.4
    dt: float | None = None            # fixed step; None = CFL-adaptive
    rho_floor: float | None = None     # absolute; default 1e-10 * mean(rho0)
    eta_clip_tol: float | None = None  # absolute; default 1e-12 * max|eta0|
    sup_rho_threshold: float = np.inf
    snapshot_stride: int = 10
    max_steps: int = 10_000_000

    def resolved(self, init: State, grid: Grid) -> "SolverOptions":
        out = SolverOptions(**self.__dict__)
        if out.rho_floor is None:
            out.rho_floor = 1e-10 * float(np.mean(init.rho))
        if out.eta_clip_tol is None:
            out.eta_clip_tol = 1e-12 * float(np.max(np.abs(init.eta)))
        return out


ForceFn = Callable[[float], tuple[np.ndarray, np.ndarray]]
SourceFn = Callable[[float], tuple[np.ndarray, ...]]


def _modes(grid: Grid) -> dict:
    if grid.periodic:
        return {k: "periodic" for k in ("rho", "u", "eta", "tau", "gen")}
    return {"rho": "even", "u": "odd", "eta": "even", "tau": "even", "gen": "extrap"}


def _pad(a: np.ndarray, mode: str) -> np.ndarray:
    from .grid import extend
    return extend(a, mode, mode, width=1)


def compute_rhs(state: State, prm: ModelParams, opts: SolverOptions,
                force: tuple[np.ndarray, np.ndarray] | None = None,
                sources: tuple[np.ndarray, ...] | None = None) -> tuple[np.ndarray, ...]:
    """Semi-discrete RHS of the full system at the state's own time."""
    grid = state.grid
    m = _modes(grid)
    dx, dy = grid.dx, grid.dy

    rho, mx, my, eta = state.rho, state.mx, state.my, state.eta
    t11, t12, t22 = state.t11, state.t12, state.t22
    ux, uy = state.velocity(opts.rho_floor or 0.0)
    uf, vf = face_velocities(ux, uy, grid)

    # continuity and polymer density
    drho = -advective_div_array(rho, uf, vf, grid, "even")
    deta = (-advective_div_array(eta, uf, vf, grid, "even")
            + prm.eps * laplacian_array(eta, grid, m["eta"]))

    # momentum: advection + pressure/polymer-pressure gradients + viscosity
    # + elastic stress divergence
    ptot = pressure(rho, prm) + polymer_pressure_q(np.maximum(eta, 0.0), prm)
    pp = _pad(ptot, m["rho"])
    pux, puy = _pad(ux, m["u"]), _pad(uy, m["u"])
    gxx, gxy = kernels.ddx(pux, dx), kernels.ddy(pux, dy)
    gyx, gyy = kernels.ddx(puy, dx), kernels.ddy(puy, dy)
    divu = gxx + gyy
    pdiv = _pad(divu, m["gen"])
    p11, p12, p22 = (_pad(t11, m["tau"]), _pad(t12, m["tau"]), _pad(t22, m["tau"]))

    dmx = (-advective_div_array(mx, uf, vf, grid, "odd")
           - kernels.ddx(pp, dx)
           + prm.mu * kernels.laplacian(pux, dx, dy)
           + prm.nu * kernels.ddx(pdiv, dx)
           + kernels.ddx(p11, dx) + kernels.ddy(p12, dy))
    dmy = (-advective_div_array(my, uf, vf, grid, "odd")
           - kernels.ddy(pp, dy)
           + prm.mu * kernels.laplacian(puy, dx, dy)
           + prm.nu * kernels.ddy(pdiv, dy)
           + kernels.ddx(p12, dx) + kernels.ddy(p22, dy))
    if force is not None:
        fx, fy = force
        dmx = dmx + rho * fx
        dmy = dmy + rho * fy

    # extra stress: conservative advection, upper-convected deformation,
    # diffusion, relaxation toward k eta I
    a11 = gxx * t11 + gxy * t12
    a12 = gxx * t12 + gxy * t22
    a21 = gyx * t11 + gyy * t12
    a22 = gyx * t12 + gyy * t22
    relax = 1.0 / (2.0 * prm.lam)
    dt11 = (-advective_div_array(t11, uf, vf, grid, "even")
            + 2.0 * a11 + prm.eps * kernels.laplacian(p11, dx, dy)
            + relax * (prm.k * eta - t11))
    dt12 = (-advective_div_array(t12, uf, vf, grid, "even")
            + (a12 + a21) + prm.eps * kernels.laplacian(p12, dx, dy)
            - relax * t12)
    dt22 = (-advective_div_array(t22, uf, vf, grid, "even")
            + 2.0 * a22 + prm.eps * kernels.laplacian(p22, dx, dy)
            + relax * (prm.k * eta - t22))

    out = (drho, dmx, dmy, deta, dt11, dt12, dt22)
    if sources is not None:
        out = tuple(o + s for o, s in zip(out, sources))
    return out


def cfl_dt(state: State, prm: ModelParams, cfl: float = 0.4,
           rho_floor: float = 0.0) -> float:
    """Advective and diffusive step limits combined.

    dt = cfl * min( dx/(|u|+c_s), dy/(|v|+c_s),
                    dx^2 / (4 max(eps, mu/rho_min, (mu+nu)/rho_min)), same in y )
    with sound speed c_s = sqrt(gamma p / rho).
    """
    grid = state.grid
    rho = np.maximum(state.rho, rho_floor) if rho_floor > 0 else state.rho
    ux, uy = state.mx / rho, state.my / rho
    cs = np.sqrt(prm.gamma * pressure(np.maximum(state.rho, 0.0), prm) / rho)
    adv_x = grid.dx / np.max(np.abs(ux) + cs)
    adv_y = grid.dy / np.max(np.abs(uy) + cs)
    rho_min = float(np.min(rho))
    diff = max(prm.eps, prm.mu / rho_min, (prm.mu + prm.nu) / rho_min)
    diff_x = grid.dx ** 2 / (4.0 * diff)
    diff_y = grid.dy ** 2 / (4.0 * diff)
    dt = cfl * min(adv_x, adv_y, diff_x, diff_y)
    if not dt > 0:
        raise NumericalError(f"nonpositive time step {dt:g} at t={state.t:g}")
    return float(dt)


def _apply_floors(arrays: list[np.ndarray], opts: SolverOptions) -> float:
    """Floor rho, clip eta undershoots; returns clipped eta amount (cells)."""
    rho, eta = arrays[0], arrays[3]
    np.maximum(rho, opts.rho_floor, out=rho)
    emin = float(np.min(eta))
    if emin < 0.0:
        if -emin > opts.eta_clip_tol:
            raise NumericalError(
                f"eta undershoot {emin:g} exceeds clip tolerance {opts.eta_clip_tol:g}")
        clipped = -float(np.sum(np.minimum(eta, 0.0)))
        np.maximum(eta, 0.0, out=eta)
        return clipped
    return 0.0


def step_ssprk2(state: State, dt: float, prm: ModelParams, opts: SolverOptions,
                force_fn: ForceFn | None = None,
                source_fn: SourceFn | None = None) -> tuple[State, float]:
    """One two-stage SSP Runge-Kutta step; returns (new state, clipped eta)."""
    grid = state.grid
    f0 = force_fn(state.t) if force_fn else None
    s0 = source_fn(state.t) if source_fn else None
    k0 = compute_rhs(state, prm, opts, f0, s0)

    stage1 = [a + dt * da for a, da in zip(state.arrays(), k0)]
    clipped = _apply_floors(stage1, opts)
    s1 = State(grid, state.t + dt, *stage1)
    s1.check_finite()

    f1 = force_fn(s1.t) if force_fn else None
    src1 = source_fn(s1.t) if source_fn else None
    k1 = compute_rhs(s1, prm, opts, f1, src1)

    final = [0.5 * a + 0.5 * (b + dt * db)
             for a, b, db in zip(state.arrays(), s1.arrays(), k1)]
    clipped += _apply_floors(final, opts)
    out = State(grid, state.t + dt, *final)
    out.check_finite()
    return out, clipped * grid.cell_area


def balance_rates(state: State, prm: ModelParams, opts: SolverOptions,
                  force: tuple[np.ndarray, np.ndarray] | None = None) -> dict:
    """Instantaneous integrands of the energy-balance accumulators."""
    grid = state.grid
    m = _modes(grid)
    ux, uy = state.velocity(opts.rho_floor or 0.0)
    gxx, gxy = grad_array(ux, grid, m["u"] if grid.periodic else "odd")
    gyx, gyy = grad_array(uy, grid, m["u"] if grid.periodic else "odd")
    grad_u_sq = gxx ** 2 + gxy ** 2 + gyx ** 2 + gyy ** 2
    div_sq = (gxx + gyy) ** 2
    visc = integrate_array(prm.mu * grad_u_sq + prm.nu * div_sq, grid)

    eta = np.maximum(state.eta, 0.0)
    sqx, sqy = grad_array(np.sqrt(eta), grid, "even" if not grid.periodic else "periodic")
    ex, ey = grad_array(eta, grid, "even" if not grid.periodic else "periodic")
    poly = 2.0 * prm.eps * integrate_array(
        2.0 * prm.kL * (sqx ** 2 + sqy ** 2) + prm.zfrak * (ex ** 2 + ey ** 2), grid)

    relax = integrate_array(state.t11 + state.t22, grid) / (4.0 * prm.lam)
    src_eta = prm.k * prm.d / (4.0 * prm.lam) * integrate_array(eta, grid)
    src_f = 0.0
    if force is not None:
        src_f = integrate_array(state.rho * (force[0] * ux + force[1] * uy), grid)
    return {"visc": visc, "poly": poly, "relax": relax,
            "src_f": src_f, "src_eta": src_eta}


def run_simulation(init: State, prm: ModelParams, t_end: float,
                   opts: SolverOptions | None = None,
                   force_fn: ForceFn | None = None,
                   source_fn: SourceFn | None = None,
                   step_callback=None) -> Trajectory:
    """Integrate to t_end, accumulating energy-balance integrals with the
    trapezoidal rule and storing snapshots at the configured stride.

    Raises :class:`BlowupAbort` when sup rho crosses the configured
    threshold (the trajectory so far is attached to the exception).
    """
    opts = (opts or SolverOptions()).resolved(init, init.grid)
    traj = Trajectory(init.grid)
    acc = Accumulators()
    state = init.copy()
    state.check_finite()
    traj.add(state, acc)

    rates = balance_rates(state, prm, opts,
                          force_fn(state.t) if force_fn else None)
    nstep = 0
    while state.t < t_end - 1e-14 * max(t_end, 1.0):
        dt = opts.dt if opts.dt is not None else cfl_dt(state, prm, opts.cfl, opts.rho_floor)
        dt = min(dt, t_end - state.t)
        state, clipped = step_ssprk2(state, dt, prm, opts, force_fn, source_fn)
        acc.clipped_eta += clipped

        new_rates = balance_rates(state, prm, opts,
                                  force_fn(state.t) if force_fn else None)
        for key in ("visc", "poly", "relax", "src_f", "src_eta"):
            val = getattr(acc, key) + 0.5 * dt * (rates[key] + new_rates[key])
            setattr(acc, key, val)
        rates = new_rates

        sup_rho = float(np.max(state.rho))
        if sup_rho > opts.sup_rho_threshold:
            traj.aborted = "sup_rho"
            traj.add(state, acc)
            raise BlowupAbort("sup_rho", sup_rho, opts.sup_rho_threshold, traj)

        nstep += 1
        at_end = state.t >= t_end - 1e-14 * max(t_end, 1.0)
        if nstep % opts.snapshot_stride == 0 or at_end:
            traj.add(state, acc)
        if step_callback is not None:
            step_callback(state, acc)
        if nstep >= opts.max_steps:
            raise NumericalError(f"exceeded max_steps={opts.max_steps} before t_end")
    return traj
