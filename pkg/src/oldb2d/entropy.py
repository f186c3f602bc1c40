"""Relative entropies between a candidate trajectory and a reference
("strong") trajectory, the two equivalent forms of the remainder functional,
the relative-entropy inequality residual, and the Gronwall decay experiment.

The reference must be strictly positive in density and polymer density;
its time derivatives are formed by centered differences of adjacent
snapshots (one-sided second order at the ends).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .constitutive import (DomainError, ModelParams, bregman_G, bregman_H,
                           polymer_potential_G_prime, polymer_pressure_q,
                           polymer_pressure_q_prime, potential_H_prime,
                           pressure, pressure_prime)
from .fields import (advective_div_array, face_velocities, grad_array,
                     integrate_array, laplacian_array)
from .grid import Grid, require_same_grid
from .state import State, Trajectory


class ReferenceError(ValueError):
    pass


def _frob_ip(a11, a12, a22, b11, b12, b22):
    """Frobenius inner product of symmetric tensors stored as 3 planes."""
    return a11 * b11 + 2.0 * a12 * b12 + a22 * b22


def _vel(state: State) -> tuple[np.ndarray, np.ndarray]:
    return state.mx / state.rho, state.my / state.rho


def _check_positive_ref(ref: State) -> None:
    if np.min(ref.rho) <= 0:
        raise ReferenceError("reference density must be strictly positive")
    if np.min(ref.eta) <= 0:
        raise ReferenceError("reference polymer density must be strictly positive")


# --- relative entropies ----------------------------------------------------


def rel_entropy_E1(state: State, ref: State, prm: ModelParams) -> float:
    """Kinetic + pressure-potential relative entropy
    int 1/2 rho |u - u~|^2 + bregman_H(rho, rho~)."""
    require_same_grid(state, ref)
    _check_positive_ref(ref)
    ux, uy = state.velocity(0.0) if np.all(state.rho > 0) else state.velocity(1e-300)
    tux, tuy = _vel(ref)
    kin = 0.5 * state.rho * ((ux - tux) ** 2 + (uy - tuy) ** 2)
    return integrate_array(kin + bregman_H(state.rho, ref.rho, prm), state.grid)


def rel_entropy_E2(state: State, ref: State, prm: ModelParams) -> float:
    require_same_grid(state, ref)
    _check_positive_ref(ref)
    return integrate_array(bregman_G(state.eta, ref.eta, prm), state.grid)


def stress_distance_ET(state: State, ref: State) -> float:
    """int 1/2 |T - T~|^2 (Frobenius)."""
    require_same_grid(state, ref)
    d11, d12, d22 = state.t11 - ref.t11, state.t12 - ref.t12, state.t22 - ref.t22
    return integrate_array(0.5 * _frob_ip(d11, d12, d22, d11, d12, d22), state.grid)


def combined_E(state: State, ref: State, prm: ModelParams) -> float:
    return (rel_entropy_E1(state, ref, prm) + rel_entropy_E2(state, ref, prm)
            + stress_distance_ET(state, ref))


# --- reference trajectories and their time derivatives ---------------------


@dataclass
class RefTrajectory:
    """A trajectory designated as the strong reference solution.

    Validates strict positivity of density and polymer density at every
    snapshot and exposes centered-difference time derivatives of the
    quantities the remainder needs (u~, H'(rho~), G'(eta~))."""

    traj: Trajectory

    def __post_init__(self):
        if len(self.traj) < 2:
            raise ReferenceError("reference needs at least two snapshots")
        for s in self.traj.states:
            _check_positive_ref(s)
        dts = np.diff(self.traj.times)
        if np.min(dts) <= 0:
            raise ReferenceError("reference snapshot times must increase")

    def check_stride(self, grid: Grid) -> None:
        """Snapshot spacing must not exceed dx, so the O(spacing^2) time
        differencing stays subordinate to the O(dx^2) space discretization."""
        if np.max(np.diff(self.traj.times)) > min(grid.dx, grid.dy) + 1e-12:
            raise ReferenceError(
                "reference snapshot spacing exceeds dx; store snapshots more often")

    def __len__(self) -> int:
        return len(self.traj)

    def state(self, i: int) -> State:
        return self.traj.states[i]

    def time_derivs(self, i: int, prm: ModelParams) -> dict:
        """d/dt of (u~, H'(rho~), G'(eta~)) at snapshot i, second order."""
        times, states = self.traj.times, self.traj.states
        n = len(states)

        def quantities(s: State):
            tux, tuy = _vel(s)
            return (tux, tuy, potential_H_prime(s.rho, prm),
                    polymer_potential_G_prime(s.eta, prm))

        if 0 < i < n - 1:
            # centered over a possibly nonuniform stencil
            t0, t1, t2 = times[i - 1], times[i], times[i + 1]
            q0, q1, q2 = (quantities(states[j]) for j in (i - 1, i, i + 1))
            h1, h2 = t1 - t0, t2 - t1
            c0 = -h2 / (h1 * (h1 + h2))
            c1 = (h2 - h1) / (h1 * h2)
            c2 = h1 / (h2 * (h1 + h2))
        elif i == 0:
            t0, t1, t2 = times[0], times[1], times[2] if n > 2 else times[1]
            if n == 2:
                q0, q1 = quantities(states[0]), quantities(states[1])
                dt = times[1] - times[0]
                d = tuple((b - a) / dt for a, b in zip(q0, q1))
                return dict(zip(("dut_x", "dut_y", "dHp", "dGp"), d))
            q0, q1, q2 = (quantities(states[j]) for j in (0, 1, 2))
            h1, h2 = t1 - t0, t2 - t1
            c0 = -(2 * h1 + h2) / (h1 * (h1 + h2))
            c1 = (h1 + h2) / (h1 * h2)
            c2 = -h1 / (h2 * (h1 + h2))
        else:
            if n == 2:
                q0, q1 = quantities(states[0]), quantities(states[1])
                dt = times[1] - times[0]
                d = tuple((b - a) / dt for a, b in zip(q0, q1))
                return dict(zip(("dut_x", "dut_y", "dHp", "dGp"), d))
            t0, t1, t2 = times[n - 3], times[n - 2], times[n - 1]
            q0, q1, q2 = (quantities(states[j]) for j in (n - 3, n - 2, n - 1))
            h1, h2 = t1 - t0, t2 - t1
            c0 = h2 / (h1 * (h1 + h2))
            c1 = -(h1 + h2) / (h1 * h2)
            c2 = (h1 + 2 * h2) / (h2 * (h1 + h2))
        d = tuple(c0 * a + c1 * b + c2 * c for a, b, c in zip(q0, q1, q2))
        return dict(zip(("dut_x", "dut_y", "dHp", "dGp"), d))


# --- remainder, definitional form (five terms) -----------------------------


def remainder_R_def(state: State, ref: State, ref_derivs: dict,
                    prm: ModelParams,
                    force: tuple[np.ndarray, np.ndarray] | None = None) -> dict:
    """The five remainder integrals in their defining form, with the
    reference time derivatives supplied externally (see RefTrajectory).

    Returns {"R1", ..., "R5", "total"}.
    """
    require_same_grid(state, ref)
    _check_positive_ref(ref)
    grid = state.grid
    rho, eta = state.rho, state.eta
    trho, teta = ref.rho, ref.eta
    ux, uy = _vel(state)
    tux, tuy = _vel(ref)
    dux, duy = tux - ux, tuy - uy  # u~ - u

    vkind = "odd" if not grid.periodic else "generic"
    gtxx, gtxy = grad_array(tux, grid, vkind)
    gtyx, gtyy = grad_array(tuy, grid, vkind)
    gxx, gxy = grad_array(ux, grid, vkind)
    gyx, gyy = grad_array(uy, grid, vkind)
    div_tu = gtxx + gtyy
    div_du = (gtxx - gxx) + (gtyy - gyy)

    # R1: momentum-equation pairing
    adv_x = state.rho * (ref_derivs["dut_x"] + ux * gtxx + uy * gtxy)
    adv_y = state.rho * (ref_derivs["dut_y"] + ux * gtyx + uy * gtyy)
    r1 = integrate_array(adv_x * dux + adv_y * duy, grid)
    r1 += integrate_array(
        prm.mu * (gtxx * (gtxx - gxx) + gtxy * (gtxy - gxy)
                  + gtyx * (gtyx - gyx) + gtyy * (gtyy - gyy))
        + prm.nu * div_tu * div_du, grid)
    if force is not None:
        r1 += integrate_array(state.rho * (force[0] * (-dux) + force[1] * (-duy)), grid)
    hp_x, hp_y = grad_array(potential_H_prime(trho, prm), grid, "generic")
    r1 += integrate_array(
        (trho - rho) * ref_derivs["dHp"]
        + (trho * tux - rho * ux) * hp_x + (trho * tuy - rho * uy) * hp_y, grid)
    r1 += integrate_array(div_tu * (pressure(trho, prm) - pressure(rho, prm)), grid)

    # R2: polymer-density pairing
    gp_x, gp_y = grad_array(polymer_potential_G_prime(teta, prm), grid, "generic")
    r2 = integrate_array(
        (teta - eta) * ref_derivs["dGp"]
        + (teta * tux - eta * ux) * gp_x + (teta * tuy - eta * uy) * gp_y, grid)
    r2 += integrate_array(
        div_tu * (polymer_pressure_q(teta, prm)
                  - polymer_pressure_q(np.maximum(eta, 0.0), prm)), grid)

    # R3/R4: cross terms of the eta dissipation
    sq_eta = np.sqrt(np.maximum(eta, 0.0))
    sq_teta = np.sqrt(teta)
    gsx, gsy = grad_array(sq_eta, grid, "even" if not grid.periodic else "generic")
    gtsx, gtsy = grad_array(sq_teta, grid, "even" if not grid.periodic else "generic")
    cross = (gtsx * (gsx - gtsx) + gtsy * (gsy - gtsy)
             + (gsx * gtsx + gsy * gtsy) * (1.0 - sq_eta / sq_teta))
    r3 = -4.0 * prm.eps * prm.kL * integrate_array(cross, grid)
    gex, gey = grad_array(eta, grid, "even" if not grid.periodic else "generic")
    gtex, gtey = grad_array(teta, grid, "even" if not grid.periodic else "generic")
    r4 = -2.0 * prm.eps * prm.zfrak * integrate_array(
        gtex * (gex - gtex) + gtey * (gey - gtey), grid)

    # R5: elastic stress against the velocity-difference gradient
    # T : grad(w) equals T : sym(grad w) for symmetric T
    r5 = integrate_array(_frob_ip(state.t11, state.t12, state.t22,
                                  gtxx - gxx, 0.5 * ((gtxy - gxy) + (gtyx - gyx)),
                                  gtyy - gyy), grid)
    out = {"R1": r1, "R2": r2, "R3": r3, "R4": r4, "R5": r5}
    out["total"] = r1 + r2 + r3 + r4 + r5
    return out


# --- remainder, recombined form (eight terms) ------------------------------


def remainder_R_new(state: State, ref: State, prm: ModelParams) -> dict:
    """The derivative-free form of the remainder, valid when the reference
    solves the strong system; eight named terms and their total.

    Terms: convective, viscous_density, pressure_bregman, polymer_bregman,
    polymer_pressure_grad, stress_div, eta_sqrt_cross, stress_deformation.
    """
    require_same_grid(state, ref)
    _check_positive_ref(ref)
    grid = state.grid
    rho, eta = state.rho, state.eta
    trho, teta = ref.rho, ref.eta
    ux, uy = _vel(state)
    tux, tuy = _vel(ref)
    dux, duy = tux - ux, tuy - uy  # u~ - u

    vkind = "odd" if not grid.periodic else "generic"
    gtxx, gtxy = grad_array(tux, grid, vkind)
    gtyx, gtyy = grad_array(tuy, grid, vkind)
    gxx, gxy = grad_array(ux, grid, vkind)
    gyx, gyy = grad_array(uy, grid, vkind)
    div_tu = gtxx + gtyy

    # 1) rho (u - u~) . grad(u~) . (u~ - u)
    t1 = integrate_array(
        rho * (-(dux * gtxx + duy * gtxy) * dux - (dux * gtyx + duy * gtyy) * duy),
        grid)

    # 2) (mu Lap u~ + nu grad div u~) (rho - rho~)/rho~ . (u~ - u)
    lap_tux = laplacian_array(tux, grid, vkind if not grid.periodic else "generic")
    lap_tuy = laplacian_array(tuy, grid, vkind if not grid.periodic else "generic")
    gd_x, gd_y = grad_array(div_tu, grid, "generic")
    fac = (rho - trho) / trho
    t2 = integrate_array(fac * ((prm.mu * lap_tux + prm.nu * gd_x) * dux
                                + (prm.mu * lap_tuy + prm.nu * gd_y) * duy), grid)

    # 3) div u~ * Bregman distance of the pressure potential (times gamma-1
    #    gives the pressure Bregman identity)
    p_breg = (pressure(trho, prm) - pressure(rho, prm)
              - pressure_prime(trho, prm) * (trho - rho))
    t3 = integrate_array(div_tu * p_breg, grid)

    # 4) div u~ * Bregman of the polymer pressure
    q_breg = (polymer_pressure_q(teta, prm)
              - polymer_pressure_q(np.maximum(eta, 0.0), prm)
              - polymer_pressure_q_prime(teta, prm) * (teta - eta))
    t4 = integrate_array(div_tu * q_breg, grid)

    # 5) (rho~ - rho)/rho~ grad q(eta~) . (u~ - u)
    gq_x, gq_y = grad_array(polymer_pressure_q(teta, prm), grid, "generic")
    t5 = integrate_array(((trho - rho) / trho) * (gq_x * dux + gq_y * duy), grid)

    # 6) (rho - rho~)/rho~ div T~ . (u~ - u)
    tkind = "even" if not grid.periodic else "generic"
    d11x, _ = grad_array(ref.t11, grid, tkind)
    d12x, d12y = grad_array(ref.t12, grid, tkind)
    _, d22y = grad_array(ref.t22, grid, tkind)
    divT_x = d11x + d12y
    divT_y = d12x + d22y
    t6 = integrate_array(((rho - trho) / trho) * (divT_x * dux + divT_y * duy), grid)

    # 7) eps kL [ 4 (1/sqrt(eta~)) (sqrt(eta~)-sqrt(eta)) grad sqrt(eta~) .
    #    grad(sqrt(eta~)-sqrt(eta)) - (Lap eta~ / eta~)(sqrt(eta)-sqrt(eta~))^2 ]
    sq_eta = np.sqrt(np.maximum(eta, 0.0))
    sq_teta = np.sqrt(teta)
    ekind = "even" if not grid.periodic else "generic"
    gsx, gsy = grad_array(sq_eta, grid, ekind)
    gtsx, gtsy = grad_array(sq_teta, grid, ekind)
    lap_teta = laplacian_array(teta, grid, ekind)
    diff_s = sq_teta - sq_eta
    t7 = prm.eps * prm.kL * integrate_array(
        4.0 / sq_teta * diff_s * (gtsx * (gtsx - gsx) + gtsy * (gtsy - gsy))
        - lap_teta / teta * diff_s ** 2, grid)

    # 8) (T - T~) : grad(u~ - u)
    t8 = integrate_array(_frob_ip(state.t11 - ref.t11, state.t12 - ref.t12,
                                  state.t22 - ref.t22,
                                  gtxx - gxx, 0.5 * ((gtxy - gxy) + (gtyx - gyx)),
                                  gtyy - gyy), grid)

    out = {"convective": t1, "viscous_density": t2, "pressure_bregman": t3,
           "polymer_bregman": t4, "polymer_pressure_grad": t5,
           "stress_div": t6, "eta_sqrt_cross": t7, "stress_deformation": t8}
    out["total"] = sum(out.values())
    return out


# --- inequality residual ---------------------------------------------------


def relative_dissipation(state: State, ref: State, prm: ModelParams) -> float:
    """Instantaneous integrand of the relative dissipation:
    mu |grad(u-u~)|^2 + nu |div(u-u~)|^2
    + 2 eps (2 kL |grad(sqrt eta - sqrt eta~)|^2 + z |grad(eta-eta~)|^2)."""
    grid = state.grid
    ux, uy = _vel(state)
    tux, tuy = _vel(ref)
    vkind = "odd" if not grid.periodic else "generic"
    gxx, gxy = grad_array(ux - tux, grid, vkind)
    gyx, gyy = grad_array(uy - tuy, grid, vkind)
    visc = prm.mu * (gxx ** 2 + gxy ** 2 + gyx ** 2 + gyy ** 2) \
        + prm.nu * (gxx + gyy) ** 2
    ekind = "even" if not grid.periodic else "generic"
    dsx, dsy = grad_array(np.sqrt(np.maximum(state.eta, 0.0)) - np.sqrt(ref.eta),
                          grid, ekind)
    dex, dey = grad_array(state.eta - ref.eta, grid, ekind)
    poly = 2.0 * prm.eps * (2.0 * prm.kL * (dsx ** 2 + dsy ** 2)
                            + prm.zfrak * (dex ** 2 + dey ** 2))
    return integrate_array(visc + poly, grid)


def entropy_inequality_residual(traj: Trajectory, ref: RefTrajectory,
                                prm: ModelParams, force_fn=None,
                                use_new_form: bool = False) -> np.ndarray:
    """residual(t_j) = [E1 + E2](t_j) + diss(0, t_j)
                        - [E1 + E2](0) - int_0^{t_j} R dt.

    Exactly zero at j = 0; the continuous theorem asserts <= 0, discretely
    the signed value is reported. Both trajectories must share snapshot
    times and grid."""
    if len(traj) != len(ref) or not np.allclose(traj.times, ref.traj.times,
                                                rtol=0, atol=1e-12):
        raise ReferenceError("trajectories must share snapshot times")
    n = len(traj)
    e12 = np.empty(n)
    diss = np.empty(n)
    rem = np.empty(n)
    for j in range(n):
        s, r = traj.states[j], ref.state(j)
        e12[j] = rel_entropy_E1(s, r, prm) + rel_entropy_E2(s, r, prm)
        diss[j] = relative_dissipation(s, r, prm)
        if use_new_form:
            rem[j] = remainder_R_new(s, r, prm)["total"]
        else:
            f = force_fn(traj.times[j]) if force_fn else None
            rem[j] = remainder_R_def(s, r, ref.time_derivs(j, prm), prm, f)["total"]
    dts = np.diff(traj.times)
    diss_cum = np.concatenate([[0.0], np.cumsum(0.5 * dts * (diss[:-1] + diss[1:]))])
    rem_cum = np.concatenate([[0.0], np.cumsum(0.5 * dts * (rem[:-1] + rem[1:]))])
    return (e12 - e12[0]) + diss_cum - rem_cum


# --- stress distance balance ----------------------------------------------


def stress_distance_balance(traj: Trajectory, ref: RefTrajectory,
                            prm: ModelParams) -> np.ndarray:
    """Residual of the balance for D = T - T~:

    d/dt int 1/2|D|^2 + eps int |grad D|^2 + (1/2 lambda) int |D|^2
      = -int [Div(uT) - Div(u~T~)] : D
        + int [(grad u T + T grad u^T) - (grad u~ T~ + T~ grad u~^T)] : D
        + (k/2 lambda) int (eta - eta~) tr D.

    Time derivative by centered differences (one-sided at the ends)."""
    if len(traj) != len(ref) or not np.allclose(traj.times, ref.traj.times,
                                                rtol=0, atol=1e-12):
        raise ReferenceError("trajectories must share snapshot times")
    n = len(traj)
    grid = traj.grid
    half_d2 = np.empty(n)
    rhs = np.empty(n)
    tkind = "even" if not grid.periodic else "generic"
    vkind = "odd" if not grid.periodic else "generic"
    for j in range(n):
        s, r = traj.states[j], ref.state(j)
        d11, d12, d22 = s.t11 - r.t11, s.t12 - r.t12, s.t22 - r.t22
        half_d2[j] = integrate_array(0.5 * _frob_ip(d11, d12, d22, d11, d12, d22), grid)

        g11x, g11y = grad_array(d11, grid, tkind)
        g12x, g12y = grad_array(d12, grid, tkind)
        g22x, g22y = grad_array(d22, grid, tkind)
        grad_d_sq = g11x**2 + g11y**2 + 2.0 * (g12x**2 + g12y**2) + g22x**2 + g22y**2
        decay = (prm.eps * integrate_array(grad_d_sq, grid)
                 + integrate_array(_frob_ip(d11, d12, d22, d11, d12, d22), grid)
                 / (2.0 * prm.lam))

        ux, uy = _vel(s)
        tux, tuy = _vel(r)
        uf, vf = face_velocities(ux, uy, grid)
        tf, sf = face_velocities(tux, tuy, grid)
        adv = 0.0
        for (a, b, w) in ((s.t11, r.t11, 1.0), (s.t12, r.t12, 2.0), (s.t22, r.t22, 1.0)):
            da = (advective_div_array(a, uf, vf, grid, "even")
                  - advective_div_array(b, tf, sf, grid, "even"))
            adv += w * integrate_array(da * (a - b), grid)

        gxx, gxy = grad_array(ux, grid, vkind)
        gyx, gyy = grad_array(uy, grid, vkind)
        hxx, hxy = grad_array(tux, grid, vkind)
        hyx, hyy = grad_array(tuy, grid, vkind)
        def _def_planes(axx, axy, ayx, ayy, p11, p12, p22):
            b11 = axx * p11 + axy * p12
            b12 = axx * p12 + axy * p22
            b21 = ayx * p11 + ayy * p12
            b22 = ayx * p12 + ayy * p22
            return 2.0 * b11, b12 + b21, 2.0 * b22
        w11, w12, w22 = _def_planes(gxx, gxy, gyx, gyy, s.t11, s.t12, s.t22)
        v11, v12, v22 = _def_planes(hxx, hxy, hyx, hyy, r.t11, r.t12, r.t22)
        deform = integrate_array(
            _frob_ip(w11 - v11, w12 - v12, w22 - v22, d11, d12, d22), grid)

        relaxsrc = (prm.k / (2.0 * prm.lam)) * integrate_array(
            (s.eta - r.eta) * (d11 + d22), grid)
        rhs[j] = -adv + deform + relaxsrc - decay

    times = np.asarray(traj.times)
    ddt = np.gradient(half_d2, times, edge_order=2 if n > 2 else 1)
    return ddt - rhs


# --- Gronwall decay experiment --------------------------------------------


@dataclass
class GronwallReport:
    times: np.ndarray
    E_series: np.ndarray
    E0: float
    C_hat: float | None
    bounded: bool

    def as_rows(self) -> list:
        return [(t, e) for t, e in zip(self.times, self.E_series)]


def restrict_state(state: State, coarse: Grid) -> State:
    """2x2 block average onto a grid with half the resolution per axis."""
    g = state.grid
    if coarse.nx * 2 != g.nx or coarse.ny * 2 != g.ny:
        raise ValueError("coarse grid must halve the resolution of the fine grid")
    def down(a):
        return 0.25 * (a[0::2, 0::2] + a[1::2, 0::2] + a[0::2, 1::2] + a[1::2, 1::2])
    return State(coarse, state.t, *(down(a) for a in state.arrays()))


def weak_strong_experiment(traj: Trajectory, ref: RefTrajectory,
                           prm: ModelParams) -> GronwallReport:
    """Combined relative entropy E(t) = E1 + E2 + ET along shared snapshot
    times, with the fitted exponential growth constant C_hat such that
    E(t) <= E(0) exp(C_hat t) (least squares on log E where E > 0)."""
    if len(traj) != len(ref) or not np.allclose(traj.times, ref.traj.times,
                                                rtol=0, atol=1e-12):
        raise ReferenceError("trajectories must share snapshot times")
    times = np.asarray(traj.times)
    series = np.array([combined_E(traj.states[j], ref.state(j), prm)
                       for j in range(len(traj))])
    e0 = float(series[0])
    c_hat = None
    if e0 > 0 and np.all(series > 0) and len(series) > 1:
        # slope of log(E/E0) against t; clamp at 0 (decay still satisfies
        # the Gronwall bound with C_hat = 0)
        logr = np.log(series / e0)
        c_hat = float(max(0.0, np.polyfit(times - times[0], logr, 1)[0]))
    bounded = bool(np.max(series) <= max(10.0 * e0, 1e-30)) if e0 > 0 else \
        bool(np.max(series) <= 1e-20)
    return GronwallReport(times=times, E_series=series, E0=e0,
                          C_hat=c_hat, bounded=bounded)
