"""Manufactured solutions, their symbolic sources, and the scan oracles."""

import numpy as np
import pytest
import sympy as sp

from oldb2d.constitutive import ModelParams
from oldb2d.grid import Grid
from oldb2d.verify import (ManufacturedSolution, convergence_study, make_ms,
                           mms_forcing, ode_oracle_relaxation,
                           oracle_lemma_scan, _X, _Y, _T)

from conftest import periodic_grid


def test_constant_equilibrium_has_zero_sources(prm):
    exprs = dict(rho=sp.Integer(1), ux=sp.Integer(0), uy=sp.Integer(0),
                 eta=sp.Integer(1), t11=sp.Float(prm.k), t12=sp.Integer(0),
                 t22=sp.Float(prm.k))
    ms = ManufacturedSolution("equilibrium", exprs, prm, 1.0, 1.0)
    for name in ("rho", "mx", "my", "eta", "t11", "t12", "t22"):
        assert ms.residual_is_zero(name)
    g = periodic_grid(8)
    for arr in mms_forcing(ms, g, 0.3):
        assert np.max(np.abs(arr)) == 0.0


def test_steady_ws_unforced_equations(prm):
    ms = make_ms("steady-ws", prm)
    # continuity and the polymer-density equation hold without sources, and
    # the momentum residual has been recast as a body force
    for name in ("rho", "eta", "mx", "my"):
        assert ms.residual_is_zero(name)
    assert ms.force_fn(periodic_grid(8)) is not None
    # the stress equations do need their sources
    assert not ms.residual_is_zero("t12")


def test_diffusion_eta_residuals(prm):
    ms = make_ms("diffusion-eta", prm)
    for name in ("rho", "eta"):
        assert ms.residual_is_zero(name)
    # momentum does need a source: grad q(eta) + div T do not cancel
    assert not ms.residual_is_zero("mx")
    # T = k eta I inherits the heat equation up to the relaxation source,
    # which vanishes since k eta - t11 = 0
    assert ms.residual_is_zero("t11")
    assert ms.residual_is_zero("t12")


def test_time_independent_mass_source_is_divergence(prm):
    # steady fields: F_rho must equal div(rho u) symbolically
    exprs = dict(rho=1 + sp.Rational(1, 10) * sp.sin(2 * sp.pi * _X),
                 ux=sp.Rational(1, 20) * sp.cos(2 * sp.pi * _Y),
                 uy=sp.Integer(0), eta=sp.Integer(1),
                 t11=sp.Integer(1), t12=sp.Integer(0), t22=sp.Integer(1))
    ms = ManufacturedSolution("steady-check", exprs, prm, 1.0, 1.0)
    want = sp.diff(exprs["rho"] * exprs["ux"], _X) \
        + sp.diff(exprs["rho"] * exprs["uy"], _Y)
    assert sp.simplify(ms._source_exprs[0] - want) == 0


def test_symbolic_sources_match_fd_oracle(prm):
    # differentiate the closed-form fields numerically (4th-order central,
    # independent of both sympy's chain rule and the production stencils)
    ms = make_ms("periodic-smooth", prm)
    pts = [(0.13, 0.41, 0.27), (0.71, 0.09, 0.61)]
    h = 1e-3

    def d4(f, v0, which):
        def at(s):
            a = list(v0)
            a[which] += s
            return f(*a)
        return (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h)

    rho = ms._field_fns["rho"]
    ux = ms._field_fns["ux"]
    uy = ms._field_fns["uy"]
    f_rho = sp.lambdify((_X, _Y, _T), ms._source_exprs[0], modules="numpy")
    for p in pts:
        num = (d4(lambda x, y, t: rho(x, y, t), p, 2)
               + d4(lambda x, y, t: rho(x, y, t) * ux(x, y, t), p, 0)
               + d4(lambda x, y, t: rho(x, y, t) * uy(x, y, t), p, 1))
        assert num == pytest.approx(f_rho(*p), abs=1e-9)


def test_sampled_state_is_positive_and_consistent(prm):
    ms = make_ms("periodic-smooth", prm)
    g = periodic_grid(16)
    s = ms.sample_state(g, 0.4)
    assert np.min(s.rho) > 0 and np.min(s.eta) > 0
    ux = ms._eval(ms._field_fns["ux"], g, 0.4)
    assert np.allclose(s.mx, s.rho * ux, rtol=1e-14)


def test_unknown_ms_name(prm):
    with pytest.raises(ValueError):
        make_ms("no-such-solution", prm)


def test_convergence_study_needs_three_levels(prm):
    ms = make_ms("diffusion-eta", prm)
    with pytest.raises(ValueError):
        convergence_study(ms, prm, levels=(16, 32))


def test_convergence_study_small_diffusion(prm):
    ms = make_ms("diffusion-eta", prm)
    rep = convergence_study(ms, prm, levels=(8, 16, 32), t_end=0.02,
                            fields=("eta",))
    assert rep.valid
    assert rep.l2_orders["eta"][-1] == pytest.approx(2.0, abs=0.35)
    rows = rep.table_rows()
    assert len(rows) == 3 and rows[0][0] == "eta"


def test_ode_oracle_trivial_points(prm):
    T0 = np.array([[2.0, 0.5], [0.5, 1.0]])
    assert np.array_equal(ode_oracle_relaxation(T0, prm.lam, 0.0), T0)
    half = ode_oracle_relaxation(T0, prm.lam, 2 * prm.lam * np.log(2.0))
    assert np.allclose(half, T0 / 2, rtol=1e-14)


def test_lemma_scan_passes_with_corrected_constants(prm):
    certs = oracle_lemma_scan(prm, n_samples=1 << 12)
    assert certs["H"].passed and certs["H"].min_slack >= 0.0
    assert certs["G"].passed and certs["G"].min_slack >= 0.0
    assert certs["H"].n_samples >= 1 << 12


def test_lemma_scan_falsifies_uncorrected_G(prm):
    certs = oracle_lemma_scan(prm, n_samples=1 << 12, corrected=False)
    g = certs["G"]
    assert not g.passed and g.min_slack < 0.0
    eta, eta_t = g.argmin
    # worst case sits on the ridge eta = 2 eta_t at the top of the range,
    # with the closed-form defect (2 log 2 - 3/2) kL eta_t
    assert eta == pytest.approx(2.0 * eta_t, rel=1e-12)
    assert g.min_slack == pytest.approx((2 * np.log(2) - 1.5) * prm.kL * eta_t,
                                        rel=1e-6)
