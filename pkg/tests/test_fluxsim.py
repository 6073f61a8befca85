import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from forcefree.clebsch import ClebschField, HalfPlaneGrid, discrete_divergence, gen_helicity, mean_square_potential
from forcefree.fields import FieldParams, G_C, phi_C
from forcefree.fluxsim import (
    SimConfig,
    drift_scan,
    helicity_dissipation,
    msp_dissipation,
    run,
    stable_dt,
    step,
    velocity_from_stream,
)
from forcefree.inequalities import compact_bump

P = FieldParams(2.0, 1.0)


def chandrasekhar(g):
    return ClebschField.from_functions(g, lambda z, r: phi_C(z, r, P) + P.phi_inf(r), lambda z, r: G_C(z, r, P))


def bump_state(g, shift=0.0):
    return ClebschField.from_functions(g, lambda z, r: P.phi_inf(r) + 3 * compact_bump(z - shift, r),
                                       lambda z, r: 1.5 * compact_bump(z - shift, r))


def stream(g, A=1.0, z0=0.5, width=0.8 * P.R):
    Z, R = g.mesh()
    psi = A * R**2 * np.exp(-((Z - z0) ** 2 + R**2) / width**2)
    psi[0] = psi[-1] = 0.0
    psi[:, -1] = 0.0
    return psi


def box(n, half=4 * P.R):
    return HalfPlaneGrid.box(half, half, n + 1, n // 2 + 1)


# --- configuration ----------------------------------------------------------------------

@pytest.mark.parametrize("kw", [dict(mu=-1.0), dict(mu=math.inf), dict(t_end=0.0), dict(cfl_safety=1.0),
                                dict(cfl_safety=0.0), dict(dt_max=0.0), dict(n_samples=0)])
def test_config_validation(kw):
    g = box(16)
    base = dict(params=P, grid=g, mu=1e-3, t_end=1.0, initial=chandrasekhar(g))
    base.update(kw)
    with pytest.raises(ValueError):
        SimConfig(**base)


def test_config_rejects_foreign_initial_state():
    with pytest.raises(ValueError):
        SimConfig(P, box(16), 0.0, 1.0, chandrasekhar(box(32)))


# --- velocity ---------------------------------------------------------------------------------

def test_zero_stream_gives_zero_velocity():
    g = box(16)
    uz, ur = velocity_from_stream(np.zeros(g.shape), g)
    assert np.all(uz == 0) and np.all(ur == 0)


def test_stream_must_vanish_on_boundary():
    g = box(16)
    Z, R = g.mesh()
    with pytest.raises(ValueError):
        velocity_from_stream(R**2, g)


@pytest.mark.parametrize("n", [32, 64])
def test_velocity_is_solenoidal(n):
    g = box(n)
    uz, ur = velocity_from_stream(stream(g), g)
    div = discrete_divergence(uz, ur, g)
    assert np.abs(div).max() <= 1e-12 * np.abs(uz).max() / g.hz


def test_velocity_maximum_converges():
    def umax(n):
        g = HalfPlaneGrid.box(4.0, 4.0, 2 * n + 1, n + 1)
        Z, R = g.mesh()
        psi = R**2 * np.exp(-Z**2 - R**2)
        psi[0] = psi[-1] = 0.0
        psi[:, -1] = 0.0
        uz, ur = velocity_from_stream(psi, g)
        return np.hypot(uz, ur).max()
    assert umax(64) == pytest.approx(umax(512), rel=1e-2)


# --- single steps ------------------------------------------------------------------------------

def test_no_flow_no_resistivity_is_identity():
    g = box(32)
    s = chandrasekhar(g)
    out = step(s, None, 0.3, 0.0, P)
    assert np.array_equal(out.phi, s.phi) and np.array_equal(out.G, s.G)


def test_step_rejects_cfl_violation():
    g = box(32)
    s = chandrasekhar(g)
    u = velocity_from_stream(stream(g), g)
    limit = stable_dt(u, g, 1e-2, 0.99)
    step(s, u, limit, 1e-2, P)
    with pytest.raises(ValueError, match="CFL"):
        step(s, u, 1.01 * limit, 1e-2, P)
    with pytest.raises(ValueError):
        step(s, u, 0.0, 1e-2, P)


def test_stable_dt_limits():
    g = box(32)
    h = min(g.hz, g.hr)
    assert stable_dt(None, g, 0.0, 0.5) == math.inf
    assert stable_dt(None, g, 2.0, 0.5) == pytest.approx(0.5 * h * h / 8)


def test_step_keeps_boundary_values():
    g = box(32)
    s = chandrasekhar(g)
    u = velocity_from_stream(stream(g), g)
    out = step(s, u, 0.5 * stable_dt(u, g, 1e-2, 0.99), 1e-2, P)
    for a, b in ((out.phi, s.phi), (out.G, s.G)):
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[-1], b[-1]) and np.array_equal(a[:, -1], b[:, -1])


def test_pure_advection_is_monotone():
    g = box(64)
    s = chandrasekhar(g)
    R = g.mesh()[1]
    u = velocity_from_stream(stream(g, A=2.0), g)
    dt = stable_dt(u, g, 0.0, 0.9)
    Phi0 = s.phi - P.phi_inf(R)
    lo, hi = Phi0.min(), Phi0.max()
    for _ in range(40):
        s = step(s, u, dt, 0.0, P)
    Phi = s.phi - P.phi_inf(R)
    assert Phi.min() >= lo - 1e-12 and Phi.max() <= hi + 1e-12
    assert s.G.min() >= -1e-12 and s.G.max() <= chandrasekhar(g).G.max() + 1e-12


@pytest.mark.parametrize("n", [32, 64, 128])
def test_single_step_msp_balance_smooth_data(n):
    # per-step residual relative to the booked dissipation is O(h^2) for smooth data
    g = box(n, half=3.0)
    s0 = bump_state(g)
    dt, mu = 1e-4, 1e-2
    s1 = step(s0, None, dt, mu, P)
    booked = dt * mu * msp_dissipation(s0, P)
    res = mean_square_potential(s1, P) - mean_square_potential(s0, P) + booked
    assert abs(res) <= 12.0 * (3.0 / n) ** 2 * booked


def test_msp_dissipation_matches_analytic_rate():
    # 2 int |grad Phi|^2 dx with Phi = a r^2 exp(-z^2 - r^2), worked by hand
    g = HalfPlaneGrid.box(5.0, 5.0, 401, 201)
    a = 2.0
    tiny = FieldParams(W=1e-12, lam=1.0)
    s = ClebschField.from_functions(g, lambda z, r: a * r**2 * np.exp(-z**2 - r**2))
    # int |grad Phi|^2 r dz dr = a^2 sqrt(pi/2) * 3/8
    exact = 2 * 2 * math.pi * a**2 * math.sqrt(math.pi / 2) * 3 / 8
    assert msp_dissipation(s, tiny) == pytest.approx(exact, rel=2e-3)


# --- whole runs ---------------------------------------------------------------------------------

def test_static_run_conserves_exactly():
    g = box(32)
    tr = run(SimConfig(P, g, 0.0, 1.0, chandrasekhar(g)))
    assert all(v == 0.0 for v in tr.balance_residual_H + tr.balance_residual_M)
    assert len(set(tr.H_series)) == 1 and len(set(tr.M_series)) == 1


def test_trace_layout():
    g = box(32)
    tr = run(SimConfig(P, g, 1e-3, 0.5, chandrasekhar(g), n_samples=5))
    n = len(tr.times)
    assert n == 6
    for seq in (tr.H_series, tr.M_series, tr.helicity_dissipation_accum, tr.msp_dissipation_accum,
                tr.balance_residual_H, tr.balance_residual_M):
        assert len(seq) == n
    assert tr.times[-1] == pytest.approx(0.5)
    assert np.all(np.diff(tr.msp_dissipation_accum) >= 0)
    rows = tr.lines()
    assert len(rows) == n and all(len(r.split()) == 7 for r in rows)
    assert float(rows[-1].split()[0]) == pytest.approx(0.5)


def test_resistive_balance_laws():
    errs = []
    for n in (64, 128, 256):
        g = box(n)
        tr = run(SimConfig(P, g, 1e-3, 1.0, chandrasekhar(g), dt_max=0.1 * 64 / n, n_samples=10))
        errs.append(abs(tr.balance_residual_M[-1]) / tr.M_series[0])
        assert abs(tr.balance_residual_H[-1]) <= 2e-2 * tr.H_series[0]
        # the helicity book is meaningful: its residual is far below the change it explains
        assert abs(tr.balance_residual_H[-1]) <= 0.1 * tr.helicity_dissipation_accum[-1]
    assert errs[-1] <= 1e-2
    # least-squares slope in log2 over the refinement sequence
    slope = -np.polyfit(np.log2([64, 128, 256]), np.log2(errs), 1)[0]
    assert slope >= 1.0


def test_ideal_advection_drift_shrinks_under_refinement():
    res = []
    for n in (32, 64, 128):
        g = box(n)
        tr = run(SimConfig(P, g, 0.0, 1.0, chandrasekhar(g), stream_psi=stream(g)))
        res.append((abs(tr.balance_residual_H[-1]) / tr.H_series[0], abs(tr.balance_residual_M[-1]) / tr.M_series[0]))
    for k in range(2):
        seq = [r[k] for r in res]
        assert seq[0] > seq[1] > seq[2]
        assert math.log2(seq[0] / seq[2]) / 2 >= 0.8


@given(st.integers(-5, 5))
def test_helicity_history_translation_invariant(k):
    g = HalfPlaneGrid.box(4.0, 3.0, 49, 19)
    hz = g.hz
    Z, R = g.mesh()
    psi = 0.5 * compact_bump(Z, R, 2.5)
    a = SimConfig(P, g, 1e-2, 0.2, bump_state(g), stream_psi=psi, n_samples=4)
    b = SimConfig(P, g, 1e-2, 0.2, bump_state(g, k * hz), stream_psi=np.roll(psi, k, axis=0), n_samples=4)
    ha, hb = run(a).H_series, run(b).H_series
    assert np.allclose(ha, hb, rtol=1e-12, atol=0)


# --- drift scan -----------------------------------------------------------------------------------

def test_drift_scan_requires_decreasing_list():
    g = box(16)
    base = SimConfig(P, g, 0.0, 0.1, chandrasekhar(g))
    with pytest.raises(ValueError):
        drift_scan(base, [1e-4, 1e-2])
    with pytest.raises(ValueError):
        drift_scan(base, [1e-2, -1.0])


def test_drift_scan_trend():
    g = box(64)
    base = SimConfig(P, g, 0.0, 1.0, chandrasekhar(g), stream_psi=stream(g))
    out = drift_scan(base, [1e-2, 1e-3, 1e-4])
    assert out["drift"][2] < out["drift"][0]
    assert out["baseline"] <= out["drift"][2] + 1e-12 * out["drift"][2]
    assert all(e > 0 for e in out["excess"])
    assert all(math.isfinite(q) for q in out["ratio"])
