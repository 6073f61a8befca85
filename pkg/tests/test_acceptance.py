"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the PASS/FAIL lines are
written straight to the terminal even when pytest captures output.
"""
import math
import time

import numpy as np
import pytest

from forcefree import specfun
from forcefree.clebsch import ClebschField, HalfPlaneGrid, dirichlet_energy, gen_helicity, lift_to_5d_norms
from forcefree.fields import (
    FieldParams,
    G_C,
    U_C,
    ball_band,
    f_C,
    forcefree_residual,
    helicity_constant_hC,
    lundquist_field,
    phi_C,
)
from forcefree.fluxsim import SimConfig, drift_scan, run
from forcefree.inequalities import compact_bump, random_corpus, refinement_study
from forcefree.relax import RelaxConfig, minimize, minimum_curve, orbit_distance, recover_mu, steiner_symmetrize

P = FieldParams(W=2.0, lam=1.0, gamma=0.0)


@pytest.fixture
def verdict(capsys):
    def emit(number: int, name: str, ok: bool, detail: str):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number:2d} {name}: {detail}")
        assert ok, detail
    return emit


def chandrasekhar(grid, p=P):
    return ClebschField.from_functions(grid, lambda z, r: phi_C(z, r, p) + p.phi_inf(r),
                                       lambda z, r: G_C(z, r, p))


def orders(values):
    return [math.log2(a / b) for a, b in zip(values, values[1:])]


def test_01_root_constant(verdict):
    specfun._root.cache_clear()
    t0 = time.perf_counter()
    c = specfun.first_positive_root(1.5)
    elapsed = time.perf_counter() - t0
    ok = abs(c - 4.4934) <= 1e-3 and elapsed < 1e-3
    verdict(1, "root constant", ok, f"c = {c:.15f}, runtime {elapsed * 1e3:.3f} ms")


def test_02_helicity_constant(verdict):
    t0 = time.perf_counter()
    grid = HalfPlaneGrid.box(4 * P.R, 4 * P.R, 513, 257)
    H = gen_helicity(chandrasekhar(grid), P)
    elapsed = time.perf_counter() - t0
    hC = helicity_constant_hC(P)
    rel = abs(H / hC - 1)
    verdict(2, "helicity constant", rel <= 1e-2 and elapsed < 10,
            f"H_grid = {H:.10g}, h_C = {hC:.10g}, rel err {rel:.2e}, runtime {elapsed:.2f} s")


def test_03_multiplier_identity(verdict):
    grid = HalfPlaneGrid.box(4 * P.R, 4 * P.R, 513, 257)
    mu = recover_mu(chandrasekhar(grid).phi, helicity_constant_hC(P), P, grid)
    rel = abs(mu / math.sqrt(P.lam) - 1)
    verdict(3, "multiplier identity", rel <= 2e-2, f"mu = {mu:.10g}, rel err {rel:.2e}")


def test_04_orbit_reproduction(verdict):
    t0 = time.perf_counter()
    cfg = RelaxConfig.benchmark(P, 256)
    rep = minimize(cfg)
    elapsed = time.perf_counter() - t0
    dist, shift = orbit_distance(rep.field.phi, chandrasekhar(cfg.grid).phi, cfg.grid, P)
    ok = rep.converged and dist <= 0.05 and elapsed <= 300
    verdict(4, "orbit reproduction", ok,
            f"converged {rep.converged} in {rep.iterations} its, distance {dist:.3e}, shift {shift:.3e}, "
            f"mu {rep.mu:.6f}, runtime {elapsed:.1f} s")


def test_05_forcefree_residual(verdict):
    rc, rl = [], []
    for n in (64, 128, 256, 512):
        g = HalfPlaneGrid(-2 * P.R, 2 * P.R, 2 * P.R, n + 1, n // 2 + 1)
        rc.append(forcefree_residual(lambda Z, R: U_C(Z, R, P), lambda Z, R: f_C(Z, R, P), g,
                                     exclude=ball_band(P.R, 3)))
        gl = HalfPlaneGrid(-4.0, 4.0, 6.0, n + 1, n // 2 + 1)
        rl.append(forcefree_residual(lambda Z, R: lundquist_field(1.0, R, Z), lambda Z, R: np.ones_like(R), gl))
    oc, ol = orders(rc), orders(rl)
    ok = min(oc) >= 1.0 and min(ol) >= 1.9
    verdict(5, "force-free residual", ok,
            "Chandrasekhar orders " + ", ".join(f"{o:.3f}" for o in oc)
            + "; Lundquist orders " + ", ".join(f"{o:.3f}" for o in ol))


def test_06_helicity_symmetry(verdict):
    bad = 0
    for c in random_corpus(200, seed=0):
        f = c.sample(c.grid(32))
        bad += gen_helicity(f.with_G(-f.G), P) != -gen_helicity(f, P)
    verdict(6, "helicity symmetry", bad == 0, f"{bad} of 200 fields break the exact sign flip")


def test_07_steiner(verdict):
    multiset_ok = True
    worst = -math.inf
    for c in random_corpus(100, seed=0, nonneg=True):
        g = c.grid(32)
        phi = c.sample(g).phi
        s = steiner_symmetrize(phi)
        multiset_ok &= bool(np.array_equal(np.sort(s, axis=0), np.sort(phi, axis=0)))
        e0, e1 = dirichlet_energy(phi, g, "edge"), dirichlet_energy(s, g, "edge")
        worst = max(worst, (e1 - e0) / e0)
    verdict(7, "Steiner properties", multiset_ok and worst <= 1e-6,
            f"multisets preserved {multiset_ok}, worst relative energy change {worst:.3e}")


def test_08_minimum_curve(verdict):
    hC = helicity_constant_hC(P)
    cfg = RelaxConfig.benchmark(P, 128)
    I = minimum_curve([hC / 2, hC, 1.5 * hC], P, cfg.grid, cfg)
    margin = 2 * I[0] - I[1]
    ok = I[0] < I[1] < I[2] and margin > 0
    verdict(8, "minimum curve", ok,
            f"I = {I[0]:.8g}, {I[1]:.8g}, {I[2]:.8g}; subadditivity margin {margin:.6g} "
            f"({margin / I[1]:.3%} of I_hC)")


def test_09_balance_laws(verdict):
    resM, resH = [], []
    for n in (64, 128, 256):
        g = HalfPlaneGrid.box(4 * P.R, 4 * P.R, n + 1, n // 2 + 1)
        tr = run(SimConfig(P, g, 1e-3, 1.0, chandrasekhar(g), dt_max=0.1 * 64 / n, n_samples=10))
        resM.append(abs(tr.balance_residual_M[-1]) / tr.M_series[0])
        resH.append(abs(tr.balance_residual_H[-1]) / abs(tr.H_series[0]))
    slope = -np.polyfit(np.log2([64, 128, 256]), np.log2(resM), 1)[0]
    ok = max(resM) <= 1e-2 and max(resH) <= 2e-2 and slope >= 1.0
    verdict(9, "balance laws", ok,
            "M residuals " + ", ".join(f"{v:.3e}" for v in resM)
            + f" (fitted order {slope:.3f}; pairwise " + ", ".join(f"{o:.3f}" for o in orders(resM))
            + "); H residuals " + ", ".join(f"{v:.3e}" for v in resH))


def test_10_drift_bound(verdict):
    g = HalfPlaneGrid.box(4 * P.R, 4 * P.R, 129, 65)
    Z, R = g.mesh()
    psi = R**2 * np.exp(-((Z - 0.5) ** 2 + R**2) / (0.8 * P.R) ** 2)
    psi[0] = psi[-1] = 0.0
    psi[:, -1] = 0.0
    out = drift_scan(SimConfig(P, g, 0.0, 5.0, chandrasekhar(g), stream_psi=psi), [1e-2, 1e-3, 1e-4])
    ratios = out["ratio"]
    spread = max(ratios) / min(ratios) if min(ratios) > 0 else math.inf
    verdict(10, "drift bound", spread <= 10,
            "drift/sqrt(mu) = " + ", ".join(f"{q:.4e}" for q in ratios)
            + f", baseline {out['baseline']:.3e}, spread {spread:.3f}")


def test_11_inequalities(verdict):
    consts, spread = refinement_study(random_corpus(200, seed=0), [32, 64, 128], P)
    finite = all(math.isfinite(v) and v > 0 for c in consts for v in c.as_dict().values())
    ok = finite and all(v <= 2.0 for v in spread.values())
    verdict(11, "inequality suite", ok,
            ", ".join(f"{k} {consts[-1].as_dict()[k]:.4g} (spread {v:.3f})" for k, v in spread.items()))


def test_12_isometries(verdict):
    g = HalfPlaneGrid.box(6.0, 6.0, 241, 241)
    bumps = [lambda z, r: r**2 * np.exp(-z**2 - r**2),
             lambda z, r: compact_bump(z, r, 2.0),
             lambda z, r: r**2 * np.exp(-(z - 0.7) ** 2 / 0.5 - r**2 / 1.5)]
    worst = max(abs(q - 1) for b in bumps for q in lift_to_5d_norms(ClebschField.from_functions(g, b)).ratios())
    verdict(12, "isometries", worst <= 1e-2, f"worst relative defect {worst:.3e} over {len(bumps)} bumps")
