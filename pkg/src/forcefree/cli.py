"""Command-line front end: ``python3 -m forcefree <command> [options]``.

Commands: eval, relax, sim, verify, orbit-compare.  Options: --config FILE,
--out DIR, --seed N, --quiet.  The config is an INI file with sections
[params], [grid], [relax], [sim] and [output]; unknown sections or keys are
rejected.  Every command exits with 0 only when all of its checks pass.
"""
from __future__ import annotations

import argparse
import configparser
import math
import os
import sys
from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np

from .clebsch import (
    ClebschField,
    DumpParseError,
    HalfPlaneGrid,
    functionals,
    gen_helicity,
    lift_to_5d_norms,
    read_dump,
    write_dump,
)
from .fields import (
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
from .fluxsim import SimConfig, drift_scan, run
from .inequalities import compact_bump, random_corpus, refinement_study
from .relax import RelaxConfig, SeedBubble, minimize, orbit_distance
from .specfun import C32, bessel_j, first_positive_root

__all__ = ["RunConfig", "ConfigError", "load_config", "main"]


class ConfigError(ValueError):
    pass


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.replace(",", " ").split()]


def _opt_float(text: str):
    return None if text.strip().lower() in ("", "none", "auto") else float(text)


# section -> key -> (parser, default)
_SCHEMA: dict[str, dict[str, tuple[Callable, object]]] = {
    "params": {"W": (float, 2.0), "lambda": (float, 1.0), "gamma": (float, 0.0)},
    "grid": {
        "box_radii": (float, 4.0),
        "z_min": (_opt_float, None),
        "z_max": (_opt_float, None),
        "r_max": (_opt_float, None),
        "nz": (int, 129),
        "nr": (int, 65),
    },
    "relax": {
        "target_h": (_opt_float, None),
        "max_iters": (int, 2000),
        "tol_phi": (float, 1e-9),
        "tol_h": (float, 1e-9),
        "under_relaxation": (float, 0.25),
        "steiner_every": (int, 0),
        "seed_z0": (float, 0.0),
        "seed_sigma": (_opt_float, None),
        "seed_amplitude": (_opt_float, None),
        "boundary": (str, "dirichlet"),
    },
    "sim": {
        "mu": (float, 1e-3),
        "t_end": (float, 1.0),
        "cfl_safety": (float, 0.4),
        "dt_max": (_opt_float, None),
        "n_samples": (int, 20),
        "stream_amplitude": (float, 0.0),
        "stream_width": (_opt_float, None),
        "stream_z0": (float, 0.0),
        "mu_list": (_floats, []),
        "initial": (str, "chandrasekhar"),
    },
    "output": {
        "dump": (str, "field.dump"),
        "report": (str, "report.txt"),
        "history": (str, "history.txt"),
        "trace": (str, "trace.txt"),
        "lundquist": (_bool, False),
        "lundquist_f": (float, 1.0),
        "seed": (int, 0),
        "orbit_tol": (float, 0.05),
        "verify_dump": (str, ""),
    },
}


@dataclass
class RunConfig:
    """Parsed configuration; ``values[section][key]`` holds typed values."""

    values: dict[str, dict[str, object]] = dc_field(default_factory=dict)

    def __getitem__(self, section: str) -> dict[str, object]:
        return self.values[section]

    @property
    def params(self) -> FieldParams:
        p = self["params"]
        return FieldParams(p["W"], p["lambda"], p["gamma"])

    @property
    def grid(self) -> HalfPlaneGrid:
        g = self["grid"]
        R = self.params.R
        half = g["box_radii"] * R
        z_min = -half if g["z_min"] is None else g["z_min"]
        z_max = half if g["z_max"] is None else g["z_max"]
        r_max = half if g["r_max"] is None else g["r_max"]
        return HalfPlaneGrid(z_min, z_max, r_max, g["nz"], g["nr"])


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None, strict=True)
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    values = {sec: {k: d for k, (_, d) in keys.items()} for sec, keys in _SCHEMA.items()}
    for section in cp.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        for key, raw in cp.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {section}.{key}")
            parser = _SCHEMA[section][key][0]
            try:
                values[section][key] = parser(raw)
            except ValueError as exc:
                raise ConfigError(f"bad value for {section}.{key}: {exc}") from None
    cfg = RunConfig(values)
    try:
        cfg.params
        cfg.grid
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def load_config(path: str | None) -> RunConfig:
    if path is None:
        return parse_config("")
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), path)


# --- helpers -------------------------------------------------------------------

class _Out:
    def __init__(self, out_dir: str, quiet: bool):
        self.dir = out_dir
        self.quiet = quiet
        os.makedirs(out_dir, exist_ok=True)

    def path(self, name: str) -> str:
        return os.path.join(self.dir, name)

    def say(self, msg: str):
        if not self.quiet:
            print(msg)

    def write_lines(self, name: str, lines: list[str]):
        with open(self.path(name), "w", encoding="utf-8") as fh:
            fh.write("".join(line + "\n" for line in lines))


def _kv(key: str, value) -> str:
    if isinstance(value, float):
        return f"{key} = {value:.17g}"
    return f"{key} = {value}"


def _chandrasekhar_field(grid: HalfPlaneGrid, params: FieldParams) -> ClebschField:
    return ClebschField.from_functions(grid, lambda z, r: phi_C(z, r, params) + params.phi_inf(r),
                                       lambda z, r: G_C(z, r, params))


# --- commands ------------------------------------------------------------------

def cmd_eval(cfg: RunConfig, out: _Out) -> int:
    p, grid = cfg.params, cfg.grid
    field = _chandrasekhar_field(grid, p)
    write_dump(out.path(cfg["output"]["dump"]), field, p)
    hC = helicity_constant_hC(p)
    fun = functionals(field, p)
    rel = abs(fun.H - hC) / hC
    lines = [_kv("c32", C32), _kv("R", p.R), _kv("h_C", hC), _kv("H_grid", fun.H),
             _kv("H_rel_error", rel), _kv("E_grid", fun.E), _kv("M_grid", fun.M)]
    ok = rel <= 1e-2
    if cfg["output"]["lundquist"]:
        f = cfg["output"]["lundquist_f"]
        Z, R = grid.mesh()
        bz, _, bt = lundquist_field(f, R, Z)
        phi = np.zeros(grid.shape)
        phi[:, 1:] = R[:, 1:] * np.asarray(bessel_j(1, abs(f) * R[:, 1:])) / abs(f)
        lund = ClebschField(grid, phi, R * bt)
        write_dump(out.path("lundquist.dump"), lund, p)
        lines.append(_kv("lundquist_f", f))
    lines.append(_kv("status", "pass" if ok else "fail"))
    out.write_lines(cfg["output"]["report"], lines)
    for line in lines:
        out.say(line)
    return 0 if ok else 1


def _relax_config(cfg: RunConfig) -> RelaxConfig:
    p, grid, r = cfg.params, cfg.grid, cfg["relax"]
    target = helicity_constant_hC(p) if r["target_h"] is None else r["target_h"]
    sigma = 0.6 * p.R if r["seed_sigma"] is None else r["seed_sigma"]
    amp = p.W if r["seed_amplitude"] is None else r["seed_amplitude"]
    return RelaxConfig(target, p, grid, max_iters=r["max_iters"], tol_phi=r["tol_phi"], tol_h=r["tol_h"],
                       under_relaxation=r["under_relaxation"], steiner_every=r["steiner_every"],
                       seed_bubble=SeedBubble(r["seed_z0"], sigma, amp), boundary=r["boundary"])


def cmd_relax(cfg: RunConfig, out: _Out) -> int:
    rc = _relax_config(cfg)
    rep = minimize(rc)
    p = rc.params
    lines = [_kv("status", rep.status), _kv("converged", rep.converged), _kv("iterations", rep.iterations),
             _kv("reseeds", rep.reseeds), _kv("target_h", rc.target_h), _kv("mu", rep.mu),
             _kv("energy", rep.energy), _kv("gs_residual", rep.gs_residual)]
    if rep.status != "degenerate_support":
        lines.append(_kv("H", gen_helicity(rep.field, p)))
        write_dump(out.path(cfg["output"]["dump"]), rep.field, p)
        if cfg["relax"]["target_h"] is None:
            ref = _chandrasekhar_field(rc.grid, p)
            dist, shift = orbit_distance(rep.field.phi, ref.phi, rc.grid, p)
            lines += [_kv("orbit_distance", dist), _kv("orbit_shift", shift),
                      _kv("mu_rel_error", rep.mu / math.sqrt(p.lam) - 1.0)]
    out.write_lines(cfg["output"]["report"], lines)
    out.write_lines(cfg["output"]["history"], rep.history_lines())
    for line in lines:
        out.say(line)
    return 0 if rep.converged else 1


def _sim_config(cfg: RunConfig) -> SimConfig:
    p, grid, s = cfg.params, cfg.grid, cfg["sim"]
    if s["initial"] == "chandrasekhar":
        init = _chandrasekhar_field(grid, p)
    else:
        init, p_file = read_dump(s["initial"])
        if init.grid != grid:
            raise ConfigError("initial dump grid differs from [grid]")
    psi = None
    if s["stream_amplitude"] != 0:
        Z, R = grid.mesh()
        width = 0.8 * p.R if s["stream_width"] is None else s["stream_width"]
        psi = s["stream_amplitude"] * R**2 * np.exp(-((Z - s["stream_z0"]) ** 2 + R**2) / width**2)
        psi[0] = psi[-1] = 0.0
        psi[:, -1] = 0.0
    return SimConfig(p, grid, s["mu"], s["t_end"], init, cfl_safety=s["cfl_safety"], stream_psi=psi,
                     dt_max=s["dt_max"], n_samples=s["n_samples"])


def cmd_sim(cfg: RunConfig, out: _Out) -> int:
    sc = _sim_config(cfg)
    mus = cfg["sim"]["mu_list"]
    if mus:
        res = drift_scan(sc, mus)
        rows = [f"{m:.17g} {d:.17g} {e:.17g} {q:.17g}"
                for m, d, e, q in zip(res["mu"], res["drift"], res["excess"], res["ratio"])]
        out.write_lines("drift_scan.txt", rows)
        ratios = [q for q in res["ratio"] if math.isfinite(q)]
        spread = max(ratios) / min(ratios) if ratios and min(ratios) > 0 else math.inf
        lines = [_kv("baseline_drift", res["baseline"]), _kv("ratio_spread", spread),
                 _kv("status", "pass" if spread <= 10 else "fail")]
        ok = spread <= 10
    else:
        tr = run(sc)
        out.write_lines(cfg["output"]["trace"], tr.lines())
        M0, H0 = tr.M_series[0], tr.H_series[0]
        resM = abs(tr.balance_residual_M[-1]) / M0 if M0 else abs(tr.balance_residual_M[-1])
        resH = abs(tr.balance_residual_H[-1]) / abs(H0) if H0 else abs(tr.balance_residual_H[-1])
        finite = all(math.isfinite(v) for v in tr.balance_residual_M + tr.balance_residual_H)
        lines = [_kv("dt", tr.dt), _kv("samples", len(tr.times)), _kv("M_residual_rel", resM),
                 _kv("H_residual_rel", resH)]
        ok = finite and resM <= 1e-2 and resH <= 2e-2
        lines.append(_kv("status", "pass" if ok else "fail"))
    out.write_lines(cfg["output"]["report"], lines)
    for line in lines:
        out.say(line)
    return 0 if ok else 1


def _verify_checks(cfg: RunConfig, seed: int) -> list[tuple[str, Callable[[], bool]]]:
    p = cfg.params

    def root():
        return abs(first_positive_root(1.5) - 4.4934) <= 1e-3

    def recurrence():
        x = np.linspace(0.01, 50.0, 2001)
        j12, j32, j52 = (np.asarray(bessel_j(o, x)) for o in (0.5, 1.5, 2.5))
        return bool(np.all(np.abs(j12 + j52 - 3.0 / x * j32) <= 1e-10 * (1 + np.abs(j32) * 3 / x)))

    def hC_grid():
        grid = HalfPlaneGrid.box(4 * p.R, 4 * p.R, 257, 129)
        return abs(gen_helicity(_chandrasekhar_field(grid, p), p) / helicity_constant_hC(p) - 1) <= 1e-2

    def helicity_symmetry():
        corpus = random_corpus(50, seed)
        grid = corpus[0].grid(32)
        for c in corpus:
            f = c.sample(grid)
            if gen_helicity(f.with_G(-f.G), p) != -gen_helicity(f, p):
                return False
        return True

    def translation():
        rng = np.random.default_rng(seed)
        grid = HalfPlaneGrid.box(4.0, 4.0, 65, 33)
        for _ in range(20):
            a, b, zc = rng.uniform(2, 6), rng.uniform(-3, 3), rng.uniform(-1, 1)
            f = ClebschField.from_functions(grid, lambda z, r: a * compact_bump(z - zc, r),
                                            lambda z, r: b * compact_bump(z - zc, r))
            g = ClebschField(grid, np.roll(f.phi, 3, axis=0), np.roll(f.G, 3, axis=0))
            a, b = functionals(f, p), functionals(g, p)
            for x, y in ((a.E, b.E), (a.H, b.H), (a.M, b.M)):
                if abs(x - y) > 1e-12 * max(abs(x), 1.0):
                    return False
        return True

    def isometries():
        grid = HalfPlaneGrid.box(6.0, 6.0, 241, 241)
        f = ClebschField.from_functions(grid, lambda z, r: r**2 * np.exp(-z**2 - r**2))
        return all(abs(q - 1) <= 1e-2 for q in lift_to_5d_norms(f).ratios())

    def residual_orders():
        lam = p.lam
        res_c, res_l = [], []
        for n in (64, 128, 256):
            grid = HalfPlaneGrid(-2 * p.R, 2 * p.R, 2 * p.R, n + 1, n // 2 + 1)
            res_c.append(forcefree_residual(lambda Z, R: U_C(Z, R, p), lambda Z, R: f_C(Z, R, p), grid,
                                            exclude=ball_band(p.R)))
            lg = HalfPlaneGrid(-1.0, 1.0, 6.0, 9, n // 2 + 1)
            res_l.append(forcefree_residual(lambda Z, R: lundquist_field(1.0, R, Z),
                                            lambda Z, R: np.ones_like(R), lg))
        oc = math.log2(res_c[-2] / res_c[-1])
        ol = math.log2(res_l[-2] / res_l[-1])
        return oc >= 1.0 and ol >= 1.9 and lam > 0

    def inequalities():
        _, spread = refinement_study(random_corpus(40, seed), [32, 64, 128], FieldParams(2.0, 1.0), seed)
        return all(v <= 2.0 for v in spread.values())

    checks = [("specfun.root_c32", root), ("specfun.recurrence_half_orders", recurrence),
              ("clebsch.helicity_constant_grid", hC_grid), ("clebsch.helicity_symmetry", helicity_symmetry),
              ("clebsch.z_translation_invariance", translation), ("clebsch.isometries_5d", isometries),
              ("fields.residual_orders", residual_orders), ("clebsch.inequality_stability", inequalities)]
    dump = cfg["output"]["verify_dump"]
    if dump:
        checks.append((f"clebsch.dump_parse[{dump}]", lambda: read_dump(dump) is not None))
    return checks


def cmd_verify(cfg: RunConfig, out: _Out) -> int:
    seed = cfg["output"]["seed"]
    lines = []
    ok = True
    for name, check in _verify_checks(cfg, seed):
        try:
            passed = bool(check())
            msg = ""
        except (DumpParseError, OSError, ValueError, ArithmeticError) as exc:
            passed, msg = False, f" ({exc})"
        ok &= passed
        lines.append(f"{'PASS' if passed else 'FAIL'} {name}{msg}")
    out.write_lines(cfg["output"]["report"], lines)
    for line in lines:
        out.say(line)
    return 0 if ok else 1


def cmd_orbit_compare(cfg: RunConfig, out: _Out, dump_a: str, dump_b: str) -> int:
    fa, pa = read_dump(dump_a)
    fb, pb = read_dump(dump_b)
    if fa.grid != fb.grid:
        raise ConfigError("the two dumps use different grids")
    dist, shift = orbit_distance(fa.phi, fb.phi, fa.grid, pa, pb)
    tol = cfg["output"]["orbit_tol"]
    lines = [_kv("distance", dist), _kv("shift", shift), _kv("tolerance", tol),
             _kv("status", "pass" if dist <= tol else "fail")]
    out.write_lines(cfg["output"]["report"], lines)
    for line in lines:
        out.say(line)
    return 0 if dist <= tol else 1


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="forcefree", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=["eval", "relax", "sim", "verify", "orbit-compare"])
    ap.add_argument("dumps", nargs="*", help="two dump files for orbit-compare")
    ap.add_argument("--config", default=None)
    ap.add_argument("--out", default=".")
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--quiet", action="store_true")
    args = ap.parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.values["output"]["seed"] = args.seed
        out = _Out(args.out, args.quiet)
        if args.command == "orbit-compare":
            if len(args.dumps) != 2:
                ap.error("orbit-compare needs two dump files")
            return cmd_orbit_compare(cfg, out, *args.dumps)
        if args.dumps:
            ap.error(f"{args.command} takes no positional arguments")
        return {"eval": cmd_eval, "relax": cmd_relax, "sim": cmd_sim, "verify": cmd_verify}[args.command](cfg, out)
    except (ConfigError, DumpParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
