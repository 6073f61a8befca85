import math
import subprocess
import sys

import numpy as np
import pytest

from forcefree.cli import ConfigError, main, parse_config
from forcefree.clebsch import ClebschField, read_dump, write_dump
from forcefree.fields import FieldParams, helicity_constant_hC

SMALL = """
[grid]
nz = 65
nr = 33
"""


def report(path):
    out = {}
    for line in path.read_text().splitlines():
        k, _, v = line.partition(" = ")
        out[k] = v
    return out


def write_cfg(tmp_path, text, name="run.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_eval_default(tmp_path):
    assert main(["eval", "--out", str(tmp_path), "--quiet"]) == 0
    rep = report(tmp_path / "report.txt")
    assert rep["status"] == "pass"
    assert float(rep["h_C"]) == helicity_constant_hC(FieldParams())
    field, params = read_dump(tmp_path / "field.dump")
    assert params == FieldParams()


def test_eval_echoes_parameters_exactly(tmp_path):
    cfg = write_cfg(tmp_path, "[params]\nW = 1.5\nlambda = 0.7\n" + SMALL)
    main(["eval", "--config", cfg, "--out", str(tmp_path), "--quiet"])
    text = (tmp_path / "field.dump").read_text()
    assert "# W = 1.5\n" in text and "# lambda = 0.69999999999999996\n" in text and "# gamma = 0\n" in text
    _, params = read_dump(tmp_path / "field.dump")
    assert params == FieldParams(1.5, 0.7, 0.0)
    rep = report(tmp_path / "report.txt")
    assert float(rep["h_C"]) == pytest.approx(helicity_constant_hC(params), rel=1e-15)


def test_eval_free_boundary_contour(tmp_path):
    main(["eval", "--out", str(tmp_path), "--quiet"])
    field, p = read_dump(tmp_path / "field.dump")
    Z, R = field.grid.mesh()
    near = np.abs(np.hypot(Z, R) - p.R) <= 0.5 * field.grid.hz
    excess = np.abs(field.phi - p.phi_inf(R))[near]
    # on the sphere |grad Phi| = (3 W / 2) r^2 / R <= 3 W R / 2
    assert excess.max() <= 1.5 * p.W * p.R * 0.5 * field.grid.hz


def test_eval_lundquist_dump(tmp_path):
    cfg = write_cfg(tmp_path, "[output]\nlundquist = yes\nlundquist_f = 1.3\n" + SMALL)
    assert main(["eval", "--config", cfg, "--out", str(tmp_path), "--quiet"]) == 0
    lund, _ = read_dump(tmp_path / "lundquist.dump")
    assert lund.G.max() > 0


def test_reports_are_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    cfg = write_cfg(tmp_path, SMALL)
    for d in (a, b):
        assert main(["eval", "--config", cfg, "--out", str(d), "--quiet"]) == 0
    assert (a / "report.txt").read_bytes() == (b / "report.txt").read_bytes()
    assert (a / "field.dump").read_bytes() == (b / "field.dump").read_bytes()


@pytest.fixture(scope="module")
def relaxed(tmp_path_factory):
    d = tmp_path_factory.mktemp("relax")
    cfg = d / "run.ini"
    cfg.write_text(SMALL)
    code = main(["relax", "--config", str(cfg), "--out", str(d), "--quiet"])
    return d, code


def test_relax_benchmark(relaxed):
    d, code = relaxed
    assert code == 0
    rep = report(d / "report.txt")
    assert rep["converged"] == "True" and rep["status"] == "converged"
    assert len((d / "history.txt").read_text().splitlines()) == int(rep["iterations"])
    assert float(rep["orbit_distance"]) <= 0.05
    assert abs(float(rep["mu_rel_error"])) <= 0.02


def test_relax_degenerate_seed(tmp_path):
    cfg = write_cfg(tmp_path, SMALL + "[relax]\nseed_amplitude = 1e-200\n")
    assert main(["relax", "--config", cfg, "--out", str(tmp_path), "--quiet"]) == 1
    assert report(tmp_path / "report.txt")["status"] == "degenerate_support"


def test_orbit_compare(relaxed, tmp_path):
    d, _ = relaxed
    dump = str(d / "field.dump")
    assert main(["orbit-compare", dump, dump, "--out", str(tmp_path), "--quiet"]) == 0
    assert float(report(tmp_path / "report.txt")["distance"]) == 0.0

    field, p = read_dump(dump)
    shifted = ClebschField(field.grid, np.roll(field.phi, 3, axis=0), np.roll(field.G, 3, axis=0))
    write_dump(tmp_path / "shift.dump", shifted, p)
    assert main(["orbit-compare", dump, str(tmp_path / "shift.dump"), "--out", str(tmp_path), "--quiet"]) == 0
    assert float(report(tmp_path / "report.txt")["distance"]) <= 1e-12

    cfg = write_cfg(tmp_path, SMALL)
    main(["eval", "--config", cfg, "--out", str(tmp_path / "ev"), "--quiet"])
    code = main(["orbit-compare", dump, str(tmp_path / "ev" / "field.dump"), "--out", str(tmp_path), "--quiet"])
    assert code == 0
    assert float(report(tmp_path / "report.txt")["distance"]) <= 0.05


def test_orbit_compare_needs_two_dumps(tmp_path):
    with pytest.raises(SystemExit):
        main(["orbit-compare", "only_one.dump", "--out", str(tmp_path)])


def test_sim_static_trace(tmp_path):
    cfg = write_cfg(tmp_path, SMALL + "[sim]\nmu = 0\nn_samples = 7\n")
    assert main(["sim", "--config", cfg, "--out", str(tmp_path), "--quiet"]) == 0
    rows = [list(map(float, l.split())) for l in (tmp_path / "trace.txt").read_text().splitlines()]
    assert len(rows) == 8
    assert all(r[5] == 0.0 and r[6] == 0.0 for r in rows)


def test_sim_resistive_run(tmp_path):
    cfg = write_cfg(tmp_path, SMALL + "[sim]\nmu = 1e-3\ndt_max = 0.05\n")
    assert main(["sim", "--config", cfg, "--out", str(tmp_path), "--quiet"]) == 0
    assert len((tmp_path / "trace.txt").read_text().splitlines()) == 21


def test_sim_drift_scan(tmp_path):
    cfg = write_cfg(tmp_path, SMALL + "[sim]\nmu_list = 1e-2, 1e-3, 1e-4\nstream_amplitude = 1\nstream_z0 = 0.5\n")
    main(["sim", "--config", cfg, "--out", str(tmp_path), "--quiet"])
    rows = (tmp_path / "drift_scan.txt").read_text().splitlines()
    assert len(rows) == 3
    assert [float(r.split()[0]) for r in rows] == [1e-2, 1e-3, 1e-4]


def test_verify_all_pass_and_reproducible(tmp_path, capsys):
    assert main(["verify", "--out", str(tmp_path / "a"), "--seed", "3"]) == 0
    printed = capsys.readouterr().out.splitlines()
    assert printed and all(l.startswith("PASS ") for l in printed)
    main(["verify", "--out", str(tmp_path / "b"), "--seed", "3", "--quiet"])
    assert (tmp_path / "a" / "report.txt").read_bytes() == (tmp_path / "b" / "report.txt").read_bytes()


def test_verify_reports_corrupted_dump(tmp_path):
    cfg = write_cfg(tmp_path, SMALL)
    main(["eval", "--config", cfg, "--out", str(tmp_path), "--quiet"])
    dump = tmp_path / "field.dump"
    lines = dump.read_text().splitlines()
    lines[40] = "0.1 0.2 oops 0"
    dump.write_text("\n".join(lines) + "\n")
    cfg2 = write_cfg(tmp_path, f"[output]\nverify_dump = {dump}\n", "v.ini")
    assert main(["verify", "--config", cfg2, "--out", str(tmp_path / "v"), "--quiet"]) == 1
    last = (tmp_path / "v" / "report.txt").read_text().splitlines()[-1]
    assert last.startswith("FAIL clebsch.dump_parse") and "line 41" in last


@pytest.mark.parametrize("text,fragment", [
    ("[grid]\nnz = 65\nbogus = 1\n", "unknown key grid.bogus"),
    ("[plots]\nx = 1\n", "unknown section"),
    ("[params]\nW = two\n", "bad value"),
    ("[params]\nW = -1\n", "W must be positive"),
    ("[grid]\nnz = 3\n", "nz, nr >= 4"),
    ("[output]\nlundquist = maybe\n", "not a boolean"),
])
def test_strict_config(text, fragment):
    with pytest.raises(ConfigError, match=fragment):
        parse_config(text)


def test_config_errors_exit_with_code_two(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "[relax]\ntolerance = 1\n")
    assert main(["relax", "--config", cfg, "--out", str(tmp_path)]) == 2
    assert "unknown key" in capsys.readouterr().err
    assert main(["eval", "--config", str(tmp_path / "missing.ini"), "--out", str(tmp_path)]) == 2


def test_config_defaults():
    cfg = parse_config("")
    assert cfg.params == FieldParams()
    g = cfg.grid
    assert g.z_min == pytest.approx(-4 * cfg.params.R) and (g.nz, g.nr) == (129, 65)
    assert cfg["output"]["seed"] == 0


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "forcefree", "eval", "--out", str(tmp_path)],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert "status = pass" in res.stdout
