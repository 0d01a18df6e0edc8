import csv
import io
import json

import numpy as np
import pytest

from subharmonic.cli import main
from subharmonic.errors import ConfigError
from subharmonic.params import CircuitParams, EffectiveParams
from subharmonic.sweep import (
    FIELDS,
    PRESETS,
    SweepSpec,
    all_failed,
    map_and_report,
    run_sweep,
    sweep_columns,
    sweep_to_csv,
    sweep_to_json,
)

SMALL = SweepSpec("c_tilde_real_axis", -0.95, -0.3, 4, eps=1 + 0.1j, scale_by_n=True)


def read_csv(text):
    rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]
    return rows[0], rows[1:]


@pytest.mark.parametrize("kwargs", [
    dict(swept_parameter="c", start=0, stop=1, points=3),
    dict(swept_parameter="n", start=0, stop=1, points=3),
    dict(swept_parameter="n", start=1, stop=2, points=1),
    dict(swept_parameter="n", start=2, stop=1, points=3),
    dict(swept_parameter="n", start=1, stop=2, points=3, routes=("exact", "magic")),
])
def test_spec_invariants(kwargs):
    with pytest.raises(ConfigError):
        SweepSpec(**kwargs)


def test_params_at_each_axis():
    eps = 1 + 0.1j
    n = abs(eps)
    s = SweepSpec("c_tilde_real_axis", -1, 0, 3, eps=eps, scale_by_n=True)
    assert s.params_at(-0.5).n_c_tilde == pytest.approx(-0.5)
    s = SweepSpec("c_tilde_real_part", -1, 0, 3, eps=eps, c_tilde=-0.3 - 0.2j)
    assert s.params_at(-0.5).c_tilde == pytest.approx(-0.5 - 0.2j)
    s = SweepSpec("c_tilde_imag_part", -1, 0, 3, eps=eps, c_tilde=-0.896)
    assert s.params_at(0.25).c_tilde == pytest.approx(-0.896 + 0.25j)
    s = SweepSpec("n", 0.1, 3, 3, eps=1j, n_c_tilde=-0.99 - 0.1j)
    dp = s.params_at(2.0)
    assert dp.eps == pytest.approx(2j)
    assert dp.n_c_tilde == pytest.approx(-0.99 - 0.1j)
    assert n > 0


def test_columns_follow_route_layout():
    cols = sweep_columns(SMALL)
    assert cols[0] == "swept_value"
    assert cols[1:8] == [f"exact_{f}" for f in FIELDS]
    assert "reldiff_exact_fock_g2" in cols


def test_exact_and_fock_rows_agree():
    rows = run_sweep(SMALL)
    assert len(rows) == 4
    for row in rows:
        assert row.ok("exact") and row.ok("fock")
        assert row.differences[("exact", "fock")]["n_photon"] < 1e-8
        assert row.differences[("exact", "fock")]["g2"] < 1e-8


def test_output_is_deterministic_and_order_independent():
    serial = sweep_to_csv(SMALL, run_sweep(SMALL, workers=1))
    parallel = sweep_to_csv(SMALL, run_sweep(SMALL, workers=3))
    assert serial == parallel
    assert serial == sweep_to_csv(SMALL, run_sweep(SMALL))
    header = [l for l in serial.splitlines() if l.startswith("#")]
    assert any("eps=1.0,0.1" in l for l in header)
    assert any(l.startswith("# tool=subharmonic") for l in header)


def test_point_errors_stay_in_their_row():
    # n c~ = -1.5 puts a pole in the hypergeometric denominator and needs negative loss
    spec = SweepSpec("c_tilde_real_axis", -1.6, -1.4, 3, eps=1.0, scale_by_n=True, routes=("exact", "fock"))
    rows = run_sweep(spec)
    assert rows[0].ok("exact") and rows[2].ok("exact")
    assert rows[1].results["exact"].startswith("PoleProximity")
    assert rows[1].results["fock"].startswith("NonPhysicalParameters")
    header, body = read_csv(sweep_to_csv(spec, rows))
    assert body[1][header.index("exact_status")].startswith("PoleProximity")
    assert body[1][header.index("exact_n_photon_re")] == "nan"
    assert not all_failed(rows)


def test_json_output_roundtrip():
    rows = run_sweep(SweepSpec("n", 0.5, 1.0, 2, eps=1.0, n_c_tilde=-0.9, routes=("delta", "cat")))
    doc = json.loads(sweep_to_json(SweepSpec("n", 0.5, 1.0, 2, eps=1.0, n_c_tilde=-0.9, routes=("delta", "cat")), rows))
    assert len(doc["rows"]) == 2
    assert doc["rows"][0]["results"]["cat"]["tag"] == "cat"


def test_presets_build():
    for name, cfg in PRESETS.items():
        spec = SweepSpec.from_mapping(cfg)
        spec.params_at(spec.values[0])


def test_map_and_report_chain():
    cp = CircuitParams(kappa_r=4.0, kappa_s=0.01, g2=0.5, chi_ss=0.0, eps_d=2.0)
    rep = map_and_report(cp)
    assert set(rep) >= {"circuit", "system", "effective", "dimensionless", "regime"}
    assert rep["regime"] == "strong coupling"
    weak = map_and_report(EffectiveParams(E=1.0, chi_e=0.0, gamma_e2=1.0, gamma=3.0))
    assert weak["regime"] == "weak coupling / tunneling regime (out of scope)"
    assert weak["sign_condition"] > 0


# ---------------------------------------------------------------- CLI


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cli_map_circuit_experiment(tmp_path, capsys):
    cfg = tmp_path / "exp.json"
    cfg.write_text(json.dumps({"E": [-19.2, -0.07], "gamma": 3.98, "g": [7.96, -4.0], "units": "ordinary"}))
    code, out, _ = run_cli(capsys, "map-circuit", str(cfg))
    assert code == 0
    rep = json.loads(out)
    assert rep["regime"] == "strong coupling"
    assert rep["dimensionless"]["c_tilde"] == pytest.approx([-0.2788, 0.0931], abs=1e-3)


def test_cli_zero_drive_is_config_error(capsys):
    code, _, err = run_cli(capsys, "exact", "--eps", "0", "--c-tilde", "-0.5")
    assert code == 2
    assert "ZeroDrive" in err


def test_cli_unreadable_config(tmp_path, capsys):
    code, _, err = run_cli(capsys, "exact", str(tmp_path / "nope.json"))
    assert code == 2


def test_cli_flag_overrides_config(tmp_path, capsys):
    cfg = tmp_path / "p.json"
    cfg.write_text(json.dumps({"eps": [1, 0.1], "c_tilde": -0.5, "tol": 1e-3}))
    _, out, _ = run_cli(capsys, "exact", str(cfg))
    assert json.loads(out)["tol"] == 1e-3
    _, out, _ = run_cli(capsys, "--tol", "1e-9", "exact", str(cfg))
    assert json.loads(out)["tol"] == 1e-9
    _, out, _ = run_cli(capsys, "exact", str(cfg), "--tol", "1e-10", "--set", "c_tilde=-0.6")
    rep = json.loads(out)
    assert rep["tol"] == 1e-10
    assert rep["dimensionless"]["c_tilde"][0] == -0.6


def test_cli_fock_writes_density_matrix(tmp_path, capsys):
    rho = tmp_path / "rho.json"
    code, out, _ = run_cli(capsys, "fock", "--eps", "0.8", "--c-tilde", "-0.5", "--rho-json", str(rho),
                           "--rho-csv", str(tmp_path / "rho"))
    assert code == 0
    d = json.loads(rho.read_text())
    assert d["cutoff"] == json.loads(out)["cutoff"]
    re = np.loadtxt(tmp_path / "rho_re.csv", delimiter=",")
    assert np.trace(re) == pytest.approx(1.0)


def test_cli_fock_sector(capsys):
    code, out, _ = run_cli(capsys, "fock", "--eps", "1+0.1j", "--n-c-tilde", "-1", "--sector", "even")
    assert code == 0
    assert json.loads(out)["observables"]["purity"] == pytest.approx(1.0, abs=1e-9)


def test_cli_fock_without_loss_is_numerical_failure(capsys):
    code, _, err = run_cli(capsys, "fock", "--eps", "1+0.1j", "--n-c-tilde", "-1")
    assert code == 3
    assert "DegenerateNullSpace" in err


def test_cli_approx_custom_coeffs(capsys):
    code, out, _ = run_cli(capsys, "approx", "--eps", "1", "--c-tilde", "-1", "--kind", "undamped",
                           "--coeffs", '{"c_pp": 1, "c_mm": 0}')
    assert code == 0
    assert json.loads(out)["observables"]["g2"][0] == pytest.approx(1.0)
    code, _, _ = run_cli(capsys, "approx", "--eps", "1", "--c-tilde", "-1", "--kind", "undamped",
                         "--coeffs", '{"c_pp": 2, "c_mm": 0}')
    assert code == 3


def test_cli_sweep_and_exit_codes(tmp_path, capsys):
    out_path = tmp_path / "s.csv"
    code, _, _ = run_cli(capsys, "sweep", "--swept", "n", "--range", "0.5", "1", "3", "--eps", "1",
                         "--n-c-tilde", "-0.9", "--routes", "exact", "delta", "-o", str(out_path))
    assert code == 0
    header, body = read_csv(out_path.read_text())
    assert len(body) == 3 and header[0] == "swept_value"
    # every point sits on a pole
    code, _, _ = run_cli(capsys, "sweep", "--swept", "c_tilde_real_axis", "--set", "scale_by_n=true",
                         "--range", "-2", "-1", "3", "--eps", "1", "--routes", "exact")
    assert code == 3
    code, _, _ = run_cli(capsys, "sweep", "--swept", "n", "--range", "1", "0.5", "3", "--routes", "cat")
    assert code == 2


def test_cli_dist_grid(capsys):
    code, out, _ = run_cli(capsys, "dist-grid", "--preset", "balanced", "--axis", "-0.5", "0.5", "3")
    assert code == 0
    header, body = read_csv(out)
    assert float(body[1][2]) == pytest.approx(1.0)
    assert "# preset=balanced" in out
    code, _, err = run_cli(capsys, "dist-grid", "--eps", "1", "--c-tilde", "-0.5", "--axis", "-1", "1", "3")
    assert code == 3 and "SingularGridPoint" in err


def test_exact_and_cat_cross_at_different_points():
    spec = SweepSpec("c_tilde_real_axis", -0.99, -0.2, 40, eps=1 + 0.1j, scale_by_n=True, routes=("exact", "cat"))
    rows = run_sweep(spec)
    x = np.array([r.swept_value for r in rows])

    def crossings(attr):
        d = np.array([(getattr(r.results["exact"], attr) - getattr(r.results["cat"], attr)).real for r in rows])
        k = np.flatnonzero(np.sign(d[:-1]) != np.sign(d[1:]))
        return x[k] - d[k] * (x[k + 1] - x[k]) / (d[k + 1] - d[k])

    n_cross, g_cross = crossings("n_photon"), crossings("g2")
    assert len(n_cross) == 1 and len(g_cross) == 1
    assert abs(n_cross[0] - g_cross[0]) > 0.1
