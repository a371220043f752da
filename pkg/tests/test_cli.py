import pytest

from cimlab import reporting
from cimlab.cli import EXIT_AUDIT, EXIT_OK, EXIT_USAGE, main


def test_certify_writes_certificate_and_margins(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["certify", "--out", str(out), "--delta", "1.5", "--eps", "1e-3"]) == EXIT_OK
    schema, header, rows = reporting.read_csv(out / "certificate.csv")
    assert schema == "# schema: cimlab.certificate.v1"
    assert header == ["delta", "ell", "n_star_parabolic", "eps", "n_star_hyperbolic", "eps_s", "eps_s_found"]
    record = dict(zip(header, rows[0]))
    assert record["n_star_parabolic"] == "26"
    assert record["n_star_hyperbolic"] == "13"
    assert record["eps_s_found"] == "1"
    assert (out / "margins.csv").is_file()
    assert "N_p*=26 N_eps*=13" in capsys.readouterr().out


def test_certify_fails_when_the_parabolic_split_exceeds_n_max(tmp_path, capsys):
    out = tmp_path / "wide"
    assert main(["certify", "--out", str(out), "--delta", "3", "--eps", "1e-3"]) == EXIT_AUDIT
    assert "exceeds n_max=64" in capsys.readouterr().err
    _, header, rows = reporting.read_csv(out / "certificate.csv")
    assert int(dict(zip(header, rows[0]))["n_star_parabolic"]) > 64


def test_delta_at_most_one_is_a_usage_error(tmp_path):
    assert main(["certify", "--out", str(tmp_path), "--delta", "0.9"]) == EXIT_USAGE


def test_bad_arguments_are_usage_errors(tmp_path):
    assert main(["nope"]) == EXIT_USAGE
    assert main(["certify", "--delta", "abc"]) == EXIT_USAGE
    assert main(["certify", "--config", str(tmp_path / "absent.env")]) == EXIT_USAGE


def test_simulate_is_deterministic(tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    args = ["simulate", "--modes", "8", "--T", "0.2", "--seed", "3"]
    assert main([*args, "--out", str(first)]) == EXIT_OK
    assert main([*args, "--out", str(second)]) == EXIT_OK
    for name in ("trajectory.csv", "audits.csv"):
        assert (first / name).read_bytes() == (second / name).read_bytes()
    schema, header, _ = reporting.read_csv(first / "trajectory.csv")
    assert schema == "# schema: cimlab.trajectory.v1"
    assert header == ["time", *[f"coeff_{i}" for i in range(1, 9)], "l2", "h1", "lyapunov"]


def test_simulate_hyperbolic(tmp_path):
    out = tmp_path / "h"
    code = main(["simulate", "--flow", "hyperbolic", "--eps", "0.1", "--modes", "6", "--T", "0.2", "--out", str(out)])
    assert code == EXIT_OK
    _, header, rows = reporting.read_csv(out / "audits.csv")
    assert [row[0] for row in rows] == ["energy_decay", "decomposition"]
    assert reporting.read_csv(out / "trajectory.csv")[0] == "# schema: cimlab.hyperbolic_trajectory.v1"
    _, header, rows = reporting.read_csv(out / "decomposition.csv")
    assert header == ["time", "v_xeps1", "w_xeps1", "w_n3"]
    assert rows[0][2] == "0"


def test_synthetic_robustness_fit(tmp_path):
    config = tmp_path / "lab.env"
    config.write_text("EPS_LIST=0.01,0.0025,0.000625\nSYNTHETIC_DISTANCES=0.2,0.1,0.05\n")
    out = tmp_path / "fit"
    assert main(["robustness", "--config", str(config), "--out", str(out)]) == EXIT_OK
    _, header, rows = reporting.read_csv(out / "fit.csv")
    fit = dict(zip(header, rows[0]))
    assert float(fit["phi"]) == pytest.approx(0.5, rel=1e-9)
    assert float(fit["Lambda"]) == pytest.approx(2.0, rel=1e-9)
    assert len(reporting.read_csv(out / "sweep.csv")[2]) == 3


def test_robustness_run_is_deterministic(tmp_path):
    config = tmp_path / "lab.env"
    config.write_text(
        "N_STAR=1\nN_MODES=3\nDATA_MODES=2\nGRID_EXTENT=0.4\nT_RELAX=0.5\nT_HORIZON=0.2\nT_GRID_SIZE=3\n"
        "GRAPH_TOL=1e-9\nN_TAU=1\nEPS_LIST=0.04,0.02,0.01\nSINGULAR_MODES=4\nSINGULAR_EPS=0.04,0.02,0.01\n"
    )
    first, second = tmp_path / "a", tmp_path / "b"
    for out in (first, second):
        assert main(["robustness", "--config", str(config), "--seed", "5", "--out", str(out)]) == EXIT_OK
    for name in ("sweep.csv", "fit.csv", "singular_limit.csv"):
        assert (first / name).read_bytes() == (second / name).read_bytes()
    _, _, rows = reporting.read_csv(first / "sweep.csv")
    assert [float(row[0]) for row in rows] == [0.04, 0.02, 0.01]


def test_robustness_refuses_uncertified_eps(tmp_path, capsys):
    code = main(["robustness", "--eps-list", "0.1,0.05,0.01", "--out", str(tmp_path)])
    assert code == EXIT_USAGE
    assert "refused" in capsys.readouterr().err


def test_manifold_needs_enough_modes(tmp_path):
    assert main(["manifold", "--modes", "8", "--out", str(tmp_path)]) == EXIT_USAGE


def test_manifold_small_run(tmp_path):
    config = tmp_path / "lab.env"
    config.write_text(
        "N_STAR=2\nN_MODES=4\nGRID_EXTENT=0.5\nT_RELAX=0.5\nT_HORIZON=0.2\nT_GRID_SIZE=3\nGRAPH_TOL=1e-9\n"
    )
    out = tmp_path / "m"
    assert main(["manifold", "--config", str(config), "--out", str(out)]) == EXIT_OK
    schema, header, rows = reporting.read_csv(out / "parabolic_cloud.csv")
    assert schema == "# schema: cimlab.parabolic_cloud.v1"
    assert header == ["tau", "t", "coeff_1", "coeff_2", "coeff_3", "coeff_4"]
    assert len(rows) == 9 * 3
    _, _, audits = reporting.read_csv(out / "manifold_audits.csv")
    assert [row[0] for row in audits] == ["lipschitz", "positive_invariance", "tail_bound"]
