import json

import numpy as np
import pytest

from liouvopt.cli import main


def run_ok(argv):
    rc = main(argv)
    assert rc == 0
    return rc


def read_report(outdir):
    with open(outdir / "report.json") as fh:
        return json.load(fh)


def test_no_arguments_prints_usage(capsys):
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_bare_run_needs_a_problem(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["run"])
    assert exc.value.code == 2
    assert "problem id" in capsys.readouterr().err


def test_unknown_config_key_names_the_file(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("problem = ex1\nwibble = 3\n")
    assert main(["run", "--config", str(cfg)]) == 2
    err = capsys.readouterr().err
    assert "unknown config key 'wibble'" in err and str(cfg) in err


def test_duplicate_config_key_is_rejected(tmp_path, capsys):
    cfg = tmp_path / "dup.cfg"
    cfg.write_text("problem = ex1\nnx = 8\nnx = 16\n")
    assert main(["run", "--config", str(cfg)]) == 2
    assert "more than once" in capsys.readouterr().err


def test_invalid_run_config_is_a_clean_error(capsys):
    assert main(["run", "ex1", "--threads", "0"]) == 2
    assert "threads must be at least 1" in capsys.readouterr().err


def test_classical_preset_run_writes_the_artifacts(tmp_path, capsys):
    out = tmp_path / "out"
    run_ok(["run", "ex1", "--nx", "16", "--nxi", "16", "-T", "0.1",
            "--outdir", str(out), "--dump-matrix"])
    assert capsys.readouterr().out.startswith("wrote")
    for name in ("field.csv", "moments.csv", "report.json", "matrix.coo"):
        assert (out / name).exists()
    report = read_report(out)
    assert report["problem"] == "ex1" and report["mode"] == "classical"
    assert report["nx"] == 16 and report["dt"] == 0.02
    assert report["audit"]["s_r"] <= 4
    # transmission rescales slowness, so plain mass is only roughly stable
    assert 0.0 < report["mass_final"] < 1.5 * report["mass_initial"]
    r, c, v = (out / "matrix.coo").read_text().splitlines()[0].split()
    int(r), int(c), float(v)
    header, first = (out / "moments.csv").read_text().splitlines()[:2]
    assert header == "x,rho,u"
    assert len(first.split(",")) == 3


def test_reruns_are_bit_identical(tmp_path):
    outs = []
    for tag in ("a", "b"):
        out = tmp_path / tag
        run_ok(["run", "ex1", "--nx", "16", "--nxi", "16", "-T", "0.2",
                "--outdir", str(out)])
        outs.append(out)
    for name in ("field.csv", "moments.csv", "report.json"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


def test_memory_preflight_refuses_oversized_states(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", "ex1", "--mode", "schrod", "--outdir", str(out)]) == 2
    err = capsys.readouterr().err
    assert "GiB cap" in err and "--mem-cap-gib" in err


def test_schrod_mode_records_the_pipeline(tmp_path):
    out = tmp_path / "out"
    run_ok(["run", "ex1", "--nx", "8", "--nxi", "8", "-T", "0.1",
            "--np", "256", "--schrod-engine", "exact", "--mode", "schrod",
            "--outdir", str(out)])
    report = read_report(out)
    schrod = report["schrod"]
    assert schrod["n_p"] == 256
    assert schrod["recovery_valid"] is True
    assert schrod["warnings"] == []
    assert schrod["p_star"] > schrod["lambda_plus_max"] * 0.1
    assert (out / "field.csv").exists() and (out / "moments.csv").exists()


def test_compare_mode_reports_the_gap(tmp_path):
    out = tmp_path / "out"
    run_ok(["run", "ex1", "--nx", "8", "--nxi", "8", "-T", "0.1",
            "--np", "256", "--schrod-engine", "exact", "--mode", "compare",
            "--outdir", str(out)])
    report = read_report(out)
    assert (out / "field_schrod.csv").exists()
    assert 0.0 <= report["diff_linf"] < 0.5
    assert report["diff_l1"] >= 0.0


def test_ex3_schrod_run_reports_both_level_set_members(tmp_path):
    out = tmp_path / "out"
    run_ok(["run", "ex3", "--nx", "8", "--nxi", "8", "-T", "0.1",
            "--np", "256", "--schrod-engine", "exact", "--mode", "schrod",
            "--outdir", str(out)])
    report = read_report(out)
    for label in ("schrod_psi", "schrod_phi"):
        assert report[label]["p_star"] == 14.513
    assert (out / "field_phi.csv").exists()
    assert (out / "moments.csv").exists()


def test_advection_run_writes_the_node_profile(tmp_path):
    out = tmp_path / "out"
    run_ok(["run", "advection", "--nx", "32", "-T", "0.25",
            "--outdir", str(out)])
    lines = (out / "field.csv").read_text().splitlines()
    assert lines[0] == "x,u"
    assert len(lines) == 1 + 2 * 32
    u = np.array([float(line.split(",")[1]) for line in lines[1:]])
    assert np.all(np.isfinite(u))
    report = read_report(out)
    assert report["dt"] > 0.0


def test_convergence_mode_writes_the_ladder(tmp_path):
    out = tmp_path / "out"
    run_ok(["run", "ex1", "--mode", "convergence", "--levels", "8,16",
            "--outdir", str(out)])
    lines = (out / "convergence.csv").read_text().splitlines()
    assert lines[0] == "metric,n,dt,l1_error,order"
    report = read_report(out)
    assert report["levels"] == [8, 16]
    assert set(report["orders"]) == {"f", "rho", "u"}
    assert all(len(v) == 1 for v in report["orders"].values())


def test_custom_problem_from_a_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "problem = custom\n"
        "mode = classical\n"
        "nx = 16\n"
        "nxi = 16\n"
        "dt = 0.05\n"
        "horizon = 0.2\n"
        "xdomain = -1 1\n"
        "xidomain = -1 1\n"
        "speed = -1 0 : 1.0\n"
        "speed = 0 1 : 0.5\n"
        "f0 = exp(-16*x*x) * exp(-16*xi*xi)\n")
    out = tmp_path / "out"
    run_ok(["run", "--config", str(cfg), "--outdir", str(out)])
    report = read_report(out)
    assert report["problem"] == "custom" and report["nx"] == 16
    assert report["mass_initial"] > 0.0
    assert (out / "field.csv").exists()
