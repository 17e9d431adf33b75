import json

import numpy as np

from geostable.cli import main


def run(argv):
    return main(argv)


def test_classify_stdout(capsys):
    assert run(["classify", "--alpha", "1.5", "--dim", "1"]) == 0
    assert capsys.readouterr().out.strip() == "Recurrent"
    assert run(["classify", "--alpha", "0.5", "--dim", "2"]) == 0
    assert capsys.readouterr().out.strip() == "Transient"


def test_classify_rejects_bad_alpha(capsys):
    assert run(["classify", "--alpha", "3.0", "--dim", "1"]) == 2
    assert "alpha" in capsys.readouterr().err


def test_density_refuses_subthreshold_inversion(tmp_path, capsys):
    code = run(["density", "--alpha", "2", "--dim", "1", "--t", "0.4",
                "--method", "inversion", "--output-path", str(tmp_path)])
    assert code == 2
    err = capsys.readouterr().err
    assert "d/alpha" in err and "0.5" in err


def test_density_inversion_writes_table_and_manifest(tmp_path):
    code = run(["density", "--alpha", "2", "--dim", "1", "--t", "1",
                "--method", "inversion", "--x-min", "-4", "--x-max", "4",
                "--n", "41", "--output-path", str(tmp_path)])
    assert code == 0
    table = (tmp_path / "density.csv").read_text().strip().splitlines()
    assert table[0] == "x,p"
    assert len(table) == 42
    header = json.loads((tmp_path / "density_header.json").read_text())
    assert header["method"] == "Inversion"
    manifest = json.loads((tmp_path / "density_manifest.json").read_text())
    assert manifest["subcommand"] == "density"
    assert manifest["config"]["t"] == 1.0
    assert str(tmp_path / "density.csv") in manifest["outputs"]
    # values match the Laplace closed form
    mid = table[21].split(",")
    assert abs(float(mid[0])) < 1e-12
    assert abs(float(mid[1]) - 0.5) < 1e-8


def test_mc_subcommands_require_seed(tmp_path, capsys):
    assert run(["sample", "--alpha", "1.5", "--dim", "1", "--t", "1",
                "--n-samples", "100", "--output-path", str(tmp_path)]) == 2
    assert "--seed" in capsys.readouterr().err
    assert run(["density", "--alpha", "1.5", "--dim", "1", "--t", "1",
                "--method", "mc", "--output-path", str(tmp_path)]) == 2


def test_sample_is_seed_deterministic(tmp_path):
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    for out in (out_a, out_b):
        assert run(["sample", "--alpha", "1.5", "--dim", "1", "--t", "2",
                    "--n-samples", "500", "--seed", "9", "--output-path", str(out)]) == 0
    assert (out_a / "samples.csv").read_bytes() == (out_b / "samples.csv").read_bytes()


def test_config_file_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("alpha = 0.5\ndim = 2\n")
    # file value applies
    assert run(["classify", "--config", str(cfg)]) == 0
    assert capsys.readouterr().out.strip() == "Transient"
    # flag beats file
    assert run(["classify", "--config", str(cfg), "--alpha", "2.0"]) == 0
    assert capsys.readouterr().out.strip() == "Recurrent"


def test_config_file_unknown_key_rejected(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("alpha = 1.5\nbogus = 3\n")
    assert run(["classify", "--config", str(cfg)]) == 2
    assert "bogus" in capsys.readouterr().err


def test_symbol_and_kfun_tables(tmp_path):
    assert run(["symbol", "--alpha", "2", "--dim", "1", "--x-min", "0",
                "--x-max", "2", "--n", "5", "--output-path", str(tmp_path)]) == 0
    lines = (tmp_path / "symbol.csv").read_text().strip().splitlines()
    assert lines[0] == "xi,psi"
    xi, psi = (float(v) for v in lines[-1].split(","))
    assert xi == 2.0 and abs(psi - np.log(5.0)) < 1e-12
    assert run(["kfun", "--alpha", "2", "--dim", "1", "--x-min", "1", "--x-max", "2",
                "--n", "3", "--output-path", str(tmp_path)]) == 0
    klines = (tmp_path / "kfunction.csv").read_text().strip().splitlines()
    assert klines[0] == "r,k_value"
    r0, k0 = (float(v) for v in klines[1].split(","))
    assert abs(k0 - np.exp(-r0)) < 1e-9


def test_selfdecomp_certificate(tmp_path, capsys):
    assert run(["selfdecomp", "--alpha", "1.5", "--dim", "1", "--t", "2",
                "--n", "12", "--output-path", str(tmp_path)]) == 0
    assert "monotone_certificate: True" in capsys.readouterr().out
    cert = json.loads((tmp_path / "selfdecomp_certificate.json").read_text())
    assert cert["monotone_certificate"] is True


def test_levy_with_asymptotics_report(tmp_path):
    assert run(["levy", "--alpha", "1.5", "--dim", "1", "--n", "8",
                "--asymptotics", "smallx", "--output-path", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "asymptotic_report.json").read_text())
    assert rep["regime"] == "SmallX"
    assert rep["relative_gap_paper"] > 0.0
    assert rep["relative_gap_oracle"] < 0.02


def test_groundstate_run(tmp_path, capsys):
    assert run(["groundstate", "--alpha", "1.5", "--L", "16", "--N", "128",
                "--mu-plus", "indicator:half_width=1,height=0.5",
                "--mu-minus", "indicator:half_width=2,height=1",
                "--output-path", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "lambda" in out
    gs = json.loads((tmp_path / "ground_state.json").read_text())
    assert 0.0 < gs["lambda"] <= 0.26
    csv_lines = (tmp_path / "ground_state.csv").read_text().strip().splitlines()
    assert csv_lines[0] == "x,h"
    assert len(csv_lines) == 129


def test_groundstate_bad_measure_is_config_error(tmp_path, capsys):
    assert run(["groundstate", "--alpha", "1.5", "--mu-plus", "indicator:half_width=10",
                "--output-path", str(tmp_path)]) == 2
    assert "support" in capsys.readouterr().err


def test_feynman_kac_run(tmp_path, capsys):
    code = run(["feynman-kac", "--alpha", "1.5", "--t", "0.25", "--dt", "0.03125",
                "--n-paths", "2000", "--seed", "5", "--output-path", str(tmp_path)])
    assert code == 0
    data = json.loads((tmp_path / "feynman_kac.json").read_text())
    assert 0.0 <= data["estimate"] <= 1.0
    assert data["std_error"] > 0
    assert data["seed"] == 5
    assert run(["feynman-kac", "--alpha", "1.5", "--t", "0.25", "--dt", "0.03125",
                "--n-paths", "2000", "--output-path", str(tmp_path)]) == 2
    assert "--seed" in capsys.readouterr().err


def test_kato_run(tmp_path):
    assert run(["kato", "--alpha", "1.5", "--t-values", "1,0.5,0.1",
                "--output-path", str(tmp_path)]) == 0
    lines = (tmp_path / "kato.csv").read_text().strip().splitlines()
    assert lines[0] == "t,value"
    vals = [float(line.split(",")[1]) for line in lines[1:]]
    assert vals[0] > vals[1] > vals[2] > 0


def test_verify_core_deterministic_outputs(tmp_path, capsys):
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    for out in (out_a, out_b):
        assert run(["verify", "--suite", "core", "--seed", "42",
                    "--output-path", str(out)]) == 0
    stdout = capsys.readouterr().out
    assert "PASS" in stdout and "FAIL" not in stdout
    assert (out_a / "verify_core.json").read_bytes() == (out_b / "verify_core.json").read_bytes()


def test_verify_unknown_suite(tmp_path, capsys):
    assert run(["verify", "--suite", "nope", "--output-path", str(tmp_path)]) == 2
    assert "suite" in capsys.readouterr().err
