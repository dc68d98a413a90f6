import json
import math

import numpy as np
import pytest

from efgp import errors
from efgp.cli import main, parse_config, run

PI = math.pi


def _cfg(**kw):
    return json.dumps(kw)


def test_parse_valid_bound_check():
    text = _cfg(command="bound-check",
                potential={"family": "coulomb", "c": 1.0},
                phi=1.5707963, N=100000,
                checkpoints=[1000, 10000, 100000],
                x_values=[1.0471976], output_dir="out")
    cfg = parse_config(text)
    assert cfg.command == "bound-check"
    assert cfg.n == 100000
    assert cfg.potential.family == "coulomb"
    assert cfg.x_values == (1.0471976,)


def test_parse_rejects_bad_phi():
    text = _cfg(command="spectrum",
                potential={"family": "coulomb", "c": 1.0},
                phi=3.5, N=100, window=[-2.0, 2.0])
    with pytest.raises(errors.ValidationError) as exc:
        parse_config(text)
    assert exc.value.field == "phi"


def test_parse_rejects_unknown_fields_with_path():
    text = _cfg(command="spectrum",
                potential={"family": "coulomb", "c": 1.0, "frobnicate": 3},
                phi=1.0, N=100, window=[-2.0, 2.0])
    with pytest.raises(errors.ValidationError) as exc:
        parse_config(text)
    assert exc.value.field == "potential.frobnicate"
    with pytest.raises(errors.ValidationError) as exc2:
        parse_config(_cfg(command="prufer", potential={"family": "coulomb"},
                          phi=1.0, N=10, x_values=[1.0], bogus=1))
    assert exc2.value.field == "bogus"


def test_parse_not_json():
    with pytest.raises(errors.ParseError):
        parse_config("{not json")


def test_parse_requires_fields():
    with pytest.raises(errors.ValidationError) as exc:
        parse_config(_cfg(command="spectrum", phi=1.0, N=100,
                          window=[-2.0, 2.0]))
    assert exc.value.field == "potential"
    with pytest.raises(errors.ValidationError):
        parse_config(_cfg(command="bound-check",
                          potential={"family": "coulomb", "c": 1.0},
                          phi=1.0, N=100))  # neither x_values nor window


def test_parse_checkpoint_bounds():
    with pytest.raises(errors.ValidationError) as exc:
        parse_config(_cfg(command="construct", x=1.0, c=3.0, N=1000,
                          checkpoints=[10, 2000]))
    assert exc.value.field == "checkpoints"


def test_subcritical_construct_parses_then_fails_downstream(tmp_path):
    # parse accepts it; the amplitude check fires inside the pipeline with
    # the stage name attached
    cfg = parse_config(_cfg(command="construct", x=1.5707963, c=1.9, N=1000,
                            output_dir=str(tmp_path / "o")))
    with pytest.raises(errors.PipelineError) as exc:
        run(cfg)
    assert exc.value.stage == "construct"
    assert isinstance(exc.value.original, errors.SubcriticalAmplitude)


def test_spectrum_free_n5(tmp_path):
    out = tmp_path / "spec"
    cfg = parse_config(_cfg(command="spectrum",
                            potential={"family": "coulomb", "c": 0.0},
                            phi=PI / 2, N=5, window=[-2.0, 2.0],
                            output_dir=str(out)))
    report = run(cfg)
    assert report["exit_code"] == 0
    lines = (out / "spectrum.csv").read_text().splitlines()
    assert lines[0].startswith("# efgp ")
    assert lines[1] == ("E,weight,x,certificate_N,certificate_RNsq,"
                        "certificate_passed,decay_exponent")
    rows = [ln.split(",") for ln in lines[2:]]
    assert len(rows) == 5
    got = sorted(float(r[0]) for r in rows)
    expect = sorted(2 * math.cos(k * PI / 6) for k in range(1, 6))
    assert np.max(np.abs(np.array(got) - np.array(expect))) <= 1e-10


def test_lemma_sums_degenerate_exit_code(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text(_cfg(command="lemma-sums",
                         potential={"family": "coulomb", "c": 1.0},
                         phi=PI / 2, N=1000,
                         x_values=[PI / 3, PI / 3],
                         output_dir=str(tmp_path / "o")))
    assert main([str(path), "--quiet"]) == 1
    err = capsys.readouterr().err
    assert "diagnostics" in err and str(path) in err


def test_bound_check_negative_control_exit_2(tmp_path):
    path = tmp_path / "neg.json"
    path.write_text(_cfg(command="bound-check",
                         potential={"family": "coulomb", "c": 0.0},
                         phi=PI / 2, N=100, window=[-2.0, 2.0],
                         certified_only=False, C=0.0,
                         output_dir=str(tmp_path / "o")))
    assert main([str(path), "--quiet"]) == 2
    rep = json.loads((tmp_path / "o" / "report.json").read_text())
    assert rep["payload"]["lhs"] == pytest.approx(50.5, abs=1e-6)
    assert rep["payload"]["rhs"] == 1.0
    assert rep["payload"]["satisfied"] is False


def test_bound_check_certified_construct_pipeline(tmp_path):
    out = tmp_path / "o"
    cfg = parse_config(_cfg(command="construct", x=1.5707963267948966,
                            c=2.5, N=100000, output_dir=str(out)))
    report = run(cfg)
    assert report["exit_code"] == 0
    payload = report["payload"]
    assert payload["record"]["certificate_passed"] is True
    assert payload["bound"]["lhs"] == pytest.approx(1.0, abs=0.02)
    assert payload["bound"]["satisfied"] is True
    assert abs(payload["fitted_exponent"] - 0.625) <= 0.05 * 0.625


def test_table_values_file(tmp_path):
    vf = tmp_path / "table.txt"
    vf.write_text("0.5\n-0.25\n\n# comment\n0.125\n")
    cfg = parse_config(_cfg(command="prufer",
                            potential={"family": "table",
                                       "values_file": str(vf)},
                            phi=1.0, N=10, x_values=[1.0],
                            output_dir=str(tmp_path / "o")))
    assert cfg.potential.table == (0.5, -0.25, 0.125)
    report = run(cfg)
    assert report["exit_code"] == 0
    csv = (tmp_path / "o" / "trajectory_1.csv").read_text().splitlines()
    assert csv[1] == "n,u,R,theta,theta_bar,ln_R"
    assert len(csv) == 12  # comment + header + 10 rows


def test_csv_outputs_deterministic(tmp_path):
    def run_once(outdir):
        cfg = parse_config(_cfg(command="prufer",
                                potential={"family": "random_sign", "c": 1.0,
                                           "seed": 9},
                                phi=1.2, N=5000,
                                x_values=[0.9, 2.0],
                                output_dir=str(outdir)))
        run(cfg)
        return [(outdir / f"trajectory_{j}.csv").read_bytes() for j in (1, 2)]

    a = run_once(tmp_path / "a")
    b = run_once(tmp_path / "b")
    assert a == b


def test_report_json_stable_and_versioned(tmp_path):
    out = tmp_path / "o"
    cfg = parse_config(_cfg(command="spectrum",
                            potential={"family": "coulomb", "c": 1.0},
                            phi=PI / 2, N=10, window=[-1.0, 1.0],
                            output_dir=str(out)))
    run(cfg)
    text = (out / "report.json").read_text()
    rep = json.loads(text)
    assert rep["version"] == "0.1.0"
    assert rep["backend"] in ("numba", "numpy")
    assert rep["config_hash"]
    # stable key order: dumping again with sort_keys reproduces the file
    assert text == json.dumps(rep, sort_keys=True, indent=2) + "\n"


def test_threads_give_same_results(tmp_path):
    base = _cfg(command="lemma-sums",
                potential={"family": "coulomb", "c": 1.0},
                phi=PI / 2, N=20000, x_values=[PI / 3, PI / 4, 2 * PI / 5],
                output_dir="PLACEHOLDER")
    cfg1 = parse_config(base.replace("PLACEHOLDER", str(tmp_path / "s")))
    cfg2 = parse_config(base.replace("PLACEHOLDER", str(tmp_path / "t")))
    run(cfg1, threads=1)
    run(cfg2, threads=3)
    d1 = (tmp_path / "s" / "diagnostics.json").read_text()
    d2 = (tmp_path / "t" / "diagnostics.json").read_text()
    assert d1 == d2
