import inspect
import json

import pytest

import logtauber
from logtauber import RunConfig
from logtauber.cli import OPERATION_COMMANDS, build_parser, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_mean_row(capsys):
    code, out, _ = run(capsys, "mean", "--fn", "S1", "--t-max", "e^pi")
    assert code == 0
    header, row = out.strip().splitlines()
    assert header == "t,log_t,loglog_t,tau_re,tau_im"
    assert float(row.split(",")[3]) == pytest.approx(0.6366198, abs=1e-7)


def test_mean_curve_and_plot_data(capsys, tmp_path):
    plot = tmp_path / "tau.dat"
    code, out, _ = run(capsys, "mean", "--fn", "S1", "--t-max", "e^e^3", "--points", "20",
                       "--plot-data", str(plot))
    assert code == 0 and len(out.strip().splitlines()) == 21
    cols = [line.split() for line in plot.read_text().splitlines()]
    assert len(cols) == 20 and all(len(c) == 2 for c in cols)


def test_verify_lemma1(capsys):
    code, out, _ = run(capsys, "verify-lemma", "1", "--fn", "L2", "--lambda", "2", "--x0", "e^2")
    assert code == 0
    res = json.loads(out)["result"]
    assert res["passed"] and res["B1"] == pytest.approx(2.8853901, abs=1e-7)


def test_verify_lemma_hypothesis_failure(capsys):
    code, _, err = run(capsys, "verify-lemma", "1", "--fn", "S1", "--lambda", "2", "--x0", "e^2")
    assert code == 1 and "hypothesis not met" in err


def test_suite_default_corpus(capsys):
    code, out, _ = run(capsys, "suite")
    assert code == 0 and "counterexample=0" in out


def test_suite_json_and_bundles(capsys, tmp_path):
    fn = tmp_path / "U2.dsl"
    fn.write_text("piece [1, e): 3; piece [e, inf): 3 - 1 / log(x);")
    out_dir = tmp_path / "bundle"
    out_dir.mkdir()
    code, out, _ = run(capsys, "suite", "--only", "C1", "--fn-file", str(fn), "--out", str(out_dir), "--json")
    assert code == 0
    doc = json.loads(out)
    assert {c["spec"] for c in doc["result"]["cases"]} == {"C1", "U2"}
    assert (out_dir / "suite.json").exists() and (out_dir / "theorem1_U2.csv").exists()


def test_determinism(capsys):
    argv = ("stat-limit", "--fn", "S2", "--horizons", "1e2,1e3,1e4,1e6")
    a = run(capsys, *argv)
    b = run(capsys, *argv)
    assert a == b and a[0] == 0
    assert json.loads(a[1])["result"]["kind"] == "statistical"


def test_exit_codes(capsys, tmp_path):
    assert run(capsys, "window", "--fn", "S1", "--eps", "0.5")[0] == 1
    assert run(capsys, "ord-limit", "--fn", "S1")[0] == 1
    wobble = tmp_path / "w.dsl"
    wobble.write_text("1 + 0.075 * sin(log(x))")
    assert run(capsys, "ord-limit", "--fn-file", str(wobble))[0] == 3
    assert run(capsys, "ord-limit", "--fn", "V1")[0] == 0


@pytest.mark.parametrize("argv", [
    [], ["mean"], ["mean", "--fn", "Q9", "--t-max", "5"], ["mean", "--fn", "S1", "--t-max", "e^("],
    ["frobnicate"], ["check-condition", "kepler", "--fn", "V1", "--C", "1"],
])
def test_usage_errors(capsys, argv):
    assert main(argv) == 2


def test_module_errors_are_rendered(capsys, tmp_path):
    bad = tmp_path / "bad.dsl"
    bad.write_text("sin(x) +\n * 2")
    code, _, err = run(capsys, "eval", "--fn-file", str(bad), "--x", "2")
    assert code == 2 and "DSLSyntaxError" in err and "line 2" in err


def test_config_merge(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"log_horizons": [8, 16, 32, 64], "ordinary_tol": 0.05}))
    code, out, _ = run(capsys, "ord-limit", "--fn", "C1", "--config", str(cfg))
    prov = json.loads(out)["provenance"]
    assert code == 0 and prov["config"]["log_horizons"] == [8, 16, 32, 64]
    assert prov["config"]["ordinary_tol"] == 0.05 and "function" in prov
    cfg.write_text(json.dumps({"horizon": 3}))
    assert run(capsys, "ord-limit", "--fn", "C1", "--config", str(cfg))[0] == 2


def test_out_file(capsys, tmp_path):
    target = tmp_path / "m.csv"
    code, out, _ = run(capsys, "modulus", "--fn", "L2", "--lambdas", "2,1.5", "--x-horizon", "e^8",
                       "--out", str(target))
    assert code == 0 and out == ""
    assert target.read_text().startswith("lambda,value")


@pytest.mark.parametrize("argv,key", [
    (["chain", "--t", "e^16", "--x", "e^2", "--fn", "L2"], "q"),
    (["j-decomp", "--fn", "V1", "--x", "e^3", "--t", "e^10", "--x0", "e^2"], "residual"),
    (["liminf", "--fn", "L2", "--lambda", "2", "--x0", "e^2"], "passed"),
    (["check-condition", "landau", "--fn", "V1", "--C", "1", "--x0", "e"], "condition"),
    (["witness-theorem1", "--fn", "V1", "--ell", "2", "--eps", "0.1", "--lambda", "2"], "invariants"),
    (["eval", "--fn", "L1", "--x", "e^e^2"], None),
    (["integrate", "--fn", "S1", "--b", "e^pi"], "integral"),
    (["measure", "--fn", "S2", "--ell", "0", "--eps", "0.5", "--b", "1e3"], "measure"),
    (["theorem", "--id", "A", "--fn", "V1"], "status"),
    (["classify", "--fn", "C1"], "ordinary"),
])
def test_json_commands(capsys, argv, key):
    code, out, _ = run(capsys, *argv)
    assert code == 0
    res = json.loads(out)["result"]
    if key:
        assert key in res


def test_csv_commands(capsys):
    code, out, _ = run(capsys, "density", "--fn", "S2", "--ell", "0", "--eps", "0.5",
                       "--horizons", "1e2,1e3,1e4")
    assert code == 0 and out.startswith("eps,b,measure,density")
    code, out, _ = run(capsys, "show", "--fn", "V1", "--format", "json")
    assert code == 0 and json.loads(out)["name"] == "V1"
    code, out, _ = run(capsys, "corpus", "list")
    assert code == 0 and len(out.strip().splitlines()) == 7


def test_every_operation_has_one_command():
    sub = build_parser()._subparsers._group_actions[0].choices
    for cmd in OPERATION_COMMANDS.values():
        assert cmd in sub
    for required in ("mean", "stat-limit", "modulus", "check-condition", "verify-lemma",
                     "witness-theorem1", "j-decomp", "suite", "corpus"):
        assert required in sub
    public_ops = {name for name in logtauber.__all__
                  if inspect.isfunction(getattr(logtauber, name))
                  and name not in ("get", "evaluate")}
    covered = {key.split(".")[1] for key in OPERATION_COMMANDS}
    assert public_ops <= covered | {"from_json"}


def test_run_config_validation():
    with pytest.raises(ValueError):
        RunConfig(ordinary_tol=0)
    with pytest.raises(ValueError):
        RunConfig(log_horizons=(8.0, 4.0, 16.0))
    with pytest.raises(ValueError):
        RunConfig(epsilons=(0.5, -0.1))
    assert RunConfig().merged({"epsilons": [0.4, 0.2]}).epsilons == (0.4, 0.2)
