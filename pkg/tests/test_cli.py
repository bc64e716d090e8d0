import json
import subprocess
import sys

import pytest

from gammakernels import cli
from gammakernels.cli import (
    EXIT_CONFIG,
    EXIT_FAIL,
    EXIT_OK,
    EXIT_POLE,
    ConfigError,
    build_parser,
    format_complex,
    main,
    parse_complex,
    resolve_config,
)
from gammakernels.verify.suites import REGISTRY

FAST = ["--suite", "gamma-core", "--suite", "lemma34", "--points", "10"]


def run_cli(tmp_path, *extra, name="out"):
    out = tmp_path / name
    code = main(["run", *FAST, "--output", str(out), *extra])
    return code, out


def test_parse_complex_forms():
    assert parse_complex("0.41+0.2i") == 0.41 + 0.2j
    assert parse_complex("0.41+0.2j") == 0.41 + 0.2j
    assert parse_complex("-0.5i") == -0.5j
    assert parse_complex(3) == 3
    assert parse_complex([0.2, 0.1]) == 0.2 + 0.1j
    with pytest.raises(ConfigError):
        parse_complex("abc")


def test_format_complex():
    assert format_complex(1.0) == "1.000000000000000 + 0i"
    assert format_complex(0.5 - 0.25j) == "0.5000000000000000 - 0.2500000000000000i"


def test_run_pass_and_reports(tmp_path, capsys):
    code, out = run_cli(tmp_path)
    assert code == EXIT_OK
    summary = json.loads((out / "summary.json").read_text())
    assert summary["verdict"] == "PASS"
    assert [s["suite"] for s in summary["suites"]] == ["gamma-core", "lemma34"]
    report = json.loads((out / "gamma-core.json").read_text())
    # the gamma checks never drop below 100 points
    assert report["n_points"] == 100 and report["seed"] == 42
    assert "2/2 suites passed" in capsys.readouterr().out
    meta = json.loads((out / "run-metadata.json").read_text())
    assert set(meta["suite_seconds"]) == {"gamma-core", "lemma34"}


def test_reports_byte_identical_across_runs_and_jobs(tmp_path):
    _, first = run_cli(tmp_path, name="a")
    _, second = run_cli(tmp_path, "--jobs", "2", name="b")
    for name in ("gamma-core.json", "lemma34.json", "summary.json", "summary.txt"):
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_seed_changes_points_not_verdicts(tmp_path):
    _, first = run_cli(tmp_path, name="a")
    _, second = run_cli(tmp_path, "--seed", "9", name="b")
    a = json.loads((first / "lemma34.json").read_text())
    b = json.loads((second / "lemma34.json").read_text())
    assert a["verdict"] == b["verdict"] == "PASS"
    assert a["subchecks"][0]["points"] != b["subchecks"][0]["points"]


def test_json_format(tmp_path, capsys):
    code, _ = run_cli(tmp_path, "--format", "json")
    assert code == EXIT_OK
    assert json.loads(capsys.readouterr().out)["verdict"] == "PASS"


def test_mutation_exits_fail(tmp_path):
    out = tmp_path / "mut"
    code = main(["run", "--suite", "a2-elliptic-kernel", "--points", "5", "--mutate-delta2",
                 "--output", str(out)])
    assert code == EXIT_FAIL
    assert json.loads((out / "a2-elliptic-kernel.json").read_text())["verdict"] == "FAIL"


def test_unconstrained_flag(tmp_path):
    out = tmp_path / "unc"
    code = main(["run", "--suite", "a2-elliptic-kernel", "--points", "8", "--unconstrained",
                 "--output", str(out)])
    assert code == EXIT_OK
    report = json.loads((out / "a2-elliptic-kernel.json").read_text())
    assert report["metadata"]["path"] == "unconstrained failure certification"
    assert all(s["mode"] == "inequality" for s in report["subchecks"])


@pytest.mark.parametrize("content", [
    "seed = [1, 2",              # malformed TOML
    "bogus = 1",                 # unknown key
    "[table]\nseed = 1",          # nested table
    "points = 0",
    "a_plus = -1.0",
    "suites = ['nope']",
])
def test_config_errors_write_nothing(tmp_path, content):
    cfg = tmp_path / "bad.toml"
    cfg.write_text(content)
    out = tmp_path / "never"
    assert main(["run", "--config", str(cfg), "--output", str(out)]) == EXIT_CONFIG
    assert not out.exists()


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "ok.toml"
    cfg.write_text("seed = 5\npoints = 12\nmu = '0.1+0.2i'\nsuites = ['lemma34']\n")
    args = build_parser().parse_args(["run", "--config", str(cfg), "--seed", "6"])
    conf = resolve_config(args, environ={})
    assert conf.seed == 6 and conf.n_points == 12 and conf.mu == 0.1 + 0.2j
    assert conf.suites == ["lemma34"]


def test_seed_environment_fallback(tmp_path):
    args = build_parser().parse_args(["run"])
    assert resolve_config(args, environ={"GK_SEED": "17"}).seed == 17
    assert resolve_config(args, environ={}).seed == 42
    args = build_parser().parse_args(["run", "--seed", "3"])
    assert resolve_config(args, environ={"GK_SEED": "17"}).seed == 3
    with pytest.raises(ConfigError):
        resolve_config(build_parser().parse_args(["run"]), environ={"GK_SEED": "x"})


def test_bad_arguments_exit_config(tmp_path):
    assert main(["run", "--suite", "no-such-suite", "--output", str(tmp_path / "o")]) == EXIT_CONFIG
    assert not (tmp_path / "o").exists()
    assert main(["run", "--points", "many"]) == EXIT_CONFIG
    assert main(["frobnicate"]) == EXIT_CONFIG


def test_list(capsys):
    assert main(["list"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == len(REGISTRY)
    assert "a3-hyperbolic-kernel  Thm 3.3  1e-08" in lines
    assert any(line.startswith("lemma34  Lemma 3.4") for line in lines)


def test_eval_values(capsys):
    assert main(["eval", "elliptic_gamma", "--z", "0"]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "1.000000000000000 + 0i"
    assert main(["eval", "hyperbolic_gamma", "--z", "0"]) == EXIT_OK
    re_part = float(capsys.readouterr().out.split()[0])
    assert abs(re_part - 1) < 1e-14
    assert main(["eval", "weight", "--x", "0.5,0,-0.5", "--regime", "hyperbolic"]) == EXIT_OK
    assert float(capsys.readouterr().out.split()[0]) > 0


def test_eval_errors(capsys):
    assert main(["eval", "elliptic_gamma", "--z=-0.875i"]) == EXIT_POLE
    assert main(["eval", "no_such_function", "--z", "0"]) == EXIT_CONFIG
    assert main(["eval", "elliptic_gamma"]) == EXIT_CONFIG
    assert main(["eval", "elliptic_gamma", "--z", "zz"]) == EXIT_CONFIG
    capsys.readouterr()


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "gammakernels.cli", "eval", "trig_gamma", "--z", "0.2"],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == EXIT_OK
    assert proc.stdout.endswith("i\n")


def test_evaluator_names():
    assert {"elliptic_gamma", "hyperbolic_gamma", "s2_kernel", "toda_kernel"} <= set(cli.EVALUATORS)
