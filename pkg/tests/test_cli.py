from __future__ import annotations

import csv
import json
import shutil
import subprocess
import sys
from importlib import resources
from pathlib import Path

import pytest

from hetmec.cli import main

CONFIGS = Path(str(resources.files("hetmec") / "configs"))


def cfg(name: str) -> str:
    return str(CONFIGS / name)


def run(*argv):
    return main([str(a) for a in argv])


def test_validate_table3(capsys):
    assert run("validate", "--config", cfg("table3_chain.json")) == 0
    out = capsys.readouterr().out
    assert "N=3" in out and "K=9 K_c=5 K_t=4" in out


def test_validate_bad_rho(tmp_path, capsys):
    raw = json.loads(Path(cfg("chain_fixture.json")).read_text())
    raw["rho"] = 1.5
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(raw))
    assert run("validate", "--config", path) == 2
    assert "rho out of range" in capsys.readouterr().err


def test_validate_empty_file(tmp_path, capsys):
    path = tmp_path / "empty.json"
    path.write_text("")
    assert run("validate", "--config", path) == 2
    assert "parse error" in capsys.readouterr().err


@pytest.mark.parametrize("mutate, needle", [
    (lambda r: r["layers"][1]["nodes"][0].pop("parent"), "orphan"),
    (lambda r: r["layers"][2]["nodes"][0].update(parent=[0, 0]), "layer-skipping"),
    (lambda r: r.update(extra=1), "extra"),
    (lambda r: r["eds"].update(lambda_mbps=[1.0, 2.0]), "expected 1 values"),
    (lambda r: r["layers"][0]["nodes"][0].update(compute_mbps=-1), "layers[0].nodes[0].compute_mbps"),
])
def test_config_errors_are_path_addressed(tmp_path, capsys, mutate, needle):
    raw = json.loads(Path(cfg("chain_fixture.json")).read_text())
    mutate(raw)
    path = tmp_path / "c.json"
    path.write_text(json.dumps(raw))
    assert run("solve", "--config", path, "--out", tmp_path / "o.json") == 2
    assert needle in capsys.readouterr().err


def test_missing_file(tmp_path):
    assert run("validate", "--config", tmp_path / "nope.json") == 2


def test_solve_fixtures(tmp_path):
    out = tmp_path / "s.json"
    assert run("solve", "--config", cfg("chain_fixture.json"), "--out", out) == 0
    assert json.loads(out.read_text())["latency"]["total"] == 1.5
    assert run("solve", "--config", cfg("chain_fixture_cc05.json"), "--out", out) == 0
    assert json.loads(out.read_text())["latency"]["total"] == pytest.approx(3.23)


def test_solve_overload_exit_3(tmp_path):
    raw = json.loads(Path(cfg("chain_fixture_cc05.json")).read_text())
    raw["eds"]["lambda_mbps"] = 10.0
    path = tmp_path / "c.json"
    path.write_text(json.dumps(raw))
    assert run("solve", "--config", path, "--out", tmp_path / "o.json") == 3
    assert json.loads((tmp_path / "o.json").read_text())["status"] == "congested"


def test_every_solvable_config_validates(tmp_path):
    for path in sorted(CONFIGS.glob("*.json")):
        if "insert" in path.name:
            continue
        code = run("solve", "--config", path, "--out", tmp_path / "o.json")
        if code in (0, 3):
            assert run("validate", "--config", path) == 0


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


def test_sweep_csv(tmp_path):
    out = tmp_path / "s.csv"
    assert run("sweep", "--config", cfg("chain_fixture.json"), "--schemes", "lma,cloud,local,mec",
               "--scale-min", 0.1, "--scale-max", 1.0, "--steps", 10, "--out", out) == 0
    rows = read_csv(out)
    assert rows[0] == ["scheme", "lambda_scale", "system_latency", "processing_rate_per_ed", "status"]
    body = rows[1:]
    assert [r[0] for r in body] == sorted(r[0] for r in body)
    by_scale: dict[str, dict[str, float]] = {}
    for scheme, scale, lat, _, status in body:
        assert status in ("ok", "congested") and (lat == "") == (status == "congested")
        if lat:
            by_scale.setdefault(scale, {})[scheme] = float(lat)
    for lats in by_scale.values():
        if "lma" in lats:
            assert lats["lma"] <= min(lats.values()) + 1e-9
    assert b"\r\n" not in out.read_bytes()


def test_sweep_single_step(tmp_path):
    out = tmp_path / "s.csv"
    assert run("sweep", "--config", cfg("chain_fixture.json"), "--schemes", "lma",
               "--scale-min", 0.5, "--scale-max", 0.5, "--steps", 1, "--out", out) == 0
    assert len(read_csv(out)) == 2


@pytest.mark.parametrize("extra", [["--steps", "0"], ["--schemes", "lma,edge"], ["--jobs", "0"]])
def test_sweep_flag_errors(tmp_path, extra):
    argv = ["sweep", "--config", cfg("chain_fixture.json"), "--scale-min", "0.1", "--scale-max", "1",
            "--steps", "3", "--out", str(tmp_path / "s.csv")]
    assert run(*argv, *extra) == 2


def test_unknown_flag_exit_2():
    with pytest.raises(SystemExit) as exc:
        run("solve", "--bogus")
    assert exc.value.code == 2


def test_robustness_cli(tmp_path):
    out = tmp_path / "r.json"
    assert run("robustness", "--config", cfg("chain_transmission_shortage.json"), "--out", out) == 0
    res = json.loads(out.read_text())
    assert res["t_star"] == pytest.approx(0.59, abs=1e-6)
    assert res["bottleneck"]["kind"] == "transmission-shortage"
    assert run("robustness", "--config", cfg("chain_transmission_shortage.json"),
               "--insert", cfg("insert_relay_0.3.json"), "--position", 2, "--out", out) == 0
    assert json.loads(out.read_text())["insertion"]["t_after"] == pytest.approx(0.86, abs=1e-6)
    inline = json.dumps({"nodes": [{"compute_mbps": 0.3, "trans_mbps": 100, "parent": 0}], "child_parents": [0]})
    assert run("robustness", "--config", cfg("chain_transmission_shortage.json"),
               "--insert", inline, "--position", 1, "--out", out) == 0
    ins = json.loads(out.read_text())["insertion"]
    assert ins["t_after"] == pytest.approx(ins["t_before"], abs=1e-6)


def test_robustness_insert_needs_position(tmp_path):
    assert run("robustness", "--config", cfg("chain_transmission_shortage.json"),
               "--insert", cfg("insert_relay_0.3.json"), "--out", tmp_path / "r.json") == 2


def test_robustness_bad_position(tmp_path):
    assert run("robustness", "--config", cfg("chain_transmission_shortage.json"),
               "--insert", cfg("insert_relay_0.3.json"), "--position", 7, "--out", tmp_path / "r.json") == 2


def test_oracle_cli(tmp_path):
    out = tmp_path / "o.json"
    assert run("oracle", "--config", cfg("chain_fixture.json"), "--grid-step", 0.01, "--out", out) == 0
    res = json.loads(out.read_text())
    assert res["latency"]["total"] == 1.5 and list(res["s_star"].values()) == [0.0, 0.0]
    assert run("oracle", "--config", cfg("chain_fixture.json"), "--grid-step", 1.5, "--out", out) == 2


def test_oracle_budget_exit_4(tmp_path):
    raw = {"layers": [{"nodes": [{"compute_mbps": 1, "trans_mbps": 1}]},
                      {"nodes": [{"compute_mbps": 1, "trans_mbps": 1, "parent": 0}] * 2},
                      {"nodes": [{"compute_mbps": 1, "parent": 0}, {"compute_mbps": 1, "parent": 0},
                                 {"compute_mbps": 1, "parent": 1}, {"compute_mbps": 1, "parent": 1}]}],
           "eds": {"lambda_mbps": 0.1}, "rho": 0.1}
    path = tmp_path / "d6.json"
    path.write_text(json.dumps(raw))
    assert run("oracle", "--config", path, "--grid-step", 0.01, "--out", tmp_path / "o.json") == 4


def test_outputs_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        assert run("solve", "--config", cfg("table3_chain.json"), "--out", out) == 0
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.skipif(shutil.which("hetmec") is None, reason="console script not installed")
def test_console_script(tmp_path):
    proc = subprocess.run(["hetmec", "validate", "--config", cfg("chain_fixture.json")],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "D=2" in proc.stdout


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "hetmec.cli", "validate", "--config", cfg("chain_fixture.json")],
                          capture_output=True, text=True)
    assert proc.returncode == 0
