import json
import os
import shutil

import pytest

from ccsura import csvio
from ccsura.cli import SCHEMAS, parse_points, run_cli, ConfigError

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")

CONFIGS = {
    "capacity": {"Q": 1024, "K_a": 20, "p_m": 0.05, "p_f": 0.01, "n_1": 150},
    "rcb": {"k": 100, "L": 20, "Q": 1024, "t": 1, "K_a": 20, "p_m": 0.02, "p_f": 0.005},
    "ttree-bound": {"bit_allocation": [10, 5, 5], "c": 10, "K_a": 5, "p_m": 0.01, "p_f": 0.001,
                    "t": 0},
    "alloc": {"k": 30, "c": 10, "K_a": 5, "p_m": 0.01, "p_f": 0.001, "t": 0, "v_star": "inf",
              "L_max": 10},
    "roc": {"n": 640, "L": 20, "k": 40, "Q": 64, "K_a": 3, "channel": "awgn", "ebno_db": 10.0,
            "K_0_max": 8, "trials": 30, "seed": 1},
    "simulate": {"K_a": 3, "k": 12, "n": 60, "L": 4, "Q": 64, "ebno_db": 0.0,
                 "channel": "abstract", "scheme": "ttree", "trials": 30, "seed": 4, "p_m": 0.1,
                 "p_f": 0.01, "t": 1, "bit_allocation": [6, 2, 2, 2]},
}
READERS = {"rcb": csvio.CURVE_COLUMNS, "ttree-bound": csvio.CURVE_COLUMNS,
           "roc": csvio.ROC_COLUMNS, "simulate": csvio.SIM_COLUMNS}


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(p)


@pytest.mark.parametrize("cmd", sorted(CONFIGS))
def test_each_command_runs_and_output_rereads(cmd, tmp_path):
    cfg = write(tmp_path, "c.json", CONFIGS[cmd])
    out = str(tmp_path / "o.csv")
    assert run_cli([cmd, "--config", cfg, "--out", out]) == 0
    if cmd in READERS:
        rows = csvio.read_csv(out, READERS[cmd])
        assert rows
    else:
        with open(out) as fh:
            assert len(fh.read().splitlines()) == 2


def test_rcb_one_point_one_row(tmp_path):
    cfg = write(tmp_path, "c.json", CONFIGS["rcb"])
    out = str(tmp_path / "curve.csv")
    assert run_cli(["rcb", "--config", cfg, "--out", out]) == 0
    rows = csvio.read_curve_csv(out)
    assert len(rows) == 1 and rows[0]["L"] == 20 and 0 < rows[0]["Pe"] < 1
    assert open(out).read().splitlines()[0] == ",".join(csvio.CURVE_COLUMNS)


def test_points_list_and_stdout(tmp_path, capsys):
    pts = [dict(CONFIGS["capacity"], p_m=pm) for pm in (0.0, 0.1)]
    cfg = write(tmp_path, "c.json", {"points": pts})
    assert run_cli(["capacity", "--config", cfg]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 3 and lines[0] == "Q,Ka,p_m,p_f,n_1,C_u,rate"


def test_simulate_is_byte_reproducible(tmp_path):
    cfg = write(tmp_path, "c.json", CONFIGS["simulate"])
    a, b = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
    assert run_cli(["simulate", "--config", cfg, "--out", a]) == 0
    assert run_cli(["simulate", "--config", cfg, "--out", b, "--workers", "2"]) == 0
    assert open(a, "rb").read() == open(b, "rb").read()


def test_seed_override_precedence(tmp_path, monkeypatch):
    cfg = write(tmp_path, "c.json", CONFIGS["simulate"])
    outs = {}
    for tag, argv, env in (("cfg", [], None), ("env", [], "99"), ("flag", ["--seed", "99"], "5"),
                           ("flag2", ["--seed", "99"], None)):
        if env is None:
            monkeypatch.delenv("CCS_SEED", raising=False)
        else:
            monkeypatch.setenv("CCS_SEED", env)
        out = str(tmp_path / f"{tag}.csv")
        assert run_cli(["simulate", "--config", cfg, "--out", out] + argv) == 0
        outs[tag] = csvio.read_sim_csv(out)[0]
    assert outs["cfg"]["seed"] == 4
    assert outs["env"]["seed"] == outs["flag"]["seed"] == 99
    assert outs["env"] == outs["flag"] == outs["flag2"]
    monkeypatch.setenv("CCS_SEED", "x")
    assert run_cli(["simulate", "--config", cfg]) == 2


def test_optimize_reproduces_pinned_fixture(tmp_path):
    for name in ("optimize.json", "optimize_roc.csv"):
        shutil.copy(os.path.join(FIXTURES, name), tmp_path / name)
    out = str(tmp_path / "got.csv")
    assert run_cli(["optimize", "--config", str(tmp_path / "optimize.json"), "--out", out]) == 0
    expected = open(os.path.join(FIXTURES, "optimize_expected.csv")).read()
    assert open(out).read() == expected
    rows = csvio.read_curve_csv(out)
    # list recovery with one uncovered slot needs less energy; infeasible targets saturate
    assert rows[1]["ebno_db"] < rows[0]["ebno_db"]
    assert rows[3]["ebno_db"] == float("inf") and rows[3]["L"] is None


def test_malformed_json_reports_position(tmp_path, capsys):
    cfg = write(tmp_path, "bad.json", '{\n  "Q": 1024,\n  "K_a": 20,,\n}')
    assert run_cli(["capacity", "--config", cfg]) == 2
    err = capsys.readouterr().err
    assert "bad.json:3:" in err and "malformed JSON" in err


@pytest.mark.parametrize("mutate,code", [
    (lambda c: c.update(extra=1), 2),
    (lambda c: c.pop("Q"), 2),
    (lambda c: c.update(Q="big"), 2),
    (lambda c: c.update(p_m=1.5), 2),
])
def test_config_errors_exit_2(tmp_path, mutate, code):
    c = dict(CONFIGS["capacity"])
    mutate(c)
    assert run_cli(["capacity", "--config", write(tmp_path, "c.json", c)]) == code


def test_missing_config_and_bad_flags(tmp_path):
    assert run_cli(["rcb", "--config", str(tmp_path / "nope.json")]) == 2
    assert run_cli(["frobnicate", "--config", "x"]) == 2
    cfg = write(tmp_path, "c.json", CONFIGS["rcb"])
    assert run_cli(["rcb", "--config", cfg, "--workers", "0"]) == 2


def test_unwritable_output_is_runtime_error(tmp_path):
    cfg = write(tmp_path, "c.json", CONFIGS["rcb"])
    assert run_cli(["rcb", "--config", cfg, "--out", str(tmp_path / "no" / "x.csv")]) == 3


@pytest.mark.parametrize("cmd", sorted(SCHEMAS))
def test_help_lists_every_key(cmd, capsys):
    assert run_cli([cmd, "--help"]) == 0
    text = capsys.readouterr().out
    for key in SCHEMAS[cmd]:
        assert key.name in text


def test_parse_points_rejects_empty_points():
    with pytest.raises(ConfigError):
        parse_points("capacity", '{"points": []}')
    with pytest.raises(ConfigError):
        parse_points("capacity", '[1, 2]')


def test_alloc_saturated_row(tmp_path):
    c = dict(CONFIGS["alloc"], v_star=2, k=100, L_max=5)
    out = str(tmp_path / "a.csv")
    assert run_cli(["alloc", "--config", write(tmp_path, "c.json", c), "--out", out]) == 0
    assert open(out).read().splitlines()[1].endswith("saturated")
