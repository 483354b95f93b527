import csv
import io
import json
import math
import subprocess
import sys

import pytest

from mlbounds import ConvolutionalComponent, LinearCode, store_code
from mlbounds.cli import main
from mlbounds.union_lower import random_event_system, store_events

import numpy as np


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


@pytest.fixture
def hamming_file(tmp_path):
    path = tmp_path / "hamming74.txt"
    store_code(LinearCode.hamming74(), path)
    return path


def test_upper_union_tsb_rows(hamming_file, capsys):
    code, out, _ = run(["upper", "--bounds", "union,tsb", "--code", hamming_file, "--ebno", "0:6:0.5"], capsys)
    assert code == 0
    rows = rows_of(out)
    assert list(rows[0]) == ["ebno_db", "bound", "value", "param_json"]
    union = {r["ebno_db"]: float(r["value"]) for r in rows if r["bound"] == "union"}
    tsb = {r["ebno_db"]: float(r["value"]) for r in rows if r["bound"] == "tsb"}
    assert len(union) == len(tsb) == 13
    for key, u in union.items():
        assert tsb[key] <= u + 1e-12
    for r in rows:
        assert 0.0 <= float(r["value"]) <= 1.0
        json.loads(r["param_json"])


def test_upper_is_byte_identical(hamming_file, tmp_path, capsys):
    outs = []
    for i in range(2):
        path = tmp_path / f"run{i}.json"
        argv = ["upper", "--bounds", "ds2,bhattacharyya", "--code", hamming_file, "--ebno", "1,3",
                "--format", "json", "--out", path, "--seed", 3, "--threads", 1 + i]
        assert run(argv, capsys)[0] == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    doc = json.loads(outs[0])
    assert doc


def test_upper_bsc(capsys):
    code, out, _ = run(["upper", "--bounds", "union,gallager65", "--code", "builtin:hamming74",
                        "--channel", "bsc", "--p", "0.01,0.05"], capsys)
    assert code == 0
    rows = rows_of(out)
    assert len(rows) == 4
    assert all(r["ebno_db"] == "" and "p" in json.loads(r["param_json"]) for r in rows)


def test_density_worked_example(capsys):
    code, out, _ = run(["density", "--capacity", 0.5, "--epsilon", 0.01, "--t", "4.33,5.68"], capsys)
    assert code == 0
    deltas = [float(r["delta_min"]) for r in rows_of(out)]
    assert deltas == pytest.approx([13.16, 17.27], abs=0.01)


def test_density_fano_column(capsys):
    code, out, _ = run(["density", "--capacity", 0.5, "--epsilon", 0.1, "--t", 3, "--h-norm", 0.01], capsys)
    assert code == 0
    pb = float(rows_of(out)[0]["pb"])
    assert 0 < pb < 0.5


def test_lower_events_exact_union(tmp_path, capsys):
    ev = random_event_system(np.random.default_rng(5))
    path = tmp_path / "sys.json"
    store_events(ev, path)
    code, out, _ = run(["lower", "--bound", "cohen-merhav,decaen", "--events", path], capsys)
    assert code == 0
    rows = rows_of(out)
    assert float(rows[0]["value"]) == pytest.approx(ev.union_probability(), abs=1e-12)
    assert float(rows[1]["value"]) <= ev.union_probability() + 1e-12


def test_lower_code(capsys):
    code, out, _ = run(["lower", "--bound", "decaen,cohen-merhav", "--code", "builtin:ext-hamming84",
                        "--ebno", "2:3:1"], capsys)
    assert code == 0
    rows = rows_of(out)
    assert len(rows) == 4
    by = {(r["bound"], r["ebno_db"]): float(r["value"]) for r in rows}
    for e in ("2", "3"):
        key = [k for k in by if k[0] == "decaen" and float(k[1]) == float(e)][0]
        other = [k for k in by if k[0] == "cohen-merhav" and float(k[1]) == float(e)][0]
        assert by[other] >= by[key] * (1 - 1e-12)


def test_spectrum_and_enumerators(tmp_path, capsys):
    code, out, _ = run(["spectrum", "--code", "builtin:hamming74"], capsys)
    assert code == 0 and json.loads(out)
    comp = tmp_path / "c.json"
    comp.write_text(json.dumps(ConvolutionalComponent.turbo_rsc_37_21().to_dict()))
    ens = tmp_path / "e.json"
    ens.write_text(json.dumps({"component1": "c.json", "component2": "c.json", "N": 8}))
    assert run(["conv-iowef", "--component", comp, "--N", 8, "--exact"], capsys)[0] == 0
    code, out, _ = run(["turbo-iowef", "--ensemble", ens, "--marginal"], capsys)
    assert code == 0 and json.loads(out)
    code, out, _ = run(["upper", "--bounds", "tsb,ds2", "--ensemble", ens, "--ebno-db", 2.0], capsys)
    assert code == 0 and len(rows_of(out)) == 2


def test_oracle_commands(capsys):
    code, out, _ = run(["oracle", "--code", "builtin:hamming74", "--method", "exact", "--channel", "bsc",
                        "--p", 0.05], capsys)
    assert code == 0
    assert float(rows_of(out)[0]["value"]) == pytest.approx(1 - 0.95**7 - 7 * 0.05 * 0.95**6, rel=1e-12)
    argv = ["oracle", "--code", "builtin:hamming74", "--ebno-db", 2, "--samples", 20000, "--seed", 4]
    first = run(argv, capsys)
    second = run(argv, capsys)
    assert first[0] == 0 and first[1] == second[1]


@pytest.mark.parametrize("argv, status", [
    (["upper", "--bounds", "nope", "--code", "builtin:hamming74", "--ebno-db", 1], 2),
    (["upper", "--bounds", "tsb", "--code", "builtin:hamming74", "--channel", "bsc", "--p", 0.1], 2),
    (["upper", "--bounds", "union", "--code", "builtin:hamming74", "--ebno", "3:1:1"], 2),
    (["oracle", "--code", "builtin:hamming74", "--ebno-db", 1, "--samples", 20000], 2),
    (["upper", "--bounds", "union", "--code", "builtin:nothing", "--ebno-db", 1], 2),
    (["upper", "--bounds", "ds2", "--spectrum", "/nonexistent.json", "--ebno-db", 1], 2),
])
def test_config_errors(argv, status, capsys):
    code, _, err = run(argv, capsys)
    assert code == status
    assert err.startswith("error:")


def test_size_guard_exit(tmp_path, capsys):
    big = LinearCode(np.hstack([np.eye(17, dtype=np.uint8), np.ones((17, 4), dtype=np.uint8)]))
    path = tmp_path / "big.txt"
    store_code(big, path)
    assert run(["lower", "--bound", "decaen", "--code", path, "--ebno-db", 1], capsys)[0] == 4


def test_numeric_exit(monkeypatch, capsys):
    from mlbounds import NumericalError, curves

    def boom(*args, **kwargs):
        raise NumericalError("forced")

    monkeypatch.setattr(curves, "tsb_quadrature", boom)
    assert run(["upper", "--bounds", "tsb", "--code", "builtin:hamming74", "--ebno-db", 1], capsys)[0] == 3


def test_console_script_runs():
    out = subprocess.run([sys.executable, "-m", "mlbounds.cli", "density", "--capacity", "0.5", "--epsilon", "0.01",
                          "--t", "4.33"], capture_output=True, text=True, check=True)
    assert math.isclose(float(rows_of(out.stdout)[0]["delta_min"]), 13.1649, abs_tol=1e-3)
