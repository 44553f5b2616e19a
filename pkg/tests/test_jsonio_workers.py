import io
import json
import math
import subprocess

import numpy as np
import psutil
import pytest

from diracspec.error_handling import ConfigError
from diracspec.jsonio import (complex_to_pair, dumps_json, format_float, load_json, pair_to_complex, save_csv,
                              save_json, write_csv)
from diracspec.settings import max_workers
from diracspec.workers import kill_process_and_children, parallel_map


@pytest.mark.parametrize("value, expected", [([0.5, 2], 0.5 + 2j), (3, 3 + 0j), ("0.5+2i", 0.5 + 2j),
                                             ("-1 - 1i", -1 - 1j), (1.5, 1.5 + 0j)])
def test_pair_to_complex(value, expected):
    assert pair_to_complex(value) == expected


@pytest.mark.parametrize("value", [[1], [1, 2, 3], [True, 0], "abc", None, True])
def test_pair_to_complex_rejects(value):
    with pytest.raises(ConfigError):
        pair_to_complex(value)


def test_complex_to_pair():
    assert complex_to_pair(np.complex128(1 - 2j)) == [1.0, -2.0]


@pytest.mark.parametrize("value", [math.pi, 1 / 3, -2.5e-300, 1e17])
def test_format_float_reads_back(value):
    assert float(format_float(value)) == value


def test_dumps_json_converts_numpy():
    data = {"z": 1j, "a": np.array([[1 + 0j, 2]]), "n": np.int64(3), "x": np.float64(0.25)}
    assert json.loads(dumps_json(data)) == {"a": [[[1.0, 0.0], [2.0, 0.0]]], "n": 3, "x": 0.25, "z": [0.0, 1.0]}


def test_save_json_respects_force(tmp_path):
    path = tmp_path / "data.json"
    assert save_json({"a": 1}, str(path))
    assert not save_json({"a": 2}, str(path))
    assert load_json(str(path)) == {"a": 1}
    assert save_json({"a": 2}, str(path), force=True)
    assert load_json(str(path)) == {"a": 2}


def test_load_json_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_json(str(tmp_path / "missing.json"))
    broken = tmp_path / "broken.json"
    broken.write_text("{")
    with pytest.raises(ConfigError):
        load_json(str(broken))


def test_csv_rows(tmp_path):
    stream = io.StringIO()
    write_csv(stream, ["n", "x"], [[1, 0.1], [2, np.float64(1 / 3)]])
    assert stream.getvalue() == "n,x\n1,0.10000000000000001\n2,0.33333333333333331\n"
    path = tmp_path / "rows.csv"
    assert save_csv(["n", "x"], [[1, 0.1], [2, np.float64(1 / 3)]], str(path))
    assert path.read_text() == stream.getvalue()


def test_parallel_map_serial():
    assert parallel_map(pow, [(2, 3), (3, 2)], workers=1) == [8, 9]


def test_parallel_map_on_processes():
    assert parallel_map(pow, [(2, 3), (3, 2)], workers=2) == [8, 9]
    with pytest.raises(ValueError):
        parallel_map(math.sqrt, [(4.0,), (-1.0,)], workers=2)


def test_kill_process_and_children():
    process = subprocess.Popen(["sleep", "30"])
    kill_process_and_children(process.pid)
    process.wait(timeout=5)
    assert not psutil.pid_exists(process.pid) or psutil.Process(process.pid).status() == psutil.STATUS_ZOMBIE
    kill_process_and_children([process.pid])


@pytest.mark.parametrize("raw, expected", [("1", 1), ("", 1), ("abc", 1), ("-4", 1)])
def test_max_workers(monkeypatch, raw, expected):
    monkeypatch.setenv("DIRAC_THREADS", raw)
    assert max_workers() == expected


def test_max_workers_is_capped(monkeypatch):
    monkeypatch.setenv("DIRAC_THREADS", "100000")
    assert max_workers() == (psutil.cpu_count(logical=True) or 1)
