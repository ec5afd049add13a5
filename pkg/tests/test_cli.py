import json

import pytest

from rieszflow import __version__
from rieszflow.cli import ConfigError, load_config, main, parse_grid, parse_interval


def run(tmp_path, name, *argv):
    out = tmp_path / f"{name}.csv"
    code = main([*argv, "--out", str(out)])
    return code, out


def header(path):
    meta = {}
    for line in path.read_text().splitlines():
        if not line.startswith("# "):
            break
        key, _, value = line[2:].partition(": ")
        meta[key] = value
    return meta


def test_validate_desk(tmp_path, capsys):
    out = tmp_path / "report.json"
    assert main(["validate", "--preset", "desk", "--out", str(out)]) == 0
    tree = json.loads(out.read_text())
    assert tree["result"]["passed"] is True
    assert tree["metadata"]["preset"] == "desk"
    assert tree["metadata"]["tool"] == f"rieszflow {__version__}"


def test_validate_reports_violations(tmp_path):
    out = tmp_path / "report.json"
    assert main(["validate", "--preset", "remark", "--out", str(out)]) == 1
    assert json.loads(out.read_text())["result"]["passed"] is False


def test_bourgain_deterministic(tmp_path):
    args = ["bourgain", "--preset", "desk-deep", "--budget", "10000", "--seed", "7"]
    _, a = run(tmp_path, "a", *args)
    _, b = run(tmp_path, "b", *args, "--workers", "3")
    assert a.read_bytes() == b.read_bytes()
    meta = header(a)
    assert meta["seed"] == "7" and meta["preset"] == "desk-deep"
    rows = [l for l in a.read_text().splitlines() if not l.startswith("#")]
    assert rows[0] == "L,beta,stderr" and len(rows) == 8


def test_clt_pipeline(tmp_path):
    code, out = run(tmp_path, "clt", "clt", "--preset", "desk", "--n", "3", "--A", "1:2",
                    "--samples", "2000", "--seed", "5")
    assert code == 0
    summary = json.loads(out.with_suffix(".json").read_text())
    assert 0 <= summary["result"]["ks"] <= 1
    assert summary["metadata"]["options"]["n"] == 3
    lines = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    assert lines[0] == "index,t,S_n" and len(lines) == 2001


def test_spec_config_file(tmp_path):
    cfg = tmp_path / "spec.json"
    cfg.write_text(json.dumps({"cuts": [2, 3], "spacers": [[1, 2], [0, 1, 3]], "kernel": {"s": 1.0}}))
    code, out = run(tmp_path, "tower", "tower-check", "--spec", str(cfg), "--N", "2", "--t-grid", "0:9:10")
    assert code == 0
    summary = json.loads(out.with_suffix(".json").read_text())["result"]
    assert summary["all_within_bound"] and summary["occurrences"] == 6


def test_staircase_override_config(tmp_path):
    cfg = tmp_path / "stair.json"
    cfg.write_text(json.dumps({"staircase": {"m": [2, 40], "p": [4, 6], "eps": ["1/2", "1/3"]},
                               "precision_digits": 40}))
    code, out = run(tmp_path, "words", "words", "--config", str(cfg), "--n", "1", "--max-len", "4")
    assert code == 0
    summary = json.loads(out.with_suffix(".json").read_text())
    assert summary["metadata"]["precision_digits"] == 40
    assert summary["result"]["words"] == 6 * 2 + 15 * 4 + 20 * 8 + 15 * 16


@pytest.mark.parametrize("text, key, line", [
    ('{"cuts": [2],\n "spacerz": [[0, 0]]}', "spacerz", 2),
    ('{"staircase": {"preset": "desk",\n  "eps": ["1/0"]}}', "staircase.eps", 2),
    ('{"cuts": [2],\n\n "spacers": [[0, 0]],}', None, 3),
    ('{"staircase": {"preset": "nope"}}', "staircase.preset", 1),
    ('{"cuts": [2], "spacers": [[0, 0]],\n "kernel": {"s": -1}}', "kernel.s", 2),
])
def test_config_errors(tmp_path, capsys, text, key, line):
    cfg = tmp_path / "bad.json"
    cfg.write_text(text)
    with pytest.raises(ConfigError) as info:
        from rieszflow.cli import build_parser, resolve
        resolve(build_parser().parse_args(["validate", "--config", str(cfg)]))
    assert info.value.key == key and info.value.line == line
    assert main(["validate", "--config", str(cfg)]) == 2
    assert "config error" in capsys.readouterr().err


def test_load_config_missing(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.json")


def test_parsers():
    assert list(parse_grid("0:1:3")) == [0.0, 0.5, 1.0]
    assert list(parse_grid("1,2.5")) == [1.0, 2.5]
    assert parse_interval("1:2") == (1.0, 2.0)
    with pytest.raises(ConfigError):
        parse_grid("a:b")
    with pytest.raises(ConfigError):
        parse_interval("3")


def test_words_needs_staircase(tmp_path, capsys):
    cfg = tmp_path / "spec.json"
    cfg.write_text(json.dumps({"cuts": [2], "spacers": [[0, 0]]}))
    assert main(["words", "--config", str(cfg)]) == 2
