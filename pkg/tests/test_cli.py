"""Command-line interface: outputs, exit codes, and determinism."""

import json

import pytest

from wpengine.cli import main


@pytest.fixture()
def geo_file(tmp_path):
    path = tmp_path / "geo.pgcl"
    path.write_text("while (c = 1) { {c := 0} [1/2] {c := 1}; x := x + 1 }")
    return str(path)


@pytest.fixture()
def coin_file(tmp_path):
    path = tmp_path / "coin.pgcl"
    path.write_text("{x := 0} [1/3] {x := 1}")
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_wp_syntactic(capsys, coin_file):
    code, out, _ = run(capsys, "wp", "--syntactic", "-p", coin_file, "-f", "x")
    assert code == 0
    assert out.strip() == "1/3 * 0 + 2/3 * 1"


def test_wp_syntactic_value_at_state(capsys, coin_file):
    code, out, _ = run(capsys, "wp", "--syntactic", "-p", coin_file,
                       "-f", "x", "--at", "x=5")
    assert code == 0
    assert out.splitlines()[1].endswith("2/3")


def test_wp_kleene(capsys, geo_file):
    code, out, _ = run(capsys, "wp", "--kleene", "4", "-p", geo_file,
                       "-f", "x", "--at", "c=1,x=0")
    assert code == 0
    assert out.strip() == "11/8"


def test_wp_loop_exit_code(capsys, geo_file):
    code, _, err = run(capsys, "wp", "--syntactic", "-p", geo_file, "-f", "x")
    assert code == 3
    assert "loop" in err


def test_parse_error_exit_code(capsys, tmp_path):
    bad = tmp_path / "bad.pgcl"
    bad.write_text("x := := 1")
    code, _, err = run(capsys, "wp", "--syntactic", "-p", str(bad), "-f", "x")
    assert code == 2
    assert "parse error" in err


def test_fuel_exit_code(capsys, tmp_path):
    blow = tmp_path / "blow.pgcl"
    blow.write_text(
        "while (x < 50) { {y := y + 1} [1/2] {y := y + y + 2}; x := x + 1 }"
    )
    code, _, err = run(capsys, "forward", "-p", str(blow), "--at", "x=0",
                       "--fuel", "50", "--state-cap", "64")
    assert code == 4
    assert "cap" in err


def test_normalize_dnf_uses_reserved_cut(capsys):
    code, out, _ = run(capsys, "normalize", "--dnf", "-f", "x")
    assert code == 0
    assert "$cut" in out


def test_normalize_prenex(capsys):
    code, out, _ = run(capsys, "normalize", "--prenex", "-f", "(sup v: v) + 1")
    assert code == 0
    assert out.strip() == "sup v': v' + 1"


def test_goedel_roundtrip(capsys):
    code, out, _ = run(capsys, "goedel", "encode-seq", "3,1,4")
    assert code == 0
    num = out.strip()
    assert num.isdigit()
    code, out, _ = run(capsys, "goedel", "decode-seq", num, "3")
    assert code == 0
    assert out.strip() == "3,1,4"


def test_series_harmonic(capsys):
    code, out, _ = run(capsys, "series", "sum", "--body", "1/$s", "--n", "3")
    assert code == 0
    assert out.strip() == "11/6"


def test_series_product(capsys):
    code, out, _ = run(capsys, "series", "product", "--body",
                       "[$p = 0] * 1 + [1 <= $p] * $p", "--n", "5")
    assert code == 0
    assert out.strip() == "120"


def test_encode_loop_values_json(capsys, geo_file):
    code, out, _ = run(capsys, "encode-loop", "--program", geo_file,
                       "--post", "x", "--eval-at", "c=1,x=0",
                       "--depth-k", "4", "--format", "json")
    assert code == 0
    payload = json.loads(out)
    values = {entry["k"]: entry["value"] for entry in payload["values"]}
    assert values == {0: "0", 1: "0", 2: "1/2", 3: "1", 4: "11/8"}


def test_forward_json_schema(capsys, coin_file):
    code, out, _ = run(capsys, "forward", "-p", coin_file, "--format", "json")
    assert code == 0
    payload = json.loads(out)
    assert payload == {
        "entries": [
            {"state": {"x": "0"}, "weight": "1/3"},
            {"state": {"x": "1"}, "weight": "2/3"},
        ],
        "mass": "1",
    }


def test_check_suite_passes(capsys):
    code, out, _ = run(capsys, "check", "fo", "--seed", "5")
    assert code == 0
    assert "pass" in out


def test_check_deterministic_for_seed(capsys):
    _, first, _ = run(capsys, "check", "fo", "--seed", "9", "--format", "json")
    _, second, _ = run(capsys, "check", "fo", "--seed", "9", "--format", "json")
    assert first == second


def test_env_depth_override(capsys, coin_file, monkeypatch):
    monkeypatch.setenv("WPENGINE_DEPTH", "2")
    code, out, _ = run(capsys, "wp", "--syntactic", "-p", coin_file, "-f", "x")
    assert code == 0


def test_series_emit_pure(capsys):
    code, out, _ = run(capsys, "series", "sum", "--body", "1/$s", "--n", "2",
                       "--emit-pure")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "3/2"
    assert lines[1].startswith("sup ")


def test_encode_loop_emit_pure_cap(capsys, geo_file):
    code, _, err = run(capsys, "encode-loop", "--program", geo_file,
                       "--post", "x", "--depth-k", "0", "--emit-pure",
                       "--max-pure-nodes", "1000")
    assert code == 4
    assert "max-pure-nodes" in err
