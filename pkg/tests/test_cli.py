import json

import pytest

from azmap.cli import main, parse_config, table_bytes
from azmap.errors import UsageError
from azmap.numerics import NumericPolicy


def test_escape_defaults():
    cfg = parse_config(["escape"], env={})
    assert cfg.experiment == "escape"
    assert cfg["m"] == 1 and cfg["N0"] == 1000 and cfg["returns"] == 10**4
    assert cfg["policy"] is NumericPolicy.DOUBLE_DOUBLE
    assert str(cfg.output_dir) == "azmap-out"


def test_flags_override_file_override_defaults(tmp_path):
    f = tmp_path / "run.cfg"
    f.write_text("# escape settings\nexperiment = escape\nN0 = 2000\nreturns = 50\n")
    cfg = parse_config(["escape", "--config", str(f), "--returns", "7"], env={})
    assert cfg["N0"] == 2000 and cfg["returns"] == 7 and cfg["m"] == 1


def test_output_dir_from_environment(tmp_path):
    cfg = parse_config(["kesten"], env={"AZMAP_OUTPUT_DIR": str(tmp_path)})
    assert cfg.output_dir == tmp_path
    cfg = parse_config(["kesten", "--out", "x"], env={"AZMAP_OUTPUT_DIR": str(tmp_path)})
    assert str(cfg.output_dir) == "x"


@pytest.mark.parametrize("argv", [
    [],
    ["nonsense"],
    ["renorm-check", "--alpha", "1/ln(3)"],
    ["escape", "--m", "0"],
    ["escape", "--N0", "10"],
    ["escape", "--returns", "many"],
    ["intervals", "--grid", "10"],
    ["return-map", "--I", "2"],
])
def test_bad_configurations_rejected(argv):
    with pytest.raises(UsageError):
        parse_config(argv, env={})


def test_config_file_errors(tmp_path):
    f = tmp_path / "bad.cfg"
    f.write_text("N0 2000\n")
    with pytest.raises(UsageError):
        parse_config(["escape", "--config", str(f)], env={})
    f.write_text("bogus = 1\n")
    with pytest.raises(UsageError):
        parse_config(["escape", "--config", str(f)], env={})
    f.write_text("experiment = kesten\n")
    with pytest.raises(UsageError):
        parse_config(["escape", "--config", str(f)], env={})


def test_echo_is_plain():
    e = parse_config(["escape"], env={}).echo()
    assert e["settings"]["policy"] == "double_double"
    json.dumps(e)


def test_csv_formatting():
    b = table_bytes(["a", "b", "c"], [(1, 0.1, True)])
    assert b == b"a,b,c\n1,0.10000000000000001,1\n"
    assert table_bytes(["a"], []) == b"a\n"


def test_exit_codes(tmp_path, capsys):
    assert main(["renorm-check", "--alpha", "1/ln(3)"]) == 2
    assert main(["kesten", "--alpha", "1/2", "--x0", "1/5", "--steps", "100",
                 "--period-grid", "10", "--out", str(tmp_path / "k")]) == 0
    rep = json.loads((tmp_path / "k" / "report.json").read_text())
    assert rep["verdict"] == "pass"
    # the same-level measure check is expected to fail at these actions
    assert main(["intervals", "--I", "101", "--grid", "1000", "--out", str(tmp_path / "i")]) == 1
    out = capsys.readouterr().out
    assert "FAIL" in out


def test_escape_run_writes_track(tmp_path):
    assert main(["escape", "--returns", "200", "--out", str(tmp_path)]) == 0
    head = (tmp_path / "escape.csv").read_text().splitlines()
    assert len(head) == 201
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["results"]["final_action"] == 1200


def test_reruns_are_byte_identical(tmp_path):
    argv = ["simulate", "--steps", "2000", "--decimation", "10"]
    assert main(argv + ["--out", str(tmp_path / "a")]) == 0
    assert main(argv + ["--out", str(tmp_path / "b")]) == 0
    names = sorted(p.name for p in (tmp_path / "a").iterdir() if p.name != "timings.json")
    assert names
    for n in names:
        assert (tmp_path / "a" / n).read_bytes() == (tmp_path / "b" / n).read_bytes()
