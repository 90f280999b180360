import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from filterlab.cli import EXIT_ERROR, EXIT_FAILS, EXIT_INCONCLUSIVE, EXIT_OK, build_parser, exit_code, main
from filterlab.config import emit_config, load_config, parse_config
from filterlab.errors import ConfigError, ReportWriteError
from filterlab.natset import f_density, parse_set
from filterlab.modulus import builtin_modulus
from filterlab.report import emit_report, envelope, jsonable, write_report

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = sorted((ROOT / "configs").glob("*.toml"))
BAD_MODULUS = ROOT / "tests" / "fixtures" / "bad_modulus.toml"


def run_cli(args, capsys):
    code = main(args)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ---------------------------------------------------------------------------
# config


def test_minimal_config_keeps_other_defaults():
    cfg = parse_config("horizon = 1e6\n")
    assert cfg.horizon == 1_000_000
    assert cfg.dim is None and cfg.tolerance is None and cfg.filters == {}


def test_config_with_fstat_filter_validates():
    cfg = parse_config('[filters]\nlog_stat = "fstat(log1p)"\n')
    assert cfg.filters == {"log_stat": "fstat(log1p)"}


def test_square_modulus_rejected_with_witness_and_line():
    with pytest.raises(ConfigError) as info:
        parse_config('horizon = 10\n\n[modulus]\nexpr = "t*t"\n')
    (line, msg), = info.value.errors
    assert line == 4
    assert "subadditive" in msg and "[1.0, 1.0]" in msg


def test_every_problem_reported():
    text = 'horizn = 3\ntolerance = 2\n[sets]\nbad = "ap("\n[output]\nformat = "xml"\n'
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    lines = sorted(line for line, _ in info.value.errors)
    assert lines == [1, 2, 4, 6]


def test_syntax_error_has_line():
    with pytest.raises(ConfigError) as info:
        parse_config("horizon = \n")
    assert info.value.errors[0][0] == 1


def test_unknown_gallery_parameter():
    with pytest.raises(ConfigError):
        parse_config("[gallery.fast_remark]\nwidth = 3\n")


@pytest.mark.parametrize("path", CONFIGS, ids=lambda p: p.name)
def test_shipped_configs_round_trip(path):
    cfg = load_config(path)
    assert parse_config(emit_config(cfg)) == cfg


def test_three_configs_ship():
    assert {p.name for p in CONFIGS} == {"minimal.toml", "fstat_log1p.toml", "gallery.toml"}


# ---------------------------------------------------------------------------
# reports


def test_density_report_json_fields():
    est = f_density(parse_set("evens"), builtin_modulus("identity"), 10**4)
    doc = json.loads(emit_report(envelope("density", est), "json"))
    assert doc["tool"] == "filterlab" and doc["version"]
    assert list(doc["result"])[:3] == ["set", "modulus", "value"]
    assert doc["result"]["status"] == "converged"


def test_density_samples_csv():
    est = f_density(parse_set("evens"), builtin_modulus("identity"), 10**4)
    text = emit_report(envelope("density", est), "csv").decode()
    assert text.startswith("# filterlab ")
    rows = list(csv.reader(io.StringIO(text.split("\n", 1)[1])))
    assert rows[0] == ["n", "ratio"]
    assert len(rows) - 1 == len(est.samples)


def test_emit_is_byte_stable():
    est = f_density(parse_set("squares"), builtin_modulus("log1p"), 10**5)
    for fmt in ("json", "csv", "text"):
        assert emit_report(envelope("density", est), fmt) == emit_report(envelope("density", est), fmt)


def test_nonfinite_values_stay_strict_json():
    doc = jsonable({"a": float("inf"), "b": float("nan")})
    assert doc == {"a": "inf", "b": "nan"}


def test_unwritable_path(tmp_path):
    with pytest.raises(ReportWriteError):
        write_report(b"x", tmp_path / "missing" / "out.json")


# ---------------------------------------------------------------------------
# command line


@pytest.mark.parametrize(
    "outcomes,code",
    [(["holds"], 0), (["pass", "pass"], 0), (["holds", "fails"], 2), (["rejected"], 2), (["holds", "inconclusive"], 3), (["inconclusive", "fail"], 2)],
)
def test_exit_code_mapping(outcomes, code):
    assert exit_code(outcomes) == code


def test_help_documents_defaults():
    text = build_parser().format_help()
    for flag in ("--horizon", "--dim", "--tolerance", "--jobs", "--seed", "--report", "--format"):
        assert flag in text
    assert "default" in text


def test_modulus_validate(capsys):
    code, out, _ = run_cli(["modulus", "validate", "--name", "log1p"], capsys)
    assert code == EXIT_OK
    assert json.loads(out)["result"]["ok"] is True
    code, _, _ = run_cli(["modulus", "validate", "--expr", "t*t"], capsys)
    assert code == EXIT_FAILS


def test_density_exit_codes(capsys):
    code, out, _ = run_cli(["density", "--set", "squares", "--zero", "--horizon", "1e8"], capsys)
    assert code == EXIT_OK
    code, _, _ = run_cli(["density", "--set", "evens", "--zero"], capsys)
    assert code == EXIT_FAILS


def test_inconclusive_exit(capsys):
    code, _, _ = run_cli(["filter", "member", "--filter", "stat", "--set", "compl(squares)", "--horizon", "1e6"], capsys)
    assert code == EXIT_INCONCLUSIVE


def test_space_pair(capsys):
    code, out, _ = run_cli(["space", "pair", "--x", "ones", "--y", "basis(5)", "--dim", "100"], capsys)
    assert code == EXIT_OK
    assert json.loads(out)["result"]["value"] == 1.0


def test_converge_limit_text(capsys):
    code, out, _ = run_cli(["converge", "limit", "--seq", "scalar(1/n)", "--candidate", "0", "--filter", "frechet", "--format", "text"], capsys)
    assert code == EXIT_OK
    assert "outcome: holds" in out


def test_density_csv_side_file(tmp_path, capsys):
    path = tmp_path / "s.csv"
    code, _, _ = run_cli(["density", "--set", "evens", "--horizon", "1e4", "--csv", str(path)], capsys)
    assert code == EXIT_OK
    assert path.read_text().splitlines()[1] == "n,ratio"


def test_report_flag_writes_file(tmp_path, capsys):
    path = tmp_path / "list.json"
    code, out, _ = run_cli(["gallery", "list", "--report", str(path)], capsys)
    assert code == EXIT_OK and out == ""
    assert len(json.loads(path.read_text())["result"]) == 7


def test_gallery_param_override(capsys):
    code, out, _ = run_cli(["gallery", "run", "fast_remark", "--param", "sequence=\"perturbed(0, evens, 1)\"", "--param", "horizon=1e5"], capsys)
    assert code == EXIT_FAILS
    assert json.loads(out)["result"]["status"] == "rejected"


def test_bad_config_exits_one(capsys):
    code, _, err = run_cli(["--config", str(BAD_MODULUS), "density", "--set", "squares"], capsys)
    assert code == EXIT_ERROR
    assert "line 4" in err and "subadditive" in err


def test_bad_dsl_exits_one(capsys):
    code, _, err = run_cli(["density", "--set", "nope("], capsys)
    assert code == EXIT_ERROR
    assert "error" in err


def test_usage_error_exits_one():
    with pytest.raises(SystemExit) as info:
        main(["bogus"])
    assert info.value.code == EXIT_ERROR


def test_config_names_resolve(capsys):
    cfg = str(ROOT / "configs" / "fstat_log1p.toml")
    code, out, _ = run_cli(["--config", cfg, "filter", "member", "--filter", "log_stat", "--set", "compl(cubes)"], capsys)
    assert json.loads(out)["result"]["diagnostics"]["filter"] == "fstat(log1p)"
    assert code == EXIT_FAILS


def test_console_script_entry_point():
    res = subprocess.run([sys.executable, "-m", "filterlab.cli", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("filterlab ")
