import io
import json
import subprocess
import sys

import pytest

from ramanujan_cert.cli import run


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def test_dk():
    code, out, _ = call("dk", "4")
    assert code == 0
    assert "d_k  -1" in out
    code, out, _ = call("dk", "5", "--format", "json", "--no-timestamp")
    doc = json.loads(out)
    assert doc["schema"] == "ramanujan-cert-cli/1" and doc["d_k"] == ["-14", "-14"]
    assert "generated_at" not in doc


def test_check_exit_codes():
    code, out, _ = call("check", "3")
    assert code == 1 and "holds" in out and "false" in out
    code, out, _ = call("check", "1000", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["holds"] is True and doc["pi_x"] == ["168", "168"]
    assert "generated_at" in doc


def test_check_rational_alpha():
    code, out, _ = call("check", "1000", "--alpha", "2.5", "--format", "json")
    assert json.loads(out)["floor_x_over_alpha"] == ["400", "400"]


def test_scan_csv():
    code, out, _ = call("scan", "2", "5", "--format", "csv")
    lines = out.splitlines()
    assert code == 1
    assert lines[0].startswith("x,pi_x,")
    assert [ln.split(",")[0] for ln in lines[1:]] == ["2", "3", "4", "5"]
    assert all(ln.endswith("false") for ln in lines[1:])


def test_scan_clean_range():
    code, out, _ = call("scan", "38358837683", "38358837690", "--format", "json", "--no-timestamp")
    assert code == 0 and json.loads(out)["failing"] == []


def test_pi_and_limits():
    code, out, _ = call("pi", "10")
    assert code == 0 and "pi     [4, 4]" not in out and "4" in out
    code, _, err = call("pi", "1000000000000")
    assert code == 3 and "resource limit" in err
    code, _, err = call("pi", "1000", "--memory-budget", "1K")
    assert code == 3


def test_usage_errors():
    assert call("frobnicate")[0] == 2
    assert call("threshold", "--digits", "20")[0] == 2
    assert call("check", "1")[0] == 2
    assert call("scan", "10", "5")[0] == 2
    assert call("threshold", "--u1", "50")[0] == 2


def test_threshold_published_constants():
    code, out, _ = call("threshold", "--use-paper-constants", "--format", "json", "--no-timestamp")
    doc = json.loads(out)
    assert code == 0
    assert doc["u_threshold"][0].startswith("3158.4390814690584")
    assert doc["margin"][0].startswith("0.0029191529")


def test_audit_theta():
    code, out, _ = call("audit-theta", "100000", "--format", "json", "--no-timestamp")
    doc = json.loads(out)
    assert code == 0 and doc["holds"] is True and doc["argmax_excluding_2"] == ["1422", "1422"]


@pytest.mark.slow
def test_certify_json_reproducible():
    first = call("certify", "--format", "json", "--no-timestamp")
    second = call("certify", "--format", "json", "--no-timestamp")
    assert first[0] == 0 and first[1] == second[1]
    doc = json.loads(first[1])
    assert doc["verdict"] is True
    assert float(doc["u_threshold"][1]) <= 3158.442


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ramanujan_cert", "dk", "4"], capture_output=True, text=True)
    assert proc.returncode == 0 and "-1" in proc.stdout


def test_run_config_defaults():
    from ramanujan_cert.cli import RunConfig, build_parser

    cfg = RunConfig.from_args(build_parser().parse_args(["certify"]))
    assert cfg == RunConfig("certify")
    assert (cfg.u1, cfg.digits, cfg.alpha, cfg.format, cfg.use_paper_constants) == ("3157.442", 60, "e", "text", False)


def test_config_file(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"format": "json", "no_timestamp": True, "alpha": "2.5"}))
    code, out, _ = call("check", "1000", "--config", str(path))
    doc = json.loads(out)
    assert code == 0 and doc["floor_x_over_alpha"] == ["400", "400"] and "generated_at" not in doc
    # same argv and same file give identical bytes
    assert call("check", "1000", "--config", str(path))[1] == out
    # explicit flags win over the file
    code, out, _ = call("check", "1000", "--config", str(path), "--alpha", "e")
    assert json.loads(out)["floor_x_over_alpha"] == ["367", "367"]


def test_config_file_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"colour": "blue"}))
    assert call("dk", "4", "--config", str(bad))[0] == 2
    bad.write_text(json.dumps({"digits": "sixty"}))
    assert call("dk", "4", "--config", str(bad))[0] == 2
    assert call("dk", "4", "--config", str(tmp_path / "missing.json"))[0] == 2
    bad.write_text(json.dumps({"digits": 30}))
    assert call("dk", "4", "--config", str(bad))[0] == 2
