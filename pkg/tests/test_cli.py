import json
from pathlib import Path

import pytest

import pfbv.cli as cli
from pfbv.errors import ApiUnavailable

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def run(args):
    return cli.main([str(a) for a in args])


# --- verify -----------------------------------------------------------------

def test_verify_fig3_exits_1_and_names_lemma(tmp_path, capsys):
    rc = run([
        "verify", FIXTURES / "fig3" / "input.json",
        "--backend", "mock", "--mock-script", FIXTURES / "fig3" / "mock_script.json",
        "--out-dir", tmp_path,
    ])
    assert rc == 1
    out = capsys.readouterr().out
    assert "Lemma 5.1" in out
    report = (tmp_path / "report.txt").read_text()
    assert "Lemma 5.1" in report
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["verdict"]["flagged_steps"] == [7]
    assert manifest["verdict"]["accepted"] is False


def test_verify_all_correct_exits_0(tmp_path):
    rc = run([
        "verify", FIXTURES / "allcorrect" / "input.json",
        "--backend", "mock", "--mock-script", FIXTURES / "allcorrect" / "mock_script.json",
        "--out-dir", tmp_path,
    ])
    assert rc == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["verdict"]["accepted"] is True


def test_verify_missing_mock_script_exits_2(tmp_path, capsys):
    rc = run([
        "verify", FIXTURES / "fig3" / "input.json",
        "--backend", "mock", "--mock-script", tmp_path / "nope.json",
        "--out-dir", tmp_path,
    ])
    assert rc == 2
    assert "mock script not found" in capsys.readouterr().err


def test_verify_manifest_replays_byte_identically(tmp_path):
    out = tmp_path / "run"

    def once():
        rc = run([
            "verify", FIXTURES / "fig3" / "input.json",
            "--backend", "mock", "--mock-script", FIXTURES / "fig3" / "mock_script.json",
            "--out-dir", out, "--seed", "7",
        ])
        assert rc == 1
        return (out / "manifest.json").read_bytes()

    assert once() == once()


# --- bench ------------------------------------------------------------------

def test_bench_step_fixture_two_sweep_rows(tmp_path):
    rc = run([
        "bench", FIXTURES / "datasets" / "step_mini.jsonl",
        "--backend", "mock", "--mock-script", FIXTURES / "mock" / "step_bench_script.json",
        "--mode", "step", "--method", "baseline", "--k", "2", "--ks", "1,2",
        "--out-dir", tmp_path,
    ])
    assert rc == 0
    csv_lines = (tmp_path / "sweep.csv").read_text().strip().splitlines()
    assert len(csv_lines) == 3  # header + 2 rows
    assert csv_lines[1].startswith("1,")
    assert csv_lines[2].startswith("2,")
    metrics = json.loads((tmp_path / "metrics.json").read_text())
    assert metrics["tp"] == 4


def test_bench_paper_fixture(tmp_path):
    rc = run([
        "bench", FIXTURES / "datasets" / "paper_mini.jsonl",
        "--backend", "mock", "--mock-script", FIXTURES / "mock" / "paper_bench_script.json",
        "--mode", "paper", "--method", "baseline", "--k", "1", "--ks", "1",
        "--out-dir", tmp_path,
    ])
    assert rc == 0
    metrics = json.loads((tmp_path / "metrics.json").read_text())
    assert (metrics["tp"], metrics["fp"], metrics["fn"]) == (2, 1, 1)


def test_bench_invalid_dataset_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"id": "x", "problem": "p", "steps": ["a"], "labels": []}\n')
    rc = run([
        "bench", bad,
        "--backend", "mock", "--mock-script", FIXTURES / "mock" / "step_bench_script.json",
        "--mode", "step", "--method", "baseline", "--k", "1",
        "--out-dir", tmp_path,
    ])
    assert rc == 2
    assert "SchemaViolation" in capsys.readouterr().err


# --- inspect ----------------------------------------------------------------

def test_inspect_template_fixture(capsys):
    rc = run(["inspect", FIXTURES / "goldens" / "b2_document.txt"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "- Theorem" in out
    assert "- Proposition 1" in out
    assert "- Lemma 1.1" in out
    assert "VERIFICATION ORDER" in out
    assert '"within_bound": true' in out


def test_inspect_forward_reference_rendered(tmp_path, capsys):
    doc = tmp_path / "bad.txt"
    doc.write_text(
        "<THEOREM_STATEMENT>\nStatement :\nt\n</THEOREM_STATEMENT>\n\n"
        '<LEMMA_STATEMENT id="2.1">\nStatement :\nearly\n</LEMMA_STATEMENT>\n\n'
        '<LEMMA_PROOF id="2.1">\nx\n</LEMMA_PROOF>\n\n'
        '<PROPOSITION_STATEMENT id="2">\nStatement :\np\n</PROPOSITION_STATEMENT>\n\n'
        '<PROPOSITION_PROOF id="2">\ny\n</PROPOSITION_PROOF>\n\n'
        "<THEOREM_PROOF>\nz\n</THEOREM_PROOF>\n"
    )
    rc = run(["inspect", doc])
    assert rc == 2
    assert "ForwardReference" in capsys.readouterr().err


def test_inspect_parse_error_has_position(tmp_path, capsys):
    doc = tmp_path / "bad.txt"
    doc.write_text("<THEOREM_STATEMENT>\nStatement :\nx\n</THEOREM_STATEMENT>\nstray text\n")
    rc = run(["inspect", doc])
    assert rc == 2
    assert "line 5" in capsys.readouterr().err


def test_inspect_depth_limit_flag(tmp_path, capsys):
    rc = run(["inspect", FIXTURES / "goldens" / "b2_document.txt", "--depth-limit", "1"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "exceeds limit 1" in out


# --- mine -------------------------------------------------------------------

def test_mine_stub_funnel(tmp_path, capsys):
    rc = run([
        "mine", "--start", "2025-01-01", "--end", "2025-07-30",
        "--stub", FIXTURES / "datasets" / "arxiv_stub.jsonl",
        "--backend", "mock", "--mock-script", FIXTURES / "mock" / "triage_script.json",
        "--out-dir", tmp_path,
    ])
    assert rc == 0
    funnel = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert funnel == {"regex_pass": 4, "retained": 2, "retrieved": 10}
    worklist = (tmp_path / "worklist.jsonl").read_text().strip().splitlines()
    assert len(worklist) == 2


def test_mine_empty_window(tmp_path, capsys):
    rc = run([
        "mine", "--start", "2024-01-01", "--end", "2024-01-02",
        "--stub", FIXTURES / "datasets" / "arxiv_stub.jsonl",
        "--backend", "mock", "--mock-script", FIXTURES / "mock" / "triage_script.json",
        "--out-dir", tmp_path,
    ])
    assert rc == 0
    assert (tmp_path / "worklist.jsonl").read_text() == ""


def test_mine_api_down_exits_2(tmp_path, monkeypatch, capsys):
    class DownClient:
        def __init__(self, *a, **k):
            pass

        def fetch(self, *a):
            raise ApiUnavailable("status 503")
            yield  # pragma: no cover

    monkeypatch.setattr(cli.miner_mod, "ArxivApiClient", DownClient)
    rc = run([
        "mine", "--start", "2025-01-01", "--end", "2025-01-02",
        "--backend", "mock", "--mock-script", FIXTURES / "mock" / "triage_script.json",
        "--out-dir", tmp_path,
    ])
    assert rc == 2
    assert "ApiUnavailable" in capsys.readouterr().err


# --- configuration ------------------------------------------------------------

def test_config_precedence_flags_over_file_over_defaults(tmp_path):
    config_file = tmp_path / "config.json"
    config_file.write_text(json.dumps({"k": 2, "seed": 5, "model_name": "from-file"}))
    rc = run([
        "verify", FIXTURES / "allcorrect" / "input.json",
        "--config", config_file,
        "--backend", "mock", "--mock-script", FIXTURES / "allcorrect" / "mock_script.json",
        "--out-dir", tmp_path, "--k", "1",
    ])
    assert rc == 0
    snapshot = json.loads((tmp_path / "manifest.json").read_text())["config"]
    assert snapshot["k"] == 1  # flag wins
    assert snapshot["seed"] == 5  # file wins over default
    assert snapshot["model_name"] == "from-file"


def test_config_unknown_keys_rejected(tmp_path, capsys):
    config_file = tmp_path / "config.json"
    config_file.write_text(json.dumps({"no_such_option": 1}))
    rc = run([
        "verify", FIXTURES / "allcorrect" / "input.json",
        "--config", config_file,
        "--backend", "mock", "--mock-script", FIXTURES / "allcorrect" / "mock_script.json",
        "--out-dir", tmp_path,
    ])
    assert rc == 2
    assert "unknown config keys" in capsys.readouterr().err


def test_api_key_from_environment_is_masked(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.API_KEY_ENV, "secret-key")
    rc = run([
        "verify", FIXTURES / "allcorrect" / "input.json",
        "--backend", "mock", "--mock-script", FIXTURES / "allcorrect" / "mock_script.json",
        "--out-dir", tmp_path,
    ])
    assert rc == 0
    manifest = (tmp_path / "manifest.json").read_text()
    assert "secret-key" not in manifest
    assert json.loads(manifest)["config"]["api_key"] == "***"
