"""Exit-code and output contract tests for the command-line tool."""

import json
import math
import os
import re
import subprocess
from pathlib import Path

import pytest

CLI = os.environ.get("NEUROKEY_CLI")
REPO = Path(os.environ.get("NEUROKEY_REPO", Path(__file__).resolve().parents[2]))

pytestmark = pytest.mark.skipif(CLI is None, reason="NEUROKEY_CLI not set")

GOLDEN_WIRE = "7e0014010001000200000000c67063a6fbcf6b1cf31773ee"
GOLDEN_KEY = "000102030405060708090a0b0c0d0e0f"


def run(*args, cwd=None):
    return subprocess.run([CLI, "--no-timestamps", *args],
                          capture_output=True, text=True, cwd=cwd)


@pytest.fixture(scope="module")
def eeg_csv():
    src = REPO / "data" / "sample_eeg.csv"
    assert src.exists()
    return str(src)


@pytest.fixture(scope="module")
def enrollment(tmp_path_factory, eeg_csv):
    out = tmp_path_factory.mktemp("enr") / "op.nkey"
    r = run("enroll", "--eeg", eeg_csv, "--out", str(out), "--seed", "42")
    assert r.returncode == 0, r.stderr
    fingerprint = r.stdout.strip().splitlines()[0]
    assert re.fullmatch(r"[0-9a-f]{8}", fingerprint)
    return str(out), fingerprint


def test_enroll_writes_record_and_fingerprint(enrollment):
    path, fingerprint = enrollment
    assert Path(path).exists()
    assert len(fingerprint) == 8


def test_enroll_emit_key_hex(eeg_csv, tmp_path):
    out = tmp_path / "e.nkey"
    r = run("enroll", "--eeg", eeg_csv, "--out", str(out), "--seed", "42",
            "--emit-key-hex")
    assert r.returncode == 0
    lines = r.stdout.strip().splitlines()
    assert len(lines) == 2
    assert re.fullmatch(r"[0-9a-f]{32}", lines[1])


def test_enroll_missing_file_names_path(tmp_path):
    missing = tmp_path / "nope.csv"
    r = run("enroll", "--eeg", str(missing), "--out", str(tmp_path / "x.nkey"),
            "--seed", "1")
    assert r.returncode == 1
    assert str(missing) in r.stderr


def test_enroll_deterministic(eeg_csv, tmp_path):
    outs = []
    for name in ("a.nkey", "b.nkey"):
        out = tmp_path / name
        r = run("enroll", "--eeg", eeg_csv, "--out", str(out), "--seed", "9")
        assert r.returncode == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_reproduce_same_record(eeg_csv, enrollment):
    path, fingerprint = enrollment
    r = run("reproduce", "--eeg", eeg_csv, "--enrollment", path)
    assert r.returncode == 0
    assert r.stdout.strip() == fingerprint


def test_reproduce_noisy_same_subject(eeg_csv, enrollment, tmp_path):
    path, fingerprint = enrollment
    noisy = tmp_path / "noisy.csv"
    out = []
    rate = None
    for line in Path(eeg_csv).read_text().splitlines():
        s = line.strip()
        if s.startswith("#"):
            out.append(line)
            if "sample_rate_hz" in s:
                rate = float(s.split("=")[1])
            continue
        out.append(f"{float(s) + 1e-7 * math.sin(len(out)):.17g}")
    assert rate == 512.0
    noisy.write_text("\n".join(out) + "\n")
    r = run("reproduce", "--eeg", str(noisy), "--enrollment", path)
    assert r.returncode == 0
    assert r.stdout.strip() == fingerprint


def test_reproduce_cross_subject_fails(enrollment, tmp_path):
    path, _ = enrollment
    other = tmp_path / "other.csv"
    lines = ["# sample_rate_hz=512"]
    for k in range(1280):
        t = k / 512.0
        v = math.sin(2 * math.pi * 23.0 * t) + 0.5 * math.sin(2 * math.pi * 16.0 * t + 1.0)
        lines.append(f"{v:.10f}")
    other.write_text("\n".join(lines) + "\n")
    r = run("reproduce", "--eeg", str(other), "--enrollment", path)
    assert r.returncode == 2
    assert "error" in r.stderr


def test_simulate_scenario_a(tmp_path):
    events = tmp_path / "a_events.jsonl"
    traj = tmp_path / "a_traj.csv"
    r = run("simulate", "--scenario", str(REPO / "scenarios" / "scenario_a.json"),
            "--events", str(events), "--trajectory", str(traj))
    assert r.returncode == 0, r.stderr
    assert "verdict: ReturnedHome" in r.stdout
    rows = [json.loads(line) for line in events.read_text().splitlines()]
    assert rows[-1]["kind"] == "ReturnedHome"
    assert any(e["kind"] == "ForeignDetected" for e in rows)
    header = traj.read_text().splitlines()[0]
    assert header == "tick,x,y,mode"


def test_simulate_scenario_c_rekey(tmp_path):
    events = tmp_path / "c_events.jsonl"
    traj = tmp_path / "c_traj.csv"
    r = run("simulate", "--scenario", "scenarios/scenario_c.json",
            "--events", str(events), "--trajectory", str(traj), cwd=REPO)
    assert r.returncode == 0, r.stderr
    assert "verdict: MissionComplete" in r.stdout
    rows = [json.loads(line) for line in events.read_text().splitlines()]
    kinds = [e["kind"] for e in rows]
    assert "Rekeyed" in kinds
    assert kinds[-1] == "MissionComplete"


def test_simulate_timeout(tmp_path):
    cfg = {
        "max_ticks": 1,
        "waypoints": [{"x": 100, "y": 0}],
        "policy": "rtl",
    }
    scenario = tmp_path / "t.json"
    scenario.write_text(json.dumps(cfg))
    r = run("simulate", "--scenario", str(scenario),
            "--events", str(tmp_path / "e.jsonl"),
            "--trajectory", str(tmp_path / "t.csv"))
    assert r.returncode == 3
    assert "verdict: Timeout" in r.stdout


def test_frame_golden():
    r = run("frame", "--bytes", GOLDEN_WIRE, "--key", GOLDEN_KEY,
            "--peer", "0001")
    assert r.returncode == 0
    assert "payload_text: RTL" in r.stdout
    assert "verdict: Trusted" in r.stdout

    r2 = run("frame", "--bytes", GOLDEN_WIRE, "--key", GOLDEN_KEY,
             "--peer", "0bad")
    assert "verdict: Foreign" in r2.stdout


def test_frame_bad_checksum():
    corrupted = GOLDEN_WIRE[:-2] + "00"
    r = run("frame", "--bytes", corrupted, "--key", GOLDEN_KEY)
    assert r.returncode == 1
    assert "BadChecksum" in r.stderr


def test_frame_wrong_key():
    wrong = "ff" * 16
    r = run("frame", "--bytes", GOLDEN_WIRE, "--key", wrong)
    assert r.returncode == 2
    assert "BadMic" in r.stderr


def test_usage_error():
    r = run("enroll")
    assert r.returncode == 1
