import json
import socket
import threading

import numpy as np
import pytest

from tpmkey.cli import EXIT_IO, EXIT_OK, EXIT_SESSION, EXIT_USAGE, main, read_config, secret_hex
from tpmkey.distill import distill
from tpmkey.protocol import run_session
from tpmkey.tpm import TpmParams

SMALL = ["--k", "3", "--l", "8", "--m", "5", "--n", "60"]


def free_port():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def test_simulate_writes_outputs(tmp_path, capsys):
    assert main(["simulate", *SMALL, "--sessions", "5", "--out", str(tmp_path)]) == EXIT_OK
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["params"] == {"K": 3, "L": 8, "M": 5, "N": 60, "rule": "hebbian"}
    lines = (tmp_path / "distribution.csv").read_text().splitlines()
    assert lines[0] == "weight_value,p_before,p_after,uniform_reference"
    assert len(lines) == 18
    assert sum(float(l.split(",")[1]) for l in lines[1:]) == pytest.approx(1.0)
    assert json.loads(capsys.readouterr().out) == summary


def test_simulate_is_reproducible(tmp_path):
    for d in ("a", "b"):
        main(["simulate", *SMALL, "--sessions", "3", "--seed", "4", "--out", str(tmp_path / d)])
    assert (tmp_path / "a/summary.json").read_text() == (tmp_path / "b/summary.json").read_text()


def test_nist_writes_table(tmp_path, capsys):
    assert main(["nist", *SMALL, "--sessions", "20", "--out", str(tmp_path)]) == EXIT_OK
    table = (tmp_path / "nist.txt").read_text()
    assert "before equalization" in table and "after distillation" in table
    assert "(Fwd)" in table and "(Bwd)" in table
    doc = json.loads((tmp_path / "nist.json").read_text())
    assert set(doc["columns"]) == {"before equalization", "after distillation"}
    assert capsys.readouterr().out == table


def test_nist_flags(tmp_path):
    assert main(["nist", *SMALL, "--sessions", "5", "--no-baseline", "--no-equalization",
                 "--out", str(tmp_path)]) == EXIT_OK
    doc = json.loads((tmp_path / "nist.json").read_text())
    assert list(doc["columns"]) == ["after distillation"]
    assert "equalization = false" in doc["distill"]


def test_distill_file(tmp_path, capsys):
    p = TpmParams(3, 8, 1, 60)
    a, _ = run_session(p, 1, 2, 3)
    wfile = tmp_path / "w.txt"
    wfile.write_text("\n".join(" ".join(map(str, row)) for row in a.final_weights))
    assert main(["distill", str(wfile)]) == EXIT_OK
    assert capsys.readouterr().out.strip() == secret_hex(distill(a.final_weights, p))
    out = tmp_path / "s.hex"
    assert main(["distill", str(wfile), "--hash", "sha512", "--out", str(out)]) == EXIT_OK
    assert out.read_text().strip() == secret_hex(
        distill(a.final_weights, p, __import__("tpmkey").DistillConfig("sha512")))


def test_distill_bad_input(tmp_path):
    wfile = tmp_path / "w.txt"
    wfile.write_text("1 2 x")
    assert main(["distill", str(wfile)]) == EXIT_USAGE
    wfile.write_text("1 2 3")
    assert main(["distill", str(wfile)]) == EXIT_USAGE
    assert main(["distill", str(tmp_path / "missing")]) == EXIT_IO


def keyagree_pair(tmp_path, tag, listen_args=(), connect_args=(), seed="7"):
    port = str(free_port())
    codes = {}
    common = [*SMALL, "--port", port, "--timeout", "20"]
    if seed is not None:
        common += ["--seed", seed]

    def listener():
        codes["l"] = main(["keyagree", "--listen", *common, *listen_args,
                           "--out", str(tmp_path / f"{tag}-l.hex")])

    t = threading.Thread(target=listener)
    t.start()
    codes["c"] = main(["keyagree", "--connect", "127.0.0.1", *common, *connect_args,
                       "--out", str(tmp_path / f"{tag}-c.hex")])
    t.join(60)
    return codes


def test_keyagree_produces_matching_secrets(tmp_path):
    codes = keyagree_pair(tmp_path, "x")
    assert codes == {"l": EXIT_OK, "c": EXIT_OK}
    left = (tmp_path / "x-l.hex").read_text()
    assert left == (tmp_path / "x-c.hex").read_text()
    assert len(left.strip()) > 0
    meta = json.loads((tmp_path / "x-l.hex.json").read_text())
    assert meta["role"] == "recipient" and meta["secret_bits"] == 4 * len(left.strip())


def test_keyagree_seeded_runs_repeat(tmp_path):
    keyagree_pair(tmp_path, "one")
    keyagree_pair(tmp_path, "two")
    assert (tmp_path / "one-l.hex").read_text() == (tmp_path / "two-l.hex").read_text()


def test_keyagree_unseeded_runs_differ(tmp_path):
    assert keyagree_pair(tmp_path, "u1", seed=None) == {"l": EXIT_OK, "c": EXIT_OK}
    keyagree_pair(tmp_path, "u2", seed=None)
    assert (tmp_path / "u1-l.hex").read_text() != (tmp_path / "u2-l.hex").read_text()


def test_keyagree_parameter_mismatch(tmp_path):
    codes = keyagree_pair(tmp_path, "bad", connect_args=["--l", "7"])
    assert codes == {"l": EXIT_SESSION, "c": EXIT_SESSION}
    assert not (tmp_path / "bad-l.hex").exists() and not (tmp_path / "bad-c.hex").exists()


def test_keyagree_role_conflict(tmp_path):
    codes = keyagree_pair(tmp_path, "rc", listen_args=["--role", "sender"])
    assert codes == {"l": EXIT_SESSION, "c": EXIT_SESSION}


def test_keyagree_nobody_listening():
    port = str(free_port())
    assert main(["keyagree", "--connect", "127.0.0.1", "--port", port, "--timeout", "0.3"]) == EXIT_IO


@pytest.mark.parametrize("argv", [
    [],
    ["bogus"],
    ["simulate", "--k", "zero"],
    ["simulate", "--k", "0", "--sessions", "1"],
    ["simulate", "--m", "9", "--sessions", "1"],
    ["simulate", "--sessions", "0"],
    ["keyagree"],
    ["keyagree", "--listen", "--connect", "x"],
    ["nist", "--hash", "nope", "--sessions", "1"],
    ["simulate", "--rule", "hebb"],
])
def test_usage_errors(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    with pytest.raises(SystemExit) as exc:
        raise SystemExit(main(argv))
    assert exc.value.code == EXIT_USAGE


def test_large_m_needs_flag(tmp_path):
    assert main(["simulate", "--l", "2", "--m", "3", "--n", "10", "--sessions", "1",
                 "--allow-large-m", "--out", str(tmp_path)]) == EXIT_OK


def test_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# demo\nk = 2\nL = 4\nm=2\nn = 10\nsessions = 2\nequalization = no\n")
    assert read_config(str(cfg))["equalization"] is False
    assert main(["simulate", "--config", str(cfg), "--n", "12", "--out", str(tmp_path)]) == EXIT_OK
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["params"] == {"K": 2, "L": 4, "M": 2, "N": 12, "rule": "hebbian"}
    cfg.write_text("colour = blue\n")
    assert main(["simulate", "--config", str(cfg)]) == EXIT_USAGE


def test_module_entry_point():
    import subprocess
    import sys
    r = subprocess.run([sys.executable, "-m", "tpmkey", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "keyagree" in r.stdout
