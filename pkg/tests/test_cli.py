import io
import json
import threading
import time

import pytest

from blindqc.cli import (
    EXIT_PARSE,
    Config,
    ParseError,
    cmd_audit,
    cmd_axes,
    cmd_run,
    cmd_verify,
    format_circuit,
    main,
    parse_circuit,
)
from blindqc.compiler import random_circuit

BELL = "# bell\nwires 2\nH 0\nCNOT 0 1\nT 1   # phase\nA 3 0\n"


def test_parse_grammar():
    c = parse_circuit(BELL)
    assert c.num_wires == 2
    assert [g.kind for g in c.instructions] == ["H", "CNOT", "A", "A"]
    assert c.instructions[3].angle == 3 and c.instructions[3].wires == (0,)
    assert parse_circuit("X 4\n").num_wires == 5


@pytest.mark.parametrize("text,line", [
    ("H 0\nCNOT 0\n", 2),
    ("FOO 1\n", 1),
    ("H x\n", 1),
    ("wires 1\nH 3\n", 2),
    ("CNOT 1 1\n", 1),
    ("H 0\nwires 2\n", 2),
])
def test_parse_errors_carry_line(text, line):
    with pytest.raises(ParseError) as err:
        parse_circuit(text)
    assert err.value.line == line


def test_format_roundtrip(rng):
    c = random_circuit(3, 12, rng)
    assert parse_circuit(format_circuit(c)).instructions == c.instructions


def test_run_is_deterministic():
    c = parse_circuit(BELL)
    outs = []
    for _ in range(2):
        buf = io.StringIO()
        assert cmd_run(Config(protocol=2, seed_alice=7, seed_bob=9), c, out=buf) == 0
        outs.append(buf.getvalue())
    assert outs[0] == outs[1]
    assert "fidelity vs direct simulation: 1.000000000000" in outs[0]


def test_run_socket_mode_matches():
    c = parse_circuit(BELL)
    a, b = io.StringIO(), io.StringIO()
    cmd_run(Config(protocol=1, seed_alice=2, seed_bob=3), c, out=a)
    cmd_run(Config(protocol=1, seed_alice=2, seed_bob=3, mode="socket"), c, out=b)
    assert a.getvalue() == b.getvalue()


def test_main_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.qc"
    bad.write_text("H 0\nCNOT 0\n")
    assert main(["run", str(bad)]) == EXIT_PARSE
    assert "line 2" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "missing.qc")]) == EXIT_PARSE
    assert main(["run", "--mode", "socket", "--port", "1", str(bad)]) == EXIT_PARSE


def test_transport_failure_exit(tmp_path):
    good = tmp_path / "good.qc"
    good.write_text("H 0\n")
    # nothing listens on a port we just released
    import socket
    s = socket.socket()
    s.bind(("127.0.0.1", 0))
    port = s.getsockname()[1]
    s.close()
    assert main(["run", "--mode", "socket", "--port", str(port), str(good)]) == 4


def test_serve_and_connect(tmp_path):
    good = tmp_path / "good.qc"
    good.write_text(BELL)
    import socket
    s = socket.socket()
    s.bind(("127.0.0.1", 0))
    port = s.getsockname()[1]
    s.close()
    server = threading.Thread(target=main, args=(["serve", "--port", str(port), "--seed-bob", "9"],), daemon=True)
    server.start()
    time.sleep(0.3)
    remote, local = io.StringIO(), io.StringIO()
    cfg = Config(protocol=2, seed_alice=7, seed_bob=9, mode="socket", port=port)
    assert cmd_run(cfg, parse_circuit(BELL), out=remote) == 0
    server.join(5)
    cmd_run(Config(protocol=2, seed_alice=7, seed_bob=9), parse_circuit(BELL), out=local)
    assert remote.getvalue() == local.getvalue()


def test_audit_reports():
    buf = io.StringIO()
    assert cmd_audit(Config(protocol=1), [parse_circuit("H 0\n")], out=buf) == 0
    assert json.loads(buf.getvalue())["mixedness"]["status"] == "PASS"
    buf = io.StringIO()
    assert cmd_audit(Config(protocol=1), [parse_circuit("H 0\n")], encrypt=False, out=buf) == 1
    assert json.loads(buf.getvalue())["mixedness"]["status"] == "FAIL"
    buf = io.StringIO()
    pair = [parse_circuit("wires 2\nCNOT 0 1\n"), parse_circuit("wires 2\n")]
    assert cmd_audit(Config(protocol=2, min_columns=2), pair, window=4, out=buf) == 0
    assert json.loads(buf.getvalue())["independence"]["status"] == "PASS"


def test_verify_csv():
    buf = io.StringIO()
    code = cmd_verify(Config(protocol=1), parse_circuit("wires 3\nT 0\n"), 5, 2, 1, "none", 50, out=buf)
    header, row = buf.getvalue().splitlines()
    assert header.startswith("N,N_d,s,policy") and row.split(",")[6] == "0.000000"
    assert code == 0
    with pytest.raises(ParseError):
        cmd_verify(Config(), parse_circuit("H 0\n"), 2, 1, 1, "bogus", 10)


def test_axes_output():
    buf = io.StringIO()
    assert cmd_axes(out=buf) == 0
    text = buf.getvalue()
    assert text.count("match") == 8 and "MISMATCH" not in text
    assert "antiparallel" in text
