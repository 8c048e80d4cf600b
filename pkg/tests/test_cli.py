import io
import json

import pytest

from k3lab import cli


def run(argv):
    buf = io.StringIO()
    code = cli.run(argv, buf)
    text = buf.getvalue()
    return code, (json.loads(text) if text.startswith("{") else text)


@pytest.fixture(autouse=True)
def _no_env_cache(monkeypatch):
    monkeypatch.delenv("K3LAB_CACHE", raising=False)


def test_usage_errors_exit_2():
    assert cli.run(["frobnicate"], io.StringIO()) == 2
    assert cli.run(["verify", "gkz"], io.StringIO()) == 2
    assert cli.run(["verify", "gkz", "--family", "9"], io.StringIO()) == 2
    assert cli.run(["--order", "3", "verify", "gkz", "--family", "0"], io.StringIO()) == 2
    assert cli.run(["fibres", "--family", "0", "--lambda", "0", "--mu", "1"], io.StringIO()) == 2
    assert cli.run(["monodromy", "--family", "0", "--loop", "mu-circle", "--center", "x"], io.StringIO()) == 2


def test_verify_polytopes():
    code, rep = run(["verify", "polytopes"])
    assert code == 0 and rep["schema"] == cli.SCHEMA
    assert rep["summary"]["pass"] == rep["summary"]["total"] == 10


def test_verify_lattices_reports_printed_sign_failures():
    code, rep = run(["verify", "lattices"])
    assert rep["summary"]["total"] >= 13
    failed = {c["id"] for c in rep["claims"] if c["verdict"] == "fail"}
    assert failed == {"lattices.det.T2", "lattices.det.T3", "lattices.det.Tbar1"}
    assert code == 1


def test_verify_gkz_family0(tmp_path):
    code, rep = run(["--cache-dir", str(tmp_path), "verify", "gkz", "--family", "0", "--order", "12"])
    assert code == 0
    ids = {c["id"] for c in rep["claims"]}
    assert {f"gkz.0.{n}.printed.annihilates" for n in ("D1", "D2", "D3")} <= ids


def test_cache_round_trip(tmp_path):
    argv = ["--cache-dir", str(tmp_path), "verify", "gkz", "--family", "1", "--order", "14"]
    buf1, buf2 = io.StringIO(), io.StringIO()
    cli.run(argv, buf1)
    files = list(tmp_path.iterdir())
    assert len(files) == 1
    lines = files[0].read_text().splitlines()
    head = json.loads(lines[0])
    assert head["schema"] == cli.SERIES_SCHEMA and head["family"] == 1 and head["order"] == 14
    assert len(lines) - 1 == 120
    cli.run(argv, buf2)
    assert buf1.getvalue() == buf2.getvalue()


def test_cache_hits_and_corruption(tmp_path):
    c = cli.SeriesCache(str(tmp_path))
    s1 = c.series(2, 8)
    s2 = c.series(2, 8)
    assert (c.hits, c.misses) == (1, 1)
    assert s1.coeffs == s2.coeffs
    p = c.path(2, 8)
    text = p.read_text().replace('"num": "1"', '"num": "2"', 1)
    p.write_text(text)
    s3 = c.series(2, 8)
    assert c.misses == 2 and s3.coeffs == s1.coeffs
    assert cli.SeriesCache(str(tmp_path)).series(2, 8).coeffs == s1.coeffs


def test_env_cache_directory(tmp_path, monkeypatch):
    monkeypatch.setenv("K3LAB_CACHE", str(tmp_path))
    assert cli.load_config().cache_dir == str(tmp_path)
    cli.run(["verify", "gkz", "--family", "3", "--order", "8"], io.StringIO())
    assert any(tmp_path.iterdir())


def test_no_cache_flag(tmp_path, monkeypatch):
    monkeypatch.setenv("K3LAB_CACHE", str(tmp_path))
    cli.run(["--no-cache", "verify", "gkz", "--family", "0", "--order", "8"], io.StringIO())
    assert not any(tmp_path.iterdir())


def test_config_file_and_precedence(tmp_path):
    cfgfile = tmp_path / "k3lab.cfg"
    cfgfile.write_text("# settings\norder = 10\nbound = 2\ntol = 1e-9\n")
    cfg = cli.load_config(str(cfgfile), {"order": 12}, environ={})
    assert (cfg.order, cfg.bound, cfg.tol) == (12, 2, 1e-9)
    with pytest.raises(cli.UsageError):
        cli.parse_config_text("colour = blue")
    with pytest.raises(cli.UsageError):
        cli.load_config(None, {"tol": -1.0}, environ={})


def test_fibres_command():
    code, rep = run(["fibres", "--family", "0", "--lambda", "1", "--mu", "1"])
    assert code == 0
    assert rep["table"]["summary"] == "I15 + I3 + 6I1"
    assert rep["table"]["euler_sum"] == 24


def test_pfaffian_command():
    code, rep = run(["verify", "pfaffian", "--family", "1"])
    assert code == 0 and rep["certificate"]["printed_residual"] == []
    code, rep = run(["verify", "pfaffian", "--family", "0"])
    assert code == 1
    assert rep["certificate"]["printed_residual"]


def test_monodromy_command_deterministic():
    argv = ["monodromy", "--family", "0", "--loop", "disc-circle", "--center", "0.1+0.03i,0"]
    code1, rep1 = run(argv)
    code2, rep2 = run(argv)
    assert code1 == code2 == 0
    assert rep1 == rep2
    assert rep1["char_poly"] == [1, -2, 0, 2, -1]


def test_hilbert_command():
    code, rep = run(["hilbert", "verify-all"])
    assert code == 0 and rep["summary"]["total"] == 13


def test_report_text_and_determinism():
    buf1, buf2 = io.StringIO(), io.StringIO()
    code = cli.run(["report", "--format", "text"], buf1)
    cli.run(["report", "--format", "text"], buf2)
    assert buf1.getvalue() == buf2.getvalue()
    first = buf1.getvalue().splitlines()[0]
    assert first.startswith("report:")
    assert code == 1
    assert "FAIL  gkz.1.appell.literal" in buf1.getvalue()
