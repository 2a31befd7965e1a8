import os

import pytest

from helsonzeta.cli import main
from helsonzeta.pipeline import parse_config
from helsonzeta.errors import FormatError


CONFIG = """
# one zero, tiny desk run
mode = unconditional
xmax = 1e4
zero = 0.8+5i
control = 0.85+10i
"""


def write_config(tmp_path, text=CONFIG):
    path = tmp_path / "run.cfg"
    path.write_text(text)
    return str(path)


def test_parse_config_round_trip():
    cfg = parse_config(CONFIG)
    assert cfg.mode.kind == "unconditional"
    assert cfg.x_max == 1e4
    assert cfg.zeroes == [(0.8 + 5j, 1)]
    assert cfg.controls == [0.85 + 10j]


def test_parse_config_multiplicity():
    cfg = parse_config("zero = 0.85+4i x2\npole = 0.9-1i x3\n")
    assert cfg.zeroes == [(0.85 + 4j, 2)]
    assert cfg.poles == [(0.9 - 1j, 3)]


def test_parse_config_rejects_unknown_key():
    with pytest.raises(FormatError):
        parse_config("zeroes = 1+2i\n")
    with pytest.raises(FormatError):
        parse_config("just some words\n")


def test_plan_subcommand(tmp_path, capsys):
    rc = main(["plan", "--config", write_config(tmp_path)])
    out = capsys.readouterr().out
    assert rc == 0
    assert "zero at (0.8+5j) residue +1" in out
    assert "fingerprint" in out


def test_plan_rejects_bad_targets(tmp_path, capsys):
    cfg = write_config(tmp_path, "zero = 0.3+1i\n")
    rc = main(["plan", "--config", cfg])
    assert rc == 2
    assert "error" in capsys.readouterr().err


def test_build_verify_eval_round_trip(tmp_path, capsys):
    out_dir = str(tmp_path / "out")
    rc = main(["build", "--config", write_config(tmp_path),
               "--out", out_dir])
    out = capsys.readouterr().out
    assert rc == 0
    assert "FAIL" not in out
    for name in ("chi.tbl", "ledger.csv", "blocks.csv",
                 "residues.csv", "report.txt"):
        assert os.path.exists(os.path.join(out_dir, name))

    table = os.path.join(out_dir, "chi.tbl")
    rc = main(["verify", table])
    out = capsys.readouterr().out
    assert rc == 0
    assert "FAIL" not in out

    rc = main(["eval", table, "--at", "2", "--what", "zeta"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "+-" in out

    rc = main(["eval", table, "--at", "0.8+5i", "--what", "residue"])
    out = capsys.readouterr().out
    assert rc == 0

    rc = main(["eval", table, "--at", "1.5+1i", "--what", "logderiv"])
    assert rc == 0


def test_eval_missing_table(capsys):
    rc = main(["eval", "/nonexistent/chi.tbl", "--at", "2"])
    assert rc == 2


def test_threads_flag_validated(tmp_path, capsys):
    rc = main(["plan", "--config", write_config(tmp_path), "--threads", "0"])
    assert rc == 2


def test_build_xmax_override(tmp_path, capsys):
    out_dir = str(tmp_path / "out2")
    rc = main(["build", "--config", write_config(tmp_path),
               "--xmax", "5e3", "--out", out_dir])
    assert rc == 0
    capsys.readouterr()
