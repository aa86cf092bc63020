import csv
import io
from pathlib import Path

import numpy as np
import pytest

from localcontrol.cli import EXIT_ERROR, EXIT_NEGATIVE, EXIT_OK, main
from localcontrol.protocol import CONVERGENCE_HEADER

NETS = Path(__file__).resolve().parent.parent / "networks"


def run(*argv):
    out = io.StringIO()
    code = main([str(a) for a in argv], out=out)
    return code, out.getvalue()


def value(report, key):
    for line in report.splitlines():
        if line.startswith(key):
            return line[len(key):].strip(" :=")
    raise KeyError(key)


class TestCheck:
    def test_path5_certified(self):
        code, text = run("check", NETS / "path5_end.toml")
        assert code == EXIT_OK
        assert text.splitlines()[0].startswith("# manifest: command=check")
        assert "CERTIFIED" in text.splitlines()
        assert text.splitlines()[1:6] == ["BWWWW", "BBWWW", "BBBWW", "BBBBW", "BBBBB"]

    def test_path3_middle(self):
        code, text = run("check", NETS / "path3_middle.toml")
        assert code == EXIT_NEGATIVE
        assert "NOT CERTIFIED" in text.splitlines()

    def test_star_leaf_oracle(self):
        code, text = run("check", NETS / "star_leaf.toml", "--oracle")
        assert code == EXIT_NEGATIVE
        assert "NOT CERTIFIED" in text
        assert "condition ii: FAILS" in text
        assert value(text, "witness eigenvalue") == "0.0000000"

    def test_pair_oracle_holds(self):
        code, text = run("check", NETS / "pair.toml", "--oracle")
        assert code == EXIT_OK
        assert "condition ii: HOLDS" in text

    def test_minimal(self):
        code, text = run("check", NETS / "star_leaf.toml", "--minimal", 2)
        assert "  {1, 2}" in text.splitlines()
        assert "  {0}" not in text.splitlines()

    def test_disorder_keeps_verdict(self):
        code, _ = run("check", NETS / "path5_end.toml", "--disorder", 3)
        assert code == EXIT_OK

    def test_dot(self, tmp_path):
        dot = tmp_path / "g.dot"
        run("check", NETS / "path3_middle.toml", "--dot", dot)
        assert dot.read_text().startswith("graph")

    def test_parse_error_reports_line(self, tmp_path, capsys):
        bad = tmp_path / "bad.toml"
        bad.write_text('n = 3\nmodel = "XX"\ncontrol = [0]\nedges = [[0, 1, 1.0], [1, 7, 1.0]]\n')
        code, _ = run("check", bad)
        assert code == EXIT_ERROR
        assert f"{bad}:4:" in capsys.readouterr().err

    def test_missing_file(self, tmp_path, capsys):
        code, _ = run("check", tmp_path / "nope.toml")
        assert code == EXIT_ERROR
        assert "error:" in capsys.readouterr().err


class TestChannel:
    def test_one_step_damping(self):
        code, text = run("channel", NETS / "pair.toml", "--time", np.pi / 2)
        assert code == EXIT_OK
        assert value(text, "mixing") == "yes"
        assert value(text, "kappa") == "0.0000000"
        assert value(text, "purity") == "1.0000000"
        assert value(text, "overlap <E|rho*|E>") == "1.0000000"

    def test_quarter_swap(self):
        _, text = run("channel", NETS / "pair.toml", "--time", np.pi / 4)
        assert value(text, "kappa") == "0.7071068"
        moduli = [float(x) for x in value(text, "eigenvalue moduli").split()]
        assert moduli == sorted(moduli, reverse=True)

    def test_identity(self):
        code, text = run("channel", NETS / "pair.toml", "--time", 0)
        assert code == EXIT_NEGATIVE
        assert value(text, "mixing") == "no"

    def test_prime(self):
        _, plain = run("channel", NETS / "path3_end.toml")
        _, primed = run("channel", NETS / "path3_end.toml", "--prime")
        # the reversed channel of a real XX network has the same spectrum
        assert value(plain, "kappa") == value(primed, "kappa")
        assert "prime=True" in primed.splitlines()[0]


class TestTransfer:
    @pytest.mark.parametrize("cmd, tag", [("download", "F_d"), ("upload", "F_up")])
    def test_perfect_transfer(self, cmd, tag):
        code, text = run(cmd, NETS / "pair.toml", "--time", np.pi / 2, "--steps", 1, "--state", "basis:1")
        assert code == EXIT_OK
        assert value(text, tag) == "1.0000000"
        assert value(text, "bound") == "1.0000000"
        assert value(text, "eta") == "1.0000000"

    def test_path3_bound_and_csv(self, tmp_path):
        out = tmp_path / "conv.csv"
        code, text = run("download", NETS / "path3_end.toml", "--time", 1, "--steps", 14,
                         "--state", "random:7", "--csv", out)
        assert code == EXIT_OK
        assert float(value(text, "F_d")) >= float(value(text, "bound"))
        lines = out.read_text().splitlines()
        assert lines[0].startswith("# manifest:") and "seed=7" in lines[0]
        rows = list(csv.reader(lines[1:]))
        assert rows[0] == CONVERGENCE_HEADER
        assert [int(r[0]) for r in rows[1:]] == list(range(1, 15))

    def test_budget_suggests_steps(self, capsys):
        code, _ = run("download", NETS / "star_two_leaves.toml", "--steps", 12)
        assert code == EXIT_ERROR
        assert "--steps 8" in capsys.readouterr().err

    @pytest.mark.parametrize("state", ["basis:99", "random:x", "ket:1"])
    def test_bad_state(self, state):
        code, _ = run("download", NETS / "pair.toml", "--state", state)
        assert code == EXIT_ERROR


class TestConverge:
    def test_path3_fit(self, tmp_path):
        out = tmp_path / "traj.csv"
        code, text = run("converge", NETS / "path3_end.toml", "--time", 1, "--max-steps", 30, "--csv", out)
        assert code == EXIT_OK
        assert float(value(text, "relative difference")) <= 0.05
        lines = out.read_text().splitlines()
        assert lines[1] == "L,distance"
        assert len(lines) == 2 + 31

    def test_one_step_damping_skips_fit(self):
        code, text = run("converge", NETS / "pair.toml", "--time", np.pi / 2)
        assert code == EXIT_OK
        assert "fit skipped" in text

    def test_not_mixing(self):
        code, text = run("converge", NETS / "pair.toml", "--time", 0)
        assert code == EXIT_NEGATIVE
        assert "not mixing" in text
        assert "eigenvalue moduli" in text


def test_reports_are_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    _, first = run("download", NETS / "path3_end.toml", "--steps", 6, "--state", "random:11", "--csv", a)
    _, second = run("download", NETS / "path3_end.toml", "--steps", 6, "--state", "random:11", "--csv", b)
    assert first.replace(str(a), "") == second.replace(str(b), "")
    assert a.read_bytes().replace(str(a).encode(), b"") == b.read_bytes().replace(str(b).encode(), b"")
