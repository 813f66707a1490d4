import io
import subprocess
import sys

import pytest

from wachlab.cli import main
from wachlab.filtered import standard_block, twist
from wachlab.formats import parse_filmod, parse_wach, serialize_filmod
from wachlab.report import EXIT_INPUT

D2_VARIANT = ("filmod v1 p=3 dim=2\nphi:\n1 0\n0 3\nN:\n0 1\n0 0\nfil:\n"
              "level=0 span=1,0;0,1\nlevel=2 span=0,1\n")


def run(argv, stdin_text=None, monkeypatch=None):
    out, err = io.StringIO(), io.StringIO()
    if stdin_text is not None:
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin_text))
    code = main(argv, out, err)
    return code, out.getvalue(), err.getvalue()


def test_build_then_check(monkeypatch):
    code, text, _ = run(["fpn-build", "--block", "2,0"])
    assert code == 0
    code, rep, _ = run(["fpn-check"], text, monkeypatch)
    assert code == 0
    assert "t_H" in rep and "Admissible" in rep and "naive" in rep
    code, mrep, _ = run(["fpn-check", "--format", "machine"], text, monkeypatch)
    lines = dict((l.split()[0], l) for l in mrep.splitlines())
    assert "value=1" in lines["item=t_H"] and "value=1" in lines["item=t_N"]
    assert "status=pass" in lines["item=overall"]


def test_wach_verify_pipeline(tmp_path, monkeypatch):
    target = tmp_path / "block.filmod"
    target.write_text(serialize_filmod(twist(standard_block(2, 0), -1)))
    code, wtext, _ = run(["wach-build", "--block", "2,1"])
    assert code == 0 and parse_wach(wtext).rank == 2
    code, rep, _ = run(["wach-verify", "--against", str(target)], wtext, monkeypatch)
    assert code == 0, rep


def test_wach_verify_mismatch_fails(tmp_path, monkeypatch):
    target = tmp_path / "block.filmod"
    target.write_text(serialize_filmod(standard_block(2, 0)))
    _, wtext, _ = run(["wach-build", "--block", "2,1"])
    code, rep, _ = run(["wach-verify", "--against", str(target)], wtext, monkeypatch)
    assert code == 1


def test_non_griffiths_variant_fails_with_witness(monkeypatch):
    code, rep, _ = run(["fpn-check", "--format", "machine"], D2_VARIANT, monkeypatch)
    assert code == 1
    griff = next(l for l in rep.splitlines() if l.startswith("item=griffiths"))
    assert "status=fail" in griff and "Fil^1=<0,1>" in griff


def test_input_errors_exit_3(monkeypatch, tmp_path):
    assert run(["fpn-check"], "garbage\n", monkeypatch)[0] == EXIT_INPUT == 3
    assert run(["no-such-verb"])[0] == 3
    assert run([])[0] == 3
    assert run(["fpn-build", "--block", "x,y"])[0] == 3
    assert run(["fpn-check", str(tmp_path / "missing")])[0] == 3
    bad = D2_VARIANT.replace("N:\n0 1\n0 0", "N:\n1 0\n0 0")
    code, _, err = run(["fpn-check"], bad, monkeypatch)
    assert code == 3 and "N-nilpotent" in err


def test_undecided_exit_2(monkeypatch):
    # phi with a repeated eigenvalue and a nonscalar block: sampled tier
    text = ("filmod v1 p=3 dim=3\nphi:\n3 0 0\n0 3 0\n0 0 1\nN:\n0 0 0\n0 0 0\n0 0 0\nfil:\n"
            "level=0 span=1,0,0;0,1,0;0,0,1\nlevel=1 span=1,0,0;0,1,0\n")
    code, rep, _ = run(["fpn-check"], text, monkeypatch)
    assert code == 2 and "VerifiedOnEnumerated" in rep


def test_monodromy_and_check(monkeypatch):
    _, wtext, _ = run(["wach-build", "--block", "2,1"])
    code, rep, _ = run(["wach-monodromy", "--format", "machine"], wtext, monkeypatch)
    assert code == 0 and "value=[0,1;0,0]" in rep
    code, rep, _ = run(["wach-check"], wtext, monkeypatch)
    assert code == 0
    code, ftext, _ = run(["wach-reduce"], wtext, monkeypatch)
    assert code == 0 and parse_filmod(ftext) == twist(standard_block(2, 0), -1)


def test_transformers(monkeypatch, tmp_path):
    _, b, _ = run(["fpn-build", "--block", "2,0"])
    f = tmp_path / "b.filmod"
    f.write_text(b)
    code, t, _ = run(["fpn-tensor", str(f), str(f)])
    assert code == 0 and parse_filmod(t).dim == 4
    code, s, _ = run(["fpn-sym", "--n", "2", str(f)])
    assert code == 0 and parse_filmod(s).dim == 3
    code, tw, _ = run(["fpn-twist", "--j", "-1", str(f)])
    assert parse_filmod(tw) == twist(standard_block(2, 0), -1)
    code, h, _ = run(["fpn-hat"], D2_VARIANT, monkeypatch)
    assert code == 0 and parse_filmod(h).t_H() == 1
    code, rep, _ = run(["fpn-decompose", "--format", "machine", str(f)])
    assert code == 0 and "item=V_2(0)" in rep


def test_envelope_command():
    code, rep, _ = run(["wach-envelope", "--ambient", "2,1", "--n", "1", "--format", "machine"])
    assert code == 0
    assert "item=rank status=info value=2" in rep


def test_precision_env(monkeypatch):
    monkeypatch.setenv("WACHLAB_PREC", "5,9")
    _, wtext, _ = run(["wach-build", "--block", "1,0"])
    assert wtext.startswith("wach v1 p=3 Np=5 Mx=9")
    _, wtext, _ = run(["wach-build", "--block", "1,0", "--prec", "6,10"])
    assert wtext.startswith("wach v1 p=3 Np=6 Mx=10")
    monkeypatch.setenv("WACHLAB_PREC", "bad")
    assert run(["wach-build", "--block", "1,0"])[0] == 3


def test_deterministic_output(monkeypatch):
    reps = [run(["fpn-check", "--format", "machine"], D2_VARIANT, monkeypatch)[1] for _ in range(2)]
    assert reps[0] == reps[1]


def test_shell_pipeline():
    build = subprocess.run([sys.executable, "-m", "wachlab", "fpn-build", "--block", "2,0"],
                           capture_output=True, text=True, check=True)
    check = subprocess.run([sys.executable, "-m", "wachlab", "fpn-check"], input=build.stdout,
                           capture_output=True, text=True)
    assert check.returncode == 0
