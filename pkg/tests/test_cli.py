import json
import subprocess
import sys

import pytest

from embsplit.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_list_methods(capsys):
    code, out, _ = run(capsys, "list-methods")
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 9
    prk = next(line for line in lines if line.startswith("PRK6-4(3)"))
    assert prk.split()[-2:] == ["13", "7"]
    ss5 = next(line for line in lines if line.startswith("SS5-4(3)"))
    assert ss5.split()[-1] == "10"
    _, out_aba, _ = run(capsys, "list-methods", "--strang", "ABA")
    assert next(line for line in out_aba.splitlines() if line.startswith("SS5-4(3)")).split()[-1] == "5"


def test_verify(capsys):
    code, out, _ = run(capsys, "verify", "SS17-8(5)(3)")
    assert code == 0
    assert "main order 8" in out
    assert "estimator order 5" in out and "estimator order 3" in out


def test_unknown_method(capsys):
    code, _, err = run(capsys, "verify", "SS99")
    assert code == 2
    assert "unknown method" in err


def test_export_and_derive(tmp_path, capsys):
    path = tmp_path / "ss5.json"
    assert run(capsys, "export", "SS5-4(3)", "--out", str(path))[0] == 0
    code, out, _ = run(capsys, "derive", str(path), "--order", "3", "--json")
    assert code == 0
    weights = json.loads(out.strip().splitlines()[-1])["weights"]
    assert weights[1] == pytest.approx(-1.40482876783862, abs=1e-9)
    assert "verified estimator order: 3" in out


def test_derive_with_command_line_constraints(tmp_path, capsys):
    path = tmp_path / "ss5.json"
    run(capsys, "export", "SS5-4(3)", "--out", str(path))
    code, out, _ = run(
        capsys, "derive", str(path), "--order", "3", "--ignore-file-constraints",
        "--sym", "1:4", "--sym", "2:3", "--pin", "0=-1", "--json",
    )
    assert code == 0
    w = json.loads(out.strip().splitlines()[-1])["weights"]
    assert w[0] == -1.0 and w[1] == pytest.approx(w[4])


def test_derive_infeasible(tmp_path, capsys):
    path = tmp_path / "ss5.json"
    run(capsys, "export", "SS5-4(3)", "--out", str(path))
    code, _, err = run(capsys, "derive", str(path), "--order", "4")
    assert code == 2
    assert "infeasible" in err


def test_bad_pin_syntax(tmp_path, capsys):
    with pytest.raises(SystemExit):
        main(["derive", "x.json", "--order", "3", "--pin", "three"])
    with pytest.raises(SystemExit):
        main(["derive", "x.json", "--order", "3", "--sym", "1:2:5"])


def test_scan_and_order_fit(tmp_path, capsys):
    out = tmp_path / "scan.csv"
    code, _, err = run(
        capsys, "scan", "--methods", "SS5-4(3)", "--e", "0.2", "--nmin", "50", "--nmax", "800", "--out", str(out)
    )
    assert code == 0 and "0 failed" in err
    header = out.read_text(encoding="utf-8").splitlines()[0]
    assert header == "method,e,h,nsteps,fevals,E1_full,E1_pos,E2,E2_low,energy_drift"
    code, fit, _ = run(capsys, "order-fit", str(out))
    assert code == 0
    slope = float(fit.split("slope")[1].split()[0])
    assert slope == pytest.approx(4.0, abs=0.3)


def test_scan_explicit_h(capsys):
    code, out, _ = run(capsys, "scan", "--methods", "SS5-4(3)", "--e", "0.2", "--h", "0.5", "--tend", "2")
    assert code == 0
    assert "fevals=40" in out


def test_adaptive(capsys):
    code, out, _ = run(capsys, "adaptive", "--method", "SS11-6(5)", "--tol", "1e-6", "--tend", "5")
    assert code == 0
    assert out.splitlines()[1].split()[-1] == "ok"


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "embsplit", "list-methods"], capture_output=True, text=True, check=True
    )
    assert "SS11-6(5)" in res.stdout
