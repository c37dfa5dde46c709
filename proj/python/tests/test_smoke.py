import math
from fractions import Fraction
from pathlib import Path

import pytest

import prescriptor as p

DATA = Path(__file__).resolve().parents[2] / "tests" / "data"


def test_closure_all_channels():
    for ch in ["I", "II", "III", "IVa", "IVb", "V"]:
        r = p.check_closure(ch)
        assert r["pass"], r
        assert r["residual"] == "1"
    with pytest.raises(p.DomainError):
        p.check_closure("VII")


def test_budget_plan_is_exact():
    r = p.budget_plan("paper-b1", "1ms")
    assert r["gamma_total"] == Fraction(1000)
    assert list(r["allowances"].values()) == [400, 200, 200, 100, 100]
    assert all(isinstance(v, Fraction) for v in r["allowances"].values())
    assert r["margin"] == 0


def test_mu2_constant_and_bootstrap():
    s = [i * 1e-4 for i in range(11)]
    value, sigma = p.mu2(s, [2e6] * 11)
    assert value == pytest.approx(4e12, rel=1e-14)
    assert sigma == 0.0
    kappa = [1e7 * (1.5 if i % 3 == 0 else 0.8) for i in range(200)]
    _, sig = p.mu2_bootstrap([i * 5e-6 for i in range(200)], kappa, 500, 7)
    assert sig > 0.0


def test_homogeneous_limit():
    cells = [(8.85e-12, 1e6, 1e-3, 1e-18, "a"), (2 * 8.85e-12, 4e6, 1e-5, 3e-18, "b")]
    ea = 8.85e-12 * 1e6 * 1e-18
    eb = 2 * 8.85e-12 * 4e6 * 3e-18
    expected = (ea * 1e-3 + eb * 1e-5) / (ea + eb)
    assert p.q_inv_dielectric(cells) == pytest.approx(expected, rel=1e-12)


def test_biot_savart_centre():
    r = 50e-6
    n = 2000
    verts = [(r * math.cos(2 * math.pi * k / n), r * math.sin(2 * math.pi * k / n), 0.0) for k in range(n)]
    bz = p.biot_savart(verts, (0.0, 0.0, 0.0))[2]
    mu0 = 1.25663706212e-6
    assert bz == pytest.approx(mu0 / (2 * r), rel=1e-3)


def test_factorization_uniform():
    assert p.factorization_error(6, 1e-7, 1.0, 2e-7, 1e21) <= 1e-12


def test_protocol_round_trip():
    design = (DATA / "protocol" / "seam_design.txt").read_text()
    column = (DATA / "protocol" / "seam_column.csv").read_text()
    with pytest.raises(p.ProtocolViolation):
        p.protocol_verdict(design, column)
    sealed = p.protocol_seal(design, "2026-03-01T09:00:00Z")
    assert p.protocol_verdict(sealed, column) == "Falsified(column)"
    match = (DATA / "protocol" / "seam_match.csv").read_text()
    assert p.protocol_verdict(sealed, match) == "Supported"


def test_mds():
    text = (DATA / "mds" / "tls_full.mds").read_text()
    assert p.mds_format(text) == (DATA / "mds" / "tls_full.mds.canonical").read_text()
    assert p.mds_validate(text)["grade"] == "quantitative"
    r = p.mds_validate((DATA / "mds" / "deficient_tphi_protocol.mds").read_text())
    assert r["grade"] == "insufficient"
    assert any(d[1] == "tphi-protocol" and d[0] == 8 for d in r["deficiencies"])
    with pytest.raises(p.DomainError):
        p.mds_format("[rho]\nmu2 = 5 m^-2 | channel=XX\n")


def test_cli_exit_codes():
    code, out, _ = p.run_cli(["units", "check", "--channel", "II"])
    assert code == 0 and "II-Spin: PASS" in out
    code, _, err = p.run_cli(["frobnicate"])
    assert code == 2 and "unknown subcommand" in err
