import json

import numpy as np
import pytest

from robinspec.errors import InsufficientPoints, IoFailure
from robinspec.harness import (
    ConvergenceReport,
    SweepSpec,
    fit_exponent,
    fit_power_ladder,
    local_exponents,
    report_emit,
    verify,
)

H = np.array([1 / 100, 1 / 200, 1 / 400, 1 / 800, 1 / 1600, 1 / 3200])
SYNTH = -H - 2 * H**1.5 + 3 * H**1.75


def test_ladder_recovery_on_synthetic_data():
    p, c = fit_power_ladder(H, SYNTH, [0.9, 1.4, 1.9])
    assert np.allclose(p, [1.0, 1.5, 1.75], atol=1e-6)
    assert np.allclose(c, [-1.0, -2.0, 3.0], atol=1e-5)


def test_peeled_remainder_exponent():
    fit = fit_exponent(H, SYNTH + H + 2 * H**1.5)
    assert fit.exponent == pytest.approx(1.75, abs=1e-12)
    assert fit.coefficient == pytest.approx(3.0, rel=1e-10)
    # without peeling, the leading exponent is only approximate
    assert fit_exponent(H, SYNTH).exponent == pytest.approx(1.0, abs=0.05)


def test_outlier_at_largest_h_is_dropped():
    r = 3 * H**1.75 * (1 + 1e-4 * np.random.default_rng(0).standard_normal(H.size))
    r[0] *= 5
    fit = fit_exponent(H, r)
    assert fit.dropped == (H[0],)
    assert fit.exponent == pytest.approx(1.75, abs=1e-3)
    assert fit.ci95[0] < fit.exponent < fit.ci95[1]


def test_insufficient_points():
    with pytest.raises(InsufficientPoints):
        fit_exponent(H[:3], SYNTH[:3])
    with pytest.raises(InsufficientPoints):
        fit_power_ladder(H[:5], SYNTH[:5], [1, 1.5, 1.75])


def test_local_exponents_exact_power():
    loc = local_exponents(H, 2 * H**1.25)
    assert len(loc) == H.size - 1
    assert all(abs(e - 1.25) < 1e-12 for _, _, e in loc)


def test_spec_validation():
    with pytest.raises(ValueError):
        SweepSpec({"shape": "ellipse"}, [0.01, 0.02, 0.015])
    with pytest.raises(ValueError):
        SweepSpec({"shape": "ellipse"}, [-0.01])
    with pytest.raises(ValueError):
        SweepSpec.from_gamma({"shape": "ellipse"}, [10.0])
    s = SweepSpec.from_gamma({"shape": "ellipse"}, [-10.0, -20.0])
    assert np.allclose(s.h_grid, [0.01, 0.0025])


def test_empty_report_round_trip(tmp_path):
    rep = verify(SweepSpec({"shape": "ellipse"}, []))
    assert rep.records == [] and rep.passed
    assert rep.to_csv().strip() == "h,gamma,n,method,value,error"
    assert ConvergenceReport.from_json(rep.to_json()) == rep


@pytest.fixture(scope="module")
def small_report():
    spec = SweepSpec({"shape": "ellipse", "a": 2, "b": 1}, [1 / 100, 1 / 200, 1 / 400, 1 / 800],
                     methods=["2d", "boundary"], grid=(128, 32), extrapolate=False)
    return spec, verify(spec)


def test_verify_report_contents(small_report):
    spec, rep = small_report
    assert len(rep.records) == 4 * 2 * 2
    assert {r["method"] for r in rep.records} == {"2d", "boundary"}
    assert all(r["error"] is None for r in rep.records)
    names = {c["name"] for c in rep.checks}
    assert "2d: remainder exponent" in names and "2d: gap" in names
    assert rep.fits["expansion"]["k2"] == pytest.approx(18.0, rel=1e-9)
    assert rep.env["seed"] == 0


def test_verify_is_deterministic(small_report):
    spec, rep = small_report
    assert verify(spec).to_json() == rep.to_json()


def test_emit_round_trips(small_report, tmp_path):
    _, rep = small_report
    out = report_emit(rep, tmp_path / "r.json")
    assert ConvergenceReport.from_json(out[0].read_text()) == rep
    csv_path, side = report_emit(rep, tmp_path / "r.csv", "csv")
    rows = ConvergenceReport.records_from_csv(csv_path.read_text())
    assert rows == rep.records
    assert json.loads(side.read_text())["checks"] == rep.checks
    with pytest.raises(IoFailure):
        report_emit(rep, tmp_path / "missing" / "r.json")


def test_failed_grid_points_are_annotated(monkeypatch):
    import robinspec.harness as hm
    from robinspec.errors import NotConverged

    real = hm._solve_point

    def flaky(job):
        if job[2] == 0.01:
            raise NotConverged("synthetic failure")
        return real(job)

    monkeypatch.setattr(hm, "_solve_point", flaky)
    spec = SweepSpec({"shape": "ellipse"}, [0.01, 0.005, 0.0025, 0.00125, 0.000625],
                     grid=(64, 16), extrapolate=False)
    rep = verify(spec)
    bad = [r for r in rep.records if r["error"]]
    assert len(bad) == 2 and all("synthetic failure" in r["error"] for r in bad)
    assert all(r["value"] is None for r in bad)
    assert rep.fits["2d"]["7/4"]["n_points"] == 4
    with pytest.raises(ValueError):
        SweepSpec({"shape": "ellipse"}, [0.01], window_fraction=0.7)
