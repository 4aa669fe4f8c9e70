import math

import numpy as np
import pytest

from ghzpulse.design import (
    PulseSpec,
    amplitude_scan,
    eta_sweep,
    evaluate,
    evaluate_many,
    lemniscate_scan_2d,
    loglog_slope,
    n_sweep,
    optimize_amplitude,
)


@pytest.fixture(scope="module")
def rect_scan():
    return amplitude_scan(8, 0.03, 1, grid=np.linspace(-0.01, 0.02, 13))


def test_scan_shapes_and_optimum(rect_scan):
    assert rect_scan.infidelity.shape == (13,)
    assert not rect_scan.errors
    grid_best = float(np.nanmin(rect_scan.infidelity))
    assert rect_scan.optimum["infidelity"] <= grid_best


def test_analytic_cross_inside_bracket(rect_scan):
    grid = rect_scan.axes["delta_omega_rel"]
    i = int(np.argmin(rect_scan.infidelity))
    assert grid[max(i - 1, 0)] <= rect_scan.analytic["delta_omega_rel"] <= grid[min(i + 1, len(grid) - 1)]


def test_quadratic_growth_away_from_optimum(rect_scan):
    x = rect_scan.axes["delta_omega_rel"]
    y = rect_scan.infidelity
    x0 = rect_scan.optimum["delta_omega_rel"]
    far = np.abs(x - x0) > 0.004
    coef = np.polyfit(x[far] - x0, y[far], 2)
    fit = np.polyval(coef, x[far] - x0)
    assert np.max(np.abs(fit - y[far]) / y[far]) < 0.05
    assert coef[0] > 0


def test_scans_are_deterministic():
    grid = np.linspace(-0.005, 0.01, 4)
    a = amplitude_scan(4, 0.03, 1, grid=grid, refine=False)
    b = amplitude_scan(4, 0.03, 1, grid=grid, refine=False)
    assert np.array_equal(a.infidelity, b.infidelity)


def test_parallel_matches_serial():
    specs = [PulseSpec("rectangular", 0.03, shift=s) for s in (0.0, 0.001, 0.002)]
    serial = evaluate_many(specs, 6, workers=1)
    parallel = evaluate_many(specs, 6, workers=2)
    assert [e.infidelity for e in serial] == [e.infidelity for e in parallel]


def test_evaluation_errors_are_recorded():
    ev = evaluate(PulseSpec("lemniscate", 0.03, da=-0.3), 4)
    assert math.isnan(ev.infidelity) and "NonFigureEight" in ev.error


def test_amplitude_scan_rejects_lemniscate():
    with pytest.raises(ValueError):
        amplitude_scan(4, 0.03, family="lemniscate")
    with pytest.raises(ValueError):
        amplitude_scan(4, 0.03, grid=[])


def test_optimize_amplitude_matches_prediction_small_n():
    x, best, _ = optimize_amplitude(4, 0.02, 1)
    from ghzpulse.design import _rect_prediction

    ref = _rect_prediction(4, 0.02, 1, "rectangular")
    assert x == pytest.approx(ref["delta_omega_rel"], abs=5e-5)
    assert best.infidelity == pytest.approx(ref["infidelity"], rel=0.05)


@pytest.fixture(scope="module")
def lem_scan():
    return lemniscate_scan_2d(8, 0.03, np.linspace(-0.005, 0.01, 4), np.linspace(0.0, 0.015, 4))


def test_lemniscate_scan(lem_scan):
    assert lem_scan.infidelity.shape == (4, 4)
    assert lem_scan.optimum["infidelity"] <= np.nanmin(lem_scan.infidelity)
    assert len(lem_scan.valley) >= 4


def test_unshifted_design_point_is_worse(lem_scan):
    base = evaluate(PulseSpec("echoed_lemniscate", 0.03), 8)
    assert math.isfinite(base.infidelity)
    assert base.infidelity > lem_scan.optimum["infidelity"]


def test_lemniscate_scan_guards():
    with pytest.raises(ValueError):
        lemniscate_scan_2d(4, 0.03, [-0.3], [0.0])
    with pytest.raises(ValueError):
        lemniscate_scan_2d(4, 0.03, [], [0.0])


def test_small_sweeps():
    res = eta_sweep(4, [0.02, 0.04], [("echoed_rectangular", 1)])
    assert len(res["rows"]) == 2 and all(not r["error"] for r in res["rows"])
    assert 2.5 < res["slopes"]["echoed_rectangular_k1"] < 5.0
    rows = n_sweep(0.03, [2, 4], ["lemniscate", ("rectangular", 1)])["rows"]
    labels = {r["family"] for r in rows}
    assert labels == {"lemniscate", "rectangular_k1"}


def test_loglog_slope_ignores_bad_points():
    x = [1.0, 2.0, 4.0, 8.0]
    assert loglog_slope(x, [1.0, 16.0, float("nan"), 4096.0]) == pytest.approx(4.0)
