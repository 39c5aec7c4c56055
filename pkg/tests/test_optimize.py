import math
import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cvent import criteria
from cvent.errors import (
    BracketError,
    InconsistentMeasurementError,
    UnphysicalSourceError,
    ValidationError,
)
from cvent.optimize import (
    FIXED_T_HALF,
    OPTIMAL_T,
    SweepSpec,
    bisect_predicate,
    forward_outputs,
    golden_section_minimize,
    infer_inputs,
    minimize_epr_over_t,
    scenario_at,
    squeezer_from_measured,
    sweep,
    t_optimal,
    threshold_eta1,
)
from cvent.state import ScenarioConfig, SqueezerSpec, VariancePair, squeezer_output

MEASURED = VariancePair(10 ** -0.29, 10 ** 0.53)
MINUS7 = SqueezerSpec.from_db(-7.0)


def test_golden_section_on_parabola():
    x, fx = golden_section_minimize(lambda x: (x - 0.3) ** 2 + 1.0, 0.0, 1.0)
    assert x == pytest.approx(0.3, abs=1e-7)
    assert fx == pytest.approx(1.0, abs=1e-15)


def test_golden_section_returns_exact_endpoint():
    assert golden_section_minimize(lambda x: x, 0.0, 1.0) == (0.0, 0.0)
    assert golden_section_minimize(lambda x: -x, 0.0, 1.0) == (1.0, -1.0)


def test_bisect_predicate():
    root = bisect_predicate(lambda x: x > 0.123, 0.0, 1.0, tol=1e-10)
    assert root == pytest.approx(0.123, abs=1e-10)
    with pytest.raises(BracketError):
        bisect_predicate(lambda x: True, 0.0, 1.0)
    with pytest.raises(BracketError):
        bisect_predicate(lambda x: False, 0.0, 1.0)


def test_t_optimal_examples():
    assert t_optimal(0.611949).t == pytest.approx(0.817062, abs=1e-6)
    assert t_optimal(0.5).t == 1.0
    assert t_optimal(1.0).t == 0.5
    low = t_optimal(0.3)
    assert low.t == 1.0 and not low.interior
    for bad in (0.0, -0.1, 1.2, math.nan):
        with pytest.raises(ValidationError):
            t_optimal(bad)


def test_minimize_measured_source():
    t, eps = minimize_epr_over_t(MEASURED)
    assert t == pytest.approx(0.8170603723884133, abs=1e-7)
    assert eps == pytest.approx(0.9780841173770042, abs=1e-12)


def test_minimize_vacuum_is_flat():
    assert minimize_epr_over_t(VariancePair(1.0, 1.0)) == (0.5, 1.0)


@pytest.mark.parametrize("db", [-1.0, -3.0, -6.0, -10.0, -15.0])
@pytest.mark.parametrize("eta", np.linspace(0.52, 1.0, 10))
def test_minimizer_matches_optimal_transmission(db, eta):
    v1 = squeezer_output(SqueezerSpec.from_db(db, eta))
    t, _ = minimize_epr_over_t(v1)
    assert abs(t - t_optimal(eta).t) < 1e-6


@pytest.mark.parametrize("eta", [0.2, 0.4, 0.5])
def test_minimizer_pins_to_one_when_loss_is_high(eta):
    v1 = squeezer_output(SqueezerSpec.from_db(-7.0, eta))
    t, eps = minimize_epr_over_t(v1)
    assert t == pytest.approx(1.0, abs=1e-6)
    assert eps == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("db", [-1.0, -3.0, -5.0, -7.0, -10.0])
def test_thresholds_are_source_independent(db):
    v0 = 10 ** (db / 10)
    assert threshold_eta1(v0, FIXED_T_HALF) == pytest.approx(2 / 3, abs=1e-5)
    assert threshold_eta1(v0, OPTIMAL_T) == pytest.approx(0.5, abs=1e-5)


def test_threshold_validation():
    with pytest.raises(ValidationError):
        threshold_eta1(1.0)
    with pytest.raises(ValidationError):
        threshold_eta1(0.2, "never")


def test_infer_measured_working_point():
    res = infer_inputs(*forward_outputs(MEASURED, 0.78), 0.78)
    assert res.status == "ok"
    assert res.eta_1 == pytest.approx(0.6119498838726088, abs=1e-12)
    assert res.v0_plus == pytest.approx(0.20395668199841665, abs=1e-12)
    assert res.v0_db == pytest.approx(-6.904620618227228, abs=1e-9)
    assert res.t_opt == pytest.approx(0.8170603723884133, abs=1e-9)
    assert res.residual < 1e-15


def test_infer_from_rounded_output_variances():
    res = infer_inputs(VariancePair(0.89282942, 0.89282942), VariancePair(0.62003158, 0.62003158), 0.78)
    assert res.v1.plus == pytest.approx(0.512861, abs=1e-7)


@pytest.mark.parametrize(
    "db, eta, t",
    list(itertools.product([-1.0, -3.0, -6.0, -9.0, -12.0], [0.3, 0.5, 0.7, 0.9, 1.0], [0.1, 0.3, 0.5, 0.78, 0.95])),
)
def test_infer_round_trip(db, eta, t):
    v0 = 10 ** (db / 10)
    vx, vy = forward_outputs(squeezer_output(SqueezerSpec(v0, eta)), t)
    res = infer_inputs(vx, vy, t)
    assert abs(res.v0_plus - v0) < 1e-9
    assert abs(res.eta_1 - eta) < 1e-9


def test_infer_vacuum_is_degenerate():
    res = infer_inputs(VariancePair(1.0, 1.0), VariancePair(1.0, 1.0), 0.5)
    assert res.status == "vacuum-degenerate"
    assert res.eta_1 is None and res.v0_plus is None
    assert res.as_dict()["status"] == "vacuum-degenerate"


def test_infer_error_cases():
    with pytest.raises(ValidationError):
        infer_inputs(VariancePair(1.0, 1.0), VariancePair(1.0, 1.0), 1.0)
    # product of squeezing and antisqueezing below 1: no lossy squeezer gives this
    with pytest.raises(UnphysicalSourceError):
        infer_inputs(*forward_outputs(VariancePair(0.3, 2.0), 0.5), 0.5)
    with pytest.raises(InconsistentMeasurementError):
        infer_inputs(*forward_outputs(VariancePair(0.5, 1.5), 0.5), 0.5)


def test_squeezer_from_measured():
    s = squeezer_from_measured(MEASURED.plus, MEASURED.minus)
    assert s.eta == pytest.approx(0.6119498838726088, abs=1e-12)
    with pytest.raises(UnphysicalSourceError):
        squeezer_from_measured(1.0, 1.0)


@given(st.floats(-15, -0.1), st.floats(0.05, 1.0), st.floats(0.02, 0.98))
@settings(max_examples=100, deadline=None)
def test_infer_round_trip_property(db, eta, t):
    v0 = 10 ** (db / 10)
    v1 = squeezer_output(SqueezerSpec(v0, eta))
    res = infer_inputs(*forward_outputs(v1, t), t)
    assert res.v0_plus == pytest.approx(v0, rel=1e-7)
    assert res.eta_1 == pytest.approx(eta, rel=1e-7, abs=1e-9)


def base():
    return ScenarioConfig(MINUS7, MINUS7, 0.5)


def test_sweep_rows_in_order_and_worker_independent():
    spec = SweepSpec(base(), "eta_y", 0.0, 1.0, 101)
    one = sweep(spec)
    many = sweep(spec, workers=4)
    assert [r.value for r in one] == list(np.linspace(0, 1, 101))
    assert [r.observables for r in one] == [r.observables for r in many]


def test_sweep_values_match_direct_evaluation():
    rows = sweep(SweepSpec(base(), "eta_y", 0.0, 1.0, 3))
    assert rows[1].observables["epr_x_given_y"] == pytest.approx(1.0, abs=1e-12)
    assert rows[2].observables["epr_y_given_x"] == pytest.approx(0.14728259001091533, abs=1e-12)


def test_sweep_optimal_t_tracks_source_loss():
    spec = SweepSpec(ScenarioConfig(MINUS7, None, 0.5), "eta_1", 0.6, 1.0, 5, optimal_t=True)
    for row in sweep(spec):
        v1 = squeezer_output(SqueezerSpec(MINUS7.v0_plus, row.value))
        want = criteria.epr_biased_general(v1, 1 / (2 * row.value))
        assert row.observables["epr_x_given_y"] == pytest.approx(want, rel=1e-10)


def test_sweep_reports_failed_points_without_stopping():
    spec = SweepSpec(ScenarioConfig(MINUS7, None, 0.5), "eta_1", 0.0, 1.0, 5, optimal_t=True)
    rows = sweep(spec)
    assert rows[0].error and all(math.isnan(v) for v in rows[0].observables.values())
    assert all(r.error is None for r in rows[1:])


def test_sweep_v0_db_changes_both_squeezers():
    cfg = scenario_at(base(), "v0_plus_db", -3.0)
    assert cfg.input1.v0_plus == cfg.input2.v0_plus == pytest.approx(10 ** -0.3)


@pytest.mark.parametrize(
    "kwargs, key",
    [
        (dict(parameter="eta_y", steps=1), "steps"),
        (dict(parameter="wavelength", steps=5), "param"),
        (dict(parameter="eta_y", steps=5, stop=1.5), "stop"),
        (dict(parameter="eta_2", steps=5, base=ScenarioConfig(MINUS7, None, 0.5)), "param"),
    ],
)
def test_sweep_spec_validation(kwargs, key):
    args = dict(base=base(), start=0.0, stop=1.0)
    args.update(kwargs)
    with pytest.raises(ValidationError) as exc:
        SweepSpec(**args)
    assert exc.value.key == key
