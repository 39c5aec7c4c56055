import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cvent.errors import ValidationError
from cvent.state import (
    CorrelationMatrix,
    ScenarioConfig,
    SqueezerSpec,
    VACUUM_PAIR,
    VariancePair,
    apply_loss,
    build_scenario,
    db_to_variance,
    mix_on_beamsplitter,
    quadrature_cov,
    rotate_quadrature,
    squeezer_output,
)

import oracle

V7 = 10 ** -0.7
A7 = 2.605699283884805  # (V0 + 1/V0)/2 at -7 dB
C7 = -2.406173052387917  # (V0 - 1/V0)/2
MIN7 = VariancePair(V7, 1 / V7)

transmission = st.floats(0.0, 1.0)
squeeze_db = st.floats(-15.0, 0.0)


def symmetric7(**kw):
    s = SqueezerSpec.from_db(-7.0)
    return ScenarioConfig(s, s, kw.pop("t", 0.5), **kw)


@pytest.mark.parametrize("db, expected", [(0.0, 1.0), (-7.0, 0.199526), (5.3, 3.38844)])
def test_db_to_variance(db, expected):
    assert db_to_variance(db) == pytest.approx(expected, abs=5e-6)


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_db_to_variance_rejects_nonfinite(bad):
    with pytest.raises(ValidationError):
        db_to_variance(bad)


def test_squeezer_output_examples():
    assert squeezer_output(SqueezerSpec(1.0, 0.3)) == VariancePair(1.0, 1.0)
    out = squeezer_output(SqueezerSpec(0.203955, 0.611949))
    assert out.plus == pytest.approx(0.512861058295, abs=1e-12)
    assert out.minus == pytest.approx(3.388462855556, abs=1e-9)
    # measured 2.9 dB / 5.3 dB to 4 decimals
    assert out.plus == pytest.approx(10 ** -0.29, abs=1e-4)
    assert out.minus == pytest.approx(10 ** 0.53, abs=1e-4)
    out = squeezer_output(SqueezerSpec(0.199526, 1.0))
    assert (out.plus, out.minus) == pytest.approx((0.199526, 5.011878), abs=1e-5)


def test_squeezer_spec_validation():
    with pytest.raises(ValidationError):
        SqueezerSpec(0.0, 1.0)
    with pytest.raises(ValidationError):
        SqueezerSpec(0.5, 1.2)
    with pytest.raises(ValidationError):
        VariancePair(-1.0, 1.0)


def test_apply_loss_examples():
    ident = CorrelationMatrix.identity()
    for mode in "xy":
        assert apply_loss(ident, mode, 0.4) == ident
    cm = CorrelationMatrix(np.diag([0.203955, 1 / 0.203955, 1.0, 1.0]))
    out = apply_loss(cm, "x", 0.611949)
    assert out[0, 0] == pytest.approx(0.611949 * 0.203955 + 1 - 0.611949, abs=1e-15)
    assert out[0, 0] == pytest.approx(0.512861, abs=1e-6)
    full = build_scenario(symmetric7())
    assert apply_loss(full, "y", 1.0) == full


@pytest.mark.parametrize("eta", [-0.1, 1.1, math.nan])
def test_apply_loss_rejects_bad_eta(eta):
    with pytest.raises(ValidationError):
        apply_loss(CorrelationMatrix.identity(), "x", eta)


def test_apply_loss_zero_transmission_disconnects():
    cm = apply_loss(build_scenario(symmetric7()), "y", 0.0)
    assert np.array_equal(cm.block("y"), np.eye(2))
    assert np.all(cm[0:2, 2:4] == 0.0)
    assert np.allclose(cm.block("x"), np.diag([A7, A7]))


@given(st.floats(-12, 3), st.floats(-12, 3), transmission, transmission, st.sampled_from("xy"))
@settings(max_examples=60, deadline=None)
def test_apply_loss_matches_environment_mode_oracle(db1, db2, t, eta, mode):
    v1 = squeezer_output(SqueezerSpec.from_db(db1))
    v2 = squeezer_output(SqueezerSpec.from_db(db2))
    cm = mix_on_beamsplitter(v1, v2, t)
    got = apply_loss(cm, mode, eta).entries
    want = oracle.lossy_cm(cm.entries, mode, eta)
    assert np.allclose(got, want, rtol=0, atol=1e-12)


def test_mix_examples():
    assert mix_on_beamsplitter(VACUUM_PAIR, VACUUM_PAIR, 0.37) == CorrelationMatrix.identity()
    cm = mix_on_beamsplitter(VariancePair(0.512861, 3.388440), VACUUM_PAIR, 0.78)
    assert cm[0, 0] == pytest.approx(0.89282942, abs=1e-12)
    assert cm[2, 2] == pytest.approx(0.62003158, abs=1e-12)
    cm = mix_on_beamsplitter(MIN7, MIN7, 0.5)
    assert cm[0, 0] == pytest.approx(A7, abs=1e-12)
    assert cm[2, 2] == pytest.approx(A7, abs=1e-12)
    assert cm[0, 2] == pytest.approx(C7, abs=1e-12)


@pytest.mark.parametrize("t", [-0.01, 1.01])
def test_mix_rejects_bad_t(t):
    with pytest.raises(ValidationError):
        mix_on_beamsplitter(VACUUM_PAIR, VACUUM_PAIR, t)


@given(st.floats(0.05, 20), st.floats(0.05, 20), st.floats(0.05, 20), st.floats(0.05, 20), transmission)
@settings(max_examples=80, deadline=None)
def test_mix_matches_beamsplitter_matrix_oracle(p1, m1, p2, m2, t):
    got = mix_on_beamsplitter(VariancePair(p1, m1), VariancePair(p2, m2), t).entries
    want = oracle.mixed_cm((p1, m1), (p2, m2), t)
    assert np.allclose(got, want, rtol=1e-13, atol=1e-13)


def test_mix_with_vacuum_reproduces_output_variance_law_exactly():
    for t in np.linspace(0, 1, 41):
        for vp, vm in [(0.2, 5.0), (0.512861, 3.38844), (0.9, 1.3), (1.0, 1.0), (3.0, 0.4)]:
            cm = mix_on_beamsplitter(VariancePair(vp, vm), VACUUM_PAIR, t)
            for k, v in enumerate((vp, vm)):
                assert abs(cm[k, k] - (v * (1 - t) + t)) <= 1e-14
                assert abs(cm[2 + k, 2 + k] - (v * t + (1 - t))) <= 1e-14


@given(st.floats(0.05, 20), st.floats(0.05, 20), st.floats(0.05, 20), st.floats(0.05, 20), transmission)
@settings(max_examples=60, deadline=None)
def test_beamsplitter_is_passive(p1, m1, p2, m2, t):
    cm = mix_on_beamsplitter(VariancePair(p1, m1), VariancePair(p2, m2), t)
    assert cm[0, 0] + cm[2, 2] == pytest.approx(p1 + m2, rel=1e-13)
    assert cm[1, 1] + cm[3, 3] == pytest.approx(m1 + p2, rel=1e-13)


def test_build_scenario_examples():
    cm = build_scenario(symmetric7())
    assert np.allclose(np.diag(cm.entries), A7, atol=1e-12)
    assert cm[0, 2] == pytest.approx(C7, abs=1e-12)
    assert cm[1, 3] == pytest.approx(-C7, abs=1e-12)
    cm = build_scenario(symmetric7(eta_y=0.5))
    assert cm[2, 2] == pytest.approx(1.802849641942403, abs=1e-12)
    assert cm[0, 2] == pytest.approx(C7 * math.sqrt(0.5), abs=1e-12)
    assert cm[0, 2] == pytest.approx(-1.7014213, abs=1e-7)
    vac = ScenarioConfig(None, None, 0.5, 0.3, 0.3)
    assert build_scenario(vac) == CorrelationMatrix.identity()


scenarios = st.builds(
    lambda db1, e1, db2, e2, vac2, t, ex, ey: ScenarioConfig(
        SqueezerSpec.from_db(db1, e1), None if vac2 else SqueezerSpec.from_db(db2, e2), t, ex, ey
    ),
    squeeze_db, transmission, squeeze_db, transmission, st.booleans(), transmission, transmission, transmission,
)


@given(scenarios)
@settings(max_examples=150, deadline=None)
def test_build_scenario_is_valid_state(cfg):
    m = build_scenario(cfg).entries
    assert np.array_equal(m, m.T)
    assert np.linalg.eigvalsh(m)[0] >= -1e-12
    assert m[0, 1] == m[0, 3] == m[1, 2] == m[2, 3] == 0.0


@given(scenarios)
@settings(max_examples=80, deadline=None)
def test_build_scenario_matches_oracle(cfg):
    want = oracle.scenario_cm(
        cfg.input1.v0_plus, cfg.input1.eta,
        None if cfg.input2 is None else cfg.input2.v0_plus,
        None if cfg.input2 is None else cfg.input2.eta,
        cfg.t, cfg.eta_x, cfg.eta_y,
    )
    assert np.allclose(build_scenario(cfg).entries, want, rtol=1e-12, atol=1e-12)


@given(squeeze_db, squeeze_db, st.booleans(), transmission)
@settings(max_examples=100, deadline=None)
def test_lossless_minimum_uncertainty_axis_duality(db1, db2, vac2, t):
    cfg = ScenarioConfig(SqueezerSpec.from_db(db1), None if vac2 else SqueezerSpec.from_db(db2), t)
    cm = build_scenario(cfg)
    sp = np.sqrt(np.linalg.eigvalsh(quadrature_cov(cm, "+")))
    sm = np.sqrt(np.linalg.eigvalsh(quadrature_cov(cm, "-")))
    assert sp[0] * sm[1] == pytest.approx(1.0, abs=1e-9)
    assert sp[1] * sm[0] == pytest.approx(1.0, abs=1e-9)


def test_rotation_examples():
    cm = build_scenario(symmetric7(eta_y=0.7))
    assert rotate_quadrature(cm, 0.0) == cm
    ident = CorrelationMatrix.identity()
    for theta in (0.3, 1.0, 2.5):
        assert np.allclose(rotate_quadrature(ident, theta).entries, np.eye(4), atol=1e-15)
    sym = build_scenario(symmetric7())
    rot = rotate_quadrature(sym, math.pi / 2)
    assert rot[0, 2] == pytest.approx(-C7, abs=1e-12)
    assert rot[1, 3] == pytest.approx(C7, abs=1e-12)


@given(scenarios, st.floats(-7, 7))
@settings(max_examples=60, deadline=None)
def test_rotation_has_period_pi(cfg, theta):
    cm = build_scenario(cfg)
    a = rotate_quadrature(cm, theta).entries
    b = rotate_quadrature(cm, theta + math.pi).entries
    assert np.allclose(a, b, rtol=1e-12, atol=1e-12)


def test_rotation_quadrature_formula():
    # X_theta = cos X+ + sin X-: variance of X_x^theta from the unrotated matrix
    cm = build_scenario(symmetric7(eta_x=0.6))
    theta = 0.4
    u = np.array([math.cos(theta), math.sin(theta), 0, 0])
    assert rotate_quadrature(cm, theta)[0, 0] == pytest.approx(u @ cm.entries @ u, rel=1e-13)


def test_correlation_matrix_validation():
    with pytest.raises(ValidationError):
        CorrelationMatrix(np.eye(3))
    bad = np.eye(4)
    bad[0, 2] = 0.5
    with pytest.raises(ValidationError):
        CorrelationMatrix(bad)
    with pytest.raises(ValidationError):
        CorrelationMatrix(np.diag([1.0, 1.0, 1.0, -1.0]))
    nonpsd = np.eye(4)
    nonpsd[0, 2] = nonpsd[2, 0] = 2.0
    with pytest.raises(ValidationError):
        CorrelationMatrix(nonpsd)


def test_correlation_matrix_is_immutable():
    cm = CorrelationMatrix.identity()
    with pytest.raises(ValueError):
        cm.entries[0, 0] = 2.0


def test_scenario_config_validation():
    with pytest.raises(ValidationError) as exc:
        ScenarioConfig(None, None, 1.2)
    assert exc.value.key == "t"
    with pytest.raises(ValidationError):
        ScenarioConfig(None, None, 0.5, eta_y=-0.2)
