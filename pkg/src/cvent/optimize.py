"""Beamsplitter-ratio optimisation, EPR thresholds, sweeps and squeezer inference."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import criteria
from .errors import (
    BracketError,
    CventError,
    InconsistentMeasurementError,
    UnphysicalSourceError,
    ValidationError,
)
from .state import (
    ScenarioConfig,
    SqueezerSpec,
    VariancePair,
    build_scenario,
    db_to_variance,
    squeezer_output,
    variance_to_db,
)

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
GOLDEN_TOL = 1e-8
BISECT_TOL = 1e-6
FLAT_TOL = 1e-15

FIXED_T_HALF = "fixed_t_half"
OPTIMAL_T = "optimal_t"

PARAMETERS = ("t", "eta_1", "eta_2", "eta_x", "eta_y", "v0_plus_db")
OBSERVABLES = ("inseparability", "epr_x_given_y", "epr_y_given_x")


def golden_section_minimize(f, lo, hi, tol=GOLDEN_TOL):
    """Minimise a unimodal ``f`` on ``[lo, hi]``; returns ``(x_min, f(x_min))``.

    The bracket shrinks by the golden ratio each step until its width is
    below ``tol``. The endpoints are also compared so a minimum sitting on the
    boundary is returned exactly.
    """
    a, b = float(min(lo, hi)), float(max(lo, hi))
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    best = (x, f(x))
    for edge in (float(min(lo, hi)), float(max(lo, hi))):
        fe = f(edge)
        if fe < best[1]:
            best = (edge, fe)
    return best


def bisect_predicate(pred, lo, hi, tol=BISECT_TOL):
    """Boundary between ``pred == False`` at ``lo`` and ``pred == True`` at ``hi``."""
    if pred(lo) or not pred(hi):
        raise BracketError(f"predicate does not change from False to True on [{lo}, {hi}]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class OptimalTransmission:
    t: float
    interior: bool


def t_optimal(eta_1):
    """Beamsplitter transmission minimising ``epsilon_{x|y}`` for a squeezer with loss ``eta_1``.

    Returns ``min(1/(2 eta_1), 1)``; ``interior`` is False when the
    unconstrained optimum lies beyond ``t = 1``.
    """
    eta_1 = float(eta_1)
    if not (math.isfinite(eta_1) and 0.0 < eta_1 <= 1.0):
        raise ValidationError(f"eta_1 must lie in (0, 1], got {eta_1!r}", key="eta_1")
    raw = 1.0 / (2.0 * eta_1)
    if raw > 1.0:
        return OptimalTransmission(1.0, False)
    return OptimalTransmission(raw, True)


def _is_vacuum(v1):
    return abs(v1.plus - 1.0) <= FLAT_TOL and abs(v1.minus - 1.0) <= FLAT_TOL


def minimize_epr_over_t(v1, tol=GOLDEN_TOL):
    """Numerically minimise ``epsilon_{x|y}(t)`` over ``t`` in [0, 1].

    A vacuum input makes the objective flat; ``t = 0.5`` is returned then.
    """
    if _is_vacuum(v1):
        return 0.5, criteria.epr_biased_general(v1, 0.5)
    return golden_section_minimize(lambda t: criteria.epr_biased_general(v1, t), 0.0, 1.0, tol)


def threshold_eta1(v0_plus, policy=FIXED_T_HALF, tol=BISECT_TOL):
    """Smallest squeezer transmission ``eta_1`` for which ``epsilon_{x|y} < 1``.

    ``policy`` is ``"fixed_t_half"`` (50:50 splitter) or ``"optimal_t"``
    (splitter set to ``t_optimal(eta_1)``). The sign of ``1 - epsilon`` is
    taken from :func:`cvent.criteria.epr_margin_biased`, which stays exact
    near the threshold.
    """
    v0_plus = float(v0_plus)
    if not (math.isfinite(v0_plus) and 0.0 < v0_plus < 1.0):
        raise ValidationError(f"v0_plus must lie in (0, 1), got {v0_plus!r}", key="v0_plus")
    if policy not in (FIXED_T_HALF, OPTIMAL_T):
        raise ValidationError(f"unknown policy {policy!r}", key="policy")

    def is_epr(eta):
        if eta <= 0.0:
            return False
        v1 = squeezer_output(SqueezerSpec(v0_plus, eta))
        t = 0.5 if policy == FIXED_T_HALF else t_optimal(eta).t
        return criteria.epr_margin_biased(v1, t) > 0.0

    return bisect_predicate(is_epr, 0.0, 1.0, tol)


@dataclass(frozen=True)
class InferenceResult:
    v1: VariancePair
    v0_plus: float | None
    eta_1: float | None
    t_opt: float | None
    residual: float
    status: str = "ok"
    t_opt_interior: bool = True

    @property
    def v0_db(self):
        return None if self.v0_plus is None else variance_to_db(self.v0_plus)

    def as_dict(self):
        return {
            "status": self.status,
            "v1_plus": self.v1.plus,
            "v1_minus": self.v1.minus,
            "v0_plus": self.v0_plus,
            "v0_db": self.v0_db,
            "eta_1": self.eta_1,
            "t_opt": self.t_opt,
            "t_opt_interior": self.t_opt_interior,
            "residual": self.residual,
        }


def forward_outputs(v1, t):
    """Output variances of beams x and y for one squeezer and vacuum at transmission ``t``."""
    vx = VariancePair(v1.plus * (1.0 - t) + t, v1.minus * (1.0 - t) + t)
    vy = VariancePair(v1.plus * t + (1.0 - t), v1.minus * t + (1.0 - t))
    return vx, vy


def source_from_output(v1):
    """Recover ``(v0_plus, eta_1)`` of a minimum-uncertainty squeezer behind loss.

    Returns ``None`` for a vacuum-like output where the loss is undefined.
    """
    p, m = v1.plus, v1.minus
    s = p + m - 2.0
    q = p * m - 1.0
    if abs(s) <= 1e-12:
        if abs(q) <= 1e-12:
            return None
        raise InconsistentMeasurementError(
            f"V1+ + V1- = 2 with V1+ V1- = {p * m!r} != 1 cannot come from a lossy squeezer"
        )
    u = q / s
    if -1e-12 < u < 0.0:
        # rounding on a lossless source
        u = 0.0
    if not 0.0 <= u < 1.0:
        raise UnphysicalSourceError(f"loss fraction {u!r} outside [0, 1)")
    eta = 1.0 - u
    return (p - u) / eta, eta


def infer_inputs(v_x, v_y, t):
    """Infer the squeezer behind a biased setup from output variances at transmission ``t``.

    Each quadrature of ``V1`` is solved from both beam equations and the two
    estimates averaged; ``residual`` is the largest misfit when the averaged
    ``V1`` is pushed back through the forward model.
    """
    t = float(t)
    if not (math.isfinite(t) and 0.0 < t < 1.0):
        raise ValidationError(f"t must lie in (0, 1), got {t!r}", key="t")
    sol = []
    for vx, vy in ((v_x.plus, v_y.plus), (v_x.minus, v_y.minus)):
        from_x = (vx - t) / (1.0 - t)
        from_y = (vy - (1.0 - t)) / t
        sol.append(0.5 * (from_x + from_y))
    if min(sol) <= 0.0:
        raise UnphysicalSourceError(f"recovered squeezer variances {sol} are not positive")
    v1 = VariancePair(*sol)
    fx, fy = forward_outputs(v1, t)
    residual = max(
        abs(fx.plus - v_x.plus), abs(fx.minus - v_x.minus),
        abs(fy.plus - v_y.plus), abs(fy.minus - v_y.minus),
    )
    src = source_from_output(v1)
    if src is None:
        return InferenceResult(v1, None, None, None, residual, status="vacuum-degenerate")
    v0, eta = src
    topt = t_optimal(eta)
    return InferenceResult(v1, v0, eta, topt.t, residual, t_opt_interior=topt.interior)


def squeezer_from_measured(v_plus, v_minus):
    """``SqueezerSpec`` whose lossy output reproduces the measured quadrature pair."""
    src = source_from_output(VariancePair(v_plus, v_minus))
    if src is None:
        raise UnphysicalSourceError("a vacuum-like pair does not determine a squeezer")
    return SqueezerSpec(*src)


@dataclass(frozen=True)
class SweepSpec:
    base: ScenarioConfig
    parameter: str
    start: float
    stop: float
    steps: int
    observables: tuple = OBSERVABLES
    optimal_t: bool = False

    def __post_init__(self):
        if self.parameter not in PARAMETERS:
            raise ValidationError(f"parameter must be one of {PARAMETERS}, got {self.parameter!r}", key="param")
        if int(self.steps) != self.steps or self.steps < 2:
            raise ValidationError(f"steps must be an integer >= 2, got {self.steps!r}", key="steps")
        object.__setattr__(self, "steps", int(self.steps))
        for name in ("start", "stop"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValidationError(f"{name} must be finite", key=name)
            if self.parameter != "v0_plus_db" and not 0.0 <= v <= 1.0:
                raise ValidationError(f"{self.parameter} range must lie in [0, 1], got {name}={v}", key=name)
            object.__setattr__(self, name, v)
        obs = tuple(self.observables)
        bad = [o for o in obs if o not in OBSERVABLES]
        if bad or not obs:
            raise ValidationError(f"observables must be a non-empty subset of {OBSERVABLES}", key="observables")
        object.__setattr__(self, "observables", obs)
        if self.parameter in ("eta_1", "eta_2", "v0_plus_db"):
            target = self.base.input1 if self.parameter != "eta_2" else self.base.input2
            if target is None and self.parameter != "v0_plus_db":
                raise ValidationError(f"cannot sweep {self.parameter}: that input is vacuum", key="param")
        if self.parameter == "v0_plus_db" and self.base.input1 is None and self.base.input2 is None:
            raise ValidationError("cannot sweep v0_plus_db: both inputs are vacuum", key="param")
        if self.optimal_t and (self.base.input1 is None or self.parameter == "t"):
            raise ValidationError("optimal_t needs a squeezer on input 1 and a parameter other than t", key="optimal_t")

    def grid(self):
        return np.linspace(self.start, self.stop, self.steps)


@dataclass(frozen=True)
class SweepRow:
    value: float
    observables: dict = field(default_factory=dict)
    error: str | None = None


def scenario_at(base, parameter, value):
    """Copy of ``base`` with one sweep parameter set to ``value``."""
    if parameter in ("t", "eta_x", "eta_y"):
        return replace(base, **{parameter: value})
    if parameter == "eta_1":
        return replace(base, input1=replace(base.input1, eta=value))
    if parameter == "eta_2":
        return replace(base, input2=replace(base.input2, eta=value))
    v0 = db_to_variance(value)
    changes = {}
    for name in ("input1", "input2"):
        spec = getattr(base, name)
        if spec is not None:
            changes[name] = replace(spec, v0_plus=v0)
    return replace(base, **changes)


def evaluate_observables(cfg, observables=OBSERVABLES):
    cm = build_scenario(cfg)
    out = {}
    for name in observables:
        if name == "inseparability":
            out[name] = criteria.inseparability(cm).value
        elif name == "epr_x_given_y":
            out[name] = criteria.epr_value(cm, criteria.X_GIVEN_Y).epsilon
        else:
            out[name] = criteria.epr_value(cm, criteria.Y_GIVEN_X).epsilon
    return out


def _sweep_point(spec, value):
    try:
        cfg = scenario_at(spec.base, spec.parameter, float(value))
        if spec.optimal_t:
            cfg = replace(cfg, t=t_optimal(cfg.input1.eta).t)
        return SweepRow(float(value), evaluate_observables(cfg, spec.observables))
    except (CventError, ArithmeticError) as exc:
        nan = {name: math.nan for name in spec.observables}
        return SweepRow(float(value), nan, f"{type(exc).__name__}: {exc}")


def sweep(spec, workers=1):
    """Evaluate the requested observables on the parameter grid.

    Rows come back in grid order whatever ``workers`` is. A point that fails
    yields a row with NaN observables and ``error`` set; the sweep continues.
    """
    grid = spec.grid()
    if workers <= 1:
        return [_sweep_point(spec, v) for v in grid]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda v: _sweep_point(spec, v), grid))
