"""Entanglement criteria and information rates.

Values below 1 certify entanglement (inseparability) or demonstrate the EPR
paradox (epsilon). Both thresholds are strict.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateInputError, ValidationError
from .state import as_cm, quadrature_cov

X_GIVEN_Y = "x_given_y"
Y_GIVEN_X = "y_given_x"
DIRECTIONS = (X_GIVEN_Y, Y_GIVEN_X)

DIRECT = "direct"
REVERSE = "reverse"

# which quadrature is read from the sum mode in the inseparability pairing
PAIRING_SUM_PLUS = "sum+/diff-"
PAIRING_SUM_MINUS = "sum-/diff+"


@dataclass(frozen=True)
class GainPair:
    g_plus: float
    g_minus: float


@dataclass(frozen=True)
class ConditionalVariances:
    v_plus: float
    v_minus: float
    direction: str
    gains: GainPair


@dataclass(frozen=True)
class EprResult:
    epsilon: float
    direction: str
    conditionals: ConditionalVariances

    @property
    def is_epr(self):
        return self.epsilon < 1.0


@dataclass(frozen=True)
class InseparabilityResult:
    value: float
    pairing: str

    @property
    def is_inseparable(self):
        return self.value < 1.0


@dataclass(frozen=True)
class QkdRateInput:
    """Conditional variances entering the net information rate.

    For direct reconciliation these are ``V_{A|E}`` and ``V_{A|B}``; for reverse
    reconciliation ``V_{B|E}`` and ``V_{B|A}``. The Eve-conditioned values are
    supplied by the caller; no eavesdropper model is provided.
    """

    v_cond_eve_plus: float
    v_cond_eve_minus: float
    v_cond_party_plus: float
    v_cond_party_minus: float
    direction: str = REVERSE

    def __post_init__(self):
        for name in ("v_cond_eve_plus", "v_cond_eve_minus", "v_cond_party_plus", "v_cond_party_minus"):
            v = float(getattr(self, name))
            if not (math.isfinite(v) and v > 0.0):
                raise ValidationError(f"{name} must be positive and finite, got {v!r}", key=name)
            object.__setattr__(self, name, v)
        if self.direction not in (DIRECT, REVERSE):
            raise ValidationError(f"direction must be 'direct' or 'reverse', got {self.direction!r}", key="direction")


def _check_direction(direction):
    if direction not in DIRECTIONS:
        raise ValidationError(f"direction must be one of {DIRECTIONS}, got {direction!r}", key="direction")


def conditional_from_moments(v_a, v_b, c_ab):
    """Residual variance of ``a`` after the best linear estimate from ``b``.

    Returns ``(v_a - c_ab**2 / v_b, c_ab / v_b)``, the minimum over ``g`` of
    ``<(a - g b)^2>`` and the gain that reaches it.
    """
    if not v_b > 0.0:
        raise DegenerateInputError(f"conditioning variance must be positive, got {v_b!r}")
    gain = c_ab / v_b
    return v_a - c_ab * c_ab / v_b, gain


def conditional_variance(cm, direction, quadrature):
    """Conditional variance ``V_{a|b}`` in one quadrature and its optimal gain."""
    _check_direction(direction)
    sigma = quadrature_cov(cm, quadrature)
    if direction == X_GIVEN_Y:
        return conditional_from_moments(sigma[0, 0], sigma[1, 1], sigma[0, 1])
    return conditional_from_moments(sigma[1, 1], sigma[0, 0], sigma[0, 1])


def conditional_variances(cm, direction):
    cm = as_cm(cm)
    vp, gp = conditional_variance(cm, direction, "+")
    vm, gm = conditional_variance(cm, direction, "-")
    return ConditionalVariances(vp, vm, direction, GainPair(gp, gm))


def epr_value(cm, direction):
    """EPR product ``epsilon = V+_{a|b} * V-_{a|b}`` for the given inference direction."""
    cond = conditional_variances(cm, direction)
    return EprResult(cond.v_plus * cond.v_minus, direction, cond)


def sum_diff_variances(sigma):
    """Variances of ``(a + b)/sqrt(2)`` and ``(a - b)/sqrt(2)`` from a 2x2 covariance."""
    a, b, c = sigma[0, 0], sigma[1, 1], sigma[0, 1]
    return 0.5 * (a + b + 2.0 * c), 0.5 * (a + b - 2.0 * c)


def inseparability(cm):
    """Sum/difference inseparability value, minimised over the two quadrature pairings."""
    cm = as_cm(cm)
    sum_p, diff_p = sum_diff_variances(quadrature_cov(cm, "+"))
    sum_m, diff_m = sum_diff_variances(quadrature_cov(cm, "-"))
    first = 0.5 * (sum_p + diff_m)
    second = 0.5 * (sum_m + diff_p)
    if first <= second:
        return InseparabilityResult(first, PAIRING_SUM_PLUS)
    return InseparabilityResult(second, PAIRING_SUM_MINUS)


def _check_closed_form_args(v0_plus, eta):
    v0_plus, eta = float(v0_plus), float(eta)
    if not (math.isfinite(v0_plus) and v0_plus > 0.0):
        raise ValidationError(f"v0_plus must be positive, got {v0_plus!r}", key="v0_plus")
    if not (math.isfinite(eta) and 0.0 <= eta <= 1.0):
        raise ValidationError(f"eta must lie in [0, 1], got {eta!r}", key="eta")
    return v0_plus, eta


def inseparability_symmetric_closed_form(v0_plus, eta):
    """Inseparability of two identical squeezers on a 50:50 splitter with total transmission ``eta``."""
    v0_plus, eta = _check_closed_form_args(v0_plus, eta)
    return eta * v0_plus + (1.0 - eta)


def epr_symmetric_closed_form(v0_plus, eta):
    """EPR value of the symmetric two-squeezer setup with total transmission ``eta``."""
    v0_plus, eta = _check_closed_form_args(v0_plus, eta)
    inner = 1.0 - eta + (2.0 * eta - 1.0) / (eta * (v0_plus + 1.0 / v0_plus - 2.0) + 2.0)
    return 4.0 * inner * inner


def epr_biased_5050(v1):
    """EPR value ``epsilon_{x|y}`` for one squeezer and vacuum on a 50:50 splitter."""
    p, m = v1.plus, v1.minus
    return 4.0 * p * m / (p * m + p + m + 1.0)


def _check_t(t):
    t = float(t)
    if not (math.isfinite(t) and 0.0 <= t <= 1.0):
        raise ValidationError(f"t must lie in [0, 1], got {t!r}", key="t")
    return t


def epr_biased_general(v1, t):
    """EPR value ``epsilon_{x|y}`` for one squeezer and vacuum at splitter transmission ``t``."""
    t = _check_t(t)
    p, m = v1.plus, v1.minus
    den = (1.0 + t * (m - 1.0)) * (1.0 + t * (p - 1.0))
    assert den > 0.0, f"non-positive denominator {den!r} for valid inputs"
    return p * m / den


def epr_margin_biased(v1, t):
    """``1 - epr_biased_general(v1, t)`` evaluated without cancellation.

    With ``a = V1+ - 1`` and ``b = V1- - 1`` the margin is
    ``(t - 1) (a + b + (1 + t) a b) / ((1 + t a)(1 + t b))``; it is exactly 0 at
    ``t = 1`` and its sign is reliable even where epsilon is within rounding of 1.
    """
    t = _check_t(t)
    a, b = v1.plus - 1.0, v1.minus - 1.0
    den = (1.0 + t * a) * (1.0 + t * b)
    return (t - 1.0) * (a + b + (1.0 + t) * a * b) / den


def qkd_rate(inp):
    """Net information rate in bits per symbol; positive values permit a secure key."""
    num = inp.v_cond_eve_plus * inp.v_cond_eve_minus
    den = inp.v_cond_party_plus * inp.v_cond_party_minus
    return 0.5 * math.log2(num / den)


def evaluate(cm):
    """All criteria for one correlation matrix, as a flat dict."""
    cm = as_cm(cm)
    ins = inseparability(cm)
    out = {"inseparability": ins.value, "inseparability_pairing": ins.pairing}
    for direction in DIRECTIONS:
        res = epr_value(cm, direction)
        c = res.conditionals
        out[f"epsilon_{direction}"] = res.epsilon
        out[f"v_plus_{direction}"] = c.v_plus
        out[f"v_minus_{direction}"] = c.v_minus
        out[f"gain_plus_{direction}"] = c.gains.g_plus
        out[f"gain_minus_{direction}"] = c.gains.g_minus
    return out


__all__ = [
    "X_GIVEN_Y", "Y_GIVEN_X", "DIRECTIONS", "DIRECT", "REVERSE",
    "GainPair", "ConditionalVariances", "EprResult", "InseparabilityResult", "QkdRateInput",
    "conditional_from_moments", "conditional_variance", "conditional_variances", "epr_value",
    "sum_diff_variances", "inseparability", "inseparability_symmetric_closed_form",
    "epr_symmetric_closed_form", "epr_biased_5050", "epr_biased_general", "epr_margin_biased",
    "qkd_rate", "evaluate",
]
