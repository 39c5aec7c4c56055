"""Two-mode Gaussian states as 4x4 correlation matrices.

All variances are normalised to the quantum noise limit (vacuum = 1). The
basis order is ``(X_x+, X_x-, X_y+, X_y-)``.

Beam convention: beam ``y`` receives the fraction ``t`` of input 1's power and
beam ``x`` the fraction ``1 - t``. The pi/2 mixing phase between the inputs is
encoded by orienting input 2's squeezing along X-, which keeps every matrix
real with zero cross-quadrature entries.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .errors import ValidationError

X_PLUS, X_MINUS, Y_PLUS, Y_MINUS = 0, 1, 2, 3
MODE_SLICES = {"x": slice(0, 2), "y": slice(2, 4)}
PSD_TOL = 1e-12


def _check_unit_interval(value, name):
    value = float(value)
    if not math.isfinite(value) or not 0.0 <= value <= 1.0:
        raise ValidationError(f"{name} must lie in [0, 1], got {value!r}", key=name)
    return value


def db_to_variance(db):
    """Convert a level in dB to a QNL-normalised variance, ``10**(db/10)``."""
    db = float(db)
    if not math.isfinite(db):
        raise ValidationError(f"dB value must be finite, got {db!r}", key="db")
    return 10.0 ** (db / 10.0)


def variance_to_db(variance):
    variance = float(variance)
    if not variance > 0.0:
        raise ValidationError(f"variance must be positive, got {variance!r}", key="variance")
    return 10.0 * math.log10(variance)


@dataclass(frozen=True)
class VariancePair:
    """Amplitude (``plus``) and phase (``minus``) quadrature variances of one mode."""

    plus: float
    minus: float

    def __post_init__(self):
        for name in ("plus", "minus"):
            v = float(getattr(self, name))
            if not (math.isfinite(v) and v > 0.0):
                raise ValidationError(f"variance {name} must be positive and finite, got {v!r}", key=name)
            object.__setattr__(self, name, v)

    @property
    def product(self):
        return self.plus * self.minus

    def swapped(self):
        return VariancePair(self.minus, self.plus)


VACUUM_PAIR = VariancePair(1.0, 1.0)


@dataclass(frozen=True)
class SqueezerSpec:
    """A minimum-uncertainty squeezer ``(v0_plus, 1/v0_plus)`` followed by a loss with transmission ``eta``."""

    v0_plus: float
    eta: float = 1.0

    def __post_init__(self):
        v0 = float(self.v0_plus)
        if not (math.isfinite(v0) and v0 > 0.0):
            raise ValidationError(f"v0_plus must be positive and finite, got {v0!r}", key="v0_plus")
        object.__setattr__(self, "v0_plus", v0)
        object.__setattr__(self, "eta", _check_unit_interval(self.eta, "eta"))

    @classmethod
    def from_db(cls, v0_db, eta=1.0):
        return cls(db_to_variance(v0_db), eta)

    @property
    def v0_minus(self):
        return 1.0 / self.v0_plus

    @property
    def v0_db(self):
        return variance_to_db(self.v0_plus)


# ``None`` stands for a vacuum input port
Input = Optional[SqueezerSpec]


@dataclass(frozen=True)
class ScenarioConfig:
    """Two inputs, a beamsplitter of power transmission ``t`` and two output-arm losses."""

    input1: Input = None
    input2: Input = None
    t: float = 0.5
    eta_x: float = 1.0
    eta_y: float = 1.0

    def __post_init__(self):
        for name in ("input1", "input2"):
            value = getattr(self, name)
            if value is not None and not isinstance(value, SqueezerSpec):
                raise ValidationError(f"{name} must be a SqueezerSpec or None (vacuum)", key=name)
        for name in ("t", "eta_x", "eta_y"):
            object.__setattr__(self, name, _check_unit_interval(getattr(self, name), name))

    def replace(self, **changes):
        from dataclasses import replace

        return replace(self, **changes)


@dataclass(frozen=True)
class CorrelationMatrix:
    """Immutable, validated 4x4 correlation matrix of a two-mode Gaussian state."""

    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.array(self.entries, dtype=float, copy=True)
        if m.shape != (4, 4):
            raise ValidationError(f"correlation matrix must be 4x4, got shape {m.shape}", key="cm")
        if not np.all(np.isfinite(m)):
            raise ValidationError("correlation matrix has non-finite entries", key="cm")
        scale = max(1.0, float(np.max(np.abs(m))))
        if not np.allclose(m, m.T, rtol=0.0, atol=1e-12 * scale):
            raise ValidationError("correlation matrix must be symmetric", key="cm")
        m = 0.5 * (m + m.T)
        if np.any(np.diag(m) <= 0.0):
            raise ValidationError("correlation matrix diagonal must be positive", key="cm")
        if np.linalg.eigvalsh(m)[0] < -PSD_TOL * scale:
            raise ValidationError("correlation matrix must be positive semidefinite", key="cm")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    def __getitem__(self, index):
        return self.entries[index]

    def __array__(self, dtype=None, copy=None):
        return np.array(self.entries, dtype=dtype)

    def __eq__(self, other):
        if not isinstance(other, CorrelationMatrix):
            return NotImplemented
        return bool(np.array_equal(self.entries, other.entries))

    def __hash__(self):
        return hash(self.entries.tobytes())

    def block(self, mode):
        """2x2 (+, -) block of mode ``"x"`` or ``"y"``."""
        s = MODE_SLICES[mode]
        return self.entries[s, s]

    def variances(self, mode):
        b = self.block(mode)
        return VariancePair(b[0, 0], b[1, 1])

    @classmethod
    def identity(cls):
        return cls(np.eye(4))


CMLike = Union[CorrelationMatrix, np.ndarray]


def as_cm(cm):
    return cm if isinstance(cm, CorrelationMatrix) else CorrelationMatrix(cm)


def squeezer_output(spec):
    """Quadrature variances of a lossy squeezer: ``eta * V0 + (1 - eta)`` per quadrature."""
    eta = spec.eta
    return VariancePair(
        eta * spec.v0_plus + (1.0 - eta),
        eta * spec.v0_minus + (1.0 - eta),
    )


def apply_loss(cm, mode, eta):
    """Attenuate ``mode`` (``"x"`` or ``"y"``) with power transmission ``eta``.

    The mode's own block maps to ``eta * V + (1 - eta) * I`` and its
    correlations with the other mode scale by ``sqrt(eta)``.
    """
    cm = as_cm(cm)
    if mode not in MODE_SLICES:
        raise ValidationError(f"mode must be 'x' or 'y', got {mode!r}", key="mode")
    eta = _check_unit_interval(eta, "eta")
    if eta == 1.0:
        return cm
    s = MODE_SLICES[mode]
    other = MODE_SLICES["y" if mode == "x" else "x"]
    m = cm.entries.copy()
    m[s, s] = eta * m[s, s] + (1.0 - eta) * np.eye(2)
    root = math.sqrt(eta)
    m[s, other] *= root
    m[other, s] *= root
    return CorrelationMatrix(m)


def mix_on_beamsplitter(in1, in2, t):
    """Combine two independent inputs on a beamsplitter with power transmission ``t``.

    ``in2`` is given as produced by its source (squeezed along X+); it is
    rotated by pi/2 before mixing. For each quadrature ``k``::

        V_x = (1 - t) V1 + t V2
        V_y = t V1 + (1 - t) V2
        C_xy = sqrt(t (1 - t)) (V1 - V2)
    """
    t = _check_unit_interval(t, "t")
    in2 = in2.swapped()
    r = math.sqrt(t * (1.0 - t))
    m = np.zeros((4, 4))
    for k, (v1, v2) in enumerate(((in1.plus, in2.plus), (in1.minus, in2.minus))):
        xk, yk = k, 2 + k
        m[xk, xk] = (1.0 - t) * v1 + t * v2
        m[yk, yk] = t * v1 + (1.0 - t) * v2
        m[xk, yk] = m[yk, xk] = r * (v1 - v2)
    return CorrelationMatrix(m)


def _input_pair(spec):
    return VACUUM_PAIR if spec is None else squeezer_output(spec)


def build_scenario(cfg):
    """Correlation matrix at the two homodyne detectors for scenario ``cfg``."""
    cm = mix_on_beamsplitter(_input_pair(cfg.input1), _input_pair(cfg.input2), cfg.t)
    cm = apply_loss(cm, "x", cfg.eta_x)
    return apply_loss(cm, "y", cfg.eta_y)


def biased_cm(v1, t):
    """Single squeezer with output ``v1`` mixed with vacuum at transmission ``t``."""
    return mix_on_beamsplitter(v1, VACUUM_PAIR, t)


def rotation_matrix(theta):
    c, s = math.cos(theta), math.sin(theta)
    r = np.array([[c, s], [-s, c]])
    out = np.zeros((4, 4))
    out[:2, :2] = r
    out[2:, 2:] = r
    return out


def rotate_quadrature(cm, theta):
    """Rotate both local-oscillator phases by ``theta``: ``X_theta = cos X+ + sin X-``."""
    cm = as_cm(cm)
    theta = float(theta)
    if not math.isfinite(theta):
        raise ValidationError(f"theta must be finite, got {theta!r}", key="theta")
    if theta == 0.0:
        return cm
    r = rotation_matrix(theta)
    m = r @ cm.entries @ r.T
    return CorrelationMatrix(0.5 * (m + m.T))


def quadrature_cov(cm, quadrature):
    """Same-quadrature 2x2 covariance of ``(X_x^k, X_y^k)`` for ``k`` in ``{"+", "-"}``."""
    cm = as_cm(cm)
    k = _quadrature_index(quadrature)
    idx = [k, 2 + k]
    return cm.entries[np.ix_(idx, idx)].copy()


def _quadrature_index(quadrature):
    if quadrature in ("+", "plus"):
        return 0
    if quadrature in ("-", "minus"):
        return 1
    raise ValidationError(f"quadrature must be '+' or '-', got {quadrature!r}", key="quadrature")
