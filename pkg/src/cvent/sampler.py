"""Monte-Carlo homodyne measurement chain.

Paired quadrature samples are drawn from a correlation matrix, optionally
band-pass filtered as a time series, normalised to a filtered vacuum
reference and reduced to the same criteria the analytic engine computes,
with block-jackknife standard errors.

Random numbers come from counter-keyed substreams: chunk ``k`` of a batch is
drawn from ``SeedSequence(seed, spawn_key=(stream, quadrature, k))``, so a
batch is bit-identical whatever the number of worker threads.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import integrate, signal

from . import kernels
from .criteria import DIRECTIONS, PAIRING_SUM_MINUS, PAIRING_SUM_PLUS, X_GIVEN_Y
from .ellipse import quadrature_block
from .errors import DegenerateInputError, GeometryError, InsufficientDataError, ValidationError
from .state import as_cm

CHUNK = 1 << 16
N_BLOCKS = 100
MIN_ESTIMATE_N = 1000
NYQUIST_CAP = 0.49
GAIN_GRID_POINTS = 4001

QUADRATURE_ANGLES = {"+": 0.0, "-": math.pi / 2.0}


def quadrature_angle(quadrature):
    if isinstance(quadrature, str):
        try:
            return QUADRATURE_ANGLES[quadrature]
        except KeyError:
            raise ValidationError(f"quadrature must be '+', '-' or an angle, got {quadrature!r}", key="quadrature")
    theta = float(quadrature)
    if not math.isfinite(theta):
        raise ValidationError("quadrature angle must be finite", key="quadrature")
    return theta


def _angle_key(theta):
    # exact bit pattern of the angle, folded into [0, pi)
    folded = math.fmod(theta, math.pi)
    if folded < 0.0:
        folded += math.pi
    return int(np.float64(folded).view(np.uint64))


@dataclass(frozen=True)
class BandPassSpec:
    center_hz: float
    width_hz: float
    sample_rate_hz: float
    order: int = 6

    def __post_init__(self):
        for name in ("center_hz", "width_hz", "sample_rate_hz"):
            v = float(getattr(self, name))
            if not (math.isfinite(v) and v > 0.0):
                raise ValidationError(f"{name} must be positive, got {v!r}", key=name)
            object.__setattr__(self, name, v)
        if int(self.order) != self.order or self.order < 2 or self.order % 2:
            raise ValidationError(f"order must be an even integer >= 2, got {self.order!r}", key="order")
        object.__setattr__(self, "order", int(self.order))
        if self.low_hz <= 0.0:
            raise ValidationError("lower band edge must be above 0 Hz", key="width_hz")
        if self.high_hz > NYQUIST_CAP * self.sample_rate_hz:
            raise ValidationError(
                f"upper band edge {self.high_hz:g} Hz exceeds {NYQUIST_CAP} x sample rate "
                f"({NYQUIST_CAP * self.sample_rate_hz:g} Hz)",
                key="center_hz",
            )

    @property
    def low_hz(self):
        return self.center_hz - 0.5 * self.width_hz

    @property
    def high_hz(self):
        return self.center_hz + 0.5 * self.width_hz

    def describe(self):
        return {
            "type": "butterworth-bandpass",
            "center_hz": self.center_hz,
            "width_hz": self.width_hz,
            "order": self.order,
            "sample_rate_hz": self.sample_rate_hz,
        }


# band 4.0-4.9 MHz at 10 MS/s, order 6
LAB_BAND = BandPassSpec(center_hz=4.45e6, width_hz=0.9e6, sample_rate_hz=10e6, order=6)


def design_bandpass(spec):
    """Second-order sections of the Butterworth band-pass described by ``spec``.

    The analog prototype of order ``spec.order // 2`` is mapped to a band-pass
    of total order ``spec.order`` and discretised by the bilinear transform
    with the band edges pre-warped.
    """
    return signal.butter(
        spec.order // 2, [spec.low_hz, spec.high_hz], btype="bandpass",
        output="sos", fs=spec.sample_rate_hz,
    )


def frequency_response(spec, freqs_hz):
    sos = design_bandpass(spec)
    _, h = signal.sosfreqz(sos, worN=np.asarray(freqs_hz, dtype=float), fs=spec.sample_rate_hz)
    return h


def noise_bandwidth_fraction(spec, n_grid=1 << 18):
    """Output variance of the filter for unit-variance white input."""
    freqs = np.linspace(0.0, 0.5 * spec.sample_rate_hz, n_grid)
    power = np.abs(frequency_response(spec, freqs)) ** 2
    return float(integrate.trapezoid(power, freqs) / (0.5 * spec.sample_rate_hz))


def butterworth_bandpass(series, spec):
    """Filter a real time series; zero initial state, same length out."""
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise ValidationError("series must be one-dimensional", key="series")
    if x.size < 10 * spec.order:
        raise ValidationError(f"series needs at least {10 * spec.order} samples, got {x.size}", key="series")
    return kernels.sosfilt(design_bandpass(spec), x)


def default_discard(spec):
    return int(math.ceil(20.0 * spec.sample_rate_hz / spec.width_hz))


@dataclass(frozen=True)
class SampleBatch:
    pairs: np.ndarray = field(repr=False)
    seed: int
    n: int
    quadrature: float
    sample_rate: float | None = None
    filter_provenance: dict | None = None
    stream: int = 0

    def __post_init__(self):
        pairs = np.asarray(self.pairs, dtype=float)
        if pairs.ndim != 2 or pairs.shape[1] != 2:
            raise ValidationError("pairs must have shape (n, 2)", key="pairs")
        if pairs.shape[0] != self.n:
            raise ValidationError(f"n={self.n} does not match {pairs.shape[0]} pairs", key="n")
        pairs.setflags(write=False)
        object.__setattr__(self, "pairs", pairs)

    @property
    def x(self):
        return self.pairs[:, 0]

    @property
    def y(self):
        return self.pairs[:, 1]


def _chunk_normals(seed, stream, angle_key, index, size):
    ss = np.random.SeedSequence(seed, spawn_key=(stream, angle_key, index))
    return np.random.Generator(np.random.PCG64(ss)).standard_normal((size, 2))


def sample_pairs(cm, quadrature, n, seed, sample_rate=None, stream=0, workers=1):
    """Draw ``n`` zero-mean pairs ``(dX_x, dX_y)`` with the quadrature block's covariance.

    ``quadrature`` is ``"+"``, ``"-"`` or a local-oscillator angle in radians.
    ``stream`` separates independent acquisitions sharing a seed (for example
    the vacuum reference).
    """
    n = int(n)
    if n < 2:
        raise ValidationError(f"n must be at least 2, got {n}", key="n")
    seed = int(seed)
    if seed < 0:
        raise ValidationError("seed must be non-negative", key="seed")
    theta = quadrature_angle(quadrature)
    sigma = quadrature_block(as_cm(cm), theta)
    try:
        chol = np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError as exc:
        raise GeometryError(f"quadrature block is not positive definite: {exc}") from None
    key = _angle_key(theta)
    starts = list(range(0, n, CHUNK))

    def draw(i):
        size = min(CHUNK, n - starts[i])
        return _chunk_normals(seed, stream, key, i, size) @ chol.T

    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(draw, range(len(starts))))
    else:
        parts = [draw(i) for i in range(len(starts))]
    return SampleBatch(np.concatenate(parts), seed, n, theta, sample_rate, None, stream)


def filter_batch(batch, spec, discard=None):
    """Band-pass both columns of a time-ordered batch and drop the start-up transient."""
    if batch.sample_rate is not None and batch.sample_rate != spec.sample_rate_hz:
        raise ValidationError("batch sample rate does not match the filter", key="sample_rate_hz")
    discard = default_discard(spec) if discard is None else int(discard)
    if discard < 0 or batch.n - discard < 2:
        raise ValidationError(f"cannot discard {discard} of {batch.n} samples", key="discard")
    fx = butterworth_bandpass(batch.x, spec)[discard:]
    fy = butterworth_bandpass(batch.y, spec)[discard:]
    prov = dict(spec.describe(), discard=discard)
    return replace(
        batch, pairs=np.column_stack([fx, fy]), n=fx.size,
        sample_rate=spec.sample_rate_hz, filter_provenance=prov,
    )


def qnl_calibrate(vacuum_batch):
    """Variance of a vacuum batch (both channels pooled); divide estimates by it."""
    p = vacuum_batch.pairs
    scale = 0.5 * (float(np.var(p[:, 0], ddof=1)) + float(np.var(p[:, 1], ddof=1)))
    if not scale > 0.0:
        raise DegenerateInputError("vacuum reference has zero variance")
    return scale


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float


@dataclass(frozen=True)
class QuadratureEstimate:
    var_x: Estimate
    var_y: Estimate
    cov: Estimate
    cond_x_given_y: Estimate
    cond_y_given_x: Estimate
    gain_x_given_y: Estimate
    gain_y_given_x: Estimate
    var_sum: Estimate
    var_diff: Estimate
    # verification pass: minimum of <(a - g b)^2> over a fixed gain grid
    grid_gain_x_given_y: float
    grid_gain_y_given_x: float
    grid_cond_x_given_y: float
    grid_cond_y_given_x: float
    grid_pitch_x_given_y: float
    grid_pitch_y_given_x: float


@dataclass(frozen=True)
class EstimateReport:
    n: int
    qnl_scale: float
    plus: QuadratureEstimate
    minus: QuadratureEstimate
    inseparability: Estimate
    inseparability_pairing: str
    epsilon_x_given_y: Estimate
    epsilon_y_given_x: Estimate
    n_blocks: int = N_BLOCKS

    def epsilon(self, direction):
        return self.epsilon_x_given_y if direction == X_GIVEN_Y else self.epsilon_y_given_x

    def as_dict(self):
        def est(e):
            return {"value": e.value, "stderr": e.stderr}

        def quad(q):
            out = {}
            for name in ("var_x", "var_y", "cov", "cond_x_given_y", "cond_y_given_x",
                         "gain_x_given_y", "gain_y_given_x", "var_sum", "var_diff"):
                out[name] = est(getattr(q, name))
            for name in ("grid_gain_x_given_y", "grid_gain_y_given_x",
                         "grid_cond_x_given_y", "grid_cond_y_given_x"):
                out[name] = getattr(q, name)
            return out

        return {
            "n": self.n,
            "n_blocks": self.n_blocks,
            "qnl_scale": self.qnl_scale,
            "plus": quad(self.plus),
            "minus": quad(self.minus),
            "inseparability": est(self.inseparability),
            "inseparability_pairing": self.inseparability_pairing,
            "epsilon_x_given_y": est(self.epsilon_x_given_y),
            "epsilon_y_given_x": est(self.epsilon_y_given_x),
        }


def _moment_stats(tot, scale):
    """Second-moment statistics from moment totals ``(..., 6)``."""
    n, sx, sy, sxx, syy, sxy = (tot[..., k] for k in range(6))
    vx = (sxx - sx * sx / n) / (n - 1.0) / scale
    vy = (syy - sy * sy / n) / (n - 1.0) / scale
    c = (sxy - sx * sy / n) / (n - 1.0) / scale
    return {
        "var_x": vx,
        "var_y": vy,
        "cov": c,
        "gain_x_given_y": c / vy,
        "gain_y_given_x": c / vx,
        "cond_x_given_y": vx - c * c / vy,
        "cond_y_given_x": vy - c * c / vx,
        "var_sum": 0.5 * (vx + vy + 2.0 * c),
        "var_diff": 0.5 * (vx + vy - 2.0 * c),
    }


def _jackknife_se(loo):
    b = loo.shape[0]
    return float(math.sqrt((b - 1.0) / b * np.sum((loo - loo.mean()) ** 2)))


def _grid_minimum(va, vb, c):
    bound = math.sqrt(va / vb)
    g = np.linspace(-bound, bound, GAIN_GRID_POINTS)
    resid = va - 2.0 * g * c + g * g * vb
    k = int(np.argmin(resid))
    return float(g[k]), float(resid[k]), float(g[1] - g[0])


def estimate(batch_plus, batch_minus, qnl_scale=1.0, n_blocks=N_BLOCKS):
    """Empirical criteria with block-jackknife standard errors.

    Variances use the ``n - 1`` denominator and are divided by ``qnl_scale``.
    Optimal gains come from the closed form ``cov / var``; a grid search over
    ``g`` is reported alongside as a check.
    """
    if batch_plus.n != batch_minus.n:
        raise ValidationError("plus and minus batches must have the same length", key="n")
    n = batch_plus.n
    if n < MIN_ESTIMATE_N:
        raise InsufficientDataError(f"need at least {MIN_ESTIMATE_N} samples, got {n}")
    qnl_scale = float(qnl_scale)
    if not (math.isfinite(qnl_scale) and qnl_scale > 0.0):
        raise ValidationError("qnl_scale must be positive", key="qnl_scale")

    edges = kernels.block_edges(n, n_blocks)
    blocks = {}
    for label, batch in (("+", batch_plus), ("-", batch_minus)):
        blocks[label] = kernels.block_moments(batch.x, batch.y, edges)
    full = {k: _moment_stats(m.sum(axis=0), qnl_scale) for k, m in blocks.items()}
    loo = {k: _moment_stats(m.sum(axis=0)[None, :] - m, qnl_scale) for k, m in blocks.items()}

    def pack(label):
        f, l = full[label], loo[label]
        ests = {name: Estimate(float(f[name]), _jackknife_se(l[name])) for name in f}
        gxy, cxy, pxy = _grid_minimum(f["var_x"], f["var_y"], f["cov"])
        gyx, cyx, pyx = _grid_minimum(f["var_y"], f["var_x"], f["cov"])
        return QuadratureEstimate(
            **ests,
            grid_gain_x_given_y=gxy, grid_gain_y_given_x=gyx,
            grid_cond_x_given_y=cxy, grid_cond_y_given_x=cyx,
            grid_pitch_x_given_y=pxy, grid_pitch_y_given_x=pyx,
        )

    def combined(fn):
        value = float(fn(full["+"], full["-"]))
        return Estimate(value, _jackknife_se(fn(loo["+"], loo["-"])))

    first = 0.5 * (full["+"]["var_sum"] + full["-"]["var_diff"])
    second = 0.5 * (full["-"]["var_sum"] + full["+"]["var_diff"])
    if first <= second:
        pairing = PAIRING_SUM_PLUS
        ins = combined(lambda p, m: 0.5 * (p["var_sum"] + m["var_diff"]))
    else:
        pairing = PAIRING_SUM_MINUS
        ins = combined(lambda p, m: 0.5 * (m["var_sum"] + p["var_diff"]))
    eps = {
        d: combined(lambda p, m, d=d: p[f"cond_{d}"] * m[f"cond_{d}"]) for d in DIRECTIONS
    }
    return EstimateReport(
        n=n, qnl_scale=qnl_scale, plus=pack("+"), minus=pack("-"),
        inseparability=ins, inseparability_pairing=pairing,
        epsilon_x_given_y=eps["x_given_y"], epsilon_y_given_x=eps["y_given_x"],
        n_blocks=n_blocks,
    )


VACUUM_STREAM = 1


def measure(cm, n, seed, band=None, discard=None, workers=1):
    """Full acquisition: sample both quadratures, optionally filter and calibrate, estimate.

    Without ``band`` the raw samples are estimated with ``qnl_scale = 1``.
    With ``band`` both quadratures and an independent vacuum reference go
    through the same filter, and the vacuum variance sets ``qnl_scale``.
    """
    rate = band.sample_rate_hz if band is not None else None
    plus = sample_pairs(cm, "+", n, seed, sample_rate=rate, workers=workers)
    minus = sample_pairs(cm, "-", n, seed, sample_rate=rate, workers=workers)
    if band is None:
        return estimate(plus, minus)
    vac = sample_pairs(np.eye(4), "+", n, seed, sample_rate=rate, stream=VACUUM_STREAM, workers=workers)
    scale = qnl_calibrate(filter_batch(vac, band, discard))
    return estimate(filter_batch(plus, band, discard), filter_batch(minus, band, discard), scale)
