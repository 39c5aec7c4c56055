"""Correlation-ellipse geometry for parametric (dX_x, dX_y) plots.

A quadrature block is the 2x2 covariance of ``(dX_x, dX_y)`` at one local
oscillator angle. The plotted curve is the one-sigma covariance ellipse
``{v : v^T S^-1 v = 1}``; its intercepts with the dX_x axis are the
conditional deviations ``sigma_{x|y}``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .criteria import conditional_from_moments, sum_diff_variances
from .errors import GeometryError, ValidationError
from .state import as_cm, rotate_quadrature

ISOTROPY_RTOL = 1e-12


def as_quadrature_cov(sigma):
    s = np.array(sigma, dtype=float)
    if s.shape != (2, 2) or not np.all(np.isfinite(s)):
        raise GeometryError("quadrature covariance must be a finite 2x2 matrix")
    if abs(s[0, 1] - s[1, 0]) > 1e-12 * max(1.0, float(np.max(np.abs(s)))):
        raise GeometryError("quadrature covariance must be symmetric")
    s[0, 1] = s[1, 0] = 0.5 * (s[0, 1] + s[1, 0])
    if s[0, 0] <= 0.0 or s[0, 0] * s[1, 1] - s[0, 1] ** 2 <= 0.0:
        raise GeometryError("quadrature covariance must be positive definite")
    return s


def quadrature_block(cm, theta):
    """2x2 covariance of ``(X_x^theta, X_y^theta)``; ``theta = 0`` is X+, ``pi/2`` is X-."""
    m = rotate_quadrature(as_cm(cm), theta).entries
    return np.array([[m[0, 0], m[0, 2]], [m[2, 0], m[2, 2]]])


def directional_std(sigma, angle):
    """Standard deviation of the projection ``cos(angle) dX_x + sin(angle) dX_y``."""
    s = np.asarray(sigma, dtype=float)
    u = np.array([math.cos(angle), math.sin(angle)])
    return math.sqrt(float(u @ s @ u))


def principal_axes(sigma):
    """Eigenvalues (descending) and matching unit eigenvectors as columns."""
    s = as_quadrature_cov(sigma)
    w, v = np.linalg.eigh(s)
    return w[::-1], v[:, ::-1]


def ellipse_polyline(sigma, n_points=256):
    """``n_points`` samples of the one-sigma ellipse, counter-clockwise.

    Point ``i`` sits at parameter ``phi_i = 2 pi i / n_points`` along
    ``Q diag(sqrt(lambda)) (cos phi, sin phi)``, with ``Q`` the eigenvectors of
    ``sigma`` in ascending-eigenvalue order as returned by ``eigh``. The first
    point is not repeated at the end; join the last point to the first to close
    the curve. Returns an ``(n_points, 2)`` array.
    """
    n_points = int(n_points)
    if n_points < 8:
        raise ValidationError(f"n_points must be at least 8, got {n_points}", key="points")
    s = as_quadrature_cov(sigma)
    w, q = np.linalg.eigh(s)
    phi = 2.0 * np.pi * np.arange(n_points) / n_points
    circle = np.stack([np.cos(phi), np.sin(phi)])
    return (q @ (np.sqrt(w)[:, None] * circle)).T


def polyline_angles(n_points):
    return 360.0 * np.arange(n_points) / n_points


def x_intercept(sigma):
    """Positive dX_x-axis intercept of the ellipse, ``1/sqrt((S^-1)_11)``."""
    s = as_quadrature_cov(sigma)
    return 1.0 / math.sqrt(np.linalg.inv(s)[0, 0])


def y_intercept(sigma):
    s = as_quadrature_cov(sigma)
    return 1.0 / math.sqrt(np.linalg.inv(s)[1, 1])


def axis_angle(sigma):
    """Angle of the major axis in ``[0, pi)``; NaN when the block is isotropic."""
    w, v = principal_axes(sigma)
    if w[0] - w[1] <= ISOTROPY_RTOL * w[0]:
        return math.nan
    major = v[:, 0]
    return math.atan2(major[1], major[0]) % math.pi


@dataclass(frozen=True)
class EllipseSummary:
    sigma_x: float
    sigma_y: float
    sigma_sum: float
    sigma_diff: float
    sigma_x_given_y: float
    sigma_y_given_x: float
    axis_angle: float
    semi_axes: tuple

    def as_dict(self):
        return {
            "sigma_x": self.sigma_x,
            "sigma_y": self.sigma_y,
            "sigma_sum": self.sigma_sum,
            "sigma_diff": self.sigma_diff,
            "sigma_x_given_y": self.sigma_x_given_y,
            "sigma_y_given_x": self.sigma_y_given_x,
            "axis_angle": self.axis_angle,
            "semi_major": self.semi_axes[0],
            "semi_minor": self.semi_axes[1],
        }


def summarize_block(sigma):
    s = as_quadrature_cov(sigma)
    vx, vy, c = s[0, 0], s[1, 1], s[0, 1]
    v_sum, v_diff = sum_diff_variances(s)
    v_xy, _ = conditional_from_moments(vx, vy, c)
    v_yx, _ = conditional_from_moments(vy, vx, c)
    w, _ = principal_axes(s)
    return EllipseSummary(
        sigma_x=math.sqrt(vx),
        sigma_y=math.sqrt(vy),
        sigma_sum=math.sqrt(v_sum),
        sigma_diff=math.sqrt(v_diff),
        sigma_x_given_y=math.sqrt(v_xy),
        sigma_y_given_x=math.sqrt(v_yx),
        axis_angle=axis_angle(s),
        semi_axes=(math.sqrt(w[0]), math.sqrt(w[1])),
    )


def summarize(sigma_plus, sigma_minus):
    """Summaries of the amplitude and phase quadrature ellipses."""
    return summarize_block(sigma_plus), summarize_block(sigma_minus)
