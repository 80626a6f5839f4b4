"""Logarithmic means tau(t) = (1/log t) * integral_1^t s(x)/x dx.

Substituting u = log x turns the kernel integral into the plain integral of
s(e^u) over [0, log t], which is what every routine here computes.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .funcspec import Evaluable
from .quadrature import integrate_intervals

DEFAULT_ABS_TOL = 1e-9


def _integrator(spec: Evaluable):
    return dict(const_fn=spec.constant_segments)


def integrate_weighted_u(spec: Evaluable, lo_u: float, hi_u: float, abs_tol=DEFAULT_ABS_TOL):
    """Integral of s(x)/x over [e^lo_u, e^hi_u], accurate to ``abs_tol``."""
    if not hi_u > lo_u:
        raise ValueError("need b > a")
    if lo_u < 0:
        raise ValueError("need a >= 1")
    spec.check_horizon(hi_u)
    vals, _ = integrate_intervals(spec.eval_u, [lo_u, hi_u], abs_tol / (hi_u - lo_u),
                                  spec.breakpoints_u(lo_u, hi_u), **_integrator(spec))
    return vals[0]


def integrate_weighted(spec: Evaluable, a: float, b: float, abs_tol=DEFAULT_ABS_TOL):
    """Integral of s(x)/x over [a, b] with |error| <= abs_tol."""
    if a < 1:
        raise ValueError("need a >= 1")
    if not b > a:
        raise ValueError("need b > a")
    return integrate_weighted_u(spec, math.log(a), math.log(b), abs_tol)


def log_mean_u(spec: Evaluable, log_t: float, abs_tol=DEFAULT_ABS_TOL):
    if not log_t > 0:
        raise ValueError("tau(t) needs t > 1")
    return integrate_weighted_u(spec, 0.0, log_t, abs_tol * log_t) / log_t


def log_mean(spec: Evaluable, t: float, abs_tol=DEFAULT_ABS_TOL):
    """tau(t), accurate to ``abs_tol``."""
    if not t > 1:
        raise ValueError("tau(t) needs t > 1")
    return log_mean_u(spec, math.log(t), abs_tol)


@dataclass(frozen=True)
class CumulativeIntegral:
    """Partial integrals of s(x)/x from 1 to each breakpoint (stored as log x)."""

    log_breakpoints: np.ndarray
    partial_values: np.ndarray
    abs_tol_per_unit: float

    @classmethod
    def build(cls, spec: Evaluable, log_points, abs_tol=DEFAULT_ABS_TOL):
        u = np.asarray(log_points, dtype=float)
        if np.any(np.diff(u) <= 0) or u[0] <= 0:
            raise ValueError("points must be strictly increasing and > 1")
        spec.check_horizon(u[-1])
        edges = np.concatenate([[0.0], u])
        vals, _ = integrate_intervals(spec.eval_u, edges, abs_tol,
                                      spec.breakpoints_u(0.0, u[-1]), **_integrator(spec))
        return cls(u, np.cumsum(vals), abs_tol)

    @property
    def breakpoints(self):
        with np.errstate(over="ignore"):
            return np.exp(self.log_breakpoints)

    def between(self, i, j):
        """Integral between breakpoints i < j."""
        return self.partial_values[j] - self.partial_values[i]


@dataclass(frozen=True)
class MeanCurve:
    log_t: np.ndarray
    tau: np.ndarray
    abs_tol: float

    @property
    def grid(self):
        with np.errstate(over="ignore"):
            return np.exp(self.log_t)

    @property
    def loglog_t(self):
        return np.log(self.log_t)

    def tail(self, fraction=0.5):
        k = int(len(self.tau) * (1 - fraction))
        return self.tau[k:]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "log_t", "loglog_t", "tau_re", "tau_im"])
        tau = np.asarray(self.tau)
        for lt, tv in zip(self.log_t, tau):
            t = math.exp(lt) if lt < 709 else math.inf
            w.writerow([repr(t), repr(float(lt)), repr(math.log(lt)),
                        repr(float(np.real(tv))), repr(float(np.imag(tv)))])
        return buf.getvalue()

    def as_function(self, name=None):
        return TauFunction(self, name or "tau")


def loglog_grid(log_t_min, log_t_max, n_points):
    if not 0 < log_t_min < log_t_max:
        raise ValueError("need 1 < t_min < t_max")
    if n_points < 2:
        raise ValueError("need at least two grid points")
    g = np.exp(np.linspace(math.log(log_t_min), math.log(log_t_max), n_points))
    g[0], g[-1] = log_t_min, log_t_max
    return g


def mean_curve(spec: Evaluable, t_min=math.e, t_max=None, n_points=200,
               abs_tol=DEFAULT_ABS_TOL, *, log_t_min=None, log_t_max=None) -> MeanCurve:
    """tau on a grid uniform in log log t, computed in one cumulative pass."""
    lo = log_t_min if log_t_min is not None else math.log(t_min)
    hi = log_t_max if log_t_max is not None else math.log(t_max)
    u = loglog_grid(lo, hi, n_points)
    cum = CumulativeIntegral.build(spec, u, abs_tol)
    return MeanCurve(u, cum.partial_values / u, abs_tol)


class TauFunction(Evaluable):
    """A MeanCurve read as a function of t, linear in log log t between nodes.

    Below the first node the curve is extended by its first value.
    """

    def __init__(self, curve: MeanCurve, name="tau"):
        self.curve = curve
        self.name = name
        self.is_complex = np.iscomplexobj(curve.tau)
        self.log_max = float(curve.log_t[-1])
        self._x = np.log(curve.log_t)

    def eval_u(self, u):
        u = np.asarray(u, dtype=float)
        self.check_horizon(u.max() if u.size else 0.0)
        ll = np.log(np.maximum(u, self.curve.log_t[0]))
        tau = self.curve.tau
        if self.is_complex:
            return np.interp(ll, self._x, tau.real) + 1j * np.interp(ll, self._x, tau.imag)
        return np.interp(ll, self._x, tau)


def tau_function(spec: Evaluable, log_t_max, n_points=2001, abs_tol=DEFAULT_ABS_TOL,
                 log_t_min=1.0):
    """Interpolated tau plus a bound on the interpolation error.

    The bound compares every other node against the interpolant built from
    the remaining nodes, so it is measured at twice the final node spacing.
    """
    curve = mean_curve(spec, log_t_min=log_t_min, log_t_max=log_t_max,
                       n_points=n_points, abs_tol=abs_tol)
    coarse = MeanCurve(curve.log_t[::2], curve.tau[::2], abs_tol)
    approx = TauFunction(coarse).eval_u(curve.log_t[1::2])
    err = float(np.max(np.abs(approx - curve.tau[1::2]))) if n_points > 2 else math.inf
    return TauFunction(curve, f"tau[{spec.name}]"), err
