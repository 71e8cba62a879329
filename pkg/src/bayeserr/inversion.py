"""Functional inverse of the posterior-mean curve and its derivative.

A strictly increasing curve y -> E[X|Y=y] has a well-defined inverse on its
open range.  The inverse is computed by a safeguarded bracketing solver:
seeds come from a tabulation of the curve extended well beyond the build
grid, then Newton steps (slope from the Gaussian variance identity when
available, secant otherwise) run inside a maintained bracket with bisection
fallback.  The same solver serves scalar queries and the large solve
batches of the error-density pipeline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (InvalidSpecError, NonInvertibleError, OutOfRangeError,
                     SlopeUnderflowError)
from .posterior import PosteriorCurve

__all__ = [
    "InverseMap",
    "build_inverse",
    "invert",
    "inverse_derivative",
    "inverse_derivative_via_variance",
    "range_of",
    "curve_from_function",
]

SLOPE_FLOOR = 1e-13
_RANGE_CONVERGED = 1e-10
_MAX_DOUBLINGS = 60
_GUARD_FRACTION = 1e-6


def range_of(curve: PosteriorCurve) -> tuple[float, float]:
    """Open interval (lim_{y->-inf} mean, lim_{y->+inf} mean) of the curve.

    Estimated by extending the evaluation grid outward with doubling steps
    until successive means change by less than 1e-10, then snapped onto the
    prior support hull (the mathematical limit for full-support noise).
    Unbounded prior support yields infinite sentinel endpoints; a flat curve
    yields an empty interval.
    """
    if curve.certificate not in ("strict", "nondecreasing"):
        raise NonInvertibleError("range_of: curve certificate is 'failed'")
    override = getattr(curve, "_range_override", None)
    if override is not None:
        return tuple(override)
    hull_lo, hull_hi = curve.prior.support_hull()
    finite = np.isfinite(curve.means)
    if not np.any(finite):
        raise InvalidSpecError("range_of: curve has no evaluable points")
    ms = curve.means[finite]
    spread = float(ms[-1] - ms[0])
    if spread <= _RANGE_CONVERGED and hull_lo == hull_hi:
        c = float(ms[0])
        return c, c  # empty open interval

    def _limit(side: int) -> float:
        hull = hull_hi if side > 0 else hull_lo
        if not math.isfinite(hull):
            return math.inf * side
        est = _extend_limit(curve, side, hull)
        # Snap: for additive full-support noise the limit is the hull end.
        # The window is loose because far outside the support the posterior
        # collapses to a boundary layer the quadrature resolves only
        # approximately; the true limit there is the hull end regardless.
        if abs(est - hull) <= 1e-3 * (1.0 + abs(hull)):
            return hull
        return est

    return _limit(-1), _limit(+1)


def _extend_limit(curve: PosteriorCurve, side: int, hull: float) -> float:
    ys = curve.ys[np.isfinite(curve.means)]
    y = float(ys[-1] if side > 0 else ys[0])
    step = max(curve.sigma * curve.noise.sd, 1e-3 * (1.0 + abs(y)))
    last = float(curve.means[np.isfinite(curve.means)][-1 if side > 0 else 0])
    for _ in range(_MAX_DOUBLINGS):
        y_next = y + side * step
        batch = curve.query_batch([y_next])
        if not np.isfinite(batch.mean[0]):
            return last  # ran off the reachable set (bounded noise support)
        cur = float(batch.mean[0])
        if abs(cur - hull) <= 1e-9 * (1.0 + abs(hull)):
            return cur
        if abs(cur - last) < _RANGE_CONVERGED:
            return cur
        last, y = cur, y_next
        step *= 2.0
    return last


@dataclass(eq=False)
class InverseMap:
    """Queryable inverse of a strictly increasing posterior-mean curve.

    range_open is the open interval on which queries are defined; the guard
    width marks the edge band inside which the derivative of the inverse can
    blow up and downstream integrands cap it.
    """

    source: PosteriorCurve
    range_open: tuple[float, float]
    guard: float
    _tab_y: np.ndarray
    _tab_m: np.ndarray

    def __contains__(self, x: float) -> bool:
        lo, hi = self.range_open
        return lo < x < hi

    def query(self, x: float) -> float:
        """y with posterior_mean(y) = x, defined exactly on the open range."""
        lo, hi = self.range_open
        if not lo < x < hi:
            raise OutOfRangeError(f"x={x!r} outside the open range ({lo!r}, {hi!r})")
        y, _, _ = self.solve_batch(np.asarray([x], dtype=float))
        return float(y[0])

    def derivative(self, x: float) -> float:
        """d(inverse)/dx > 0, the reciprocal of the curve slope at query(x)."""
        y = self.query(x)
        s = self.source.slope(y)
        if not s > SLOPE_FLOOR:
            raise SlopeUnderflowError(f"curve slope {s!r} at y={y!r} below {SLOPE_FLOOR}")
        return 1.0 / s

    def seed(self, v: np.ndarray) -> np.ndarray:
        """Interpolated first guess for the inverse (no curve evaluations)."""
        v = np.asarray(v, dtype=float)
        return np.interp(v, self._tab_m, self._tab_y)

    def solve_batch(self, v: np.ndarray, max_iter: int = 40, rtol: float = 1e-12):
        """Vectorized inversion of the curve at values v.

        Safeguarded Newton inside per-element brackets taken from the curve
        tabulation, with bisection fallback; converged elements drop out of
        the working set.  Returns (y, mean, variance); entries outside the
        open range are NaN.  Targets beyond the tabulated saturation of the
        curve (reachable only within float rounding of the range edges) are
        clamped onto the outermost tabulated ordinate.
        """
        v = np.asarray(v, dtype=float)
        out_y = np.full(v.shape, np.nan)
        out_m = np.full(v.shape, np.nan)
        out_var = np.full(v.shape, np.nan)
        lo, hi = self.range_open
        ok = (v > lo) & (v < hi)
        if not np.any(ok):
            return out_y, out_m, out_var
        vv = np.clip(v[ok], self._tab_m[0], self._tab_m[-1])
        tm, ty = self._tab_m, self._tab_y
        j = np.clip(np.searchsorted(tm, vv), 1, tm.size - 1)
        ylo = ty[j - 1].copy()
        yhi = ty[j].copy()
        y = ylo + (vv - tm[j - 1]) * (yhi - ylo) / (tm[j] - tm[j - 1])
        curve = self.source
        sigma2 = curve.sigma ** 2
        gaussian = curve.noise.name == "gaussian"
        tol = rtol * (1.0 + np.abs(vv))

        n = vv.size
        res_y = np.empty(n)
        res_m = np.empty(n)
        res_v = np.empty(n)
        idx = np.arange(n)
        prev_y = np.full(n, np.nan)
        prev_r = np.full(n, np.nan)
        for _ in range(max_iter):
            batch = curve.query_batch(y)
            mean = batch.mean
            var = np.maximum(batch.variance, 0.0)
            r = mean - vv[idx]
            done = np.abs(r) <= tol[idx]
            done_idx = idx[done]
            res_y[done_idx] = y[done]
            res_m[done_idx] = mean[done]
            res_v[done_idx] = var[done]
            if np.all(done):
                idx = idx[:0]
                break
            keep = ~done
            ylo = np.where(r < 0, y, ylo)[keep]
            yhi = np.where(r > 0, y, yhi)[keep]
            if gaussian:
                slope = var[keep] / sigma2
            else:
                dy = y - prev_y[idx]
                dr = r - prev_r[idx]
                with np.errstate(divide="ignore", invalid="ignore"):
                    slope = np.where(np.abs(dy) > 0, dr / np.where(dy == 0, 1.0, dy), 0.0)[keep]
            prev_y[idx] = y
            prev_r[idx] = r
            idx = idx[keep]
            y_cur, r_cur = y[keep], r[keep]
            with np.errstate(divide="ignore", invalid="ignore"):
                y_new = y_cur - r_cur / slope
            bad = ~np.isfinite(y_new) | (y_new <= ylo) | (y_new >= yhi)
            y = np.where(bad, 0.5 * (ylo + yhi), y_new)
        if idx.size:
            batch = curve.query_batch(y)
            res_y[idx] = y
            res_m[idx] = batch.mean
            res_v[idx] = np.maximum(batch.variance, 0.0)
        out_y[ok] = res_y
        out_m[ok] = res_m
        out_var[ok] = res_v
        return out_y, out_m, out_var


def _extended_tab(curve: PosteriorCurve):
    """Curve tabulation padded far beyond the build grid for inverse seeds."""
    sigma, sd = curve.sigma, curve.noise.sd
    y0, y1 = float(curve.ys[0]), float(curve.ys[-1])
    pad = sigma * sd * np.geomspace(1.0, 256.0, 25)
    extra = np.concatenate([y0 - pad[::-1], y1 + pad])
    ys = np.unique(np.concatenate([curve.ys, extra]))
    batch = curve.query_batch(ys)
    m = batch.mean
    keep = np.isfinite(m)
    ys, m = ys[keep], m[keep]
    inc = np.concatenate([[True], np.diff(m) > 0])
    # Drop saturated duplicates so the tabulated means stay strictly increasing.
    return ys[inc], m[inc]


def build_inverse(curve: PosteriorCurve) -> InverseMap:
    """Construct (and cache on the curve) the inverse map of a strict curve."""
    if curve._inverse_cache is not None:
        return curve._inverse_cache
    if curve.certificate != "strict":
        raise NonInvertibleError(
            f"curve certificate is {curve.certificate!r}; inversion requires 'strict'")
    lo, hi = range_of(curve)
    if not lo < hi:
        raise NonInvertibleError("curve range is empty")
    guard = _GUARD_FRACTION * (hi - lo) if math.isfinite(hi - lo) else 0.0
    ty, tm = _extended_tab(curve)
    if ty.size < 2:
        raise NonInvertibleError("curve tabulation has no increasing segment")
    inv = InverseMap(source=curve, range_open=(lo, hi), guard=guard,
                     _tab_y=ty, _tab_m=tm)
    curve._inverse_cache = inv
    return inv


def invert(curve: PosteriorCurve, x: float) -> float:
    """y with |posterior_mean(y) - x| below 1e-11 scale, on the open range."""
    return build_inverse(curve).query(x)


def inverse_derivative(curve: PosteriorCurve, x: float) -> float:
    """Derivative of the inverse at x, from the numeric slope of the curve."""
    return build_inverse(curve).derivative(x)


def inverse_derivative_via_variance(curve: PosteriorCurve, x: float) -> float:
    """Gaussian-noise route: sigma^2 / Var(X|Y = inverse(x)).

    The variance identity ties the curve slope to the posterior variance, so
    this must agree with :func:`inverse_derivative` for Gaussian noise.
    """
    if curve.noise.name != "gaussian":
        raise InvalidSpecError("variance-identity derivative requires Gaussian noise")
    y = build_inverse(curve).query(x)
    _, var = curve.query(y)
    if not var > 0:
        raise SlopeUnderflowError(f"posterior variance {var!r} at y={y!r} is not positive")
    return curve.sigma ** 2 / var


def curve_from_function(fn, y_range: tuple[float, float], n_points: int = 513,
                        range_hint: Optional[tuple[float, float]] = None) -> PosteriorCurve:
    """Adapter: wrap an arbitrary estimator map y -> g(y) as a curve.

    Lets the general error-density formula run with user-supplied invertible
    estimators.  The wrapped curve has no posterior variance (NaN) so only
    the numeric-slope derivative path applies.
    """
    from .distributions import gaussian_noise, point_mass

    ys = np.linspace(y_range[0], y_range[1], n_points)
    means = np.asarray([float(fn(y)) for y in ys])

    class _FnCurve(PosteriorCurve):
        def query(self, y: float):
            return float(fn(y)), math.nan

        def query_batch(self, y):
            from .posterior import PosteriorBatch
            y = np.atleast_1d(np.asarray(y, dtype=float))
            m = np.asarray([float(fn(t)) for t in y])
            return PosteriorBatch(np.zeros_like(m), m, np.full_like(m, np.nan),
                                  np.ones(m.shape, dtype=bool))

    diffs = np.diff(means)
    if np.all(diffs > 1e-13):
        cert = "strict"
    elif np.all(diffs >= -1e-13):
        cert = "nondecreasing"
    else:
        cert = "failed"
    curve = _FnCurve(prior=point_mass(0.0), noise=gaussian_noise(), sigma=1.0,
                     ys=ys, means=means, variances=np.full_like(means, np.nan),
                     certificate=cert)
    if range_hint is not None:
        curve._range_override = range_hint
    return curve
