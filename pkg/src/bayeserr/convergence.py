"""Pathwise small-noise limits of the normalized estimation error.

Along a fixed realization (x, z), the normalized error at noise scale s is

    e(s) = (x - E[X | Y = x + s z]) / s = -z + E[Z | Y = x + s z].

As s -> 0 the limit depends on the signal and noise classes:

* discrete signal, bounded noise density with o(1/|z|) tails: limit 0;
* bounded continuous signal density with integrable noise, or any
  absolutely continuous signal with bounded O(|z|^-a) noise for a > 2:
  limit E[Z] - z;
* a mixture of a discrete and a continuous component with mutually
  singular parts and well-behaved noise: the continuous-component limit
  appears exactly on paths drawn from the continuous component.

This module sweeps seeded paths across decreasing sigma grids, checks the
mixture decomposition against component-conditional estimators, estimates
the limiting second moment of the normalized error (alpha times the noise
variance, with alpha the continuous-component weight), and carries the
curated regularity records for the registry noises.

No convergence rates are asserted a priori: terminal tolerances come from
a logged calibration run (see data/sweep_calibration.json) and acceptance
allows twice the logged values.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional

import numpy as np

from .distributions import (ContinuousPrior, DiscretePrior, MixturePrior,
                            NoiseSpec, Prior, RealizationPath,
                            mixture_components_disjoint, polynomial_tail_bound)
from .errors import DivergentMomentError, InvalidSpecError
from .panels import gl_panels
from .posterior import UNREACHABLE_LOG_FLOOR, posterior_eval_batch

__all__ = [
    "SweepReport",
    "DecompositionReport",
    "DoobRecord",
    "default_sigma_grid",
    "table1_prediction",
    "pathwise_sweep",
    "sweep_paths",
    "decomposition_check",
    "decomposition_paths",
    "mmse_dimension_estimate",
    "mmse_dimension_mc",
    "doob_registry_lookup",
    "load_calibration",
]


def default_sigma_grid(n: int = 40, hi: float = 1.0, lo: float = 1e-3) -> np.ndarray:
    """Geometric grid from hi down to lo (decreasing)."""
    if not (0 < lo < hi and n >= 2):
        raise InvalidSpecError("sigma grid needs 0 < lo < hi and n >= 2")
    return np.geomspace(hi, lo, n)


def _check_sigma_grid(grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise InvalidSpecError("sigma grid must be a 1-d array with >= 2 points")
    if np.any(grid <= 0) or np.any(np.diff(grid) >= 0):
        raise InvalidSpecError("sigma grid must be positive and strictly decreasing")
    ratios = grid[1:] / grid[:-1]
    if np.any(ratios <= 0) or np.any(ratios >= 1):
        raise InvalidSpecError("sigma grid ratio must lie in (0, 1)")
    return grid


@dataclass(eq=False)
class SweepReport:
    """Per-path record of e(s) across a sigma grid with its predicted limit."""

    path: RealizationPath
    sigma_grid: np.ndarray
    e_values: np.ndarray
    predicted_limit: Optional[float]
    table_row: Optional[str]
    terminal_deviation: Optional[float]
    failures: list[tuple[float, str]] = field(default_factory=list)
    second_moment_track: Optional[np.ndarray] = None

    @property
    def deviations(self) -> Optional[np.ndarray]:
        if self.predicted_limit is None:
            return None
        return np.abs(self.e_values - self.predicted_limit)

    def tail_nonincreasing(self, decade: float = 10.0, slack: float = 1e-12,
                           floor: float = 1e-10) -> bool:
        """True when deviations never rise over the final decade of sigma.

        Increases below the floor are quadrature jitter, not growth.
        """
        dev = self.deviations
        if dev is None:
            return False
        tail = self.sigma_grid <= self.sigma_grid[-1] * decade * (1 + 1e-12)
        d = dev[tail]
        d = d[np.isfinite(d)]
        return bool(np.all(np.diff(d) <= slack * (1.0 + d[:-1]) + floor))


@dataclass(eq=False)
class DecompositionReport:
    """|e(s) - e_u(s)| across sigma, against the component-u estimator."""

    path: RealizationPath
    sigma_grid: np.ndarray
    deviations: np.ndarray
    e_values: np.ndarray
    e_component: np.ndarray

    @property
    def terminal_deviation(self) -> float:
        return float(self.deviations[-1])

    def tail_decreasing(self, k: int = 3, slack: float = 1e-12,
                        floor: float = 1e-10) -> bool:
        d = self.deviations[-k:]
        return bool(np.all(np.diff(d) <= slack * (1.0 + d[:-1]) + floor))


def _mixture_continuous_label(prior: MixturePrior) -> Optional[int]:
    kinds = (prior.first.kind, prior.second.kind)
    if kinds == ("discrete", "continuous"):
        return 2
    if kinds == ("continuous", "discrete"):
        return 1
    return None


def table1_prediction(prior: Prior, noise: NoiseSpec,
                      path: RealizationPath) -> tuple[Optional[float], Optional[str]]:
    """Predicted limit of e(s) on this path, with the matched row name.

    Returns (None, None) when no row applies; the sweep still runs and
    reports raw values in that case.
    """
    ez = noise.mean
    if isinstance(prior, DiscretePrior):
        if noise.flags.bounded_density and noise.tail_exponent > 1:
            return 0.0, "discrete"
        return None, None
    if isinstance(prior, ContinuousPrior):
        if prior.bounded_density and prior.continuous_density and noise.flags.in_l1:
            return ez - path.z, "bounded_continuous"
        if (prior.bounded_density and noise.flags.bounded_density
                and noise.tail_exponent > 2):
            return ez - path.z, "abs_continuous_heavy_noise"
        return None, None
    if isinstance(prior, MixturePrior):
        label = _mixture_continuous_label(prior)
        if label is None or not mixture_components_disjoint(prior):
            return None, None
        if not noise.flags.doob:
            return None, None
        if path.u is None:
            raise InvalidSpecError("mixture sweep requires a labeled path")
        limit = (ez - path.z) if path.u == label else 0.0
        return limit, "mixture"
    return None, None


def sweep_paths(paths: list[RealizationPath], prior: Prior, noise: NoiseSpec,
                sigma_grid) -> list[SweepReport]:
    """Sweep many paths at once (vectorized across paths per sigma)."""
    grid = _check_sigma_grid(sigma_grid)
    xs = np.array([p.x for p in paths])
    zs = np.array([p.z for p in paths])
    e = np.full((grid.size, xs.size), np.nan)
    failures: list[list[tuple[float, str]]] = [[] for _ in paths]
    for k, s in enumerate(grid):
        batch = posterior_eval_batch(xs + s * zs, prior, noise, float(s))
        ok = (batch.log_norm > UNREACHABLE_LOG_FLOOR) & np.isfinite(batch.mean)
        e[k, ok] = (xs[ok] - batch.mean[ok]) / s
        for j in np.nonzero(~ok)[0]:
            failures[j].append((float(s), "unreachable or non-finite posterior mean"))
    reports = []
    for j, p in enumerate(paths):
        limit, row = table1_prediction(prior, noise, p)
        term = None
        if limit is not None and np.isfinite(e[-1, j]):
            term = float(abs(e[-1, j] - limit))
        reports.append(SweepReport(path=p, sigma_grid=grid, e_values=e[:, j],
                                   predicted_limit=limit, table_row=row,
                                   terminal_deviation=term, failures=failures[j]))
    return reports


def pathwise_sweep(path: RealizationPath, prior: Prior, noise: NoiseSpec,
                   sigma_grid) -> SweepReport:
    """Sweep a single path across the sigma grid."""
    return sweep_paths([path], prior, noise, sigma_grid)[0]


def deviation_envelope(reports: list[SweepReport]) -> np.ndarray:
    """Per-sigma maximum deviation across a path ensemble."""
    dev = np.stack([r.deviations for r in reports], axis=1)
    with np.errstate(invalid="ignore"):
        return np.nanmax(dev, axis=1)


def envelope_tail_nonincreasing(reports: list[SweepReport], decade: float = 10.0,
                                slack: float = 1e-12, floor: float = 1e-10) -> bool:
    """Scenario-level monotonicity: the deviation envelope over the ensemble
    never rises across the final decade of sigma.

    Individual paths can wiggle when x + sigma z changes sign inside the
    decade; the envelope is the deterministic per-scenario statement."""
    env = deviation_envelope(reports)
    grid = reports[0].sigma_grid
    tail = grid <= grid[-1] * decade * (1 + 1e-12)
    e = env[tail]
    return bool(np.all(np.diff(e) <= slack * (1.0 + e[:-1]) + floor))


def decomposition_paths(paths: list[RealizationPath], prior: MixturePrior,
                        noise: NoiseSpec, sigma_grid) -> list[DecompositionReport]:
    """Deviation |e(s) - e_u(s)| where e_u uses the component-u prior alone."""
    if not isinstance(prior, MixturePrior):
        raise InvalidSpecError("decomposition check requires a mixture prior")
    if any(p.u is None for p in paths):
        raise InvalidSpecError("decomposition check requires labeled paths")
    grid = _check_sigma_grid(sigma_grid)
    xs = np.array([p.x for p in paths])
    zs = np.array([p.z for p in paths])
    us = np.array([p.u for p in paths])
    e_full = np.full((grid.size, xs.size), np.nan)
    e_comp = np.full((grid.size, xs.size), np.nan)
    for k, s in enumerate(grid):
        y = xs + s * zs
        full = posterior_eval_batch(y, prior, noise, float(s))
        e_full[k] = (xs - full.mean) / s
        for label, comp in ((1, prior.first), (2, prior.second)):
            sel = us == label
            if np.any(sel):
                part = posterior_eval_batch(y[sel], comp, noise, float(s))
                e_comp[k, sel] = (xs[sel] - part.mean) / s
    dev = np.abs(e_full - e_comp)
    return [DecompositionReport(path=p, sigma_grid=grid, deviations=dev[:, j],
                                e_values=e_full[:, j], e_component=e_comp[:, j])
            for j, p in enumerate(paths)]


def decomposition_check(path: RealizationPath, prior: MixturePrior,
                        noise: NoiseSpec, sigma_grid) -> DecompositionReport:
    return decomposition_paths([path], prior, noise, sigma_grid)[0]


# ---------------------------------------------------------------------------
# Second moment of the normalized error
# ---------------------------------------------------------------------------

def _prior_quad_nodes(prior: Prior, sigma: float):
    """(points, weights) pairs for the outer expectation over the signal."""
    out = []
    for log_w, leaf in prior.leaves():
        if not math.isfinite(log_w):
            continue
        wc = math.exp(log_w)
        if isinstance(leaf, DiscretePrior):
            out.append((leaf.locs, wc * leaf.masses))
        else:
            a, b = leaf.support_hull_eff()
            width = b - a
            # Boundary layers of thickness ~sigma need their own cells.
            offs = np.concatenate([np.geomspace(max(sigma / 8.0, 1e-12 * width),
                                                width / 2.0, 24), [0.0]])
            edges = np.unique(np.concatenate([
                a + offs, b - offs, np.linspace(a, b, 33)]))
            nodes, wts = gl_panels(edges[None, :])
            x = nodes[0].ravel()
            out.append((x, wc * (wts[0].ravel() * leaf.pdf(x))))
    return out


def _noise_quad_nodes(noise: NoiseSpec):
    if noise.window is not None:
        edges = np.linspace(-noise.window, noise.window, 33)
        if noise.kinks:
            edges = np.unique(np.concatenate([edges, np.asarray(noise.kinks)]))
    else:
        # Polynomial tails: octave panels out to where the second-moment
        # tail integral is negligible.
        lad = np.concatenate([[0.0], np.geomspace(0.5, 2.0 ** 14, 29)])
        edges = np.unique(np.concatenate([-lad, lad]))
    nodes, wts = gl_panels(edges[None, :])
    z = nodes[0].ravel()
    return z, wts[0].ravel() * noise.pdf(z)


def mmse_dimension_estimate(prior: Prior, noise: NoiseSpec, sigma: float,
                            method: str = "quadrature", n: int = 10 ** 6,
                            seed: int = 0) -> float:
    """E of the squared normalized error at this sigma.

    The quadrature method integrates the conditional second moment
    Var(X|Y=y)/sigma^2 against the law of Y (as a nested expectation over
    the signal and the noise); the Monte-Carlo method averages e(s)^2 over n
    seeded draws.  The small-sigma limit is the continuous-component weight
    times Var(Z).
    """
    if math.isfinite(noise.tail_exponent) and noise.tail_exponent <= 3:
        raise DivergentMomentError(
            "mmse_dimension_estimate requires noise with a finite variance")
    if method == "monte_carlo":
        return mmse_dimension_mc(prior, noise, sigma, n, seed)[0]
    if method != "quadrature":
        raise InvalidSpecError(f"unknown method {method!r}")
    from .posterior import CurveInterpolator

    z, wz = _noise_quad_nodes(noise)
    total = 0.0
    for x, wx in _prior_quad_nodes(prior, sigma):
        y = (x[:, None] + sigma * z[None, :]).ravel()
        # The posterior variance is smooth on the y window this leaf can
        # reach, so a verified interpolant replaces per-node engine calls.
        interp = CurveInterpolator.build(prior, noise, sigma,
                                         float(np.min(y)), float(np.max(y)))
        if interp is not None:
            var = interp(y)[1]
        else:
            batch = posterior_eval_batch(y, prior, noise, sigma)
            var = np.maximum(batch.variance, 0.0)
        var = np.where(np.isfinite(var), var, 0.0).reshape(x.size, z.size)
        total += float(wx @ var @ wz)
    return total / sigma ** 2


def mmse_dimension_mc(prior: Prior, noise: NoiseSpec, sigma: float,
                      n: int = 10 ** 6, seed: int = 0) -> tuple[float, float]:
    """(estimate, standard error) of E[e(s)^2] from n seeded samples."""
    from .mc_oracle import simulate_errors

    emp = simulate_errors(prior, noise, sigma, n, seed)
    e2 = (emp.samples / sigma) ** 2
    return float(np.mean(e2)), float(np.std(e2, ddof=1) / math.sqrt(n))


# ---------------------------------------------------------------------------
# Noise regularity registry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DoobRecord:
    """Curated regularity conditions A1-A5 with fresh numeric spot checks.

    A1 (f_Z and |z| f_Z bounded) and the tail decay are the only conditions
    a finite computation can probe; A2-A5 are uniform asymptotic statements
    and stay analytic metadata.
    """

    noise_name: str
    conditions: dict[str, str]  # each in {analytic_true, analytic_false, unchecked}
    sup_density: float
    sup_z_density: float
    tail_fit_exponent: float
    tail_consistent: bool

    @property
    def is_doob(self) -> bool:
        return all(v == "analytic_true" for v in self.conditions.values())


_DOOB_TABLE = {
    "gaussian": {f"A{i}": "analytic_true" for i in range(1, 6)},
    "laplace": {"A1": "analytic_true", **{f"A{i}": "unchecked" for i in range(2, 6)}},
    "uniform": {"A1": "analytic_true", **{f"A{i}": "unchecked" for i in range(2, 6)}},
    "student_t": {"A1": "analytic_true", **{f"A{i}": "unchecked" for i in range(2, 6)}},
}


def doob_registry_lookup(noise: NoiseSpec) -> DoobRecord:
    """Regularity record for a noise family, never a guess for unknown ones."""
    conditions = _DOOB_TABLE.get(noise.name,
                                 {f"A{i}": "unchecked" for i in range(1, 6)})
    lo, hi = noise.support
    z = np.linspace(max(lo, -1e3), min(hi, 1e3), 20001)
    f = noise.pdf(z)
    sup_f = float(np.max(f))
    sup_zf = float(np.max(np.abs(z) * f))
    # Tail decay fit: slope of log f against log |z| over [10, 1000].
    zt = np.geomspace(10.0, 1e3, 121)
    zt = zt[(zt > lo) & (zt < hi)]
    fit = math.inf
    if zt.size >= 8:
        ft = noise.pdf(zt)
        mask = ft > 1e-290
        if mask.sum() >= 8:
            slope = np.polyfit(np.log(zt[mask]), np.log(ft[mask]), 1)[0]
            fit = -float(slope)
    if math.isfinite(noise.tail_exponent):
        consistent = abs(fit - noise.tail_exponent) <= 0.2 * noise.tail_exponent
        consistent = consistent and polynomial_tail_bound(noise) < math.inf
    else:
        consistent = fit > 10.0 or not math.isfinite(fit)
    return DoobRecord(noise_name=noise.name, conditions=conditions,
                      sup_density=sup_f, sup_z_density=sup_zf,
                      tail_fit_exponent=fit, tail_consistent=bool(consistent))


# ---------------------------------------------------------------------------
# Calibration data
# ---------------------------------------------------------------------------

def load_calibration() -> dict:
    """Logged terminal deviations from the calibration run (see scripts/)."""
    ref = resources.files("bayeserr.data").joinpath("sweep_calibration.json")
    with ref.open("r", encoding="utf-8") as fh:
        return json.load(fh)
