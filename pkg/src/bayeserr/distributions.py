"""Distribution specifications for the additive-noise estimation model.

The observation model everywhere downstream is ``Y = X + sigma * Z`` with
``X`` independent of ``Z``.  This module provides:

* :class:`NoiseSpec`, a density for ``Z`` carrying the metadata the numeric
  layers need: moments, tail-decay exponent, analytic property flags, and a
  safe integration half-width.
* Prior specifications for ``X``: discrete atom lists, continuous densities
  on an interval, and two-component mixtures.
* Seeded sampling, moments, and numeric screens (strict concavity of
  ``log f_Z``, polynomial tail bounds).

Registry factories cover the families used by the experiment suite:
Gaussian, Laplace, uniform and Student-t noise; point masses, binary and
general atom sets, Gaussian, uniform and scaled-Beta priors, and mixtures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate
from scipy.special import betaln

from .errors import DivergentMomentError, InvalidSpecError

__all__ = [
    "NoiseFlags",
    "NoiseSpec",
    "DiscretePrior",
    "ContinuousPrior",
    "MixturePrior",
    "RealizationPath",
    "gaussian_noise",
    "laplace_noise",
    "uniform_noise",
    "student_t_noise",
    "make_noise",
    "noise_registry",
    "discrete_prior",
    "point_mass",
    "binary_prior",
    "gaussian_prior",
    "uniform_prior",
    "beta_prior",
    "mixture_prior",
    "sample",
    "moments",
    "check_strict_log_concavity",
    "polynomial_tail_bound",
    "draw_path",
    "draw_paths",
    "mixture_components_disjoint",
]

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

# Effective support of an unbounded prior, in units of its own scale.  At 14
# standard deviations a Gaussian carries < 1e-43 of its mass outside.
_EFFECTIVE_SD_SPAN = 14.0


def _rng_from_seed(seed: int) -> np.random.Generator:
    """Philox generator keyed by a single integer seed (counter-based)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def _quad_split(f, a: float, b: float, points: Sequence[float] = ()) -> float:
    """Integrate f over (a, b), splitting at the given interior points."""
    cuts = [a] + sorted(p for p in points if a < p < b) + [b]
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        val, _ = integrate.quad(f, lo, hi, epsabs=1e-12, epsrel=1e-12, limit=300)
        total += val
    return total


# ---------------------------------------------------------------------------
# Noise
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NoiseFlags:
    """Analytic properties of the noise, curated per family.

    These are metadata, not numeric results: the numeric screens below can
    spot-check some of them but cannot establish the asymptotic ones.
    """

    bounded_density: bool
    strictly_log_concave: bool
    doob: bool
    in_l1: bool


@dataclass(frozen=True, eq=False)
class NoiseSpec:
    """Density of the noise Z with the metadata used downstream.

    ``window`` is a half-width W such that the mass of f_Z outside [-W, W]
    is below 1e-14; it bounds the integration window used by the posterior
    quadrature.  ``None`` marks heavy-tailed families that need full-support
    integration with geometric panels.
    """

    name: str
    pdf: Callable[[np.ndarray], np.ndarray]
    log_pdf: Callable[[np.ndarray], np.ndarray]
    support: tuple[float, float]
    mean: float
    variance: float
    tail_exponent: float  # alpha with f_Z(z) = O(|z|^-alpha); inf for faster decay
    flags: NoiseFlags
    window: Optional[float]
    kinks: tuple[float, ...] = ()
    sampler: Callable[[np.random.Generator, int], np.ndarray] = None

    @property
    def sd(self) -> float:
        return math.sqrt(self.variance)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.sampler(rng, n)


def _tail_segments(a: float, b: float, factor: float) -> list[tuple[float, float]]:
    """Geometric extension segments beyond [a, b] on both sides, a < 0 < b."""
    segs = []
    hi = b
    while hi < b * factor:
        segs.append((hi, hi * 100.0))
        hi *= 100.0
    lo = a
    while lo > a * factor:
        segs.append((lo * 100.0, lo))
        lo *= 100.0
    return segs


def _validate_noise(spec: NoiseSpec) -> NoiseSpec:
    lo, hi = spec.support
    if not lo < hi:
        raise InvalidSpecError(f"noise {spec.name!r}: degenerate support {spec.support}")
    a = lo if math.isfinite(lo) else -60.0 * max(spec.sd, 1.0)
    b = hi if math.isfinite(hi) else 60.0 * max(spec.sd, 1.0)
    pts = list(spec.kinks) + [spec.mean]
    heavy_tail = math.isfinite(spec.tail_exponent)

    def _piece(f, segments):
        out = 0.0
        for p, q in segments:
            val, _ = integrate.quad(f, p, q, epsabs=1e-13, epsrel=1e-10, limit=300)
            out += val
        return out

    pdf = lambda z: float(spec.pdf(np.asarray(z)))
    total = _quad_split(pdf, a, b, pts)
    if heavy_tail:
        total += _piece(pdf, _tail_segments(a, b, 1e6))
    if abs(total - 1.0) > 1e-8:
        raise InvalidSpecError(f"noise {spec.name!r}: density integrates to {total!r}")

    m1 = _quad_split(lambda z: z * pdf(z), a, b, pts)
    if abs(m1 - spec.mean) > 1e-6 * max(1.0, abs(spec.mean)):
        raise InvalidSpecError(f"noise {spec.name!r}: declared mean {spec.mean} vs quadrature {m1}")

    if heavy_tail and spec.tail_exponent <= 3:
        return spec  # variance undefined, nothing more to check
    m2_f = lambda z: (z - spec.mean) ** 2 * pdf(z)
    m2 = _quad_split(m2_f, a, b, pts)
    if heavy_tail:
        m2 += _piece(m2_f, _tail_segments(a, b, 1e8))
    if abs(m2 - spec.variance) > 1e-6 * max(1.0, spec.variance):
        raise InvalidSpecError(
            f"noise {spec.name!r}: declared variance {spec.variance} vs quadrature {m2}")
    return spec


def make_noise(name, pdf, log_pdf, support, mean, variance, tail_exponent, flags,
               window, kinks=(), sampler=None) -> NoiseSpec:
    """Build and validate a custom noise spec (density must integrate to 1)."""
    spec = NoiseSpec(name, pdf, log_pdf, tuple(support), float(mean), float(variance),
                     float(tail_exponent), flags, window, tuple(kinks), sampler)
    return _validate_noise(spec)


def gaussian_noise() -> NoiseSpec:
    """Standard Gaussian noise."""
    def log_pdf(z):
        z = np.asarray(z, dtype=float)
        return -0.5 * z * z - _LOG_SQRT_2PI

    return NoiseSpec(
        name="gaussian",
        pdf=lambda z: np.exp(log_pdf(z)),
        log_pdf=log_pdf,
        support=(-math.inf, math.inf),
        mean=0.0,
        variance=1.0,
        tail_exponent=math.inf,
        flags=NoiseFlags(bounded_density=True, strictly_log_concave=True, doob=True, in_l1=True),
        window=10.0,
        sampler=lambda rng, n: rng.standard_normal(n),
    )


def laplace_noise() -> NoiseSpec:
    """Unit-scale Laplace noise, density exp(-|z|)/2."""
    def log_pdf(z):
        z = np.asarray(z, dtype=float)
        return -np.abs(z) - math.log(2.0)

    return NoiseSpec(
        name="laplace",
        pdf=lambda z: np.exp(log_pdf(z)),
        log_pdf=log_pdf,
        support=(-math.inf, math.inf),
        mean=0.0,
        variance=2.0,
        tail_exponent=math.inf,
        flags=NoiseFlags(bounded_density=True, strictly_log_concave=False, doob=False, in_l1=True),
        window=40.0,
        kinks=(0.0,),
        sampler=lambda rng, n: rng.laplace(0.0, 1.0, n),
    )


def uniform_noise(half_width: float = 1.0) -> NoiseSpec:
    """Uniform noise on (-half_width, half_width)."""
    if half_width <= 0:
        raise InvalidSpecError("uniform noise: half_width must be positive")
    h = float(half_width)
    logc = -math.log(2.0 * h)

    def log_pdf(z):
        z = np.asarray(z, dtype=float)
        return np.where(np.abs(z) < h, logc, -np.inf)

    return NoiseSpec(
        name="uniform",
        pdf=lambda z: np.exp(log_pdf(z)),
        log_pdf=log_pdf,
        support=(-h, h),
        mean=0.0,
        variance=h * h / 3.0,
        tail_exponent=math.inf,
        flags=NoiseFlags(bounded_density=True, strictly_log_concave=False, doob=False, in_l1=True),
        window=h,
        sampler=lambda rng, n: rng.uniform(-h, h, n),
    )


def student_t_noise(df: float = 3.0) -> NoiseSpec:
    """Student-t noise; tail exponent df + 1, variance df/(df-2) for df > 2."""
    if df <= 2:
        raise InvalidSpecError("student_t noise: df must exceed 2 so the variance exists")
    nu = float(df)
    logc = math.lgamma((nu + 1) / 2) - math.lgamma(nu / 2) - 0.5 * math.log(nu * math.pi)

    def log_pdf(z):
        z = np.asarray(z, dtype=float)
        return logc - 0.5 * (nu + 1) * np.log1p(z * z / nu)

    return NoiseSpec(
        name="student_t",
        pdf=lambda z: np.exp(log_pdf(z)),
        log_pdf=log_pdf,
        support=(-math.inf, math.inf),
        mean=0.0,
        variance=nu / (nu - 2.0),
        tail_exponent=nu + 1.0,
        flags=NoiseFlags(bounded_density=True, strictly_log_concave=False, doob=False, in_l1=True),
        window=None,
        sampler=lambda rng, n: rng.standard_t(nu, n),
    )


def noise_registry() -> dict[str, Callable[..., NoiseSpec]]:
    return {
        "gaussian": gaussian_noise,
        "laplace": laplace_noise,
        "uniform": uniform_noise,
        "student_t": student_t_noise,
    }


# ---------------------------------------------------------------------------
# Priors
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DiscretePrior:
    """Atom list prior; masses sum to 1, locations strictly increasing."""

    locs: np.ndarray
    masses: np.ndarray
    log_masses: np.ndarray = field(init=False, repr=False)

    kind = "discrete"

    def __post_init__(self):
        locs = np.asarray(self.locs, dtype=float)
        masses = np.asarray(self.masses, dtype=float)
        if locs.ndim != 1 or locs.size == 0 or locs.shape != masses.shape:
            raise InvalidSpecError("discrete prior: need matching 1-d atom arrays")
        if np.any(masses <= 0):
            raise InvalidSpecError("discrete prior: all masses must be positive")
        if abs(masses.sum() - 1.0) > 1e-12:
            raise InvalidSpecError(f"discrete prior: masses sum to {masses.sum()!r}")
        if locs.size > 1 and np.any(np.diff(locs) <= 0):
            raise InvalidSpecError("discrete prior: locations must be strictly increasing")
        object.__setattr__(self, "locs", locs)
        object.__setattr__(self, "masses", masses)
        object.__setattr__(self, "log_masses", np.log(masses))

    def support_hull(self) -> tuple[float, float]:
        return float(self.locs[0]), float(self.locs[-1])

    def support_hull_eff(self) -> tuple[float, float]:
        return self.support_hull()

    def leaves(self):
        return [(0.0, self)]

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.choice(self.locs, size=n, p=self.masses)


@dataclass(frozen=True, eq=False)
class ContinuousPrior:
    """Continuous prior: a density on an interval.

    ``support`` is the declared support (endpoints may be infinite);
    ``support_eff`` is the finite interval actually integrated over, chosen
    at construction so the truncated mass is negligible.
    """

    name: str
    pdf: Callable[[np.ndarray], np.ndarray]
    log_pdf: Callable[[np.ndarray], np.ndarray]
    support: tuple[float, float]
    support_eff: tuple[float, float]
    bounded_density: bool
    continuous_density: bool  # continuity of f_X on all of R
    sampler: Callable[[np.random.Generator, int], np.ndarray] = None

    kind = "continuous"

    def __post_init__(self):
        a, b = self.support_eff
        if not (math.isfinite(a) and math.isfinite(b) and a < b):
            raise InvalidSpecError(f"continuous prior {self.name!r}: bad effective support")
        total = _quad_split(lambda x: float(self.pdf(np.asarray(x))), a, b)
        if abs(total - 1.0) > 1e-8:
            raise InvalidSpecError(
                f"continuous prior {self.name!r}: density integrates to {total!r}")
        if self.sampler is None:
            object.__setattr__(self, "sampler", _tabulated_sampler(self))

    def support_hull(self) -> tuple[float, float]:
        return self.support

    def support_hull_eff(self) -> tuple[float, float]:
        return self.support_eff

    def leaves(self):
        return [(0.0, self)]

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.sampler(rng, n)


def _tabulated_sampler(prior: ContinuousPrior):
    """Inverse-CDF sampler on a fine grid, for priors without a native one."""
    a, b = prior.support_eff
    grid = np.linspace(a, b, 16385)
    f = prior.pdf(grid)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (f[1:] + f[:-1]) * np.diff(grid))])
    cdf /= cdf[-1]
    # Strictly increasing segment for interpolation.
    keep = np.concatenate([[True], np.diff(cdf) > 0])
    g, c = grid[keep], cdf[keep]

    def sampler(rng, n):
        return np.interp(rng.random(n), c, g)

    return sampler


@dataclass(frozen=True, eq=False)
class MixturePrior:
    """Two-component mixture: P[U=1] = alpha picks ``first``."""

    first: "Prior"
    second: "Prior"
    alpha: float

    kind = "mixture"

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise InvalidSpecError(f"mixture prior: alpha {self.alpha} outside [0, 1]")

    def support_hull(self) -> tuple[float, float]:
        a1, b1 = self.first.support_hull()
        a2, b2 = self.second.support_hull()
        if self.alpha == 1.0:
            return a1, b1
        if self.alpha == 0.0:
            return a2, b2
        return min(a1, a2), max(b1, b2)

    def support_hull_eff(self) -> tuple[float, float]:
        a1, b1 = self.first.support_hull_eff()
        a2, b2 = self.second.support_hull_eff()
        if self.alpha == 1.0:
            return a1, b1
        if self.alpha == 0.0:
            return a2, b2
        return min(a1, a2), max(b1, b2)

    def leaves(self):
        out = []
        for w, comp in ((self.alpha, self.first), (1.0 - self.alpha, self.second)):
            logw = math.log(w) if w > 0 else -math.inf
            for lw, leaf in comp.leaves():
                out.append((logw + lw, leaf))
        return out

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.sample_labeled(rng, n)[0]

    def sample_labeled(self, rng: np.random.Generator, n: int):
        """Draw (values, labels) with labels in {1, 2}."""
        s1 = self.first.sample(rng, n)
        s2 = self.second.sample(rng, n)
        pick_first = rng.random(n) < self.alpha
        u = np.where(pick_first, 1, 2)
        return np.where(pick_first, s1, s2), u


Prior = DiscretePrior | ContinuousPrior | MixturePrior


def mixture_components_disjoint(prior: MixturePrior, gap: float = 0.0) -> bool:
    """True when the component support hulls are disjoint (with optional gap)."""
    a1, b1 = prior.first.support_hull_eff()
    a2, b2 = prior.second.support_hull_eff()
    return b1 + gap < a2 or b2 + gap < a1


# -- prior factories --------------------------------------------------------

def discrete_prior(atoms: Sequence[tuple[float, float]]) -> DiscretePrior:
    """Prior from (location, mass) pairs."""
    atoms = sorted(atoms)
    locs = np.array([a[0] for a in atoms], dtype=float)
    masses = np.array([a[1] for a in atoms], dtype=float)
    return DiscretePrior(locs, masses)


def point_mass(value: float) -> DiscretePrior:
    return DiscretePrior(np.array([float(value)]), np.array([1.0]))


def binary_prior(p: float, lo: float = -1.0, hi: float = 1.0) -> DiscretePrior:
    """P(X = hi) = p = 1 - P(X = lo)."""
    if not 0.0 < p < 1.0:
        raise InvalidSpecError("binary prior: p must be in (0, 1)")
    return discrete_prior([(lo, 1.0 - p), (hi, p)])


def gaussian_prior(mean: float = 0.0, sd: float = 1.0) -> ContinuousPrior:
    if sd <= 0:
        raise InvalidSpecError("gaussian prior: sd must be positive")
    mu, s = float(mean), float(sd)

    def log_pdf(x):
        x = np.asarray(x, dtype=float)
        t = (x - mu) / s
        return -0.5 * t * t - _LOG_SQRT_2PI - math.log(s)

    return ContinuousPrior(
        name=f"gaussian(mean={mu}, sd={s})",
        pdf=lambda x: np.exp(log_pdf(x)),
        log_pdf=log_pdf,
        support=(-math.inf, math.inf),
        support_eff=(mu - _EFFECTIVE_SD_SPAN * s, mu + _EFFECTIVE_SD_SPAN * s),
        bounded_density=True,
        continuous_density=True,
        sampler=lambda rng, n: rng.normal(mu, s, n),
    )


def uniform_prior(lo: float, hi: float) -> ContinuousPrior:
    if not lo < hi:
        raise InvalidSpecError("uniform prior: need lo < hi")
    a, b = float(lo), float(hi)
    logc = -math.log(b - a)

    def log_pdf(x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= a) & (x <= b), logc, -np.inf)

    return ContinuousPrior(
        name=f"uniform({a}, {b})",
        pdf=lambda x: np.exp(log_pdf(x)),
        log_pdf=log_pdf,
        support=(a, b),
        support_eff=(a, b),
        bounded_density=True,
        continuous_density=False,  # jumps at the endpoints
        sampler=lambda rng, n: rng.uniform(a, b, n),
    )


def beta_prior(a_shape: float = 2.0, b_shape: float = 2.0,
               lo: float = -1.0, hi: float = 1.0) -> ContinuousPrior:
    """Beta(a, b) density rescaled to (lo, hi); smooth bump for a, b > 1."""
    if a_shape < 1 or b_shape < 1:
        raise InvalidSpecError("beta prior: shapes below 1 give unbounded densities")
    if not lo < hi:
        raise InvalidSpecError("beta prior: need lo < hi")
    a, b = float(lo), float(hi)
    sa, sb = float(a_shape), float(b_shape)
    logc = -betaln(sa, sb) - math.log(b - a)

    def log_pdf(x):
        x = np.asarray(x, dtype=float)
        t = (x - a) / (b - a)
        inside = (t > 0) & (t < 1)
        tt = np.where(inside, t, 0.5)
        val = logc + (sa - 1) * np.log(tt) + (sb - 1) * np.log1p(-tt)
        return np.where(inside, val, -np.inf)

    return ContinuousPrior(
        name=f"beta({sa}, {sb}) on ({a}, {b})",
        pdf=lambda x: np.exp(log_pdf(x)),
        log_pdf=log_pdf,
        support=(a, b),
        support_eff=(a, b),
        bounded_density=True,
        continuous_density=(sa > 1 and sb > 1),
        sampler=lambda rng, n: a + (b - a) * rng.beta(sa, sb, n),
    )


def mixture_prior(first: Prior, second: Prior, alpha: float) -> MixturePrior:
    return MixturePrior(first, second, float(alpha))


# ---------------------------------------------------------------------------
# Sampling, moments, screens
# ---------------------------------------------------------------------------

def sample(spec, n: int, seed: int) -> np.ndarray:
    """n i.i.d. draws from a prior or noise spec, deterministic per seed."""
    if n < 1:
        raise InvalidSpecError("sample: n must be at least 1")
    rng = _rng_from_seed(seed)
    return spec.sample(rng, int(n))


def moments(spec) -> tuple[float, float]:
    """(mean, variance), by exact sum or quadrature.

    Noise specs return their validated declared moments; a
    :class:`DivergentMomentError` is raised when the tail exponent makes the
    variance undefined.
    """
    if isinstance(spec, NoiseSpec):
        if math.isfinite(spec.tail_exponent) and spec.tail_exponent <= 3:
            raise DivergentMomentError(
                f"noise {spec.name!r}: variance undefined for tail exponent "
                f"{spec.tail_exponent}")
        return spec.mean, spec.variance
    if isinstance(spec, DiscretePrior):
        m = float(np.dot(spec.masses, spec.locs))
        v = float(np.dot(spec.masses, (spec.locs - m) ** 2))
        return m, v
    if isinstance(spec, ContinuousPrior):
        a, b = spec.support_eff
        m = _quad_split(lambda x: x * float(spec.pdf(np.asarray(x))), a, b)
        v = _quad_split(lambda x: (x - m) ** 2 * float(spec.pdf(np.asarray(x))), a, b)
        return m, v
    if isinstance(spec, MixturePrior):
        m1, v1 = moments(spec.first)
        m2, v2 = moments(spec.second)
        w = spec.alpha
        m = w * m1 + (1 - w) * m2
        v = w * (v1 + (m1 - m) ** 2) + (1 - w) * (v2 + (m2 - m) ** 2)
        return m, v
    raise InvalidSpecError(f"moments: unsupported spec {type(spec).__name__}")


def check_strict_log_concavity(noise: NoiseSpec, grid_n: int = 64,
                               eps: float = 1e-9, levels: int = 4) -> Optional[bool]:
    """Numeric screen of strict concavity of log f_Z on its support.

    Returns True when the centered second difference is below -eps at every
    interior grid point across a x4 geometric refinement, False when a convex
    violation or a persistent flat segment is found, and None (inconclusive)
    when refinement levels disagree.  The registry flag may override this
    screen with analytic knowledge.
    """
    if grid_n < 16:
        raise InvalidSpecError("check_strict_log_concavity: grid_n must be >= 16")
    lo, hi = noise.support
    span_scale = max(noise.sd, 1.0)
    a = lo if math.isfinite(lo) else -8.0 * span_scale
    b = hi if math.isfinite(hi) else 8.0 * span_scale
    width = b - a
    if not width > 0:
        raise InvalidSpecError("check_strict_log_concavity: degenerate noise support")
    a += 1e-6 * width
    b -= 1e-6 * width

    all_concave_everywhere = True
    flat_at_finest = False
    for level in range(levels):
        m = grid_n * 4 ** level
        z = np.linspace(a, b, m)
        psi = noise.log_pdf(z)
        if not np.all(np.isfinite(psi)):
            raise InvalidSpecError("check_strict_log_concavity: log-density not finite "
                                   "on the interior of the support")
        d2 = psi[:-2] - 2.0 * psi[1:-1] + psi[2:]
        if np.any(d2 > eps):
            return False
        if not np.all(d2 < -eps):
            all_concave_everywhere = False
        flat_at_finest = bool(np.any(np.abs(d2) <= eps))
    if all_concave_everywhere:
        return True
    if flat_at_finest:
        return False
    return None


def polynomial_tail_bound(noise: NoiseSpec, z_lo: float = 10.0, z_hi: float = 1e3,
                          n: int = 241) -> float:
    """max over |z| in [z_lo, z_hi] of |z|^alpha f_Z(z), for finite alpha.

    Returns 0.0 for compactly supported noise and for super-polynomial decay
    (infinite tail exponent), where the bound is vacuous.
    """
    alpha = noise.tail_exponent
    if not math.isfinite(alpha):
        return 0.0
    z = np.geomspace(z_lo, z_hi, n)
    z = np.concatenate([-z[::-1], z])
    lo, hi = noise.support
    z = z[(z > lo) & (z < hi)]
    if z.size == 0:
        return 0.0
    return float(np.max(np.abs(z) ** alpha * noise.pdf(z)))


# ---------------------------------------------------------------------------
# Realization paths
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RealizationPath:
    """One fixed draw (x, z) of the randomness, along which limits are watched."""

    x: float
    z: float
    seed: int
    u: Optional[int] = None  # mixture component label, recorded iff prior is a mixture

    def __post_init__(self):
        if self.u is not None and self.u not in (1, 2):
            raise InvalidSpecError("realization path: component label must be 1 or 2")


def draw_path(prior: Prior, noise: NoiseSpec, seed: int) -> RealizationPath:
    rng = _rng_from_seed(seed)
    if isinstance(prior, MixturePrior):
        x, u = prior.sample_labeled(rng, 1)
        label = int(u[0])
    else:
        x = prior.sample(rng, 1)
        label = None
    z = noise.sample(rng, 1)
    return RealizationPath(x=float(x[0]), z=float(z[0]), seed=seed, u=label)


def draw_paths(prior: Prior, noise: NoiseSpec, n_paths: int, base_seed: int) -> list[RealizationPath]:
    """Independent paths with seeds base_seed, base_seed+1, ..."""
    return [draw_path(prior, noise, base_seed + i) for i in range(n_paths)]
