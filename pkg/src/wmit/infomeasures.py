"""Entropy and variability measures built on the inactivity-time curve.

Cumulative entropy and its generalized (record-spacing) extension, the
weighted versions, differential/past/residual entropy, varentropy with
its hazard-based representations, the variance identity through the
squared WMIT curve, the order recurrences, and the bound suite relating
all of them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .distributions import CDF_FLOOR, default_grid, dense_anchor_grid
from .errors import DomainError, FinitenessError
from .inactivity import wmit_fn
from .numerics import (
    CumulativeIntegral,
    Grid,
    integrate,
    monotone_on_grid,
    tail_decay_check,
    vectorized,
)
from .weights import (
    HALF_SQUARE,
    IDENTITY,
    WeightFn,
    check_bounds,
    declared_or_certified_convexity,
    is_concave,
    is_convex,
)

MAX_ORDER = 20
EULER_GAMMA = 0.5772156649015329


@dataclass(frozen=True)
class MeasureReport:
    """A computed measure with its provenance route and error estimate."""

    value: float
    route: str  # quadrature | quantile-domain | monte-carlo | record-identity
    error_estimate: float
    n: Optional[int] = None

    def __post_init__(self):
        if not self.error_estimate >= 0.0:
            raise ValueError("error_estimate must be non-negative")


def _require_pdf(dist, what: str) -> None:
    if dist.pdf is None:
        raise DomainError(f"{what} needs a density; empirical models are unsupported")


def _guard_order(n: int) -> int:
    if not (1 <= n <= MAX_ORDER):
        raise DomainError(
            f"order must lie in 1..{MAX_ORDER} (log-domain factorial guard); "
            f"order 0 is rejected because the integral may diverge; got {n}"
        )
    return int(n)


def expectation(dist, fn, tol: float = 1e-10) -> float:
    """E[fn(X)] by quadrature of fn * pdf over the truncated support."""
    _require_pdf(dist, "an expectation")
    pdf = vectorized(dist.pdf)
    fnv = vectorized(fn)
    return integrate(
        lambda x: fnv(x) * pdf(x), dist.lower, dist.upper_cutoff(1e-12), tol=tol
    ).value


def _log_weighted_cdf_integrand(dist, n: int):
    """F * T^n / n!, evaluated stably in the log domain."""
    cdf = vectorized(dist.cdf)
    lg = math.lgamma(n + 1)

    def integrand(x):
        c = cdf(x)
        out = np.zeros_like(c)
        m = (c > 0.0) & (c < 1.0)
        if np.any(m):
            T = -np.log(c[m])
            out[m] = np.exp(np.log(c[m]) + n * np.log(T) - lg)
        return out

    return integrand


def cumulative_entropy(dist, route: str = "direct") -> float:
    """-int F log F; the 'mit' route computes E[MIT(X)] instead."""
    if route == "direct":
        cdf = vectorized(dist.cdf)

        def integrand(x):
            c = cdf(x)
            out = np.zeros_like(c)
            m = (c > 0.0) & (c < 1.0)
            out[m] = -c[m] * np.log(c[m])
            return out

        hi = dist.upper_cutoff(1e-12)
        value = integrate(integrand, dist.lower, hi, tol=1e-10).value
        if math.isinf(dist.upper):
            # tail mass beyond the cutoff behaves like the residual mean
            probe = integrate(integrand, hi, 2.0 * hi, tol=1e-9).value
            if abs(probe) > 1e-6:
                raise FinitenessError("cumulative entropy tail fails to decay")
            value += probe
        return value
    if route == "mit":
        _require_pdf(dist, "the MIT-expectation route")
        curve = wmit_fn(dist, IDENTITY)
        return expectation(dist, curve.eval_floor)
    raise DomainError(f"unknown cumulative-entropy route {route!r}")


def gce(dist, n: int, tol: float = 1e-10) -> float:
    """Generalized cumulative entropy of order n: int F T^n / n!."""
    n = _guard_order(n)
    integrand = _log_weighted_cdf_integrand(dist, n)
    return integrate(integrand, dist.lower, dist.upper_cutoff(1e-12), tol=tol).value


def wgce(dist, w: WeightFn, n: int, tol: float = 1e-10) -> float:
    """Weighted GCE of order n: int phi F T^n / n!."""
    n = _guard_order(n)
    cdf = vectorized(dist.cdf)
    lg = math.lgamma(n + 1)
    if w.phi_times_cdf is not None and w.ctx is dist:
        ptc = vectorized(w.phi_times_cdf)

        def integrand(x):
            c = cdf(x)
            out = np.zeros_like(c)
            m = (c > 0.0) & (c < 1.0)
            if np.any(m):
                T = -np.log(c[m])
                out[m] = ptc(np.asarray(x, dtype=float)[m]) * np.exp(
                    n * np.log(T) - lg
                )
            return out

    else:
        phi = vectorized(w.phi)

        def integrand(x):
            c = cdf(x)
            out = np.zeros_like(c)
            m = (c > 0.0) & (c < 1.0)
            if np.any(m):
                T = -np.log(c[m])
                out[m] = phi(np.asarray(x, dtype=float)[m]) * np.exp(
                    np.log(c[m]) + n * np.log(T) - lg
                )
            return out

    return integrate(integrand, dist.lower, dist.upper_cutoff(1e-12), tol=tol).value


def weighted_cumulative_entropy(dist) -> float:
    """-int x F log F; agrees with the half-square WGCE at order one."""
    value = wgce(dist, HALF_SQUARE, 1)
    return value


@dataclass(frozen=True)
class VarianceRoutes:
    direct: float
    via_wmit: float

    @property
    def residual(self) -> float:
        return abs(self.direct - self.via_wmit)


def variance_of_weighted(dist, w: WeightFn, tol: float = 1e-10) -> VarianceRoutes:
    """Var[psi(X)] by moments and by the squared-WMIT expectation."""
    _require_pdf(dist, "the variance identity")
    psi = vectorized(w.psi)
    pdf = vectorized(dist.pdf)

    def second_to(hi):
        return integrate(
            lambda x: psi(x) ** 2 * pdf(x), dist.lower, hi, tol=tol
        ).value

    v6 = second_to(dist.upper_cutoff(1e-6))
    v8 = second_to(dist.upper_cutoff(1e-8))
    v10 = second_to(dist.upper_cutoff(1e-10))
    ok, tail_est = tail_decay_check(v6, v8, v10)
    if not ok or tail_est > 1e-4 * (1.0 + abs(v10)):
        raise FinitenessError(
            "E[psi(X)^2] appears to diverge or converge too slowly; the "
            "variance identity needs a finite second moment"
        )
    hi = dist.upper_cutoff(1e-10)
    first = integrate(lambda x: psi(x) * pdf(x), dist.lower, hi, tol=tol).value
    direct = v10 - first**2
    curve = wmit_fn(dist, w)
    via = integrate(
        lambda x: np.asarray(curve.eval_floor(x)) ** 2 * pdf(x),
        dist.lower,
        hi,
        tol=tol,
    ).value
    return VarianceRoutes(direct=float(direct), via_wmit=float(via))


def differential_entropy(dist) -> float:
    """-int f log f over the support."""
    _require_pdf(dist, "differential entropy")
    pdf = vectorized(dist.pdf)

    def integrand(x):
        f = pdf(x)
        out = np.zeros_like(f)
        m = f > 0.0
        out[m] = -f[m] * np.log(f[m])
        return out

    return integrate(integrand, dist.lower, dist.upper_cutoff(1e-12), tol=1e-10).value


_FLOGF: dict = {}


class _FLogF:
    """Cumulative integral of f log f, shared by the entropy routes."""

    def __init__(self, dist):
        pdf = vectorized(dist.pdf)

        def integrand(x):
            f = pdf(x)
            out = np.zeros_like(f)
            m = f > 0.0
            out[m] = f[m] * np.log(f[m])
            return out

        self.dist = dist
        self.cum = CumulativeIntegral(integrand, dense_anchor_grid(dist))
        self.total = float(self.cum(dist.upper_cutoff(1e-12)))


def _flogf(dist) -> _FLogF:
    key = id(dist)
    cached = _FLOGF.get(key)
    if cached is None or cached.dist is not dist:
        cached = _FLogF(dist)
        _FLOGF[key] = cached
    return cached


def past_entropy(dist, t):
    """Entropy of [X | X <= t]."""
    _require_pdf(dist, "past entropy")
    scalar = np.ndim(t) == 0
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    c = vectorized(dist.cdf)(ts)
    if np.any(c < CDF_FLOOR):
        raise DomainError("past entropy needs CDF mass above the floor")
    acc = _flogf(dist)
    out = -np.asarray(acc.cum(ts)) / c + np.log(c)
    return float(out[0]) if scalar else out


def residual_entropy(dist, t):
    """Entropy of the residual lifetime [X - t | X > t]."""
    _require_pdf(dist, "residual entropy")
    scalar = np.ndim(t) == 0
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    s = vectorized(dist.sf)(ts)
    if np.any(s < CDF_FLOOR):
        raise DomainError("residual entropy needs survival mass above the floor")
    acc = _flogf(dist)
    out = -(acc.total - np.asarray(acc.cum(ts))) / s + np.log(s)
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class VarentropyRoutes:
    direct: float
    via_residual: float
    via_past: float

    @property
    def max_residual(self) -> float:
        vals = (self.direct, self.via_residual, self.via_past)
        return max(vals) - min(vals)


def varentropy(dist, tol: float = 1e-10) -> VarentropyRoutes:
    """Variance of the information content -log f(X), three ways.

    The alternate routes rewrite the centered information content through
    the residual entropy plus log-hazard and the past entropy plus
    log-reversed-hazard.
    """
    _require_pdf(dist, "varentropy")
    pdf = vectorized(dist.pdf)
    cdf = vectorized(dist.cdf)
    sf = vectorized(dist.sf)
    lo, hi = dist.lower, dist.upper_cutoff(1e-10)

    def logf(x):
        return np.log(np.maximum(pdf(x), 1e-300))

    second = integrate(lambda x: logf(x) ** 2 * pdf(x), lo, hi, tol=tol).value
    first = integrate(lambda x: logf(x) * pdf(x), lo, hi, tol=tol).value
    if not np.isfinite(second):
        raise FinitenessError("E[(log f)^2] is not finite")
    direct = second - first**2

    acc = _flogf(dist)

    def via_residual_integrand(x):
        g = -(acc.total - np.asarray(acc.cum(x)))
        term = g / np.maximum(sf(x), 1e-300) + logf(x)
        return term**2 * pdf(x)

    def via_past_integrand(x):
        term = -np.asarray(acc.cum(x)) / np.maximum(cdf(x), CDF_FLOOR) + logf(x)
        return term**2 * pdf(x)

    via_residual = integrate(via_residual_integrand, lo, hi, tol=tol).value
    via_past = integrate(via_past_integrand, lo, hi, tol=tol).value
    return VarentropyRoutes(
        direct=float(direct),
        via_residual=float(via_residual),
        via_past=float(via_past),
    )


def varentropy_mc(dist, draws: int = 10**6, seed: int = 0) -> float:
    """Monte Carlo varentropy: sample variance of -log f at quantile draws."""
    _require_pdf(dist, "Monte Carlo varentropy")
    rng = np.random.default_rng(seed)
    xs = dist.sample(draws, rng)
    ic = -np.log(np.maximum(np.asarray(vectorized(dist.pdf)(xs)), 1e-300))
    return float(np.var(ic, ddof=1))


@dataclass(frozen=True)
class VarentropyBoundReport:
    """Which hypotheses of the unit varentropy bound hold, and the value."""

    residual_condition: bool  # log(f(x)/f(t)) <= 1 for x >= t
    past_condition: bool  # log(f(x)/f(t)) <= 1 for x <= t
    residual_entropy_decreasing: bool
    past_entropy_increasing: bool
    varentropy_value: float
    bound_applies: bool
    bound_holds: bool


def varentropy_bound_check(dist, grid: Optional[Grid] = None) -> VarentropyBoundReport:
    """Grid evidence for the V(X) <= 1 bound and its two hypothesis sets."""
    _require_pdf(dist, "the varentropy bound check")
    if grid is None:
        grid = default_grid(dist, n=256)
    f = np.asarray(vectorized(dist.pdf)(grid.points))
    f = np.maximum(f, 1e-300)
    logf = np.log(f)
    tol = 1e-9
    suffix_max = np.maximum.accumulate(logf[::-1])[::-1]
    prefix_max = np.maximum.accumulate(logf)
    residual_condition = bool(np.all(suffix_max - logf <= 1.0 + tol))
    past_condition = bool(np.all(prefix_max - logf <= 1.0 + tol))

    mono_grid = Grid.from_points(
        np.asarray(dist.quantile(np.linspace(0.02, 0.98, 49)), dtype=float)
    )
    res_verdict = monotone_on_grid(lambda x: residual_entropy(dist, x), mono_grid)
    past_verdict = monotone_on_grid(lambda x: past_entropy(dist, x), mono_grid)
    res_dec = res_verdict.kind in ("decreasing", "flat-within-tolerance")
    past_inc = past_verdict.kind in ("increasing", "flat-within-tolerance")

    v = varentropy(dist).direct
    applies = (residual_condition and res_dec) or (past_condition and past_inc)
    return VarentropyBoundReport(
        residual_condition=residual_condition,
        past_condition=past_condition,
        residual_entropy_decreasing=res_dec,
        past_entropy_increasing=past_inc,
        varentropy_value=float(v),
        bound_applies=applies,
        bound_holds=bool(v <= 1.0 + 1e-6),
    )


@dataclass(frozen=True)
class RecurrenceResiduals:
    via_spacing: float
    via_density: float
    reference: float


def gce_recurrence_check(dist, w: WeightFn, n: int) -> RecurrenceResiduals:
    """Residuals of the two order-lowering recurrences against the WGCE.

    The spacing route subtracts the expected tail integral of the curve
    slope against T^(n-1); the density route rescales the previous order
    by one minus the slope's mean under the tilted density
    F T^(n-1) / ((n-1)! WGCE_{n-1}).
    """
    if n < 2:
        raise DomainError("the recurrences lower the order; need n >= 2")
    n = _guard_order(n)
    _require_pdf(dist, "the recurrence check")
    reference = wgce(dist, w, n)
    prev = wgce(dist, w, n - 1)
    if prev <= 0.0:
        raise DomainError("degenerate recurrence: the order n-1 measure vanishes")

    curve = wmit_fn(dist, w)
    cdf = vectorized(dist.cdf)
    pdf = vectorized(dist.pdf)
    phi = vectorized(w.phi)
    lo, hi = dist.lower, dist.upper_cutoff(1e-12)
    lg = math.lgamma(n)  # (n-1)!

    def slope(x):
        tau = pdf(x) / np.maximum(cdf(x), CDF_FLOOR)
        return phi(x) - tau * np.asarray(curve.eval_floor(x))

    def slope_T(x):
        c = cdf(x)
        out = np.zeros_like(c)
        m = (c > 0.0) & (c < 1.0)
        if np.any(m):
            xm = np.asarray(x, dtype=float)[m]
            out[m] = slope(xm) * (-np.log(c[m])) ** (n - 1)
        return out

    tail = CumulativeIntegral(slope_T, dense_anchor_grid(dist))
    tail_total = float(tail(hi))

    def spacing_integrand(x):
        return (tail_total - np.asarray(tail(x))) * pdf(x)

    e_spacing = integrate(spacing_integrand, lo, hi, tol=1e-10).value
    via_spacing = prev - e_spacing / math.exp(lg)

    def density_integrand(x):
        c = cdf(x)
        out = np.zeros_like(c)
        m = (c > 0.0) & (c < 1.0)
        if np.any(m):
            xm = np.asarray(x, dtype=float)[m]
            out[m] = slope(xm) * np.exp(
                np.log(c[m]) + (n - 1) * np.log(-np.log(c[m])) - lg
            )
        return out

    e_density = integrate(density_integrand, lo, hi, tol=1e-10).value / prev
    via_density = prev * (1.0 - e_density)

    return RecurrenceResiduals(
        via_spacing=abs(via_spacing - reference),
        via_density=abs(via_density - reference),
        reference=reference,
    )


def entropy_of_weighted(dist, w: WeightFn) -> float:
    """Differential entropy of psi(X): H(X) + E[log phi(X)], needs phi > 0."""
    _require_pdf(dist, "the transformed entropy")
    pdf = vectorized(dist.pdf)
    phi = vectorized(w.phi)

    def integrand(x):
        f = pdf(x)
        out = np.zeros_like(f)
        m = f > 0.0
        if np.any(m):
            xm = np.asarray(x, dtype=float)[m]
            ratio = f[m] / np.maximum(phi(xm), 1e-300)
            out[m] = -f[m] * np.log(np.maximum(ratio, 1e-300))
        return out

    return integrate(integrand, dist.lower, dist.upper_cutoff(1e-12), tol=1e-10).value


def log_spacing_constant(n: int) -> float:
    """exp of the mean log of u(-log u)^n on (0,1); closed form exp(-1 - n*gamma)."""
    n = _guard_order(n)
    val = integrate(
        lambda u: np.log(np.maximum(u, 1e-300))
        + n * np.log(np.maximum(-np.log(np.maximum(u, 1e-300)), 1e-300)),
        0.0,
        1.0,
        tol=1e-11,
    ).value
    return math.exp(val)


@dataclass(frozen=True)
class BoundCheck:
    name: str
    lhs: float
    rhs: float
    margin: float
    ok: bool
    applicable: bool
    note: str = ""


@dataclass(frozen=True)
class BoundReport:
    checks: list[BoundCheck] = field(default_factory=list)

    @property
    def failures(self) -> list[BoundCheck]:
        return [c for c in self.checks if c.applicable and not c.ok]


def bound_suite(dist, w: WeightFn, n: int, slack: float = 1e-7) -> BoundReport:
    """Evaluate every applicable inequality linking the WGCE, the standard
    deviation of psi(X), the transformed entropy, and the plain GCE.

    A bound fails only beyond the numerical slack; inapplicable bounds
    (unmet convexity or envelope hypotheses) are reported as such.
    """
    n = _guard_order(n)
    checks: list[BoundCheck] = []
    ce_psi_n = wgce(dist, w, n)
    sigma_psi = math.sqrt(max(variance_of_weighted(dist, w).direct, 0.0))

    # upper bound via the record-moment Cauchy-Schwarz coefficient
    coef = math.exp(0.5 * math.lgamma(2 * n - 1) - math.lgamma(n))
    rhs = coef * sigma_psi
    checks.append(
        BoundCheck(
            name="wgce-upper-sigma",
            lhs=ce_psi_n,
            rhs=rhs,
            margin=rhs - ce_psi_n,
            ok=ce_psi_n <= rhs + slack,
            applicable=True,
        )
    )

    # lower bound via the transformed entropy
    try:
        h_psi = entropy_of_weighted(dist, w)
        lower = log_spacing_constant(n) * math.exp(h_psi) / math.factorial(n)
        checks.append(
            BoundCheck(
                name="wgce-lower-entropy",
                lhs=lower,
                rhs=ce_psi_n,
                margin=ce_psi_n - lower,
                ok=lower <= ce_psi_n + slack,
                applicable=True,
            )
        )
    except (FinitenessError, OverflowError) as exc:
        checks.append(
            BoundCheck(
                name="wgce-lower-entropy",
                lhs=math.nan,
                rhs=ce_psi_n,
                margin=math.nan,
                ok=True,
                applicable=False,
                note=f"transformed entropy unavailable: {exc}",
            )
        )

    grid = default_grid(dist)
    convexity = declared_or_certified_convexity(w, grid.lo, grid.hi)

    # sigma[psi(X)] >= psi(CE(X)) for increasing convex psi
    ce = cumulative_entropy(dist)
    psi_ce = float(np.asarray(vectorized(w.psi)(np.array([ce])))[0])
    checks.append(
        BoundCheck(
            name="sigma-vs-psi-of-ce",
            lhs=psi_ce,
            rhs=sigma_psi,
            margin=sigma_psi - psi_ce,
            ok=psi_ce <= sigma_psi + slack,
            applicable=is_convex(convexity),
            note=f"psi convexity: {convexity}",
        )
    )

    # envelope sandwiches against the unweighted measures
    lo_pt = max(dist.lower, 1e-300)
    env_grid = Grid.from_points(
        np.unique(np.concatenate([[lo_pt], grid.points]))
    )
    m, M = check_bounds(w, env_grid)
    sigma_x = math.sqrt(max(variance_of_weighted(dist, IDENTITY).direct, 0.0))
    ratio_sigma = sigma_psi / sigma_x if sigma_x > 0 else math.nan
    checks.append(
        BoundCheck(
            name="sigma-ratio-envelope",
            lhs=m,
            rhs=M,
            margin=min(ratio_sigma - m, M - ratio_sigma),
            ok=(m - slack <= ratio_sigma <= M + slack),
            applicable=math.isfinite(M) and math.isfinite(ratio_sigma),
            note=f"ratio={ratio_sigma:.6g}",
        )
    )
    ce_n = gce(dist, n)
    ratio_ce = ce_psi_n / ce_n if ce_n > 0 else math.nan
    checks.append(
        BoundCheck(
            name="wgce-ratio-envelope",
            lhs=m,
            rhs=M,
            margin=min(ratio_ce - m, M - ratio_ce),
            ok=(m - slack <= ratio_ce <= M + slack),
            applicable=math.isfinite(M) and math.isfinite(ratio_ce),
            note=f"ratio={ratio_ce:.6g}",
        )
    )

    # convex psi: WGCE dominates psi of the GCE
    psi_ce_n = float(np.asarray(vectorized(w.psi)(np.array([ce_n])))[0])
    checks.append(
        BoundCheck(
            name="wgce-vs-psi-of-gce",
            lhs=psi_ce_n,
            rhs=ce_psi_n,
            margin=ce_psi_n - psi_ce_n,
            ok=psi_ce_n <= ce_psi_n + slack,
            applicable=is_convex(convexity),
            note=f"psi convexity: {convexity}",
        )
    )
    if is_concave(convexity):
        checks.append(
            BoundCheck(
                name="wgce-vs-psi-of-gce-concave",
                lhs=ce_psi_n,
                rhs=psi_ce_n,
                margin=psi_ce_n - ce_psi_n,
                ok=ce_psi_n <= psi_ce_n + slack,
                applicable=True,
            )
        )

    return BoundReport(checks=checks)


def wgce_ratio_monotone_in_order(
    dist, w: WeightFn, orders=(1, 2, 3, 4, 5), slack: float = 1e-9
) -> Optional[bool]:
    """For convex (concave) psi the WGCE/GCE ratio falls (rises) with the order.

    Returns True when the declared/certified shape's direction holds on the
    sampled orders, False when violated, None when psi is neither.
    """
    grid = default_grid(dist)
    convexity = declared_or_certified_convexity(w, grid.lo, grid.hi)
    ratios = [wgce(dist, w, k) / gce(dist, k) for k in orders]
    diffs = np.diff(ratios)
    if is_convex(convexity) and is_concave(convexity):
        return bool(np.all(np.abs(diffs) <= slack * (1.0 + np.abs(ratios[0]))))
    if is_convex(convexity):
        return bool(np.all(diffs <= slack * (1.0 + abs(ratios[0]))))
    if is_concave(convexity):
        return bool(np.all(diffs >= -slack * (1.0 + abs(ratios[0]))))
    return None
