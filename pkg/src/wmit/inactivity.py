"""Mean inactivity time (MIT) and its weighted extension (WMIT).

The central object is the curve

    mu_psi(t) = E[psi(t) - psi(X) | X <= t] = (1/F(t)) * int_0^t phi(x) F(x) dx,

whose identity-weight special case is the classical MIT.  Curves are backed
by an anchored cumulative integral so that grid sweeps, nested quadrature,
and Monte Carlo averaging stay cheap.  On top of the curve sit the
derivative identity check, CDF reconstruction, the increasing-WMIT
classification, the dynamic cumulative entropy, the age-replacement mean
time to failure, and the ROC/AUC identities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .distributions import CDF_FLOOR, default_grid, dense_anchor_grid
from .errors import (
    CharacterizationError,
    DomainError,
    EvaluationError,
    FinitenessError,
)
from .numerics import (
    CumulativeIntegral,
    Grid,
    MonotoneVerdict,
    integrate,
    monotone_on_grid,
    tail_decay_check,
    vectorized,
)
from .weights import (
    IDENTITY as _IDENTITY,
    WeightFn,
    declared_or_certified_convexity,
    is_convex,
)


class WmitFn:
    """Weighted mean inactivity time curve of one (distribution, weight) pair."""

    def __init__(self, dist, weight: WeightFn):
        self.dist = dist
        self.weight = weight
        cdf = vectorized(dist.cdf)
        if weight.phi_times_cdf is not None and weight.ctx is dist:
            integrand = vectorized(weight.phi_times_cdf)
        else:
            phi = vectorized(weight.phi)

            def integrand(x):
                c = cdf(x)
                return np.where(c > 0.0, phi(x) * c, 0.0)

        self._cdf = cdf
        self._cum = CumulativeIntegral(integrand, dense_anchor_grid(dist))

    def cumulative(self, t):
        """int_lower^t phi F, the numerator of the curve."""
        return self._cum(t)

    def eval(self, t):
        scalar = np.ndim(t) == 0
        ts = np.atleast_1d(np.asarray(t, dtype=float))
        c = self._cdf(ts)
        bad = c < CDF_FLOOR
        if np.any(bad):
            raise DomainError(
                f"CDF mass below {CDF_FLOOR} at t={float(ts[bad][0])}; "
                "the WMIT curve is defined where F exceeds the floor"
            )
        out = self._cum(ts) / c
        return float(out[0]) if scalar else out

    __call__ = eval

    def eval_floor(self, t):
        """Non-raising variant for integrands: clamps the CDF at the floor.

        Below the usable region the curve value tends to 0 and any honest
        integrand carries a vanishing factor, so clamping is harmless.
        """
        scalar = np.ndim(t) == 0
        ts = np.atleast_1d(np.asarray(t, dtype=float))
        out = self._cum(ts) / np.maximum(self._cdf(ts), CDF_FLOOR)
        return float(out[0]) if scalar else out

    def deriv(self, t):
        """Slope of the curve; uses the hazard identity when a pdf exists."""
        scalar = np.ndim(t) == 0
        ts = np.atleast_1d(np.asarray(t, dtype=float))
        if self.dist.pdf is not None:
            pdf = vectorized(self.dist.pdf)
            tau = pdf(ts) / np.maximum(self._cdf(ts), CDF_FLOOR)
            out = vectorized(self.weight.phi)(ts) - tau * self.eval(ts)
        else:
            h = 1e-5 * (1.0 + np.abs(ts))
            out = (self.eval(ts + h) - self.eval(ts - h)) / (2.0 * h)
        return float(out[0]) if scalar else out


_CURVES: dict = {}
_CTX_WEIGHTS: dict = {}


def wmit_fn(dist, weight: WeightFn) -> WmitFn:
    """Cached WMIT curve for the pair (dist, weight)."""
    key = (id(dist), id(weight))
    cached = _CURVES.get(key)
    if cached is None or cached.dist is not dist or cached.weight is not weight:
        cached = WmitFn(dist, weight)
        _CURVES[key] = cached
    return cached


def context_weight(kind: str, ctx) -> WeightFn:
    """Cached context-dependent weight so curve caches stay warm."""
    key = (kind, id(ctx))
    cached = _CTX_WEIGHTS.get(key)
    if cached is None or cached.ctx is not ctx:
        cached = make_weight(kind, ctx=ctx)
        _CTX_WEIGHTS[key] = cached
    return cached


def mit(dist, t):
    """Mean inactivity time (1/F(t)) int_0^t F."""
    return wmit_fn(dist, _IDENTITY).eval(t)


def wmit(dist, w: WeightFn, t):
    """Weighted mean inactivity time (1/F(t)) int_0^t phi F."""
    return wmit_fn(dist, w).eval(t)


class _TailCurve:
    """int_lower^t phi * survival, backing the residual-life side."""

    def __init__(self, dist, weight: WeightFn):
        sf = vectorized(dist.sf)
        if weight.phi_times_sf is not None and weight.ctx is dist:
            integrand = vectorized(weight.phi_times_sf)
        else:
            phi = vectorized(weight.phi)

            def integrand(x):
                s = sf(x)
                return np.where(s > 0.0, phi(x) * s, 0.0)

        self.dist = dist
        self.weight = weight
        self._cum = CumulativeIntegral(integrand, dense_anchor_grid(dist))

    def __call__(self, t):
        return self._cum(t)


_TAILS: dict = {}


def _tail_curve(dist, weight: WeightFn) -> _TailCurve:
    key = (id(dist), id(weight))
    cached = _TAILS.get(key)
    if cached is None or cached.dist is not dist or cached.weight is not weight:
        cached = _TailCurve(dist, weight)
        _TAILS[key] = cached
    return cached


def expected_weight(dist, w: WeightFn) -> float:
    """E[psi(X)] computed as int phi * survival; raises if it diverges."""
    tail = _tail_curve(dist, w)
    v6 = float(tail(dist.upper_cutoff(1e-6)))
    v8 = float(tail(dist.upper_cutoff(1e-8)))
    v10 = float(tail(dist.upper_cutoff(1e-10)))
    ok, tail_est = tail_decay_check(v6, v8, v10)
    if not ok or tail_est > 1e-4 * (1.0 + abs(v10)):
        raise FinitenessError(
            "E[psi(X)] appears to diverge (tail integral still growing past "
            "the far quantiles); a finite mean of the transformed variable "
            "is required"
        )
    return v10


def wmrl(dist, w: WeightFn, t):
    """Weighted mean residual life (1/sf(t)) int_t^inf phi * sf."""
    total = expected_weight(dist, w)  # also validates finiteness
    scalar = np.ndim(t) == 0
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    sf = vectorized(dist.sf)(ts)
    if np.any(sf < CDF_FLOOR):
        raise DomainError(
            f"survival mass below {CDF_FLOOR} at t={float(ts[sf < CDF_FLOOR][0])}"
        )
    tail = _tail_curve(dist, w)
    out = (total - np.asarray(tail(ts), dtype=float)) / sf
    return float(out[0]) if scalar else out


def weighted_past_mean(dist, w: WeightFn, t):
    """E[psi(X) | X <= t]; consistent with psi(t) - wmit(t) by construction.

    When a density is available the conditional mean is computed directly
    and cross-checked against the inactivity identity to one part in 1e7.
    """
    scalar = np.ndim(t) == 0
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    psi = vectorized(w.psi)
    via_wmit = psi(ts) - wmit_fn(dist, w).eval(ts)
    if dist.pdf is not None:
        pdf = vectorized(dist.pdf)
        cdf = vectorized(dist.cdf)(ts)
        direct = np.array(
            [
                integrate(lambda x: psi(x) * pdf(x), dist.lower, t_i, tol=1e-10).value
                for t_i in ts
            ]
        ) / np.maximum(cdf, CDF_FLOOR)
        scale = 1.0 + np.max(np.abs(psi(ts)))
        if np.max(np.abs(direct - via_wmit)) > 1e-7 * scale:
            raise EvaluationError(
                "conditional-mean and inactivity routes disagree beyond 1e-7"
            )
        out = direct
    else:
        out = via_wmit
    return float(out[0]) if scalar else out


def wmit_derivative_check(dist, w: WeightFn, grid: Grid) -> float:
    """Max residual of the slope identity mu' = phi - tau * mu on the grid."""
    if dist.pdf is None:
        raise DomainError("the slope identity needs a density")
    curve = wmit_fn(dist, w)
    ts = grid.points
    h = 1e-5 * (1.0 + np.abs(ts))
    numeric = (curve.eval(ts + h) - curve.eval(ts - h)) / (2.0 * h)
    pdf = vectorized(dist.pdf)
    cdf = vectorized(dist.cdf)
    tau = pdf(ts) / np.maximum(cdf(ts), CDF_FLOOR)
    analytic = vectorized(w.phi)(ts) - tau * curve.eval(ts)
    return float(np.max(np.abs(numeric - analytic)))


def reconstruct_cdf(
    wmit_curve: Callable,
    wmit_deriv: Callable,
    w: WeightFn,
    t: float,
    upper: float,
) -> float:
    """Recover F(t) from a WMIT curve via its characterization integral.

    Integrates (phi - mu') / mu from t to the horizon that stands in for
    infinity.  Divergence/finiteness of the tail conditions cannot be
    decided from finitely many evaluations; they are asserted by the
    caller.
    """
    if not t < upper:
        raise ValueError("need t < upper")
    mu_v = vectorized(wmit_curve)
    dmu_v = vectorized(wmit_deriv)
    phi_v = vectorized(w.phi)

    def integrand(x):
        mu = mu_v(x)
        if np.any(mu <= 0.0):
            raise CharacterizationError(
                f"WMIT curve is not positive at x={float(np.atleast_1d(x)[np.atleast_1d(mu) <= 0][0])}"
            )
        return (phi_v(x) - dmu_v(x)) / mu

    res = integrate(integrand, t, upper, tol=1e-9)
    value = math.exp(-res.value)
    if value > 1.0 + 1e-6:
        raise CharacterizationError(
            f"reconstruction produced F(t)={value} > 1; the supplied curve "
            "is inconsistent with a distribution function"
        )
    return min(value, 1.0)


@dataclass(frozen=True)
class IwmitReport:
    """Grid evidence for the increasing-WMIT property and its sufficient conditions."""

    direct: MonotoneVerdict
    cond_i: MonotoneVerdict  # phi/tau increasing
    cond_ii: tuple[MonotoneVerdict, MonotoneVerdict]  # phi increasing, MIT increasing
    cond_iii: MonotoneVerdict  # psi*tau/phi decreasing
    drhr_shortcut: tuple[MonotoneVerdict, str]  # tau decreasing + psi convexity label
    power_shortcut: Optional[MonotoneVerdict]  # x*tau(x) decreasing, power-type psi only
    grid: dict

    @property
    def is_iwmit(self) -> bool:
        return self.direct.kind in ("increasing", "flat-within-tolerance")

    @property
    def sufficient_condition_holds(self) -> bool:
        checks = [
            self.cond_i.kind in ("increasing", "flat-within-tolerance"),
            all(
                v.kind in ("increasing", "flat-within-tolerance")
                for v in self.cond_ii
            ),
            self.cond_iii.kind in ("decreasing", "flat-within-tolerance"),
            self.drhr_shortcut[0].kind in ("decreasing", "flat-within-tolerance")
            and is_convex(self.drhr_shortcut[1]),
        ]
        if self.power_shortcut is not None:
            checks.append(
                self.power_shortcut.kind in ("decreasing", "flat-within-tolerance")
            )
        return any(checks)


def iwmit_classify(dist, w: WeightFn, grid: Optional[Grid] = None) -> IwmitReport:
    """Monotonicity verdicts for the WMIT curve and each sufficient condition."""
    if dist.pdf is None:
        raise DomainError("classification needs a density for the reversed hazard")
    if grid is None:
        grid = default_grid(dist)
    curve = wmit_fn(dist, w)
    pdf = vectorized(dist.pdf)
    cdf = vectorized(dist.cdf)
    phi = vectorized(w.phi)
    psi = vectorized(w.psi)

    def tau(x):
        return pdf(x) / np.maximum(cdf(x), CDF_FLOOR)

    direct = monotone_on_grid(curve.eval, grid)
    cond_i = monotone_on_grid(lambda x: phi(x) / np.maximum(tau(x), 1e-300), grid)
    cond_ii = (
        monotone_on_grid(phi, grid),
        monotone_on_grid(wmit_fn(dist, _IDENTITY).eval, grid),
    )
    cond_iii = monotone_on_grid(
        lambda x: psi(x) * tau(x) / np.maximum(phi(x), 1e-300), grid
    )
    drhr = (
        monotone_on_grid(tau, grid),
        declared_or_certified_convexity(w, grid.lo, grid.hi),
    )
    power_shortcut = None
    if w.kind in ("identity", "power", "half-square"):
        power_shortcut = monotone_on_grid(lambda x: np.asarray(x) * tau(x), grid)
    return IwmitReport(
        direct=direct,
        cond_i=cond_i,
        cond_ii=cond_ii,
        cond_iii=cond_iii,
        drhr_shortcut=drhr,
        power_shortcut=power_shortcut,
        grid=grid.describe(),
    )


def dynamic_cumulative_entropy(dist, t):
    """Entropy of the past-life distribution, (1/F(t)) int_0^t f * MIT."""
    if dist.pdf is None:
        raise DomainError("dynamic cumulative entropy needs a density")
    w = context_weight("mit-of", dist)
    return wmit_fn(dist, w).eval(t)


def age_replacement_mttf(dist, t):
    """Mean time to failure under age replacement, (1/F(t)) int_0^t survival."""
    w = context_weight("odds-of", dist)
    return wmit_fn(dist, w).eval(t)


@dataclass(frozen=True)
class AucResult:
    value: float
    routes: tuple[float, float, float]  # residual-life, inactivity-limit, direct
    residuals: tuple[float, float, float]


def auc(dist_x, dist_y) -> AucResult:
    """Area under the ROC curve of the pair, computed three ways.

    The routes are the residual-life value at the origin, one minus the
    inactivity limit, and the direct quadrature of E[G(X)].  They must
    agree up to quadrature error.
    """
    if dist_x.lower < 0 or dist_y.lower < 0:
        raise DomainError("AUC identities assume non-negative supports")
    if dist_x.pdf is None or dist_y.pdf is None:
        raise DomainError("AUC routes need densities on both sides")
    w_g = context_weight("cdf-of", dist_y)

    # residual-life route: E[psi(X)] with psi = G
    r1 = expected_weight(dist_x, w_g)

    # inactivity-limit route: 1 - mu_G(infinity)
    hi = max(dist_x.upper_cutoff(1e-12), 1.0)
    if not math.isinf(dist_x.upper):
        hi = dist_x.upper
    r2 = 1.0 - float(wmit_fn(dist_x, w_g).cumulative(hi))

    # direct route: E[G(X)]
    cdf_y = vectorized(dist_y.cdf)
    pdf_x = vectorized(dist_x.pdf)
    r3 = integrate(
        lambda x: cdf_y(x) * pdf_x(x),
        dist_x.lower,
        dist_x.upper_cutoff(1e-12),
        tol=1e-11,
    ).value

    routes = (float(r1), float(r2), float(r3))
    residuals = (
        abs(routes[0] - routes[1]),
        abs(routes[1] - routes[2]),
        abs(routes[0] - routes[2]),
    )
    return AucResult(value=sum(routes) / 3.0, routes=routes, residuals=residuals)
