"""Deterministic numerical kernels.

Adaptive Simpson quadrature, monotone-CDF inversion, grid monotonicity
certification, log-domain Poisson weights, and an anchored cumulative
integral used to evaluate inactivity-time curves cheaply at many points.

All routines are pure: no global state, safe for concurrent use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConvergenceError, EvaluationError

DEFAULT_TOL = 1e-8
_MAX_DEPTH = 48
_TRUNCATION_CAP = 1e14


@dataclass(frozen=True)
class QuadResult:
    """Value of a definite integral with an error estimate and eval count."""

    value: float
    error_estimate: float
    evaluations: int

    def __post_init__(self):
        if not self.error_estimate >= 0.0:
            raise ValueError("error_estimate must be non-negative")
        if self.evaluations < 1:
            raise ValueError("evaluations must be at least 1")


@dataclass(frozen=True)
class Grid:
    """Strictly increasing evaluation grid with at least 3 points."""

    points: np.ndarray
    lo: float
    hi: float

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        object.__setattr__(self, "points", pts)
        if pts.ndim != 1 or pts.size < 3:
            raise ValueError("grid needs at least 3 points")
        if not np.all(np.diff(pts) > 0):
            raise ValueError("grid points must be strictly increasing")
        if pts[0] != self.lo or pts[-1] != self.hi:
            raise ValueError("lo/hi must match the first/last grid point")

    @classmethod
    def from_points(cls, points) -> "Grid":
        pts = np.unique(np.asarray(points, dtype=float))
        return cls(points=pts, lo=float(pts[0]), hi=float(pts[-1]))

    @classmethod
    def linear(cls, lo: float, hi: float, n: int = 512) -> "Grid":
        return cls.from_points(np.linspace(lo, hi, n))

    @classmethod
    def logarithmic(cls, lo: float, hi: float, n: int = 512) -> "Grid":
        if lo <= 0:
            return cls.linear(lo, hi, n)
        return cls.from_points(np.geomspace(lo, hi, n))

    def __len__(self) -> int:
        return int(self.points.size)

    def describe(self) -> dict:
        return {"n": len(self), "lo": self.lo, "hi": self.hi}


@dataclass(frozen=True)
class MonotoneVerdict:
    """Outcome of a finite-resolution monotonicity check.

    kind is one of 'increasing', 'decreasing', 'non-monotone',
    'flat-within-tolerance'.  A witness pair is attached exactly when the
    verdict is non-monotone.
    """

    kind: str
    witness: Optional[tuple[float, float]] = None

    def __post_init__(self):
        if (self.kind == "non-monotone") != (self.witness is not None):
            raise ValueError("witness present iff kind is non-monotone")


def vectorized(f: Callable) -> Callable:
    """Wrap f so it accepts numpy arrays even if written for scalars."""

    def call(xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        try:
            out = np.asarray(f(xs), dtype=float)
            if out.shape == xs.shape:
                return out
        except Exception:
            pass
        flat = np.atleast_1d(xs)
        out = np.array([float(f(float(x))) for x in flat], dtype=float)
        return out.reshape(xs.shape)

    return call


def _check_nan(xs: np.ndarray, ys: np.ndarray) -> None:
    bad = np.isnan(ys)
    if np.any(bad):
        x0 = float(np.asarray(xs)[bad][0])
        raise EvaluationError(f"integrand returned NaN at x={x0}", where=x0)


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = DEFAULT_TOL,
    max_depth: int = _MAX_DEPTH,
) -> QuadResult:
    """Adaptive Simpson quadrature of f over (a, b).

    An infinite upper limit is truncated where the integrand's envelope
    falls below tol (doubling search).  Intervals are bisected until the
    local Richardson error passes its share of tol; exhausting the depth
    budget raises ConvergenceError carrying the best estimate.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if not a < b:
        raise ValueError("integration requires a < b")
    fv = vectorized(f)
    if math.isinf(b):
        b = _truncate_upper(fv, a, tol)
    return _adaptive_simpson(fv, float(a), float(b), tol, max_depth)


def _truncate_upper(fv: Callable, a: float, tol: float) -> float:
    t = max(1.0, 2.0 * abs(a) + 1.0)
    while t < _TRUNCATION_CAP:
        probe = np.array([t, 1.5 * t, 2.0 * t])
        ys = fv(probe)
        _check_nan(probe, ys)
        if np.max(np.abs(ys)) * t < 0.01 * tol:
            return 2.0 * t
        t *= 2.0
    raise ConvergenceError(
        "could not locate a decaying envelope for the infinite upper limit"
    )


def _finite_endpoint(fv, x: float, toward: float):
    """Evaluate fv at x, nudging inward past an integrable endpoint blow-up."""
    y = float(fv(np.array([x]))[0])
    if np.isfinite(y):
        return x, y
    for eps in (1e-15, 1e-12, 1e-9):
        xn = x + eps * (toward - x)
        y = float(fv(np.array([xn]))[0])
        if np.isfinite(y):
            return xn, y
    raise EvaluationError(f"integrand is not finite near x={x}", where=x)


def _adaptive_simpson(fv, a, b, tol, max_depth) -> QuadResult:
    # Batched bisection: one row per active interval.  Budgets halve on
    # every split so the accepted local errors sum below tol.  Depth
    # exhaustion (endpoint singularities) is accepted with its error
    # charged to the estimate; only a total estimate above tol fails.
    a, fa = _finite_endpoint(fv, a, b)
    b, fb = _finite_endpoint(fv, b, a)
    m0 = 0.5 * (a + b)
    fm0 = float(fv(np.array([m0]))[0])
    _check_nan(np.array([m0]), np.array([fm0]))
    evals = 5
    left = np.array([a])
    right = np.array([b])
    fl = np.array([fa])
    fm = np.array([fm0])
    fr = np.array([fb])
    S = (right - left) / 6.0 * (fl + 4.0 * fm + fr)
    budget = np.array([tol], dtype=float)
    depth = np.array([0])

    value = 0.0
    err_total = 0.0

    while left.size:
        mid = 0.5 * (left + right)
        lm = 0.5 * (left + mid)
        rm = 0.5 * (mid + right)
        pts = np.concatenate([lm, rm])
        vals = fv(pts)
        _check_nan(pts, vals)
        evals += pts.size
        flm = vals[: lm.size]
        frm = vals[lm.size :]
        h = right - left
        S_l = h / 12.0 * (fl + 4.0 * flm + fm)
        S_r = h / 12.0 * (fm + 4.0 * frm + fr)
        S2 = S_l + S_r
        err = np.abs(S2 - S) / 15.0
        done = (err <= budget) & np.isfinite(err)
        exhausted = (~done) & (depth >= max_depth)
        settled = done | exhausted
        if np.any(settled):
            refined = S2[settled] + (S2[settled] - S[settled]) / 15.0
            value += float(np.sum(np.where(np.isfinite(refined), refined, 0.0)))
            e = err[settled]
            err_total += float(np.sum(np.where(np.isfinite(e), e, np.inf)))
        keep = ~settled
        if not np.any(keep):
            break
        new_fl = np.concatenate([fl[keep], fm[keep]])
        new_fm = np.concatenate([flm[keep], frm[keep]])
        new_fr = np.concatenate([fm[keep], fr[keep]])
        S = np.concatenate([S_l[keep], S_r[keep]])
        budget = np.concatenate([budget[keep] / 2.0, budget[keep] / 2.0])
        depth = np.concatenate([depth[keep] + 1, depth[keep] + 1])
        left = np.concatenate([left[keep], mid[keep]])
        right = np.concatenate([mid[keep], right[keep]])
        fl, fm, fr = new_fl, new_fm, new_fr

    if not err_total <= tol:
        raise ConvergenceError(
            "quadrature did not converge after maximum refinement",
            best=value,
            error_estimate=err_total,
        )
    return QuadResult(value=value, error_estimate=err_total, evaluations=evals)


def tail_decay_check(v6: float, v8: float, v10: float) -> tuple[bool, float]:
    """Judge convergence of a tail-truncated integral from three cutoffs.

    v6, v8, v10 are the integral up to the 1-1e-6, 1-1e-8, 1-1e-10
    quantiles.  Converging tails show geometrically shrinking increments;
    the geometric extrapolation of the remainder is returned so callers
    can weigh it against their tolerance.
    """
    inc1 = abs(v8 - v6)
    inc2 = abs(v10 - v8)
    if inc2 <= 1e-9 * (1.0 + abs(v10)):
        return True, inc2
    if inc2 > 0.9 * inc1:
        return False, math.inf
    r = inc2 / max(inc1, 1e-300)
    return True, inc2 * r / (1.0 - r)


def invert_cdf(
    F: Callable[[float], float],
    p: float,
    bracket: tuple[float, float],
    tol: float = 1e-10,
    pdf: Optional[Callable[[float], float]] = None,
) -> float:
    """Left-continuous inverse of a nondecreasing F at probability p.

    Bisects the bracket down to relative width 1e-12, then applies one
    Newton polish when a density is supplied.  The bracket must satisfy
    F(lo) <= p <= F(hi).
    """
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly inside (0, 1)")
    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise ValueError("bracket must satisfy lo < hi")
    Flo, Fhi = float(F(lo)), float(F(hi))
    if math.isnan(Flo) or math.isnan(Fhi):
        raise EvaluationError("CDF returned NaN at a bracket endpoint", where=lo)
    if not (Flo <= p <= Fhi):
        raise ValueError(
            f"p={p} outside CDF range [{Flo}, {Fhi}] on the bracket"
        )
    width_goal = 1e-12 * (1.0 + abs(lo) + abs(hi))
    for _ in range(200):
        if hi - lo <= width_goal:
            break
        mid = 0.5 * (lo + hi)
        Fm = float(F(mid))
        if math.isnan(Fm):
            raise EvaluationError("CDF returned NaN during bisection", where=mid)
        if Fm >= p:
            hi = mid
        else:
            lo = mid
    x = hi
    if pdf is not None:
        d = float(pdf(x))
        if np.isfinite(d) and d > 0:
            cand = x - (float(F(x)) - p) / d
            if bracket[0] <= cand <= bracket[1] and abs(float(F(cand)) - p) <= abs(
                float(F(x)) - p
            ):
                x = cand
    return float(x)


def invert_cdf_many(
    F: Callable[[np.ndarray], np.ndarray],
    ps: np.ndarray,
    lo: float,
    hi: float,
    iters: int = 90,
) -> np.ndarray:
    """Vectorized bisection of a nondecreasing F at an array of probabilities."""
    ps = np.asarray(ps, dtype=float)
    los = np.full(ps.shape, float(lo))
    his = np.full(ps.shape, float(hi))
    fv = vectorized(F)
    for _ in range(iters):
        mids = 0.5 * (los + his)
        vals = fv(mids)
        go_left = vals >= ps
        his = np.where(go_left, mids, his)
        los = np.where(go_left, los, mids)
    return his


def monotone_on_grid(
    f: Callable[[float], float],
    grid: Grid,
    band: Optional[float] = None,
) -> MonotoneVerdict:
    """Certify the direction of f on a finite grid.

    Increasing: no consecutive drop beyond band and a total rise beyond it;
    decreasing symmetrically; flat when total variation stays inside band.
    Otherwise non-monotone with a witness pair for the steepest violation.
    """
    fv = vectorized(f)
    ys = fv(grid.points)
    if np.any(np.isnan(ys)):
        x0 = float(grid.points[np.isnan(ys)][0])
        raise EvaluationError(f"function returned NaN at grid point {x0}", where=x0)
    if band is None:
        band = 1e-7 * (1.0 + float(np.max(np.abs(ys))))
    if band < 0:
        raise ValueError("band must be non-negative")
    deltas = np.diff(ys)
    if float(np.sum(np.abs(deltas))) <= band:
        return MonotoneVerdict(kind="flat-within-tolerance")
    rise = float(ys[-1] - ys[0])
    drops = deltas < -band
    gains = deltas > band
    if not np.any(drops) and rise > band:
        return MonotoneVerdict(kind="increasing")
    if not np.any(gains) and -rise > band:
        return MonotoneVerdict(kind="decreasing")
    # witness the steepest step against the dominant direction
    if rise >= 0:
        i = int(np.argmin(deltas))
    else:
        i = int(np.argmax(deltas))
    witness = (float(grid.points[i]), float(grid.points[i + 1]))
    return MonotoneVerdict(kind="non-monotone", witness=witness)


def log_poisson_weight(k: int, L: float) -> float:
    """log(L^k / k!) with the 0 log 0 = 0 convention at L = 0."""
    if k < 0:
        raise ValueError("k must be a non-negative integer")
    if L < 0:
        raise ValueError("L must be non-negative")
    if L == 0.0:
        return 0.0 if k == 0 else -math.inf
    return k * math.log(L) - math.lgamma(k + 1)


def logsumexp(a: np.ndarray, axis=None) -> np.ndarray:
    """Stable log(sum(exp(a))) along an axis."""
    a = np.asarray(a, dtype=float)
    m = np.max(a, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    out = np.log(np.sum(np.exp(a - m), axis=axis, keepdims=True)) + m
    if axis is None:
        return float(out)
    return np.squeeze(out, axis=axis)


class CumulativeIntegral:
    """Immutable table for A(t) = integral of g from the first anchor to t.

    Segment integrals between consecutive anchors are computed once at
    construction; a query interpolates by adding a stateless adaptive
    correction from the nearest anchor below.  With a dense anchor set the
    corrections are tiny, so evaluation at grids, quadrature nodes, or
    Monte Carlo samples is a cheap vectorized pass with no shared mutable
    state.  Integrable endpoint singularities are accepted with their
    residual charged to error_acc; divergent segments raise
    ConvergenceError.
    """

    def __init__(self, g: Callable, anchors, seg_tol: float = 1e-11):
        self._g = vectorized(g)
        self.seg_tol = float(seg_tol)
        xs = np.unique(np.asarray(anchors, dtype=float))
        if xs.size == 0 or not np.all(np.isfinite(xs)):
            raise ValueError("anchors must be a non-empty finite array")
        seg, errs = _segment_integrals(self._g, xs[:-1], xs[1:], self.seg_tol)
        self._raise_if_diverging(xs[:-1], xs[1:], seg, errs)
        self._xs = xs
        self._as = np.concatenate([[0.0], np.cumsum(seg)])
        self.error_acc = float(np.sum(errs))
        self.x0 = float(xs[0])

    @staticmethod
    def _raise_if_diverging(lefts, rights, seg, errs) -> None:
        diverging = errs > 0.01 * (1.0 + np.abs(seg))
        if np.any(diverging):
            i = int(np.where(diverging)[0][0])
            raise ConvergenceError(
                f"cumulative integral appears to diverge on "
                f"[{float(np.atleast_1d(lefts)[i])}, {float(np.atleast_1d(rights)[i])}]",
                best=float(np.atleast_1d(seg)[i]),
                error_estimate=float(np.atleast_1d(errs)[i]),
            )

    def __call__(self, t):
        scalar = np.isscalar(t) or np.ndim(t) == 0
        ts = np.atleast_1d(np.asarray(t, dtype=float))
        idx = np.clip(np.searchsorted(self._xs, ts, side="right") - 1, 0, None)
        base = self._as[idx]
        lefts = self._xs[idx]
        corr, errs = _segment_integrals(
            self._g, lefts, np.maximum(ts, lefts), self.seg_tol
        )
        self._raise_if_diverging(lefts, ts, corr, errs)
        out = base + corr
        return float(out[0]) if scalar else out


def _segment_integrals(
    gv: Callable,
    lefts: np.ndarray,
    rights: np.ndarray,
    seg_tol: float,
    depth: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """Simpson values and error estimates over many segments at once.

    Non-finite endpoint values are nudged inward; segments still failing
    their tolerance at the depth cap are returned with their error so the
    caller can decide whether the residual is acceptable.
    """
    lefts = np.asarray(lefts, dtype=float)
    rights = np.asarray(rights, dtype=float)
    out = np.zeros(lefts.shape)
    errs = np.zeros(lefts.shape)
    live = rights > lefts
    if not np.any(live):
        return out, errs
    l_, r_ = lefts[live].copy(), rights[live].copy()
    m_ = 0.5 * (l_ + r_)
    lm = 0.5 * (l_ + m_)
    rm = 0.5 * (m_ + r_)
    all_pts = np.concatenate([l_, lm, m_, rm, r_])
    vals = gv(all_pts)
    _check_nan(all_pts, vals)
    n = l_.size
    gl, glm, gm, grm, gr = (vals[i * n : (i + 1) * n].copy() for i in range(5))
    # nudge endpoint blow-ups inward (integrable singularities)
    for arr, pts, toward in ((gl, l_, lm), (gr, r_, rm)):
        blown = ~np.isfinite(arr)
        if np.any(blown):
            nudged = pts[blown] + 1e-12 * (toward[blown] - pts[blown])
            arr[blown] = gv(nudged)
            if np.any(~np.isfinite(arr[blown])):
                raise EvaluationError(
                    "integrand not finite near a segment endpoint",
                    where=float(pts[blown][0]),
                )
    h = r_ - l_
    S1 = h / 6.0 * (gl + 4.0 * gm + gr)
    S2 = h / 12.0 * (gl + 4.0 * glm + gm) + h / 12.0 * (gm + 4.0 * grm + gr)
    err = np.abs(S2 - S1) / 15.0
    res = S2 + (S2 - S1) / 15.0
    bad = (err > np.maximum(seg_tol, 1e-14 * np.abs(res))) | ~np.isfinite(err)
    if np.any(bad) and depth < _MAX_DEPTH:
        half1, e1 = _segment_integrals(gv, l_[bad], m_[bad], seg_tol / 2.0, depth + 1)
        half2, e2 = _segment_integrals(gv, m_[bad], r_[bad], seg_tol / 2.0, depth + 1)
        res[bad] = half1 + half2
        err[bad] = e1 + e2
    out[live] = res
    errs[live] = np.where(np.isfinite(err), err, np.inf)
    return out, errs
