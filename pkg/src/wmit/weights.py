"""Weight functions phi and their cumulative weights psi(x) = int_0^x phi.

The catalog covers the transforms used throughout the library: identity,
power, half-square (the strong-MIT weight phi(x) = x), plus the
context-dependent weights built from another distribution: its CDF, its
hazard rate, its survival odds, the negative log-density, and the
reversed-hazard-times-MIT weight that yields the dynamic cumulative
entropy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError, DomainError, PreconditionError
from .numerics import Grid, integrate, vectorized

WEIGHT_KINDS = (
    "identity",
    "power",
    "half-square",
    "cdf-of",
    "hazard-of",
    "odds-of",
    "neglog-density",
    "mit-of",
)


@dataclass(frozen=True, eq=False)
class WeightFn:
    """Non-negative weight phi with cumulative weight psi, psi(0) = 0.

    phi_times_cdf / phi_times_sf hold the exact product of phi with the
    context's CDF / survival when the algebra cancels a division (odds,
    hazard, MIT-based weights); curve integrators use them to avoid
    removable singularities when integrating against the same context.
    """

    kind: str
    phi: Callable
    psi: Callable
    convexity: str  # convex | concave | both | neither | unknown
    params: dict = field(default_factory=dict)
    ctx: object = None
    phi_times_cdf: Optional[Callable] = None
    phi_times_sf: Optional[Callable] = None

    def describe(self) -> dict:
        out = {"kind": self.kind, "convexity": self.convexity, **self.params}
        if self.ctx is not None:
            out["ctx"] = self.ctx.describe()
        return out

    def __repr__(self):
        ps = ", ".join(f"{k}={v:g}" for k, v in self.params.items())
        return f"weight:{self.kind}({ps})"


def make_weight(kind: str, r: Optional[float] = None, ctx=None) -> WeightFn:
    """Build one of the catalogued weights.

    Context-dependent kinds (cdf-of, hazard-of, odds-of, neglog-density,
    mit-of) require ctx; neglog-density additionally needs a decreasing
    density with a finite positive value at the origin (grid-checked).
    """
    key = kind.strip().lower()
    if key == "identity":
        return WeightFn(
            kind=key,
            phi=lambda x: np.ones_like(np.asarray(x, dtype=float)),
            psi=lambda x: np.asarray(x, dtype=float),
            convexity="both",
        )
    if key == "power":
        if r is None:
            raise ConfigError("power weight needs the exponent r")
        if r <= 0:
            raise DomainError(f"power exponent must be positive, got {r}")
        convexity = "both" if r == 1 else ("convex" if r > 1 else "concave")

        def phi(x):
            xs = np.asarray(x, dtype=float)
            return r * np.power(np.maximum(xs, 1e-300), r - 1.0)

        return WeightFn(
            kind=key,
            phi=phi,
            psi=lambda x: np.power(np.maximum(np.asarray(x, dtype=float), 0.0), r),
            convexity=convexity,
            params={"r": r},
        )
    if key in ("half-square", "halfsquare", "half_square"):
        return WeightFn(
            kind="half-square",
            phi=lambda x: np.asarray(x, dtype=float),
            psi=lambda x: 0.5 * np.asarray(x, dtype=float) ** 2,
            convexity="convex",
        )
    if key in ("cdf-of", "hazard-of", "odds-of", "neglog-density", "mit-of"):
        if ctx is None:
            raise ConfigError(f"weight kind {kind!r} needs a context distribution")
        return _context_weight(key, ctx)
    raise ConfigError(f"unknown weight kind {kind!r}; choose from {WEIGHT_KINDS}")


def _context_weight(key: str, ctx) -> WeightFn:
    cdf = vectorized(ctx.cdf)
    sf = vectorized(ctx.sf)

    if key == "cdf-of":
        if ctx.pdf is None:
            raise ConfigError("cdf-of weight needs a context with a density")
        return WeightFn(
            kind=key, phi=vectorized(ctx.pdf), psi=cdf, convexity="unknown", ctx=ctx
        )

    if key == "hazard-of":
        if ctx.pdf is None:
            raise ConfigError("hazard-of weight needs a context with a density")
        pdf = vectorized(ctx.pdf)

        def phi(x):
            s = sf(x)
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.where(s > 0.0, pdf(x) / np.where(s > 0.0, s, 1.0), np.inf)

        def psi(x):
            s = sf(x)
            with np.errstate(divide="ignore"):
                return np.where(s > 0.0, -np.log(np.where(s > 0.0, s, 1.0)), np.inf)

        return WeightFn(
            kind=key, phi=phi, psi=psi, convexity="unknown", ctx=ctx,
            phi_times_sf=pdf,
        )

    if key == "odds-of":
        def phi(x):
            c = cdf(x)
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.where(c > 0.0, sf(x) / np.where(c > 0.0, c, 1.0), np.inf)

        lower = ctx.lower

        def psi(x):
            # may legitimately diverge near the lower endpoint; the
            # quadrature raises in that case
            xs = np.atleast_1d(np.asarray(x, dtype=float))
            out = np.array(
                [integrate(phi, lower, t, tol=1e-9).value if t > lower else 0.0 for t in xs]
            )
            return out if np.ndim(x) else float(out[0])

        return WeightFn(
            kind=key, phi=phi, psi=psi, convexity="unknown", ctx=ctx,
            phi_times_cdf=sf,
        )

    if key == "neglog-density":
        if ctx.pdf is None:
            raise ConfigError("neglog-density weight needs a context with a density")
        pdf = vectorized(ctx.pdf)
        x0 = max(ctx.lower, 1e-12)
        f0 = float(pdf(np.array([x0]))[0])
        if not (0.0 < f0 < math.inf):
            raise PreconditionError(
                f"density at the origin must be finite and positive, got {f0}"
            )
        _require_decreasing_pdf(ctx, pdf)

        def phi(x):
            xs = np.asarray(x, dtype=float)
            h = 1e-6 * (1.0 + np.abs(xs))
            lo = np.maximum(xs - h, x0)
            num = pdf(lo) - pdf(xs + h)
            return num / (xs + h - lo) / np.maximum(pdf(xs), 1e-300)

        def psi(x):
            return -np.log(np.maximum(pdf(x), 1e-300) / f0)

        return WeightFn(kind=key, phi=phi, psi=psi, convexity="unknown", ctx=ctx)

    if key == "mit-of":
        from . import inactivity  # deferred: inactivity builds on weights

        if ctx.pdf is None:
            raise ConfigError("mit-of weight needs a context with a density")
        curve = inactivity.wmit_fn(ctx, make_weight("identity"))
        pdf = vectorized(ctx.pdf)

        # phi = tau * MIT = pdf * cumulative / F^2; bounded even where the
        # CDF underflows, so bypass the curve's domain-floor guard
        def phi(x):
            xs = np.atleast_1d(np.asarray(x, dtype=float))
            c = np.maximum(cdf(xs), 1e-300)
            out = pdf(xs) * np.asarray(curve.cumulative(xs), dtype=float) / c**2
            return out if np.ndim(x) else float(out[0])

        def psi(x):
            xs = np.atleast_1d(np.asarray(x, dtype=float))
            c = np.maximum(cdf(xs), 1e-300)
            out = xs - np.asarray(curve.cumulative(xs), dtype=float) / c
            return out if np.ndim(x) else float(out[0])

        def phi_times_cdf(x):
            xs = np.atleast_1d(np.asarray(x, dtype=float))
            c = np.maximum(cdf(xs), 1e-300)
            out = pdf(xs) * np.asarray(curve.cumulative(xs), dtype=float) / c
            return out if np.ndim(x) else float(out[0])

        return WeightFn(
            kind=key, phi=phi, psi=psi, convexity="unknown", ctx=ctx,
            phi_times_cdf=phi_times_cdf,
        )

    raise ConfigError(f"unhandled weight kind {key!r}")


def _require_decreasing_pdf(ctx, pdf) -> None:
    from .distributions import default_grid

    grid = default_grid(ctx, n=256)
    vals = pdf(grid.points)
    rises = np.diff(vals) > 1e-9 * (1.0 + np.max(np.abs(vals)))
    if np.any(rises):
        x_bad = float(grid.points[:-1][rises][0])
        raise PreconditionError(
            f"neglog-density weight needs a decreasing density; "
            f"it rises at x={x_bad}",
            witness=x_bad,
        )


def custom_weight(
    phi: Callable,
    psi: Optional[Callable] = None,
    kind: str = "custom",
    convexity: str = "unknown",
    lower: float = 0.0,
    ctx=None,
    phi_times_cdf: Optional[Callable] = None,
    phi_times_sf: Optional[Callable] = None,
) -> WeightFn:
    """Wrap a hand-rolled weight; a missing psi falls back to quadrature."""
    phi_v = vectorized(phi)
    if psi is None:
        def psi(x):  # noqa: E306 - deliberate fallback definition
            xs = np.atleast_1d(np.asarray(x, dtype=float))
            out = np.array(
                [integrate(phi_v, lower, t, tol=1e-9).value if t > lower else 0.0 for t in xs]
            )
            return out if np.ndim(x) else float(out[0])

    return WeightFn(
        kind=kind,
        phi=phi_v,
        psi=psi,
        convexity=convexity,
        ctx=ctx,
        phi_times_cdf=phi_times_cdf,
        phi_times_sf=phi_times_sf,
    )


def check_bounds(w: WeightFn, grid: Grid) -> tuple[float, float]:
    """Envelope (m, M) of phi over the grid, feeding the sandwich bounds."""
    vals = np.asarray(vectorized(w.phi)(grid.points), dtype=float)
    if np.any(np.isnan(vals)):
        raise DomainError("weight evaluation produced NaN on the grid")
    return float(np.min(vals)), float(np.max(vals))


def certify_convexity(
    w: WeightFn, lo: float, hi: float, pairs: int = 512, seed: int = 7
) -> str:
    """Midpoint-inequality certificate for psi on [lo, hi].

    Grid-level evidence only: returns 'convex', 'concave', 'both', or
    'neither' relative to the sampled pairs.
    """
    rng = np.random.default_rng(seed)
    a = lo + (hi - lo) * rng.random(pairs)
    b = lo + (hi - lo) * rng.random(pairs)
    psi = vectorized(w.psi)
    mid = psi(0.5 * (a + b))
    avg = 0.5 * (psi(a) + psi(b))
    tol = 1e-9 * (1.0 + np.max(np.abs(avg)))
    convex_ok = np.all(mid <= avg + tol)
    concave_ok = np.all(mid >= avg - tol)
    if convex_ok and concave_ok:
        return "both"
    if convex_ok:
        return "convex"
    if concave_ok:
        return "concave"
    return "neither"


def declared_or_certified_convexity(w: WeightFn, lo: float, hi: float) -> str:
    """Use the declared label when present, else grid-certify."""
    if w.convexity != "unknown":
        return w.convexity
    return certify_convexity(w, lo, hi)


def is_convex(label: str) -> bool:
    return label in ("convex", "both")


def is_concave(label: str) -> bool:
    return label in ("concave", "both")


IDENTITY = make_weight("identity")
HALF_SQUARE = make_weight("half-square")


def from_spec(spec, ctx_builder=None) -> WeightFn:
    """Build a weight from {"kind": ..., "r": ..., "ctx": dist-spec} or
    the CLI shorthand "kind", "power:r=2", "cdf-of:<dist-spec>"."""
    from . import distributions

    if isinstance(spec, WeightFn):
        return spec
    if isinstance(spec, str):
        head, _, rest = spec.partition(":")
        head = head.strip().lower()
        if head == "power":
            if not rest:
                raise ConfigError("power weight spec needs r, e.g. power:r=2")
            key, _, val = rest.partition("=")
            if key.strip() != "r" or not val:
                raise ConfigError(f"malformed power weight spec {spec!r}")
            return make_weight("power", r=float(val))
        if head in ("cdf-of", "hazard-of", "odds-of", "neglog-density", "mit-of"):
            if not rest:
                raise ConfigError(f"{head} weight spec needs a distribution, "
                                  f"e.g. {head}:exponential:rate=1")
            return make_weight(head, ctx=distributions.from_spec(rest))
        return make_weight(head)
    if isinstance(spec, dict):
        kind = spec.get("kind")
        if kind is None:
            raise ConfigError("weight spec needs a 'kind'")
        ctx = spec.get("ctx")
        if ctx is not None:
            ctx = distributions.from_spec(ctx)
        return make_weight(kind, r=spec.get("r"), ctx=ctx)
    raise ConfigError(f"weight spec must be a dict or string, got {type(spec)}")
