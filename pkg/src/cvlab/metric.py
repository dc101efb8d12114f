"""Metric models on C^n built from a single radial generator.

With r = |z|^2, a rotation-invariant Kahler form is determined by one radial
coefficient: we carry h(r) (the angular coefficient), its average
f(r) = (1/r) * integral of h, and the profile xi(r) = -r h'(r)/h(r).  The
model tabulates everything on one master grid in the native coordinate of the
generator (r for xi- and h-kind profiles, the transverse coordinate x with
x^2 = r*h for F''-kind profiles) and exposes vectorized callables for the
geodesic distance s, the normalized volume v = r*f, and the three curvature
components.

Key cancellation-free identities used throughout (w := r*(f - h) = v - r*h):

    B = (xi*v - w) / v^2       C = 2*w / v^2

both manifestly nonnegative for nondecreasing xi, and numerically stable all
the way to the origin where naive differences of near-equal terms lose every
significant digit.
"""

from __future__ import annotations

import enum
import json
import logging
import math
import os
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy.interpolate import PchipInterpolator

from .profiles import (
    FamilySpec,
    GeneratorKind,
    GeneratorProfile,
    ProfileDomainError,
    ProfileError,
    eval_profile,
)
from .quadrature import CumulativeIntegral, extrapolate_limit, grid_derivative

log = logging.getLogger(__name__)

FLAT_TOL = 1e-10  # sup xi below this counts as flat
ATTAIN_TOL = 1e-9  # xi within this of 1 at finite radius counts as attained
LIMIT_TOL = 1e-6  # xi limits below 1 - LIMIT_TOL are safely sub-saturated


def ball_coefficient(n: int) -> float:
    """Euclidean volume coefficient: Vol B(s) = c_n s^(2n) on flat C^n."""
    return math.pi**n / math.factorial(n)


class Representation(enum.Enum):
    FROM_XI = "from_xi"
    FROM_F = "from_f"


class MetricClass(enum.Enum):
    FLAT = "flat"
    S1 = "S1"  # xi_inf < 1: Euclidean volume growth with reduced constant
    S2 = "S2"  # xi_inf = 1 unattained: degenerate-Euclidean growth
    S3 = "S3"  # xi = 1 at finite r0: cylinder-like end, linear volume growth


class VolumeGrowth(enum.Enum):
    EUCLIDEAN = "euclidean"
    SUB_EUCLIDEAN = "sub_euclidean"
    HALF_DIMENSIONAL = "half_dimensional"


@dataclass(frozen=True)
class Classification:
    metric_class: MetricClass
    xi_infinity: float
    volume_growth: VolumeGrowth
    r0: float = math.inf
    x0: float = math.inf
    ambiguous_tail: bool = False

    def as_dict(self) -> dict:
        return {
            "metric_class": self.metric_class.value,
            "xi_infinity": self.xi_infinity,
            "volume_growth": self.volume_growth.value,
            "r0": self.r0,
            "x0": self.x0,
            "ambiguous_tail": self.ambiguous_tail,
        }


@dataclass(frozen=True)
class BuildOptions:
    grid_size: int = 4096
    r_max: float = 1e8  # span of the r-grid for xi- and h-kind profiles
    x_max: float | None = None  # span of the x-grid for fpp-kind; default from profile
    h0: float = 1.0
    gl_order: int = 8
    nodes_per_feature: int = 256  # refinement nodes per profile transition
    quad_rel_tol: float = 1e-8
    series_points: int = 64

    @staticmethod
    def from_env(**overrides) -> "BuildOptions":
        opts = BuildOptions(**overrides)
        if "CVLAB_GRID" in os.environ and "grid_size" not in overrides:
            opts = replace(opts, grid_size=int(os.environ["CVLAB_GRID"]))
        if "CVLAB_TOL" in os.environ and "quad_rel_tol" not in overrides:
            opts = replace(opts, quad_rel_tol=float(os.environ["CVLAB_TOL"]))
        return opts


def _master_grid(source, end: float, opts: BuildOptions) -> np.ndarray:
    lo = min(1e-8, end * 1e-10)
    pieces = [np.array([0.0]), np.geomspace(lo, end, opts.grid_size)]
    bps = np.asarray(source.breakpoints(), dtype=float)
    if bps.size:
        pieces.append(bps[(bps > 0) & (bps <= end)])
    ref = np.asarray(source.refinement_nodes(opts.nodes_per_feature), dtype=float)
    if ref.size:
        pieces.append(ref[(ref > 0) & (ref <= end)])
    grid = np.unique(np.concatenate(pieces))
    # prune near-duplicates so no quadrature cell degenerates
    keep = np.concatenate(([True], np.diff(grid) > 1e-14 * np.maximum(grid[1:], 1e-300)))
    return grid[keep]


class _XiEngine:
    """Tables and callables for a metric generated by xi(r) (or injected h)."""

    representation = Representation.FROM_XI

    def __init__(self, profile: GeneratorProfile, opts: BuildOptions):
        self.profile = profile
        self.opts = opts
        self.h0 = opts.h0
        end = min(profile.domain_end, opts.r_max)
        self.grid = _master_grid(profile.source, end, opts)

        if profile.kind is GeneratorKind.XI:
            xi0 = float(eval_profile(profile, 0.0))
            if abs(xi0) > 1e-9:
                raise ProfileError(
                    f"xi(0) = {xi0:.3g}; the h-integral needs xi(0) = 0 to converge"
                )
            self._xi_fn = lambda t: np.asarray(eval_profile(profile, t), dtype=float)
            # xi(0) = 0 makes xi(t)/t integrable; quadrature nodes never sit at 0
            self._log_h = CumulativeIntegral(
                lambda t: self._xi_fn(t) / t, self.grid, order=opts.gl_order
            )
            self._h_fn = lambda t: self.h0 * np.exp(-self._log_h(t))
        else:  # injected h; xi derived.  Origin-singular h is truncated at the grid floor.
            try:
                eval_profile(profile, 0.0)
            except (ArithmeticError, ProfileDomainError):
                self.grid = self.grid[self.grid > 0]
            self._h_fn = lambda t: np.asarray(eval_profile(profile, t), dtype=float)
            self._xi_fn = self._xi_from_h
            self._log_h = None

        self._v = CumulativeIntegral(self._h_fn, self.grid, order=opts.gl_order)
        self._w = CumulativeIntegral(
            lambda t: self._xi_fn(t) * self._h_fn(t), self.grid, order=opts.gl_order
        )
        ugrid = np.sqrt(self.grid)
        if ugrid[0] > 0:
            ugrid = np.concatenate(([0.0], ugrid))
        self._s_u = CumulativeIntegral(
            lambda u: np.sqrt(self._h_fn(u * u)), ugrid, order=opts.gl_order
        )

    def _xi_from_h(self, t):
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        hp = self.profile.source.derivative(t_arr)
        if hp is None:
            from .quadrature import derivative_fd

            # keep the difference stencil strictly inside (0, grid_end)
            floor = self.grid[0] if self.grid[0] > 0 else self.grid[1]
            centers = np.clip(t_arr, floor, self.grid[-1] * (1.0 - 2e-6))
            hp = derivative_fd(self._h_fn, centers)
        out = -t_arr * np.asarray(hp, dtype=float) / self._h_fn(t_arr)
        out[t_arr == 0.0] = 0.0
        return float(out[0]) if np.ndim(t) == 0 else out

    # -- callables in the native coordinate (r) --

    def xi_of(self, t):
        return self._xi_fn(np.asarray(t, dtype=float))

    def h_of(self, t):
        return self._h_fn(np.asarray(t, dtype=float))

    def v_of(self, t):
        return self._v(t)

    def w_of(self, t):
        return self._w(t)

    def f_of(self, t):
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty_like(t_arr)
        pos = t_arr > 0
        out[pos] = self._v(t_arr[pos]) / t_arr[pos]
        out[~pos] = self.h0
        return float(out[0]) if np.ndim(t) == 0 else out

    def s_of(self, t):
        return self._s_u(np.sqrt(np.asarray(t, dtype=float)))

    def r_of(self, t):
        return np.asarray(t, dtype=float)

    def x_of(self, t):
        t_arr = np.asarray(t, dtype=float)
        return np.sqrt(t_arr * self._h_fn(t_arr))

    def vprime_of(self, t):
        # dv/dr = h
        return self.h_of(t)

    def xi_prime_of(self, t):
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        exact = self.profile.source.derivative(t_arr)
        if exact is not None and self.profile.kind is GeneratorKind.XI:
            out = np.asarray(exact, dtype=float)
        else:
            from .quadrature import derivative_fd

            out = np.empty_like(t_arr)
            pos = t_arr > 0
            out[pos] = derivative_fd(self._xi_fn, t_arr[pos])
            if np.any(~pos):
                eps = 1e-7
                # second-order one-sided difference; xi(0) = 0
                out[~pos] = (4.0 * self._xi_fn(eps) - self._xi_fn(2 * eps)) / (2 * eps) - (
                    3.0 * self._xi_fn(0.0) / (2 * eps)
                )
        return float(out[0]) if np.ndim(t) == 0 else out

    def fprime_of(self, t):
        xi = np.atleast_1d(np.asarray(self.xi_of(t), dtype=float))
        out = np.full_like(xi, np.inf)
        sub = xi < 1.0
        out[sub] = np.sqrt(np.clip(xi[sub], 0.0, None) * (2.0 - xi[sub])) / (1.0 - xi[sub])
        return float(out[0]) if np.ndim(t) == 0 else out

    def abc_of(self, t):
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        h = np.atleast_1d(np.asarray(self.h_of(t_arr), dtype=float))
        A = np.atleast_1d(np.asarray(self.xi_prime_of(t_arr), dtype=float)) / h
        B = np.empty_like(t_arr)
        C = np.empty_like(t_arr)
        pos = t_arr > 0
        v = self._v(t_arr[pos])
        w = self._w(t_arr[pos])
        xi = np.atleast_1d(np.asarray(self._xi_fn(t_arr[pos]), dtype=float))
        B[pos] = (xi * v - w) / v**2
        C[pos] = 2.0 * w / v**2
        B[~pos] = 0.5 * A[~pos]
        C[~pos] = A[~pos]
        if np.ndim(t) == 0:
            return float(A[0]), float(B[0]), float(C[0])
        return A, B, C

    @property
    def breakpoints_native(self):
        return self.profile.source.breakpoints()


class _FEngine:
    """Tables and callables for a metric generated by F''(x)."""

    representation = Representation.FROM_F

    def __init__(self, profile: GeneratorProfile, opts: BuildOptions):
        self.profile = profile
        self.opts = opts
        self.h0 = opts.h0
        end = opts.x_max
        if end is None:
            end = profile.domain_end
            if not np.isfinite(end):
                bps = profile.source.breakpoints()
                end = 8.0 * float(np.max(bps)) if len(bps) else 1e4
        self.grid = _master_grid(profile.source, float(end), opts)

        self._fpp_fn = lambda t: np.asarray(eval_profile(profile, t), dtype=float)
        src = profile.source
        if src.cumulative(np.array([0.0])) is not None:
            self._fp_fn = lambda t: np.asarray(src.cumulative(np.asarray(t, dtype=float)), dtype=float)
        else:
            cum = CumulativeIntegral(self._fpp_fn, self.grid, order=opts.gl_order)
            self._fp_fn = cum

        # w = v - x^2 = integral of 2*tau*(sq - 1); sq - 1 written stably
        self._w = CumulativeIntegral(
            lambda t: 2.0 * t * self._sq_minus_1(t), self.grid, order=opts.gl_order
        )
        self._s = CumulativeIntegral(self._sq_fn, self.grid, order=opts.gl_order)
        # log(r/x^2): d/dx = 2*(sq - 1)/x, integrable since F'(x) ~ F''(0) x at 0
        self._logr = CumulativeIntegral(
            lambda t: 2.0 * self._sq_minus_1(t) / t, self.grid, order=opts.gl_order
        )

    def _sq_fn(self, t):
        return np.hypot(1.0, self._fp_fn(t))

    def _sq_minus_1(self, t):
        fp = self._fp_fn(t)
        return fp * fp / (1.0 + np.hypot(1.0, fp))

    # -- callables in the native coordinate (x) --

    def fprime_of(self, t):
        return self._fp_fn(np.asarray(t, dtype=float))

    def fpp_of(self, t):
        return self._fpp_fn(np.asarray(t, dtype=float))

    def xi_of(self, t):
        fp = self._fp_fn(np.asarray(t, dtype=float))
        sq = np.hypot(1.0, fp)
        return fp * fp / (sq * (1.0 + sq))

    def w_of(self, t):
        return self._w(t)

    def v_of(self, t):
        t_arr = np.asarray(t, dtype=float)
        return t_arr * t_arr + self._w(t_arr)

    def s_of(self, t):
        return self._s(t)

    def r_of(self, t):
        t_arr = np.asarray(t, dtype=float)
        return t_arr * t_arr * np.exp(self._logr(t_arr)) / self.h0

    def x_of(self, t):
        return np.asarray(t, dtype=float)

    def h_of(self, t):
        return self.h0 * np.exp(-self._logr(t))

    def f_of(self, t):
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.full_like(t_arr, self.h0)
        pos = t_arr > 0
        out[pos] = self.v_of(t_arr[pos]) * self.h_of(t_arr[pos]) / t_arr[pos] ** 2
        return float(out[0]) if np.ndim(t) == 0 else out

    def vprime_of(self, t):
        # dv/dx = 2*x*sqrt(1 + F'^2)
        t_arr = np.asarray(t, dtype=float)
        return 2.0 * t_arr * self._sq_fn(t_arr)

    def abc_of(self, t):
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        fp = self._fp_fn(t_arr)
        fpp = self._fpp_fn(t_arr)
        sq = np.hypot(1.0, fp)
        A = np.empty_like(t_arr)
        B = np.empty_like(t_arr)
        C = np.empty_like(t_arr)
        pos = t_arr > 0
        x = t_arr[pos]
        A[pos] = fp[pos] * fpp[pos] / (2.0 * x * sq[pos] ** 4)
        w = self._w(x)
        v = x * x + w
        B[pos] = (x * x * (sq[pos] - 1.0) - w) / (v * v * sq[pos])
        C[pos] = 2.0 * w / (v * v)
        if np.any(~pos):
            fpp0 = float(np.atleast_1d(self._fpp_fn(0.0))[0])
            A[~pos] = 0.5 * fpp0**2
            B[~pos] = 0.25 * fpp0**2
            C[~pos] = 0.5 * fpp0**2
        if np.ndim(t) == 0:
            return float(A[0]), float(B[0]), float(C[0])
        return A, B, C

    @property
    def breakpoints_native(self):
        return self.profile.source.breakpoints()


@dataclass(eq=False)
class MetricModel:
    n: int
    representation: Representation
    profile: GeneratorProfile
    options: BuildOptions
    classification: Classification
    engine: object = field(repr=False)
    r: np.ndarray = field(repr=False)
    x: np.ndarray = field(repr=False)
    h: np.ndarray = field(repr=False)
    f: np.ndarray = field(repr=False)
    xi: np.ndarray = field(repr=False)
    v: np.ndarray = field(repr=False)
    s: np.ndarray = field(repr=False)

    _s_inverse: object = field(default=None, repr=False)

    @property
    def c_n(self) -> float:
        return ball_coefficient(self.n)

    @property
    def native(self) -> np.ndarray:
        """The grid in the generator's own coordinate (r or x)."""
        return self.engine.grid

    @property
    def native_end(self) -> float:
        return float(self.engine.grid[-1])

    def radius_from_s(self, s):
        """Native radius at geodesic distance s (monotone log-log interpolation)."""
        if self._s_inverse is None:
            pos = (self.s > 0) & (self.native > 0)
            ls, lt = np.log(self.s[pos]), np.log(self.native[pos])
            keep = np.concatenate(([True], np.diff(ls) > 0))
            self._s_inverse = PchipInterpolator(ls[keep], lt[keep], extrapolate=False)
        s_arr = np.asarray(s, dtype=float)
        if np.any(s_arr <= 0) or np.any(s_arr > self.s[-1] * (1 + 1e-9)):
            raise ValueError(
                f"distance outside the tabulated range (0, {self.s[-1]:.6g}]"
            )
        out = np.exp(self._s_inverse(np.clip(np.log(s_arr), self._s_inverse.x[0], self._s_inverse.x[-1])))
        return float(out) if np.ndim(s) == 0 else out

    def describe(self) -> dict:
        cls = self.classification
        return {
            "profile": self.profile.name,
            "n": self.n,
            "representation": self.representation.value,
            "classification": cls.as_dict(),
            "grid_nodes": len(self.native),
            "native_end": self.native_end,
            "s_end": float(self.s[-1]),
        }


def _classify(engine, profile: GeneratorProfile, grid, xi, opts) -> Classification:
    sup_xi = float(np.max(xi))
    if sup_xi <= FLAT_TOL:
        return Classification(MetricClass.FLAT, 0.0, VolumeGrowth.EUCLIDEAN)

    attained = xi >= 1.0 - ATTAIN_TOL
    if np.any(attained):
        first = int(np.argmax(attained))
        if float(np.min(xi[first:])) >= 1.0 - 2.0 * ATTAIN_TOL:
            r0 = getattr(profile.source, "r0", None)
            if r0 is None:
                # first grid crossing of the attainment level
                lo = max(first - 1, 0)
                seg_t, seg_xi = grid[lo : first + 1], xi[lo : first + 1]
                r0 = float(np.interp(1.0 - ATTAIN_TOL, seg_xi, seg_t))
            r0 = float(r0)
            x0 = math.sqrt(r0 * float(np.atleast_1d(engine.h_of(r0))[0]))
            return Classification(
                MetricClass.S3, 1.0, VolumeGrowth.HALF_DIMENSIONAL, r0=r0, x0=x0
            )

    mass = profile.source.total_mass
    if profile.kind is GeneratorKind.FPP and mass is not None:
        xi_inf = mass * mass / (math.hypot(1.0, mass) * (1.0 + math.hypot(1.0, mass)))
    else:
        probes = grid[-1] / np.array([100.0, 10.0, 1.0])
        xi_inf = extrapolate_limit(np.asarray(engine.xi_of(probes), dtype=float))
    xi_inf = float(np.clip(xi_inf, 0.0, 1.0))

    if xi_inf < 1.0 - LIMIT_TOL:
        return Classification(MetricClass.S1, xi_inf, VolumeGrowth.EUCLIDEAN)
    log.warning(
        "xi limit estimate %.12g is within %g of 1 but never attained on the grid; "
        "classifying S2 (degenerate growth) with ambiguous_tail set",
        xi_inf,
        LIMIT_TOL,
    )
    return Classification(
        MetricClass.S2, xi_inf, VolumeGrowth.SUB_EUCLIDEAN, ambiguous_tail=True
    )


def build_metric(profile, n: int, options: BuildOptions | None = None) -> MetricModel:
    """Build a full metric model from a generator profile (or FamilySpec)."""
    if isinstance(profile, FamilySpec):
        from .families import family_from_spec

        return family_from_spec(profile, options)
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise ProfileError(
            f"complex dimension must be an integer >= 2, got {n!r}; "
            "n = 1 has no transverse curvature components"
        )
    opts = options or BuildOptions()

    if profile.kind is GeneratorKind.FPP:
        engine: object = _FEngine(profile, opts)
    else:
        engine = _XiEngine(profile, opts)

    grid = engine.grid
    xi = np.asarray(engine.xi_of(grid), dtype=float)
    classification = _classify(engine, profile, grid, xi, opts)
    return MetricModel(
        n=int(n),
        representation=engine.representation,
        profile=profile,
        options=opts,
        classification=classification,
        engine=engine,
        r=np.asarray(engine.r_of(grid), dtype=float),
        x=np.asarray(engine.x_of(grid), dtype=float),
        h=np.asarray(engine.h_of(grid), dtype=float),
        f=np.asarray(engine.f_of(grid), dtype=float),
        xi=xi,
        v=np.asarray(engine.v_of(grid), dtype=float),
        s=np.asarray(engine.s_of(grid), dtype=float),
    )


def classify(model: MetricModel) -> Classification:
    return model.classification


def completeness_check(model: MetricModel) -> bool:
    """Divergence of the distance integral: tail exponent of sqrt(h/r) >= -1.

    The integrand of s is sqrt(h(u^2)) in u = sqrt(r); its log-log tail slope
    is -(1 + xi_inf)/2 per unit log r, so completeness is exactly xi_inf <= 1.
    Measured from the h table directly so injected-h models are covered too.
    """
    if np.any(model.h <= 0.0) or np.any(model.f <= 0.0):
        return False
    grid = model.native
    mask = grid >= grid[-1] / 10.0
    slope_h = np.polyfit(np.log(model.r[mask]), np.log(model.h[mask]), 1)[0]
    exponent = 0.5 * (slope_h - 1.0)
    return bool(exponent >= -1.0 - 1e-6)


# ---------------------------------------------------------------------------
# gauge conversions


def fprime_from_xi(xi):
    """F' = sqrt(xi(2 - xi))/(1 - xi); requires 0 <= xi < 1."""
    xi_arr = np.asarray(xi, dtype=float)
    if np.any(xi_arr < 0.0) or np.any(xi_arr >= 1.0):
        raise ValueError("fprime_from_xi needs 0 <= xi < 1 (xi = 1 is the cylinder limit)")
    out = np.sqrt(xi_arr * (2.0 - xi_arr)) / (1.0 - xi_arr)
    return float(out) if np.ndim(xi) == 0 else out


def xi_from_fprime(fprime):
    """Inverse of :func:`fprime_from_xi`, written to avoid cancellation."""
    fp = np.asarray(fprime, dtype=float)
    if np.any(fp < 0.0):
        raise ValueError("xi_from_fprime needs F' >= 0")
    sq = np.hypot(1.0, fp)
    out = fp * fp / (sq * (1.0 + sq))
    return float(out) if np.ndim(fprime) == 0 else out


def xi_to_h(xi_profile, h0: float = 1.0, grid=None) -> np.ndarray:
    """Tabulate h on a grid from a xi profile: h = h0 exp(-int xi/t dt)."""
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 2:
        raise ValueError("need a 1-d grid with at least two points")
    if callable(xi_profile) and not isinstance(xi_profile, GeneratorProfile):
        fn = lambda t: np.asarray(xi_profile(t), dtype=float)
    else:
        fn = lambda t: np.asarray(eval_profile(xi_profile, t), dtype=float)
    work = grid if grid[0] == 0.0 else np.concatenate(([0.0], grid))
    cum = CumulativeIntegral(lambda t: fn(t) / t, work)
    return h0 * np.exp(-cum(grid))


def h_to_f(h_values, grid) -> np.ndarray:
    """Average h on a grid: f(r) = (1/r) int_0^r h; f(0) = h(0)."""
    grid = np.asarray(grid, dtype=float)
    if callable(h_values):
        fn = h_values
    else:
        h_arr = np.asarray(h_values, dtype=float)
        if h_arr.shape != grid.shape:
            raise ValueError("h table and grid must have matching shapes")
        fn = PchipInterpolator(grid, h_arr)
    work = grid if grid[0] == 0.0 else np.concatenate(([0.0], grid))
    cum = CumulativeIntegral(lambda t: np.asarray(fn(t), dtype=float), work)
    out = np.empty_like(grid)
    pos = grid > 0
    out[pos] = cum(grid[pos]) / grid[pos]
    if np.any(~pos):
        out[~pos] = np.asarray(fn(np.array([0.0])), dtype=float)[0]
    return out


# ---------------------------------------------------------------------------
# serialization (schema 1)


def save_metric(model: MetricModel, path) -> None:
    grid = model.native
    doc = {
        "schema": 1,
        "n": model.n,
        "representation": model.representation.value,
        "profile_name": model.profile.name,
        "options": asdict(model.options),
        "classification": model.classification.as_dict(),
        "native": grid.tolist(),
        "tables": {
            "r": model.r.tolist(),
            "x": model.x.tolist(),
            "h": model.h.tolist(),
            "f": model.f.tolist(),
            "xi": model.xi.tolist(),
            "v": model.v.tolist(),
            "s": model.s.tolist(),
            "w": np.asarray(model.engine.w_of(grid), dtype=float).tolist(),
            "vprime": np.asarray(model.engine.vprime_of(grid), dtype=float).tolist(),
        },
    }
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w") as fh:
        json.dump(doc, fh)
        fh.write("\n")
    os.replace(tmp, path)


class _TableEngine:
    """Engine reconstructed from saved tables; interpolated, reduced fidelity."""

    def __init__(self, native, tables, representation, h0):
        self.grid = np.asarray(native, dtype=float)
        self.representation = representation
        self.h0 = h0
        self._tables = {k: np.asarray(v, dtype=float) for k, v in tables.items()}
        self._interp = {}
        self._dxi_dr = grid_derivative(self._tables["xi"], self._tables["r"])

    def _at(self, key, t):
        if key not in self._interp:
            self._interp[key] = PchipInterpolator(self.grid, self._tables[key], extrapolate=False)
        t_arr = np.clip(np.asarray(t, dtype=float), self.grid[0], self.grid[-1])
        out = self._interp[key](t_arr)
        return float(out) if np.ndim(t) == 0 else out

    def xi_of(self, t):
        return self._at("xi", t)

    def h_of(self, t):
        return self._at("h", t)

    def f_of(self, t):
        return self._at("f", t)

    def v_of(self, t):
        return self._at("v", t)

    def w_of(self, t):
        return self._at("w", t)

    def s_of(self, t):
        return self._at("s", t)

    def r_of(self, t):
        return self._at("r", t)

    def x_of(self, t):
        return self._at("x", t)

    def vprime_of(self, t):
        return self._at("vprime", t)

    def abc_of(self, t):
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        if "dxi_dr" not in self._interp:
            self._interp["dxi_dr"] = PchipInterpolator(self.grid, self._dxi_dr, extrapolate=False)
        dxi = self._interp["dxi_dr"](np.clip(t_arr, self.grid[0], self.grid[-1]))
        # the derivative table is d(xi)/dr regardless of the native coordinate
        A = np.asarray(dxi, dtype=float) / np.asarray(self._at("h", t_arr), dtype=float)
        v = np.asarray(self._at("v", t_arr), dtype=float)
        w = np.asarray(self._at("w", t_arr), dtype=float)
        xi = np.asarray(self._at("xi", t_arr), dtype=float)
        B = np.where(v > 0, (xi * v - w) / np.maximum(v, 1e-300) ** 2, 0.5 * A)
        C = np.where(v > 0, 2.0 * w / np.maximum(v, 1e-300) ** 2, A)
        if np.ndim(t) == 0:
            return float(A[0]), float(B[0]), float(C[0])
        return A, B, C

    @property
    def breakpoints_native(self):
        return np.empty(0)


def load_metric(path) -> MetricModel:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("schema") != 1:
        raise ValueError(f"unsupported metric cache schema {doc.get('schema')!r}")
    representation = Representation(doc["representation"])
    opts = BuildOptions(**doc["options"])
    engine = _TableEngine(doc["native"], doc["tables"], representation, opts.h0)
    cdoc = doc["classification"]
    classification = Classification(
        MetricClass(cdoc["metric_class"]),
        cdoc["xi_infinity"],
        VolumeGrowth(cdoc["volume_growth"]),
        r0=cdoc["r0"],
        x0=cdoc["x0"],
        ambiguous_tail=cdoc["ambiguous_tail"],
    )
    from .profiles import CallableSource

    profile = GeneratorProfile(
        GeneratorKind.XI if representation is Representation.FROM_XI else GeneratorKind.FPP,
        CallableSource(engine.xi_of, domain_end=float(engine.grid[-1]), label="loaded-table"),
        name=doc.get("profile_name", "loaded"),
    )
    tables = engine._tables
    return MetricModel(
        n=doc["n"],
        representation=representation,
        profile=profile,
        options=opts,
        classification=classification,
        engine=engine,
        r=tables["r"],
        x=tables["x"],
        h=tables["h"],
        f=tables["f"],
        xi=tables["xi"],
        v=tables["v"],
        s=tables["s"],
    )
