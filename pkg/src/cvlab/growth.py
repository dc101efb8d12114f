"""Growth-rate fits and boundedness verdicts for ball-integral series.

A comparison integral is "unbounded" when its normalized series keeps a
clearly positive log-log slope over the trailing window with small scatter;
a series that has gone Cauchy, decays cleanly, or is identically zero is
"bounded".  The
deliberately wide inconclusive band in between is a feature: step-family
series wiggle, and a fit that cannot make up its mind should say so.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .metric import MetricModel


class GrowthVerdict(enum.Enum):
    BOUNDED = "bounded"
    UNBOUNDED = "unbounded"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class GrowthFit:
    slope: float
    intercept: float
    residual: float  # RMS of log-residuals over the window
    window: tuple[float, float]
    n_points: int
    verdict: GrowthVerdict

    def as_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "residual": self.residual,
            "window": list(self.window),
            "n_points": self.n_points,
            "verdict": self.verdict.value,
        }


UNBOUNDED_SLOPE = 0.1  # log-log slope above this (with small residual) diverges
BOUNDED_SLOPE = 0.05  # |slope| below this counts as levelled off
RESIDUAL_CAP = 0.1
CAUCHY_REL = 0.01


def fit_loglog(s, values, window_fraction: float = 1 / 3, window=None) -> GrowthFit:
    """Least-squares log-log fit over a trailing window of the abscissa.

    ``window`` overrides the trailing fraction with explicit (lo, hi) bounds
    in s.  Nonpositive values are dropped; an all-nonpositive window is a
    bounded (identically small) series by convention.
    """
    s = np.asarray(s, dtype=float)
    values = np.asarray(values, dtype=float)
    if window is not None:
        lo, hi = float(window[0]), float(window[1])
        mask = (s >= lo) & (s <= hi)
    else:
        logs = np.log(s)
        cut = logs[-1] - window_fraction * (logs[-1] - logs[0])
        mask = logs >= cut
        lo, hi = float(np.exp(cut)), float(s[-1])
    mask &= values > 0.0
    if int(np.count_nonzero(mask)) < 3:
        return GrowthFit(0.0, 0.0, 0.0, (lo, hi), int(np.count_nonzero(mask)),
                         GrowthVerdict.BOUNDED)
    xs = np.log(s[mask])
    ys = np.log(values[mask])
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = ys - (slope * xs + intercept)
    residual = float(np.sqrt(np.mean(resid**2)))

    y_end = values[mask][-1]
    cauchy = bool(np.max(np.abs(values[mask] - y_end)) <= CAUCHY_REL * abs(y_end))
    decaying = slope < -BOUNDED_SLOPE and residual < RESIDUAL_CAP
    if slope > UNBOUNDED_SLOPE and residual < RESIDUAL_CAP:
        verdict = GrowthVerdict.UNBOUNDED
    elif abs(slope) <= BOUNDED_SLOPE or cauchy or decaying:
        # a cleanly decaying series is bounded even though it never goes
        # Cauchy relative to its (vanishing) tail value
        verdict = GrowthVerdict.BOUNDED
    else:
        verdict = GrowthVerdict.INCONCLUSIVE
    return GrowthFit(float(slope), float(intercept), residual, (lo, hi),
                     int(np.count_nonzero(mask)), verdict)


def growth_fit(series, window_fraction: float = 1 / 3, window=None) -> GrowthFit:
    """Verdict for a BallIntegralSeries (fit of log normalized vs log s)."""
    return fit_loglog(series.s, series.normalized, window_fraction, window)


@dataclass(frozen=True)
class LogGrowthFit:
    slope: float
    intercept: float
    residual_fraction: float  # RMS residual / RMS of centered values
    n_points: int

    @property
    def diverges(self) -> bool:
        return self.slope > 0.0 and self.residual_fraction < RESIDUAL_CAP


def log_growth_fit(volumes, integrals, window_fraction: float = 1 / 2) -> LogGrowthFit:
    """Fit integral ~ a + b*log(volume) over a trailing window.

    The k = n comparison integral grows like log v when the total converges
    only logarithmically; a positive slope with small scatter certifies the
    log divergence of the un-normalized integral.
    """
    v = np.asarray(volumes, dtype=float)
    y = np.asarray(integrals, dtype=float)
    mask = v > 0
    v, y = v[mask], y[mask]
    logs = np.log(v)
    cut = logs[-1] - window_fraction * (logs[-1] - logs[0])
    win = logs >= cut
    xs, ys = logs[win], y[win]
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = ys - (slope * xs + intercept)
    spread = float(np.sqrt(np.mean((ys - np.mean(ys)) ** 2)))
    residual_fraction = float(np.sqrt(np.mean(resid**2)) / max(spread, 1e-300))
    return LogGrowthFit(float(slope), float(intercept), residual_fraction, int(len(xs)))


@dataclass(frozen=True)
class CoordinateGrowthReport:
    """How the coordinate radius r grows against the geodesic distance s."""

    fit: GrowthFit  # log r vs log s over the trailing window
    nested_slopes: tuple  # same fit over successively later windows
    linear_correlation: float  # corr(log r, s): ~1 when log r is linear in s
    superpolynomial: bool

    def as_dict(self) -> dict:
        return {
            "fit": self.fit.as_dict(),
            "nested_slopes": list(self.nested_slopes),
            "linear_correlation": self.linear_correlation,
            "superpolynomial": self.superpolynomial,
        }


def coordinate_growth(model: MetricModel, window_fraction: float = 1 / 3) -> CoordinateGrowthReport:
    """Polynomial-vs-faster growth of r in s.

    Flat space has slope exactly 2; sub-saturated metrics have a finite
    slope 2/(1 - xi_inf); saturated (cylinder-end) metrics have log r linear
    in s, recognized by nested windows with growing slopes plus correlation
    of log r against s itself.
    """
    mask = (model.s > 0) & (model.r > 0)
    s = model.s[mask]
    r = model.r[mask]
    fit = fit_loglog(s, r, window_fraction=window_fraction)
    nested = []
    for frac in (window_fraction, window_fraction / 2, window_fraction / 4):
        nested.append(fit_loglog(s, r, window_fraction=frac).slope)
    logs = np.log(s)
    cut = logs[-1] - window_fraction * (logs[-1] - logs[0])
    win = logs >= cut
    lr = np.log(r[win])
    corr = float(np.corrcoef(lr, s[win])[0, 1])
    growing = nested[-1] > 1.25 * nested[0]
    return CoordinateGrowthReport(
        fit=fit,
        nested_slopes=tuple(float(b) for b in nested),
        linear_correlation=corr,
        superpolynomial=bool(growing and corr > 0.999),
    )
