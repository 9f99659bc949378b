"""Slope fitting in the ESS plane and the incomplete-similarity inverse problem.

Two hypotheses are compared:

* shared: every experiment has the same ESS slope (an Re-independent
  exponent, possibly different from 2/3);
* re_dependent: the slope is ``2/3 + alpha1 / ln Re`` and so drifts towards
  2/3 as Re grows.

Everything is linear least squares; there is no iterative optimiser.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import ContractError, DegenerateInputError, DomainError
from .ess import TWO_THIRDS, EssPointSet
from .scales import FlowParameters

log = logging.getLogger(__name__)

DEFAULT_MARGIN = 0.05


@dataclass(frozen=True)
class LineFit:
    """Ordinary least-squares line ``y = slope * x + intercept``.

    ``x_mean`` and ``y_mean`` are the centroid the line passes through.
    """

    slope: float
    intercept: float
    slope_stderr: float
    residual_rms: float
    n_points: int
    x_mean: float = 0.0
    y_mean: float = 0.0

    @property
    def rss(self) -> float:
        return self.residual_rms**2 * self.n_points


def fit_line(x, y) -> LineFit:
    """Least-squares line through ``(x, y)``.

    The slope standard error uses the residual variance with ``n - 2``
    degrees of freedom; it is zero for two points.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ContractError("x and y must be 1-D and of equal length")
    n = x.size
    if n < 2:
        raise DegenerateInputError(f"need at least 2 points, got {n}")
    xm, ym = x.mean(), y.mean()
    dx, dy = x - xm, y - ym
    sxx = float(dx @ dx)
    if not sxx > 0:
        raise DomainError("all x values are equal; slope undefined")
    slope = float(dx @ dy) / sxx
    resid = dy - slope * dx
    rss = float(resid @ resid)
    stderr = math.sqrt(rss / (n - 2) / sxx) if n > 2 else 0.0
    return LineFit(slope, float(ym - slope * xm), stderr, math.sqrt(rss / n), n,
                   float(xm), float(ym))


class PerReFits(NamedTuple):
    fits: list          # (re, LineFit), ascending in re
    labels: list        # label of each fit, same order
    excluded: list      # (label, reason)


def fit_per_re(sets: Sequence[EssPointSet]) -> PerReFits:
    """Fit a line to the inertial segment of every point set.

    Sets with fewer than two inertial points are excluded and reported,
    not raised; a set without an Re tag is a caller error.
    """
    rows, excluded = [], []
    for s in sets:
        if s.re_tag is None:
            raise ContractError(f"point set {s.label!r} carries no Reynolds number")
        seg = s.inertial()
        try:
            rows.append((s.re_tag, s.label, fit_line(seg.x, seg.y)))
        except DomainError as exc:
            log.warning("excluding %r: %s", s.label, exc)
            excluded.append((s.label, f"degenerate: {exc}"))
    rows.sort(key=lambda row: row[0])
    return PerReFits([(re, f) for re, _, f in rows], [lab for _, lab, _ in rows], excluded)


@dataclass(frozen=True)
class Comparison:
    rss_shared: float
    rss_per_re: float
    preferred: str
    monotone_decreasing: bool
    margin: float
    shared_fit: LineFit
    intercepts: tuple = ()


@dataclass
class SimilarityFit:
    per_re: list
    alpha1_hat: float
    alpha1_stderr: float
    slope_model_residual_rms: float
    c0_hat: Optional[float] = None
    c1_hat: Optional[float] = None
    prefactors: Optional[list] = None
    offset_diagnostic: Optional[dict] = None
    shared_slope_fit: Optional[LineFit] = None
    comparison: Optional[Comparison] = None

    def exponent(self, re: float) -> float:
        """Fitted inertial-range exponent at Reynolds number ``re``."""
        return TWO_THIRDS + self.alpha1_hat / math.log(re)


def fit_incomplete_similarity(per_re, flows: Optional[Sequence[FlowParameters]] = None,
                              b3: Optional[float] = None) -> SimilarityFit:
    """Recover ``alpha1`` and, given the flows, ``C0`` and ``C1``.

    Stage 1 regresses ``slope - 2/3`` on ``1 / ln Re`` through the origin,
    weighted by ``1 / stderr**2`` (uniformly if any stderr is zero). Stage 2
    re-anchors each line through its centroid at the stage-1 model slope
    and turns the intercept into a prefactor C(Re), using the flow's dissipation
    rate and Kolmogorov scale and ``D_LLL = b3 eps r``, then fits
    ``C = C0 + C1 / ln Re``. ``flows`` must follow the order of ``per_re``.

    An unconstrained ``slope = a + b / ln Re`` fit is kept as a diagnostic of
    how far the data put the infinite-Re exponent from 2/3.
    """
    per_re = list(per_re)
    if len(per_re) < 2:
        raise DomainError("need ≥ 2 Reynolds numbers")
    re = np.array([r for r, _ in per_re], dtype=float)
    if np.unique(re).size < 2:
        raise DomainError("need ≥ 2 distinct Reynolds numbers")
    if np.any(re <= math.e):
        raise DomainError("every Reynolds number must exceed e so that ln Re > 1")
    fits = [f for _, f in per_re]
    z = 1.0 / np.log(re)
    slopes = np.array([f.slope for f in fits])
    stderr = np.array([f.slope_stderr for f in fits])
    w = np.ones_like(z) if np.any(stderr == 0) else 1.0 / stderr**2

    swzz = float(np.sum(w * z * z))
    alpha1 = float(np.sum(w * z * (slopes - TWO_THIRDS))) / swzz
    resid = slopes - TWO_THIRDS - alpha1 * z
    dof = len(z) - 1
    if np.any(stderr == 0):
        alpha1_se = math.sqrt(float(resid @ resid) / dof / float(z @ z))
    else:
        alpha1_se = math.sqrt(1.0 / swzz)
    result = SimilarityFit(per_re=per_re, alpha1_hat=alpha1, alpha1_stderr=alpha1_se,
                           slope_model_residual_rms=float(np.sqrt(np.mean(resid**2))))

    sw = float(w.sum())
    zm = float(w @ z) / sw
    sm = float(w @ slopes) / sw
    szz = float(w @ (z - zm) ** 2)
    if szz > 0:
        b = float(w @ ((z - zm) * (slopes - sm))) / szz
        a = sm - b * zm
        result.offset_diagnostic = {"offset": a, "alpha1": b, "distance_from_two_thirds": abs(a - TWO_THIRDS)}

    if flows is not None or b3 is not None:
        if flows is None or b3 is None:
            raise ContractError("prefactor recovery needs both flows and b3")
        flows = list(flows)
        if len(flows) != len(per_re):
            raise ContractError(f"{len(flows)} flows for {len(per_re)} fits")
        model_slopes = TWO_THIRDS + alpha1 * z
        c = np.array([_prefactor_from_line(f, s, flow, b3)
                      for f, s, flow in zip(fits, model_slopes, flows)])
        cf = fit_line(z, c)
        result.c0_hat, result.c1_hat = cf.intercept, cf.slope
        result.prefactors = [(float(r), float(ci)) for r, ci in zip(re, c)]
    return result


def _prefactor_from_line(line: LineFit, slope: float, flow: FlowParameters, b3: float) -> float:
    # re-anchor the line through its centroid at the model slope, then invert
    # intercept = log10[C eps^(2/3) lambda_k^(-alpha) (b3 eps)^(-slope)], alpha = slope - 2/3
    if b3 == 0:
        raise DomainError("b3 must be non-zero")
    eps, lk = flow.eps_mean, flow.lambda_k
    intercept = line.y_mean - slope * line.x_mean
    log_c = (intercept - TWO_THIRDS * math.log10(eps)
             + (slope - TWO_THIRDS) * math.log10(lk)
             + slope * math.log10(abs(b3) * eps))
    return 10.0**log_c


def fit_shared_slope(sets: Sequence[EssPointSet]) -> tuple[LineFit, tuple]:
    """One slope for all sets, each with its own intercept.

    Uses each set's inertial segment. The returned line's intercept is the
    one through the pooled centroid; per-set intercepts come second.
    """
    segs = [s.inertial() for s in sets]
    if not segs:
        raise DegenerateInputError("no point sets")
    sxx = sxy = 0.0
    centred = []
    for seg in segs:
        if len(seg) < 2:
            raise DegenerateInputError(f"{seg.label!r} has fewer than 2 inertial points")
        dx, dy = seg.x - seg.x.mean(), seg.y - seg.y.mean()
        sxx += float(dx @ dx)
        sxy += float(dx @ dy)
        centred.append((dx, dy))
    if not sxx > 0:
        raise DomainError("no spread in x; slope undefined")
    slope = sxy / sxx
    rss = sum(float((dy - slope * dx) @ (dy - slope * dx)) for dx, dy in centred)
    n = sum(len(seg) for seg in segs)
    dof = n - len(segs) - 1
    stderr = math.sqrt(rss / dof / sxx) if dof > 0 else 0.0
    x_all = np.concatenate([seg.x for seg in segs])
    y_all = np.concatenate([seg.y for seg in segs])
    xm, ym = float(x_all.mean()), float(y_all.mean())
    intercepts = tuple(float(seg.y.mean() - slope * seg.x.mean()) for seg in segs)
    line = LineFit(slope, ym - slope * xm, stderr, math.sqrt(rss / n), n, xm, ym)
    return line, intercepts


def compare_hypotheses(sets: Sequence[EssPointSet], margin: float = DEFAULT_MARGIN) -> Comparison:
    """Shared-slope versus per-Re-slope fits of the inertial segments.

    ``re_dependent`` is preferred when separate slopes cut the residual sum
    of squares by more than ``margin`` (a fraction of the shared RSS). A
    reduction below 1e-12 of the total within-set variation counts as none,
    so exact data cannot pick a side through rounding.
    """
    if not 0 <= margin < 1:
        raise DomainError(f"margin must lie in [0, 1), got {margin}")
    per = fit_per_re(sets)
    if len(per.fits) < 2:
        raise DomainError("need ≥ 2 Reynolds numbers to compare hypotheses")
    usable = [s for s in sets if s.label not in {lab for lab, _ in per.excluded}]
    shared, intercepts = fit_shared_slope(usable)
    rss_per = sum(f.rss for _, f in per.fits)
    rss_shared = shared.rss
    syy = sum(float(np.sum((s.inertial().y - s.inertial().y.mean()) ** 2)) for s in usable)
    gain = rss_shared - rss_per
    preferred = "re_dependent" if gain > margin * rss_shared and gain > 1e-12 * syy else "shared"
    # fits are in ascending Re; ties in Re break monotonicity
    monotone = all(r1 < r2 and f1.slope > f2.slope
                   for (r1, f1), (r2, f2) in zip(per.fits, per.fits[1:]))
    return Comparison(rss_shared, rss_per, preferred, monotone, margin, shared, intercepts)


def analyze(sets: Sequence[EssPointSet], flows: Optional[Sequence[FlowParameters]] = None,
            b3: Optional[float] = None, margin: float = DEFAULT_MARGIN) -> SimilarityFit:
    """Per-Re fits, the alpha1 / prefactor fit and the hypothesis comparison together.

    ``flows``, when given, follows the order of ``sets``.
    """
    per = fit_per_re(sets)
    aligned = None
    if flows is not None:
        by_label = {s.label: f for s, f in zip(sets, flows)}
        aligned = [by_label[lab] for lab in per.labels]
    result = fit_incomplete_similarity(per.fits, aligned, b3)
    result.comparison = compare_hypotheses(sets, margin)
    result.shared_slope_fit = result.comparison.shared_fit
    return result
