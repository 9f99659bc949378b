"""Extended self-similarity: log D_LL against log D_LLL.

Points live in the plane ``x = log10 D_LLL``, ``y = log10 D_LL``. A point set
may be split into a dissipation-range head ``[0, split_index)`` and an
inertial-range tail ``[split_index, n)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Optional

import numpy as np

from .errors import ContractError, DegenerateInputError, DomainError

if TYPE_CHECKING:
    from .estimator import StructureFunctionCurve
    from .scales import FlowParameters

log = logging.getLogger(__name__)

TWO_THIRDS = 2.0 / 3.0


@dataclass
class EssPointSet:
    """One experiment's points in the ESS plane, sorted by ``x``.

    ``separations`` optionally carries the separation r (m) each point was
    computed at; it is what lets :func:`split_dissipation_range` use the
    Kolmogorov-scale rule.
    """

    x: np.ndarray
    y: np.ndarray
    label: str = ""
    re_tag: Optional[float] = None
    split_index: Optional[int] = None
    separations: Optional[np.ndarray] = None
    dropped: int = 0

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.x.shape != self.y.shape or self.x.ndim != 1:
            raise ContractError("x and y must be 1-D arrays of equal length")
        if not (np.all(np.isfinite(self.x)) and np.all(np.isfinite(self.y))):
            raise DomainError(f"non-finite coordinate in point set {self.label!r}")
        if self.x.size > 1 and not np.all(np.diff(self.x) > 0):
            raise ContractError("x must be strictly increasing; build with EssPointSet.from_points")
        if self.separations is not None:
            self.separations = np.asarray(self.separations, dtype=float)
            if self.separations.shape != self.x.shape:
                raise ContractError("separations must match the points in length")
        if self.split_index is not None and not 0 <= self.split_index <= len(self):
            raise DomainError(f"split_index {self.split_index} outside [0, {len(self)}]")

    @classmethod
    def from_points(cls, x, y, label="", re_tag=None, separations=None, dropped=0):
        """Sort by ``x`` and merge coincident abscissae by averaging."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        order = np.argsort(x, kind="stable")
        x, y = x[order], y[order]
        r = None if separations is None else np.asarray(separations, dtype=float)[order]
        ux, inverse, counts = np.unique(x, return_inverse=True, return_counts=True)
        if ux.size != x.size:
            y = np.bincount(inverse, weights=y) / counts
            if r is not None:
                r = np.bincount(inverse, weights=r) / counts
            x = ux
        return cls(x, y, label=label, re_tag=re_tag, separations=r, dropped=dropped)

    def __len__(self):
        return int(self.x.size)

    @property
    def points(self) -> np.ndarray:
        """``(n, 2)`` array of ``(x, y)`` rows."""
        return np.column_stack([self.x, self.y])

    def inertial(self) -> "EssPointSet":
        """The inertial-range tail; the whole set when no split is recorded."""
        start = self.split_index or 0
        r = None if self.separations is None else self.separations[start:]
        return EssPointSet(self.x[start:], self.y[start:], label=self.label,
                           re_tag=self.re_tag, split_index=0, separations=r)


@dataclass
class SlopeProfile:
    """Local slopes of a point set, one entry per point after the first."""

    anchor: tuple
    x: np.ndarray
    slopes: np.ndarray
    label: str = ""
    re_tag: Optional[float] = None

    @property
    def entries(self) -> np.ndarray:
        return np.column_stack([self.x, self.slopes])


def build_ess(d2: "StructureFunctionCurve", d3: "StructureFunctionCurve",
              label: Optional[str] = None) -> EssPointSet:
    """Pair second- and third-order structure functions into ESS points.

    The third moment enters through its absolute value, so a signed estimate
    only loses the separations where it is exactly zero. Pairs where either
    moment is not strictly positive are dropped; the count is kept in
    ``EssPointSet.dropped``.
    """
    if d2.order != 2 or d3.order != 3:
        raise ContractError(f"need orders (2, 3), got ({d2.order}, {d3.order})")
    if len(d2.separations) != len(d3.separations) or not np.array_equal(d2.separations, d3.separations):
        raise ContractError("D2 and D3 curves are on different separation grids")
    v2 = np.asarray(d2.values, dtype=float)
    v3 = np.abs(np.asarray(d3.values, dtype=float))
    keep = (v2 > 0) & (v3 > 0)
    dropped = int(np.count_nonzero(~keep))
    if np.count_nonzero(keep) < 2:
        raise DegenerateInputError(f"only {np.count_nonzero(keep)} usable (D3, D2) pairs")
    if dropped:
        log.info("build_ess: dropped %d non-positive pairs", dropped)
    re_tag = d2.re_tag if d2.re_tag is not None else d3.re_tag
    return EssPointSet.from_points(
        np.log10(v3[keep]), np.log10(v2[keep]),
        label=label if label is not None else d2.label,
        re_tag=re_tag, separations=np.asarray(d2.separations, dtype=float)[keep],
        dropped=dropped,
    )


def _need_two(points: EssPointSet) -> None:
    if len(points) < 2:
        raise DegenerateInputError(f"point set {points.label!r} has {len(points)} point(s), need 2")


def anchored_local_slopes(points: EssPointSet) -> SlopeProfile:
    """Slopes of the chords from the leftmost point to every other point.

    Anchoring at one end removes the intercept and, unlike slopes between
    neighbours, keeps the noise from growing as the spacing shrinks.
    """
    _need_two(points)
    x0, y0 = points.x[0], points.y[0]
    slopes = (points.y[1:] - y0) / (points.x[1:] - x0)
    return SlopeProfile((float(x0), float(y0)), points.x[1:].copy(), slopes,
                        label=points.label, re_tag=points.re_tag)


def successive_slopes(points: EssPointSet) -> SlopeProfile:
    """Slopes between neighbouring points, placed at the midpoint abscissa."""
    _need_two(points)
    dx = np.diff(points.x)
    slopes = np.diff(points.y) / dx
    mid = points.x[:-1] + 0.5 * dx
    return SlopeProfile((float(points.x[0]), float(points.y[0])), mid, slopes,
                        label=points.label, re_tag=points.re_tag)


def split_dissipation_range(points: EssPointSet, flow: Optional["FlowParameters"] = None,
                            k_threshold: float = 10.0, tol: float = 0.01) -> EssPointSet:
    """Record where the inertial range starts.

    With a flow and known separations, the inertial range starts at the first
    ``r > k_threshold * lambda_k``. Otherwise it starts at the first point
    from which the anchored slope stays more than ``tol`` away from 2/3. A
    set with no inertial points gets ``split_index = len(points)`` and a
    logged warning.
    """
    if not k_threshold > 0:
        raise DomainError(f"k_threshold must be positive, got {k_threshold}")
    n = len(points)
    if flow is not None and points.separations is not None:
        above = np.nonzero(points.separations > k_threshold * flow.lambda_k)[0]
        split = int(above[0]) if above.size else n
    else:
        _need_two(points)
        departed = np.abs(anchored_local_slopes(points).slopes - TWO_THIRDS) > tol
        # entry j belongs to point j + 1; find the start of the trailing run
        settled = np.nonzero(~departed)[0]
        first = int(settled[-1]) + 1 if settled.size else 0
        if first >= departed.size:
            split = n
        else:
            split = 0 if first == 0 else first + 1
    if split >= n:
        log.warning("no inertial-range points in %r", points.label)
    return replace(points, split_index=split)
