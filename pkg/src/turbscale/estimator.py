"""Structure functions of a 1-D longitudinal velocity record."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ContractError, DomainError
from .synth import VelocitySignal

KINDS = ("signed", "absolute")


@dataclass
class StructureFunctionCurve:
    """Order-``p`` moments of velocity increments on a separation grid."""

    order: int
    kind: str
    separations: np.ndarray
    values: np.ndarray
    sample_counts: np.ndarray
    label: str = ""
    re_tag: Optional[float] = None

    def __post_init__(self):
        self.separations = np.asarray(self.separations, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        self.sample_counts = np.asarray(self.sample_counts, dtype=np.int64)
        if self.kind not in KINDS:
            raise DomainError(f"kind must be one of {KINDS}, got {self.kind!r}")
        n = self.separations.size
        if n < 1 or self.values.size != n or self.sample_counts.size != n:
            raise ContractError("separations, values and sample_counts need equal, non-zero length")
        if not (np.all(self.separations > 0) and np.all(np.diff(self.separations) > 0)):
            raise ContractError("separations must be positive and strictly increasing")
        if self.kind == "absolute" and np.any(self.values < 0):
            raise ContractError("absolute moments cannot be negative")
        if np.any(self.sample_counts < 1):
            raise ContractError("every separation needs at least one increment")


def structure_function(signal: VelocitySignal, p: int, lags: Sequence[int],
                       kind: str = "absolute") -> StructureFunctionCurve:
    """Estimate ``D_p(r) = <(u(x + r) - u(x))^p>`` at ``r = lag * spacing``.

    All ``n - lag`` overlapping increments are averaged; the record is not
    treated as periodic.
    """
    if kind not in KINDS:
        raise DomainError(f"kind must be one of {KINDS}, got {kind!r}")
    if isinstance(p, bool) or int(p) != p or p < 1:
        raise DomainError(f"order p must be an integer >= 1, got {p!r}")
    p = int(p)
    lags = np.asarray(lags)
    if lags.size == 0:
        raise DomainError("no lags given")
    if lags.ndim != 1 or not np.all(lags == np.round(lags)):
        raise DomainError("lags must be integers")
    lags = lags.astype(np.int64)
    n = len(signal)
    if lags[0] < 1 or lags[-1] >= n:
        raise DomainError(f"lags must lie in [1, {n - 1}]")
    if np.any(np.diff(lags) <= 0):
        raise DomainError("lags must be strictly increasing")

    u = signal.samples
    signed_odd = kind == "signed" and p % 2 == 1
    values = np.empty(lags.size)
    for j, lag in enumerate(lags):
        du = u[lag:] - u[:-lag]
        # |du|**p then the sign keeps even orders and reversed records bit-exact
        terms = np.abs(du) ** p
        if signed_odd:
            terms = np.copysign(terms, du)
        # fsum is correctly rounded, so the result does not depend on term order
        values[j] = math.fsum(terms) / du.size
    return StructureFunctionCurve(p, kind, lags * signal.spacing, values, n - lags,
                                  label=signal.label)


def default_lag_grid(signal_length: int, points_per_decade: int = 8) -> np.ndarray:
    """Log-spaced distinct integer lags from 1 to ``signal_length // 4``."""
    if signal_length < 4:
        raise DomainError(f"signal_length must be >= 4, got {signal_length}")
    if points_per_decade < 1:
        raise DomainError(f"points_per_decade must be >= 1, got {points_per_decade}")
    top = signal_length // 4
    num = max(2, int(math.floor(math.log10(top) * points_per_decade)) + 1)
    return np.unique(np.round(np.logspace(0.0, math.log10(top), num)).astype(np.int64))
