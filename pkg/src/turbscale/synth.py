"""Forward models: structure functions, ESS datasets and velocity signals.

The second-order model is the two-term incomplete-similarity law

    D_LL(r) = (eps r)^(2/3) (C0 + C1/ln Re) (r/lambda_k)^(alpha1/ln Re)

and the third-order model is ``D_LLL(r) = b3 eps r``. Both are multiplied by
a rational crossover factor that bends them to the smooth-field behaviour
``D_p ~ r^p`` below the Kolmogorov scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError
from .ess import EssPointSet
from .scales import FlowParameters

TWO_THIRDS = 2.0 / 3.0

# exponent constant putting the Re = 6000 slope at 0.7
DEFAULT_ALPHA1 = 0.29


@dataclass(frozen=True)
class SimilarityModel:
    c0: float = 1.5
    c1: float = 2.0
    alpha1: float = DEFAULT_ALPHA1
    b3: float = 0.8

    def __post_init__(self):
        if not self.c0 > 0:
            raise DomainError(f"c0 must be positive, got {self.c0}")
        if self.b3 == 0 or not math.isfinite(self.b3):
            raise DomainError("b3 must be finite and non-zero")

    def exponent(self, re: float) -> float:
        """Inertial-range exponent ``2/3 + alpha1 / ln Re``."""
        return TWO_THIRDS + self.alpha1 / _log_re(re)

    def prefactor(self, re: float) -> float:
        """Kolmogorov 'constant' ``C0 + C1 / ln Re``."""
        c = self.c0 + self.c1 / _log_re(re)
        if not c > 0:
            raise DomainError(f"prefactor C0 + C1/ln Re = {c} is not positive at Re = {re}")
        return c


@dataclass(frozen=True)
class SyntheticSpec:
    model: SimilarityModel
    flows: Sequence[FlowParameters]
    r_grid: Sequence[float]
    crossover_sharpness: float = 1.0
    noise_sigma: float = 0.0
    seed: int = 0
    labels: Optional[Sequence[str]] = None

    def __post_init__(self):
        r = np.asarray(self.r_grid, dtype=float)
        if r.ndim != 1 or r.size < 2 or not np.all(r > 0) or not np.all(np.diff(r) > 0):
            raise DomainError("r_grid must hold at least two positive, strictly increasing values")
        if not self.crossover_sharpness >= 1:
            raise DomainError("crossover_sharpness must be >= 1")
        if not self.noise_sigma >= 0:
            raise DomainError("noise_sigma must be >= 0")
        if not self.flows:
            raise DomainError("at least one flow is required")
        if self.labels is not None and len(self.labels) != len(self.flows):
            raise DomainError("labels must match flows in length")


@dataclass
class VelocitySignal:
    """A longitudinal velocity record u_L sampled at a fixed spacing."""

    samples: np.ndarray
    spacing: float
    label: str = ""

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.ndim != 1 or self.samples.size < 2:
            raise DomainError("a velocity signal needs at least 2 samples")
        if not np.all(np.isfinite(self.samples)):
            raise DomainError("velocity samples must be finite")
        if not (self.spacing > 0 and math.isfinite(self.spacing)):
            raise DomainError(f"spacing must be positive, got {self.spacing!r}")

    def __len__(self):
        return int(self.samples.size)


def _log_re(re: float) -> float:
    if not re > 1:
        raise DomainError(f"Re must exceed 1 so that ln Re > 0, got {re}")
    return math.log(re)


def _log_crossover(rho, exponent_gap, sharpness):
    # log of [rho^(2s) / (1 + rho^(2s))]^(gap / (2s))
    two_s_log_rho = 2.0 * sharpness * np.log(rho)
    return exponent_gap / (2.0 * sharpness) * (two_s_log_rho - np.logaddexp(0.0, two_s_log_rho))


def _positive_r(r):
    r = np.asarray(r, dtype=float)
    if not np.all(r > 0):
        raise DomainError("separations must be positive")
    return r


def model_d2(r, model: SimilarityModel, flow: FlowParameters, sharpness: float = 1.0):
    """Second-order structure function of the model at separation(s) ``r``."""
    r = _positive_r(r)
    re = flow.re
    zeta = model.exponent(re)
    rho = r / flow.lambda_k
    log_d = (TWO_THIRDS * np.log(flow.eps_mean * r) + math.log(model.prefactor(re))
             + (zeta - TWO_THIRDS) * np.log(rho)
             + _log_crossover(rho, 2.0 - zeta, sharpness))
    return np.exp(log_d)


def model_d3(r, model: SimilarityModel, flow: FlowParameters, sharpness: float = 1.0):
    """Third-order structure function ``b3 eps r`` with the r^3 dissipation-range bend."""
    r = _positive_r(r)
    _log_re(flow.re)
    rho = r / flow.lambda_k
    return model.b3 * flow.eps_mean * r * np.exp(_log_crossover(rho, 2.0, sharpness))


def synth_ess_dataset(spec: SyntheticSpec) -> list[EssPointSet]:
    """One ESS point set per flow, with optional Gaussian noise in log10 units.

    Flow ``i`` draws its noise from a generator seeded with ``seed + i``, so
    the result does not depend on the order flows are processed in.
    """
    r = np.asarray(spec.r_grid, dtype=float)
    out = []
    for i, flow in enumerate(spec.flows):
        d2 = model_d2(r, spec.model, flow, spec.crossover_sharpness)
        d3 = model_d3(r, spec.model, flow, spec.crossover_sharpness)
        x = np.log10(np.abs(d3))
        y = np.log10(d2)
        if spec.noise_sigma > 0:
            rng = np.random.default_rng(spec.seed + i)
            x = x + rng.normal(0.0, spec.noise_sigma, x.size)
            y = y + rng.normal(0.0, spec.noise_sigma, y.size)
        label = spec.labels[i] if spec.labels is not None else f"Re={flow.re:.6g}"
        out.append(EssPointSet.from_points(x, y, label=label, re_tag=flow.re, separations=r))
    return out


def synth_velocity_signal(n: int, spectrum_exponent: float = 5.0 / 3.0,
                          spacing: float = 1.0, seed: int = 0,
                          label: str = "") -> VelocitySignal:
    """Random-phase signal with energy spectrum ~ k^(-spectrum_exponent).

    Fourier modes ``k = 1 .. n/2 - 1`` get amplitude ``k^(-spectrum_exponent/2)``
    and an independent uniform phase; the mean and the Nyquist mode are zero.
    The record is periodic and scaled to unit variance. With ``n = 2`` there
    is no admissible mode and the record is all zeros.
    """
    if not (isinstance(n, (int, np.integer)) and n >= 2 and n & (n - 1) == 0):
        raise DomainError(f"n must be a power of two >= 2, got {n!r}")
    if not 1 < spectrum_exponent < 3:
        raise DomainError(f"spectrum_exponent must lie in (1, 3), got {spectrum_exponent}")
    if not spacing > 0:
        raise DomainError(f"spacing must be positive, got {spacing}")
    rng = np.random.default_rng(seed)
    k = np.arange(1, n // 2)
    phases = rng.uniform(0.0, 2.0 * np.pi, k.size)
    coeffs = np.zeros(n // 2 + 1, dtype=complex)
    coeffs[1:n // 2] = k ** (-spectrum_exponent / 2.0) * np.exp(1j * phases)
    u = np.fft.irfft(coeffs, n)
    std = u.std()
    if std > 0:
        u = u / std
    return VelocitySignal(u, float(spacing), label=label)
