"""Flow parameters and the dimensional quantities built from them.

All inputs are taken in SI units. The Kolmogorov scale and the Reynolds
number are derived on access, never stored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError


def _require_positive(**values: float) -> None:
    for name, value in values.items():
        if not (value > 0 and math.isfinite(value)):
            raise DomainError(f"{name} must be positive and finite, got {value!r}")


def kolmogorov_scale(nu: float, eps: float) -> float:
    """Kolmogorov length ``nu**(3/4) / eps**(1/4)`` in metres."""
    _require_positive(nu=nu, eps=eps)
    return nu**0.75 / eps**0.25


def velocity_scale(eps: float, lambda_t: float) -> float:
    """Velocity scale ``(eps * lambda_t)**(1/3)`` of the energy-containing eddies."""
    _require_positive(eps=eps, lambda_t=lambda_t)
    return (eps * lambda_t) ** (1.0 / 3.0)


@dataclass(frozen=True)
class FlowParameters:
    """Viscosity, mean dissipation rate and Taylor macroscale of one flow.

    Parameters
    ----------
    nu : float
        Kinematic viscosity, m^2/s.
    eps_mean : float
        Mean energy dissipation rate per unit mass, m^2/s^3.
    lambda_t : float
        Taylor macroscale, m.
    """

    nu: float
    eps_mean: float
    lambda_t: float

    def __post_init__(self):
        _require_positive(nu=self.nu, eps_mean=self.eps_mean, lambda_t=self.lambda_t)

    @classmethod
    def from_reynolds(cls, re: float, nu: float, eps_mean: float) -> "FlowParameters":
        """Build the flow with the given viscosity and dissipation that has Reynolds number ``re``."""
        _require_positive(re=re)
        lambda_k = kolmogorov_scale(nu, eps_mean)
        return cls(nu=nu, eps_mean=eps_mean, lambda_t=lambda_k * re**0.75)

    @property
    def lambda_k(self) -> float:
        return kolmogorov_scale(self.nu, self.eps_mean)

    @property
    def velocity(self) -> float:
        return velocity_scale(self.eps_mean, self.lambda_t)

    @property
    def re(self) -> float:
        return reynolds_number(self)


def reynolds_number(params: FlowParameters) -> float:
    """Reynolds number ``(lambda_t / lambda_k)**(4/3)``.

    Identical, up to rounding, to ``eps**(1/3) * lambda_t**(4/3) / nu``; see
    :func:`reynolds_number_direct`.
    """
    return (params.lambda_t / params.lambda_k) ** (4.0 / 3.0)


def reynolds_number_direct(params: FlowParameters) -> float:
    """Reynolds number from velocity scale times length over viscosity."""
    return params.eps_mean ** (1.0 / 3.0) * params.lambda_t ** (4.0 / 3.0) / params.nu
