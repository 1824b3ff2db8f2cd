"""Pole diagnostics of the Fourier-transformed kernels.

The full harmonic kernel transforms to (2 pi / gamma) tanh(E pi / gamma) with
poles at Im E = (n + 1/2) gamma; the fixed-origin kernel gives the product
Gamma(1/4 + iE/2gamma) Gamma(1/4 - iE/2gamma) with poles at
Im E = +-(2n + 1/2) gamma.  On the imaginary-E axis the product is real, so
pole hunting reduces to locating zeros of its reciprocal.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

from scipy.optimize import brentq
from scipy.special import gamma as _gamma, rgamma as _rgamma

from .config import DEFAULT_POLICY, ModelParams, TruncationPolicy
from .continuum import coth_scaled, harmonic_fixed_origin
from .correction import full_propagator, universal_ratio
from .errors import SingularFrequencyError
from .specfun import integrate_real_line, pcf_scaled_halfindex

__all__ = [
    "PoleFamily",
    "PoleSet",
    "harmonic_pole_positions",
    "gamma_product",
    "locate_poles_numeric",
    "x_fourier_zero_momentum",
]


class PoleFamily(enum.Enum):
    FULL_MEHLER = "full_mehler"
    FIXED_ORIGIN = "fixed_origin"


@dataclass(frozen=True)
class PoleSet:
    gamma: float
    family: PoleFamily
    poles: tuple[complex, ...]  # purely imaginary energies


def harmonic_pole_positions(gamma: float, n_max: int, family: PoleFamily) -> PoleSet:
    """Analytic pole list; Re E = 0 throughout."""
    if gamma <= 0:
        raise ValueError("gamma must be > 0")
    if family is PoleFamily.FULL_MEHLER:
        ims = [(n + 0.5) * gamma for n in range(n_max + 1)]
    else:
        ims = []
        for n in range(n_max + 1):
            e = (2 * n + 0.5) * gamma
            ims.extend([e, -e])
    return PoleSet(gamma=gamma, family=family,
                   poles=tuple(complex(0.0, im) for im in ims))


def gamma_product(E_im: float, gamma: float) -> float:
    """Gamma(1/4 + s) Gamma(1/4 - s) on the imaginary-E axis, s = E_im / (2 gamma)."""
    if gamma <= 0:
        raise ValueError("gamma must be > 0")
    s = E_im / (2.0 * gamma)
    if (0.25 - s) <= 0 and float(0.25 - s).is_integer() or \
       (0.25 + s) <= 0 and float(0.25 + s).is_integer():
        raise SingularFrequencyError(f"E_im={E_im} sits exactly on a pole")
    return float(_gamma(0.25 + s) * _gamma(0.25 - s))


def locate_poles_numeric(gamma: float, search_radius: float) -> list[float]:
    """Positive imaginary-axis poles found as zeros of 1/gamma_product."""
    if gamma <= 0 or search_radius <= 0:
        raise ValueError("gamma and search_radius must be > 0")

    def recip(e):
        # rgamma is entire, so the reciprocal product has clean zeros at the poles
        s = e / (2.0 * gamma)
        return float(_rgamma(0.25 + s) * _rgamma(0.25 - s))

    found = []
    step = gamma / 8.0
    e = step
    prev_e, prev_v = 0.0, recip(0.0)
    while e <= search_radius + 1e-12:
        v = recip(e)
        if prev_v == 0.0:
            found.append(prev_e)
        elif v == 0.0:
            found.append(e)
        elif (prev_v > 0) != (v > 0):
            found.append(brentq(recip, prev_e, e, xtol=1e-14, rtol=8.9e-16))
        prev_e, prev_v = e, v
        e += step
    return found


def x_fourier_zero_momentum(params: ModelParams,
                            policy: TruncationPolicy = DEFAULT_POLICY) -> float:
    """Zero-momentum x-transform of the exponentially corrected kernel:

        prefactor * Gamma(1/2)/sqrt(B) * Dcal_{-1/2}(z),
        B = (c gamma / 2) coth(gamma beta),  z = B / sqrt(2 a I_0(0)/Q^4(beta)).

    At a = 0 this reduces to the plain Gaussian x-integral of the harmonic
    fixed-origin kernel.
    """
    prefactor, _ = harmonic_fixed_origin(params)
    B = 0.5 * params.c * coth_scaled(params.gamma_sq, params.beta)
    if B <= 0:
        raise SingularFrequencyError("nonpositive Gaussian width; transform undefined")
    if params.a == 0.0:
        return prefactor * math.sqrt(math.pi / B)
    alpha = params.a * universal_ratio(params)
    z = B / math.sqrt(2.0 * alpha)
    return prefactor * math.sqrt(math.pi) / math.sqrt(B) * pcf_scaled_halfindex(0.5, z, policy)


def x_fourier_quadrature(params: ModelParams,
                         policy: TruncationPolicy = DEFAULT_POLICY) -> float:
    """Oracle: direct x_f-quadrature of the p_max = 0 propagator."""
    pol0 = replace(policy, p_max=0)

    def f(x):
        return full_propagator(replace(params, x_f=x), pol0).value

    return integrate_real_line(f, policy, what="zero-momentum transform")
