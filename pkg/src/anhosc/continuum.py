"""Closed-form continuum objects of the fixed-origin oscillator.

Everything here is a function of gamma^2 = 2b/c, never of gamma itself, so the
negative-frequency (trigonometric) branch is the plain real continuation
sinh -> sin, coth -> cot.  The flat branch b = 0 is handled by explicit series
limits rather than epsilon-dodging; parameter sweeps cross b = 0.

Branch-stable scalar kernels:

    sinh_ratio(g2, x)  = sinh(gamma x)/gamma      (flat: x;   trig: sin(g x)/g)
    coth_scaled(g2, x) = gamma coth(gamma x)      (flat: 1/x; trig: g cot(g x))

The anharmonic kernels d(tau) = (coth(gamma tau) - coth(gamma beta))/(2 gamma)
and Q(tau) = 2 sinh(gamma tau) are exposed raw and in the gamma-scaled
combinations that stay finite at b = 0:

    d_scaled  = gamma^2 d(tau)        -> (1/tau - 1/beta)/2   as  b -> 0
    q4_scaled = Q(tau)^4 / gamma^4    -> 16 tau^4             as  b -> 0

(the raw d diverges like 1/gamma^2 at b = 0, so only the scaled form has a
flat-branch value; correction-series formulas use scaled kernels throughout).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .config import ModelParams
from .errors import SingularFrequencyError, SingularLatticeError

__all__ = [
    "Branch",
    "FrequencyBranch",
    "branch_of",
    "sinh_ratio",
    "coth_scaled",
    "cosh_even",
    "mehler_kernel",
    "harmonic_fixed_origin",
    "prefactor_finite_N",
    "bigQ",
    "bigQ_tilde",
    "exponent_finite_N",
    "kernel_d",
    "kernel_Q",
    "kernel_d_scaled",
    "kernel_q4_scaled",
    "q_squared",
]

# |gamma|*beta closer than this (mod pi) to a trigonometric pole counts as singular
SINGULARITY_GUARD_PHASE = 1e-5

# below this |gamma^2 x^2| the even power series are used instead of closed forms
_SERIES_SWITCH = 1e-2


class Branch(enum.Enum):
    HYPERBOLIC = "hyperbolic"      # b > 0
    FLAT = "flat"                  # b = 0
    TRIGONOMETRIC = "trigonometric"  # b < 0


@dataclass(frozen=True)
class FrequencyBranch:
    """Signed squared frequency together with its branch label."""

    gamma_sq: float
    branch: Branch

    @classmethod
    def from_params(cls, params: ModelParams) -> "FrequencyBranch":
        g2 = params.gamma_sq
        return cls(g2, branch_of(g2))


def branch_of(gamma_sq: float) -> Branch:
    if gamma_sq > 0:
        return Branch.HYPERBOLIC
    if gamma_sq < 0:
        return Branch.TRIGONOMETRIC
    return Branch.FLAT


# ---------------------------------------------------------------------------
# branch-stable elementary kernels (array-aware: x may be a numpy array)
# ---------------------------------------------------------------------------

def sinh_ratio(gamma_sq: float, x):
    """sinh(gamma x)/gamma as an even function of gamma (flat limit: x)."""
    x = np.asarray(x, dtype=float)
    w = gamma_sq * x * x
    small = np.abs(w) < _SERIES_SWITCH
    # series: x (1 + w/6 + w^2/120 + w^3/5040 + w^4/362880)
    ws = np.where(small, w, 0.0)
    series = x * (1.0 + ws / 6.0 + ws**2 / 120.0 + ws**3 / 5040.0 + ws**4 / 362880.0)
    if gamma_sq > 0:
        g = math.sqrt(gamma_sq)
        closed = np.sinh(g * np.where(small, 1.0, x)) / g
    elif gamma_sq < 0:
        g = math.sqrt(-gamma_sq)
        closed = np.sin(g * np.where(small, 1.0, x)) / g
    else:
        closed = series
    out = np.where(small, series, closed)
    return float(out) if out.ndim == 0 else out


def coth_scaled(gamma_sq: float, x):
    """gamma coth(gamma x) as an even function of gamma (flat limit: 1/x)."""
    x = np.asarray(x, dtype=float)
    w = gamma_sq * x * x
    small = np.abs(w) < _SERIES_SWITCH
    ws = np.where(small, w, 0.0)
    series = (1.0 + ws / 3.0 - ws**2 / 45.0 + 2.0 * ws**3 / 945.0 - ws**4 / 4725.0) / x
    if gamma_sq > 0:
        g = math.sqrt(gamma_sq)
        closed = g / np.tanh(g * np.where(small, 1.0, x))
    elif gamma_sq < 0:
        g = math.sqrt(-gamma_sq)
        closed = g / np.tan(g * np.where(small, 1.0, x))
    else:
        closed = series
    out = np.where(small, series, closed)
    return float(out) if out.ndim == 0 else out


def cosh_even(gamma_sq: float, x):
    """cosh(gamma x) as an even function of gamma (trig: cos)."""
    x = np.asarray(x, dtype=float)
    if gamma_sq > 0:
        out = np.cosh(math.sqrt(gamma_sq) * x)
    elif gamma_sq < 0:
        out = np.cos(math.sqrt(-gamma_sq) * x)
    else:
        out = np.ones_like(x)
    return float(out) if out.ndim == 0 else out


def _check_frequency(params: ModelParams) -> float:
    """Return gamma^2, raising if (gamma beta) sits on a trigonometric pole."""
    g2 = params.gamma_sq
    if g2 < 0:
        phase = math.sqrt(-g2) * params.beta
        if abs(phase - math.pi * round(phase / math.pi)) < SINGULARITY_GUARD_PHASE:
            raise SingularFrequencyError(
                f"|gamma| beta = {phase:.8f} is within {SINGULARITY_GUARD_PHASE} of a multiple of pi")
        if phase >= math.pi:
            raise SingularFrequencyError(
                f"|gamma| beta = {phase:.8f} >= pi: past the first trigonometric singularity "
                "the fixed-origin kernel is no longer real")
    return g2


# ---------------------------------------------------------------------------
# harmonic kernels
# ---------------------------------------------------------------------------

def mehler_kernel(k: float, x_i: float, x_f: float, nu: float) -> float:
    """Gaussian transition kernel of the harmonic oscillator in imaginary time."""
    if k <= 0 or nu <= 0:
        raise ValueError("mehler_kernel requires k > 0 and nu > 0")
    s = math.sinh(nu)
    return math.sqrt(k / (2.0 * math.pi * s)) * math.exp(
        -k * (x_i * x_i + x_f * x_f) / (2.0 * math.tanh(nu)) + k * x_i * x_f / s)


def harmonic_fixed_origin(params: ModelParams) -> tuple[float, float]:
    """(prefactor, exponent) of the origin-pinned harmonic kernel.

    prefactor = [(2 pi / c) sinh(gamma beta)/gamma]^(-1/2),
    exponent  = -(c gamma / 2) coth(gamma beta) x_f^2,
    both continued evenly in gamma across b <= 0.
    """
    g2 = _check_frequency(params)
    s = sinh_ratio(g2, params.beta)
    if s <= 0:
        raise SingularFrequencyError("sinh(gamma beta)/gamma <= 0: singular frequency")
    prefactor = 1.0 / math.sqrt(2.0 * math.pi / params.c * s)
    exponent = -0.5 * params.c * coth_scaled(g2, params.beta) * params.x_f ** 2
    return prefactor, exponent


# ---------------------------------------------------------------------------
# finite-N closed forms (difference-equation solutions)
# ---------------------------------------------------------------------------

def _sigma(params: ModelParams, N: int) -> float:
    delta = params.beta / N
    kappa = 1.0 + params.b * delta * delta / params.c
    if kappa <= 0:
        raise SingularLatticeError(f"1 + b delta^2/c = {kappa} <= 0 at N={N}")
    return 1.0 / (2.0 * kappa)


def _rho_pair(sigma: float):
    disc = 1.0 - 4.0 * sigma * sigma
    if disc <= 0:
        raise SingularLatticeError(
            f"4 sigma^2 = {4*sigma*sigma} >= 1: closed-form recurrences need a real root split")
    root = math.sqrt(disc)
    return (1.0 + root) / 2.0, (1.0 - root) / 2.0, root


def prefactor_finite_N(params: ModelParams, N: int) -> float:
    """The determinant factor (2 pi delta / c) [2(1+b delta^2/c)]^(N-1) Omega_{N-2}.

    Omega_n = w1 rho1^n + w2 rho2^n solves Omega_n = Omega_{n-1} - sigma^2 Omega_{n-2};
    the N -> inf limit is (2 pi / c) sinh(gamma beta)/gamma.  The kernel
    prefactor itself is this value to the power -1/2.
    """
    if N < 2:
        raise ValueError("prefactor_finite_N requires N >= 2")
    delta = params.beta / N
    kappa = 1.0 + params.b * delta * delta / params.c
    if kappa <= 0:
        raise SingularLatticeError(f"1 + b delta^2/c = {kappa} <= 0 at N={N}")
    base = (2.0 * math.pi * delta / params.c) * (2.0 * kappa) ** (N - 1)
    if params.b == 0.0:
        # double root rho = 1/2: Omega_n = (1 + n/2) 2^-n, exact at every N
        return base * (1.0 + 0.5 * (N - 2)) * 0.5 ** (N - 2)
    sigma = 0.5 / kappa
    rho1, rho2, root = _rho_pair(sigma)
    w1 = 0.5 * (1.0 + (1.0 - 2.0 * sigma * sigma) / root)
    w2 = 0.5 * (1.0 - (1.0 - 2.0 * sigma * sigma) / root)
    return base * (w1 * rho1 ** (N - 2) + w2 * rho2 ** (N - 2))


def bigQ_sigma(sigma: float, n: int) -> float:
    """Q_n = (rho1/sigma)^n + (u2~/u1~) (rho2/sigma)^n for a given lattice sigma."""
    rho1, rho2, root = _rho_pair(sigma)
    ratio = -rho2 / rho1  # u2~/u1~ with u~_{1,2} = (1 +- 1/root)/2
    return (rho1 / sigma) ** n + ratio * (rho2 / sigma) ** n


def bigQ_tilde_sigma(sigma: float, n: int) -> float:
    """Qtilde_n, the companion sequence with the relative sign flipped."""
    rho1, rho2, root = _rho_pair(sigma)
    ratio = -rho2 / rho1
    return (rho1 / sigma) ** n - ratio * (rho2 / sigma) ** n


def bigQ(n: int, params: ModelParams, N: int) -> float:
    if n < 0:
        raise ValueError("sequence index n must be >= 0")
    return bigQ_sigma(_sigma(params, N), n)


def bigQ_tilde(n: int, params: ModelParams, N: int) -> float:
    if n < 0:
        raise ValueError("sequence index n must be >= 0")
    return bigQ_tilde_sigma(_sigma(params, N), n)


def exponent_finite_N(params: ModelParams, N: int) -> float:
    """Full finite-N exponent -a delta x^4 - (c/2delta + b delta) x^2 + xi.

    xi is assembled from the closed form 1/omega_{N-2}; N -> inf gives
    -(c gamma/2) coth(gamma beta) x_f^2.
    """
    if N < 2:
        raise ValueError("exponent_finite_N requires N >= 2")
    delta = params.beta / N
    kappa = 1.0 + params.b * delta * delta / params.c
    if kappa <= 0:
        raise SingularLatticeError(f"1 + b delta^2/c = {kappa} <= 0 at N={N}")
    if params.b == 0.0:
        # omega_n = (n+2)/(2(n+1)) exactly on the flat branch
        inv_omega = 2.0 * (N - 1) / N
    else:
        sigma = 0.5 / kappa
        inv_omega = bigQ_sigma(sigma, N - 2) / (sigma * bigQ_sigma(sigma, N - 1))
    xi = inv_omega * params.c / (4.0 * delta * kappa) * params.x_f ** 2
    x2 = params.x_f ** 2
    return (-params.a * delta * params.x_f ** 4
            - (params.c / (2.0 * delta) + params.b * delta) * x2
            + xi)


# ---------------------------------------------------------------------------
# anharmonic kernels d(tau), Q(tau)
# ---------------------------------------------------------------------------

def kernel_d_scaled(tau, params: ModelParams):
    """gamma^2 d(tau) = (gamma coth(gamma tau) - gamma coth(gamma beta))/2.

    Finite on every branch; the flat-branch value is the derived series limit
    (1/tau - 1/beta)/2.  Valid for tau in (0, beta].
    """
    g2 = params.gamma_sq
    return 0.5 * (coth_scaled(g2, tau) - coth_scaled(g2, params.beta))


def kernel_q4_scaled(tau, params: ModelParams):
    """Q(tau)^4 / gamma^4 = 16 (sinh(gamma tau)/gamma)^4; flat limit 16 tau^4."""
    s = sinh_ratio(params.gamma_sq, tau)
    return 16.0 * s ** 2 * s ** 2


def q_squared(tau, params: ModelParams):
    """Q(tau)^2 = 4 sinh^2(gamma tau), continued evenly (negative on the trig branch)."""
    s = sinh_ratio(params.gamma_sq, tau)
    return 4.0 * params.gamma_sq * s * s


def kernel_d(tau: float, params: ModelParams) -> float:
    """d(tau) = (coth(gamma tau) - coth(gamma beta))/(2 gamma), trig branch via cot.

    Diverges like 1/gamma^2 as b -> 0; the flat branch therefore has no raw
    value and callers on that branch must use kernel_d_scaled.
    """
    if not 0.0 < tau <= params.beta:
        raise ValueError("kernel_d requires tau in (0, beta]")
    g2 = params.gamma_sq
    if g2 == 0.0:
        raise ValueError(
            "d(tau) diverges on the flat branch; use kernel_d_scaled (= gamma^2 d)")
    return kernel_d_scaled(tau, params) / g2


def kernel_Q(tau: float, params: ModelParams) -> float:
    """Q(tau) = 2 sinh(gamma tau); trig branch 2 sin(|gamma| tau).

    Only even powers of Q enter any formula; for those the signed
    continuation is q_squared / kernel_q4_scaled.
    """
    if not 0.0 <= tau <= params.beta:
        raise ValueError("kernel_Q requires tau in [0, beta]")
    g2 = params.gamma_sq
    scale = math.sqrt(abs(g2)) if g2 != 0.0 else 0.0
    return 2.0 * scale * sinh_ratio(g2, tau)
