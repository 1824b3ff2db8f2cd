"""Scaled parabolic cylinder functions and their quadrature oracle.

The workhorse object is the rescaled function

    Dcal_{-s}(z) = z^s * exp(z^2/4) * D_{-s}(z),        Dcal -> 1  (z -> +inf)

which for half-odd index s = m + 1/2 is exactly what one gets by normalising
the quartic Gaussian moment

    int x^{2m} exp(-alpha x^4 - B x^2) dx = Gamma(m+1/2) B^{-m-1/2} Dcal_{-m-1/2}(B/sqrt(2 alpha)).

We therefore *define* the reference Dcal by inverting this relation with
adaptive quadrature (alpha = 1, B = z*sqrt(2)); no external parabolic-cylinder
implementation is used anywhere.  The asymptotic evaluator is the truncated
expansion in 1/(2 z^2); the quadrature route is the oracle it is tested
against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from scipy.integrate import quad

from .config import DEFAULT_POLICY, TruncationPolicy
from .errors import AccuracyError

__all__ = [
    "PcfIndex",
    "pochhammer",
    "pochhammer_exact",
    "coeff_a",
    "coeff_a_exact",
    "quartic_moment",
    "pcf_scaled_ref",
    "pcf_scaled_halfindex",
    "pcf_weighted",
    "pcf_scaled_poincare",
    "j1_quartic",
    "j1_quadrature",
    "integrate_real_line",
    "integrate_half_line",
]


@dataclass(frozen=True)
class PcfIndex:
    """Index of the function Dcal_{-m-1/2}; m is a nonnegative integer."""

    m: int

    def __post_init__(self):
        if self.m < 0:
            raise ValueError(f"PcfIndex requires m >= 0, got {self.m}")


def pochhammer(x: float, k: int) -> float:
    """Rising factorial x (x+1) ... (x+k-1); k = 0 gives the empty product 1."""
    if k < 0:
        raise ValueError("pochhammer order k must be >= 0")
    out = 1.0
    for i in range(k):
        out *= x + i
    return out


def pochhammer_exact(x: Fraction, k: int) -> Fraction:
    """Rising factorial in exact rational arithmetic."""
    if k < 0:
        raise ValueError("pochhammer order k must be >= 0")
    out = Fraction(1)
    x = Fraction(x)
    for i in range(k):
        out *= x + i
    return out


def coeff_a_exact(i: int, j: int) -> Fraction:
    """Coefficient a_i^j = C(j, i) (1/2)_j / (1/2)_i, exact.

    Returns 0 outside the structural range 0 <= i <= j so that sums over
    these coefficients can be written without explicit bounds checks.
    """
    if i < 0 or j < 0 or i > j:
        return Fraction(0)
    return math.comb(j, i) * pochhammer_exact(Fraction(1, 2), j) / pochhammer_exact(Fraction(1, 2), i)


def coeff_a(i: int, j: int) -> float:
    """Float view of a_i^j; raises for indices outside 0 <= i <= j."""
    if i < 0 or j < 0 or i > j:
        raise ValueError(f"coeff_a requires 0 <= i <= j, got i={i}, j={j}")
    return float(coeff_a_exact(i, j))


# ---------------------------------------------------------------------------
# Quadrature oracle
# ---------------------------------------------------------------------------

def _check_quad(value: float, abserr: float, policy: TruncationPolicy, what: str) -> float:
    tol = max(policy.quad_abs_tol, policy.quad_rel_tol * abs(value))
    # quadpack error estimates are conservative; allow one order of slack
    if abserr > 10.0 * tol or math.isnan(value):
        raise AccuracyError(
            f"quadrature for {what} did not converge (error estimate {abserr:.3e})",
            achieved=abserr,
            required=tol,
        )
    return value


def integrate_half_line(f, policy: TruncationPolicy = DEFAULT_POLICY, what: str = "integral") -> float:
    """int_0^inf f(x) dx via the map x = t/(1-t^2) onto t in [0, 1)."""

    def g(t):
        if t >= 1.0:
            return 0.0
        u = 1.0 - t * t
        return f(t / u) * (1.0 + t * t) / (u * u)

    value, abserr = quad(g, 0.0, 1.0, epsabs=policy.quad_abs_tol,
                         epsrel=policy.quad_rel_tol, limit=200)
    return _check_quad(value, abserr, policy, what)


def integrate_real_line(f, policy: TruncationPolicy = DEFAULT_POLICY, what: str = "integral") -> float:
    """int_-inf^inf f(x) dx via the map x = t/(1-t^2) onto t in (-1, 1)."""

    def g(t):
        if abs(t) >= 1.0:
            return 0.0
        u = 1.0 - t * t
        return f(t / u) * (1.0 + t * t) / (u * u)

    value, abserr = quad(g, -1.0, 1.0, epsabs=policy.quad_abs_tol,
                         epsrel=policy.quad_rel_tol, limit=200)
    return _check_quad(value, abserr, policy, what)


def quartic_moment(n: int, alpha: float, beta_coef: float,
                   policy: TruncationPolicy = DEFAULT_POLICY) -> float:
    """int x^n exp(-alpha x^4 - beta_coef x^2) dx over the whole line.

    This is the module's independent oracle: plain adaptive quadrature,
    no parabolic-cylinder machinery.  Odd n vanishes by symmetry.
    """
    if n < 0:
        raise ValueError("moment order n must be >= 0")
    if alpha <= 0:
        raise ValueError("quartic coefficient alpha must be > 0")
    if n % 2 == 1:
        return 0.0
    return 2.0 * integrate_half_line(
        lambda x: x ** n * math.exp(-alpha * x ** 4 - beta_coef * x * x),
        policy, what=f"quartic moment n={n}")


def _abs_moment(two_s_minus_1: float, alpha: float, beta_coef: float,
                policy: TruncationPolicy) -> float:
    """int |x|^{2s-1} exp(-alpha x^4 - beta_coef x^2) dx for real 2s-1 > -1."""
    return 2.0 * integrate_half_line(
        lambda x: (x ** two_s_minus_1 if x > 0.0 else 0.0)
        * math.exp(-alpha * x ** 4 - beta_coef * x * x),
        policy, what=f"abs moment power={two_s_minus_1}")


def pcf_weighted(m: int, z: float, policy: TruncationPolicy = DEFAULT_POLICY) -> float:
    """exp(z^2/4) * D_{-m-1/2}(z) for any real z (sign-free argument).

    Obtained from the moment inversion with alpha = 1, B = z*sqrt(2):
    e^{z^2/4} D = (2 alpha)^{m/2+1/4} / Gamma(m+1/2) * int x^{2m} e^{-x^4 - Bx^2} dx.
    """
    if m < 0:
        raise ValueError("index m must be >= 0")
    mom = quartic_moment(2 * m, 1.0, z * math.sqrt(2.0), policy)
    return 2.0 ** (0.5 * m + 0.25) / math.gamma(m + 0.5) * mom


def pcf_scaled_halfindex(s: float, z: float,
                         policy: TruncationPolicy = DEFAULT_POLICY) -> float:
    """Reference Dcal_{-s}(z) for real order s > 0 and z > 0.

    Defined through B^s / Gamma(s) * int |x|^{2s-1} e^{-x^4 - Bx^2} dx with
    B = z*sqrt(2); for s = m + 1/2 this reduces to the integer-index case.
    """
    if s <= 0:
        raise ValueError("order s must be > 0")
    if z <= 0:
        raise ValueError("argument z must be > 0")
    B = z * math.sqrt(2.0)
    return B ** s / math.gamma(s) * _abs_moment(2.0 * s - 1.0, 1.0, B, policy)


def pcf_scaled_ref(idx: PcfIndex, z: float,
                   policy: TruncationPolicy = DEFAULT_POLICY) -> float:
    """Reference value of Dcal_{-m-1/2}(z), z > 0, by quadrature inversion."""
    if z <= 0:
        raise ValueError("argument z must be > 0")
    return z ** (idx.m + 0.5) * pcf_weighted(idx.m, z, policy)


def pcf_scaled_poincare(idx: PcfIndex, z: float, J: int) -> float:
    """Truncated asymptotic expansion sum_{j<=J} (-1)^j (m+1/2)_{2j} / (j! (2z^2)^j)."""
    if z <= 0:
        raise ValueError("argument z must be > 0")
    if J < 0:
        raise ValueError("expansion order J must be >= 0")
    acc = 0.0
    inv = 1.0 / (2.0 * z * z)
    for j in range(J + 1):
        acc += (-1) ** j * pochhammer(idx.m + 0.5, 2 * j) / math.factorial(j) * inv ** j
    return acc


def poincare_term(m: int, z: float, j: int) -> float:
    """Magnitude of the j-th expansion term; the j = J+1 value bounds the remainder empirically."""
    return pochhammer(m + 0.5, 2 * j) / math.factorial(j) / (2.0 * z * z) ** j


# ---------------------------------------------------------------------------
# The one-dimensional quartic integral J_1(a, b, c)
# ---------------------------------------------------------------------------

def j1_quadrature(a: float, b: float, c: float,
                  policy: TruncationPolicy = DEFAULT_POLICY) -> float:
    """Direct quadrature of int exp(-(a x^4 + b x^2 + c x)) dx (the oracle)."""
    if a <= 0:
        raise ValueError("quartic coefficient a must be > 0")
    return integrate_real_line(
        lambda x: math.exp(-(a * x ** 4 + b * x * x + c * x)),
        policy, what="J1 integrand")


def j1_quartic(a: float, b: float, c: float,
               policy: TruncationPolicy = DEFAULT_POLICY) -> float:
    """Series evaluation of the quartic integral:

        J_1 = Gamma(1/2) / (2a)^{1/4} * sum_m xi^m / m! * e^{z^2/4} D_{-m-1/2}(z)

    with xi = c^2/(4 sqrt(2a)), z = b/sqrt(2a).  Convergent for every real b, c.
    Terminates once two consecutive terms drop below quad_abs_tol.
    """
    if a <= 0:
        raise ValueError("quartic coefficient a must be > 0")
    root = math.sqrt(2.0 * a)
    xi = c * c / (4.0 * root)
    z = b / root
    pref = math.sqrt(math.pi) / (2.0 * a) ** 0.25

    total = 0.0
    xi_pow = 1.0  # xi^m / m!
    below = 0
    for m in range(policy.series_cutoff + 1):
        term = xi_pow * pcf_weighted(m, z, policy)
        total += term
        if abs(term) < policy.quad_abs_tol:
            below += 1
            if below >= 2:
                return pref * total
        else:
            below = 0
        xi_pow *= xi / (m + 1)
    raise AccuracyError(
        f"J1 series not converged within {policy.series_cutoff} terms",
        achieved=abs(term), required=policy.quad_abs_tol)
