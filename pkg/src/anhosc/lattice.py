"""Finite-N time-sliced propagator: brute-force oracle, exact multi-series,
and the leading-term recurrence.

Three independent routes to W_N live here:

* wn_quadrature   -- nested adaptive quadrature of the sliced path integral
                     (the oracle; usable for N <= 4),
* wn_series_exact -- the exact (N-1)-fold parabolic-cylinder series, truncated
                     k-sums with a reported tail estimate,
* wn_leading      -- the resummed leading term: prefactor * exp(...) * the
                     double sum over (nu, p) of xi^p (N-1)^{2nu}_p, where the
                     bracket symbols obey the coefficient recurrence below.

The bracket recurrence, with sigma = [2(1+b delta^2/c)]^{-1} and
omega_{i+1} = 1 - sigma^2/omega_i, omega_0 = 1:

    (1)^{2mu}_p      = a^{2mu}_p
    (L)^{2mu}_p      = sum_{j=0}^{mu} C(mu,j) omega_{L-1}^{-2j}
                       sum_{i=max(0,p-2j)}^{2mu-2j} a^{2j+i}_p (L-1)^{2mu-2j}_i
                       * (sigma^2/(omega_{L-1} omega_{L-2}))^i
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .config import DEFAULT_POLICY, ModelParams, TruncationPolicy
from .errors import AccuracyError, SingularLatticeError
from .specfun import coeff_a_exact, integrate_real_line, pcf_weighted

__all__ = [
    "LatticeState",
    "LambdaTable",
    "make_lattice_state",
    "discretized_action",
    "wn_quadrature",
    "wn_series_exact",
    "lambda_symbol",
    "wn_leading",
]


@dataclass(frozen=True)
class LatticeState:
    """Derived per-slice quantities for an N-slice lattice."""

    N: int
    delta: float
    kappa: float            # 1 + b delta^2 / c
    sigma: float            # [2 kappa]^{-1}
    z: float                # c kappa / sqrt(2 a delta^3); +inf when a = 0
    omega: tuple[float, ...]  # omega_0 .. omega_{N-2}
    xi: float               # (1/omega_{N-2}) c/(4 delta kappa) x_f^2


def make_lattice_state(params: ModelParams, N: int) -> LatticeState:
    if N < 1:
        raise ValueError("slice count N must be >= 1")
    delta = params.beta / N
    kappa = 1.0 + params.b * delta * delta / params.c
    if kappa <= 0:
        raise SingularLatticeError(f"1 + b delta^2/c = {kappa} <= 0 at N={N}")
    sigma = 1.0 / (2.0 * kappa)
    if params.a > 0:
        z = params.c * kappa / math.sqrt(2.0 * params.a * delta ** 3)
    else:
        z = math.inf
    omega = [1.0]
    for i in range(max(N - 2, 0)):
        nxt = 1.0 - sigma * sigma / omega[-1]
        if nxt == 0.0:
            raise SingularLatticeError(f"omega_{i+1} vanished during the recursion", index=i + 1)
        omega.append(nxt)
    xi = (1.0 / omega[N - 2]) * params.c / (4.0 * delta * kappa) * params.x_f ** 2 if N >= 2 else 0.0
    return LatticeState(N=N, delta=delta, kappa=kappa, sigma=sigma, z=z,
                        omega=tuple(omega), xi=xi)


def discretized_action(path, params: ModelParams, N: int) -> float:
    """E_N = sum_i delta [ (c/2)((phi_i - phi_{i-1})/delta)^2 + b phi_i^2 + a phi_i^4 ]."""
    if len(path) != N + 1:
        raise ValueError(f"path must have N+1 = {N+1} points, got {len(path)}")
    if path[0] != 0.0:
        raise ValueError("paths start at the origin (path[0] = 0)")
    delta = params.beta / N
    acc = 0.0
    for i in range(1, N + 1):
        vel = (path[i] - path[i - 1]) / delta
        acc += delta * (0.5 * params.c * vel * vel
                        + params.b * path[i] ** 2
                        + params.a * path[i] ** 4)
    return acc


# ---------------------------------------------------------------------------
# oracle: nested quadrature of the sliced integral
# ---------------------------------------------------------------------------

def wn_quadrature(params: ModelParams, N: int,
                  policy: TruncationPolicy = DEFAULT_POLICY) -> float:
    """(2 pi delta / c)^{-N/2} * int dphi_1..dphi_{N-1} exp(-E_N), N <= 4."""
    if not 1 <= N <= 4:
        raise ValueError("wn_quadrature supports N in 1..4 (at most 3 nested integrals)")
    delta = params.beta / N
    a, b, c, xf = params.a, params.b, params.c, params.x_f

    def action(phis):
        pts = (0.0,) + phis + (xf,)
        acc = 0.0
        for i in range(1, N + 1):
            vel = (pts[i] - pts[i - 1]) / delta
            acc += delta * (0.5 * c * vel * vel + b * pts[i] ** 2 + a * pts[i] ** 4)
        return acc

    measure = (2.0 * math.pi * delta / c) ** (-0.5 * N)
    if N == 1:
        return measure * math.exp(-action(()))

    def level(k, fixed):
        # integrate over phi_k given phi_1..phi_{k-1}
        if k == N - 1:
            f = lambda x: math.exp(-action(fixed + (x,)))
            return integrate_real_line(f, policy, what=f"wn_quadrature level {k}")
        return integrate_real_line(lambda x: level(k + 1, fixed + (x,)),
                                   policy, what=f"wn_quadrature level {k}")

    return measure * level(1, ())


# ---------------------------------------------------------------------------
# exact multi-series (finite k-sum truncation with tail estimate)
# ---------------------------------------------------------------------------

def _series_axis_sum(term_of_k, cutoff: int, abs_tol: float):
    """Sum term_of_k(k) for k >= 0 with early stop; returns (sum, tail_estimate).

    Terms are nonnegative; stops once a term falls below abs_tol after the
    running maximum, estimating the tail from the last two ratios.
    """
    total = 0.0
    prev = None
    tail = 0.0
    for k in range(cutoff + 1):
        t = term_of_k(k)
        total += t
        if k >= 1 and t <= abs_tol and t <= prev:
            r = t / prev if prev > 0 else 0.0
            tail = t * r / (1.0 - r) if r < 1.0 else t
            return total, tail
        prev = t
    # cutoff reached: estimate the tail from the last ratio
    if prev and prev > 0 and t > 0:
        r = t / prev
        tail = t * r / (1.0 - r) if r < 1.0 else math.inf
    return total, tail


def wn_series_exact(params: ModelParams, N: int,
                    policy: TruncationPolicy = DEFAULT_POLICY) -> float:
    """Evaluate the exact (N-1)-fold series for W_N, N in 2..4.

    Every parabolic-cylinder factor comes from the quadrature-defined
    reference; only even slice indices contribute for a path pinned at the
    origin, so the sums run over k_i = n_i/2 directly.
    """
    if not 2 <= N <= 4:
        raise ValueError("wn_series_exact supports N in 2..4")
    st = make_lattice_state(params, N)
    c, delta, kappa, z = params.c, st.delta, st.kappa, st.z
    xf2 = c / delta * params.x_f ** 2
    abs_tol = policy.quad_abs_tol
    cutoff = policy.series_cutoff

    dcal_cache: dict[int, float] = {}

    def dcal(s: int) -> float:
        # e^{z^2/4} D_{-s-1/2}(z) * z^{s+1/2} == Dcal; at a = 0, z = inf and Dcal = 1
        if s not in dcal_cache:
            dcal_cache[s] = 1.0 if math.isinf(z) else z ** (s + 0.5) * pcf_weighted(s, z, policy)
        return dcal_cache[s]

    def log_bulk(k_prev: int, k: int) -> float:
        # kappa^{-2k} / (2k)! * Gamma(k_prev + k + 1/2), log-magnitude for stability
        return (-2.0 * k * math.log(kappa) - math.lgamma(2 * k + 1)
                + math.lgamma(k_prev + k + 0.5))

    def bulk(k_prev: int, k: int) -> float:
        return math.exp(log_bulk(k_prev, k)) * dcal(k_prev + k)

    def boundary(k_prev: int, k: int) -> float:
        if xf2 == 0.0 and k > 0:
            return 0.0
        mag = (-k * math.log(kappa) - math.lgamma(2 * k + 1)
               + math.lgamma(k_prev + k + 0.5)
               + (k * math.log(xf2) if k > 0 else 0.0))
        return math.exp(mag) * dcal(k_prev + k)

    tails = []

    def axis(term):
        s, tail = _series_axis_sum(term, cutoff, abs_tol)
        tails.append(tail)
        return s

    if N == 2:
        total = axis(lambda k1: boundary(0, k1))
    elif N == 3:
        total = axis(lambda k1: bulk(0, k1) * axis(lambda k2: boundary(k1, k2)))
    else:
        total = axis(lambda k1: bulk(0, k1)
                     * axis(lambda k2: bulk(k1, k2)
                            * axis(lambda k3: boundary(k2, k3))))

    tail_est = max(tails) if tails else 0.0
    if not math.isfinite(tail_est) or tail_est > max(abs_tol * 100, policy.quad_rel_tol * abs(total) * 100):
        raise AccuracyError("k-sum truncation tail exceeds tolerance",
                            achieved=tail_est, required=abs_tol)

    prefactor = ((2.0 * math.pi * delta / c) ** -0.5
                 * (2.0 * math.pi * kappa) ** (-(N - 1) / 2.0))
    envelope = math.exp(-params.a * delta * params.x_f ** 4
                        - (c / (2.0 * delta) + params.b * delta) * params.x_f ** 2)
    return prefactor * envelope * total


# ---------------------------------------------------------------------------
# bracket-symbol recurrence and the leading term
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LambdaTable:
    """Memoized bracket symbols (L)^{2mu}_p for one lattice, p in 0..2mu."""

    Lambda: int
    entries: dict


@lru_cache(maxsize=None)
def _lambda_value(state: LatticeState, Lambda: int, mu: int, p: int) -> float:
    if Lambda == 1:
        return float(coeff_a_exact(p, 2 * mu))
    om1 = state.omega[Lambda - 1]
    om2 = state.omega[Lambda - 2]
    ratio = state.sigma ** 2 / (om1 * om2)  # sigma_{L-1} / (1 - sigma_{L-1})
    inv = 1.0 / (om1 * om1)
    acc = 0.0
    for j in range(mu + 1):
        inner = 0.0
        for i in range(max(0, p - 2 * j), 2 * mu - 2 * j + 1):
            aco = coeff_a_exact(p, 2 * j + i)
            if aco == 0:
                continue
            inner += float(aco) * _lambda_value(state, Lambda - 1, mu - j, i) * ratio ** i
        acc += math.comb(mu, j) * inv ** j * inner
    return acc


def lambda_symbol(Lambda: int, mu: int, p: int, state: LatticeState) -> float:
    """Bracket symbol (Lambda)^{2 mu}_p for the given lattice state."""
    if Lambda < 1:
        raise ValueError("Lambda must be >= 1")
    if Lambda > state.N - 1:
        raise ValueError(f"Lambda={Lambda} exceeds the lattice depth N-1={state.N-1}")
    if mu < 0 or not 0 <= p <= 2 * mu:
        raise ValueError(f"indices out of structural range: mu={mu}, p={p}")
    return _lambda_value(state, Lambda, mu, p)


def lambda_table(state: LatticeState, Lambda: int, mu_max: int) -> LambdaTable:
    entries = {(mu, p): lambda_symbol(Lambda, mu, p, state)
               for mu in range(mu_max + 1) for p in range(2 * mu + 1)}
    return LambdaTable(Lambda=Lambda, entries=entries)


def wn_leading(params: ModelParams, N: int, J: int,
               policy: TruncationPolicy = DEFAULT_POLICY) -> float:
    """Leading resummed term of W_N at asymptotic order J."""
    if N < 2:
        raise ValueError("wn_leading requires N >= 2")
    st = make_lattice_state(params, N)
    prod = 1.0
    for om in st.omega:
        prod *= 2.0 * om * st.kappa
    prefactor = 1.0 / math.sqrt((2.0 * math.pi * st.delta / params.c) * prod)
    exponent = (-params.a * st.delta * params.x_f ** 4
                - (params.c / (2.0 * st.delta) + params.b * st.delta) * params.x_f ** 2
                + st.xi)

    series = 0.0
    for nu in range(J + 1):
        if nu > 0 and math.isinf(st.z):
            break  # a = 0: only the Gaussian chain survives
        inner = sum(st.xi ** p * lambda_symbol(N - 1, nu, p, st)
                    for p in range(2 * nu + 1))
        series += ((-1.0) ** nu / math.factorial(nu)
                   / (2.0 * st.z * st.z) ** nu * inner)
    return prefactor * math.exp(exponent) * series
