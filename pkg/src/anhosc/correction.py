"""The anharmonic correction series and final propagator assembly.

The correction multiplying the origin-pinned Mehler kernel is

    sum_p c^{-p} sum_{nu} (-a)^nu X^{2nu-p}
        sum_{m_1..m_nu, sum m = p} prod_F F(j_i, m_{j_i}, p_{j_i}) * I_{word}(0)

with X = x_f^2 / Q^2(beta) and I_{m_1..m_nu}(tau) the ordered nested integrals
of J_m(t) = d(t)^m Q(t)^4.  Internally everything is computed in the
gamma-rescaled pair

    Xs = x_f^2 / (4 s(beta)^2),   Js_m = (gamma^2 d)^m (Q^4/gamma^4),
    s(t) = sinh(gamma t)/gamma,

whose products equal the raw ones exactly while staying finite and real on
all three frequency branches (the gamma powers cancel term by term).

For each order p the placement sum over positions of the nonzero letters is
reduced *exactly* to the zero-padded basis words

    B_t = (m_1, 0^t_1, m_2, 0^t_2, ..., m_mu, 0^t_mu)

by expanding the product of algebraic factors in the binomial basis
C(u_i - u_{i+1} - 1, t_i) ... C(u_mu, t_mu) (finite differences, exact
rationals).  Summing the zero tower over nu then factors the universal
exponential exp(-a I_0(0) x_f^4 / Q^4(beta)) out in closed form and leaves a
polynomial of degree 2p in (-a), reproducing the displayed p = 0, 1, 2
assemblies coefficient by coefficient.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from numpy.polynomial.chebyshev import Chebyshev

from .config import DEFAULT_POLICY, ModelParams, TruncationPolicy
from .continuum import (
    _check_frequency,
    harmonic_fixed_origin,
    kernel_d_scaled,
    kernel_q4_scaled,
    sinh_ratio,
)
from .errors import AccuracyError

__all__ = [
    "MultiIndex",
    "CorrectionTerm",
    "PropagatorResult",
    "enumerate_multiindices",
    "multiindex_count",
    "sigma_factor",
    "sigma_factor_from_x",
    "sigma_table_from_x",
    "f_factor",
    "f_factor_from_x",
    "nested_integral",
    "nested_integral_scaled",
    "universal_ratio",
    "universal_exponent",
    "correction_polynomial",
    "correction_series",
    "assembly_p0",
    "assembly_p1",
    "assembly_p2",
    "p2_coefficient_report",
    "full_propagator",
]


# ---------------------------------------------------------------------------
# multi-indices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MultiIndex:
    """Ordered exponents (m_1..m_nu), each in 0..4, of the kernel d inside I."""

    entries: tuple[int, ...]

    def __post_init__(self):
        if any(not 0 <= m <= 4 for m in self.entries):
            raise ValueError(f"multi-index letters must lie in 0..4: {self.entries}")

    @property
    def nu(self) -> int:
        return len(self.entries)

    @property
    def p(self) -> int:
        return sum(self.entries)


def enumerate_multiindices(nu: int, p: int) -> list[MultiIndex]:
    """All ordered (m_1..m_nu) with 0 <= m_j <= 4 and sum m_j = p."""
    if nu < 0 or p < 0:
        raise ValueError("nu and p must be >= 0")
    out = []

    def rec(prefix, remaining, slots):
        if slots == 0:
            if remaining == 0:
                out.append(MultiIndex(tuple(prefix)))
            return
        lo = max(0, remaining - 4 * (slots - 1))
        hi = min(4, remaining)
        for m in range(lo, hi + 1):
            rec(prefix + [m], remaining - m, slots - 1)

    rec([], p, nu)
    return out


def multiindex_count(nu: int, p: int) -> int:
    """Independent count: [x^p] (1+x+x^2+x^3+x^4)^nu by inclusion-exclusion."""
    total = 0
    for k in range(nu + 1):
        rest = p - 5 * k
        if rest < 0:
            break
        total += (-1) ** k * math.comb(nu, k) * math.comb(rest + nu - 1, nu - 1)
    return total


# ---------------------------------------------------------------------------
# Sigma and F factor tables
# ---------------------------------------------------------------------------

_C_ALPHA = {2: Fraction(3, 4), 3: Fraction(3), 4: Fraction(1)}


def _falling(x: Fraction, k: int) -> Fraction:
    out = Fraction(1)
    for i in range(k):
        out *= x - i
    return out


def sigma_factor_from_x_exact(m: int, x) -> Fraction:
    """Defining sum: sum_{alpha=max(2,m)}^4 c_alpha C(alpha,m) x(x-1)..(x-alpha+3)."""
    if not 0 <= m <= 4:
        raise ValueError(f"Sigma factor defined for m in 0..4, got {m}")
    x = Fraction(x)
    return sum(_C_ALPHA[alpha] * math.comb(alpha, m) * _falling(x, alpha - 2)
               for alpha in range(max(2, m), 5))


def sigma_table_from_x_exact(m: int, x) -> Fraction:
    """The tabulated closed rows of Sigma(m, .) as polynomials in x = 2(nu-j)-p_j."""
    x = Fraction(x)
    if m == 0:
        return (x + Fraction(1, 2)) * (x + Fraction(3, 2))
    if m == 1:
        return 4 * (x + Fraction(1, 2)) * (x + Fraction(3, 4))
    if m == 2:
        return 6 * x * (x - 1) + 9 * x + Fraction(3, 4)
    if m == 3:
        return 4 * (x - Fraction(1, 4)) * x
    if m == 4:
        return (x - 1) * x
    raise ValueError(f"Sigma factor defined for m in 0..4, got {m}")


def sigma_factor_from_x(m: int, x: float) -> float:
    return float(sigma_factor_from_x_exact(m, Fraction(x).limit_denominator(10 ** 12)))


def sigma_factor(m: int, j: int, p_j: int, nu: int) -> float:
    """Sigma(m_j, j, p_j) evaluated at x = 2(nu - j) - p_j (defining-sum route)."""
    return float(sigma_factor_from_x_exact(m, 2 * (nu - j) - p_j))


def sigma_table(m: int, j: int, p_j: int, nu: int) -> float:
    """Same factor read off the closed table row; equals sigma_factor identically."""
    return float(sigma_table_from_x_exact(m, 2 * (nu - j) - p_j))


# ascending coefficients of F_m(x); F = Gamma(x+1/2)/Gamma(x-m+5/2) * Sigma(m, x)
_F_POLY = {
    1: (Fraction(3), Fraction(4)),
    2: (Fraction(3, 4), Fraction(3), Fraction(6)),
    3: (Fraction(0), Fraction(1, 2), Fraction(-3), Fraction(4)),
    4: (Fraction(0), Fraction(-3, 4), Fraction(11, 4), Fraction(-3), Fraction(1)),
}


def f_factor_from_x_exact(m: int, x) -> Fraction:
    if m not in _F_POLY:
        raise ValueError(f"F factor defined for m in 1..4, got {m} "
                         "(zero letters are absorbed into the Pochhammer prefactor)")
    x = Fraction(x)
    return sum(c * x ** k for k, c in enumerate(_F_POLY[m]))


def f_factor_from_x(m: int, x: float) -> float:
    return float(f_factor_from_x_exact(m, Fraction(x).limit_denominator(10 ** 12)))


def f_factor(m: int, j_i: int, p_ji: int, nu: int) -> float:
    """Algebraic factor F(j_i, m, p_{j_i}) at x = 2(nu - j_i) - p_{j_i}."""
    return float(f_factor_from_x_exact(m, 2 * (nu - j_i) - p_ji))


# ---------------------------------------------------------------------------
# nested integrals (Chebyshev suffix profiles over the scaled kernels)
# ---------------------------------------------------------------------------

class _ProfileEngine:
    """Iterated-integral profiles G_w(t) = I_w^scaled(t) on [0, beta].

    Each suffix word is fitted once as a Chebyshev series (suffix sharing);
    inner profiles are reused across words, so cost is linear in word length.
    """

    def __init__(self, params: ModelParams, rel_tol: float):
        self.params = params
        self.beta = params.beta
        self.rel_tol = max(rel_tol * 1e-2, 1e-15)
        self._cache: dict[tuple[int, ...], Chebyshev] = {}

    def _fit(self, func) -> Chebyshev:
        deg = 48
        while True:
            ch = Chebyshev.interpolate(func, deg, domain=[0.0, self.beta])
            scale = float(np.max(np.abs(ch.coef))) or 1.0
            tail = float(np.max(np.abs(ch.coef[-3:])))
            if tail <= self.rel_tol * scale:
                return ch
            if deg >= 3072:
                raise AccuracyError(
                    "nested-integral profile did not converge",
                    achieved=tail / scale, required=self.rel_tol)
            deg *= 2

    def _j_kernel(self, m: int, t):
        q4 = kernel_q4_scaled(t, self.params)
        if m == 0:
            return q4
        return kernel_d_scaled(t, self.params) ** m * q4

    def profile(self, word: tuple[int, ...]) -> Chebyshev | None:
        if not word:
            return None
        if word in self._cache:
            return self._cache[word]
        inner = self.profile(word[1:])
        m = word[0]
        if inner is None:
            f = lambda t: self._j_kernel(m, t)
        else:
            f = lambda t: self._j_kernel(m, t) * inner(t)
        fit = self._fit(f)
        anti = fit.integ(lbnd=0.0)
        g = anti * (-1.0) + float(anti(self.beta))
        self._cache[word] = g
        return g

    def value(self, word: tuple[int, ...], tau: float) -> float:
        if not word:
            return 1.0
        if not 0.0 <= tau <= self.beta:
            raise ValueError("tau must lie in [0, beta]")
        return float(self.profile(word)(tau))


@lru_cache(maxsize=64)
def _engine(gamma_sq: float, beta: float, rel_tol: float) -> _ProfileEngine:
    # kernels depend on (gamma^2, beta) only; a, c, x_f never enter the profiles
    params = ModelParams(a=0.0, b=gamma_sq / 2.0, c=1.0, beta=beta, x_f=0.0)
    return _ProfileEngine(params, rel_tol)


def _word_of(idx) -> tuple[int, ...]:
    if isinstance(idx, MultiIndex):
        return idx.entries
    word = tuple(int(m) for m in idx)
    MultiIndex(word)  # validation
    return word


def nested_integral_scaled(idx, tau: float, params: ModelParams,
                           policy: TruncationPolicy = DEFAULT_POLICY) -> float:
    """Scaled nested integral: like I_w(tau) but with gamma^2 d and Q^4/gamma^4."""
    word = _word_of(idx)
    eng = _engine(params.gamma_sq, params.beta, policy.quad_rel_tol)
    return eng.value(word, tau)


def nested_integral(idx, tau: float, params: ModelParams,
                    policy: TruncationPolicy = DEFAULT_POLICY) -> float:
    """Ordered nested integral I_{m_1..m_nu}(tau) of J_m = d^m Q^4.

    Equal to (gamma^2)^(2 nu - p) times the scaled value; on the flat branch
    only words with p = 2 nu have a finite raw value (p < 2 nu gives 0).
    """
    word = _word_of(idx)
    scaled = nested_integral_scaled(word, tau, params, policy)
    k = 2 * len(word) - sum(word)
    g2 = params.gamma_sq
    if g2 == 0.0:
        if k > 0:
            return 0.0
        if k == 0:
            return scaled
        raise ValueError("raw nested integral diverges on the flat branch for p > 2 nu")
    return g2 ** k * scaled


# ---------------------------------------------------------------------------
# universal exponential factor
# ---------------------------------------------------------------------------

def universal_ratio(params: ModelParams) -> float:
    """I_0(0) / Q^4(beta) = (3 gamma beta - 2 sinh(2 gamma beta) + sinh(4 gamma beta)/4)
    / (8 gamma sinh^4(gamma beta)), continued evenly in gamma (flat limit beta/5).

    For small (gamma beta)^2 the numerator is summed by its cancellation-free
    series sum_{k>=2} (2^{4k} - 2^{2k+2})/(2k+1)! u^{2k+1}.
    """
    g2 = params.gamma_sq
    beta = params.beta
    w = g2 * beta * beta  # signed (gamma beta)^2
    s4 = sinh_ratio(g2, beta) ** 4
    if abs(w) <= 1.0:
        # ratio = beta^5/(8 s(beta)^4) * sum_{k>=2} c_k w^{k-2}
        acc = 0.0
        wpow = 1.0
        for k in range(2, 40):
            ck = (2.0 ** (4 * k) - 2.0 ** (2 * k + 2)) / math.factorial(2 * k + 1)
            term = ck * wpow
            acc += term
            if abs(term) < 1e-18 * abs(acc):
                break
            wpow *= w
        return beta ** 5 / (8.0 * s4) * acc
    if g2 > 0:
        g = math.sqrt(g2)
        u = g * beta
        num = 3.0 * u - 2.0 * math.sinh(2.0 * u) + 0.25 * math.sinh(4.0 * u)
        return num / (8.0 * g * math.sinh(u) ** 4)
    g = math.sqrt(-g2)
    u = g * beta
    num = 3.0 * u - 2.0 * math.sin(2.0 * u) + 0.25 * math.sin(4.0 * u)
    return num / (8.0 * g * math.sin(u) ** 4)


def universal_exponent(params: ModelParams) -> float:
    """-a x_f^4 I_0(0)/Q^4(beta): the exponent of the universal quartic factor."""
    _check_frequency(params)
    if params.a == 0.0:
        return 0.0
    return -params.a * params.x_f ** 4 * universal_ratio(params)


# ---------------------------------------------------------------------------
# exact placement-sum reduction
# ---------------------------------------------------------------------------

def _compositions(p: int) -> list[tuple[int, ...]]:
    """Ordered tuples of parts in 1..4 summing to p (the nonzero letters)."""
    if p == 0:
        return [()]
    out = []

    def rec(prefix, rem):
        if rem == 0:
            out.append(tuple(prefix))
            return
        for m in range(1, min(4, rem) + 1):
            rec(prefix + [m], rem - m)

    rec([], p)
    return out


def _weight_at(ms: tuple[int, ...], u: tuple[int, ...]) -> Fraction:
    """prod_i F_{m_i}(2 u_i - p_i) with p_i = p - m_1 - ... - m_i, exact."""
    p = sum(ms)
    acc = Fraction(1)
    consumed = 0
    for m, ui in zip(ms, u):
        consumed += m
        x = 2 * ui - (p - consumed)
        acc *= f_factor_from_x_exact(m, x)
        if acc == 0:
            return acc
    return acc


@lru_cache(maxsize=None)
def _sector_terms(ms: tuple[int, ...]) -> tuple[tuple[Fraction, tuple[int, ...]], ...]:
    """Exact basis expansion of one composition's placement sum.

    Returns ((coeff, word), ...) such that for every nu,

      sum_{1<=j_1<...<j_mu<=nu} prod F * I_{placed} = sum coeff * I_word * I_0^{nu-r}/(nu-r)!

    where word = (m_1, 0^t_1, ..., m_mu, 0^t_mu), r = len(word).  Coefficients
    are the multidimensional finite differences of the weight polynomial in
    the variables v_i = u_i - u_{i+1} - 1 (v_mu = u_mu).
    """
    mu = len(ms)
    if mu == 0:
        return ()
    degs_u = [len(_F_POLY[m]) - 1 for m in ms]          # degree of F_{m_i} in u_i
    degs_v = [sum(degs_u[: k + 1]) for k in range(mu)]  # v_k appears in u_0..u_k

    def u_of(v: tuple[int, ...]) -> tuple[int, ...]:
        return tuple(sum(v[i:]) + (mu - 1 - i) for i in range(mu))

    grid = list(itertools.product(*[range(d + 1) for d in degs_v]))
    values = {v: _weight_at(ms, u_of(v)) for v in grid}

    terms = []
    for t in grid:
        coeff = Fraction(0)
        for s in itertools.product(*[range(ti + 1) for ti in t]):
            sign = (-1) ** (sum(t) - sum(s))
            binom = 1
            for ti, si in zip(t, s):
                binom *= math.comb(ti, si)
            coeff += sign * binom * values[s]
        if coeff != 0:
            word = []
            for m, ti in zip(ms, t):
                word.append(m)
                word.extend([0] * ti)
            terms.append((coeff, tuple(word)))
    return tuple(terms)


@lru_cache(maxsize=None)
def _order_terms(p: int) -> tuple[tuple[Fraction, tuple[int, ...]], ...]:
    """All exact basis terms at correction order p, over every composition."""
    merged: dict[tuple[int, ...], Fraction] = {}
    for ms in _compositions(p):
        for coeff, word in _sector_terms(ms):
            merged[word] = merged.get(word, Fraction(0)) + coeff
    out = tuple(sorted(((c, w) for w, c in merged.items() if c != 0),
                       key=lambda cw: cw[1]))
    for coeff, word in out:
        if 2 * len(word) < p:
            raise RuntimeError(
                f"reduction produced a negative power of X at p={p}, word={word}")
    return out


# ---------------------------------------------------------------------------
# correction series and assemblies
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CorrectionTerm:
    """One reduced basis term of the order-p polynomial factor."""

    nu: int                 # length of the basis word
    p: int
    coefficient: float      # exact reduction weight times (-a)^nu and c^{-p}
    integral_value: float   # scaled basis integral I^s_word(0)
    power_of_X: int         # 2 nu - p, always >= 0

    def __post_init__(self):
        if self.power_of_X < 0:
            raise ValueError("power_of_X must be >= 0")


@dataclass(frozen=True)
class PropagatorResult:
    """Factored propagator value with diagnostics."""

    harmonic_prefactor: float
    harmonic_exponent: float
    universal_exponent: float
    polynomial_factor: float
    value: float
    truncation: TruncationPolicy
    diagnostics: dict = field(compare=False)


def _exp_tail(y: float, kept: int) -> float:
    """First omitted term of the exponential series truncated after `kept` orders."""
    if kept < 0:
        return 1.0
    return y ** (kept + 1) / math.factorial(kept + 1)


def correction_terms(params: ModelParams, policy: TruncationPolicy, p: int) -> list[CorrectionTerm]:
    """Reduced terms of order p evaluated on the given model."""
    if p == 0:
        return []
    eng = _engine(params.gamma_sq, params.beta, policy.quad_rel_tol)
    out = []
    cp = params.c ** (-p)
    for coeff, word in _order_terms(p):
        r = len(word)
        out.append(CorrectionTerm(
            nu=r, p=p,
            coefficient=float(coeff) * (-params.a) ** r * cp,
            integral_value=eng.value(word, 0.0),
            power_of_X=2 * r - p))
    return out


def correction_polynomial(params: ModelParams,
                          policy: TruncationPolicy = DEFAULT_POLICY
                          ) -> tuple[float, list[float]]:
    """Polynomial factor sum_p c^{-p} P_p(-a) and per-p truncation diagnostics.

    The zero towers are resummed in closed exponential form, so each P_p is an
    honest polynomial of degree 2p in (-a); the diagnostics report, per p, the
    first term the order-J asymptotic truncation would have dropped.
    """
    if policy.p_max > 2 * policy.poincare_order:
        raise ValueError(
            f"p_max={policy.p_max} exceeds 2*poincare_order={2*policy.poincare_order}")
    _check_frequency(params)
    g2 = params.gamma_sq
    s_beta = sinh_ratio(g2, params.beta)
    xs = params.x_f ** 2 / (4.0 * s_beta * s_beta)
    eng = _engine(g2, params.beta, policy.quad_rel_tol)
    i0 = eng.value((0,), 0.0)
    y = abs(params.a) * xs * xs * i0
    J = policy.poincare_order

    poly = 1.0
    tails = [_exp_tail(y, J)]
    for p in range(1, policy.p_max + 1):
        acc = 0.0
        tail = 0.0
        for coeff, word in _order_terms(p):
            r = len(word)
            term = float(coeff) * (-params.a) ** r * xs ** (2 * r - p) * eng.value(word, 0.0)
            acc += term
            tail += abs(term) * _exp_tail(y, J - r)
        poly += params.c ** (-p) * acc
        tails.append(params.c ** (-p) * tail)
    return poly, tails


def correction_series(params: ModelParams,
                      policy: TruncationPolicy = DEFAULT_POLICY) -> float:
    """Full anharmonic correction factor exp(universal) * polynomial."""
    poly, _ = correction_polynomial(params, policy)
    return math.exp(universal_exponent(params)) * poly


def _scaled_basis(params: ModelParams, policy: TruncationPolicy):
    g2 = _check_frequency(params)
    s_beta = sinh_ratio(g2, params.beta)
    xs = params.x_f ** 2 / (4.0 * s_beta * s_beta)
    eng = _engine(g2, params.beta, policy.quad_rel_tol)
    return xs, eng


def assembly_p0(params: ModelParams, policy: TruncationPolicy = DEFAULT_POLICY) -> float:
    """exp(-a I_0(0) x_f^4 / Q^4(beta))."""
    return math.exp(universal_exponent(params))


def assembly_p1(params: ModelParams, policy: TruncationPolicy = DEFAULT_POLICY) -> float:
    """exp(...) * c^{-1} { -3 a X I_1(0) + 8 a^2 X^3 I_{1,0}(0) }."""
    xs, eng = _scaled_basis(params, policy)
    a = params.a
    brace = (-3.0 * a * xs * eng.value((1,), 0.0)
             + 8.0 * a * a * xs ** 3 * eng.value((1, 0), 0.0))
    return assembly_p0(params, policy) * brace / params.c


def assembly_p2(params: ModelParams, policy: TruncationPolicy = DEFAULT_POLICY) -> float:
    """exp(...) * c^{-2} { 3/4 (-a) I_2 + (-a)^2 (30 I_20 + 21 I_11) X^2
    + (-a)^3 (48 I_200 + 144 I_110 + 24 I_101) X^4 + 64 (-a)^4 (I_1010 + 2 I_1100) X^6 }."""
    xs, eng = _scaled_basis(params, policy)
    ma = -params.a
    brace = (0.75 * ma * eng.value((2,), 0.0)
             + ma * ma * (30.0 * eng.value((2, 0), 0.0)
                          + 21.0 * eng.value((1, 1), 0.0)) * xs ** 2
             + ma ** 3 * (48.0 * eng.value((2, 0, 0), 0.0)
                          + 144.0 * eng.value((1, 1, 0), 0.0)
                          + 24.0 * eng.value((1, 0, 1), 0.0)) * xs ** 4
             + 64.0 * ma ** 4 * (eng.value((1, 0, 1, 0), 0.0)
                                 + 2.0 * eng.value((1, 1, 0, 0), 0.0)) * xs ** 6)
    return assembly_p0(params, policy) * brace / params.c ** 2


# displayed p = 2 coefficient set (the 64 enters as 64 * (I_1010 + 2 I_1100))
_P2_REFERENCE = {
    (2,): Fraction(3, 4),
    (2, 0): Fraction(30),
    (1, 1): Fraction(21),
    (2, 0, 0): Fraction(48),
    (1, 1, 0): Fraction(144),
    (1, 0, 1): Fraction(24),
    (1, 0, 1, 0): Fraction(64),
    (1, 1, 0, 0): Fraction(128),
}


def p2_coefficient_report() -> dict:
    """Compare the generic reduction at p = 2 with the displayed coefficient set."""
    generic = {word: coeff for coeff, word in _order_terms(2)}
    match = generic == _P2_REFERENCE
    report = {"match": match}
    if not match:
        report["generic"] = {"".join(map(str, w)): str(c) for w, c in sorted(generic.items())}
        report["reference"] = {"".join(map(str, w)): str(c) for w, c in sorted(_P2_REFERENCE.items())}
    return report


def full_propagator(params: ModelParams,
                    policy: TruncationPolicy = DEFAULT_POLICY) -> PropagatorResult:
    """Assemble harmonic kernel x universal exponential x polynomial factor."""
    prefactor, h_exp = harmonic_fixed_origin(params)
    u_exp = universal_exponent(params)
    poly, tails = correction_polynomial(params, policy)
    value = prefactor * math.exp(h_exp + u_exp) * poly
    diagnostics = {"tail_estimates": tails, "status": "ok"}
    if policy.p_max >= 2:
        diagnostics["p2_coefficients"] = p2_coefficient_report()
    return PropagatorResult(
        harmonic_prefactor=prefactor,
        harmonic_exponent=h_exp,
        universal_exponent=u_exp,
        polynomial_factor=poly,
        value=value,
        truncation=policy,
        diagnostics=diagnostics)
