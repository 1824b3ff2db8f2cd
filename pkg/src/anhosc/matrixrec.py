"""Matrix form of the bracket-symbol recurrence (independent cross-check).

The recurrence for (L)^{2mu}_{2mu-p} is recast as products of structured
matrices built from the lattice sequences Q_n:

    A^d(L-1)_{p,i}   = a^{2d-i}_{2d-p} / (sigma Q_{L-1} Q_L)^{p-i}      (lower triangular)
    M^d(L-1)_{l,q}   = C(q, l) Q_{L-1}^{4q-4l} [q <= d]                 (upper triangular)
    C^mu(L)          = sum_{d=0}^{mu} A^d(L-1) C^d(L-1) M^d(L-1) P^d
    C^{d}(1)_{l,z}   = (sigma Q_1 Q_0)^{2z-l} a^{2z}_{2z-l}

and ties back through  {C^mu(L)}_{p,mu} = (sigma Q_L Q_{L-1})^{2mu-p} (L)^{2mu}_{2mu-p}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .continuum import bigQ_sigma
from .errors import SingularLatticeError
from .lattice import LatticeState
from .specfun import coeff_a_exact

__all__ = [
    "BandedTriangular",
    "build_A",
    "build_M",
    "build_P",
    "c_base",
    "c_matrix",
    "two_matrix_product_identity",
    "crosscheck_value",
]


@dataclass(frozen=True)
class BandedTriangular:
    """Dense store of a structured matrix with its active principal minor."""

    rows: int
    cols: int
    minor_dim: tuple[int, int]
    entries: np.ndarray

    def __post_init__(self):
        if self.entries.shape != (self.rows, self.cols):
            raise ValueError("entry array shape does not match declared dimensions")


def _a_float(i: int, j: int) -> float:
    return float(coeff_a_exact(i, j))


def _q_seq(state: LatticeState, nmax: int) -> list[float]:
    qs = [bigQ_sigma(state.sigma, n) for n in range(nmax + 1)]
    if any(q == 0.0 for q in qs):
        raise SingularLatticeError("a Q_n value vanished; degenerate lattice")
    return qs


def build_A(d: int, Lambda_step: int, mu: int, state: LatticeState) -> BandedTriangular:
    """A^d(Lambda_step): (2mu+1)^2 lower triangular, minor (2d+1)^2."""
    qs = _q_seq(state, Lambda_step + 1)
    denom = state.sigma * qs[Lambda_step] * qs[Lambda_step + 1]
    if denom == 0.0:
        raise SingularLatticeError("sigma Q_{L-1} Q_L vanished")
    n = 2 * mu + 1
    ent = np.zeros((n, n))
    for p in range(n):
        for i in range(p + 1):
            ent[p, i] = _a_float(2 * d - p, 2 * d - i) / denom ** (p - i)
    return BandedTriangular(n, n, (2 * d + 1, 2 * d + 1), ent)


def build_M(d: int, Lambda_step: int, mu: int, state: LatticeState) -> BandedTriangular:
    """M^d(Lambda_step): (mu+1)^2 upper triangular, minor (d+1)^2."""
    qs = _q_seq(state, Lambda_step)
    qv = qs[Lambda_step]
    n = mu + 1
    ent = np.zeros((n, n))
    for lam in range(n):
        for q in range(lam, min(d, n - 1) + 1):
            ent[lam, q] = math.comb(q, lam) * qv ** (4 * q - 4 * lam)
    return BandedTriangular(n, n, (d + 1, d + 1), ent)


def build_P(d: int, mu: int) -> BandedTriangular:
    """Projector onto the d-th column."""
    n = mu + 1
    ent = np.zeros((n, n))
    ent[d, d] = 1.0
    return BandedTriangular(n, n, (d + 1, d + 1), ent)


def c_base(mu: int, state: LatticeState) -> BandedTriangular:
    """C(1): {C}_{l,z} = (sigma Q_1 Q_0)^{2z-l} a^{2z}_{2z-l}."""
    qs = _q_seq(state, 1)
    base = state.sigma * qs[1] * qs[0]
    rows, cols = 2 * mu + 1, mu + 1
    ent = np.zeros((rows, cols))
    for lam in range(rows):
        for z in range(cols):
            co = coeff_a_exact(2 * z - lam, 2 * z)
            if co:
                ent[lam, z] = base ** (2 * z - lam) * float(co)
    return BandedTriangular(rows, cols, (2 * mu + 1, mu + 1), ent)


def _assert_c_pattern(ent: np.ndarray) -> None:
    rows, cols = ent.shape
    for i in range(rows):
        lead = (i + 1) // 2
        if lead > 0 and np.any(ent[i, :min(lead, cols)] != 0.0):
            raise AssertionError(f"C row {i} has nonzeros before column {lead}")


def c_matrix(Lambda: int, mu: int, state: LatticeState) -> BandedTriangular:
    """Iterate the recurrence up to C^mu(Lambda); asserts the zero pattern each step."""
    if Lambda < 1:
        raise ValueError("Lambda must be >= 1")
    if Lambda > state.N - 1:
        raise ValueError(f"Lambda={Lambda} exceeds lattice depth N-1={state.N-1}")
    base = c_base(mu, state).entries
    current = {d: base for d in range(mu + 1)}
    for step in range(1, Lambda):
        new = {}
        for m_top in range(mu + 1):
            acc = np.zeros((2 * mu + 1, mu + 1))
            for d in range(m_top + 1):
                a = build_A(d, step, mu, state).entries
                mmat = build_M(d, step, mu, state).entries
                pmat = build_P(d, mu).entries
                acc += a @ current[d] @ mmat @ pmat
            _assert_c_pattern(acc)
            new[m_top] = acc
        current = new
    ent = current[mu]
    _assert_c_pattern(ent)
    return BandedTriangular(2 * mu + 1, mu + 1, (2 * mu + 1, mu + 1), ent)


def crosscheck_value(Lambda: int, mu: int, p: int, state: LatticeState) -> float:
    """(L)^{2mu}_{2mu-p} recovered from the matrix route:
    {C^mu(L)}_{p,mu} / (sigma Q_L Q_{L-1})^{2mu-p}."""
    qs = _q_seq(state, Lambda)
    denom = (state.sigma * qs[Lambda] * qs[Lambda - 1]) ** (2 * mu - p)
    return c_matrix(Lambda, mu, state).entries[p, mu] / denom


def _falling(n: float, k: int) -> float:
    out = 1.0
    for i in range(k):
        out *= n - i
    return out


def two_matrix_product_identity(i2: int, i3: int, p: int, lambda_idx: int,
                                state: LatticeState) -> tuple[float, float]:
    """Both sides of the displayed two-factor product identity:

    lhs = {A^{i3}(2) A^{i2}(1)}_{p,lambda};
    rhs = 2^{2l-2p} (4 i2 - 2l)! / ((4 i3 - 2p)! (p-l)!) *
          d^{4i3-4i2}/dx^{...} [ x^{4i3-2p} (x^2/(s Q3 Q2) + 1/(s Q2 Q1))^{p-l} ] at x=1,

    the derivative evaluated by exact polynomial calculus.
    """
    mu = max(i2, i3, (p + 1) // 2, (lambda_idx + 1) // 2)
    lam = lambda_idx
    a3 = build_A(i3, 2, mu, state).entries
    a2 = build_A(i2, 1, mu, state).entries
    lhs = float((a3 @ a2)[p, lam])

    if 4 * i2 - 2 * lam < 0 or 4 * i3 - 2 * p < 0 or p - lam < 0:
        return lhs, 0.0
    qs = _q_seq(state, 3)
    A = 1.0 / (state.sigma * qs[3] * qs[2])
    B = 1.0 / (state.sigma * qs[2] * qs[1])
    D = 4 * i3 - 4 * i2
    if D < 0:
        return lhs, 0.0
    # (x^2 A + B)^{p-lam} * x^{4 i3 - 2p}: monomial powers 2j + 4 i3 - 2p
    acc = 0.0
    for j in range(p - lam + 1):
        power = 2 * j + 4 * i3 - 2 * p
        acc += math.comb(p - lam, j) * A ** j * B ** (p - lam - j) * _falling(power, D)
    rhs = (2.0 ** (2 * lam - 2 * p)
           * math.factorial(4 * i2 - 2 * lam) / math.factorial(4 * i3 - 2 * p)
           / math.factorial(p - lam) * acc)
    return lhs, rhs
