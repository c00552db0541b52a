"""The iteration series for a(lambda), used as an independent oracle.

With chi_0 = 1 and

    chi_n(x) = int_x^gamma q(t1) int_t1^gamma exp(2i lam (t2 - t1)) conj(q(t2)) chi_{n-1}(t2) dt2 dt1,

a(lambda) = 1 + sum_n chi_n(0). Every chi_n is entire in x on each cell, so
the nested indefinite integrals are done with Chebyshev spectral integration
on subcells short enough that exp(2i lam t) and q are resolved to rounding
level. This never touches the propagator code in ``transfer``.

The number of terms comes from the majorant

    |chi_n(0)| <= exp(gamma (|eps| - eps)) ||q||_1**(2n) / (2n)!,   eps = Im lam.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import chebyshev as C

from dirac_lab.errors import TruncationError
from dirac_lab.potential import Potential, l1_norm

MAX_TERMS = 64
NODES = 32
# Subcells satisfy max(|lam|, |q|) * width <= _RESOLVE.
_RESOLVE = 4.0


@dataclass(frozen=True)
class SeriesResult:
    a: complex
    terms_used: int
    remainder_bound: float


@lru_cache(maxsize=None)
def _integration_matrix(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Lobatto nodes s_k = cos(pi k/(n-1)) and R with (R f)_i = int_{s_i}^1 f."""
    s = np.cos(np.pi * np.arange(n) / (n - 1))
    coef = np.linalg.solve(C.chebvander(s, n - 1), np.eye(n))
    anti = C.chebint(coef, axis=0)
    vals = C.chebval(s, anti)  # shape (n, len(s)): column j of coef at node i -> vals[j, i]
    at_one = C.chebval(1.0, anti)
    r = at_one[:, None] - vals
    return s, r.T.copy()


def tail_majorant(norm: float, gamma: float, eps: float, n: int) -> float:
    """exp(gamma(|eps|-eps)) * sum_{k>n} norm**(2k)/(2k)!, biased upward."""
    if norm == 0.0:
        return 0.0
    log_norm = math.log(norm)
    total = 0.0
    k = n + 1
    while True:
        term = math.exp(2 * k * log_norm - math.lgamma(2 * k + 1))
        total += term
        # terms decrease once 2k > norm; stop when negligible
        if 2 * k > norm and term <= 1e-18 * total:
            break
        k += 1
    return total * math.exp(gamma * (abs(eps) - eps)) * (1.0 + 1e-12)


def terms_needed(norm: float, gamma: float, eps: float, tol: float) -> tuple[int, float]:
    """Smallest n with tail_majorant <= tol, capped at MAX_TERMS."""
    if norm == 0.0:
        return 0, 0.0
    for n in range(MAX_TERMS + 1):
        bound = tail_majorant(norm, gamma, eps, n)
        if bound <= tol:
            return n, bound
    return MAX_TERMS + 1, tail_majorant(norm, gamma, eps, MAX_TERMS)


def _subcells(p: Potential, lam: complex):
    lefts, widths, values = [], [], []
    x = 0.0
    scale = abs(lam)
    for cell in p.cells:
        rate = max(scale, abs(cell.q))
        m = max(1, math.ceil(rate * cell.h / _RESOLVE))
        w = cell.h / m
        for j in range(m):
            lefts.append(x + j * w)
            widths.append(w)
            values.append(cell.q)
        x += cell.h
    return np.array(lefts), np.array(widths), np.array(values, dtype=complex)


def series_terms(p: Potential, lam: complex, n_terms: int, nodes: int = NODES) -> np.ndarray:
    """Return [a_1, ..., a_n] for the potential (leading/trailing zero cells kept)."""
    if n_terms == 0 or not p.cells:
        return np.zeros(0, dtype=complex)
    lam = complex(lam)
    s, R = _integration_matrix(nodes)
    lefts, widths, values = _subcells(p, lam)
    half = 0.5 * widths[:, None]
    t = lefts[:, None] + (s[None, :] + 1.0) * half  # (M, nodes), right end first
    up = np.exp(2j * lam * t)
    down = np.exp(-2j * lam * t)
    q = values[:, None]
    qc = q.conj()

    def integrate_from_right(f: np.ndarray) -> np.ndarray:
        local = half * (f @ R.T)  # int_t^{right edge of subcell}
        totals = local[:, -1]
        carry = np.concatenate((np.cumsum(totals[::-1])[::-1][1:], [0.0]))
        return local + carry[:, None]

    chi = np.ones_like(t)
    out = np.empty(n_terms, dtype=complex)
    for n in range(n_terms):
        g = integrate_from_right(up * qc * chi)
        chi = integrate_from_right(q * down * g)
        out[n] = chi[0, -1]
    return out


def jost_a_series(p: Potential, lam: complex, tol: float = 1e-12) -> SeriesResult:
    if not tol > 0:
        raise ValueError("tol must be positive")
    lam = complex(lam)
    tight = p.trimmed()
    norm = l1_norm(tight)
    n, bound = terms_needed(norm, tight.gamma, lam.imag, tol)
    if n > MAX_TERMS:
        raise TruncationError(
            f"series tail bound {bound:.3e} still above tol={tol:g} after {MAX_TERMS} terms",
            achieved_bound=bound,
        )
    terms = series_terms(tight, lam, n)
    # smallest terms first
    a = 1.0 + complex(np.sum(terms[::-1]))
    return SeriesResult(a=a, terms_used=n, remainder_bound=bound)
