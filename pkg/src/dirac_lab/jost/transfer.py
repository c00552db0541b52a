"""Cell propagators and the transfer-matrix evaluation of a(lambda), b(lambda).

The Dirac system -iJ f' + V f = lambda f is rewritten as f' = i M f with

    M = [[lambda, -q], [conj(q), -lambda]],   M @ M = (lambda**2 - |q|**2) I,

so on a cell of constant q the propagator is exp(i M h) = c I + i s M with
c = cos(w h), s = sin(w h) / w and w**2 = lambda**2 - |q|**2. Both c and s are
even in w, so the branch of the square root never matters.

With U the ordered product of cell propagators (f(gamma) = U f(0)), the Jost
solutions give a = U22 exp(i lambda gamma) and b = U12 exp(-i lambda gamma).

All routines here are vectorized over lambda. Large magnitudes are carried in
a per-point log scale so deep lower half-plane evaluation does not overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from dirac_lab.errors import EvaluationRangeError
from dirac_lab.potential import Potential

# Rescale the running product once an entry exceeds e**50.
_RESCALE_LOG = 50.0
# Values whose magnitude lies within e**(+-_FOLD_LOG) are reported unscaled.
_FOLD_LOG = 600.0
# Below this |w h|**2 the entire power series for c and s is used.
_SERIES_Z = 1.0
_SERIES_TERMS = 14

# Taylor coefficients in z = (w h)**2:
#   cos(w h)          = sum (-z)**k / (2k)!
#   sin(w h) / (w h)  = sum (-z)**k / (2k+1)!
#   (h c - s) / (w**2 h**3) = sum_{k>=1} (-1)**k 2k z**(k-1) / (2k+1)!
_C_COEF = np.array([(-1) ** k / math.factorial(2 * k) for k in range(_SERIES_TERMS)])
_S_COEF = np.array([(-1) ** k / math.factorial(2 * k + 1) for k in range(_SERIES_TERMS)])
_D_COEF = np.array([(-1) ** k * 2 * k / math.factorial(2 * k + 1) for k in range(1, _SERIES_TERMS + 1)])


def _horner(coef: np.ndarray, z: np.ndarray) -> np.ndarray:
    out = np.zeros_like(z)
    for c in coef[::-1]:
        out = out * z + c
    return out


def _cell_block(lam: np.ndarray, q: complex, h: float, derivative: bool = False):
    """Diagonal entries c +- i s lam, and s, for one cell (elementwise in lam).

    Away from w = 0 the diagonal is written as exp(+-i w h) +- i sin(w h) |q|**2 / (w (lam + w)),
    with the root w chosen on the side of lam; this avoids the cancellation
    between c and i s lam for the decaying mode when |q| << |lam|.
    With ``derivative`` also returns dc/dlam and ds/dlam.
    """
    q2 = abs(q) ** 2
    w2 = lam * lam - q2
    z = w2 * (h * h)
    small = np.abs(z) < _SERIES_Z
    p11 = np.empty_like(lam)
    p22 = np.empty_like(lam)
    c = np.empty_like(lam)
    s = np.empty_like(lam)
    d = np.empty_like(lam) if derivative else None
    if small.any():
        zs, ls = z[small], lam[small]
        cs = _horner(_C_COEF, zs)
        ss = h * _horner(_S_COEF, zs)
        c[small], s[small] = cs, ss
        p11[small] = cs + 1j * ss * ls
        p22[small] = cs - 1j * ss * ls
        if derivative:
            d[small] = h**3 * _horner(_D_COEF, zs)
    big = ~small
    if big.any():
        lb = lam[big]
        w = np.sqrt(w2[big])
        w = np.where((w * lb.conjugate()).real < 0, -w, w)
        sin_wh = np.sin(w * h)
        cb = np.cos(w * h)
        sb = sin_wh / w
        c[big], s[big] = cb, sb
        corr = 1j * sin_wh * q2 / (w * (lb + w))
        p11[big] = np.exp(1j * w * h) + corr
        p22[big] = np.exp(-1j * w * h) - corr
        if derivative:
            d[big] = (h * cb - sb) / w2[big]
    if not derivative:
        return p11, p22, s
    dc = -h * lam * s
    ds = lam * d
    return p11, p22, s, dc, ds


def cell_propagator(q: complex, h: float, lam: complex) -> np.ndarray:
    """exp(i M h) for one cell as a 2x2 complex array; det = 1."""
    if not h > 0:
        raise ValueError("cell width must be positive")
    lam_arr = np.atleast_1d(np.asarray(lam, dtype=complex))
    q = complex(q)
    p11, p22, s = (v[0] for v in _cell_block(lam_arr, q, float(h)))
    return np.array([[p11, -1j * s * q], [1j * s * q.conjugate(), p22]])


@dataclass
class TransferResult:
    """Scaled Jost data on an array of lambda values.

    True values are ``a * exp(log_scale)`` etc., with one scale per point.
    """

    lam: np.ndarray
    a: np.ndarray
    b: np.ndarray
    a_prime: np.ndarray | None
    log_scale: np.ndarray

    def log_abs_a(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self.a)) + self.log_scale

    def true_a(self) -> np.ndarray:
        return self.a * np.exp(self.log_scale)


def transfer(p: Potential, lam, derivative: bool = False) -> TransferResult:
    """Propagate through every cell; vectorized over ``lam``."""
    lam = np.atleast_1d(np.asarray(lam, dtype=complex)).ravel()
    one = np.ones_like(lam)
    zero = np.zeros_like(lam)
    t11, t12, t21, t22 = one.copy(), zero.copy(), zero.copy(), one.copy()
    if derivative:
        d11, d12, d21, d22 = zero.copy(), zero.copy(), zero.copy(), zero.copy()
    log_scale = np.zeros(lam.shape, dtype=float)
    for cell in p.cells:
        q, h = cell.q, cell.h
        qc = q.conjugate()
        if derivative:
            p11, p22, s, dc, ds = _cell_block(lam, q, h, derivative=True)
        else:
            p11, p22, s = _cell_block(lam, q, h)
        p12 = -1j * s * q
        p21 = 1j * s * qc
        if derivative:
            e11 = dc + 1j * ds * lam + 1j * s
            e12 = -1j * ds * q
            e21 = 1j * ds * qc
            e22 = dc - 1j * ds * lam - 1j * s
            # product rule: d(P T) = dP T + P dT
            d11, d12, d21, d22 = (
                e11 * t11 + e12 * t21 + p11 * d11 + p12 * d21,
                e11 * t12 + e12 * t22 + p11 * d12 + p12 * d22,
                e21 * t11 + e22 * t21 + p21 * d11 + p22 * d21,
                e21 * t12 + e22 * t22 + p21 * d12 + p22 * d22,
            )
        t11, t12, t21, t22 = (
            p11 * t11 + p12 * t21,
            p11 * t12 + p12 * t22,
            p21 * t11 + p22 * t21,
            p21 * t12 + p22 * t22,
        )
        big = np.maximum(np.maximum(np.abs(t11), np.abs(t12)), np.maximum(np.abs(t21), np.abs(t22)))
        if derivative:
            big = np.maximum(big, np.maximum(np.maximum(np.abs(d11), np.abs(d12)), np.maximum(np.abs(d21), np.abs(d22))))
        if not np.all(np.isfinite(big)):
            depth = 700.0 / max(c.h for c in p.cells)
            raise EvaluationRangeError(
                "transfer matrix overflowed inside a single cell; reduce |Im lambda|",
                achievable_depth=depth,
            )
        rescale = big > math.exp(_RESCALE_LOG)
        if rescale.any():
            f = np.where(rescale, big, 1.0)
            t11, t12, t21, t22 = t11 / f, t12 / f, t21 / f, t22 / f
            if derivative:
                d11, d12, d21, d22 = d11 / f, d12 / f, d21 / f, d22 / f
            log_scale = log_scale + np.log(f)

    gamma = p.gamma
    eps = lam.imag
    # exp(+-i lam gamma) split into a unimodular part and a real exponent,
    # the common exponent gamma*|eps| is moved into log_scale.
    phase = np.exp(1j * lam.real * gamma)
    fa = phase * np.exp(-eps * gamma - gamma * np.abs(eps))
    fb = np.exp(eps * gamma - gamma * np.abs(eps)) / phase
    log_scale = log_scale + gamma * np.abs(eps)
    a = t22 * fa
    b = t12 * fb
    a_prime = (d22 + 1j * gamma * t22) * fa if derivative else None

    # fold the scale back where the true values are representable
    mag = np.maximum(np.abs(a), np.abs(b))
    if derivative:
        mag = np.maximum(mag, np.abs(a_prime))
    with np.errstate(divide="ignore"):
        total = np.log(mag) + log_scale
    fold = (log_scale != 0) & (total < _FOLD_LOG) & (log_scale < _FOLD_LOG)
    if fold.any():
        g = np.exp(np.where(fold, log_scale, 0.0))
        a, b = a * g, b * g
        if derivative:
            a_prime = a_prime * g
        log_scale = np.where(fold, 0.0, log_scale)
    return TransferResult(lam, a, b, a_prime, log_scale)


def transfer_matrix(p: Potential, lam: complex) -> np.ndarray:
    """Unscaled ordered product U with f(gamma) = U f(0) (single point, no overflow guard)."""
    u = np.eye(2, dtype=complex)
    for cell in p.cells:
        u = cell_propagator(cell.q, cell.h, lam) @ u
    return u
