"""Scalar entry points on top of the vectorized transfer evaluation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from dirac_lab.errors import EvaluationRangeError
from dirac_lab.jost.transfer import transfer
from dirac_lab.potential import Potential


@dataclass(frozen=True)
class JostValue:
    """a, b, a' at one point; true values are ``x * exp(log_scale)``."""

    a: complex
    b: complex | None = None
    a_prime: complex | None = None
    log_scale: float = 0.0

    def true_a(self) -> complex:
        return self.a * math.exp(self.log_scale)

    def log_abs_a(self) -> float:
        return math.log(abs(self.a)) + self.log_scale if self.a != 0 else -math.inf


def jost_ab(p: Potential, lam: complex, with_b: bool | None = None, derivative: bool = False) -> JostValue:
    """Evaluate a(lambda) and, on the real axis (or when asked), b(lambda)."""
    lam = complex(lam)
    r = transfer(p, lam, derivative=derivative)
    if with_b is None:
        with_b = lam.imag == 0
    return JostValue(
        a=complex(r.a[0]),
        b=complex(r.b[0]) if with_b else None,
        a_prime=complex(r.a_prime[0]) if derivative else None,
        log_scale=float(r.log_scale[0]),
    )


def jost_a_prime(p: Potential, lam: complex) -> complex:
    """d a / d lambda, unscaled. Raises if the true value is not representable."""
    v = jost_ab(p, lam, with_b=False, derivative=True)
    if v.log_scale > 700:
        raise EvaluationRangeError(
            f"|a'| ~ exp({v.log_scale:.1f}) is not representable as a float; use the scaled JostValue",
            achievable_depth=abs(complex(lam).imag),
        )
    return v.a_prime * math.exp(v.log_scale)


def log_abs_a(p: Potential, lam) -> np.ndarray:
    return transfer(p, lam).log_abs_a()


def smatrix(p: Potential, lam: float) -> np.ndarray:
    """S = (1/a) [[1, -conj(b)], [b, 1]] for real lambda."""
    lam = complex(lam)
    if lam.imag != 0:
        raise ValueError("the S-matrix is defined for real lambda only")
    v = jost_ab(p, lam, with_b=True)
    a = v.a * math.exp(v.log_scale)
    b = v.b * math.exp(v.log_scale)
    return np.array([[1.0, -b.conjugate()], [b, 1.0]], dtype=complex) / a


def conj_symmetric_point(lam: complex) -> complex:
    """lambda -> -conj(lambda), the reflection under which real-q zero sets are symmetric."""
    return -complex(lam).conjugate()


__all__ = ["JostValue", "jost_ab", "jost_a_prime", "log_abs_a", "smatrix", "conj_symmetric_point"]
