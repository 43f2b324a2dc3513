"""Multiprecision special-function kernel: log-Gamma, Barnes G, Bernoulli
numbers, and the constants (Glaisher A, zeta'(-1), c1, c2, c3) used by the
asymptotic expansions.

Everything is carried in log scale; partition functions overflow any fixed
exponent range long before the matrix sizes of interest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from mpmath import mp, mpf, bernfrac

from .errors import PrecisionNotConverged


@dataclass(frozen=True)
class PrecisionContext:
    """Working precision and escalation policy.

    digits is the arithmetic precision, target_digits the accuracy requested in
    results; the gap (at least 20 guard digits) absorbs rounding.  On failure a
    caller walks ladder(): digits, then ceil(1.5*digits), at most
    max_escalations times.
    """

    target_digits: int
    digits: int = 0
    max_escalations: int = 3

    def __post_init__(self):
        if self.target_digits < 1:
            raise ValueError("target_digits must be positive")
        if self.digits == 0:
            object.__setattr__(self, "digits", self.target_digits + 20)
        if self.digits < self.target_digits + 20:
            raise ValueError("digits must be at least target_digits + 20")
        if self.max_escalations < 0:
            raise ValueError("max_escalations must be nonnegative")

    def ladder(self):
        d = self.digits
        yield d
        for _ in range(self.max_escalations):
            d = math.ceil(d * 3 / 2)
            yield d


@dataclass(frozen=True)
class ConstantSet:
    """The constants of the order-1 expansion, mutually consistent by
    construction: log_glaisher = 1/12 - zeta_prime_neg1, c1 = log(3)/2,
    c2 = -1/12 exactly, c3 = log(3)/8 - log(2)/6 + zeta_prime_neg1."""

    log_glaisher: object
    zeta_prime_neg1: object
    c1: object
    c2: Fraction
    c3: object


def log_gamma(x, ctx: PrecisionContext):
    """log Gamma(x) for x > 0."""
    with mp.workdps(ctx.digits):
        x_ = mpf(x)
        if x_ <= 0:
            raise ValueError("log_gamma requires x > 0")
        return mp.loggamma(x_)


@lru_cache(maxsize=None)
def bernoulli(index: int) -> Fraction:
    """Exact Bernoulli number B_index for even index >= 2."""
    if index < 2 or index % 2:
        raise ValueError("bernoulli requires an even index >= 2")
    p, q = bernfrac(index)
    return Fraction(int(p), int(q))


def _log_barnes_series(z, dps: int):
    """log G(z+1) + log A via the large-z asymptotic series, truncated at its
    smallest term.  Raises if the smallest term cannot reach the accuracy that
    dps working digits imply (z too small for this precision)."""
    with mp.workdps(dps):
        zz = mpf(z)
        base = zz * zz / 4 + zz * mp.loggamma(zz + 1) - (zz * (zz + 1) / 2 + mpf(1) / 12) * mp.log(zz)
        goal = mpf(10) ** (-(dps + 5))
        z2 = zz * zz
        zp = z2
        total = mpf(0)
        prev = None
        k = 1
        while True:
            p, q = bernfrac(2 * k + 2)
            term = mpf(p) / (q * (2 * k) * (2 * k + 1) * (2 * k + 2)) / zp
            if prev is not None and abs(term) >= abs(prev):
                raise PrecisionNotConverged(
                    f"Barnes series diverging at z={z} before reaching {dps} digits")
            total += term
            if abs(term) < goal:
                return base + total
            prev = term
            zp *= z2
            k += 1


@lru_cache(maxsize=64)
def _log_glaisher_cached(dps: int):
    # Extract log A from the constant term of the Barnes series at an integer
    # point n, where log G(n+1) = sum_{j<n} log Gamma(j+1) is known exactly.
    n = max(30, int(0.4 * dps) + 12)
    with mp.workdps(dps + 10):
        exact = mp.fsum(mp.loggamma(j + 1) for j in range(1, n))
        return _log_barnes_series(n, dps + 10) - exact


def log_glaisher(ctx: PrecisionContext):
    """log of the Glaisher-Kinkelin constant A."""
    with mp.workdps(ctx.digits):
        return +_log_glaisher_cached(ctx.digits)


@lru_cache(maxsize=4096)
def _log_barnes_g_cached(x_repr: str, dps: int):
    with mp.workdps(dps + 10):
        x_ = mpf(x_repr)
        z0 = max(30, dps // 2)
        shift = mpf(0)
        z = x_
        while z < z0:
            shift += mp.loggamma(z)  # G(z+1) = Gamma(z) G(z)
            z += 1
        val = _log_barnes_series(z - 1, dps + 10) - _log_glaisher_cached(dps + 10)
        return val - shift


def log_barnes_g(x, ctx: PrecisionContext):
    """log G(x) for x > 0: recurse up to z0 ~ max(30, digits/2), evaluate the
    asymptotic series there, unwind."""
    with mp.workdps(ctx.digits):
        x_ = mpf(x)
        if x_ <= 0:
            raise ValueError("log_barnes_g requires x > 0")
        return +_log_barnes_g_cached(mp.nstr(x_, ctx.digits + 10), ctx.digits)


def constants(ctx: PrecisionContext) -> ConstantSet:
    with mp.workdps(ctx.digits):
        la = +_log_glaisher_cached(ctx.digits)
        zp = mpf(1) / 12 - la
        c1 = mp.log(3) / 2
        c3 = mp.log(3) / 8 - mp.log(2) / 6 + zp
        return ConstantSet(log_glaisher=la, zeta_prime_neg1=zp, c1=c1,
                           c2=Fraction(-1, 12), c3=c3)
