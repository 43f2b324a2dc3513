"""Closed-form equilibrium measure for the external field x + s(x^2 - x) with
hard edge at the origin: support endpoint c, density
psi(x) = -(1/pi)(a x + b) sqrt((c - x)/x) on (0, c), its low moments via Euler
Beta integrals, and the resolvent (Cauchy transform).
"""

from __future__ import annotations

from dataclasses import dataclass

from mpmath import mp, mpf

from .specfun import PrecisionContext

_DEFAULT_CTX = PrecisionContext(target_digits=50)


@dataclass(frozen=True)
class EquilibriumData:
    """s together with the density data (c, a, b).  a = -s <= 0 and b < 0, so
    -(a x + b) > 0 on the support; the zero -b/a of the linear factor stays
    strictly left of 0 for every s in (0, 1]."""

    s: object
    c: object
    a: object
    b: object
    digits: int


def equilibrium_data(s, ctx: PrecisionContext = _DEFAULT_CTX) -> EquilibriumData:
    """c = (s - 1 + sqrt(s^2 + 22 s + 1))/(3 s) with the analytic limit c = 4
    at s = 0 (where a = 0, b = -1/2)."""
    with mp.workdps(ctx.digits):
        s_ = mpf(s)
        if not 0 <= s_ <= 1:
            raise ValueError("s must lie in [0, 1]")
        if s_ == 0:
            return EquilibriumData(s=s, c=mpf(4), a=mpf(0), b=mpf(-1) / 2,
                                   digits=ctx.digits)
        root = mp.sqrt(s_ * s_ + 22 * s_ + 1)
        c = (s_ - 1 + root) / (3 * s_)
        a = -s_
        b = (2 * s_ - 2 - root) / 6
        return EquilibriumData(s=s, c=c, a=a, b=b, digits=ctx.digits)


def density_eval(x, eq: EquilibriumData):
    """psi(x) on (0, c); zero off the support.  x = 0 is refused: the density
    has an inverse-square-root hard edge there."""
    with mp.workdps(eq.digits):
        x_ = mpf(x)
        if x_ == 0:
            raise ValueError("density diverges at the hard edge x = 0")
        if x_ < 0 or x_ >= eq.c:
            return mpf(0)
        return -(eq.a * x_ + eq.b) * mp.sqrt((eq.c - x_) / x_) / mp.pi


def equilibrium_moment(k: int, eq: EquilibriumData):
    """mu_k for k in {0, 1, 2} via Beta integrals:
    mu_k = -(1/pi)(a c^{k+2} B(k+3/2, 3/2) + b c^{k+1} B(k+1/2, 3/2)).
    mu_0 is identically 1 (normalization)."""
    if k not in (0, 1, 2):
        raise ValueError("closed-form moments are available for k in {0, 1, 2}")
    with mp.workdps(eq.digits):
        c = mpf(eq.c)
        term_a = eq.a * c ** (k + 2) * mp.beta(k + mpf(3) / 2, mpf(3) / 2)
        term_b = eq.b * c ** (k + 1) * mp.beta(k + mpf(1) / 2, mpf(3) / 2)
        return -(term_a + term_b) / mp.pi


def resolvent_eval(z, eq: EquilibriumData):
    """omega(z) = V'(z)/2 + (a z + b) sqrt((z - c)/z) with the branch cut on
    [0, c] and sqrt((z-c)/z) -> 1 as z -> infinity.

    The square root is exp((log(z-c) - log z)/2) with principal logs: the
    imaginary parts of the two logs only differ on the segment between the
    branch points, which places the composite cut exactly on [0, c] and makes
    the half-difference tend to 0 (hence the root to +1) at infinity."""
    with mp.workdps(eq.digits):
        z_ = mp.mpc(z)
        if z_.imag == 0 and 0 <= z_.real <= eq.c:
            raise ValueError("z lies on the branch cut [0, c]")
        s_ = mpf(eq.s)
        root = mp.exp((mp.log(z_ - eq.c) - mp.log(z_)) / 2)
        v_prime = 1 + s_ * (2 * z_ - 1)
        return v_prime / 2 + (eq.a * z_ + eq.b) * root
