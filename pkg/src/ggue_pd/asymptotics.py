"""Closed-form asymptotic machinery: the large-N expansion coefficients of the
recurrence data (Delta, f0, f1, g0, g1), the s-derivative expansion
A(s) N^2 + B(s) N + C(s) with its closed s-integrals, exact and asymptotic
reference partition functions (half-line Laguerre-type and full-line
Gaussian-type), and the order-1 expansion of the log positivity probability.

All asymptotic evaluators also expose their {N^2, N log N, N, log N, 1, 1/N}
coefficients separately so the term-by-term assembly identity can be tested
exactly rather than through subtraction of large values.
"""

from __future__ import annotations

from dataclasses import dataclass

from mpmath import mp, mpf

from .errors import VerificationError
from .opchain import det_bareiss
from .specfun import PrecisionContext, log_barnes_g, log_glaisher
from .weight import moment_full_line


@dataclass(frozen=True)
class ExpansionEval:
    """Leading and first-order expansion coefficients of alpha_n, beta_n at
    ratio q = n/N: alpha ~ f0 + f1/N, beta ~ g0 + g1/N."""

    q: object
    lam: object
    s: object
    delta: object
    f0: object
    f1: object
    g0: object
    g1: object


@dataclass(frozen=True)
class IntegrandEval:
    s: object
    a: object
    b: object
    c: object


def expansion_coeffs(q, lam, s, ctx: PrecisionContext) -> ExpansionEval:
    """Delta = sqrt(s^2 + 24 q s - 2 s + 1) and the expansion coefficients in
    forms that stay finite at s = 0:

        f0 = 4q/(Delta + 1 - s)        (equals (s - 1 + Delta)/(6 s) for s > 0)
        g0 = f0^2/4
        f1 = (lam + 1)/Delta
        g1 = 2 q lam/(Delta (Delta + 1 - s))

    g0 is the root of the leading-order system selected by continuity with the
    s = 0 data (f0, g0, f1, g1) -> (2q, q^2, lam+1, q lam)."""
    with mp.workdps(ctx.digits):
        q_, lam_, s_ = mpf(q), mpf(lam), mpf(s)
        if not 0 <= s_ <= 1:
            raise ValueError("s must lie in [0, 1]")
        if q_ <= 0:
            raise ValueError("q must be positive")
        delta = mp.sqrt(s_ * s_ + 24 * q_ * s_ - 2 * s_ + 1)
        f0 = 4 * q_ / (delta + 1 - s_)
        g0 = f0 * f0 / 4
        f1 = (lam_ + 1) / delta
        g1 = 2 * q_ * lam_ / (delta * (delta + 1 - s_))
        return ExpansionEval(q=q_, lam=lam_, s=s_, delta=delta,
                             f0=f0, f1=f1, g0=g0, g1=g1)


def leading_string_residuals(ev: ExpansionEval, ctx: PrecisionContext):
    """Residuals of the leading-order (N -> infinity) limits of the two string
    identities; both vanish for the (f0, g0) pair shipped here."""
    with mp.workdps(ctx.digits):
        q_, s_, f0, g0 = mpf(ev.q), mpf(ev.s), mpf(ev.f0), mpf(ev.g0)
        r1 = 2 * s_ * (2 * g0 + f0 * f0) + (1 - s_) * f0 - 2 * q_
        r2 = g0 * (2 * s_ * f0 + 1 - s_) ** 2 - (2 * s_ * g0 - q_) ** 2
        return r1, r2


def g0_rejected_form(q, s, ctx: PrecisionContext):
    """A rejected closed-form candidate for g0, (Delta + s - 1) Delta/(72 s^2).

    Shipped only as a regression target: the test suite demonstrates that it
    violates the leading-order string identities (at q = 1, s = 1 the system's
    roots are {1/2, 1/6}; this expression gives 1/3) and that it diverges as
    s -> 0 instead of reaching q^2."""
    with mp.workdps(ctx.digits):
        q_, s_ = mpf(q), mpf(s)
        if s_ <= 0:
            raise ValueError("the rejected form is undefined at s = 0")
        delta = mp.sqrt(s_ * s_ + 24 * q_ * s_ - 2 * s_ + 1)
        return (delta + s_ - 1) * delta / (72 * s_ * s_)


def _abc_boost(s, digits: int) -> int:
    # A, B, C lose ~3 log10(1/s) digits to cancellation as s -> 0 and
    # ~log10(1/|s^2-10s+1|) near the removable point of C; estimate both in
    # low precision and add guard digits accordingly.
    with mp.workdps(40):
        s_ = mpf(s)
        t1 = abs(s_)
        t2 = abs(s_ * s_ - 10 * s_ + 1)
        b1 = -3 * mp.log10(t1) if t1 > 0 else mpf(digits)
        b2 = -mp.log10(t2) if t2 > 0 else mpf(digits)
        return 15 + int(min(mpf(3 * digits), max(0, b1) + max(0, b2)))


def dlogz_coefficients(s, lam, ctx: PrecisionContext) -> IntegrandEval:
    """The N^2, N and 1 coefficients A(s), B(s), C(s) of the large-N expansion
    of the s-derivative of log Z_N(s), at q = 1.  The removable singularity of
    C at s0 = 5 - 2 sqrt(6) is handled by precision boosting rather than a
    series switch; the boost also covers the s -> 0 cancellation."""
    digits = ctx.digits
    boost = _abc_boost(s, digits)
    with mp.workdps(digits + boost):
        s_, lam_ = mpf(s), mpf(lam)
        if not 0 < s_ <= 1:
            raise ValueError("s must lie in (0, 1]")
        d = mp.sqrt(s_ * s_ + 22 * s_ + 1)
        a = (d ** 3 * (s_ + 1) + s_ ** 4 + 34 * s_ ** 3 - 216 * s_ ** 2
             - 34 * s_ - 1) / (432 * s_ ** 3)
        b = lam_ * (s_ * s_ - 12 * s_ - 1 + (s_ + 1) * d) / (24 * s_ * s_)
        c = (lam_ ** 2 * (s_ + 1) * (s_ * s_ + 6 * s_ + 1 + (s_ - 1) * d)
             / (4 * s_ * (s_ * s_ - 10 * s_ + 1) * d)
             - ((s_ + 1) ** 3 * d + (s_ * s_ - 1) * (s_ * s_ + 14 * s_ + 1))
             / (12 * s_ * (s_ * s_ - 10 * s_ + 1) * d * d))
    with mp.workdps(digits):
        return IntegrandEval(s=s, a=+a, b=+b, c=+c)


def dlogz_integrals(lam, ctx: PrecisionContext, verify: bool = True):
    """The s-integrals of (A, B, C) over [0, 1]:

        (3/4 - log(6)/2,  (1/2 - log(6)/2) lam,
         lam^2 log(2/3)/2 + log(3)/8 - log(2)/6)

    With verify=True the closed forms are checked against Gauss-Legendre
    quadrature of dlogz_coefficients to target_digits/2."""
    with mp.workdps(ctx.digits):
        lam_ = mpf(lam)
        log2, log3 = mp.log(2), mp.log(3)
        log6 = log2 + log3
        ia = mpf(3) / 4 - log6 / 2
        ib = (mpf(1) / 2 - log6 / 2) * lam_
        ic = lam_ ** 2 * (log2 - log3) / 2 + log3 / 8 - log2 / 6
        if verify:
            half = ctx.target_digits // 2
            cache = {}

            def point(s_val):
                key = mp.nstr(s_val, ctx.digits)
                if key not in cache:
                    cache[key] = dlogz_coefficients(s_val, lam_, ctx)
                return cache[key]

            qa = mp.quad(lambda s_val: point(s_val).a, [0, 1], maxdegree=8)
            qb = mp.quad(lambda s_val: point(s_val).b, [0, 1], maxdegree=8)
            qc = mp.quad(lambda s_val: point(s_val).c, [0, 1], maxdegree=8)
            tol = mpf(10) ** (-half)
            dev = max(abs(qa - ia), abs(qb - ib), abs(qc - ic))
            if dev > tol:
                raise VerificationError(
                    f"closed-form s-integrals disagree with quadrature by {mp.nstr(dev, 3)}")
        return ia, ib, ic


# --- half-line Laguerre-type reference ensemble ---

def log_z_lue_exact(N: int, lam, ctx: PrecisionContext):
    """-N(N+lam) log N + sum_{j=1..N} [log Gamma(j+1) + log Gamma(j+lam)]."""
    with mp.workdps(ctx.digits):
        lam_ = mpf(lam)
        if lam_ <= -1:
            raise ValueError("lam must exceed -1")
        return (-N * (N + lam_) * mp.log(N)
                + mp.fsum(mp.loggamma(j + 1) + mp.loggamma(j + lam_)
                          for j in range(1, N + 1)))


def log_z_lue_barnes(N: int, lam, ctx: PrecisionContext):
    """Same value through Barnes G: -N(N+lam) log N + log G(N+2)
    + log G(N+lam+1) - log G(lam+1)."""
    with mp.workdps(ctx.digits):
        lam_ = mpf(lam)
        return (-N * (N + lam_) * mp.log(N) + log_barnes_g(N + 2, ctx)
                + log_barnes_g(N + 1 + lam_, ctx) - log_barnes_g(lam_ + 1, ctx))


def log_z_lue_asymptotic_coefficients(lam, ctx: PrecisionContext) -> dict:
    with mp.workdps(ctx.digits):
        lam_ = mpf(lam)
        log_a = log_glaisher(ctx)
        return {
            "n2": -mpf(3) / 2,
            "nlogn": mpf(1),
            "n": mp.log(2 * mp.pi) - 1 - lam_,
            "logn": (3 * lam_ ** 2 + 2) / 6,
            "const": (1 + 3 * (lam_ + 1) * mp.log(2 * mp.pi)) / 6 - 2 * log_a
                     - log_barnes_g(lam_ + 1, ctx),
            "invn": (2 * lam_ ** 3 - lam_ + 1) / 12,
        }


def _assemble(coeffs: dict, N: int, digits: int):
    with mp.workdps(digits):
        n_ = mpf(N)
        logn = mp.log(n_)
        return (coeffs["n2"] * n_ ** 2 + coeffs.get("nlogn", mpf(0)) * n_ * logn
                + coeffs["n"] * n_ + coeffs["logn"] * logn + coeffs["const"]
                + coeffs.get("invn", mpf(0)) / n_)


def log_z_lue_asymptotic(N: int, lam, ctx: PrecisionContext):
    """All expansion terms through 1/N; the remainder is O(N^-2)."""
    return _assemble(log_z_lue_asymptotic_coefficients(lam, ctx), N, ctx.digits)


# --- full-line Gaussian-type reference ensemble ---

def log_z_ggue_exact(N: int, lam, ctx: PrecisionContext):
    """Gamma-product closed form, valid for every N (odd included):
    -(N^2/2) log(2N) + (N/2) log(2 pi) - (lam N/2) log N
    + sum_{j=1..N} [log Gamma((lam+1)/2 + floor(j/2))
                    - log Gamma(1/2 + floor(j/2)) + log Gamma(j+1)]."""
    with mp.workdps(ctx.digits):
        lam_ = mpf(lam)
        if lam_ <= -1:
            raise ValueError("lam must exceed -1")
        n_ = mpf(N)
        acc = mp.fsum(mp.loggamma((lam_ + 1) / 2 + j // 2)
                      - mp.loggamma(mpf(1) / 2 + j // 2)
                      + mp.loggamma(j + 1) for j in range(1, N + 1))
        return (-(n_ ** 2 / 2) * mp.log(2 * n_) + (n_ / 2) * mp.log(2 * mp.pi)
                - (lam_ * n_ / 2) * mp.log(n_) + acc)


def log_z_ggue_barnes(N: int, lam, ctx: PrecisionContext):
    """Barnes-G closed form of the same partition function; the derivation
    pairs Gamma factors two by two, so it requires even N."""
    if N % 2:
        raise ValueError("the Barnes-G form requires even N")
    with mp.workdps(ctx.digits):
        lam_ = mpf(lam)
        n_ = mpf(N)
        lg = lambda x: log_barnes_g(x, ctx)
        return (-(n_ ** 2 / 2) * mp.log(2 * n_) + (n_ / 2) * mp.log(2 * mp.pi)
                - (lam_ * n_ / 2) * mp.log(n_)
                + lg(mpf(3) / 2) + lg(mpf(1) / 2)
                - lg((lam_ + 3) / 2) - lg((lam_ + 1) / 2)
                + lg(n_ + 2) + lg((lam_ + n_ + 3) / 2) + lg((lam_ + n_ + 1) / 2)
                - lg((n_ + 3) / 2) - lg((n_ + 1) / 2))


def log_z_ggue_hankel(N: int, lam, ctx: PrecisionContext):
    """Brute-force route: log(N! det[mu_{i+j}]) with mu_k the full-line
    moments.  The Hankel matrix has a checkerboard of zeros (odd moments
    vanish); intended for small N."""
    mus = [moment_full_line(k, lam, N, ctx) for k in range(2 * N - 1)]
    rows = [[mus[i + j] for j in range(N)] for i in range(N)]
    with mp.workdps(ctx.digits):
        return mp.loggamma(N + 1) + mp.log(det_bareiss(rows, ctx.digits))


def log_z_ggue_asymptotic_coefficients(lam, ctx: PrecisionContext) -> dict:
    with mp.workdps(ctx.digits):
        lam_ = mpf(lam)
        log_a = log_glaisher(ctx)
        c0 = ((1 - 3 * lam_ ** 2 * mp.log(2) - 12 * log_a
               + 6 * (lam_ + 1) * mp.log(2 * mp.pi)) / 12
              + log_barnes_g(mpf(3) / 2, ctx) + log_barnes_g(mpf(1) / 2, ctx)
              - log_barnes_g((lam_ + 3) / 2, ctx) - log_barnes_g((lam_ + 1) / 2, ctx))
        return {
            "n2": -mpf(3) / 4 - mp.log(2) / 2,
            "nlogn": mpf(1),
            "n": mp.log(2 * mp.pi) - (lam_ * (1 + mp.log(2)) + 2) / 2,
            "logn": (3 * lam_ ** 2 + 5) / 12,
            "const": c0,
            "invn": (lam_ ** 3 + lam_ + 1) / 12,
        }


def log_z_ggue_asymptotic(N: int, lam, ctx: PrecisionContext):
    """Expansion through 1/N; the O(N^-2) error contract is certified on even
    N (the Barnes derivation pairs factors), and monitored on odd N."""
    return _assemble(log_z_ggue_asymptotic_coefficients(lam, ctx), N, ctx.digits)


def gamma_hankel_det_residual(z, M: int, ctx: PrecisionContext):
    """Relative residual of det[Gamma(z+i+j)]_{i,j=0..M} = prod_{j=0..M}
    j! Gamma(z+j), the factorization identity behind the reference-ensemble
    closed forms."""
    if M > 8:
        raise ValueError("the direct determinant check is limited to M <= 8")
    with mp.workdps(ctx.digits):
        z_ = mpf(z)
        if z_ <= 0:
            raise ValueError("z must be positive")
        rows = [[mp.gamma(z_ + i + j) for j in range(M + 1)] for i in range(M + 1)]
        det = det_bareiss(rows, ctx.digits)
        log_prod = mp.fsum(mp.loggamma(j + 1) + mp.loggamma(z_ + j)
                           for j in range(M + 1))
        return abs(mp.exp(mp.log(det) - log_prod) - 1)


# --- the order-1 expansion of the log positivity probability ---

def log_positivity_coefficients(lam, ctx: PrecisionContext) -> dict:
    with mp.workdps(ctx.digits):
        lam_ = mpf(lam)
        log_a = log_glaisher(ctx)
        zp = mpf(1) / 12 - log_a
        c3 = mp.log(3) / 8 - mp.log(2) / 6 + zp
        gterm = (log_barnes_g(mpf(3) / 2, ctx) + log_barnes_g(mpf(1) / 2, ctx)
                 + log_barnes_g(lam_ + 1, ctx)
                 - log_barnes_g((lam_ + 3) / 2, ctx)
                 - log_barnes_g((lam_ + 1) / 2, ctx))
        return {
            "n2": -mp.log(3) / 2,
            "n": -lam_ * mp.log(3) / 2,
            "logn": -mpf(1) / 12 + lam_ ** 2 / 4,
            "const": c3 + 3 * lam_ ** 2 / 4 * mp.log(2)
                     - lam_ ** 2 / 2 * mp.log(3) - gterm,
        }


def log_positivity_asymptotic(N: int, lam, ctx: PrecisionContext):
    """All terms of log P(M_N > 0) through O(1); the remainder is O(1/N)
    generically (O(1/N^2) at lam = 0, where the 1/N coefficient vanishes)."""
    if N < 1:
        raise ValueError("N must be positive")
    return _assemble(log_positivity_coefficients(lam, ctx), N, ctx.digits)


def estimate_invn_coefficient(diffs: dict, ctx: PrecisionContext):
    """Richardson estimate of the 1/N coefficient from remainders
    diffs[N] = exact - asymptotic at two N values with N2 = 2 N1.  This is a
    diagnostic estimate, not a shipped closed form."""
    ns = sorted(diffs)
    pairs = [(n, 2 * n) for n in ns if 2 * n in diffs]
    if not pairs:
        raise ValueError("need two N values with N2 = 2 N1")
    n1, n2 = pairs[-1]
    with mp.workdps(ctx.digits):
        return 2 * (n2 * mpf(diffs[n2])) - n1 * mpf(diffs[n1])
