"""From moments to orthogonal-polynomial data: recurrence coefficients via a
Cholesky factorization of the Hankel matrix, log partition functions, the
Christoffel-Darboux one-point density, the partition-function s-derivative in
its three equivalent forms, and the string-equation residuals.

Hankel matrices are catastrophically ill conditioned, so every factorization
is certified: the same moments are refactored at 1.5x the arithmetic precision
and the agreement determines achieved_digits.  Escalation is triggered only by
an actual non-positive pivot; a shortfall in achieved_digits is reported, not
hidden.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

from mpmath import mp, mpf

from . import _dequad
from .errors import PrecisionNotConverged
from .specfun import PrecisionContext
from .weight import MomentTable, WeightSpec, validate_moments, weight_eval


@dataclass(frozen=True)
class RecurrenceTable:
    """alpha_0..alpha_n_max, beta_1..beta_n_max (beta[0] is the conventional 0)
    and log h_0..log h_n_max for the monic polynomials orthogonal under the
    given weight.

    achieved_digits is the certified accuracy of the entries: the working
    precision minus the digits lost to Hankel conditioning, measured by
    refactoring at 1.5x precision."""

    spec: WeightSpec
    n_max: int
    alpha: tuple
    beta: tuple
    log_h: tuple
    achieved_digits: int
    digits: int


def _cholesky_recurrence(values, n_max: int, digits: int):
    """Factor [m_{i+j}] = L L^T for rows 0..n_max+1, cols 0..n_max and read off
    h_n = L_nn^2, beta_n = (L_nn/L_{n-1,n-1})^2,
    alpha_n = L_{n+1,n}/L_nn - L_{n,n-1}/L_{n-1,n-1}."""
    with mp.workdps(digits):
        rows = n_max + 2
        cols = n_max + 1
        L = [[mpf(0)] * cols for _ in range(rows)]
        for i in range(rows):
            Li = L[i]
            for j in range(min(i, cols - 1) + 1):
                acc = mpf(values[i + j])
                Lj = L[j]
                for k in range(j):
                    acc -= Li[k] * Lj[k]
                if i == j:
                    if acc <= 0:
                        raise PrecisionNotConverged(
                            f"non-positive pivot at n={i} with {digits} digits")
                    Li[j] = mp.sqrt(acc)
                else:
                    Li[j] = acc / Lj[j]
        alpha = []
        beta = [mpf(0)]
        log_h = []
        for n in range(n_max + 1):
            prev_ratio = L[n][n - 1] / L[n - 1][n - 1] if n >= 1 else mpf(0)
            alpha.append(L[n + 1][n] / L[n][n] - prev_ratio)
            log_h.append(2 * mp.log(L[n][n]))
            if n >= 1:
                beta.append((L[n][n] / L[n - 1][n - 1]) ** 2)
        return alpha, beta, log_h


def _agreement_digits(a1, b1, h1, a2, b2, h2, digits: int) -> int:
    """Matching digits between two factorizations of the same moments.
    log h is compared absolutely (a log-scale gap is a relative gap in h)."""
    with mp.workdps(digits):
        worst = mpf(0)
        for v1, v2 in zip(a1, a2):
            worst = max(worst, abs(v1 - v2) / max(abs(v2), mpf(10) ** (-digits)))
        for v1, v2 in zip(b1[1:], b2[1:]):
            worst = max(worst, abs(v1 - v2) / v2)
        for v1, v2 in zip(h1, h2):
            worst = max(worst, abs(v1 - v2))
        if worst == 0:
            return digits
        return max(0, min(digits, int(-mp.log10(worst))))


def recurrence_from_moments(table: MomentTable, n_max: int, ctx: PrecisionContext) -> RecurrenceTable:
    """Single-shot factorization of an existing moment table (no escalation
    here; escalation re-runs the quadrature too, see recurrence_table)."""
    if len(table.values) < 2 * n_max + 2:
        raise ValueError(f"need moments m_0..m_{2 * n_max + 1} for n_max={n_max}")
    digits = max(ctx.digits, table.digits)
    alpha, beta, log_h = _cholesky_recurrence(table.values, n_max, digits)
    a2, b2, h2 = _cholesky_recurrence(table.values, n_max, math.ceil(digits * 3 / 2))
    agreement = _agreement_digits(alpha, beta, log_h, a2, b2, h2, digits)
    target = min(ctx.target_digits, table.target_digits or ctx.target_digits)
    achieved = max(0, min(target, target - (digits - agreement)))
    with mp.workdps(digits):
        return RecurrenceTable(spec=table.spec, n_max=n_max, alpha=tuple(alpha),
                               beta=tuple(beta), log_h=tuple(log_h),
                               achieved_digits=achieved, digits=digits)


_table_cache: dict = {}
_table_cache_lock = threading.Lock()


def _spec_key(spec: WeightSpec):
    return (str(spec.lam), str(spec.s), int(spec.bigN))


def recurrence_table(spec: WeightSpec, n_max: int, ctx: PrecisionContext,
                     cache: bool = True) -> RecurrenceTable:
    """Moments plus certified factorization, escalating both together while
    pivots fail.  Tables are immutable and memoized per (spec, n_max, ctx)."""
    key = (_spec_key(spec), n_max, ctx.target_digits, ctx.digits, ctx.max_escalations)
    if cache:
        with _table_cache_lock:
            hit = _table_cache.get(key)
        if hit is not None:
            return hit
    last = None
    result = None
    for digits in ctx.ladder():
        try:
            sums = _dequad.moment_sums(spec.lam, spec.s, spec.bigN,
                                       2 * n_max + 1, digits, digits - 20)
            mt = MomentTable(spec=spec, values=tuple(sums), digits=digits,
                             target_digits=digits - 20)
            mt = MomentTable(spec=spec, values=mt.values,
                             max_ibp_residual=validate_moments(mt),
                             digits=digits, target_digits=digits - 20)
            sub = PrecisionContext(target_digits=min(ctx.target_digits, digits - 20),
                                   digits=digits, max_escalations=0)
            result = recurrence_from_moments(mt, n_max, sub)
            break
        except PrecisionNotConverged as exc:
            last = exc
    if result is None:
        raise PrecisionNotConverged(
            f"escalation exhausted for spec={spec}, n_max={n_max}: {last}")
    if cache:
        with _table_cache_lock:
            _table_cache[key] = result
    return result


def log_partition_from_table(rt: RecurrenceTable, N: int):
    if rt.n_max < N - 1:
        raise ValueError("table too shallow for this N")
    with mp.workdps(rt.digits):
        return mp.loggamma(N + 1) + mp.fsum(rt.log_h[:N])


def log_partition(spec: WeightSpec, N: int, ctx: PrecisionContext):
    """log Z_N(s) = log N! + sum_{j<N} log h_j."""
    if int(spec.bigN) != N:
        raise ValueError("the weight's bigN and the matrix size must agree")
    rt = recurrence_table(spec, N - 1, ctx)
    return log_partition_from_table(rt, N)


def det_bareiss(rows, digits: int):
    """Fraction-free (Bareiss) determinant of a square matrix given as a list
    of row lists; entries are converted to mpf at the given precision."""
    with mp.workdps(digits):
        a = [[mpf(v) for v in row] for row in rows]
        n = len(a)
        prev = mpf(1)
        for k in range(n - 1):
            if a[k][k] == 0:
                raise ZeroDivisionError("zero pivot in Bareiss elimination")
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev
            prev = a[k][k]
        return a[n - 1][n - 1]


def log_partition_determinant(table: MomentTable, N: int):
    """Brute-force route log(N! det[m_{i+j}]_{0..N-1}), for cross-checking the
    factorization route at small N."""
    if len(table.values) < 2 * N - 1:
        raise ValueError("moment table too short")
    ms = table.values
    rows = [[ms[i + j] for j in range(N)] for i in range(N)]
    with mp.workdps(table.digits):
        return mp.loggamma(N + 1) + mp.log(det_bareiss(rows, table.digits))


def deformation_rhs(rt: RecurrenceTable, N: int, ctx: PrecisionContext):
    """The closed-form s-derivative of log Z_N(s):
    beta_N c_{N,lam}(s) - N^2 ((1-3s) E_N + 2s F_N) with
    c_{N,lam}(s) = N^2 (3-s) + lam N,
    E_N = beta_N (alpha_N + alpha_{N-1}),
    F_N = beta_N (beta_{N+1} + beta_N + beta_{N-1} + alpha_N^2
          + alpha_N alpha_{N-1} + alpha_{N-1}^2)."""
    if rt.n_max < N + 1:
        raise ValueError("deformation_rhs needs the table up to n = N+1")
    if int(rt.spec.bigN) != N:
        raise ValueError("the weight's bigN and the index N must agree")
    al, be = rt.alpha, rt.beta
    with mp.workdps(rt.digits):
        s_, lam_ = mpf(rt.spec.s), mpf(rt.spec.lam)
        c = N * N * (3 - s_) + lam_ * N
        e_n = be[N] * (al[N] + al[N - 1])
        f_n = be[N] * (be[N + 1] + be[N] + be[N - 1]
                       + al[N] ** 2 + al[N] * al[N - 1] + al[N - 1] ** 2)
        return be[N] * c - N * N * ((1 - 3 * s_) * e_n + 2 * s_ * f_n)


def string_residual(rt: RecurrenceTable, n: int, ctx: PrecisionContext):
    """Residuals (r1, r2) of the two exact finite-N identities linking
    alpha_n, beta_n and beta_{n+1} at q = n/N; both vanish to the table's
    achieved_digits for correctly computed coefficients."""
    if not 0 <= n <= rt.n_max - 1:
        raise ValueError("string_residual needs 0 <= n <= n_max - 1")
    al, be = rt.alpha, rt.beta
    bigN = int(rt.spec.bigN)
    with mp.workdps(rt.digits):
        s_, lam_ = mpf(rt.spec.s), mpf(rt.spec.lam)
        q = mpf(n) / bigN
        r1 = (2 * s_ * (be[n + 1] + be[n] + al[n] ** 2) + (1 - s_) * al[n]
              - 2 * q - (lam_ + 1) / bigN)
        if n == 0:
            # beta_0 = 0 makes every term of the second identity vanish
            return r1, mpf(0)
        r2 = (be[n] * (2 * s_ * al[n] + 1 - s_) * (2 * s_ * al[n - 1] + 1 - s_)
              - (2 * s_ * be[n] - q) * (2 * s_ * be[n] - q - lam_ / bigN))
        return r1, r2


def _cd_kernel_factor(rt: RecurrenceTable, x, N: int):
    """pi_N'(x) pi_{N-1}(x) - pi_N(x) pi_{N-1}'(x), by running the three-term
    recurrence and its derivative (never explicit coefficients)."""
    al, be = rt.alpha, rt.beta
    p_prev, p = mpf(1), x - al[0]
    d_prev, d = mpf(0), mpf(1)
    for n in range(1, N):
        p_next = (x - al[n]) * p - be[n] * p_prev
        d_next = p + (x - al[n]) * d - be[n] * d_prev
        p_prev, p, d_prev, d = p, p_next, d, d_next
    return d * p_prev - p * d_prev


def one_point_density(rt: RecurrenceTable, x, ctx: PrecisionContext):
    """Exact N-point eigenvalue density rho_N(x) = w(x) (pi_N' pi_{N-1}
    - pi_N pi_{N-1}')/h_{N-1}."""
    N = int(rt.spec.bigN)
    if rt.n_max < N - 1:
        raise ValueError("table too shallow for the density at this N")
    with mp.workdps(rt.digits):
        x_ = mpf(x)
        w = weight_eval(x_, rt.spec,
                        PrecisionContext(min(ctx.target_digits, rt.digits - 20),
                                         rt.digits, ctx.max_escalations))
        cd = _cd_kernel_factor(rt, x_, N)
        return w * cd / mp.exp(rt.log_h[N - 1])


def linear_statistic(rt: RecurrenceTable, N: int, ctx: PrecisionContext):
    """-N * integral of (x^2 - x) rho_N(x): the spectral-average route to the
    s-derivative of log Z_N, independent of the recurrence-identity route."""
    if int(rt.spec.bigN) != N:
        raise ValueError("the weight's bigN and the index N must agree")
    if rt.n_max < N - 1:
        raise ValueError("table too shallow for this N")
    spec = rt.spec
    digits = rt.digits
    with mp.workdps(digits):
        inv_h = 1 / mp.exp(rt.log_h[N - 1])

        def fn(x):
            return (x * x - x) * _cd_kernel_factor(rt, x, N) * inv_h

        target = min(ctx.target_digits, digits - 20)
        val = _dequad.weighted_integral(fn, spec.lam, spec.s, N, 2 * N,
                                        digits, target)
        return -N * val


def partition_log_derivative_fd(spec: WeightSpec, ctx: PrecisionContext):
    """Second-order finite difference of log Z_N(s) in s, the third route to
    the same quantity.  Steps of 10^(-target/4) keep the O(eps^2) truncation
    at the 10^(-target/2) agreement tolerance; one-sided stencils take over
    within 2 eps of the s-domain endpoints."""
    N = int(spec.bigN)
    with mp.workdps(ctx.digits):
        s_ = mpf(spec.s)
        # eps^2 truncation must clear the target/2 agreement contract with
        # room for the O(N^2) third-derivative prefactor
        eps = mpf(10) ** (-(ctx.target_digits // 4 + 2))

        def lz(s_value):
            shifted = WeightSpec(lam=spec.lam, s=s_value, bigN=N)
            return log_partition(shifted, N, ctx)

        if s_ + eps > 1:
            return (3 * lz(s_) - 4 * lz(s_ - eps) + lz(s_ - 2 * eps)) / (2 * eps)
        if s_ - eps < 0:
            return (-3 * lz(s_) + 4 * lz(s_ + eps) - lz(s_ + 2 * eps)) / (2 * eps)
        return (lz(s_ + eps) - lz(s_ - eps)) / (2 * eps)
