"""The deformed Laguerre weight x^lam * exp(-N*(x + s*(x^2 - x))) on (0, inf)
and its moments, plus the full-line Gaussian-type moments used by the
reference ensemble.

s interpolates between the pure Laguerre weight (s=0) and the half-line
Gaussian weight (s=1); both endpoints have Gamma-function closed forms that
serve as exact cross-checks of the quadrature route.
"""

from __future__ import annotations

from dataclasses import dataclass

from mpmath import mp, mpf

from . import _dequad
from .errors import PrecisionNotConverged
from .specfun import PrecisionContext


@dataclass(frozen=True)
class WeightSpec:
    """The triple (lam, s, bigN).  Values are stored verbatim (float, str or
    mpf all work) and converted to mpf at working precision inside each
    operation, so results do not depend on the precision active at
    construction time."""

    lam: object
    s: object
    bigN: int

    def __post_init__(self):
        if not float(self.lam) > -1.0:
            raise ValueError("lam must exceed -1 for integrability at 0")
        if not 0.0 <= float(self.s) <= 1.0:
            raise ValueError("s must lie in [0, 1]")
        if int(self.bigN) < 1:
            raise ValueError("bigN must be a positive integer")


@dataclass(frozen=True)
class MomentTable:
    """Moments m_0..m_K of a WeightSpec, all positive, with the integration-
    by-parts residual recorded at construction.  digits is the arithmetic
    precision the values carry."""

    spec: WeightSpec
    values: tuple
    max_ibp_residual: object = None
    digits: int = 0
    target_digits: int = 0

    def log_values(self):
        with mp.workdps(self.digits):
            return tuple(mp.log(v) for v in self.values)


def weight_eval(x, spec: WeightSpec, ctx: PrecisionContext):
    """w(x) = x^lam * exp(-N*(x + s*(x^2 - x)))."""
    with mp.workdps(ctx.digits):
        x_, lam_, s_ = mpf(x), mpf(spec.lam), mpf(spec.s)
        if x_ < 0:
            raise ValueError("weight is supported on [0, inf)")
        if x_ == 0:
            if lam_ < 0:
                raise ValueError("x=0 is singular for lam < 0")
            return mpf(1) if lam_ == 0 else mpf(0)
        n_ = mpf(spec.bigN)
        return x_ ** lam_ * mp.exp(-n_ * (x_ + s_ * (x_ * x_ - x_)))


def _moment_sums_escalated(spec: WeightSpec, K: int, ctx: PrecisionContext):
    last = None
    for digits in ctx.ladder():
        try:
            return _dequad.moment_sums(spec.lam, spec.s, spec.bigN, K,
                                       digits, digits - 20), digits
        except PrecisionNotConverged as exc:
            last = exc
    raise last


def moment(k: int, spec: WeightSpec, ctx: PrecisionContext):
    """m_k = integral of x^(k+lam) w-exponential, by doubly-exponential
    quadrature after x = e^t (which also absorbs the integrable singularity
    for lam in (-1, 0))."""
    if k < 0:
        raise ValueError("moment order must be nonnegative")
    sums, digits = _moment_sums_escalated(spec, k, ctx)
    with mp.workdps(ctx.digits):
        return +sums[k]


def moment_table(spec: WeightSpec, K: int, ctx: PrecisionContext) -> MomentTable:
    if K < 2:
        raise ValueError("moment_table requires K >= 2")
    sums, digits = _moment_sums_escalated(spec, K, ctx)
    table = MomentTable(spec=spec, values=tuple(sums), digits=digits,
                        target_digits=min(ctx.target_digits, digits - 20))
    residual = validate_moments(table)
    return MomentTable(spec=spec, values=table.values, max_ibp_residual=residual,
                       digits=digits, target_digits=table.target_digits)


def validate_moments(table: MomentTable):
    """Max relative residual of the integration-by-parts identity
    (k+1+lam) m_k - N(1-s) m_{k+1} - 2Ns m_{k+2} = 0 (boundary terms vanish
    because lam > -1).  At s=0 the identity loses the m_{k+2} term and is
    checked as m_{k+1} = (k+1+lam) m_k / N."""
    ms = table.values
    spec = table.spec
    with mp.workdps(table.digits):
        lam_, s_, n_ = mpf(spec.lam), mpf(spec.s), mpf(spec.bigN)
        worst = mpf(0)
        if s_ == 0:
            for k in range(len(ms) - 1):
                res = abs(ms[k + 1] - (k + 1 + lam_) * ms[k] / n_) / ms[k + 1]
                worst = max(worst, res)
        else:
            for k in range(len(ms) - 2):
                lead = (k + 1 + lam_) * ms[k]
                res = abs(lead - n_ * (1 - s_) * ms[k + 1] - 2 * n_ * s_ * ms[k + 2]) / lead
                worst = max(worst, res)
        return worst


def moment_full_line(k: int, lam, bigN: int, ctx: PrecisionContext):
    """Moments of |x|^lam exp(-N x^2) over the whole real line: zero for odd k,
    Gamma((lam+k+1)/2) * N^(-(lam+k+1)/2) for even k."""
    if k < 0:
        raise ValueError("moment order must be nonnegative")
    with mp.workdps(ctx.digits):
        lam_ = mpf(lam)
        if lam_ <= -1:
            raise ValueError("lam must exceed -1")
        if k % 2:
            return mpf(0)
        e = (lam_ + k + 1) / 2
        return mp.gamma(e) * mpf(bigN) ** (-e)
