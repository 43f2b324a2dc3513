import pytest
from mpmath import mp, mpf

from ggue_pd.errors import PrecisionNotConverged
from ggue_pd.opchain import (
    deformation_rhs,
    det_bareiss,
    linear_statistic,
    log_partition,
    log_partition_determinant,
    log_partition_from_table,
    one_point_density,
    partition_log_derivative_fd,
    recurrence_table,
    string_residual,
)
from ggue_pd.specfun import PrecisionContext
from ggue_pd.weight import WeightSpec, moment_table

CTX = PrecisionContext(target_digits=120)


def test_laguerre_recurrence_closed_forms():
    """s=0 coefficients are the monic Laguerre ones, rescaled by N:
    alpha_n = (2n + lam + 1)/N, beta_n = n(n + lam)/N^2."""
    lam, bigN = mpf("0.75"), 4
    rt = recurrence_table(WeightSpec(0.75, 0.0, bigN), 6, CTX)
    with mp.workdps(rt.digits):
        tol = mpf(10) ** -(rt.achieved_digits - 5)
        for n in range(7):
            assert abs(rt.alpha[n] - (2 * n + lam + 1) / bigN) < tol
            if n:
                assert abs(rt.beta[n] - mpf(n) * (n + lam) / bigN ** 2) < tol
        assert rt.beta[0] == 0


def test_achieved_digits_reporting():
    rt = recurrence_table(WeightSpec(0.0, 1.0, 8), 9, CTX)
    # Hankel conditioning costs ~1.1 digits per row at this size; the table
    # must report the loss rather than escalate
    assert 0 < rt.achieved_digits <= CTX.target_digits
    assert rt.achieved_digits > CTX.target_digits - 25
    assert rt.digits >= CTX.digits


def test_table_cache_returns_same_object():
    a = recurrence_table(WeightSpec(1.0, 0.5, 3), 4, CTX)
    b = recurrence_table(WeightSpec(1.0, 0.5, 3), 4, CTX)
    assert a is b
    c = recurrence_table(WeightSpec(1.0, 0.5, 3), 4, CTX, cache=False)
    assert c is not a and c.alpha == a.alpha


def test_log_partition_single_matrix():
    # N=1 at s=1, lam=0: Z_1 = integral exp(-x^2) dx over [0, inf) = sqrt(pi)/2
    spec = WeightSpec(0.0, 1.0, 1)
    with mp.workdps(CTX.digits):
        got = log_partition(spec, 1, CTX)
        assert abs(got - mp.log(mp.sqrt(mp.pi) / 2)) < mpf(10) ** -110


def test_log_partition_requires_matching_size():
    with pytest.raises(ValueError):
        log_partition(WeightSpec(0.0, 1.0, 3), 4, CTX)


def test_heine_determinant_route():
    """log(N! det H) with H the moment Hankel matrix equals the
    recurrence-based partition function."""
    spec = WeightSpec(0.5, 0.6, 3)
    table = moment_table(spec, 6, CTX)
    rt = recurrence_table(spec, 2, CTX)
    with mp.workdps(CTX.digits):
        gap = abs(log_partition_determinant(table, 3) - log_partition_from_table(rt, 3))
        assert gap < mpf(10) ** -(CTX.target_digits - 30)


def test_det_bareiss_known_matrix():
    with mp.workdps(40):
        rows = [[mpf(1), mpf(2)], [mpf(3), mpf(4)]]
        assert abs(det_bareiss(rows, 40) + 2) < mpf(10) ** -35


def test_string_residuals_vanish():
    rt = recurrence_table(WeightSpec(1.0, 0.5, 5), 6, CTX)
    with mp.workdps(rt.digits):
        tol = mpf(10) ** -(rt.achieved_digits - 10)
        for n in range(6):
            r1, r2 = string_residual(rt, n, CTX)
            assert abs(r1) < tol and abs(r2) < tol
    with pytest.raises(ValueError):
        string_residual(rt, -1, CTX)
    with pytest.raises(ValueError):
        string_residual(rt, 6, CTX)  # needs beta_{n+1}


def test_derivative_routes_agree():
    spec = WeightSpec(1.0, 0.5, 5)
    rt = recurrence_table(spec, 6, CTX)
    with mp.workdps(CTX.digits):
        d = deformation_rhs(rt, 5, CTX)
        l = linear_statistic(rt, 5, CTX)
        f = partition_log_derivative_fd(spec, CTX)
        assert abs(d - l) < mpf(10) ** -(CTX.target_digits - 20)
        assert abs(d - f) < mpf(10) ** -(CTX.target_digits // 2)


def test_fd_one_sided_at_s_zero():
    # s=0 sits on the boundary of the deformation interval, so the stencil
    # must step upward only
    spec = WeightSpec(1.0, 0.0, 4)
    rt = recurrence_table(spec, 5, CTX)
    with mp.workdps(CTX.digits):
        d = deformation_rhs(rt, 4, CTX)
        f = partition_log_derivative_fd(spec, CTX)
        assert abs(d - f) < mpf(10) ** -(CTX.target_digits // 2)


def test_deformation_needs_one_extra_row():
    rt = recurrence_table(WeightSpec(0.0, 0.5, 4), 4, CTX)
    with pytest.raises(ValueError):
        deformation_rhs(rt, 4, CTX)


def test_one_point_density_positive_inside_support():
    rt = recurrence_table(WeightSpec(0.0, 1.0, 6), 7, CTX)
    with mp.workdps(CTX.digits):
        for x in ("0.2", "0.8", "1.4"):
            assert one_point_density(rt, mpf(x), CTX) > 0


def test_pivot_failure_raises_honestly():
    # at 70 digits the N=80 Hankel factorization runs out of precision; with
    # escalation disabled this must surface as an exception, not a wrong table
    ctx = PrecisionContext(target_digits=50, digits=70, max_escalations=0)
    with pytest.raises(PrecisionNotConverged):
        recurrence_table(WeightSpec(0.0, 1.0, 80), 79, ctx, cache=False)
