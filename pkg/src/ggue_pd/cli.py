"""Command-line surface.

Subcommands: positivity (exact and asymptotic log P(M_N > 0) over a grid),
figure1 (same table over the default reproduction grid), coeffs (recurrence
coefficients with string residuals and asymptotic predictions), partition
(log Z_N(s)), verify (the full invariant suite).

Output contract: CSV header lambda,N,log_p_exact,log_p_asymptotic,abs_error,
log10_abs_error; JSON mirrors the CSV columns with numbers as decimal strings;
all numbers serialized via mp.nstr at 24 significant digits, rows sorted by
(lambda, N), so identical configs give byte-identical files.

Exit codes: 0 success, 1 verification failure, 2 invalid arguments,
3 precision-not-converged.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from mpmath import mp, mpf

from . import asymptotics, equilibrium, opchain, specfun, weight
from .errors import PrecisionNotConverged, VerificationError
from .specfun import PrecisionContext
from .weight import WeightSpec

CSV_HEADER = "lambda,N,log_p_exact,log_p_asymptotic,abs_error,log10_abs_error"


@dataclass(frozen=True)
class RunConfig:
    precision: int
    lambdas: tuple
    n_range: tuple  # (min, max, step)
    s: float = 1.0
    output_path: str = "-"
    fmt: str = "csv"
    jobs: int = 1

    def __post_init__(self):
        if self.precision < 50:
            raise ValueError("precision must be at least 50 digits")
        if self.n_range[0] < 1:
            raise ValueError("N must be positive")
        if self.n_range[2] < 1:
            raise ValueError("n-step must be at least 1")
        if not self.n_values():
            raise ValueError("empty N grid: n-min exceeds n-max")
        if any(not float(l) > -1.0 for l in self.lambdas):
            raise ValueError("every lambda must exceed -1")

    def n_values(self):
        lo, hi, step = self.n_range
        return list(range(lo, hi + 1, step))


@dataclass(frozen=True)
class PositivityResult:
    lam: float
    N: int
    log_p_exact: object
    log_p_asymptotic: object
    abs_error: object
    achieved_digits: int


def default_precision(n_max: int) -> int:
    # Hankel conditioning grows exponentially in N, so the default working
    # precision has to scale with the largest matrix size of the run.
    return max(200, 12 * n_max)


def positivity_result(lam: float, N: int, target_digits: int) -> PositivityResult:
    ctx = PrecisionContext(target_digits=target_digits)
    spec = WeightSpec(lam=lam, s=1.0, bigN=N)
    rt = opchain.recurrence_table(spec, N - 1, ctx)
    with mp.workdps(ctx.digits):
        exact = (opchain.log_partition_from_table(rt, N)
                 - asymptotics.log_z_ggue_exact(N, lam, ctx))
        asym = asymptotics.log_positivity_asymptotic(N, lam, ctx)
        return PositivityResult(lam=lam, N=N, log_p_exact=exact,
                                log_p_asymptotic=asym,
                                abs_error=abs(exact - asym),
                                achieved_digits=rt.achieved_digits)


def _nstr(v) -> str:
    with mp.workdps(60):
        return mp.nstr(v, 24)


def _result_record(r: PositivityResult) -> dict:
    with mp.workdps(60):
        log10_err = mp.log10(r.abs_error) if r.abs_error > 0 else mpf("-inf")
    return {
        "lambda": repr(float(r.lam)),
        "N": str(r.N),
        "log_p_exact": _nstr(r.log_p_exact),
        "log_p_asymptotic": _nstr(r.log_p_asymptotic),
        "abs_error": _nstr(r.abs_error),
        "log10_abs_error": _nstr(log10_err),
    }


def _grid_record(args) -> dict:
    lam, N, target = args
    return _result_record(positivity_result(lam, N, target))


def positivity_records(config: RunConfig) -> list:
    grid = sorted((float(lam), n) for lam in config.lambdas for n in config.n_values())
    tasks = [(lam, n, config.precision) for lam, n in grid]
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            records = list(pool.map(_grid_record, tasks))
    else:
        records = [_grid_record(t) for t in tasks]
    return records


def _emit(lines_or_records, fmt: str, header: str, path: str) -> None:
    if fmt == "csv":
        body = header + "\n" + "\n".join(
            ",".join(rec[k] for k in header.split(",")) for rec in lines_or_records)
        text = body + "\n"
    else:
        text = json.dumps(lines_or_records, indent=2) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def cmd_positivity(config: RunConfig) -> int:
    _emit(positivity_records(config), config.fmt, CSV_HEADER, config.output_path)
    return 0


def cmd_figure1(config: RunConfig) -> int:
    return cmd_positivity(config)


def cmd_partition(config: RunConfig) -> int:
    header = "lambda,s,N,log_z,achieved_digits"
    ctx = PrecisionContext(target_digits=config.precision)
    records = []
    for lam in sorted(float(l) for l in config.lambdas):
        for n in config.n_values():
            spec = WeightSpec(lam=lam, s=config.s, bigN=n)
            rt = opchain.recurrence_table(spec, n - 1, ctx)
            records.append({
                "lambda": repr(lam),
                "s": repr(float(config.s)),
                "N": str(n),
                "log_z": _nstr(opchain.log_partition_from_table(rt, n)),
                "achieved_digits": str(rt.achieved_digits),
            })
    _emit(records, config.fmt, header, config.output_path)
    return 0


def cmd_coeffs(config: RunConfig, n_max: int) -> int:
    header = "n,alpha,beta,r1,r2,alpha_pred,beta_pred"
    ctx = PrecisionContext(target_digits=config.precision)
    if len(config.lambdas) != 1:
        raise ValueError("coeffs expects a single lambda")
    lam = float(config.lambdas[0])
    bigN = config.n_values()[0]
    spec = WeightSpec(lam=lam, s=config.s, bigN=bigN)
    rt = opchain.recurrence_table(spec, n_max + 1, ctx)
    records = []
    for n in range(1, n_max + 1):
        r1, r2 = opchain.string_residual(rt, n, ctx)
        with mp.workdps(ctx.digits):
            ev = asymptotics.expansion_coeffs(mpf(n) / bigN, lam, config.s, ctx)
            alpha_pred = ev.f0 + ev.f1 / bigN
            beta_pred = ev.g0 + ev.g1 / bigN
        records.append({
            "n": str(n),
            "alpha": _nstr(rt.alpha[n]),
            "beta": _nstr(rt.beta[n]),
            "r1": _nstr(r1),
            "r2": _nstr(r2),
            "alpha_pred": _nstr(alpha_pred),
            "beta_pred": _nstr(beta_pred),
        })
    _emit(records, config.fmt, header, config.output_path)
    return 0


# --- verification suite ---

@dataclass
class CheckResult:
    name: str
    ok: bool
    measured: str
    tol: str


def _residual_check(name: str, measured, tol) -> CheckResult:
    with mp.workdps(30):
        return CheckResult(name=name, ok=bool(measured <= tol),
                           measured=mp.nstr(mpf(measured), 3), tol=mp.nstr(mpf(tol), 3))


def _bool_check(name: str, ok: bool, note: str = "") -> CheckResult:
    return CheckResult(name=name, ok=ok, measured=note or str(ok), tol="true")


def check_table_identities(rt, ctx: PrecisionContext) -> list:
    """String residuals, beta positivity and the beta = h_n/h_{n-1} ratio for
    one recurrence table; callable on externally perturbed tables."""
    out = []
    with mp.workdps(rt.digits):
        worst = mpf(0)
        for n in range(rt.n_max):
            r1, r2 = opchain.string_residual(rt, n, ctx)
            worst = max(worst, abs(r1), abs(r2))
        tol = mpf(10) ** (-(rt.achieved_digits - 10))
        tag = f"lam={rt.spec.lam},s={rt.spec.s},N={rt.spec.bigN}"
        out.append(_residual_check(f"string_residuals[{tag}]", worst, tol))
        out.append(_bool_check(f"beta_positive[{tag}]",
                               all(b > 0 for b in rt.beta[1:])))
        ratio_worst = mpf(0)
        for n in range(1, rt.n_max + 1):
            ratio_worst = max(ratio_worst,
                              abs(mp.log(rt.beta[n]) - (rt.log_h[n] - rt.log_h[n - 1])))
        out.append(_residual_check(f"beta_h_ratio[{tag}]", ratio_worst,
                                   mpf(10) ** (-(rt.achieved_digits - 10))))
    return out


def _verify_specfun(quick: bool) -> list:
    out = []
    ctx = PrecisionContext(target_digits=60)
    rng = random.Random(20240815)
    count = 25 if quick else 100
    with mp.workdps(ctx.digits):
        worst = mpf(0)
        for _ in range(count):
            z = mpf(rng.uniform(0.1, 50.0))
            gap = abs(specfun.log_barnes_g(z + 1, ctx) - specfun.log_barnes_g(z, ctx)
                      - specfun.log_gamma(z, ctx))
            worst = max(worst, gap)
        out.append(_residual_check("barnes_functional_equation", worst,
                                   mpf(10) ** (-ctx.target_digits + 5)))
        series = specfun._log_barnes_series(40, ctx.digits) - specfun.log_glaisher(ctx)
        recursion = mp.fsum(mp.loggamma(j + 1) for j in range(1, 40))
        out.append(_residual_check("barnes_series_vs_recursion",
                                   abs(series - recursion), mpf(10) ** (-25)))
        cs = specfun.constants(ctx)
        out.append(_residual_check("glaisher_ten_digits",
                                   abs(mp.exp(cs.log_glaisher) - mpf("1.2824271291")),
                                   mpf(10) ** (-9)))
        out.append(_residual_check("c1_value", abs(cs.c1 - mp.log(3) / 2),
                                   mpf(10) ** (-ctx.target_digits)))
        out.append(_residual_check(
            "c3_consistency",
            abs(cs.c3 - (mp.log(3) / 8 - mp.log(2) / 6 + cs.zeta_prime_neg1)),
            mpf(10) ** (-ctx.target_digits)))
    return out


def _verify_weight(quick: bool) -> list:
    out = []
    ctx = PrecisionContext(target_digits=80)
    cases = [(0.0, 3), (1.5, 2)] if quick else [(0.0, 3), (1.5, 2), (-0.5, 5), (2.5, 1)]
    with mp.workdps(ctx.digits):
        worst_end = mpf(0)
        worst_ibp = mpf(0)
        convex_ok = True
        for lam, bigN in cases:
            for s in (0.0, 1.0):
                table = weight.moment_table(WeightSpec(lam, s, bigN), 6, ctx)
                lam_ = mpf(lam)
                for k, m in enumerate(table.values):
                    if s == 0.0:
                        closed = mp.gamma(k + lam_ + 1) / mpf(bigN) ** (k + lam_ + 1)
                    else:
                        e = (lam_ + k + 1) / 2
                        closed = mp.gamma(e) / (2 * mpf(bigN) ** e)
                    worst_end = max(worst_end, abs(m - closed) / closed)
            mid = weight.moment_table(WeightSpec(lam, 0.55, bigN), 6, ctx)
            worst_ibp = max(worst_ibp, mid.max_ibp_residual)
            for k in range(1, 6):
                if mid.values[k] ** 2 > mid.values[k - 1] * mid.values[k + 1]:
                    convex_ok = False
        out.append(_residual_check("moment_endpoint_closed_forms", worst_end,
                                   mpf(10) ** (-ctx.target_digits + 10)))
        out.append(_residual_check("moment_ibp_residuals", worst_ibp,
                                   mpf(10) ** (-ctx.target_digits + 10)))
        out.append(_bool_check("moment_log_convexity", convex_ok))
    return out


def _route_agreement(spec: WeightSpec, ctx: PrecisionContext):
    n = int(spec.bigN)
    rt = opchain.recurrence_table(spec, n + 1, ctx)
    with mp.workdps(ctx.digits):
        deform = opchain.deformation_rhs(rt, n, ctx)
        lin = opchain.linear_statistic(rt, n, ctx)
        fd = opchain.partition_log_derivative_fd(spec, ctx)
        scale = max(abs(deform), mpf(1))
        return max(abs(deform - lin), abs(deform - fd), abs(lin - fd)) / scale


def _verify_opchain(quick: bool) -> list:
    out = []
    if quick:
        s_list = [0.1, 0.5, 1.0]
        lam_list = [-0.5, 1.0, 2.5]
        n_list = [2, 5, 10]
        fd_points = [(1.0, 0.5, 5), (1.0, 1.0, 5), (-0.5, 0.1, 2)]
    else:
        s_list = [round(0.1 * i, 1) for i in range(1, 11)]
        lam_list = [-0.5, 0.0, 1.0, 2.5]
        n_list = [2, 5, 10, 20]
        fd_points = [(lam, s, n) for lam in lam_list for s in s_list for n in n_list]

    worst_string = None
    for lam in lam_list:
        for s in s_list:
            for n in n_list:
                ctx = PrecisionContext(target_digits=default_precision(n))
                rt = opchain.recurrence_table(WeightSpec(lam, s, n), n + 1, ctx)
                for res in check_table_identities(rt, ctx):
                    if not res.ok:
                        out.append(res)
                    elif res.name.startswith("string") and worst_string is None:
                        worst_string = res
    out.append(_bool_check("string_residual_grid",
                           not any(not r.ok for r in out),
                           f"{len(lam_list) * len(s_list) * len(n_list)} tables"))

    worst_route = mpf(0)
    for lam, s, n in fd_points:
        ctx = PrecisionContext(target_digits=default_precision(n))
        with mp.workdps(ctx.digits):
            worst_route = max(worst_route, _route_agreement(WeightSpec(lam, s, n), ctx))
    ctx0 = PrecisionContext(target_digits=200)
    out.append(_residual_check("deformation_route_agreement", worst_route,
                               mpf(10) ** (-ctx0.target_digits // 2)))

    # Laguerre closed forms at s=0 and the brute-force determinant route
    ctx = PrecisionContext(target_digits=120)
    with mp.workdps(ctx.digits):
        lam = mpf("0.5")
        bigN = 5
        rt = opchain.recurrence_table(WeightSpec(0.5, 0.0, bigN), 6, ctx)
        worst = mpf(0)
        for n in range(7):
            worst = max(worst, abs(rt.alpha[n] - (2 * n + lam + 1) / bigN))
            if n >= 1:
                worst = max(worst, abs(rt.beta[n] - mpf(n) * (n + lam) / bigN ** 2))
        out.append(_residual_check("laguerre_closed_forms", worst,
                                   mpf(10) ** (-(rt.achieved_digits - 10))))
        dets = mpf(0)
        for n_det in (2, 4, 6) if quick else (2, 4, 6, 8):
            spec = WeightSpec(0.5, 0.6, n_det)
            table = weight.moment_table(spec, 2 * n_det, ctx)
            rt2 = opchain.recurrence_table(spec, n_det - 1, ctx)
            dets = max(dets, abs(opchain.log_partition_determinant(table, n_det)
                                 - opchain.log_partition_from_table(rt2, n_det)))
        out.append(_residual_check("heine_determinant_route", dets,
                                   mpf(10) ** (-(ctx.target_digits - 40))))
    return out


def _verify_equilibrium(quick: bool) -> list:
    out = []
    ctx = PrecisionContext(target_digits=60)
    rng = random.Random(424242)
    with mp.workdps(ctx.digits):
        worst_mu0 = mpf(0)
        for _ in range(20):
            eq = equilibrium.equilibrium_data(mpf(rng.uniform(0.0, 1.0)), ctx)
            worst_mu0 = max(worst_mu0, abs(equilibrium.equilibrium_moment(0, eq) - 1))
        out.append(_residual_check("equilibrium_normalization", worst_mu0,
                                   mpf(10) ** (-ctx.target_digits + 10)))

        grid = [mpf(i) / 50 for i in range(51)]
        cs = [equilibrium.equilibrium_data(s, ctx).c for s in grid]
        out.append(_bool_check("endpoint_monotone_decreasing",
                               all(cs[i] > cs[i + 1] for i in range(50))))
        # the zero of the linear factor approaches -sqrt(6)/3 from the left
        # as s -> 1, with equality in the limit, hence the epsilon slack
        edge = mp.sqrt(6) / 3
        zeros_ok = True
        for s in grid[1:]:
            eq = equilibrium.equilibrium_data(s, ctx)
            if not (-eq.b / eq.a <= -edge + mpf(10) ** (-50)):
                zeros_ok = False
        out.append(_bool_check("linear_factor_zero_excluded", zeros_ok))

        eq = equilibrium.equilibrium_data(mpf("0.6"), ctx)
        z = mpf(10) ** 6
        mu2 = equilibrium.equilibrium_moment(2, eq)
        tail = abs(equilibrium.resolvent_eval(z, eq) - 1 / z)
        out.append(_residual_check("resolvent_tail_normalization", tail,
                                   3 * (1 + abs(mu2)) / z ** 2))

        x = mpf("0.8") * eq.c
        psi = equilibrium.density_eval(x, eq)
        vp = 1 + mpf(eq.s) * (2 * x - 1)
        gaps = []
        for k in (10, 20):
            epsilon = mpf(10) ** (-k)
            wm = equilibrium.resolvent_eval(x - 1j * epsilon, eq)
            wp = equilibrium.resolvent_eval(x + 1j * epsilon, eq)
            gaps.append(max(abs(wm.imag / mp.pi - psi), abs((wm + wp).real - vp)))
        out.append(_bool_check("resolvent_boundary_values",
                               bool(gaps[1] < gaps[0] / 10 ** 8 and gaps[1] < mpf(10) ** (-15)),
                               f"eps ratio {mp.nstr(gaps[0] / gaps[1], 3)}"))
    return out


def _verify_asymptotics(quick: bool) -> list:
    out = []
    ctx = PrecisionContext(target_digits=60)
    rng = random.Random(777)
    with mp.workdps(ctx.digits):
        worst = mpf(0)
        for _ in range(15 if quick else 50):
            q = mpf(rng.uniform(0.05, 2.0))
            lam = mpf(rng.uniform(-0.9, 3.0))
            s = mpf(rng.uniform(0.0, 1.0))
            ev = asymptotics.expansion_coeffs(q, lam, s, ctx)
            r1, r2 = asymptotics.leading_string_residuals(ev, ctx)
            worst = max(worst, abs(r1), abs(r2))
        out.append(_residual_check("leading_string_identities", worst,
                                   mpf(10) ** (-ctx.target_digits + 10)))

        bad = asymptotics.g0_rejected_form(1, 1, ctx)
        ev1 = asymptotics.expansion_coeffs(1, 0, 1, ctx)
        bad_res = abs(2 * mpf(1) * (2 * bad + ev1.f0 ** 2) + 0 * ev1.f0 - 2)
        out.append(_bool_check("g0_rejected_form_fails", bool(bad_res > mpf("0.1")),
                               f"residual {mp.nstr(bad_res, 3)}"))

        try:
            asymptotics.dlogz_integrals(1.0 if quick else 2.0, ctx)
            out.append(_bool_check("dlogz_closed_vs_quadrature", True))
        except VerificationError as exc:
            out.append(_bool_check("dlogz_closed_vs_quadrature", False, str(exc)))

        worst = mpf(0)
        for lam, n in ((0.0, 4), (1.5, 6)) if quick else ((0.0, 4), (1.5, 6), (-0.5, 8), (3.0, 5)):
            hctx = PrecisionContext(target_digits=150)
            lue = asymptotics.log_z_lue_exact(n, lam, hctx)
            spec = WeightSpec(lam, 0.0, n)
            hank = opchain.log_partition(spec, n, hctx)
            worst = max(worst, abs(lue - hank))
        out.append(_residual_check("reference_halfline_vs_hankel", worst,
                                   mpf(10) ** (-100)))

        worst = mpf(0)
        for lam, n in ((0.0, 4), (1.5, 5)) if quick else ((0.0, 4), (1.5, 5), (2.5, 8), (-0.5, 7)):
            hctx = PrecisionContext(target_digits=120)
            worst = max(worst, abs(asymptotics.log_z_ggue_exact(n, lam, hctx)
                                   - asymptotics.log_z_ggue_hankel(n, lam, hctx)))
        out.append(_residual_check("reference_fullline_vs_hankel", worst,
                                   mpf(10) ** (-80)))

        worst = mpf(0)
        for n in (2, 4, 6):
            hctx = PrecisionContext(target_digits=100)
            worst = max(worst, abs(asymptotics.log_z_ggue_exact(n, 1.5, hctx)
                                   - asymptotics.log_z_ggue_barnes(n, 1.5, hctx)))
        out.append(_residual_check("fullline_gamma_vs_barnes", worst, mpf(10) ** (-80)))

        if not quick:
            ratios_ok = True
            note = []
            for lam in (0.0, 1.0, 2.5):
                hctx = PrecisionContext(target_digits=120)
                for exact_fn, asym_fn in (
                        (asymptotics.log_z_lue_exact, asymptotics.log_z_lue_asymptotic),
                        (asymptotics.log_z_ggue_exact, asymptotics.log_z_ggue_asymptotic)):
                    errs = {n: abs(exact_fn(n, lam, hctx) - asym_fn(n, lam, hctx))
                            for n in (10, 20, 40)}
                    for a, b in ((10, 20), (20, 40)):
                        r = errs[a] / errs[b]
                        if not 3 <= r <= 5:
                            ratios_ok = False
                            note.append(f"lam={lam} {a}->{b}: {mp.nstr(r, 4)}")
            out.append(_bool_check("reference_asymptotic_decay", ratios_ok,
                                   "; ".join(note) or "all ratios in [3,5]"))

        worst = mpf(0)
        for z in (mpf(1), mpf("0.5"), mpf("1.7")):
            worst = max(worst, asymptotics.gamma_hankel_det_residual(z, 4, ctx))
        out.append(_residual_check("gamma_hankel_identity", worst,
                                   mpf(10) ** (-ctx.target_digits + 10)))

        worst = mpf(0)
        for lam in (0.0, 1.0, 2.0):
            ia, ib, ic = asymptotics.dlogz_integrals(lam, ctx, verify=False)
            lue = asymptotics.log_z_lue_asymptotic_coefficients(lam, ctx)
            ggue = asymptotics.log_z_ggue_asymptotic_coefficients(lam, ctx)
            thm = asymptotics.log_positivity_coefficients(lam, ctx)
            worst = max(worst,
                        abs(ia + lue["n2"] - ggue["n2"] - thm["n2"]),
                        abs(lue["nlogn"] - ggue["nlogn"]),
                        abs(ib + lue["n"] - ggue["n"] - thm["n"]),
                        abs(lue["logn"] - ggue["logn"] - thm["logn"]),
                        abs(ic + lue["const"] - ggue["const"] - thm["const"]))
        out.append(_residual_check("assembly_identity", worst, mpf(10) ** (-25)))

        cs = specfun.constants(ctx)
        thm0 = asymptotics.log_positivity_coefficients(0.0, ctx)
        red = max(abs(thm0["n2"] + mp.log(3) / 2), abs(thm0["n"]),
                  abs(thm0["logn"] + mpf(1) / 12), abs(thm0["const"] - cs.c3))
        out.append(_residual_check("lam0_reduction", red,
                                   mpf(10) ** (-ctx.target_digits + 10)))
    return out


def _verify_positivity(quick: bool) -> list:
    out = []
    ctx = PrecisionContext(target_digits=80)
    with mp.workdps(ctx.digits):
        worst = mpf(0)
        for lam in (0.0, 1.7):
            spec = WeightSpec(lam, 1.0, 1)
            lp = (opchain.log_partition(spec, 1, ctx)
                  - asymptotics.log_z_ggue_exact(1, lam, ctx))
            worst = max(worst, abs(lp + mp.log(2)))
        out.append(_residual_check("n1_half_probability", worst,
                                   mpf(10) ** (-ctx.target_digits + 10)))
    if not quick:
        rows = {}
        for n in (20, 40):
            r = positivity_result(0.0, n, default_precision(n))
            rows[n] = r.abs_error
        with mp.workdps(60):
            ok = bool(rows[40] < rows[20] and rows[40] > 0)
            out.append(_bool_check("figure_row_n40",
                                   ok, f"abs_error(40)={mp.nstr(rows[40], 3)}"))
    return out


def run_verification(quick: bool, stream=None) -> bool:
    stream = stream or sys.stdout
    t0 = time.monotonic()
    results = []
    for block in (_verify_specfun, _verify_weight, _verify_opchain,
                  _verify_equilibrium, _verify_asymptotics, _verify_positivity):
        results.extend(block(quick))
    ok = all(r.ok for r in results)
    for r in results:
        stream.write(f"[{'PASS' if r.ok else 'FAIL'}] {r.name}: "
                     f"measured={r.measured} tol={r.tol}\n")
    stream.write(f"{'PASS' if ok else 'FAIL'}: {sum(r.ok for r in results)}/"
                 f"{len(results)} checks in {time.monotonic() - t0:.1f}s "
                 f"({'quick' if quick else 'full'} mode)\n")
    return ok


def cmd_verify(quick: bool) -> int:
    return 0 if run_verification(quick) else 1


# --- argument plumbing ---

def _add_common(p, default_lambdas, n_defaults):
    p.add_argument("--lambda", dest="lambdas", type=float, action="append",
                   help="a lambda value (repeatable)")
    p.add_argument("--lambdas", dest="lambda_list", type=str, default=None,
                   help="comma-separated lambda values")
    p.add_argument("--n", type=int, default=None, help="a single N")
    p.add_argument("--n-min", type=int, default=n_defaults[0])
    p.add_argument("--n-max", type=int, default=n_defaults[1])
    p.add_argument("--n-step", type=int, default=n_defaults[2])
    p.add_argument("--precision", type=int, default=None,
                   help="decimal digits (default max(200, 12*N_max); "
                        "env GGUE_PD_PRECISION overrides the default)")
    p.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    p.add_argument("--out", dest="output_path", default="-")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(default_lambdas=default_lambdas)


def _resolve_config(args) -> RunConfig:
    lambdas = list(args.lambdas or [])
    if args.lambda_list:
        lambdas.extend(float(tok) for tok in args.lambda_list.split(","))
    if not lambdas:
        lambdas = list(args.default_lambdas)
    if args.n is not None:
        n_range = (args.n, args.n, 1)
    else:
        n_range = (args.n_min, args.n_max, args.n_step)
    precision = args.precision
    if precision is None and os.environ.get("GGUE_PD_PRECISION"):
        precision = int(os.environ["GGUE_PD_PRECISION"])
    if precision is None:
        precision = default_precision(n_range[1])
    return RunConfig(precision=precision, lambdas=tuple(lambdas), n_range=n_range,
                     s=getattr(args, "s", 1.0), output_path=args.output_path,
                     fmt=args.fmt, jobs=args.jobs)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ggue-pd",
        description="Positive-definiteness probabilities for generalised-GUE "
                    "random matrices, exact and asymptotic, at arbitrary precision.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("positivity", help="exact and asymptotic log P(M_N > 0)")
    _add_common(p, (0.0,), (4, 12, 4))

    p = sub.add_parser("figure1", help="error-decay reproduction grid")
    _add_common(p, (0.0, 1.0, 2.0), (4, 40, 4))

    p = sub.add_parser("coeffs", help="recurrence coefficients and residuals")
    _add_common(p, (0.0,), (8, 8, 1))
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--coeff-n-max", type=int, default=None,
                   help="largest coefficient index to print (default N)")

    p = sub.add_parser("partition", help="log Z_N(s)")
    _add_common(p, (0.0,), (4, 8, 4))
    p.add_argument("--s", type=float, default=1.0)

    p = sub.add_parser("verify", help="run the invariant suite")
    p.add_argument("--quick", action="store_true",
                   help="cap N at 10 and grids at 3 points per axis")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "verify":
            return cmd_verify(args.quick)
        config = _resolve_config(args)
        if args.command == "positivity":
            return cmd_positivity(config)
        if args.command == "figure1":
            return cmd_figure1(config)
        if args.command == "partition":
            return cmd_partition(config)
        if args.command == "coeffs":
            if args.coeff_n_max is not None and args.coeff_n_max < 1:
                raise ValueError("coeff-n-max must be at least 1")
            n_max = (args.coeff_n_max if args.coeff_n_max is not None
                     else config.n_values()[0])
            return cmd_coeffs(config, n_max)
        raise ValueError(f"unknown command {args.command}")
    except (OSError, ValueError, VerificationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PrecisionNotConverged as exc:
        print(f"precision not converged: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
