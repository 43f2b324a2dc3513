"""Doubly-exponential quadrature on the half line, specialized to the weight
x^lam * exp(-N*(x + s*(x^2 - x))).

After the substitution x = e^t the integrals become integrals over the whole
real line of smooth, doubly-exponentially decaying integrands; we then apply
the sinh-sinh rule t_j = sinh(2u)/2, u = (pi/2) sinh(j h).  Refinement halves
h and only evaluates the new (odd-index) nodes, so the trapezoid sums telescope.

The expensive part at a few hundred digits is mpf exp().  Two measures keep the
node count small:

* nodes are cached per (dps, level) and shared by every integral at that
  precision, including across weights;
* the integration window is clipped analytically: in float arithmetic we solve
  for the t beyond which the integrand argument sits `drop` nats below its
  peak, so the doubly-exponential tails are never evaluated at all.
"""

from __future__ import annotations

import math
import threading

from mpmath import mp, mpf

from .errors import PrecisionNotConverged

# (dps, level) -> list of (t_float, t, w, e^t, e^-t); base level stores j=0,1,2,...,
# refinement levels store only odd j.  Guarded by _nodes_lock for appends.
_nodes: dict = {}
_nodes_lock = threading.Lock()

_BASE_LEVEL = 8
_MAX_LEVEL = 15


def _extend_nodes(dps: int, level: int, lst: list, upto: int, base: bool) -> None:
    with mp.workdps(dps + 10):
        h = mpf(2) ** (-level)
        piq = mp.pi / 2
        for i in range(len(lst), upto):
            j = i if base else 2 * i + 1
            u = piq * mp.sinh(j * h)
            t = mp.sinh(2 * u) / 2
            tf = float(t) if abs(t) < mpf(10) ** 300 else math.copysign(1e300, t)
            w = h * piq * mp.cosh(j * h) * mp.cosh(2 * u)
            if abs(tf) < 1e7:
                et = mp.exp(t)
                lst.append((tf, t, w, et, 1 / et))
            else:
                # beyond any realistic cutoff; stored as a sentinel terminator
                lst.append((tf, t, w, None, None))


def _ensure_nodes(dps: int, level: int, upto: int, base: bool) -> list:
    key = (dps, level)
    with _nodes_lock:
        lst = _nodes.setdefault(key, [])
        if len(lst) < upto:
            _extend_nodes(dps, level, lst, upto, base)
    return lst


def _peak_log(lam: float, s: float, bigN: int, k: float):
    """Float location (in t) and log-magnitude of the peak of
    exp((lam+1+k)t - N V(e^t; s))."""
    c = lam + 1 + k
    # conjugate form of the positive quadratic root: stable for every
    # s in [0, 1], including s so small that 8Nsc underflows the N^2 term
    y = 2 * c / (bigN * (1 - s) + math.sqrt(bigN * bigN * (1 - s) ** 2 + 8 * bigN * s * c))
    t = math.log(y)
    return t, c * t - bigN * (y + s * (y * y - y))


def _dead_cutoff(lam: float, s: float, bigN: int, k: float, drop: float, side: int) -> float:
    """Float t beyond which the integrand argument is `drop` nats below its peak."""
    c = lam + 1 + k
    tpk, apk = _peak_log(lam, s, bigN, k)
    target = apk - drop

    def f(t: float) -> float:
        if t > 600.0:
            return -1e308
        return c * t - bigN * (math.exp(t) + s * (math.exp(2 * t) - math.exp(t))) - target

    if side < 0:
        lo = min(tpk, target / c) - 5.0
        hi = tpk
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if f(mid) < 0:
                lo = mid
            else:
                hi = mid
        return lo
    lo = tpk
    hi = tpk + 1.0
    while f(hi) > 0:
        hi = tpk + (hi - tpk) * 2
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return hi


def _sweep(dps, level, base, cut_lo, cut_hi, visit) -> None:
    """Call visit(t, x, w) for every node of the level inside [cut_lo, cut_hi]."""
    i = 0
    lst = _ensure_nodes(dps, level, 32, base)
    alive_pos = alive_neg = True
    while alive_pos or alive_neg:
        if i >= len(lst):
            lst = _ensure_nodes(dps, level, i + 32, base)
        tf, t, w, et, emt = lst[i]
        if et is None:
            break
        if alive_pos and tf <= cut_hi:
            visit(t, et, w)
        elif tf > cut_hi:
            alive_pos = False
        if (not base or i > 0) and alive_neg and -tf >= cut_lo:
            visit(-t, emt, w)
        elif -tf < cut_lo:
            alive_neg = False
        i += 1


def moment_sums(lam, s, bigN, K, dps, target, base_level=_BASE_LEVEL, max_level=_MAX_LEVEL):
    """Moments m_0..m_K of x^lam exp(-N(x+s(x^2-x))) on (0, inf), as a list of mpf.

    Converges when two successive levels agree to 10^-target in relative terms
    for every k simultaneously (high k moments localize further out and settle
    at deeper levels than low k).
    """
    lam_f, s_f = float(lam), float(s)
    drop = (dps + 45) * math.log(10)
    cut_lo = _dead_cutoff(lam_f, s_f, bigN, 0, drop, -1)
    cut_hi = _dead_cutoff(lam_f, s_f, bigN, K, drop, +1)
    with mp.workdps(dps + 10):
        lam1, s_, n_ = mpf(lam) + 1, mpf(s), mpf(bigN)
        tol = mpf(10) ** (-target)

        def level_sums(level: int, base: bool):
            sums = [mpf(0)] * (K + 1)

            def visit(t, x, w):
                p = w * mp.exp(lam1 * t - n_ * (x + s_ * (x * x - x)))
                for k in range(K):
                    sums[k] += p
                    p = p * x
                sums[K] += p

            _sweep(dps, level, base, cut_lo, cut_hi, visit)
            return sums

        sums = level_sums(base_level, True)
        lvl = base_level
        while lvl < max_level:
            lvl += 1
            new = level_sums(lvl, False)
            prev = sums
            sums = [prev[k] / 2 + new[k] for k in range(K + 1)]
            worst = max(abs(sums[k] - prev[k]) / sums[k] for k in range(K + 1))
            if worst <= tol:
                return sums
        raise PrecisionNotConverged(
            f"moment quadrature stalled at level {max_level} "
            f"(lam={lam}, s={s}, N={bigN}, K={K}, dps={dps})")


def weighted_integral(fn, lam, s, bigN, degree, dps, target,
                      base_level=_BASE_LEVEL, max_level=_MAX_LEVEL):
    """integral of fn(x) * x^lam * exp(-N(x+s(x^2-x))) over (0, inf).

    fn must be bounded near 0 and grow no faster than x^degree at infinity;
    it receives mpf arguments at working precision.  fn may change sign, so
    convergence is judged against the accumulated absolute mass: the result
    carries an absolute error of order 10^-target times that mass.
    """
    lam_f, s_f = float(lam), float(s)
    # degree+N digits of extra clearance: polynomial factors of degree ~2N can
    # contribute up to ~N*log(2) nats near the right cutoff
    drop = (dps + 45 + bigN) * math.log(10)
    cut_lo = _dead_cutoff(lam_f, s_f, bigN, 0, drop, -1)
    cut_hi = _dead_cutoff(lam_f, s_f, bigN, degree, drop, +1)
    with mp.workdps(dps + 10):
        lam1, s_, n_ = mpf(lam) + 1, mpf(s), mpf(bigN)
        tol = mpf(10) ** (-target)

        def level_sums(level: int, base: bool):
            acc = [mpf(0), mpf(0)]  # signed sum, absolute sum

            def visit(t, x, w):
                v = fn(x) * w * mp.exp(lam1 * t - n_ * (x + s_ * (x * x - x)))
                acc[0] += v
                acc[1] += abs(v)

            _sweep(dps, level, base, cut_lo, cut_hi, visit)
            return acc

        total, mass = level_sums(base_level, True)
        lvl = base_level
        while lvl < max_level:
            lvl += 1
            n_total, n_mass = level_sums(lvl, False)
            prev = total
            total = prev / 2 + n_total
            mass = mass / 2 + n_mass
            if abs(total - prev) <= tol * max(abs(total), mass):
                return total
        raise PrecisionNotConverged(
            f"weighted quadrature stalled at level {max_level} "
            f"(lam={lam}, s={s}, N={bigN}, degree={degree}, dps={dps})")
