"""Entropy and contraction at infinity.

Counts the (n+1)-cylinders whose word starts and ends in the low part of the
alphabet (order index <= q) while visiting it rarely, and fits the growth
rates that estimate the entropy at infinity and its weighted analogue.

Counting convention: the low-visit cardinality ranges over the first n
coordinates of the (n+1)-word, i.e. exactly the window where the length-n
Birkhoff sum collects its terms, compared exactly as count * M <= n + 1.
Counts are arbitrary-precision integers; ratios and slopes live in log space.
On bouquets with q = 1 the counting is a loop-length composition DP, so large
families never enumerate states.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .numerics import LOG_ZERO, linear_fit
from .potential import Potential
from .shift import (BouquetShift, EnumerationRefusal, LoopCountFamily,
                    TransitionSystem, enumerate_words)
from .thermo import _edge_logweight

__all__ = [
    "CountB", "InfinityProfile",
    "count_B", "count_B_bruteforce", "hinf_profile", "delta_profile",
    "bouquet_hinf_oracle",
]


@dataclass(frozen=True)
class CountB:
    count: int
    log_count: float
    z_phi: float | None  # max (1/n) S_n phi over the counted cylinders

    @classmethod
    def empty(cls, with_phi: bool) -> "CountB":
        return cls(0, LOG_ZERO, LOG_ZERO if with_phi else None)


def _visits_ok(visits: int, n: int, M: int) -> bool:
    return visits * M <= n + 1


# -- composition DP (bouquet, q = 1) ---------------------------------------------

def _composition_counts(T: BouquetShift, N: int) -> list[list[int]]:
    """cnt[j][m] = weighted number of loop-length compositions of m into j parts."""
    jmax = N + 1
    lengths = [k for k in T.loop_lengths() if k <= N]
    a = {k: T.a.count(k) for k in lengths}
    cnt = [[0] * (N + 1) for _ in range(jmax + 1)]
    cnt[0][0] = 1
    for j in range(1, jmax + 1):
        row, prev = cnt[j], cnt[j - 1]
        for m in range(1, N + 1):
            s = 0
            for k in lengths:
                if k > m:
                    break
                p = prev[m - k]
                if p:
                    s += a[k] * p
            row[m] = s
    return cnt


def _composition_best(T: BouquetShift, loop_total, N: int) -> list[list[float]]:
    """best[j][m] = max total loop weight over compositions of m into j parts."""
    jmax = N + 1
    lengths = [k for k in T.loop_lengths() if k <= N]
    tau = {k: loop_total(k) for k in lengths}
    best = [[LOG_ZERO] * (N + 1) for _ in range(jmax + 1)]
    best[0][0] = 0.0
    for j in range(1, jmax + 1):
        row, prev = best[j], best[j - 1]
        for m in range(1, N + 1):
            b = LOG_ZERO
            for k in lengths:
                if k > m:
                    break
                p = prev[m - k]
                if p != LOG_ZERO:
                    cand = p + tau[k]
                    if cand > b:
                        b = cand
            row[m] = b
    return best


def _count_B_composition(T: BouquetShift, phi: Potential | None,
                         n: int, M: int,
                         cnt: list[list[int]] | None = None,
                         best: list[list[float]] | None = None) -> CountB:
    # root-anchored words decompose into complete loops; a composition with j
    # parts visits the root at positions 0 and after every part except the
    # final one inside the first n coordinates, i.e. j low visits.
    if cnt is None:
        cnt = _composition_counts(T, n)
    total = 0
    for j in range(1, n + 1):
        if _visits_ok(j, n, M) and j < len(cnt):
            total += cnt[j][n]
    zphi = None
    if phi is not None:
        if phi.loop_total is None:
            raise EnumerationRefusal(
                "the composition route needs per-loop total weights on the potential")
        if best is None:
            best = _composition_best(T, phi.loop_total, n)
        zbest = LOG_ZERO
        for j in range(1, n + 1):
            if _visits_ok(j, n, M) and j < len(best) and best[j][n] != LOG_ZERO:
                if best[j][n] > zbest:
                    zbest = best[j][n]
        zphi = zbest / n if zbest != LOG_ZERO else LOG_ZERO
    log_count = math.log(total) if total else LOG_ZERO
    if total == 0 and zphi is not None:
        zphi = LOG_ZERO
    return CountB(total, log_count, zphi)


# -- state DP (finite systems, any q) ----------------------------------------------

_STATE_DP_CAP = 4000


def _count_B_state_dp(T: TransitionSystem, phi: Potential | None,
                      n: int, M: int, q: int) -> CountB:
    if T.state_count() > _STATE_DP_CAP:
        raise EnumerationRefusal(
            f"state DP capped at {_STATE_DP_CAP} states; only bouquets with "
            "q = 1 scale beyond (composition route)")
    states = list(T.states())
    idx = {s: i for i, s in enumerate(states)}
    low = [T.order_index(s) <= q for s in states]
    vmax = (n + 1) // M
    if vmax < 1:
        return CountB.empty(phi is not None)
    succ = {i: [(idx[t], _edge_logweight(phi, s, t) if phi is not None else 0.0)
                for t in T.successors(s)]
            for i, s in enumerate(states)}
    S = len(states)
    # dp[v][i]: paths of the current length ending at state i having made v
    # low visits among the coordinates consumed so far (positions 0..k-1 plus
    # the current endpoint, which will only count once it stops being final)
    cnt = [[0] * S for _ in range(vmax + 1)]
    best = [[LOG_ZERO] * S for _ in range(vmax + 1)] if phi is not None else None
    for i in range(S):
        if low[i]:
            v = 1
            if v <= vmax:
                cnt[v][i] = 1
                if best is not None:
                    best[v][i] = 0.0
    for _step in range(n):
        ncnt = [[0] * S for _ in range(vmax + 1)]
        nbest = [[LOG_ZERO] * S for _ in range(vmax + 1)] if phi is not None else None
        final = _step == n - 1
        for v in range(vmax + 1):
            row = cnt[v]
            for i in range(S):
                c = row[i]
                b = best[v][i] if best is not None else LOG_ZERO
                if not c and (best is None or b == LOG_ZERO):
                    continue
                for j, w in succ[i]:
                    nv = v + (1 if (low[j] and not final) else 0)
                    if nv > vmax:
                        continue
                    if c:
                        ncnt[nv][j] += c
                    if best is not None and b != LOG_ZERO:
                        cand = b + w
                        if cand > nbest[nv][j]:
                            nbest[nv][j] = cand
        cnt, best = ncnt, nbest
    total = 0
    zbest = LOG_ZERO
    for v in range(vmax + 1):
        for i in range(S):
            if low[i]:
                total += cnt[v][i]
                if best is not None and best[v][i] > zbest:
                    zbest = best[v][i]
    zphi = None
    if phi is not None:
        zphi = zbest / n if (zbest != LOG_ZERO and total) else LOG_ZERO
    return CountB(total, math.log(total) if total else LOG_ZERO, zphi)


def count_B(T: TransitionSystem, phi: Potential | None, n: int, M: int, q: int) -> CountB:
    """Count length-(n+1) cylinders with low endpoints and rare low visits.

    Returns the exact count, its log, and (when a potential is given) the
    maximum of (1/n) S_n phi over the counted cylinders, exact for potentials
    of memory <= 2.
    """
    if n < 1 or M < 1:
        raise ValueError("n and M must be >= 1")
    if q <= 0:
        return CountB.empty(phi is not None)
    if isinstance(T, BouquetShift) and q == 1 \
            and (phi is None or phi.loop_total is not None):
        return _count_B_composition(T, phi, n, M)
    return _count_B_state_dp(T, phi, n, M, q)


def count_B_bruteforce(T: TransitionSystem, phi: Potential | None,
                       n: int, M: int, q: int, limit: int = 2_000_000) -> CountB:
    """Reference implementation by word enumeration (oracle for the DPs)."""
    if q <= 0:
        return CountB.empty(phi is not None)
    lowset = set(T.states_up_to(q))
    words = enumerate_words(T, n + 1,
                            start=lambda s: s in lowset,
                            end=lambda s: s in lowset, limit=limit)
    if not words.exhaustive:
        raise EnumerationRefusal("brute-force cylinder count hit its limit")
    total = 0
    zbest = LOG_ZERO
    for w in words:
        visits = sum(1 for k in range(n) if w[k] in lowset)
        if not _visits_ok(visits, n, M):
            continue
        total += 1
        if phi is not None:
            s = math.fsum(_edge_logweight(phi, w[i], w[i + 1]) for i in range(n))
            zbest = max(zbest, s / n)
    zphi = (zbest if total else LOG_ZERO) if phi is not None else None
    return CountB(total, math.log(total) if total else LOG_ZERO, zphi)


# -- profiles -------------------------------------------------------------------------

@dataclass
class InfinityProfile:
    """Grid of boundary-cylinder data with per-(M, q) tail fits.

    rows hold (n, M, q, count, log_count, z_phi); the headline estimate is the
    fitted slope at the largest grid point (max q, then max M), whose reported
    uncertainty adds half the gap to the neighbouring M-slope as a
    finite-M term.  For the contraction profile the estimate is the maximum
    window value of z_phi at the largest grid point.
    """

    kind: str  # 'entropy' | 'contraction'
    rows: list[tuple]
    fits: dict
    estimate: float
    uncertainty: float
    window: tuple[int, int]
    monotone_M_violations: list[tuple] = field(default_factory=list)
    q_diagnostics: list[tuple] = field(default_factory=list)
    pressure: float | None = None
    band: float | None = None
    ci_verdict: str | None = None

    def cell(self, n: int, M: int, q: int) -> tuple:
        for row in self.rows:
            if row[0] == n and row[1] == M and row[2] == q:
                return row
        raise KeyError((n, M, q))

    def slope(self, M: int, q: int):
        return self.fits[(M, q)]

    def estimate_at_q(self, q: int) -> float:
        """Iterated-limit estimate at fixed q: the value at the largest M."""
        Ms = [m for (m, qq) in self.fits if qq == q]
        if not Ms:
            raise KeyError(q)
        fit = self.fits[(max(Ms), q)]
        return fit.slope if hasattr(fit, "slope") else fit[0]


def _profile_window(N: int, min_points: int = 4) -> list[int]:
    start = max(1, int(math.ceil(0.75 * N)))
    if N - start + 1 < min_points:
        start = max(1, N - min_points + 1)
    return list(range(start, N + 1))


def _grid_rows(T, phi, q_list, M_list, N):
    rows = []
    comp_tables = {}
    for q in q_list:
        use_comp = (isinstance(T, BouquetShift) and q == 1
                    and (phi is None or phi.loop_total is not None))
        if use_comp and "cnt" not in comp_tables:
            comp_tables["cnt"] = _composition_counts(T, N)
            if phi is not None:
                comp_tables["best"] = _composition_best(T, phi.loop_total, N)
        for M in M_list:
            for n in range(1, N + 1):
                if use_comp:
                    cb = _count_B_composition(T, phi, n, M,
                                              cnt=comp_tables["cnt"],
                                              best=comp_tables.get("best"))
                else:
                    cb = _count_B_state_dp(T, phi, n, M, q)
                rows.append((n, M, q, cb.count, cb.log_count, cb.z_phi))
    return rows


def _monotone_M_check(rows, q_list, M_list, N):
    violations = []
    Ms = sorted(M_list)
    table = {(r[0], r[1], r[2]): r[3] for r in rows}
    for q in q_list:
        for n in range(1, N + 1):
            for lo, hi in zip(Ms, Ms[1:]):
                if table[(n, hi, q)] > table[(n, lo, q)]:
                    violations.append((n, lo, hi, q))
    return violations


def _q_direction_diagnostics(rows, q_list, M_list, N):
    """Cells where the count grows with q at fixed (n, M).

    The limiting rates are non-increasing in q, but finite-horizon counts need
    not be; these are reported for inspection, never asserted.
    """
    notes = []
    qs = sorted(q_list)
    table = {(r[0], r[1], r[2]): r[3] for r in rows}
    for M in M_list:
        for n in range(1, N + 1):
            for lo, hi in zip(qs, qs[1:]):
                if table[(n, M, hi)] > table[(n, M, lo)]:
                    notes.append((n, M, lo, hi))
    return notes


def hinf_profile(T: TransitionSystem, q_list: Sequence[int],
                 M_list: Sequence[int], N: int) -> InfinityProfile:
    """Fill the (n, M, q) grid of cylinder counts and fit tail growth rates.

    The per-(M, q) slope is a least-squares fit of log z_n over the top
    quarter of the horizon (the count cap is locally stable there, which a
    half-horizon window is not).  The headline entropy-at-infinity estimate is
    the slope at the largest (q, M); its uncertainty includes the spread to
    the neighbouring M as a finite-M proxy.
    """
    if not q_list or not M_list:
        raise ValueError("grids must be non-empty")
    if N < 4:
        raise ValueError("horizon too small to fit")
    rows = _grid_rows(T, None, q_list, M_list, N)
    window = _profile_window(N)
    fits = {}
    for q in q_list:
        for M in M_list:
            ys = [r[4] for r in rows if r[1] == M and r[2] == q and r[0] in window]
            fits[(M, q)] = linear_fit(window, ys)
    qmax, Mmax = max(q_list), max(M_list)
    head = fits[(Mmax, qmax)]
    estimate = head.slope
    unc = head.uncertainty
    others = sorted(M_list)
    if len(others) > 1:
        prev = others[-2]
        gap = abs(fits[(prev, qmax)].slope - estimate)
        unc += 0.5 * gap
    if head.degenerate:
        estimate, unc = LOG_ZERO, math.inf
        if all(r[3] == 0 for r in rows if r[1] == Mmax and r[2] == qmax):
            unc = 0.0  # empty at every n: nothing at infinity
    return InfinityProfile("entropy", rows, fits, estimate, unc,
                           (window[0], window[-1]),
                           _monotone_M_check(rows, q_list, M_list, N),
                           _q_direction_diagnostics(rows, q_list, M_list, N))


def delta_profile(T: TransitionSystem, phi: Potential, q_list: Sequence[int],
                  M_list: Sequence[int], N: int, P: float = 0.0,
                  tol: float = 1e-9) -> InfinityProfile:
    """Weighted profile: z_phi grid, contraction-at-infinity estimate, and the
    contraction verdict (estimate + band < P).

    The estimate is the maximum z_phi over the fit window at the largest
    (q, M) grid point; the band is the window spread.  An empty grid cell
    yields the verdict 'no-evidence' rather than a vacuous pass.
    """
    if not q_list or not M_list:
        raise ValueError("grids must be non-empty")
    if N < 4:
        raise ValueError("horizon too small to fit")
    rows = _grid_rows(T, phi, q_list, M_list, N)
    window = _profile_window(N)
    fits = {}
    for q in q_list:
        for M in M_list:
            zs = [r[5] for r in rows if r[1] == M and r[2] == q and r[0] in window]
            finite = [z for z in zs if z is not None and math.isfinite(z)]
            fits[(M, q)] = (max(finite) if finite else LOG_ZERO,
                            (max(finite) - min(finite)) if finite else math.inf)
    qmax, Mmax = max(q_list), max(M_list)
    estimate, band = fits[(Mmax, qmax)]
    if estimate == LOG_ZERO:
        verdict = "no-evidence"
        band = math.inf
    elif estimate + band < P - tol:
        verdict = "holds"
    elif estimate - band > P + tol:
        verdict = "fails"
    else:
        verdict = "inconclusive"
    return InfinityProfile("contraction", rows, fits, estimate,
                           band if math.isfinite(band) else math.inf,
                           (window[0], window[-1]),
                           _monotone_M_check(rows, q_list, M_list, N),
                           _q_direction_diagnostics(rows, q_list, M_list, N),
                           pressure=P, band=band, ci_verdict=verdict)


def bouquet_hinf_oracle(a: LoopCountFamily) -> float:
    """Closed-form limsup (1/n) log a(n) for the supported loop-count forms.

    Geometric families give log(ratio), the all-ones family 0, the
    double-exponential family +infinity; finite lists report the maximum of
    (1/n) log a(n) over their support (a finite-support limsup proxy).
    """
    return a.growth_rate()
