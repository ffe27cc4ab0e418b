"""Verification checks, grouped by tier.

``exact`` checks compare closed forms with exhaustive enumeration and with
each other. ``statistical`` checks run seeded Monte Carlo experiments against
budgets fixed in advance. Each check reports an observed value, its budget and
a verdict. Functions are looked up on their modules at call time, so a
patched formula shows up as a failing check.
"""

from __future__ import annotations

import io
import math
import zlib
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import formulas, limitdist, montecarlo, oracle, specfun
from .core import STATISTICS


@dataclass(frozen=True)
class Check:
    name: str
    observed: float
    budget: str
    passed: bool
    note: str = ""

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        extra = f"  ({self.note})" if self.note else ""
        return f"{self.name:<44} observed={self.observed:<12.6g} budget={self.budget:<22} {verdict}{extra}"


def _le(name, observed, limit, note=""):
    return Check(name, float(observed), f"<= {limit:g}", bool(observed <= limit), note)


def derive_seed(seed: int, *parts) -> int:
    tag = zlib.crc32(repr(parts).encode())
    return int(np.random.SeedSequence([seed, tag]).generate_state(1, np.uint64)[0])


class Runs:
    """Memoized experiments so criteria sharing a configuration share one run."""

    def __init__(self, seed: int, workers: int = 1):
        self.seed = seed
        self.workers = workers
        self._cache = {}

    def get(self, theta, n, replicates, extremal=False):
        key = (float(theta), int(n), int(replicates), bool(extremal))
        if key not in self._cache:
            cfg = montecarlo.ExperimentConfig(
                theta, n, replicates, derive_seed(self.seed, *key), extremal=extremal
            )
            self._cache[key] = montecarlo.run_experiment(cfg, self.workers)
        return self._cache[key]


# Exact tier

THETAS_EQUIV = (0.5, 1.0, 2.0, 5.0)
THETAS = (0.5, 1.0, 2.0)


def check_depth_law_equivalence():
    worst = 0.0
    for theta in THETAS_EQUIV:
        for n in range(2, 10):
            a = oracle.exact_distribution(theta, n, "depth_last")
            b = formulas.depth_pmf_exact(theta, n)
            worst = max(worst, a.tv_distance(b))
    return [_le("C1 depth law = Bernoulli sum (TV)", worst, 1e-12)]


def check_moment_identities():
    errs = {k: 0.0 for k in ("depth", "leaves", "ipl", "subtree", "ancestor")}
    for theta in THETAS:
        for n in range(2, 10):
            dm = formulas.depth_moments(theta, n)
            errs["depth"] = max(
                errs["depth"],
                abs(dm.mean - oracle.exact_moment(theta, n, "depth_last")),
                abs(dm.variance - oracle.exact_variance(theta, n, "depth_last")),
            )
            errs["leaves"] = max(
                errs["leaves"],
                abs(formulas.leaf_mean_exact(theta, n) - oracle.exact_moment(theta, n, "leaves")),
                abs(formulas.leaf_var_exact(theta, n) - oracle.exact_variance(theta, n, "leaves")),
            )
            errs["ipl"] = max(errs["ipl"], abs(formulas.ipl_mean_exact(theta, n) - oracle.exact_moment(theta, n, "ipl")))
            sub = oracle.exact_distribution(theta, n, "subtree2")
            f_sub = formulas.subtree_pmf_exact(theta, n)
            errs["subtree"] = max(errs["subtree"], 2 * sub.tv_distance(f_sub))
            for i in range(2, n):
                p, d = formulas.ancestor_stats(theta, i, n)
                po, do = oracle.exact_ancestor_stats(theta, i, n)
                errs["ancestor"] = max(errs["ancestor"], abs(p - po), abs(d - do))
    return [_le(f"C2 {k} closed form vs enumeration", v, 1e-10) for k, v in errs.items()]


def check_martingales():
    z_worst = x_worst = d_worst = 0.0
    for theta in THETAS:
        for n in range(3, 9):
            z, x = oracle.martingale_residuals(theta, n)
            z_worst, x_worst = max(z_worst, z), max(x_worst, x)
            d_worst = max(d_worst, oracle.conditional_depth_residual(theta, n))
    return [
        _le("C3 path-length martingale residual", z_worst, 1e-12),
        _le("C3 leaf martingale residual", x_worst, 1e-12),
        _le("C3 conditional depth identity", d_worst, 1e-12),
    ]


def check_leaf_variance_asymptotics():
    worst = 0.0
    for theta in THETAS:
        for n in range(10, 1001):
            worst = max(worst, abs(formulas.leaf_var_exact(theta, n) - (theta + n - 1) / 12) * n)
    return [_le("C4 n |Var L_n - (theta+n-1)/12|", worst, 2.0)]


def check_poisson_decay():
    ns = (100, 1000, 10_000)
    tv = [formulas.depth_poisson_tv(1.0, n) for n in ns]
    scaled = [t * math.log(n) for t, n in zip(tv, ns)]
    decreasing = all(a > b for a, b in zip(tv, tv[1:]))
    ratio = max(scaled) / min(scaled)
    note = "d_TV = " + ", ".join(f"{t:.4f}" for t in tv)
    return [
        Check("C6 d_TV strictly decreasing in n", float(decreasing), "== 1", decreasing, note),
        _le("C6 max/min of d_TV * ln n", ratio, 3.0),
    ]


def check_subtree_uniform():
    worst = 0.0
    for n in (2, 3, 10, 100, 1000, 10_000):
        law = formulas.subtree_pmf_exact(1.0, n)
        worst = max(worst, float(np.max(np.abs(law.pmf - 1.0 / (n - 1)))))
    return [_le("C8 subtree law uniform at theta=1", worst, 1e-12)]


# Frozen 30-digit reference values (mpmath), rounded to double.
DIGAMMA_REF = {
    0.5: -1.9635100260214235,
    1.0: -0.5772156649015329,
    1.5: 0.03648997397857652,
    2.0: 0.42278433509846713,
    3.0: 0.9227843350984671,
    10.25: 2.277704790686724,
}
TRIGAMMA_REF = {
    0.5: 4.934802200544679,
    1.0: 1.6449340668482264,
    1.5: 0.9348022005446793,
    2.0: 0.6449340668482264,
    3.0: 0.39493406684822646,
    10.25: 0.10247452151799187,
}


def check_specfun():
    e_dg = max(abs(specfun.digamma(x) - v) for x, v in DIGAMMA_REF.items())
    e_tg = max(abs(specfun.trigamma(x) - v) for x, v in TRIGAMMA_REF.items())
    e_id = 0.0
    for theta in (0.5, 1.0, 2.0, 10.0):
        for m in (0, 1, 10, 1000, 10**5, 10**6):
            diff = specfun.digamma(theta + m + 1) - specfun.digamma(theta + 1)
            e_id = max(e_id, abs(specfun.shifted_harmonic(theta, m, 1) - diff))
    return [
        _le("C12 digamma vs reference", e_dg, 1e-10),
        _le("C12 trigamma vs reference", e_tg, 1e-10),
        _le("C12 harmonic sum = digamma difference", e_id, 1e-9),
    ]


def check_limit_mean_identity():
    worst = max(limitdist.mean_identity_residual(t) for t in (0.5, 1.0, 2.0, 5.0))
    return [_le("limit-law mean identity (quadrature)", worst, 1e-3)]


# Statistical tier


def _lattice_normal_distance(law, mean, sd):
    """Exact sup distance between a standardized lattice law and N(0, 1)."""
    z = (law.support - mean) / sd
    phi = montecarlo.normal_cdf(z)
    cdf = law.cdf()
    return float(max(np.max(np.abs(cdf - phi)), np.max(np.abs(cdf - law.pmf - phi))))


def check_clt(runs: Runs):
    out = []
    n, reps = 10_000, 10_000
    for theta in (0.5, 2.0):
        run = runs.get(theta, n, reps)
        dm = formulas.depth_moments(theta, n)
        z = np.sort((run.samples["depth_last"] - dm.mean) / math.sqrt(dm.variance))
        exact = _lattice_normal_distance(formulas.depth_pmf_exact(theta, n), dm.mean, math.sqrt(dm.variance))
        out.append(
            _le(
                f"C5 KS standardized D_n, theta={theta:g}",
                montecarlo.ks_statistic(z, montecarlo.normal_cdf),
                0.02,
                f"exact law itself is {exact:.4f} from N(0,1)",
            )
        )
        lm = formulas.leaf_moments(theta, n)
        z = np.sort((run.samples["leaves"] - lm.mean) / math.sqrt(lm.variance))
        out.append(_le(f"C5 KS standardized L_n, theta={theta:g}", montecarlo.ks_statistic(z, montecarlo.normal_cdf), 0.02))
    return out


def check_azuma(runs: Runs):
    theta, n = 1.0, 1000
    run = runs.get(theta, n, 100_000)
    rep = montecarlo.tail_check(
        run.samples["leaves"],
        formulas.leaf_mean_exact(theta, n),
        lambda t: formulas.leaf_tail_bound(theta, n, t),
        (5, 10, 15, 20, 25, 30),
    )
    return [
        Check(
            "C7 leaf tails under Azuma bound",
            rep.worst_excess,
            "<= 0 (freq - bound - 3se)",
            rep.passed,
        )
    ]


def check_beta_limit(runs: Runs):
    out = []
    n = 10_000
    for theta in THETAS:
        frac = np.sort(runs.get(theta, n, 10_000).samples["subtree2"] / n)
        out.append(_le(f"C8 KS N_n/n vs Beta(1,{theta:g})", montecarlo.ks_statistic(frac, montecarlo.beta1_cdf(theta)), 0.02))
    return out


def check_small_subtree(runs: Runs):
    n, reps = 1000, 100_000
    worst = -math.inf
    for theta in THETAS:
        sub = runs.get(theta, n, reps).samples["subtree2"]
        for eps in (0.01, 0.05, 0.1):
            p = np.count_nonzero(sub <= eps * n) / reps
            se = math.sqrt(p * (1 - p) / reps)
            worst = max(worst, p - formulas.small_subtree_bound(theta, eps) - 3 * se)
    return [Check("C9 P(N_n <= eps n) under 3(theta+1)eps", worst, "<= 0 (freq - bound - 3se)", worst <= 0)]


def check_height(runs: Runs):
    out = []
    reps = 10_000
    worst_band = 0.0
    worst_var = 0.0
    for theta in THETAS:
        for n in (100, 1000, 10_000):
            h = runs.get(theta, n, reps)["height"]
            worst_band = max(worst_band, abs(h.mean - formulas.height_band(n)))
            worst_var = max(worst_var, h.variance)
    out.append(_le("C10 |mean H_n - band centre|", worst_band, 5.0))
    out.append(_le("C10 Var H_n", worst_var, 10.0))
    n = 1000
    lo = runs.get(0.5, n, reps).samples["height"]
    hi = runs.get(5.0, n, reps).samples["height"]
    rep = montecarlo.dominance_check(lo, hi)
    out.append(
        Check(
            "C10 H(theta=5) below H(theta=0.5)",
            rep.max_violation,
            f"<= {rep.tolerance:g}",
            rep.passed,
            f"median {np.median(hi):g} vs {np.median(lo):g}",
        )
    )
    h0 = runs.get(0.0, n, reps, extremal=True).samples["height"]
    h1 = runs.get(1.0, n - 1, reps).samples["height"] + 1
    out.append(_le("C10 H(theta=0) vs 1 + H(1) on n-1 (KS2)", montecarlo.ks_two_sample(h0, h1), 0.02))
    return out


def check_limit_law(runs: Runs):
    out = []
    n, reps = 100_000, 10_000
    base = None
    for theta in (1.0, 2.0):
        pop = limitdist.picard(theta, 100_000, 40, derive_seed(runs.seed, "picard"), base=base)
        if theta == 1.0:
            base = pop
        mean, var = limitdist.limit_moments(theta)
        out.append(_le(f"C11 population mean error, theta={theta:g}", abs(pop.mean - mean), 0.01))
        out.append(_le(f"C11 population variance error, theta={theta:g}", abs(pop.variance - var), 0.02))
        ipl = runs.get(theta, n, reps).samples["ipl"]
        scaled = (ipl - n * math.log(n)) / n
        out.append(_le(f"C11 KS population vs (I_n - n ln n)/n, theta={theta:g}", montecarlo.ks_two_sample(pop.values, scaled), 0.03))
    return out


def check_determinism(runs: Runs):
    from . import cli

    def capture(argv):
        buf = io.StringIO()
        cli.run(argv, stdout=buf)
        return buf.getvalue()

    sim = ["simulate", "--theta", "2", "--nodes", "1000", "--replicates", "200", "--seed", "7", "--stat", "leaves"]
    outs = [capture(sim + ["--workers", str(w), "--format", f]) for w in (1, 4, 1) for f in ("csv", "json")]
    same_sim = outs[0] == outs[2] == outs[4] and outs[1] == outs[3] == outs[5]
    lim = ["limit", "--theta", "2", "--population", "10000", "--iterations", "30", "--seed", "3", "--format", "csv"]
    same_lim = capture(lim) == capture(lim)
    ok = same_sim and same_lim
    return [Check("C13 byte-identical reruns (workers 1, 4)", float(ok), "== 1", ok)]


EXACT_CHECKS: tuple[Callable, ...] = (
    check_depth_law_equivalence,
    check_moment_identities,
    check_martingales,
    check_leaf_variance_asymptotics,
    check_poisson_decay,
    check_subtree_uniform,
    check_specfun,
    check_limit_mean_identity,
)
STATISTICAL_CHECKS: tuple[Callable, ...] = (
    check_clt,
    check_azuma,
    check_beta_limit,
    check_small_subtree,
    check_height,
    check_limit_law,
    check_determinism,
)


def run_tier(tier: str, seed: int = 11, workers: int = 1, report: Callable[[Check], None] = None) -> list[Check]:
    if tier not in ("exact", "statistical", "all"):
        raise ValueError(f"unknown tier {tier!r}")
    runs = Runs(seed, workers)
    checks = []
    groups = []
    if tier in ("exact", "all"):
        groups += [(fn, ()) for fn in EXACT_CHECKS]
    if tier in ("statistical", "all"):
        groups += [(fn, (runs,)) for fn in STATISTICAL_CHECKS]
    for fn, args in groups:
        for c in fn(*args):
            checks.append(c)
            if report:
                report(c)
    return checks


__all__ = ["Check", "Runs", "run_tier", "STATISTICS"]
