"""
Recompute every reference value and structural property, one row per check.

Each check records what was expected, what came out, the tolerance used and
a pass/fail status. ``run_checks`` is what the ``reproduce`` subcommand
prints.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import bounds as B
from .copulas import (
    Copula,
    JointDist,
    comonotone,
    countermonotone,
    discretize,
    hat,
    mix,
    parallel,
    random_discrete_copula,
    spherical,
    symmetrize,
)
from .functionals import (
    FunctionalParams,
    distance_moment_exact,
    energy_distance,
    energy_score,
    expected_energy_score,
    s_beta,
    s_beta_point,
)
from .marginals import empirical, m2_cross, uniform
from .optimizer import SearchProblem, brute_force, local_search, verify_hat_counterexample

SQRT2 = math.sqrt(2.0)
S_MINUS_PLUS = (SQRT2 + math.log(1.0 + SQRT2)) / (3.0 * SQRT2)


@dataclass
class Check:
    name: str
    expected: str
    got: float
    tolerance: str
    passed: bool
    note: str = ""

    @property
    def status(self) -> str:
        return "pass" if self.passed else "FAIL"

    def to_record(self) -> dict:
        rec = asdict(self)
        rec["status"] = self.status
        return rec


def _near(name, expected, got, tol, note=""):
    return Check(name, f"{expected:.10g}", got, f"abs {tol:g}", abs(got - expected) <= tol, note)


def _within(name, lo, hi, got, note=""):
    return Check(name, f"[{lo:g}, {hi:g}]", got, "interval", lo <= got <= hi, note)


def _count(name, violations, total, note=""):
    return Check(name, f"0 of {total}", float(violations), "exact", violations == 0, note)


def _u(c: Copula) -> JointDist:
    return JointDist.uniform(c)


QUAD = FunctionalParams(1.0, "quadrature")
EXACT = FunctionalParams(1.0, "exact")


def grid_marginal(n: int):
    return empirical((np.arange(n) + 0.5) / n)


# -- individual groups --------------------------------------------------------


def check_closed_forms() -> list[Check]:
    rows = []
    for d in (1, 2, 3):
        c = comonotone(d)
        q = s_beta(_u(c), _u(c), QUAD).value
        rows.append(_near(f"S(C+,C+) d={d} quadrature", math.sqrt(d) / 3, q, 1e-10))
        dc = _u(Copula.from_discrete(discretize(c, 512)))
        e = s_beta(dc, dc, EXACT).value
        rows.append(_near(f"S(C+,C+) d={d} exact n=512", math.sqrt(d) / 3, e, 2 / 512))
    return rows


def check_example_values(samples: int, seed: int, workers: int) -> list[Check]:
    cp, cm, cpar = _u(comonotone()), _u(countermonotone()), _u(parallel())
    s_mp = s_beta(cm, cp, QUAD).value
    s_ppar = s_beta(cp, cpar, QUAD).value
    s_parpar = s_beta(cpar, cpar, QUAD).value
    rows = [
        _near("S(C-,C+)", S_MINUS_PLUS, s_mp, 1e-8),
        _within("S(C+,C||)", 0.5485, 0.5495, s_ppar),
        Check("S(C+,C||) > S(C-,C+)", "strict ordering", s_ppar - s_mp, "> 0", s_ppar > s_mp),
        _within("S(C||,C||)", 0.4975, 0.4995, s_parpar),
    ]
    seeds = np.random.SeedSequence(seed).spawn(2)
    for d, target, ss in ((2, math.pi / 6, seeds[0]), (3, 2 / 3, seeds[1])):
        sc = _u(spherical(d))
        est = s_beta(sc, sc, FunctionalParams(1.0, "monte-carlo", samples, seed=ss, workers=workers))
        rows.append(
            Check(f"S(Co,Co) d={d} monte-carlo", f"{target:.10g}", est.value, f"3 SE = {3 * est.se:.2g}",
                  abs(est.value - target) <= 3 * est.se)
        )

    e_mp = energy_distance(cm, cp, QUAD).value
    e_mpar = energy_distance(cm, cpar, QUAD).value
    e_ppar = energy_distance(cp, cpar, QUAD).value
    half = "quoted value equals half the energy distance"
    rows += [
        _within("E(C-,C+)", 0.067, 0.071, e_mp, "2S-S-S as defined; " + half),
        _within("E(C-,C||)", 0.062, 0.066, e_mpar, "2S-S-S as defined"),
        Check("E(C-,C+) > E(C-,C||)", "strict ordering", e_mp - e_mpar, "> 0", e_mp > e_mpar),
        _within("E(C-,C+)/2", 0.067, 0.071, e_mp / 2, half),
        _within("E(C+,C||)/2", 0.062, 0.066, e_ppar / 2, "matches the quoted 0.064"),
        _near("S(C+,C+) d=2 (0.471)", 0.471, s_beta(cp, cp, QUAD).value, 5e-4),
    ]
    return rows


def check_counterexample(samples: int, seed: int, workers: int) -> list[Check]:
    f_plus = JointDist(comonotone(), (uniform(0, 4), uniform(0, 1)))
    f_minus = JointDist(countermonotone(), (uniform(0, 4), uniform(0, 1)))
    g_plus = JointDist(comonotone(), (uniform(0, 1), uniform(0, 4)))
    s1, s2 = np.random.SeedSequence(seed).spawn(2)
    mc = lambda ss: FunctionalParams(1.0, "monte-carlo", samples, seed=ss, workers=workers)
    a = s_beta(f_minus, g_plus, mc(s1))
    b = s_beta(f_plus, g_plus, mc(s2))
    se = math.hypot(a.se, b.se)
    lb = B.lower_bound_s(list(f_plus.marginals), list(g_plus.marginals), 1.0)
    return [
        _within("S(F-,G+)", 2.46, 2.50, a.value),
        _within("S(F+,G+)", 2.53, 2.57, b.value),
        Check("S(F-,G+)<S(F+,G+)", "gap > 3 SE", b.value - a.value, f"3 SE = {3 * se:.2g}",
              b.value - a.value > 3 * se),
        Check("lower bound <= S(F-,G+)", "<= 2.48", lb, "ordering", lb <= a.value),
        _near("upper bound counterexample", math.sqrt(22 / 3),
              B.upper_bound_s(list(f_plus.marginals), list(g_plus.marginals), 1.0), 1e-12),
    ]


def check_bound_values() -> list[Check]:
    u = uniform(0, 1)
    return [
        _near("lower bound d=2", SQRT2 / 3, B.lower_bound_s([u] * 2, None, 1.0), 1e-12),
        _near("lower bound d=3", math.sqrt(3) / 3, B.lower_bound_s([u] * 3, None, 1.0), 1e-12),
        _near("Jensen bound d=2", math.sqrt(1 / 3), B.upper_bound_s([u] * 2, None, 1.0), 1e-12),
        _near("sharp upper d=2", math.pi / 6, B.sharp_upper_scc(2)[0], 1e-15),
        _near("sharp upper d=3", 2 / 3, B.sharp_upper_scc(3)[0], 1e-15),
        _near("spherical bound d=4 (0.784)", 0.784, B.sharp_upper_scc(4)[0], 5e-4),
        _near("Jensen bound d=4 (0.816)", 0.816, B.upper_bound_s([u] * 4, None, 1.0), 5e-4),
        _near("score bound d=2", SQRT2 / 4, B.lower_bound_score(2, 1.0), 1e-15),
    ]


def check_bracketing(seed: int) -> list[Check]:
    rng = np.random.default_rng(seed)
    n, bad, total = 32, 0, 0
    u = uniform(0, 1)
    for d in (2, 3):
        for beta in (0.5, 1.0, 1.5):
            lo = B.lower_bound_s([u] * d, None, beta)
            ups = [B.upper_bound_s([u] * d, None, beta)]
            if beta == 1.0:
                ups.append(B.sharp_upper_scc(d)[0])
            for _ in range(17 if (d, beta) != (3, 1.5) else 15):
                c = _u(Copula.from_discrete(random_discrete_copula(n, d, rng)))
                s = distance_moment_exact(c, c, beta)
                bad += not (lo <= s <= min(ups) + 1 / (2 * n))
                total += 1
    return [_count("bound bracketing (random copulas)", bad, total)]


def check_score_bound(seed: int) -> list[Check]:
    rng = np.random.default_rng(seed)
    floor = B.lower_bound_score(2, 1.0)
    lowest, neg = math.inf, 0
    for _ in range(50):
        c = _u(Copula.from_discrete(random_discrete_copula(32, 2, rng)))
        y = rng.random(2)
        lowest = min(lowest, s_beta_point(c, y, EXACT).value)
        neg += energy_score(c, y, EXACT).value < -1e-12
    return [
        Check("min S(C,y) >= sqrt(2)/4", f">= {floor:.10g}", lowest, "ordering", lowest >= floor),
        _count("ES(C,y) >= 0", neg, 50),
    ]


def check_hat(samples: int, seed: int, workers: int) -> list[Check]:
    cmp_ = verify_hat_counterexample(samples, seed, workers)
    return [
        Check("ES(hat,0) < ES(C+,0)", "separation > 3 SE", cmp_.separation, "3 SE",
              cmp_.status == "confirmed",
              f"ES(C+,0)={cmp_.es_comonotone.value:.5f} ES(hat,0)={cmp_.es_hat.value:.5f}"),
        Check("ES(hat,0) >= combined floor", f">= {cmp_.floor:.6g}", cmp_.es_hat.value, "ordering",
              cmp_.es_hat.value >= cmp_.floor),
    ]


def check_optimizer(seed: int) -> list[Check]:
    mismatches = not_identity = total = 0
    for beta in (0.5, 1.0, 1.5):
        for n in range(2, 7):
            for obj in ("max-scc", "min-scc"):
                p = SearchProblem(obj, beta=beta, d=2, n=n, restarts=50, seed=seed)
                ls, bf = local_search(p), brute_force(p)
                mismatches += abs(ls.value - bf.value) > 1e-12
                if obj == "min-scc":
                    not_identity += not np.array_equal(ls.permutations[0], np.arange(n))
                total += 1
    big = local_search(SearchProblem("max-scc", beta=1.0, d=2, n=64, restarts=20, seed=seed))
    return [
        _count("local search == brute force (n<=6)", mismatches, total),
        _count("min-scc returns identity", not_identity, total // 2),
        _within("max-scc n=64", 0.515, math.pi / 6 + 1 / 64, big.value),
    ]


def check_structure(seed: int) -> list[Check]:
    rng = np.random.default_rng(seed)
    rand = lambda n=8, d=2: _u(Copula.from_discrete(random_discrete_copula(n, d, rng)))
    rows = []

    bad = 0
    for _ in range(10):
        a, b = random_discrete_copula(8, 2, rng), random_discrete_copula(8, 2, rng)
        for alpha in (0.25, 0.5, 0.75):
            for beta in (0.5, 1.0, 1.5):
                m = _u(Copula.from_discrete(mix([(a, alpha), (b, 1 - alpha)])))
                A, Bc = _u(Copula.from_discrete(a)), _u(Copula.from_discrete(b))
                lhs = distance_moment_exact(m, m, beta)
                rhs = alpha * distance_moment_exact(A, A, beta) + (1 - alpha) * distance_moment_exact(Bc, Bc, beta)
                bad += lhs < rhs - 1e-10
    rows.append(_count("concavity of S(F,F)", bad, 90))

    bad = 0
    for _ in range(20):
        f, g = rand(), rand()
        for beta in (0.5, 1.0, 1.5):
            p = FunctionalParams(beta, "exact")
            bad += 2 * s_beta(f, g, p).value < s_beta(f, f, p).value + s_beta(g, g, p).value - 1e-12
    rows.append(_count("2S(F,G) >= S(F,F) + S(G,G)", bad, 60))

    bad = 0
    for _ in range(10):
        f, g = rand(), rand()
        bad += expected_energy_score(g, g, EXACT).value > expected_energy_score(f, g, EXACT).value + 1e-12
    rows.append(_count("energy score propriety", bad, 10))

    worst = 0.0
    for _ in range(10):
        f, g = rand(6, 3), rand(6, 3)
        shift = rng.normal(size=3) * 5
        base = s_beta(f, g, EXACT).value
        moved = s_beta(f.shifted(shift), g.shifted(shift), EXACT).value
        worst = max(worst, abs(base - moved))
    rows.append(Check("translation invariance", "0", worst, "abs 1e-12", worst <= 1e-12))

    worst = 0.0
    gm = grid_marginal(8)
    for _ in range(10):
        f, g = rand(), rand()
        lhs = distance_moment_exact(f, g, 2.0)
        rhs = 2 * m2_cross(gm, gm)
        worst = max(worst, abs(lhs - rhs))
    rows.append(Check("beta=2 ignores the copula", "0", worst, "abs 1e-12", worst <= 1e-12))

    bad = 0
    vertices = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=float)
    for _ in range(10):
        c = rand(16, 2)
        top = max(energy_score(c, v, EXACT).value for v in vertices)
        inner = max(energy_score(c, rng.random(2), EXACT).value for _ in range(50))
        bad += inner > top + 1e-12
    rows.append(_count("ES maximum at a vertex", bad, 10))

    bad = 0
    for d in (2, 3):
        ref = _u(Copula.from_discrete(discretize(comonotone(d), 8)))
        for beta in (0.5, 1.0, 1.5):
            p = FunctionalParams(beta, "exact")
            floor = s_beta_point(ref, np.zeros(d), p).value
            for _ in range(20):
                c = rand(8, d)
                bad += s_beta_point(c, np.zeros(d), p).value < floor - 1e-12
    rows.append(_count("S(C,0) minimal at C+", bad, 120))

    bad = 0
    for d in (2, 3):
        y = np.full(d, 0.5)
        for beta in (1.0, 1.25, 1.5, 1.9):
            p = FunctionalParams(beta, "exact")
            for _ in range(3):
                dc = random_discrete_copula(6, d, rng)
                before = energy_score(_u(Copula.from_discrete(dc)), y, p).value
                after = energy_score(_u(Copula.from_discrete(symmetrize(dc))), y, p).value
                bad += after > before + 1e-10
    rows.append(_count("symmetrization lowers ES at the center", bad, 24))
    return rows


def run_checks(samples: int = 10**6, seed: int = 7, workers: int = 1) -> list[Check]:
    rows = []
    rows += check_closed_forms()
    rows += check_example_values(samples, seed, workers)
    rows += check_counterexample(samples, seed + 1, workers)
    rows += check_bound_values()
    rows += check_bracketing(seed + 2)
    rows += check_score_bound(seed + 3)
    rows += check_hat(samples, seed + 4, workers)
    rows += check_optimizer(seed + 5)
    rows += check_structure(seed + 6)
    return rows
