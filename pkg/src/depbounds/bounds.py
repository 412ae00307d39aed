"""
Closed-form dependence uncertainty bounds for expected powered distances.

All bounds take the marginals as given and hold for every coupling of
them. Lower bounds come from coupling the coordinatewise distances
comonotonically; upper bounds from Jensen's inequality on the second moment
or, for expected distance under a common copula, from the optimality of
spherical laws among vectors with a fixed second moment.
"""
from __future__ import annotations

import csv
import io
import json
import math
from collections.abc import Sequence
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import integrate

from .functionals import Estimate
from .marginals import MarginalDist, _diamond_ppf, gini_m, m2_cross, uniform

__all__ = [
    "SPHERE_DISTANCE",
    "Bound",
    "BoundsReport",
    "lower_bound_s",
    "upper_bound_s",
    "sharp_upper_scc",
    "lower_bound_score",
    "bounds_report",
]

# Mean distance of two independent points of the optimal law with E|X|^2 = 1,
# by dimension (uniform on the sphere for d >= 3).
SPHERE_DISTANCE = {
    2: math.pi / math.sqrt(6.0),
    3: 4.0 / 3.0,
    4: 64.0 / (15.0 * math.pi),
}


def _check_beta(beta):
    if not 0 < beta < 2:
        raise ValueError(f"beta must lie in (0, 2), got {beta}")


def _pairs(f: Sequence[MarginalDist], g: Sequence[MarginalDist] | None):
    g = f if g is None else g
    if len(f) != len(g) or len(f) == 0:
        raise ValueError("marginal lists must be nonempty and of equal length")
    return list(f), list(g)


def lower_bound_s(f: Sequence[MarginalDist], g: Sequence[MarginalDist] | None, beta: float) -> float:
    """Lower bound on ``S_beta(F, G)`` over all couplings of the marginals.

    Evaluates ``int_0^1 (sum_i q_i(u)**2)**(beta/2) du`` where ``q_i`` is the
    quantile function of ``|X_i - Y_i|``. With identical marginals in every
    coordinate this is ``d**(beta/2) * E|X_1 - Y_1|**beta``.
    """
    _check_beta(beta)
    f, g = _pairs(f, g)
    d = len(f)
    if all(m == f[0] for m in f) and all(m == g[0] for m in g):
        return d ** (0.5 * beta) * gini_m(f[0], g[0], beta)

    breaks = set()
    for a, b in zip(f, g):
        if a.is_discrete and b.is_discrete:
            breaks.update(np.arange(1, a.atoms.size * b.atoms.size) / (a.atoms.size * b.atoms.size))
    edges = np.unique(np.r_[0.0, sorted(breaks), 1.0])

    def integrand(u):
        u = np.clip(u, 1e-300, 1.0 - 1e-16)
        z = sum(float(_diamond_ppf(a, b, np.asarray(u))) ** 2 for a, b in zip(f, g))
        return z ** (0.5 * beta)

    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(integrand, lo, hi, epsabs=1e-10, limit=200)
        total += val
    return total


def upper_bound_s(f: Sequence[MarginalDist], g: Sequence[MarginalDist] | None, beta: float) -> float:
    """Jensen upper bound ``(sum_i E(X_i - Y_i)**2)**(beta/2)``."""
    _check_beta(beta)
    f, g = _pairs(f, g)
    return math.fsum(m2_cross(a, b) for a, b in zip(f, g)) ** (0.5 * beta)


def sharp_upper_scc(d: int, beta: float = 1.0) -> tuple[float, bool]:
    """Upper bound on ``S(C, C)`` over copulas ``C`` of dimension ``d``.

    Returns ``(value, sharp)``. The bound is attained by the spherical
    copula for ``d = 2, 3``; for ``d = 4`` it is the spherical-law bound,
    which is not attained; from ``d = 5`` on only Jensen's ``sqrt(d/6)``
    is reported.
    """
    if beta != 1:
        raise NotImplementedError("sharp copula bounds are available for beta = 1 only")
    if d < 2:
        raise ValueError("dimension must be at least 2")
    if d in SPHERE_DISTANCE:
        return math.sqrt(d / 12.0) * SPHERE_DISTANCE[d], d in (2, 3)
    return math.sqrt(d / 6.0), False


def lower_bound_score(d: int, beta: float) -> float:
    """``S_beta(C^+, 1/2) = d**(beta/2) * 2**-beta / (beta + 1)``.

    Valid for every copula ``C`` and every observation ``y`` in the unit cube.
    """
    _check_beta(beta)
    if d < 1:
        raise ValueError("dimension must be at least 1")
    return d ** (0.5 * beta) * 0.5**beta / (beta + 1.0)


@dataclass(frozen=True)
class Bound:
    name: str
    value: float
    sharp: bool
    anchor: str


@dataclass
class BoundsReport:
    """Lower and upper bounds for one marginal context, optionally with an estimate."""

    d: int
    beta: float
    marginals: str
    lower: list[Bound] = field(default_factory=list)
    upper: list[Bound] = field(default_factory=list)
    estimate: Estimate | None = None
    violations: list[str] = field(default_factory=list)

    @property
    def best_lower(self) -> float:
        return max(b.value for b in self.lower)

    @property
    def best_upper(self) -> float:
        return min(b.value for b in self.upper)

    def check(self, slack_se: float = 3.0) -> list[str]:
        issues = []
        for lo in self.lower:
            for up in self.upper:
                if lo.value > up.value + 1e-12:
                    issues.append(f"lower bound {lo.name} exceeds upper bound {up.name}")
        if self.estimate is not None:
            se = self.estimate.se
            if self.estimate.value < self.best_lower - slack_se * se - 1e-9:
                issues.append("estimate below the best lower bound")
            if self.estimate.value > self.best_upper + slack_se * se + 1e-9:
                issues.append("estimate above the best upper bound")
        self.violations = issues
        return issues

    @property
    def ok(self) -> bool:
        return not self.violations

    def rows(self) -> list[dict]:
        out = [dict(kind="lower", **asdict(b)) for b in self.lower]
        out += [dict(kind="upper", **asdict(b)) for b in self.upper]
        if self.estimate is not None:
            out.append(
                dict(kind="estimate", name=self.estimate.method, value=self.estimate.value,
                     sharp=False, anchor=f"se={self.estimate.se:.17g}")
            )
        return out

    def to_dict(self) -> dict:
        return {
            "context": {"d": self.d, "beta": self.beta, "marginals": self.marginals},
            "lower": [asdict(b) for b in self.lower],
            "upper": [asdict(b) for b in self.upper],
            "estimate": None if self.estimate is None else self.estimate.to_record(),
            "violations": list(self.violations),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(["kind", "name", "value", "sharp", "anchor"])
        for r in self.rows():
            writer.writerow([r["kind"], r["name"], f"{r['value']:.17g}", str(r["sharp"]).lower(), r["anchor"]])
        return buf.getvalue()


def _describe(f, g):
    fs = ";".join(m.spec() for m in f)
    if g is None or list(g) == list(f):
        return fs
    return fs + " | " + ";".join(m.spec() for m in g)


def bounds_report(
    f: Sequence[MarginalDist] | None = None,
    g: Sequence[MarginalDist] | None = None,
    d: int | None = None,
    beta: float = 1.0,
    estimate: Estimate | None = None,
) -> BoundsReport:
    """Assemble every applicable bound for ``S_beta``.

    ``f`` defaults to ``d`` standard uniform marginals; ``g = None`` means the
    same marginals (and the same copula) on both sides, which enables the
    spherical-law bound for copulas when ``beta = 1``.
    """
    if f is None:
        if d is None:
            raise ValueError("give marginals or a dimension")
        f = [uniform(0.0, 1.0)] * d
    f = list(f)
    if d is not None and d != len(f):
        raise ValueError(f"{len(f)} marginals given for dimension {d}")
    d = len(f)
    same = g is None
    _, gl = _pairs(f, g)
    report = BoundsReport(d=d, beta=beta, marginals=_describe(f, g), estimate=estimate)
    identical = all(m == f[0] for m in f) and all(m == gl[0] for m in gl)
    report.lower.append(
        Bound("comonotone-distance", lower_bound_s(f, gl, beta), identical, "lower bound via comonotone coordinate distances")
    )
    report.upper.append(
        Bound("jensen", upper_bound_s(f, gl, beta), False, "upper bound via Jensen on second moments")
    )
    std_uniform = all(m == uniform(0.0, 1.0) for m in f)
    if same and std_uniform and beta == 1 and d >= 2:
        value, sharp = sharp_upper_scc(d, beta)
        if d <= 4:
            report.upper.append(Bound("spherical", value, sharp, "upper bound via spherical laws, common copula"))
    report.check()
    return report
