"""
Estimators of expected powered distances between multivariate laws.

``S_beta(F, G) = E ||X - Y||**beta`` for independent ``X ~ F`` and ``Y ~ G`` is
the building block of the energy distance and the energy score. Three
routes are available:

exact
    Both laws atomic: a weighted double sum over the atoms.
quadrature
    Both copulas have an affine support parametrization (comonotone,
    countermonotone, parallel, hat, independence) and the marginals are
    uniform or point masses. The innermost parameter is integrated in
    closed form and the rest with Gauss-Legendre rules, split at the
    points where the closed-form inner integral loses smoothness.
monte-carlo
    Works for everything. Two independent batches, one per argument.

All routes are pure functions of their inputs, the seed included.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.spatial.distance import cdist
from scipy.special import hyp2f1

from .copulas import DiscreteCopula, JointDist, sample

__all__ = [
    "FunctionalParams",
    "Estimate",
    "CapabilityError",
    "CacheIntegrityError",
    "s_beta",
    "s_beta_point",
    "energy_score",
    "expected_energy_score",
    "energy_distance",
    "distance_moment_exact",
    "s_beta_discrete_delta",
    "SwapState",
    "child_seeds",
    "supported_methods",
]

METHODS = ("auto", "exact", "quadrature", "monte-carlo")
_ALIASES = {"mc": "monte-carlo", "montecarlo": "monte-carlo", "quad": "quadrature"}


class CapabilityError(ValueError):
    """The requested method cannot handle the given inputs."""


class CacheIntegrityError(RuntimeError):
    """A cached swap state no longer matches its copula."""


@dataclass(frozen=True)
class FunctionalParams:
    """Exponent and estimation settings.

    ``samples`` is the Monte Carlo batch size per argument; ``order`` is the
    Gauss-Legendre order per outer axis.
    """

    beta: float = 1.0
    method: str = "auto"
    samples: int = 100_000
    order: int = 64
    seed: int | np.random.SeedSequence = 0
    workers: int = 1

    def __post_init__(self):
        method = _ALIASES.get(self.method, self.method)
        if method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")
        object.__setattr__(self, "method", method)
        if not 0 < self.beta < 2:
            raise ValueError(
                f"beta must lie in (0, 2) for score-level quantities, got {self.beta}"
            )
        if self.samples < 2:
            raise ValueError("Monte Carlo needs at least 2 samples")
        if self.order < 1:
            raise ValueError("quadrature order must be positive")

    def with_seed(self, seed) -> "FunctionalParams":
        return FunctionalParams(self.beta, self.method, self.samples, self.order, seed, self.workers)


@dataclass(frozen=True)
class Estimate:
    """A value with its standard error (zero for deterministic methods).

    ``fallback`` is set when an exact request was served by Monte Carlo
    because only one side was atomic.
    """

    value: float
    se: float
    method: str
    effort: int
    beta: float
    d: int
    fallback: bool = False

    def to_record(self) -> dict:
        return asdict(self)


def child_seeds(seed, k: int) -> list[np.random.SeedSequence]:
    """``k`` independent child sequences, without mutating ``seed``."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return [
        np.random.SeedSequence(ss.entropy, spawn_key=tuple(ss.spawn_key) + (i,), pool_size=ss.pool_size)
        for i in range(k)
    ]


# -- exact sums ---------------------------------------------------------------

_CHUNK = 2_000_000


def _pair_sum(xa, wa, xb, wb, beta) -> float:
    step = max(1, _CHUNK // max(1, xb.shape[0]))
    parts = []
    for lo in range(0, xa.shape[0], step):
        dist = cdist(xa[lo : lo + step], xb)
        parts.append(float(wa[lo : lo + step] @ (dist**beta) @ wb))
    return math.fsum(parts)


def distance_moment_exact(f: JointDist, g: JointDist, beta: float) -> float:
    """``E ||X - Y||**beta`` for atomic laws, any ``beta`` in (0, 2]."""
    if not 0 < beta <= 2:
        raise ValueError("beta must lie in (0, 2]")
    xa, wa = f.atoms()
    xb, wb = g.atoms()
    return _pair_sum(xa, wa, xb, wb, beta)


# -- closed-form inner integral ----------------------------------------------


def _antideriv(x, h, beta):
    """``int_0^x (s**2 + h**2)**(beta/2) ds``, vectorized, odd in ``x``."""
    x = np.asarray(x, dtype=float)
    h = np.asarray(h, dtype=float)
    r2 = x * x + h * h
    if beta == 1.0:
        pos = h > 0
        safe_h = np.where(pos, h, 1.0)
        tail = np.where(pos, h * h * np.arcsinh(x / safe_h), 0.0)
        return 0.5 * (x * np.sqrt(r2) + tail)
    w = np.where(r2 > 0, x * x / np.where(r2 > 0, r2, 1.0), 0.0)
    return x * r2 ** (0.5 * beta) * hyp2f1(-0.5 * beta, 1.0, 1.5, w)


def _segment_integral(w, e, beta):
    """``int_0^1 ||w + t e||**beta dt`` for rows of ``w`` and a fixed ``e``."""
    ee = float(e @ e)
    c = -(w @ e) / ee
    h2 = np.maximum(np.einsum("ij,ij->i", w, w) / ee - c * c, 0.0)
    h = np.sqrt(h2)
    return ee ** (0.5 * beta) * (_antideriv(1.0 - c, h, beta) + _antideriv(c, h, beta))


def _gl(order):
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


def _breakpoints(w0, e_out, e_in):
    """Outer parameters in (0, 1) where the inner integral is not smooth."""
    ee = float(e_in @ e_in)
    pts = []
    # c(s) = -(w0 + s e_out).e_in / ee is affine; kinks where it crosses 0 or 1
    c0 = -float(w0 @ e_in) / ee
    c1 = -float(e_out @ e_in) / ee
    if abs(c1) > 1e-15:
        pts += [(0.0 - c0) / c1, (1.0 - c0) / c1]
    # h2(s) = |w(s)|^2/ee - c(s)^2 is quadratic; a zero of it is a kink
    qa = float(e_out @ e_out) / ee - c1 * c1
    qb = 2.0 * float(w0 @ e_out) / ee - 2.0 * c0 * c1
    qc = float(w0 @ w0) / ee - c0 * c0
    if qa > 1e-14:
        s_star = -qb / (2.0 * qa)
        if qc + qb * s_star + qa * s_star**2 <= 1e-12 * max(1.0, abs(qc)):
            pts.append(s_star)
    return sorted(p for p in pts if 1e-12 < p < 1.0 - 1e-12)


def _graded_rule(edges, order, singular):
    """Composite Gauss-Legendre rule, geometrically graded toward ``singular``."""
    gx, gw = _gl(order)
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        cuts = [a, b]
        for s in singular:
            if abs(s - a) < 1e-15 or abs(s - b) < 1e-15:
                # geometric layers toward the singular endpoint
                far = b if abs(s - a) < 1e-15 else a
                cuts += [s + (far - s) * 0.2**k for k in range(1, 8)]
        cuts = np.unique(cuts)
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            nodes.append(lo + (hi - lo) * gx)
            weights.append((hi - lo) * gw)
    return np.concatenate(nodes), np.concatenate(weights)


def _affine_integral(offset, dirs, beta, order):
    """``E ||offset + t @ dirs||**beta`` for ``t`` uniform on ``[0,1]**K``."""
    norms = np.linalg.norm(dirs, axis=1) if dirs.size else np.zeros(0)
    live = np.flatnonzero(norms > 1e-15)
    if live.size == 0:
        return float(np.linalg.norm(offset) ** beta)
    dirs = dirs[live]
    inner = int(np.argmax(np.linalg.norm(dirs, axis=1)))
    e_in = dirs[inner]
    outer = np.delete(dirs, inner, axis=0)
    if outer.shape[0] == 0:
        return float(_segment_integral(offset[None, :], e_in, beta)[0])
    if outer.shape[0] == 1:
        e_out = outer[0]
        singular = _breakpoints(offset, e_out, e_in)
        edges = np.unique(np.r_[0.0, singular, 1.0])
        s, ws = _graded_rule(edges, order, singular + [0.0, 1.0])
        vals = _segment_integral(offset[None, :] + s[:, None] * e_out[None, :], e_in, beta)
        return float(ws @ vals)
    gx, gw = _gl(order)
    grids = np.meshgrid(*[gx] * outer.shape[0], indexing="ij")
    wgrid = np.prod(np.meshgrid(*[gw] * outer.shape[0], indexing="ij"), axis=0).ravel()
    t = np.stack([g.ravel() for g in grids], axis=1)
    total = 0.0
    step = 200_000
    for lo in range(0, t.shape[0], step):
        pts = offset[None, :] + t[lo : lo + step] @ outer
        total += float(wgrid[lo : lo + step] @ _segment_integral(pts, e_in, beta))
    return total


def _affine_marginals(dist: JointDist):
    shift, scale = [], []
    for m in dist.marginals:
        if m.family == "uniform":
            a, b = m.params
            shift.append(a)
            scale.append(b - a)
        elif m.family == "point":
            shift.append(m.params[0])
            scale.append(0.0)
        else:
            return None
    return np.array(shift), np.array(scale)


def _pieces(dist: JointDist):
    """Affine pieces of the joint law in data space, or ``None``."""
    raw = dist.copula.pieces()
    aff = _affine_marginals(dist)
    if raw is None or aff is None:
        return None
    shift, scale = aff
    return [(w, shift + scale * o, dirs * scale[None, :]) for w, o, dirs in raw]


def _quadrature_pair(f: JointDist, g: JointDist | None, y, beta, order) -> float:
    pf = _pieces(f)
    pg = [(1.0, np.asarray(y, dtype=float), np.zeros((0, f.d)))] if g is None else _pieces(g)
    total = 0.0
    for wa, oa, da in pf:
        for wb, ob, db in pg:
            total += wa * wb * _affine_integral(oa - ob, np.vstack([da, -db]), beta, order)
    return total


def _quadrature_capable(dist: JointDist) -> bool:
    pcs = _pieces(dist)
    return pcs is not None and all(len(d) <= 2 for _, _, d in pcs)


def _nodes(f: JointDist, g: JointDist | None, order: int) -> int:
    k = max(len(d) for _, _, d in _pieces(f))
    if g is not None:
        k += max(len(d) for _, _, d in _pieces(g))
    return order ** max(k - 1, 0)


# -- Monte Carlo --------------------------------------------------------------


def _mc_terms(f: JointDist, g: JointDist | None, y, beta, count, seed, workers):
    sf, sg = child_seeds(seed, 2)
    x = sample(f, count, sf, workers)
    other = np.asarray(y, dtype=float)[None, :] if g is None else sample(g, count, sg, workers)
    return np.linalg.norm(x - other, axis=1) ** beta


def _mc_estimate(vals, params, d, fallback=False) -> Estimate:
    se = float(np.std(vals, ddof=1) / np.sqrt(vals.size))
    return Estimate(float(np.mean(vals)), se, "monte-carlo", int(vals.size), params.beta, d, fallback)


# -- public estimators --------------------------------------------------------


def _resolve(method, f: JointDist, g: JointDist | None) -> tuple[str, bool]:
    g_atomic = True if g is None else g.is_atomic
    g_quad = True if g is None else _quadrature_capable(g)
    if method == "auto":
        if f.is_atomic and g_atomic:
            return "exact", False
        if _quadrature_capable(f) and g_quad:
            return "quadrature", False
        return "monte-carlo", False
    if method == "exact":
        if f.is_atomic and g_atomic:
            return "exact", False
        if f.is_atomic or g_atomic:
            return "monte-carlo", True
        raise CapabilityError("exact method needs atomic laws (discrete copulas or point masses)")
    if method == "quadrature":
        if _quadrature_capable(f) and g_quad:
            return "quadrature", False
        raise CapabilityError(
            "quadrature needs comonotone, countermonotone, parallel, hat or "
            "independence copulas with uniform or point-mass marginals"
        )
    return "monte-carlo", False


def supported_methods(f: JointDist, g: JointDist | None = None) -> list[str]:
    """Methods that can serve ``f`` against ``g`` (or a point) without fallback."""
    out = []
    for m in METHODS[1:]:
        try:
            resolved, fallback = _resolve(m, f, g)
        except CapabilityError:
            continue
        if resolved == m and not fallback:
            out.append(m)
    return out


def _check_dims(f: JointDist, g: JointDist | None = None, y=None):
    if g is not None and g.d != f.d:
        raise ValueError(f"dimension mismatch: {f.d} vs {g.d}")
    if y is not None:
        y = np.asarray(y, dtype=float).ravel()
        if y.size != f.d or not np.all(np.isfinite(y)):
            raise ValueError(f"observation must be a finite point of dimension {f.d}")
        return y
    return None


def s_beta(f: JointDist, g: JointDist, params: FunctionalParams) -> Estimate:
    """Estimate ``S_beta(F, G) = E ||X - Y||**beta`` for independent X, Y."""
    _check_dims(f, g)
    method, fallback = _resolve(params.method, f, g)
    if method == "exact":
        value = distance_moment_exact(f, g, params.beta)
        effort = f.atoms()[1].size * g.atoms()[1].size
        return Estimate(value, 0.0, "exact", effort, params.beta, f.d)
    if method == "quadrature":
        value = _quadrature_pair(f, g, None, params.beta, params.order)
        return Estimate(value, 0.0, "quadrature", _nodes(f, g, params.order), params.beta, f.d)
    vals = _mc_terms(f, g, None, params.beta, params.samples, params.seed, params.workers)
    return _mc_estimate(vals, params, f.d, fallback)


def s_beta_point(f: JointDist, y, params: FunctionalParams) -> Estimate:
    """Estimate ``S_beta(F, y) = E ||X - y||**beta``."""
    y = _check_dims(f, y=y)
    method, fallback = _resolve(params.method, f, None)
    if method == "exact":
        xa, wa = f.atoms()
        value = _pair_sum(xa, wa, y[None, :], np.ones(1), params.beta)
        return Estimate(value, 0.0, "exact", wa.size, params.beta, f.d)
    if method == "quadrature":
        value = _quadrature_pair(f, None, y, params.beta, params.order)
        return Estimate(value, 0.0, "quadrature", _nodes(f, None, params.order), params.beta, f.d)
    vals = _mc_terms(f, None, y, params.beta, params.samples, params.seed, params.workers)
    return _mc_estimate(vals, params, f.d, fallback)


def _combine(a: Estimate, b: Estimate, value: float, se: float) -> Estimate:
    method = a.method if a.method == b.method else f"{a.method}+{b.method}"
    return Estimate(value, se, method, a.effort + b.effort, a.beta, a.d, a.fallback or b.fallback)


def energy_score(f: JointDist, y, params: FunctionalParams) -> Estimate:
    """``ES_beta(F, y) = S_beta(F, y) - S_beta(F, F) / 2``.

    The two terms use independent random streams; their standard errors
    add in quadrature.
    """
    s1, s2 = child_seeds(params.seed, 2)
    point = s_beta_point(f, y, params.with_seed(s1))
    self_ = s_beta(f, f, params.with_seed(s2))
    value = point.value - 0.5 * self_.value
    se = math.hypot(point.se, 0.5 * self_.se)
    return _combine(point, self_, value, se)


def expected_energy_score(forecast: JointDist, truth: JointDist, params: FunctionalParams) -> Estimate:
    """Mean energy score of ``forecast`` when observations follow ``truth``.

    Equals ``S_beta(forecast, truth) - S_beta(forecast, forecast) / 2``.
    Propriety says this is minimized over forecasts at ``forecast = truth``.
    """
    _check_dims(forecast, truth)
    s1, s2 = child_seeds(params.seed, 2)
    cross = s_beta(forecast, truth, params.with_seed(s1))
    self_ = s_beta(forecast, forecast, params.with_seed(s2))
    value = cross.value - 0.5 * self_.value
    return _combine(cross, self_, value, math.hypot(cross.se, 0.5 * self_.se))


def energy_distance(f: JointDist, g: JointDist, params: FunctionalParams) -> Estimate:
    """``E_beta(F, G) = 2 S_beta(F, G) - S_beta(F, F) - S_beta(G, G)``.

    Identical arguments give exactly zero. The Monte Carlo route draws two
    batches from each law, each from its own stream, and averages
    ``||X1-Y1||^b + ||X2-Y2||^b - ||X1-X2||^b - ||Y1-Y2||^b`` so that the
    standard error accounts for the shared batches.
    """
    _check_dims(f, g)
    if f == g:
        method, _ = _resolve(params.method, f, g)
        return Estimate(0.0, 0.0, method, 0, params.beta, f.d)
    m_fg, fb1 = _resolve(params.method, f, g)
    m_ff, fb2 = _resolve(params.method, f, f)
    m_gg, fb3 = _resolve(params.method, g, g)
    if "monte-carlo" not in (m_fg, m_ff, m_gg):
        p = FunctionalParams(params.beta, m_fg, params.samples, params.order, params.seed, params.workers)
        fg = s_beta(f, g, p)
        ff = s_beta(f, f, FunctionalParams(params.beta, m_ff, params.samples, params.order, 0, params.workers))
        gg = s_beta(g, g, FunctionalParams(params.beta, m_gg, params.samples, params.order, 0, params.workers))
        method = "+".join(sorted({fg.method, ff.method, gg.method}))
        value = 2.0 * fg.value - ff.value - gg.value
        return Estimate(value, 0.0, method, fg.effort + ff.effort + gg.effort, params.beta, f.d)
    b = params.beta
    n, w = params.samples, params.workers
    sx1, sx2, sy1, sy2 = child_seeds(params.seed, 4)
    x1, x2 = sample(f, n, sx1, w), sample(f, n, sx2, w)
    y1, y2 = sample(g, n, sy1, w), sample(g, n, sy2, w)
    norm = lambda a, c: np.linalg.norm(a - c, axis=1) ** b
    vals = norm(x1, y1) + norm(x2, y2) - norm(x1, x2) - norm(y1, y2)
    est = _mc_estimate(vals, params, f.d, fb1 or fb2 or fb3)
    return Estimate(est.value, est.se, est.method, 4 * n, b, f.d, est.fallback)


# -- incremental objective for permutation copulas ----------------------------


class SwapState:
    """Cached distances of a permutation copula for O(n) swap evaluation.

    The copula places weight ``1/n`` on the points ``p_i`` whose coordinate
    ``k`` is ``(sigma_k(i) + 1/2)/n``. A swap ``(k, i, j)`` exchanges
    ``sigma_k(i)`` and ``sigma_k(j)``; only ``p_i`` and ``p_j`` move.

    Parameters
    ----------
    c : DiscreteCopula
        Permutation copula.
    beta : float
    y : array_like, optional
        Observation for point-score objectives.
    """

    def __init__(self, c: DiscreteCopula, beta: float, y=None):
        if not c.is_permutation:
            raise ValueError("swap state needs a permutation copula")
        self.n, self.d, self.beta = c.n, c.d, float(beta)
        self.levels = np.array(c.levels, dtype=np.int64)
        self.x = (self.levels + 0.5) / self.n
        self.y = None if y is None else np.asarray(y, dtype=float).ravel()
        self._refresh()

    def _refresh(self):
        diff = self.x[:, None, :] - self.x[None, :, :]
        self.d2 = np.einsum("ijk,ijk->ij", diff, diff)
        self.dist = self.d2 ** (0.5 * self.beta)
        self.rows = self.dist.sum(axis=1)
        if self.y is not None:
            self.ey = np.linalg.norm(self.x - self.y, axis=1) ** self.beta

    # -- objective values --

    @property
    def scc(self) -> float:
        """Current ``S_beta(C, C)``."""
        return math.fsum(self.rows) / self.n**2

    @property
    def sy(self) -> float:
        """Current ``S_beta(C, y)``."""
        return math.fsum(self.ey) / self.n

    def matches(self, c: DiscreteCopula) -> bool:
        return c.n == self.n and c.d == self.d and np.array_equal(c.levels, self._canonical_levels())

    def _canonical_levels(self):
        order = np.lexsort(self.levels.T[::-1])
        return self.levels[order]

    def copula(self) -> DiscreteCopula:
        return DiscreteCopula(self.n, self.levels.copy(), np.full(self.n, 1.0 / self.n))

    # -- deltas --

    def delta_scc(self, k: int, i: int, j: int) -> float:
        """Change of ``S_beta(C, C)`` under the swap ``(k, i, j)``; O(n)."""
        if i == j:
            return 0.0
        xk = self.x[:, k]
        a_i = (self.x[i, k] - xk) ** 2
        a_j = (self.x[j, k] - xk) ** 2
        new_i = np.maximum(self.d2[i] - a_i + a_j, 0.0) ** (0.5 * self.beta)
        new_j = np.maximum(self.d2[j] - a_j + a_i, 0.0) ** (0.5 * self.beta)
        new_i[[i, j]] = 0.0
        new_j[[i, j]] = 0.0
        dij = self.dist[i, j]
        change = new_i.sum() + new_j.sum() - (self.rows[i] - dij) - (self.rows[j] - dij)
        return 2.0 * change / self.n**2

    def delta_scc_row(self, k: int, i: int) -> np.ndarray:
        """Vector of :meth:`delta_scc` over all partners ``j``; O(n**2)."""
        n = self.n
        xk = self.x[:, k]
        a_i = (self.x[i, k] - xk) ** 2  # indexed by l
        sq = (xk[:, None] - xk[None, :]) ** 2  # [j, l]
        half = 0.5 * self.beta
        new_i = np.maximum(self.d2[i][None, :] - a_i[None, :] + sq, 0.0) ** half
        new_j = np.maximum(self.d2 - sq + a_i[None, :], 0.0) ** half
        idx = np.arange(n)
        new_i[:, i] = 0.0
        new_i[idx, idx] = 0.0
        new_j[:, i] = 0.0
        new_j[idx, idx] = 0.0
        dij = self.dist[i]
        change = new_i.sum(axis=1) + new_j.sum(axis=1) - (self.rows[i] - dij) - (self.rows - dij)
        out = 2.0 * change / n**2
        out[i] = 0.0
        return out

    def delta_sy(self, k: int, i: int, j: int) -> float:
        """Change of ``S_beta(C, y)`` under the swap ``(k, i, j)``."""
        if i == j:
            return 0.0
        pi, pj = self.x[i].copy(), self.x[j].copy()
        pi[k], pj[k] = pj[k], pi[k]
        b = self.beta
        new = np.linalg.norm(pi - self.y) ** b + np.linalg.norm(pj - self.y) ** b
        return (new - self.ey[i] - self.ey[j]) / self.n

    def delta_sy_row(self, k: int, i: int) -> np.ndarray:
        b = self.beta
        base = self.x - self.y  # [j, :]
        pi = np.repeat((self.x[i] - self.y)[None, :], self.n, axis=0)
        pi[:, k] = base[:, k]
        pj = base.copy()
        pj[:, k] = self.x[i, k] - self.y[k]
        new = np.linalg.norm(pi, axis=1) ** b + np.linalg.norm(pj, axis=1) ** b
        out = (new - self.ey[i] - self.ey) / self.n
        out[i] = 0.0
        return out

    # -- mutation --

    def apply(self, k: int, i: int, j: int) -> None:
        """Perform the swap and update the cache in O(n d)."""
        if i == j:
            return
        self.levels[[i, j], k] = self.levels[[j, i], k]
        self.x[[i, j], k] = self.x[[j, i], k]
        half = 0.5 * self.beta
        old_i, old_j = self.dist[i].copy(), self.dist[j].copy()
        for r in (i, j):
            diff = self.x - self.x[r]
            row = np.einsum("ij,ij->i", diff, diff)
            self.d2[r, :] = row
            self.d2[:, r] = row
            self.dist[r, :] = row**half
            self.dist[:, r] = row**half
        self.rows += self.dist[:, i] - old_i + self.dist[:, j] - old_j
        self.rows[i] = self.dist[i].sum()
        self.rows[j] = self.dist[j].sum()
        if self.y is not None:
            for r in (i, j):
                self.ey[r] = np.linalg.norm(self.x[r] - self.y) ** self.beta


def s_beta_discrete_delta(c: DiscreteCopula, swap: tuple[int, int, int], state: SwapState) -> float:
    """``S_beta(C', C') - S_beta(C, C)`` for ``C'`` = ``c`` with one transposition.

    ``swap = (k, i, j)`` exchanges the grid levels of coordinate ``k`` of the
    atoms sitting on levels ``i`` and ``j`` of coordinate 0.

    Raises
    ------
    CacheIntegrityError
        If ``state`` was built for a different copula.
    """
    if not state.matches(c):
        raise CacheIntegrityError("swap state does not describe this copula")
    k, i, j = swap
    if not 0 <= k < c.d or not (0 <= i < c.n and 0 <= j < c.n):
        raise IndexError("swap indices out of range")
    if i == j:
        raise ValueError("a transposition needs two distinct indices")
    # state rows follow the canonical order, so row r is the atom on level r
    return state.delta_scc(k, i, j)
