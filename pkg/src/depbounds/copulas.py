"""
Copula zoo, Sklar couplings and discrete grid copulas.

Parametric copulas are identified by a ``kind`` tag. Discrete copulas live on
the cell centers ``(i + 1/2) / n`` of a uniform grid of order ``n`` and are
stored in a canonical form (integer grid levels sorted lexicographically,
coincident atoms merged) so that two discrete copulas can be compared for
exact equality.

Random streams
--------------
Every sampler takes an integer seed or a :class:`numpy.random.SeedSequence`.
The seed is split into ``workers`` children with ``SeedSequence.spawn``;
worker ``w`` draws the ``w``-th contiguous chunk of the sample, and chunks
are concatenated in worker order. Output is therefore a pure function of
``(seed, count, workers)``.
"""
from __future__ import annotations

import itertools
import math
from collections.abc import Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .marginals import MarginalDist, uniform

__all__ = [
    "Copula",
    "DiscreteCopula",
    "JointDist",
    "Symmetry",
    "comonotone",
    "countermonotone",
    "independence",
    "parallel",
    "spherical",
    "hat",
    "parse_copula",
    "sample_copula",
    "sample",
    "discretize",
    "apply_symmetry",
    "symmetry_group",
    "symmetrize",
    "mix",
    "read_discrete_copula",
    "write_discrete_copula",
    "spawn_generators",
    "random_permutation_copula",
    "random_discrete_copula",
]

KINDS = ("comonotone", "countermonotone", "independence", "parallel", "spherical", "hat", "discrete")
WEIGHT_TOL = 1e-12


class ConstructionError(ValueError):
    """Unsupported (kind, dimension) combination."""


# -- discrete copulas ---------------------------------------------------------


class DiscreteCopula:
    """Finite weighted support on the cell centers of an order-``n`` grid.

    Parameters
    ----------
    n : int
        Grid order.
    levels : array_like of int, shape (k, d)
        Grid level of every atom in every coordinate, in ``0..n-1``. The atom
        sits at ``(levels + 0.5) / n``.
    weights : array_like, shape (k,)
        Positive atom weights summing to one.

    Notes
    -----
    Each coordinate must put weight exactly ``1/n`` on every grid level.
    Use :meth:`from_points` to build from coordinates in ``[0, 1]``.
    """

    def __init__(self, n: int, levels, weights):
        n = int(n)
        if n < 1:
            raise ValueError("grid order must be positive")
        levels = np.asarray(levels)
        if levels.ndim != 2 or levels.shape[0] == 0:
            raise ValueError("levels must be a nonempty (k, d) array")
        if not np.issubdtype(levels.dtype, np.integer):
            raise TypeError("levels must be integers; use DiscreteCopula.from_points")
        weights = np.asarray(weights, dtype=float).ravel()
        if weights.size != levels.shape[0]:
            raise ValueError("one weight per atom is required")
        if np.any(levels < 0) or np.any(levels >= n):
            raise ValueError("grid level outside 0..n-1")
        if np.any(weights <= 0) or not np.all(np.isfinite(weights)):
            raise ValueError("weights must be positive and finite")
        if abs(math.fsum(weights) - 1.0) > WEIGHT_TOL:
            raise ValueError(f"weights sum to {math.fsum(weights)!r}, not 1")

        levels, weights = _canonical(levels.astype(np.int64), weights)
        self.n = n
        self.d = levels.shape[1]
        self.levels = levels
        self.weights = weights
        self.levels.setflags(write=False)
        self.weights.setflags(write=False)

        for k in range(self.d):
            per_level = np.bincount(levels[:, k], weights=weights, minlength=n)
            if np.max(np.abs(per_level - 1.0 / n)) > 1e-9:
                raise ValueError(f"coordinate {k} marginal is not discrete-uniform on the grid")

    # -- constructors ---------------------------------------------------------

    @classmethod
    def from_points(cls, n: int, points, weights) -> "DiscreteCopula":
        """Snap coordinates to the nearest cell center and build the copula."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        raw = points * n - 0.5
        levels = np.rint(raw)
        if np.max(np.abs(raw - levels)) > 1e-6:
            raise ValueError(f"points are not cell centers of an order-{n} grid")
        return cls(n, levels.astype(np.int64), weights)

    @classmethod
    def from_permutations(cls, perms: Sequence[Sequence[int]], n: int | None = None) -> "DiscreteCopula":
        """Permutation copula with the first coordinate pinned to the identity.

        ``perms[k]`` is the 0-based permutation giving the level of
        coordinate ``k + 1`` for the atom on level ``i`` of coordinate 0.
        An empty ``perms`` requires ``n`` and gives the 1-d grid.
        """
        perms = [np.asarray(p, dtype=np.int64) for p in perms]
        if n is None:
            if not perms:
                raise ValueError("grid order needed when no permutation is given")
            n = perms[0].size
        for p in perms:
            if p.size != n or not np.array_equal(np.sort(p), np.arange(n)):
                raise ValueError("each permutation must be a bijection of 0..n-1")
        levels = np.column_stack([np.arange(n, dtype=np.int64), *perms])
        return cls(n, levels, np.full(n, 1.0 / n))

    # -- views ----------------------------------------------------------------

    @property
    def points(self) -> np.ndarray:
        return (self.levels + 0.5) / self.n

    @property
    def size(self) -> int:
        return self.weights.size

    @property
    def is_permutation(self) -> bool:
        return self.size == self.n and np.allclose(self.weights, 1.0 / self.n, rtol=0, atol=1e-15)

    @property
    def permutations(self) -> list[np.ndarray]:
        """The ``d - 1`` permutations of a permutation copula (0-based)."""
        if not self.is_permutation:
            raise ValueError("copula is not in permutation form")
        # canonical order sorts rows by coordinate 0, so that column is 0..n-1
        return [self.levels[:, k].copy() for k in range(1, self.d)]

    def __eq__(self, other):
        if not isinstance(other, DiscreteCopula):
            return NotImplemented
        return (
            self.n == other.n
            and self.levels.shape == other.levels.shape
            and np.array_equal(self.levels, other.levels)
            and np.allclose(self.weights, other.weights, rtol=0, atol=WEIGHT_TOL)
        )

    __hash__ = None

    def __repr__(self):
        return f"DiscreteCopula(n={self.n}, d={self.d}, atoms={self.size})"


def _canonical(levels: np.ndarray, weights: np.ndarray):
    order = np.lexsort(levels.T[::-1])
    levels = levels[order]
    weights = weights[order]
    if levels.shape[0] > 1:
        new = np.r_[True, np.any(levels[1:] != levels[:-1], axis=1)]
        if not np.all(new):
            group = np.cumsum(new) - 1
            weights = np.bincount(group, weights=weights)
            levels = levels[new]
    return np.ascontiguousarray(levels), np.ascontiguousarray(weights)


# -- parametric copulas -------------------------------------------------------


@dataclass(frozen=True)
class Copula:
    """A copula of dimension ``d`` identified by its kind.

    ``discrete`` carries the support when ``kind == 'discrete'``.
    """

    kind: str
    d: int
    discrete: DiscreteCopula | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConstructionError(f"unknown copula kind {self.kind!r}")
        if self.d < 1:
            raise ConstructionError("dimension must be at least 1")
        if self.kind == "countermonotone" and self.d != 2:
            raise ConstructionError("the countermonotone copula exists only for d = 2")
        if self.kind in ("parallel", "hat") and self.d != 2:
            raise ConstructionError(f"the {self.kind} copula is defined for d = 2 only")
        if self.kind == "spherical" and self.d not in (2, 3):
            raise ConstructionError("spherical copulas exist only for d = 2 and d = 3")
        if self.kind == "discrete":
            if self.discrete is None or self.discrete.d != self.d:
                raise ConstructionError("discrete copula needs a support of matching dimension")

    @classmethod
    def from_discrete(cls, dc: DiscreteCopula) -> "Copula":
        return cls("discrete", dc.d, dc)

    @property
    def name(self) -> str:
        return self.kind

    def pieces(self):
        """Affine parametrization of the support, when one exists.

        Returns a list of ``(weight, origin, directions)``: with probability
        ``weight`` the copula is uniform on ``origin + t @ directions`` for
        ``t`` uniform on ``[0, 1]**k`` where ``k = len(directions)``. Returns
        ``None`` for copulas without such a representation.
        """
        d = self.d
        if self.kind == "comonotone":
            return [(1.0, np.zeros(d), np.ones((1, d)))]
        if self.kind == "countermonotone":
            return [(1.0, np.array([0.0, 1.0]), np.array([[1.0, -1.0]]))]
        if self.kind == "parallel":
            diag = np.array([[0.5, 0.5]])
            return [(0.5, np.array([0.0, 0.5]), diag), (0.5, np.array([0.5, 0.0]), diag)]
        if self.kind == "hat":
            return [
                (0.5, np.zeros(2), np.array([[0.5, 0.5]])),
                (0.5, np.array([0.5, 0.5]), 0.5 * np.eye(2)),
            ]
        if self.kind == "independence":
            return [(1.0, np.zeros(d), np.eye(d))]
        return None


def comonotone(d: int = 2) -> Copula:
    return Copula("comonotone", d)


def countermonotone() -> Copula:
    return Copula("countermonotone", 2)


def independence(d: int = 2) -> Copula:
    return Copula("independence", d)


def parallel() -> Copula:
    return Copula("parallel", 2)


def spherical(d: int = 2) -> Copula:
    return Copula("spherical", d)


def hat() -> Copula:
    return Copula("hat", 2)


def parse_copula(text: str, d: int = 2) -> Copula:
    """Parse a copula name as used on the command line.

    Accepts ``comonotone``, ``countermonotone``, ``independence``,
    ``parallel``, ``spherical``, ``hat`` or ``file:<path>``.
    """
    text = text.strip()
    if text.startswith("file:"):
        dc = read_discrete_copula(text[5:])
        if dc.d != d:
            raise ConstructionError(f"copula file has dimension {dc.d}, expected {d}")
        return Copula.from_discrete(dc)
    if text not in KINDS or text == "discrete":
        raise ConstructionError(f"unknown copula {text!r}")
    return Copula(text, d)


@dataclass(frozen=True)
class JointDist:
    """Sklar coupling of a copula with ``d`` marginals."""

    copula: Copula
    marginals: tuple[MarginalDist, ...]

    def __post_init__(self):
        object.__setattr__(self, "marginals", tuple(self.marginals))
        if len(self.marginals) != self.copula.d:
            raise ConstructionError(
                f"{len(self.marginals)} marginals for a copula of dimension {self.copula.d}"
            )

    @classmethod
    def uniform(cls, copula: Copula) -> "JointDist":
        """The copula itself, i.e. standard uniform marginals."""
        return cls(copula, tuple(uniform(0.0, 1.0) for _ in range(copula.d)))

    @property
    def d(self) -> int:
        return self.copula.d

    def shifted(self, c) -> "JointDist":
        c = np.broadcast_to(np.asarray(c, dtype=float), (self.d,))
        return JointDist(self.copula, tuple(m.shifted(ci) for m, ci in zip(self.marginals, c)))

    @property
    def is_atomic(self) -> bool:
        return self.copula.kind == "discrete" or all(m.family == "point" for m in self.marginals)

    def atoms(self):
        """Atoms and weights of an atomic joint distribution."""
        if self.copula.kind == "discrete":
            dc = self.copula.discrete
            pts = np.column_stack([m._ppf(dc.points[:, k]) for k, m in enumerate(self.marginals)])
            return pts, np.asarray(dc.weights)
        if all(m.family == "point" for m in self.marginals):
            return np.array([[m.params[0] for m in self.marginals]]), np.ones(1)
        raise TypeError("joint distribution is not atomic")


# -- sampling -----------------------------------------------------------------


def spawn_generators(seed, workers: int = 1) -> list[np.random.Generator]:
    """One independent generator per worker, derived from ``seed``."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    # children built by key so that a caller's SeedSequence is never advanced
    return [
        np.random.default_rng(
            np.random.SeedSequence(ss.entropy, spawn_key=tuple(ss.spawn_key) + (i,), pool_size=ss.pool_size)
        )
        for i in range(max(1, int(workers)))
    ]


def _draw(copula: Copula, count: int, rng: np.random.Generator) -> np.ndarray:
    kind, d = copula.kind, copula.d
    if kind == "comonotone":
        return np.repeat(rng.random(count)[:, None], d, axis=1)
    if kind == "countermonotone":
        u = rng.random(count)
        return np.column_stack([u, 1.0 - u])
    if kind == "independence":
        return rng.random((count, d))
    if kind == "parallel":
        u = rng.random(count)
        return np.column_stack([u, np.where(u <= 0.5, u + 0.5, u - 0.5)])
    if kind == "hat":
        u = rng.random(count)
        v = rng.random(count)
        return np.column_stack([u, np.where(u <= 0.5, u, 0.5 * (v + 1.0))])
    if kind == "spherical":
        # Archimedes: uniform height and angle give a uniform point on the sphere
        z = rng.uniform(-1.0, 1.0, count)
        theta = rng.uniform(0.0, 2.0 * np.pi, count)
        r = np.sqrt(1.0 - z * z)
        xyz = np.column_stack([r * np.cos(theta), r * np.sin(theta), z])
        return 0.5 * (xyz[:, :d] + 1.0)
    if kind == "discrete":
        dc = copula.discrete
        idx = rng.choice(dc.size, size=count, p=dc.weights / dc.weights.sum())
        return dc.points[idx]
    raise ConstructionError(f"cannot sample copula kind {kind!r}")  # pragma: no cover


def _chunked(count: int, seed, workers: int, fn) -> np.ndarray:
    if count < 1:
        raise ValueError("sample count must be at least 1")
    gens = spawn_generators(seed, workers)
    sizes = [len(c) for c in np.array_split(np.arange(count), len(gens))]
    jobs = [(s, g) for s, g in zip(sizes, gens) if s > 0]
    if len(jobs) == 1:
        return fn(*jobs[0])
    with ThreadPoolExecutor(max_workers=len(jobs)) as pool:
        parts = list(pool.map(lambda job: fn(*job), jobs))
    return np.concatenate(parts, axis=0)


def sample_copula(copula: Copula, count: int, seed, workers: int = 1) -> np.ndarray:
    """Draw ``count`` points of ``[0, 1]**d`` from ``copula``."""
    return _chunked(count, seed, workers, lambda s, g: _draw(copula, s, g))


def sample(dist: JointDist, count: int, seed, workers: int = 1) -> np.ndarray:
    """Inverse-transform sample of a Sklar coupling, shape ``(count, d)``."""

    def fn(size, gen):
        u = _draw(dist.copula, size, gen)
        return np.column_stack([m._ppf(u[:, k]) for k, m in enumerate(dist.marginals)])

    return _chunked(count, seed, workers, fn)


# -- discretization and symmetries --------------------------------------------


def discretize(c: Copula, n: int) -> DiscreteCopula:
    """Grid version of a parametric copula.

    Comonotone, countermonotone and parallel copulas become permutation
    copulas; independence becomes the full grid with weights ``1/n**d``.
    """
    if n < 2:
        raise ValueError("grid order must be at least 2")
    idx = np.arange(n, dtype=np.int64)
    if c.kind == "comonotone":
        return DiscreteCopula.from_permutations([idx] * (c.d - 1), n=n)
    if c.kind == "countermonotone":
        return DiscreteCopula.from_permutations([n - 1 - idx])
    if c.kind == "parallel":
        if n % 2:
            raise ValueError("the parallel copula needs an even grid order")
        return DiscreteCopula.from_permutations([(idx + n // 2) % n])
    if c.kind == "independence":
        grid = np.stack(np.meshgrid(*[idx] * c.d, indexing="ij"), axis=-1).reshape(-1, c.d)
        return DiscreteCopula(n, grid, np.full(grid.shape[0], float(n) ** -c.d))
    if c.kind == "discrete":
        return c.discrete
    raise ConstructionError(
        f"no grid version of the {c.kind} copula; use sample-based estimates instead"
    )


@dataclass(frozen=True)
class Symmetry:
    """Isometry of the unit cube: reflect flagged coordinates, then permute.

    The image of ``x`` is ``y`` with ``y[k] = x'[perm[k]]`` where ``x'`` is
    ``x`` with ``x'[i] = 1 - x[i]`` for every ``i`` with ``flips[i]`` set.
    """

    perm: tuple[int, ...]
    flips: tuple[bool, ...]

    def __post_init__(self):
        if sorted(self.perm) != list(range(len(self.perm))) or len(self.flips) != len(self.perm):
            raise ValueError("invalid symmetry element")

    @classmethod
    def identity(cls, d: int) -> "Symmetry":
        return cls(tuple(range(d)), (False,) * d)

    @classmethod
    def reflection(cls, d: int, *coords: int) -> "Symmetry":
        return cls(tuple(range(d)), tuple(i in coords for i in range(d)))

    @classmethod
    def permutation(cls, perm: Sequence[int]) -> "Symmetry":
        return cls(tuple(perm), (False,) * len(perm))

    def apply(self, x):
        x = np.asarray(x, dtype=float)
        flipped = np.where(np.asarray(self.flips), 1.0 - x, x)
        return flipped[..., list(self.perm)]


def apply_symmetry(c: DiscreteCopula, t: Symmetry) -> DiscreteCopula:
    if len(t.perm) != c.d:
        raise ValueError("symmetry dimension does not match the copula")
    flipped = np.where(np.asarray(t.flips), c.n - 1 - c.levels, c.levels)
    return DiscreteCopula(c.n, flipped[:, list(t.perm)], c.weights)


def symmetry_group(d: int) -> list[Symmetry]:
    """All ``2**d * d!`` reflection/permutation isometries of the cube."""
    return [
        Symmetry(perm, flips)
        for perm in itertools.permutations(range(d))
        for flips in itertools.product((False, True), repeat=d)
    ]


def symmetrize(c: DiscreteCopula) -> DiscreteCopula:
    """Uniform mixture of ``c`` over its orbit under the cube symmetry group."""
    group = symmetry_group(c.d)
    levels = np.concatenate(
        [np.where(np.asarray(t.flips), c.n - 1 - c.levels, c.levels)[:, list(t.perm)] for t in group]
    )
    weights = np.tile(c.weights, len(group)) / len(group)
    return DiscreteCopula(c.n, levels, weights)


def mix(cs: Iterable[tuple[DiscreteCopula, float]]) -> DiscreteCopula:
    """Mixture ``sum_j w_j C_j`` of discrete copulas on a common grid."""
    cs = list(cs)
    if not cs:
        raise ValueError("nothing to mix")
    n, d = cs[0][0].n, cs[0][0].d
    if any(c.n != n or c.d != d for c, _ in cs):
        raise ValueError("mixture components must share grid order and dimension")
    w = [float(a) for _, a in cs]
    if any(a <= 0 for a in w) or abs(math.fsum(w) - 1.0) > WEIGHT_TOL:
        raise ValueError("mixture weights must be positive and sum to 1")
    levels = np.concatenate([c.levels for c, _ in cs])
    weights = np.concatenate([a * np.asarray(c.weights) for (c, _), a in zip(cs, w)])
    weights = weights / math.fsum(weights)
    return DiscreteCopula(n, levels, weights)


def random_permutation_copula(n: int, d: int, rng: np.random.Generator) -> DiscreteCopula:
    """Uniformly random permutation copula (first coordinate pinned)."""
    return DiscreteCopula.from_permutations([rng.permutation(n) for _ in range(d - 1)], n=n)


def random_discrete_copula(n: int, d: int, rng: np.random.Generator, components: int = 3) -> DiscreteCopula:
    """Dirichlet-weighted mixture of random permutation copulas."""
    weights = rng.dirichlet(np.ones(components))
    parts = [(random_permutation_copula(n, d, rng), float(w)) for w in weights]
    total = math.fsum(w for _, w in parts)
    return mix([(c, w / total) for c, w in parts])


# -- text format --------------------------------------------------------------


def write_discrete_copula(c: DiscreteCopula, path) -> None:
    """Write ``n d k`` then ``k`` lines of coordinates and weight."""
    lines = [f"{c.n} {c.d} {c.size}"]
    for pt, w in zip(c.points, c.weights):
        lines.append(" ".join(f"{v:.17g}" for v in (*pt, w)))
    Path(path).write_text("\n".join(lines) + "\n")


def read_discrete_copula(path) -> DiscreteCopula:
    rows = [line.split() for line in Path(path).read_text().splitlines() if line.strip()]
    if not rows or len(rows[0]) != 3:
        raise ValueError(f"{path}: header must be 'n d k'")
    n, d, k = (int(v) for v in rows[0])
    if any(len(r) != d + 1 for r in rows[1:]):
        raise ValueError(f"{path}: every atom line needs {d} coordinates and a weight")
    body = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float).reshape(-1, d + 1)
    if body.shape[0] != k:
        raise ValueError(f"{path}: header announces {k} atoms, found {body.shape[0]}")
    return DiscreteCopula.from_points(n, body[:, :d], body[:, d])
