"""Separated covering point sets (metric lattices) on S2, SO(3) and S2 x S2.

A lattice with parameter rho is a finite set whose points are pairwise
more than rho apart (so open balls of radius rho/2 are disjoint) while
balls of radius rho centred at the points cover the manifold.  The
constructor runs farthest-point traversal over a dense deterministic
candidate stream: starting from the first candidate it repeatedly admits
the candidate farthest from the admitted set for as long as that distance
exceeds rho.  Admission is strict, which makes the separation bound exact;
the covering bound is guaranteed on the candidate stream and on the
default verification grid, which joins the stream before the traversal
finishes.

Candidate streams are seeded and fully deterministic: a rotated Fibonacci
spiral on S2 and scrambled Sobol sequences in Euler / product coordinates
on the other two spaces.  Metrics: great-circle distance on S2, rotation
angle of the relative rotation on SO(3), and the Euclidean combination
sqrt(d1^2 + d2^2) of the factor distances on S2 x S2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from .errors import NumericalError, ValidationError
from .harmonics import euler_to_matrix, rotation_distance

SPACES = ("s2", "so3", "s2xs2")

_DIAMETER = {"s2": np.pi, "so3": np.pi, "s2xs2": np.sqrt(2.0) * np.pi}


@dataclass
class Lattice:
    """A rho-separated covering set; points in packed coordinates.

    Packed coordinate rows: unit vectors (3) on s2, Euler triples (3) on
    so3, concatenated unit-vector pairs (6) on s2xs2.
    """

    space: str
    rho: float
    points: np.ndarray
    seed: int = 0
    report: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.space not in SPACES:
            raise ValidationError(f"unknown space {self.space!r}")
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))

    def __len__(self) -> int:
        return self.points.shape[0]

    def to_dict(self) -> dict:
        if self.space == "s2xs2":
            pts = [[row[:3].tolist(), row[3:].tolist()] for row in self.points]
        else:
            pts = self.points.tolist()
        return {
            "space": self.space,
            "rho": self.rho,
            "seed": self.seed,
            "points": pts,
            "report": self.report,
        }

    @staticmethod
    def from_dict(d: dict) -> "Lattice":
        space = d["space"]
        raw = d["points"]
        if space == "s2xs2":
            pts = np.array([[*p[0], *p[1]] for p in raw], dtype=float)
        else:
            pts = np.array(raw, dtype=float)
        return Lattice(space, float(d["rho"]), pts, int(d.get("seed", 0)),
                       dict(d.get("report", {})))


# ---------------------------------------------------------------------------
# metrics on packed coordinates
# ---------------------------------------------------------------------------


def pairwise_to_set(space: str, queries: np.ndarray, anchors: np.ndarray) -> np.ndarray:
    """Distance matrix (n_queries, n_anchors) in the space metric."""
    if space == "s2":
        dots = np.clip(queries @ anchors.T, -1.0, 1.0)
        return np.arccos(dots)
    if space == "so3":
        qm = euler_to_matrix(queries[:, 0], queries[:, 1], queries[:, 2])
        am = euler_to_matrix(anchors[:, 0], anchors[:, 1], anchors[:, 2])
        return rotation_distance(qm[:, None], am[None, :])
    if space == "s2xs2":
        d1 = np.arccos(np.clip(queries[:, :3] @ anchors[:, :3].T, -1.0, 1.0))
        d2 = np.arccos(np.clip(queries[:, 3:] @ anchors[:, 3:].T, -1.0, 1.0))
        return np.sqrt(d1 * d1 + d2 * d2)
    raise ValidationError(f"unknown space {space!r}")


def _dist_to_point(space: str, pool: np.ndarray, point: np.ndarray) -> np.ndarray:
    return pairwise_to_set(space, pool, point[None, :])[:, 0]


def min_dist_to_set(space: str, queries: np.ndarray, anchors: np.ndarray) -> np.ndarray:
    """Per-query distance to the nearest anchor, chunked to bound memory."""
    out = np.empty(queries.shape[0])
    step = max(1, 4_000_000 // max(1, anchors.shape[0]))
    for start in range(0, queries.shape[0], step):
        blk = slice(start, start + step)
        out[blk] = pairwise_to_set(space, queries[blk], anchors).min(axis=1)
    return out


# ---------------------------------------------------------------------------
# candidate streams
# ---------------------------------------------------------------------------


def fibonacci_sphere(n: int) -> np.ndarray:
    """Deterministic quasi-uniform spiral of n unit vectors."""
    i = np.arange(n, dtype=float)
    z = 1.0 - (2.0 * i + 1.0) / n
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    golden = np.pi * (3.0 - np.sqrt(5.0))
    phi = golden * i
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def _random_rotation(rng: np.random.Generator) -> np.ndarray:
    a = rng.standard_normal((3, 3))
    q, r = np.linalg.qr(a)
    q *= np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, [0, 1]] = q[:, [1, 0]]
    return q

def _sobol(dim: int, n: int, seed: int) -> np.ndarray:
    eng = qmc.Sobol(d=dim, scramble=True, seed=seed)
    # draw a power-of-two count (balance property) and slice
    m = int(np.ceil(np.log2(max(n, 2))))
    return eng.random_base2(m)[:n]


def _unit_from_uv(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    z = 2.0 * u - 1.0
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    phi = 2.0 * np.pi * v
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def candidate_stream(space: str, n: int, seed: int) -> np.ndarray:
    """First n points of the deterministic candidate stream."""
    if space == "s2":
        rot = _random_rotation(np.random.default_rng(seed))
        return fibonacci_sphere(n) @ rot.T
    if space == "so3":
        u = _sobol(3, n, seed)
        return np.stack(
            [2.0 * np.pi * u[:, 0], np.arccos(2.0 * u[:, 1] - 1.0), 2.0 * np.pi * u[:, 2]],
            axis=1,
        )
    if space == "s2xs2":
        u = _sobol(4, n, seed)
        return np.concatenate(
            [_unit_from_uv(u[:, 0], u[:, 1]), _unit_from_uv(u[:, 2], u[:, 3])], axis=1
        )
    raise ValidationError(f"unknown space {space!r}")


def _candidate_count(space: str, rho: float) -> int:
    if space == "s2":
        return int(np.clip(1300.0 / rho**2, 4000, 300_000))
    if space == "so3":
        return int(np.clip((12.0 / rho) ** 3, 8000, 400_000))
    return int(np.clip(160.0 * (4.0 / rho) ** 4, 16_000, 400_000))


def _grid_count(space: str, rho: float) -> int:
    if space == "s2":
        return int(np.clip(330.0 / rho**2, 10_000, 120_000))
    if space == "so3":
        return int(np.clip((8.0 / rho) ** 3, 10_000, 150_000))
    return int(np.clip(40.0 * (4.0 / rho) ** 4, 10_000, 150_000))


def verification_grid(space: str, rho: float, seed: int) -> np.ndarray:
    """Independent dense grid used for covering-radius estimates."""
    return candidate_stream(space, _grid_count(space, rho), seed + 77_003)


# ---------------------------------------------------------------------------
# construction and verification
# ---------------------------------------------------------------------------


def generate(space: str, rho: float, seed: int = 0) -> Lattice:
    """Farthest-point lattice with strict separation rho.

    Admission stops when no remaining pool point lies farther than rho from
    the admitted set.  The pool is the candidate stream together with the
    default verification grid, so the reported covering radius is certified
    on that grid by construction.
    """
    if not 0.0 < rho <= _DIAMETER[space]:
        raise ValidationError(
            f"rho {rho} outside (0, diameter {_DIAMETER[space]:.6f}] for {space}"
        )
    cands = candidate_stream(space, _candidate_count(space, rho), seed)
    grid = verification_grid(space, rho, seed)
    pool = np.concatenate([cands, grid], axis=0)

    chosen = [0]
    dmin = _dist_to_point(space, pool, pool[0])
    while True:
        nxt = int(np.argmax(dmin))
        if dmin[nxt] <= rho:
            break
        chosen.append(nxt)
        np.minimum(dmin, _dist_to_point(space, pool, pool[nxt]), out=dmin)
    points = pool[np.array(chosen)]

    lat = Lattice(space, rho, points, seed)
    d = pairwise_to_set(space, points, points)
    np.fill_diagonal(d, np.inf)
    lat.report = {
        "n_points": int(points.shape[0]),
        "min_pairwise": float(d.min()) if len(lat) > 1 else float("inf"),
        "covering_radius": float(min_dist_to_set(space, grid, points).max()),
        "grid_size": int(grid.shape[0]),
        "candidates": int(cands.shape[0]),
    }
    return lat


def verify(lat: Lattice, grid_size: int | None = None, seed: int | None = None) -> dict:
    """Recheck separation and covering; raise on violation.

    Separation is exact over all pairs.  Covering is estimated on a fresh
    grid (at least 10^4 points).  Returns the measured quantities.
    """
    pts = lat.points
    d = pairwise_to_set(lat.space, pts, pts)
    np.fill_diagonal(d, np.inf)
    min_pair = float(d.min()) if len(lat) > 1 else float("inf")

    if seed is None:
        seed = lat.seed
    if grid_size is None:
        grid = verification_grid(lat.space, lat.rho, seed)
    else:
        grid = candidate_stream(lat.space, max(int(grid_size), 10_000), seed + 77_003)
    gaps = min_dist_to_set(lat.space, grid, pts)
    covering = float(gaps.max())

    problems = []
    if min_pair <= lat.rho:
        bad = np.argwhere(d <= lat.rho)
        problems.append(f"separation violated for pairs {bad[:5].tolist()} (d_min={min_pair})")
    if covering > lat.rho:
        worst = int(np.argmax(gaps))
        problems.append(
            f"covering violated at grid point {worst} (gap {covering} > rho {lat.rho})"
        )
    if problems:
        raise NumericalError("; ".join(problems))
    return {"min_pairwise": min_pair, "covering_radius": covering, "grid_size": int(grid.shape[0])}


def nearest_point(lat: Lattice, queries: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Indices and distances of the nearest lattice point per query row."""
    d = pairwise_to_set(lat.space, np.atleast_2d(queries), lat.points)
    idx = np.argmin(d, axis=1)
    return idx, d[np.arange(d.shape[0]), idx]


# ---------------------------------------------------------------------------
# great circles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GreatCircle:
    """The great circle whose plane is orthogonal to the given pole."""

    pole: tuple[float, float, float]

    def __post_init__(self) -> None:
        n = float(np.linalg.norm(self.pole))
        if abs(n - 1.0) > 1.0e-12:
            raise ValidationError(f"pole norm {n} deviates from 1 beyond 1e-12")

    def frame(self) -> tuple[np.ndarray, np.ndarray]:
        """Deterministic orthonormal basis of the circle plane."""
        p = np.asarray(self.pole, dtype=float)
        a = np.zeros(3)
        a[int(np.argmin(np.abs(p)))] = 1.0
        e1 = a - np.dot(a, p) * p
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(p, e1)
        return e1, e2

    def nodes(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """n equispaced points on the circle with arc-length weights 2 pi / n.

        The induced rule integrates restrictions of spherical polynomials of
        degree < n exactly (they are trigonometric polynomials on the circle).
        """
        if n < 1:
            raise ValidationError("need at least one node")
        e1, e2 = self.frame()
        t = 2.0 * np.pi * np.arange(n) / n
        pts = np.outer(np.cos(t), e1) + np.outer(np.sin(t), e2)
        return pts, np.full(n, 2.0 * np.pi / n)
