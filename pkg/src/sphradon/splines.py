"""Minimum-Sobolev-norm interpolation of linear functional data.

Given functionals F_1..F_N on one of the supported spaces and target
values v, the spline is the unique H_t minimiser with F_nu(s) = v_nu.  It
is a combination of the functional representers, so everything reduces to
the Gram matrix

    beta_{nu,mu} = sum_j w_j F_nu(u_j) F_mu(u_j),      w_j = (1+lambda_j)^(-t)

over the orthonormal Laplacian eigenbasis u_j, followed by the solve
beta alpha = v.  The supported functional kinds all act on eigenfunctions
in closed form, which collapses beta to fast zonal kernel sums:

    point values on S2:          sum_k w_k (2k+1)/(4pi) P_k(x.x')
    great-circle integrals:      extra multiplier mu_k per circle row
    point values on S2 x S2:     double sum with the product weight
    circle means {g: g y = x}    sum_k w_k (2k+1) P_k(x.x') P_k(y.y')
      on SO(3):

Eigenvalue weights per space: (1+k(k+1))^(-t) on S2, (1+4k(k+1))^(-t) on
SO(3), and (1+2(k1(k1+1)+k2(k2+1)))^(-t) on the product.  Fitting
requires t > dim of the space.

Series are truncated at a resolved degree: with an explicit degree_max
the fit refuses to run when the entrywise tail bound exceeds 1e-10 of the
smallest diagonal entry; with degree_max=None the truncation starts at 64
and doubles until the bound is met.  The solve is Cholesky with a
condition guard of 1e12; precision="extended" switches to a longdouble
factorisation for the ill-conditioned high-order fits used by sampling
experiments, and "auto" escalates only after the float64 guard trips.

Brute-force Gram assembly over explicit basis tables is provided for
every kind as an independent oracle against the zonal closed forms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import harmonics as hm
from ._linalg import spd_solve_float64, spd_solve_longdouble
from .errors import (
    NumericalError,
    SingularSystemError,
    TruncationError,
    ValidationError,
)
from .lattice import GreatCircle, Lattice

KIND_POINT = "point"
KIND_CIRCLE = "circle"
KIND_PRODUCT_POINT = "product_point"
KIND_SO3_CIRCLE = "so3_circle"

_KIND_SPACE = {
    KIND_POINT: "s2",
    KIND_CIRCLE: "s2",
    KIND_PRODUCT_POINT: "s2xs2",
    KIND_SO3_CIRCLE: "so3",
}
_SPACE_DIM = {"s2": 2, "so3": 3, "s2xs2": 4}
_START_DEGREE = 64
_DEGREE_CAP = {"s2": 4096, "so3": 1024, "s2xs2": 1024}
_TAIL_FRACTION = 1.0e-10
_COND_GUARD = 1.0e12
_COINCIDENCE_TOL = 1.0e-10
_FOUR_PI = 4.0 * np.pi


def _unit(v: np.ndarray, what: str) -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(3)
    n = float(np.linalg.norm(v))
    if abs(n - 1.0) > 1.0e-8:
        raise ValidationError(f"{what} has norm {n}, expected a unit vector")
    return v / n


@dataclass(eq=False)
class Functional:
    """One interpolation condition; see the module-level constructors."""

    kind: str
    anchor_a: np.ndarray
    anchor_b: np.ndarray | None = None

    @property
    def space(self) -> str:
        return _KIND_SPACE[self.kind]


def point_eval(point: np.ndarray) -> Functional:
    """Point-evaluation functional f -> f(x) on S2."""
    return Functional(KIND_POINT, _unit(point, "evaluation point"))


def circle_integral(circle: GreatCircle | np.ndarray) -> Functional:
    """Arc-length integral over a great circle, keyed by its pole."""
    pole = np.asarray(circle.pole if isinstance(circle, GreatCircle) else circle)
    return Functional(KIND_CIRCLE, _unit(pole, "circle pole"))


def product_point_eval(x: np.ndarray, y: np.ndarray | None = None) -> Functional:
    """Point evaluation at (x, y) on S2 x S2; accepts one packed 6-vector."""
    if y is None:
        xy = np.asarray(x, dtype=float).reshape(6)
        x, y = xy[:3], xy[3:]
    return Functional(
        KIND_PRODUCT_POINT, _unit(x, "first factor point"), _unit(y, "second factor point")
    )


def rotation_circle_mean(x: np.ndarray, y: np.ndarray) -> Functional:
    """Mean over the rotation circle {g : g y = x} on SO(3).

    The circles attached to (x, y) and (-x, -y) coincide as subsets of
    SO(3); coincidence checks treat the two labellings as equal.
    """
    return Functional(KIND_SO3_CIRCLE, _unit(x, "target point"), _unit(y, "source point"))


def _sphere_weights(t: float, degree: int, dtype=np.float64) -> np.ndarray:
    k = np.arange(degree + 1, dtype=dtype)
    return (1.0 + k * (k + 1.0)) ** dtype(-t)


def _so3_weights(t: float, degree: int, dtype=np.float64) -> np.ndarray:
    k = np.arange(degree + 1, dtype=dtype)
    return (1.0 + 4.0 * k * (k + 1.0)) ** dtype(-t)


def _product_weight_grid(t: float, degree: int, dtype=np.float64) -> np.ndarray:
    lam = np.arange(degree + 1, dtype=dtype)
    lam = lam * (lam + 1.0)
    return (1.0 + 2.0 * (lam[:, None] + lam[None, :])) ** dtype(-t)


def _circle_multipliers(degree: int, dtype=np.float64) -> np.ndarray:
    from . import radon_sphere

    return np.asarray(radon_sphere.funk_multipliers(degree), dtype=dtype)


def _degree_sizes(degree: int) -> list[int]:
    return [2 * k + 1 for k in range(degree + 1)]


def _angular(dots: np.ndarray) -> np.ndarray:
    return np.arccos(np.clip(dots, -1.0, 1.0))


@dataclass(eq=False)
class SplineProblem:
    """Functionals, smoothness order, and optional truncation degree.

    ``degree_max=None`` resolves the truncation automatically at fit time;
    an explicit value is honoured but fits still refuse when the series
    tail is too fat for it.
    """

    functionals: Sequence[Functional]
    t: float
    degree_max: int | None = None
    space: str = field(init=False)

    def __post_init__(self) -> None:
        self.functionals = list(self.functionals)
        if not self.functionals:
            raise ValidationError("need at least one functional")
        spaces = {f.space for f in self.functionals}
        if len(spaces) > 1:
            raise ValidationError(f"functionals mix spaces {sorted(spaces)}")
        self.space = spaces.pop()
        dim = _SPACE_DIM[self.space]
        if not self.t > dim:
            raise ValidationError(
                f"smoothness order t={self.t} must exceed the dimension {dim} of {self.space}"
            )
        if self.degree_max is not None:
            if self.degree_max < 1:
                raise ValidationError("degree_max must be positive")
            if self.degree_max > _DEGREE_CAP[self.space]:
                raise ValidationError(
                    f"degree_max {self.degree_max} beyond cap {_DEGREE_CAP[self.space]}"
                )
        self._kinds = [f.kind for f in self.functionals]
        self._anchors_a = np.array([f.anchor_a for f in self.functionals])
        if self.functionals[0].anchor_b is not None:
            self._anchors_b = np.array([f.anchor_b for f in self.functionals])
        else:
            self._anchors_b = None
        self._check_distinct()

    def _check_distinct(self) -> None:
        for kind in set(self._kinds):
            idx = np.array([i for i, kd in enumerate(self._kinds) if kd == kind])
            if idx.size < 2:
                continue
            A = self._anchors_a[idx]
            da = _angular(A @ A.T)
            if kind == KIND_POINT:
                dist = da
            elif kind == KIND_CIRCLE:
                dist = np.minimum(da, _angular(-(A @ A.T)))
            else:
                B = self._anchors_b[idx]
                db = _angular(B @ B.T)
                if kind == KIND_PRODUCT_POINT:
                    dist = np.hypot(da, db)
                else:
                    straight = np.maximum(da, db)
                    flipped = np.maximum(_angular(-(A @ A.T)), _angular(-(B @ B.T)))
                    dist = np.minimum(straight, flipped)
            np.fill_diagonal(dist, np.inf)
            r, c = np.unravel_index(np.argmin(dist), dist.shape)
            if dist[r, c] < _COINCIDENCE_TOL:
                raise ValidationError(
                    f"functionals {idx[r]} and {idx[c]} coincide; the "
                    "interpolation problem is singular"
                )

    def __len__(self) -> int:
        return len(self.functionals)

    @property
    def has_circle(self) -> bool:
        return KIND_CIRCLE in self._kinds

    def multiplier_table(self, degree: int, dtype=np.float64) -> np.ndarray | None:
        """Per-functional degree multipliers, or None when all are trivial."""
        if self.space != "s2" or not self.has_circle:
            return None
        mu = _circle_multipliers(degree, dtype)
        table = np.ones((len(self), degree + 1), dtype=dtype)
        for r, kind in enumerate(self._kinds):
            if kind == KIND_CIRCLE:
                table[r] = mu
        return table

    def diagonal(self, degree: int) -> np.ndarray:
        """Exact Gram diagonal at the given truncation degree."""
        k = np.arange(degree + 1, dtype=float)
        if self.space == "s2":
            w = _sphere_weights(self.t, degree)
            base = w * (2.0 * k + 1.0) / _FOUR_PI
            point_diag = float(np.sum(base))
            mu = _circle_multipliers(degree)
            circle_diag = float(np.sum(base * mu * mu))
            return np.array(
                [circle_diag if kd == KIND_CIRCLE else point_diag for kd in self._kinds]
            )
        if self.space == "so3":
            w = _so3_weights(self.t, degree)
            val = float(np.sum(w * (2.0 * k + 1.0)))
            return np.full(len(self), val)
        W = _product_weight_grid(self.t, degree)
        deg = (2.0 * k + 1.0) / _FOUR_PI
        val = float(deg @ W @ deg)
        return np.full(len(self), val)

    def tail_bound(self, degree: int) -> float:
        """Entrywise bound on the truncated-away part of any Gram entry."""
        return _tail_bound(self.space, self.t, degree, self.has_circle)

    def resolve_degree(self) -> tuple[int, float, float]:
        """Truncation degree with its tail bound and minimum diagonal.

        Fixed ``degree_max`` is returned as-is (the caller enforces the
        refusal rule); otherwise the degree doubles from 64 until the tail
        bound drops under the refusal fraction of the smallest diagonal.
        """
        if self.degree_max is not None:
            deg = self.degree_max
            return deg, self.tail_bound(deg), float(np.min(self.diagonal(deg)))
        deg = _START_DEGREE
        cap = _DEGREE_CAP[self.space]
        while True:
            tail = self.tail_bound(deg)
            dmin = float(np.min(self.diagonal(deg)))
            if tail <= _TAIL_FRACTION * dmin or deg >= cap:
                return deg, tail, dmin
            deg = min(2 * deg, cap)


def _integral_tail_s2(degree: int, t: float) -> float:
    # exact integral of (2x+1)(1+x(x+1))^(-t) from `degree` upward
    return (1.0 + degree * (degree + 1.0)) ** (1.0 - t) / (t - 1.0)


def _integral_tail_so3(degree: int, t: float) -> float:
    return (1.0 + 4.0 * degree * (degree + 1.0)) ** (1.0 - t) / (4.0 * (t - 1.0))


def _integral_tail_half_product(degree: int, tau: float) -> float:
    # sum_{k>K} (2k+1) (1+2k(k+1))^(-tau), bounded by the matching integral
    return (1.0 + 2.0 * degree * (degree + 1.0)) ** (1.0 - tau) / (2.0 * (tau - 1.0))


def _tail_bound(space: str, t: float, degree: int, has_circle: bool) -> float:
    window = 512
    if space == "s2":
        k = np.arange(degree + 1, degree + window + 1, dtype=float)
        w = (1.0 + k * (k + 1.0)) ** (-t)
        factor = np.ones_like(k)
        if has_circle:
            mu = _circle_multipliers(degree + window)
            factor = np.maximum(1.0, (mu * mu)[degree + 1 :])
        partial = float(np.sum(w * (2.0 * k + 1.0) * factor)) / _FOUR_PI
        cap = _FOUR_PI**2 if has_circle else 1.0
        rest = cap * _integral_tail_s2(degree + window, t) / _FOUR_PI
        return partial + rest
    if space == "so3":
        k = np.arange(degree + 1, degree + window + 1, dtype=float)
        w = (1.0 + 4.0 * k * (k + 1.0)) ** (-t)
        partial = float(np.sum(w * (2.0 * k + 1.0)))
        return partial + _integral_tail_so3(degree + window, t)
    # product space: numeric over an extended box, analytic beyond it
    ext = degree + 256
    lam = np.arange(ext + 1, dtype=float)
    lam = lam * (lam + 1.0)
    W = (1.0 + 2.0 * (lam[:, None] + lam[None, :])) ** (-t)
    deg = (2.0 * np.arange(ext + 1, dtype=float) + 1.0) / _FOUR_PI
    full = float(deg @ W @ deg)
    inner = float(deg[: degree + 1] @ W[: degree + 1, : degree + 1] @ deg[: degree + 1])
    remainder = np.inf
    for s in (1.25, 1.5, 2.0, 3.0):
        if t - s <= 1.0:
            continue
        one_axis = float(
            np.sum(
                (2.0 * np.arange(201, dtype=float) + 1.0)
                * (1.0 + 2.0 * lam[:201]) ** (-s)
            )
        ) + _integral_tail_half_product(200, s)
        cand = 2.0 * _integral_tail_half_product(ext, t - s) * one_axis / _FOUR_PI**2
        remainder = min(remainder, cand)
    return (full - inner) + remainder


# ---------------------------------------------------------------------------
# zonal kernel assembly


def _legendre_pair_sum(
    dots_a: np.ndarray, dots_b: np.ndarray | None, coeff: np.ndarray
) -> np.ndarray:
    """sum_k coeff_k P_k(dots_a) [P_k(dots_b)] by simultaneous recurrence."""
    K = coeff.shape[0] - 1
    dtype = coeff.dtype
    pa_prev = np.ones_like(dots_a)
    pa = np.array(dots_a, dtype=dtype)
    acc = coeff[0] * pa_prev
    if dots_b is not None:
        pb_prev = np.ones_like(dots_b)
        pb = np.array(dots_b, dtype=dtype)
    for k in range(1, K + 1):
        term = pa if dots_b is None else pa * pb
        acc = acc + coeff[k] * term
        if k == K:
            break
        pa, pa_prev = ((2 * k + 1) * dots_a * pa - k * pa_prev) / dtype(k + 1), pa
        if dots_b is not None:
            pb, pb_prev = ((2 * k + 1) * dots_b * pb - k * pb_prev) / dtype(k + 1), pb
    return acc


def _legendre_stack(dots: np.ndarray, degree: int) -> np.ndarray:
    out = np.empty((degree + 1,) + dots.shape, dtype=dots.dtype)
    out[0] = 1.0
    if degree >= 1:
        out[1] = dots
    for k in range(1, degree):
        out[k + 1] = ((2 * k + 1) * dots * out[k] - k * out[k - 1]) / (k + 1)
    return out


def _s2_kernel(
    anchors_r: np.ndarray,
    mult_r: np.ndarray | None,
    anchors_c: np.ndarray,
    mult_c: np.ndarray | None,
    weights: np.ndarray,
) -> np.ndarray:
    dtype = weights.dtype
    D = np.clip(anchors_r.astype(dtype) @ anchors_c.astype(dtype).T, -1.0, 1.0)
    K = weights.shape[0] - 1
    g = weights * (2.0 * np.arange(K + 1, dtype=dtype) + 1.0) / dtype(_FOUR_PI)
    if mult_r is None and mult_c is None:
        return _legendre_pair_sum(D, None, g)
    mr = np.ones((anchors_r.shape[0], K + 1), dtype=dtype) if mult_r is None else mult_r
    mc = np.ones((anchors_c.shape[0], K + 1), dtype=dtype) if mult_c is None else mult_c
    pa_prev = np.ones_like(D)
    pa = D.copy()
    acc = g[0] * np.outer(mr[:, 0], mc[:, 0])
    for k in range(1, K + 1):
        acc = acc + g[k] * np.outer(mr[:, k], mc[:, k]) * pa
        if k == K:
            break
        pa, pa_prev = ((2 * k + 1) * D * pa - k * pa_prev) / dtype(k + 1), pa
    return acc


def _so3_kernel(
    ax_r: np.ndarray,
    ay_r: np.ndarray,
    ax_c: np.ndarray,
    ay_c: np.ndarray,
    weights: np.ndarray,
) -> np.ndarray:
    dtype = weights.dtype
    Dx = np.clip(ax_r.astype(dtype) @ ax_c.astype(dtype).T, -1.0, 1.0)
    Dy = np.clip(ay_r.astype(dtype) @ ay_c.astype(dtype).T, -1.0, 1.0)
    K = weights.shape[0] - 1
    g = weights * (2.0 * np.arange(K + 1, dtype=dtype) + 1.0)
    return _legendre_pair_sum(Dx, Dy, g)


def _product_kernel(
    ax_r: np.ndarray,
    ay_r: np.ndarray,
    ax_c: np.ndarray,
    ay_c: np.ndarray,
    weight_grid: np.ndarray,
) -> np.ndarray:
    dtype = weight_grid.dtype
    K = weight_grid.shape[0] - 1
    deg = 2.0 * np.arange(K + 1, dtype=dtype) + 1.0
    G = weight_grid * np.outer(deg, deg) / dtype(_FOUR_PI) ** 2
    nr, nc = ax_r.shape[0], ax_c.shape[0]
    out = np.empty((nr, nc), dtype=dtype)
    chunk = max(1, int(3.0e7 / ((K + 1) * max(nc, 1))))
    for lo in range(0, nr, chunk):
        hi = min(nr, lo + chunk)
        Dx = np.clip(ax_r[lo:hi].astype(dtype) @ ax_c.astype(dtype).T, -1.0, 1.0)
        Dy = np.clip(ay_r[lo:hi].astype(dtype) @ ay_c.astype(dtype).T, -1.0, 1.0)
        Lx = _legendre_stack(Dx, K)
        Ly = _legendre_stack(Dy, K)
        tmp = np.tensordot(G, Ly, axes=(1, 0))
        out[lo:hi] = np.einsum("knm,knm->nm", Lx, tmp)
    return out


def _kernel_rows(
    space: str,
    t: float,
    degree: int,
    dtype,
    rows_a: np.ndarray,
    rows_b: np.ndarray | None,
    rows_mult: np.ndarray | None,
    problem: SplineProblem,
) -> np.ndarray:
    if space == "s2":
        return _s2_kernel(
            rows_a,
            rows_mult,
            problem._anchors_a,
            problem.multiplier_table(degree, dtype),
            _sphere_weights(t, degree, dtype),
        )
    if space == "so3":
        return _so3_kernel(
            rows_a, rows_b, problem._anchors_a, problem._anchors_b,
            _so3_weights(t, degree, dtype),
        )
    return _product_kernel(
        rows_a, rows_b, problem._anchors_a, problem._anchors_b,
        _product_weight_grid(t, degree, dtype),
    )


def gram(problem: SplineProblem, degree: int | None = None, dtype=np.float64) -> np.ndarray:
    """Closed-form Gram matrix at the resolved (or given) truncation."""
    if degree is None:
        degree = problem.resolve_degree()[0]
    B = _kernel_rows(
        problem.space,
        problem.t,
        degree,
        dtype,
        problem._anchors_a,
        problem._anchors_b,
        problem.multiplier_table(degree, dtype),
        problem,
    )
    return 0.5 * (B + B.T)


def gram_bruteforce(problem: SplineProblem, degree: int) -> np.ndarray:
    """Gram by explicit sums over basis tables; oracle for ``gram``.

    Cost grows with (degree+1)^2 basis columns, so keep the problem small.
    """
    t = problem.t
    if problem.space == "s2":
        A = hm.sph_harm_table(degree, problem._anchors_a)
        mult = problem.multiplier_table(degree)
        if mult is not None:
            A = A * np.repeat(mult, _degree_sizes(degree), axis=1)
        w_flat = np.repeat(_sphere_weights(t, degree), _degree_sizes(degree))
        return (A * w_flat) @ A.T
    Tx = hm.sph_harm_table(degree, problem._anchors_a)
    Ty = hm.sph_harm_table(degree, problem._anchors_b)
    n = len(problem)
    out = np.zeros((n, n))
    if problem.space == "so3":
        w = _so3_weights(t, degree)
        for k in range(degree + 1):
            sl = hm.degree_slice(k)
            Gx = Tx[:, sl] @ Tx[:, sl].T
            Gy = Ty[:, sl] @ Ty[:, sl].T
            out += w[k] * (_FOUR_PI**2 / (2 * k + 1)) * Gx * Gy
        return out
    W = _product_weight_grid(t, degree)
    Gx = [Tx[:, hm.degree_slice(k)] @ Tx[:, hm.degree_slice(k)].T for k in range(degree + 1)]
    Gy = [Ty[:, hm.degree_slice(k)] @ Ty[:, hm.degree_slice(k)].T for k in range(degree + 1)]
    for k1 in range(degree + 1):
        for k2 in range(degree + 1):
            out += W[k1, k2] * Gx[k1] * Gy[k2]
    return out


# ---------------------------------------------------------------------------
# fitted splines


@dataclass(eq=False)
class Spline:
    """Fitted interpolant; treat as immutable."""

    problem: SplineProblem
    alpha: np.ndarray
    values: np.ndarray
    degree_used: int
    info: dict

    @property
    def t(self) -> float:
        return self.problem.t

    def _apply_rows(
        self,
        rows_a: np.ndarray,
        rows_b: np.ndarray | None,
        rows_mult: np.ndarray | None,
    ) -> np.ndarray:
        p = self.problem
        dtype = self.alpha.dtype
        n_rows = rows_a.shape[0]
        out = np.empty(n_rows)
        chunk = max(1, int(2.0e7 // max(len(p), 1)))
        for lo in range(0, n_rows, chunk):
            hi = min(n_rows, lo + chunk)
            block = _kernel_rows(
                p.space,
                p.t,
                self.degree_used,
                dtype,
                rows_a[lo:hi],
                None if rows_b is None else rows_b[lo:hi],
                None if rows_mult is None else rows_mult[lo:hi],
                p,
            )
            out[lo:hi] = (block @ self.alpha).astype(float)
        return out

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Spline values at (n, 3) unit vectors or (n, 6) packed pairs.

        SO(3) splines are evaluated at rotations through ``so3_spectrum``;
        see ``circle_means`` for their sampled forward values.
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.problem.space == "s2":
            if pts.shape[1] != 3:
                raise ValidationError("s2 splines evaluate at (n, 3) unit vectors")
            return self._apply_rows(pts, None, None)
        if self.problem.space == "s2xs2":
            if pts.shape[1] != 6:
                raise ValidationError("product splines evaluate at (n, 6) pairs")
            return self._apply_rows(pts[:, :3], pts[:, 3:], None)
        raise ValidationError("evaluate SO(3) splines through so3_spectrum()")

    def circle_means(self, pairs: np.ndarray) -> np.ndarray:
        """Circle-mean values of an SO(3) spline at (n, 6) pairs (x, y)."""
        if self.problem.space != "so3":
            raise ValidationError("circle_means applies to SO(3) splines")
        pr = np.atleast_2d(np.asarray(pairs, dtype=float))
        if pr.shape[1] != 6:
            raise ValidationError("expected (n, 6) packed (x, y) pairs")
        return self._apply_rows(pr[:, :3], pr[:, 3:], None)

    def funk_values(self, poles: np.ndarray) -> np.ndarray:
        """Great-circle integrals of an s2 spline at the given poles."""
        if self.problem.space != "s2":
            raise ValidationError("funk_values applies to s2 splines")
        poles = np.atleast_2d(np.asarray(poles, dtype=float))
        dtype = self.alpha.dtype
        mu = _circle_multipliers(self.degree_used, dtype)
        mult = np.broadcast_to(mu, (poles.shape[0], mu.shape[0]))
        return self._apply_rows(poles, None, np.asarray(mult))

    def functional_values(self, functionals: Sequence[Functional] | None = None) -> np.ndarray:
        """Apply functionals (default: the problem's own) to the spline."""
        p = self.problem
        if functionals is None:
            return self._apply_rows(
                p._anchors_a, p._anchors_b, p.multiplier_table(self.degree_used, self.alpha.dtype)
            )
        fl = list(functionals)
        spaces = {f.space for f in fl}
        if spaces != {p.space}:
            raise ValidationError("query functionals live on a different space")
        rows_a = np.array([f.anchor_a for f in fl])
        rows_b = (
            np.array([f.anchor_b for f in fl]) if fl[0].anchor_b is not None else None
        )
        rows_mult = None
        if p.space == "s2" and any(f.kind == KIND_CIRCLE for f in fl):
            mu = _circle_multipliers(self.degree_used, self.alpha.dtype)
            rows_mult = np.ones((len(fl), mu.shape[0]), dtype=self.alpha.dtype)
            for r, f in enumerate(fl):
                if f.kind == KIND_CIRCLE:
                    rows_mult[r] = mu
        return self._apply_rows(rows_a, rows_b, rows_mult)

    def residual(self) -> float:
        return float(self.info["interp_residual"])

    # -- spectra ------------------------------------------------------------

    def spectrum(self, degree: int | None = None) -> hm.SphereSpectrum:
        """Coefficient vector of an s2 spline, truncated at ``degree``.

        Defaults to min(degree_used, SPHERE_DEGREE_CAP).  ``evaluate``
        carries the full resolved series; a truncated spectrum is only
        lossy for small t where the resolved degree is large.
        """
        if self.problem.space != "s2":
            raise ValidationError("spectrum() applies to s2 splines")
        if degree is None:
            degree = min(self.degree_used, hm.SPHERE_DEGREE_CAP)
        A = hm.sph_harm_table(degree, self.problem._anchors_a)
        mult = self.problem.multiplier_table(degree)
        if mult is not None:
            A = A * np.repeat(mult, _degree_sizes(degree), axis=1)
        w_flat = np.repeat(_sphere_weights(self.t, degree), _degree_sizes(degree))
        coeffs = w_flat * (A.T @ np.asarray(self.alpha, dtype=float))
        return hm.SphereSpectrum(degree, coeffs)

    def so3_spectrum(self, degree: int | None = None) -> hm.SO3Spectrum:
        """Blockwise coefficients of an SO(3) spline."""
        if self.problem.space != "so3":
            raise ValidationError("so3_spectrum() applies to so3 splines")
        if degree is None:
            degree = min(self.degree_used, hm.SO3_DEGREE_CAP)
        w = _so3_weights(self.t, degree)
        Tx = hm.sph_harm_table(degree, self.problem._anchors_a)
        Ty = hm.sph_harm_table(degree, self.problem._anchors_b)
        a = np.asarray(self.alpha, dtype=float)
        blocks = []
        for k in range(degree + 1):
            sl = hm.degree_slice(k)
            block = (Tx[:, sl] * a[:, None]).T @ Ty[:, sl]
            blocks.append((w[k] * _FOUR_PI / (2 * k + 1)) * block.astype(complex))
        return hm.SO3Spectrum(degree, blocks)

    def product_block(self, k1: int, k2: int) -> np.ndarray:
        """One (2k1+1) x (2k2+1) coefficient block of a product spline."""
        if self.problem.space != "s2xs2":
            raise ValidationError("product blocks apply to s2xs2 splines")
        lam = k1 * (k1 + 1.0) + k2 * (k2 + 1.0)
        w = (1.0 + 2.0 * lam) ** (-self.t)
        Tx = hm.sph_harm_table(k1, self.problem._anchors_a)[:, hm.degree_slice(k1)]
        Ty = hm.sph_harm_table(k2, self.problem._anchors_b)[:, hm.degree_slice(k2)]
        a = np.asarray(self.alpha, dtype=float)
        return w * ((Tx * a[:, None]).T @ Ty)

    # -- norms --------------------------------------------------------------

    def norm_squared_from_data(self) -> float:
        return float(np.dot(np.asarray(self.alpha, dtype=float), self.values))

    def norm_squared_spectral(self) -> float:
        """H_t energy re-accumulated degree by degree from zonal forms.

        Summed at the full resolved degree so the comparison against the
        alpha.v identity isolates the quality of the solve.
        """
        p = self.problem
        a = np.asarray(self.alpha, dtype=float)
        if p.space == "s2":
            D = np.clip(p._anchors_a @ p._anchors_a.T, -1.0, 1.0)
            w = _sphere_weights(self.t, self.degree_used)
            mult = p.multiplier_table(self.degree_used)
            L = _legendre_stack(D, self.degree_used)
            total = 0.0
            for k in range(self.degree_used + 1):
                av = a if mult is None else a * mult[:, k]
                total += w[k] * (2 * k + 1) / _FOUR_PI * float(av @ L[k] @ av)
            return total
        if p.space == "so3":
            Dx = np.clip(p._anchors_a @ p._anchors_a.T, -1.0, 1.0)
            Dy = np.clip(p._anchors_b @ p._anchors_b.T, -1.0, 1.0)
            w = _so3_weights(self.t, self.degree_used)
            Lx = _legendre_stack(Dx, self.degree_used)
            Ly = _legendre_stack(Dy, self.degree_used)
            total = 0.0
            for k in range(self.degree_used + 1):
                total += w[k] * (2 * k + 1) * float(a @ (Lx[k] * Ly[k]) @ a)
            return total
        Dx = np.clip(p._anchors_a @ p._anchors_a.T, -1.0, 1.0)
        Dy = np.clip(p._anchors_b @ p._anchors_b.T, -1.0, 1.0)
        K = self.degree_used
        W = _product_weight_grid(self.t, K)
        Lx = _legendre_stack(Dx, K)
        Ly = _legendre_stack(Dy, K)
        deg = 2.0 * np.arange(K + 1) + 1.0
        M = np.outer(a, a)
        Q = np.tensordot(Lx * M[None, :, :], Ly, axes=([1, 2], [1, 2]))
        scale = W * np.outer(deg, deg) / _FOUR_PI**2
        return float(np.sum(scale * Q))

    def sobolev_norm(self, check: bool = True, rel_tol: float = 1.0e-8) -> float:
        """H_t norm via the alpha.v identity, cross-checked spectrally."""
        n2 = self.norm_squared_from_data()
        if check:
            n2s = self.norm_squared_spectral()
            if abs(n2 - n2s) > rel_tol * max(1.0, abs(n2)):
                raise NumericalError(
                    f"norm identity violated: alpha.v {n2:.12e} vs spectral {n2s:.12e}"
                )
        return float(np.sqrt(max(n2, 0.0)))


def fit(
    problem: SplineProblem,
    values: np.ndarray,
    precision: str = "float64",
    cond_guard: float = _COND_GUARD,
) -> Spline:
    """Solve the interpolation system and return the spline.

    precision: "float64" (guarded Cholesky, the default), "extended"
    (longdouble factorisation for condition numbers beyond the float64
    guard), or "auto" (float64 first, escalate on a guard trip).
    """
    v = np.asarray(values, dtype=float).reshape(-1)
    if v.shape[0] != len(problem):
        raise ValidationError(f"got {v.shape[0]} values for {len(problem)} functionals")
    if not np.all(np.isfinite(v)):
        raise ValidationError("values contain non-finite entries")
    if precision not in ("float64", "extended", "auto"):
        raise ValidationError(f"unknown precision {precision!r}")

    degree, tail, dmin = problem.resolve_degree()
    if tail > _TAIL_FRACTION * dmin:
        raise TruncationError(
            f"series tail bound {tail:.3e} exceeds {_TAIL_FRACTION:.0e} of the "
            f"smallest diagonal entry {dmin:.3e} at degree {degree}; raise "
            "degree_max or the smoothness order"
        )

    if precision == "extended":
        B = gram(problem, degree, dtype=np.longdouble)
        alpha, cond = spd_solve_longdouble(B, v.astype(np.longdouble))
        used = "extended"
    else:
        B = gram(problem, degree)
        try:
            alpha, cond = spd_solve_float64(B, v, cond_guard)
            used = "float64"
        except SingularSystemError:
            if precision != "auto":
                raise
            B = gram(problem, degree, dtype=np.longdouble)
            alpha, cond = spd_solve_longdouble(B, v.astype(np.longdouble))
            used = "extended"
    resid = float(np.max(np.abs((B @ alpha - v.astype(alpha.dtype)).astype(float))))
    info = {
        "tail_bound": tail,
        "diag_min": dmin,
        "condition": cond,
        "precision": used,
        "interp_residual": resid,
    }
    return Spline(problem=problem, alpha=alpha, values=v, degree_used=degree, info=info)


def pairing_t(spline: Spline, other: hm.SphereSpectrum | hm.SO3Spectrum) -> float:
    """H_t inner product of a spline with a band-limited function.

    The weighted pairing telescopes to sum_j [dual coefficient] c_j(h);
    the dual coefficients are plain table sums without the (1+lambda)^(-t)
    factor, so no extreme scales appear.
    """
    p = spline.problem
    a = np.asarray(spline.alpha, dtype=float)
    if p.space == "s2" and isinstance(other, hm.SphereSpectrum):
        K = other.degree_max
        A = hm.sph_harm_table(K, p._anchors_a)
        mult = p.multiplier_table(K)
        if mult is not None:
            A = A * np.repeat(mult, _degree_sizes(K), axis=1)
        q = A.T @ a
        return float(np.dot(q, other.coeffs))
    if p.space == "so3" and isinstance(other, hm.SO3Spectrum):
        K = other.degree_max
        Tx = hm.sph_harm_table(K, p._anchors_a)
        Ty = hm.sph_harm_table(K, p._anchors_b)
        total = 0.0
        for k in range(K + 1):
            sl = hm.degree_slice(k)
            q = (Tx[:, sl] * a[:, None]).T @ Ty[:, sl] * (_FOUR_PI / (2 * k + 1))
            total += (2 * k + 1) * float(np.real(np.sum(q * np.conj(other.blocks[k]))))
        return total
    raise ValidationError("unsupported spline/spectrum pairing")


def lagrangian_cubature(lat: Lattice, t: float, degree_max: int | None = None):
    """Integration weights from the Lagrangian splines of a point lattice.

    weight_nu = integral of the spline that is 1 at node nu and 0 at the
    others; equivalently beta^{-1} applied to the all-ones vector, because
    the sphere integral of a point-kernel spline is the sum of its alpha.
    The rule is exact on splines sharing these nodes and order, not on a
    polynomial degree; ``degree`` is stored as 0 and ``residual`` records
    the defect on the constant function.
    """
    from .cubature import CubatureRule

    if lat.space != "s2":
        raise ValidationError("Lagrangian cubature is built on s2 lattices")
    problem = SplineProblem([point_eval(p) for p in lat.points], t=t, degree_max=degree_max)
    spline = fit(problem, np.ones(len(problem)))
    weights = np.asarray(spline.alpha, dtype=float)
    residual = abs(float(np.sum(weights)) - _FOUR_PI) / _FOUR_PI
    return CubatureRule(
        space="s2",
        degree=0,
        points=lat.points,
        weights=weights,
        residual=residual,
        rho=lat.rho,
        method=f"lagrangian_spline_t{t:g}",
    )


def sampling_reconstruct(
    lat: Lattice | np.ndarray,
    samples: np.ndarray,
    t: float,
    m: int = 0,
    precision: str = "auto",
) -> Spline:
    """Point-interpolating spline of order 2^m * t through lattice samples.

    Successive m double the smoothness order; for dense-enough lattices
    the L2 distance to the sampled function decreases along the sequence.
    """
    points = lat.points if isinstance(lat, Lattice) else np.atleast_2d(lat)
    problem = SplineProblem([point_eval(p) for p in points], t=float(2**m) * t)
    return fit(problem, samples, precision=precision)
