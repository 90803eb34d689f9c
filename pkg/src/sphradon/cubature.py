"""Positive cubature rules on S2 lattices, exact to a prescribed degree.

The moment system asks for sum_nu w_nu Y_k^i(x_nu) = sqrt(4 pi) delta_{k0}
delta_{i1} for all degrees k up to the exactness degree.  Rows are scaled
by 1/sqrt(2k+1) before solving, which keeps the residual metric balanced
across degrees.  Two solvers are available:

* ``nnls``:     non-negative least squares, followed by a strict-positivity
  repair step (drop zero-weight points, re-solve on the support).  This is
  the reference route for small and medium systems.
* ``minnorm``:  minimum-norm correction of the equal-weight vector,
  w = w0 + A^T (A A^T)^{-1} (b - A w0).  On quasi-uniform lattices the
  correction is small and every point keeps a strictly positive weight;
  this route scales to the high-degree systems used by frame atlases.

``auto`` (the default for internal callers) tries minnorm first and falls
back to nnls when positivity fails.  In all cases a rule is returned only
when the scaled moment residual is at most the tolerance and every
retained weight is strictly positive; otherwise ``CubatureInfeasibleError``
is raised.

The module also ships an empirical calibration table mapping exactness
degree to the largest lattice parameter rho for which the solve succeeded;
``rho_for_degree`` applies a 0.7 safety factor to it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

import numpy as np
from scipy.optimize import nnls as _nnls

from .errors import CubatureInfeasibleError, ValidationError
from .harmonics import SphereSpectrum, degree_slice, num_coeffs, sph_harm_table
from .lattice import Lattice

_RESIDUAL_TOL = 1.0e-9


@dataclass
class CubatureRule:
    """Positive quadrature rule exact for spherical polynomials <= degree."""

    space: str
    degree: int
    points: np.ndarray
    weights: np.ndarray
    residual: float
    rho: float = 0.0
    method: str = ""

    def __post_init__(self) -> None:
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        self.weights = np.asarray(self.weights, dtype=float)
        if self.weights.shape[0] != self.points.shape[0]:
            raise ValidationError("weights and points disagree in length")

    def __len__(self) -> int:
        return self.points.shape[0]

    def integrate(self, values: np.ndarray) -> float:
        return float(np.dot(self.weights, values))

    def to_dict(self) -> dict:
        return {
            "space": self.space,
            "degree": self.degree,
            "points": self.points.tolist(),
            "weights": self.weights.tolist(),
            "residual": self.residual,
            "rho": self.rho,
            "method": self.method,
        }

    @staticmethod
    def from_dict(d: dict) -> "CubatureRule":
        return CubatureRule(
            d["space"], int(d["degree"]), np.asarray(d["points"], dtype=float),
            np.asarray(d["weights"], dtype=float), float(d["residual"]),
            float(d.get("rho", 0.0)), d.get("method", ""),
        )


def _moment_system(points: np.ndarray, degree: int) -> tuple[np.ndarray, np.ndarray]:
    A = sph_harm_table(degree, points).T
    scale = np.concatenate(
        [np.full(2 * k + 1, 1.0 / np.sqrt(2 * k + 1)) for k in range(degree + 1)]
    )
    b = np.zeros(A.shape[0])
    b[0] = np.sqrt(4.0 * np.pi)
    return A * scale[:, None], b * scale


def _solve_minnorm(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = A.shape[1]
    w0 = np.full(n, 4.0 * np.pi / n)
    G = A @ A.T
    y = np.linalg.solve(G, b - A @ w0)
    return w0 + A.T @ y


def solve_weights(
    lat: Lattice,
    degree: int,
    method: str = "nnls",
    residual_tol: float = _RESIDUAL_TOL,
) -> CubatureRule:
    """Strictly positive weights on the lattice, exact up to `degree`.

    Raises ``CubatureInfeasibleError`` when the lattice has fewer points
    than moments, when the residual stays above the tolerance, or when no
    strictly positive solution is found.
    """
    if lat.space != "s2":
        raise ValidationError(
            "moment-system cubature is implemented on s2; build product rules "
            "from two sphere rules for s2xs2"
        )
    n_mom = num_coeffs(degree)
    if len(lat) < n_mom:
        raise CubatureInfeasibleError(
            f"lattice has {len(lat)} points but degree {degree} needs at least {n_mom}"
        )
    A, b = _moment_system(lat.points, degree)

    def finish(points: np.ndarray, w: np.ndarray, how: str) -> CubatureRule:
        As, bs = _moment_system(points, degree)
        res = float(np.max(np.abs(As @ w - bs)))
        if res > residual_tol:
            raise CubatureInfeasibleError(
                f"moment residual {res:.3e} above tolerance {residual_tol:.1e}"
            )
        if w.min() <= 0.0:
            raise CubatureInfeasibleError("weights not strictly positive after repair")
        return CubatureRule("s2", degree, points, w, res, lat.rho, how)

    if method in ("minnorm", "auto"):
        w = _solve_minnorm(A, b)
        if w.min() > 0.0:
            return finish(lat.points, w, "minnorm")
        if method == "minnorm":
            raise CubatureInfeasibleError(
                f"minimum-norm weights not positive (min {w.min():.3e})"
            )

    if method in ("nnls", "auto"):
        w, _ = _nnls(A, b, maxiter=20 * A.shape[1])
        keep = w > 0.0
        if not keep.all():
            # repair: drop the zero-weight points and re-solve on the support
            w_s, _ = _nnls(A[:, keep], b, maxiter=20 * int(keep.sum()))
            if w_s.min() <= 0.0:
                raise CubatureInfeasibleError(
                    "zero weights persist after support re-solve"
                )
            return finish(lat.points[keep], w_s, "nnls")
        return finish(lat.points, w, "nnls")

    raise ValidationError(f"unknown method {method!r}")


def weight_report(rule: CubatureRule) -> dict:
    """Weight statistics; with rho attached, the caps-comparison trend."""
    w = rule.weights
    rep = {
        "n_points": len(rule),
        "w_min": float(w.min()),
        "w_max": float(w.max()),
        "w_sum": float(w.sum()),
        "spread": float(w.max() / w.min()),
    }
    if rule.rho > 0:
        cap_area = 2.0 * np.pi * (1.0 - np.cos(rule.rho))
        rep["w_over_cap_area_min"] = float(w.min() / cap_area)
        rep["w_over_cap_area_max"] = float(w.max() / cap_area)
    return rep


# ---------------------------------------------------------------------------
# discrete Fourier coefficients
# ---------------------------------------------------------------------------


def discrete_spectrum(
    rule: CubatureRule, values: np.ndarray, degree_max: int, band: int
) -> SphereSpectrum:
    """Coefficients sum_nu w_nu f(x_nu) Y_k^i(x_nu) for all k <= degree_max.

    Exact for band-limited f: the integrand f * Y_k is a spherical
    polynomial of degree band + k, so the rule degree must cover
    band + degree_max.
    """
    if band + degree_max > rule.degree:
        raise ValidationError(
            f"rule degree {rule.degree} insufficient for product band "
            f"{band} + {degree_max}"
        )
    values = np.asarray(values, dtype=float)
    if values.shape[0] != len(rule):
        raise ValidationError("sample count does not match rule size")
    T = sph_harm_table(degree_max, rule.points)
    return SphereSpectrum(degree_max, T.T @ (rule.weights * values))


def discrete_coefficient(
    rule: CubatureRule, values: np.ndarray, k: int, i: int, band: int
) -> float:
    """Single discrete coefficient; see ``discrete_spectrum``."""
    spec = discrete_spectrum(rule, values, k, band)
    return spec.get(k, i)


def align_samples(
    rule: CubatureRule, points: np.ndarray, values: np.ndarray, tol: float = 1.0e-8
) -> np.ndarray:
    """Reorder externally supplied samples to the rule's point order."""
    pts = np.atleast_2d(points)
    if pts.shape != rule.points.shape:
        raise ValidationError(
            f"sample table has shape {pts.shape}, rule expects {rule.points.shape}"
        )
    out = np.empty(len(rule))
    used = np.zeros(len(rule), dtype=bool)
    for r, p in enumerate(rule.points):
        d2 = np.sum((pts - p) ** 2, axis=1)
        j = int(np.argmin(d2))
        if d2[j] > tol * tol or used[j]:
            raise ValidationError(f"no unique sample matches rule point {r}")
        used[j] = True
        out[r] = values[j]
    return out


# ---------------------------------------------------------------------------
# product rules on S2 x S2
# ---------------------------------------------------------------------------


@dataclass
class ProductCubatureRule:
    """Tensor rule on S2 x S2 built from two sphere rules.

    Exact on functions whose degree in the first and second argument is at
    most the corresponding factor degree.  Sample vectors are laid out
    row-major over (first factor, second factor).
    """

    factor_a: CubatureRule
    factor_b: CubatureRule

    def __len__(self) -> int:
        return len(self.factor_a) * len(self.factor_b)

    @property
    def degrees(self) -> tuple[int, int]:
        return self.factor_a.degree, self.factor_b.degree

    def paired_points(self) -> np.ndarray:
        na, nb = len(self.factor_a), len(self.factor_b)
        a = np.repeat(self.factor_a.points, nb, axis=0)
        b = np.tile(self.factor_b.points, (na, 1))
        return np.concatenate([a, b], axis=1)

    def to_dict(self) -> dict:
        return {
            "space": "s2xs2",
            "factor_a": self.factor_a.to_dict(),
            "factor_b": self.factor_b.to_dict(),
        }

    @staticmethod
    def from_dict(d: dict) -> "ProductCubatureRule":
        if d.get("space") != "s2xs2":
            raise ValidationError("expected a product rule payload")
        return ProductCubatureRule(
            CubatureRule.from_dict(d["factor_a"]), CubatureRule.from_dict(d["factor_b"])
        )


# ---------------------------------------------------------------------------
# rho calibration
# ---------------------------------------------------------------------------

_calibration_cache: dict[int, float] | None = None


def calibration_table() -> dict[int, float]:
    """Calibrated largest feasible rho per exactness degree (shipped data)."""
    global _calibration_cache
    if _calibration_cache is None:
        text = resources.files("sphradon").joinpath(
            "data/cubature_calibration.json"
        ).read_text()
        raw = json.loads(text)
        _calibration_cache = {int(k): float(v) for k, v in raw["rho_max"].items()}
    return _calibration_cache


def rho_for_degree(degree: int, safety: float = 0.7) -> float:
    """Default lattice parameter for a target exactness degree.

    Interpolates the calibrated feasibility boundary in the scaled variable
    c = rho * degree and applies the safety factor.
    """
    if degree < 1:
        raise ValidationError("degree must be positive")
    table = calibration_table()
    degs = sorted(table)
    cs = [table[d] * d for d in degs]
    if degree <= degs[0]:
        c = cs[0]
    elif degree >= degs[-1]:
        c = cs[-1]
    else:
        c = float(np.interp(degree, degs, cs))
    return safety * c / degree


def lagrangian_cubature(lat: Lattice, t: float):
    """Weights from integrals of the Lagrangian splines on the lattice.

    Provided by the splines module; re-exported here because the result is
    a cubature object.
    """
    from . import splines

    return splines.lagrangian_cubature(lat, t)
