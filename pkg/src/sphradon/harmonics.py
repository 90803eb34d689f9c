"""Real spherical harmonics on S2 and rotation-matrix coefficients on SO(3).

Conventions used throughout the package:

* S2 carries the standard surface measure, total mass 4*pi.  The real
  orthonormal harmonics Y_k^i are indexed by degree k >= 0 and a 1-based
  index i in 1..2k+1.  Internally i maps to the classical order
  m = i - k - 1, with m < 0 the sine harmonics, m = 0 the zonal one and
  m > 0 the cosine harmonics.  Y_0^1 is the constant 1/sqrt(4*pi).
* SO(3) carries the Haar probability measure.  Rotations are parametrised
  by Euler angles g = Z(gamma) X(beta) Z(alpha) (matrix product, Z and X
  the usual rotations about the z and x axes), with alpha, gamma in
  [0, 2*pi) and beta in [0, pi].
* Functions are rotated by (T(g) f)(x) = f(g^{-1} x).  The degree-k matrix
  coefficient block T^k(g) is the matrix of T(g) on the real harmonics of
  degree k, so T^k(g1 g2) = T^k(g1) T^k(g2) and each block is a real
  orthogonal (2k+1) x (2k+1) matrix.  The entries are eigenfunctions of
  the Laplace operator on SO(3) with eigenvalue -k(k+1) and have squared
  L2 norm 1/(2k+1).

Coefficients:

* ``SphereSpectrum`` stores c_{k,i} = <f, Y_k^i>; Parseval reads
  ||f||^2 = sum c^2.
* ``SO3Spectrum`` stores blocks fhat(k)_{ij} = int f conj(T^k_{ij}) dg, so
  f = sum_k (2k+1) sum_{ij} fhat(k)_{ij} T^k_{ij} and
  ||f||^2 = sum_k (2k+1) ||fhat(k)||_F^2.

The dense quadrature grids in this module (Gauss-Legendre in the polar
variable crossed with uniform longitude nodes) are exact on polynomials up
to the stated degree and serve as the ground-truth oracles for every other
module.  They are capped at degree 64 on S2 and 32 on SO(3); requests past
the cap raise ``ValidationError`` rather than silently losing accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable

import numpy as np

from .errors import ValidationError

SPHERE_DEGREE_CAP = 64
SO3_DEGREE_CAP = 32

_UNIT_NORM_TOL = 1.0e-12


# ---------------------------------------------------------------------------
# small typed containers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpherePoint:
    """A point on the unit sphere, validated to unit norm."""

    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        n = np.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)
        if abs(n - 1.0) > _UNIT_NORM_TOL:
            raise ValidationError(f"point norm {n!r} deviates from 1 beyond 1e-12")

    @staticmethod
    def from_array(v: np.ndarray) -> "SpherePoint":
        return SpherePoint(float(v[0]), float(v[1]), float(v[2]))

    @staticmethod
    def from_angles(theta: float, phi: float) -> "SpherePoint":
        st = np.sin(theta)
        return SpherePoint(float(st * np.cos(phi)), float(st * np.sin(phi)), float(np.cos(theta)))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def angles(self) -> tuple[float, float]:
        """Colatitude / longitude pair (theta in [0, pi], phi in [0, 2 pi))."""
        theta = float(np.arccos(np.clip(self.z, -1.0, 1.0)))
        phi = float(np.arctan2(self.y, self.x)) % (2.0 * np.pi)
        return theta, phi

    def antipode(self) -> "SpherePoint":
        return SpherePoint(-self.x, -self.y, -self.z)


@dataclass(frozen=True)
class EulerRotation:
    """Euler-angle triple for g = Z(gamma) X(beta) Z(alpha)."""

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.beta <= np.pi + 1.0e-12):
            raise ValidationError(f"beta {self.beta!r} outside [0, pi]")

    def matrix(self) -> np.ndarray:
        return euler_to_matrix(
            np.array([self.alpha]), np.array([self.beta]), np.array([self.gamma])
        )[0]

    @staticmethod
    def from_matrix(m: np.ndarray) -> "EulerRotation":
        a, b, g = matrix_to_euler(m[None, :, :])
        return EulerRotation(float(a[0]), float(b[0]), float(g[0]))


def rotation_z(theta: float | np.ndarray) -> np.ndarray:
    """Rotation matrix (or stack) about the z axis."""
    theta = np.asarray(theta, dtype=float)
    c, s = np.cos(theta), np.sin(theta)
    out = np.zeros(theta.shape + (3, 3))
    out[..., 0, 0] = c
    out[..., 0, 1] = -s
    out[..., 1, 0] = s
    out[..., 1, 1] = c
    out[..., 2, 2] = 1.0
    return out


def rotation_x(theta: float | np.ndarray) -> np.ndarray:
    """Rotation matrix (or stack) about the x axis."""
    theta = np.asarray(theta, dtype=float)
    c, s = np.cos(theta), np.sin(theta)
    out = np.zeros(theta.shape + (3, 3))
    out[..., 0, 0] = 1.0
    out[..., 1, 1] = c
    out[..., 1, 2] = -s
    out[..., 2, 1] = s
    out[..., 2, 2] = c
    return out


def euler_to_matrix(alpha: np.ndarray, beta: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    """Batch conversion of Euler triples to rotation matrices."""
    return rotation_z(gamma) @ rotation_x(beta) @ rotation_z(alpha)


def matrix_to_euler(m: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Batch extraction of Euler angles from rotation matrices.

    For beta in the open interval (0, pi) the decomposition is unique with
    alpha, gamma in [0, 2*pi).  At the gimbal configurations beta = 0 or pi
    only the combination of alpha and gamma is determined; alpha = 0 is
    returned there by convention.
    """
    m = np.asarray(m, dtype=float)
    cb = np.clip(m[..., 2, 2], -1.0, 1.0)
    beta = np.arccos(cb)
    sb_ok = np.abs(cb) < 1.0 - 1.0e-12

    alpha = np.where(sb_ok, np.arctan2(m[..., 2, 0], m[..., 2, 1]), 0.0)
    gamma_generic = np.arctan2(m[..., 0, 2], -m[..., 1, 2])
    # at beta ~ 0 or pi the matrix collapses to Z(delta) (times X(pi));
    # in both cases delta = atan2(m10, m00) and we fold it all into gamma.
    gamma_degenerate = np.arctan2(m[..., 1, 0], m[..., 0, 0])
    gamma = np.where(sb_ok, gamma_generic, gamma_degenerate)
    return alpha % (2.0 * np.pi), beta, gamma % (2.0 * np.pi)


def rotation_distance(g1: np.ndarray, g2: np.ndarray) -> np.ndarray:
    """Geodesic (bi-invariant) distance on SO(3): the angle of g1 g2^T."""
    g1 = np.asarray(g1, dtype=float)
    g2 = np.asarray(g2, dtype=float)
    rel = g1 @ np.swapaxes(g2, -1, -2)
    tr = np.trace(rel, axis1=-2, axis2=-1)
    return np.arccos(np.clip((tr - 1.0) / 2.0, -1.0, 1.0))


def sphere_distance(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Great-circle distance between unit vectors (broadcasting)."""
    dots = np.clip(np.sum(np.asarray(p) * np.asarray(q), axis=-1), -1.0, 1.0)
    return np.arccos(dots)


# ---------------------------------------------------------------------------
# Legendre polynomials
# ---------------------------------------------------------------------------


def legendre_all(degree_max: int, x: np.ndarray) -> np.ndarray:
    """All Legendre polynomials P_0..P_degree_max at x, shape (K+1,) + x.shape.

    Three-term recurrence (k+1) P_{k+1} = (2k+1) x P_k - k P_{k-1}.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((degree_max + 1,) + x.shape)
    out[0] = 1.0
    if degree_max >= 1:
        out[1] = x
    for k in range(1, degree_max):
        out[k + 1] = ((2 * k + 1) * x * out[k] - k * out[k - 1]) / (k + 1)
    return out


def gegenbauer_half(degree: int, x: np.ndarray) -> np.ndarray:
    """Gegenbauer polynomial with parameter 1/2 at x.

    For that parameter the Gegenbauer family coincides with the Legendre
    polynomials, so this is evaluated with the same recurrence.
    """
    return legendre_all(degree, x)[degree]


def zonal_kernel(degree: int, dots: np.ndarray) -> np.ndarray:
    """Reproducing kernel of the degree-k harmonics: sum_i Y_k^i(x) Y_k^i(y).

    Equals (2k+1)/(4 pi) * P_k(x . y) by the addition identity.
    """
    return (2 * degree + 1) / (4.0 * np.pi) * gegenbauer_half(degree, dots)


# ---------------------------------------------------------------------------
# real spherical harmonics
# ---------------------------------------------------------------------------


def flat_index(k: int, i: int) -> int:
    """Flat position of (degree k, index i) in a packed coefficient vector."""
    if not 1 <= i <= 2 * k + 1:
        raise ValidationError(f"index i={i} outside 1..{2*k+1} for degree {k}")
    return k * k + i - 1


def degree_slice(k: int) -> slice:
    return slice(k * k, (k + 1) * (k + 1))


def num_coeffs(degree_max: int) -> int:
    return (degree_max + 1) ** 2


def sph_harm_table(degree_max: int, points: np.ndarray) -> np.ndarray:
    """Real orthonormal spherical harmonics at unit vectors.

    Returns an array of shape (npoints, (degree_max+1)**2) with column
    layout k*k + (i-1).  Evaluation runs the standard stable recurrence on
    normalised associated Legendre functions; no Condon-Shortley phase
    appears in the real basis.

    Unlike spectra and quadrature helpers this routine is not held to
    SPHERE_DEGREE_CAP: the normalised recurrence stays stable to very high
    degree and spline truncation checks legitimately need large tables.
    """
    if degree_max > 4096:
        raise ValidationError(f"degree {degree_max} beyond hard table cap 4096")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n = pts.shape[0]
    ct = np.clip(pts[:, 2], -1.0, 1.0)
    st = np.sqrt(np.maximum(0.0, 1.0 - ct * ct))
    phi = np.arctan2(pts[:, 1], pts[:, 0])

    K = degree_max
    out = np.empty((n, (K + 1) ** 2))

    # plm[m] holds the fully normalised associated Legendre value tied to
    # the current diagonal walk; we fill degree blocks column by column.
    # Work per order m: seed P~_m^m, then recur upward in degree.
    cos_m = [np.ones(n)]
    sin_m = [np.zeros(n)]
    for m in range(1, K + 1):
        cos_m.append(cos_m[m - 1] * np.cos(phi) - sin_m[m - 1] * np.sin(phi))
        sin_m.append(sin_m[m - 1] * np.cos(phi) + cos_m[m - 1] * np.sin(phi))

    pmm = np.full(n, np.sqrt(1.0 / (4.0 * np.pi)))
    for m in range(0, K + 1):
        if m > 0:
            pmm = pmm * st * np.sqrt((2 * m + 1) / (2.0 * m))
        # degree k = m
        _store_real_pair(out, m, m, pmm, cos_m[m], sin_m[m])
        if m == K:
            break
        pk_minus1 = pmm
        pk = ct * np.sqrt(2 * m + 3.0) * pmm
        _store_real_pair(out, m + 1, m, pk, cos_m[m], sin_m[m])
        for k in range(m + 2, K + 1):
            a = np.sqrt((4.0 * k * k - 1.0) / (k * k - m * m))
            b = np.sqrt(((k - 1.0) ** 2 - m * m) / (4.0 * (k - 1.0) ** 2 - 1.0))
            pk, pk_minus1 = a * (ct * pk - b * pk_minus1), pk
            _store_real_pair(out, k, m, pk, cos_m[m], sin_m[m])
    return out


def _store_real_pair(
    out: np.ndarray, k: int, m: int, pkm: np.ndarray,
    cmphi: np.ndarray, smphi: np.ndarray,
) -> None:
    base = k * k
    if m == 0:
        out[:, base + k] = pkm
    else:
        rt2 = np.sqrt(2.0)
        out[:, base + k + m] = rt2 * pkm * cmphi   # cosine harmonic, i = k+1+m
        out[:, base + k - m] = rt2 * pkm * smphi   # sine harmonic,   i = k+1-m


# ---------------------------------------------------------------------------
# coefficient containers
# ---------------------------------------------------------------------------


@dataclass
class SphereSpectrum:
    """Packed real coefficients of a function on S2 up to degree_max."""

    degree_max: int
    coeffs: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        n = num_coeffs(self.degree_max)
        if self.coeffs is None:
            self.coeffs = np.zeros(n)
        else:
            self.coeffs = np.asarray(self.coeffs, dtype=float)
            if self.coeffs.shape != (n,):
                raise ValidationError(
                    f"coefficient vector has shape {self.coeffs.shape}, expected ({n},)"
                )

    def get(self, k: int, i: int) -> float:
        return float(self.coeffs[flat_index(k, i)])

    def set(self, k: int, i: int, value: float) -> None:
        self.coeffs[flat_index(k, i)] = value

    def copy(self) -> "SphereSpectrum":
        return SphereSpectrum(self.degree_max, self.coeffs.copy())

    def degree_block(self, k: int) -> np.ndarray:
        return self.coeffs[degree_slice(k)]

    def norm(self) -> float:
        """L2 norm of the represented function (surface measure)."""
        return float(np.linalg.norm(self.coeffs))

    def sobolev_norm(self, t: float) -> float:
        """Norm with spectral weight (1 + k(k+1))^t."""
        w = [(1.0 + k * (k + 1.0)) ** t for k in range(self.degree_max + 1)]
        acc = 0.0
        for k in range(self.degree_max + 1):
            acc += w[k] * float(np.sum(self.degree_block(k) ** 2))
        return float(np.sqrt(acc))

    def even_energy(self) -> float:
        return sum(
            float(np.sum(self.degree_block(k) ** 2))
            for k in range(0, self.degree_max + 1, 2)
        )

    def odd_energy(self) -> float:
        return sum(
            float(np.sum(self.degree_block(k) ** 2))
            for k in range(1, self.degree_max + 1, 2)
        )

    def parity_project(self, even: bool = True) -> "SphereSpectrum":
        out = self.copy()
        start = 1 if even else 0
        for k in range(start, self.degree_max + 1, 2):
            out.coeffs[degree_slice(k)] = 0.0
        return out

    def scaled(self, factor: float) -> "SphereSpectrum":
        return SphereSpectrum(self.degree_max, self.coeffs * factor)

    @staticmethod
    def random_band(degree_max: int, seed: int, even_only: bool = False) -> "SphereSpectrum":
        rng = np.random.default_rng(seed)
        spec = SphereSpectrum(degree_max, rng.standard_normal(num_coeffs(degree_max)))
        if even_only:
            spec = spec.parity_project(even=True)
        return spec


@dataclass
class SO3Spectrum:
    """Blockwise matrix coefficients of a function on SO(3) up to degree_max.

    blocks[k] is a complex (2k+1, 2k+1) array of fhat(k); real input
    functions produce blocks with vanishing imaginary part.
    """

    degree_max: int
    blocks: list[np.ndarray] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.blocks is None:
            self.blocks = [
                np.zeros((2 * k + 1, 2 * k + 1), dtype=complex)
                for k in range(self.degree_max + 1)
            ]
        else:
            if len(self.blocks) != self.degree_max + 1:
                raise ValidationError("block count does not match degree_max")
            self.blocks = [np.asarray(b, dtype=complex) for b in self.blocks]
            for k, b in enumerate(self.blocks):
                if b.shape != (2 * k + 1, 2 * k + 1):
                    raise ValidationError(f"block {k} has shape {b.shape}")

    def copy(self) -> "SO3Spectrum":
        return SO3Spectrum(self.degree_max, [b.copy() for b in self.blocks])

    def norm(self) -> float:
        """L2 norm under the Haar probability measure."""
        acc = 0.0
        for k, b in enumerate(self.blocks):
            acc += (2 * k + 1) * float(np.sum(np.abs(b) ** 2))
        return float(np.sqrt(acc))

    def sobolev_norm(self, t: float) -> float:
        """Norm with spectral weight (1 + 4 k(k+1))^t."""
        acc = 0.0
        for k, b in enumerate(self.blocks):
            acc += (1.0 + 4.0 * k * (k + 1)) ** t * (2 * k + 1) * float(np.sum(np.abs(b) ** 2))
        return float(np.sqrt(acc))

    def scaled(self, factor: complex) -> "SO3Spectrum":
        return SO3Spectrum(self.degree_max, [b * factor for b in self.blocks])

    @staticmethod
    def random_band(degree_max: int, seed: int) -> "SO3Spectrum":
        rng = np.random.default_rng(seed)
        blocks = [
            rng.standard_normal((2 * k + 1, 2 * k + 1)).astype(complex)
            for k in range(degree_max + 1)
        ]
        return SO3Spectrum(degree_max, blocks)


# ---------------------------------------------------------------------------
# dense quadrature oracles
# ---------------------------------------------------------------------------


def sphere_quadrature(n_polar: int, n_longitude: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre x uniform-longitude product rule on S2.

    Returns (points, weights) with weights summing to 4*pi.  Exact for all
    spherical polynomials of degree <= min(2*n_polar - 1, n_longitude - 1).
    """
    x, w = np.polynomial.legendre.leggauss(n_polar)
    phi = 2.0 * np.pi * np.arange(n_longitude) / n_longitude
    ct = np.repeat(x, n_longitude)
    st = np.sqrt(np.maximum(0.0, 1.0 - ct * ct))
    ph = np.tile(phi, n_polar)
    pts = np.stack([st * np.cos(ph), st * np.sin(ph), ct], axis=1)
    wts = np.repeat(w, n_longitude) * (2.0 * np.pi / n_longitude)
    return pts, wts


def sphere_quadrature_for_degree(degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Product rule exact on spherical polynomials up to the given degree."""
    if degree > 2 * SPHERE_DEGREE_CAP:
        raise ValidationError(
            f"quadrature degree {degree} beyond cap {2 * SPHERE_DEGREE_CAP}"
        )
    return sphere_quadrature(degree // 2 + 1, degree + 1)


def sphere_integral(f: Callable[[np.ndarray], np.ndarray], degree: int) -> float:
    """Integral of f over S2 by the dense oracle rule of the given degree."""
    pts, wts = sphere_quadrature_for_degree(degree)
    return float(np.dot(wts, np.asarray(f(pts), dtype=float)))


def project_sphere(
    f: Callable[[np.ndarray], np.ndarray],
    degree_max: int,
    quad_degree: int | None = None,
) -> SphereSpectrum:
    """Coefficients of f against the real harmonics up to degree_max.

    The dense product rule is exact when f is a spherical polynomial of
    degree at most quad_degree - degree_max (default quad_degree is
    2 * degree_max, covering integrands of band equal to degree_max).
    """
    if quad_degree is None:
        quad_degree = 2 * degree_max
    pts, wts = sphere_quadrature_for_degree(quad_degree)
    coeffs = np.zeros(num_coeffs(degree_max))
    for start in range(0, pts.shape[0], 4096):
        blk = slice(start, start + 4096)
        table = sph_harm_table(degree_max, pts[blk])
        vals = np.asarray(f(pts[blk]), dtype=float)
        coeffs += table.T @ (wts[blk] * vals)
    return SphereSpectrum(degree_max, coeffs)


def evaluate_sphere(spec: SphereSpectrum, points: np.ndarray) -> np.ndarray:
    """Pointwise synthesis of a sphere spectrum at unit vectors."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.empty(pts.shape[0])
    for start in range(0, pts.shape[0], 4096):
        blk = slice(start, start + 4096)
        out[blk] = sph_harm_table(spec.degree_max, pts[blk]) @ spec.coeffs
    return out


def so3_quadrature(
    n_alpha: int, n_beta: int, n_gamma: int
) -> tuple[np.ndarray, np.ndarray]:
    """Product rule on SO(3) in Euler angles, normalised to total mass 1.

    Returns (eulers, weights) where eulers has shape (n, 3) holding
    (alpha, beta, gamma) triples; Gauss-Legendre in cos(beta), uniform in
    the two periodic angles.
    """
    xb, wb = np.polynomial.legendre.leggauss(n_beta)
    beta = np.arccos(xb)
    alpha = 2.0 * np.pi * np.arange(n_alpha) / n_alpha
    gamma = 2.0 * np.pi * np.arange(n_gamma) / n_gamma
    A, B, G = np.meshgrid(alpha, beta, gamma, indexing="ij")
    W = np.broadcast_to(wb[None, :, None], A.shape)
    eulers = np.stack([A.ravel(), B.ravel(), G.ravel()], axis=1)
    weights = (W / (2.0 * n_alpha * n_gamma)).ravel().copy()
    return eulers, weights


def so3_quadrature_for_degree(degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Euler product rule integrating products of matrix coefficients whose
    degrees sum to at most the given degree."""
    if degree > 2 * SO3_DEGREE_CAP:
        raise ValidationError(f"quadrature degree {degree} beyond cap {2 * SO3_DEGREE_CAP}")
    return so3_quadrature(degree + 1, degree // 2 + 1, degree + 1)


def so3_integral(f: Callable[[np.ndarray], np.ndarray], degree: int) -> complex:
    eulers, wts = so3_quadrature_for_degree(degree)
    return complex(np.sum(wts * np.asarray(f(eulers))))


# ---------------------------------------------------------------------------
# rotation-group matrix coefficients
# ---------------------------------------------------------------------------
#
# Strategy: in the complex harmonic basis the z-rotation block is the exact
# diagonal diag(exp(-i m theta)) and the x-rotation block is
# exp(-i beta Lx), with Lx the real symmetric tridiagonal ladder matrix.
# One eigendecomposition of Lx per degree (cached) gives a stable factored
# form for arbitrary angles; a fixed unitary change of basis carries the
# result to the real harmonics, where the blocks are real orthogonal.


@lru_cache(maxsize=None)
def _ladder_eig(k: int) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of the x-axis generator in the complex basis."""
    if k == 0:
        return np.array([0.0]), np.array([[1.0]])
    m = np.arange(-k, k)  # couples m and m+1
    off = 0.5 * np.sqrt(k * (k + 1.0) - m * (m + 1.0))
    from scipy.linalg import eigh_tridiagonal

    w, v = eigh_tridiagonal(np.zeros(2 * k + 1), off)
    return w, v


@lru_cache(maxsize=None)
def _real_basis_map(k: int) -> np.ndarray:
    """Unitary W with columns expressing the real harmonics in the complex
    basis (both ordered by m = -k..k)."""
    n = 2 * k + 1
    W = np.zeros((n, n), dtype=complex)
    W[k, k] = 1.0
    rt = 1.0 / np.sqrt(2.0)
    for m in range(1, k + 1):
        sgn = (-1.0) ** m
        # cosine harmonic at column k+m, sine at column k-m
        W[k - m, k + m] = rt
        W[k + m, k + m] = sgn * rt
        W[k - m, k - m] = 1j * rt
        W[k + m, k - m] = -1j * sgn * rt
    return W


def wigner_stack(
    degree_max: int, eulers: np.ndarray
) -> list[np.ndarray]:
    """Real matrix coefficient blocks T^k(g) for all k <= degree_max.

    eulers is an (n, 3) array of (alpha, beta, gamma); the result is a list
    indexed by degree holding arrays of shape (n, 2k+1, 2k+1).
    """
    if degree_max > SO3_DEGREE_CAP:
        raise ValidationError(f"degree {degree_max} beyond supported cap {SO3_DEGREE_CAP}")
    eulers = np.atleast_2d(np.asarray(eulers, dtype=float))
    alpha, beta, gamma = eulers[:, 0], eulers[:, 1], eulers[:, 2]
    out: list[np.ndarray] = []
    for k in range(degree_max + 1):
        if k == 0:
            out.append(np.ones((eulers.shape[0], 1, 1)))
            continue
        w, v = _ladder_eig(k)
        W = _real_basis_map(k)
        m = np.arange(-k, k + 1)
        # middle factor exp(-i beta Lx) = V exp(-i beta w) V^T
        eb = np.exp(-1j * np.outer(beta, w))
        mid = np.einsum("pq,nq,rq->npr", v, eb, v)
        phase_l = np.exp(-1j * np.outer(gamma, m))
        phase_r = np.exp(-1j * np.outer(alpha, m))
        dc = phase_l[:, :, None] * mid * phase_r[:, None, :]
        tr = np.einsum("pa,npr,rb->nab", W.conj(), dc, W)
        out.append(np.ascontiguousarray(tr.real))
    return out


def wigner_matrix(k: int, rotation: EulerRotation) -> np.ndarray:
    """Single real (2k+1) x (2k+1) matrix coefficient block."""
    return wigner_stack(k, np.array([[rotation.alpha, rotation.beta, rotation.gamma]]))[k][0]


def wigner_coeff(k: int, i: int, j: int, rotation: EulerRotation) -> float:
    """Entry T^k_{ij}(g) with 1-based indices."""
    if not (1 <= i <= 2 * k + 1 and 1 <= j <= 2 * k + 1):
        raise ValidationError(f"indices ({i},{j}) outside 1..{2*k+1}")
    return float(wigner_matrix(k, rotation)[i - 1, j - 1])


def project_so3(
    f: Callable[[np.ndarray], np.ndarray],
    degree_max: int,
    quad_degree: int | None = None,
) -> SO3Spectrum:
    """Blockwise coefficients of a function given on Euler triples.

    fhat(k)_{ij} = int f conj(T^k_{ij}) dg with the Haar probability
    measure; exact when f is band-limited to quad_degree - degree_max.
    """
    if quad_degree is None:
        quad_degree = 2 * degree_max
    eulers, wts = so3_quadrature_for_degree(quad_degree)
    vals = np.asarray(f(eulers))
    stack = wigner_stack(degree_max, eulers)
    blocks = []
    for k in range(degree_max + 1):
        blocks.append(np.einsum("n,npr->pr", wts * vals, stack[k]).astype(complex))
    return SO3Spectrum(degree_max, blocks)


def evaluate_so3(spec: SO3Spectrum, eulers: np.ndarray) -> np.ndarray:
    """Pointwise synthesis  f(g) = sum_k (2k+1) sum_ij fhat(k)_ij T^k_ij(g)."""
    eulers = np.atleast_2d(np.asarray(eulers, dtype=float))
    stack = wigner_stack(spec.degree_max, eulers)
    out = np.zeros(eulers.shape[0], dtype=complex)
    for k in range(spec.degree_max + 1):
        out += (2 * k + 1) * np.einsum("pr,npr->n", spec.blocks[k], stack[k])
    if np.max(np.abs(out.imag), initial=0.0) < 1.0e-12 * max(1.0, np.max(np.abs(out.real), initial=0.0)):
        return out.real
    return out
