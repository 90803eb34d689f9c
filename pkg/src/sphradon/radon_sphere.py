"""Great-circle (Funk) and hemispherical transforms on the sphere.

Both transforms are diagonal in the real orthonormal harmonic basis; the
Funk value at a pole is the arc-length integral of the function over the
great circle orthogonal to that pole, and the hemispherical value is the
surface integral over the half sphere the pole points into.  With those
measure conventions the degree-k multipliers are

    funk:           mu_k = 2 pi P_k(0)            (even k, zero for odd k)
    hemispherical:  h_0  = 2 pi,
                    h_k  = sqrt(pi) (-1)^((k-1)/2) Gamma(k/2) / Gamma((k+3)/2)
                                                  (odd k, zero for even k >= 2)

General ambient dimension d is supported for the multipliers themselves
(pure Gamma-function arithmetic, evaluated with log-Gamma for stability);
the transform pipelines fix d = 2.

Inversion divides by the multiplier on the supported parity and refuses
input carrying energy of the annihilated parity: for the hemispherical
transform this includes degree zero, which the forward map keeps but the
inverse cannot see past.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from . import harmonics as hm
from .cubature import CubatureRule, discrete_spectrum
from .errors import NotInRangeError, ValidationError
from .lattice import GreatCircle, Lattice

SPHERE_DIM = 2
_PARITY_TOL = 1.0e-9


def _subsphere_volume(d: int) -> float:
    """Surface measure of the great subsphere S^(d-1) inside S^d."""
    return 2.0 * np.pi ** (d / 2.0) / np.exp(gammaln(d / 2.0))


def funk_multiplier(k: int, d: int = SPHERE_DIM) -> float:
    """Eigenvalue of the great-subsphere transform on degree-k harmonics.

    Zero for odd k.  Normalised so that degree zero maps to the subsphere
    volume (2 pi when d = 2), matching arc-length measure on the circle.
    """
    if k < 0:
        raise ValidationError("degree must be nonnegative")
    if d < 2:
        raise ValidationError("ambient sphere dimension must be at least 2")
    if k % 2 == 1:
        return 0.0
    log_ratio = (
        gammaln((k + 1) / 2.0)
        - gammaln((k + d) / 2.0)
        - gammaln(0.5)
        + gammaln(d / 2.0)
    )
    sign = -1.0 if (k // 2) % 2 else 1.0
    return _subsphere_volume(d) * sign * float(np.exp(log_ratio))


def hemispherical_multiplier(k: int, d: int = SPHERE_DIM) -> float:
    """Eigenvalue of the hemisphere-integral transform on degree k.

    Degree zero carries the half-sphere volume; even degrees >= 2 are
    annihilated; odd degrees follow the alternating Gamma-ratio law.
    """
    if k < 0:
        raise ValidationError("degree must be nonnegative")
    if d < 2:
        raise ValidationError("ambient sphere dimension must be at least 2")
    if k == 0:
        # half the surface volume of S^d
        return np.pi ** ((d + 1) / 2.0) / np.exp(gammaln((d + 1) / 2.0))
    if k % 2 == 0:
        return 0.0
    log_ratio = gammaln(k / 2.0) - gammaln((k + d + 1) / 2.0)
    sign = -1.0 if ((k - 1) // 2) % 2 else 1.0
    return np.pi ** ((d - 1) / 2.0) * sign * float(np.exp(log_ratio))


@lru_cache(maxsize=32)
def funk_multipliers(degree_max: int, d: int = SPHERE_DIM) -> np.ndarray:
    out = np.array([funk_multiplier(k, d) for k in range(degree_max + 1)])
    out.setflags(write=False)
    return out


@lru_cache(maxsize=32)
def hemispherical_multipliers(degree_max: int, d: int = SPHERE_DIM) -> np.ndarray:
    out = np.array([hemispherical_multiplier(k, d) for k in range(degree_max + 1)])
    out.setflags(write=False)
    return out


def legendre_at_zero(degree_max: int) -> np.ndarray:
    """P_k(0) by the exact two-term recurrence, an independent reference."""
    p = np.zeros(degree_max + 1)
    p[0] = 1.0
    for k in range(2, degree_max + 1, 2):
        p[k] = -p[k - 2] * (k - 1) / k
    return p


def _apply_multiplier(spec: hm.SphereSpectrum, mult: np.ndarray) -> hm.SphereSpectrum:
    out = spec.copy()
    for k in range(spec.degree_max + 1):
        out.coeffs[hm.degree_slice(k)] *= mult[k]
    return out


def funk_forward(spec: hm.SphereSpectrum) -> hm.SphereSpectrum:
    """Spectral forward transform; odd coefficients become exactly zero."""
    return _apply_multiplier(spec, funk_multipliers(spec.degree_max))


def funk_inverse(spec: hm.SphereSpectrum, parity_tol: float = _PARITY_TOL) -> hm.SphereSpectrum:
    """Divide even degrees by the multiplier; reject odd-parity energy.

    The tolerance is applied to the root of the odd-degree energy,
    relative to max(1, total norm).
    """
    odd_rms = np.sqrt(spec.odd_energy())
    if odd_rms > parity_tol * max(1.0, spec.norm()):
        raise NotInRangeError(
            f"input carries odd-degree energy (rms {odd_rms:.3e}); "
            "the great-circle transform annihilates odd harmonics"
        )
    mult = funk_multipliers(spec.degree_max)
    inv = np.array([1.0 / m if m != 0.0 else 0.0 for m in mult])
    return _apply_multiplier(spec, inv)


def hemispherical_forward(spec: hm.SphereSpectrum) -> hm.SphereSpectrum:
    return _apply_multiplier(spec, hemispherical_multipliers(spec.degree_max))


def hemispherical_inverse(
    spec: hm.SphereSpectrum, parity_tol: float = _PARITY_TOL
) -> hm.SphereSpectrum:
    """Invert on the odd subspace; any even energy (degree 0 included) is refused."""
    even_rms = np.sqrt(spec.even_energy())
    if even_rms > parity_tol * max(1.0, spec.norm()):
        raise NotInRangeError(
            f"input carries even-degree energy (rms {even_rms:.3e}); "
            "the hemisphere transform is invertible only on odd harmonics"
        )
    mult = hemispherical_multipliers(spec.degree_max)
    inv = np.array([1.0 / m if m != 0.0 else 0.0 for m in mult])
    inv[0] = 0.0
    out = _apply_multiplier(spec, inv)
    out.coeffs[0] = 0.0
    return out


def circle_quadrature_values(
    spec: hm.SphereSpectrum, poles: np.ndarray, nodes_per_circle: int | None = None
) -> np.ndarray:
    """Funk values at the given poles by direct great-circle quadrature.

    The restriction of a degree-K spherical polynomial to a circle is a
    trigonometric polynomial of degree K, so K+1 equispaced nodes already
    integrate it exactly; the default doubles that for slack.
    """
    poles = np.atleast_2d(np.asarray(poles, dtype=float))
    n = nodes_per_circle or max(2 * spec.degree_max + 2, 8)
    out = np.empty(poles.shape[0])
    for r, pole in enumerate(poles):
        pts, wts = GreatCircle(tuple(pole)).nodes(n)
        out[r] = float(np.dot(wts, hm.evaluate_sphere(spec, pts)))
    return out


def spline_inversion(
    circles: Sequence[GreatCircle],
    values: np.ndarray,
    t: float,
    degree_max: int | None = None,
    precision: str = "float64",
) -> hm.SphereSpectrum:
    """Even interpolating spline through prescribed great-circle integrals.

    Returns the spectrum of the minimum-H_t-norm function whose circle
    integrals match ``values``.  Odd coefficients vanish identically
    because the circle functionals annihilate odd harmonics.
    """
    from . import splines

    functionals = [splines.circle_integral(c) for c in circles]
    problem = splines.SplineProblem(functionals, t=t, degree_max=degree_max)
    spline = splines.fit(problem, values, precision=precision)
    return spline.spectrum()


def sampling_reconstruct_S(
    lat: Lattice | np.ndarray,
    rf_values: np.ndarray,
    t: float,
    m: int,
    degree_max: int | None = None,
    precision: str = "auto",
) -> hm.SphereSpectrum:
    """Reconstruction from point samples of the circle transform.

    Fits a point-interpolating spline of order 2^m * 2 + t + 1/2 to the
    samples, projects onto even parity by dropping odd coefficients (the
    orthogonal projection in every H_s norm simultaneously), and applies
    the spectral inverse.
    """
    from . import splines

    points = lat.points if isinstance(lat, Lattice) else np.atleast_2d(lat)
    order = float(2**m) * SPHERE_DIM + t + (SPHERE_DIM - 1) / 2.0
    functionals = [splines.point_eval(p) for p in points]
    problem = splines.SplineProblem(functionals, t=order, degree_max=degree_max)
    spline = splines.fit(problem, rf_values, precision=precision)
    even = spline.spectrum().parity_project(even=True)
    return funk_inverse(even)


def discrete_inversion(
    rule: CubatureRule, rf_values: np.ndarray, band: int | None = None
) -> hm.SphereSpectrum:
    """Exact recovery of an even band-limited function from circle samples.

    ``rf_values`` are point values of the circle transform at the rule
    nodes.  The rule degree must cover twice the band: coefficients of the
    transform are integrals of (transform) x (harmonic), a polynomial of
    degree band + band.  Odd-degree energy in the recovered transform
    spectrum signals samples inconsistent with a circle transform and is
    rejected by the inverse step.
    """
    if band is None:
        band = rule.degree // 2
    if 2 * band > rule.degree:
        raise ValidationError(
            f"rule degree {rule.degree} cannot resolve band {band}; need >= {2 * band}"
        )
    rf_spec = discrete_spectrum(rule, rf_values, degree_max=band, band=band)
    return funk_inverse(rf_spec)
