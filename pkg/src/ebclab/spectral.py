"""Real spherical-harmonic representation of functions on the sphere Gamma_1.

Normalization convention (used everywhere in the package):

* ``Y_lm`` are real and orthonormal on the *unit* sphere,
  ``int_{S^2} Y_lm Y_l'm' dOmega = delta_ll' delta_mm'``.
* ``m > 0`` carries ``sqrt(2) * Pbar_l^m(cos theta) * cos(m phi)``, ``m < 0`` carries
  ``sqrt(2) * Pbar_l^|m|(cos theta) * sin(|m| phi)``, ``m = 0`` carries ``Pbar_l^0``,
  where ``Pbar_l^m`` is the associated Legendre function scaled so that
  ``Pbar_l^m(cos theta) e^{i m phi}`` is orthonormal on the unit sphere. No
  Condon-Shortley phase.
* On a sphere of radius R1 the surface measure is ``R1**2 dOmega``, so
  ``<f, g>_{L2(Gamma_1)} = R1**2 * sum_lm f_lm g_lm``.

Coefficients are stored flat with index ``l*l + l + m``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np


@dataclass(frozen=True)
class SphereGeometry:
    """Concentric geometry: Gamma_1 is the sphere of radius R1 inside the ball of radius R2."""

    R1: float
    R2: float

    def __post_init__(self) -> None:
        if not (0.0 < self.R1 < self.R2) or not math.isfinite(self.R2):
            raise ValueError(f"need 0 < R1 < R2 < inf, got R1={self.R1}, R2={self.R2}")

    @property
    def mean_curvature(self) -> float:
        return 1.0 / self.R1

    @property
    def gaussian_curvature(self) -> float:
        return 1.0 / self.R1**2

    @property
    def area(self) -> float:
        return 4.0 * math.pi * self.R1**2


@dataclass(frozen=True, order=True)
class ModeIndex:
    l: int
    m: int

    def __post_init__(self) -> None:
        if self.l < 0 or abs(self.m) > self.l:
            raise ValueError(f"invalid mode (l={self.l}, m={self.m})")

    @property
    def flat(self) -> int:
        return self.l * self.l + self.l + self.m


def n_coeffs(lmax: int) -> int:
    return (lmax + 1) ** 2


def mode_indices(lmax: int) -> Iterator[ModeIndex]:
    """All modes up to ``lmax`` in flat-index order."""
    for l in range(lmax + 1):
        for m in range(-l, l + 1):
            yield ModeIndex(l, m)


def lb_eigenvalue(l: int, geom: SphereGeometry) -> float:
    """Eigenvalue ``l(l+1)/R1**2`` of ``-Laplace-Beltrami`` on Gamma_1."""
    if l < 0:
        raise ValueError("degree must be nonnegative")
    return l * (l + 1) / geom.R1**2


def degrees(lmax: int) -> np.ndarray:
    """Degree ``l`` of every flat coefficient slot."""
    return np.concatenate([np.full(2 * l + 1, l) for l in range(lmax + 1)])


@dataclass(frozen=True)
class SurfaceFunction:
    lmax: int
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        c = np.array(self.coeffs, dtype=float)
        if c.shape != (n_coeffs(self.lmax),):
            raise ValueError(f"expected {n_coeffs(self.lmax)} coefficients for lmax={self.lmax}, got shape {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, lmax: int) -> SurfaceFunction:
        return cls(lmax, np.zeros(n_coeffs(lmax)))

    @classmethod
    def single(cls, lmax: int, l: int, m: int, value: float = 1.0) -> SurfaceFunction:
        c = np.zeros(n_coeffs(lmax))
        c[ModeIndex(l, m).flat] = value
        return cls(lmax, c)

    def coeff(self, l: int, m: int) -> float:
        return float(self.coeffs[ModeIndex(l, m).flat])

    def scaled_by_degree(self, multipliers: np.ndarray) -> SurfaceFunction:
        """Multiply every degree-``l`` coefficient by ``multipliers[l]``."""
        return SurfaceFunction(self.lmax, self.coeffs * np.asarray(multipliers)[degrees(self.lmax)])

    def __add__(self, other: SurfaceFunction) -> SurfaceFunction:
        _check_same_lmax(self, other)
        return SurfaceFunction(self.lmax, self.coeffs + other.coeffs)

    def __mul__(self, a: float) -> SurfaceFunction:
        return SurfaceFunction(self.lmax, a * self.coeffs)

    __rmul__ = __mul__


def _check_same_lmax(f: SurfaceFunction, g: SurfaceFunction) -> None:
    if f.lmax != g.lmax:
        raise ValueError(f"lmax mismatch: {f.lmax} vs {g.lmax}")


def normalized_legendre(lmax: int, x: np.ndarray) -> np.ndarray:
    """``Pbar_l^m(x)`` for ``0 <= m <= l <= lmax``, shape ``(lmax+1, lmax+1, *x.shape)``.

    Sectoral seed plus the standard three-term recurrence in ``l``; every step is
    already normalized, so nothing overflows for moderate degrees.
    """
    x = np.asarray(x, dtype=float)
    s = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    P = np.zeros((lmax + 1, lmax + 1) + x.shape)
    P[0, 0] = 1.0 / math.sqrt(4.0 * math.pi)
    for m in range(1, lmax + 1):
        P[m, m] = math.sqrt((2 * m + 1) / (2 * m)) * s * P[m - 1, m - 1]
    for m in range(0, lmax):
        P[m + 1, m] = math.sqrt(2 * m + 3) * x * P[m, m]
    for m in range(0, lmax + 1):
        for l in range(m + 2, lmax + 1):
            a = math.sqrt((4 * l * l - 1) / (l * l - m * m))
            b = math.sqrt(((l - 1) ** 2 - m * m) / (4 * (l - 1) ** 2 - 1))
            P[l, m] = a * (x * P[l - 1, m] - b * P[l - 2, m])
    return P


def real_sph_harm_matrix(lmax: int, theta, phi) -> np.ndarray:
    """Basis values, shape ``(npoints, (lmax+1)**2)`` for flattened point arrays."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float)).ravel()
    phi = np.atleast_1d(np.asarray(phi, dtype=float)).ravel()
    theta, phi = np.broadcast_arrays(theta, phi)
    P = normalized_legendre(lmax, np.cos(theta))
    out = np.empty((theta.size, n_coeffs(lmax)))
    root2 = math.sqrt(2.0)
    for l in range(lmax + 1):
        base = l * l + l
        out[:, base] = P[l, 0]
        for m in range(1, l + 1):
            out[:, base + m] = root2 * P[l, m] * np.cos(m * phi)
            out[:, base - m] = root2 * P[l, m] * np.sin(m * phi)
    return out


def synthesize(f: SurfaceFunction, theta, phi):
    """Evaluate ``f`` at ``(theta, phi)``; scalar in, scalar out."""
    if np.any(np.asarray(theta) < 0.0) or np.any(np.asarray(theta) > math.pi):
        raise ValueError("colatitude must lie in [0, pi]")
    shape = np.broadcast(np.asarray(theta), np.asarray(phi)).shape
    vals = real_sph_harm_matrix(f.lmax, theta, phi) @ f.coeffs
    if shape == ():
        return float(vals[0])
    return vals.reshape(shape)


@dataclass(frozen=True)
class QuadratureGrid:
    """Gauss-Legendre in ``cos(theta)`` times uniform ``phi``; weights integrate over the unit sphere."""

    n_theta: int
    n_phi: int

    def __post_init__(self) -> None:
        if self.n_theta < 1 or self.n_phi < 1:
            raise ValueError("grid sizes must be positive")

    @classmethod
    def for_lmax(cls, lmax: int) -> QuadratureGrid:
        return cls(lmax + 1, 2 * lmax + 1)

    def exact_for(self, lmax: int) -> bool:
        return self.n_theta >= lmax + 1 and self.n_phi >= 2 * lmax + 1

    def nodes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Flattened ``(theta, phi, weight)`` arrays of length ``n_theta * n_phi``."""
        x, wx = np.polynomial.legendre.leggauss(self.n_theta)
        phi = 2.0 * math.pi * np.arange(self.n_phi) / self.n_phi
        T, P = np.meshgrid(np.arccos(x), phi, indexing="ij")
        W = np.outer(wx, np.full(self.n_phi, 2.0 * math.pi / self.n_phi))
        return T.ravel(), P.ravel(), W.ravel()


def analyze(values: np.ndarray, grid: QuadratureGrid, lmax: int) -> SurfaceFunction:
    """Project grid samples (ordered as ``grid.nodes()``) onto the basis up to ``lmax``."""
    if not grid.exact_for(lmax):
        raise ValueError(
            f"grid {grid.n_theta}x{grid.n_phi} too coarse for lmax={lmax}; "
            f"need n_theta >= {lmax + 1} and n_phi >= {2 * lmax + 1}"
        )
    theta, phi, w = grid.nodes()
    values = np.asarray(values, dtype=float).ravel()
    if values.size != theta.size:
        raise ValueError(f"expected {theta.size} samples, got {values.size}")
    Y = real_sph_harm_matrix(lmax, theta, phi)
    return SurfaceFunction(lmax, Y.T @ (w * values))


def surface_inner_product(f: SurfaceFunction, g: SurfaceFunction, geom: SphereGeometry) -> float:
    _check_same_lmax(f, g)
    return geom.R1**2 * float(f.coeffs @ g.coeffs)


def surface_l2_norm(f: SurfaceFunction, geom: SphereGeometry) -> float:
    return math.sqrt(surface_inner_product(f, f, geom))
