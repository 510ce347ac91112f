"""Harmonic strip extension and the Dirichlet-to-Neumann operators built from it.

The strip problem, after rescaling the normal coordinate, is
``Psi_RR + Lap_Gamma Psi = 0`` on ``Gamma_1 x (0, h)`` with ``Psi(0) = g1`` and
``Psi(h) = g2``. Per Laplace-Beltrami mode (eigenvalue ``lam`` of ``-Lap_Gamma``) the
solution is ``A exp(k R) + B exp(-k R)`` with ``k = sqrt(lam)``; everything below is
closed form in ``x = k h``.

Heights are plain floats; ``math.inf`` is accepted wherever a height-or-infinity
is meant.
"""

from __future__ import annotations

import enum
import math

import numpy as np

from .spectral import SphereGeometry, SurfaceFunction, lb_eigenvalue

INF = math.inf

# exp(-x) underflows well before this; past it the hyperbolic ratios are exactly 1 and 0
_SNAP = 700.0


class DtnKind(enum.Enum):
    COMBINED = "combined"
    FIRST = "first"
    SECOND = "second"


def _coth_csch(x: float) -> tuple[float, float]:
    """``(coth x, csch x)`` for ``x > 0`` without forming ``exp(x)``."""
    if x > _SNAP:
        return 1.0, 0.0
    em = math.exp(-x)
    den = -math.expm1(-2.0 * x)
    return (1.0 + em * em) / den, 2.0 * em / den


def _check_height(h: float) -> None:
    if not h > 0.0:
        raise ValueError(f"height must be positive, got {h}")


def strip_coeffs(lam: float, g1n: float, g2n: float, h: float) -> tuple[float, float]:
    """Coefficients ``(A, B)`` of the mode ``A e^{kR} + B e^{-kR}``.

    Written with ``exp(-kh)`` only, which is algebraically the same as dividing by
    ``2 sinh(kh)`` but cannot overflow.
    """
    if not lam > 0.0:
        raise ValueError("lam must be positive; the constant mode uses the linear extension")
    _check_height(h)
    x = math.sqrt(lam) * h
    em = math.exp(-x) if x <= _SNAP else 0.0
    den = -math.expm1(-2.0 * x)
    A = (g2n * em - g1n * em * em) / den
    B = (g1n - g2n * em) / den
    return A, B


def psi_r_at_0(lam: float, g1n: float, g2n: float, h: float) -> float:
    """Normal derivative of the extension at ``R = 0`` for one mode."""
    _check_height(h)
    if lam == 0.0:
        return (g2n - g1n) / h
    k = math.sqrt(lam)
    coth, csch = _coth_csch(k * h)
    return k * (g2n * csch - g1n * coth)


def psi_r_at_h(lam: float, g1n: float, g2n: float, h: float) -> float:
    """Normal derivative of the extension at ``R = h`` for one mode."""
    _check_height(h)
    if lam == 0.0:
        return (g2n - g1n) / h
    k = math.sqrt(lam)
    coth, csch = _coth_csch(k * h)
    return k * (g2n * coth - g1n * csch)


def dtn_mode_multiplier(kind: DtnKind, lam: float, H: float) -> float:
    """Eigenvalue of ``J^H`` (COMBINED), ``J_1^H`` (FIRST) or ``J_2^H`` (SECOND) on a mode."""
    _check_height(H)
    if lam < 0.0:
        raise ValueError("lam must be nonnegative")
    if lam == 0.0:
        return -1.0 / H if math.isfinite(H) else 0.0
    k = math.sqrt(lam)
    if kind is DtnKind.COMBINED:
        return -k if math.isinf(H) else -k * math.tanh(0.5 * k * H)
    coth, csch = _coth_csch(k * H) if math.isfinite(H) else (1.0, 0.0)
    if kind is DtnKind.FIRST:
        return -k * coth
    return -k * csch


def dtn_multipliers(kind: DtnKind, lmax: int, H: float, geom: SphereGeometry) -> np.ndarray:
    """Per-degree multipliers for ``l = 0..lmax``."""
    return np.array([dtn_mode_multiplier(kind, lb_eigenvalue(l, geom), H) for l in range(lmax + 1)])


def apply_dtn(kind: DtnKind, H: float, g: SurfaceFunction, geom: SphereGeometry) -> SurfaceFunction:
    return g.scaled_by_degree(dtn_multipliers(kind, g.lmax, H, geom))


def frac_laplacian_half(g: SurfaceFunction, geom: SphereGeometry) -> SurfaceFunction:
    """``(-Lap_Gamma)^{1/2} g``; equals ``-J_1^inf[g]``."""
    return g.scaled_by_degree(np.sqrt([lb_eigenvalue(l, geom) for l in range(g.lmax + 1)]))

