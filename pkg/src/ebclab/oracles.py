"""Reference solutions that share no code path with the solvers they check.

* ``fd_strip_flux``: dense finite differences for the strip extension.
* ``steady_*``: closed-form radial solutions of steady problems, obtained by
  imposing interface/boundary conditions on the general ODE solution and
  solving the small coefficient system with ``numpy.linalg.solve``.
* ``Manufactured``: a piecewise-polynomial profile obeying the transmission
  conditions, with the forcing computed from the continuous operator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded


def fd_strip_flux(lam: float, g1n: float, g2n: float, h: float, n: int = 10_000) -> tuple[float, float]:
    """``(Psi_R(0), Psi_R(h))`` for ``Psi'' = lam Psi``, ``Psi(0) = g1n``, ``Psi(h) = g2n``.

    Central differences on ``n`` points (``n - 2`` unknowns), then end slopes from
    a one-sided Taylor expansion using ``Psi'' = lam Psi`` and ``Psi''' = lam Psi'``.
    """
    dx = h / (n - 1)
    m = n - 2
    ab = np.zeros((3, m))
    ab[0, 1:] = 1.0
    ab[1, :] = -2.0 - lam * dx * dx
    ab[2, :-1] = 1.0
    rhs = np.zeros(m)
    rhs[0] -= g1n
    rhs[-1] -= g2n
    psi = np.concatenate([[g1n], solve_banded((1, 1), ab, rhs), [g2n]])
    corr = 1.0 + lam * dx * dx / 6.0
    flux0 = ((psi[1] - psi[0]) / dx - 0.5 * dx * lam * psi[0]) / corr
    fluxh = ((psi[-1] - psi[-2]) / dx + 0.5 * dx * lam * psi[-1]) / corr
    return flux0, fluxh


@dataclass(frozen=True)
class PiecewiseRadial:
    """Piecewise function of r given as ``[(r_lo, r_hi, callable), ...]``."""

    pieces: tuple

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        out = np.full(r.shape, np.nan)
        for lo, hi, fn in self.pieces:
            sel = (r >= lo) & (r <= hi)
            out[sel] = fn(r[sel])
        return out


def steady_three_region_l0(R1: float, delta: float, R2: float, k: tuple[float, float, float],
                           q: tuple[float, float, float], u_outer: float) -> PiecewiseRadial:
    """Steady radial solution of ``-(1/r^2)(r^2 k u')' = q`` with ``u(R2) = u_outer``.

    Region j has ``u = a_j + b_j / r - q_j r^2 / (6 k_j)``; ``b_0 = 0`` for regularity.
    Unknowns ``(a0, a1, b1, a2, b2)``; conditions are value and flux continuity at
    ``R1`` and ``R1 + delta`` plus the outer value.
    """
    Ra = R1 + delta

    def val_row(j, r):
        return [1.0, 0.0, 0.0, 0.0, 0.0] if j == 0 else ([0, 0, 0, 1.0, 1.0 / r] if j == 2 else [0, 1.0, 1.0 / r, 0, 0])

    def flux_row(j, r):
        # k_j u' = -k_j b_j / r^2 - q_j r / 3
        row = [0.0] * 5
        if j == 1:
            row[2] = -k[1] / r**2
        if j == 2:
            row[4] = -k[2] / r**2
        return row

    def part(j, r):
        return -q[j] * r**2 / (6.0 * k[j])

    def part_flux(j, r):
        return -q[j] * r / 3.0

    M, rhs = [], []
    for (ja, jb, r) in ((0, 1, R1), (1, 2, Ra)):
        M.append(np.subtract(val_row(ja, r), val_row(jb, r)))
        rhs.append(part(jb, r) - part(ja, r))
        M.append(np.subtract(flux_row(ja, r), flux_row(jb, r)))
        rhs.append(part_flux(jb, r) - part_flux(ja, r))
    M.append(val_row(2, R2))
    rhs.append(u_outer - part(2, R2))
    a0, a1, b1, a2, b2 = np.linalg.solve(np.array(M, dtype=float), np.array(rhs))
    return PiecewiseRadial((
        (0.0, R1, lambda r: a0 + part(0, r)),
        (R1, Ra, lambda r: a1 + b1 / r + part(1, r)),
        (Ra, R2, lambda r: a2 + b2 / r + part(2, r)),
    ))


def steady_robin_l0(R1: float, R2: float, k1: float, k2: float, b: float,
                    q: tuple[float, float], u_outer: float) -> tuple[PiecewiseRadial, PiecewiseRadial]:
    """Steady l=0 two-region solution with ``k1 u1' = k2 u2' = b (u2 - u1)`` at ``R1``.

    Returns the inner and outer pieces separately since the solution jumps at ``R1``.
    """
    # u1 = a1 - q1 r^2/(6 k1);  u2 = a2 + b2/r - q2 r^2/(6 k2)
    p1 = lambda r: -q[0] * r**2 / (6 * k1)  # noqa: E731
    p2 = lambda r: -q[1] * r**2 / (6 * k2)  # noqa: E731
    flux1 = -q[0] * R1 / 3.0  # k1 u1'(R1)
    # k2 u2'(R1) = -k2 b2 / R1^2 - q2 R1 / 3 must equal flux1
    b2 = -(flux1 + q[1] * R1 / 3.0) * R1**2 / k2
    a2 = u_outer - b2 / R2 - p2(R2)
    u2_R1 = a2 + b2 / R1 + p2(R1)
    a1 = u2_R1 - flux1 / b - p1(R1)
    inner = PiecewiseRadial(((0.0, R1, lambda r: a1 + p1(r)),))
    outer = PiecewiseRadial(((R1, R2, lambda r: a2 + b2 / r + p2(r)),))
    return inner, outer


def steady_decoupled_dtn_l1(R1: float, R2: float, k1: float, k2: float, coupling: float,
                            F: float) -> tuple[PiecewiseRadial, PiecewiseRadial]:
    """Steady l=1 solution of ``-k L_1 u = F r`` with ``k1 u1' = -c u1`` and ``k2 u2' = +c u2`` at ``R1``.

    ``L_1 u = (1/r^2)(r^2 u')' - 2u/r^2``; its homogeneous solutions are ``r`` and
    ``r^-2`` and ``L_1 r^3 = 10 r``. Outer value zero at ``R2``.
    """
    # inner: u1 = a r - F r^3 / (10 k1)
    e1 = F / (10.0 * k1)
    # k1 (a - 3 e1 R1^2) = -c (a R1 - e1 R1^3)
    a = (3.0 * k1 * e1 * R1**2 + coupling * e1 * R1**3) / (k1 + coupling * R1)
    e2 = F / (10.0 * k2)
    # u2 = cc r + d r^-2 - e2 r^3
    M = np.array([
        [R2, R2**-2],
        [k2 - coupling * R1, -2.0 * k2 * R1**-3 - coupling * R1**-2],
    ])
    rhs = np.array([e2 * R2**3, 3.0 * k2 * e2 * R1**2 - coupling * e2 * R1**3])
    cc, d = np.linalg.solve(M, rhs)
    inner = PiecewiseRadial(((0.0, R1, lambda r: a * r - e1 * r**3),))
    outer = PiecewiseRadial(((R1, R2, lambda r: cc * r + d * r**-2 - e2 * r**3),))
    return inner, outer


@dataclass(frozen=True)
class Manufactured:
    """``u(r, t) = exp(-t) p(r)`` for the l=0 mode, ``p`` piecewise quadratic.

    Core ``p = 1 - r^2`` (smooth at the origin); layer and outer pieces are
    quadratics whose coefficients enforce value and flux continuity at both
    interfaces and ``p(R2) = 0``. ``k`` holds the radial conductivities of the
    three regions.
    """

    R1: float
    delta: float
    R2: float
    k: tuple[float, float, float]
    layer_curvature: float = 0.3

    def coefficients(self) -> list[np.ndarray]:
        R1, Ra, R2 = self.R1, self.R1 + self.delta, self.R2
        k = self.k
        c2 = self.layer_curvature
        # unknowns: c0, c1 (layer), d0, d1, d2 (outer)
        M = np.array([
            [1.0, R1, 0, 0, 0],                     # value at R1
            [0, k[1], 0, 0, 0],                     # flux at R1
            [1.0, Ra, -1.0, -Ra, -Ra**2],           # value at R1 + delta
            [0, k[1], 0, -k[2], -2 * k[2] * Ra],    # flux at R1 + delta
            [0, 0, 1.0, R2, R2**2],                 # p(R2) = 0
        ])
        rhs = np.array([
            1 - R1**2 - c2 * R1**2,
            -2 * k[0] * R1 - 2 * k[1] * c2 * R1,
            -c2 * Ra**2,
            -2 * k[1] * c2 * Ra,
            0.0,
        ])
        c0, c1, d0, d1, d2 = np.linalg.solve(M, rhs)
        return [np.array([1.0, 0.0, -1.0]), np.array([c0, c1, c2]), np.array([d0, d1, d2])]

    def _pieces(self, r):
        reg = np.where(r < self.R1, 0, np.where(r < self.R1 + self.delta, 1, 2))
        for j, c in enumerate(self.coefficients()):
            yield reg == j, j, c

    def profile(self, r):
        r = np.asarray(r, dtype=float)
        out = np.empty_like(r)
        for sel, _, c in self._pieces(r):
            out[sel] = c[0] + c[1] * r[sel] + c[2] * r[sel] ** 2
        return out

    def exact(self, r, t: float):
        return math.exp(-t) * self.profile(r)

    def forcing(self, r, t: float):
        """``u_t - k (1/r^2)(r^2 u_r)_r`` evaluated piecewise."""
        r = np.asarray(r, dtype=float)
        out = np.empty_like(r)
        for sel, j, c in self._pieces(r):
            rr = r[sel]
            p = c[0] + c[1] * rr + c[2] * rr**2
            lap = 2 * c[2] + 2 * (c[1] + 2 * c[2] * rr) / rr
            out[sel] = -p - self.k[j] * lap
        return math.exp(-t) * out
