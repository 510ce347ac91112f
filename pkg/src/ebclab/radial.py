"""Per-mode finite-volume solver for the layered heat problem on the ball.

Expanding ``u(x, t) = sum_lm u_lm(r, t) Y_lm`` decouples the problem into radial
equations

    u_t = (1/r^2) (r^2 k_r u_r)_r - k_t l(l+1)/r^2 u + f

with ``(k_r, k_t) = (k1, k1)`` in the core, ``(sigma, mu)`` in the layer and
``(k2, k2)`` outside. Cell-centred finite volumes give ``V du/dt = A u`` with a
symmetric tridiagonal ``A``: one face flux per face makes temperature and normal
flux continuous across both interfaces without special casing, and the origin
face has zero area.
"""

from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from scipy.linalg import solve_banded

from .mesh import RadialMesh, layered_mesh
from .spectral import ModeIndex, SphereGeometry

Profile = Callable[[np.ndarray], np.ndarray]
Forcing = Callable[[np.ndarray, float], np.ndarray]


@dataclass(frozen=True)
class LayerConfig:
    geom: SphereGeometry
    delta: float
    sigma: float
    mu: float
    k1: float
    k2: float

    def __post_init__(self) -> None:
        for name in ("delta", "sigma", "mu", "k1", "k2"):
            v = getattr(self, name)
            if not (v > 0.0 and math.isfinite(v)):
                raise ValueError(f"{name} must be positive and finite, got {v}")
        if self.geom.R1 + self.delta >= self.geom.R2:
            raise ValueError("layer must fit inside the ball: R1 + delta < R2")


def build_mesh(config: LayerConfig, n_inner: int = 32, n_layer: int = 16, n_outer: int = 32,
               stretch: float = 2.0) -> RadialMesh:
    g = config.geom
    return layered_mesh(g.R1, g.R2, config.delta, n_inner, n_layer, n_outer, stretch)


@dataclass(frozen=True)
class ModeOperator:
    """Semi-discrete radial operator ``V du/dt = A u`` for one degree ``l``.

    ``diag`` and ``off`` hold the symmetric tridiagonal ``A`` (``off[i] = A[i, i+1]``);
    ``mass`` holds the cell volumes ``V``.
    """

    l: int
    diag: np.ndarray = field(repr=False)
    off: np.ndarray = field(repr=False)
    mass: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return self.diag.size

    def stiffness(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.off, 1) + np.diag(self.off, -1)

    def dense(self) -> np.ndarray:
        """``V^{-1} A`` as a dense matrix."""
        return self.stiffness() / self.mass[:, None]

    def apply(self, u: np.ndarray) -> np.ndarray:
        Au = self.diag * u
        Au[:-1] += self.off * u[1:]
        Au[1:] += self.off * u[:-1]
        return Au / self.mass


def assemble_radial(mesh: RadialMesh, k_radial: np.ndarray, k_tangential: np.ndarray, l: int,
                    outer: str = "dirichlet", open_faces: np.ndarray | None = None) -> ModeOperator:
    """Assemble ``A`` from per-cell conductivities.

    ``open_faces`` optionally lists interior face indices (node indices) to leave
    uncoupled; callers close them with their own interface condition.
    """
    r, c = mesh.nodes, mesh.centers
    n = mesh.n_cells
    inner_faces = r[1:-1]
    # harmonic averaging: half-cell resistances in series
    resist = (inner_faces - c[:-1]) / k_radial[:-1] + (c[1:] - inner_faces) / k_radial[1:]
    T = inner_faces**2 / resist
    if open_faces is not None:
        T[np.asarray(open_faces) - 1] = 0.0
    diag = np.zeros(n)
    diag[:-1] -= T
    diag[1:] -= T
    if outer == "dirichlet":
        diag[-1] -= r[-1] ** 2 * k_radial[-1] / (r[-1] - c[-1])
    elif outer != "neumann":
        raise ValueError(f"unknown outer boundary condition {outer!r}")
    diag -= k_tangential * (l * (l + 1)) * mesh.widths
    return ModeOperator(l, diag, T, mesh.volumes)


def assemble_mode_operator(mesh: RadialMesh, config: LayerConfig, l: int, outer: str = "dirichlet") -> ModeOperator:
    radial = np.choose(mesh.region, [config.k1, config.sigma, config.k2]).astype(float)
    tangential = np.choose(mesh.region, [config.k1, config.mu, config.k2]).astype(float)
    return assemble_radial(mesh, radial, tangential, l, outer)


@dataclass(frozen=True)
class ModeState:
    mode: ModeIndex
    values: np.ndarray
    t: float


class ThetaStepper:
    """Theta-method stepping for a fixed operator and step; columns are independent modes."""

    def __init__(self, op: ModeOperator, dt: float, theta: float):
        if not 0.5 <= theta <= 1.0:
            raise ValueError(f"theta must lie in [0.5, 1], got {theta}")
        if not dt > 0.0:
            raise ValueError("dt must be positive")
        self.op, self.dt, self.theta = op, dt, theta
        n = op.size
        ab = np.zeros((3, n))
        ab[0, 1:] = -theta * dt * op.off
        ab[1] = op.mass - theta * dt * op.diag
        ab[2, :-1] = -theta * dt * op.off
        self._ab = ab

    def step(self, U: np.ndarray, F: np.ndarray | None = None) -> np.ndarray:
        op, dt, w = self.op, self.dt, (1.0 - self.theta) * self.dt
        rhs = (op.mass + w * op.diag)[:, None] * U if U.ndim == 2 else (op.mass + w * op.diag) * U
        if w:
            rhs[:-1] += w * _col(op.off, U) * U[1:]
            rhs[1:] += w * _col(op.off, U) * U[:-1]
        if F is not None:
            rhs = rhs + dt * _col(op.mass, U) * F
        try:
            out = solve_banded((1, 1), self._ab, rhs, check_finite=False)
        except np.linalg.LinAlgError as exc:
            raise np.linalg.LinAlgError(f"singular theta-step system for l={op.l}") from exc
        if not np.all(np.isfinite(out)):
            raise FloatingPointError(f"non-finite values after theta step for l={op.l}")
        return out


def _col(a: np.ndarray, like: np.ndarray) -> np.ndarray:
    return a[:, None] if like.ndim == 2 else a


def step_theta(state: ModeState, op: ModeOperator, dt: float, theta: float,
               f_mode: np.ndarray | None = None) -> ModeState:
    """One step of ``(V - theta dt A) u' = (V + (1-theta) dt A) u + dt V f``."""
    values = ThetaStepper(op, dt, theta).step(np.asarray(state.values, dtype=float), f_mode)
    return ModeState(state.mode, values, state.t + dt)


def solve_steady(op: ModeOperator, f_profile: np.ndarray, boundary_rhs: np.ndarray | None = None) -> np.ndarray:
    """Solve ``A u = -V f - boundary_rhs``; ``boundary_rhs`` carries inhomogeneous boundary data."""
    ab = np.zeros((3, op.size))
    ab[0, 1:] = op.off
    ab[1] = op.diag
    ab[2, :-1] = op.off
    rhs = -op.mass * np.asarray(f_profile, dtype=float)
    if boundary_rhs is not None:
        rhs = rhs - boundary_rhs
    return solve_banded((1, 1), ab, rhs)


@dataclass(frozen=True)
class ModeSolution:
    mode: ModeIndex
    mesh: RadialMesh = field(repr=False)
    times: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)  # (n_snapshots, n_cells)

    def __post_init__(self) -> None:
        if self.values.shape != (self.times.size, self.mesh.n_cells):
            raise ValueError("snapshot array does not match times x cells")
        if np.any(np.diff(self.times) <= 0.0):
            raise ValueError("snapshot times must be strictly increasing")

    def at(self, t: float) -> np.ndarray:
        return self.values[snapshot_index(self.times, t)]


def snapshot_index(times: np.ndarray, t: float) -> int:
    i = int(np.argmin(np.abs(times - t)))
    if abs(times[i] - t) > 1e-9 * max(1.0, abs(times[-1])):
        raise KeyError(f"t={t} is not a stored snapshot time")
    return i


def n_steps_for(T: float, dt: float) -> int:
    if not (T > 0.0 and dt > 0.0):
        raise ValueError("T and dt must be positive")
    n = round(T / dt)
    if n < 1 or abs(n * dt - T) > 1e-9 * T:
        raise ValueError(f"T={T} is not an integer multiple of dt={dt}")
    return n


def _as_profile(profile, r: np.ndarray) -> np.ndarray:
    if callable(profile):
        return np.broadcast_to(np.asarray(profile(r), dtype=float), r.shape).copy()
    arr = np.asarray(profile, dtype=float)
    if arr.shape != r.shape:
        raise ValueError(f"profile has shape {arr.shape}, mesh has {r.shape[0]} cells")
    return arr.copy()


def integrate_modes(mesh: RadialMesh, operator_for_l: Callable[[int], ModeOperator],
                    u0: Mapping[ModeIndex, Profile | np.ndarray], f: Mapping[ModeIndex, Forcing] | None,
                    T: float, dt: float, theta: float, stride: int = 1,
                    workers: int = 1) -> dict[ModeIndex, ModeSolution]:
    """Advance every mode in ``u0`` (and any mode that is only forced) from 0 to ``T``.

    Modes sharing a degree share one operator and are stepped as columns of the
    same banded solve; columns never mix, so results are independent of order.
    """
    if stride < 1:
        raise ValueError("stride must be >= 1")
    n_steps = n_steps_for(T, dt)
    f = f or {}
    r = mesh.centers
    modes = sorted(set(u0) | set(f))
    by_l: dict[int, list[ModeIndex]] = defaultdict(list)
    for mode in modes:
        by_l[mode.l].append(mode)
    keep = sorted(set(range(0, n_steps + 1, stride)) | {n_steps})
    times = np.array([k * dt for k in keep])

    def run(l: int) -> dict[ModeIndex, ModeSolution]:
        group = by_l[l]
        stepper = ThetaStepper(operator_for_l(l), dt, theta)
        U = np.column_stack([_as_profile(u0[m], r) if m in u0 else np.zeros_like(r) for m in group])
        forced = [m for m in group if m in f]

        def forcing(t: float) -> np.ndarray | None:
            if not forced:
                return None
            F = np.zeros_like(U)
            for j, m in enumerate(group):
                if m in f:
                    F[:, j] = _as_profile(lambda rr: f[m](rr, t), r)
            return F

        snaps = [U.copy()]
        F_old = forcing(0.0)
        for k in range(1, n_steps + 1):
            F_new = forcing(k * dt)
            F = None if F_new is None else theta * F_new + (1.0 - theta) * F_old
            U = stepper.step(U, F)
            F_old = F_new
            if k in keep:
                snaps.append(U.copy())
        stack = np.stack(snaps)  # (n_snap, n_cells, n_modes)
        return {m: ModeSolution(m, mesh, times, np.ascontiguousarray(stack[:, :, j])) for j, m in enumerate(group)}

    out: dict[ModeIndex, ModeSolution] = {}
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(run, sorted(by_l)):
                out.update(part)
    else:
        for l in sorted(by_l):
            out.update(run(l))
    return {m: out[m] for m in modes}


def solve_full(config: LayerConfig, u0: Mapping[ModeIndex, Profile | np.ndarray],
               f: Mapping[ModeIndex, Forcing] | None, T: float, dt: float, theta: float = 1.0,
               mesh: RadialMesh | None = None, stride: int = 1, workers: int = 1) -> dict[ModeIndex, ModeSolution]:
    """Solve the layered problem for every supplied mode on ``mesh`` (default ``build_mesh(config)``)."""
    mesh = mesh if mesh is not None else build_mesh(config)
    if not (mesh.R2 == config.geom.R2 and np.any(mesh.nodes == config.geom.R1)
            and np.any(mesh.nodes == config.geom.R1 + config.delta)):
        raise ValueError("mesh does not match the layer geometry")
    return integrate_modes(mesh, lambda l: assemble_mode_operator(mesh, config, l), u0, f, T, dt, theta, stride, workers)


def ball_l2_norm(solutions: Mapping[ModeIndex, ModeSolution], t: float) -> float:
    """``L2(Omega)`` norm at snapshot time ``t`` (Parseval over modes, cell-volume quadrature in r)."""
    total = 0.0
    for sol in solutions.values():
        u = sol.at(t)
        total += float(sol.mesh.volumes @ (u * u))
    return math.sqrt(total)


def write_snapshot_csv(solutions: Mapping[ModeIndex, ModeSolution], stream: io.TextIOBase | None = None) -> str:
    """Snapshots as CSV ``l,m,t,r,value`` (radii at cell centres); returns the text."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["l", "m", "t", "r", "value"])
    for mode in sorted(solutions):
        sol = solutions[mode]
        r = sol.mesh.centers
        for t, row in zip(sol.times, sol.values):
            for ri, v in zip(r, row):
                w.writerow([mode.l, mode.m, repr(float(t)), repr(float(ri)), repr(float(v))])
    text = buf.getvalue()
    if stream is not None:
        stream.write(text)
    return text
