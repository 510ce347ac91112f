"""Effective two-region problems with interface conditions on Gamma_1 (r = R1).

Sign convention, used for every family below: ``n`` is the radial unit vector,
pointing out of the core, so ``dv/dn`` on either side of ``R1`` is the ordinary
radial derivative. ``lam = l(l+1)/R1**2`` is the eigenvalue of ``-Lap_Gamma``,
hence ``Lap_Gamma`` acts on a mode as ``-lam``.

Each family reduces, mode by mode, to one of three interface forms:

* coefficient form ``k1 v1' = c11 v1 + c12 v2`` and ``k2 v2' = c21 v1 + c22 v2``;
* value continuity ``v1 = v2`` with ``k1 v1' - k2 v2' = jump * v``;
* homogeneous Dirichlet data on both sides.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import ClassVar, Mapping

import numpy as np

from .dtn import DtnKind, dtn_mode_multiplier
from .mesh import INNER, RadialMesh, build_two_region_mesh
from .radial import Forcing, ModeOperator, ModeSolution, Profile, assemble_radial, integrate_modes
from .spectral import ModeIndex, SphereGeometry, lb_eigenvalue


def _positive(name: str, value: float, allow_inf: bool = False) -> None:
    if not (value > 0.0) or (math.isinf(value) and not allow_inf) or math.isnan(value):
        raise ValueError(f"{name} must be positive{' (or inf)' if allow_inf else ''}, got {value}")


@dataclass(frozen=True)
class EbcFamily:
    name: ClassVar[str] = ""

    def to_dict(self) -> dict:
        return {"family": self.name, **{k: (None if math.isinf(v) else v) for k, v in asdict(self).items()}}


@dataclass(frozen=True)
class DecoupledNeumann(EbcFamily):
    name: ClassVar[str] = "DecoupledNeumann"


@dataclass(frozen=True)
class RobinContact(EbcFamily):
    b: float
    name: ClassVar[str] = "RobinContact"

    def __post_init__(self) -> None:
        _positive("b", self.b)


@dataclass(frozen=True)
class DtnCoupling(EbcFamily):
    gamma: float
    H: float
    name: ClassVar[str] = "DtnCoupling"

    def __post_init__(self) -> None:
        _positive("gamma", self.gamma)
        _positive("H", self.H, allow_inf=True)


@dataclass(frozen=True)
class PerfectTransmission(EbcFamily):
    name: ClassVar[str] = "PerfectTransmission"


@dataclass(frozen=True)
class FluxJumpLB(EbcFamily):
    beta: float
    name: ClassVar[str] = "FluxJumpLB"

    def __post_init__(self) -> None:
        if not (self.beta >= 0.0 and math.isfinite(self.beta)):
            raise ValueError(f"beta must be finite and nonnegative, got {self.beta}")


@dataclass(frozen=True)
class ConstantTraceDecoupled(EbcFamily):
    name: ClassVar[str] = "ConstantTraceDecoupled"


@dataclass(frozen=True)
class ConstantTraceRobin(EbcFamily):
    b: float
    name: ClassVar[str] = "ConstantTraceRobin"

    def __post_init__(self) -> None:
        _positive("b", self.b)


@dataclass(frozen=True)
class ConstantTraceTransmission(EbcFamily):
    name: ClassVar[str] = "ConstantTraceTransmission"


FAMILIES: dict[str, type[EbcFamily]] = {
    cls.name: cls for cls in (DecoupledNeumann, RobinContact, DtnCoupling, PerfectTransmission, FluxJumpLB,
                              ConstantTraceDecoupled, ConstantTraceRobin, ConstantTraceTransmission)
}


def family_from_dict(d: Mapping) -> EbcFamily:
    d = dict(d)
    cls = FAMILIES[d.pop("family")]
    if "H" in d and d["H"] is None:
        d["H"] = math.inf
    return cls(**d)


@dataclass(frozen=True)
class ModeBoundaryCoupling:
    c11: float = 0.0
    c12: float = 0.0
    c21: float = 0.0
    c22: float = 0.0
    value_continuity: bool = False
    jump: float = 0.0
    dirichlet_zero_both: bool = False

    def __post_init__(self) -> None:
        if self.value_continuity and self.dirichlet_zero_both:
            raise ValueError("value continuity and Dirichlet closure are exclusive")
        if (self.value_continuity or self.dirichlet_zero_both) and any((self.c11, self.c12, self.c21, self.c22)):
            raise ValueError("coefficient form cannot be combined with the other closures")

    @property
    def form(self) -> str:
        if self.dirichlet_zero_both:
            return "dirichlet"
        return "continuity" if self.value_continuity else "coefficients"


NEUMANN = ModeBoundaryCoupling()
TRANSMISSION = ModeBoundaryCoupling(value_continuity=True)


def _robin(b: float) -> ModeBoundaryCoupling:
    return ModeBoundaryCoupling(-b, b, -b, b)


def mode_boundary_conditions(family: EbcFamily, l: int, geom: SphereGeometry) -> ModeBoundaryCoupling:
    lam = lb_eigenvalue(l, geom)
    if isinstance(family, DecoupledNeumann):
        return NEUMANN
    if isinstance(family, RobinContact):
        return _robin(family.b)
    if isinstance(family, DtnCoupling):
        g = family.gamma
        j1 = dtn_mode_multiplier(DtnKind.FIRST, lam, family.H)
        j2 = dtn_mode_multiplier(DtnKind.SECOND, lam, family.H)
        return ModeBoundaryCoupling(g * j1, -g * j2, g * j2, -g * j1)
    if isinstance(family, PerfectTransmission):
        return TRANSMISSION
    if isinstance(family, FluxJumpLB):
        # beta * Lap_Gamma v has mode multiplier -beta * lam
        return ModeBoundaryCoupling(value_continuity=True, jump=-family.beta * lam)
    if l >= 1:
        # a constant trace has no component on nonconstant harmonics
        return ModeBoundaryCoupling(dirichlet_zero_both=True)
    if isinstance(family, ConstantTraceDecoupled):
        return NEUMANN
    if isinstance(family, ConstantTraceRobin):
        return _robin(family.b)
    if isinstance(family, ConstantTraceTransmission):
        return TRANSMISSION
    raise TypeError(f"unknown family {family!r}")


def interface_block(coupling: ModeBoundaryCoupling, k1: float, k2: float, d1: float, d2: float, R1: float) -> np.ndarray:
    """2x2 block added to ``A`` for the last core cell and the first outer cell.

    ``d1``, ``d2`` are the centre-to-interface distances. Interface traces are
    eliminated through the half-cell fluxes ``k1 (v1b - va)/d1`` and
    ``k2 (vb - v2b)/d2``; the resulting block is symmetric whenever the
    coupling is (all families here).
    """
    a1, a2 = k1 / d1, k2 / d2
    if coupling.form == "dirichlet":
        M = np.diag([-a1, -a2])
    elif coupling.form == "continuity":
        # shared trace v: a1 (v - va) + a2 (v - vb) = jump * v
        w = np.array([a1, a2]) / (a1 + a2 - coupling.jump)
        M = np.diag([a1, a2]) @ (np.outer(np.ones(2), w) - np.eye(2))
    else:
        # q = (k1 v1', -k2 v2') = K (trace), trace = cells + D q
        K = np.array([[coupling.c11, coupling.c12], [-coupling.c21, -coupling.c22]])
        D = np.diag([1.0 / a1, 1.0 / a2])
        M = np.linalg.solve(np.eye(2) - K @ D, K)
    return R1**2 * M


def assemble_effective_operator(mesh: RadialMesh, family: EbcFamily, geom: SphereGeometry, k1: float, k2: float,
                                l: int) -> ModeOperator:
    n1 = int(np.count_nonzero(mesh.region == INNER))
    if mesh.nodes[n1] != geom.R1:
        raise ValueError("mesh has no node at R1")
    k = np.where(mesh.region == INNER, k1, k2).astype(float)
    coupling = mode_boundary_conditions(family, l, geom)
    if coupling.form == "continuity" and coupling.jump == 0.0:
        # plain transmission is the ordinary harmonic-average face
        return assemble_radial(mesh, k, k, l)
    op = assemble_radial(mesh, k, k, l, open_faces=np.array([n1]))
    c = mesh.centers
    block = interface_block(coupling, k1, k2, geom.R1 - c[n1 - 1], c[n1] - geom.R1, geom.R1)
    diag, off = op.diag.copy(), op.off.copy()
    diag[n1 - 1] += block[0, 0]
    diag[n1] += block[1, 1]
    off[n1 - 1] += 0.5 * (block[0, 1] + block[1, 0])
    return ModeOperator(l, diag, off, op.mass)


def effective_mesh(geom: SphereGeometry, n_inner: int = 64, n_outer: int = 64, stretch: float = 2.0) -> RadialMesh:
    return build_two_region_mesh(geom.R1, geom.R2, n_inner, n_outer, stretch)


def solve_effective(family: EbcFamily, geom: SphereGeometry, k1: float, k2: float,
                    u0: Mapping[ModeIndex, Profile | np.ndarray], f: Mapping[ModeIndex, Forcing] | None,
                    T: float, dt: float, theta: float = 1.0, mesh: RadialMesh | None = None, stride: int = 1,
                    workers: int = 1) -> dict[ModeIndex, ModeSolution]:
    """Effective problem per mode: ``k1`` core, ``k2`` shell, outer Dirichlet zero, ``family`` at ``R1``."""
    _positive("k1", k1)
    _positive("k2", k2)
    mesh = mesh if mesh is not None else effective_mesh(geom)
    return integrate_modes(mesh, lambda l: assemble_effective_operator(mesh, family, geom, k1, k2, l),
                           u0, f, T, dt, theta, stride, workers)
