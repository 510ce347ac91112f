"""Fast invariant checks behind ``ebclab selftest``."""

from __future__ import annotations

import math
from typing import Callable, NamedTuple

import numpy as np

from . import dtn
from .effective import (
    DtnCoupling,
    FluxJumpLB,
    PerfectTransmission,
    RobinContact,
    assemble_effective_operator,
    effective_mesh,
)
from .oracles import fd_strip_flux, steady_robin_l0, steady_three_region_l0
from .radial import LayerConfig, assemble_mode_operator, build_mesh, solve_steady
from .regimes import all_limit_cells
from .spectral import SphereGeometry, SurfaceFunction, n_coeffs, surface_inner_product


class CheckResult(NamedTuple):
    name: str
    ok: bool
    detail: str


def check_dtn_symmetry(rng: np.random.Generator) -> tuple[bool, str]:
    """Symmetric and dissipative: ``<Jg, w> = <g, Jw>`` and ``<Jg, g> <= 0``."""
    geom = SphereGeometry(1.0, 2.0)
    lmax = 16
    worst = 0.0
    for kind in dtn.DtnKind:
        for H in (0.5, 1.0, math.inf):
            for _ in range(20):
                g = SurfaceFunction(lmax, rng.standard_normal(n_coeffs(lmax)))
                w = SurfaceFunction(lmax, rng.standard_normal(n_coeffs(lmax)))
                Jg, Jw = dtn.apply_dtn(kind, H, g, geom), dtn.apply_dtn(kind, H, w, geom)
                lhs, rhs = surface_inner_product(Jg, w, geom), surface_inner_product(g, Jw, geom)
                scale = np.linalg.norm(Jg.coeffs) * np.linalg.norm(w.coeffs) + 1e-300
                worst = max(worst, abs(lhs - rhs) / scale)
                if kind is not dtn.DtnKind.SECOND and surface_inner_product(Jg, g, geom) > 1e-12:
                    return False, f"{kind.value} J^{H} is not dissipative"
    return worst <= 1e-12, f"max relative asymmetry {worst:.2e}"


def check_dtn_oracle(rng: np.random.Generator) -> tuple[bool, str]:
    worst = 0.0
    for lam in (0.5, 2.0, 10.0):
        for H in (0.25, 1.0, 4.0):
            f0, fh = fd_strip_flux(lam, 1.0, 0.0, H)
            for ref, kind in ((f0, dtn.DtnKind.FIRST), (fh, dtn.DtnKind.SECOND)):
                val = dtn.dtn_mode_multiplier(kind, lam, H)
                worst = max(worst, abs(val - ref) / abs(ref))
    return worst <= 1e-6, f"max relative deviation {worst:.2e}"


def _slope(h: np.ndarray, e: np.ndarray) -> float:
    return float(np.polyfit(np.log(h), np.log(e), 1)[0])


def asymptotic_defects(lam: float = 2.0, g1: float = 1.0, g2: float = 0.3) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Defects of the small-height expansions of the end fluxes, at h = 1e-1 .. 1e-4."""
    hs = np.array([1e-1, 1e-2, 1e-3, 1e-4])
    d1 = np.array([abs(dtn.psi_r_at_0(lam, g1, g2, h) - (g2 - g1) / h) for h in hs])
    # Lap_Gamma acts as -lam, so -h/2 (Lap g1 + Lap g2) = +h/2 lam (g1 + g2)
    d2 = np.array([abs(dtn.psi_r_at_h(lam, g1, g2, h) - dtn.psi_r_at_0(lam, g1, g2, h) - 0.5 * h * lam * (g1 + g2))
                   for h in hs])
    return hs, d1, d2


def check_asymptotic_orders(rng: np.random.Generator) -> tuple[bool, str]:
    hs, d1, d2 = asymptotic_defects()
    s1, s2 = _slope(hs, d1), _slope(hs, d2)
    # the difference defect is k (g1 + g2) (tanh(kh/2) - kh/2) = O(h^3), inside the O(h^2) bound
    return (0.9 <= s1 <= 1.1 and s2 >= 1.8), f"slopes {s1:.3f} (want ~1), {s2:.3f} (want >= 2)"


# Table populated/dashed pattern keyed by (case, gamma kind, beta kind).
_POPULATED = {
    (1, "zero", "zero"), (1, "zero", "finite"), (1, "zero", "infinite"),
    (1, "finite", "infinite"), (1, "infinite", "infinite"),
    (2, "zero", "zero"), (2, "finite", "finite"), (2, "infinite", "infinite"),
    (3, "zero", "zero"), (3, "finite", "zero"), (3, "infinite", "zero"),
    (3, "infinite", "finite"), (3, "infinite", "infinite"),
}


def check_classifier(rng: np.random.Generator) -> tuple[bool, str]:
    cells = all_limit_cells()
    bad = [c for c in cells if c.feasible != ((c.case_id, c.gamma.kind.value, c.beta.kind.value) in _POPULATED)]
    return (not bad and len(cells) == 27), f"{len(cells)} cells, {len(bad)} mismatches"


def check_steady_oracles(rng: np.random.Generator) -> tuple[bool, str]:
    geom = SphereGeometry(1.0, 2.0)
    cfg = LayerConfig(geom, 0.1, sigma=0.05, mu=3.0, k1=1.0, k2=2.0)
    q = (1.0, 0.5, 2.0)
    exact = steady_three_region_l0(1.0, 0.1, 2.0, (1.0, 0.05, 2.0), q, 0.7)
    mesh = build_mesh(cfg)
    bc = np.zeros(mesh.n_cells)
    bc[-1] = mesh.R2**2 * cfg.k2 / (mesh.R2 - mesh.centers[-1]) * 0.7
    u = solve_steady(assemble_mode_operator(mesh, cfg, 0), np.choose(mesh.region, q), bc)
    e = exact(mesh.centers)
    err_full = float(np.max(np.abs(u - e)) / np.max(np.abs(e)))

    inner, outer = steady_robin_l0(1.0, 2.0, 1.0, 2.0, 0.8, (1.0, 0.5), 0.7)
    emesh = effective_mesh(geom, 32, 32)
    core = emesh.region == 0
    bc = np.zeros(emesh.n_cells)
    bc[-1] = emesh.R2**2 * 2.0 / (emesh.R2 - emesh.centers[-1]) * 0.7
    v = solve_steady(assemble_effective_operator(emesh, RobinContact(0.8), geom, 1.0, 2.0, 0),
                     np.where(core, 1.0, 0.5), bc)
    c = emesh.centers
    ev = np.where(core, inner(c), outer(c))
    err_eff = float(np.max(np.abs(v - ev)) / np.max(np.abs(ev)))
    return (err_full <= 1e-3 and err_eff <= 1e-3), f"relative errors {err_full:.2e} (layered), {err_eff:.2e} (Robin)"


def check_degeneracies(rng: np.random.Generator) -> tuple[bool, str]:
    geom = SphereGeometry(1.0, 2.0)
    mesh = effective_mesh(geom, 16, 16)
    worst = 0.0
    for l in range(4):
        a = assemble_effective_operator(mesh, FluxJumpLB(0.0), geom, 1.0, 2.0, l).stiffness()
        b = assemble_effective_operator(mesh, PerfectTransmission(), geom, 1.0, 2.0, l).stiffness()
        worst = max(worst, float(np.max(np.abs(a - b)) / np.max(np.abs(b))))
    gamma, beta = 1.5, 0.6
    a = assemble_effective_operator(mesh, DtnCoupling(gamma, beta / gamma), geom, 1.0, 2.0, 0).stiffness()
    b = assemble_effective_operator(mesh, RobinContact(gamma**2 / beta), geom, 1.0, 2.0, 0).stiffness()
    worst = max(worst, float(np.max(np.abs(a - b)) / np.max(np.abs(b))))
    return worst <= 1e-14, f"max relative entry difference {worst:.1e}"


CHECKS: list[tuple[str, Callable[[np.random.Generator], tuple[bool, str]]]] = [
    ("dtn symmetry", check_dtn_symmetry),
    ("dtn oracle", check_dtn_oracle),
    ("asymptotic orders", check_asymptotic_orders),
    ("classifier golden table", check_classifier),
    ("steady-state oracles", check_steady_oracles),
    ("ebc degeneracies", check_degeneracies),
]


def run_selftest(seed: int = 0) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    results = []
    for name, fn in CHECKS:
        try:
            ok, detail = fn(rng)
        except Exception as exc:  # a crashing check is a failed check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(name, bool(ok), detail))
    return results


