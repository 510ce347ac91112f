"""delta -> 0 experiments: full layered solves against one effective solve."""

from __future__ import annotations

import csv
import io
import json
import math
import time
import warnings
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import __version__
from .effective import EbcFamily, effective_mesh, family_from_dict, solve_effective
from .mesh import INNER, LAYER
from .radial import LayerConfig, ModeSolution, build_mesh, solve_full
from .regimes import RegimeCell, ScalingLaw, check_sigma_delta_cubed, classify
from .spectral import ModeIndex, SphereGeometry, mode_indices

FLAGSHIP_REGIMES: dict[str, ScalingLaw] = {
    "robin": ScalingLaw(2.0, 1.0, 1.0, 1.0),
    "transmission": ScalingLaw(1.0, 0.0, 1.0, 0.0),
    "fluxjump": ScalingLaw(1.0, -0.5, 1.0, -1.0),
    "dtn": ScalingLaw(1.0, 1.0, 1.0, -1.0),
}


class InfeasibleRegime(ValueError):
    pass


# ---------------------------------------------------------------- presets

def _smooth_radial(l: int, R2: float):
    """``(r/R2)^l (1 - (r/R2)^2)``: regular at the origin for degree l, zero at R2."""
    return lambda r: (np.asarray(r) / R2) ** l * (1.0 - (np.asarray(r) / R2) ** 2)


def initial_data(preset: str, lmax: int, geom: SphereGeometry, params: Mapping | None = None) -> dict:
    """Per-mode radial profiles for a named preset.

    ``multimode``: every mode up to ``lmax`` with amplitude ``amplitude / (1 + l)``
    and a sign pattern fixed by (l, m). ``bump00``: a single (0,0) Gaussian bump.
    ``zero``: nothing.
    """
    params = dict(params or {})
    amp = float(params.pop("amplitude", 1.0))
    if preset == "zero":
        _no_params(preset, params)
        return {}
    if preset == "bump00":
        center = float(params.pop("center", 0.5 * geom.R1))
        width = float(params.pop("width", 0.25 * geom.R1))
        _no_params(preset, params)
        return {ModeIndex(0, 0): lambda r: amp * np.exp(-(((np.asarray(r) - center) / width) ** 2))
                * (1.0 - (np.asarray(r) / geom.R2) ** 2)}
    if preset == "multimode":
        _no_params(preset, params)
        out = {}
        for mode in mode_indices(lmax):
            base = _smooth_radial(mode.l, geom.R2)
            c = amp * (1.0 if (mode.l + mode.m) % 2 == 0 else -0.5) / (1.0 + mode.l)
            out[mode] = (lambda base, c: lambda r: c * base(r))(base, c)
        return out
    raise ValueError(f"unknown initial-data preset {preset!r}")


def forcing(preset: str, geom: SphereGeometry, params: Mapping | None = None) -> dict:
    """``zero`` or ``constant00`` (uniform heat source ``value`` in the (0,0) mode)."""
    params = dict(params or {})
    if preset == "zero":
        _no_params(preset, params)
        return {}
    if preset == "constant00":
        value = float(params.pop("value", 1.0))
        _no_params(preset, params)
        # uniform source q has (0,0) coefficient q * sqrt(4 pi)
        coeff = value * math.sqrt(4.0 * math.pi)
        return {ModeIndex(0, 0): lambda r, t: np.full(np.shape(r), coeff)}
    raise ValueError(f"unknown forcing preset {preset!r}")


def _no_params(preset: str, params: Mapping) -> None:
    if params:
        raise ValueError(f"unexpected parameters for preset {preset!r}: {sorted(params)}")


# ---------------------------------------------------------------- config / report

@dataclass(frozen=True)
class ExperimentConfig:
    law: ScalingLaw
    deltas: tuple[float, ...]
    geom: SphereGeometry = SphereGeometry(1.0, 2.0)
    k1: float = 1.0
    k2: float = 1.0
    lmax: int = 8
    initial: str = "multimode"
    initial_params: Mapping = field(default_factory=dict)
    forcing: str = "zero"
    forcing_params: Mapping = field(default_factory=dict)
    T: float = 0.5
    dt: float = 1e-3
    theta: float = 1.0
    cells: tuple[int, int, int] = (64, 16, 64)
    effective_cells: tuple[int, int] = (128, 128)
    stride: int = 10
    record_timing: bool = True
    workers: int = 1

    def __post_init__(self) -> None:
        d = tuple(float(x) for x in self.deltas)
        if not d:
            raise ValueError("need at least one delta")
        if any(x <= 0 for x in d) or any(b >= a for a, b in zip(d, d[1:])):
            raise ValueError("deltas must be positive and strictly decreasing")
        if d[0] >= self.geom.R2 - self.geom.R1:
            raise ValueError("largest delta must be smaller than R2 - R1")
        object.__setattr__(self, "deltas", d)


@dataclass
class ReportRow:
    delta: float
    sup_t_error: float
    full_runtime_s: float
    eff_runtime_s: float
    sigma_delta_cubed_ok: bool = True


@dataclass
class ConvergenceReport:
    cell: RegimeCell
    rows: list[ReportRow]
    metadata: dict

    def errors(self) -> list[float]:
        return [r.sup_t_error for r in self.rows]

    def ratios(self) -> list[float | None]:
        e = self.errors()
        return [None] + [a / b if b > 0 else math.inf for a, b in zip(e, e[1:])]


# ---------------------------------------------------------------- error measure

def _interp(x: np.ndarray, xp: np.ndarray, fp: np.ndarray) -> np.ndarray:
    """Piecewise-linear interpolation, linearly extrapolated past both ends."""
    y = np.interp(x, xp, fp)
    lo, hi = x < xp[0], x > xp[-1]
    if lo.any():
        y[lo] = fp[0] + (fp[1] - fp[0]) / (xp[1] - xp[0]) * (x[lo] - xp[0])
    if hi.any():
        y[hi] = fp[-1] + (fp[-1] - fp[-2]) / (xp[-1] - xp[-2]) * (x[hi] - xp[-1])
    return y


def transfer_effective(eff: ModeSolution, full_mesh, R1: float) -> np.ndarray:
    """Effective snapshots interpolated to the full-mesh centres, region by region.

    Core cells read the effective core, everything beyond ``R1`` reads the
    effective shell, whose Dirichlet value 0 at ``R2`` is used as an extra node.
    """
    c_eff, c_full = eff.mesh.centers, full_mesh.centers
    core_e = eff.mesh.region == INNER
    core_f = full_mesh.region == INNER
    out = np.empty((eff.times.size, full_mesh.n_cells))
    xs_shell = np.append(c_eff[~core_e], eff.mesh.R2)
    for i, v in enumerate(eff.values):
        out[i, core_f] = _interp(c_full[core_f], c_eff[core_e], v[core_e])
        out[i, ~core_f] = _interp(c_full[~core_f], xs_shell, np.append(v[~core_e], 0.0))
    return out


def _check_times(full: Mapping[ModeIndex, ModeSolution], effective: Mapping[ModeIndex, ModeSolution]) -> np.ndarray:
    times = None
    for sol in list(full.values()) + list(effective.values()):
        if times is None:
            times = sol.times
        elif sol.times.shape != times.shape or not np.allclose(sol.times, times, rtol=0, atol=1e-12):
            raise ValueError("full and effective snapshot times are misaligned")
    return times


def error_ct_l2(full: Mapping[ModeIndex, ModeSolution], effective: Mapping[ModeIndex, ModeSolution], delta: float,
                include_layer: bool = False) -> float:
    """``max_t ||u_full - v_eff||_{L2}`` over the core and the outer shell ``r > R1 + delta``.

    With ``include_layer`` the layer cells are also counted, against the
    effective shell value at ``R1 + delta`` held constant across the layer.
    """
    times = _check_times(full, effective)
    if times is None:
        return 0.0
    missing = set(effective) - set(full)
    if missing:
        raise ValueError(f"modes {sorted(missing)} are missing from the full solution")
    sq = np.zeros(times.size)
    for mode in sorted(full):
        sol = full[mode]
        mesh = sol.mesh
        keep = np.ones(mesh.n_cells, bool) if include_layer else mesh.region != LAYER
        eff = effective.get(mode)
        if eff is None:
            v = np.zeros_like(sol.values)
        else:
            R1 = float(mesh.nodes[np.count_nonzero(mesh.region == INNER)])
            v = transfer_effective(eff, mesh, R1)
            if include_layer:
                edge = np.array([R1 + delta])
                shell = eff.mesh.region != INNER
                xs = np.append(eff.mesh.centers[shell], eff.mesh.R2)
                for i, vv in enumerate(eff.values):
                    v[i, mesh.region == LAYER] = _interp(edge, xs, np.append(vv[shell], 0.0))[0]
        d = sol.values - v
        sq += (d[:, keep] ** 2) @ mesh.volumes[keep]
    return float(math.sqrt(sq.max()))


def layer_l2_mass(full: Mapping[ModeIndex, ModeSolution]) -> float:
    """``max_t`` L2 norm of the full solution restricted to the layer."""
    sq = None
    for sol in full.values():
        sel = sol.mesh.region == LAYER
        part = (sol.values[:, sel] ** 2) @ sol.mesh.volumes[sel]
        sq = part if sq is None else sq + part
    return 0.0 if sq is None else float(math.sqrt(sq.max()))


# ---------------------------------------------------------------- experiment

def run_experiment(config: ExperimentConfig) -> ConvergenceReport:
    cell = classify(config.law)
    if not cell.feasible:
        raise InfeasibleRegime(cell.reason)
    cube_ok = check_sigma_delta_cubed(config.law)
    if cell.requires_sigma_delta_cubed and not cube_ok:
        warnings.warn("sigma * delta^3 does not vanish for this law; rows are flagged", RuntimeWarning, stacklevel=2)
    family: EbcFamily = cell.family
    geom = config.geom
    u0 = initial_data(config.initial, config.lmax, geom, config.initial_params)
    f = forcing(config.forcing, geom, config.forcing_params)

    clock = time.perf_counter
    t0 = clock()
    eff_mesh = effective_mesh(geom, *config.effective_cells)
    effective = solve_effective(family, geom, config.k1, config.k2, u0, f, config.T, config.dt, config.theta,
                                mesh=eff_mesh, stride=config.stride, workers=config.workers)
    eff_time = clock() - t0

    rows = []
    for delta in config.deltas:
        layer = LayerConfig(geom, delta, config.law.sigma(delta), config.law.mu(delta), config.k1, config.k2)
        t0 = clock()
        mesh = build_mesh(layer, *config.cells)
        full = solve_full(layer, u0, f, config.T, config.dt, config.theta, mesh=mesh, stride=config.stride,
                          workers=config.workers)
        full_time = clock() - t0
        err = error_ct_l2(full, effective, delta)
        rows.append(ReportRow(delta, err, full_time if config.record_timing else 0.0,
                              eff_time if config.record_timing else 0.0,
                              cube_ok or not cell.requires_sigma_delta_cubed))
    rows.sort(key=lambda r: -r.delta)
    metadata = {
        "law": {"c_sigma": config.law.c_sigma, "p_sigma": config.law.p_sigma,
                "c_mu": config.law.c_mu, "p_mu": config.law.p_mu},
        "geometry": {"R1": geom.R1, "R2": geom.R2},
        "k1": config.k1, "k2": config.k2, "lmax": config.lmax,
        "initial": config.initial, "forcing": config.forcing,
        "T": config.T, "dt": config.dt, "theta": config.theta, "stride": config.stride,
        "cells": list(config.cells), "effective_cells": list(config.effective_cells),
        "versions": {"ebclab": __version__, "numpy": np.__version__},
    }
    return ConvergenceReport(cell, rows, metadata)


# ---------------------------------------------------------------- serialization

def _fmt(x: float | None) -> str:
    return "" if x is None else repr(float(x))


def report_to_csv(report: ConvergenceReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["delta", "sup_t_error", "error_ratio", "full_runtime_s", "eff_runtime_s"])
    for row, ratio in zip(report.rows, report.ratios()):
        w.writerow([_fmt(row.delta), _fmt(row.sup_t_error), _fmt(ratio), _fmt(row.full_runtime_s),
                    _fmt(row.eff_runtime_s)])
    return buf.getvalue()


def report_to_dict(report: ConvergenceReport) -> dict:
    return {
        "regime": report.cell.to_dict(),
        "rows": [
            {"delta": r.delta, "sup_t_error": r.sup_t_error, "error_ratio": q,
             "full_runtime_s": r.full_runtime_s, "eff_runtime_s": r.eff_runtime_s,
             "sigma_delta_cubed_ok": r.sigma_delta_cubed_ok}
            for r, q in zip(report.rows, report.ratios())
        ],
        "metadata": report.metadata,
    }


def report_from_json(text: str) -> ConvergenceReport:
    from .regimes import ExtendedLimit

    d = json.loads(text)
    reg = d["regime"]
    lim = reg["limits"]
    cell = RegimeCell(reg["case"], ExtendedLimit.from_dict(lim["b"]), ExtendedLimit.from_dict(lim["gamma"]),
                      ExtendedLimit.from_dict(lim["beta"]),
                      None if reg["family"] is None else family_from_dict(reg["family"]),
                      reg["requires_sigma_delta_cubed"], reg["feasible"], reg["reason"])
    rows = [ReportRow(r["delta"], r["sup_t_error"], r["full_runtime_s"], r["eff_runtime_s"],
                      r["sigma_delta_cubed_ok"]) for r in d["rows"]]
    return ConvergenceReport(cell, rows, d["metadata"])


def report_to_gnuplot(report: ConvergenceReport, data_file: str = "report.csv") -> str:
    fam = report.cell.family.name if report.cell.family else "infeasible"
    return "\n".join([
        "set datafile separator ','",
        "set logscale xy",
        "set xlabel 'delta'",
        "set ylabel 'sup_t L2 error'",
        f"set title 'case {report.cell.case_id}: {fam}'",
        "set key top left",
        f"plot '{data_file}' using 1:2 skip 1 with linespoints title 'sup_t error'",
        "",
    ])


def emit_report(report: ConvergenceReport, fmt: str, data_file: str = "report.csv") -> bytes:
    if fmt == "csv":
        return report_to_csv(report).encode()
    if fmt == "json":
        return (json.dumps(report_to_dict(report), indent=2, sort_keys=True) + "\n").encode()
    if fmt == "gnuplot":
        return report_to_gnuplot(report, data_file).encode()
    raise ValueError(f"unknown report format {fmt!r}; expected csv, json or gnuplot")
