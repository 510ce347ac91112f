"""Scaling laws sigma(delta), mu(delta) and the effective-condition cell they select.

With power laws ``sigma = c_s delta^p_s`` and ``mu = c_m delta^p_m`` every limit is
exact exponent arithmetic:

* ``b     = lim sigma / delta``       exponent ``p_s - 1``
* ``gamma = lim sqrt(sigma mu)``      exponent ``(p_s + p_m) / 2``
* ``beta  = lim mu delta``            exponent ``p_m + 1``

and the three always satisfy ``beta = gamma**2 / b``.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass

from .effective import (
    ConstantTraceDecoupled,
    ConstantTraceRobin,
    ConstantTraceTransmission,
    DecoupledNeumann,
    DtnCoupling,
    EbcFamily,
    FluxJumpLB,
    PerfectTransmission,
    RobinContact,
)


class LimitKind(enum.Enum):
    ZERO = "zero"
    FINITE = "finite"
    INFINITE = "infinite"


@dataclass(frozen=True)
class ExtendedLimit:
    kind: LimitKind
    value: float | None = None

    def __post_init__(self) -> None:
        if self.kind is LimitKind.FINITE:
            if self.value is None or not (0.0 < self.value < math.inf):
                raise ValueError(f"finite limit needs a positive value, got {self.value}")
        elif self.value is not None:
            raise ValueError(f"{self.kind.value} limit carries no value")

    @classmethod
    def finite(cls, value: float) -> ExtendedLimit:
        return cls(LimitKind.FINITE, float(value))

    @classmethod
    def from_exponent(cls, exponent: float, coefficient: float) -> ExtendedLimit:
        """Limit of ``coefficient * delta**exponent`` as delta -> 0."""
        if exponent > 0:
            return ZERO
        if exponent < 0:
            return INFINITE
        return cls.finite(coefficient)

    def to_dict(self) -> dict:
        d = {"kind": self.kind.value}
        if self.value is not None:
            d["value"] = self.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> ExtendedLimit:
        return cls(LimitKind(d["kind"]), d.get("value"))

    def __str__(self) -> str:
        return f"{self.value:g}" if self.kind is LimitKind.FINITE else ("0" if self.kind is LimitKind.ZERO else "inf")


ZERO = ExtendedLimit(LimitKind.ZERO)
INFINITE = ExtendedLimit(LimitKind.INFINITE)


@dataclass(frozen=True)
class ScalingLaw:
    c_sigma: float
    p_sigma: float
    c_mu: float
    p_mu: float

    def __post_init__(self) -> None:
        if not (self.c_sigma > 0 and self.c_mu > 0):
            raise ValueError("scaling coefficients must be positive")
        if not (math.isfinite(self.p_sigma) and math.isfinite(self.p_mu)
                and math.isfinite(self.c_sigma) and math.isfinite(self.c_mu)):
            raise ValueError("scaling parameters must be finite")

    def sigma(self, delta: float) -> float:
        return self.c_sigma * delta**self.p_sigma

    def mu(self, delta: float) -> float:
        return self.c_mu * delta**self.p_mu

    def strip_height(self, delta: float) -> float:
        """Rescaled layer height ``delta * sqrt(mu / sigma)``."""
        return delta * math.sqrt(self.mu(delta) / self.sigma(delta))


def limits_of(law: ScalingLaw) -> tuple[ExtendedLimit, ExtendedLimit, ExtendedLimit]:
    b = ExtendedLimit.from_exponent(law.p_sigma - 1.0, law.c_sigma)
    gamma = ExtendedLimit.from_exponent(0.5 * (law.p_sigma + law.p_mu), math.sqrt(law.c_sigma * law.c_mu))
    beta = ExtendedLimit.from_exponent(law.p_mu + 1.0, law.c_mu)
    return b, gamma, beta


def check_sigma_delta_cubed(law: ScalingLaw) -> bool:
    """True iff ``sigma * delta**3 -> 0``."""
    return law.p_sigma + 3.0 > 0.0


@dataclass(frozen=True)
class RegimeCell:
    case_id: int
    b: ExtendedLimit
    gamma: ExtendedLimit
    beta: ExtendedLimit
    family: EbcFamily | None
    requires_sigma_delta_cubed: bool = False
    feasible: bool = True
    reason: str = ""

    def to_dict(self) -> dict:
        return {
            "case": self.case_id,
            "limits": {"b": self.b.to_dict(), "gamma": self.gamma.to_dict(), "beta": self.beta.to_dict()},
            "family": None if self.family is None else self.family.to_dict(),
            "feasible": self.feasible,
            "reason": self.reason,
            "requires_sigma_delta_cubed": self.requires_sigma_delta_cubed,
        }


def _gamma_sq_over_b(gamma: ExtendedLimit, b: ExtendedLimit) -> ExtendedLimit | None:
    """``gamma**2 / b`` in the extended sense; ``None`` for 0/0 and inf/inf."""
    g, bb = gamma.kind, b.kind
    if g is bb and g is not LimitKind.FINITE:
        return None
    if g is LimitKind.ZERO or bb is LimitKind.INFINITE:
        return ZERO
    if g is LimitKind.INFINITE or bb is LimitKind.ZERO:
        return INFINITE
    return ExtendedLimit.finite(gamma.value**2 / b.value)


def feasibility(b: ExtendedLimit, gamma: ExtendedLimit, beta: ExtendedLimit) -> tuple[bool, str]:
    expected = _gamma_sq_over_b(gamma, b)
    if expected is None:
        return True, ""
    if expected.kind is not beta.kind:
        return False, f"β = γ²/b violated: γ²/b = {expected} but β = {beta} (b = {b}, γ = {gamma})"
    if expected.kind is LimitKind.FINITE and not math.isclose(expected.value, beta.value, rel_tol=1e-12):
        return False, f"β = γ²/b violated: γ²/b = {expected.value!r} but β = {beta.value!r}"
    return True, ""


_CASE = {LimitKind.ZERO: 1, LimitKind.FINITE: 2, LimitKind.INFINITE: 3}


def _family(case_id: int, b: ExtendedLimit, gamma: ExtendedLimit, beta: ExtendedLimit) -> EbcFamily:
    Z, F, I = LimitKind.ZERO, LimitKind.FINITE, LimitKind.INFINITE
    g, be = gamma.kind, beta.kind
    if case_id == 1:
        if g is Z:
            return DecoupledNeumann()
        if g is F and be is I:
            return DtnCoupling(gamma.value, math.inf)
        if g is I and be is I:
            return ConstantTraceDecoupled()
    elif case_id == 2:
        if g is Z and be is Z:
            return RobinContact(b.value)
        if g is F and be is F:
            return DtnCoupling(gamma.value, beta.value / gamma.value)
        if g is I and be is I:
            return ConstantTraceRobin(b.value)
    else:
        if be is Z:
            return PerfectTransmission()
        if g is I and be is F:
            return FluxJumpLB(beta.value)
        if g is I and be is I:
            return ConstantTraceTransmission()
    raise AssertionError(f"feasible cell without a family: case {case_id}, gamma {g}, beta {be}")


def classify_limits(b: ExtendedLimit, gamma: ExtendedLimit, beta: ExtendedLimit,
                    requires_sigma_delta_cubed: bool = False) -> RegimeCell:
    case_id = _CASE[b.kind]
    ok, reason = feasibility(b, gamma, beta)
    family = _family(case_id, b, gamma, beta) if ok else None
    return RegimeCell(case_id, b, gamma, beta, family, requires_sigma_delta_cubed, ok, reason)


def classify(law: ScalingLaw) -> RegimeCell:
    b, gamma, beta = limits_of(law)
    needs_cube = b.kind is LimitKind.INFINITE and law.p_mu > law.p_sigma
    return classify_limits(b, gamma, beta, needs_cube)


def all_limit_cells(finite_value: float = 1.0) -> list[RegimeCell]:
    """Every (b, gamma, beta) kind combination, finite entries set to ``finite_value``-consistent values."""
    cells = []
    for kb, kg, kbeta in itertools.product(LimitKind, repeat=3):
        b = ExtendedLimit.finite(finite_value) if kb is LimitKind.FINITE else ExtendedLimit(kb)
        g = ExtendedLimit.finite(finite_value) if kg is LimitKind.FINITE else ExtendedLimit(kg)
        if kbeta is LimitKind.FINITE:
            beta = ExtendedLimit.finite(g.value**2 / b.value if kb is kg is LimitKind.FINITE else finite_value)
        else:
            beta = ExtendedLimit(kbeta)
        cells.append(classify_limits(b, g, beta))
    return cells
