"""Coupling constants and the forward-substitution reconstruction.

The measurement of index (k, l, m) couples to the coefficient c_{l'}^{q,m}
only for l' = l + 2s with 0 <= s <= k and 0 <= q <= k - s, through the
constant

    Q_{l,s}^{k,m,q} = chi_{l+2s}^{k-s,q} * D_{l,s}^{k,m}
                    = (-1)^{m+1} sqrt(2l+4q+4s+3) (k-s+1) (k-q-s+1)_q
                      / ((k+1)(l+k+1) (l+k+s+5/2)_q)
                      * G_{k+1, l+k+1, l+2s}^{0, -m, m},

    D_{l,s}^{k,m}   = (-1)^{m+1} tau_{l, l+2s}^k G_{k+1, l+k+1, l+2s}^{0,-m,m},

    tau_{l,l'}^k    = (l+2k+2-l')(l+2k+3+l') / (2(k+1)(l+k+1)).

Both routes to Q are implemented and must agree; the closed form is the
default.  Because s = 0 and q = k leaves the single new unknown c_l^{k,m}
with a provably nonzero divisor Q_{l,0}^{k,m,k}, the whole system is
triangular in k and solves by forward substitution:

    c_l^{k,m} = (Q_{l,0}^{k,m,k})^{-1} (M(k,l,m)
                - sum_{q=0}^{k-1} sum_{s=0}^{k-q} Q_{l,s}^{k,m,q} c_{l+2s}^{q,m}).

The inner sum reaches degree l + 2s at earlier radial indices q, so a
per-k truncation schedule (l_0, ..., l_K) is usable only when
l_q >= l_k + 2(k - q) for all q < k; both built-in demo schedules satisfy
this.  Infeasible schedules are rejected unless zero-fill regularisation
is requested explicitly.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING

from . import specfun
from .zernike import CoefficientField, ZernikeIndex

if TYPE_CHECKING:  # import only for annotations, forward imports this module
    from .forward import MeasurementSet

__all__ = [
    "TruncationSchedule",
    "ScheduleViolation",
    "StageDiagnostic",
    "ReconReport",
    "InfeasibleScheduleError",
    "MissingMeasurementError",
    "DivisorUnderflowWarning",
    "tau",
    "big_d",
    "big_q",
    "validate_schedule",
    "reconstruct",
    "DIVISOR_UNDERFLOW",
]

# tripwire only: the divisor is provably nonzero, so anything this small
# signals a defect in the special functions, not an ill-posed problem
DIVISOR_UNDERFLOW = 1e-14


class InfeasibleScheduleError(ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        first = self.violations[0]
        super().__init__(
            f"infeasible truncation schedule: {len(self.violations)} violation(s), "
            f"first at (q={first.q}, k={first.k}): need cap[{first.q}] >= "
            f"{first.required}, have {first.actual}"
        )


class MissingMeasurementError(KeyError):
    def __init__(self, k: int, ell: int, m: int):
        self.index = (k, ell, m)
        super().__init__(f"measurement (k={k}, ell={ell}, m={m}) is absent from the data")

    def __str__(self) -> str:  # KeyError reprs its message by default
        return self.args[0]


class DivisorUnderflowWarning(UserWarning):
    pass


@dataclass(frozen=True)
class TruncationSchedule:
    """Per-k degree caps (l_0, ..., l_K) used during reconstruction."""

    caps: tuple

    def __post_init__(self) -> None:
        caps = tuple(int(c) for c in self.caps)
        if not caps:
            raise ValueError("schedule needs at least one cap")
        if any(c < 0 for c in caps):
            raise ValueError("degree caps must be nonnegative")
        object.__setattr__(self, "caps", caps)

    @property
    def K(self) -> int:
        return len(self.caps) - 1

    @classmethod
    def from_string(cls, text: str) -> "TruncationSchedule":
        return cls(tuple(int(p) for p in text.replace(" ", "").split(",") if p))

    def feasible(self) -> bool:
        return not validate_schedule(self)


@dataclass(frozen=True)
class ScheduleViolation:
    q: int
    k: int
    required: int
    actual: int


@dataclass(frozen=True)
class StageDiagnostic:
    k: int
    max_inner_sum_magnitude: float


@dataclass(frozen=True, eq=False)
class ReconReport:
    """Reconstruction result plus solver diagnostics."""

    field: CoefficientField
    schedule: TruncationSchedule
    min_divisor: float
    stages: tuple
    regularised: bool = False


def tau(ell: int, ell_prime: int, k: int, form: str = "closed") -> float:
    """Surface-gradient reduction factor tau_{l,l'}^k.

    form "closed" evaluates the factored product; form "expanded" the
    equivalent 1 + (quadratic terms) expression.  Vanishes exactly at
    ell_prime = ell + 2k + 2.
    """
    if ell < 0 or ell_prime < 0 or k < 0:
        raise ValueError("indices must be nonnegative")
    den = 2 * (k + 1) * (ell + k + 1)
    if form == "closed":
        return (ell + 2 * k + 2 - ell_prime) * (ell + 2 * k + 3 + ell_prime) / den
    if form == "expanded":
        num = (k + 1) * (k + 2) + (ell + k + 1) * (ell + k + 2) - ell_prime * (ell_prime + 1)
        return 1.0 + num / den
    raise ValueError(f"unknown tau form {form!r}")


def big_d(ell: int, s: int, k: int, m: int) -> float:
    """Angular coupling D_{l,s}^{k,m} = (-1)^{m+1} tau G_{k+1,l+k+1,l+2s}^{0,-m,m}."""
    if not 0 <= s <= k:
        raise ValueError(f"need 0 <= s <= k, got s={s}, k={k}")
    if abs(m) > ell:
        raise ValueError(f"order out of range: |m|={abs(m)} > ell={ell}")
    sign = 1.0 if m % 2 else -1.0
    g = specfun.gaunt(k + 1, ell + k + 1, ell + 2 * s, 0, -m, m)
    if g == 0.0:
        return 0.0
    return sign * tau(ell, ell + 2 * s, k) * g


def big_q(ell: int, s: int, k: int, m: int, q: int, form: str = "closed") -> float:
    """Series coupling Q_{l,s}^{k,m,q}.

    form "closed" uses the fully collapsed expression; form "factored"
    multiplies chi_{l+2s}^{k-s,q} by D_{l,s}^{k,m}.  The two agree to
    rounding and are cross-checked in the test suite.
    """
    if not 0 <= s <= k:
        raise ValueError(f"need 0 <= s <= k, got s={s}, k={k}")
    if not 0 <= q <= k - s:
        raise ValueError(f"need 0 <= q <= k - s, got q={q}, k={k}, s={s}")
    if abs(m) > ell:
        raise ValueError(f"order out of range: |m|={abs(m)} > ell={ell}")
    if form == "factored":
        from .zernike import chi

        return chi(ell + 2 * s, k - s, q) * big_d(ell, s, k, m)
    if form != "closed":
        raise ValueError(f"unknown big_q form {form!r}")
    g = specfun.gaunt(k + 1, ell + k + 1, ell + 2 * s, 0, -m, m)
    if g == 0.0:
        return 0.0
    num = (k - s + 1) * 2**q
    for i in range(q):
        num *= k - q - s + 1 + i
    den = (k + 1) * (ell + k + 1)
    for i in range(q):
        den *= 2 * (ell + k + s) + 5 + 2 * i
    sign = 1.0 if m % 2 else -1.0
    return sign * math.sqrt(2 * ell + 4 * q + 4 * s + 3) * float(Fraction(num, den)) * g


def validate_schedule(schedule: TruncationSchedule) -> list:
    """Feasibility violations of a schedule; empty iff usable exactly.

    Stage k consumes coefficients up to degree l_k + 2(k - q) at every
    earlier radial index q, so each cap must dominate that demand.
    """
    caps = schedule.caps
    out = []
    for k in range(1, len(caps)):
        for q in range(k):
            required = caps[k] + 2 * (k - q)
            if caps[q] < required:
                out.append(ScheduleViolation(q=q, k=k, required=required, actual=caps[q]))
    return out


def reconstruct(
    ms: "MeasurementSet", schedule: TruncationSchedule, zero_fill: bool = False
) -> ReconReport:
    """Recover coefficients from measurements by forward substitution.

    Stages run in increasing k; within a stage the (ell, m) order is
    irrelevant because the inner sum touches only earlier stages.  With
    exact measurements of a field supported inside a feasible schedule
    the recovery is exact to rounding.

    Parameters
    ----------
    ms : MeasurementSet
        Must contain every index (k <= K, ell <= caps[k], |m| <= ell).
    schedule : TruncationSchedule
    zero_fill : bool
        Opt-in regularisation: substitute 0 for dependencies an
        infeasible schedule never reconstructed, instead of raising.

    Raises
    ------
    InfeasibleScheduleError
        Schedule violates the dependency inequality and zero_fill is off.
    MissingMeasurementError
        Names the first absent measurement index.
    """
    violations = validate_schedule(schedule)
    if violations and not zero_fill:
        raise InfeasibleScheduleError(violations)
    caps = schedule.caps
    recovered: dict = {}
    qcache: dict = {}

    def coupling(ell: int, s: int, k: int, m: int, q: int) -> float:
        key = (ell, s, k, m, q)
        val = qcache.get(key)
        if val is None:
            val = big_q(ell, s, k, m, q)
            qcache[key] = val
        return val

    min_divisor = math.inf
    stages = []
    substituted = False
    for k in range(len(caps)):
        max_inner = 0.0
        for ell in range(caps[k], -1, -1):
            for m in range(-ell, ell + 1):
                key = ZernikeIndex(k, ell, m)
                if key not in ms.values:
                    raise MissingMeasurementError(k, ell, m)
                inner = 0.0 + 0.0j
                for q in range(k):
                    for s in range(k - q + 1):
                        dep = recovered.get(ZernikeIndex(q, ell + 2 * s, m))
                        if dep is None:
                            # only reachable for infeasible schedules
                            substituted = True
                            continue
                        if dep != 0:
                            inner += coupling(ell, s, k, m, q) * dep
                divisor = coupling(ell, 0, k, m, k)
                if abs(divisor) < DIVISOR_UNDERFLOW:
                    warnings.warn(
                        f"divisor |Q| = {abs(divisor):.3e} below {DIVISOR_UNDERFLOW} at "
                        f"(k={k}, ell={ell}, m={m}); the special functions are suspect",
                        DivisorUnderflowWarning,
                    )
                min_divisor = min(min_divisor, abs(divisor))
                max_inner = max(max_inner, abs(inner))
                recovered[key] = (ms.values[key] - inner) / divisor
        stages.append(StageDiagnostic(k=k, max_inner_sum_magnitude=max_inner))
    out_field = CoefficientField(recovered, len(caps) - 1, caps, certified=True)
    return ReconReport(
        field=out_field,
        schedule=schedule,
        min_divisor=min_divisor,
        stages=tuple(stages),
        regularised=substituted,
    )
