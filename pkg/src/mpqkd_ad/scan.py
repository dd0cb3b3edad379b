"""Intensity optimization, distance/QBER sweeps, zero-rate thresholds and the
PLOB benchmark."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import NamedTuple, Sequence

import numpy as np

from .model import ModelDomainError, SystemParams, binary_entropy, derive_channel
from .numerics import bisect_sign, golden_section_min
from .rates import RateResult, devicelevel_result, rate_ad, rate_info

MU_MIN = 1e-4
MU_MAX = 1.0
MU_GRID = 60
MU_REL_TOL = 1e-4
PLOB_CAP = 10.0
BRACKET_START_KM = 100.0
BRACKET_CAP_KM = 1e4
ORIGINAL_QBER_TARGET = 0.046


class Engine(str, Enum):
    ORIGINAL = "original"
    INFO = "info"
    AD = "ad"


@dataclass(frozen=True)
class ScanSpec:
    params: SystemParams
    L_from: float
    L_to: float
    L_step: float
    engine: Engine = Engine.AD
    mu: float | None = None
    b_range: tuple[int, int] = (1, 3)

    def __post_init__(self) -> None:
        if not self.L_from <= self.L_to:
            raise ValueError(f"L_from={self.L_from} exceeds L_to={self.L_to}")
        if not self.L_step > 0:
            raise ValueError(f"L_step must be positive, got {self.L_step}")
        if self.L_from < 0:
            raise ValueError(f"distances must be >= 0, got {self.L_from}")
        if self.mu is not None and not (0.0 < self.mu):
            raise ValueError(f"fixed mu must be positive, got {self.mu}")
        b_min, b_max = self.b_range
        if not 1 <= b_min <= b_max:
            raise ValueError(f"invalid b range {self.b_range}")

    def distances(self) -> list[float]:
        n = int(math.floor((self.L_to - self.L_from) / self.L_step + 1e-9))
        return [round(self.L_from + k * self.L_step, 9) for k in range(n + 1)]


@dataclass(frozen=True)
class ScanRow:
    L_km: float
    mu_opt: float
    b_opt: int
    rate_original: float
    rate_info: float
    rate_ad: float
    plob: float
    e_xx: float
    E_zz: float
    qbar11: float
    r_p: float
    r_s: float


SCAN_COLUMNS = tuple(ScanRow.__dataclass_fields__)


@dataclass
class ScanTable:
    rows: list[ScanRow] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def column(self, name: str) -> list:
        return [getattr(r, name) for r in self.rows]


class Plob(NamedTuple):
    value: float
    capped: bool


def plob_bound(L: float, alpha: float, cap: float = PLOB_CAP) -> Plob:
    """Repeaterless capacity ``-log2(1 - eta)`` of the end-to-end fiber."""
    if L < 0:
        raise ValueError(f"distance must be >= 0, got {L}")
    eta = 10.0 ** (-alpha * L / 10.0)
    if eta >= 1.0:
        return Plob(cap, True)
    value = -math.log1p(-eta) / math.log(2.0)
    if value > cap:
        return Plob(cap, True)
    return Plob(value, False)


def engine_rate(
    params: SystemParams,
    L: float,
    mu: float,
    engine: Engine,
    b_range: tuple[int, int] = (1, 3),
) -> RateResult:
    ch = derive_channel(params, L, mu)
    if engine is Engine.ORIGINAL:
        return devicelevel_result(ch, params.f)
    if engine is Engine.INFO:
        return rate_info(ch, params.f)
    return rate_ad(ch, params.f, *b_range)


def optimize_mu(
    params: SystemParams,
    L: float,
    engine: Engine,
    b_range: tuple[int, int] = (1, 3),
    mu: float | None = None,
) -> tuple[float, RateResult]:
    """Best intensity in ``[1e-4, 1]`` for one engine at distance ``L``.

    A 60-point log grid picks the basin and golden-section search on
    ``log(mu)`` refines it. Intensities where the channel model is out of
    its domain (Z error above 1/2) are skipped. When no grid point gives a
    positive rate the grid argmax is returned with rate 0.

    Raises:
        ModelDomainError: if every grid intensity is out of domain.
    """
    engine = Engine(engine)
    if mu is not None:
        return mu, engine_rate(params, L, mu, engine, b_range)

    cache: dict[float, RateResult | None] = {}

    def evaluate(m: float) -> RateResult | None:
        if m not in cache:
            try:
                cache[m] = engine_rate(params, L, m, engine, b_range)
            except ModelDomainError:
                cache[m] = None
        return cache[m]

    def raw(m: float) -> float:
        res = evaluate(m)
        return -math.inf if res is None else res.raw

    grid = np.logspace(math.log10(MU_MIN), math.log10(MU_MAX), MU_GRID)
    values = [raw(float(m)) for m in grid]
    i = int(np.argmax(values))
    if values[i] == -math.inf:
        raise ModelDomainError(f"L={L}: channel model out of domain for every mu in the grid")
    best_mu = float(grid[i])
    if values[i] > 0:
        lo = math.log(grid[max(i - 1, 0)])
        hi = math.log(grid[min(i + 1, MU_GRID - 1)])
        x, v = golden_section_min(lambda t: -raw(math.exp(t)), lo, hi, MU_REL_TOL)
        if -v > values[i]:
            best_mu = math.exp(x)
    result = evaluate(best_mu)
    assert result is not None
    return best_mu, result


def _optimal_raw(params: SystemParams, L: float, engine: Engine, b_range: tuple[int, int]) -> float:
    try:
        return optimize_mu(params, L, engine, b_range)[1].raw
    except ModelDomainError:
        return -math.inf


def _scan_row(spec: ScanSpec, L: float) -> ScanRow:
    params = spec.params
    try:
        results = {
            e: optimize_mu(params, L, e, spec.b_range, spec.mu) for e in Engine
        }
        mu_sel = results[Engine(spec.engine)][0]
        ch = derive_channel(params, L, mu_sel)
    except ModelDomainError as exc:
        raise ModelDomainError(f"at L={L} km: {exc}") from exc
    return ScanRow(
        L_km=L,
        mu_opt=mu_sel,
        b_opt=results[Engine.AD][1].b_opt,
        rate_original=results[Engine.ORIGINAL][1].rate,
        rate_info=results[Engine.INFO][1].rate,
        rate_ad=results[Engine.AD][1].rate,
        plob=plob_bound(L, params.alpha).value,
        e_xx=ch.e_xx,
        E_zz=ch.E_zz,
        qbar11=ch.qbar11,
        r_p=ch.r_p,
        r_s=ch.r_s,
    )


def _scan_row_star(args: tuple[ScanSpec, float]) -> ScanRow:
    return _scan_row(*args)


def scan_distance(spec: ScanSpec, workers: int = 1) -> ScanTable:
    """One row per distance; every engine optimizes its own intensity.

    ``mu_opt`` and the channel columns refer to ``spec.engine``'s optimum,
    ``b_opt`` to the AD engine's. Rows are returned in distance order
    whatever the worker count.
    """
    distances = spec.distances()
    if workers > 1 and len(distances) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_scan_row_star, [(spec, L) for L in distances], chunksize=4))
    else:
        rows = [_scan_row(spec, L) for L in distances]
    meta = {
        "engine_for_mu": Engine(spec.engine).value,
        "b_range": list(spec.b_range),
        "mu_policy": "optimize" if spec.mu is None else f"fixed:{spec.mu}",
    }
    return ScanTable(rows=rows, metadata=meta)


def max_distance(
    params: SystemParams,
    engine: Engine,
    b_range: tuple[int, int] = (1, 3),
    tol_km: float = 0.5,
) -> float:
    """Largest distance with a positive optimized rate, by bisection.

    The bracket starts at ``[0, 100]`` km and doubles until the rate stops
    being positive.
    """
    engine = Engine(engine)

    def f(L: float) -> float:
        return _optimal_raw(params, L, engine, b_range)

    if not f(0.0) > 0:
        raise ModelDomainError(f"{engine.value}: rate is not positive at L=0")
    lo, hi = 0.0, BRACKET_START_KM
    while f(hi) > 0:
        lo, hi = hi, 2.0 * hi
        if hi > BRACKET_CAP_KM:
            raise ModelDomainError(
                f"{engine.value}: no zero crossing below {BRACKET_CAP_KM:g} km"
            )
    return bisect_sign(f, lo, hi, tol_km)


def crossover_distance(table: ScanTable, rel: float = 1e-6) -> float | None:
    """First scanned distance where AD beats the original rate by more than ``rel``."""
    for row in table.rows:
        if row.rate_ad > row.rate_original * (1.0 + rel) and row.rate_ad > 0:
            return row.L_km
    return None


# --- common-QBER synthetic scan --------------------------------------------


class SyntheticPoint(NamedTuple):
    """Stand-in for ChannelDerived with unit pairing prefactors and a common error rate."""

    mu: float
    r_p: float
    r_s: float
    qbar11: float
    e_xx: float
    e_zz: float
    E_zz: float


def synthetic_point(Q: float, qbar11_eff: float) -> SyntheticPoint:
    if not (0.0 <= Q <= 0.5):
        raise ModelDomainError(f"Q={Q!r} outside [0, 0.5]")
    return SyntheticPoint(math.nan, 1.0, 1.0, qbar11_eff, Q, Q, Q)


def calibrate_qbar11(f: float, target: float = ORIGINAL_QBER_TARGET) -> float:
    """Effective single-photon fraction that puts the original threshold at ``target``."""
    h = binary_entropy(target)
    return f * h / (1.0 - h)


def synthetic_rate(
    Q: float,
    qbar11_eff: float,
    f: float,
    engine: Engine,
    b_range: tuple[int, int] = (1, 3),
) -> RateResult:
    pt = synthetic_point(Q, qbar11_eff)
    engine = Engine(engine)
    if engine is Engine.ORIGINAL:
        return devicelevel_result(pt, f)
    if engine is Engine.INFO:
        return rate_info(pt, f)
    return rate_ad(pt, f, *b_range)


@dataclass(frozen=True)
class QberRow:
    Q: float
    b_opt: int
    rate_original: float
    rate_info: float
    rate_ad: float


def scan_common_qber(
    params: SystemParams,
    qbar11_eff: float,
    Q_from: float,
    Q_to: float,
    Q_step: float,
    b_range: tuple[int, int] = (1, 3),
) -> list[QberRow]:
    if not (0.0 <= Q_from <= Q_to <= 0.5) or not Q_step > 0:
        raise ValueError("QBER range must satisfy 0 <= from <= to <= 0.5 with step > 0")
    n = int(math.floor((Q_to - Q_from) / Q_step + 1e-9))
    rows = []
    for k in range(n + 1):
        Q = round(Q_from + k * Q_step, 12)
        ad = synthetic_rate(Q, qbar11_eff, params.f, Engine.AD, b_range)
        rows.append(
            QberRow(
                Q=Q,
                b_opt=ad.b_opt,
                rate_original=synthetic_rate(Q, qbar11_eff, params.f, Engine.ORIGINAL).rate,
                rate_info=synthetic_rate(Q, qbar11_eff, params.f, Engine.INFO).rate,
                rate_ad=ad.rate,
            )
        )
    return rows


def qber_threshold(
    params: SystemParams,
    qbar11_eff: float,
    engine: Engine,
    b_range: tuple[int, int] = (1, 3),
    tol: float = 1e-4,
) -> float:
    """Largest common QBER with a positive synthetic rate, by bisection on ``[0, 0.5]``."""

    def f(Q: float) -> float:
        return synthetic_rate(Q, qbar11_eff, params.f, engine, b_range).raw

    if not f(0.0) > 0:
        raise ModelDomainError("rate is not positive at Q=0")
    if f(0.5) > 0:
        raise ModelDomainError("no sign change of the rate in [0, 0.5]")
    return bisect_sign(f, 0.0, 0.5, tol)


def distance_extensions(
    params: SystemParams,
    misalignments: Sequence[float],
    b_range: tuple[int, int] = (1, 3),
    tol_km: float = 0.5,
) -> dict[float, tuple[float, float]]:
    """``(L_max original, L_max AD)`` for each misalignment error."""
    out = {}
    for e_d in misalignments:
        p = replace(params, e_d=e_d)
        out[e_d] = (
            max_distance(p, Engine.ORIGINAL, b_range, tol_km),
            max_distance(p, Engine.AD, b_range, tol_km),
        )
    return out
