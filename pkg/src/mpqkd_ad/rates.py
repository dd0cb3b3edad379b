"""Key-rate functionals: device-level, information-theoretic, and with
advantage distillation (AD).

The information-theoretic rates minimize over the four Bell-diagonal channel
factors ``lambda_0..lambda_3``. Two linear constraints fix everything except
``lambda_3``, so the adversary's minimization is a one-dimensional search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .model import ChannelDerived, ModelDomainError, binary_entropy
from .numerics import golden_section_min

SUM_TOL = 1e-12
SNAP_NEG = 1e-15
GRID_POINTS = 200
LAMBDA3_TOL = 1e-10


@dataclass(frozen=True)
class LambdaVector:
    l0: float
    l1: float
    l2: float
    l3: float

    def __post_init__(self) -> None:
        for name in ("l0", "l1", "l2", "l3"):
            v = getattr(self, name)
            if v < -SNAP_NEG or math.isnan(v):
                raise ModelDomainError(f"{name}={v!r} is negative")
            if v < 0.0:
                object.__setattr__(self, name, 0.0)
        total = self.l0 + self.l1 + self.l2 + self.l3
        if abs(total - 1.0) > SUM_TOL:
            raise ModelDomainError(f"lambda components sum to {total!r}, not 1")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.l0, self.l1, self.l2, self.l3)


@dataclass(frozen=True)
class AdOutcome:
    lt0: float
    lt1: float
    lt2: float
    lt3: float
    q_s: float
    e_tilde: float
    b: int

    @property
    def lambdas(self) -> LambdaVector:
        return LambdaVector(self.lt0, self.lt1, self.lt2, self.lt3)


@dataclass(frozen=True)
class RateResult:
    """Optimized rate with the witnesses that reproduce it.

    ``rate`` is floored at zero; the signed value lives in
    ``components["raw"]`` for threshold searches.
    """

    rate: float
    b_opt: int
    mu_opt: float
    lambda3_opt: float | None
    components: dict[str, Any] = field(default_factory=dict)

    @property
    def raw(self) -> float:
        return self.components.get("raw", self.rate)


def lambda3_interval(e_xx: float, e_zz: float) -> tuple[float, float]:
    return max(0.0, e_xx + e_zz - 1.0), min(e_xx, e_zz)


def lambda_from_lambda3(e_xx: float, e_zz: float, lambda3: float) -> LambdaVector:
    """Channel factors consistent with the X and Z single-photon error rates."""
    lo, hi = lambda3_interval(e_xx, e_zz)
    if not (lo - SNAP_NEG <= lambda3 <= hi + SNAP_NEG):
        raise ModelDomainError(
            f"lambda3={lambda3!r} infeasible; feasible interval is [{lo!r}, {hi!r}]"
        )
    return LambdaVector(
        l0=1.0 - e_xx - e_zz + lambda3,
        l1=e_xx - lambda3,
        l2=e_zz - lambda3,
        l3=lambda3,
    )


def closed_form_lambda(Q: float) -> LambdaVector:
    """Minimizing factors for equal X and Z error rate ``Q`` (``lambda3 = Q**2``)."""
    if not (0.0 <= Q <= 0.5):
        raise ModelDomainError(f"Q={Q!r} outside [0, 0.5]")
    return LambdaVector(1.0 - 2.0 * Q + Q * Q, Q - Q * Q, Q - Q * Q, Q * Q)


def _group_term(a: float, b: float) -> float:
    s = a + b
    if s <= 0.0:
        return 0.0
    return s * binary_entropy(min(1.0, a / s))


def info_key_fraction(lv: LambdaVector) -> float:
    """``1 - (l0+l1) h(l0/(l0+l1)) - (l2+l3) h(l2/(l2+l3))``; empty groups add 0."""
    return 1.0 - _group_term(lv.l0, lv.l1) - _group_term(lv.l2, lv.l3)


def ad_transform(lv: LambdaVector, E_zz: float, b: int) -> AdOutcome:
    """Channel factors, success probability and error rate after AD on blocks of ``b``."""
    if isinstance(b, bool) or int(b) != b or b < 1:
        raise ModelDomainError(f"block size must be an integer >= 1, got {b!r}")
    if not (0.0 <= E_zz <= 0.5):
        raise ModelDomainError(f"E_zz={E_zz!r} outside [0, 0.5]")
    b = int(b)
    if b == 1:
        return AdOutcome(lv.l0, lv.l1, lv.l2, lv.l3, 1.0, E_zz, 1)
    lt0, lt1, lt2, lt3 = _transform(*lv.as_tuple(), b)
    err = E_zz**b
    q_s = err + (1.0 - E_zz) ** b
    return AdOutcome(lt0, lt1, lt2, lt3, q_s=q_s, e_tilde=err / q_s, b=b)


def _h_vec(x: np.ndarray) -> np.ndarray:
    x = np.clip(x, 0.0, 1.0)
    inner = (x > 0.0) & (x < 1.0)
    safe = np.where(inner, x, 0.5)
    out = -safe * np.log2(safe) - (1.0 - safe) * np.log2(1.0 - safe)
    return np.where(inner, out, 0.0)


def _bracket_curve(e_xx: float, e_zz: float, b: int, l3: np.ndarray) -> np.ndarray:
    """Vectorized key-fraction bracket along the feasible ``lambda3`` line."""
    l0 = 1.0 - e_xx - e_zz + l3
    l1 = e_xx - l3
    l2 = e_zz - l3
    if b > 1:
        l0, l1, l2, l3 = _transform(l0, l1, l2, l3, b)
    s01 = l0 + l1
    s23 = l2 + l3
    t01 = np.where(s01 > 0, s01 * _h_vec(l0 / np.where(s01 > 0, s01, 1.0)), 0.0)
    t23 = np.where(s23 > 0, s23 * _h_vec(l2 / np.where(s23 > 0, s23, 1.0)), 0.0)
    return 1.0 - t01 - t23


def _transform(l0: float, l1: float, l2: float, l3: float, b: int):
    keep = (l0 + l1) ** b
    flip = (l2 + l3) ** b
    dk = (l0 - l1) ** b
    df = (l2 - l3) ** b
    denom = 2.0 * (keep + flip)
    return (keep + dk) / denom, (keep - dk) / denom, (flip + df) / denom, (flip - df) / denom


def _h(x: float) -> float:
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def _bracket_at(e_xx: float, e_zz: float, b: int, lambda3: float) -> float:
    # scalar twin of _bracket_curve, used inside the golden-section loop
    l0 = 1.0 - e_xx - e_zz + lambda3
    l1 = e_xx - lambda3
    l2 = e_zz - lambda3
    l3 = lambda3
    if b > 1:
        l0, l1, l2, l3 = _transform(l0, l1, l2, l3, b)
    s01 = l0 + l1
    s23 = l2 + l3
    t01 = s01 * _h(l0 / s01) if s01 > 0.0 else 0.0
    t23 = s23 * _h(l2 / s23) if s23 > 0.0 else 0.0
    return 1.0 - t01 - t23


def minimize_bracket(e_xx: float, e_zz: float, b: int = 1) -> tuple[float, float]:
    """Adversarial minimum of the (AD-transformed) key-fraction bracket.

    A 200-point grid over the feasible ``lambda3`` interval locates the basin,
    then golden-section search narrows it to ``1e-10``.

    Returns:
        ``(lambda3, bracket)`` at the minimum.
    """
    lo, hi = lambda3_interval(e_xx, e_zz)
    if hi - lo <= LAMBDA3_TOL:
        x = lo
        return x, _bracket_at(e_xx, e_zz, b, x)
    grid = np.linspace(lo, hi, GRID_POINTS)
    values = _bracket_curve(e_xx, e_zz, b, grid)
    i = int(np.argmin(values))
    a = float(grid[max(i - 1, 0)])
    c = float(grid[min(i + 1, GRID_POINTS - 1)])
    best_x = float(grid[i])
    best_v = _bracket_at(e_xx, e_zz, b, best_x)
    x, v = golden_section_min(lambda t: _bracket_at(e_xx, e_zz, b, t), a, c, LAMBDA3_TOL)
    if v < best_v:
        best_x, best_v = x, v
    return best_x, best_v


def _assemble(prefactor: float, signal: float, f: float, err: float) -> float:
    return prefactor * (signal - f * binary_entropy(err))


def rate_devicelevel(ch: ChannelDerived, f: float) -> float:
    """Original rate: single-photon phase-error term minus error-correction leakage."""
    raw = _assemble(ch.r_p * ch.r_s, ch.qbar11 * (1.0 - binary_entropy(ch.e_xx)), f, ch.E_zz)
    return max(raw, 0.0)


def devicelevel_result(ch: ChannelDerived, f: float) -> RateResult:
    signal = ch.qbar11 * (1.0 - binary_entropy(ch.e_xx))
    raw = _assemble(ch.r_p * ch.r_s, signal, f, ch.E_zz)
    return RateResult(
        rate=max(raw, 0.0),
        b_opt=1,
        mu_opt=ch.mu,
        lambda3_opt=None,
        components={"raw": raw, "bracket": 1.0 - binary_entropy(ch.e_xx)},
    )


def evaluate_at(ch: ChannelDerived, f: float, b: int, lambda3: float) -> float:
    """Signed AD-modified rate at a fixed block size and ``lambda3`` witness."""
    lv = lambda_from_lambda3(ch.e_xx, ch.e_zz, lambda3)
    out = ad_transform(lv, ch.E_zz, b)
    bracket = info_key_fraction(out.lambdas)
    prefactor = out.q_s * ch.r_p * ch.r_s / b if b > 1 else ch.r_p * ch.r_s
    return _assemble(prefactor, ch.qbar11**b * bracket, f, out.e_tilde)


def rate_info(ch: ChannelDerived, f: float) -> RateResult:
    """Information-theoretic rate with the adversarial minimum over ``lambda3``."""
    lambda3, bracket = minimize_bracket(ch.e_xx, ch.e_zz, 1)
    raw = _assemble(ch.r_p * ch.r_s, ch.qbar11 * bracket, f, ch.E_zz)
    return RateResult(
        rate=max(raw, 0.0),
        b_opt=1,
        mu_opt=ch.mu,
        lambda3_opt=lambda3,
        components={"raw": raw, "bracket": bracket, "q_s": 1.0, "e_tilde": ch.E_zz},
    )


def rate_ad(ch: ChannelDerived, f: float, b_min: int = 1, b_max: int = 3) -> RateResult:
    """AD-modified rate: best block size of the adversarially minimized rate."""
    if not (1 <= b_min <= b_max):
        raise ValueError(f"need 1 <= b_min <= b_max, got [{b_min}, {b_max}]")
    best: RateResult | None = None
    per_b: dict[int, float] = {}
    for b in range(b_min, b_max + 1):
        lambda3, bracket = minimize_bracket(ch.e_xx, ch.e_zz, b)
        out = ad_transform(lambda_from_lambda3(ch.e_xx, ch.e_zz, lambda3), ch.E_zz, b)
        prefactor = out.q_s * ch.r_p * ch.r_s / b if b > 1 else ch.r_p * ch.r_s
        raw = _assemble(prefactor, ch.qbar11**b * bracket, f, out.e_tilde)
        per_b[b] = raw
        if best is None or raw > best.raw:
            best = RateResult(
                rate=max(raw, 0.0),
                b_opt=b,
                mu_opt=ch.mu,
                lambda3_opt=lambda3,
                components={
                    "raw": raw,
                    "bracket": bracket,
                    "q_s": out.q_s,
                    "e_tilde": out.e_tilde,
                },
            )
    assert best is not None
    best.components["per_b"] = per_b
    return best
