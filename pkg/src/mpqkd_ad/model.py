"""Closed-form channel statistics for mode-pairing QKD.

Every quantity here is a pure function of the system parameters and the
operating point ``(L, mu)``. Out-of-range results raise
:class:`ModelDomainError` instead of being clamped, so regimes where the
closed forms stop describing probabilities are visible to the caller.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

SLACK = 1e-9
ENTROPY_SNAP = 1e-15

EZZ_DARK_COUNT = "dark_count"
EZZ_EQUAL_OBSERVED = "equal_observed"

EzzModel = Union[str, float]


class ModelDomainError(ValueError):
    """A derived statistic left its physical range, or an input is degenerate."""


def _check_prob(name: str, value: float, lo: float = 0.0, hi: float = 1.0) -> None:
    if not (lo <= value <= hi):
        raise ModelDomainError(f"{name}={value!r} outside [{lo}, {hi}]")


@dataclass(frozen=True)
class SystemParams:
    """Experimental constants and model switches.

    Defaults are the Table-1 style setup: 20% detector efficiency,
    0.2 dB/km fiber, 1.2e-8 dark counts, f = 1.15, pairing interval 1e6,
    and 4% misalignment.
    """

    eta_d: float = 0.2
    alpha: float = 0.2
    p_d: float = 1.2e-8
    f: float = 1.15
    delta: int = 1_000_000
    e_d: float = 0.04
    e_0: float = 0.5
    e_zz_model: EzzModel = field(default=EZZ_DARK_COUNT)

    def __post_init__(self) -> None:
        if not (0.0 < self.eta_d <= 1.0):
            raise ValueError(f"eta_d must be in (0, 1], got {self.eta_d}")
        if not (self.alpha >= 0.0) or math.isinf(self.alpha):
            raise ValueError(f"alpha must be finite and >= 0, got {self.alpha}")
        if not (0.0 <= self.p_d < 0.5):
            raise ValueError(f"p_d must be in [0, 0.5), got {self.p_d}")
        if not (self.f >= 1.0) or math.isinf(self.f):
            raise ValueError(f"f must be finite and >= 1, got {self.f}")
        if isinstance(self.delta, bool) or int(self.delta) != self.delta or self.delta < 1:
            raise ValueError(f"delta must be an integer >= 1, got {self.delta}")
        if not (0.0 <= self.e_d <= 0.5):
            raise ValueError(f"e_d must be in [0, 0.5], got {self.e_d}")
        if not (0.0 <= self.e_0 <= 1.0):
            raise ValueError(f"e_0 must be in [0, 1], got {self.e_0}")
        model = self.e_zz_model
        if isinstance(model, str):
            if model not in (EZZ_DARK_COUNT, EZZ_EQUAL_OBSERVED):
                raise ValueError(f"unknown e_zz_model {model!r}")
        elif isinstance(model, bool) or not isinstance(model, (int, float)):
            raise ValueError(f"e_zz_model must be a name or a number, got {model!r}")
        elif not (0.0 <= model <= 0.5):
            raise ValueError(f"fixed e_zz must be in [0, 0.5], got {model}")


@dataclass(frozen=True)
class ChannelDerived:
    """Per-operating-point statistics feeding the rate formulas."""

    L: float
    eta_s: float
    mu: float
    p: float
    r_p: float
    r_s: float
    E_zz: float
    qbar11: float
    Y11: float
    e_xx: float
    e_zz: float

    def __post_init__(self) -> None:
        if not self.mu > 0:
            raise ModelDomainError(f"mu must be positive, got {self.mu}")
        for name in ("eta_s", "p", "r_p", "r_s", "E_zz", "qbar11", "Y11", "e_xx", "e_zz"):
            _check_prob(name, getattr(self, name), -SLACK, 1.0 + SLACK)
        if self.r_p > self.p / 2 + SLACK:
            raise ModelDomainError(f"r_p={self.r_p} exceeds p/2={self.p / 2}")


def binary_entropy(x: float) -> float:
    """Binary Shannon entropy in bits, with ``H(0) = H(1) = 0``."""
    if x < -ENTROPY_SNAP or x > 1.0 + ENTROPY_SNAP or math.isnan(x):
        raise ModelDomainError(f"binary entropy argument {x!r} outside [0, 1]")
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def per_arm_transmittance(params: SystemParams, L: float) -> float:
    """Transmittance of one arm (length ``L/2``) including detector efficiency."""
    if L < 0:
        raise ModelDomainError(f"distance must be >= 0, got {L}")
    return params.eta_d * 10.0 ** (-params.alpha * (L / 2.0) / 10.0)


def _click_given_photons(p_d: float, x: float) -> float:
    # 1 - (1 - 2 p_d) exp(-x), accurate for tiny x
    return -math.expm1(-x) + 2.0 * p_d * math.exp(-x)


def click_probability(params: SystemParams, eta_s: float, mu: float) -> float:
    """Average single-round click probability over the four intensity settings."""
    if mu < 0:
        raise ModelDomainError(f"mu must be >= 0, got {mu}")
    p_d = params.p_d
    one = _click_given_photons(p_d, eta_s * mu)
    two = _click_given_photons(p_d, 2.0 * eta_s * mu)
    return 0.25 * (2.0 * one + 2.0 * p_d + two)


def pair_rate(p: float, delta: int) -> float:
    """Expected number of pairs formed per round."""
    if p == 0:
        return 0.0
    if not (0.0 < p <= 1.0):
        raise ModelDomainError(f"click probability {p} outside (0, 1]")
    if delta < 1:
        raise ModelDomainError(f"pairing interval must be >= 1, got {delta}")
    # 1 - (1-p)^delta in log space; stays exact for delta ~ 1e6
    if p == 1.0:
        hit = 1.0
    else:
        hit = -math.expm1(delta * math.log1p(-p))
    return 1.0 / (1.0 / (p * hit) + 1.0 / p)


def z_pair_ratio(params: SystemParams, eta_s: float, mu: float, p: float) -> float:
    """Probability that a formed pair lands in the Z basis."""
    if not p > 0:
        raise ModelDomainError("click probability must be positive")
    single = _click_given_photons(params.p_d, eta_s * mu)
    r_s = single * single / (8.0 * p * p)
    _check_prob("r_s", r_s, 0.0, 1.0 + SLACK)
    return r_s


def z_qber(params: SystemParams, eta_s: float, mu: float, p: float, r_s: float) -> float:
    """Bit error rate of the Z pairs; errors come from dark-count coincidences."""
    if not (r_s > 0 and p > 0):
        raise ModelDomainError("r_s and p must be positive")
    double = _click_given_photons(params.p_d, 2.0 * eta_s * mu)
    e = 0.25 * params.p_d * double / (r_s * p * p)
    _check_prob("E_zz", e, 0.0, 0.5 + SLACK)
    return e


def single_photon_pair_ratio(
    params: SystemParams, eta_s: float, mu: float, p: float, r_s: float
) -> float:
    """Fraction of Z pairs in which each side sent exactly one photon."""
    if not (r_s > 0 and p > 0):
        raise ModelDomainError("r_s and p must be positive")
    p1 = mu * math.exp(-mu)
    # 1 - (1 - 2 p_d)(1 - eta_s)
    single = eta_s + 2.0 * params.p_d * (1.0 - eta_s)
    q = p1 * p1 * single * single / (8.0 * r_s * p * p)
    _check_prob("qbar11", q, 0.0, 1.0 + SLACK)
    return q


def single_photon_x_stats(
    params: SystemParams, eta_a: float, eta_b: float
) -> tuple[float, float]:
    """Single-photon pair yield and X-basis error rate.

    Returns:
        ``(Y11, e_xx)``. With no dark counts ``e_xx`` collapses to ``e_d``;
        when dark counts dominate it tends to ``e_0``.
    """
    if not (0.0 < eta_a <= 1.0 and 0.0 < eta_b <= 1.0):
        raise ModelDomainError(f"transmittances must be in (0, 1], got {eta_a}, {eta_b}")
    p_d, e_0, e_d = params.p_d, params.e_0, params.e_d
    prod = eta_a * eta_b
    y11 = (1.0 - p_d) ** 2 * (
        prod / 2.0
        + (2.0 * eta_a + 2.0 * eta_b - 3.0 * prod) * p_d
        + 4.0 * (1.0 - eta_a) * (1.0 - eta_b) * p_d * p_d
    )
    e_xx = (e_0 * y11 - (e_0 - e_d) * (1.0 - p_d * p_d) * prod / 2.0) / y11
    if p_d == 0.0:
        # the two terms cancel to e_d analytically; avoid rounding residue
        e_xx = e_d
    _check_prob("e_xx", e_xx, -SLACK, 0.5 + SLACK)
    return y11, e_xx


def single_photon_z_error(params: SystemParams, eta_s: float, E_zz: float) -> float:
    """Single-photon Z error rate under the configured model."""
    model = params.e_zz_model
    if model == EZZ_EQUAL_OBSERVED:
        e = E_zz
    elif model == EZZ_DARK_COUNT:
        p_d = params.p_d
        # single-photon click weights: one photon per round (A) or two (B)
        a = eta_s + 2.0 * p_d * (1.0 - eta_s)
        b = eta_s * (2.0 - eta_s) + 2.0 * p_d * (1.0 - eta_s) ** 2
        err = 2.0 * (2.0 * p_d * b)
        total = 2.0 * a * a + err
        e = err / total if total > 0 else 0.0
    else:
        e = float(model)
    _check_prob("e_zz", e, 0.0, 0.5)
    return e


def derive_channel(params: SystemParams, L: float, mu: float) -> ChannelDerived:
    """Compose all channel statistics at distance ``L`` (km) and intensity ``mu``."""
    if not mu > 0:
        raise ModelDomainError(f"mu must be positive, got {mu}")
    eta_s = per_arm_transmittance(params, L)
    p = click_probability(params, eta_s, mu)
    r_p = pair_rate(p, params.delta)
    r_s = z_pair_ratio(params, eta_s, mu, p)
    e_zz_obs = z_qber(params, eta_s, mu, p, r_s)
    qbar11 = single_photon_pair_ratio(params, eta_s, mu, p, r_s)
    y11, e_xx = single_photon_x_stats(params, eta_s, eta_s)
    e_zz = single_photon_z_error(params, eta_s, e_zz_obs)
    return ChannelDerived(
        L=L,
        eta_s=eta_s,
        mu=mu,
        p=p,
        r_p=r_p,
        r_s=r_s,
        E_zz=e_zz_obs,
        qbar11=qbar11,
        Y11=y11,
        e_xx=e_xx,
        e_zz=e_zz,
    )
