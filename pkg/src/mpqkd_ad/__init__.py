"""Asymptotic key rates for mode-pairing QKD with advantage distillation."""

from .model import ChannelDerived, ModelDomainError, SystemParams, derive_channel
from .rates import (
    AdOutcome,
    LambdaVector,
    RateResult,
    ad_transform,
    rate_ad,
    rate_devicelevel,
    rate_info,
)
from .scan import Engine, ScanSpec, ScanTable, max_distance, optimize_mu, scan_distance

__all__ = [
    "AdOutcome",
    "ChannelDerived",
    "Engine",
    "LambdaVector",
    "ModelDomainError",
    "RateResult",
    "ScanSpec",
    "ScanTable",
    "SystemParams",
    "ad_transform",
    "derive_channel",
    "max_distance",
    "optimize_mu",
    "rate_ad",
    "rate_devicelevel",
    "rate_info",
    "scan_distance",
]
