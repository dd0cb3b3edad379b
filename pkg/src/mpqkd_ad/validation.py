"""Oracle suite behind ``mpqkd-ad validate``.

Every check compares an analytic quantity with an independent route to the
same number and records pass/fail at a fixed tolerance. The report holds no
timing or host data, so the same seed gives the same bytes.
"""

from __future__ import annotations

from typing import Any

from .mc import enumerate_ad_block, mc_ad_block, mc_pair_rate
from .model import binary_entropy, pair_rate
from .rates import ad_transform, closed_form_lambda, minimize_bracket

PAIR_CASES = ((0.1, 5), (0.01, 100), (0.5, 2))
BLOCK_CASES = ((0.25, 2), (0.046, 3))
ENUM_ERRORS = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5)
ENUM_BLOCKS = tuple(range(1, 11))
CLOSED_FORM_Q = (0.02, 0.05, 0.1, 0.2, 0.3)
MC_SIGMAS = 3.0
ENUM_TOL = 1e-14
LAMBDA3_TOL = 1e-6
BRACKET_TOL = 1e-9


def run_validation(seed: int, samples: int) -> dict[str, Any]:
    checks: list[dict[str, Any]] = []

    for k, (p, delta) in enumerate(PAIR_CASES):
        est = mc_pair_rate(p, delta, samples, seed + k)
        expected = pair_rate(p, delta)
        checks.append(
            {
                "name": f"pair_rate p={p} delta={delta}",
                "expected": expected,
                "estimate": est.mean,
                "stderr": est.stderr,
                "tolerance": f"{MC_SIGMAS:g} stderr",
                "passed": est.within(expected, MC_SIGMAS),
            }
        )

    for k, (E, b) in enumerate(BLOCK_CASES):
        q_hat, e_hat = mc_ad_block(E, b, samples, seed + 100 + k)
        q_s = E**b + (1.0 - E) ** b
        e_tilde = E**b / q_s
        checks.append(
            {
                "name": f"ad_block E={E} b={b}",
                "expected": [q_s, e_tilde],
                "estimate": [q_hat.mean, e_hat.mean],
                "stderr": [q_hat.stderr, e_hat.stderr],
                "tolerance": f"{MC_SIGMAS:g} stderr",
                "passed": q_hat.within(q_s, MC_SIGMAS) and e_hat.within(e_tilde, MC_SIGMAS),
            }
        )

    worst = 0.0
    for E in ENUM_ERRORS:
        for b in ENUM_BLOCKS:
            q_enum, e_enum = enumerate_ad_block(E, b)
            out = ad_transform(closed_form_lambda(min(E, 0.5)), E, b)
            worst = max(worst, abs(q_enum - out.q_s), abs(e_enum - out.e_tilde))
    checks.append(
        {
            "name": "enumeration vs closed-form q_s and e_tilde",
            "max_abs_diff": worst,
            "tolerance": ENUM_TOL,
            "passed": worst <= ENUM_TOL,
        }
    )

    for Q in CLOSED_FORM_Q:
        lambda3, bracket = minimize_bracket(Q, Q, 1)
        d3 = abs(lambda3 - Q * Q)
        db = abs(bracket - (1.0 - binary_entropy(Q)))
        checks.append(
            {
                "name": f"closed-form lambda Q={Q}",
                "lambda3_abs_diff": d3,
                "bracket_abs_diff": db,
                "tolerance": [LAMBDA3_TOL, BRACKET_TOL],
                "passed": d3 <= LAMBDA3_TOL and db <= BRACKET_TOL,
            }
        )

    return {
        "seed": seed,
        "samples": samples,
        "checks": checks,
        "all_passed": all(c["passed"] for c in checks),
    }
