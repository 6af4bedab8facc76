"""High-precision checks of two combinatorial inequalities.

Checked over a parameter grid in 50-digit arithmetic:

  (A)  sum_{m=0}^{M} (s M)^m / m!  <=  (1 + e s)^M      for M >= 1, s > 0
  (B)  M^m  <=  (M! / (M - m)!) e^m                     for 0 <= m <= M

Slack is reported as 1 - LHS/RHS, so any negative value is a violation. The
m = 0 case of (B) is an exact identity (both sides are 1); it is verified for
non-violation but excluded from the reported minimum slack, which would
otherwise be pinned at zero by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath as mp


@dataclass
class SlackRecord:
    slack: float
    at: dict


@dataclass
class TheoryReport:
    truncated_exponential: SlackRecord
    falling_factorial: SlackRecord
    passed: bool

    def to_dict(self) -> dict:
        return {
            "truncated_exponential": {
                "min_slack": self.truncated_exponential.slack,
                "at": self.truncated_exponential.at,
            },
            "falling_factorial": {
                "min_slack": self.falling_factorial.slack,
                "at": self.falling_factorial.at,
            },
            "passed": self.passed,
        }


def _s_grid(count: int = 40):
    """Logarithmic grid in (1e-3, 10]."""
    lo, hi = mp.log(mp.mpf("1e-3")), mp.log(mp.mpf(10))
    return [mp.e ** (lo + (hi - lo) * (k + 1) / count) for k in range(count)]


def run_checks(m_max: int = 60, s_points: int = 40, dps: int = 50) -> TheoryReport:
    """Evaluate both inequalities over the full (M, s, m) grid."""
    with mp.workdps(dps):
        e = mp.e
        factorials = [mp.factorial(m) for m in range(m_max + 1)]

        best_a = SlackRecord(slack=float("inf"), at={})
        for M in range(1, m_max + 1):
            for s in _s_grid(s_points):
                lhs = mp.mpf(0)
                term_base = s * M
                power = mp.mpf(1)
                for m in range(M + 1):
                    lhs += power / factorials[m]
                    power *= term_base
                rhs = (1 + e * s) ** M
                slack = float(1 - lhs / rhs)
                if slack < best_a.slack:
                    best_a = SlackRecord(slack=slack, at={"M": M, "s": float(s)})

        best_b = SlackRecord(slack=float("inf"), at={})
        identity_violated = False
        for M in range(1, m_max + 1):
            for m in range(M + 1):
                lhs = mp.mpf(M) ** m
                rhs = (factorials[M] / factorials[M - m]) * e ** m
                slack = float(1 - lhs / rhs)
                if m == 0:
                    identity_violated |= slack < 0
                    continue
                if slack < best_b.slack:
                    best_b = SlackRecord(slack=slack, at={"M": M, "m": m})

    return TheoryReport(
        truncated_exponential=best_a,
        falling_factorial=best_b,
        passed=best_a.slack > 0 and best_b.slack > 0 and not identity_violated,
    )
