"""Regularity-region classifiers and the exponent map (a*, b*).

Pure functions of (d, s, l). Inequalities are transcribed exactly as printed
(strict vs non-strict preserved); boundary membership is decided by exact
floating-point comparison, inputs being user-supplied exact decimals.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum


class Regime(Enum):
    I = "I"
    II = "II"
    III = "III"
    OUTSIDE = "Outside"


def _is_excluded_point(d: int, s: float, l: float, with_upper: bool) -> bool:
    half_d = d / 2.0
    if s == half_d and l == half_d - 2.0:
        return True
    if with_upper and s == half_d and l == half_d + 1.0:
        return True
    return False


def lwp_region_contains(d: int, s: float, l: float) -> bool:
    """Local well-posedness region: l >= d/2-2, max{l-1, l/2+(d-2)/4} <= s <= l+2,
    minus the two excluded corner points."""
    if d < 1:
        raise ValueError("d must be >= 1")
    if l < d / 2.0 - 2.0:
        return False
    lower = max(l - 1.0, l / 2.0 + (d - 2.0) / 4.0)
    if not (lower <= s <= l + 2.0):
        return False
    return not _is_excluded_point(d, s, l, with_upper=True)


def noise_reg_region_contains(d: int, s: float, l: float) -> bool:
    """Noise-regularization region: l >= d/2-2, s > l-1/2,
    l+2 >= s >= l/2+(d-2)/4, minus the single excluded point."""
    if d < 1:
        raise ValueError("d must be >= 1")
    if l < d / 2.0 - 2.0:
        return False
    if not (s > l - 0.5):
        return False
    if not (l / 2.0 + (d - 2.0) / 4.0 <= s <= l + 2.0):
        return False
    return not _is_excluded_point(d, s, l, with_upper=False)


def _in_regime_i(d: int, s: float, l: float) -> bool:
    if l < d / 2.0 - 2.0:
        return False
    if not (max(l, l / 2.0 + (d - 2.0) / 4.0) < s <= l + 2.0):
        return False
    return not _is_excluded_point(d, s, l, with_upper=False)


def _in_regime_ii(d: int, s: float, l: float) -> bool:
    return (d / 2.0 - 2.0 <= l < d / 2.0 - 1.0) and s == l / 2.0 + (d - 2.0) / 4.0


def _in_regime_iii(d: int, s: float, l: float) -> bool:
    return (l - 0.5 < s <= l) and s >= l / 2.0 + (d - 2.0) / 4.0


def classify_regime(d: int, s: float, l: float) -> Regime:
    """First matching row in the order I, II, III; Outside if none match.

    The rows are provably disjoint; a multiple match would indicate a
    transcription bug, so it is surfaced as a warning rather than hidden.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    matches = [
        r
        for r, f in ((Regime.I, _in_regime_i), (Regime.II, _in_regime_ii), (Regime.III, _in_regime_iii))
        if f(d, s, l)
    ]
    if not matches:
        return Regime.OUTSIDE
    if len(matches) > 1:
        warnings.warn(
            f"regime rows overlap at (d,s,l)=({d},{s},{l}): {matches}; using first match",
            stacklevel=2,
        )
    return matches[0]


def param_a_star(s: float, l: float) -> float:
    """a*(s,l): 3/4 (s-l) - 1/2 if s-l >= 1, else 0."""
    return 0.75 * (s - l) - 0.5 if s - l >= 1.0 else 0.0


def param_b_star(s: float, l: float) -> float:
    """b*(s,l): 0 if s-l > 0, else (l-s)/2 + 1/2."""
    return 0.0 if s - l > 0.0 else 0.5 * (l - s) + 0.5


def endpoint(d: int) -> tuple[float, float]:
    """Lowest admissible regularity pair ((d-3)/2, (d-4)/2)."""
    if d < 1:
        raise ValueError("d must be >= 1")
    return ((d - 3) / 2.0, (d - 4) / 2.0)


@dataclass(frozen=True)
class RegularityParams:
    """Exponent bookkeeping: (d, s, l) with derived (a, b, beta)."""

    d: int
    s: float
    l: float
    a: float
    b: float
    beta: float

    @classmethod
    def canonical(cls, d: int, s: float, l: float) -> "RegularityParams":
        """Construct with a = a*(s,l), b = b*(s,l), beta = s - 1/2 (clipped at 0)."""
        a = param_a_star(s, l)
        b = param_b_star(s, l)
        if not (0.0 <= a <= 1.0 and 0.0 <= b <= 1.0):
            raise ValueError(f"(a,b)=({a},{b}) out of [0,1] for (s,l)=({s},{l})")
        return cls(d=d, s=s, l=l, a=a, b=b, beta=max(s - 0.5, 0.0))


def region_table(d: int, grid_step: float, s_range=(-1.0, None), l_range=(-1.0, None)):
    """Rows (s, l, in_lwp, regime) on a uniform (s,l) grid, for figure export."""
    s_hi = s_range[1] if s_range[1] is not None else float(d)
    l_hi = l_range[1] if l_range[1] is not None else float(d)
    rows = []
    n_s = int(round((s_hi - s_range[0]) / grid_step)) + 1
    n_l = int(round((l_hi - l_range[0]) / grid_step)) + 1
    for i in range(n_s):
        s = s_range[0] + i * grid_step
        for j in range(n_l):
            l = l_range[0] + j * grid_step
            rows.append((s, l, lwp_region_contains(d, s, l), classify_regime(d, s, l).value))
    return rows
