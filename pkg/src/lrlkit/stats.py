"""Significance and correlation machinery for comparing evaluation runs.

* paired chi-squared over the discordant-pair counts of two runs on the
  same examples (McNemar construction), with Yates continuity correction
  on by default — small discordant counts are the norm at n ~ 200.
* point-biserial correlation, computed with the population standard
  deviation so it is exactly the Pearson correlation of the two vectors.
* the multi-shot benefit indicator: whether at least 3 of the 4 multi-shot
  accuracies strictly beat the 1-shot accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import DataError


@dataclass(frozen=True)
class PairedOutcome:
    """2x2 discordance table between runs A and B on shared examples."""

    b: int  # A correct, B wrong
    c: int  # A wrong, B correct
    both_correct: int
    both_wrong: int

    def __post_init__(self):
        if min(self.b, self.c, self.both_correct, self.both_wrong) < 0:
            raise DataError("PairedOutcome counts must be >= 0")

    @property
    def n(self) -> int:
        return self.b + self.c + self.both_correct + self.both_wrong


def chi2_sf_1df(x: float) -> float:
    """Survival function of chi-squared with 1 degree of freedom.

    Uses the exact relation to the complementary error function:
    P(X > x) = erfc(sqrt(x / 2)).
    """
    if x < 0:
        raise DataError("chi2_sf_1df: statistic must be >= 0")
    return math.erfc(math.sqrt(x / 2.0))


def pair_outcomes(
    a: Mapping[str, bool] | Sequence[tuple[str, bool]],
    b: Mapping[str, bool] | Sequence[tuple[str, bool]],
) -> PairedOutcome:
    """Cross-tabulate per-example correctness of two runs by example id."""
    a_map = dict(a)
    b_map = dict(b)
    if set(a_map) != set(b_map):
        only_a = sorted(set(a_map) - set(b_map))[:3]
        only_b = sorted(set(b_map) - set(a_map))[:3]
        raise DataError(
            f"paired runs cover different examples (only in A: {only_a}, only in B: {only_b})"
        )
    b_count = c_count = both_correct = both_wrong = 0
    for ex_id, a_ok in a_map.items():
        b_ok = b_map[ex_id]
        if a_ok and not b_ok:
            b_count += 1
        elif b_ok and not a_ok:
            c_count += 1
        elif a_ok:
            both_correct += 1
        else:
            both_wrong += 1
    return PairedOutcome(b=b_count, c=c_count, both_correct=both_correct, both_wrong=both_wrong)


def paired_chi_squared(
    a: Mapping[str, bool] | Sequence[tuple[str, bool]],
    b: Mapping[str, bool] | Sequence[tuple[str, bool]],
    continuity_correction: bool = True,
) -> tuple[float, float]:
    """Paired chi-squared statistic and p-value for two runs.

    With the correction the statistic is (|b - c| - 1)^2 / (b + c); without,
    (b - c)^2 / (b + c). When b + c = 0 the runs are indistinguishable:
    statistic 0, p-value 1.
    """
    outcome = pair_outcomes(a, b)
    return paired_chi_squared_from_counts(outcome.b, outcome.c, continuity_correction)


def paired_chi_squared_from_counts(
    b: int, c: int, continuity_correction: bool = True
) -> tuple[float, float]:
    if b < 0 or c < 0:
        raise DataError("discordant counts must be >= 0")
    if b + c == 0:
        return 0.0, 1.0
    if continuity_correction:
        statistic = (abs(b - c) - 1.0) ** 2 / (b + c)
    else:
        statistic = float(b - c) ** 2 / (b + c)
    return statistic, chi2_sf_1df(statistic)


def point_biserial(binary: Sequence[int], continuous: Sequence[float]) -> float:
    """Correlation between a 0/1 variable and a real variable.

    r = (M1 - M0) / s_n * sqrt(p * q) with s_n the population standard
    deviation of the continuous values; identical to Pearson on the raw
    vectors.
    """
    if len(binary) != len(continuous):
        raise DataError("point_biserial: length mismatch")
    n = len(binary)
    if n < 3:
        raise DataError("point_biserial: need at least 3 observations")
    if any(v not in (0, 1) for v in binary):
        raise DataError("point_biserial: binary variable must contain only 0 and 1")
    ones = [x for v, x in zip(binary, continuous) if v == 1]
    zeros = [x for v, x in zip(binary, continuous) if v == 0]
    if not ones or not zeros:
        raise DataError("point_biserial: both binary groups must be non-empty")
    mean = math.fsum(continuous) / n
    var = math.fsum((x - mean) ** 2 for x in continuous) / n
    if var == 0.0:
        raise DataError("point_biserial: continuous variable has zero variance")
    m1 = math.fsum(ones) / len(ones)
    m0 = math.fsum(zeros) / len(zeros)
    p = len(ones) / n
    q = 1.0 - p
    return (m1 - m0) / math.sqrt(var) * math.sqrt(p * q)


def multishot_benefit(one_shot_acc: float, multi_accs: Sequence[float]) -> bool:
    """True iff at least 3 of the 4 multi-shot accuracies strictly beat 1-shot."""
    if len(multi_accs) != 4:
        raise DataError(f"multishot_benefit: expected exactly 4 accuracies, got {len(multi_accs)}")
    for acc in (one_shot_acc, *multi_accs):
        if not 0.0 <= acc <= 1.0:
            raise DataError("multishot_benefit: accuracies must be in [0, 1]")
    return sum(1 for acc in multi_accs if acc > one_shot_acc) >= 3
