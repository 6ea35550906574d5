"""Bell-type inequality evaluation on measurable probabilities.

Every verdict carries a ``genuine`` flag: True only for inequalities that
follow from factorizability (local realism) alone, False for those that
need auxiliary assumptions (no-enhancement, fair sampling / renormalized
correlations).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

PAIR_TOL = 1e-9

CHSH_BOUND = 2.0


class NormalizationError(ValueError):
    """Raised when counts declared normalized fail the unit-sum condition."""

    def __init__(self, deficit: float):
        self.deficit = deficit
        super().__init__(f"outcome probabilities do not sum to 1 (deficit {deficit:.6g})")


@dataclass(frozen=True)
class ProbabilitySet:
    """The six measurable quantities of the Clauser-Horne test.

    Marginals p(A), p(B) and pair probabilities for the setting pairs
    (A,B), (A,D), (C,B), (C,D).  The marginals of C and D are not part of
    the set: in the single-channel experiment they are never recorded.
    """

    pA: float
    pB: float
    pAB: float
    pAD: float
    pCB: float
    pCD: float

    def __post_init__(self):
        for name, value in self.as_dict().items():
            if not -PAIR_TOL <= value <= 1.0 + PAIR_TOL:
                raise ValueError(f"{name} = {value} outside [0, 1]")
        # pair probability cannot exceed either of its measured marginals
        for pair, bound, bname in (
            ("pAB", self.pA, "pA"),
            ("pAB", self.pB, "pB"),
            ("pAD", self.pA, "pA"),
            ("pCB", self.pB, "pB"),
        ):
            if getattr(self, pair) > bound + PAIR_TOL:
                raise ValueError(f"{pair} = {getattr(self, pair)} exceeds marginal {bname} = {bound}")

    def as_dict(self) -> dict[str, float]:
        return {
            "pA": self.pA,
            "pB": self.pB,
            "pAB": self.pAB,
            "pAD": self.pAD,
            "pCB": self.pCB,
            "pCD": self.pCD,
        }


@dataclass(frozen=True)
class TwoChannelCounts:
    """Outcome probabilities (or counts) for one setting pair.

    ``normalized`` declares that the four entries are coincidence
    probabilities summing to one, i.e. that every pair yields a detected
    two-channel outcome.  Only then is the plain CHSH statistic a genuine
    Bell quantity.
    """

    ppp: float
    ppm: float
    pmp: float
    pmm: float
    normalized: bool = False

    def __post_init__(self):
        for name in ("ppp", "ppm", "pmp", "pmm"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} = {getattr(self, name)} is negative")
        if self.normalized and abs(self.total() - 1.0) > PAIR_TOL:
            raise NormalizationError(1.0 - self.total())

    def total(self) -> float:
        return self.ppp + self.ppm + self.pmp + self.pmm

    def scaled(self, factor: float) -> "TwoChannelCounts":
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        return TwoChannelCounts(
            self.ppp * factor, self.ppm * factor, self.pmp * factor, self.pmm * factor
        )


@dataclass(frozen=True)
class InequalityReport:
    name: str  # one of CH, CHSH, CHSH-star, FC
    lhs: float
    rhs: float
    margin: float
    violated: bool
    genuine: bool

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "violated": self.violated,
            "genuine": self.genuine,
        }

    @classmethod
    def from_json(cls, data: dict) -> "InequalityReport":
        return cls(
            name=data["name"],
            lhs=data["lhs"],
            rhs=data["rhs"],
            margin=data["margin"],
            violated=data["violated"],
            genuine=data["genuine"],
        )


def _report(name: str, lhs: float, rhs: float, genuine: bool) -> InequalityReport:
    margin = rhs - lhs
    return InequalityReport(
        name=name, lhs=lhs, rhs=rhs, margin=margin, violated=margin < 0, genuine=genuine
    )


def ch_report(ps: ProbabilitySet) -> InequalityReport:
    """Clauser-Horne test: p(A,B)+p(A,D)+p(C,B)-p(C,D) <= p(A)+p(B).

    Holds for every factorizable model with no auxiliary assumption, so the
    verdict is flagged genuine.
    """
    lhs = ps.pAB + ps.pAD + ps.pCB - ps.pCD
    rhs = ps.pA + ps.pB
    return _report("CH", lhs, rhs, genuine=True)


def correlation(tc: TwoChannelCounts) -> float:
    """Plain correlation E = p++ + p-- - p+- - p-+, no renormalization."""
    return tc.ppp + tc.pmm - tc.ppm - tc.pmp


def renormalized_correlation(tc: TwoChannelCounts) -> float:
    """E* = (p++ + p-- - p+- - p-+) / (p++ + p-- + p+- + p-+).

    The denominator restricts to detected coincidences; using E* in the
    CHSH sum silently adds a fair-sampling assumption.
    """
    total = tc.total()
    if total == 0:
        raise ZeroDivisionError("all four outcome entries are zero; E* undefined")
    return (tc.ppp + tc.pmm - tc.ppm - tc.pmp) / total


def s_statistic(
    eAB: float, eAD: float, eCB: float, eCD: float, renormalized: bool
) -> InequalityReport:
    """CHSH combination E(A,B)+E(A,D)+E(C,B)-E(C,D) <= 2.

    Genuine only when the inputs are plain correlations whose four outcome
    probabilities sum to one per setting pair; with renormalized inputs the
    statistic is the fair-sampling surrogate S*.
    """
    for name, value in (("eAB", eAB), ("eAD", eAD), ("eCB", eCB), ("eCD", eCD)):
        if not -1.0 - PAIR_TOL <= value <= 1.0 + PAIR_TOL:
            raise ValueError(f"{name} = {value} outside [-1, 1]")
    # pair the +/- terms before the cross sum: keeps the symmetric maximum
    # S = 2 exactly representable at the boundary
    lhs = (eAB - eCD) + (eAD + eCB)
    name = "CHSH-star" if renormalized else "CHSH"
    return _report(name, lhs, CHSH_BOUND, genuine=not renormalized)


def fc_report(ps: ProbabilitySet, pAinf: float, pInfB: float) -> InequalityReport:
    """Freedman-Clauser test against polarizer-removed coincidences.

    Same left side as the CH test, but the right side p(A,inf)+p(inf,B)
    rests on the counterfactual no-enhancement assumption, so the verdict
    is never genuine.
    """
    for name, value in (("pAinf", pAinf), ("pInfB", pInfB)):
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"{name} = {value} outside [0, 1]")
    lhs = ps.pAB + ps.pAD + ps.pCB - ps.pCD
    rhs = pAinf + pInfB
    return _report("FC", lhs, rhs, genuine=False)


@dataclass(frozen=True)
class ChannelProbabilities:
    """Single-channel probabilities recovered from two-channel outcomes."""

    pXY: float
    ppm: float
    pmm: float


def channel_conversion(
    tc: TwoChannelCounts, pX: float, pY: float, tol: float = PAIR_TOL
) -> ChannelProbabilities:
    """Convert normalized two-channel outcomes into CH-style probabilities.

    Uses p(X,Y) = p++, p+- = p(X) - p(X,Y), p-- = 1 - p(Y) - p+-, and
    cross-checks the derived entries against the given table.
    """
    deficit = 1.0 - tc.total()
    if abs(deficit) > tol:
        raise NormalizationError(deficit)
    pXY = tc.ppp
    ppm = pX - pXY
    pmm = 1.0 - pY - ppm
    if abs(ppm - tc.ppm) > tol or abs(pmm - tc.pmm) > tol:
        raise ValueError(
            f"marginals inconsistent with counts: derived p+-={ppm:.6g} vs {tc.ppm:.6g}, "
            f"p--={pmm:.6g} vs {tc.pmm:.6g}"
        )
    return ChannelProbabilities(pXY=pXY, ppm=ppm, pmm=pmm)


def s_star_bound_visibility(s_star: float) -> float:
    """Visibility implied by a measured S* via S* = 2*sqrt(2)*V."""
    return s_star / (2.0 * math.sqrt(2.0))
