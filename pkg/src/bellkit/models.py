"""Factorizable (local-realistic) probability models on a discrete hidden space.

The hidden variable is discretized into finitely many cells with explicit
weights, so all integrals become finite sums and tests can be exact.  Each
side carries its own response table: the detection probability at a setting
depends only on the cell and the local setting (parameter independence by
construction).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy.optimize import linprog

from .inequalities import ProbabilitySet

MODEL_TOL = 1e-12
DATA_TOL = 1e-9


def _frozen(a) -> np.ndarray:
    arr = np.asarray(a, dtype=float)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class HiddenVariableSpace:
    """Discretized hidden-variable density: one weight per cell."""

    cells: tuple[str, ...]
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(self.cells))
        object.__setattr__(self, "weights", _frozen(self.weights))
        if self.weights.shape != (len(self.cells),):
            raise ValueError("one weight per cell required")

    @property
    def n_cells(self) -> int:
        return len(self.cells)


@dataclass(frozen=True)
class ResponseTable:
    """Per-cell detection probabilities for one side's settings.

    values[i, j] is the probability of the "yes" outcome in cell i at
    setting j; it never references the remote side's setting.
    """

    side: int
    settings: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        if self.side not in (1, 2):
            raise ValueError("side must be 1 or 2")
        object.__setattr__(self, "settings", tuple(self.settings))
        object.__setattr__(self, "values", _frozen(self.values))
        if self.values.ndim != 2 or self.values.shape[1] != len(self.settings):
            raise ValueError("values must be (n_cells, n_settings)")

    def column(self, setting: str) -> np.ndarray:
        try:
            j = self.settings.index(setting)
        except ValueError:
            raise KeyError(f"unknown setting {setting!r} on side {self.side}") from None
        return self.values[:, j]


@dataclass(frozen=True)
class FactorizableModel:
    space: HiddenVariableSpace
    response1: ResponseTable
    response2: ResponseTable

    def __post_init__(self):
        n = self.space.n_cells
        if self.response1.values.shape[0] != n or self.response2.values.shape[0] != n:
            raise ValueError("response tables must index the same cell set as the space")
        if self.response1.side != 1 or self.response2.side != 2:
            raise ValueError("response1 must be side 1, response2 side 2")

    def response(self, side: int) -> ResponseTable:
        return self.response1 if side == 1 else self.response2

    def to_json(self) -> dict:
        return {
            "cells": list(self.space.cells),
            "weights": self.space.weights.tolist(),
            "side1": {
                "settings": list(self.response1.settings),
                "table": self.response1.values.tolist(),
            },
            "side2": {
                "settings": list(self.response2.settings),
                "table": self.response2.values.tolist(),
            },
        }

    @classmethod
    def from_json(cls, data: dict) -> "FactorizableModel":
        space = HiddenVariableSpace(tuple(data["cells"]), np.array(data["weights"]))
        r1 = ResponseTable(1, tuple(data["side1"]["settings"]), np.array(data["side1"]["table"]))
        r2 = ResponseTable(2, tuple(data["side2"]["settings"]), np.array(data["side2"]["table"]))
        return cls(space, r1, r2)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, indent=2)

    @classmethod
    def load(cls, path) -> "FactorizableModel":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


@dataclass(frozen=True)
class Violation:
    kind: str  # "negativity" | "normalization" | "range"
    where: str
    amount: float


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]

    @property
    def valid(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {
            "valid": self.valid,
            "violations": [
                {"kind": v.kind, "where": v.where, "amount": v.amount} for v in self.violations
            ],
        }


def validate_model(model: FactorizableModel, tol: float = MODEL_TOL) -> ValidationReport:
    """Check the probability conditions: weights >= 0, unit normalization,
    all responses within [0, 1].  Diagnostics are the return value."""
    violations: list[Violation] = []
    w = model.space.weights
    for i, cell in enumerate(model.space.cells):
        if w[i] < -tol:
            violations.append(Violation("negativity", f"weight[{cell}]", float(-w[i])))
    deficit = 1.0 - float(w.sum())
    if abs(deficit) > tol:
        violations.append(Violation("normalization", "weights", deficit))
    for table in (model.response1, model.response2):
        for i, cell in enumerate(model.space.cells):
            for j, setting in enumerate(table.settings):
                v = table.values[i, j]
                if v < -tol or v > 1.0 + tol:
                    violations.append(
                        Violation("range", f"side{table.side}[{cell},{setting}]", float(v))
                    )
    return ValidationReport(tuple(violations))


def marginal_probability(model: FactorizableModel, setting: str, side: int) -> float:
    """p(X) = sum over cells of weight * P_side(cell, X)."""
    return float(model.space.weights @ model.response(side).column(setting))


def joint_probability(model: FactorizableModel, settingA: str, settingB: str) -> float:
    """p(X,Y) = sum over cells of weight * P1(cell, X) * P2(cell, Y)."""
    p1 = model.response1.column(settingA)
    p2 = model.response2.column(settingB)
    return float(model.space.weights @ (p1 * p2))


# Outcome tuples are ordered (a, c, b, d) with 1 = "yes", enumerated
# lexicographically.
OUTCOME_TUPLES = tuple(itertools.product((0, 1), repeat=4))


@dataclass(frozen=True)
class FourOutcomeJoint:
    """Formal joint distribution over the four observables (A, C, B, D).

    Not directly measurable (A and C are incompatible settings on the same
    side); its existence is what characterizes factorizable statistics.
    """

    observables: tuple[str, str, str, str]
    probabilities: dict[tuple[int, int, int, int], float] = field(compare=False)

    def __post_init__(self):
        if set(self.probabilities) != set(OUTCOME_TUPLES):
            raise ValueError("probabilities must cover all 16 outcome tuples")
        total = sum(self.probabilities.values())
        if any(p < -MODEL_TOL for p in self.probabilities.values()):
            raise ValueError("negative outcome probability")
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"outcome probabilities sum to {total}, not 1")

    def marginal(self, observable: str) -> float:
        k = self.observables.index(observable)
        return sum(p for t, p in self.probabilities.items() if t[k] == 1)

    def pair(self, obs1: str, obs2: str) -> float:
        k1 = self.observables.index(obs1)
        k2 = self.observables.index(obs2)
        return sum(p for t, p in self.probabilities.items() if t[k1] == 1 and t[k2] == 1)


def formal_joint_distribution(
    model: FactorizableModel, A: str, C: str, B: str, D: str
) -> FourOutcomeJoint:
    """Joint distribution over (A, C, B, D) induced by the hidden variable.

    Within each cell the four outcomes are independent with the table
    probabilities; the mixture over cells reproduces every measurable
    marginal and pair probability of the model.
    """
    w = model.space.weights
    pA = model.response1.column(A)
    pC = model.response1.column(C)
    pB = model.response2.column(B)
    pD = model.response2.column(D)
    probs: dict[tuple[int, int, int, int], float] = {}
    for a, c, b, d in OUTCOME_TUPLES:
        qa = pA if a else 1.0 - pA
        qc = pC if c else 1.0 - pC
        qb = pB if b else 1.0 - pB
        qd = pD if d else 1.0 - pD
        probs[(a, c, b, d)] = float(w @ (qa * qc * qb * qd))
    return FourOutcomeJoint((A, C, B, D), probs)


def probability_set_from_model(
    model: FactorizableModel, A: str = "A", C: str = "C", B: str = "B", D: str = "D"
) -> ProbabilitySet:
    """Collect the six CH quantities of a model at the given settings."""
    return ProbabilitySet(
        pA=marginal_probability(model, A, 1),
        pB=marginal_probability(model, B, 2),
        pAB=joint_probability(model, A, B),
        pAD=joint_probability(model, A, D),
        pCB=joint_probability(model, C, B),
        pCD=joint_probability(model, C, D),
    )


@dataclass(frozen=True)
class FacetCertificate:
    """A violated facet of the local polytope, as evidence of infeasibility."""

    name: str
    lhs: float
    rhs: float

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs


@dataclass(frozen=True)
class Feasible:
    witness: FourOutcomeJoint


@dataclass(frozen=True)
class Infeasible:
    certificate: FacetCertificate


# Facets of the projection of the 16-outcome simplex onto the six measurable
# quantities (pA, pB, pAB, pAD, pCB, pCD).  The CH combination appears with
# both its upper and lower bound; the remaining CH relabelings involve the
# unrecorded marginals p(C), p(D) and survive projection only as the
# Frechet-style bounds below.  Each entry: (name, coefficients, offset) for
# coeff . x <= offset.
CH_FAMILY_FACETS: tuple[tuple[str, tuple[float, ...], float], ...] = (
    ("CH", (-1, -1, 1, 1, 1, -1), 0.0),
    ("CH-lower", (1, 1, -1, -1, -1, 1), 1.0),
    ("bound pAB <= pA", (-1, 0, 1, 0, 0, 0), 0.0),
    ("bound pAB <= pB", (0, -1, 1, 0, 0, 0), 0.0),
    ("bound pAD <= pA", (-1, 0, 0, 1, 0, 0), 0.0),
    ("bound pCB <= pB", (0, -1, 0, 0, 1, 0), 0.0),
    ("bound pAB >= 0", (0, 0, -1, 0, 0, 0), 0.0),
    ("bound pAD >= 0", (0, 0, 0, -1, 0, 0), 0.0),
    ("bound pCB >= 0", (0, 0, 0, 0, -1, 0), 0.0),
    ("bound pCD >= 0", (0, 0, 0, 0, 0, -1), 0.0),
    ("bound pAB >= pA+pB-1", (1, 1, -1, 0, 0, 0), 1.0),
    ("bound pCD <= 1-pA+pAD", (1, 0, 0, -1, 0, 1), 1.0),
    ("bound pCD <= 1-pB+pCB", (0, 1, 0, 0, -1, 1), 1.0),
)


def scan_ch_family(ps: ProbabilitySet, tol: float = DATA_TOL) -> Optional[FacetCertificate]:
    """Return the most violated CH-family facet, or None if all hold."""
    x = (ps.pA, ps.pB, ps.pAB, ps.pAD, ps.pCB, ps.pCD)
    worst: Optional[FacetCertificate] = None
    for name, coeff, offset in CH_FAMILY_FACETS:
        lhs = sum(c * v for c, v in zip(coeff, x))
        if lhs > offset + tol:
            cert = FacetCertificate(name=name, lhs=lhs, rhs=offset)
            if worst is None or cert.margin < worst.margin:
                worst = cert
    return worst


def joint_feasibility(
    ps: ProbabilitySet, observables: tuple[str, str, str, str] = ("A", "C", "B", "D")
) -> Union[Feasible, Infeasible]:
    """Decide whether a four-observable joint distribution matches ps.

    Linear-program feasibility over the 16 outcome weights with equality
    constraints for the six given probabilities.  On success the recovered
    joint is the witness; on failure the certificate is the most violated
    CH-family facet.
    """
    # columns indexed by OUTCOME_TUPLES (a, c, b, d)
    rows = []
    rhs = []

    def add(selector, value):
        rows.append([1.0 if selector(t) else 0.0 for t in OUTCOME_TUPLES])
        rhs.append(value)

    add(lambda t: True, 1.0)
    add(lambda t: t[0] == 1, ps.pA)
    add(lambda t: t[2] == 1, ps.pB)
    add(lambda t: t[0] == 1 and t[2] == 1, ps.pAB)
    add(lambda t: t[0] == 1 and t[3] == 1, ps.pAD)
    add(lambda t: t[1] == 1 and t[2] == 1, ps.pCB)
    add(lambda t: t[1] == 1 and t[3] == 1, ps.pCD)

    res = linprog(
        c=np.zeros(16),
        A_eq=np.array(rows),
        b_eq=np.array(rhs),
        bounds=[(0.0, 1.0)] * 16,
        method="highs",
    )
    if res.status == 0:
        q = np.clip(res.x, 0.0, None)
        q = q / q.sum()
        witness = FourOutcomeJoint(observables, dict(zip(OUTCOME_TUPLES, map(float, q))))
        return Feasible(witness=witness)
    cert = scan_ch_family(ps, tol=0.0)
    if cert is None:
        # infeasible by LP but no facet flags it: numerically on the boundary
        cert = FacetCertificate(name="boundary", lhs=0.0, rhs=0.0)
    return Infeasible(certificate=cert)
