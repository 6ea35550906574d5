"""Closed-form quantum predictions for photon-pair polarization experiments.

Covers atomic-cascade sources (aperture-dependent efficiency and visibility),
parametric down-conversion two-channel rates, the efficiency thresholds at
which a genuine Bell test becomes possible, and the kinematic spacelike
separation constraints for massive-particle tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .inequalities import InequalityReport, ProbabilitySet, ch_report, fc_report

HBAR = 1.054571817e-34  # J s
C_LIGHT = 2.99792458e8  # m/s

SQRT2 = math.sqrt(2.0)

# canonical signed angle differences for the pairs (A,B), (A,D), (C,B), (C,D)
CANONICAL_ANGLES = (-math.pi / 8, math.pi / 8, math.pi / 8, 3 * math.pi / 8)


@dataclass(frozen=True)
class CascadeConfig:
    """Atomic-cascade source: lens half-aperture, detector efficiency, rate."""

    theta: float
    zeta: float
    r0: float
    alpha: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.theta <= math.pi / 2:
            raise ValueError(f"theta = {self.theta} outside (0, pi/2]")
        if not 0.0 <= self.zeta <= 1.0:
            raise ValueError(f"zeta = {self.zeta} outside [0, 1]")
        if self.r0 <= 0:
            raise ValueError("r0 must be positive")


@dataclass(frozen=True)
class PdcConfig:
    """Parametric down-conversion source parameters."""

    v: float
    eta: float
    r0: float

    def __post_init__(self):
        if not 0.0 <= self.v <= 1.0:
            raise ValueError(f"v = {self.v} outside [0, 1]")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta = {self.eta} outside [0, 1]")
        if self.r0 <= 0:
            raise ValueError("r0 must be positive")


@dataclass(frozen=True)
class AngleSet:
    """Signed polarizer angle differences for pairs (A,B), (A,D), (C,B), (C,D).

    The geometric identity phi1 + phi4 = phi2 + phi3 is enforced on signed
    values; cosine evaluations downstream are parity-insensitive.
    """

    phi1: float
    phi2: float
    phi3: float
    phi4: float

    def __post_init__(self):
        if abs((self.phi1 + self.phi4) - (self.phi2 + self.phi3)) > 1e-12:
            raise ValueError("angles must satisfy phi1 + phi4 = phi2 + phi3")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.phi1, self.phi2, self.phi3, self.phi4)

    def objective(self) -> float:
        """cos(2 phi1) + cos(2 phi2) + cos(2 phi3) - cos(2 phi4)."""
        return (
            math.cos(2 * self.phi1)
            + math.cos(2 * self.phi2)
            + math.cos(2 * self.phi3)
            - math.cos(2 * self.phi4)
        )


@dataclass(frozen=True)
class KinematicsInput:
    mass: float  # kg
    speed: float  # m/s
    separation: Optional[float] = None  # source-detector distance L, m
    measure_time: Optional[float] = None  # s

    def __post_init__(self):
        if self.mass <= 0:
            raise ValueError("mass must be positive")
        if not 0.0 < self.speed < C_LIGHT:
            raise ValueError("speed must be in (0, c)")


def cascade_optics(theta: float, zeta: float) -> tuple[float, float, float]:
    """Aperture-dependent efficiency, visibility and angular correlation.

    eta = (1 - cos theta) zeta / 2,  V = 1 - (2/3)(1 - cos theta)^2,
    alpha = 1 (near-isotropic pair emission).
    """
    u = 1.0 - math.cos(theta)
    eta = 0.5 * u * zeta
    v = 1.0 - (2.0 / 3.0) * u * u
    return eta, v, 1.0


def cascade_rates(
    r0: float, eta: float, v: float, alpha: float, phi: float
) -> tuple[float, float, float]:
    """Singles and coincidence rates of a cascade experiment.

    r1 = r2 = r0 eta / 2;  r12 = r0 eta^2 alpha (1 + V cos 2phi) / 4.
    """
    r1 = 0.5 * r0 * eta
    r12 = 0.25 * r0 * eta * eta * alpha * (1.0 + v * math.cos(2.0 * phi))
    return r1, r1, r12


def two_channel_rates(cfg: PdcConfig, phi: float) -> tuple[float, float, float, float]:
    """Two-channel coincidence rates R++, R+-, R-+, R-- at angle phi.

    R++ = R-- = eta r0 (1 + V cos 2phi)/2 and R+- = R-+ = R++(phi + pi/2);
    the four rates always sum to 2 eta r0.
    """
    mod = cfg.v * math.cos(2.0 * phi)
    rpp = 0.5 * cfg.eta * cfg.r0 * (1.0 + mod)
    rpm = 0.5 * cfg.eta * cfg.r0 * (1.0 - mod)
    return rpp, rpm, rpm, rpp


def bi_margin(alpha: float, eta: float, v: float) -> tuple[float, bool]:
    """Left side of the genuine Bell condition alpha eta (1 + sqrt2 V) <= 2."""
    lhs = alpha * eta * (1.0 + SQRT2 * v)
    return lhs, lhs <= 2.0


class NoViolationPossibleError(ValueError):
    """The visibility is at or below sqrt(2)/2: no efficiency violates the test."""


def bi1_min_efficiency(v: float) -> float:
    """Smallest detection efficiency at which zeta (1 + sqrt2 V) <= 2 can fail.

    zeta_min = 2 / (1 + sqrt2 V); at the boundary visibility sqrt(2)/2 only a
    perfect detector reaches equality, and below it the condition holds for
    every efficiency, so no threshold exists.
    """
    if v < SQRT2 / 2.0:
        raise NoViolationPossibleError(
            f"V = {v} <= sqrt(2)/2: no detection efficiency allows a violation"
        )
    if v > 1.0:
        raise ValueError(f"V = {v} outside (sqrt(2)/2, 1]")
    return 2.0 / (1.0 + SQRT2 * v)


def optimal_angles() -> tuple[AngleSet, float]:
    """Angle set maximizing cos2phi1 + cos2phi2 + cos2phi3 - cos2phi4.

    The maximum under phi1 + phi4 = phi2 + phi3 is 2*sqrt(2), reached at
    magnitudes (pi/8, pi/8, pi/8, 3pi/8); the sign of phi1 makes the signed
    constraint hold.
    """
    angles = AngleSet(*CANONICAL_ANGLES)
    return angles, 2.0 * SQRT2


def cascade_bi_maximum(zeta: float, both_detectors: bool = False) -> tuple[float, float]:
    """Maximum of alpha eta(theta) (1 + sqrt2 V(theta)) over the aperture.

    With u = 1 - cos theta the objective is zeta (u (1+sqrt2) - 2 sqrt2 u^3/3)/2,
    stationary at u* = sqrt((1+sqrt2)/(2 sqrt2)); the bracketed numerical
    maximization is cross-checked against that closed form.  both_detectors
    doubles the value (each photon may reach either detector).
    """
    if not 0.0 < zeta <= 1.0:
        raise ValueError(f"zeta = {zeta} outside (0, 1]")

    def negated(theta: float) -> float:
        eta, v, alpha = cascade_optics(theta, zeta)
        return -bi_margin(alpha, eta, v)[0]

    res = minimize_scalar(
        negated, bounds=(1e-9, math.pi / 2), method="bounded", options={"xatol": 1e-10}
    )
    theta_star = float(res.x)
    max_lhs = -float(res.fun)
    u_star = math.sqrt((1.0 + SQRT2) / (2.0 * SQRT2))
    closed_form = 0.5 * zeta * (u_star * (1.0 + SQRT2) - (2.0 * SQRT2 / 3.0) * u_star**3)
    if abs(max_lhs - closed_form) > 1e-8 * max(1.0, closed_form):
        raise RuntimeError(
            f"numerical maximum {max_lhs} disagrees with stationary point {closed_form}"
        )
    if both_detectors:
        max_lhs *= 2.0
    return max_lhs, theta_star


class InsufficientCoverageError(ValueError):
    """The angle samples do not span a half-period of the correlation curve."""


def visibility_estimators(
    samples: Sequence[tuple[float, float]]
) -> tuple[float, float, float]:
    """Three empirical visibility estimates from (phi, E*) samples.

    v_fit: least-squares amplitude of V cos 2phi.
    v_a: (max - min)/(max + min) of the coincidence-rate curve, which is
         proportional to 1 + E*(phi), hence (E*max - E*min)/(E*max + E*min + 2)
         on the correlation samples.
    v_b: S*/(2 sqrt2) assembled from the samples nearest the canonical angles.

    The three agree on exact V cos 2phi data but respond differently to
    distortions; they are distinct estimators, not one quantity.
    """
    if len(samples) < 4:
        raise InsufficientCoverageError("at least 4 samples required")
    phis = np.array([s[0] for s in samples], dtype=float)
    es = np.array([s[1] for s in samples], dtype=float)
    if phis.max() - phis.min() < math.pi / 2 - 1e-9:
        raise InsufficientCoverageError("samples must span at least a half-period (pi/2)")

    basis = np.cos(2.0 * phis)
    denom = float(basis @ basis)
    if denom == 0.0:
        raise InsufficientCoverageError("all samples at curve nodes; amplitude unconstrained")
    v_fit = float(basis @ es) / denom

    e_max = float(es.max())
    e_min = float(es.min())
    v_a = (e_max - e_min) / (e_max + e_min + 2.0)

    def nearest(target: float) -> float:
        # the curve depends on phi only through cos 2phi: fold by parity
        # and pi-periodicity before measuring angular distance
        def dist(phi: float) -> float:
            d1 = abs((phi - target + math.pi / 2) % math.pi - math.pi / 2)
            d2 = abs((phi + target + math.pi / 2) % math.pi - math.pi / 2)
            return min(d1, d2)

        idx = min(range(len(phis)), key=lambda i: dist(float(phis[i])))
        return float(es[idx])

    e1, e2, e3, e4 = (nearest(t) for t in CANONICAL_ANGLES)
    s_star = (e1 - e4) + (e2 + e3)
    v_b = s_star / (2.0 * SQRT2)
    return v_fit, v_a, v_b


@dataclass(frozen=True)
class SpacelikeConstraints:
    l_min: float
    dt_arrival: Optional[float]
    l_meas: Optional[float]


def spacelike_constraints(k: KinematicsInput) -> SpacelikeConstraints:
    """Kinematic bounds for spacelike-separated massive-particle tests.

    l_min = 2 hbar c^2 / (m v^3): minimum source-detector distance before
    the quantum arrival-time spread sqrt(2 hbar L / (m v^3)) fits inside the
    light-travel window.  l_meas = c t_m: separation needed so a measurement
    of duration t_m stays outside the remote light cone.
    """
    mv3 = k.mass * k.speed**3
    l_min = 2.0 * HBAR * C_LIGHT**2 / mv3
    dt_arrival = math.sqrt(2.0 * HBAR * k.separation / mv3) if k.separation is not None else None
    l_meas = C_LIGHT * k.measure_time if k.measure_time is not None else None
    return SpacelikeConstraints(l_min=l_min, dt_arrival=dt_arrival, l_meas=l_meas)


def predicted_probability_set(
    eta: float, v: float, alpha: float = 1.0, angles: Optional[AngleSet] = None
) -> ProbabilitySet:
    """CH probabilities for singles rate r0 eta / 2 and coincidence rate
    r0 eta^2 alpha (1 + V cos 2phi) / 4, as ratios to the production rate."""
    if angles is None:
        angles = optimal_angles()[0]

    def pair_prob(phi: float) -> float:
        return 0.25 * eta * eta * alpha * (1.0 + v * math.cos(2.0 * phi))

    return ProbabilitySet(
        pA=0.5 * eta,
        pB=0.5 * eta,
        pAB=pair_prob(angles.phi1),
        pAD=pair_prob(angles.phi2),
        pCB=pair_prob(angles.phi3),
        pCD=pair_prob(angles.phi4),
    )


def prediction_reports(
    eta: float, v: float, alpha: float = 1.0, angles: Optional[AngleSet] = None
) -> tuple[InequalityReport, InequalityReport]:
    """Genuine CH verdict and auxiliary-assumption FC verdict for one source.

    Both are evaluated from the same predicted probabilities; the FC right
    side uses the polarizer-removed coincidences p(A,inf) = p(inf,B) =
    alpha eta^2 / 2.
    """
    ps = predicted_probability_set(eta, v, alpha, angles)
    p_removed = 0.5 * alpha * eta * eta
    return ch_report(ps), fc_report(ps, p_removed, p_removed)


def cascade_probability_set(
    cfg: CascadeConfig, angles: Optional[AngleSet] = None
) -> ProbabilitySet:
    """CH probabilities predicted for a cascade experiment at given angles."""
    eta, v, alpha = cascade_optics(cfg.theta, cfg.zeta)
    return predicted_probability_set(eta, v, cfg.alpha * alpha, angles)


def cascade_inequality_reports(
    cfg: CascadeConfig, angles: Optional[AngleSet] = None
) -> tuple[InequalityReport, InequalityReport]:
    """CH and FC verdicts with the optics derived from the lens aperture."""
    eta, v, alpha = cascade_optics(cfg.theta, cfg.zeta)
    return prediction_reports(eta, v, cfg.alpha * alpha, angles)
