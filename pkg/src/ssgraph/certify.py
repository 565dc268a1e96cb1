"""Sample-based system certification and interconnection verdicts.

Certification here is falsification, not proof: the defining inequalities
quantify over all square-integrable inputs, so a pass means "no violation
among the N seeded inputs of this family", with the worst margin reported
and the provenance needed to reproduce it. Analytic cross-checks for the
LTI catalog live in the test suite.

Inequalities are evaluated with a small relative slack so that quadrature
and FFT errors cannot flip verdicts on boundary cases (for example a
saturation probed inside its linear sector sits exactly on the passivity
boundary).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import NotNegativeImaginaryError, ParameterError
from .signals import InputFamily, generate_inputs
from .spectral import DEFAULT_PAD_FACTOR, hilbert_pairing_arrays
from .ssg import ZERO_PAIRING_TOL
from .systems import OperatorModel, simulate_arrays

#: relative slack applied to every inequality check
NUMERICAL_SLACK = 1e-6
#: |Im z| <= band * |z| counts as a real-axis point for the product test
REAL_AXIS_BAND = 0.02
#: the product test passes only below 1 minus this slack; it must dominate
#: the real-axis band, which itself dominates phase-estimation error
PRODUCT_SLACK = 0.02


@dataclass(frozen=True)
class ProbeData:
    """Per-input functionals of one model under one family."""

    nu: np.ndarray
    ny: np.ndarray
    ip: np.ndarray
    pairing: np.ndarray

    @property
    def count(self) -> int:
        return int(self.nu.size)


def probe_model(
    model: OperatorModel, family: InputFamily, pad_factor: int = DEFAULT_PAD_FACTOR
) -> ProbeData:
    inputs = generate_inputs(family)
    dt = family.dt
    U = np.stack([u.samples for u in inputs])
    Y = simulate_arrays(model, U, dt)
    nu = np.sqrt(np.einsum("ij,ij->i", U, U) * dt)
    ny = np.sqrt(np.einsum("ij,ij->i", Y, Y) * dt)
    ip = np.einsum("ij,ij->i", U, Y) * dt
    pairing = hilbert_pairing_arrays(U, Y, dt, pad_factor)
    return ProbeData(nu, ny, ip, pairing)


@dataclass(frozen=True)
class CertificateReport:
    property_name: str
    epsilon: float
    passed: bool
    worst_margin: float
    worst_margin_normalized: float
    worst_input_id: int
    sample_count: int
    family: dict = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def to_json_dict(self) -> dict:
        return {
            "property": self.property_name,
            "epsilon": float(self.epsilon),
            "verdict": self.verdict,
            "worst_margin": float(self.worst_margin),
            "worst_margin_normalized": float(self.worst_margin_normalized),
            "worst_input_id": int(self.worst_input_id),
            "sample_count": int(self.sample_count),
            "statement": (
                f"no violation among {self.sample_count} seeded inputs"
                if self.passed
                else f"violated by input {self.worst_input_id}"
            ),
            "family": self.family,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)


def _fold(
    name: str, epsilon: float, margins: np.ndarray, scales: np.ndarray, family: InputFamily
) -> CertificateReport:
    normalized = margins / np.where(scales > 0.0, scales, 1.0)
    order = np.lexsort((np.arange(margins.size), normalized))
    worst = int(order[0])
    passed = bool(np.all(normalized >= -NUMERICAL_SLACK))
    return CertificateReport(
        property_name=name,
        epsilon=epsilon,
        passed=passed,
        worst_margin=float(margins[worst]),
        worst_margin_normalized=float(normalized[worst]),
        worst_input_id=worst,
        sample_count=int(margins.size),
        family=family.describe(),
    )


def check_passive(
    model: OperatorModel, family: InputFamily, epsilon: float = 0.0
) -> CertificateReport:
    """<u, y> >= epsilon * ||u||^2 across the sampled inputs.

    epsilon = 0 is plain passivity; epsilon > 0 is input-strict passivity.
    """
    if epsilon < 0.0:
        raise ParameterError("epsilon must be nonnegative")
    data = probe_model(model, family)
    margins = data.ip - epsilon * data.nu**2
    scales = data.nu * data.ny + epsilon * data.nu**2
    name = "input-strictly-passive" if epsilon > 0 else "passive"
    return _fold(name, epsilon, margins, scales, family)


def check_ssg_ni(
    model: OperatorModel,
    family: InputFamily,
    epsilon: float = 0.0,
    flip_sign: bool = False,
    zero_pairing_tol: float = ZERO_PAIRING_TOL,
) -> CertificateReport:
    """Negative-imaginary check through the Hilbert pairing.

    A passing system keeps its signed phase in [-pi, 0]: the pairing must sit
    on the lag side with margin epsilon * (||u|| ||y|| - |<u, y>|). For inputs
    with an indeterminate pairing, the Cauchy-Schwarz gap itself must vanish
    (the conjugate point pair collapses onto the real axis), otherwise the
    expanded point with positive phase escapes the lower half-plane.

    ``flip_sign`` evaluates the same inequality with the opposite pairing
    sign, for side-by-side comparison of the two possible orientation
    conventions; the default orientation is the calibrated one.
    """
    if epsilon < 0.0:
        raise ParameterError("epsilon must be nonnegative")
    data = probe_model(model, family)
    gap = data.nu * data.ny - np.abs(data.ip)
    lag_side = data.pairing if flip_sign else -data.pairing
    indet = np.abs(data.pairing) <= zero_pairing_tol * data.nu * data.ny
    margins = np.where(indet, NUMERICAL_SLACK * data.nu * data.ny - gap, lag_side - epsilon * gap)
    scales = data.nu * data.ny
    return _fold("ssg-negative-imaginary", epsilon, margins, scales, family)


# ---------------------------------------------------------------------------
# interconnection verdicts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InterconnectionReport:
    theorem: str
    passed: bool
    detail: dict

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def to_json_dict(self) -> dict:
        return {"theorem": self.theorem, "verdict": self.verdict, **self.detail}

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)


def passivity_theorem_verdict(
    h1: OperatorModel, h2: OperatorModel, family: InputFamily, epsilon: float
) -> InterconnectionReport:
    """Negative feedback of an input-strictly-passive block with a passive one.

    Passing bounds the first cloud inside {Re z >= epsilon} and the negated
    inverse of the second inside {Re z <= 0}: half-planes a distance epsilon
    apart, which is the separation the stability verdict rests on.
    """
    if not epsilon > 0.0:
        raise ParameterError("the passivity theorem needs strictness: epsilon > 0")
    r1 = check_passive(h1, family, epsilon)
    r2 = check_passive(h2, family, 0.0)
    passed = r1.passed and r2.passed
    detail = {
        "epsilon": float(epsilon),
        "h1": r1.to_json_dict(),
        "h2": r2.to_json_dict(),
        "implied_half_plane_separation": float(epsilon) if passed else 0.0,
    }
    return InterconnectionReport("passivity", passed, detail)


def _real_axis_values(data: ProbeData, band: float, zero_pairing_tol: float) -> list[tuple[int, float]]:
    """Real parts of expanded cloud points within the real-axis band."""
    out: list[tuple[int, float]] = []
    for i in range(data.count):
        nu, ny, ip, pairing = data.nu[i], data.ny[i], data.ip[i], data.pairing[i]
        if nu == 0.0:
            continue
        if ny == 0.0:
            out.append((i, 0.0))
            continue
        rho = ny / nu
        theta = float(np.arccos(np.clip(ip / (nu * ny), -1.0, 1.0)))
        phases = (
            (theta, -theta)
            if abs(pairing) <= zero_pairing_tol * nu * ny
            else (float(np.sign(pairing)) * theta,)
        )
        for ph in phases:
            z = rho * np.exp(1j * ph)
            if abs(z.imag) <= band * abs(z):
                out.append((i, float(z.real)))
    return out


def ni_theorem_verdict(
    h1: OperatorModel,
    h2: OperatorModel,
    family: InputFamily,
    epsilon: float = 0.0,
    band: float = REAL_AXIS_BAND,
    product_slack: float = PRODUCT_SLACK,
) -> InterconnectionReport:
    """Positive feedback of two negative-imaginary blocks: real-axis products.

    Both blocks must certify negative-imaginary first. The verdict then
    collects the sampled cloud points lying on the real axis (within the
    band; exact Im = 0 is measure-zero in floating point) and requires every
    product of real parts to stay below 1 - product_slack.
    """
    for name, model in (("h1", h1), ("h2", h2)):
        rep = check_ssg_ni(model, family, epsilon)
        if not rep.passed:
            raise NotNegativeImaginaryError(
                f"system {name} failed the negative-imaginary precondition "
                f"(worst input {rep.worst_input_id})",
                system=name,
            )
    d1 = probe_model(h1, family)
    d2 = probe_model(h2, family)
    vals1 = _real_axis_values(d1, band, ZERO_PAIRING_TOL)
    vals2 = _real_axis_values(d2, band, ZERO_PAIRING_TOL)
    detail: dict = {
        "epsilon": float(epsilon),
        "real_axis_band": float(band),
        "product_slack": float(product_slack),
        "real_axis_count_h1": len(vals1),
        "real_axis_count_h2": len(vals2),
    }
    if not vals1 or not vals2:
        detail["worst_product"] = None
        detail["note"] = "no sampled real-axis intersection; condition unexercised"
        return InterconnectionReport("negative-imaginary", True, detail)
    xs1 = np.array([v for _, v in vals1])
    xs2 = np.array([v for _, v in vals2])
    cands1 = (int(np.argmin(xs1)), int(np.argmax(xs1)))
    cands2 = (int(np.argmin(xs2)), int(np.argmax(xs2)))
    best = None
    for i in cands1:
        for j in cands2:
            prod = xs1[i] * xs2[j]
            if best is None or prod > best[0]:
                best = (float(prod), vals1[i][0], vals2[j][0])
    worst_product, id1, id2 = best
    passed = bool(worst_product < 1.0 - product_slack)
    detail.update(
        {
            "worst_product": worst_product,
            "worst_pair_input_ids": [id1, id2],
        }
    )
    return InterconnectionReport("negative-imaginary", passed, detail)


# ---------------------------------------------------------------------------
# the excluded-input diagnostic
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WSetReport:
    """Advisory check of the excluded-input membership conditions.

    A trajectory is near-membership when the energy-balance and
    cross-inner-product equalities hold within tolerance and the pairing
    product is strictly negative. Verdicts from the separation theorem do not
    cover such exogenous inputs, so loops whose trajectories flag here
    deserve a closer look.
    """

    degenerate: bool
    near_member: bool
    residual_balance: float
    residual_energy: float
    pairing_product: float
    tau: float

    def to_json_dict(self) -> dict:
        return {
            "degenerate": self.degenerate,
            "near_member": self.near_member,
            "residual_balance": float(self.residual_balance),
            "residual_energy": float(self.residual_energy),
            "pairing_product": float(self.pairing_product),
            "tau": float(self.tau),
        }


def w_set_diagnostic(trajectory, tol: float = 1e-3) -> WSetReport:
    """Evaluate the three membership conditions on a loop trajectory.

    Conditions, with y2 scaled by the homotopy parameter tau:
      1. <u1, u2> + <u2, tau*y2> = 0
      2. ||u1|| - ||tau*y2|| = 0
      3. Pi(u1, u2) * Pi(u2, tau*y2) < 0
    Residuals 1 and 2 are normalized by their natural scales; the pairing
    product is normalized by the product of the four norms.
    """
    u1 = trajectory.u1.samples
    u2 = trajectory.u2.samples
    y2s = trajectory.tau * trajectory.y2.samples
    dt = trajectory.u1.dt
    nu1 = float(np.sqrt(np.dot(u1, u1) * dt))
    nu2 = float(np.sqrt(np.dot(u2, u2) * dt))
    ny2s = float(np.sqrt(np.dot(y2s, y2s) * dt))
    if nu1 == 0.0 and nu2 == 0.0 and ny2s == 0.0:
        return WSetReport(True, False, 0.0, 0.0, 0.0, trajectory.tau)
    balance = float(np.dot(u1, u2) * dt + np.dot(u2, y2s) * dt)
    scale1 = nu1 * nu2 + nu2 * ny2s
    r1 = abs(balance) / scale1 if scale1 > 0 else 0.0
    r2 = abs(nu1 - ny2s) / (nu1 + ny2s)
    p1 = float(hilbert_pairing_arrays(u1, u2, dt))
    p2 = float(hilbert_pairing_arrays(u2, y2s, dt))
    scale3 = nu1 * nu2 * nu2 * ny2s
    product = (p1 * p2) / scale3 if scale3 > 0 else 0.0
    near = bool(r1 <= tol and r2 <= tol and product < 0.0)
    return WSetReport(False, near, r1, r2, product, trajectory.tau)
