"""Scaled-graph points and point clouds: estimation and set transforms.

One probed input/output pair yields a gain rho = ||y||/||u|| and a signed
phase phi. The unsigned phase theta = arccos <u,y>/(||u|| ||y||) lies in
[0, pi]; the Hilbert pairing supplies its sign. When the pairing magnitude
falls below the zero-pairing tolerance the sign is indeterminate and the
point stands for the conjugate pair rho*e^(+/- j theta): wherever sets are
formed, indeterminate points expand to both signs. That convention is
conservative; no extra information about the sign exists in that case, so
both candidates are kept.

The signed cloud is a subset of the unsigned cloud by construction, and the
union with its conjugate reproduces the unsigned cloud exactly (as point
sets over the expanded representation).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DegeneratePairError, NonInvertiblePointError, ParameterError
from .signals import InputFamily, SampledSignal, generate_inputs, inner_product, norm
from .spectral import DEFAULT_PAD_FACTOR, hilbert_pairing, hilbert_pairing_arrays
from .systems import OperatorModel, simulate_arrays

#: pairing magnitudes below this (relative to ||u|| ||y||) are indeterminate
ZERO_PAIRING_TOL = 1e-6


@dataclass(frozen=True)
class SsgPoint:
    """One (gain, phase) sample with provenance.

    ``indeterminate`` marks a vanishing pairing; the point then represents
    both rho*e^(+j*phase) and rho*e^(-j*phase). Zero-output pairs are stored
    as (0, 0): the gain is genuinely 0 and the phase carries no information.
    """

    gain: float
    phase: float
    indeterminate: bool = False
    input_id: int = -1

    def __post_init__(self):
        if self.gain < 0.0:
            raise ParameterError("gain must be nonnegative")
        if not (-np.pi <= self.phase <= np.pi):
            raise ParameterError("phase must lie in [-pi, pi]")

    def expand(self) -> list[complex]:
        z = self.gain * np.exp(1j * self.phase)
        if self.indeterminate and self.phase != 0.0:
            return [complex(z), complex(np.conj(z))]
        return [complex(z)]


@dataclass
class PointCloud:
    """Finite sample of a (signed) scaled graph.

    ``source`` records how the cloud was produced (model and family
    documents) so any point can be re-derived from (model, seed, index).
    Inputs that were identically zero are never stored as points (their gain
    would be infinite); they are only counted.
    """

    points: list[SsgPoint]
    source: dict = field(default_factory=dict)
    zero_input_count: int = 0

    def __len__(self):
        return len(self.points)

    def expanded_points(self) -> np.ndarray:
        out: list[complex] = []
        for p in self.points:
            out.extend(p.expand())
        return np.asarray(out, dtype=complex)

    def expanded_set(self) -> set[tuple[float, float]]:
        """Exact (gain, phase) pairs with both signs of indeterminate points."""
        out: set[tuple[float, float]] = set()
        for p in self.points:
            out.add((p.gain, p.phase + 0.0))
            if p.indeterminate:
                out.add((p.gain, -p.phase + 0.0))
        return out

    def to_csv(self, comments: list[str] | None = None) -> str:
        buf = io.StringIO()
        for line in comments or []:
            buf.write(f"# {line}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["input_id", "gain", "phase", "re", "im", "indeterminate"])
        for p in self.points:
            phases = [p.phase, -p.phase] if (p.indeterminate and p.phase != 0.0) else [p.phase]
            for ph in phases:
                z = p.gain * np.exp(1j * ph)
                writer.writerow(
                    [
                        p.input_id,
                        f"{p.gain:.15g}",
                        f"{ph:.15g}",
                        f"{z.real:.15g}",
                        f"{z.imag:.15g}",
                        int(p.indeterminate),
                    ]
                )
        return buf.getvalue()


def unsigned_phase(u: SampledSignal, y: SampledSignal) -> float:
    """Singular angle in [0, pi] between input and output."""
    nu, ny = norm(u), norm(y)
    if nu == 0.0 or ny == 0.0:
        raise DegeneratePairError("unsigned phase needs two nonzero signals")
    c = inner_product(u, y) / (nu * ny)
    return float(np.arccos(np.clip(c, -1.0, 1.0)))


def signed_phase(
    u: SampledSignal,
    y: SampledSignal,
    tol: float = ZERO_PAIRING_TOL,
    pad_factor: int = DEFAULT_PAD_FACTOR,
) -> tuple[float, bool]:
    """(phase, indeterminate): the singular angle signed by the Hilbert pairing."""
    nu, ny = norm(u), norm(y)
    if nu == 0.0 or ny == 0.0:
        raise DegeneratePairError("signed phase needs two nonzero signals")
    theta = unsigned_phase(u, y)
    pairing = hilbert_pairing(u, y, pad_factor)
    if abs(pairing) <= tol * nu * ny:
        return theta, True
    return float(np.sign(pairing) * theta), False


def estimate_ssg(
    model: OperatorModel,
    family: InputFamily,
    tol: float = ZERO_PAIRING_TOL,
    pad_factor: int = DEFAULT_PAD_FACTOR,
    jobs: int = 1,
) -> PointCloud:
    """Probe the model with every input of the family; one point per input.

    Simulation is batched across inputs; the result is ordered by input index
    and independent of how the batch is scheduled.
    """
    inputs = generate_inputs(family)
    dt = family.dt
    U = np.stack([u.samples for u in inputs])
    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        chunks = np.array_split(np.arange(U.shape[0]), jobs)
        chunks = [c for c in chunks if c.size]
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(lambda idx: simulate_arrays(model, U[idx], dt), chunks))
        Y = np.vstack(parts)
    else:
        Y = simulate_arrays(model, U, dt)

    nu = np.sqrt(np.einsum("ij,ij->i", U, U) * dt)
    ny = np.sqrt(np.einsum("ij,ij->i", Y, Y) * dt)
    ips = np.einsum("ij,ij->i", U, Y) * dt
    pairings = hilbert_pairing_arrays(U, Y, dt, pad_factor)

    points: list[SsgPoint] = []
    zero_inputs = 0
    for i in range(U.shape[0]):
        if nu[i] == 0.0:
            zero_inputs += 1
            continue
        if ny[i] == 0.0:
            points.append(SsgPoint(0.0, 0.0, indeterminate=False, input_id=i))
            continue
        theta = float(np.arccos(np.clip(ips[i] / (nu[i] * ny[i]), -1.0, 1.0)))
        if abs(pairings[i]) <= tol * nu[i] * ny[i]:
            points.append(SsgPoint(float(ny[i] / nu[i]), theta, True, input_id=i))
        else:
            points.append(
                SsgPoint(
                    float(ny[i] / nu[i]),
                    float(np.sign(pairings[i]) * theta),
                    False,
                    input_id=i,
                )
            )
    source = {
        "model": model.to_config(),
        "family": family.describe(),
        "zero_pairing_tol": tol,
        "pad_factor": pad_factor,
    }
    return PointCloud(points, source=source, zero_input_count=zero_inputs)


# ---------------------------------------------------------------------------
# cloud-level set transforms
# ---------------------------------------------------------------------------


def invert_cloud(cloud: PointCloud) -> PointCloud:
    """Swap the roles of input and output: (rho, phi) -> (1/rho, -phi)."""
    out = []
    for p in cloud.points:
        if p.gain == 0.0:
            raise NonInvertiblePointError(
                f"point from input {p.input_id} has zero gain and no inverse"
            )
        out.append(replace(p, gain=1.0 / p.gain, phase=-p.phase))
    return PointCloud(out, source={**cloud.source, "inverted": True}, zero_input_count=cloud.zero_input_count)


def conjugate_cloud(cloud: PointCloud) -> PointCloud:
    out = [replace(p, phase=-p.phase) for p in cloud.points]
    return PointCloud(out, source={**cloud.source, "conjugated": True}, zero_input_count=cloud.zero_input_count)


def sg_from_ssg(cloud: PointCloud) -> PointCloud:
    """Unsigned scaled-graph cloud: the union of the cloud with its conjugate."""
    out = list(cloud.points) + [replace(p, phase=-p.phase) for p in cloud.points]
    return PointCloud(out, source={**cloud.source, "unsigned": True}, zero_input_count=cloud.zero_input_count)


def _negate_point(p: SsgPoint, tau: float) -> SsgPoint:
    gain = tau * p.gain
    if p.indeterminate:
        # {+-theta} maps to {pi - theta, theta - pi}: still a conjugate pair
        return replace(p, gain=gain, phase=np.pi - abs(p.phase))
    if p.phase == 0.0:
        # -1 lands on the branch cut: +-pi with the sign indeterminate
        return replace(p, gain=gain, phase=np.pi, indeterminate=True)
    return replace(p, gain=gain, phase=p.phase - np.sign(p.phase) * np.pi)


def scale_negate_cloud(cloud: PointCloud, tau: float) -> PointCloud:
    """Cloud of -tau * H: each set point z maps to -tau*z.

    Matches estimating the scaled model directly: theta(u, -y) = pi - theta
    and the pairing flips sign, so determinate phases move by -sgn(phase)*pi
    while indeterminate pairs stay conjugate pairs.
    """
    if not (0.0 < tau <= 1.0):
        raise ParameterError("tau must lie in (0, 1]")
    out = [_negate_point(p, tau) for p in cloud.points]
    return PointCloud(
        out,
        source={**cloud.source, "scale_negate_tau": tau},
        zero_input_count=cloud.zero_input_count,
    )


def separation_sets(cloud_h1: PointCloud, cloud_h2: PointCloud, mode: str = "signed"):
    """(A, B_of_tau) inputs for the separation check.

    A holds the expanded points of the first cloud; B(tau) holds the expanded
    points of the inverted, (-tau)-scaled second cloud. ``mode`` selects the
    signed clouds or their unsigned (conjugate-closed) versions.
    """
    if mode == "signed":
        c1, c2 = cloud_h1, cloud_h2
    elif mode == "unsigned":
        c1, c2 = sg_from_ssg(cloud_h1), sg_from_ssg(cloud_h2)
    else:
        raise ParameterError("mode must be 'signed' or 'unsigned'")
    a_points = c1.expanded_points()

    def b_of_tau(tau: float) -> np.ndarray:
        return invert_cloud(scale_negate_cloud(c2, tau)).expanded_points()

    return a_points, b_of_tau
