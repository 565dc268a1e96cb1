"""Time-domain simulation of the two-block feedback loop and empirical gains.

The loop wires u1 = w + sign * tau * y2 and u2 = y1, with sign = -1 for the
standard negative feedback arrangement and +1 for the positive feedback used
by the negative-imaginary interconnection result. Each time step solves the
interconnection algebra (a damped fixed point when both blocks have direct
feedthrough) and the whole tau sweep is simulated as one batch.

Truncated simulation cannot exhibit an infinite gain, so instability is
reported through a horizon-doubling test: the exogenous input is zero-padded
to twice the horizon, and a gain estimate that at least doubles on the padded
window flags the loop as instability-consistent. Gain estimates over finitely
many inputs are lower bounds; the report language is "no counterexample
found", never "stable".
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from .errors import LoopDivergenceError, ParameterError
from .geometry import default_tau_grid
from .signals import InputFamily, SampledSignal, generate_inputs
from .systems import OperatorModel, solve_fixed_point


@dataclass(frozen=True)
class LoopTrajectory:
    """All internal signals of one simulated interconnection."""

    w: SampledSignal
    u1: SampledSignal
    y1: SampledSignal
    u2: SampledSignal
    y2: SampledSignal
    tau: float
    sign: int

    def interconnection_residual(self) -> float:
        r = self.u1.samples - self.w.samples - self.sign * self.tau * self.y2.samples
        return float(np.max(np.abs(r)))

    def to_csv(self, comments: list[str] | None = None) -> str:
        buf = io.StringIO()
        for line in comments or []:
            buf.write(f"# {line}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t", "w", "u1", "y1", "u2", "y2"])
        for row in zip(
            self.w.times(),
            self.w.samples,
            self.u1.samples,
            self.y1.samples,
            self.u2.samples,
            self.y2.samples,
        ):
            writer.writerow([f"{v:.15g}" for v in row])
        return buf.getvalue()


def _simulate_loop_batch(
    h1: OperatorModel,
    h2: OperatorModel,
    w: np.ndarray,
    dt: float,
    taus: np.ndarray,
    sign: int,
):
    """Batch-simulate the loop over all tau values at once.

    Returns (U1, Y1, Y2) arrays of shape (len(taus), len(w)).
    """
    if sign not in (-1, 1):
        raise ParameterError("sign must be -1 or +1")
    taus = np.asarray(taus, dtype=float)
    if np.any(taus <= 0.0) or np.any(taus > 1.0):
        raise ParameterError("tau must lie in (0, 1]")
    batch = taus.size
    s1 = h1._stepper(dt, batch)
    s2 = h2._stepper(dt, batch)
    n = w.size
    U1 = np.empty((batch, n))
    Y1 = np.empty((batch, n))
    Y2 = np.empty((batch, n))
    for k in range(n):
        wk = np.full(batch, w[k])
        try:
            u1 = solve_fixed_point(
                lambda u: wk + sign * taus * s2.out(s1.out(u)), wk.copy()
            )
        except LoopDivergenceError as exc:
            raise LoopDivergenceError(f"{exc} (at step {k})", step=k) from None
        y1 = s1.out(u1)
        y2 = s2.out(y1)
        U1[:, k] = u1
        Y1[:, k] = y1
        Y2[:, k] = y2
        s1.advance(u1)
        s2.advance(y1)
    return U1, Y1, Y2


def closed_loop_simulate(
    h1: OperatorModel,
    h2: OperatorModel,
    w: SampledSignal,
    tau: float = 1.0,
    sign: int = -1,
) -> LoopTrajectory:
    """Simulate the interconnection of h1 with (tau * h2) driven by w."""
    U1, Y1, Y2 = _simulate_loop_batch(h1, h2, w.samples, w.dt, np.array([tau]), sign)
    mk = lambda arr: SampledSignal(arr, w.dt, w.t0)
    return LoopTrajectory(
        w=w, u1=mk(U1[0]), y1=mk(Y1[0]), u2=mk(Y1[0]), y2=mk(Y2[0]), tau=tau, sign=sign
    )


@dataclass(frozen=True)
class GainReport:
    """Empirical finite-gain estimate over a family and a tau grid."""

    gamma: float
    gamma_doubled_horizon: float
    horizon_ratio: float
    unstable_flag: bool
    worst_input_id: int
    worst_tau: float
    sign: int
    horizon: float
    sample_count: int
    tau_count: int

    def to_json_dict(self) -> dict:
        return {
            "gamma": float(self.gamma),
            "gamma_doubled_horizon": float(self.gamma_doubled_horizon),
            "horizon_ratio": float(self.horizon_ratio),
            "unstable_flag": bool(self.unstable_flag),
            "worst_input_id": int(self.worst_input_id),
            "worst_tau": float(self.worst_tau),
            "sign": int(self.sign),
            "horizon": float(self.horizon),
            "sample_count": int(self.sample_count),
            "tau_count": int(self.tau_count),
            "statement": (
                "gain estimate grows under horizon doubling; instability-consistent"
                if self.unstable_flag
                else "no counterexample found among the sampled inputs"
            ),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)


#: horizon-doubling growth that flags a loop as instability-consistent
UNSTABLE_RATIO = 2.0


def empirical_gain(
    h1: OperatorModel,
    h2: OperatorModel,
    family: InputFamily,
    tau_grid=None,
    sign: int = -1,
) -> GainReport:
    """max ||u1|| / ||w|| over the sampled (w, tau) pairs.

    Every input is zero-extended to twice its horizon before simulation; the
    gain is evaluated both on the original window and on the doubled one, and
    sustained growth past the input's support trips the instability flag.
    """
    taus = np.asarray(default_tau_grid() if tau_grid is None else tau_grid, dtype=float)
    inputs = generate_inputs(family)
    dt = family.dt
    n = len(inputs[0])
    gamma = 0.0
    gamma2 = 0.0
    worst = (0, 1.0)
    for i, w in enumerate(inputs):
        wx = w.zero_extended(2 * n)
        U1, _, _ = _simulate_loop_batch(h1, h2, wx.samples, dt, taus, sign)
        nw = float(np.sqrt(np.dot(w.samples, w.samples) * dt))
        g_base = np.sqrt(np.einsum("ij,ij->i", U1[:, :n], U1[:, :n]) * dt) / nw
        g_full = np.sqrt(np.einsum("ij,ij->i", U1, U1) * dt) / nw
        j = int(np.argmax(g_base))
        if g_base[j] > gamma:
            gamma = float(g_base[j])
            worst = (i, float(taus[j]))
        gamma2 = max(gamma2, float(np.max(g_full)))
    ratio = gamma2 / gamma if gamma > 0 else 1.0
    return GainReport(
        gamma=gamma,
        gamma_doubled_horizon=gamma2,
        horizon_ratio=float(ratio),
        unstable_flag=bool(ratio >= UNSTABLE_RATIO),
        worst_input_id=worst[0],
        worst_tau=worst[1],
        sign=sign,
        horizon=family.horizon,
        sample_count=len(inputs),
        tau_count=int(taus.size),
    )
