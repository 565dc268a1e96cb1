"""Finite-horizon sampled signals and the input families used to probe operators.

A :class:`SampledSignal` is a uniformly sampled real signal standing in for a
square-integrable function on [0, inf). All quadrature is the left rectangle
rule, so every inner product here is Sum u[i]*y[i]*dt. Generated probe inputs
are windowed so that the truncated horizon is a faithful surrogate for the
infinite-horizon integrals (the tail carries almost no energy) and are always
normalized to unit norm.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatchError, ParameterError

#: last fraction of the horizon inspected by the energy-tail criterion
TAIL_FRACTION = 0.05
#: maximum share of total energy the tail may carry
TAIL_ENERGY_LIMIT = 0.01

DEFAULT_DT = 0.01
DEFAULT_HORIZON = 60.0


@dataclass(frozen=True)
class SampledSignal:
    """Uniformly sampled real signal; immutable after construction.

    ``t0`` is the time of the first sample. Signals produced by probing an
    operator start at 0; Hilbert transforms are two-sided and start negative.
    """

    samples: np.ndarray
    dt: float
    t0: float = 0.0

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise ParameterError("signal samples must be a nonempty 1-d array")
        if not np.all(np.isfinite(arr)):
            raise ParameterError("signal samples must be finite")
        if not (self.dt > 0.0):
            raise ParameterError(f"dt must be positive, got {self.dt}")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)

    def __len__(self):
        return self.samples.size

    @property
    def horizon(self) -> float:
        return self.samples.size * self.dt

    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.samples.size)

    def same_grid(self, other: "SampledSignal") -> bool:
        return (
            self.samples.size == other.samples.size
            and self.dt == other.dt
            and self.t0 == other.t0
        )

    def zero_extended(self, n: int) -> "SampledSignal":
        """Return a copy zero-padded at the end to n samples."""
        if n < self.samples.size:
            raise ParameterError("zero_extended cannot shrink a signal")
        out = np.zeros(n)
        out[: self.samples.size] = self.samples
        return SampledSignal(out, self.dt, self.t0)


def _require_same_grid(u: SampledSignal, y: SampledSignal):
    if not u.same_grid(y):
        raise GridMismatchError(
            f"grids differ: ({len(u)}, dt={u.dt}, t0={u.t0}) vs "
            f"({len(y)}, dt={y.dt}, t0={y.t0}); zero-extend explicitly first"
        )


def inner_product(u: SampledSignal, y: SampledSignal) -> float:
    """Rectangle-rule L2 inner product over the shared grid."""
    _require_same_grid(u, y)
    return float(np.dot(u.samples, y.samples) * u.dt)


def norm(u: SampledSignal) -> float:
    return float(np.sqrt(np.dot(u.samples, u.samples) * u.dt))


def tail_energy_fraction(u: SampledSignal, tail: float = TAIL_FRACTION) -> float:
    """Share of signal energy carried by the last ``tail`` fraction of samples."""
    total = float(np.dot(u.samples, u.samples))
    if total == 0.0:
        return 0.0
    m = max(1, int(round(tail * len(u))))
    return float(np.dot(u.samples[-m:], u.samples[-m:])) / total


# ---------------------------------------------------------------------------
# windows
# ---------------------------------------------------------------------------


def raised_cosine_window(n: int, taper: float = 0.1) -> np.ndarray:
    """Flat window with raised-cosine ramps over the first/last ``taper`` fraction."""
    if not (0.0 <= taper <= 0.5):
        raise ParameterError("taper must lie in [0, 0.5]")
    w = np.ones(n)
    m = int(round(taper * n))
    if m > 0:
        ramp = 0.5 * (1.0 - np.cos(np.pi * np.arange(m) / m))
        w[:m] = ramp
        w[-m:] = ramp[::-1]
    return w


def hann_window(n: int) -> np.ndarray:
    return 0.5 * (1.0 - np.cos(2.0 * np.pi * np.arange(n) / n))


_WINDOWS = {"tukey": raised_cosine_window, "hann": lambda n: hann_window(n)}


# ---------------------------------------------------------------------------
# input families
# ---------------------------------------------------------------------------

_KINDS = ("multisine", "filtered-noise", "chirp", "windowed-pulse")


@dataclass(frozen=True)
class InputFamily:
    """Deterministic family of unit-norm probe signals.

    The same (kind, parameters, seed, count) always regenerates identical
    signals; signal ``i`` draws from an independent stream keyed by
    (seed, i), so generation order does not matter.
    """

    kind: str = "multisine"
    horizon: float = DEFAULT_HORIZON
    dt: float = DEFAULT_DT
    count: int = 1
    seed: int = 0
    omega_min: float = 0.2
    omega_max: float = 5.0
    lines: int = 8
    window: str = "tukey"
    taper: float = 0.1
    omegas: tuple[float, ...] | None = None  # fixed frequency grid, overrides draws

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ParameterError(f"unknown input kind {self.kind!r}; choose from {_KINDS}")
        if self.count < 1:
            raise ParameterError("count must be >= 1")
        if self.seed < 0:
            raise ParameterError("seed must be a nonnegative integer")
        if not (self.dt > 0.0 and self.horizon > 0.0):
            raise ParameterError("dt and horizon must be positive")
        if self.window not in _WINDOWS:
            raise ParameterError(f"unknown window {self.window!r}")
        nyquist = np.pi / self.dt
        top = max(self.omegas) if self.omegas else self.omega_max
        low = min(self.omegas) if self.omegas else self.omega_min
        if top >= nyquist:
            raise ParameterError(
                f"frequency {top} rad/s is at or above the Nyquist rate {nyquist:.3f}"
            )
        if low <= 0.0:
            raise ParameterError("frequencies must be positive")
        if self.omegas is None and not (self.omega_min < self.omega_max):
            raise ParameterError("omega_min must be below omega_max")

    @property
    def n_samples(self) -> int:
        return int(round(self.horizon / self.dt))

    def describe(self) -> dict:
        d = {
            "kind": self.kind,
            "horizon": self.horizon,
            "dt": self.dt,
            "count": self.count,
            "seed": self.seed,
            "omega_min": self.omega_min,
            "omega_max": self.omega_max,
            "lines": self.lines,
            "window": self.window,
            "taper": self.taper,
        }
        if self.omegas is not None:
            d["omegas"] = list(self.omegas)
        return d


def narrowband_family(
    omega: float,
    horizon: float = DEFAULT_HORIZON,
    dt: float = DEFAULT_DT,
    count: int = 1,
    seed: int = 0,
) -> InputFamily:
    """Single-line multisine under a Hann window: the standard narrowband probe."""
    return InputFamily(
        kind="multisine",
        horizon=horizon,
        dt=dt,
        count=count,
        seed=seed,
        omegas=(float(omega),),
        window="hann",
    )


def _draw_omegas(family: InputFamily, rng: np.random.Generator) -> np.ndarray:
    if family.omegas is not None:
        return np.asarray(family.omegas, dtype=float)
    lo, hi = np.log(family.omega_min), np.log(family.omega_max)
    return np.exp(rng.uniform(lo, hi, size=family.lines))


def _multisine(family: InputFamily, rng, t):
    omegas = _draw_omegas(family, rng)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=omegas.size)
    u = np.zeros_like(t)
    for w, ph in zip(omegas, phases):
        u += np.sin(w * t + ph)
    return u


def _filtered_noise(family: InputFamily, rng, t):
    n = t.size
    white = rng.standard_normal(n)
    spec = np.fft.rfft(white)
    om = 2.0 * np.pi * np.fft.rfftfreq(n, d=family.dt)
    lo, hi = family.omega_min, family.omega_max
    roll = 0.1 * (hi - lo)
    mask = np.zeros_like(om)
    core = (om >= lo + roll) & (om <= hi - roll)
    mask[core] = 1.0
    up = (om >= lo) & (om < lo + roll)
    mask[up] = 0.5 * (1.0 - np.cos(np.pi * (om[up] - lo) / roll))
    down = (om > hi - roll) & (om <= hi)
    mask[down] = 0.5 * (1.0 - np.cos(np.pi * (hi - om[down]) / roll))
    return np.fft.irfft(spec * mask, n)


def _chirp(family: InputFamily, rng, t):
    T = family.horizon
    w0, w1 = family.omega_min, family.omega_max
    phase = w0 * t + 0.5 * (w1 - w0) * t * t / T
    return np.sin(phase + rng.uniform(0.0, 2.0 * np.pi))


def _windowed_pulse(family: InputFamily, rng, t):
    T = family.horizon
    center = rng.uniform(0.3 * T, 0.7 * T)
    width = rng.uniform(T / 40.0, T / 10.0)
    carrier = np.exp(rng.uniform(np.log(family.omega_min), np.log(family.omega_max)))
    bump = np.exp(-0.5 * ((t - center) / width) ** 2)
    return bump * np.cos(carrier * t + rng.uniform(0.0, 2.0 * np.pi))


_BUILDERS = {
    "multisine": _multisine,
    "filtered-noise": _filtered_noise,
    "chirp": _chirp,
    "windowed-pulse": _windowed_pulse,
}


def generate_input(family: InputFamily, index: int) -> SampledSignal:
    """Generate the ``index``-th signal of the family (pure in its arguments)."""
    if not (0 <= index < family.count):
        raise ParameterError(f"index {index} outside [0, {family.count})")
    rng = np.random.default_rng([family.seed, index])
    t = family.dt * np.arange(family.n_samples)
    raw = _BUILDERS[family.kind](family, rng, t)
    win = _WINDOWS[family.window](family.n_samples) if family.window == "hann" else (
        raised_cosine_window(family.n_samples, family.taper)
    )
    u = raw * win
    scale = np.sqrt(np.dot(u, u) * family.dt)
    if scale == 0.0:
        raise ParameterError(f"family produced a zero signal at index {index}")
    sig = SampledSignal(u / scale, family.dt)
    frac = tail_energy_fraction(sig)
    if frac >= TAIL_ENERGY_LIMIT:
        raise ParameterError(
            f"signal {index} fails the energy-tail criterion ({frac:.3g} of the "
            f"energy in the last {TAIL_FRACTION:.0%}); lengthen the horizon"
        )
    return sig


def generate_inputs(family: InputFamily) -> list[SampledSignal]:
    return [generate_input(family, i) for i in range(family.count)]


# ---------------------------------------------------------------------------
# CSV serialization: header "t,value", 15 significant digits
# ---------------------------------------------------------------------------


def signal_to_csv(u: SampledSignal, comments: list[str] | None = None) -> str:
    buf = io.StringIO()
    for line in comments or []:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t", "value"])
    for t, v in zip(u.times(), u.samples):
        writer.writerow([f"{t:.15g}", f"{v:.15g}"])
    return buf.getvalue()


def signal_from_csv(text: str) -> SampledSignal:
    rows = [
        line for line in text.splitlines() if line.strip() and not line.startswith("#")
    ]
    if not rows or rows[0].split(",")[0].strip() != "t":
        raise ParameterError("signal CSV must start with a 't,value' header")
    data = np.array(
        [[float(x) for x in line.split(",")] for line in rows[1:]], dtype=float
    )
    if data.shape[0] < 2:
        raise ParameterError("signal CSV needs at least two samples")
    t, v = data[:, 0], data[:, 1]
    steps = np.diff(t)
    dt = float(np.median(steps))
    if not np.allclose(steps, dt, rtol=1e-6, atol=1e-12):
        raise ParameterError("signal CSV time grid is not uniform")
    return SampledSignal(v, dt, t0=float(t[0]))
