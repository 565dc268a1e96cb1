"""Discrete Fourier machinery, the Hilbert transform, and the signed-phase pairing.

Conventions are pinned once, by calibration against LTI frequency responses
under the standard transform F{u}(w) = Integral u(t) e^(-jwt) dt:

* ``hilbert`` realizes convolution with 1/(pi t), i.e. the multiplier
  -j*sgn(w) on the spectrum, which maps cos to sin.
* ``hilbert_pairing`` returns Pi(u, y) with the sign fixed so that for an LTI
  map y = H u and a narrowband input at w0,

      Pi(u, y) / (||u|| ||y||)  ->  sin(arg H(jw0)).

  Equivalently Pi(u, y) = (1/pi) * Integral_0^inf Im{H(jw)} |U(w)|^2 dw, so
  phase-lead systems pair positive and phase-lag systems pair negative. In
  time-domain terms Pi(u, y) = -<hilbert(u), y> over the extended grid.

Everything is computed on a zero-padded FFT grid (default 4x) to keep the
circular wrap-around of the slowly decaying 1/(pi t) kernel below the
tolerances used elsewhere.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .signals import SampledSignal

DEFAULT_PAD_FACTOR = 4


def _check_pad(pad_factor: int):
    if int(pad_factor) != pad_factor or pad_factor < 1:
        raise ParameterError("pad_factor must be an integer >= 1")


def _sign_multiplier(n_fft: int) -> np.ndarray:
    """sgn(w) over the FFT bin layout; DC (and Nyquist, if present) get 0."""
    s = np.zeros(n_fft)
    half = n_fft // 2
    s[1:half] = 1.0
    if n_fft % 2 == 0:
        s[half + 1 :] = -1.0
    else:
        s[half + 1 :] = -1.0
        s[half] = 1.0
    return s


@dataclass(frozen=True)
class Spectrum:
    """Two-sided spectrum on an ascending frequency grid (rad/s).

    Coefficients approximate the continuous transform of the signal embedded
    on [0, inf): dt-scaled zero-padded DFT. ``n_fft`` and ``dt`` make the
    object invertible back to the padded time grid.
    """

    omega: np.ndarray
    coefficients: np.ndarray
    domega: float
    n_fft: int
    dt: float

    def __post_init__(self):
        om = np.asarray(self.omega, dtype=float)
        co = np.asarray(self.coefficients, dtype=complex)
        om.flags.writeable = False
        co.flags.writeable = False
        object.__setattr__(self, "omega", om)
        object.__setattr__(self, "coefficients", co)


def fourier(u: SampledSignal, pad_factor: int = DEFAULT_PAD_FACTOR) -> Spectrum:
    """dt-scaled zero-padded DFT of the embedded signal, ascending in omega."""
    _check_pad(pad_factor)
    n_fft = pad_factor * len(u)
    coeff = u.dt * np.fft.fft(u.samples, n_fft)
    omega = 2.0 * np.pi * np.fft.fftfreq(n_fft, d=u.dt)
    order = np.fft.fftshift(np.arange(n_fft))
    domega = 2.0 * np.pi / (n_fft * u.dt)
    return Spectrum(omega[order], coeff[order], domega, n_fft, u.dt)


def inverse_fourier(spec: Spectrum) -> SampledSignal:
    """Back to the padded time grid (starting at t = 0)."""
    coeff = np.fft.ifftshift(spec.coefficients) / spec.dt
    samples = np.fft.ifft(coeff).real
    return SampledSignal(samples, spec.dt, t0=0.0)


def hilbert(u: SampledSignal, pad_factor: int = DEFAULT_PAD_FACTOR) -> SampledSignal:
    """Hilbert transform of the embedding of ``u``, on a symmetric extended grid.

    The result is two-sided: the transform of a signal supported on [0, T]
    spills into negative time, so the returned signal starts at
    -(pad_factor*n/2)*dt. Energy matches ||u|| up to discretization error.
    """
    _check_pad(pad_factor)
    n_fft = pad_factor * len(u)
    fu = np.fft.fft(u.samples, n_fft)
    transformed = np.fft.ifft(-1j * _sign_multiplier(n_fft) * fu).real
    half = n_fft // 2
    # periodic grid: indices >= half represent negative time
    samples = np.concatenate([transformed[half:], transformed[:half]])
    return SampledSignal(samples, u.dt, t0=-half * u.dt)


def hilbert_pairing_arrays(
    u: np.ndarray, y: np.ndarray, dt: float, pad_factor: int = DEFAULT_PAD_FACTOR
) -> np.ndarray:
    """Pairing over the last axis of equally shaped sample arrays.

    Vectorized core shared by :func:`hilbert_pairing` and the cloud
    estimators; accepts (..., n) stacks.
    """
    _check_pad(pad_factor)
    u = np.asarray(u, dtype=float)
    y = np.asarray(y, dtype=float)
    if u.shape != y.shape:
        raise ParameterError("pairing needs equally shaped sample arrays")
    n_fft = pad_factor * u.shape[-1]
    fu = np.fft.fft(u, n_fft, axis=-1)
    fy = np.fft.fft(y, n_fft, axis=-1)
    sgn = _sign_multiplier(n_fft)
    # Re{ j*sgn * fu*conj(fy) } = -sgn * Im{ fu*conj(fy) }; exact antisymmetry
    # in (u, y) because Im(a*conj(b)) negates exactly under the swap.
    cross_im = fu.real * (-fy.imag) + fu.imag * fy.real
    return (dt / n_fft) * np.sum(sgn * (-cross_im), axis=-1)


def hilbert_pairing(
    u: SampledSignal, y: SampledSignal, pad_factor: int = DEFAULT_PAD_FACTOR
) -> float:
    """Signed-phase pairing Pi(u, y); positive for phase lead, negative for lag."""
    if not u.same_grid(y):
        from .errors import GridMismatchError

        raise GridMismatchError("pairing requires matching grids")
    return float(hilbert_pairing_arrays(u.samples, y.samples, u.dt, pad_factor))


def frequency_inner_product(
    u: SampledSignal, y: SampledSignal, pad_factor: int = DEFAULT_PAD_FACTOR
) -> float:
    """<u, y> evaluated through the DFT (Plancherel); matches the time domain."""
    _check_pad(pad_factor)
    n_fft = pad_factor * len(u)
    fu = np.fft.fft(u.samples, n_fft)
    fy = np.fft.fft(y.samples, n_fft)
    return float((u.dt / n_fft) * np.sum((fu * np.conj(fy)).real))


def spectrum_to_csv(spec: Spectrum, comments: list[str] | None = None) -> str:
    buf = io.StringIO()
    for line in comments or []:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["omega", "re", "im"])
    for w, c in zip(spec.omega, spec.coefficients):
        writer.writerow([f"{w:.15g}", f"{c.real:.15g}", f"{c.imag:.15g}"])
    return buf.getvalue()
