"""Operator models H: L2 -> L2, their time-domain simulation, and frequency responses.

Models are immutable descriptions; simulation compiles a model into a per-call
stepper, so concurrent simulations of one model never share state. LTI blocks
are stepped with the exact zero-order-hold discretization (matrix exponential
of the augmented [[A, B], [0, 0]] block); static nonlinearities apply
pointwise; compositions evaluate recursively. Algebraic loops (direct
feedthrough around a feedback path) are solved per step by damped fixed-point
iteration, and divergence is surfaced rather than hidden.

All LTI blocks must be proper and Hurwitz-stable; this is enforced at
construction because the downstream separation theorems presuppose open-loop
stable blocks, and a cloud estimated from an unstable block is meaningless.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import (
    CatalogError,
    LoopDivergenceError,
    ParameterError,
    UnstableModelError,
    UnsupportedModelError,
)
from .signals import SampledSignal

_HURWITZ_TOL = 0.0  # strict: every real part must be < 0

# algebraic loop solver constants
_LOOP_RELAX = 0.5
_LOOP_TOL = 1e-10
_LOOP_MAX_ITER = 100


class OperatorModel:
    """Base class; concrete variants below."""

    def is_lti(self) -> bool:
        return False

    def to_config(self) -> dict:
        raise NotImplementedError

    def _stepper(self, dt: float, batch: int):
        raise NotImplementedError


def _check_hurwitz(eigs: np.ndarray, what: str):
    if eigs.size and np.max(eigs.real) >= _HURWITZ_TOL:
        worst = eigs[np.argmax(eigs.real)]
        raise UnstableModelError(
            f"{what} is not Hurwitz-stable (eigenvalue/root at {worst:.6g})"
        )


@dataclass(frozen=True)
class TransferFunction(OperatorModel):
    """SISO rational transfer function, coefficients in descending powers of s."""

    num: tuple[float, ...]
    den: tuple[float, ...]

    def __post_init__(self):
        num = tuple(float(c) for c in self.num)
        den = tuple(float(c) for c in self.den)
        if not den or den[0] == 0.0:
            raise ParameterError("denominator must be nonempty with nonzero leading coefficient")
        if not num:
            raise ParameterError("numerator must be nonempty")
        # strip leading numerator zeros so the properness check is meaningful
        k = next((i for i, c in enumerate(num) if c != 0.0), len(num) - 1)
        num = num[k:]
        if len(num) > len(den):
            raise ParameterError("transfer function must be proper (deg num <= deg den)")
        if len(den) > 1:
            _check_hurwitz(np.roots(den), "transfer function denominator")
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def is_lti(self) -> bool:
        return True

    def state_space(self) -> "StateSpace":
        """Controllable canonical realization."""
        den = np.asarray(self.den, float)
        num = np.asarray(self.num, float)
        den0 = den[0]
        den = den / den0
        num = num / den0
        n = den.size - 1
        full = np.zeros(n + 1)
        full[n + 1 - num.size :] = num
        d = full[0]
        rem = full - d * den  # strictly proper remainder
        A = np.zeros((n, n))
        if n > 1:
            A[:-1, 1:] = np.eye(n - 1)
        if n > 0:
            A[-1, :] = -den[1:][::-1]
        B = np.zeros(n)
        if n > 0:
            B[-1] = 1.0
        C = rem[1:][::-1].copy()
        return StateSpace(A, B.reshape(-1, 1), C.reshape(1, -1), np.array([[d]]))

    def to_config(self) -> dict:
        return {"type": "tf", "num": list(self.num), "den": list(self.den)}

    def _stepper(self, dt, batch):
        return self.state_space()._stepper(dt, batch)


@dataclass(frozen=True, eq=False)
class StateSpace(OperatorModel):
    """SISO state-space block (A, B, C, D)."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, float))
        B = np.asarray(self.B, float).reshape(A.shape[0], -1)
        C = np.asarray(self.C, float).reshape(-1, A.shape[0]) if A.shape[0] else np.zeros((1, 0))
        D = np.atleast_2d(np.asarray(self.D, float))
        if A.shape[0] != A.shape[1]:
            raise ParameterError("A must be square")
        if B.shape[1] != 1 or C.shape[0] != 1 or D.shape != (1, 1):
            raise ParameterError("only SISO state-space blocks are supported")
        if A.size:
            _check_hurwitz(np.linalg.eigvals(A), "state matrix")
        for arr in (A, B, C, D):
            arr.flags.writeable = False
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "D", D)

    def is_lti(self) -> bool:
        return True

    def to_config(self) -> dict:
        return {
            "type": "ss",
            "A": self.A.tolist(),
            "B": self.B.tolist(),
            "C": self.C.tolist(),
            "D": self.D.tolist(),
        }

    def discretize(self, dt: float) -> tuple[np.ndarray, np.ndarray]:
        """Exact ZOH pair (Ad, Bd)."""
        n = self.A.shape[0]
        if n == 0:
            return np.zeros((0, 0)), np.zeros(0)
        M = np.zeros((n + 1, n + 1))
        M[:n, :n] = self.A
        M[:n, n] = self.B[:, 0]
        E = expm(M * dt)
        return E[:n, :n], E[:n, n]

    def _stepper(self, dt, batch):
        Ad, Bd = self.discretize(dt)
        return _LtiStepper(Ad, Bd, self.C[0], float(self.D[0, 0]), batch)


_STATIC_KINDS = ("saturation", "deadzone", "relu", "cubic", "gain")


@dataclass(frozen=True)
class StaticNonlinearity(OperatorModel):
    """Memoryless map applied pointwise; always fixes 0 to 0."""

    kind: str
    limit: float = 1.0   # saturation
    width: float = 1.0   # deadzone
    coeff: float = 1.0   # cubic
    k: float = 1.0       # gain

    def __post_init__(self):
        if self.kind not in _STATIC_KINDS:
            raise ParameterError(f"unknown static kind {self.kind!r}; choose from {_STATIC_KINDS}")
        if self.kind == "saturation" and not self.limit > 0:
            raise ParameterError("saturation limit must be positive")
        if self.kind == "deadzone" and not self.width > 0:
            raise ParameterError("deadzone width must be positive")

    def apply(self, u: np.ndarray) -> np.ndarray:
        if self.kind == "saturation":
            return np.clip(u, -self.limit, self.limit)
        if self.kind == "deadzone":
            return np.sign(u) * np.maximum(np.abs(u) - self.width, 0.0)
        if self.kind == "relu":
            return np.maximum(u, 0.0)
        if self.kind == "cubic":
            return self.coeff * u**3
        return self.k * u

    def to_config(self) -> dict:
        cfg = {"type": "static", "kind": self.kind}
        if self.kind == "saturation":
            cfg["limit"] = self.limit
        elif self.kind == "deadzone":
            cfg["width"] = self.width
        elif self.kind == "cubic":
            cfg["coeff"] = self.coeff
        elif self.kind == "gain":
            cfg["k"] = self.k
        return cfg

    def _stepper(self, dt, batch):
        return _StaticStepper(self.apply)


@dataclass(frozen=True)
class Series(OperatorModel):
    """y = right(left(u)); the signal flows left to right."""

    left: OperatorModel
    right: OperatorModel

    def is_lti(self) -> bool:
        return self.left.is_lti() and self.right.is_lti()

    def to_config(self) -> dict:
        return {"type": "series", "left": self.left.to_config(), "right": self.right.to_config()}

    def _stepper(self, dt, batch):
        return _SeriesStepper(self.left._stepper(dt, batch), self.right._stepper(dt, batch))


@dataclass(frozen=True)
class Parallel(OperatorModel):
    left: OperatorModel
    right: OperatorModel

    def is_lti(self) -> bool:
        return self.left.is_lti() and self.right.is_lti()

    def to_config(self) -> dict:
        return {"type": "parallel", "left": self.left.to_config(), "right": self.right.to_config()}

    def _stepper(self, dt, batch):
        return _ParallelStepper(self.left._stepper(dt, batch), self.right._stepper(dt, batch))


@dataclass(frozen=True)
class Feedback(OperatorModel):
    """y = forward(e) with e = u + sign * backward(y)."""

    forward: OperatorModel
    backward: OperatorModel
    sign: int = -1

    def __post_init__(self):
        if self.sign not in (-1, 1):
            raise ParameterError("feedback sign must be -1 or +1")

    def is_lti(self) -> bool:
        return self.forward.is_lti() and self.backward.is_lti()

    def to_config(self) -> dict:
        return {
            "type": "feedback",
            "forward": self.forward.to_config(),
            "backward": self.backward.to_config(),
            "sign": self.sign,
        }

    def _stepper(self, dt, batch):
        return _FeedbackStepper(
            self.forward._stepper(dt, batch), self.backward._stepper(dt, batch), self.sign
        )


@dataclass(frozen=True)
class Scale(OperatorModel):
    """y = factor * inner(u)."""

    inner: OperatorModel
    factor: float

    def is_lti(self) -> bool:
        return self.inner.is_lti()

    def to_config(self) -> dict:
        return {"type": "scale", "factor": self.factor, "inner": self.inner.to_config()}

    def _stepper(self, dt, batch):
        return _ScaleStepper(self.inner._stepper(dt, batch), self.factor)


# ---------------------------------------------------------------------------
# steppers: out(u) is pure, advance(u) commits state; u has shape (batch,)
# ---------------------------------------------------------------------------


class _LtiStepper:
    def __init__(self, Ad, Bd, C, D, batch):
        self.Ad = Ad
        self.Bd = Bd
        self.C = C
        self.D = D
        self.x = np.zeros((batch, Ad.shape[0]))

    def out(self, u):
        return self.x @ self.C + self.D * u

    def advance(self, u):
        self.x = self.x @ self.Ad.T + u[:, None] * self.Bd[None, :]


class _StaticStepper:
    def __init__(self, fn):
        self.fn = fn

    def out(self, u):
        return self.fn(u)

    def advance(self, u):
        pass


class _SeriesStepper:
    def __init__(self, left, right):
        self.left = left
        self.right = right

    def out(self, u):
        return self.right.out(self.left.out(u))

    def advance(self, u):
        mid = self.left.out(u)
        self.left.advance(u)
        self.right.advance(mid)


class _ParallelStepper:
    def __init__(self, left, right):
        self.left = left
        self.right = right

    def out(self, u):
        return self.left.out(u) + self.right.out(u)

    def advance(self, u):
        self.left.advance(u)
        self.right.advance(u)


class _ScaleStepper:
    def __init__(self, inner, factor):
        self.inner = inner
        self.factor = factor

    def out(self, u):
        return self.factor * self.inner.out(u)

    def advance(self, u):
        self.inner.advance(u)


def solve_fixed_point(update, x0: np.ndarray) -> np.ndarray:
    """Damped fixed-point solve of x = update(x); raises on divergence.

    Converges in one sweep when update does not actually depend on x (no
    direct feedthrough), so strictly proper paths cost nothing extra.
    """
    x = x0
    for _ in range(_LOOP_MAX_ITER):
        x_new = (1.0 - _LOOP_RELAX) * x + _LOOP_RELAX * update(x)
        if not np.all(np.isfinite(x_new)):
            raise LoopDivergenceError("algebraic loop produced non-finite values")
        delta = np.max(np.abs(x_new - x))
        x = x_new
        if delta <= _LOOP_TOL * (1.0 + np.max(np.abs(x))):
            return x
    raise LoopDivergenceError(
        f"algebraic loop did not converge within {_LOOP_MAX_ITER} iterations"
    )


class _FeedbackStepper:
    def __init__(self, forward, backward, sign):
        self.forward = forward
        self.backward = backward
        self.sign = sign

    def _solve_e(self, u):
        return solve_fixed_point(
            lambda e: u + self.sign * self.backward.out(self.forward.out(e)), u.copy()
        )

    def out(self, u):
        return self.forward.out(self._solve_e(u))

    def advance(self, u):
        e = self._solve_e(u)
        y = self.forward.out(e)
        self.forward.advance(e)
        self.backward.advance(y)


# ---------------------------------------------------------------------------
# simulation
# ---------------------------------------------------------------------------


def simulate_arrays(model: OperatorModel, U: np.ndarray, dt: float) -> np.ndarray:
    """Simulate a batch of inputs, shape (batch, n) -> (batch, n)."""
    U = np.asarray(U, dtype=float)
    if U.ndim != 2:
        raise ParameterError("simulate_arrays expects a (batch, n) array")
    stepper = model._stepper(dt, U.shape[0])
    Y = np.empty_like(U)
    for k in range(U.shape[1]):
        u_k = U[:, k]
        try:
            Y[:, k] = stepper.out(u_k)
            stepper.advance(u_k)
        except LoopDivergenceError as exc:
            raise LoopDivergenceError(f"{exc} (at step {k})", step=k) from None
    return Y


def simulate(model: OperatorModel, u: SampledSignal) -> SampledSignal:
    """y = H(u) on the same grid."""
    y = simulate_arrays(model, u.samples[None, :], u.dt)[0]
    return SampledSignal(y, u.dt, u.t0)


# ---------------------------------------------------------------------------
# frequency response (LTI models and LTI compositions only)
# ---------------------------------------------------------------------------


def freq_response(model: OperatorModel, omega):
    """H(jw) under the standard convention; scalar in, complex out (or arrays)."""
    w = np.asarray(omega, dtype=float)
    s = 1j * w
    if isinstance(model, TransferFunction):
        out = np.polyval(model.num, s) / np.polyval(model.den, s)
    elif isinstance(model, StateSpace):
        n = model.A.shape[0]
        if n == 0:
            out = np.full(s.shape, complex(model.D[0, 0])) if s.ndim else complex(model.D[0, 0])
        else:
            flat = np.atleast_1d(s)
            vals = np.empty(flat.shape, dtype=complex)
            for i, si in enumerate(flat):
                vals[i] = (
                    model.C @ np.linalg.solve(si * np.eye(n) - model.A, model.B)
                )[0, 0] + model.D[0, 0]
            out = vals.reshape(s.shape) if s.ndim else vals[0]
    elif isinstance(model, Series):
        out = freq_response(model.left, omega) * freq_response(model.right, omega)
    elif isinstance(model, Parallel):
        out = freq_response(model.left, omega) + freq_response(model.right, omega)
    elif isinstance(model, Scale):
        out = model.factor * freq_response(model.inner, omega)
    elif isinstance(model, Feedback):
        ff = freq_response(model.forward, omega)
        fb = freq_response(model.backward, omega)
        out = ff / (1.0 - model.sign * ff * fb)
    else:
        raise UnsupportedModelError(
            f"frequency response is undefined for {type(model).__name__}"
        )
    if np.ndim(omega) == 0:
        return complex(out)
    return out


# ---------------------------------------------------------------------------
# JSON model documents
# ---------------------------------------------------------------------------


def model_from_config(doc: dict) -> OperatorModel:
    """Build a model from its JSON description; see README for the schema."""
    if not isinstance(doc, dict) or "type" not in doc:
        raise ParameterError("model document must be an object with a 'type' field")
    t = doc["type"]
    try:
        if t == "tf":
            return TransferFunction(tuple(doc["num"]), tuple(doc["den"]))
        if t == "ss":
            return StateSpace(
                np.array(doc["A"], float),
                np.array(doc["B"], float),
                np.array(doc["C"], float),
                np.array(doc["D"], float),
            )
        if t == "static":
            kind = doc["kind"]
            kwargs = {}
            for key in ("limit", "width", "coeff", "k"):
                if key in doc:
                    kwargs[key] = float(doc[key])
            return StaticNonlinearity(kind, **kwargs)
        if t == "series":
            return Series(model_from_config(doc["left"]), model_from_config(doc["right"]))
        if t == "parallel":
            return Parallel(model_from_config(doc["left"]), model_from_config(doc["right"]))
        if t == "feedback":
            return Feedback(
                model_from_config(doc["forward"]),
                model_from_config(doc["backward"]),
                int(doc.get("sign", -1)),
            )
        if t == "scale":
            return Scale(model_from_config(doc["inner"]), float(doc["factor"]))
    except KeyError as exc:
        raise ParameterError(f"model document of type {t!r} is missing field {exc}") from None
    raise ParameterError(f"unknown model type {t!r}")


# ---------------------------------------------------------------------------
# analytic region catalog for the first-order lead/lag filters and the
# second-order plant k/(s+1)^2
# ---------------------------------------------------------------------------

CATALOG_ENTRIES = (
    "lead-circle",
    "lag-circle",
    "lead-inverse-halfline",
    "lag-inverse-halfline",
    "second-order-perimeter",
)


def second_order_perimeter_point(phi, k: float):
    """Boundary of the scaled graph of k/(s+1)^2: k*cos(phi/2)^2 * e^(-j*phi)."""
    phi = np.asarray(phi, dtype=float)
    return k * np.cos(phi / 2.0) ** 2 * np.exp(-1j * phi)


def analytic_region(entry: str, k: float | None = None, signed: bool = True, samples: int = 2048):
    """Region object for a catalog entry.

    With ``signed=True`` the half-plane restrictions carried by the signed
    scaled graphs are attached: lead variants keep Im >= 0, lag variants keep
    Im <= 0, and the second-order plant keeps its lower half (its frequency
    response lags at every frequency). ``signed=False`` returns the full,
    conjugate-symmetric sets.
    """
    from . import geometry

    if entry == "second-order-perimeter":
        if k is None or not k > 0:
            raise CatalogError(f"catalog entry {entry!r} requires a positive gain k")
        if signed:
            # lower-half boundary arc plus the real-axis chord back to k
            def fn(s):
                s = np.asarray(s, dtype=float)
                arc = second_order_perimeter_point(np.pi * s, k)
                chord = (s - 1.0) * k + 0j
                return np.where(s <= 1.0, arc, chord)

            return geometry.ParametricPerimeter(
                fn, 0.0, 2.0, filled=True, samples=samples, lipschitz=np.pi * k
            )
        return geometry.ParametricPerimeter(
            lambda phi: second_order_perimeter_point(phi, k),
            -np.pi,
            np.pi,
            filled=True,
            samples=samples,
            lipschitz=k,
        )
    if entry in ("lead-circle", "lag-circle"):
        lo, hi = (0.0, np.pi) if (entry == "lead-circle" and signed) else (-np.pi, np.pi)
        if entry == "lag-circle" and signed:
            lo, hi = -np.pi, 0.0
        return geometry.ParametricPerimeter(
            lambda t: 0.5 + 0.5 * np.exp(1j * np.asarray(t, dtype=float)),
            lo,
            hi,
            filled=False,
            samples=samples,
            lipschitz=0.5,
        )
    if entry == "lead-inverse-halfline":
        if signed:
            return geometry.VerticalLine(1.0, -np.inf, 0.0)
        return geometry.VerticalLine(1.0)
    if entry == "lag-inverse-halfline":
        if signed:
            return geometry.VerticalLine(1.0, 0.0, np.inf)
        return geometry.VerticalLine(1.0)
    raise CatalogError(f"unknown catalog entry {entry!r}; choose from {CATALOG_ENTRIES}")
