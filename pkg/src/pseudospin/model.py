"""Weak-measurement model of the two-detector pseudo-spin pointer.

The system is a qubit coupled to a Gaussian meter through
``U = exp(-i g A (x) u)``, where ``u`` is the meter variable whose sign
decides which detector fires. After post-selection the meter density is
``|M(u)|^2 G(u)`` with ``M(u) = <post| exp(-i g A u) |pre>`` and ``G`` a
zero-mean normal density of variance ``1/sigma**2``.

Two evaluation routes are provided: ``exact`` integrates that density with
adaptive Gauss-Kronrod quadrature, ``firstorder`` uses the closed-form
weak-value expansion.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy import integrate

from .errors import (
    AngleSingularity,
    QuadratureFailure,
    VanishingPostselection,
    ZeroOverlap,
)

EXACT = "exact"
FIRSTORDER = "firstorder"
MODES = (EXACT, FIRSTORDER)

SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)

#: Half-width of the integration window in meter standard deviations.
TAIL_CUTOFF = 8.0
QUAD_RTOL = 1e-10
PS_FLOOR = 1e-30
OVERLAP_EPS = 1e-14
_NORM_TOL = 1e-12


@dataclass(frozen=True)
class TwoLevelState:
    """Normalized pure state ``a1|a1> + a2|a2>`` of the system qubit."""

    a1: complex
    a2: complex

    def __post_init__(self):
        norm = abs(self.a1) ** 2 + abs(self.a2) ** 2
        if abs(norm - 1.0) > _NORM_TOL:
            raise ValueError(f"state is not normalized (|a1|^2+|a2|^2 = {norm!r})")

    @classmethod
    def normalized(cls, a1: complex, a2: complex) -> "TwoLevelState":
        n = math.sqrt(abs(a1) ** 2 + abs(a2) ** 2)
        return cls(complex(a1) / n, complex(a2) / n)

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.a1, self.a2], dtype=complex)

    def braket(self, other: "TwoLevelState") -> complex:
        """Inner product ``<self|other>``."""
        return complex(np.vdot(self.vector, other.vector))


@dataclass(frozen=True, eq=False)
class SystemObservable:
    matrix: np.ndarray = field(
        default_factory=lambda: np.diag([1.0, -1.0]).astype(complex)
    )

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError("observable must be a 2x2 matrix")
        if np.max(np.abs(m - m.conj().T)) > 1e-12:
            raise ValueError("observable must be Hermitian")
        object.__setattr__(self, "matrix", m)

    def eigensystem(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.linalg.eigh(self.matrix)


@dataclass(frozen=True)
class MeterSpec:
    """Gaussian meter; ``sigma`` in micrometres.

    The position amplitude is ``(2/(pi sigma^2))**0.25 * exp(-q^2/sigma^2)``,
    so the split variable ``u`` is normal with standard deviation ``1/sigma``.
    """

    sigma: float

    def __post_init__(self):
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise ValueError(f"meter width must be positive, got {self.sigma!r}")

    @property
    def u_std(self) -> float:
        return 1.0 / self.sigma

    def density(self, u):
        s = self.u_std
        return np.exp(-0.5 * (np.asarray(u) / s) ** 2) / (s * math.sqrt(2 * math.pi))


def postselect_angle_states(theta: float) -> Tuple[TwoLevelState, TwoLevelState]:
    """Pre-selected state and the post-selected state tilted by ``theta``.

    The phase of the post-selected state is fixed so that
    ``<post|pre> = sin(theta)``.
    """
    r = 1.0 / math.sqrt(2.0)
    pre = TwoLevelState(r + 0j, r + 0j)
    post = TwoLevelState(-1j * np.exp(1j * theta) * r, 1j * np.exp(-1j * theta) * r)
    return pre, post


@dataclass(frozen=True)
class WeakMeasurementModel:
    """Coupling strength ``g`` (micrometres) plus meter and system states.

    With ``post=None`` the model describes the angle family: the
    post-selected state is built from the ``theta`` passed to each
    operation. A fixed ``post`` turns ``theta`` arguments off.
    """

    g: float
    meter: MeterSpec
    pre: TwoLevelState = field(default_factory=lambda: postselect_angle_states(0.0)[0])
    post: Optional[TwoLevelState] = None
    obs: SystemObservable = field(default_factory=SystemObservable)

    @classmethod
    def from_ratio(cls, g_over_sigma: float, sigma: float = 1.0) -> "WeakMeasurementModel":
        return cls(g=g_over_sigma * sigma, meter=MeterSpec(sigma))

    @property
    def sigma(self) -> float:
        return self.meter.sigma

    @property
    def coupling_ratio(self) -> float:
        """Dimensionless coupling ``g/sigma``."""
        return self.g / self.meter.sigma

    @property
    def angle_family(self) -> bool:
        return self.post is None

    def states(self, theta: Optional[float]) -> Tuple[TwoLevelState, TwoLevelState]:
        if self.post is None:
            if theta is None:
                raise ValueError("angle-family model needs a post-selection angle")
            return self.pre, postselect_angle_states(theta)[1]
        if theta is not None:
            raise ValueError("model has a fixed post-selected state; pass theta=None")
        return self.pre, self.post


@dataclass(frozen=True)
class OutcomeProbabilities:
    p_plus: float
    p_minus: float
    p_ps: float

    @property
    def contrast(self) -> float:
        return self.p_plus - self.p_minus


def weak_value(
    pre: TwoLevelState,
    post: TwoLevelState,
    obs: Optional[SystemObservable] = None,
    eps: float = OVERLAP_EPS,
) -> complex:
    """``<post|A|pre> / <post|pre>``; raises ZeroOverlap for orthogonal states."""
    obs = obs or SystemObservable()
    overlap = post.braket(pre)
    if abs(overlap) < eps:
        raise ZeroOverlap(f"|<post|pre>| = {abs(overlap):.3e} < {eps:g}")
    num = complex(np.vdot(post.vector, obs.matrix @ pre.vector))
    return num / overlap


def _kraus_weights(model, theta):
    pre, post = model.states(theta)
    evals, evecs = model.obs.eigensystem()
    left = evecs.conj().T @ post.vector  # <e_k|post>
    right = evecs.conj().T @ pre.vector  # <e_k|pre>
    return evals, left.conj() * right


def _kraus_weight_slopes(model, theta):
    # d/dtheta of the weights for the angle family: d a1 = i a1, d a2 = -i a2
    if model.post is not None:
        raise ValueError("model has a fixed post-selected state; nothing to differentiate")
    pre, post = model.states(theta)
    dpost = np.array([1j * post.a1, -1j * post.a2])
    evals, evecs = model.obs.eigensystem()
    left = evecs.conj().T @ dpost
    right = evecs.conj().T @ pre.vector
    return left.conj() * right


def kraus_amplitude(u, model: WeakMeasurementModel, theta: Optional[float] = None):
    """``<post| exp(-i g A u) |pre>`` for scalar or array ``u`` (1/um)."""
    evals, weights = _kraus_weights(model, theta)
    u = np.asarray(u, dtype=float)
    phases = np.exp(-1j * model.g * np.multiply.outer(u, evals))
    return phases @ weights


def _postselected_density(model, theta):
    # integrand in standardized meter units t = u * sigma
    evals, weights = _kraus_weights(model, theta)
    k0, k1 = (complex(-1j * model.g * lam / model.meter.sigma) for lam in evals)
    w0, w1 = (complex(w) for w in weights)
    norm = 1.0 / math.sqrt(2 * math.pi)
    exp = cmath.exp

    def f(t):
        m = w0 * exp(k0 * t) + w1 * exp(k1 * t)
        return (m.real * m.real + m.imag * m.imag) * math.exp(-0.5 * t * t) * norm

    return f


def _postselected_density_slope(model, theta):
    # d/dtheta of the integrand above: 2 Re(conj(M) dM/dtheta) times the Gaussian
    evals, weights = _kraus_weights(model, theta)
    dweights = _kraus_weight_slopes(model, theta)
    k0, k1 = (complex(-1j * model.g * lam / model.meter.sigma) for lam in evals)
    w0, w1 = (complex(w) for w in weights)
    d0, d1 = (complex(w) for w in dweights)
    norm = 2.0 / math.sqrt(2 * math.pi)
    exp = cmath.exp

    def f(t):
        e0, e1 = exp(k0 * t), exp(k1 * t)
        m = w0 * e0 + w1 * e1
        dm = d0 * e0 + d1 * e1
        return (m.real * dm.real + m.imag * dm.imag) * math.exp(-0.5 * t * t) * norm

    return f


def _quad(f, a, b):
    value, abserr, info, *rest = integrate.quad(
        f, a, b, epsabs=0.0, epsrel=QUAD_RTOL, limit=200, full_output=1
    )
    if rest and value != 0.0 and abserr > QUAD_RTOL * abs(value):
        raise QuadratureFailure(f"{rest[0]} (estimate {value!r} +/- {abserr!r})")
    return value


def _split_integrals(theta, model):
    f = _postselected_density(model, theta)
    lower = _quad(f, -TAIL_CUTOFF, 0.0)
    upper = _quad(f, 0.0, TAIL_CUTOFF)
    return upper, lower


def postselection_probability(theta: Optional[float], model: WeakMeasurementModel) -> float:
    upper, lower = _split_integrals(theta, model)
    return min(max(upper + lower, 0.0), 1.0)


def outcome_probabilities_exact(
    theta: Optional[float], model: WeakMeasurementModel, floor: float = PS_FLOOR
) -> OutcomeProbabilities:
    """Detector probabilities from the post-selected density split at ``u = 0``."""
    return _from_split(*_split_integrals(theta, model), floor)


def _from_split(upper, lower, floor):
    p_ps = upper + lower
    if p_ps < floor:
        raise VanishingPostselection(f"P_ps = {p_ps:.3e} below floor {floor:g}")
    p_plus = upper / p_ps
    return OutcomeProbabilities(p_plus, 1.0 - p_plus, min(p_ps, 1.0))


def outcome_slope_exact(theta: float, model: WeakMeasurementModel) -> Tuple[OutcomeProbabilities, float]:
    """Exact probabilities and ``dp_plus/dtheta`` for the angle family.

    The derivative is integrated directly rather than differenced, so it
    carries the quadrature accuracy of the probabilities themselves.
    """
    upper, lower = _split_integrals(theta, model)
    probs = _from_split(upper, lower, PS_FLOOR)
    df = _postselected_density_slope(model, theta)
    d_lower = _quad(df, -TAIL_CUTOFF, 0.0)
    d_upper = _quad(df, 0.0, TAIL_CUTOFF)
    # p+ = U / (U + L)  =>  dp+ = (dU L - U dL) / (U + L)^2
    total = upper + lower
    return probs, (d_upper * lower - upper * d_lower) / (total * total)


def _check_angle(theta):
    s = np.sin(theta)
    if np.any(np.abs(s) < 1e-15):
        raise AngleSingularity("cot(theta) undefined at theta = 0 mod pi")
    return np.cos(theta) / s


def contrast_firstorder(theta, model: WeakMeasurementModel):
    """Closed-form contrast ``2 sqrt(2/pi) x / (1 + x^2)``, ``x = (g/sigma) cot(theta)``."""
    x = model.coupling_ratio * _check_angle(theta)
    return 2.0 * SQRT_2_OVER_PI * x / (1.0 + x * x)


def contrast_general_firstorder(
    theta: Optional[float], model: WeakMeasurementModel
) -> float:
    """First-order contrast for arbitrary pre/post states via the weak value.

    Only the imaginary part of the weak value shifts the split; the term
    quadratic in ``g`` that would carry a real-part offset is absent (its
    coefficient is zero for a Gaussian meter split at its centre).
    """
    pre, post = model.states(theta)
    aw = weak_value(pre, post, model.obs)
    sigma = model.meter.sigma
    alpha = SQRT_2_OVER_PI / sigma
    g = model.g
    return 2.0 * g * (alpha * aw).imag / (1.0 + (g / sigma) ** 2 * abs(aw) ** 2)


def outcome_probabilities_firstorder(theta: float, model: WeakMeasurementModel) -> OutcomeProbabilities:
    c = float(contrast_firstorder(theta, model))
    p_plus = 0.5 * (1.0 + c)
    eps = model.coupling_ratio
    p_ps = math.sin(theta) ** 2 + (eps * math.cos(theta)) ** 2
    return OutcomeProbabilities(p_plus, 1.0 - p_plus, min(p_ps, 1.0))


def outcome_probabilities(theta, model, mode: str = EXACT) -> OutcomeProbabilities:
    if mode == EXACT:
        return outcome_probabilities_exact(theta, model)
    if mode == FIRSTORDER:
        return outcome_probabilities_firstorder(theta, model)
    raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")


def contrast(theta, model, mode: str = EXACT) -> float:
    if mode == FIRSTORDER:
        return float(contrast_firstorder(theta, model))
    return outcome_probabilities(theta, model, mode).contrast
