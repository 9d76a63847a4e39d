"""Physical observables of the evolving two-mode Gaussian state.

Everything here is closed-form algebra on the mode moments
(n, sigma) = (<a^dag a>, <a a>): squeeze parameters, the effective thermal
occupation, symplectic eigenvalues, logarithmic negativities (the additive
physical total and the deliberately naive joint-state variant), Fock
distributions and quadrature variances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PhysicalityError

__all__ = [
    "ModeMoments",
    "SqueezeRecord",
    "EntanglementRecord",
    "LN2",
    "center_moments",
    "relative_moments",
    "effective_thermal_occupation",
    "squeeze_parameter",
    "symplectic_min",
    "log_negativity",
    "total_entanglement",
    "joint_log_negativity_naive",
    "entanglement_record",
    "thermal_fock_distribution",
    "quadrature_variances",
]

LN2 = math.log(2.0)
_PHYS_TOL = 1e-9


@dataclass(frozen=True)
class ModeMoments:
    """Occupation n = <a^dag a> and two-photon correlation sigma = <a a>."""

    n: float
    sigma: complex

    def __post_init__(self):
        gap = (self.n + 0.5) ** 2 - abs(self.sigma) ** 2
        if gap < -_PHYS_TOL * (self.n + 0.5) ** 2:
            raise PhysicalityError(
                f"moments n={self.n}, |sigma|={abs(self.sigma)} violate "
                "(n + 1/2)^2 >= |sigma|^2"
            )


@dataclass(frozen=True)
class SqueezeRecord:
    """Polar squeeze parameter and thermal occupation of the evolving state."""

    magnitude: float
    phase: float
    thermal_occupation: float


@dataclass(frozen=True)
class EntanglementRecord:
    """Additive entanglement bookkeeping plus the naive joint-state value."""

    en_plus: float
    en_minus: float
    en_total: float
    en_naive: float


def center_moments(u: complex, v: float, r: float) -> ModeMoments:
    """Center-of-mass moments driven by the Green functions:

        n = |u|^2 sinh^2 r + v,    sigma = -u^2 cosh r sinh r.
    """
    u = complex(u)
    abs_u2 = abs(u) ** 2
    n = abs_u2 * math.sinh(r) ** 2 + v
    sigma = -u * u * math.cosh(r) * math.sinh(r)
    return ModeMoments(n=n, sigma=sigma)


def relative_moments(r: float, omega_minus: float, t: float) -> ModeMoments:
    """Decoupled relative-mode moments: constant occupation, rotating phase.

    The initial squeeze of this mode has the opposite sign to the
    center-of-mass one, which fixes sigma(0) = +sinh r cosh r.
    """
    n = math.sinh(r) ** 2
    sigma = np.exp(-2j * omega_minus * t) * math.sinh(r) * math.cosh(r)
    return ModeMoments(n=n, sigma=complex(sigma))


def effective_thermal_occupation(m: ModeMoments) -> float:
    """nbar with nbar + 1/2 = sqrt((n + 1/2)^2 - |sigma|^2); zero for pure states."""
    gap = (m.n + 0.5) ** 2 - abs(m.sigma) ** 2
    if gap < 0.0:
        if gap < -_PHYS_TOL * (m.n + 0.5) ** 2:
            raise PhysicalityError(f"negative radicand {gap} in thermal occupation")
        gap = 0.0
    return math.sqrt(gap) - 0.5


def squeeze_parameter(m: ModeMoments) -> SqueezeRecord:
    """Polar decomposition of the evolving squeeze:

        |r| = (1/4) ln[(n + |sigma| + 1/2) / (n - |sigma| + 1/2)],
        phase = arg sigma (0 when sigma = 0).
    """
    abs_sigma = abs(m.sigma)
    if abs_sigma == 0.0:
        magnitude = 0.0
        phase = 0.0
    else:
        magnitude = 0.25 * math.log((m.n + abs_sigma + 0.5) / (m.n - abs_sigma + 0.5))
        phase = math.atan2(m.sigma.imag, m.sigma.real)
    return SqueezeRecord(
        magnitude=magnitude,
        phase=phase,
        thermal_occupation=effective_thermal_occupation(m),
    )


def symplectic_min(m: ModeMoments) -> float:
    """Smaller symplectic eigenvalue of the partially transposed state,

        lambda = sqrt(n - |sigma| + 1/2) / sqrt(2);

    >= 1/2 exactly when the state is separable.
    """
    rad = m.n - abs(m.sigma) + 0.5
    if rad <= 0.0:
        raise PhysicalityError(f"non-positive radicand {rad} in symplectic eigenvalue")
    return math.sqrt(0.5 * rad)


def log_negativity(lam: float) -> float:
    """E_N = max(0, -log2(2*lambda))."""
    if lam <= 0.0:
        raise PhysicalityError(f"symplectic eigenvalue must be positive, got {lam}")
    return max(0.0, -math.log2(2.0 * lam))


def total_entanglement(en_plus: float, r: float) -> float:
    """Additive total: the decoupled relative mode contributes r/ln2 at all times."""
    return en_plus + r / LN2


def _covariance_blocks(m_plus: ModeMoments, m_minus: ModeMoments):
    """4x4 covariance matrix of the original pair a1,2 = (a_+ ± a_-)/sqrt(2).

    Quadrature convention x = (a + a^dag)/sqrt(2), p = (a - a^dag)/(i sqrt(2)),
    vacuum variance 1/2. Cross moments between the + and - sectors vanish.
    """
    n1 = 0.5 * (m_plus.n + m_minus.n)
    sig1 = 0.5 * (m_plus.sigma + m_minus.sigma)
    c = 0.5 * (m_plus.sigma - m_minus.sigma)   # <a1 a2>
    d = 0.5 * (m_plus.n - m_minus.n)           # <a1^dag a2>, real
    A = np.array([
        [n1 + 0.5 + sig1.real, sig1.imag],
        [sig1.imag, n1 + 0.5 - sig1.real],
    ])
    C = np.array([
        [c.real + d, c.imag],
        [c.imag, d - c.real],
    ])
    return A, C


def joint_log_negativity_naive(m_plus: ModeMoments, m_minus: ModeMoments) -> float:
    """Logarithmic negativity computed directly on the joint covariance matrix.

    This reproduces the pitfall of applying the two-mode formula to the full
    state when it is really a product of a decohering sector and a
    decoherence-free one: the decoherence artificially bleeds into the
    protected share. Kept deliberately as the wrong reference route; the
    physical total is `total_entanglement`.
    """
    A, C = _covariance_blocks(m_plus, m_minus)
    # identical modes: B = A. det V via the Schur complement
    # det V = det A * det(A - C^T A^{-1} C), and the smaller PT symplectic
    # eigenvalue through the stable root 2 det V / (delta + sqrt(disc)) --
    # the big squeeze-scale cancellations would otherwise swamp it.
    det_a = _det2(A)
    det_c = _det2(C)
    adj = np.array([[A[1, 1], -A[0, 1]], [-A[1, 0], A[0, 0]]])
    schur = A - C.T @ adj @ C / det_a
    det_v = det_a * _det2(schur)
    # partial transpose of mode 2 flips the sign of det C
    delta = 2.0 * det_a - 2.0 * det_c
    disc = delta**2 - 4.0 * det_v
    if disc < 0.0:
        if disc < -_PHYS_TOL * max(1.0, delta**2):
            raise PhysicalityError(f"negative discriminant {disc} in joint negativity")
        disc = 0.0
    nu2 = 2.0 * det_v / (delta + math.sqrt(disc))
    if nu2 <= 0.0:
        raise PhysicalityError(f"non-positive symplectic eigenvalue squared {nu2}")
    return max(0.0, -math.log2(2.0 * math.sqrt(nu2)))


def _det2(m) -> float:
    return float(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])


def entanglement_record(m_plus: ModeMoments, r: float,
                        m_minus: ModeMoments | None = None) -> EntanglementRecord:
    """Bundle the additive entanglement and the naive joint value."""
    en_plus = log_negativity(symplectic_min(m_plus))
    en_minus = r / LN2
    if m_minus is None:
        m_minus = ModeMoments(n=math.sinh(r) ** 2,
                              sigma=math.sinh(r) * math.cosh(r))
    return EntanglementRecord(
        en_plus=en_plus,
        en_minus=en_minus,
        en_total=en_plus + en_minus,
        en_naive=joint_log_negativity_naive(m_plus, m_minus),
    )


def thermal_fock_distribution(nbar: float, n_max: int) -> np.ndarray:
    """Geometric Fock distribution p_n = nbar^n / (1 + nbar)^(n+1), n = 0..n_max."""
    if nbar < 0:
        raise PhysicalityError(f"nbar must be >= 0, got {nbar}")
    if n_max < 0:
        raise ValueError(f"n_max must be >= 0, got {n_max}")
    n = np.arange(n_max + 1)
    if nbar == 0.0:
        p = np.zeros(n_max + 1)
        p[0] = 1.0
        return p
    ratio = nbar / (1.0 + nbar)
    return ratio**n / (1.0 + nbar)


def quadrature_variances(record: SqueezeRecord) -> tuple[float, float]:
    """Squeezed/antisqueezed standard deviations

        (sqrt(nbar + 1/2) e^{-|r|}, sqrt(nbar + 1/2) e^{+|r|}).
    """
    scale = math.sqrt(record.thermal_occupation + 0.5)
    return scale * math.exp(-record.magnitude), scale * math.exp(record.magnitude)
