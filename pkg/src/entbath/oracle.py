"""Brute-force validator: exact dynamics of a finite discretized bath.

The continuum is replaced by K modes at panel midpoints with couplings
g_k^2 = J(omega_k) * (panel width), the closed (K+1)-mode quadratic system is
diagonalized once, and u(t), v(t) follow from the single-particle propagator
exactly. Independence and transparency are the point here, not speed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RecurrenceWindowError
from .model import BathParams, ModelConfig
from .spectral import SpectralDensityHandle, _substitution, bose_occupation, density

__all__ = ["DiscretizedBath", "discretize", "single_particle_matrix",
           "exact_propagator", "negative_eigenvalue_count"]


@dataclass(frozen=True)
class DiscretizedBath:
    """Bath modes (ascending frequencies), couplings, and the validity window.

    A finite bath re-coheres; comparisons are meaningful only up to about
    half the earliest pairwise recurrence 2*pi/max(level spacing), stored as
    ``t_valid``.
    """

    frequencies: np.ndarray
    couplings: np.ndarray
    t_valid: float

    @property
    def size(self) -> int:
        return len(self.frequencies)

    def total_coupling_weight(self) -> float:
        return float(np.sum(self.couplings**2))


def discretize(handle: SpectralDensityHandle, n_modes: int,
               omega_hi: float | None = None) -> DiscretizedBath:
    """Midpoint-rule bath: uniform panels on (0, omega_hi], in the
    substituted coordinate for s < 1 so sub-Ohmic weight near zero is kept."""
    if n_modes < 2:
        raise ValueError(f"need at least 2 bath modes, got {n_modes}")
    if omega_hi is None:
        omega_hi = handle.omega_max
    to_x, to_w, jac = _substitution(handle)
    edges = to_w(np.linspace(0.0, to_x(omega_hi), n_modes + 1))
    centers = to_w(0.5 * (np.linspace(0.0, to_x(omega_hi), n_modes + 1)[:-1]
                          + np.linspace(0.0, to_x(omega_hi), n_modes + 1)[1:]))
    widths = np.diff(edges)
    g2 = density(handle, centers) * widths
    spacing = np.diff(centers)
    max_gap = float(np.max(spacing)) if len(spacing) else omega_hi
    t_valid = np.pi / max_gap
    return DiscretizedBath(frequencies=centers, couplings=np.sqrt(g2),
                           t_valid=t_valid)


def single_particle_matrix(bath: DiscretizedBath, config: ModelConfig) -> np.ndarray:
    """(K+1)x(K+1) one-particle Hamiltonian; row 0 is the system mode.

    The system-bath rows carry sqrt(2)*g_k: the center-of-mass channel sees
    twice the single-mode spectral weight.
    """
    k = bath.size
    m = np.zeros((k + 1, k + 1))
    m[0, 0] = config.omega_plus
    m[np.arange(1, k + 1), np.arange(1, k + 1)] = bath.frequencies
    m[0, 1:] = np.sqrt(2.0) * bath.couplings
    m[1:, 0] = np.sqrt(2.0) * bath.couplings
    return m


def exact_propagator(bath: DiscretizedBath, config: ModelConfig,
                     bath_params: BathParams, times) -> tuple[np.ndarray, np.ndarray]:
    """Reference (u(t), v(t)) series from one eigendecomposition.

    u(t) = [e^{-iMt}]_00 and v(t) = sum_k nbar(omega_k, T) |[e^{-iMt}]_0k|^2.
    Raises RecurrenceWindowError when any requested time exceeds the bath's
    validity window.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(times < 0):
        raise ValueError("times must be >= 0")
    worst = float(times.max()) if times.size else 0.0
    if worst > bath.t_valid:
        raise RecurrenceWindowError(
            f"requested t = {worst:.3g} exceeds the bath validity window "
            f"{bath.t_valid:.3g} (K = {bath.size} too small for this span)"
        )
    m = single_particle_matrix(bath, config)
    evals, vecs = np.linalg.eigh(m)
    # row 0 of e^{-iMt}: sum_a vecs[0,a] e^{-i evals_a t} vecs[:,a]^T
    phases = np.exp(-1j * np.outer(times, evals))          # (T, K+1)
    row = (phases * vecs[0, :][None, :]) @ vecs.T.astype(complex)  # (T, K+1)
    u = row[:, 0]
    if bath_params.temperature == 0.0:
        v = np.zeros(len(times))
    else:
        occ = bose_occupation(bath.frequencies, bath_params.temperature)
        v = np.abs(row[:, 1:]) ** 2 @ occ
    return u, v


def negative_eigenvalue_count(bath: DiscretizedBath, config: ModelConfig) -> int:
    """Number of negative one-particle eigenvalues; the finite-bath image of
    the localized-mode count."""
    evals = np.linalg.eigvalsh(single_particle_matrix(bath, config))
    return int(np.sum(evals < 0.0))
