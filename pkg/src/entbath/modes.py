"""Localized (bound) modes of the coupled center-of-mass channel.

A localized mode is a real zero of z(w) = omega_plus - w + Delta(w) below
the bath continuum (w < 0 for the Ohmic family). One forms exactly when the
coupling exceeds the critical value eta_c(s) = omega_plus/(2*omega_c*Gamma(s)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import gamma as gamma_fn

from .errors import ConfigError, RootRefinementError
from .model import ModelConfig
from .spectral import (
    SpectralDensityHandle,
    self_energy_shift,
    self_energy_shift_at_zero,
    self_energy_slope,
)

__all__ = ["LocalizedMode", "ModeSearch", "critical_coupling", "z_function",
           "find_localized_modes"]

_REL_TOL = 1e-12
_RESIDUAL_TOL = 1e-10
_LADDER_MAX = 12
_SCAN_PER_RUNG = 16


@dataclass(frozen=True)
class LocalizedMode:
    """Bound-mode frequency (negative) and its pole residue in (0, 1]."""

    frequency: float
    residue: float


@dataclass(frozen=True)
class ModeSearch:
    """Root-search outcome: all localized modes plus the marginal-coupling flag."""

    modes: tuple[LocalizedMode, ...]
    marginal: bool
    eta_c: float

    def __iter__(self):
        return iter(self.modes)

    def __len__(self):
        return len(self.modes)


def critical_coupling(s: float, omega_plus: float, omega_c: float) -> float:
    """Threshold coupling eta_c = omega_plus / (2 * omega_c * Gamma(s))."""
    if s <= 0:
        raise ConfigError("s", f"s must be > 0, got {s}")
    if omega_plus <= 0:
        raise ConfigError("omega_plus", f"omega_plus must be > 0, got {omega_plus}")
    if omega_c <= 0:
        raise ConfigError("omega_c", f"omega_c must be > 0, got {omega_c}")
    return omega_plus / (2.0 * omega_c * gamma_fn(s))


def z_function(handle: SpectralDensityHandle, omega_plus: float, omega: float) -> float:
    """z(w) = omega_plus - w + Delta(w); its zeros below the cut are the bound modes.

    At w = 0 the closed form of Delta(0) is used, so the sign of z(0) is
    exact at the threshold.
    """
    if omega == 0.0:
        return omega_plus + self_energy_shift_at_zero(handle)
    return omega_plus - omega + self_energy_shift(handle, omega)


def find_localized_modes(config: ModelConfig, handle: SpectralDensityHandle,
                         rel_tol: float = _REL_TOL) -> ModeSearch:
    """Locate all real zeros of z on w < 0 and their residues.

    Searches a geometric bracket ladder -omega_c * 2^k expanded until z
    changes sign; each rung is scanned on subintervals so that any violation
    of the expected single-root structure shows up as extra modes rather
    than being silently discarded. Below the threshold the closed-form
    certificate z(0) > 0 (z is strictly decreasing towards w = 0) proves the
    empty result without any quadrature.
    """
    p = handle.params
    eta_c = critical_coupling(p.s, config.omega_plus, p.omega_c)
    marginal = bool(np.isclose(p.eta, eta_c, rtol=1e-12, atol=0.0))
    z0 = z_function(handle, config.omega_plus, 0.0)
    if marginal or z0 >= 0.0 or p.eta == 0.0:
        # no sign change is possible: z(w) > z(0) >= 0 for all w < 0
        return ModeSearch(modes=(), marginal=marginal, eta_c=eta_c)

    z = lambda w: z_function(handle, config.omega_plus, w)

    lo = -p.omega_c
    z_lo = z(lo)
    k = 0
    while z_lo <= 0.0 and k < _LADDER_MAX:
        k += 1
        lo = -p.omega_c * 2.0**k
        z_lo = z(lo)
    if z_lo <= 0.0:
        raise RootRefinementError(
            "no sign change found while expanding the bracket ladder",
            bracket=(lo, 0.0, z_lo, z0),
        )

    # scan the bracket for sign changes; near w = 0 use geometric spacing so
    # shallowly bound roots (eta just above threshold) are still separated
    floor = min(1e-6 * p.omega_c, -lo * 1e-6)
    grid = -np.geomspace(-lo, floor, _SCAN_PER_RUNG * (k + 1))
    grid = np.append(grid, 0.0)
    values = np.array([z_lo] + [z(w) for w in grid[1:-1]] + [z0])

    modes = []
    for a, b, za, zb in zip(grid[:-1], grid[1:], values[:-1], values[1:]):
        if za == 0.0:
            root = a
        elif za * zb < 0.0:
            try:
                root = brentq(z, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps,
                              maxiter=200)
            except RuntimeError as exc:
                raise RootRefinementError(
                    f"bound-mode refinement failed: {exc}", bracket=(a, b, za, zb)
                ) from exc
        else:
            continue
        residual = abs(z(root))
        if residual > _RESIDUAL_TOL * config.omega0:
            raise RootRefinementError(
                f"refined root residual {residual:.3e} exceeds tolerance",
                bracket=(a, b, za, zb),
            )
        slope = self_energy_slope(handle, root)
        modes.append(LocalizedMode(frequency=root, residue=1.0 / (1.0 - slope)))

    return ModeSearch(modes=tuple(modes), marginal=marginal, eta_c=eta_c)
