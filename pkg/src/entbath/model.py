"""Physical configuration and unit conventions.

Units: the bare mode frequency omega0 sets the energy unit (omega0 = 1 by
default) and 1/omega0 the time unit; hbar = k_B = 1 throughout, so the
inverse temperature is beta = 1/T.
"""

from __future__ import annotations

import configparser
import io
import warnings
from dataclasses import dataclass, field, fields

from .errors import ConfigError

__all__ = [
    "ModelConfig",
    "SpectralParams",
    "BathParams",
    "SolverOptions",
    "build_config",
    "config_to_dict",
    "config_from_dict",
    "write_ini",
    "read_ini",
    "DEFAULTS",
]

# Default parameter set: cutoff 3*omega0, inter-mode coupling 0.5*omega0,
# squeeze 3, sub-Ohmic exponent 0.5, weak coupling 0.05, zero temperature.
DEFAULTS = {
    "omega0": 1.0,
    "kappa": 0.5,
    "r": 3.0,
    "eta": 0.05,
    "s": 0.5,
    "omega_c": 3.0,
    "temperature": 0.0,
}


@dataclass(frozen=True)
class ModelConfig:
    """Two identical modes with inter-mode coupling and a common squeeze."""

    omega0: float = DEFAULTS["omega0"]
    kappa: float = DEFAULTS["kappa"]
    r: float = DEFAULTS["r"]
    omega_plus: float = field(init=False)
    omega_minus: float = field(init=False)

    def __post_init__(self):
        for name in ("omega0", "kappa", "r"):
            v = getattr(self, name)
            if not _finite(v):
                raise ConfigError(name, f"{name} must be finite, got {v!r}")
        if self.r < 0:
            raise ConfigError("r", f"squeeze parameter r must be >= 0, got {self.r}")
        omega_plus = self.omega0 + self.kappa
        omega_minus = self.omega0 - self.kappa
        if omega_plus <= 0:
            raise ConfigError(
                "omega_plus",
                f"omega0 + kappa = {omega_plus} must be positive",
            )
        if omega_minus <= 0:
            # The relative mode is decoupled, so a non-positive frequency only
            # changes a phase factor; flag it but do not reject.
            warnings.warn(
                f"kappa >= omega0 gives omega_minus = {omega_minus} <= 0; "
                "the decoupled relative mode stays well defined",
                stacklevel=2,
            )
        object.__setattr__(self, "omega_plus", omega_plus)
        object.__setattr__(self, "omega_minus", omega_minus)


@dataclass(frozen=True)
class SpectralParams:
    """Ohmic-family environment: coupling eta, exponent s, cutoff omega_c."""

    eta: float = DEFAULTS["eta"]
    s: float = DEFAULTS["s"]
    omega_c: float = DEFAULTS["omega_c"]

    def __post_init__(self):
        for name in ("eta", "s", "omega_c"):
            if not _finite(getattr(self, name)):
                raise ConfigError(name, f"{name} must be finite")
        if self.eta < 0:
            raise ConfigError("eta", f"coupling eta must be >= 0, got {self.eta}")
        if self.s <= 0:
            raise ConfigError("s", f"spectral exponent s must be > 0, got {self.s}")
        if self.omega_c <= 0:
            raise ConfigError(
                "omega_c", f"cutoff omega_c must be > 0, got {self.omega_c}"
            )


@dataclass(frozen=True)
class BathParams:
    """Initial environment temperature; T = 0 is an exact value, not a limit."""

    temperature: float = DEFAULTS["temperature"]

    def __post_init__(self):
        if not _finite(self.temperature):
            raise ConfigError("temperature", "temperature must be finite")
        if self.temperature < 0:
            raise ConfigError(
                "temperature",
                f"temperature must be >= 0, got {self.temperature}",
            )

    @property
    def beta(self) -> float:
        return float("inf") if self.temperature == 0 else 1.0 / self.temperature


@dataclass(frozen=True)
class SolverOptions:
    """Time-grid and steady-state extraction settings shared by CLI and sweeps.

    ``dt=None`` selects the step automatically from the configured
    frequencies (see greens.default_dt). ``t_max=None`` selects 50/omega0
    for single runs; steady-state extraction overrides it with
    ``t_max_steady``.
    """

    dt: float | None = None
    t_max: float | None = None
    t_max_steady: float = 200.0
    tail_fraction: float = 0.1
    v_nodes: int = 400
    v_tol: float = 1e-6

    def __post_init__(self):
        if self.dt is not None and self.dt <= 0:
            raise ConfigError("dt", f"dt must be > 0, got {self.dt}")
        if self.t_max is not None and self.t_max <= 0:
            raise ConfigError("t_max", f"t_max must be > 0, got {self.t_max}")
        if self.t_max_steady <= 0:
            raise ConfigError("t_max_steady", "t_max_steady must be > 0")
        if not 0 < self.tail_fraction < 1:
            raise ConfigError("tail_fraction", "tail_fraction must be in (0, 1)")


def _finite(x) -> bool:
    try:
        x = float(x)
    except (TypeError, ValueError):
        return False
    return x == x and abs(x) != float("inf")


def build_config(**raw) -> tuple[ModelConfig, SpectralParams, BathParams]:
    """Assemble the three validated parameter blocks from raw keyword values.

    Unspecified fields fall back to the defaults above. Raises ConfigError
    (with a ``field`` attribute) for any domain violation.
    """
    values = dict(DEFAULTS)
    unknown = set(raw) - set(values)
    if unknown:
        raise ConfigError(sorted(unknown)[0], f"unknown parameter(s): {sorted(unknown)}")
    values.update({k: float(v) for k, v in raw.items() if v is not None})
    config = ModelConfig(values["omega0"], values["kappa"], values["r"])
    spectral = SpectralParams(values["eta"], values["s"], values["omega_c"])
    bath = BathParams(values["temperature"])
    return config, spectral, bath


def config_to_dict(config: ModelConfig, spectral: SpectralParams, bath: BathParams) -> dict:
    """Flatten the parameter blocks into the raw-value dict accepted by build_config."""
    return {
        "omega0": config.omega0,
        "kappa": config.kappa,
        "r": config.r,
        "eta": spectral.eta,
        "s": spectral.s,
        "omega_c": spectral.omega_c,
        "temperature": bath.temperature,
    }


def config_from_dict(d: dict) -> tuple[ModelConfig, SpectralParams, BathParams]:
    return build_config(**d)


_INI_SECTIONS = {
    "system": ("omega0", "kappa", "r"),
    "bath": ("eta", "s", "omega_c", "temperature"),
    "solver": ("dt", "t_max", "t_max_steady", "tail_fraction", "v_nodes", "v_tol"),
}


def write_ini(path, config, spectral, bath, solver: SolverOptions | None = None):
    """Write the configuration as an INI file with [system]/[bath]/[solver] sections.

    Floats are written with repr so a read-back reproduces them bit-exactly.
    """
    cp = configparser.ConfigParser()
    flat = config_to_dict(config, spectral, bath)
    cp["system"] = {k: repr(flat[k]) for k in _INI_SECTIONS["system"]}
    cp["bath"] = {k: repr(flat[k]) for k in _INI_SECTIONS["bath"]}
    if solver is not None:
        cp["solver"] = {
            f.name: repr(getattr(solver, f.name))
            for f in fields(solver)
            if getattr(solver, f.name) is not None
        }
    buf = io.StringIO()
    cp.write(buf)
    with open(path, "w") as fh:
        fh.write(buf.getvalue())


def read_ini(path):
    """Parse an INI config file; returns (config, spectral, bath, solver)."""
    cp = configparser.ConfigParser()
    with open(path) as fh:
        cp.read_file(fh)
    raw = {}
    for section in ("system", "bath"):
        if cp.has_section(section):
            for key in cp[section]:
                if key not in _INI_SECTIONS[section]:
                    raise ConfigError(key, f"unknown key {key!r} in [{section}]")
                raw[key] = float(cp[section][key])
    config, spectral, bath = build_config(**raw)
    solver_kwargs = {}
    if cp.has_section("solver"):
        for key in cp["solver"]:
            if key not in _INI_SECTIONS["solver"]:
                raise ConfigError(key, f"unknown key {key!r} in [solver]")
            value = cp["solver"][key]
            solver_kwargs[key] = int(value) if key == "v_nodes" else float(value)
    solver = SolverOptions(**solver_kwargs)
    return config, spectral, bath, solver
