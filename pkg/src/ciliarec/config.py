"""Flat key-value run configuration.

Grammar: one `key = value` pair per line; blank lines and lines starting with
`#` are ignored.  Every key has a default, so the empty file is a valid
configuration.
"""

from dataclasses import dataclass, replace

from .kernels import GeometricMeshSpec, PhysicalParams, default_params

__all__ = ["ConfigError", "RunConfig", "load_config", "DEFAULTS"]


class ConfigError(ValueError):
    """Malformed configuration file or invalid parameter value."""


@dataclass(frozen=True)
class RunConfig:
    """Physical, mesh, discretization and sampling parameters for one run."""

    D: float = 1.0
    L: float = 1.0
    c0: float = 1.0
    J0: float = 1.0
    hill_n: float = 2.0
    hill_K: float = 0.5
    beta: float = 0.8
    beta0: float = 1.0
    m: int = 8
    p: int = 20
    q: int = 16
    base_rule: str = "uniform"
    quad_tol: float = 1e-10
    series_tol: float = 1e-12
    t_max: float | None = None  # None: horizon L_m^2 of the partition
    n_t: int = 400

    def physical(self) -> PhysicalParams:
        try:
            return default_params(D=self.D, L=self.L, c0=self.c0, J0=self.J0,
                                  n=self.hill_n, K_half=self.hill_K)
        except ValueError as e:
            raise ConfigError(str(e)) from e

    def mesh_spec(self) -> GeometricMeshSpec:
        try:
            return GeometricMeshSpec(beta=self.beta, beta0=self.beta0, m=self.m)
        except ValueError as e:
            raise ConfigError(str(e)) from e

    def validate(self) -> "RunConfig":
        self.physical()
        self.mesh_spec()
        if self.p < 1 or self.q < 1:
            raise ConfigError(f"p and q must be >= 1, got p={self.p}, q={self.q}")
        if self.base_rule != "uniform":
            raise ConfigError(f"unknown base_rule: {self.base_rule!r}")
        if not self.quad_tol > 0 or not self.series_tol > 0:
            raise ConfigError("tolerances must be positive")
        if self.t_max is not None and self.t_max <= 0:
            raise ConfigError(f"t_max must be positive, got {self.t_max}")
        if self.n_t < 2:
            raise ConfigError(f"n_t must be >= 2, got {self.n_t}")
        return self


_FIELD_TYPES = {
    "D": float, "L": float, "c0": float, "J0": float,
    "hill_n": float, "hill_K": float,
    "beta": float, "beta0": float,
    "m": int, "p": int, "q": int,
    "base_rule": str,
    "quad_tol": float, "series_tol": float,
    "t_max": float, "n_t": int,
}

DEFAULTS = RunConfig()


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    """Parse the key-value grammar with line-precise error messages."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in _FIELD_TYPES:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        typ = _FIELD_TYPES[key]
        if key == "t_max" and val.lower() in ("auto", "none"):
            values[key] = None
            continue
        try:
            values[key] = typ(val)
        except ValueError:
            raise ConfigError(
                f"{source}:{lineno}: key {key!r} expects {typ.__name__}, got {val!r}"
            ) from None
    try:
        cfg = replace(RunConfig(), **values).validate()
    except ConfigError as e:
        raise ConfigError(f"{source}: {e}") from None
    return cfg


def load_config(path: str | None) -> RunConfig:
    """Load a configuration file, or the defaults when path is None."""
    if path is None:
        return RunConfig()
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    return parse_config(text, source=path)
