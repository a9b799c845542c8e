"""Experiment configuration files: flat key=value text with [section] headers.

Unknown sections or keys are hard errors with line diagnostics; a typo in a
physics parameter must never silently fall back to a default. All keys are
optional and default to the reference experiment (24x24 slit, bin 3, n = 1,
eta = 0.4, n_eps = 0.1).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError


@dataclass(frozen=True)
class ExperimentConfig:
    object_source: str = "slit"  # built-in generator name or path to a PGM file
    bin_factor: int = 3
    n: float = 1.0
    eta0: float = 0.4
    eta1: float = 0.4
    n_eps: float = 0.1
    frames: int = 1
    seed: int = 42
    tau_list: tuple[float, ...] = (0.0, 0.1, 0.2)
    basis: str = "haar"
    outputs_dir: str = "out"
    # gain-surface grid (defaults reproduce the figure grid on a 12x12 object)
    gain_eta_start: float = 0.05
    gain_eta_stop: float = 1.0
    gain_eta_step: float = 0.05
    gain_ratio_start: float = 0.0
    gain_ratio_stop: float = 1.0
    gain_ratio_step: float = 0.05
    gain_n_ref: float = 1.0
    gain_width: int = 12
    gain_height: int = 12

    def __post_init__(self):
        if any(not 0.0 <= t < 1.0 for t in self.tau_list):
            raise ConfigError(f"tau values must lie in [0, 1), got {self.tau_list}")
        if self.basis not in ("haar", "pixel", "none"):
            raise ConfigError(f"basis must be haar, pixel or none, got {self.basis!r}")

    def manifest_entries(self) -> dict:
        return {
            "object.source": self.object_source,
            "detector.bin_factor": self.bin_factor,
            "acquisition.n": self.n,
            "acquisition.eta0": self.eta0,
            "acquisition.eta1": self.eta1,
            "acquisition.n_eps": self.n_eps,
            "simulation.frames": self.frames,
            "simulation.seed": self.seed,
            "reconstruction.tau_list": ",".join(f"{t:g}" for t in self.tau_list),
            "reconstruction.basis": self.basis,
            "output.dir": self.outputs_dir,
        }


def _parse_int(raw, minimum=None):
    value = int(raw)
    if minimum is not None and value < minimum:
        raise ValueError(f"must be >= {minimum}")
    return value


def _parse_float(raw, minimum=None, maximum=None):
    value = float(raw)
    if minimum is not None and value < minimum:
        raise ValueError(f"must be >= {minimum}")
    if maximum is not None and value > maximum:
        raise ValueError(f"must be <= {maximum}")
    return value


def _parse_tau_list(raw):
    return tuple(float(t) for t in raw.replace(" ", "").split(",") if t != "")


_SCHEMA = {
    ("object", "source"): ("object_source", str),
    ("detector", "bin_factor"): ("bin_factor", lambda r: _parse_int(r, minimum=1)),
    ("acquisition", "n"): ("n", lambda r: _parse_float(r, minimum=0.0)),
    ("acquisition", "eta0"): ("eta0", lambda r: _parse_float(r, 0.0, 1.0)),
    ("acquisition", "eta1"): ("eta1", lambda r: _parse_float(r, 0.0, 1.0)),
    ("acquisition", "n_eps"): ("n_eps", lambda r: _parse_float(r, minimum=0.0)),
    ("simulation", "frames"): ("frames", lambda r: _parse_int(r, minimum=1)),
    ("simulation", "seed"): ("seed", _parse_int),
    ("reconstruction", "tau_list"): ("tau_list", _parse_tau_list),
    ("reconstruction", "basis"): ("basis", str),
    ("output", "dir"): ("outputs_dir", str),
    ("gain", "eta_start"): ("gain_eta_start", lambda r: _parse_float(r, 0.0, 1.0)),
    ("gain", "eta_stop"): ("gain_eta_stop", lambda r: _parse_float(r, 0.0, 1.0)),
    ("gain", "eta_step"): ("gain_eta_step", lambda r: _parse_float(r, minimum=1e-9)),
    ("gain", "ratio_start"): ("gain_ratio_start", lambda r: _parse_float(r, minimum=0.0)),
    ("gain", "ratio_stop"): ("gain_ratio_stop", lambda r: _parse_float(r, minimum=0.0)),
    ("gain", "ratio_step"): ("gain_ratio_step", lambda r: _parse_float(r, minimum=1e-9)),
    ("gain", "n_ref"): ("gain_n_ref", lambda r: _parse_float(r, minimum=1e-12)),
    ("gain", "width"): ("gain_width", lambda r: _parse_int(r, minimum=1)),
    ("gain", "height"): ("gain_height", lambda r: _parse_int(r, minimum=1)),
}

_SECTIONS = {section for section, _ in _SCHEMA}


def parse_config_text(text: str, source: str = "<config>") -> ExperimentConfig:
    """Parse configuration text, rejecting unknown sections/keys with line info."""
    fields: dict = {}
    section = None
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith("#") or line.startswith(";"):
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            if section not in _SECTIONS:
                raise ConfigError(f"{source}:{lineno}: unknown section [{section}]")
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key = value, got {line!r}")
        if section is None:
            raise ConfigError(f"{source}:{lineno}: key outside any [section]")
        key, _, raw_value = line.partition("=")
        key = key.strip().lower()
        value = raw_value.strip()
        if (section, key) not in _SCHEMA:
            raise ConfigError(f"{source}:{lineno}: unknown key {section}.{key}")
        field_name, parser = _SCHEMA[(section, key)]
        if field_name in fields:
            raise ConfigError(f"{source}:{lineno}: duplicate key {section}.{key}")
        try:
            fields[field_name] = parser(value)
        except (ValueError, TypeError) as exc:
            raise ConfigError(
                f"{source}:{lineno}: bad value for {section}.{key}: {exc}"
            ) from exc
    try:
        return ExperimentConfig(**fields)
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from exc


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    return parse_config_text(path.read_text(), source=str(path))
