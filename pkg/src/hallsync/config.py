"""Flat key = value run configuration with full up-front validation."""

from __future__ import annotations

from dataclasses import dataclass, fields

__all__ = ["RunConfig", "ConfigError", "parse_config", "serialize_config"]


class ConfigError(ValueError):
    """One or more invalid configuration entries; message lists all of them."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.errors))


@dataclass
class RunConfig:
    n: int = 48
    nu: float = 0.01
    mu: float = 0.002
    eta: float = 0.005
    dt: float = 0.006
    t_end: float = 3.75
    seed: int = 1
    forcing_amplitude: float = 3.0
    output_every: int = 5
    cr: float = 3000.0
    r: float = 2.5
    delta: float = 2.0
    init_amplitude_u: float = 0.4
    init_amplitude_b: float = 0.15
    b_mean: float = 0.0
    perturbation_amplitude: float = 1e-5
    snapshot_every: int = 0
    out_dir: str = "."

    def validate(self) -> list[str]:
        errs = []
        if self.n < 16 or self.n % 2:
            errs.append(f"n must be even and >= 16 (got {self.n})")
        if self.nu <= 0:
            errs.append(f"nu must be positive (got {self.nu})")
        if self.mu <= 0:
            errs.append(f"mu must be positive (got {self.mu})")
        if self.eta < 0:
            errs.append(f"eta must be nonnegative (got {self.eta})")
        if self.dt <= 0:
            errs.append(f"dt must be positive (got {self.dt})")
        if self.t_end <= 0:
            errs.append(f"t_end must be positive (got {self.t_end})")
        if self.seed < 0:
            errs.append(f"seed must be nonnegative (got {self.seed})")
        if self.output_every < 1:
            errs.append(f"output_every must be >= 1 (got {self.output_every})")
        if not 2.0 < self.r < 3.0:
            errs.append(f"r must lie in the open interval (2, 3) (got {self.r})")
        if self.delta <= 1.0:
            errs.append(f"delta must exceed 1 (got {self.delta})")
        if self.cr <= 0:
            errs.append(f"cr must be positive (got {self.cr})")
        if self.forcing_amplitude < 0:
            errs.append("forcing_amplitude must be nonnegative")
        if self.init_amplitude_u < 0 or self.init_amplitude_b < 0:
            errs.append("initial amplitudes must be nonnegative")
        if self.perturbation_amplitude < 0:
            errs.append("perturbation_amplitude must be nonnegative")
        if self.snapshot_every < 0:
            errs.append("snapshot_every must be nonnegative")
        return errs


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _convert(key: str, raw: str):
    ftype = _FIELD_TYPES[key]
    if ftype == "int":
        return int(raw)
    if ftype == "float":
        return float(raw)
    return raw


def parse_config(text: str) -> RunConfig:
    """Parse flat `key = value` lines; collects every error before raising."""
    errors = []
    seen: dict[str, int] = {}
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            errors.append(f"line {lineno}: expected 'key = value', got {body!r}")
            continue
        key, raw = (part.strip() for part in body.split("=", 1))
        if key not in _FIELD_TYPES:
            errors.append(f"line {lineno}: unknown key {key!r}")
            continue
        if key in seen:
            errors.append(
                f"line {lineno}: duplicate key {key!r} (first set on line {seen[key]})"
            )
            continue
        seen[key] = lineno
        try:
            values[key] = _convert(key, raw)
        except ValueError:
            errors.append(f"line {lineno}: cannot parse value {raw!r} for {key!r}")
    # validate whatever parsed cleanly so one failed line does not hide
    # semantic problems elsewhere in the file
    cfg = RunConfig(**values)
    errors.extend(cfg.validate())
    if errors:
        raise ConfigError(errors)
    return cfg


def serialize_config(cfg: RunConfig) -> str:
    """Echo-back form; parse_config(serialize_config(cfg)) reproduces cfg."""
    lines = []
    for f in fields(RunConfig):
        value = getattr(cfg, f.name)
        if isinstance(value, float):
            lines.append(f"{f.name} = {value!r}")
        else:
            lines.append(f"{f.name} = {value}")
    return "\n".join(lines) + "\n"
