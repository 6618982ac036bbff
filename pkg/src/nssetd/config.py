"""Run configuration: INI-style ``key = value`` files with section headers.

Example::

    [model]
    eps = 0.04
    kappa = 0.25
    A = 1.0

    [grid]
    N = 128
    L = 3.2

    [schedule]
    segments = 400:0.004

Unknown sections or keys are rejected with their line number.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field, replace

from .model import ModelParams

OUTPUT_DIR_ENV = "NSSETD_OUTPUT_DIR"

KINDS = ("coarsening", "convergence")
SCHEMES = ("etd1", "etdms2", "etd3")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class InitialSpec:
    kind: str = "random"  # random | manufactured
    seed: int = 0
    amplitude: float = 0.05
    smooth: bool = True


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams
    N: int
    L: float = 1.0
    kind: str = "coarsening"
    scheme: str = "etd3"
    startup: str = "copy-initial"
    schedule: tuple = ((1.0, 0.01),)
    initial: InitialSpec = field(default_factory=InitialSpec)
    output_dir: str = "output"
    sample_every: float = 1.0
    checkpoint_every: float = 0.0  # 0 disables periodic checkpoints
    N_values: tuple = (64, 80, 96, 112, 128)
    dt_factor: float = 0.5
    final_time: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"run.kind must be one of {KINDS}, got {self.kind!r}")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"run.scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.N < 4:
            raise ConfigError(f"grid.N must be >= 4, got {self.N}")
        if not self.L > 0:
            raise ConfigError(f"grid.L must be positive, got {self.L}")
        if not self.schedule:
            raise ConfigError("schedule needs at least one segment")
        prev = None
        for t_end, dt in self.schedule:
            if not dt > 0:
                raise ConfigError(f"schedule step must be positive, got {dt}")
            if prev is not None and not t_end > prev:
                raise ConfigError(f"schedule end times must increase strictly: {prev} then {t_end}")
            if prev is None and not t_end > 0:
                raise ConfigError(f"first schedule end time must be positive, got {t_end}")
            prev = t_end
        if not self.sample_every > 0:
            raise ConfigError("output.sample_every must be positive")
        if self.checkpoint_every < 0:
            raise ConfigError("output.checkpoint_every must be >= 0")
        if any(n < 4 for n in self.N_values) or list(self.N_values) != sorted(set(self.N_values)):
            raise ConfigError("convergence.N_values must be strictly increasing integers >= 4")

    def resolved_output_dir(self) -> str:
        return os.environ.get(OUTPUT_DIR_ENV) or self.output_dir


_SCHEMA = {
    "model": {"eps": float, "kappa": float, "A": float, "dealias": "bool"},
    "grid": {"N": int, "L": float},
    "run": {"kind": str, "scheme": str, "startup": str},
    "schedule": {"segments": "segments"},
    "initial": {"kind": str, "seed": int, "amplitude": float, "smooth": "bool"},
    "output": {"dir": str, "sample_every": float, "checkpoint_every": float},
    "convergence": {"N_values": "ints", "dt_factor": float, "final_time": float},
}
_REQUIRED = {("model", "eps"), ("grid", "N")}


def _line_of(text: str, section: str, key: str | None = None) -> int:
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if key is None and current == section:
                return lineno
        elif current == section and key is not None:
            name = line.split("=", 1)[0].split(":", 1)[0].strip()
            if name == key:
                return lineno
    return 0


def _parse_bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def parse_segments(s: str) -> tuple:
    segs = []
    for item in s.split(","):
        item = item.strip()
        if not item:
            continue
        t_end, dt = item.split(":")
        segs.append((float(t_end), float(dt)))
    return tuple(segs)


def format_segments(segments) -> str:
    return ", ".join(f"{t_end!r}:{dt!r}" for t_end, dt in segments)


def _convert(kind, raw: str):
    if kind == "bool":
        return _parse_bool(raw)
    if kind == "segments":
        return parse_segments(raw)
    if kind == "ints":
        return tuple(int(v) for v in raw.replace(",", " ").split())
    return kind(raw)


def loads_config(text: str, source: str = "<string>") -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from exc

    values: dict = {}
    for section in cp.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"{source}:{_line_of(text, section)}: unknown section [{section}]")
        for key, raw in cp.items(section):
            if key not in _SCHEMA[section]:
                line = _line_of(text, section, key)
                raise ConfigError(f"{source}:{line}: unknown key {key!r} in [{section}]")
            try:
                values[(section, key)] = _convert(_SCHEMA[section][key], raw)
            except ValueError as exc:
                line = _line_of(text, section, key)
                raise ConfigError(f"{source}:{line}: bad value for {section}.{key}: {exc}") from exc

    missing = [f"{s}.{k}" for s, k in sorted(_REQUIRED) if (s, k) not in values]
    if missing:
        raise ConfigError(f"{source}: missing required key(s): {', '.join(missing)}")

    def get(section, key, default):
        return values.get((section, key), default)

    try:
        params = ModelParams(
            eps=get("model", "eps", None),
            kappa=get("model", "kappa", 0.25),
            A=get("model", "A", 0.0),
            dealias=get("model", "dealias", False),
        )
        initial = InitialSpec(
            kind=get("initial", "kind", "random"),
            seed=get("initial", "seed", 0),
            amplitude=get("initial", "amplitude", 0.05),
            smooth=get("initial", "smooth", True),
        )
        defaults = RunConfig.__dataclass_fields__
        return RunConfig(
            params=params,
            N=get("grid", "N", None),
            L=get("grid", "L", 1.0),
            kind=get("run", "kind", defaults["kind"].default),
            scheme=get("run", "scheme", defaults["scheme"].default),
            startup=get("run", "startup", defaults["startup"].default),
            schedule=get("schedule", "segments", defaults["schedule"].default),
            initial=initial,
            output_dir=get("output", "dir", defaults["output_dir"].default),
            sample_every=get("output", "sample_every", defaults["sample_every"].default),
            checkpoint_every=get("output", "checkpoint_every", defaults["checkpoint_every"].default),
            N_values=get("convergence", "N_values", defaults["N_values"].default),
            dt_factor=get("convergence", "dt_factor", defaults["dt_factor"].default),
            final_time=get("convergence", "final_time", defaults["final_time"].default),
        )
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from exc


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return loads_config(fh.read(), source=str(path))


def dumps_config(cfg: RunConfig) -> str:
    p, ini = cfg.params, cfg.initial
    b = lambda v: "true" if v else "false"  # noqa: E731
    lines = [
        "[model]",
        f"eps = {p.eps!r}",
        f"kappa = {p.kappa!r}",
        f"A = {p.A!r}",
        f"dealias = {b(p.dealias)}",
        "",
        "[grid]",
        f"N = {cfg.N}",
        f"L = {cfg.L!r}",
        "",
        "[run]",
        f"kind = {cfg.kind}",
        f"scheme = {cfg.scheme}",
        f"startup = {cfg.startup}",
        "",
        "[schedule]",
        f"segments = {format_segments(cfg.schedule)}",
        "",
        "[initial]",
        f"kind = {ini.kind}",
        f"seed = {ini.seed}",
        f"amplitude = {ini.amplitude!r}",
        f"smooth = {b(ini.smooth)}",
        "",
        "[output]",
        f"dir = {cfg.output_dir}",
        f"sample_every = {cfg.sample_every!r}",
        f"checkpoint_every = {cfg.checkpoint_every!r}",
        "",
        "[convergence]",
        f"N_values = {', '.join(str(n) for n in cfg.N_values)}",
        f"dt_factor = {cfg.dt_factor!r}",
        f"final_time = {cfg.final_time!r}",
        "",
    ]
    return "\n".join(lines)


def save_config(cfg: RunConfig, path) -> None:
    from .series import atomic_write_text

    atomic_write_text(path, dumps_config(cfg))


def with_overrides(cfg: RunConfig, **changes) -> RunConfig:
    return replace(cfg, **changes)
