"""Run configuration: a flat INI-style file with sections [grid], [time],
[noise], [initial], [detectors], [output]. Unknown sections or keys are
rejected with their location; semantic problems are collected and reported
together. The config hash is a sha256 over the canonicalized (fully
defaulted, key-sorted) JSON image of the config, so it is stable under key
reordering and comment changes.

Noise coefficient presets are given as JSON values, e.g.
    phi1 = [{"kind": "constant-imag", "c": [0.5, 0.5]}]
    phi1 = [{"kind": "fourier-mode", "k": [1, 0], "amp": 0.1}]
"""
from __future__ import annotations

import configparser
import datetime as _dt
import hashlib
import json
import subprocess
from dataclasses import dataclass, field as dc_field
from typing import Any

import numpy as np

from . import __version__
from .noise import CoeffPreset, NoiseSpec
from .solver import DetectorConfig, SolverConfig
from .spectral import TorusGrid


class ConfigError(Exception):
    """Carries every validation problem found, each with its location."""

    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


_SCHEMA: dict[str, dict[str, tuple[str, Any]]] = {
    "grid": {
        "d": ("int", 2),
        "n": ("int", 64),
        "length": ("float", 40.0),
    },
    "time": {
        "dt": ("float", 0.01),
        "t_max": ("float", 1.0),
        "scheme": ("str", "strang"),
        "dealias": ("bool", True),
    },
    "noise": {
        "mode": ("str", "off"),
        "phi1": ("json", []),
        "phi2": ("json", []),
        "sign_variant": ("str", "minus"),
    },
    "initial": {
        "kind": ("str", "gaussian"),
        "amplitude": ("float", 1.0),
        "width": ("float", 1.0),
        "mode_k": ("intlist", [1]),
        "wave_kind": ("str", "minus-density"),
    },
    "detectors": {
        "s_norm": ("optfloat", None),
        "l_norm": ("optfloat", None),
        "budget_p": ("optfloat", None),
        "m_threshold": ("float", 50.0),
        "budget_threshold": ("float", 1e4),
        "eps_scat": ("float", 1e-2),
        "scatter_window": ("float", 5.0),
        "scatter_samples": ("int", 6),
        "monitor_boundary": ("bool", False),
        "boundary_frac_limit": ("float", 1e-3),
        "record_every": ("int", 1),
    },
    "output": {
        "prefix": ("str", "run"),
        "snapshots_every": ("int", 0),
    },
}

_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}


def _coerce(raw: str, typ: str, loc: str, problems: list[str]):
    raw = raw.strip()
    try:
        if typ == "int":
            return int(raw)
        if typ == "float":
            return float(raw)
        if typ == "optfloat":
            return None if raw in ("", "none", "default") else float(raw)
        if typ == "bool":
            low = raw.lower()
            if low in _BOOL_TRUE:
                return True
            if low in _BOOL_FALSE:
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if typ == "json":
            return json.loads(raw)
        if typ == "intlist":
            return [int(x) for x in raw.split(",") if x.strip()]
        return raw
    except (ValueError, json.JSONDecodeError) as exc:
        problems.append(f"{loc}: {exc}")
        return None


@dataclass
class RunConfig:
    values: dict[str, dict[str, Any]]
    config_hash: str = ""

    def __post_init__(self):
        if not self.config_hash:
            self.config_hash = config_hash(self.values)

    def __getitem__(self, section: str) -> dict[str, Any]:
        return self.values[section]

    # ---- builders ----

    def build_grid(self) -> TorusGrid:
        g = self.values["grid"]
        return TorusGrid(d=g["d"], n=g["n"], L=g["length"])

    def build_noise(self) -> NoiseSpec:
        nz = self.values["noise"]
        phi1 = _presets_from_json(nz["phi1"])
        phi2 = _presets_from_json(nz["phi2"])
        return NoiseSpec(mode=nz["mode"], phi1=tuple(phi1), phi2=tuple(phi2))

    def build_solver_config(self, noise: NoiseSpec | None = None) -> SolverConfig:
        t = self.values["time"]
        return SolverConfig(
            dt=t["dt"],
            t_max=t["t_max"],
            scheme=t["scheme"],
            dealias=t["dealias"],
            noise=noise if noise is not None else self.build_noise(),
            c_sign_variant=self.values["noise"]["sign_variant"],
        )

    def build_detectors(self) -> DetectorConfig:
        d = self.values["detectors"]
        return DetectorConfig(
            s_norm=d["s_norm"],
            l_norm=d["l_norm"],
            budget_p=d["budget_p"],
            boundary_frac_limit=d["boundary_frac_limit"],
            monitor_boundary=d["monitor_boundary"],
            record_every=d["record_every"],
            scatter_window=d["scatter_window"],
            scatter_samples=d["scatter_samples"],
        )

    def build_initial(self, grid: TorusGrid) -> tuple[np.ndarray, np.ndarray]:
        ini = self.values["initial"]
        x0 = initial_field(grid, ini["kind"], ini["amplitude"], ini["width"], ini["mode_k"])
        if ini["wave_kind"] == "minus-density":
            y0 = -(np.abs(x0) ** 2).astype(np.complex128)
        elif ini["wave_kind"] == "zero":
            y0 = np.zeros(grid.shape, dtype=np.complex128)
        else:
            raise ConfigError([f"initial.wave_kind: unknown kind {ini['wave_kind']!r}"])
        return x0, y0


def _presets_from_json(items: Any) -> list[CoeffPreset]:
    if isinstance(items, dict):
        items = [items]
    out = []
    for item in items:
        kind = item.get("kind")
        if kind == "constant-imag":
            for c in item.get("c", []):
                out.append(CoeffPreset(kind="constant-imag", params={"c": float(c)}))
        elif kind == "constant":
            out.append(CoeffPreset(kind="constant", params={"value": float(item["value"])}))
        elif kind == "fourier-mode":
            out.append(
                CoeffPreset(
                    kind="fourier-mode",
                    params={"k": tuple(item["k"]), "amp": float(item["amp"])},
                )
            )
        elif kind == "bump":
            out.append(
                CoeffPreset(
                    kind="bump",
                    params={
                        "center": tuple(item["center"]),
                        "width": float(item["width"]),
                        "amp": float(item["amp"]),
                    },
                )
            )
        else:
            raise ConfigError([f"noise preset: unknown kind {kind!r}"])
    return out


def initial_field(
    grid: TorusGrid, kind: str, amplitude: float, width: float, mode_k: list[int]
) -> np.ndarray:
    """Named initial data on the torus, centered at the box midpoint."""
    x = grid.coords(centered=True)
    r2 = sum(xi**2 for xi in x)
    if kind == "zero":
        return np.zeros(grid.shape, dtype=np.complex128)
    if kind == "gaussian":
        return (amplitude * np.exp(-r2 / (2 * width**2))).astype(np.complex128)
    if kind == "plane-wave":
        phase = sum(2 * np.pi * k / grid.L * xi for k, xi in zip(mode_k, x))
        return amplitude * np.exp(1j * phase)
    if kind == "soliton":
        if grid.d != 1:
            raise ConfigError(["initial.kind: soliton requires d = 1"])
        return (amplitude * np.sqrt(2.0) / np.cosh(x[0] / width)).astype(np.complex128)
    raise ConfigError([f"initial.kind: unknown kind {kind!r}"])


def config_hash(values: dict) -> str:
    canon = json.dumps(values, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canon.encode()).hexdigest()


def parse_config(path: str) -> RunConfig:
    """Read and validate a run config file; defaults applied, unknown keys
    rejected, semantic errors collected and reported together."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh, source=path)
    except FileNotFoundError:
        raise ConfigError([f"{path}: file not found"])
    except UnicodeDecodeError as exc:
        raise ConfigError([f"{path}: not valid UTF-8 ({exc})"])
    except configparser.Error as exc:
        raise ConfigError([f"{path}: {exc}"])

    problems: list[str] = []
    values: dict[str, dict[str, Any]] = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            problems.append(f"[{section}]: unknown section")
            continue
        for key in parser[section]:
            if key not in _SCHEMA[section]:
                problems.append(f"{section}.{key}: unknown key")
    for section, keys in _SCHEMA.items():
        values[section] = {}
        for key, (typ, default) in keys.items():
            if parser.has_option(section, key):
                values[section][key] = _coerce(
                    parser.get(section, key), typ, f"{section}.{key}", problems
                )
            else:
                values[section][key] = default
    if problems:
        raise ConfigError(problems)

    _validate(values, problems)
    if problems:
        raise ConfigError(problems)
    return RunConfig(values=values)


def default_config() -> RunConfig:
    values = {s: {k: d for k, (_, d) in keys.items()} for s, keys in _SCHEMA.items()}
    return RunConfig(values=values)


def _validate(v: dict, problems: list[str]) -> None:
    g = v["grid"]
    if not 1 <= g["d"] <= 6:
        problems.append("grid.d: must be between 1 and 6")
    if g["n"] < 8 or (g["n"] & (g["n"] - 1)) != 0:
        problems.append("grid.n: must be a power of two, at least 8")
    if g["length"] <= 0:
        problems.append("grid.length: must be positive")
    t = v["time"]
    if t["dt"] <= 0:
        problems.append("time.dt: must be positive")
    elif t["t_max"] < t["dt"]:
        problems.append("time.t_max: must be at least dt")
    if t["scheme"] not in ("lie", "strang"):
        problems.append(f"time.scheme: unknown scheme {t['scheme']!r}")
    nz = v["noise"]
    if nz["mode"] not in ("off", "conservative", "nonconservative"):
        problems.append(f"noise.mode: unknown mode {nz['mode']!r}")
    if nz["sign_variant"] not in ("minus", "plus"):
        problems.append(f"noise.sign_variant: must be 'minus' or 'plus'")
    det = v["detectors"]
    if det["record_every"] < 1:
        problems.append("detectors.record_every: must be at least 1")
    if det["eps_scat"] <= 0:
        problems.append("detectors.eps_scat: must be positive")
    out = v["output"]
    if out["snapshots_every"] < 0:
        problems.append("output.snapshots_every: must be non-negative")


# ---- run manifests ----


def _revision() -> str:
    try:
        out = subprocess.run(
            ["git", "rev-parse", "--short", "HEAD"],
            capture_output=True,
            text=True,
            timeout=5,
        )
        if out.returncode == 0:
            return out.stdout.strip()
    except (OSError, subprocess.TimeoutExpired):
        pass
    return "unknown"


@dataclass
class RunManifest:
    config_hash: str
    master_seed: int
    tool_version: str = __version__
    revision: str = dc_field(default_factory=_revision)
    started: str = ""
    finished: str = ""
    outcome: dict = dc_field(default_factory=dict)

    def start(self) -> "RunManifest":
        self.started = _dt.datetime.now(_dt.timezone.utc).isoformat()
        return self

    def finish(self, **outcome) -> "RunManifest":
        self.finished = _dt.datetime.now(_dt.timezone.utc).isoformat()
        self.outcome.update(outcome)
        return self

    def write(self, path: str) -> None:
        payload = {
            "tool_version": self.tool_version,
            "config_hash": self.config_hash,
            "master_seed": self.master_seed,
            "revision": self.revision,
            "started": self.started,
            "finished": self.finished,
            "outcome": self.outcome,
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
