"""Line-oriented experiment configuration: [section] headers, key = value.

Unknown keys are rejected with their line number; every run document embeds
the resolved configuration so results stay reproducible from the artifact
alone.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .grids import Grid
from .operators import ConstantKernel, Kernel, PowerKernel, PowerLogKernel, RieszKernel
from .solver import AlgebraicData, GaussianData, InitialData, ProblemSpec


class ConfigError(ValueError):
    """Configuration file is malformed or inconsistent."""


# section -> key -> (parser, required, default); None default means absent
_BOOL = {"true": True, "false": False, "yes": True, "no": False, "1": True, "0": False}


def _parse_bool(text: str) -> bool:
    try:
        return _BOOL[text.strip().lower()]
    except KeyError:
        raise ValueError(f"expected a boolean, got {text!r}") from None


_SCHEMA: dict[str, dict[str, tuple]] = {
    "grid": {
        "dim": (int, True, None),
        "points": (int, True, None),
        "box_length": (float, True, None),
    },
    "equation": {
        "beta": (float, True, None),
        "p": (float, True, None),
        "q": (float, True, None),
        "kernel": (str, True, None),
        "alpha": (float, False, None),
        "sigma": (float, False, None),
        "delta": (float, False, None),
        "coefficient": (float, False, None),
        "tail_threshold": (float, False, 2.0),
        "lebesgue_index": (float, False, 2.0),
    },
    "initial": {
        "type": (str, True, None),
        "amplitude": (float, False, None),
        "width": (float, False, None),
        "center": (float, False, 0.0),
        "epsilon": (float, False, None),
        "gamma": (float, False, None),
    },
    "time": {
        "horizon": (float, True, None),
        "dt_initial": (float, False, 1e-3),
        "dt_min": (float, False, 1e-12),
        "blowup_factor": (float, False, 1e8),
        "output_interval": (float, False, None),
        "adaptive": (_parse_bool, False, True),
        "dealias": (_parse_bool, False, True),
    },
    "output": {
        "prefix": (str, False, "run"),
    },
}

# keys that a sweep may range over (resolved by unique name across sections)
_SWEEPABLE = {
    "beta": "equation",
    "p": "equation",
    "q": "equation",
    "alpha": "equation",
    "sigma": "equation",
    "delta": "equation",
    "coefficient": "equation",
    "amplitude": "initial",
    "width": "initial",
    "epsilon": "initial",
    "gamma": "initial",
}


def _line_of(text: str, key: str) -> int | None:
    for i, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped.startswith(key) and "=" in stripped:
            name = stripped.split("=", 1)[0].strip()
            if name == key:
                return i
    return None


def _parse_sweep_values(raw: str) -> list[float]:
    """Either a whitespace-separated list or geom:start:stop:count."""
    raw = raw.strip()
    if raw.startswith("geom:"):
        parts = raw.split(":")
        if len(parts) != 4:
            raise ValueError(f"geometric range must be geom:start:stop:count, got {raw!r}")
        start, stop, count = float(parts[1]), float(parts[2]), int(parts[3])
        return [float(v) for v in np.geomspace(start, stop, count)]
    values = [float(token) for token in raw.split()]
    if not values:
        raise ValueError("empty sweep axis")
    return values


@dataclass
class ExperimentConfig:
    """Validated configuration with the resolved values of every key."""

    values: dict[str, dict[str, object]]
    sweep_axes: dict[str, list[float]]
    source: str

    @property
    def prefix(self) -> str:
        return str(self.values["output"]["prefix"])

    def echo(self) -> dict:
        """Resolved key-value document for embedding in outputs."""
        out = {sec: dict(kv) for sec, kv in self.values.items()}
        if self.sweep_axes:
            out["sweep"] = {k: list(v) for k, v in self.sweep_axes.items()}
        return out

    def with_overrides(self, overrides: dict[str, float]) -> "ExperimentConfig":
        values = {sec: dict(kv) for sec, kv in self.values.items()}
        for key, val in overrides.items():
            values[_SWEEPABLE[key]][key] = val
        return ExperimentConfig(values=values, sweep_axes={}, source=self.source)

    def grid(self) -> Grid:
        g = self.values["grid"]
        try:
            return Grid(int(g["dim"]), int(g["points"]), float(g["box_length"]))
        except ValueError as exc:
            raise ConfigError(f"invalid [grid]: {exc}") from exc

    def kernel(self, dim: int) -> Kernel:
        eq = self.values["equation"]
        kind = str(eq["kernel"]).lower()
        tail = float(eq["tail_threshold"])

        def need(*keys):
            missing = [k for k in keys if eq.get(k) is None]
            if missing:
                raise ConfigError(
                    f"kernel '{kind}' requires keys {missing} in [equation]"
                )

        try:
            if kind == "riesz":
                need("alpha")
                return RieszKernel(float(eq["alpha"]), ndim=dim, tail_threshold=tail)
            if kind == "power":
                need("coefficient", "sigma")
                return PowerKernel(
                    float(eq["coefficient"]), float(eq["sigma"]), ndim=dim, tail_threshold=tail
                )
            if kind == "power_log":
                need("sigma", "delta")
                return PowerLogKernel(
                    float(eq["sigma"]), float(eq["delta"]), ndim=dim, tail_threshold=tail
                )
            if kind == "constant":
                need("coefficient")
                return ConstantKernel(float(eq["coefficient"]), tail_threshold=tail)
        except ValueError as exc:
            raise ConfigError(f"invalid kernel parameters: {exc}") from exc
        raise ConfigError(
            f"unknown kernel {kind!r}; expected riesz, power, power_log or constant"
        )

    def initial(self) -> InitialData:
        ini = self.values["initial"]
        kind = str(ini["type"]).lower()
        if kind == "gaussian":
            if ini.get("amplitude") is None or ini.get("width") is None:
                raise ConfigError("gaussian initial data requires amplitude and width")
            return GaussianData(
                float(ini["amplitude"]), float(ini["width"]), float(ini["center"])
            )
        if kind == "algebraic":
            if ini.get("epsilon") is None or ini.get("gamma") is None:
                raise ConfigError("algebraic initial data requires epsilon and gamma")
            return AlgebraicData(float(ini["epsilon"]), float(ini["gamma"]))
        raise ConfigError(f"unknown initial data type {kind!r}")

    def problem_spec(self) -> ProblemSpec:
        grid = self.grid()
        eq = self.values["equation"]
        tm = self.values["time"]
        try:
            return ProblemSpec(
                grid=grid,
                beta=float(eq["beta"]),
                kernel=self.kernel(grid.dim),
                p=float(eq["p"]),
                q=float(eq["q"]),
                initial=self.initial(),
                horizon=float(tm["horizon"]),
                dt_initial=float(tm["dt_initial"]),
                dt_min=float(tm["dt_min"]),
                blowup_factor=float(tm["blowup_factor"]),
                lebesgue_index=float(eq["lebesgue_index"]),
                output_interval=(
                    float(tm["output_interval"]) if tm["output_interval"] is not None else None
                ),
                adaptive=bool(tm["adaptive"]),
                dealias_products=bool(tm["dealias"]),
            )
        except ValueError as exc:
            raise ConfigError(f"invalid problem parameters: {exc}") from exc

    def gamma_hint(self) -> float | None:
        """Tail rate for the classifier: present for algebraic initial data."""
        ini = self.values["initial"]
        if str(ini["type"]).lower() == "algebraic" and ini.get("gamma") is not None:
            return float(ini["gamma"])
        return None


def load_config(path: str | Path) -> ExperimentConfig:
    """Parse and validate a config file; errors carry key names and lines."""
    path = Path(path)
    text = path.read_text()
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc

    values: dict[str, dict[str, object]] = {}
    for section in parser.sections():
        if section == "sweep":
            continue
        if section not in _SCHEMA:
            raise ConfigError(f"{path}: unknown section [{section}]")
    for section, keys in _SCHEMA.items():
        present = dict(parser.items(section)) if parser.has_section(section) else {}
        for key in present:
            if key not in keys:
                line = _line_of(text, key)
                where = f" (line {line})" if line else ""
                raise ConfigError(f"{path}: unknown key '{key}' in [{section}]{where}")
        resolved: dict[str, object] = {}
        for key, (cast, required, default) in keys.items():
            if key in present:
                try:
                    resolved[key] = cast(present[key])
                except ValueError as exc:
                    line = _line_of(text, key)
                    where = f" (line {line})" if line else ""
                    raise ConfigError(
                        f"{path}: bad value for '{key}' in [{section}]{where}: {exc}"
                    ) from exc
            elif required:
                raise ConfigError(f"{path}: missing required key '{key}' in [{section}]")
            else:
                resolved[key] = default
        values[section] = resolved

    sweep_axes: dict[str, list[float]] = {}
    if parser.has_section("sweep"):
        for key, raw in parser.items("sweep"):
            if key not in _SWEEPABLE:
                line = _line_of(text, key)
                where = f" (line {line})" if line else ""
                raise ConfigError(
                    f"{path}: key '{key}' in [sweep] is not a sweepable parameter{where}"
                )
            try:
                sweep_axes[key] = _parse_sweep_values(raw)
            except ValueError as exc:
                raise ConfigError(f"{path}: bad sweep axis '{key}': {exc}") from exc

    cfg = ExperimentConfig(values=values, sweep_axes=sweep_axes, source=str(path))
    cfg.problem_spec()  # validate parameter domains before any compute
    return cfg
