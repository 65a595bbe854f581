"""Experiment configuration files.

A config is an INI file with three kinds of sections::

    [experiment]
    base_seed = 7
    trials_per_cell = 20
    recovery_tol = 1e-6
    output_dir = runs/adv

    [model]
    name = adversarial_line
    D = 10, 50                # a comma-separated value is a sweep axis
    d = 2
    N_in = 150
    snr_factor = 0.5, 1, 2
    magnitude = 1e9

    [estimator.sggd]          # one section per estimator, run in file order
    max_iter = 500

Model parameters given as lists are swept over their Cartesian product, in
the order the keys appear. See README for the parameters each model and
estimator accepts.
"""

from __future__ import annotations

import configparser
import itertools
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ConfigError

MODELS = {
    "haystack": {"required": {"D", "d", "N"},
                 "optional": {"N_out", "snr", "snr_factor", "sigma_in", "sigma_out",
                              "noise_eps", "noise_kind"}},
    "adversarial_line": {"required": {"D", "d", "N_in"},
                         "optional": {"N_out", "snr", "snr_factor", "magnitude"}},
    "affine_line": {"required": {"D", "d", "N_in"},
                    "optional": {"N_out", "snr", "offset_scale"}},
}

ESTIMATORS = {
    "spca": set(),
    "sggd": {"max_iter", "schedule", "s0", "shrink_factor", "patience", "max_hold",
             "converge_tol", "subgradient_eps"},
    "ransac": {"tau", "m", "n"},
    "ransac_affine": {"tau", "m", "n"},
    "affine_sggd": {"max_iter", "schedule", "s0", "shrink_factor", "patience", "max_hold",
                    "converge_tol", "subgradient_eps"},
}


def parse_scalar(text: str):
    s = text.strip()
    for conv in (int, float):
        try:
            return conv(s)
        except ValueError:
            pass
    low = s.lower()
    if low in ("true", "yes"):
        return True
    if low in ("false", "no"):
        return False
    return s


def parse_value(text: str):
    parts = [p for p in (t.strip() for t in text.split(",")) if p]
    if len(parts) > 1:
        return [parse_scalar(p) for p in parts]
    return parse_scalar(parts[0]) if parts else ""


@dataclass
class ExperimentConfig:
    model: str
    model_params: dict
    estimators: list  # [(name, params)]
    trials_per_cell: int = 10
    base_seed: int = 0
    recovery_tol: float = 1e-6
    output_dir: str = "runs"
    source: str = ""
    axes: list = field(default_factory=list)

    def validate(self) -> "ExperimentConfig":
        where = self.source or "<config>"
        if self.model not in MODELS:
            raise ConfigError(f"{where}: [model] name: unknown model {self.model!r}; "
                              f"expected one of {sorted(MODELS)}")
        spec = MODELS[self.model]
        missing = spec["required"] - set(self.model_params)
        if missing:
            raise ConfigError(f"{where}: [model] missing field(s) {sorted(missing)}")
        unknown = set(self.model_params) - spec["required"] - spec["optional"]
        if unknown:
            raise ConfigError(f"{where}: [model] unknown field(s) {sorted(unknown)}")
        count_keys = {"N_out", "snr", "snr_factor"} & set(self.model_params)
        if len(count_keys) > 1:
            raise ConfigError(f"{where}: [model] give only one of N_out, snr, snr_factor")
        for k, v in self.model_params.items():
            if isinstance(v, list) and not v:
                raise ConfigError(f"{where}: [model] {k}: sweep axis is empty")
        if not self.estimators:
            raise ConfigError(f"{where}: no [estimator.*] sections")
        for name, params in self.estimators:
            if name not in ESTIMATORS:
                raise ConfigError(f"{where}: [estimator.{name}] unknown estimator; "
                                  f"expected one of {sorted(ESTIMATORS)}")
            bad = set(params) - ESTIMATORS[name]
            if bad:
                raise ConfigError(f"{where}: [estimator.{name}] unknown field(s) {sorted(bad)}")
        if not isinstance(self.trials_per_cell, int) or self.trials_per_cell < 1:
            raise ConfigError(f"{where}: [experiment] trials_per_cell must be an integer >= 1")
        if not (isinstance(self.recovery_tol, (int, float)) and self.recovery_tol > 0):
            raise ConfigError(f"{where}: [experiment] recovery_tol must be > 0")
        if not isinstance(self.base_seed, int):
            raise ConfigError(f"{where}: [experiment] base_seed must be an integer")
        return self

    def cells(self) -> list:
        """Model parameter dicts of all sweep cells, in deterministic order."""
        keys = list(self.model_params)
        axes = [k for k in keys if isinstance(self.model_params[k], list)]
        grids = [self.model_params[k] for k in axes]
        out = []
        for combo in itertools.product(*grids) if axes else [()]:
            cell = dict(self.model_params)
            cell.update(zip(axes, combo))
            out.append(cell)
        self.axes = axes
        return out


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str  # keep key case (D vs d)
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc})") from exc
    return config_from_parser(cp, str(path))


def loads_config(text: str, source: str = "<string>") -> ExperimentConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text, source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    return config_from_parser(cp, source)


def config_from_parser(cp: configparser.ConfigParser, source: str) -> ExperimentConfig:
    if not cp.has_section("model"):
        raise ConfigError(f"{source}: missing [model] section")
    model = dict(cp.items("model"))
    name = model.pop("name", None)
    if name is None:
        raise ConfigError(f"{source}: [model] missing field 'name'")
    params = {k: parse_value(v) for k, v in model.items()}
    exp = {k: parse_scalar(v) for k, v in cp.items("experiment")} if cp.has_section("experiment") else {}
    allowed = {"base_seed", "trials_per_cell", "recovery_tol", "output_dir"}
    bad = set(exp) - allowed
    if bad:
        raise ConfigError(f"{source}: [experiment] unknown field(s) {sorted(bad)}")
    estimators = []
    for sec in cp.sections():
        if sec.startswith("estimator."):
            estimators.append((sec[len("estimator."):],
                               {k: parse_scalar(v) for k, v in cp.items(sec)}))
        elif sec not in ("model", "experiment"):
            raise ConfigError(f"{source}: unknown section [{sec}]")
    cfg = ExperimentConfig(
        model=name.strip(),
        model_params=params,
        estimators=estimators,
        trials_per_cell=exp.get("trials_per_cell", 10),
        base_seed=exp.get("base_seed", 0),
        recovery_tol=exp.get("recovery_tol", 1e-6),
        output_dir=str(exp.get("output_dir", "runs")),
        source=source,
    )
    return cfg.validate()

