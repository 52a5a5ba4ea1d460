import itertools
import logging
import math
import os
from dataclasses import dataclass, fields

import numpy as np
from dotenv import dotenv_values, load_dotenv

from baskakov_basis import OperatorParams, SeriesPolicy
from bound_checks import THEOREMS
from errors import ConfigError, InvalidParametersError
from function_catalog import get_function
from stancu_operators import BASELINES

logger = logging.getLogger(__name__)

COMMANDS = ("eval", "verify-moments", "check-bounds", "converge")
FORMATS = ("csv", "svg", "report")
OPERATORS = ("T", "L") + BASELINES

# environment defaults, read after load_dotenv() so a local .env works too
ENV_KEYS = {
    "tail_eps": "BKS_TAIL_EPS",
    "k_max": "BKS_K_MAX",
    "out_dir": "BKS_OUT_DIR",
    "n_jobs": "BKS_N_JOBS",
}


@dataclass(frozen=True)
class ExperimentConfig:
    """One CLI run: parameter grids, x-grid, test function, policy and output options"""

    command: str
    n_list: tuple = (10,)
    a: tuple = (0.0,)
    alpha: tuple = (0.0,)
    beta: tuple = (0.0,)
    x_start: float = 0.0
    x_stop: float = 10.0
    x_step: float = 0.1
    function: str = "t"
    tail_eps: float = 1e-12
    k_max: int = 20000
    out_dir: str = "results"
    format: tuple = ("csv", "report")
    theorem: str = "T3.1"
    operator: str = "T"
    orders: tuple = (0, 1, 2)
    allow_unordered_stancu: bool = False
    n_jobs: int = 1
    x_max: float = 1e4

    def validate(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"Unknown command '{self.command}'. Available: {', '.join(COMMANDS)}")
        for name in ("n_list", "a", "alpha", "beta", "format"):
            if not getattr(self, name):
                raise ConfigError(f"{name} must not be empty")
        if any(n < 1 for n in self.n_list):
            raise ConfigError(f"n_list entries must be positive integers, got {self.n_list}")
        if not self.x_step > 0:
            raise ConfigError(f"x_step must be positive, got {self.x_step}")
        if self.x_start < 0:
            raise ConfigError(f"x_start must be non-negative, got {self.x_start}")
        if self.x_stop < self.x_start:
            raise ConfigError(f"empty x-grid: x_stop={self.x_stop} < x_start={self.x_start}")
        if self.x_stop > self.x_max:
            raise ConfigError(f"x-grid exceeds x_max={self.x_max}")
        unknown = [f for f in self.format if f not in FORMATS]
        if unknown:
            raise ConfigError(f"Unknown output format(s) {unknown}. Available: {', '.join(FORMATS)}")
        if self.theorem not in THEOREMS:
            raise ConfigError(f"Unknown theorem '{self.theorem}'. Available: {', '.join(THEOREMS)}")
        if self.operator not in OPERATORS:
            raise ConfigError(f"Unknown operator '{self.operator}'. Available: {', '.join(OPERATORS)}")
        if any(i not in (0, 1, 2, 3, 4) for i in self.orders):
            raise ConfigError(f"orders must lie in 0..4, got {self.orders}")
        if self.n_jobs == 0:
            raise ConfigError("n_jobs must be non-zero")
        self.test_function()
        self.policy()
        self.params_groups()
        return self

    @property
    def x_grid(self):
        count = int(math.floor((self.x_stop - self.x_start) / self.x_step + 1e-9)) + 1
        return self.x_start + self.x_step * np.arange(count)

    def test_function(self):
        try:
            return get_function(self.function)
        except InvalidParametersError as e:
            raise ConfigError(str(e)) from None

    def policy(self):
        try:
            return SeriesPolicy(tail_epsilon=self.tail_eps, k_max_hard=self.k_max)
        except InvalidParametersError as e:
            raise ConfigError(str(e)) from None

    def params_groups(self):
        """One list of OperatorParams over n_list per (a, alpha, beta) combination"""
        groups = []
        try:
            for a, alpha, beta in itertools.product(self.a, self.alpha, self.beta):
                groups.append([
                    OperatorParams(n, a, alpha, beta, self.allow_unordered_stancu) for n in self.n_list
                ])
        except InvalidParametersError as e:
            raise ConfigError(str(e)) from None
        return groups

    def params_grid(self):
        return [p for group in self.params_groups() for p in group]

    def wants(self, fmt):
        return fmt in self.format


def _split(raw):
    if isinstance(raw, (list, tuple)):
        return list(raw)
    return [item.strip() for item in str(raw).split(",") if item.strip()]


def _as_bool(raw):
    if isinstance(raw, bool):
        return raw
    value = str(raw).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off", ""):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


_PARSERS = {
    "n_list": lambda raw: tuple(int(v) for v in _split(raw)),
    "a": lambda raw: tuple(float(v) for v in _split(raw)),
    "alpha": lambda raw: tuple(float(v) for v in _split(raw)),
    "beta": lambda raw: tuple(float(v) for v in _split(raw)),
    "x_start": float,
    "x_stop": float,
    "x_step": float,
    "function": str,
    "tail_eps": float,
    "k_max": int,
    "out_dir": str,
    "format": lambda raw: tuple(_split(raw)),
    "theorem": str,
    "operator": str,
    "orders": lambda raw: tuple(int(v) for v in _split(raw)),
    "allow_unordered_stancu": _as_bool,
    "n_jobs": int,
    "x_max": float,
}


def parse_value(key, raw):
    if key not in _PARSERS:
        raise ConfigError(f"Unknown config key '{key}'. Available: {', '.join(_PARSERS)}")
    try:
        return _PARSERS[key](raw)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Bad value for {key}: {raw!r} ({e})") from None


def load_config(command, overrides=None, config_file=None):
    """Merge defaults, BKS_* environment variables, a key=value file and CLI overrides, in that order"""
    values = {}
    load_dotenv()
    for key, var in ENV_KEYS.items():
        raw = os.getenv(var)
        if raw is not None:
            values[key] = parse_value(key, raw)
    if config_file:
        if not os.path.isfile(config_file):
            raise ConfigError(f"Config file not found: {config_file}")
        for key, raw in dotenv_values(config_file).items():
            values[key] = parse_value(key, raw)
        logger.info("loaded config file %s", config_file)
    for key, raw in (overrides or {}).items():
        if raw is not None:
            values[key] = parse_value(key, raw)
    known = {f.name for f in fields(ExperimentConfig)}
    return ExperimentConfig(command=command, **{k: v for k, v in values.items() if k in known}).validate()
