"""Experiment configuration: a YAML tree validated strictly at parse time.

Example::

    grid:
      N: 64
    params:
      epsilon: 1.0
      alpha: 1.0
      beta: 1.0
    time:
      mode: fixed        # or "cfl"
      dt: 1.0e-3
      t_end: 1.0
    initial:
      family: taylor_green
      amp: 1.0
    output:
      every_steps: 10
      directory: out
    diagnostics:
      s_values: [1.5]

Unknown keys anywhere are rejected with a ConfigError naming the key.
"""

import math
from dataclasses import dataclass, field, replace

import yaml

from .errors import ConfigError
from .initial import FAMILIES
from .spectral import VoigtParams, make_grid
from .timestepper import StepControl

SECTIONS = {
    "grid": {"N"},
    "params": {"epsilon", "alpha", "beta"},
    "time": {"mode", "dt", "cfl", "dt_max", "t_end", "max_steps"},
    "initial": None,  # keys depend on the family
    "output": {"every_steps", "every_time", "directory"},
    "diagnostics": {"s_values"},
    "sweep": {"epsilons"},
    "regimes": {"cells", "s"},
}

FAMILY_KEYS = {
    "single_mode": {"k", "amp", "field"},
    "taylor_green": {"amp"},
    "random_bandlimited": {"kmax", "decay", "seed", "amp"},
}


@dataclass(frozen=True)
class SolverConfig:
    N: int
    params: VoigtParams
    control: StepControl
    initial: dict
    every_steps: int = 10
    every_time: float | None = None
    output_dir: str = "output"
    s_values: tuple = (1.5,)
    epsilons: tuple = ()
    cells: tuple = ()
    regime_s: float = 1.5
    raw: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def grid(self):
        return make_grid(self.N)

    def with_params(self, params):
        return replace(self, params=params)

    def with_seed(self, seed):
        if self.initial.get("family") != "random_bandlimited":
            return self
        initial = dict(self.initial, seed=int(seed))
        raw = dict(self.raw)
        raw["initial"] = initial
        return replace(self, initial=initial, raw=raw)

    def as_dict(self):
        """Normalized tree, suitable for echoing back."""
        return {
            "grid": {"N": self.N},
            "params": {"epsilon": self.params.epsilon, "alpha": self.params.alpha, "beta": self.params.beta},
            "time": {
                "mode": self.control.mode,
                "dt": self.control.dt,
                "cfl": self.control.cfl,
                "dt_max": self.control.dt_max,
                "t_end": self.control.t_end,
                "max_steps": self.control.max_steps,
            },
            "initial": dict(self.initial),
            "output": {"every_steps": self.every_steps, "every_time": self.every_time, "directory": self.output_dir},
            "diagnostics": {"s_values": list(self.s_values)},
            "sweep": {"epsilons": list(self.epsilons)},
            "regimes": {"cells": [list(c) for c in self.cells], "s": self.regime_s},
        }


def _section(tree, name):
    value = tree.get(name, {})
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError("must be a mapping", key=name)
    allowed = SECTIONS[name]
    if allowed is not None:
        for key in value:
            if key not in allowed:
                raise ConfigError(f"unknown key (allowed: {sorted(allowed)})", key=f"{name}.{key}")
    return value


def _number(value, key, *, positive=False, nonneg=False, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"must be a number, got {value!r}", key=key)
    if integer and not (isinstance(value, int) or float(value).is_integer()):
        raise ConfigError(f"must be an integer, got {value!r}", key=key)
    if not math.isfinite(value):
        raise ConfigError(f"must be finite, got {value!r}", key=key)
    if positive and value <= 0:
        raise ConfigError(f"must be positive, got {value!r}", key=key)
    if nonneg and value < 0:
        raise ConfigError(f"must be nonnegative, got {value!r}", key=key)
    return int(value) if integer else float(value)


def _wrap(key, fn, *args, **kwargs):
    """Call a constructor, re-keying its ConfigError under ``key``."""
    try:
        return fn(*args, **kwargs)
    except ConfigError as exc:
        sub = exc.key
        msg = str(exc)
        if sub is not None and msg.startswith(f"{sub}: "):
            msg = msg[len(sub) + 2:]
        raise ConfigError(msg, key=f"{key}.{sub}" if sub else key) from None


def _initial(tree, grid):
    spec = _section(tree, "initial")
    if not spec:
        return {"family": "taylor_green", "amp": 1.0}
    family = spec.get("family")
    if family not in FAMILY_KEYS:
        raise ConfigError(f"unknown family {family!r}; expected one of {list(FAMILIES)}", key="initial.family")
    allowed = FAMILY_KEYS[family] | {"family"}
    for key in spec:
        if key not in allowed:
            raise ConfigError(f"unknown key for {family} (allowed: {sorted(allowed)})", key=f"initial.{key}")
    out = {"family": family}
    if "amp" in spec:
        out["amp"] = _number(spec["amp"], "initial.amp")
    if family == "single_mode":
        k = spec.get("k", [1, 0])
        if not (isinstance(k, (list, tuple)) and len(k) == 2):
            raise ConfigError("must be a pair [k1, k2]", key="initial.k")
        out["k"] = (_number(k[0], "initial.k", integer=True), _number(k[1], "initial.k", integer=True))
        out["field"] = spec.get("field", "theta")
    elif family == "random_bandlimited":
        out["kmax"] = _number(spec.get("kmax", 6), "initial.kmax", integer=True, positive=True)
        out["decay"] = _number(spec.get("decay", 4.0), "initial.decay")
        seed = spec.get("seed", 0)
        out["seed"] = _number(seed, "initial.seed", integer=True, nonneg=True)
    # build once to surface family-specific errors now
    from .initial import make_initial_data

    _wrap("initial", make_initial_data, out, grid)
    return out


def parse_config(tree):
    """Validate a config mapping and return a SolverConfig."""
    if tree is None:
        tree = {}
    if not isinstance(tree, dict):
        raise ConfigError("top level must be a mapping", key="<root>")
    for key in tree:
        if key not in SECTIONS:
            raise ConfigError(f"unknown section (allowed: {sorted(SECTIONS)})", key=key)

    g = _section(tree, "grid")
    N = g.get("N", 64)
    if isinstance(N, bool) or not isinstance(N, int):
        raise ConfigError(f"must be an integer, got {N!r}", key="grid.N")
    grid = _wrap("grid", make_grid, N)

    p = _section(tree, "params")
    params = _wrap(
        "params",
        VoigtParams,
        epsilon=_number(p.get("epsilon", 1.0), "params.epsilon"),
        alpha=_number(p.get("alpha", 1.0), "params.alpha"),
        beta=_number(p.get("beta", 1.0), "params.beta"),
    )

    t = _section(tree, "time")
    mode = t.get("mode", "fixed")
    control = _wrap(
        "time",
        StepControl,
        t_end=_number(t.get("t_end", 1.0), "time.t_end", nonneg=True),
        mode=mode,
        dt=_number(t.get("dt", 1e-3), "time.dt", positive=True),
        cfl=_number(t.get("cfl", 0.4), "time.cfl", positive=True),
        dt_max=_number(t.get("dt_max", 1e-2), "time.dt_max", positive=True),
        max_steps=_number(t.get("max_steps", 10_000_000), "time.max_steps", integer=True, positive=True),
    )

    initial = _initial(tree, grid)

    o = _section(tree, "output")
    every_steps = _number(o.get("every_steps", 10), "output.every_steps", integer=True, positive=True)
    every_time = o.get("every_time")
    if every_time is not None:
        every_time = _number(every_time, "output.every_time", positive=True)
    directory = o.get("directory", "output")
    if not isinstance(directory, str) or not directory:
        raise ConfigError("must be a nonempty string", key="output.directory")

    d = _section(tree, "diagnostics")
    s_values = d.get("s_values", [1.5])
    if not isinstance(s_values, list):
        raise ConfigError("must be a list of numbers", key="diagnostics.s_values")
    s_values = tuple(_number(s, "diagnostics.s_values") for s in s_values)

    sw = _section(tree, "sweep")
    epsilons = sw.get("epsilons", [])
    if not isinstance(epsilons, list):
        raise ConfigError("must be a list of numbers", key="sweep.epsilons")
    epsilons = tuple(_number(e, "sweep.epsilons", positive=True) for e in epsilons)
    if any(b >= a for a, b in zip(epsilons, epsilons[1:])):
        raise ConfigError("must be strictly decreasing", key="sweep.epsilons")

    r = _section(tree, "regimes")
    cells = r.get("cells", [])
    if not isinstance(cells, list):
        raise ConfigError("must be a list of [alpha, beta] pairs", key="regimes.cells")
    parsed_cells = []
    for c in cells:
        if not (isinstance(c, (list, tuple)) and len(c) == 2):
            raise ConfigError(f"each cell must be [alpha, beta], got {c!r}", key="regimes.cells")
        parsed_cells.append(
            (_number(c[0], "regimes.cells", nonneg=True), _number(c[1], "regimes.cells", nonneg=True))
        )
    regime_s = _number(r.get("s", 1.5), "regimes.s")
    if regime_s <= 1:
        raise ConfigError(f"must be > 1, got {regime_s}", key="regimes.s")

    return SolverConfig(
        N=grid.N,
        params=params,
        control=control,
        initial=initial,
        every_steps=every_steps,
        every_time=every_time,
        output_dir=directory,
        s_values=s_values,
        epsilons=epsilons,
        cells=tuple(parsed_cells),
        regime_s=regime_s,
        raw=tree,
    )


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            tree = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", key="--config") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"not valid YAML: {exc}", key="--config") from None
    return parse_config(tree)
