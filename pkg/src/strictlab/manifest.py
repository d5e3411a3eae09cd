"""Flat ``key = value`` experiment manifests.

One assignment per line, ``#`` starts a comment, lists are comma separated::

    # preset family
    R = 2
    delta = 0.1
    L = 16
    betas = 0.05, 0.5, 5
    init = contracted-aligned
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .lattice import Lattice
from .model import InteractionProfile, ModelParams, preset_params
from .sampler import CONTRACTED_ALIGNED, EXPANDED_DISORDERED, SamplerConfig

EXPLICIT_KEYS = ("mu", "lambda", "U", "U_bar", "u", "rho", "eps")

KEYS = {
    # model
    "R": float, "delta": float, "h": float,
    "mu": float, "lambda": float, "U": float, "U_bar": float, "u": float, "rho": float,
    "eps": float, "k_lo": float, "k_hi": float, "profile": str, "profile_width": float,
    # lattice and chain
    "L": int, "seed": int, "therm_sweeps": int, "measure_sweeps": int, "measure_stride": int,
    "proposal_width": float, "r_mode": str, "grid": "floats", "grid_points": int, "init": str,
    # temperatures
    "betas": "floats", "schedule": "floats", "beta_log_grid": "floats", "beta_unit": str,
    # output
    "out": str, "plots": bool,
}


class ManifestError(ValueError):
    def __init__(self, message: str, line: int | None = None, key: str | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"field '{key}'")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.line = line
        self.key = key


def _convert(kind, raw, line, key):
    try:
        if kind == "floats":
            vals = [float(v) for v in raw.split(",") if v.strip()]
            if any(not math.isfinite(v) for v in vals):
                raise ValueError("non-finite value")
            return vals
        if kind is bool:
            low = raw.lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if kind is int:
            v = float(raw)
            if v != int(v):
                raise ValueError(f"not an integer: {raw!r}")
            return int(v)
        if kind is float:
            v = float(raw)
            if not math.isfinite(v):
                raise ValueError("non-finite value")
            return v
        return raw
    except ValueError as exc:
        raise ManifestError(str(exc), line, key) from None


def parse_text(text: str) -> dict:
    values, lines = {}, {}
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ManifestError("expected 'key = value'", no)
        key, val = (part.strip() for part in line.split("=", 1))
        if key not in KEYS:
            raise ManifestError("unknown key", no, key)
        if key in values:
            raise ManifestError(f"duplicate key (first set on line {lines[key]})", no, key)
        values[key] = _convert(KEYS[key], val, no, key)
        lines[key] = no
    values["_lines"] = lines
    return values


@dataclass
class Experiment:
    params: ModelParams
    lattice: Lattice
    sampler: SamplerConfig
    betas: list[float]
    schedule: list[float]
    grid_points: int | None
    preset: tuple[float, float] | None
    plots: bool
    out: str | None
    canonical: str = field(repr=False)

    @property
    def seed(self) -> int:
        return self.sampler.seed

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.canonical.encode()).hexdigest()


def _canonical(values: dict) -> str:
    def fmt(v):
        if isinstance(v, list):
            return ", ".join(f"{x:.17g}" for x in v)
        if isinstance(v, float):
            return f"{v:.17g}"
        if isinstance(v, bool):
            return "true" if v else "false"
        return str(v)

    return "".join(f"{k} = {fmt(values[k])}\n" for k in sorted(values) if not k.startswith("_"))


def build(values: dict, seed: int | None = None) -> Experiment:
    """Validate parsed values and assemble the experiment.  ``seed`` overrides the manifest."""
    values = dict(values)
    lines = values.pop("_lines", {})

    def fail(msg, key):
        raise ManifestError(msg, lines.get(key), key)

    if seed is not None:
        values["seed"] = seed
    explicit = [k for k in EXPLICIT_KEYS if k in values]
    has_preset = "delta" in values
    if has_preset and explicit:
        fail("give either the (R, delta) preset or an explicit parameter block, not both", explicit[0])
    if "R" not in values:
        fail("missing; required by both parameter forms", "R")
    try:
        if has_preset:
            params = preset_params(values["R"], values["delta"])
            if "h" in values:
                params = params.with_field(values["h"])
            for k in ("k_lo", "k_hi", "profile", "profile_width"):
                if k in values:
                    fail("profile overrides need the explicit parameter block", k)
        else:
            missing = [k for k in EXPLICIT_KEYS if k not in values]
            if missing:
                fail("missing from explicit parameter block (or give 'delta' for the preset)", missing[0])
            profile = InteractionProfile(
                U=values["U"], U_bar=values["U_bar"], u=values["u"], rho=values["rho"],
                k_lo=values.get("k_lo", 0.0), k_hi=values.get("k_hi"),
                shape=values.get("profile", "step"), width=values.get("profile_width"),
            )
            params = ModelParams(mu=values["mu"], lambda_=values["lambda"], R=values["R"],
                                 eps=values["eps"], profile=profile, h=values.get("h", 0.0))
    except ValueError as exc:
        if isinstance(exc, ManifestError):
            raise
        raise ManifestError(f"invalid model parameters: {exc}") from None

    try:
        lattice = Lattice(values.get("L", 16))
    except ValueError as exc:
        raise ManifestError(str(exc), lines.get("L"), "L") from None

    unit = values.get("beta_unit", "absolute")
    if unit not in ("absolute", "crossover"):
        fail("must be 'absolute' or 'crossover'", "beta_unit")
    scale = 1.0
    if unit == "crossover":
        from .bounds import NoCrossover, solve_crossover
        try:
            scale = solve_crossover(params)
        except NoCrossover as exc:
            fail(str(exc), "beta_unit")

    betas = list(values.get("betas", []))
    if "beta_log_grid" in values:
        if betas:
            fail("give either 'betas' or 'beta_log_grid'", "beta_log_grid")
        g = values["beta_log_grid"]
        if len(g) != 3 or g[2] != int(g[2]) or g[2] < 1:
            fail("expected 'lo, hi, n'", "beta_log_grid")
        if g[0] <= 0 or g[1] < g[0]:
            fail("need 0 < lo <= hi", "beta_log_grid")
        betas = [float(b) for b in np.geomspace(g[0], g[1], int(g[2]))]
    schedule = list(values.get("schedule", []))
    for key, seq in (("betas", betas), ("schedule", schedule)):
        if any(not b > 0 for b in seq):
            fail("beta values must be positive", key)
    betas = [b * scale for b in betas]
    schedule = [b * scale for b in schedule]

    r_mode = values.get("r_mode", "continuous")
    init = values.get("init", CONTRACTED_ALIGNED)
    if init not in (CONTRACTED_ALIGNED, EXPANDED_DISORDERED):
        fail(f"must be '{CONTRACTED_ALIGNED}' or '{EXPANDED_DISORDERED}'", "init")
    grid = values.get("grid")
    grid_points = values.get("grid_points")
    if r_mode == "grid" and grid is None and grid_points is None:
        grid_points = 4
    try:
        sampler = SamplerConfig(
            seed=values.get("seed", 0),
            therm_sweeps=values.get("therm_sweeps", 1000),
            measure_sweeps=values.get("measure_sweeps", 10_000),
            measure_stride=values.get("measure_stride", 1),
            proposal_width=values.get("proposal_width"),
            r_mode=r_mode,
            # placeholder until the per-beta default grid is built by the driver
            grid=tuple(grid) if grid is not None else ((1.0,) if r_mode == "grid" else None),
            init=init,
        )
    except ValueError as exc:
        raise ManifestError(str(exc)) from None
    if sampler.seed < 0 or sampler.seed >= 2**64:
        fail("seed must be an unsigned 64-bit integer", "seed")
    if grid_points is not None and grid_points < 3:
        fail("need at least 3 grid points", "grid_points")

    return Experiment(
        params=params, lattice=lattice, sampler=sampler, betas=betas, schedule=schedule,
        grid_points=grid_points if grid is None else None,
        preset=(values["R"], values["delta"]) if has_preset else None,
        plots=values.get("plots", True), out=values.get("out"),
        canonical=_canonical(values),
    )


def load(path, seed: int | None = None) -> Experiment:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return build(parse_text(text), seed=seed)
