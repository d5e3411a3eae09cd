"""Single-site / single-bond Metropolis chain for the spin / bond-length model.

Random numbers come from numpy ``Generator`` streams derived from
``SeedSequence(seed, spawn_key=...)``, drawn in chunks and handed to the
compiled sweep.  A chain's trajectory therefore depends only on
(seed, replica, step) and never on how many threads run replicas side by side.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from . import _kernels as K
from .lattice import Lattice
from .model import Configuration, ModelParams
from .observables import FIELDS, ObservableRecord, summarize

CONTRACTED_ALIGNED = "contracted-aligned"
EXPANDED_DISORDERED = "expanded-disordered"

_CHUNK = 1024  # sweeps per block of pre-drawn random numbers


@dataclass(frozen=True)
class SamplerConfig:
    seed: int = 0
    therm_sweeps: int = 1000
    measure_sweeps: int = 10_000
    measure_stride: int = 1
    proposal_width: float | None = None
    r_mode: str = "continuous"
    grid: tuple[float, ...] | None = None
    init: Union[str, Configuration] = CONTRACTED_ALIGNED

    def __post_init__(self):
        if min(self.therm_sweeps, self.measure_sweeps) < 0:
            raise ValueError("sweep counts must be non-negative")
        if self.measure_stride < 1:
            raise ValueError("measure_stride must be >= 1")
        if self.proposal_width is not None and not self.proposal_width > 0:
            raise ValueError("proposal_width must be positive")
        if self.r_mode not in ("continuous", "grid"):
            raise ValueError(f"r_mode must be 'continuous' or 'grid', got {self.r_mode!r}")
        if self.r_mode == "grid":
            if not self.grid:
                raise ValueError("grid mode needs grid points")
            g = np.asarray(self.grid, dtype=float)
            if np.any(g <= 0) or np.any(np.diff(g) <= 0):
                raise ValueError("grid points must be positive and strictly increasing")
            object.__setattr__(self, "grid", tuple(float(v) for v in g))
        if isinstance(self.init, str) and self.init not in (CONTRACTED_ALIGNED, EXPANDED_DISORDERED):
            raise ValueError(f"unknown init {self.init!r}")


@dataclass(frozen=True)
class RunSpec:
    """One chain: inverse temperature, model, lattice and sampler settings.

    ``beta = 0`` is accepted as the infinite-temperature limit, where every
    proposal is accepted; it is useful for checking proposal marginals.
    """

    beta: float
    params: ModelParams
    lattice: Lattice
    sampler: SamplerConfig = field(default_factory=SamplerConfig)

    def __post_init__(self):
        if not self.beta >= 0:
            raise ValueError(f"beta must be non-negative, got {self.beta!r}")


@dataclass
class RunResult:
    beta: float
    records: np.ndarray          # (n_records, len(FIELDS))
    spin_rate: float
    bond_rate: float
    final: Configuration

    def record(self, i: int) -> ObservableRecord:
        return ObservableRecord.from_row(self.records[i])

    def summary(self) -> dict:
        out = {"beta": self.beta}
        out.update(summarize(self.records))
        out["spin_acceptance"] = self.spin_rate
        out["bond_acceptance"] = self.bond_rate
        return out


def default_proposal_width(params: ModelParams, beta: float) -> float:
    w = min(params.rho / 2, 1.0 / math.sqrt(beta * params.mu)) if beta > 0 else params.rho / 2
    return float(np.clip(w, 1e-3 * params.R, params.R))


def _stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=key)))


def _snap(value: float, grid) -> float:
    g = np.asarray(grid)
    return float(g[np.argmin(np.abs(g - value))])


def init_configuration(spec: RunSpec, replica: int = 0) -> Configuration:
    """Starting state.  In grid mode the lengths snap to the nearest grid point."""
    cfg, lat, p = spec.sampler, spec.lattice, spec.params
    if isinstance(cfg.init, Configuration):
        c = cfg.init.copy()
        c.check(lat)
        return c
    if cfg.init == CONTRACTED_ALIGNED:
        spins = np.ones(lat.n_sites)
        r = p.profile.k_mid
    else:
        rng = _stream(cfg.seed, replica, 0xC0FFEE)
        spins = rng.choice(np.array([-1.0, 1.0]), size=lat.n_sites)
        r = p.R
    if cfg.r_mode == "grid":
        r = _snap(r, cfg.grid)
    return Configuration(spins, np.full(lat.n_bonds, r))


class Chain:
    """A Metropolis chain bound to one lattice / parameter set.

    ``beta`` may be changed between calls to :meth:`advance`, which is how
    the hysteresis protocol carries one configuration along a schedule.
    """

    def __init__(self, spec: RunSpec, config: Configuration, rng: np.random.Generator,
                 chunk: int = _CHUNK):
        config.check(spec.lattice)
        self.spec = spec
        self.beta = spec.beta
        self.config = config
        self.chunk = chunk
        self.rng = rng
        self.counts = np.zeros(4, dtype=np.int64)
        p = spec.params
        self._prof = p.profile.packed()
        self._grid = np.asarray(spec.sampler.grid if spec.sampler.r_mode == "grid" else [1.0])

    @property
    def rng(self) -> np.random.Generator:
        return self._rng

    @rng.setter
    def rng(self, rng: np.random.Generator):
        # Random numbers are drawn in blocks of ``chunk`` sweeps and consumed
        # sweep by sweep, so the trajectory does not depend on how the caller
        # splits its calls to ``advance``.
        self._rng = rng
        self._buf = None
        self._pos = 0

    def width(self) -> float:
        w = self.spec.sampler.proposal_width
        return w if w is not None else default_proposal_width(self.spec.params, self.beta)

    def _refill(self):
        lat = self.spec.lattice
        k = self.chunk
        u_spin = self._rng.random((k, lat.n_sites))
        if self.spec.sampler.r_mode == "grid":
            prop = self._rng.integers(0, self._grid.size, (k, lat.n_bonds)).astype(np.float64)
        else:
            prop = self._rng.standard_normal((k, lat.n_bonds))
        u_bond = self._rng.random((k, lat.n_bonds))
        self._buf = (u_spin, prop, u_bond)
        self._pos = 0

    def advance(self, n_sweeps: int, stride: int = 0) -> np.ndarray:
        """Run ``n_sweeps`` sweeps, measuring every ``stride``-th (0 = none)."""
        lat, p = self.spec.lattice, self.spec.params
        grid_mode = self.spec.sampler.r_mode == "grid"
        n_rec = n_sweeps // stride if stride else 0
        records = np.empty((n_rec, K.N_FIELDS))
        done, rec = 0, 0
        while done < n_sweeps:
            if self._buf is None or self._pos == self.chunk:
                self._refill()
            k = min(self.chunk - self._pos, n_sweeps - done)
            sl = slice(self._pos, self._pos + k)
            u_spin, prop, u_bond = (a[sl] for a in self._buf)
            rec = K.sweeps(self.config.spins, self.config.lengths, lat.endpoints, lat.site_bond,
                           lat.lam_nbrs, lat.lam_pairs, self._prof, p.mu, p.lambda_, p.R, p.h,
                           p.eps, float(self.beta), grid_mode, self.width(), self._grid,
                           u_spin, prop, u_bond, stride, done, records, rec, self.counts)
            done += k
            self._pos += k
        return records

    def acceptance(self) -> tuple[float, float]:
        c = self.counts
        return (c[0] / c[1] if c[1] else math.nan, c[2] / c[3] if c[3] else math.nan)


def metropolis_sweep(spec: RunSpec, config: Configuration, rng: np.random.Generator):
    """One sweep in place: |sites| spin-flip attempts, then |bonds| bond attempts.

    Returns ``(config, {"spin_rate": ..., "bond_rate": ...})``.
    """
    chain = Chain(spec, config, rng, chunk=1)
    chain.advance(1)
    spin_rate, bond_rate = chain.acceptance()
    return config, {"spin_rate": spin_rate, "bond_rate": bond_rate}


def run(spec: RunSpec, observers: Sequence[Callable] = (), replica: int = 0) -> RunResult:
    """Thermalise, then record every ``measure_stride``-th sweep.

    Each observer is called as ``observer(sweep_index, config, record)`` for
    every recorded state.
    """
    cfg = spec.sampler
    chain = Chain(spec, init_configuration(spec, replica), _stream(cfg.seed, replica, 1))
    chain.advance(cfg.therm_sweeps)
    chain.counts[:] = 0
    if observers:
        rows = []
        for i in range(cfg.measure_sweeps // cfg.measure_stride):
            row = chain.advance(cfg.measure_stride, cfg.measure_stride)[0]
            rows.append(row)
            rec = ObservableRecord.from_row(row)
            for obs in observers:
                obs((i + 1) * cfg.measure_stride, chain.config, rec)
        records = np.array(rows).reshape(-1, K.N_FIELDS)
    else:
        records = chain.advance(cfg.measure_sweeps, cfg.measure_stride)
    spin_rate, bond_rate = chain.acceptance()
    return RunResult(spec.beta, records, spin_rate, bond_rate, chain.config)


def run_many(specs: Sequence[RunSpec], threads: int = 1) -> list[RunResult]:
    """Independent replicas, one per spec; replica ``i`` uses stream key ``i``.

    Results are returned in input order whatever the thread count.
    """
    jobs = list(enumerate(specs))
    if threads <= 1 or len(jobs) <= 1:
        return [run(s, replica=i) for i, s in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda job: run(job[1], replica=job[0]), jobs))


@dataclass
class HysteresisPoint:
    beta: float
    direction: str   # "up" on the forward pass through the schedule, "down" on the way back
    stats: dict
    records: np.ndarray = field(repr=False)


def hysteresis_run(spec: RunSpec, beta_schedule: Sequence[float], replica: int = 0) -> list[HysteresisPoint]:
    """Walk the schedule forward ("up") and then backward ("down") with one chain.

    At every step the chain is re-thermalised for ``therm_sweeps`` at the new
    beta and then measured for ``measure_sweeps``.  The configuration is
    carried over between steps; the turning point is visited on both passes.
    """
    schedule = [float(b) for b in beta_schedule]
    if not schedule:
        raise ValueError("beta schedule must be non-empty")
    if any(not b > 0 for b in schedule):
        raise ValueError("beta values must be positive")
    cfg = spec.sampler
    chain = Chain(spec, init_configuration(spec, replica), _stream(cfg.seed, replica, 1))
    legs = [("up", schedule), ("down", schedule[::-1])]
    out = []
    step = 0
    for direction, betas in legs:
        for beta in betas:
            step += 1
            chain.beta = beta
            chain.rng = _stream(cfg.seed, replica, 2, step)
            chain.advance(cfg.therm_sweeps)
            chain.counts[:] = 0
            records = chain.advance(cfg.measure_sweeps, cfg.measure_stride)
            stats = {"beta": beta, "direction": direction}
            stats.update(summarize(records))
            stats["spin_acceptance"], stats["bond_acceptance"] = chain.acceptance()
            out.append(HysteresisPoint(beta, direction, stats, records))
    return out


__all__ = [
    "SamplerConfig", "RunSpec", "RunResult", "Chain", "HysteresisPoint", "FIELDS",
    "init_configuration", "metropolis_sweep", "run", "run_many", "hysteresis_run",
    "default_proposal_width", "CONTRACTED_ALIGNED", "EXPANDED_DISORDERED",
]
