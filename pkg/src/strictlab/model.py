"""Coupled Ising-spin / bond-length Hamiltonian.

    H = - sum_l J(r_l) s_a s_b + mu sum_l (r_l - R)^2
        + lambda sum_{<l,l'>} (r_l - r_l')^2 - h sum_s s_s

The lambda sum runs once over each unordered pair of perpendicular bonds
sharing an endpoint (4 L^2 pairs).  ``lambda_ = 0`` gives the plain
compressible Ising model with an r-dependent coupling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels as K
from .lattice import Lattice


@dataclass(frozen=True)
class InteractionProfile:
    """Coupling strength J(r) as a function of the bond length.

    The default ``shape="step"`` is a three-level step function.  Inside the
    strong set K = [k_lo, k_hi) it equals ``U_bar`` on the lower half and
    ``U`` on the upper half.  It equals ``u`` for r >= rho and on the part of
    [0, rho) outside K.  With K = [0, rho) this satisfies J <= u beyond rho,
    max J = U_bar, and J >= U on a set of measure rho.

    ``shape="logistic"`` is an experimental smooth blend from ``U_bar`` down to
    ``u`` centred on K's midpoint with scale ``width``.  It only satisfies the
    bounds approximately.
    """

    U: float
    U_bar: float
    u: float
    rho: float
    k_lo: float = 0.0
    k_hi: float | None = None
    shape: str = "step"
    width: float | None = None

    def __post_init__(self):
        if self.k_hi is None:
            object.__setattr__(self, "k_hi", self.rho)
        if self.width is None:
            object.__setattr__(self, "width", self.rho / 20.0)
        if self.rho <= 0:
            raise ValueError("rho must be positive")
        if not 0 <= self.k_lo < self.k_hi <= self.rho:
            raise ValueError("strong set K must satisfy 0 <= k_lo < k_hi <= rho")
        if not 0 <= self.u <= self.U <= self.U_bar:
            raise ValueError("need 0 <= u <= U <= U_bar")
        if self.shape not in ("step", "logistic"):
            raise ValueError(f"unknown profile shape {self.shape!r}")
        if self.width <= 0:
            raise ValueError("width must be positive")

    @property
    def kappa(self) -> float:
        """Relative excess of the maximum over the strong floor, U_bar / U - 1."""
        return self.U_bar / self.U - 1.0

    @property
    def strong_measure(self) -> float:
        return self.k_hi - self.k_lo

    @property
    def k_mid(self) -> float:
        return 0.5 * (self.k_lo + self.k_hi)

    def packed(self) -> np.ndarray:
        shape = K.SHAPE_LOGISTIC if self.shape == "logistic" else K.SHAPE_STEP
        return np.array(
            [shape, self.U_bar, self.U, self.u, self.rho, self.k_lo, self.k_hi, self.width],
            dtype=np.float64,
        )


@dataclass(frozen=True)
class ModelParams:
    mu: float
    lambda_: float
    R: float
    eps: float
    profile: InteractionProfile
    h: float = 0.0

    def __post_init__(self):
        if self.mu <= 0:
            raise ValueError("mu must be positive")
        if self.lambda_ < 0:
            raise ValueError("lambda_ must be non-negative")
        if self.R <= 0:
            raise ValueError("R must be positive")
        if self.eps <= 0:
            raise ValueError("eps must be positive")

    @property
    def rho(self) -> float:
        return self.profile.rho

    def with_field(self, h: float) -> "ModelParams":
        return replace(self, h=h)


@dataclass
class Configuration:
    """One spin per site and one strictly positive length per bond."""

    spins: np.ndarray
    lengths: np.ndarray

    def __post_init__(self):
        self.spins = np.ascontiguousarray(self.spins, dtype=np.float64)
        self.lengths = np.ascontiguousarray(self.lengths, dtype=np.float64)
        if self.spins.ndim != 1 or self.lengths.ndim != 1:
            raise ValueError("spins and lengths must be one-dimensional")
        if not np.all(np.abs(self.spins) == 1):
            raise ValueError("spins must be +1 or -1")
        if not np.all(self.lengths > 0):
            raise ValueError("bond lengths must be strictly positive")

    def copy(self) -> "Configuration":
        return Configuration(self.spins.copy(), self.lengths.copy())

    def check(self, lattice: Lattice):
        if self.spins.shape[0] != lattice.n_sites or self.lengths.shape[0] != lattice.n_bonds:
            raise ValueError(
                f"configuration has {self.spins.shape[0]} spins / {self.lengths.shape[0]} bonds, "
                f"lattice L={lattice.L} needs {lattice.n_sites} / {lattice.n_bonds}"
            )

    @classmethod
    def uniform(cls, lattice: Lattice, spin: int, r: float) -> "Configuration":
        return cls(np.full(lattice.n_sites, float(spin)), np.full(lattice.n_bonds, float(r)))


def j_of_r(profile: InteractionProfile, r: float) -> float:
    if not r > 0:
        raise ValueError(f"bond length must be positive, got {r!r}")
    return float(K.j_value(float(r), profile.packed()))


def j_array(profile: InteractionProfile, r) -> np.ndarray:
    """Vectorised J(r), written independently of the compiled scalar path."""
    r = np.asarray(r, dtype=np.float64)
    if profile.shape == "logistic":
        return profile.u + (profile.U_bar - profile.u) / (
            1.0 + np.exp((r - profile.k_mid) / profile.width)
        )
    in_k = (r >= profile.k_lo) & (r < profile.k_hi) & (r < profile.rho)
    strong = np.where(r < profile.k_mid, profile.U_bar, profile.U)
    return np.where(in_k, strong, profile.u)


def preset_params(R: float, delta: float) -> ModelParams:
    """Parameter family lambda = mu = 1, U = 2R^2, U_bar = (2 + delta^2) R^2,
    u = delta, rho = 1/R, eps = 2 delta R, h = 0."""
    if not R > 0:
        raise ValueError("R must be positive")
    if not 0 < delta < 1.0 / 3.0:
        raise ValueError(f"delta must lie in (0, 1/3), got {delta!r}")
    profile = InteractionProfile(U=2 * R * R, U_bar=(2 + delta * delta) * R * R, u=delta, rho=1.0 / R)
    return ModelParams(mu=1.0, lambda_=1.0, R=R, eps=2 * delta * R, profile=profile, h=0.0)


def total_energy(lattice: Lattice, params: ModelParams, config: Configuration) -> float:
    config.check(lattice)
    s, r = config.spins, config.lengths
    a, b = lattice.endpoints[:, 0], lattice.endpoints[:, 1]
    e = -np.sum(j_array(params.profile, r) * s[a] * s[b])
    e += params.mu * np.sum((r - params.R) ** 2)
    if params.lambda_:
        p, q = lattice.lam_pairs[:, 0], lattice.lam_pairs[:, 1]
        e += params.lambda_ * np.sum((r[p] - r[q]) ** 2)
    e -= params.h * np.sum(s)
    return float(e)


def delta_energy_spin_flip(lattice: Lattice, params: ModelParams, config: Configuration, site: int) -> float:
    config.check(lattice)
    lattice._check_site(site)
    return float(K.delta_spin(config.spins, config.lengths, lattice.site_bond, lattice.endpoints,
                              params.profile.packed(), params.h, site))


def delta_energy_bond_move(lattice: Lattice, params: ModelParams, config: Configuration,
                           bond: int, r_new: float) -> float:
    config.check(lattice)
    lattice._check_bond(bond)
    if not r_new > 0:
        raise ValueError(f"new bond length must be positive, got {r_new!r}")
    return float(K.delta_bond(config.spins, config.lengths, lattice.endpoints, lattice.lam_nbrs,
                              params.profile.packed(), params.mu, params.lambda_, params.R,
                              bond, float(r_new)))


def satisfies_low_temperature_condition(params: ModelParams) -> bool:
    """U - u > mu R^2 + 2 lambda rho^2, needed for the long-bond bound to decay."""
    p = params.profile
    return p.U - p.u > params.mu * params.R ** 2 + 2 * params.lambda_ * p.rho ** 2


def check_profile(profile: InteractionProfile, r_max: float, n: int = 10_000) -> dict:
    """Sample J on a dense grid over (0, r_max] and test the three profile constraints."""
    r = np.linspace(r_max / n, r_max, n)
    j = j_array(profile, r)
    tail = r >= profile.rho
    in_k = (r >= profile.k_lo) & (r < profile.k_hi)
    return {
        "weak_tail": bool(np.all(j[tail] <= profile.u)),
        "bounded": bool(np.all(j <= profile.U_bar) and math.isclose(j.max(), profile.U_bar)),
        "strong_on_K": bool(np.all(j[in_k] >= profile.U)),
        "measure_K": profile.strong_measure >= profile.rho / 2,
    }
