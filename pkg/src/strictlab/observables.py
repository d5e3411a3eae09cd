"""Bond-length indicators, magnetisation, phase labels and error bars."""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass

import numpy as np

from . import _kernels as K
from .lattice import Lattice
from .model import Configuration, ModelParams, total_energy

# Order of the columns in a record array; matches the compiled kernel.
FIELDS = ("f_lt", "f_mid", "f_gt", "m", "f_stagger", "f_pair", "energy_per_site", "m2")

CONTRACTED_THRESHOLD = 0.75
MAX_BINS = 128


class BondClass(enum.Enum):
    LT = "lt"     # r <= rho
    MID = "mid"   # rho < r < rho + eps
    GT = "gt"     # r >= rho + eps


class Phase(str, enum.Enum):
    CONTRACTED = "Contracted"
    EXPANDED = "Expanded"
    UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class ObservableRecord:
    """Bond and site averages of one configuration.

    ``f_stagger`` is the fraction of bonds that are short and join opposite
    spins.  ``f_pair`` is the fraction of ordered lambda-neighbour pairs
    (l, l') with l short and l' long.
    """

    f_lt: float
    f_mid: float
    f_gt: float
    m: float
    f_stagger: float
    f_pair: float
    energy_per_site: float
    m2: float

    @classmethod
    def from_row(cls, row) -> "ObservableRecord":
        return cls(*(float(v) for v in row))

    def as_dict(self) -> dict:
        return asdict(self)


def classify_bond(r: float, rho: float, eps: float) -> BondClass:
    if not (r > 0 and rho > 0 and eps > 0):
        raise ValueError("r, rho and eps must all be positive")
    if r <= rho:
        return BondClass.LT
    if r >= rho + eps:
        return BondClass.GT
    return BondClass.MID


def bond_classes(lengths, rho: float, eps: float) -> np.ndarray:
    """Per-bond class codes: 0 = LT, 1 = MID, 2 = GT."""
    r = np.asarray(lengths)
    return np.where(r <= rho, 0, np.where(r >= rho + eps, 2, 1))


def measure(lattice: Lattice, params: ModelParams, config: Configuration) -> ObservableRecord:
    config.check(lattice)
    s, r = config.spins, config.lengths
    rho, eps = params.rho, params.eps
    lt = r <= rho
    gt = r >= rho + eps
    nb = lattice.n_bonds
    n_lt, n_gt = int(lt.sum()), int(gt.sum())
    a, b = lattice.endpoints[:, 0], lattice.endpoints[:, 1]
    m = float(s.mean())
    f_lt, f_mid = n_lt / nb, (nb - n_lt - n_gt) / nb
    return ObservableRecord(
        f_lt=f_lt,
        f_mid=f_mid,
        f_gt=1.0 - (f_lt + f_mid),  # sums to exactly 1 in floating point
        m=m,
        f_stagger=float(np.mean(lt & (s[a] != s[b]))),
        f_pair=float(np.mean(lt[:, None] & gt[lattice.lam_nbrs])),
        energy_per_site=total_energy(lattice, params, config) / lattice.n_sites,
        m2=m * m,
    )


def measure_fast(lattice: Lattice, params: ModelParams, config: Configuration) -> np.ndarray:
    """Compiled counterpart of :func:`measure`, returning a row in ``FIELDS`` order."""
    out = np.empty(K.N_FIELDS)
    K.measure_into(out, config.spins, config.lengths, lattice.endpoints, lattice.lam_nbrs,
                   lattice.lam_pairs, params.profile.packed(), params.mu, params.lambda_,
                   params.R, params.h, params.eps)
    return out


def per_bond_classes(lattice: Lattice, params: ModelParams, config: Configuration) -> np.ndarray:
    """Per-bond breakdown of the indicators, shaped (L, L, 2) as [y, x, direction]."""
    config.check(lattice)
    return bond_classes(config.lengths, params.rho, params.eps).reshape(lattice.L, lattice.L, 2)


def classify_state(mean_f_lt: float, mean_f_gt: float) -> Phase:
    if mean_f_lt >= CONTRACTED_THRESHOLD:
        return Phase.CONTRACTED
    if mean_f_gt >= CONTRACTED_THRESHOLD:
        return Phase.EXPANDED
    return Phase.UNDETERMINED


def integrated_autocorr_time(series, c: float = 6.0) -> float:
    """Integrated autocorrelation time 1/2 + sum_t rho(t) with a self-consistent window.

    The window is the smallest M with M >= c * tau(M).  A constant series
    returns 0.5.
    """
    x = np.asarray(series, dtype=np.float64)
    n = x.size
    x = x - x.mean()
    var = np.dot(x, x) / n
    if var <= 1e-300 * max(1.0, np.max(np.abs(x))):
        return 0.5
    nfft = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(x, nfft)
    acf = np.fft.irfft(f * np.conj(f), nfft)[:n] / (n * var)
    tau = 0.5
    for m in range(1, n):
        tau += acf[m]
        if m >= c * tau:
            break
    return float(tau)


def binned_stats(series) -> tuple[float, float, float]:
    """Mean, standard error and integrated autocorrelation time of a time series.

    The error comes from bin means with bin length at least 16 tau_int, so
    that neighbouring bins are effectively independent, and at least n / 128
    so that slow tails the windowed tau misses still land inside one bin.
    """
    x = np.asarray(series, dtype=np.float64)
    if x.ndim != 1 or x.size < 2:
        raise ValueError("binned_stats needs a one-dimensional series of length >= 2")
    mean = float(x.mean())
    tau = integrated_autocorr_time(x)
    size = max(1, math.ceil(16 * max(tau, 0.5)), x.size // MAX_BINS)
    size = min(size, x.size // 2)
    nbins = x.size // size
    bins = x[: nbins * size].reshape(nbins, size).mean(axis=1)
    err = float(bins.std(ddof=1) / math.sqrt(nbins))
    return mean, err, tau


def summarize(records: np.ndarray) -> dict:
    """Binned statistics for every column of a record array, plus |m|."""
    out = {}
    taus = []
    cols = {name: records[:, i] for i, name in enumerate(FIELDS)}
    cols["m_abs"] = np.abs(cols["m"])
    for name, col in cols.items():
        if col.size >= 2:
            mean, err, tau = binned_stats(col)
        else:
            mean, err, tau = (float(col[0]) if col.size else math.nan), math.nan, math.nan
        out[name] = mean
        out[name + "_err"] = err
        taus.append(tau)
    out["tau_int_max"] = float(np.nanmax(taus)) if records.shape[0] >= 2 else math.nan
    out["phase"] = classify_state(out["f_lt"], out["f_gt"]).value if records.shape[0] else ""
    return out
