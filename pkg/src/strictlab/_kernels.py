"""Compiled inner loops shared by the model, the sampler and the observables.

The interaction profile travels as a flat float64 array (see
``InteractionProfile.packed``) so that the kernels stay free of Python objects.
"""

import math

import numpy as np
from numba import njit

# packed profile layout
P_SHAPE, P_UBAR, P_U, P_SMALLU, P_RHO, P_KLO, P_KHI, P_WIDTH = range(8)
SHAPE_STEP, SHAPE_LOGISTIC = 0.0, 1.0

# record columns written by measure_into
N_FIELDS = 8
F_LT, F_MID, F_GT, F_M, F_STAGGER, F_PAIR, F_ENERGY, F_M2 = range(N_FIELDS)


@njit(cache=True, nogil=True)
def j_value(r, prof):
    if prof[P_SHAPE] == SHAPE_LOGISTIC:
        c = 0.5 * (prof[P_KLO] + prof[P_KHI])
        return prof[P_SMALLU] + (prof[P_UBAR] - prof[P_SMALLU]) / (
            1.0 + math.exp((r - c) / prof[P_WIDTH])
        )
    if r >= prof[P_RHO]:
        return prof[P_SMALLU]
    if prof[P_KLO] <= r < prof[P_KHI]:
        if r < 0.5 * (prof[P_KLO] + prof[P_KHI]):
            return prof[P_UBAR]
        return prof[P_U]
    return prof[P_SMALLU]


@njit(cache=True, nogil=True)
def delta_spin(spins, lengths, site_bond, endpoints, prof, h, site):
    s = spins[site]
    acc = h
    for k in range(4):
        b = site_bond[site, k]
        a = endpoints[b, 0]
        t = endpoints[b, 1] if a == site else a
        acc += j_value(lengths[b], prof) * spins[t]
    return 2.0 * s * acc


@njit(cache=True, nogil=True)
def delta_bond(spins, lengths, endpoints, lam_nbrs, prof, mu, lam, R, bond, r_new):
    r_old = lengths[bond]
    ss = spins[endpoints[bond, 0]] * spins[endpoints[bond, 1]]
    d = -(j_value(r_new, prof) - j_value(r_old, prof)) * ss
    d += mu * ((r_new - R) ** 2 - (r_old - R) ** 2)
    if lam != 0.0:
        acc = 0.0
        for k in range(4):
            rn = lengths[lam_nbrs[bond, k]]
            acc += (r_new - rn) ** 2 - (r_old - rn) ** 2
        d += lam * acc
    return d


@njit(cache=True, nogil=True)
def energy(spins, lengths, endpoints, lam_pairs, prof, mu, lam, R, h):
    e = 0.0
    for b in range(lengths.shape[0]):
        r = lengths[b]
        e -= j_value(r, prof) * spins[endpoints[b, 0]] * spins[endpoints[b, 1]]
        e += mu * (r - R) ** 2
    if lam != 0.0:
        for p in range(lam_pairs.shape[0]):
            e += lam * (lengths[lam_pairs[p, 0]] - lengths[lam_pairs[p, 1]]) ** 2
    if h != 0.0:
        for s in range(spins.shape[0]):
            e -= h * spins[s]
    return e


@njit(cache=True, nogil=True)
def measure_into(out, spins, lengths, endpoints, lam_nbrs, lam_pairs, prof,
                 mu, lam, R, h, eps):
    rho = prof[P_RHO]
    nb = lengths.shape[0]
    n = spins.shape[0]
    lt = 0
    gt = 0
    stag = 0
    for b in range(nb):
        r = lengths[b]
        if r <= rho:
            lt += 1
            if spins[endpoints[b, 0]] != spins[endpoints[b, 1]]:
                stag += 1
        elif r >= rho + eps:
            gt += 1
    pair = 0
    for b in range(nb):
        if lengths[b] <= rho:
            for k in range(4):
                if lengths[lam_nbrs[b, k]] >= rho + eps:
                    pair += 1
    m = 0.0
    for s in range(n):
        m += spins[s]
    m /= n
    out[F_LT] = lt / nb
    out[F_MID] = (nb - lt - gt) / nb
    # 1 - (a + b) makes the three fractions sum to exactly 1 in floating point
    out[F_GT] = 1.0 - (out[F_LT] + out[F_MID])
    out[F_M] = m
    out[F_M2] = m * m
    out[F_STAGGER] = stag / nb
    out[F_PAIR] = pair / (4.0 * nb)
    out[F_ENERGY] = energy(spins, lengths, endpoints, lam_pairs, prof, mu, lam, R, h) / n


@njit(cache=True, nogil=True)
def sweeps(spins, lengths, endpoints, site_bond, lam_nbrs, lam_pairs, prof,
           mu, lam, R, h, eps, beta, grid_mode, width, grid,
           u_spin, prop, u_bond, stride, phase, records, rec_start, counts):
    """Advance ``u_spin.shape[0]`` sweeps in typewriter order.

    ``prop`` holds unit normals (continuous mode) or grid indices stored as
    floats (grid mode).  Sweep ``k`` is measured into the next free row of
    ``records`` (starting at ``rec_start``) when ``(phase + k + 1)`` is a
    multiple of ``stride``.  ``counts`` accumulates
    [spin accepted, spin tried, bond accepted, bond tried].
    """
    n = spins.shape[0]
    nb = lengths.shape[0]
    rec = rec_start
    for k in range(u_spin.shape[0]):
        for s in range(n):
            dE = delta_spin(spins, lengths, site_bond, endpoints, prof, h, s)
            counts[1] += 1
            if dE <= 0.0 or u_spin[k, s] < math.exp(-beta * dE):
                spins[s] = -spins[s]
                counts[0] += 1
        for b in range(nb):
            if grid_mode:
                r_new = grid[int(prop[k, b])]
            else:
                r_new = lengths[b] + width * prop[k, b]
                if r_new < 0.0:
                    r_new = -r_new
            counts[3] += 1
            if r_new <= 0.0:
                continue
            dE = delta_bond(spins, lengths, endpoints, lam_nbrs, prof, mu, lam, R, b, r_new)
            if dE <= 0.0 or u_bond[k, b] < math.exp(-beta * dE):
                lengths[b] = r_new
                counts[2] += 1
        if stride > 0 and (phase + k + 1) % stride == 0:
            measure_into(records[rec], spins, lengths, endpoints, lam_nbrs,
                         lam_pairs, prof, mu, lam, R, h, eps)
            rec += 1
    return rec
