"""Geometry of the periodic L x L square lattice.

Sites are numbered row-major, ``site = y * L + x``.  Every site owns two
bonds, one in +x and one in +y, so ``bond = 2 * site + direction`` with
``direction`` 0 for x and 1 for y.  On the 2 x 2 torus the two bonds joining
a pair of sites are kept as distinct bonds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

X, Y = 0, 1


@dataclass(frozen=True)
class Lattice:
    """Periodic two-dimensional square lattice of linear size ``L``.

    The neighbour tables are built once on construction and are read-only
    afterwards:

    ``endpoints``  (n_bonds, 2)  sites joined by each bond
    ``site_bond``  (n_sites, 4)  bonds incident to each site
    ``lam_nbrs``   (n_bonds, 4)  perpendicular bonds sharing an endpoint
    ``lam_pairs``  (4 L^2, 2)    each such unordered bond pair once
    """

    L: int
    endpoints: np.ndarray = field(init=False, repr=False, compare=False)
    site_bond: np.ndarray = field(init=False, repr=False, compare=False)
    lam_nbrs: np.ndarray = field(init=False, repr=False, compare=False)
    lam_pairs: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.L) != self.L or self.L < 2:
            raise ValueError(f"lattice size must be an integer >= 2, got {self.L!r}")
        L = int(self.L)
        n = L * L
        sites = np.arange(n)
        x, y = sites % L, sites // L
        right = y * L + (x + 1) % L
        up = ((y + 1) % L) * L + x
        left = y * L + (x - 1) % L
        down = ((y - 1) % L) * L + x

        endpoints = np.empty((2 * n, 2), dtype=np.int64)
        endpoints[0::2, 0] = sites
        endpoints[0::2, 1] = right
        endpoints[1::2, 0] = sites
        endpoints[1::2, 1] = up

        site_bond = np.stack(
            [2 * sites + X, 2 * sites + Y, 2 * left + X, 2 * down + Y], axis=1
        ).astype(np.int64)

        # A bond's lambda-neighbours are the perpendicular bonds at either end.
        perp = np.empty((n, 2, 2), dtype=np.int64)
        perp[:, X] = np.stack([2 * sites + Y, 2 * down + Y], axis=1)
        perp[:, Y] = np.stack([2 * sites + X, 2 * left + X], axis=1)
        lam = np.empty((2 * n, 4), dtype=np.int64)
        for d in (X, Y):
            b = 2 * sites + d
            a, c = endpoints[b, 0], endpoints[b, 1]
            lam[b, :2] = perp[a, d]
            lam[b, 2:] = perp[c, d]

        # Unordered pairs: keep (x-bond, y-bond) orientation only.
        xb = 2 * sites + X
        pairs = np.stack([np.repeat(xb, 4), lam[xb].ravel()], axis=1)

        for name, arr in (
            ("endpoints", endpoints),
            ("site_bond", site_bond),
            ("lam_nbrs", lam),
            ("lam_pairs", pairs),
        ):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "L", L)

    @property
    def n_sites(self) -> int:
        return self.L * self.L

    @property
    def n_bonds(self) -> int:
        return 2 * self.L * self.L

    def site_index(self, x: int, y: int) -> int:
        return (y % self.L) * self.L + (x % self.L)

    def site_coords(self, site: int) -> tuple[int, int]:
        self._check_site(site)
        return site % self.L, site // self.L

    def bond_index(self, site: int, direction: int) -> int:
        self._check_site(site)
        if direction not in (X, Y):
            raise ValueError(f"direction must be 0 (x) or 1 (y), got {direction!r}")
        return 2 * site + direction

    def bond_endpoints(self, bond: int) -> tuple[int, int]:
        self._check_bond(bond)
        s, t = self.endpoints[bond]
        return int(s), int(t)

    def site_bonds(self, site: int) -> list[int]:
        """Own x- and y-bond, then the left neighbour's x-bond and the lower neighbour's y-bond."""
        self._check_site(site)
        return [int(b) for b in self.site_bond[site]]

    def lambda_neighbors(self, bond: int) -> list[int]:
        """Bonds l' = <s't> sharing an endpoint t with ``bond`` = <st> and |s - s'| = sqrt(2)."""
        self._check_bond(bond)
        return [int(b) for b in self.lam_nbrs[bond]]

    def parity(self) -> np.ndarray:
        """+1 on sites with x + y even, -1 otherwise."""
        s = np.arange(self.n_sites)
        return np.where(((s % self.L) + (s // self.L)) % 2 == 0, 1, -1).astype(np.int8)

    def _check_site(self, site):
        if not 0 <= site < self.n_sites:
            raise IndexError(f"site {site} out of range for L={self.L}")

    def _check_bond(self, bond):
        if not 0 <= bond < self.n_bonds:
            raise IndexError(f"bond {bond} out of range for L={self.L}")
