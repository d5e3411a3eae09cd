import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from strictlab.lattice import X, Y, Lattice


def site(lat, x, y):
    return lat.site_index(x, y)


def bond(lat, x, y, d):
    return lat.bond_index(site(lat, x, y), d)


def test_counts():
    for L in (2, 3, 4, 7):
        lat = Lattice(L)
        assert lat.n_sites == L * L
        assert lat.n_bonds == 2 * L * L
        assert lat.lam_pairs.shape == (4 * L * L, 2)


@pytest.mark.parametrize("L", [0, 1, 2.5, -3])
def test_rejects_bad_size(L):
    with pytest.raises(ValueError):
        Lattice(L)


def test_bond_endpoints_examples():
    lat = Lattice(4)
    assert lat.bond_endpoints(bond(lat, 0, 0, X)) == (site(lat, 0, 0), site(lat, 1, 0))
    assert lat.bond_endpoints(bond(lat, 3, 0, X)) == (site(lat, 3, 0), site(lat, 0, 0))
    lat2 = Lattice(2)
    assert lat2.bond_endpoints(bond(lat2, 1, 1, Y)) == (site(lat2, 1, 1), site(lat2, 1, 0))


def test_out_of_range_is_usage_error():
    lat = Lattice(4)
    with pytest.raises(IndexError):
        lat.bond_endpoints(lat.n_bonds)
    with pytest.raises(IndexError):
        lat.site_bonds(-1)
    with pytest.raises(IndexError):
        lat.lambda_neighbors(99)


def test_site_bonds_examples():
    lat = Lattice(4)
    got = set(lat.site_bonds(site(lat, 1, 1)))
    assert got == {bond(lat, 1, 1, X), bond(lat, 1, 1, Y), bond(lat, 0, 1, X), bond(lat, 1, 0, Y)}
    assert bond(lat, 3, 0, X) in lat.site_bonds(site(lat, 0, 0))


@pytest.mark.parametrize("L", [2, 3, 5])
def test_degree_and_consistency(L):
    lat = Lattice(L)
    for s in range(lat.n_sites):
        bs = lat.site_bonds(s)
        assert len(set(bs)) == 4
        for b in bs:
            assert s in lat.bond_endpoints(b)
    for b in range(lat.n_bonds):
        for s in lat.bond_endpoints(b):
            assert b in lat.site_bonds(s)


def test_two_by_two_doubled_edges_are_distinct():
    lat = Lattice(2)
    a, b = site(lat, 0, 0), site(lat, 1, 0)
    joining = [k for k in range(lat.n_bonds) if set(lat.bond_endpoints(k)) == {a, b}]
    assert len(joining) == 2


def brute_lambda_neighbours(L):
    """Enumerate all bond pairs; keep perpendicular pairs sharing an endpoint t whose
    free ends s, s' satisfy |s - s'| = sqrt(2) in unwrapped coordinates."""
    bonds = []
    for y, x, d in itertools.product(range(L), range(L), (X, Y)):
        step = (1, 0) if d == X else (0, 1)
        bonds.append(((x, y), step))
    out = {}
    for i, (p, step) in enumerate(bonds):
        ends = [(p, step), (((p[0] + step[0]) % L, (p[1] + step[1]) % L), (-step[0], -step[1]))]
        found = []
        for j, (q, step2) in enumerate(bonds):
            if i == j:
                continue
            ends2 = [(q, step2), (((q[0] + step2[0]) % L, (q[1] + step2[1]) % L), (-step2[0], -step2[1]))]
            for t, v in ends:          # v points from t to the free end s
                for t2, v2 in ends2:
                    if t == t2 and (v[0] - v2[0]) ** 2 + (v[1] - v2[1]) ** 2 == 2:
                        found.append(j)
        out[i] = found
    return out


@pytest.mark.parametrize("L", [2, 3, 4])
def test_lambda_neighbours_match_enumeration(L):
    lat = Lattice(L)
    brute = brute_lambda_neighbours(L)
    for b in range(lat.n_bonds):
        assert sorted(lat.lambda_neighbors(b)) == sorted(brute[b])
        assert len(brute[b]) == 4


def test_lambda_neighbours_example():
    lat = Lattice(4)
    got = set(lat.lambda_neighbors(bond(lat, 1, 1, X)))
    assert got == {bond(lat, 1, 1, Y), bond(lat, 1, 0, Y), bond(lat, 2, 1, Y), bond(lat, 2, 0, Y)}


@given(L=st.integers(2, 9), data=st.data())
def test_lambda_relation_symmetric_and_perpendicular(L, data):
    lat = Lattice(L)
    b = data.draw(st.integers(0, lat.n_bonds - 1))
    nbrs = lat.lambda_neighbors(b)
    assert len(nbrs) == 4
    for n in nbrs:
        assert n % 2 != b % 2
        assert b in lat.lambda_neighbors(n)


@pytest.mark.parametrize("L", [2, 3, 6])
def test_pair_list_counts_each_unordered_pair_once(L):
    lat = Lattice(L)
    assert sum(len(lat.lambda_neighbors(b)) for b in range(lat.n_bonds)) == 8 * L * L
    pairs = {frozenset(p) for p in lat.lam_pairs.tolist()}
    assert len(pairs) == 4 * L * L
    expected = {frozenset((b, n)) for b in range(lat.n_bonds) for n in lat.lambda_neighbors(b)}
    assert pairs == expected


def test_tables_read_only():
    lat = Lattice(3)
    with pytest.raises(ValueError):
        lat.endpoints[0, 0] = 5
    assert np.array_equal(Lattice(3).lam_nbrs, lat.lam_nbrs)
