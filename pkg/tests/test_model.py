import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from strictlab import (Configuration, InteractionProfile, Lattice, delta_energy_bond_move,
                       delta_energy_spin_flip, j_of_r, preset_params, total_energy)
from strictlab.model import check_profile, j_array, satisfies_low_temperature_condition

from conftest import random_config


@pytest.mark.parametrize("r, expected", [(0.2, 8.04), (0.3, 8.0), (0.6, 0.1), (0.5, 0.1), (0.25, 8.0)])
def test_j_of_r_preset(preset, r, expected):
    assert j_of_r(preset.profile, r) == pytest.approx(expected, rel=1e-15)


def test_j_of_r_domain(preset):
    with pytest.raises(ValueError):
        j_of_r(preset.profile, 0.0)
    with pytest.raises(ValueError):
        j_of_r(preset.profile, -1.0)


@pytest.mark.parametrize("shape", ["step", "logistic"])
def test_compiled_and_vectorised_profiles_agree(preset, shape):
    prof = InteractionProfile(U=8, U_bar=8.04, u=0.1, rho=0.5, k_lo=0.1, k_hi=0.45, shape=shape)
    r = np.linspace(1e-4, 8.0, 4001)
    fast = np.array([j_of_r(prof, x) for x in r])
    np.testing.assert_allclose(fast, j_array(prof, r), rtol=1e-14)


def test_default_profile_constraints(preset):
    checks = check_profile(preset.profile, r_max=4 * preset.R, n=10_000)
    assert all(checks.values()), checks
    assert preset.profile.kappa == pytest.approx(0.04 / 8)


def test_preset_values():
    p = preset_params(2.0, 0.1)
    assert (p.mu, p.lambda_, p.h) == (1.0, 1.0, 0.0)
    assert p.profile.U == pytest.approx(8.0)
    assert p.profile.U_bar == pytest.approx(8.04)
    assert p.profile.u == pytest.approx(0.1)
    assert p.rho == pytest.approx(0.5)
    assert p.eps == pytest.approx(0.4)
    q = preset_params(1.0, 0.1)
    assert (q.profile.U, q.profile.U_bar, q.rho, q.eps) == pytest.approx((2.0, 2.01, 1.0, 0.2))
    # U - u > mu R^2 + 2 lambda rho^2: 7.9 > 4.5
    assert satisfies_low_temperature_condition(p)


@pytest.mark.parametrize("delta", [0.0, -0.1, 1 / 3, 0.5])
def test_preset_rejects_delta(delta):
    with pytest.raises(ValueError):
        preset_params(2.0, delta)


def test_total_energy_examples(lat4, preset):
    c = Configuration.uniform(lat4, 1, 2.0)
    assert total_energy(lat4, preset, c) == pytest.approx(-3.2, abs=1e-12)
    assert total_energy(lat4, preset.with_field(0.5), c) == pytest.approx(-11.2, abs=1e-12)
    c.spins[5] = -1
    assert total_energy(lat4, preset, c) == pytest.approx(-2.4, abs=1e-12)


def test_size_mismatch(lat4, preset):
    c = Configuration.uniform(Lattice(3), 1, 2.0)
    with pytest.raises(ValueError):
        total_energy(lat4, preset, c)


def test_configuration_validation():
    with pytest.raises(ValueError):
        Configuration(np.array([1.0, 0.0]), np.ones(4))
    with pytest.raises(ValueError):
        Configuration(np.ones(2), np.array([1.0, 0.0, 1.0, 1.0]))


def test_delta_spin_examples(lat4, preset):
    c = Configuration.uniform(lat4, 1, 2.0)
    for s in (0, 7, 15):
        assert delta_energy_spin_flip(lat4, preset, c, s) == pytest.approx(0.8, abs=1e-12)
        assert delta_energy_spin_flip(lat4, preset.with_field(0.25), c, s) == pytest.approx(1.3, abs=1e-12)
    with pytest.raises(IndexError):
        delta_energy_spin_flip(lat4, preset, c, 16)


def test_delta_bond_examples(lat4, preset):
    c = Configuration.uniform(lat4, 1, 2.0)
    assert delta_energy_bond_move(lat4, preset, c, 3, 2.0) == 0.0
    # -(8 - 0.1) + (0.4 - 2)^2 + 4 (0.4 - 2)^2
    assert delta_energy_bond_move(lat4, preset, c, 3, 0.4) == pytest.approx(4.9, abs=1e-12)
    with pytest.raises(ValueError):
        delta_energy_bond_move(lat4, preset, c, 3, 0.0)


def _recompute(lat, p, c, mutate):
    before = total_energy(lat, p, c)
    d = c.copy()
    mutate(d)
    return total_energy(lat, p, d) - before, max(1.0, abs(before))


@pytest.mark.parametrize("L", [2, 3, 16])
def test_incremental_matches_recompute(L):
    lat = Lattice(L)
    rng = np.random.default_rng(L)
    p = preset_params(2.0, 0.1).with_field(0.3)
    for _ in range(200):
        c = random_config(lat, rng)
        s = int(rng.integers(lat.n_sites))
        ref, scale = _recompute(lat, p, c, lambda d: d.spins.__setitem__(s, -d.spins[s]))
        assert abs(delta_energy_spin_flip(lat, p, c, s) - ref) <= 1e-9 * scale
        b, r_new = int(rng.integers(lat.n_bonds)), float(rng.uniform(0.01, 4.0))
        ref, scale = _recompute(lat, p, c, lambda d: d.lengths.__setitem__(b, r_new))
        assert abs(delta_energy_bond_move(lat, p, c, b, r_new) - ref) <= 1e-9 * scale


def test_lambda_zero_drops_geometric_term(lat4):
    p = preset_params(2.0, 0.1)
    from dataclasses import replace
    p0 = replace(p, lambda_=0.0)
    rng = np.random.default_rng(3)
    c = random_config(lat4, rng)
    diff = total_energy(lat4, p, c) - total_energy(lat4, p0, c)
    pairs = lat4.lam_pairs
    assert diff == pytest.approx(np.sum((c.lengths[pairs[:, 0]] - c.lengths[pairs[:, 1]]) ** 2))


@settings(max_examples=40, deadline=None)
@given(L=st.integers(2, 6), seed=st.integers(0, 2**32 - 1), dx=st.integers(0, 5), dy=st.integers(0, 5))
def test_symmetries(L, seed, dx, dy):
    lat = Lattice(L)
    p = preset_params(2.0, 0.1)
    c = random_config(lat, np.random.default_rng(seed))
    e = total_energy(lat, p, c)
    flipped = Configuration(-c.spins, c.lengths)
    assert total_energy(lat, p, flipped) == pytest.approx(e, rel=1e-12, abs=1e-12)
    spins = np.roll(c.spins.reshape(L, L), (dy, dx), axis=(0, 1)).ravel()
    lengths = np.roll(c.lengths.reshape(L, L, 2), (dy, dx), axis=(0, 1)).ravel()
    assert total_energy(lat, p, Configuration(spins, lengths)) == pytest.approx(e, rel=1e-12, abs=1e-12)
