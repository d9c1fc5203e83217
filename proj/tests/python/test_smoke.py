import math

import numpy as np
import pytest

import gravising
from gravising import FieldSpec, LatticeGeometry, droplet, gchain, mc, profile, thermo


def test_version():
    assert gravising.__version__ == "0.1.0"


def test_exact_1d_isotherm():
    b = thermo.Backend.exact_1d(1.0)
    h = 0.3
    expected = math.sinh(h) / math.sqrt(math.sinh(h) ** 2 + math.exp(-4.0))
    assert b.magnetization(h) == pytest.approx(expected, rel=1e-12)
    assert b.spontaneous_magnetization() == 0.0
    assert b.field_for_magnetization(b.magnetization(h)) == pytest.approx(h, abs=1e-10)


def test_mean_field_plateau():
    b = thermo.Backend.mean_field(1.0, 2)
    m_star = b.spontaneous_magnetization()
    assert m_star == pytest.approx(math.tanh(4.0 * m_star), abs=1e-12)
    assert b.has_plateau()


def test_symmetric_interface():
    geometry = LatticeGeometry(64, 1, 8)
    field = FieldSpec.gravitational(geometry, -1.0)
    sol = profile.optimal_profile(field, thermo.Backend.mean_field(1.0, 2), 0.0)
    assert sol.hbar == pytest.approx(-0.5, abs=1e-8)
    assert sol.interface_height == pytest.approx(0.5, abs=1e-8)
    assert sol.profile.values.shape == (8,)
    assert sol.profile.mean() == pytest.approx(0.0, abs=1e-12)


def test_profile_matches_continuum():
    backend = thermo.Backend.exact_1d(1.0)
    geometry = LatticeGeometry(512, 1, 16)
    sol = profile.optimal_profile(FieldSpec.gravitational(geometry, -1.0), backend, 0.4)
    limit = profile.continuum_gravity_profile(backend, -1.0, 0.4)
    heights = [geometry.cell_height(k) for k in range(geometry.cell_count)]
    gap = max(abs(q - limit(x)) for q, x in zip(sol.profile.values, heights))
    assert gap <= 2e-2


def test_area_identities():
    n = 10
    with_height, variance = gchain.area_covariances(gchain.GaussianChain(n))
    i = np.arange(1, n + 1)
    np.testing.assert_allclose(with_height, i * (n + 1 - i), rtol=1e-12)
    assert variance == pytest.approx(n * (n + 1) * (n + 2) / 6, rel=1e-12)


def test_chain_sampler_reproducible():
    chain = gchain.GaussianChain.with_scaled_mass(16, 1.0, constrained=True)
    a = gchain.sample(chain, 7, 20, threads=1)
    b = gchain.sample(chain, 7, 20, threads=2)
    assert a.shape == (20, 16)
    np.testing.assert_array_equal(a, b)
    # The constrained chain has zero signed area.
    np.testing.assert_allclose(a.sum(axis=1), 0.0, atol=1e-9)


def test_window_covariance_near_ou():
    chain = gchain.GaussianChain.with_scaled_mass(4096, 1.0)
    exact = gchain.rescaled_covariance(chain, gchain.Scaling.Window, 0.0, 0.5, 1.0)
    assert exact == pytest.approx(gchain.ou_covariance(1.0, 0.0, 0.5), rel=2e-2)


def test_sampler_conserves_magnetization():
    geometry = LatticeGeometry(16, 2, 4)
    field = FieldSpec.gravitational(geometry, -1.0)
    magnetization = mc.quantize_magnetization(0.25, geometry)
    config = mc.initial_configuration(geometry, mc.Boundary.free(), magnetization,
                                      mc.InitialState.Random, field, 3)
    sampler = mc.CanonicalSampler(config, 0.5, field, mc.ProposalKind.ArbitraryPair, 4)
    sampler.sweep(20)
    assert sampler.configuration().magnetization() == magnetization
    assert sampler.energy() == pytest.approx(mc.energy(sampler.configuration(), field), abs=1e-9)
    pgm = mc.snapshot_bytes(sampler.configuration())
    assert pgm.startswith(b"P5\n16 16\n255\n")


def test_wulff_disc_and_minimizer():
    tau = droplet.SurfaceTension.isotropic()
    disc = droplet.wulff_shape(tau, 0.1)
    assert droplet.isoperimetric_ratio(disc) == pytest.approx(1.0, abs=1e-4)
    result = droplet.minimize_droplet(tau, 0.0, 1.0, 0.1, vertices=64)
    assert result["converged"]
    assert result["energy"] == pytest.approx(2 * math.sqrt(math.pi * 0.1), rel=2e-3)
    assert np.all(np.diff(result["trace"]) <= 0)


def test_validation_errors_raise():
    with pytest.raises(ValueError):
        LatticeGeometry(10, 1, 3)
    with pytest.raises(ValueError):
        gchain.GaussianChain(0)
