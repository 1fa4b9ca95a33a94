"""Pulse dynamics: first-order model against the full propagator."""

import numpy as np
import pytest

from halftrap.evolution import (
    DimensionCapError,
    ProbeParams,
    Pulse,
    build_joint_hamiltonian,
    embed_product,
    exact_state,
    perturbative_state,
    probe_lowering,
    probe_momentum,
)
from halftrap.fock import FockBasis
from halftrap.moments import moments_from_fock
from halftrap.orbitals import OverlapTable, build_overlap_table
from halftrap.states import number_state, superposition_state, to_fock_vector


@pytest.fixture(scope="module")
def table4(cache_dir):
    return build_overlap_table(4, cache_dir=cache_dir)


@pytest.fixture(scope="module")
def setup4(table4):
    basis = FockBasis(4, 3)
    probe = ProbeParams(levels=4)
    ham = build_joint_hamiltonian(table4, basis, probe)
    return table4, basis, probe, ham


def test_square_pulse_area():
    p = Pulse.square(T=0.5, g0=0.3)
    assert p.area == pytest.approx(0.15, rel=1e-15)
    assert p.value(0.25) == 0.3
    assert p.value(0.75) == 0.0


def test_sampled_pulse_area_matches_trapezoid():
    t = np.linspace(0.0, 1.0, 101)
    g = 0.2 * np.sin(np.pi * t) ** 2
    p = Pulse.sampled(t, g)
    assert p.area == pytest.approx(np.trapezoid(g, t), rel=1e-15)
    assert p.value(0.5) == pytest.approx(0.2, rel=1e-10)


def test_sampled_pulse_validation():
    with pytest.raises(ValueError):
        Pulse.sampled(np.array([0.5, 1.0]), np.array([0.1, 0.1]))
    with pytest.raises(ValueError):
        Pulse.sampled(np.array([0.0, 0.0, 1.0]), np.array([0.1, 0.1, 0.1]))


def test_probe_momentum_matrix():
    probe = ProbeParams(M=2.0, Omega=1.5, levels=2)
    b = probe_lowering(2)
    s = np.sqrt(2.0 * 1.5 / 2.0)
    expect = 1.0j * s * (b.conj().T - b)
    assert np.allclose(probe_momentum(probe), expect, atol=1e-15)
    p = probe_momentum(probe)
    assert np.allclose(p, p.conj().T, atol=1e-15)


def test_vacuum_gains_no_excitation(setup4):
    table, basis, probe, ham = setup4
    phi = to_fock_vector(number_state(0).components[0], basis)
    out = perturbative_state(phi, table, Pulse.square(T=0.1, g0=0.5), probe)
    assert np.all(out.tensor[:, 1, 0] == 0.0)
    assert np.all(out.tensor[:, 0, 1] == 0.0)


def test_branch_weight_matches_moments(setup4):
    # |branch|^2 = area^2 (M Omega / 2) m_II with the same truncation
    table, basis, probe, ham = setup4
    state = number_state(2)
    phi = to_fock_vector(state.components[0], basis)
    pulse = Pulse.square(T=0.1, g0=0.4)
    out = perturbative_state(phi, table, pulse, probe, include_H0=False)
    mom = moments_from_fock(state, table, basis.n_max)
    scale = pulse.area**2 * probe.M * probe.Omega / 2.0
    w10 = float(np.vdot(out.tensor[:, 1, 0], out.tensor[:, 1, 0]).real)
    w01 = float(np.vdot(out.tensor[:, 0, 1], out.tensor[:, 0, 1]).real)
    assert w10 == pytest.approx(scale * mom.mLL, rel=1e-12)
    assert w01 == pytest.approx(scale * mom.mRR, rel=1e-12)


def test_free_term_only_touches_ground_branch(setup4):
    table, basis, probe, ham = setup4
    phi = to_fock_vector(number_state(2).components[0], basis)
    pulse = Pulse.square(T=0.05, g0=0.4)
    with_h0 = perturbative_state(phi, table, pulse, probe, include_H0=True)
    without = perturbative_state(phi, table, pulse, probe, include_H0=False)
    assert np.array_equal(with_h0.tensor[:, 1, 0], without.tensor[:, 1, 0])
    assert np.array_equal(with_h0.tensor[:, 0, 1], without.tensor[:, 0, 1])
    assert not np.array_equal(with_h0.tensor[:, 0, 0], without.tensor[:, 0, 0])


def test_zero_coupling_is_free_evolution(setup4):
    table, basis, probe, ham = setup4
    phi = to_fock_vector(
        superposition_state(np.array([0.6, 0.0, 0.8])).components[0], basis
    )
    initial = embed_product(phi, probe)
    final = exact_state(initial, ham, Pulse.square(T=0.3, g0=0.0))
    # phases only: every amplitude keeps its magnitude, branches stay empty
    assert np.allclose(
        np.abs(final.tensor[:, 0, 0]), np.abs(initial.tensor[:, 0, 0]), atol=1e-12
    )
    assert np.abs(final.tensor[:, 1, 0]).max() < 1e-14
    assert np.abs(final.tensor[:, 0, 1]).max() < 1e-14


def test_exact_evolution_is_unitary(setup4):
    table, basis, probe, ham = setup4
    phi = to_fock_vector(number_state(2).components[0], basis)
    final = exact_state(embed_product(phi, probe), ham, Pulse.square(T=0.2, g0=0.8))
    assert final.norm() == pytest.approx(1.0, abs=1e-12)


def test_first_order_residual_scales_quadratically(setup4):
    table, basis, probe, ham = setup4
    phi = to_fock_vector(number_state(2).components[0], basis)
    residuals = []
    for T in (0.02, 0.01, 0.005):
        pulse = Pulse.square(T=T, g0=2.0)
        final = exact_state(embed_product(phi, probe), ham, pulse)
        model = perturbative_state(phi, table, pulse, probe, include_H0=True)
        diff = final.flat() - model.flat()
        residuals.append(float(np.sqrt(np.vdot(diff, diff).real)))
    for i in range(2):
        assert 3.0 <= residuals[i] / residuals[i + 1] <= 5.0


def test_left_right_swap_mirrors_the_block(setup4):
    table, basis, probe, ham = setup4
    swapped = OverlapTable(
        K=table.K,
        lambdaL=table.lambdaR.copy(),
        lambdaR=table.lambdaL.copy(),
        quadrature_error=table.quadrature_error.copy(),
        params=table.params,
        quad_tol=table.quad_tol,
    )
    phi = to_fock_vector(number_state(2).components[0], basis)
    pulse = Pulse.square(T=0.02, g0=1.0)
    ham_swapped = build_joint_hamiltonian(swapped, basis, probe)
    a = exact_state(embed_product(phi, probe), ham, pulse)
    b = exact_state(embed_product(phi, probe), ham_swapped, pulse)
    wa10 = float(np.vdot(a.tensor[:, 1, 0], a.tensor[:, 1, 0]).real)
    wb01 = float(np.vdot(b.tensor[:, 0, 1], b.tensor[:, 0, 1]).real)
    assert wa10 == pytest.approx(wb01, rel=1e-12)


def test_sampled_pulse_agrees_with_square(setup4):
    table, basis, probe, ham = setup4
    phi = to_fock_vector(number_state(1).components[0], basis)
    T, g0 = 0.05, 1.0
    square = Pulse.square(T=T, g0=g0)
    t = np.linspace(0.0, T, 41)
    flat = Pulse.sampled(t, np.full_like(t, g0))
    a = exact_state(embed_product(phi, probe), ham, square)
    b = exact_state(embed_product(phi, probe), ham, flat)
    overlap = abs(np.vdot(a.flat(), b.flat()))
    assert overlap == pytest.approx(1.0, abs=1e-8)


def test_dimension_cap_enforced(table4):
    basis = FockBasis(4, 3)
    probe = ProbeParams(levels=4)
    with pytest.raises(DimensionCapError):
        build_joint_hamiltonian(table4, basis, probe, dim_cap=100)
