import itertools

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from localcontrol.quantum import (DegenerateCodingError, DimensionMismatchError, DomainError,
                                  StateVector, basis_state, partial_trace, polar_unitary,
                                  project_component, propagator, random_density_matrix,
                                  random_state, reduced_state, swap_apply, tensor_product,
                                  trace_norm, unvec, vec)

S2 = 1 / np.sqrt(2)


def ket(*amps):
    return StateVector(np.array(amps, dtype=complex), (len(amps),))


def partial_trace_by_summation(rho, dims, keep):
    """Reference reduced state by explicit index loops."""
    keep = list(keep)
    kdims = [dims[k] for k in keep]
    tdims = [dims[i] for i in range(len(dims)) if i not in keep]
    traced = [i for i in range(len(dims)) if i not in keep]
    dk = int(np.prod(kdims))
    out = np.zeros((dk, dk), dtype=complex)

    def full_index(kidx, tidx):
        digits = [0] * len(dims)
        for pos, k in enumerate(keep):
            digits[k] = kidx[pos]
        for pos, i in enumerate(traced):
            digits[i] = tidx[pos]
        return np.ravel_multi_index(digits, dims)

    for a in itertools.product(*map(range, kdims)):
        for b in itertools.product(*map(range, kdims)):
            total = 0j
            for j in itertools.product(*map(range, tdims)):
                total += rho[full_index(a, j), full_index(b, j)]
            out[np.ravel_multi_index(a, kdims), np.ravel_multi_index(b, kdims)] = total
    return out


class TestTensorProduct:
    def test_basis_concatenation(self):
        out = tensor_product(ket(1, 0), ket(1, 0))
        assert np.allclose(out.amplitudes, [1, 0, 0, 0])
        assert out.factor_dims == (2, 2)

    def test_big_endian(self):
        assert np.allclose(tensor_product(ket(0, 1), ket(1, 0)).amplitudes, [0, 0, 1, 0])

    def test_distributive(self):
        out = tensor_product(ket(S2, S2), ket(0, 1))
        assert np.allclose(out.amplitudes, [0, S2, 0, S2])

    def test_rejects_bad_dims(self):
        with pytest.raises(DimensionMismatchError):
            StateVector(np.ones(3), (2, 2))


class TestPartialTrace:
    def test_product_state(self):
        rho = basis_state((2, 2), (0, 0)).density_matrix()
        assert np.allclose(partial_trace(rho, (2, 2), [0]), np.diag([1, 0]))

    def test_bell_state(self):
        bell = StateVector(np.array([S2, 0, 0, S2]), (2, 2))
        assert np.allclose(partial_trace(bell.density_matrix(), (2, 2), [0]), np.eye(2) / 2)

    def test_random_matches_summation(self, rng):
        rho = random_density_matrix(4, rng)
        for keep in ([0], [1]):
            red = partial_trace(rho, (2, 2), keep)
            assert abs(np.trace(red) - 1) < 1e-12
            assert np.allclose(red, red.conj().T, atol=1e-14)
            assert np.allclose(red, partial_trace_by_summation(rho, (2, 2), keep), atol=1e-14)

    def test_mixed_dims_and_order(self, rng):
        dims = (2, 3, 2)
        rho = random_density_matrix(12, rng)
        for keep in ([2, 0], [1], [0, 1]):
            assert np.allclose(partial_trace(rho, dims, keep),
                               partial_trace_by_summation(rho, dims, keep), atol=1e-13)

    def test_composition_order_independent(self, rng):
        dims = (2, 3, 2)
        rho = random_state(dims, rng).density_matrix()
        a = partial_trace(partial_trace(rho, dims, [0, 1]), (2, 3), [0])
        b = partial_trace(partial_trace(rho, dims, [0, 2]), (2, 2), [0])
        assert np.allclose(a, b, atol=1e-13)
        assert np.allclose(a, partial_trace(rho, dims, [0]), atol=1e-13)

    def test_pure_state_shortcut(self, rng):
        psi = random_state((2, 3, 2), rng)
        assert np.allclose(reduced_state(psi, [2, 1]),
                           partial_trace(psi.density_matrix(), (2, 3, 2), [2, 1]), atol=1e-13)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            partial_trace(np.eye(4), (2, 3), [0])


class TestTraceNorm:
    def test_zero(self):
        assert trace_norm(np.zeros((3, 3))) == 0

    def test_pm_projectors(self):
        assert trace_norm(np.diag([1.0, -1.0])) == pytest.approx(2.0)

    def test_random_matches_singular_values(self, rng):
        for _ in range(10):
            g = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
            a = g + g.conj().T
            assert trace_norm(a) == pytest.approx(scipy.linalg.svdvals(a).sum(), rel=1e-12)

    def test_rejects_non_hermitian(self):
        with pytest.raises(DomainError):
            trace_norm(np.array([[0, 1], [0, 0]]))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(-3, 3))
    def test_is_a_norm(self, seed, c):
        rng = np.random.default_rng(seed)
        a, b = (rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)) for _ in range(2))
        a, b = a + a.conj().T, b + b.conj().T
        assert trace_norm(a + b) <= trace_norm(a) + trace_norm(b) + 1e-10
        assert trace_norm(c * a) == pytest.approx(abs(c) * trace_norm(a), rel=1e-10, abs=1e-12)


class TestPropagator:
    def test_time_zero(self, rng):
        g = rng.standard_normal((4, 4))
        assert np.allclose(propagator(g + g.T, 0.0), np.eye(4), atol=1e-14)

    def test_diagonal(self):
        assert np.allclose(propagator(np.diag([0.0, 1.0]), np.pi), np.diag([1, -1]), atol=1e-14)

    def test_xx_pair_swaps_excitation(self):
        h = np.zeros((4, 4))
        h[1, 2] = h[2, 1] = 1.0
        u = propagator(h, np.pi / 2)
        out = u @ basis_state((2, 2), (0, 1)).amplitudes
        assert np.allclose(out, -1j * basis_state((2, 2), (1, 0)).amplitudes, atol=1e-14)

    def test_matches_pade(self, rng):
        g = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
        h = g + g.conj().T
        u = propagator(h, 0.37)
        assert np.allclose(u, scipy.linalg.expm(-0.37j * h), atol=1e-12)
        assert np.allclose(u.conj().T @ u, np.eye(8), atol=1e-12)


class TestPolarUnitary:
    def test_unitary_is_fixed(self, rng):
        q, _ = np.linalg.qr(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
        assert np.allclose(polar_unitary(q), q, atol=1e-12)

    def test_positive_diagonal(self):
        assert np.allclose(polar_unitary(np.diag([2.0, 3.0])), np.eye(2))

    def test_best_isometry(self, rng):
        d = rng.standard_normal((6, 3)) + 1j * rng.standard_normal((6, 3))
        v = polar_unitary(d)
        assert np.allclose(v.conj().T @ v, np.eye(3), atol=1e-10)
        best = np.linalg.norm(d - v)
        for _ in range(100):
            w, _ = np.linalg.qr(rng.standard_normal((6, 3)) + 1j * rng.standard_normal((6, 3)))
            assert best <= np.linalg.norm(d - w) + 1e-12

    def test_square_matches_scipy(self, rng):
        d = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        u, _ = scipy.linalg.polar(d, side="left")
        assert np.allclose(polar_unitary(d), u, atol=1e-10)

    def test_distance_from_gram_spectrum(self, rng):
        d = rng.standard_normal((7, 4)) + 1j * rng.standard_normal((7, 4))
        lam = np.linalg.eigvalsh(d.conj().T @ d)
        expected = np.sum((np.sqrt(lam) - 1) ** 2)
        assert np.linalg.norm(d - polar_unitary(d)) ** 2 == pytest.approx(expected, abs=1e-10)

    def test_rank_deficient(self):
        with pytest.raises(DegenerateCodingError):
            polar_unitary(np.array([[1.0, 1.0], [0.0, 0.0]]))


class TestSwap:
    def test_basis(self):
        out = swap_apply(basis_state((2, 2), (0, 1)), 0, 1)
        assert np.allclose(out.amplitudes, basis_state((2, 2), (1, 0)).amplitudes)

    def test_involution(self, rng):
        psi = random_state((2, 3, 2), rng)
        twice = swap_apply(swap_apply(psi, 0, 2), 0, 2)
        assert np.array_equal(twice.amplitudes, psi.amplitudes)

    def test_norm_preserved(self, rng):
        psi = random_state((2, 2, 2), rng)
        assert abs(swap_apply(psi, 1, 2).norm() - psi.norm()) <= 1e-15

    def test_unequal_dims(self, rng):
        with pytest.raises(DimensionMismatchError):
            swap_apply(random_state((2, 3), rng), 0, 1)


class TestProjectComponent:
    def test_product(self):
        res, w = project_component(basis_state((2, 2), (0, 0)), [0], ket(1, 0))
        assert w == pytest.approx(1)
        assert np.allclose(res.amplitudes, [1, 0])

    def test_orthogonal(self):
        proj = project_component(basis_state((2, 2), (1, 0)), [0], ket(1, 0))
        assert proj.empty and proj.weight == 0

    def test_bell(self):
        bell = StateVector(np.array([S2, 0, 0, S2]), (2, 2))
        res, w = project_component(bell, [0], ket(1, 0))
        assert w == pytest.approx(0.5)
        assert np.allclose(res.amplitudes, [1, 0])

    def test_middle_factor(self, rng):
        psi = random_state((2, 3, 2), rng)
        target = random_state((3,), rng)
        res, w = project_component(psi, [1], target)
        t = np.einsum("b,abc->ac", target.amplitudes.conj(), psi.tensor())
        assert w == pytest.approx(np.sum(np.abs(t) ** 2))
        assert np.allclose(res.tensor() * np.sqrt(w), t)


def test_vec_is_column_stacking():
    m = np.array([[1, 2], [3, 4]])
    assert list(vec(m)) == [1, 3, 2, 4]
    assert np.array_equal(unvec(vec(m)), m)


def test_superoperator_convention(rng):
    a, b, rho = (rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)) for _ in range(3))
    assert np.allclose(np.kron(b.conj(), a) @ vec(rho), vec(a @ rho @ b.conj().T))
