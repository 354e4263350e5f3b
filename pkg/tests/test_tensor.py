import numpy as np
import pytest

from pepskit.errors import ArgumentError, NotInjectiveError
from pepskit.tensor import (
    condition_number,
    contract,
    operator_norm,
    pseudo_inverse,
    svd,
    tensor_product,
)


def test_contract_basis_inner_product():
    e0 = np.array([1.0, 0.0])
    out = contract(e0, e0, [(0, 0)])
    assert out.shape == ()
    assert out == pytest.approx(1.0)


def test_contract_identity_is_identity_map():
    rng = np.random.default_rng(1)
    b = rng.standard_normal((2, 5)) + 1j * rng.standard_normal((2, 5))
    out = contract(np.eye(2), b, [(1, 0)])
    np.testing.assert_array_equal(out, b)


def test_contract_ones_matrices():
    a = np.ones((2, 3))
    b = np.ones((3, 2))
    out = contract(a, b, [(1, 0)])
    np.testing.assert_allclose(out, np.full((2, 2), 3.0))


def test_contract_extent_mismatch_names_axes():
    with pytest.raises(ArgumentError, match="axis 1.*axis 0"):
        contract(np.ones((2, 3)), np.ones((4, 2)), [(1, 0)])


def test_contract_axis_out_of_bounds():
    with pytest.raises(ArgumentError, match="out of bounds"):
        contract(np.ones((2, 2)), np.ones((2, 2)), [(2, 0)])


def test_contract_result_axis_order():
    rng = np.random.default_rng(2)
    a = rng.standard_normal((2, 3, 4))
    b = rng.standard_normal((4, 5))
    out = contract(a, b, [(2, 0)])
    assert out.shape == (2, 3, 5)
    np.testing.assert_allclose(out, np.tensordot(a, b, axes=([2], [0])))


def test_tensor_product_scalars():
    assert tensor_product(np.array(2.0), np.array(3.0)) == pytest.approx(6.0)


def test_tensor_product_basis_vectors():
    out = tensor_product(np.array([1.0, 0.0]), np.array([0.0, 1.0]))
    expected = np.zeros((2, 2))
    expected[0, 1] = 1.0
    np.testing.assert_array_equal(out, expected)


def test_tensor_product_pair_norms_multiply():
    phi = np.array([[1.0, 0.0], [0.0, 1.0]]) / np.sqrt(2.0)  # norm-1 pair
    out = tensor_product(phi, phi)
    assert out.shape == (2, 2, 2, 2)
    assert np.linalg.norm(out) == pytest.approx(1.0)


def test_svd_identity():
    res = svd(np.eye(3))
    np.testing.assert_allclose(res.s, np.ones(3))
    assert res.rank == 3


def test_svd_rank_deficient():
    res = svd(np.diag([2.0, 0.0]))
    np.testing.assert_allclose(res.s, [2.0, 0.0])
    assert res.rank == 1


def test_svd_reconstruction():
    rng = np.random.default_rng(3)
    m = rng.standard_normal((4, 3)) + 1j * rng.standard_normal((4, 3))
    res = svd(m)
    assert res.rank == 3
    recon = res.u @ np.diag(res.s) @ res.v_dag
    assert np.max(np.abs(recon - m)) < 1e-10 * res.s[0]
    assert np.all(np.diff(res.s) <= 0)


def test_svd_tensor_row_split():
    rng = np.random.default_rng(4)
    t = rng.standard_normal((2, 3, 4))
    res = svd(t, row_axes=(0, 1))
    assert res.u.shape == (6, 4)


def test_pseudo_inverse_identity():
    np.testing.assert_allclose(pseudo_inverse(np.eye(3)), np.eye(3), atol=1e-14)


def test_pseudo_inverse_singular_diagonal():
    out = pseudo_inverse(np.diag([2.0, 0.0]))
    np.testing.assert_allclose(out, np.diag([0.5, 0.0]), atol=1e-14)


def test_pseudo_inverse_left_inverse_of_injective():
    rng = np.random.default_rng(5)
    a = rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2))
    np.testing.assert_allclose(pseudo_inverse(a) @ a, np.eye(2), atol=1e-10)


def test_pseudo_inverse_rejects_negative_rcond():
    with pytest.raises(ArgumentError):
        pseudo_inverse(np.eye(2), rcond=-1.0)


def test_condition_number_identity():
    assert condition_number(np.eye(4)) == pytest.approx(1.0)


def test_condition_number_diagonal():
    assert condition_number(np.diag([3.0, 1.0])) == pytest.approx(3.0)


def test_condition_number_isometry():
    rng = np.random.default_rng(6)
    q, _ = np.linalg.qr(rng.standard_normal((5, 3)))
    assert condition_number(q) == pytest.approx(1.0)


def test_condition_number_rank_deficient():
    m = np.ones((3, 2))
    with pytest.raises(NotInjectiveError) as err:
        condition_number(m)
    assert err.value.sigma_min == pytest.approx(0.0, abs=1e-12)


def test_operator_norm_pauli_z():
    assert operator_norm(np.diag([1.0, -1.0])) == pytest.approx(1.0)


def test_operator_norm_scaled_identity():
    assert operator_norm(5.0 * np.eye(3)) == pytest.approx(5.0)


def test_operator_norm_hermitian_matches_eigenvalues():
    rng = np.random.default_rng(7)
    a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    h = a + a.conj().T
    expected = np.max(np.abs(np.linalg.eigvalsh(h)))
    assert operator_norm(h) == pytest.approx(expected, rel=1e-10)


def test_operator_norm_requires_square():
    with pytest.raises(ArgumentError):
        operator_norm(np.ones((2, 3)))


def test_contraction_order_independence():
    rng = np.random.default_rng(8)
    a = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
    b = rng.standard_normal((4, 5)) + 1j * rng.standard_normal((4, 5))
    c = rng.standard_normal((5, 3)) + 1j * rng.standard_normal((5, 3))
    left = contract(contract(a, b, [(1, 0)]), c, [(1, 0), (0, 1)])
    right = contract(a, contract(b, c, [(1, 0)]), [(1, 0), (0, 1)])
    assert abs(left - right) < 1e-10 * max(abs(left), 1.0)


@pytest.mark.parametrize("seed", range(5))
def test_kappa_of_pseudo_inverse_matches(seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((5, 3)) + 1j * rng.standard_normal((5, 3))
    k = condition_number(a)
    k_inv = condition_number(pseudo_inverse(a).conj().T)  # columns again
    assert k_inv == pytest.approx(k, rel=1e-8)


@pytest.mark.parametrize("seed", range(5))
def test_pseudo_inverse_idempotent(seed):
    rng = np.random.default_rng(10 + seed)
    a = rng.standard_normal((5, 3)) + 1j * rng.standard_normal((5, 3))
    back = pseudo_inverse(pseudo_inverse(a))
    np.testing.assert_allclose(back, a, rtol=1e-8, atol=1e-10)
