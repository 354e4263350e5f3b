import numpy as np
import pytest

from pepskit.errors import ArgumentError, SizeBudgetError
from pepskit.network import contract_network


def _rand(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def test_matrix_chain_matches_einsum():
    rng = np.random.default_rng(0)
    a, b, c = _rand(rng, (3, 4)), _rand(rng, (4, 5)), _rand(rng, (5, 6))
    out = contract_network(
        [a, b, c],
        [["i", "j"], ["j", "k"], ["k", "l"]],
        output=["i", "l"],
    )
    np.testing.assert_allclose(out, a @ b @ c, rtol=1e-12)


def test_scalar_network():
    rng = np.random.default_rng(1)
    v = _rand(rng, (7,))
    out = contract_network([v, v.conj()], [["i"], ["i"]])
    assert out.shape == ()
    assert complex(out) == pytest.approx(np.vdot(v, v).conjugate())


def test_output_order_respected():
    rng = np.random.default_rng(2)
    a = _rand(rng, (2, 3, 4))
    out = contract_network([a], [["x", "y", "z"]], output=["z", "x", "y"])
    np.testing.assert_array_equal(out, np.transpose(a, (2, 0, 1)))


def test_disconnected_components_outer_product():
    rng = np.random.default_rng(3)
    a, b = _rand(rng, (2,)), _rand(rng, (3,))
    out = contract_network([a, b], [["i"], ["j"]], output=["i", "j"])
    np.testing.assert_allclose(out, np.outer(a, b), rtol=1e-12)


def test_same_tensor_trace():
    rng = np.random.default_rng(4)
    a = _rand(rng, (3, 4, 3))
    out = contract_network([a], [["i", "j", "i"]], output=["j"])
    np.testing.assert_allclose(out, np.einsum("iji->j", a), rtol=1e-12)


def test_five_tensor_grid_matches_einsum():
    rng = np.random.default_rng(5)
    shapes = [(2, 3), (3, 4, 2), (4, 5), (2, 5, 2), (2, 2)]
    labels = [["a", "b"], ["b", "c", "d"], ["c", "e"], ["d", "e", "f"], ["f", "g"]]
    tensors = [_rand(rng, s) for s in shapes]
    out = contract_network(tensors, labels, output=["a", "g"])
    ref = np.einsum("ab,bcd,ce,def,fg->ag", *tensors)
    np.testing.assert_allclose(out, ref, rtol=1e-12)


def test_budget_checked_before_execution():
    a = np.ones((8, 8))
    b = np.ones((8, 8))
    with pytest.raises(SizeBudgetError) as err:
        contract_network([a, b], [["i", "j"], ["j", "k"]], output=["i", "k"], budget=32)
    assert err.value.predicted_size == 64


def test_label_appearing_three_times_rejected():
    a = np.ones((2,))
    with pytest.raises(ArgumentError, match="more than twice"):
        contract_network([a, a, a], [["i"], ["i"], ["i"]])


def test_extent_mismatch_rejected():
    with pytest.raises(ArgumentError, match="mismatched extents"):
        contract_network([np.ones((2,)), np.ones((3,))], [["i"], ["i"]])


def test_open_labels_require_output():
    with pytest.raises(ArgumentError, match="open labels"):
        contract_network([np.ones((2,))], [["i"]])


def test_wrong_output_labels_rejected():
    with pytest.raises(ArgumentError, match="output labels"):
        contract_network([np.ones((2,))], [["i"]], output=["j"])


def test_deterministic_result_repeated_runs():
    rng = np.random.default_rng(6)
    tensors = [_rand(rng, (2, 2, 2)) for _ in range(4)]
    labels = [["a", "b", "x1"], ["b", "c", "x2"], ["c", "d", "x3"], ["d", "a", "x4"]]
    out1 = contract_network(tensors, labels, output=["x1", "x2", "x3", "x4"])
    out2 = contract_network(tensors, labels, output=["x1", "x2", "x3", "x4"])
    np.testing.assert_array_equal(out1, out2)
