"""Dense complex tensor arithmetic.

All tensors in the package are numpy ``complex128`` arrays in row-major
order with a fixed axis convention set by the caller. Operations here are
pure functions; nothing mutates its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, NotInjectiveError, NumericalError

__all__ = [
    "SvdResult",
    "as_tensor",
    "contract",
    "tensor_product",
    "svd",
    "pseudo_inverse",
    "condition_number",
    "operator_norm",
]


def as_tensor(data) -> np.ndarray:
    """Coerce to a C-contiguous complex128 ndarray."""
    return np.ascontiguousarray(data, dtype=np.complex128)


def default_rcond(shape: tuple[int, int]) -> float:
    """Relative singular-value cutoff: max(rows, cols) * machine epsilon."""
    return max(shape) * np.finfo(np.float64).eps


@dataclass(frozen=True)
class SvdResult:
    """Thin SVD of a matrixized tensor.

    ``u @ diag(s) @ v_dag`` reconstructs the input matrix. ``rank`` counts
    singular values above ``rcond * s[0]``.
    """

    u: np.ndarray
    s: np.ndarray
    v_dag: np.ndarray
    rank: int


def contract(a: np.ndarray, b: np.ndarray, axis_pairs: list[tuple[int, int]]) -> np.ndarray:
    """Contract two tensors along the given ``(axis_of_a, axis_of_b)`` pairs.

    Result axes are the uncontracted axes of ``a`` in order, followed by the
    uncontracted axes of ``b`` in order.
    """
    a = as_tensor(a)
    b = as_tensor(b)
    axes_a = [p[0] for p in axis_pairs]
    axes_b = [p[1] for p in axis_pairs]
    for name, t, axes in (("a", a, axes_a), ("b", b, axes_b)):
        for ax in axes:
            if not 0 <= ax < t.ndim:
                raise ArgumentError(f"axis {ax} out of bounds for tensor {name} with rank {t.ndim}")
        if len(set(axes)) != len(axes):
            raise ArgumentError(f"repeated contraction axis on tensor {name}: {axes}")
    for ax_a, ax_b in axis_pairs:
        if a.shape[ax_a] != b.shape[ax_b]:
            raise ArgumentError(
                f"extent mismatch: axis {ax_a} of a has extent {a.shape[ax_a]}, "
                f"axis {ax_b} of b has extent {b.shape[ax_b]}"
            )
    return np.tensordot(a, b, axes=(axes_a, axes_b))


def tensor_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Outer product; result shape is the concatenation of both shapes."""
    return np.tensordot(as_tensor(a), as_tensor(b), axes=0)


def matrixize(t: np.ndarray, row_axes: tuple[int, ...]) -> np.ndarray:
    """Reshape a tensor to a matrix with ``row_axes`` merged as rows."""
    t = as_tensor(t)
    row_axes = tuple(row_axes)
    col_axes = tuple(ax for ax in range(t.ndim) if ax not in row_axes)
    perm = row_axes + col_axes
    rows = int(np.prod([t.shape[ax] for ax in row_axes], dtype=np.int64)) if row_axes else 1
    cols = int(np.prod([t.shape[ax] for ax in col_axes], dtype=np.int64)) if col_axes else 1
    return np.transpose(t, perm).reshape(rows, cols)


def svd(t: np.ndarray, row_axes: tuple[int, ...] = (0,), rcond: float | None = None) -> SvdResult:
    """SVD of a tensor matrixized along ``row_axes``.

    Raises NumericalError if the underlying solver does not converge.
    """
    m = matrixize(t, row_axes)
    try:
        u, s, v_dag = np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge on shape {m.shape}") from exc
    if rcond is None:
        rcond = default_rcond(m.shape)
    cutoff = rcond * (s[0] if s.size else 0.0)
    rank = int(np.sum(s > cutoff))
    return SvdResult(u=u, s=s, v_dag=v_dag, rank=rank)


def pseudo_inverse(m: np.ndarray, rcond: float | None = None) -> np.ndarray:
    """Moore-Penrose inverse with singular values below ``rcond * s_max`` zeroed."""
    m = as_tensor(m)
    if m.ndim != 2:
        raise ArgumentError(f"pseudo_inverse expects a matrix, got rank {m.ndim}")
    if rcond is not None and rcond < 0:
        raise ArgumentError(f"rcond must be nonnegative, got {rcond}")
    res = svd(m, row_axes=(0,), rcond=rcond)
    s_inv = np.zeros_like(res.s)
    s_inv[: res.rank] = 1.0 / res.s[: res.rank]
    return (res.v_dag.conj().T * s_inv) @ res.u.conj().T


def singular_values(m: np.ndarray) -> np.ndarray:
    m = as_tensor(m)
    if m.ndim != 2:
        raise ArgumentError(f"expected a matrix, got rank {m.ndim}")
    try:
        return np.linalg.svd(m, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge on shape {m.shape}") from exc


def condition_number(m: np.ndarray) -> float:
    """sigma_max / sigma_min over all column singular values of ``m``.

    ``m`` must have full column rank; rank-deficient input raises
    NotInjectiveError carrying the offending sigma_min.
    """
    m = as_tensor(m)
    if m.ndim != 2:
        raise ArgumentError(f"condition_number expects a matrix, got rank {m.ndim}")
    rows, cols = m.shape
    if rows < cols:
        raise NotInjectiveError(
            f"matrix {rows}x{cols} has more columns than rows, cannot have full column rank",
            sigma_min=0.0,
        )
    s = singular_values(m)
    sigma_max, sigma_min = float(s[0]), float(s[-1])
    if sigma_min <= default_rcond(m.shape) * sigma_max:
        raise NotInjectiveError(
            f"matrix not injective: sigma_min={sigma_min:.3e} below cutoff", sigma_min=sigma_min
        )
    return sigma_max / sigma_min


def operator_norm(m: np.ndarray) -> float:
    """Largest singular value of a square matrix."""
    m = as_tensor(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ArgumentError(f"operator_norm expects a square matrix, got shape {m.shape}")
    return float(singular_values(m)[0])
