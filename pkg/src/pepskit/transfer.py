"""Transfer operators on the doubled virtual space and their spectra.

The per-site operator maps the doubled left bond to the doubled right bond,
index order ket-before-bra. Correlation functions are evaluated through
operator powers; the gap ratio of the spectrum controls their decay.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, DegenerateFitError, NumericalError
from .network import contract_network
from .peps import PepsState, SiteTensor
from .tensor import as_tensor

__all__ = [
    "TransferOperator",
    "SpectrumReport",
    "site_transfer_operator",
    "strip_transfer_operator",
    "dressed_transfer",
    "spectrum",
    "transfer_correlation",
    "decay_fit",
]

# Strip columns wider than this are out of exact-contraction reach.
STRIP_WIDTH_CUTOFF = 4
UNIQUE_TOP_RTOL = 1e-10


@dataclass(frozen=True)
class TransferOperator:
    matrix: np.ndarray
    d_eff: int
    origin: str

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class SpectrumReport:
    lambda1: complex
    lambda2: complex
    ratio: float
    delta_bound: float
    unique_top: bool


def site_transfer_operator(t: SiteTensor) -> TransferOperator:
    """Doubled-space operator of one MPS site: sum_i t[i] (x) conj(t[i])."""
    a = t.tensor
    if a.ndim != 3:
        raise ArgumentError(
            f"site transfer operator needs an interior MPS site (two virtual legs), got rank {a.ndim}"
        )
    d_left = a.shape[1]
    e = np.einsum("ijl,ikm->jklm", a, a.conj())
    return TransferOperator(
        matrix=e.reshape(d_left * d_left, a.shape[2] * a.shape[2]),
        d_eff=d_left,
        origin="mps_site",
    )


def dressed_transfer(t: SiteTensor, o: np.ndarray) -> TransferOperator:
    """Transfer operator with a single-site operator between ket and bra."""
    a = t.tensor
    if a.ndim != 3:
        raise ArgumentError(f"dressed transfer needs an MPS site, got rank {a.ndim}")
    o = as_tensor(o)
    if o.shape != (a.shape[0], a.shape[0]):
        raise ArgumentError(f"operator shape {o.shape} does not match physical dim {a.shape[0]}")
    e = np.einsum("ial,ij,jbm->ablm", a, o, a.conj())
    d = a.shape[1]
    return TransferOperator(matrix=e.reshape(d * d, a.shape[2] * a.shape[2]), d_eff=d, origin="mps_site")


def strip_transfer_operator(peps: PepsState, column_index: int, width: int) -> TransferOperator:
    """Column-to-column operator of a 2D PEPS strip of ``width`` rows.

    Vertical bonds inside the strip are contracted with their pair weights;
    a vertical bond leaving the strip is closed ket-against-bra. The row
    index merges ket rows 0..width-1 then bra rows, ket block major.
    """
    if peps.lattice.dimension != 2:
        raise ArgumentError("strip transfer operator needs a 2D PEPS")
    n_rows, n_cols = peps.lattice.extents
    if not 0 < column_index < n_cols - 1:
        raise ArgumentError(
            f"column {column_index} must be interior (have neighbours on both sides)"
        )
    if not 1 <= width <= min(STRIP_WIDTH_CUTOFF, n_rows):
        raise ArgumentError(
            f"width {width} outside 1..{min(STRIP_WIDTH_CUTOFF, n_rows)}"
        )
    sites = [(r, column_index) for r in range(width)]
    strip = set(sites)
    bond = peps._edge_extent(sites[0], (sites[0], (0, column_index + 1)))
    tensors, labels = [], []
    n_internal = 0
    for s in sites:
        t = peps.tensors[s].tensor
        k_labels, b_labels = [("pp", s)], [("pp", s)]
        for e in peps.lattice.virtual_legs(s):
            other = e[0] if e[1] == s else e[1]
            if other[1] == column_index:  # vertical edge
                if other in strip:
                    k_labels.append(("ke", e))
                    b_labels.append(("be", e))
                else:
                    k_labels.append(("ce", e))
                    b_labels.append(("ce", e))
            elif other[1] < column_index:
                k_labels.append(("L", s[0], "k"))
                b_labels.append(("L", s[0], "b"))
            else:
                k_labels.append(("R", s[0], "k"))
                b_labels.append(("R", s[0], "b"))
        tensors.append(t)
        labels.append(k_labels)
        tensors.append(t.conj())
        labels.append(b_labels)
    for e in peps.lattice.edges():
        if e[0] in strip and e[1] in strip:
            n_internal += 1
    output = (
        [("L", r, "k") for r in range(width)]
        + [("L", r, "b") for r in range(width)]
        + [("R", r, "k") for r in range(width)]
        + [("R", r, "b") for r in range(width)]
    )
    out = contract_network(tensors, labels, output=output)
    out = out * float(bond) ** (-n_internal)
    d_eff = bond**width
    return TransferOperator(
        matrix=out.reshape(d_eff * d_eff, d_eff * d_eff), d_eff=d_eff, origin="strip_column"
    )


def spectrum(e: TransferOperator) -> SpectrumReport:
    """Eigenvalues sorted by modulus and the gap ratio |l2/l1|.

    A modulus-degenerate top is reported as ``unique_top=False`` with ratio
    1 rather than as an error: it diagnoses non-injectivity.
    """
    m = e.matrix
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ArgumentError(f"transfer operator matrix must be square, got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NumericalError("transfer operator contains non-finite entries")
    try:
        evs = np.linalg.eigvals(m)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("eigendecomposition failed") from exc
    evs = evs[np.argsort(-np.abs(evs), kind="stable")]
    lambda1 = complex(evs[0])
    lambda2 = complex(evs[1]) if len(evs) > 1 else 0j
    if abs(lambda1) == 0:
        ratio = 1.0 if len(evs) > 1 else 0.0
        unique = False
    else:
        ratio = abs(lambda2) / abs(lambda1)
        unique = (abs(lambda1) - abs(lambda2)) > UNIQUE_TOP_RTOL * abs(lambda1)
    delta_bound = -math.log(ratio) if ratio > 0 else math.inf
    return SpectrumReport(
        lambda1=lambda1, lambda2=lambda2, ratio=ratio, delta_bound=delta_bound, unique_top=unique
    )


def _normalised_power_base(e: TransferOperator) -> np.ndarray:
    """Matrix rescaled by its top eigenvalue modulus to keep powers bounded."""
    top = float(np.max(np.abs(np.linalg.eigvals(e.matrix))))
    if top == 0:
        raise ArgumentError("transfer operator is zero")
    return e.matrix / top


def transfer_correlation(
    e: TransferOperator, e_oa: TransferOperator, e_ob: TransferOperator, x: int, length: int
) -> complex:
    """tr(e_OA e^x e_OB e^(L-x-2)) / tr(e^L) with x plain sites in between."""
    for other in (e_oa, e_ob):
        if other.dim != e.dim:
            raise ArgumentError(
                f"dressed operator dim {other.dim} does not match transfer dim {e.dim}"
            )
    if not 0 <= x <= length - 2:
        raise ArgumentError(f"need 0 <= x <= L-2, got x={x}, L={length}")
    m = _normalised_power_base(e)
    top = float(np.max(np.abs(np.linalg.eigvals(e.matrix))))
    # Dressings scale linearly with the site tensor pair, same unit as e.
    a = e_oa.matrix / top
    b = e_ob.matrix / top
    num = np.trace(a @ np.linalg.matrix_power(m, x) @ b @ np.linalg.matrix_power(m, length - x - 2))
    den = np.trace(np.linalg.matrix_power(m, length))
    if den == 0:
        raise ArgumentError("transfer operator trace vanishes; correlation undefined")
    return complex(num / den)


def _single_expectation(e: TransferOperator, e_o: TransferOperator, length: int) -> complex:
    m = _normalised_power_base(e)
    top = float(np.max(np.abs(np.linalg.eigvals(e.matrix))))
    num = np.trace((e_o.matrix / top) @ np.linalg.matrix_power(m, length - 1))
    den = np.trace(np.linalg.matrix_power(m, length))
    return complex(num / den)


def decay_fit(
    e: TransferOperator,
    e_oa: TransferOperator,
    e_ob: TransferOperator,
    x_range,
    length: int,
) -> tuple[float, float]:
    """Least-squares decay rate of ln|connected correlator| over ``x_range``.

    Returns ``(rate, r_squared)`` with ``rate`` the positive decay constant
    per site. All-zero correlators raise DegenerateFitError.
    """
    xs = [int(x) for x in x_range]
    if len(xs) < 2:
        raise ArgumentError("x_range must contain at least two points")
    mean_a = _single_expectation(e, e_oa, length)
    mean_b = _single_expectation(e, e_ob, length)
    conns = []
    for x in xs:
        joint = transfer_correlation(e, e_oa, e_ob, x, length)
        conns.append(joint - mean_a * mean_b)
    mags = np.abs(conns)
    if np.all(mags < 1e-14):
        raise DegenerateFitError("connected correlators vanish over the whole range")
    logs = np.log(mags)
    slope, intercept = np.polyfit(xs, logs, 1)
    fitted = slope * np.asarray(xs) + intercept
    ss_res = float(np.sum((logs - fitted) ** 2))
    ss_tot = float(np.sum((logs - np.mean(logs)) ** 2))
    r_squared = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return float(-slope), r_squared
