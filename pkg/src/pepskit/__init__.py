"""Local observables on injective PEPS via patch contraction.

Library layout:

- ``tensor``: dense complex tensor ops (contract, SVD, pseudo-inverse).
- ``network``: labelled-network contraction with deterministic planning.
- ``lattice`` / ``peps``: geometry, the PEPS state, injectivity, blocking.
- ``generators``: product, perturbed-product and AKLT test families.
- ``oracle``: exact expectation values and disentangling traces.
- ``patch``: the patch estimator, radius selection, sampling estimator.
- ``transfer``: transfer operators, spectra, correlation functions.
- ``parent``: 1D parent-Hamiltonian terms and gap scans.
- ``fileio`` / ``cli``: file formats, result documents, command line.
"""

__version__ = "0.1.0"

from .errors import (
    ArgumentError,
    DegenerateFitError,
    ModelError,
    NotInjectiveError,
    NumericalError,
    PepskitError,
    SizeBudgetError,
)

__all__ = [
    "__version__",
    "ArgumentError",
    "DegenerateFitError",
    "ModelError",
    "NotInjectiveError",
    "NumericalError",
    "PepskitError",
    "SizeBudgetError",
]
