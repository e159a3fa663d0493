"""Negativity and concurrence."""

from __future__ import annotations

import logging
import math

import numpy as np

from ..const import CONCURRENCE_CLIP_TOL
from .constants import NegativityConvention
from .exceptions import DimensionError, ValidationError
from .models import NegativityReport
from .qstate import DensityMatrix, hermitian_eigenvalues, partial_trace, partial_transpose

_LOGGER = logging.getLogger(__name__)

_SYSY = np.kron(
    np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]])
).astype(np.complex128)

PAIRS: tuple[tuple[int, int], ...] = ((1, 2), (1, 3), (2, 3))


def bipartite_negativity(
    rho: DensityMatrix,
    party: int,
    convention: NegativityConvention = NegativityConvention.DOUBLED,
) -> float:
    """
    Negativity of the split ``party`` | rest.

    PLAIN is |Σ negative eigenvalues of ρ^{T_party}|; DOUBLED is twice that,
    which reaches 1 on maximally entangled splits.
    """
    eigenvalues = hermitian_eigenvalues(partial_transpose(rho, party))
    plain = float(-np.sum(eigenvalues[eigenvalues < 0]))
    if convention == NegativityConvention.DOUBLED:
        return 2 * plain
    return plain


def tripartite_negativity(
    rho: DensityMatrix,
    convention: NegativityConvention = NegativityConvention.DOUBLED,
) -> NegativityReport:
    """Return the three one-versus-two negativities and their geometric mean."""
    if rho.num_qubits != 3:
        raise DimensionError("tripartite negativity needs a three-qubit state")
    n_a, n_b, n_c = (bipartite_negativity(rho, p, convention) for p in (1, 2, 3))
    return NegativityReport(
        n_a_bc=n_a,
        n_b_ac=n_b,
        n_c_ab=n_c,
        tripartite=(n_a * n_b * n_c) ** (1 / 3),
        convention=convention,
    )


def concurrence(rho: DensityMatrix) -> float:
    """
    Wootters concurrence of a two-qubit state.

    The eigenvalues of R = ρ(σy⊗σy)ρ*(σy⊗σy) are taken from the Hermitian
    matrix √ρ ρ̃ √ρ, which has the same spectrum.

    Raises:
        DimensionError: If ρ is not 4×4.
        ValidationError: If an eigenvalue of R is below −1e-10.

    """
    if rho.dim != 4:
        raise DimensionError(f"concurrence needs a two-qubit state, got dim {rho.dim}")
    values, vectors = np.linalg.eigh(rho.entries)
    root = (vectors * np.sqrt(np.clip(values, 0.0, None))) @ vectors.conj().T
    flipped = _SYSY @ rho.entries.conj() @ _SYSY
    r = root @ flipped @ root
    lambdas = np.linalg.eigvalsh((r + r.conj().T) / 2)[::-1]
    if lambdas[-1] < -CONCURRENCE_CLIP_TOL:
        raise ValidationError(
            f"concurrence eigenvalue {lambdas[-1]:.3e} below clipping tolerance"
        )
    roots = np.sqrt(np.clip(lambdas, 0.0, None))
    value = float(roots[0] - roots[1] - roots[2] - roots[3])
    return min(1.0, max(0.0, value))


def pairwise_concurrences(rho: DensityMatrix) -> dict[tuple[int, int], float]:
    """Return the concurrence of each two-qubit marginal, keyed by pair."""
    if rho.num_qubits != 3:
        raise DimensionError("pairwise concurrences need a three-qubit state")
    result = {pair: concurrence(partial_trace(rho, pair)) for pair in PAIRS}
    _LOGGER.debug(
        "Pairwise concurrences: %s",
        ", ".join(f"C{i}{j}={c:.4f}" for (i, j), c in result.items()),
    )
    return result


def calibrate_negativity_convention(
    rho: DensityMatrix, expected: float, tol: float = 1e-3
) -> NegativityConvention:
    """
    Pick the convention whose tripartite value matches ``expected``.

    Raises:
        ValidationError: If neither or both conventions match.

    """
    matches = [
        conv
        for conv in NegativityConvention
        if math.isclose(tripartite_negativity(rho, conv).tripartite, expected, abs_tol=tol)
    ]
    if len(matches) != 1:
        raise ValidationError(
            f"{len(matches)} negativity conventions reproduce {expected}"
        )
    return matches[0]
