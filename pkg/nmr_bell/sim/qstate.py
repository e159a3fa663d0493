"""
Dense linear algebra on the three-qubit Hilbert space.

Basis order is binary |000⟩ … |111⟩ with qubit 1 as the leftmost bit, and
σz|0⟩ = +|0⟩. All value types are immutable: their arrays are copied on
construction and marked read-only.

Example:
    >>> from nmr_bell.sim.qstate import (
    ...     IDENTITY_2, SIGMA_Z, DensityMatrix, StateVector, expectation, tensor
    ... )
    >>> rho = DensityMatrix.from_state(StateVector.basis(0))
    >>> expectation(rho, tensor([SIGMA_Z, IDENTITY_2, IDENTITY_2]))
    1.0

"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
import math

import numpy as np
import numpy.typing as npt

from ..const import (
    DIM,
    EIG_RESIDUAL_TOL,
    HERM_TOL,
    NORM_TOL,
    PSD_TOL,
)
from .constants import FidelityConvention
from .exceptions import DimensionError, ValidationError


type ComplexArray = npt.NDArray[np.complex128]
type RealArray = npt.NDArray[np.float64]

_ALLOWED_DIMS = (2, 4, 8)


def _frozen_copy(values: npt.ArrayLike) -> ComplexArray:
    """Return a read-only complex128 copy."""
    arr = np.array(values, dtype=np.complex128, copy=True)
    arr.setflags(write=False)
    return arr


def _num_qubits(dim: int) -> int:
    if dim not in _ALLOWED_DIMS:
        raise DimensionError(f"dimension {dim} is not one of {_ALLOWED_DIMS}")
    return int(math.log2(dim))


def hermiticity_error(matrix: npt.ArrayLike) -> float:
    """Return max |M − M†| entrywise."""
    m = np.asarray(matrix)
    return float(np.max(np.abs(m - m.conj().T)))


@dataclass(frozen=True, slots=True)
class StateVector:
    """Normalized pure state on 1–3 qubits."""

    amplitudes: ComplexArray

    def __post_init__(self) -> None:
        """Validate shape and normalization."""
        amps = _frozen_copy(np.ravel(self.amplitudes))
        _num_qubits(amps.shape[0])
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValidationError(f"state norm² is {norm!r}, expected 1")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, amplitudes: npt.ArrayLike) -> StateVector:
        """Build a state from unnormalized amplitudes."""
        amps = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise ValidationError("cannot normalize the zero vector")
        return cls(amps / norm)

    @classmethod
    def basis(cls, index: int, dim: int = DIM) -> StateVector:
        """Return the computational basis state |index⟩."""
        if not 0 <= index < dim:
            raise ValidationError(f"basis index {index} outside [0, {dim})")
        amps = np.zeros(dim, dtype=np.complex128)
        amps[index] = 1.0
        return cls(amps)

    @property
    def dim(self) -> int:
        """Hilbert-space dimension."""
        return int(self.amplitudes.shape[0])

    @property
    def num_qubits(self) -> int:
        """Number of qubits."""
        return _num_qubits(self.dim)

    def overlap(self, other: StateVector) -> complex:
        """Return ⟨self|other⟩."""
        if other.dim != self.dim:
            raise DimensionError("state dimensions differ")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def density(self) -> DensityMatrix:
        """Return |ψ⟩⟨ψ|."""
        return DensityMatrix.from_state(self)


@dataclass(frozen=True, slots=True)
class HermitianOperator:
    """Hermitian matrix on 1–3 qubits with an optional label."""

    entries: ComplexArray
    label: str | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        """Validate shape and Hermiticity."""
        m = _frozen_copy(self.entries)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"operator must be square, got shape {m.shape}")
        _num_qubits(m.shape[0])
        err = hermiticity_error(m)
        if err > HERM_TOL * max(1.0, float(np.max(np.abs(m)))):
            raise ValidationError(f"operator is not Hermitian (error {err:.3e})")
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        """Matrix dimension."""
        return int(self.entries.shape[0])

    @property
    def trace(self) -> float:
        """Real trace."""
        return float(np.trace(self.entries).real)

    def __add__(self, other: HermitianOperator) -> HermitianOperator:
        """Return the sum of two operators."""
        return HermitianOperator(self.entries + other.entries)

    def scaled(self, factor: float) -> HermitianOperator:
        """Return the operator multiplied by a real factor."""
        return HermitianOperator(factor * self.entries, self.label)


@dataclass(frozen=True, slots=True)
class DensityMatrix:
    """Unit-trace positive semidefinite Hermitian matrix on 1–3 qubits."""

    entries: ComplexArray

    def __post_init__(self) -> None:
        """Validate Hermiticity, trace and positivity."""
        m = _frozen_copy(self.entries)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"density matrix must be square, got {m.shape}")
        _num_qubits(m.shape[0])
        err = hermiticity_error(m)
        if err > HERM_TOL:
            raise ValidationError(f"density matrix not Hermitian (error {err:.3e})")
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > HERM_TOL:
            raise ValidationError(f"density matrix trace is {tr!r}, expected 1")
        min_eig = float(np.linalg.eigvalsh(m)[0])
        if min_eig < -PSD_TOL:
            raise ValidationError(
                f"density matrix not positive semidefinite (min eigenvalue {min_eig:.3e})"
            )
        object.__setattr__(self, "entries", m)

    @classmethod
    def from_state(cls, state: StateVector) -> DensityMatrix:
        """Return the projector onto a pure state."""
        return cls(np.outer(state.amplitudes, state.amplitudes.conj()))

    @classmethod
    def maximally_mixed(cls, dim: int = DIM) -> DensityMatrix:
        """Return I/d."""
        return cls(np.eye(dim, dtype=np.complex128) / dim)

    @classmethod
    def mixture(
        cls, weighted: Iterable[tuple[float, DensityMatrix]]
    ) -> DensityMatrix:
        """Return the convex combination Σ wᵢ ρᵢ."""
        items = list(weighted)
        if not items:
            raise ValidationError("mixture needs at least one component")
        total = sum(w * rho.entries for w, rho in items)
        return cls(total)

    @property
    def dim(self) -> int:
        """Matrix dimension."""
        return int(self.entries.shape[0])

    @property
    def num_qubits(self) -> int:
        """Number of qubits."""
        return _num_qubits(self.dim)

    def as_operator(self, label: str | None = None) -> HermitianOperator:
        """View the state as a Hermitian operator."""
        return HermitianOperator(self.entries, label)

    def purity(self) -> float:
        """Return Tr ρ²."""
        return float(np.real(np.trace(self.entries @ self.entries)))


# Single-qubit Paulis and identities
IDENTITY_2 = HermitianOperator(np.eye(2), "I")
SIGMA_X = HermitianOperator(np.array([[0, 1], [1, 0]]), "X")
SIGMA_Y = HermitianOperator(np.array([[0, -1j], [1j, 0]]), "Y")
SIGMA_Z = HermitianOperator(np.array([[1, 0], [0, -1]]), "Z")
IDENTITY_8 = HermitianOperator(np.eye(DIM), "I8")

PAULIS: dict[str, HermitianOperator] = {
    "I": IDENTITY_2,
    "X": SIGMA_X,
    "Y": SIGMA_Y,
    "Z": SIGMA_Z,
}


def kron_all(matrices: Sequence[npt.ArrayLike]) -> ComplexArray:
    """Kronecker product of raw matrices or vectors, left factor = qubit 1."""
    out: ComplexArray = np.array([[1.0]], dtype=np.complex128)
    vector = all(np.asarray(m).ndim == 1 for m in matrices)
    if vector:
        out = np.array([1.0], dtype=np.complex128)
    for m in matrices:
        out = np.kron(out, np.asarray(m, dtype=np.complex128))
    return out


def tensor[T: (HermitianOperator, StateVector)](factors: Sequence[T]) -> T:
    """
    Kronecker product of operators or states in qubit order.

    Args:
        factors: One to three operators, or one to three states.

    Returns:
        An object of the same kind as the factors.

    Raises:
        DimensionError: If the product dimension exceeds 8 or the factors mix
            kinds.

    """
    if not 1 <= len(factors) <= 3:
        raise DimensionError("tensor takes 1 to 3 factors")
    dim = math.prod(f.dim for f in factors)
    if dim > DIM:
        raise DimensionError("dimension exceeds 8")
    if all(isinstance(f, StateVector) for f in factors):
        return StateVector(kron_all([f.amplitudes for f in factors]))  # type: ignore[return-value]
    if all(isinstance(f, HermitianOperator) for f in factors):
        label = "".join(f.label or "?" for f in factors)  # type: ignore[union-attr]
        return HermitianOperator(kron_all([f.entries for f in factors]), label)  # type: ignore[return-value,union-attr]
    raise DimensionError("tensor factors must all be states or all operators")


def embed(op: npt.ArrayLike, qubit: int, num_qubits: int = 3) -> ComplexArray:
    """Place a single-qubit matrix on ``qubit`` (1-based) with identities elsewhere."""
    if not 1 <= qubit <= num_qubits:
        raise ValidationError(f"qubit {qubit} outside 1..{num_qubits}")
    factors = [np.eye(2)] * num_qubits
    factors[qubit - 1] = np.asarray(op)
    return kron_all(factors)


def pauli_string(label: str) -> HermitianOperator:
    """Return the tensor product named by a Pauli label such as ``"XZI"``."""
    try:
        return tensor([PAULIS[ch] for ch in label.upper()])
    except KeyError as err:
        raise ValidationError(f"bad Pauli label {label!r}") from err


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """
    Trace out every qubit not listed in ``keep``.

    Args:
        rho: State on n qubits.
        keep: 1-based indices of the qubits to keep, in any order; the kept
            qubits retain their original relative order.

    Returns:
        Reduced density matrix of dimension 2^|keep|.

    """
    n = rho.num_qubits
    kept = sorted(set(keep))
    if not kept:
        raise ValidationError("keep set must not be empty")
    if any(not 1 <= q <= n for q in kept):
        raise ValidationError(f"keep set {kept} outside 1..{n}")
    t = rho.entries.reshape([2] * (2 * n))
    current = n
    for q in sorted(set(range(1, n + 1)) - set(kept), reverse=True):
        t = np.trace(t, axis1=q - 1, axis2=q - 1 + current)
        current -= 1
    d = 2 ** len(kept)
    reduced = t.reshape(d, d)
    # Symmetrize away round-off before revalidating.
    return DensityMatrix((reduced + reduced.conj().T) / 2)


def partial_transpose(
    rho: DensityMatrix | HermitianOperator, party: int
) -> HermitianOperator:
    """Transpose the indices of qubit ``party`` (1-based)."""
    m = rho.entries
    n = _num_qubits(m.shape[0])
    if not 1 <= party <= n:
        raise ValidationError(f"party {party} outside 1..{n}")
    t = m.reshape([2] * (2 * n))
    t = np.swapaxes(t, party - 1, party - 1 + n)
    return HermitianOperator(t.reshape(m.shape), f"T{party}")


def hermitian_eigenvalues(op: HermitianOperator | npt.ArrayLike) -> RealArray:
    """
    Real eigenvalues of a Hermitian matrix, sorted descending.

    Degenerate eigenvalues carry no ordering guarantee; treat the result as a
    multiset.

    Raises:
        ValidationError: If the input is not Hermitian within tolerance, or
            an eigenpair fails the residual check.

    """
    m = op.entries if isinstance(op, HermitianOperator) else np.asarray(op)
    scale = max(1.0, float(np.max(np.abs(m))))
    if hermiticity_error(m) > HERM_TOL * scale:
        raise ValidationError("hermitian_eigenvalues needs a Hermitian matrix")
    values, vectors = np.linalg.eigh(m)
    residual = float(np.max(np.linalg.norm(m @ vectors - vectors * values, axis=0)))
    if residual > EIG_RESIDUAL_TOL * scale:
        raise ValidationError(f"eigensolver residual {residual:.3e} too large")
    return values[::-1].astype(np.float64)


def expectation(rho: DensityMatrix, op: HermitianOperator) -> float:
    """Return Tr(ρO) after checking its imaginary part vanishes."""
    if rho.dim != op.dim:
        raise DimensionError(f"dimension mismatch: state {rho.dim}, operator {op.dim}")
    value = complex(np.trace(rho.entries @ op.entries))
    if abs(value.imag) > HERM_TOL * max(1.0, float(np.max(np.abs(op.entries)))):
        raise ValidationError(f"expectation has imaginary part {value.imag:.3e}")
    return value.real


def _psd_sqrt(m: ComplexArray) -> ComplexArray:
    values, vectors = np.linalg.eigh(m)
    roots = np.sqrt(np.clip(values, 0.0, None))
    return (vectors * roots) @ vectors.conj().T


def state_fidelity(
    rho: DensityMatrix,
    sigma: DensityMatrix,
    convention: FidelityConvention = FidelityConvention.ROOT,
) -> float:
    """
    Uhlmann fidelity between two states.

    ROOT returns F = Tr√(√ρ σ √ρ); SQUARED returns F².
    """
    if rho.dim != sigma.dim:
        raise DimensionError("fidelity needs states of equal dimension")
    root = _psd_sqrt(rho.entries)
    inner = root @ sigma.entries @ root
    inner = (inner + inner.conj().T) / 2
    values = np.clip(np.linalg.eigvalsh(inner), 0.0, None)
    fid = float(min(1.0, np.sum(np.sqrt(values))))
    if convention == FidelityConvention.SQUARED:
        return fid**2
    return fid


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Return ½‖ρ − σ‖₁."""
    diff = rho.entries - sigma.entries
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh((diff + diff.conj().T) / 2))))


def is_unitary(u: npt.ArrayLike, tol: float) -> bool:
    """Return True if U†U = I within ``tol`` entrywise."""
    m = np.asarray(u)
    return bool(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))) <= tol)


def phase_insensitive_overlap(u: npt.ArrayLike, v: npt.ArrayLike) -> float:
    """Return |Tr(U†V)|/d, the global-phase-free process overlap."""
    a = np.asarray(u)
    b = np.asarray(v)
    return float(abs(np.trace(a.conj().T @ b)) / a.shape[0])
