"""Linear algebra and state containers on labeled finite-dimensional spaces.

Matrices are plain ``numpy`` arrays. ``PureState`` and ``DensityMatrix`` pair
an array with the ``ModeBasis`` that gives each index a physical meaning.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Tuple, Union

import numpy as np

#: Default absolute tolerance for physicality checks.
ATOL = 1e-9

#: Largest asymmetry that is silently symmetrized away.
HERMITIAN_TOL = 1e-8

#: Eigenvalues below ``-UNPHYSICAL_TOL`` mark a matrix as unphysical.
UNPHYSICAL_TOL = 1e-6

Label = Tuple  # (pol, oam) for one photon, or a tuple of those for a composite


@dataclass(frozen=True)
class ModeBasis:
    """Ordered, distinct labels of a Hilbert space.

    Single-photon labels are ``(pol, oam)`` pairs with ``pol`` in ``{"R", "L"}``.
    Composite bases built by :meth:`tensor` keep their factors so that partial
    traces can recover them.
    """

    labels: Tuple[Label, ...]
    factors: Tuple["ModeBasis", ...] = field(default=(), compare=False)

    def __post_init__(self):
        labels = tuple(tuple(lab) if isinstance(lab, list) else lab for lab in self.labels)
        object.__setattr__(self, "labels", labels)
        if len(set(labels)) != len(labels):
            raise ValueError("basis labels must be distinct")

    @property
    def dim(self) -> int:
        return len(self.labels)

    def __len__(self):
        return len(self.labels)

    def index(self, label) -> int:
        return self.labels.index(label)

    def tensor(self, other: "ModeBasis") -> "ModeBasis":
        labels = tuple(_flat(a) + _flat(b) for a in self.labels for b in other.labels)
        return ModeBasis(labels, (self.factors or (self,)) + (other.factors or (other,)))


def _flat(label):
    if label and isinstance(label[0], tuple):
        return label
    return (label,)


def order_basis(m: int) -> ModeBasis:
    """Single-photon basis ``((R,+|m|), (L,-|m|), (L,+|m|), (R,-|m|))``."""
    if m == 0:
        raise ValueError("order must be nonzero")
    k = abs(int(m))
    return ModeBasis((("R", k), ("L", -k), ("L", k), ("R", -k)))


POL_BASIS = ModeBasis((("R", 0), ("L", 0)))


def _as_matrix(x) -> np.ndarray:
    if isinstance(x, DensityMatrix):
        return x.matrix
    if isinstance(x, PureState):
        return x.vector[:, None]
    return np.asarray(x, dtype=complex)


def fix_global_phase(vec: np.ndarray, atol: float = 1e-12) -> np.ndarray:
    """Rotate ``vec`` so its first non-negligible entry is real and positive."""
    vec = np.asarray(vec, dtype=complex)
    nz = np.flatnonzero(np.abs(vec) > atol)
    if nz.size == 0:
        return vec.copy()
    first = vec[nz[0]]
    return vec * (abs(first) / first)


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized ket over a labeled basis."""

    basis: ModeBasis
    vector: np.ndarray

    def __post_init__(self):
        vec = np.array(self.vector, dtype=complex).reshape(-1)
        if vec.size != self.basis.dim:
            raise ValueError(f"expected {self.basis.dim} amplitudes, got {vec.size}")
        norm = np.linalg.norm(vec)
        if norm == 0:
            raise ValueError("zero vector is not a state")
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"state not normalized (norm {norm!r})")
        vec.setflags(write=False)
        object.__setattr__(self, "vector", vec)

    @classmethod
    def from_amplitudes(cls, basis: ModeBasis, amplitudes, phase_fix: bool = True) -> "PureState":
        """Normalize ``amplitudes`` (and optionally fix the global phase)."""
        vec = np.asarray(amplitudes, dtype=complex).reshape(-1)
        norm = np.linalg.norm(vec)
        if norm == 0:
            raise ValueError("zero vector is not a state")
        vec = vec / norm
        if phase_fix:
            vec = fix_global_phase(vec)
        return cls(basis, vec)

    @classmethod
    def ket(cls, basis: ModeBasis, label) -> "PureState":
        vec = np.zeros(basis.dim, dtype=complex)
        vec[basis.index(label)] = 1.0
        return cls(basis, vec)

    @property
    def dim(self) -> int:
        return self.basis.dim

    def inner(self, other: "PureState") -> complex:
        """``<self|other>``."""
        return complex(np.vdot(self.vector, other.vector))

    def tensor(self, other: "PureState") -> "PureState":
        return PureState(self.basis.tensor(other.basis), np.kron(self.vector, other.vector))

    def amplitude(self, label) -> complex:
        return complex(self.vector[self.basis.index(label)])

    def density(self) -> "DensityMatrix":
        return projector(self)

    def isclose(self, other: "PureState", atol: float = ATOL, up_to_phase: bool = False) -> bool:
        if self.basis.labels != other.basis.labels:
            return False
        if up_to_phase:
            return abs(abs(self.inner(other)) - 1.0) < atol
        return bool(np.allclose(self.vector, other.vector, atol=atol))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite operator over a labeled basis."""

    basis: ModeBasis
    matrix: np.ndarray
    atol: float = ATOL

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=complex)
        d = self.basis.dim
        if mat.shape != (d, d):
            raise ValueError(f"expected a {d}x{d} matrix, got shape {mat.shape}")
        mat = hermitize(mat)
        tr = np.trace(mat).real
        if abs(tr - 1.0) > 1e-10:
            raise ValueError(f"trace must be 1, got {tr!r}")
        lowest = np.linalg.eigvalsh(mat)[0]
        if lowest < -self.atol:
            raise ValueError(f"negative eigenvalue {lowest:.3e}: not a physical state")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def dim(self) -> int:
        return self.basis.dim

    def partial_trace(self, keep: int) -> "DensityMatrix":
        if len(self.basis.factors) != 2:
            raise ValueError("partial_trace needs a bipartite basis")
        dims = tuple(f.dim for f in self.basis.factors)
        reduced = partial_trace(self.matrix, keep, dims)
        return DensityMatrix(self.basis.factors[keep], reduced / np.trace(reduced).real)

    def tensor(self, other: "DensityMatrix") -> "DensityMatrix":
        return DensityMatrix(self.basis.tensor(other.basis), np.kron(self.matrix, other.matrix))

    @classmethod
    def maximally_mixed(cls, basis: ModeBasis) -> "DensityMatrix":
        return cls(basis, np.eye(basis.dim) / basis.dim)

    def mix(self, other: "DensityMatrix", weight: float) -> "DensityMatrix":
        """``weight * self + (1 - weight) * other``."""
        return DensityMatrix(self.basis, weight * self.matrix + (1 - weight) * other.matrix)


# ---------------------------------------------------------------------------
# Operations on arrays


def tensor(a, b) -> np.ndarray:
    """Kronecker product with the left factor outermost."""
    return np.kron(_as_matrix(a), _as_matrix(b))


def hermitize(m: np.ndarray, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Return ``(M + M^dagger)/2``; reject matrices further than ``tol`` from Hermitian."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"square matrix required, got shape {m.shape}")
    asym = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
    if asym > tol:
        raise ValueError(f"matrix is not Hermitian (asymmetry {asym:.3e})")
    return (m + m.conj().T) / 2


def partial_trace(rho, keep: int, dims: Sequence[int]) -> np.ndarray:
    """Trace out one factor of a bipartite operator.

    Parameters
    ----------
    rho : array_like or DensityMatrix
        Operator on a ``dims[0] * dims[1]`` dimensional space.
    keep : {0, 1}
        Index of the subsystem to keep.
    dims : (int, int)
        Factor dimensions, left factor first.
    """
    m = _as_matrix(rho)
    da, db = (int(d) for d in dims)
    if m.shape != (da * db, da * db):
        raise ValueError(f"dims {dims} do not match operator shape {m.shape}")
    t = m.reshape(da, db, da, db)
    if keep == 0:
        return np.einsum("ijkj->ik", t)
    if keep == 1:
        return np.einsum("ijil->jl", t)
    raise ValueError("keep must be 0 or 1")


def hermitian_eigen(m) -> Tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix.

    Eigenvalues are returned in descending order. Each eigenvector column is
    phase-fixed so that its first non-negligible component is real positive.
    """
    h = hermitize(_as_matrix(m))
    w, v = np.linalg.eigh(h)
    w = w[::-1]
    v = v[:, ::-1]
    for j in range(v.shape[1]):
        v[:, j] = fix_global_phase(v[:, j], atol=1e-10)
    return w, v


def _psd_eigen(m) -> Tuple[np.ndarray, np.ndarray]:
    w, v = hermitian_eigen(m)
    if w.size and w[-1] < -UNPHYSICAL_TOL:
        raise ValueError(f"eigenvalue {w[-1]:.3e} is negative: matrix is not PSD")
    # eigenvalues this small are roundoff; their square roots (~1e-8) are not
    floor = w.size * np.finfo(float).eps * max(abs(w[0]), 1e-300) if w.size else 0.0
    return np.where(w > floor, w, 0.0), v


def matrix_sqrt(m) -> np.ndarray:
    """Principal square root of a positive semidefinite Hermitian matrix.

    Eigenvalues down to ``-1e-6`` are treated as roundoff and clipped to zero;
    anything more negative raises ``ValueError``.
    """
    w, v = _psd_eigen(m)
    root = (v * np.sqrt(w)) @ v.conj().T
    return (root + root.conj().T) / 2


def psd_factor(m) -> np.ndarray:
    """``F`` with ``F F^dagger = m`` (columns are scaled eigenvectors)."""
    w, v = _psd_eigen(m)
    return v * np.sqrt(w)


def projector(psi) -> DensityMatrix:
    """``|psi><psi|`` as a density matrix over the state's basis."""
    if isinstance(psi, PureState):
        return DensityMatrix(psi.basis, np.outer(psi.vector, psi.vector.conj()))
    vec = np.asarray(psi, dtype=complex).reshape(-1)
    norm = np.linalg.norm(vec)
    if norm == 0:
        raise ValueError("zero vector has no projector")
    vec = vec / norm
    basis = ModeBasis(tuple((i,) for i in range(vec.size)))
    return DensityMatrix(basis, np.outer(vec, vec.conj()))


def is_physical(m, atol: float = ATOL) -> bool:
    m = _as_matrix(m)
    try:
        h = hermitize(m)
    except ValueError:
        return False
    if abs(np.trace(h).real - 1.0) > 1e-10:
        return False
    return bool(np.linalg.eigvalsh(h)[0] >= -atol)


ArrayOrState = Union[np.ndarray, DensityMatrix]
