"""Entanglement and state-quality measures."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .optics import OAM_KETS, POL_KETS, PRODUCT_TO_ORDER, product_ket, vv_subspace_isometry
from .qcore import (
    DensityMatrix,
    ModeBasis,
    PureState,
    _as_matrix,
    hermitize,
    is_physical,
    psd_factor,
    order_basis,
)

SIGMA_YY = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))

#: Outcomes above this concurrence are put in the entangled region.
REGION_THRESHOLD = 0.5

#: Conditional outcomes less likely than this are treated as null.
NULL_PROBABILITY = 1e-12


@dataclass(frozen=True)
class ConcurrenceReport:
    value: float
    wootters_lambdas: Tuple[float, float, float, float]

    def __float__(self):
        return self.value


def _qubit_split(rho) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """Return the 4x4 matrix and the permutation taking it to a 2 (x) 2 product basis."""
    if isinstance(rho, DensityMatrix):
        labels = rho.basis.labels
        if len(rho.basis.factors) == 2 and all(f.dim == 2 for f in rho.basis.factors):
            return rho.matrix, None
        if len(labels) == 4 and all(len(lab) == 2 and lab[0] in ("R", "L") for lab in labels):
            # one photon: split into polarization (x) OAM
            m = abs(labels[0][1])
            if rho.basis.labels != order_basis(m).labels:
                raise ValueError("photon basis is not in canonical order")
            return rho.matrix, PRODUCT_TO_ORDER
        raise ValueError("density matrix has no declared qubit split")
    return np.asarray(rho, dtype=complex), None


def concurrence(rho, split: Optional[Sequence[int]] = None) -> ConcurrenceReport:
    """Wootters concurrence of a two-qubit state.

    Parameters
    ----------
    rho : DensityMatrix or array_like
        4x4 state. A bare array is read in its own product basis
        ``(00, 01, 10, 11)``. A single-photon ``DensityMatrix`` is split into
        polarization (x) OAM.
    split : sequence of 4 ints, optional
        Row indices of ``rho`` holding the product basis states
        ``00, 01, 10, 11``. Overrides the split implied by ``rho``.
    """
    mat, perm = _qubit_split(rho)
    if split is not None:
        perm = np.asarray(split)
    if mat.shape != (4, 4):
        raise ValueError("concurrence is defined here for 4x4 states only")
    if perm is not None:
        mat = mat[np.ix_(perm, perm)]
    if not is_physical(mat, atol=1e-8):
        raise ValueError("concurrence needs a physical density matrix")
    # rho rho~ has the same spectrum as B^dagger B with B = F^T (Y (x) Y) F,
    # so the Wootters lambdas are the singular values of B
    f = psd_factor(hermitize(mat))
    lambdas = np.linalg.svd(f.T @ SIGMA_YY @ f, compute_uv=False)
    value = float(np.clip(lambdas[0] - lambdas[1:].sum(), 0.0, 1.0))
    return ConcurrenceReport(value, tuple(float(x) for x in lambdas))


def fidelity(rho, sigma) -> float:
    """Root fidelity ``Tr sqrt(sqrt(rho) sigma sqrt(rho))`` clipped to [0, 1]."""
    a, b = _as_matrix(rho), _as_matrix(sigma)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    # ||sqrt(rho) sqrt(sigma)||_1 computed from PSD factors
    sv = np.linalg.svd(psd_factor(a).conj().T @ psd_factor(b), compute_uv=False)
    return float(np.clip(sv.sum(), 0.0, 1.0))


def purity(rho) -> float:
    m = _as_matrix(rho)
    return float(np.real(np.einsum("ij,ji->", m, m)))


def conditional_state(rho16, projected_photon: int, chi) -> Tuple[DensityMatrix, float]:
    """State of one photon after projecting the other onto ``chi``.

    Returns the renormalized 4x4 state of the unprojected photon and the
    probability of the projection.
    """
    if projected_photon not in (1, 2):
        raise ValueError("projected_photon must be 1 or 2")
    m = _as_matrix(rho16)
    if m.shape != (16, 16):
        raise ValueError("expected a 16x16 two-photon state")
    vec = chi.vector if isinstance(chi, PureState) else np.asarray(chi, dtype=complex)
    if abs(np.linalg.norm(vec) - 1.0) > 1e-10:
        raise ValueError("projector state must be normalized")
    t = m.reshape(4, 4, 4, 4)
    if projected_photon == 2:
        out = np.einsum("b,abcd,d->ac", vec.conj(), t, vec)
    else:
        out = np.einsum("a,abcd,c->bd", vec.conj(), t, vec)
    prob = float(np.trace(out).real)
    if prob < NULL_PROBABILITY:
        raise ValueError(f"projection has probability {prob:.3e}: null outcome")
    basis = _photon_basis(rho16, 1 if projected_photon == 2 else 2)
    return DensityMatrix(basis, out / prob, atol=1e-8), prob


def _photon_basis(rho, photon: int) -> ModeBasis:
    if isinstance(rho, DensityMatrix) and len(rho.basis.factors) == 2:
        return rho.basis.factors[photon - 1]
    return order_basis(1)


# ---------------------------------------------------------------------------
# projector sets


@dataclass(frozen=True)
class LabeledProjector:
    label: str
    state: PureState


def projector_set(m: int) -> List[LabeledProjector]:
    """Default 34 single-photon projectors for a photon of order ``m``.

    All 36 products of a polarization Pauli eigenstate with an OAM Pauli
    eigenstate, minus the two that are orthogonal to the photon's VV
    subspace (``|R,-m>`` and ``|L,+m>`` for positive ``m``).
    """
    out = []
    null = {("R", "n"), ("L", "p")} if m > 0 else {("R", "p"), ("L", "n")}
    for pol, oam in itertools.product(POL_KETS, OAM_KETS):
        if (pol, oam) in null:
            continue
        out.append(LabeledProjector(f"{pol}{oam}", product_ket(POL_KETS[pol], OAM_KETS[oam], m)))
    return out


def default_projector_file(m: int) -> Path:
    name = "projectors_vv.txt" if m > 0 else "projectors_pi.txt"
    return Path(str(resources.files("vvpairs").joinpath("data", name)))


def format_projector_file(projs: Sequence[LabeledProjector]) -> str:
    lines = [
        "# label  then four re,im amplitude pairs on ((R,+m),(L,-m),(L,+m),(R,-m))",
    ]
    for p in projs:
        amps = "  ".join(f"{z.real + 0.0:.17g},{z.imag + 0.0:.17g}" for z in p.state.vector)
        lines.append(f"{p.label}  {amps}")
    return "\n".join(lines) + "\n"


def read_projector_file(path: Union[str, Path], m: int) -> List[LabeledProjector]:
    """Parse a projector file; amplitudes are renormalized on load."""
    out = []
    basis = order_basis(m)
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 5:
            raise ValueError(f"{path}:{lineno}: expected a label and 4 amplitudes")
        try:
            amps = [complex(*(float(x) for x in p.split(","))) for p in parts[1:]]
        except (TypeError, ValueError):
            raise ValueError(f"{path}:{lineno}: malformed amplitude") from None
        out.append(LabeledProjector(parts[0], PureState.from_amplitudes(basis, amps, phase_fix=False)))
    if not out:
        raise ValueError(f"{path}: no projectors found")
    return out


def load_projectors(m: int, path: Optional[Union[str, Path]] = None) -> List[LabeledProjector]:
    return read_projector_file(path or default_projector_file(m), m)


# ---------------------------------------------------------------------------
# distributions


@dataclass(frozen=True)
class DistributionEntry:
    label: str
    concurrence: float
    probability: float
    region: str


@dataclass(frozen=True)
class ConcurrenceDistribution:
    entries: Tuple[DistributionEntry, ...]

    @property
    def entangled(self) -> List[str]:
        return [e.label for e in self.entries if e.region == "entangled"]

    @property
    def separable(self) -> List[str]:
        return [e.label for e in self.entries if e.region == "separable"]

    @property
    def region_split(self) -> Tuple[List[str], List[str]]:
        return self.entangled, self.separable

    def values(self) -> np.ndarray:
        return np.array([e.concurrence for e in self.entries])


def classify(c: float) -> str:
    return "entangled" if c > REGION_THRESHOLD else "separable"


def concurrence_distribution(rho16, projectors, photon: int = 2) -> ConcurrenceDistribution:
    """Intrasystem concurrence of one photon for each projection of the other.

    ``photon`` is the photon that gets projected; the concurrence is computed
    on the remaining photon's polarization (x) OAM split.
    """
    entries = []
    for i, p in enumerate(projectors):
        label, state = (p.label, p.state) if isinstance(p, LabeledProjector) else (f"chi{i}", p)
        cond, prob = conditional_state(rho16, photon, state)
        c = concurrence(cond.matrix, split=PRODUCT_TO_ORDER).value
        entries.append(DistributionEntry(label, c, prob, classify(c)))
    return ConcurrenceDistribution(tuple(entries))


def vv_block(rho16, m1: int, m2: int) -> Tuple[np.ndarray, float]:
    """Two-qubit VV block of ``rho16`` (unnormalized) and its trace."""
    iso = vv_subspace_isometry(m1, m2)
    block = iso.conj().T @ _as_matrix(rho16) @ iso
    return block, float(np.trace(block).real)


def intersystem_concurrence(rho16, m1: int, m2: int) -> Tuple[ConcurrenceReport, float]:
    """Concurrence between the two VV qubits after projecting onto their subspace.

    Returns the report and the weight of ``rho16`` inside the subspace.
    """
    block, weight = vv_block(rho16, m1, m2)
    if weight < NULL_PROBABILITY:
        raise ValueError(f"state has weight {weight:.3e} in the VV subspace")
    return concurrence(block / weight), weight


def werner_p_from_concurrence(c: float) -> float:
    """Invert ``C = (3p - 1)/2``."""
    if not 0.0 <= c <= 1.0:
        raise ValueError("target concurrence must lie in [0, 1]")
    return (2.0 * c + 1.0) / 3.0
