"""Density-matrix reconstruction from coincidence counts."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np

from .measure import CountRecord, MeasurementSetting, born_probabilities, projector_vectors
from .qcore import DensityMatrix, ModeBasis, _as_matrix, hermitian_eigen, hermitize

PROB_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class TomographyData:
    """Projector vectors, counts and basis groups of a tomography run.

    ``counts`` may be non-integer, which is how noiseless (expected) data is
    represented.
    """

    vectors: np.ndarray
    counts: np.ndarray
    groups: np.ndarray
    basis: Optional[ModeBasis] = None

    @classmethod
    def from_records(cls, records: Sequence[CountRecord]) -> "TomographyData":
        settings = [r.setting for r in records]
        counts = np.array([r.coincidences for r in records], dtype=float)
        return cls._build(settings, counts)

    @classmethod
    def expected(cls, rho, settings: Sequence[MeasurementSetting], n: float = 1.0) -> "TomographyData":
        """Noiseless data: counts equal to ``n`` times the Born probabilities."""
        return cls._build(settings, n * born_probabilities(rho, settings))

    @classmethod
    def _build(cls, settings, counts):
        _, groups = np.unique([s.group for s in settings], return_inverse=True)
        s0 = settings[0]
        basis = s0.projector_1.basis.tensor(s0.projector_2.basis)
        return cls(projector_vectors(settings), np.asarray(counts, dtype=float), groups, basis)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def frequencies(self) -> np.ndarray:
        totals = np.bincount(self.groups, weights=self.counts)
        with np.errstate(invalid="ignore", divide="ignore"):
            f = self.counts / totals[self.groups]
        return np.nan_to_num(f)


def _as_data(records) -> TomographyData:
    if isinstance(records, TomographyData):
        return records
    return TomographyData.from_records(records)


def hermitian_basis(d: int) -> np.ndarray:
    """Orthonormal basis of ``d x d`` Hermitian matrices, shape ``(d*d, d, d)``."""
    out = []
    for i in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[i, i] = 1
        out.append(e)
    for i in range(d):
        for j in range(i + 1, d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = e[j, i] = 1 / np.sqrt(2)
            out.append(e)
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = 1j / np.sqrt(2)
            e[j, i] = -1j / np.sqrt(2)
            out.append(e)
    return np.stack(out)


def measurement_matrix(vectors: np.ndarray) -> np.ndarray:
    """Real matrix ``A[k, a] = <v_k| B_a |v_k>`` on the Hermitian basis."""
    d = vectors.shape[1]
    basis = hermitian_basis(d).reshape(d * d, d * d)
    outer = np.einsum("ki,kj->kij", vectors.conj(), vectors).reshape(len(vectors), d * d)
    return (outer @ basis.T).real


def linear_inversion(records) -> np.ndarray:
    """Least-squares solution of ``Tr(rho P_k) = f_k``; may be unphysical."""
    data = _as_data(records)
    d = data.dim
    a = measurement_matrix(data.vectors)
    rank = np.linalg.matrix_rank(a)
    if rank < d * d:
        raise ValueError(f"measurement set is not informationally complete (rank {rank} < {d * d})")
    coeffs, *_ = np.linalg.lstsq(a, data.frequencies(), rcond=None)
    rho = np.einsum("a,aij->ij", coeffs, hermitian_basis(d))
    rho = (rho + rho.conj().T) / 2
    return rho / np.trace(rho).real


def project_physical(m) -> DensityMatrix:
    """Clip negative eigenvalues to zero and renormalize the trace."""
    w, v = hermitian_eigen(m)
    w = np.clip(w, 0.0, None)
    if w.sum() <= 0:
        raise ValueError("matrix has no positive eigenvalue")
    rho = (v * (w / w.sum())) @ v.conj().T
    d = rho.shape[0]
    basis = m.basis if isinstance(m, DensityMatrix) else ModeBasis(tuple((i,) for i in range(d)))
    return DensityMatrix(basis, hermitize(rho))


def log_likelihood(rho, records) -> float:
    """``sum_k N_k ln p_k(rho)`` with probabilities floored at 1e-12."""
    data = _as_data(records)
    p = np.einsum("ki,ij,kj->k", data.vectors.conj(), _as_matrix(rho), data.vectors).real
    return float(np.dot(data.counts, np.log(np.maximum(p, PROB_FLOOR))))


@dataclass(frozen=True, eq=False)
class TomographyResult:
    rho: DensityMatrix
    method: str
    likelihood_trace: List[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = True

    @property
    def log_likelihood(self) -> Optional[float]:
        return self.likelihood_trace[-1] if self.likelihood_trace else None

    def to_json(self, target=None) -> str:
        from .metrics import fidelity

        doc = {
            "basis": [list(map(list, lab)) if isinstance(lab[0], tuple) else list(lab)
                      for lab in self.rho.basis.labels],
            "re": self.rho.matrix.real.tolist(),
            "im": self.rho.matrix.imag.tolist(),
            "method": self.method,
            "iterations": self.iterations,
            "converged": self.converged,
            "log_likelihood": self.log_likelihood,
            "likelihood_trace": self.likelihood_trace,
            "fidelity": None if target is None else fidelity(target, self.rho),
        }
        return json.dumps(doc, indent=1)


def mle_reconstruct(records, tol: float = 1e-10, max_iter: int = 10000,
                    rho0: Optional[np.ndarray] = None) -> TomographyResult:
    """Maximum-likelihood state by the diluted R rho R iteration.

    Each step maps ``rho -> (I + eps R) rho (I + eps R)`` (trace normalized)
    with ``R = sum_k (N_k / N) / p_k * P_k``. ``eps`` starts at 1, is halved
    until the likelihood does not decrease and doubles back towards 1 after
    each accepted step. Iteration stops when the per-count likelihood gain
    falls below ``tol``; hitting ``max_iter`` leaves ``converged`` False.
    """
    data = _as_data(records)
    d = data.dim
    vecs, counts = data.vectors, data.counts
    total = counts.sum()
    if total <= 0:
        raise ValueError("no counts to reconstruct from")
    weights = counts / total
    rho = np.eye(d, dtype=complex) / d if rho0 is None else np.array(rho0, dtype=complex)
    eye = np.eye(d)

    def loglik(r):
        p = np.einsum("ki,ij,kj->k", vecs.conj(), r, vecs).real
        return float(np.dot(weights, np.log(np.maximum(p, PROB_FLOOR)))), p

    ll, p = loglik(rho)
    trace: List[float] = []
    eps = 1.0
    converged = False
    it = 0
    while it < max_iter:
        ratio = np.where(weights > 0, weights / np.maximum(p, PROB_FLOOR), 0.0)
        r_op = (vecs.T * ratio) @ vecs.conj()
        while True:
            step = eye + eps * r_op
            new = step @ rho @ step.conj().T
            new = (new + new.conj().T) / 2
            new /= np.trace(new).real
            new_ll, new_p = loglik(new)
            if new_ll >= ll or eps < 1e-14:
                break
            eps /= 2
        if new_ll < ll:
            # no ascent direction left at machine precision
            converged = True
            break
        it += 1
        gain = new_ll - ll
        rho, ll, p = new, new_ll, new_p
        trace.append(ll * total)
        if gain < tol:
            converged = True
            break
        eps = min(1.0, 2 * eps)
    basis = data.basis or ModeBasis(tuple((i,) for i in range(d)))
    return TomographyResult(DensityMatrix(basis, rho, atol=1e-8), "mle", trace, it, converged)


def linear_result(records) -> TomographyResult:
    """Linear inversion followed by :func:`project_physical`, as a result object."""
    data = _as_data(records)
    rho = project_physical(linear_inversion(data)).matrix
    basis = data.basis or ModeBasis(tuple((i,) for i in range(data.dim)))
    return TomographyResult(DensityMatrix(basis, rho), "linear", [log_likelihood(rho, data)], 1, True)


def read_result_json(path: Union[str, Path]) -> np.ndarray:
    doc = json.loads(Path(path).read_text())
    return np.array(doc["re"]) + 1j * np.array(doc["im"])
