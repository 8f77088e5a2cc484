"""Projective measurements, photon counting and the CHSH test.

Count simulation draws, for every setting ``k``, an independent
``numpy.random.Generator(PCG64(SeedSequence((seed, k))))``. The stream of a
setting depends only on ``(seed, k)``, so results do not depend on how the
settings are scheduled.
"""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .optics import OAM_KETS, POL_KETS, product_ket, vv_qubit
from .qcore import PureState, _as_matrix

POL_BASES = {"z": ("R", "L"), "x": ("H", "V"), "y": ("D", "A")}
OAM_BASES = {"z": ("p", "n"), "x": ("h", "v"), "y": ("d", "a")}


@dataclass(frozen=True, eq=False)
class MeasurementSetting:
    """A product projector ``|chi_1><chi_1| (x) |chi_2><chi_2|``.

    ``group`` collects the settings whose projectors form one complete
    measurement basis; frequencies are normalized within a group.
    """

    projector_1: PureState
    projector_2: PureState
    label: str
    id_1: str = ""
    id_2: str = ""
    group: str = ""

    @property
    def vector(self) -> np.ndarray:
        return np.kron(self.projector_1.vector, self.projector_2.vector)


@dataclass(frozen=True, eq=False)
class CountRecord:
    setting: MeasurementSetting
    coincidences: int
    accidentals: int = 0
    integration: float = 1.0
    corrected: bool = False

    @property
    def variance(self) -> float:
        """Poisson variance of ``coincidences`` (raw plus subtracted background)."""
        if self.corrected:
            return float(self.coincidences + 2 * self.accidentals)
        return float(self.coincidences)


@dataclass(frozen=True)
class CHSHResult:
    S: float
    sigma_S: float
    correlators: Tuple[float, float, float, float]  # E(a0,b0), E(a1,b0), E(a0,b1), E(a1,b1)


# ---------------------------------------------------------------------------
# settings


def photon_tomography_states(m: int) -> List[Tuple[str, str, PureState]]:
    """The 36 single-photon product states as ``(basis id, state id, state)``."""
    out = []
    for (pb, pols), (ob, oams) in itertools.product(POL_BASES.items(), OAM_BASES.items()):
        for pol, oam in itertools.product(pols, oams):
            out.append((pb + ob, pol + oam, product_ket(POL_KETS[pol], OAM_KETS[oam], m)))
    return out


def tomography_settings(m1: int, m2: int) -> List[MeasurementSetting]:
    """6^4 = 1296 product projectors: Pauli eigenstates of all four qubits."""
    s1, s2 = photon_tomography_states(m1), photon_tomography_states(m2)
    settings = []
    for (g1, id1, p1), (g2, id2, p2) in itertools.product(s1, s2):
        settings.append(MeasurementSetting(p1, p2, f"{id1}|{id2}", id1, id2, f"{g1}|{g2}"))
    return settings


def projector_vectors(settings: Sequence[MeasurementSetting]) -> np.ndarray:
    """Stack the 16-dim product vectors of ``settings`` as rows."""
    return np.stack([s.vector for s in settings])


def born_probability(rho, setting: MeasurementSetting) -> float:
    """``Tr(rho P_1 (x) P_2)``."""
    v = setting.vector
    return float(np.clip(np.vdot(v, _as_matrix(rho) @ v).real, 0.0, 1.0))


def born_probabilities(rho, settings: Sequence[MeasurementSetting]) -> np.ndarray:
    vecs = projector_vectors(settings)
    return _probs(_as_matrix(rho), vecs)


def _probs(rho: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    return np.clip(np.einsum("ki,ij,kj->k", vecs.conj(), rho, vecs).real, 0.0, None)


# ---------------------------------------------------------------------------
# counting


def setting_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((int(seed), int(index)))))


def simulate_counts(
    rho,
    settings: Sequence[MeasurementSetting],
    n_per_setting: int,
    dark_rate: float = 0.0,
    seed: int = 0,
    integration: float = 1.0,
) -> List[CountRecord]:
    """Poisson coincidence counts for each setting.

    Signal counts have mean ``n_per_setting * p_born``. Accidental
    coincidences with mean ``n_per_setting * dark_rate`` are added to the
    recorded coincidences and also stored on their own.
    """
    if n_per_setting <= 0:
        raise ValueError("n_per_setting must be positive")
    if dark_rate < 0:
        raise ValueError("dark_rate must be nonnegative")
    probs = born_probabilities(rho, settings)
    records = []
    for k, (s, p) in enumerate(zip(settings, probs)):
        rng = setting_rng(seed, k)
        signal = int(rng.poisson(n_per_setting * p))
        acc = int(rng.poisson(n_per_setting * dark_rate)) if dark_rate > 0 else 0
        records.append(CountRecord(s, signal + acc, acc, integration))
    return records


def dark_correct(records: Iterable[CountRecord]) -> List[CountRecord]:
    """Subtract accidentals, never going below zero."""
    out = []
    for r in records:
        if r.corrected:
            out.append(r)
            continue
        out.append(replace(r, coincidences=max(0, r.coincidences - r.accidentals), corrected=True))
    return out


# ---------------------------------------------------------------------------
# CHSH

ALICE_ANGLES = {"a0": np.pi / 4, "a1": 0.0}
BOB_ANGLES = {"b0": np.pi / 8, "b1": 3 * np.pi / 8}
CHSH_PAIRS = (("a0", "b0"), ("a1", "b0"), ("a0", "b1"), ("a1", "b1"))
CHSH_SIGNS = (1, 1, 1, -1)


def chsh_bases() -> Dict[str, Tuple[np.ndarray, np.ndarray]]:
    """Alice's and Bob's bases on the VV qubit, ``(+1 outcome, -1 outcome)``.

    Alice measures ``(|0> +- |1>)/sqrt(2)`` as ``a0`` and ``{|0>, |1>}`` as
    ``a1``; Bob measures real superpositions at ``pi/8`` (``b0``) and
    ``3 pi/8`` (``b1``). With this labeling
    ``S = E(a0,b0) + E(a1,b0) + E(a0,b1) - E(a1,b1)`` reaches ``2 sqrt(2)``.
    """
    s, c = np.sin(np.pi / 8), np.cos(np.pi / 8)
    r = 1 / np.sqrt(2)
    return {
        "a0": (np.array([r, r]), np.array([r, -r])),
        "a1": (np.array([1.0, 0.0]), np.array([0.0, 1.0])),
        "b0": (np.array([c, s]), np.array([-s, c])),
        "b1": (np.array([s, c]), np.array([-c, s])),
    }


def vv_projector_state(m: int, qubit: np.ndarray) -> PureState:
    """Lift ``c0|0> + c1|1>`` of the VV qubit of order ``m`` into the photon space."""
    zero, one = vv_qubit(m)
    return PureState(zero.basis, qubit[0] * zero.vector + qubit[1] * one.vector)


def chsh_settings(m1: int, m2: int) -> List[MeasurementSetting]:
    """16 settings: 4 basis pairs times 4 outcome pairs."""
    bases = chsh_bases()
    out = []
    for a, b in CHSH_PAIRS:
        for (sa, va), (sb, vb) in itertools.product(zip("+-", bases[a]), zip("+-", bases[b])):
            out.append(MeasurementSetting(
                vv_projector_state(m1, va), vv_projector_state(m2, vb),
                f"{a}{b}:{sa}{sb}", f"{a}{sa}", f"{b}{sb}", f"{a}{b}",
            ))
    return out


def _correlator(weights: Dict[str, float]) -> float:
    total = sum(weights.values())
    if total <= 0:
        raise ValueError("no coincidences for a CHSH setting")
    return (weights["++"] + weights["--"] - weights["+-"] - weights["-+"]) / total


def chsh_S(rho16, m1: int, m2: int, dark_rate: float = 0.0) -> CHSHResult:
    """CHSH parameter from Born probabilities.

    A nonzero ``dark_rate`` adds the expected accidental probability to
    every outcome, giving the raw (uncorrected) expectation.
    """
    rho = _as_matrix(rho16)
    settings = chsh_settings(m1, m2)
    probs = born_probabilities(rho, settings) + dark_rate
    table: Dict[str, Dict[str, float]] = {}
    for s, p in zip(settings, probs):
        pair, outcome = s.label.split(":")
        table.setdefault(pair, {})[outcome] = float(p)
    if min(sum(t.values()) for t in table.values()) < 1e-12:
        raise ValueError("state has no weight in the VV subspace")
    es = tuple(_correlator(table[a + b]) for a, b in CHSH_PAIRS)
    return CHSHResult(abs(float(np.dot(CHSH_SIGNS, es))), 0.0, es)


def chsh_S_from_counts(records: Sequence[CountRecord]) -> CHSHResult:
    """CHSH parameter and its Poisson standard deviation from count records."""
    table: Dict[str, Dict[str, CountRecord]] = {}
    for r in records:
        pair, outcome = r.setting.label.split(":")
        table.setdefault(pair, {})[outcome] = r
    es, var_s = [], 0.0
    for a, b in CHSH_PAIRS:
        recs = table.get(a + b, {})
        if set(recs) != {"++", "+-", "-+", "--"}:
            raise ValueError(f"incomplete CHSH count set for {a}{b}")
        counts = {k: float(r.coincidences) for k, r in recs.items()}
        n = sum(counts.values())
        e = _correlator(counts)
        signs = {"++": 1, "--": 1, "+-": -1, "-+": -1}
        var_s += sum((signs[k] - e) ** 2 * r.variance for k, r in recs.items()) / n ** 2
        es.append(e)
    s = abs(float(np.dot(CHSH_SIGNS, es)))
    return CHSHResult(s, float(np.sqrt(var_s)), tuple(es))


# ---------------------------------------------------------------------------
# CSV


CSV_FIELDS = ("label", "projector_1", "projector_2", "coincidences", "accidentals", "integration", "corrected")


def records_to_csv(records: Sequence[CountRecord], path: Optional[Union[str, Path]] = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in records:
        s = r.setting
        w.writerow([s.label, s.id_1, s.id_2, r.coincidences, r.accidentals,
                    repr(float(r.integration)), int(r.corrected)])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def read_counts_csv(path: Union[str, Path], settings: Sequence[MeasurementSetting]) -> List[CountRecord]:
    """Read records written by :func:`records_to_csv`, matching rows to ``settings`` by label."""
    by_label = {s.label: s for s in settings}
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            try:
                s = by_label[row["label"]]
            except KeyError:
                raise ValueError(f"unknown setting label {row['label']!r}") from None
            out.append(CountRecord(s, int(row["coincidences"]), int(row["accidentals"]),
                                   float(row["integration"]), bool(int(row["corrected"]))))
    return out
