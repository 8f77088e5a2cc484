"""Vector-vortex modes, q-plates and waveplates.

Every photon of order ``m`` lives in the four-dimensional space with basis
``((R,+|m|), (L,-|m|), (L,+|m|), (R,-|m|))``. The first two labels span the
VV subspace of positive orders, the last two the pi-mode subspace. A
negative order simply selects the pi-mode subspace: the formulas for the
radial/azimuthal states evaluated at ``-m`` give the pi-modes of order ``m``.

Polarization convention: circular amplitudes ``(R, L)`` with unit vectors
``e_R = (x - i y)/sqrt(2)`` and ``e_L = (x + i y)/sqrt(2)``. The kets
``|H> = (|R> + |L>)/sqrt(2)`` and ``|V> = (|R> - |L>)/sqrt(2)`` are the
q-plate preimages of the radial and (minus) azimuthal modes.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple

import numpy as np

from .qcore import POL_BASIS, DensityMatrix, ModeBasis, PureState, fix_global_phase, order_basis

SQ2 = np.sqrt(2.0)

# circular amplitudes (R, L) of the six polarization Pauli eigenstates
POL_KETS = {
    "R": np.array([1, 0], dtype=complex),
    "L": np.array([0, 1], dtype=complex),
    "H": np.array([1, 1], dtype=complex) / SQ2,
    "V": np.array([1, -1], dtype=complex) / SQ2,
    "D": np.array([1, -1j], dtype=complex) / SQ2,
    "A": np.array([1, 1j], dtype=complex) / SQ2,
}

# OAM qubit (+m, -m) eigenstates, same Pauli structure
OAM_KETS = {
    "p": np.array([1, 0], dtype=complex),
    "n": np.array([0, 1], dtype=complex),
    "h": np.array([1, 1], dtype=complex) / SQ2,
    "v": np.array([1, -1], dtype=complex) / SQ2,
    "d": np.array([1, 1j], dtype=complex) / SQ2,
    "a": np.array([1, -1j], dtype=complex) / SQ2,
}

# position of pol (x) oam product index (R+, R-, L+, L-) inside the order basis
PRODUCT_TO_ORDER = np.array([0, 3, 2, 1])

BELL_LABELS = ("psi-", "psi+", "phi-", "phi+")

_BELL_ALIASES = {
    "psi-": "psi-", "psim": "psi-", "Ψ⁻": "psi-", "Psi-": "psi-",
    "psi+": "psi+", "psip": "psi+", "Ψ⁺": "psi+", "Psi+": "psi+",
    "phi-": "phi-", "phim": "phi-", "Φ⁻": "phi-", "Phi-": "phi-",
    "phi+": "phi+", "phip": "phi+", "Φ⁺": "phi+", "Phi+": "phi+",
}


def normalize_bell_label(label: str) -> str:
    try:
        return _BELL_ALIASES[label]
    except KeyError:
        raise ValueError(f"unknown Bell label {label!r}; use one of {BELL_LABELS}") from None


def _check_order(m) -> int:
    if int(m) != m or m == 0:
        raise ValueError(f"VV order must be a nonzero integer, got {m!r}")
    return int(m)


def product_ket(pol, oam, m: int) -> PureState:
    """Embed ``pol (x) oam`` (two qubits) into the order-``m`` photon basis."""
    m = _check_order(m)
    prod = np.kron(np.asarray(pol, dtype=complex), np.asarray(oam, dtype=complex))
    vec = np.zeros(4, dtype=complex)
    vec[PRODUCT_TO_ORDER] = prod
    return PureState.from_amplitudes(order_basis(m), vec)


def to_product_order(vec_or_mat: np.ndarray) -> np.ndarray:
    """Reorder a photon vector/matrix from the order basis to pol (x) oam."""
    a = np.asarray(vec_or_mat)
    if a.ndim == 1:
        return a[PRODUCT_TO_ORDER]
    return a[np.ix_(PRODUCT_TO_ORDER, PRODUCT_TO_ORDER)]


def vv_state(m: int, which: str = "radial") -> PureState:
    """Radial or azimuthal VV mode ``(|R,m> +- |L,-m>)/sqrt(2)``.

    For negative ``m`` this returns the pi-modes of order ``|m|``
    (radial -> pi+, azimuthal -> pi-). Amplitudes follow the formula exactly,
    with the ``|R,m>`` coefficient positive; no basis-order phase fix is
    applied because it would flip the sign of pi- and with it the VV qubit.
    """
    m = _check_order(m)
    basis = order_basis(m)
    sign = {"radial": 1.0, "azimuthal": -1.0}.get(which)
    if sign is None:
        raise ValueError("which must be 'radial' or 'azimuthal'")
    vec = np.zeros(4, dtype=complex)
    vec[basis.index(("R", m))] = 1 / SQ2
    vec[basis.index(("L", -m))] = sign / SQ2
    return PureState(basis, vec)


def pi_mode(m: int, sign: str = "+") -> PureState:
    """pi-mode ``(|R,-m> +- |L,m>)/sqrt(2)``."""
    m = _check_order(m)
    if sign not in ("+", "-"):
        raise ValueError("sign must be '+' or '-'")
    return vv_state(-m, "radial" if sign == "+" else "azimuthal")


def vv_qubit(m: int) -> Tuple[PureState, PureState]:
    """Logical ``(|0>, |1>)`` of the VV qubit of order ``m``.

    ``(r_m, theta_m)`` for positive orders and ``(pi+, pi-)`` for negative ones.
    """
    return vv_state(m, "radial"), vv_state(m, "azimuthal")


def vv_projector(m: int) -> np.ndarray:
    """Projector onto the two-dimensional VV subspace of a photon of order ``m``."""
    zero, one = vv_qubit(m)
    return np.outer(zero.vector, zero.vector.conj()) + np.outer(one.vector, one.vector.conj())


def pol_state(name_or_amplitudes) -> PureState:
    """Polarization qubit on ``{(R,0), (L,0)}`` from a name or ``(R, L)`` amplitudes."""
    if isinstance(name_or_amplitudes, str):
        try:
            vec = POL_KETS[name_or_amplitudes]
        except KeyError:
            raise ValueError(f"unknown polarization {name_or_amplitudes!r}") from None
        return PureState(POL_BASIS, vec)
    return PureState.from_amplitudes(POL_BASIS, name_or_amplitudes, phase_fix=False)


# ---------------------------------------------------------------------------
# q-plate


def _check_q(q) -> Fraction:
    fq = Fraction(q).limit_denominator(2)
    if abs(float(fq) - float(q)) > 1e-12 or fq == 0 or (2 * fq).denominator != 1:
        raise ValueError(f"q must be a nonzero half-integer, got {q!r}")
    return fq


def qplate_matrix(q) -> np.ndarray:
    """4x2 isometry from the polarization qubit into the order ``2q`` basis.

    ``a|R,0> + b|L,0>  ->  a|L,-2q> + b|R,2q>``.
    """
    m = int(2 * _check_q(q))
    basis = order_basis(m)
    u = np.zeros((4, 2), dtype=complex)
    u[basis.index(("L", -m)), 0] = 1.0
    u[basis.index(("R", m)), 1] = 1.0
    return u


def qplate_generate(pol: PureState, q) -> PureState:
    """Send a zero-OAM polarization qubit through a q-plate of charge ``q``."""
    if pol.basis.dim != 2 or any(oam != 0 for _, oam in pol.basis.labels):
        raise ValueError("q-plate generation expects a zero-OAM polarization qubit")
    vec = pol.vector[[pol.basis.index(("R", 0)), pol.basis.index(("L", 0))]]
    m = int(2 * _check_q(q))
    out = qplate_matrix(q) @ vec
    return PureState(order_basis(m), out)


def qplate_analyze(state: PureState, q) -> Tuple[Optional[PureState], float]:
    """Invert the q-plate on a photon and keep only the zero-OAM component.

    Returns the renormalized polarization qubit and the postselection
    probability. If nothing survives the filter the state is ``None``.
    """
    m = int(2 * _check_q(q))
    if state.basis.labels != order_basis(m).labels:
        raise ValueError(f"q={q} analyzes order {m}; state basis does not match")
    pol = qplate_matrix(q).conj().T @ state.vector
    prob = float(np.vdot(pol, pol).real)
    if prob < 1e-24:
        return None, 0.0
    return PureState(POL_BASIS, pol / np.sqrt(prob)), min(prob, 1.0)


# ---------------------------------------------------------------------------
# waveplates and polarizers


@dataclass(frozen=True, eq=False)
class OpticalElement:
    """A linear optical element acting on the polarization of a photon.

    ``pol_matrix`` is the 2x2 Jones matrix in the circular ``(R, L)`` basis;
    :meth:`on_photon` lifts it to the 4-dim mode space of a given order.
    """

    kind: str
    angle: float
    pol_matrix: np.ndarray

    def on_photon(self, m: int) -> np.ndarray:
        full = np.kron(self.pol_matrix, np.eye(2))
        out = np.empty_like(full)
        out[np.ix_(PRODUCT_TO_ORDER, PRODUCT_TO_ORDER)] = full
        return out

    def apply(self, state: PureState) -> PureState:
        if state.basis.dim == 2:
            vec = self.pol_matrix @ state.vector
        else:
            m = state.basis.labels[0][1]
            vec = self.on_photon(m) @ state.vector
        if self.kind == "polarizer":
            norm = np.linalg.norm(vec)
            if norm < 1e-12:
                raise ValueError("polarizer blocks this state completely")
            vec = vec / norm
        return PureState(state.basis, vec)

    @property
    def matrix(self) -> np.ndarray:
        return self.pol_matrix


# columns are e_R and e_L in Cartesian (x, y) components
_CIRC = np.array([[1, 1], [-1j, 1j]], dtype=complex) / SQ2


def _rot(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def cartesian_to_circular(jones_xy: np.ndarray) -> np.ndarray:
    return _CIRC.conj().T @ jones_xy @ _CIRC


def waveplate(kind: str, angle: float) -> OpticalElement:
    """Half- or quarter-wave plate with fast axis at ``angle`` from horizontal.

    In the circular basis HWP(angle) is ``[[0, e^{2i angle}], [e^{-2i angle}, 0]]``;
    QWP(angle) squares to HWP(angle).
    """
    if kind == "hwp":
        retard = np.diag([1.0, -1.0])
    elif kind == "qwp":
        retard = np.diag([1.0, 1j])
    else:
        raise ValueError("kind must be 'hwp' or 'qwp'")
    jones = _rot(angle) @ retard @ _rot(-angle)
    return OpticalElement(kind, float(angle), cartesian_to_circular(jones))


def polarizer(angle: float) -> OpticalElement:
    """Linear polarizer transmitting the direction at ``angle``."""
    ket = np.array([np.exp(1j * angle), np.exp(-1j * angle)]) / SQ2
    return OpticalElement("polarizer", float(angle), np.outer(ket, ket.conj()))


# ---------------------------------------------------------------------------
# Bell states


def pol_bell(which: str) -> np.ndarray:
    """Polarization Bell state on ``{R,L} (x) {R,L}`` using the H/V kets above."""
    which = normalize_bell_label(which)
    h, v = POL_KETS["H"], POL_KETS["V"]
    hv, vh = np.kron(h, v), np.kron(v, h)
    hh, vv = np.kron(h, h), np.kron(v, v)
    vec = {
        "psi-": hv - vh,
        "psi+": hv + vh,
        "phi-": hh - vv,
        "phi+": hh + vv,
    }[which]
    return vec / SQ2


def bell_vv(m1: int, m2: int, which: str = "psi-", pi_route: str = "qplate") -> PureState:
    """Two-photon VV Bell state built by q-plates acting on a polarization Bell pair.

    Each photon passes a q-plate with ``q = m/2``. For a negative order the
    default route uses a q-plate of negative charge; ``pi_route="hwp"``
    instead follows a ``q = |m|/2`` plate with a half-wave plate at 0, which
    gives the same pi-mode pair up to a sign on the pi- component.
    """
    m1, m2 = _check_order(m1), _check_order(m2)
    if pi_route not in ("qplate", "hwp"):
        raise ValueError("pi_route must be 'qplate' or 'hwp'")
    ops = []
    for m in (m1, m2):
        if m < 0 and pi_route == "hwp":
            ops.append(waveplate("hwp", 0.0).on_photon(m) @ qplate_matrix(Fraction(-m, 2)))
        else:
            ops.append(qplate_matrix(Fraction(m, 2)))
    vec = np.kron(ops[0], ops[1]) @ pol_bell(which)
    basis = order_basis(m1).tensor(order_basis(m2))
    return PureState(basis, fix_global_phase(vec))


def bell_logical(which: str) -> np.ndarray:
    """Two-qubit Bell vector in the computational basis."""
    which = normalize_bell_label(which)
    e = np.eye(2)
    v = {
        "psi-": np.kron(e[0], e[1]) - np.kron(e[1], e[0]),
        "psi+": np.kron(e[0], e[1]) + np.kron(e[1], e[0]),
        "phi-": np.kron(e[0], e[0]) - np.kron(e[1], e[1]),
        "phi+": np.kron(e[0], e[0]) + np.kron(e[1], e[1]),
    }[which]
    return v.astype(complex) / SQ2


def vv_subspace_isometry(m1: int, m2: int) -> np.ndarray:
    """16x4 isometry whose columns are ``|i>_1 |j>_2`` of the two VV qubits."""
    a0, a1 = vv_qubit(m1)
    b0, b1 = vv_qubit(m2)
    cols = [np.kron(a.vector, b.vector) for a in (a0, a1) for b in (b0, b1)]
    return np.stack(cols, axis=1)


# ---------------------------------------------------------------------------
# hybrid Poincare sphere


def hps_coords(state: PureState, atol: float = 1e-9) -> Tuple[float, float, float]:
    """Stokes-like coordinates on the hybrid Poincare sphere of order ``m``.

    The poles are ``|R,m>`` (s3 = +1) and ``|L,-m>`` (s3 = -1); the radial
    mode sits at ``(1, 0, 0)``. ``m`` is read from the first basis label, so
    pass a state built for the sign of ``m`` you mean.
    """
    basis = state.basis
    if basis.dim != 4:
        raise ValueError("expected a single-photon state")
    return _hps(state.vector, basis, basis.labels[0][1], atol)


def hps_coords_order(state: PureState, m: int, atol: float = 1e-9) -> Tuple[float, float, float]:
    """As :func:`hps_coords` for the sphere of signed order ``m``."""
    return _hps(state.vector, state.basis, _check_order(m), atol)


def _hps(vec, basis: ModeBasis, m: int, atol: float):
    i0, i1 = basis.index(("R", m)), basis.index(("L", -m))
    rest = np.delete(vec, [i0, i1])
    if np.linalg.norm(rest) > atol:
        raise ValueError("state has support outside the VV subspace")
    a, b = vec[i0], vec[i1]
    norm = abs(a) ** 2 + abs(b) ** 2
    cross = np.conj(a) * b
    return (float(2 * cross.real / norm), float(2 * cross.imag / norm),
            float((abs(a) ** 2 - abs(b) ** 2) / norm))


def werner_vv(m1: int, m2: int, p: float, which: str = "psi-") -> DensityMatrix:
    """Bell state mixed with white noise confined to the two VV qubits.

    ``p |B><B| + (1 - p) P/4`` where ``P`` projects onto the 4-dim VV (x) VV
    subspace, so the VV block is exactly a two-qubit Werner state.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("Werner weight must lie in [0, 1]")
    psi = bell_vv(m1, m2, which)
    iso = vv_subspace_isometry(m1, m2)
    mat = p * np.outer(psi.vector, psi.vector.conj()) + (1 - p) * (iso @ iso.conj().T) / 4
    return DensityMatrix(psi.basis, mat)
