"""Transverse field patterns of single-photon VV modes.

Each basis ket ``|pol, l>`` contributes ``A_l(r) exp(i l phi) e_pol`` with the
Laguerre-Gauss (p = 0) envelope ``A_l(r) = (r sqrt(2)/w)^|l| exp(-r^2/w^2)``.
Jones vectors are stored in Cartesian ``(Ex, Ey)`` components.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
from scipy.ndimage import map_coordinates

from .qcore import PureState

E_CIRC = {
    "R": np.array([1, -1j]) / np.sqrt(2),
    "L": np.array([1, 1j]) / np.sqrt(2),
}

ANGULAR_BINS = 720
PEAK_FRACTION = 0.5
UNIFORM_VARIATION = 0.01


@dataclass(frozen=True, eq=False)
class FieldGrid:
    size: int
    extent: float
    samples: np.ndarray  # (size, size, 2) complex, rows follow y

    @property
    def coords(self) -> np.ndarray:
        return pixel_coords(self.size, self.extent)

    @property
    def intensity(self) -> np.ndarray:
        return np.sum(np.abs(self.samples) ** 2, axis=-1)

    @property
    def power(self) -> float:
        step = 2 * self.extent / self.size
        return float(self.intensity.sum() * step * step)


@dataclass(frozen=True, eq=False)
class StokesMap:
    S0: np.ndarray
    S1: np.ndarray
    S2: np.ndarray
    S3: np.ndarray

    def orientation(self) -> np.ndarray:
        """Angle of the polarization ellipse's major axis, in ``(-pi/2, pi/2]``."""
        return 0.5 * np.arctan2(self.S2, self.S1)

    def normalized(self, floor: float = 1e-12):
        """``(S1, S2, S3) / S0`` with zero where ``S0 <= floor``."""
        safe = np.where(self.S0 > floor, self.S0, 1.0)
        mask = self.S0 > floor
        return tuple(np.where(mask, s / safe, 0.0) for s in (self.S1, self.S2, self.S3))

    def planes(self):
        return {"S0": self.S0, "S1": self.S1, "S2": self.S2, "S3": self.S3}


@dataclass(frozen=True)
class PetalAnalysis:
    count: int
    uniform: bool
    radius_px: float
    angles: np.ndarray
    profile: np.ndarray


def pixel_coords(size: int, extent: float) -> np.ndarray:
    """Pixel-center coordinates along one axis, spanning ``[-extent, extent]``."""
    return (np.arange(size) + 0.5) * (2 * extent / size) - extent


def envelope(r, ell: int, waist: float = 1.0):
    return (r * np.sqrt(2) / waist) ** abs(ell) * np.exp(-(r ** 2) / waist ** 2)


def field_at(state: PureState, x, y, waist: float = 1.0) -> np.ndarray:
    """Cartesian Jones vector of ``state`` at points ``(x, y)``; shape ``(..., 2)``."""
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    r, phi = np.hypot(x, y), np.arctan2(y, x)
    out = np.zeros(x.shape + (2,), dtype=complex)
    for (pol, ell), amp in zip(state.basis.labels, state.vector):
        if abs(amp) < 1e-15:
            continue
        if ell == 0:
            raise ValueError("transverse_field renders VV orders only (OAM 0 content found)")
        out += (amp * envelope(r, ell, waist) * np.exp(1j * ell * phi))[..., None] * E_CIRC[pol]
    return out


def transverse_field(state: PureState, size: int = 256, extent: float = 3.0,
                     waist: float = 1.0) -> FieldGrid:
    if size < 64:
        raise ValueError("grid size must be at least 64")
    if extent <= 0:
        raise ValueError("extent must be positive")
    if state.basis.dim != 4 or not all(len(lab) == 2 for lab in state.basis.labels):
        raise ValueError("expected a single-photon mode state")
    c = pixel_coords(size, extent)
    xx, yy = np.meshgrid(c, c)
    return FieldGrid(size, float(extent), field_at(state, xx, yy, waist))


def stokes_map(field: FieldGrid) -> StokesMap:
    ex, ey = field.samples[..., 0], field.samples[..., 1]
    cross = np.conj(ex) * ey
    return StokesMap(
        S0=np.abs(ex) ** 2 + np.abs(ey) ** 2,
        S1=np.abs(ex) ** 2 - np.abs(ey) ** 2,
        S2=2 * cross.real,
        S3=-2 * cross.imag,  # +1 for e_R
    )


def polarizer_intensity(field: FieldGrid, angle: float) -> np.ndarray:
    """Intensity behind a linear polarizer at ``angle`` from the x axis."""
    amp = np.cos(angle) * field.samples[..., 0] + np.sin(angle) * field.samples[..., 1]
    return np.abs(amp) ** 2


def ring_profile(intensity: np.ndarray) -> np.ndarray:
    """Mean intensity in one-pixel-wide rings around the grid center."""
    n = intensity.shape[0]
    c = (n - 1) / 2
    yy, xx = np.indices(intensity.shape)
    rbin = np.rint(np.hypot(xx - c, yy - c)).astype(int)
    sums = np.bincount(rbin.ravel(), weights=intensity.ravel())
    cnt = np.bincount(rbin.ravel())
    return sums / np.maximum(cnt, 1)


def angular_profile(intensity: np.ndarray, radius_px: float, bins: int = ANGULAR_BINS):
    n = intensity.shape[0]
    c = (n - 1) / 2
    angles = np.arange(bins) * (2 * np.pi / bins)
    rows = c + radius_px * np.sin(angles)
    cols = c + radius_px * np.cos(angles)
    return angles, map_coordinates(intensity, [rows, cols], order=1, mode="nearest")


def petal_analysis(intensity: np.ndarray) -> PetalAnalysis:
    """Count petals on the ring of maximal mean intensity.

    Local maxima of the angular profile are counted if they exceed half of
    the profile maximum; maxima inside one contiguous above-threshold arc
    count once. A profile varying by less than 1% of its mean is reported
    as uniform with zero petals.
    """
    intensity = np.asarray(intensity, dtype=float)
    if intensity.sum() <= 0:
        raise ValueError("intensity image is empty")
    rings = ring_profile(intensity)
    rings[0] = 0.0  # the center pixel ring is not a ring
    radius = float(np.argmax(rings))
    angles, prof = angular_profile(intensity, radius)
    mean = prof.mean()
    if mean <= 0 or (prof.max() - prof.min()) < UNIFORM_VARIATION * mean:
        return PetalAnalysis(0, True, radius, angles, prof)
    above = prof > PEAK_FRACTION * prof.max()
    # rising edges on the circle = number of above-threshold arcs
    count = int(np.count_nonzero(above & ~np.roll(above, 1)))
    return PetalAnalysis(count, False, radius, angles, prof)


def count_petals(intensity: np.ndarray) -> int:
    return petal_analysis(intensity).count


# ---------------------------------------------------------------------------
# output


def to_gray8(intensity: np.ndarray) -> np.ndarray:
    peak = float(np.max(intensity))
    scaled = intensity / peak if peak > 0 else np.zeros_like(intensity)
    return np.rint(np.clip(scaled, 0, 1) * 255).astype(np.uint8)


def write_ppm(path: Union[str, Path], intensity: np.ndarray) -> None:
    """Binary PPM (P6, 8-bit gray in RGB), scaled to max = 1; row 0 is +y."""
    gray = to_gray8(np.flipud(intensity))
    h, w = gray.shape
    rgb = np.repeat(gray[..., None], 3, axis=-1)
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(rgb.tobytes())


def read_ppm(path: Union[str, Path]) -> np.ndarray:
    data = Path(path).read_bytes()
    parts = data.split(maxsplit=4)
    if parts[0] != b"P6":
        raise ValueError("not a binary PPM")
    w, h = int(parts[1]), int(parts[2])
    return np.frombuffer(parts[4], dtype=np.uint8).reshape(h, w, 3)


def write_profile_csv(path: Union[str, Path], analysis: PetalAnalysis) -> None:
    lines = ["angle_rad,intensity"]
    lines += [f"{a:.9f},{v:.9e}" for a, v in zip(analysis.angles, analysis.profile)]
    Path(path).write_text("\n".join(lines) + "\n")


def write_grid_csv(path: Union[str, Path], grid: np.ndarray) -> None:
    np.savetxt(path, grid, delimiter=",", fmt="%.9e")
