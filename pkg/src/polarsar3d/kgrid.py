"""Cartesian spatial-frequency grid, regridding and the unitary 3-D DFT.

A measurement with wavenumber k and direction k̂ samples the image spectrum
at ``q = -2 k k̂`` (rad/m). The grid holds nodes

    q[m] = center + (m - N//2) * delta_k        (per axis, m = 0..N-1)

and the conjugate image grid holds voxel centers

    r[n] = (n - N//2) * pitch,   pitch = 2π / (N * delta_k).

With these conventions ``exp(j q·r)`` factors into a modulation
``exp(j center·r)`` times a centered DFT kernel, so the forward model is
a phase ramp followed by an orthonormal FFT. Arrays are indexed
``[ix, iy, iz]``; flattened vectors (dense oracle, files) use x-fastest
order.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np
import scipy.fft

from .errors import CannotSuggestError, InfeasibleError, InvalidInputError, OutOfBandError
from .geometry import SPEED_OF_LIGHT, Acquisition
from .polarimetry import KAPPA_MIN, Mode, kappa

INTERP_MODES = ("nearest", "linear")

# tolerance (in cells) for samples sitting exactly on the outer nodes
_EDGE_TOL = 1e-9


def fft_workers() -> int:
    """Thread count for FFTs, capped by ``POLARSAR3D_THREADS`` (0 or unset: all cores)."""
    raw = os.environ.get("POLARSAR3D_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise InvalidInputError(f"POLARSAR3D_THREADS must be an integer, got {raw!r}") from None
    return -1 if n <= 0 else n


@dataclass(frozen=True, eq=False)
class KGrid:
    dims: tuple[int, int, int]
    delta_k: np.ndarray  # rad/m
    center: np.ndarray = field(default_factory=lambda: np.zeros(3))  # rad/m
    interp: str = "nearest"

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        delta_k = np.array(self.delta_k, dtype=float).reshape(3)
        center = np.array(self.center, dtype=float).reshape(3)
        if len(dims) != 3 or min(dims) < 2:
            raise InvalidInputError(f"grid dims must be three integers >= 2, got {self.dims}")
        if not np.all(delta_k > 0) or not np.all(np.isfinite(delta_k)):
            raise InvalidInputError(f"delta_k must be positive and finite, got {delta_k}")
        if not np.all(np.isfinite(center)):
            raise InvalidInputError(f"grid center must be finite, got {center}")
        if self.interp not in INTERP_MODES:
            raise InvalidInputError(f"interp must be one of {INTERP_MODES}, got {self.interp!r}")
        delta_k.flags.writeable = False
        center.flags.writeable = False
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "delta_k", delta_k)
        object.__setattr__(self, "center", center)

    def __eq__(self, other):
        if not isinstance(other, KGrid):
            return NotImplemented
        return (
            self.dims == other.dims
            and np.array_equal(self.delta_k, other.delta_k)
            and np.array_equal(self.center, other.center)
            and self.interp == other.interp
        )

    def with_interp(self, interp: str) -> "KGrid":
        return KGrid(self.dims, self.delta_k, self.center, interp)

    @property
    def size(self) -> int:
        return int(np.prod(self.dims))

    @property
    def half(self) -> np.ndarray:
        return np.array(self.dims) // 2

    @property
    def voxel_pitch(self) -> np.ndarray:
        return 2.0 * np.pi / (np.array(self.dims) * self.delta_k)

    @property
    def origin(self) -> np.ndarray:
        """Position of voxel (0, 0, 0); voxel N//2 sits at the target origin."""
        return -self.half * self.voxel_pitch

    def voxel_axes(self) -> list[np.ndarray]:
        p = self.voxel_pitch
        return [(np.arange(n) - n // 2) * p[a] for a, n in enumerate(self.dims)]

    def node_axes(self) -> list[np.ndarray]:
        return [self.center[a] + (np.arange(n) - n // 2) * self.delta_k[a] for a, n in enumerate(self.dims)]

    def voxel_centers(self) -> np.ndarray:
        """All voxel centers, shape (N, 3), x-fastest order."""
        gx, gy, gz = np.meshgrid(*self.voxel_axes(), indexing="ij")
        return np.stack([g.ravel(order="F") for g in (gx, gy, gz)], axis=-1)

    def node_coords(self, nodes) -> np.ndarray:
        nodes = np.asarray(nodes, dtype=float).reshape(-1, 3)
        return self.center + (nodes - self.half) * self.delta_k

    def modulation(self) -> np.ndarray:
        """exp(j center·r) over the voxel grid."""
        ax = self.voxel_axes()
        mx, my, mz = (np.exp(1j * self.center[a] * ax[a]) for a in range(3))
        return mx[:, None, None] * my[None, :, None] * mz[None, None, :]

    def to_json_dict(self) -> dict:
        return {
            "dims": list(self.dims),
            "delta_k": self.delta_k.tolist(),
            "center": self.center.tolist(),
            "interp": self.interp,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "KGrid":
        try:
            return cls(tuple(d["dims"]), d["delta_k"], d.get("center", [0.0, 0.0, 0.0]), d.get("interp", "nearest"))
        except KeyError as exc:
            raise InvalidInputError(f"grid is missing field {exc}") from None
        except TypeError as exc:
            raise InvalidInputError(f"malformed grid: {exc}") from None


@dataclass
class GriddedSpectrum:
    values: np.ndarray  # complex, dims
    hit_weight: np.ndarray  # real, dims


def sample_locations(acq: Acquisition) -> np.ndarray:
    """Spatial frequencies q_i = -2 k_i k̂_i, shape (M, 3)."""
    return -2.0 * acq.wavenumber[:, None] * acq.directions()


def sample_location(descriptor) -> np.ndarray:
    theta, phi, freq = float(descriptor[0]), float(descriptor[1]), float(descriptor[2])
    if not freq > 0:
        raise InvalidInputError(f"frequency must be positive, got {freq}")
    k = 2.0 * np.pi * freq / SPEED_OF_LIGHT
    st = math.sin(theta)
    return 2.0 * k * np.array([st * math.cos(phi), st * math.sin(phi), math.cos(theta)])


def fractional_index(q: np.ndarray, kgrid: KGrid) -> np.ndarray:
    return (np.asarray(q, dtype=float) - kgrid.center) / kgrid.delta_k + kgrid.half


def _offender_message(bad: np.ndarray, q: np.ndarray) -> str:
    shown = ", ".join(f"#{i} q={np.array2string(q[i], precision=4)}" for i in bad[:5])
    more = f" (+{bad.size - 5} more)" if bad.size > 5 else ""
    return f"{bad.size} measurement(s) outside the k-space grid: {shown}{more}"


def stencil(acq: Acquisition, kgrid: KGrid, interp: str | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Flat cell indices and interpolation weights per measurement.

    Returns ``(idx, wt)`` of shape (M, 1) for nearest and (M, 8) for
    trilinear; ``idx`` addresses ``array.ravel()`` of a dims-shaped array.
    """
    interp = interp or kgrid.interp
    if interp not in INTERP_MODES:
        raise InvalidInputError(f"interp must be one of {INTERP_MODES}, got {interp!r}")
    q = sample_locations(acq)
    u = fractional_index(q, kgrid)
    dims = np.array(kgrid.dims)
    if interp == "nearest":
        node = np.floor(u + 0.5).astype(np.int64)
        bad = np.flatnonzero(np.any((node < 0) | (node >= dims), axis=1))
        if bad.size:
            raise OutOfBandError(_offender_message(bad, q))
        idx = np.ravel_multi_index(node.T, kgrid.dims)[:, None]
        return idx, np.ones((len(acq), 1))

    bad = np.flatnonzero(np.any((u < -_EDGE_TOL) | (u > dims - 1 + _EDGE_TOL), axis=1))
    if bad.size:
        raise OutOfBandError(_offender_message(bad, q))
    i0 = np.clip(np.floor(u).astype(np.int64), 0, dims - 2)
    frac = np.clip(u - i0, 0.0, 1.0)
    idx = np.empty((len(acq), 8), dtype=np.int64)
    wt = np.empty((len(acq), 8))
    for c in range(8):
        off = np.array([(c >> 2) & 1, (c >> 1) & 1, c & 1])
        idx[:, c] = np.ravel_multi_index((i0 + off).T, kgrid.dims)
        wt[:, c] = np.prod(np.where(off == 1, frac, 1.0 - frac), axis=1)
    return idx, wt


def _accumulate(idx: np.ndarray, wt: np.ndarray, values: np.ndarray, size: int) -> tuple[np.ndarray, np.ndarray]:
    contrib = wt * values[:, None]
    flat = idx.ravel()
    re = np.bincount(flat, weights=contrib.real.ravel(), minlength=size)
    im = np.bincount(flat, weights=contrib.imag.ravel(), minlength=size)
    hits = np.bincount(flat, weights=wt.ravel(), minlength=size)
    return re + 1j * im, hits


def _check_values(values, m: int) -> np.ndarray:
    values = np.asarray(values, dtype=complex).ravel()
    if values.size != m:
        raise InvalidInputError(f"expected {m} values, got {values.size}")
    if not np.all(np.isfinite(values)):
        raise InvalidInputError("measurement values contain NaN or infinity")
    return values


def splat(values, acq: Acquisition, kgrid: KGrid, interp: str | None = None) -> np.ndarray:
    """Raw accumulation onto the grid: the exact adjoint of :func:`extract`."""
    values = _check_values(values, len(acq))
    idx, wt = stencil(acq, kgrid, interp)
    acc, _ = _accumulate(idx, wt, values, kgrid.size)
    return acc.reshape(kgrid.dims)


def regrid(values, weights, acq: Acquisition, kgrid: KGrid, interp: str | None = None) -> GriddedSpectrum:
    """Weighted measurements splatted onto the grid, averaged per cell.

    Each cell with a positive accumulated interpolation weight holds the
    weighted mean of its contributions; unobserved cells stay zero.
    """
    values = _check_values(values, len(acq))
    if weights is not None:
        weights = np.asarray(weights, dtype=float).ravel()
        if weights.size != values.size or not np.all(np.isfinite(weights)):
            raise InvalidInputError("per-measurement weights must be finite and match the values")
        values = values * weights
    idx, wt = stencil(acq, kgrid, interp)
    acc, hits = _accumulate(idx, wt, values, kgrid.size)
    out = np.zeros_like(acc)
    seen = hits > 0
    out[seen] = acc[seen] / hits[seen]
    return GriddedSpectrum(out.reshape(kgrid.dims), hits.reshape(kgrid.dims))


def extract(spectrum, acq: Acquisition, kgrid: KGrid, interp: str | None = None) -> np.ndarray:
    """Interpolate gridded spectrum values at each measurement's location."""
    values = spectrum.values if isinstance(spectrum, GriddedSpectrum) else np.asarray(spectrum)
    if values.shape != kgrid.dims:
        raise InvalidInputError(f"spectrum shape {values.shape} does not match grid {kgrid.dims}")
    idx, wt = stencil(acq, kgrid, interp)
    return np.sum(values.ravel()[idx] * wt, axis=1)


def to_kspace(image: np.ndarray, kgrid: KGrid) -> np.ndarray:
    """Unitary map from an image volume to its spectrum on the grid nodes."""
    x = np.asarray(image, dtype=complex) * kgrid.modulation()
    y = scipy.fft.ifftn(scipy.fft.ifftshift(x), norm="ortho", workers=fft_workers())
    return scipy.fft.fftshift(y)


def to_image(spectrum: np.ndarray, kgrid: KGrid) -> np.ndarray:
    """Adjoint (and inverse) of :func:`to_kspace`."""
    y = scipy.fft.fftn(scipy.fft.ifftshift(np.asarray(spectrum, dtype=complex)), norm="ortho", workers=fft_workers())
    return scipy.fft.fftshift(y) * np.conj(kgrid.modulation())


def _smooth_size(n: int) -> int:
    n = max(2, int(n))
    while True:
        m = n
        for p in (2, 3, 5):
            while m % p == 0:
                m //= p
        if m == 1:
            return n
        n += 1


def suggest_grid(acq: Acquisition, image_extent_m, dims=None, interp: str = "nearest") -> KGrid:
    """Derive a k-space grid covering every sample of ``acq``.

    Without ``dims`` the spectral pitch is ``2π / image_extent_m`` (the
    image field of view equals the requested extent) and dims are the
    smallest 2-3-5-smooth sizes that cover the sample bounding box. With
    explicit ``dims`` (honored verbatim), ``delta_k`` is instead chosen to
    fit the samples into those dims, falling back to the extent on axes
    where the samples have no spread. The center is the centroid of the
    sample locations.
    """
    if len(acq) == 0:
        raise CannotSuggestError("cannot suggest a grid for an empty acquisition")
    if np.unique(acq.freq).size < 2 and np.unique(np.stack([acq.theta, acq.phi]), axis=1).shape[1] < 2:
        raise CannotSuggestError("acquisition has a single frequency and a single look angle")
    extent = np.broadcast_to(np.asarray(image_extent_m, dtype=float), (3,))
    if not np.all(extent > 0):
        raise InvalidInputError(f"image extent must be positive, got {extent}")
    q = sample_locations(acq)
    center = q.mean(axis=0)
    lo = center - q.min(axis=0)
    hi = q.max(axis=0) - center
    if dims is None:
        dk = 2.0 * np.pi / extent
        need = np.ceil(np.maximum(lo, hi) / dk - 1e-12).astype(int)
        out_dims = tuple(_smooth_size(2 * int(n) + 2) for n in need)
    else:
        out_dims = tuple(int(d) for d in dims)
        if len(out_dims) != 3 or min(out_dims) < 2:
            raise InvalidInputError(f"grid dims must be three integers >= 2, got {dims}")
        dk = np.empty(3)
        for a, n in enumerate(out_dims):
            # half a cell of margin on each side when there is room for it
            rooms = [(n // 2, lo[a]), (n - 1 - n // 2, hi[a])]
            need = 0.0
            for room, spread in rooms:
                if spread <= 1e-12 * max(1.0, abs(center[a])):
                    continue
                if room == 0:
                    raise CannotSuggestError(f"dims {out_dims} are too small to hold the samples")
                need = max(need, spread / (room - 0.5))
            dk[a] = need if need > 0 else 2.0 * np.pi / extent[a]
    return KGrid(out_dims, dk, center, interp)


def on_grid_acquisition(kgrid: KGrid, nodes, mode="HH", phi_on_axis=0.0, allow_duplicates: bool = False) -> Acquisition:
    """Synthesize descriptors whose sample locations land exactly on grid nodes.

    ``nodes`` is an (K, 3) array of integer node indices. A node q is
    reachable by ``θ = arccos(q_z/|q|)``, ``φ = atan2(q_y, q_x)`` and
    ``f = c|q| / (4π)`` provided q_z > 0 and the antenna frame is defined.
    On the +z axis φ is free and taken from ``phi_on_axis`` (radians,
    scalar or per node). ``mode`` is one mode or one per node.
    """
    nodes = np.asarray(nodes, dtype=np.int64).reshape(-1, 3)
    if nodes.shape[0] == 0:
        return Acquisition.empty()
    dims = np.array(kgrid.dims)
    if np.any((nodes < 0) | (nodes >= dims)):
        raise InvalidInputError("node indices outside the grid")
    if not allow_duplicates and np.unique(nodes, axis=0).shape[0] != nodes.shape[0]:
        raise InvalidInputError("duplicate nodes requested; pass allow_duplicates=True to keep them")
    q = kgrid.node_coords(nodes)
    norm = np.linalg.norm(q, axis=1)
    bad = np.flatnonzero(~(q[:, 2] > 0) | ~(norm > 0))
    if bad.size:
        raise InfeasibleError(
            f"node {nodes[bad[0]].tolist()} (q={q[bad[0]].tolist()}) is unreachable: "
            "monostatic samples need q_z > 0"
        )
    theta = np.arccos(np.clip(q[:, 2] / norm, -1.0, 1.0))
    radial = np.hypot(q[:, 0], q[:, 1])
    on_axis = radial <= 1e-12 * norm
    phi_free = np.broadcast_to(np.asarray(phi_on_axis, dtype=float), theta.shape)
    phi = np.where(on_axis, phi_free, np.mod(np.arctan2(q[:, 1], q[:, 0]), 2.0 * np.pi))
    theta = np.where(on_axis, 0.0, theta)
    k = kappa(theta, phi)
    bad = np.flatnonzero(~(np.atleast_1d(k) > KAPPA_MIN))
    if bad.size:
        raise InfeasibleError(f"node {nodes[bad[0]].tolist()} needs a singular antenna frame")
    freq = SPEED_OF_LIGHT * norm / (4.0 * np.pi)
    if isinstance(mode, (str, Mode, int, np.integer)):
        modes = np.full(theta.shape, int(Mode.parse(mode)), dtype=np.int8)
    else:
        modes = np.array([int(Mode.parse(m)) for m in mode], dtype=np.int8)
    return Acquisition(theta, phi, freq, modes)
