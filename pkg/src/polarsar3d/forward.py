"""Hologram simulation and the discretized forward operator.

Two routes compute the same physics:

* :func:`simulate_hologram` evaluates the point-scatterer sum exactly at
  arbitrary positions (no voxel snapping), adding optional noise;
* :func:`apply_forward` / :func:`apply_adjoint` act on three voxel maps
  through a unitary FFT and the k-space grid, never building a matrix;
  :func:`dense_matrix` spells the same operator out entry by entry as an
  oracle for small problems.

Map values are coefficients of the *unitary* DFT: a voxel holding ``v``
produces the same hologram as a point scatterer of amplitude
``v / sqrt(N)`` at the voxel center (N voxels per map). This keeps
``A A†`` equal to ``diag(w_xx² + w_yy² + w_xy²)`` on distinct on-grid
samples.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, SizeCapError
from .geometry import Acquisition
from .kgrid import KGrid, sample_locations, splat, stencil, to_image, to_kspace
from .polarimetry import MAP_LABELS, ScatteringMatrix, closed_form_weights

#: Default cap on the number of entries of any dense oracle matrix.
DENSE_CAP = 2**24


@dataclass(frozen=True)
class Scatterer:
    position: tuple[float, float, float]  # m
    matrix: ScatteringMatrix

    def __post_init__(self):
        pos = tuple(float(v) for v in self.position)
        if len(pos) != 3 or not all(np.isfinite(pos)):
            raise InvalidInputError(f"scatterer position must be 3 finite numbers, got {self.position}")
        object.__setattr__(self, "position", pos)


@dataclass
class Scene:
    scatterers: list[Scatterer] = field(default_factory=list)

    def positions(self) -> np.ndarray:
        return np.array([s.position for s in self.scatterers], dtype=float).reshape(-1, 3)

    def matrices(self) -> np.ndarray:
        """Scattering entries, shape (n, 3) in (xx, yy, xy) order."""
        return np.array([s.matrix.as_vector() for s in self.scatterers], dtype=complex).reshape(-1, 3)

    def to_json_dict(self) -> dict:
        def pair(z):
            return [z.real, z.imag]

        return {
            "scatterers": [
                {"pos_m": list(s.position), "sxx": pair(s.matrix.s_xx), "syy": pair(s.matrix.s_yy), "sxy": pair(s.matrix.s_xy)}
                for s in self.scatterers
            ]
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "Scene":
        def cplx(v):
            if v is None:
                return 0j
            if isinstance(v, (int, float)):
                return complex(v)
            re, im = v
            return complex(float(re), float(im))

        try:
            items = d["scatterers"]
            return cls([
                Scatterer(tuple(it["pos_m"]), ScatteringMatrix(cplx(it.get("sxx")), cplx(it.get("syy")), cplx(it.get("sxy"))))
                for it in items
            ])
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInputError(f"malformed scene: {exc}") from None


@dataclass
class Hologram:
    values: np.ndarray  # complex, length M
    acquisition: Acquisition

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex).ravel()
        if self.values.size != len(self.acquisition):
            raise InvalidInputError(
                f"hologram has {self.values.size} values for {len(self.acquisition)} descriptors"
            )


@dataclass
class ThreeMaps:
    """Co-registered complex volumes s_xx, s_yy, s_xy on one voxel grid."""

    xx: np.ndarray
    yy: np.ndarray
    xy: np.ndarray
    pitch: np.ndarray  # m
    origin: np.ndarray  # m, center of voxel (0, 0, 0)

    def __post_init__(self):
        self.xx, self.yy, self.xy = (np.asarray(m, dtype=complex) for m in (self.xx, self.yy, self.xy))
        if not (self.xx.shape == self.yy.shape == self.xy.shape) or self.xx.ndim != 3:
            raise InvalidInputError(
                f"the three maps must be 3-D with equal shapes, got {self.xx.shape}, {self.yy.shape}, {self.xy.shape}"
            )
        self.pitch = np.asarray(self.pitch, dtype=float).reshape(3)
        self.origin = np.asarray(self.origin, dtype=float).reshape(3)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.xx.shape

    def __getitem__(self, label: str) -> np.ndarray:
        if label not in MAP_LABELS:
            raise KeyError(label)
        return getattr(self, label)

    def items(self):
        return [(k, self[k]) for k in MAP_LABELS]

    @classmethod
    def zeros(cls, kgrid: KGrid) -> "ThreeMaps":
        z = [np.zeros(kgrid.dims, dtype=complex) for _ in MAP_LABELS]
        return cls(*z, kgrid.voxel_pitch, kgrid.origin)

    @classmethod
    def for_grid(cls, kgrid: KGrid, xx, yy, xy) -> "ThreeMaps":
        return cls(xx, yy, xy, kgrid.voxel_pitch, kgrid.origin)

    def vec(self) -> np.ndarray:
        """Stacked [xx; yy; xy], each x-fastest."""
        return np.concatenate([m.ravel(order="F") for m in (self.xx, self.yy, self.xy)])

    @classmethod
    def from_vec(cls, v, kgrid: KGrid) -> "ThreeMaps":
        v = np.asarray(v, dtype=complex).ravel()
        n = kgrid.size
        if v.size != 3 * n:
            raise InvalidInputError(f"expected {3 * n} entries, got {v.size}")
        parts = [v[i * n:(i + 1) * n].reshape(kgrid.dims, order="F") for i in range(3)]
        return cls.for_grid(kgrid, *parts)

    def norm(self) -> float:
        return float(np.sqrt(sum(np.vdot(m, m).real for m in (self.xx, self.yy, self.xy))))

    def __add__(self, other: "ThreeMaps") -> "ThreeMaps":
        return ThreeMaps(self.xx + other.xx, self.yy + other.yy, self.xy + other.xy, self.pitch, self.origin)

    def __mul__(self, a: complex) -> "ThreeMaps":
        return ThreeMaps(a * self.xx, a * self.yy, a * self.xy, self.pitch, self.origin)

    __rmul__ = __mul__


def acquisition_weights(acq: Acquisition) -> np.ndarray:
    """Forward weights for every descriptor, shape (3, M) in (xx, yy, xy) order."""
    if len(acq) == 0:
        return np.zeros((3, 0))
    return closed_form_weights(acq.theta, acq.phi, acq.modes).as_array()


def _phase(q: np.ndarray, positions: np.ndarray) -> np.ndarray:
    # exp(-2j k_i k̂_i · r_n) == exp(j q_i · r_n)
    return np.exp(1j * (q @ positions.T))


def simulate_hologram(scene: Scene, acq: Acquisition, noise_sigma: float = 0.0, seed: int = 0, chunk: int = 4096) -> Hologram:
    """Extended multiple-scatterer model with circular complex Gaussian noise.

    ``noise_sigma`` is the total standard deviation of each noise sample;
    real and imaginary parts each get ``noise_sigma / sqrt(2)``. The noise
    for a given seed is a fixed function of the measurement index.
    """
    if not noise_sigma >= 0:
        raise InvalidInputError(f"noise_sigma must be >= 0, got {noise_sigma}")
    m = len(acq)
    values = np.zeros(m, dtype=complex)
    if scene.scatterers and m:
        w = acquisition_weights(acq)
        q = sample_locations(acq)
        pos = scene.positions()
        coeffs = scene.matrices() @ w  # (n, M): s*_n(i)
        for start in range(0, pos.shape[0], chunk):
            sl = slice(start, start + chunk)
            values += np.einsum("im,mi->i", _phase(q, pos[sl]), coeffs[sl])
    if noise_sigma > 0 and m:
        rng = np.random.default_rng(seed)
        noise = rng.standard_normal((m, 2)) * (noise_sigma / np.sqrt(2.0))
        values = values + (noise[:, 0] + 1j * noise[:, 1])
    return Hologram(values, acq)


def classical_ms_hologram(scatterers, acq: Acquisition) -> Hologram:
    """Polarization-blind model: scalar amplitudes, 𝒮_i = Σ s_n exp(j q_i·r_n)."""
    scatterers = list(scatterers)
    values = np.zeros(len(acq), dtype=complex)
    if scatterers and len(acq):
        pos = np.array([np.asarray(p, dtype=float) for p, _ in scatterers]).reshape(-1, 3)
        amp = np.array([complex(s) for _, s in scatterers])
        values = _phase(sample_locations(acq), pos) @ amp
    return Hologram(values, acq)


def _check_maps(maps: ThreeMaps, kgrid: KGrid) -> None:
    if maps.shape != kgrid.dims:
        raise InvalidInputError(f"maps of shape {maps.shape} do not match grid dims {kgrid.dims}")


def apply_forward(maps: ThreeMaps, acq: Acquisition, kgrid: KGrid) -> np.ndarray:
    """A·s: unitary FFT of each map, interpolation at the samples, weighting, sum."""
    _check_maps(maps, kgrid)
    w = acquisition_weights(acq)
    out = np.zeros(len(acq), dtype=complex)
    if len(acq) == 0:
        return out
    idx, wt = stencil(acq, kgrid)
    for k, (_, m) in enumerate(maps.items()):
        if w[k].any() and m.any():
            spec = to_kspace(m, kgrid).ravel()
            out += w[k] * np.sum(spec[idx] * wt, axis=1)
    return out


def apply_adjoint(values, acq: Acquisition, kgrid: KGrid) -> ThreeMaps:
    """A†·y: weight, splat onto the grid (exact transpose of interpolation), inverse FFT."""
    values = np.asarray(values, dtype=complex).ravel()
    if values.size != len(acq):
        raise InvalidInputError(f"expected {len(acq)} values, got {values.size}")
    w = acquisition_weights(acq)
    maps = []
    for k in range(3):
        if len(acq) == 0 or not (w[k] * values).any():
            maps.append(np.zeros(kgrid.dims, dtype=complex))
            continue
        maps.append(to_image(splat(w[k] * values, acq, kgrid), kgrid))
    return ThreeMaps.for_grid(kgrid, *maps)


def dense_matrix(acq: Acquisition, kgrid: KGrid, cap: int = DENSE_CAP) -> np.ndarray:
    """Explicit M x 3N forward matrix built from exact sample locations.

    Entry (i, (k, n)) = w_k(i) exp(-2j k_i k̂_i·r_n) / sqrt(N) with r_n the
    n-th voxel center (x-fastest); column blocks are xx, yy, xy. Oracle
    only: refuses to allocate more than ``cap`` entries.
    """
    m, n = len(acq), kgrid.size
    if m * 3 * n > cap:
        raise SizeCapError(f"dense matrix of {m} x {3 * n} entries exceeds the cap of {cap}")
    w = acquisition_weights(acq)
    kernel = _phase(sample_locations(acq), kgrid.voxel_centers()) / np.sqrt(n)
    return np.hstack([w[k][:, None] * kernel for k in range(3)])
