"""Desk-scale synthetic scenarios and peak-finding helpers.

These mirror the chamber sweeps (360° roll, ±20° azimuth, X-band) at a
size that runs in seconds, and are shared by the acceptance tests and
the scripts in ``scripts/``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .forward import Scatterer, Scene, ThreeMaps, simulate_hologram
from .geometry import Acquisition, expand_sweep
from .kgrid import KGrid, suggest_grid
from .polarimetry import MAP_LABELS, ScatteringMatrix


@dataclass
class Scenario:
    scene: Scene
    acq: Acquisition
    kgrid: KGrid


def localization_scenario(dims=(64, 64, 128), interp: str = "nearest") -> Scenario:
    """Three scatterers with distinct matrices; θ 0:4:20°, φ 0:10:350°, 9-11 GHz (20% band)."""
    acq = expand_sweep("0:4:20", "0:10:350", "9e9:2.5e7:11e9", "HH")
    kgrid = suggest_grid(acq, image_extent_m=(1.0, 1.0, 2.0), dims=dims, interp=interp)
    scene = Scene([
        Scatterer((0.04, -0.02, 0.30), ScatteringMatrix(1.0, 0.3, 0.0)),
        Scatterer((-0.05, 0.03, -0.25), ScatteringMatrix(0.2j, 0.9, 0.1)),
        Scatterer((0.0, 0.06, 0.05), ScatteringMatrix(0.1, -0.1, 0.8 + 0.2j)),
    ])
    return Scenario(scene, acq, kgrid)


def cross_pol_scenario(component: str, dims=(32, 32, 64)) -> Scenario:
    """One scatterer at the origin carrying only the given matrix entry."""
    acq = expand_sweep("0:4:20", "0:10:350", "9e9:2.5e7:11e9", "HH")
    kgrid = suggest_grid(acq, image_extent_m=(1.0, 1.0, 2.0), dims=dims)
    entries = {label: (1.0 if label == component else 0.0) for label in MAP_LABELS}
    matrix = ScatteringMatrix(entries["xx"], entries["yy"], entries["xy"])
    return Scenario(Scene([Scatterer((0.0, 0.0, 0.0), matrix)]), acq, kgrid)


def scale_scenario() -> Scenario:
    """N = 128³ per map and M = 133 452, close to the glider configuration."""
    acq = expand_sweep("-20:4:20", "0:10:350", "8.2e9:1.25e7:12.4e9", "HH")
    kgrid = suggest_grid(acq, image_extent_m=(1.0, 1.0, 1.0), dims=(128, 128, 128))
    scene = Scene([
        Scatterer((0.0, 0.0, 0.25), ScatteringMatrix(1.0, 0.5, 0.0)),
        Scatterer((0.05, -0.05, -0.1), ScatteringMatrix(0.3, 1.0, 0.2)),
        Scatterer((-0.04, 0.02, 0.0), ScatteringMatrix(0.0, 0.0, 1.0)),
    ])
    return Scenario(scene, acq, kgrid)


def noisy_hologram(sc: Scenario, noise_fraction: float = 0.0, seed: int = 0):
    """Hologram with noise sigma given as a fraction of the clean peak magnitude."""
    clean = simulate_hologram(sc.scene, sc.acq)
    if noise_fraction <= 0:
        return clean
    sigma = noise_fraction * float(np.abs(clean.values).max())
    return simulate_hologram(sc.scene, sc.acq, noise_sigma=sigma, seed=seed)


def voxel_index(position, kgrid: KGrid) -> np.ndarray:
    """Index of the voxel whose center is nearest to ``position``."""
    return np.rint((np.asarray(position, dtype=float) - kgrid.origin) / kgrid.voxel_pitch).astype(int)


def global_peak(volume: np.ndarray) -> np.ndarray:
    return np.array(np.unravel_index(np.argmax(np.abs(volume)), volume.shape))


def local_peak(volume: np.ndarray, around, radius: int = 3) -> np.ndarray:
    """Index of the largest magnitude inside a cube of half-width ``radius``."""
    around = np.asarray(around, dtype=int)
    lo = np.maximum(around - radius, 0)
    hi = np.minimum(around + radius + 1, volume.shape)
    sub = np.abs(volume[lo[0]:hi[0], lo[1]:hi[1], lo[2]:hi[2]])
    return lo + np.array(np.unravel_index(np.argmax(sub), sub.shape))


def localization_offsets(maps: ThreeMaps, scene: Scene, kgrid: KGrid, min_share: float = 0.25) -> dict:
    """Chebyshev voxel offsets between reconstructed peaks and true positions.

    For each map: ``"global"`` is the distance from the map's global peak
    to the nearest true scatterer; ``"local"`` lists, for every scatterer
    whose entry in that map holds at least ``min_share`` of its largest
    entry, the distance from the local peak to its true voxel.
    """
    truth = [voxel_index(s.position, kgrid) for s in scene.scatterers]
    out = {}
    for k, (label, vol) in enumerate(maps.items()):
        g = global_peak(vol)
        glob = min(int(np.abs(g - t).max()) for t in truth)
        local = []
        for s, t in zip(scene.scatterers, truth):
            entries = np.abs(s.matrix.as_vector())
            if entries[k] >= min_share * entries.max():
                local.append(int(np.abs(local_peak(vol, t) - t).max()))
        out[label] = {"global": glob, "local": local}
    return out


def peak_energy_ratios(maps: ThreeMaps, position, kgrid: KGrid, radius: int = 1) -> dict:
    """|value|² of each map at the reconstructed peak, normalized by the largest.

    The peak is the voxel of greatest total energy within ``radius`` voxels
    of ``position``; all three maps are read at that same voxel.
    """
    t = voxel_index(position, kgrid)
    total = sum(np.abs(vol) ** 2 for _, vol in maps.items())
    peak = tuple(local_peak(total, t, radius))
    energy = {label: float(np.abs(vol[peak]) ** 2) for label, vol in maps.items()}
    top = max(energy.values())
    return {k: v / top for k, v in energy.items()}


def global_peak_ratios(maps: ThreeMaps) -> dict:
    """max |map|² of each map over the whole volume, normalized by the largest."""
    energy = {label: float(np.abs(vol).max() ** 2) for label, vol in maps.items()}
    top = max(energy.values())
    return {k: v / top for k, v in energy.items()}
