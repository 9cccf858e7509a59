"""Randomized self-checks: adjoint identity, dense oracle, weight cross-derivation.

Each check compares the fast path with an independent route (explicit
matrices, Jones-vector algebra) on random on-grid instances.
"""

from __future__ import annotations

import numpy as np

from .forward import Hologram, ThreeMaps, apply_adjoint, apply_forward, dense_matrix
from .geometry import Acquisition, jones_projection_array
from .inversion import mnls_dense, mnls_fast
from .kgrid import KGrid, on_grid_acquisition
from .polarimetry import Mode, closed_form_weights

_POLS = {Mode.HH: ("H", "H"), Mode.VV: ("V", "V"), Mode.HV: ("H", "V")}


def bilinear_weights(theta, phi, mode) -> np.ndarray:
    """Weights from composing antenna-frame Jones projections, shape (3, ...).

    s* = [r_x r_y] S [e_x e_y]^t expands to r_x e_x s_xx + r_y e_y s_yy
    + (r_x e_y + r_y e_x) s_xy.
    """
    emit, recv = _POLS[Mode.parse(mode)]
    ex, ey = jones_projection_array(theta, phi, emit)
    rx, ry = jones_projection_array(theta, phi, recv)
    return np.stack([rx * ex, ry * ey, rx * ey + ry * ex])


def weights_crossderivation(rng: np.random.Generator, n: int = 10_000, theta_max_deg: float = 80.0) -> float:
    """Max |closed form - bilinear composition| over random angles and all modes."""
    theta = np.radians(rng.uniform(0.0, theta_max_deg, n))
    phi = np.radians(rng.uniform(0.0, 360.0, n))
    worst = 0.0
    for mode in Mode:
        a = closed_form_weights(theta, phi, mode).as_array()
        b = bilinear_weights(theta, phi, mode)
        worst = max(worst, float(np.abs(a - b).max()))
    return worst


def random_ongrid_instance(
    rng: np.random.Generator,
    max_dim: int = 8,
    max_m: int = 128,
    dims=None,
    m: int | None = None,
    interp: str = "nearest",
) -> tuple[Acquisition, KGrid]:
    """A small grid plus an acquisition hitting distinct nodes with mixed modes."""
    if dims is None:
        dims = tuple(int(d) for d in rng.integers(2, max_dim + 1, size=3))
    delta_k = rng.uniform(3.0, 8.0, size=3)
    center = np.array([rng.uniform(-20, 20), rng.uniform(-20, 20), rng.uniform(300.0, 480.0)])
    kgrid = KGrid(dims, delta_k, center, interp)
    n = kgrid.size
    if m is None:
        m = int(rng.integers(1, min(max_m, n) + 1))
    m = min(m, n)
    flat = rng.choice(n, size=m, replace=False)
    nodes = np.stack(np.unravel_index(flat, dims), axis=-1)
    modes = rng.integers(0, 3, size=m)
    acq = on_grid_acquisition(kgrid, nodes, mode=modes, phi_on_axis=rng.uniform(0, 2 * np.pi, m))
    return acq, kgrid


def random_maps(rng: np.random.Generator, kgrid: KGrid) -> ThreeMaps:
    parts = [rng.standard_normal(kgrid.dims) + 1j * rng.standard_normal(kgrid.dims) for _ in range(3)]
    return ThreeMaps.for_grid(kgrid, *parts)


def random_values(rng: np.random.Generator, m: int) -> np.ndarray:
    return rng.standard_normal(m) + 1j * rng.standard_normal(m)


def adjoint_defect(rng: np.random.Generator, acq: Acquisition, kgrid: KGrid) -> float:
    """|<Ax, y> - <x, A†y>| / (‖Ax‖ ‖y‖) for random x, y."""
    x = random_maps(rng, kgrid)
    y = random_values(rng, len(acq))
    ax = apply_forward(x, acq, kgrid)
    aty = apply_adjoint(y, acq, kgrid)
    lhs = np.vdot(y, ax)
    rhs = np.vdot(aty.vec(), x.vec())
    scale = np.linalg.norm(ax) * np.linalg.norm(y)
    return float(abs(lhs - rhs) / scale) if scale > 0 else float(abs(lhs - rhs))


def adjoint_defects(rng: np.random.Generator, trials: int = 100, interp: str = "nearest") -> np.ndarray:
    out = []
    for _ in range(trials):
        acq, kgrid = random_ongrid_instance(rng, interp=interp)
        out.append(adjoint_defect(rng, acq, kgrid))
    return np.array(out)


def forward_equivalence_error(rng: np.random.Generator, acq: Acquisition, kgrid: KGrid) -> float:
    """max |A_fast x - A_dense x| / max |A_dense x|."""
    x = random_maps(rng, kgrid)
    dense = dense_matrix(acq, kgrid) @ x.vec()
    fast = apply_forward(x, acq, kgrid)
    return float(np.abs(fast - dense).max() / np.abs(dense).max())


def oracle_comparison(rng: np.random.Generator, acq: Acquisition, kgrid: KGrid) -> tuple[float, float]:
    """(relative map error fast vs dense, relative data misfit of the fast maps)."""
    holo = Hologram(random_values(rng, len(acq)), acq)
    fast = mnls_fast(holo, kgrid)
    dense = mnls_dense(holo, kgrid)
    err = np.linalg.norm(fast.maps.vec() - dense.vec()) / np.linalg.norm(dense.vec())
    return float(err), fast.data_fit_relative


def oracle_errors(rng: np.random.Generator, trials: int = 50, dims=None, m: int | None = None) -> np.ndarray:
    """Array of (map error, data fit) rows over random instances."""
    rows = []
    for _ in range(trials):
        acq, kgrid = random_ongrid_instance(rng, dims=dims, m=m)
        rows.append(oracle_comparison(rng, acq, kgrid))
    return np.array(rows)
