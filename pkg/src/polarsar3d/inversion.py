"""Minimum-norm least-squares reconstruction of the three polarimetric maps.

The fast path never forms A. Because each column block of A is a
weighted sampling of one unitary FFT, ``A A†`` is diagonal on distinct
grid samples with entries ``w_xx² + w_yy² + w_xy²``. The MNLS solution
``A† (A A†)⁻¹ 𝒮`` then splits into three independent pipelines:

1. scale every measurement by π_k = w_k / Σ w², for k in (xx, yy, xy);
2. regrid each weighted hologram (zero elsewhere) and inverse FFT.

:func:`mnls_dense` and :func:`constrained_min_norm` are the explicit
linear-algebra counterparts used as oracles.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import ConditioningError, IdentityViolatedError, InvalidInputError
from .forward import DENSE_CAP, Hologram, ThreeMaps, acquisition_weights, apply_forward, dense_matrix
from .geometry import Acquisition
from .kgrid import KGrid, fractional_index, regrid, sample_locations, to_image

#: Dense solves refuse AA† with a larger 2-norm condition number.
CONDITION_LIMIT = 1e12


@dataclass
class ReconstructionReport:
    maps: ThreeMaps
    residual_norm: float
    data_fit_relative: float
    timings: dict[str, float] = field(default_factory=dict)
    interp: str = "nearest"

    def summary(self) -> dict:
        return {
            "residual_norm": self.residual_norm,
            "data_fit_relative": self.data_fit_relative,
            "interp": self.interp,
            "timings_s": dict(self.timings),
            "dims": list(self.maps.shape),
            "voxel_pitch_m": self.maps.pitch.tolist(),
            "origin_m": self.maps.origin.tolist(),
        }


def mnls_weights(acq: Acquisition) -> np.ndarray:
    """π_k per measurement, shape (3, M)."""
    w = acquisition_weights(acq)
    return w / np.sum(w * w, axis=0)


def mnls_fast(holo: Hologram, kgrid: KGrid) -> ReconstructionReport:
    """Two-step MNLS: π-weighting, then regrid + inverse FFT per map."""
    acq = holo.acquisition
    t0 = time.perf_counter()
    pi = mnls_weights(acq)
    t1 = time.perf_counter()
    maps = []
    for k in range(3):
        spec = regrid(holo.values, pi[k], acq, kgrid)
        maps.append(to_image(spec.values, kgrid))
    result = ThreeMaps.for_grid(kgrid, *maps)
    t2 = time.perf_counter()
    resid = float(np.linalg.norm(holo.values - apply_forward(result, acq, kgrid)))
    t3 = time.perf_counter()
    scale = float(np.linalg.norm(holo.values))
    return ReconstructionReport(
        maps=result,
        residual_norm=resid,
        data_fit_relative=resid / scale if scale > 0 else 0.0,
        timings={"weights": t1 - t0, "regrid_ifft": t2 - t1, "residual": t3 - t2},
        interp=kgrid.interp,
    )


def _duplicate_pairs(acq: Acquisition, tol: float = 1e-9) -> list[tuple[int, int]]:
    q = sample_locations(acq)
    scale = max(1.0, float(np.abs(q).max(initial=0.0)))
    keys = np.round(q / (tol * scale)).astype(np.int64)
    _, first, inverse = np.unique(keys, axis=0, return_index=True, return_inverse=True)
    inverse = inverse.ravel()
    return [(int(first[inverse[i]]), i) for i in range(len(acq)) if first[inverse[i]] != i]


def mnls_dense(holo: Hologram, kgrid: KGrid, cap: int = DENSE_CAP) -> ThreeMaps:
    """Dense oracle: explicit A, then the constrained minimum-norm solution with Q = I."""
    A = dense_matrix(holo.acquisition, kgrid, cap=cap)
    gram = A @ A.conj().T
    cond = np.linalg.cond(gram) if gram.size else 1.0
    if not cond <= CONDITION_LIMIT:
        pairs = _duplicate_pairs(holo.acquisition)
        hint = f"; coincident samples (first, repeat): {pairs[:5]}" if pairs else ""
        raise ConditioningError(f"AA† condition number {cond:.3g} exceeds {CONDITION_LIMIT:g}{hint}")
    x = constrained_min_norm(None, A, holo.values)
    return ThreeMaps.from_vec(x, kgrid)


def constrained_min_norm(Q, A, c) -> np.ndarray:
    """argmin ‖x‖²_Q subject to A x = c, i.e. x = Q⁻¹A†(AQ⁻¹A†)⁻¹c.

    ``Q=None`` stands for the identity. Q must be Hermitian positive
    definite and A must have full row rank.
    """
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    c = np.asarray(c, dtype=complex).ravel()
    p, n = A.shape
    if c.size != p:
        raise InvalidInputError(f"constraint vector has {c.size} entries for {p} rows")
    if p > n:
        raise InvalidInputError(f"more constraints ({p}) than unknowns ({n})")
    if Q is None:
        QinvAh = A.conj().T
    else:
        Q = np.asarray(Q, dtype=complex)
        if Q.shape != (n, n) or not np.allclose(Q, Q.conj().T, rtol=1e-12, atol=1e-14 * np.abs(Q).max()):
            raise InvalidInputError("Q must be a Hermitian N x N matrix")
        try:
            qf = scipy.linalg.cho_factor(Q)
        except np.linalg.LinAlgError:
            raise InvalidInputError("Q is not positive definite") from None
        QinvAh = scipy.linalg.cho_solve(qf, A.conj().T)
    if p and np.linalg.matrix_rank(A) < p:
        raise InvalidInputError("A is rank deficient")
    G = A @ QinvAh
    try:
        gf = scipy.linalg.cho_factor(G)
    except np.linalg.LinAlgError:
        raise InvalidInputError("A Q⁻¹ A† is not positive definite (A rank deficient)") from None
    u = scipy.linalg.cho_solve(gf, c)
    return QinvAh @ u


def aadagger_diagonal(acq: Acquisition, kgrid: KGrid, tol: float = 1e-6) -> np.ndarray:
    """Diagonal of A A† (= Σ_k w_k² per measurement) for on-grid, distinct samples.

    Raises :class:`IdentityViolatedError` when samples are off the nodes
    (by more than ``tol`` cells) or share a node, where AA† is not diagonal.
    """
    u = fractional_index(sample_locations(acq), kgrid)
    node = np.rint(u)
    if np.any(np.abs(u - node) > tol):
        raise IdentityViolatedError("samples are not on grid nodes; AA† is not diagonal")
    dims = np.array(kgrid.dims)
    if np.any((node < 0) | (node >= dims)):
        raise IdentityViolatedError("samples lie outside the grid")
    if np.unique(node, axis=0).shape[0] != len(acq):
        raise IdentityViolatedError("several measurements share a grid node; AA† is not diagonal")
    w = acquisition_weights(acq)
    return np.sum(w * w, axis=0)


def ls_residual(maps: ThreeMaps, holo: Hologram, kgrid: KGrid) -> float:
    """‖𝒮 - A s‖²."""
    r = holo.values - apply_forward(maps, holo.acquisition, kgrid)
    return float(np.vdot(r, r).real)
