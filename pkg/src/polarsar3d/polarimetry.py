"""Scattering matrices and per-measurement polarimetric weights.

A monostatic acquisition in mode HH, VV or HV observes, for every point
scatterer, a real linear combination of the three independent entries of
its (symmetric) 2x2 scattering matrix::

    s*(i) = w_xx(i) s_xx + w_yy(i) s_yy + w_xy(i) s_xy

The weights depend only on the azimuth θ and roll φ of the measurement.
All functions here broadcast over numpy arrays of angles.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import FrameSingularityError, InvalidInputError

#: Measurements with K = cos²θcos²φ + sin²φ at or below this are rejected.
KAPPA_MIN = 1e-6

MAP_LABELS = ("xx", "yy", "xy")


class Mode(enum.IntEnum):
    """Polarization acquisition mode (emission, reception).

    HV stands for H at emission and V at reception; by monostatic reciprocity
    VH yields the same weights so it is not a separate mode.
    """

    HH = 0
    VV = 1
    HV = 2

    @classmethod
    def parse(cls, value) -> "Mode":
        if isinstance(value, Mode):
            return value
        if isinstance(value, str):
            key = value.strip().upper()
            if key == "VH":
                key = "HV"
            try:
                return cls[key]
            except KeyError:
                raise InvalidInputError(f"unknown polarization mode {value!r}") from None
        try:
            return cls(int(value))
        except (ValueError, TypeError):
            raise InvalidInputError(f"unknown polarization mode {value!r}") from None


@dataclass(frozen=True)
class ScatteringMatrix:
    """Symmetric 2x2 scattering matrix ``[[s_xx, s_xy], [s_xy, s_yy]]``.

    The off-diagonal entry is stored once (s_xy = s_yx by reciprocity).
    """

    s_xx: complex = 0j
    s_yy: complex = 0j
    s_xy: complex = 0j

    def __post_init__(self):
        for name in ("s_xx", "s_yy", "s_xy"):
            v = complex(getattr(self, name))
            if not np.isfinite(v):
                raise InvalidInputError(f"{name} must be finite, got {v}")
            object.__setattr__(self, name, v)

    def as_array(self) -> np.ndarray:
        """Full 2x2 complex matrix."""
        return np.array([[self.s_xx, self.s_xy], [self.s_xy, self.s_yy]], dtype=complex)

    def as_vector(self) -> np.ndarray:
        """Entries in map order (xx, yy, xy)."""
        return np.array([self.s_xx, self.s_yy, self.s_xy], dtype=complex)

    @classmethod
    def isotropic(cls, s: complex) -> "ScatteringMatrix":
        """Polarization-blind scatterer: s_xx = s_yy = s, s_xy = 0."""
        return cls(s, s, 0j)


class ModeWeights(NamedTuple):
    """Weights (w_xx, w_yy, w_xy); scalars or arrays of a common shape."""

    w_xx: np.ndarray | float
    w_yy: np.ndarray | float
    w_xy: np.ndarray | float

    def as_array(self) -> np.ndarray:
        return np.stack(np.broadcast_arrays(*map(np.asarray, self)))


def kappa(theta, phi):
    """Frame normalizer K = cos²θ cos²φ + sin²φ, in [0, 1]."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    k = np.cos(theta) ** 2 * np.cos(phi) ** 2 + np.sin(phi) ** 2
    return k if k.ndim else float(k)


def check_admissible(theta, phi) -> None:
    """Raise :class:`FrameSingularityError` if any (θ, φ) has K <= KAPPA_MIN."""
    k = np.atleast_1d(kappa(theta, phi))
    bad = np.flatnonzero(~(k > KAPPA_MIN))
    if bad.size:
        th = np.broadcast_to(np.asarray(theta, dtype=float), k.shape).ravel()[bad[0]]
        ph = np.broadcast_to(np.asarray(phi, dtype=float), k.shape).ravel()[bad[0]]
        raise FrameSingularityError(
            f"antenna frame undefined at theta={np.degrees(th):.6g} deg, "
            f"phi={np.degrees(ph):.6g} deg (K={k[bad[0]]:.3g} <= {KAPPA_MIN:g}); "
            f"{bad.size} singular measurement(s)"
        )


def _mode_codes(mode, shape) -> np.ndarray:
    if isinstance(mode, (str, Mode, int, np.integer)):
        return np.full(shape, int(Mode.parse(mode)), dtype=np.int8)
    codes = np.asarray(mode)
    if codes.dtype.kind in "USO":
        codes = np.array([int(Mode.parse(m)) for m in codes.ravel()], dtype=np.int8).reshape(codes.shape)
    return np.broadcast_to(codes.astype(np.int8), shape)


def closed_form_weights(theta, phi, mode) -> ModeWeights:
    """Forward mode weights from the closed forms for HH, VV and HV.

    ``mode`` may be a single mode or an array of mode codes broadcastable
    against the angles. At θ = 0, φ = 45° in HH mode the result is
    (0.5, 0.5, 1).
    """
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    check_admissible(theta, phi)
    shape = np.broadcast_shapes(theta.shape, phi.shape, np.shape(mode) if not isinstance(mode, str) else ())
    codes = _mode_codes(mode, shape)

    ct = np.cos(theta)
    cc = ct**2 * np.cos(phi) ** 2
    ss = np.sin(phi) ** 2
    cross = ct * np.sin(2.0 * phi)
    k = cc + ss

    hh = (cc / k, ss / k, cross / k)
    vv = (ss / k, cc / k, -cross / k)
    hv = (0.5 * cross / k, -0.5 * cross / k, -(cc - ss) / k)

    out = []
    for a, b, c in zip(hh, vv, hv):
        w = np.select([codes == Mode.HH, codes == Mode.VV], [a, b], c)
        out.append(w if w.ndim else float(w))
    return ModeWeights(*out)


def effective_coefficient(S: ScatteringMatrix, theta, phi, mode):
    """Scalar coefficient s*(i) seen by a measurement: Σ_k w_k · s_k."""
    w = closed_form_weights(theta, phi, mode)
    return w.w_xx * S.s_xx + w.w_yy * S.s_yy + w.w_xy * S.s_xy


def inversion_weights(theta, phi, mode) -> ModeWeights:
    """π_k = w_k / (w_xx² + w_yy² + w_xy²), applied before regridding in MNLS."""
    w = closed_form_weights(theta, phi, mode)
    norm = np.asarray(w.w_xx) ** 2 + np.asarray(w.w_yy) ** 2 + np.asarray(w.w_xy) ** 2
    if np.any(norm <= 0):
        raise ArithmeticError("zero weight norm on an admissible measurement")
    return ModeWeights(*(np.asarray(x) / norm if np.ndim(x) else float(x / norm) for x in w))


def weight_norm_sq(theta, phi, mode):
    """w_xx² + w_yy² + w_xy² per measurement."""
    w = closed_form_weights(theta, phi, mode)
    return np.asarray(w.w_xx) ** 2 + np.asarray(w.w_yy) ** 2 + np.asarray(w.w_xy) ** 2
