"""Concentric acquisition geometry: wave vectors, antenna frames, Jones vectors.

Angles are radians inside the library. The azimuth θ tilts the line of
sight away from the -z axis and the roll φ spins it around z; the wave
direction is ``k̂ = [-sinθcosφ, -sinθsinφ, -cosθ]``.

Sweep strings (``"start:step:stop"``) and the JSON acquisition format use
degrees and Hz.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .errors import FrameSingularityError, InvalidInputError
from .polarimetry import KAPPA_MIN, Mode, check_admissible, kappa

SPEED_OF_LIGHT = 299_792_458.0  # m/s


class MeasurementDescriptor(NamedTuple):
    theta: float  # rad
    phi: float  # rad
    freq: float  # Hz
    mode: Mode


@dataclass(frozen=True, eq=False)
class Acquisition:
    """Ordered measurement descriptors, stored column-wise.

    Use :meth:`from_descriptors` or :func:`expand_sweep` rather than the raw
    constructor when building by hand. The arrays are made read-only.
    """

    theta: np.ndarray
    phi: np.ndarray
    freq: np.ndarray
    modes: np.ndarray  # int8 Mode codes

    def __post_init__(self):
        theta = np.array(self.theta, dtype=float).ravel()
        phi = np.array(self.phi, dtype=float).ravel()
        freq = np.array(self.freq, dtype=float).ravel()
        modes = np.asarray(self.modes)
        if modes.dtype.kind in "USO":
            codes = [int(Mode.parse(m)) for m in modes.ravel()]
            modes = np.array(codes[0] if modes.ndim == 0 else codes, dtype=np.int8)
        modes = modes.astype(np.int8)
        modes = np.full(theta.shape, modes, dtype=np.int8) if modes.ndim == 0 else modes.ravel().copy()
        if not (theta.shape == phi.shape == freq.shape == modes.shape):
            raise InvalidInputError(
                f"descriptor arrays differ in length: {theta.size}, {phi.size}, {freq.size}, {modes.size}"
            )
        if not (np.all(np.isfinite(theta)) and np.all(np.isfinite(phi)) and np.all(np.isfinite(freq))):
            raise InvalidInputError("descriptor angles and frequencies must be finite")
        if np.any(freq <= 0):
            i = int(np.flatnonzero(freq <= 0)[0])
            raise InvalidInputError(f"frequency must be positive, got {freq[i]} Hz at descriptor {i}")
        if np.any((modes < 0) | (modes > 2)):
            raise InvalidInputError("mode codes must be 0 (HH), 1 (VV) or 2 (HV)")
        if theta.size:
            check_admissible(theta, phi)
        for name, arr in (("theta", theta), ("phi", phi), ("freq", freq), ("modes", modes)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @classmethod
    def from_descriptors(cls, descriptors: Sequence) -> "Acquisition":
        rows = [MeasurementDescriptor(float(d[0]), float(d[1]), float(d[2]), Mode.parse(d[3])) for d in descriptors]
        if not rows:
            return cls.empty()
        th, ph, fr, md = zip(*rows)
        return cls(np.array(th), np.array(ph), np.array(fr), np.array([int(m) for m in md], dtype=np.int8))

    @classmethod
    def empty(cls) -> "Acquisition":
        return cls(np.zeros(0), np.zeros(0), np.zeros(0), np.zeros(0, dtype=np.int8))

    def __len__(self) -> int:
        return self.theta.size

    def __getitem__(self, i: int) -> MeasurementDescriptor:
        return MeasurementDescriptor(
            float(self.theta[i]), float(self.phi[i]), float(self.freq[i]), Mode(int(self.modes[i]))
        )

    def __iter__(self) -> Iterator[MeasurementDescriptor]:
        return (self[i] for i in range(len(self)))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Acquisition):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, n), getattr(other, n)) for n in ("theta", "phi", "freq", "modes")
        )

    @property
    def wavenumber(self) -> np.ndarray:
        return 2.0 * np.pi * self.freq / SPEED_OF_LIGHT

    def directions(self) -> np.ndarray:
        """Unit wave directions k̂_i, shape (M, 3)."""
        st = np.sin(self.theta)
        return np.stack([-st * np.cos(self.phi), -st * np.sin(self.phi), -np.cos(self.theta)], axis=-1)

    def mode_labels(self) -> list[str]:
        return [Mode(int(m)).name for m in self.modes]

    def single_mode(self) -> Mode | None:
        """The common mode if all descriptors share one, else None."""
        if len(self) and np.all(self.modes == self.modes[0]):
            return Mode(int(self.modes[0]))
        return None

    def to_json_dict(self, exact: bool = False) -> dict:
        """Explicit-list JSON form (degrees, Hz).

        With ``exact=True`` radian copies are added so that a round trip
        through JSON reproduces the arrays bit for bit.
        """
        mode = self.single_mode()
        d = {
            "mode": mode.name if mode is not None else self.mode_labels(),
            "theta_deg": np.degrees(self.theta).tolist(),
            "phi_deg": np.degrees(self.phi).tolist(),
            "freq_hz": self.freq.tolist(),
        }
        if exact:
            d["theta_rad"] = self.theta.tolist()
            d["phi_rad"] = self.phi.tolist()
        return d

    @classmethod
    def from_json_dict(cls, d: dict) -> "Acquisition":
        if "sweep" in d:
            sw = d["sweep"]
            try:
                return expand_sweep(sw["theta_deg"], sw["phi_deg"], sw["freq_hz"], d.get("mode", "HH"))
            except KeyError as exc:
                raise InvalidInputError(f"sweep is missing field {exc}") from None
        try:
            if "theta_rad" in d:
                theta = np.asarray(d["theta_rad"], dtype=float)
                phi = np.asarray(d["phi_rad"], dtype=float)
            else:
                theta = np.radians(np.asarray(d["theta_deg"], dtype=float))
                phi = np.radians(np.asarray(d["phi_deg"], dtype=float))
            freq = np.asarray(d["freq_hz"], dtype=float)
            mode = d["mode"]
        except KeyError as exc:
            raise InvalidInputError(f"acquisition is missing field {exc}") from None
        if isinstance(mode, str):
            modes = np.full(theta.shape, int(Mode.parse(mode)), dtype=np.int8)
        else:
            modes = np.array([int(Mode.parse(m)) for m in mode], dtype=np.int8)
        return cls(theta, phi, freq, modes)


class AntennaFrame(NamedTuple):
    x_prime: np.ndarray
    y_prime: np.ndarray
    z_prime: np.ndarray


def wave_vector(theta: float, phi: float, freq: float) -> tuple[np.ndarray, float]:
    """Unit wave direction and wavenumber ``2π f / c`` (rad/m)."""
    if not freq > 0:
        raise InvalidInputError(f"frequency must be positive, got {freq}")
    st = math.sin(theta)
    direction = np.array([-st * math.cos(phi), -st * math.sin(phi), -math.cos(theta)])
    return direction, 2.0 * math.pi * freq / SPEED_OF_LIGHT


def jones_emission(theta: float, phi: float, antenna_pol: str) -> np.ndarray:
    """Jones vector of an H or V linearly polarized antenna, target frame."""
    pol = antenna_pol.upper()
    if pol == "H":
        ct = math.cos(theta)
        return np.array([-ct * math.cos(phi), -ct * math.sin(phi), math.sin(theta)])
    if pol == "V":
        return np.array([-math.sin(phi), math.cos(phi), 0.0])
    raise InvalidInputError(f"antenna polarization must be 'H' or 'V', got {antenna_pol!r}")


def _intermediate_frame(theta: float, phi: float):
    # closed forms stay defined at θ = 0 where ẑ'_0 ∧ ẑ vanishes
    ct, st = math.cos(theta), math.sin(theta)
    cp, sp = math.cos(phi), math.sin(phi)
    z0 = np.array([st * cp, st * sp, ct])
    y0 = np.array([-sp, cp, 0.0])
    x0 = np.array([ct * cp, ct * sp, -st])
    return x0, y0, z0


def _require_frame(theta: float, phi: float) -> float:
    k = kappa(theta, phi)
    if not k > KAPPA_MIN:
        raise FrameSingularityError(
            f"antenna frame undefined at theta={math.degrees(theta):.6g} deg, "
            f"phi={math.degrees(phi):.6g} deg (K={k:.3g})"
        )
    return k


def antenna_frame(theta: float, phi: float) -> AntennaFrame:
    """Antenna axes (x̂', ŷ', ẑ'): ẑ' = -k̂ and x̂' along the projection of x̂."""
    k = _require_frame(theta, phi)
    x0, y0, z0 = _intermediate_frame(theta, phi)
    a = math.cos(theta) * math.cos(phi)
    b = math.sin(phi)
    rk = math.sqrt(k)
    xp = (a * x0 - b * y0) / rk
    yp = (b * x0 + a * y0) / rk
    return AntennaFrame(xp, yp, z0)


def jones_projection(theta: float, phi: float, antenna_pol: str) -> tuple[float, float]:
    """Components (e·x̂', e·ŷ') of an H or V Jones vector in the antenna frame."""
    k = _require_frame(theta, phi)
    a = math.cos(theta) * math.cos(phi)
    b = math.sin(phi)
    rk = math.sqrt(k)
    pol = antenna_pol.upper()
    if pol == "H":
        return -a / rk, -b / rk
    if pol == "V":
        return -b / rk, a / rk
    raise InvalidInputError(f"antenna polarization must be 'H' or 'V', got {antenna_pol!r}")


def jones_projection_array(theta, phi, antenna_pol: str) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`jones_projection`."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    check_admissible(theta, phi)
    a = np.cos(theta) * np.cos(phi)
    b = np.sin(phi)
    rk = np.sqrt(a * a + b * b)
    if antenna_pol.upper() == "H":
        return -a / rk, -b / rk
    if antenna_pol.upper() == "V":
        return -b / rk, a / rk
    raise InvalidInputError(f"antenna polarization must be 'H' or 'V', got {antenna_pol!r}")


def parse_sweep(spec) -> np.ndarray:
    """Expand ``"start:step:stop"`` (or a 3-tuple) into an inclusive progression.

    ``stop`` is included when (stop - start) is a whole number of steps to
    within 1e-9 relative; otherwise the last point below ``stop`` ends the
    sweep. A bare number gives a single point.
    """
    if isinstance(spec, (int, float)):
        return np.array([float(spec)])
    if isinstance(spec, str):
        parts = spec.split(":")
        if len(parts) == 1:
            parts = [parts[0], "1", parts[0]]
        if len(parts) != 3:
            raise InvalidInputError(f"sweep must be 'start:step:stop', got {spec!r}")
        try:
            start, step, stop = (float(p) for p in parts)
        except ValueError:
            raise InvalidInputError(f"non-numeric sweep {spec!r}") from None
    else:
        try:
            start, step, stop = (float(p) for p in spec)
        except (TypeError, ValueError):
            raise InvalidInputError(f"sweep must be (start, step, stop), got {spec!r}") from None
    if not all(map(math.isfinite, (start, step, stop))):
        raise InvalidInputError(f"sweep bounds must be finite: {spec!r}")
    if not step > 0:
        raise InvalidInputError(f"sweep step must be positive: {spec!r}")
    if stop < start:
        raise InvalidInputError(f"empty sweep, stop < start: {spec!r}")
    n = (stop - start) / step
    nearest = round(n)
    if abs(n - nearest) <= 1e-9 * max(1.0, abs(n)):
        count = int(nearest) + 1
    else:
        count = int(math.floor(n)) + 1
    return start + step * np.arange(count)


def expand_sweep(theta_spec, phi_spec, freq_spec, mode) -> Acquisition:
    """Cartesian product of θ (deg), φ (deg) and f (Hz) sweeps.

    Frequency varies fastest, then φ, then θ. Singular (θ, φ) pairs raise
    :class:`FrameSingularityError`; nothing is dropped silently.
    """
    theta = np.radians(parse_sweep(theta_spec))
    phi = np.radians(parse_sweep(phi_spec))
    freq = parse_sweep(freq_spec)
    th, ph, fr = np.meshgrid(theta, phi, freq, indexing="ij")
    code = int(Mode.parse(mode))
    return Acquisition(th.ravel(), ph.ravel(), fr.ravel(), np.full(th.size, code, dtype=np.int8))
