"""File formats: JSON descriptions, binary holograms and volumes, PGM slices.

Binary layout shared by holograms and volumes::

    16 bytes   magic, ASCII, NUL padded ("P3DHOLO1" or "P3DVOL01")
     8 bytes   header length L, little-endian uint64
     L bytes   UTF-8 JSON header
     payload   little-endian interleaved (re, im)

Holograms store float64 pairs in descriptor order; volumes store float32
pairs in x-fastest order.
"""

from __future__ import annotations

import json
import logging
import os
import re
import struct
from pathlib import Path

import numpy as np

from .errors import FormatError, InvalidInputError
from .forward import Hologram, Scene
from .geometry import Acquisition
from .kgrid import KGrid
from .polarimetry import MAP_LABELS

log = logging.getLogger(__name__)

HOLOGRAM_MAGIC = b"P3DHOLO1"
VOLUME_MAGIC = b"P3DVOL01"
_MAGIC_LEN = 16
_HOLO_DTYPE = np.dtype("<c16")
_VOL_DTYPE = np.dtype("<c8")


def _padded(magic: bytes) -> bytes:
    return magic.ljust(_MAGIC_LEN, b"\0")


def _write_binary(path, magic: bytes, header: dict, payload: bytes) -> None:
    path = Path(path)
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_padded(magic))
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        fh.write(payload)
        fh.flush()
        os.fsync(fh.fileno())


def _read_binary(path, magic: bytes) -> tuple[dict, bytes]:
    path = Path(path)
    data = path.read_bytes()
    if len(data) < _MAGIC_LEN + 8 or data[:_MAGIC_LEN] != _padded(magic):
        raise FormatError(f"{path}: not a {magic.decode()} file (bad magic)")
    (hlen,) = struct.unpack("<Q", data[_MAGIC_LEN:_MAGIC_LEN + 8])
    start = _MAGIC_LEN + 8
    if start + hlen > len(data):
        raise FormatError(f"{path}: header length {hlen} runs past end of file")
    try:
        header = json.loads(data[start:start + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: unreadable header ({exc})") from None
    return header, data[start + hlen:]


def write_hologram(holo: Hologram, path) -> None:
    header = {
        "format": "P3DHOLO1",
        "count": int(holo.values.size),
        "acquisition": holo.acquisition.to_json_dict(exact=True),
    }
    _write_binary(path, HOLOGRAM_MAGIC, header, holo.values.astype(_HOLO_DTYPE).tobytes())


def read_hologram(path) -> Hologram:
    header, payload = _read_binary(path, HOLOGRAM_MAGIC)
    try:
        count = int(header["count"])
        acq = Acquisition.from_json_dict(header["acquisition"])
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: malformed hologram header ({exc})") from None
    expected = count * _HOLO_DTYPE.itemsize
    if len(payload) != expected:
        raise FormatError(f"{path}: payload is {len(payload)} bytes, expected {expected}")
    if count != len(acq):
        raise FormatError(f"{path}: {count} values for {len(acq)} descriptors")
    values = np.frombuffer(payload, dtype=_HOLO_DTYPE).astype(complex)
    return Hologram(values, acq)


def write_volume(volume: np.ndarray, pitch, origin, path, label: str = "xx") -> None:
    """Store one complex map at float32 precision."""
    volume = np.asarray(volume)
    if volume.ndim != 3:
        raise InvalidInputError(f"volume must be 3-D, got shape {volume.shape}")
    if not np.all(np.isfinite(volume)):
        raise InvalidInputError("volume contains NaN or infinity")
    if label not in MAP_LABELS:
        raise InvalidInputError(f"map label must be one of {MAP_LABELS}, got {label!r}")
    header = {
        "format": "P3DVOL01",
        "dims": list(volume.shape),
        "voxel_pitch_m": [float(v) for v in np.asarray(pitch, dtype=float).reshape(3)],
        "origin_m": [float(v) for v in np.asarray(origin, dtype=float).reshape(3)],
        "label": label,
        "value_type": "complex64",
        "order": "x-fastest",
    }
    payload = volume.astype(_VOL_DTYPE).ravel(order="F").tobytes()
    _write_binary(path, VOLUME_MAGIC, header, payload)


def read_volume(path) -> tuple[np.ndarray, dict]:
    """Return (complex64 array indexed [ix, iy, iz], geometry dict)."""
    header, payload = _read_binary(path, VOLUME_MAGIC)
    try:
        dims = tuple(int(d) for d in header["dims"])
        geometry = {
            "dims": dims,
            "voxel_pitch_m": np.asarray(header["voxel_pitch_m"], dtype=float),
            "origin_m": np.asarray(header["origin_m"], dtype=float),
            "label": header["label"],
        }
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: malformed volume header ({exc})") from None
    if len(dims) != 3 or min(dims) < 1:
        raise FormatError(f"{path}: bad dims {dims}")
    if header.get("value_type", "complex64") != "complex64":
        raise FormatError(f"{path}: unsupported value type {header.get('value_type')!r}")
    expected = int(np.prod(dims)) * _VOL_DTYPE.itemsize
    if len(payload) != expected:
        raise FormatError(f"{path}: payload is {len(payload)} bytes, expected {expected} for dims {list(dims)}")
    vol = np.frombuffer(payload, dtype=_VOL_DTYPE).astype(np.complex64).reshape(dims, order="F")
    return vol, geometry


def slice_pixels(volume: np.ndarray, axis: str, index: int, db_floor: float = -40.0) -> np.ndarray:
    """8-bit dB-scaled magnitude of one slice, normalized to the volume peak.

    Rows follow the first remaining axis, columns the second.
    """
    volume = np.asarray(volume)
    ax = {"x": 0, "y": 1, "z": 2}.get(str(axis).lower())
    if ax is None:
        raise InvalidInputError(f"axis must be x, y or z, got {axis!r}")
    if not 0 <= index < volume.shape[ax]:
        raise InvalidInputError(f"slice index {index} outside 0..{volume.shape[ax] - 1}")
    if not db_floor < 0:
        raise InvalidInputError(f"db_floor must be negative, got {db_floor}")
    mag = np.abs(np.take(volume, index, axis=ax)).astype(float)
    peak = float(np.abs(volume).max(initial=0.0))
    if peak == 0:
        log.warning("all-zero volume; writing a black slice")
        return np.zeros(mag.shape, dtype=np.uint8)
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(mag / peak)
    px = 255.0 * (db - db_floor) / (-db_floor)
    return np.clip(np.nan_to_num(px, nan=0.0, neginf=0.0), 0, 255).round().astype(np.uint8)


def export_slice(volume: np.ndarray, axis: str, index: int, db_floor: float, path) -> None:
    """Write a binary PGM (P5) slice; see :func:`slice_pixels` for the scaling."""
    px = slice_pixels(volume, axis, index, db_floor)
    rows, cols = px.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{cols} {rows}\n255\n".encode("ascii"))
        fh.write(px.tobytes())


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    m = re.match(rb"P5\s+(\d+)\s+(\d+)\s+(\d+)\s", data)
    if m is None:
        raise FormatError(f"{path}: not a binary PGM")
    cols, rows, maxval = (int(g) for g in m.groups())
    if maxval != 255:
        raise FormatError(f"{path}: only 8-bit PGM is supported")
    pix = data[m.end():]
    if len(pix) != rows * cols:
        raise FormatError(f"{path}: expected {rows * cols} pixels, got {len(pix)}")
    return np.frombuffer(pix, dtype=np.uint8).reshape(rows, cols)


def _load_json(path) -> dict:
    path = Path(path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from None


def _dump_json(obj: dict, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")


def load_acquisition(path) -> Acquisition:
    return Acquisition.from_json_dict(_load_json(path))


def save_acquisition(acq: Acquisition, path) -> None:
    _dump_json(acq.to_json_dict(), path)


def load_scene(path) -> Scene:
    return Scene.from_json_dict(_load_json(path))


def save_scene(scene: Scene, path) -> None:
    _dump_json(scene.to_json_dict(), path)


def load_grid(path) -> KGrid:
    return KGrid.from_json_dict(_load_json(path))


def save_grid(kgrid: KGrid, path) -> None:
    _dump_json(kgrid.to_json_dict(), path)


def save_report(report, path, config: dict | None = None) -> None:
    d = report.summary()
    if config:
        d["config"] = config
    _dump_json(d, path)
