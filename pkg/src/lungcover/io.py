"""On-disk formats: JSON sidecar headers with raw binary payloads, plus PGM.

A volume or mask is stored as a small JSON header next to a raw
little-endian payload. The header names the payload file via a relative
path, so a case directory can be moved wholesale:

    {"dims": [nx, ny, nz], "spacing_mm": [sx, sy, sz],
     "dtype": "i16le", "data": "volume.raw"}

Masks additionally carry "label" (right/left/both) and use dtype "u8"
with one byte per element, value 0 or 1 (not bit-packed). 2D masks store
dims [nx, nz] and spacing_mm [sx, sz]. Payload element order is always
x-fastest, then y, then z.

Writes are atomic (temp file in the target directory, then rename) and
contain no timestamps, so identical inputs produce byte-identical files.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import IoFailure, MalformedHeader, MalformedMask, SizeMismatch
from .grid import LABELS, DrrImage, GridGeometry, Mask2D, Mask3D, VoxelVolume

_I16 = np.dtype("<i2")


def _atomic_write_bytes(path: Path, payload: bytes) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(payload)
            os.replace(tmp, path)
        except BaseException:
            os.unlink(tmp)
            raise
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def _read_bytes(path: Path) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc


def _header_to_json(header: dict) -> bytes:
    return (json.dumps(header, sort_keys=True, indent=2) + "\n").encode("utf-8")


def _load_header(path: Path, *, ndim: int, want_dtype: str, want_label: bool) -> dict:
    raw = _read_bytes(path)
    try:
        header = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedHeader(f"{path}: not a JSON header: {exc}") from exc
    if not isinstance(header, dict):
        raise MalformedHeader(f"{path}: header must be a JSON object")
    for key in ("dims", "spacing_mm", "dtype", "data"):
        if key not in header:
            raise MalformedHeader(f"{path}: missing key {key!r}")
    dims = header["dims"]
    spacing = header["spacing_mm"]
    if not (isinstance(dims, list) and len(dims) == ndim
            and all(isinstance(d, int) and d >= 1 for d in dims)):
        raise MalformedHeader(f"{path}: dims must be {ndim} positive integers, got {dims!r}")
    if not (isinstance(spacing, list) and len(spacing) == ndim
            and all(isinstance(s, (int, float)) and s > 0 for s in spacing)):
        raise MalformedHeader(f"{path}: spacing_mm must be {ndim} positive numbers, got {spacing!r}")
    if header["dtype"] != want_dtype:
        raise MalformedHeader(f"{path}: expected dtype {want_dtype!r}, got {header['dtype']!r}")
    data = header["data"]
    if not isinstance(data, str) or not data or Path(data).is_absolute():
        raise MalformedHeader(f"{path}: data must be a relative path, got {data!r}")
    if want_label:
        if header.get("label") not in LABELS:
            raise MalformedHeader(f"{path}: label must be one of {LABELS}, got {header.get('label')!r}")
    return header


def _load_payload(header_path: Path, header: dict, expect_bytes: int) -> bytes:
    data_path = Path(header_path).parent / header["data"]
    payload = _read_bytes(data_path)
    if len(payload) != expect_bytes:
        raise SizeMismatch(
            f"{data_path}: payload is {len(payload)} bytes, header implies {expect_bytes}"
        )
    return payload


def _mask_bits(payload: bytes, shape: tuple[int, ...], where: str) -> np.ndarray:
    raw = np.frombuffer(payload, dtype=np.uint8)
    if raw.size and raw.max() > 1:
        bad = int(raw[raw > 1][0])
        raise MalformedMask(f"{where}: mask bytes must be 0 or 1, found {bad}")
    return raw.reshape(shape).astype(bool)


# --- volumes ---------------------------------------------------------------

def load_volume(path: str | Path) -> VoxelVolume:
    """Read a volume (header JSON + i16le raw); enforces type invariants."""
    path = Path(path)
    header = _load_header(path, ndim=3, want_dtype="i16le", want_label=False)
    nx, ny, nz = header["dims"]
    sx, sy, sz = (float(s) for s in header["spacing_mm"])
    payload = _load_payload(path, header, 2 * nx * ny * nz)
    values = np.frombuffer(payload, dtype=_I16).reshape(nz, ny, nx)
    return VoxelVolume(GridGeometry(nx, ny, nz, sx, sy, sz), values)


def save_volume(volume: VoxelVolume, path: str | Path) -> None:
    path = Path(path)
    g = volume.geometry
    data_name = path.stem + ".raw"
    header = {
        "dims": [g.nx, g.ny, g.nz],
        "spacing_mm": [g.sx, g.sy, g.sz],
        "dtype": "i16le",
        "data": data_name,
    }
    _atomic_write_bytes(path.parent / data_name, volume.values.astype(_I16, copy=False).tobytes())
    _atomic_write_bytes(path, _header_to_json(header))


# --- 3D masks ---------------------------------------------------------------

def load_mask3d(path: str | Path) -> Mask3D:
    path = Path(path)
    header = _load_header(path, ndim=3, want_dtype="u8", want_label=True)
    nx, ny, nz = header["dims"]
    sx, sy, sz = (float(s) for s in header["spacing_mm"])
    payload = _load_payload(path, header, nx * ny * nz)
    bits = _mask_bits(payload, (nz, ny, nx), str(path))
    return Mask3D(GridGeometry(nx, ny, nz, sx, sy, sz), bits, header["label"])


def save_mask3d(mask: Mask3D, path: str | Path) -> None:
    path = Path(path)
    g = mask.geometry
    data_name = path.stem + ".raw"
    header = {
        "dims": [g.nx, g.ny, g.nz],
        "spacing_mm": [g.sx, g.sy, g.sz],
        "dtype": "u8",
        "data": data_name,
        "label": mask.label,
    }
    _atomic_write_bytes(path.parent / data_name, mask.bits.astype(np.uint8).tobytes())
    _atomic_write_bytes(path, _header_to_json(header))


# --- 2D masks ---------------------------------------------------------------

def load_mask2d(path: str | Path) -> Mask2D:
    path = Path(path)
    header = _load_header(path, ndim=2, want_dtype="u8", want_label=True)
    nx, nz = header["dims"]
    sx, sz = (float(s) for s in header["spacing_mm"])
    payload = _load_payload(path, header, nx * nz)
    bits = _mask_bits(payload, (nz, nx), str(path))
    return Mask2D(nx, nz, sx, sz, bits, header["label"])


def save_mask2d(mask: Mask2D, path: str | Path) -> None:
    path = Path(path)
    data_name = path.stem + ".raw"
    header = {
        "dims": [mask.nx, mask.nz],
        "spacing_mm": [mask.sx, mask.sz],
        "dtype": "u8",
        "data": data_name,
        "label": mask.label,
    }
    _atomic_write_bytes(path.parent / data_name, mask.bits.astype(np.uint8).tobytes())
    _atomic_write_bytes(path, _header_to_json(header))


# --- PGM --------------------------------------------------------------------

def pgm_bytes(image: DrrImage) -> bytes:
    """Binary PGM (P5, maxval 255); row order is z ascending."""
    return b"P5\n%d %d\n255\n" % (image.nx, image.nz) + image.pixels.tobytes()


def save_pgm(image: DrrImage, path: str | Path) -> None:
    _atomic_write_bytes(Path(path), pgm_bytes(image))


def write_json(obj: dict | list, path: str | Path) -> None:
    """Write a report JSON: UTF-8, sorted keys, trailing newline, atomic."""
    _atomic_write_bytes(Path(path), _header_to_json(obj))


def write_text(text: str, path: str | Path) -> None:
    _atomic_write_bytes(Path(path), text.encode("utf-8"))
