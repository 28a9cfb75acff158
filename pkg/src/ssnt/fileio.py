"""Persistence: the tensor container format, run manifests and
diagnostics CSV export.

Tensor container layout (all integers little-endian):

    bytes 0..4    magic ``SSNT1``
    bytes 5..6    format version (uint16, currently 1)
    bytes 7..30   dims n1, n2, n3 (three uint64)
    payload       n1*n2*n3 float64 values, slice-major order
                  (k slowest, then i, then j)
    trailer       uint64 FNV-1a checksum of the payload bytes

Writes go through a temp file and an atomic rename.  Numeric text
output uses the shortest round-trip decimal representation.
"""

import csv
import json
import os
import struct
import tempfile
from dataclasses import asdict, dataclass

import numpy as np

MAGIC = b"SSNT1"
FORMAT_VERSION = 1
MANIFEST_VERSION = 1

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


class FormatError(Exception):
    """Malformed tensor file; ``reason`` is one of magic, version,
    dims, checksum."""

    def __init__(self, reason, detail=""):
        self.reason = reason
        super().__init__(f"{reason}: {detail}" if detail else reason)


def fnv1a64(data):
    """64-bit FNV-1a hash of a byte string."""
    h = _FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * _FNV_PRIME) & _MASK64
    return h


def _atomic_write(path, data):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".ssnt-tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_tensor(path, t):
    """Serialize a third-order tensor (bit-exact round trip)."""
    t = np.asarray(t, dtype=np.float64)
    if t.ndim != 3:
        raise ValueError("only third-order tensors are stored")
    n1, n2, n3 = t.shape
    payload = np.ascontiguousarray(t.transpose(2, 0, 1)).astype("<f8").tobytes()
    header = MAGIC + struct.pack("<H", FORMAT_VERSION) + struct.pack("<QQQ", n1, n2, n3)
    trailer = struct.pack("<Q", fnv1a64(payload))
    _atomic_write(path, header + payload + trailer)


def read_tensor(path):
    """Read a tensor container, verifying magic, version, dims and
    checksum."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 31 or blob[:5] != MAGIC:
        raise FormatError("magic", "not a tensor container")
    (version,) = struct.unpack("<H", blob[5:7])
    if version != FORMAT_VERSION:
        raise FormatError("version", f"unsupported version {version}")
    n1, n2, n3 = struct.unpack("<QQQ", blob[7:31])
    if n1 == 0 or n2 == 0 or n3 == 0:
        raise FormatError("dims", "zero dimension")
    body = blob[31:]
    expected = n1 * n2 * n3 * 8
    if len(body) != expected + 8:
        raise FormatError("dims", f"payload length {len(body) - 8} != {expected}")
    payload, trailer = body[:expected], body[expected:]
    (stored,) = struct.unpack("<Q", trailer)
    if fnv1a64(payload) != stored:
        raise FormatError("checksum", "payload corrupted")
    flat = np.frombuffer(payload, dtype="<f8")
    return flat.reshape(n3, n1, n2).transpose(1, 2, 0).astype(np.float64)


@dataclass
class RunManifest:
    """Reproducibility record of one CLI run.

    The config snapshot plus the seed suffice to re-run the command and
    reproduce the outputs; the manifest round-trips losslessly through
    JSON (floats keep their shortest round-trip form).
    """

    command: str
    config: dict
    seed: int
    started: str
    finished: str
    outputs: dict
    diagnostics_csv: str | None = None
    metrics: dict | None = None
    normalization: dict | None = None
    version: int = MANIFEST_VERSION

    def to_json(self):
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        return cls(**json.loads(text))

    def save(self, path):
        _atomic_write(path, self.to_json().encode() + b"\n")

    @classmethod
    def load(cls, path):
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json(fh.read())


DIAGNOSTICS_HEADER = (
    "iteration",
    "rel_err_weights",
    "rel_err_V",
    "loss_total",
    "loss_lowrank",
    "loss_fidelity",
    "tv_penalty",
)


def export_diagnostics(history, path):
    """Write per-iteration diagnostics as CSV; empty history is an error
    and creates no file."""
    if not history:
        raise ValueError("empty diagnostics history")
    rows = []
    for d in history:
        rows.append(
            (
                str(d.iteration),
                repr(d.rel_err_weights),
                repr(d.rel_err_v),
                repr(d.loss.total),
                repr(d.loss.l1_lowrank),
                repr(d.loss.l2_fidelity),
                repr(d.loss.tv_penalty),
            )
        )
    out = [",".join(DIAGNOSTICS_HEADER)]
    out.extend(",".join(r) for r in rows)
    _atomic_write(path, ("\n".join(out) + "\n").encode())


def read_diagnostics(path):
    """Parse a diagnostics CSV back into plain row dicts."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        rows = []
        for row in reader:
            parsed = {"iteration": int(row["iteration"])}
            for key in DIAGNOSTICS_HEADER[1:]:
                parsed[key] = float(row[key])
            rows.append(parsed)
    return rows


def write_csv(path, header, rows):
    """Small CSV writer with round-trip float formatting."""

    def fmt(v):
        if isinstance(v, (float, np.floating)):
            return repr(float(v))
        return str(v)

    lines = [",".join(header)]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    _atomic_write(path, ("\n".join(lines) + "\n").encode())
