"""Diagnostics serialization and binary checkpoints.

Diagnostics are newline-delimited JSON, one record per line, keys in the
fixed order of ``diagnostics.FIELDS`` preceded by ``"schema"``. Reals are
written with 17 significant digits so every double round-trips exactly.

Checkpoint layout (all little-endian)::

    offset  size  content
    0       8     magic b"VBQCHKP1"
    8       4     u32 format version (= 1)
    12      4     u32 N
    16      8     f64 epsilon
    24      8     f64 alpha
    32      8     f64 beta
    40      8     f64 t
    48      B     omega coefficients
    48+B    B     theta coefficients

Each coefficient block covers the retained box |k1|, |k2| <= K with
K = N // 3, row-major with k1 = -K..K as rows and k2 = -K..K as columns;
each entry is (real, imag) as two f64. B = 16 * (2K + 1)^2.
"""

import json
import os
import struct

import numpy as np

from .diagnostics import FIELDS, SCHEMA_VERSION, DiagnosticsRecord
from .dynamics import State
from .errors import CheckpointFormatError
from .spectral import VoigtParams, make_grid

MAGIC = b"VBQCHKP1"
VERSION = 1
_HEADER = struct.Struct("<8sII4d")


def _fmt(value):
    if value is None:
        return "null"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_fmt(v) for v in value) + "]"
    if isinstance(value, bool):
        raise TypeError("booleans are not part of the diagnostics schema")
    value = float(value)
    if not np.isfinite(value):
        raise ValueError(f"non-finite value {value!r} in diagnostics record")
    return format(value, ".17g")


def format_record(record):
    """One NDJSON line (without the trailing newline)."""
    data = record.as_dict() if isinstance(record, DiagnosticsRecord) else record
    parts = [f'"schema": {SCHEMA_VERSION}']
    parts += [f'"{name}": {_fmt(data[name])}' for name in FIELDS]
    return "{" + ", ".join(parts) + "}"


def write_diagnostics(record, sink):
    """Append ``record`` as one line to the text stream ``sink``."""
    sink.write(format_record(record) + "\n")


def parse_record(line):
    data = json.loads(line)
    if data.get("schema") != SCHEMA_VERSION:
        raise ValueError(f"unsupported diagnostics schema {data.get('schema')!r}")
    return DiagnosticsRecord(**{name: data[name] for name in FIELDS})


def read_diagnostics(path):
    with open(path, encoding="utf-8") as fh:
        return [parse_record(line) for line in fh if line.strip()]


class DiagnosticsWriter:
    """File sink that enforces increasing time and flushes per record."""

    def __init__(self, path):
        self.path = path
        self._fh = open(path, "w", encoding="utf-8")
        self._last_t = None

    def __call__(self, record):
        if self._last_t is not None and not record.t > self._last_t:
            raise ValueError(f"records must arrive in increasing t ({record.t} after {self._last_t})")
        write_diagnostics(record, self._fh)
        self._fh.flush()
        self._last_t = record.t

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def _retained_index(N):
    K = N // 3
    r = np.arange(-K, K + 1) % N
    return np.ix_(r, r), K


def checkpoint_write(state, params, path):
    """Write ``state`` and ``params`` to ``path`` (atomically, via a temp file)."""
    grid = state.grid
    idx, K = _retained_index(grid.N)
    for name, c in (("omega_hat", state.omega_hat), ("theta_hat", state.theta_hat)):
        if np.any(c[~grid.dealias_mask] != 0):
            raise ValueError(f"{name} is not dealiased; the checkpoint would lose data")
    header = _HEADER.pack(MAGIC, VERSION, grid.N, params.epsilon, params.alpha, params.beta, float(state.t))
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(header)
        for c in (state.omega_hat, state.theta_hat):
            fh.write(np.ascontiguousarray(c[idx], dtype="<c16").tobytes())
    os.replace(tmp, path)


def checkpoint_read(path, expected_N=None):
    """Read a checkpoint; returns ``(State, VoigtParams)``."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _HEADER.size:
        raise CheckpointFormatError(f"{path}: truncated header ({len(blob)} bytes)")
    magic, version, N, eps, alpha, beta, t = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise CheckpointFormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise CheckpointFormatError(f"{path}: unsupported version {version}")
    if N < 8 or N % 2:
        raise CheckpointFormatError(f"{path}: invalid grid size N={N}")
    if expected_N is not None and N != expected_N:
        raise CheckpointFormatError(f"{path}: grid mismatch (checkpoint N={N}, expected {expected_N})")
    idx, K = _retained_index(N)
    count = (2 * K + 1) ** 2
    block = 16 * count
    if len(blob) != _HEADER.size + 2 * block:
        raise CheckpointFormatError(
            f"{path}: payload is {len(blob) - _HEADER.size} bytes, expected {2 * block}"
        )
    grid = make_grid(N)
    fields = []
    for i in range(2):
        start = _HEADER.size + i * block
        table = np.frombuffer(blob, dtype="<c16", count=count, offset=start).reshape(2 * K + 1, 2 * K + 1)
        c = grid.zeros()
        c[idx] = table
        fields.append(c)
    try:
        params = VoigtParams(eps, alpha, beta)
    except ValueError as exc:
        raise CheckpointFormatError(f"{path}: invalid parameters: {exc}") from None
    return State(fields[0], fields[1], t), params
