"""File formats: binary field snapshots, norm-series CSV, JSON reports.

Snapshot format (``BSNF1``): magic bytes ``BSNF1``, then little-endian
u32 n, u32 N, u32 m, u8 homogeneous flag, then m * N^n complex values as
f64 pairs (re, im) in the row-major frequency order of the coefficient
array.  The round trip is bit exact.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .spectral import Grid, SpectralField

MAGIC = b"BSNF1"
CSV_HEADER = "t,besov_minus1_eps,linf,z_norm,rho,guaranteed_T"


class SnapshotError(RuntimeError):
    """Raised for malformed or truncated snapshot files."""


def write_snapshot(path, field: SpectralField) -> None:
    path = Path(path)
    header = MAGIC + struct.pack(
        "<IIIB", field.grid.n, field.grid.N, field.m, 1 if field.homogeneous else 0
    )
    flat = np.ascontiguousarray(field.coeffs).ravel()
    body = np.empty(2 * flat.size, dtype="<f8")
    body[0::2] = flat.real
    body[1::2] = flat.imag
    path.write_bytes(header + body.tobytes())


def read_snapshot(path) -> SpectralField:
    raw = Path(path).read_bytes()
    if len(raw) < len(MAGIC) + 13:
        raise SnapshotError("snapshot file truncated before header")
    if raw[: len(MAGIC)] != MAGIC:
        raise SnapshotError(
            f"bad magic bytes {raw[:len(MAGIC)]!r}; not a field snapshot"
        )
    n, N, m, hom = struct.unpack("<IIIB", raw[len(MAGIC) : len(MAGIC) + 13])
    grid = Grid(int(n), int(N))
    count = m * N**n
    body = raw[len(MAGIC) + 13 :]
    if len(body) != 16 * count:
        raise SnapshotError(
            f"snapshot body holds {len(body)} bytes, expected {16 * count}"
        )
    data = np.frombuffer(body, dtype="<f8")
    coeffs = (data[0::2] + 1j * data[1::2]).reshape((m,) + grid.shape)
    return SpectralField(grid, np.ascontiguousarray(coeffs), bool(hom))


def write_norm_csv(path, record) -> None:
    """Norm time series of a solution record, one row per node."""
    nodes = record.u.tgrid.nodes
    rho = record.rho_series
    guaranteed = record.guaranteed_series
    lines = [CSV_HEADER]
    for mi, t in enumerate(nodes):
        cols = [
            t,
            record.besov_series[mi],
            record.linf_series[mi],
            record.z_running[mi],
            0.0 if rho is None else rho[mi],
            float("inf") if guaranteed is None else guaranteed[mi],
        ]
        lines.append(",".join(f"{c:.17g}" for c in cols))
    Path(path).write_text("\n".join(lines) + "\n")


def write_json(path, payload: str) -> None:
    Path(path).write_text(payload if payload.endswith("\n") else payload + "\n")


def dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=str)
