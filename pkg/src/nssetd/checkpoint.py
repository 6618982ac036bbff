"""Binary checkpoints for bit-exact restart.

Layout (all little-endian)::

    offset  size  field
    0       8     magic  b"NSSECKPT"
    8       4     version (uint32)
    12      4     N (uint32)
    16      4     history levels (uint32, always 3)
    20      4     flags (uint32; bit 0 = dealias)
    24      48    L, eps, kappa, A, t, dt (float64)
    72      8     step count (uint64)
    80      ...   levels * N * N float64, row-major, newest level first
    end-8   8     checksum: 64-bit BLAKE2b digest of everything before it
"""

from __future__ import annotations

import hashlib
import struct

import numpy as np

from .model import ModelParams, nonlinear_hat
from .schemes import SchemeState, _from_history
from .series import atomic_write_bytes
from .spectral import SpectralGrid

MAGIC = b"NSSECKPT"
VERSION = 1
_HEADER = struct.Struct("<8sIIII6dQ")
_CHECKSUM = struct.Struct("<Q")


class CheckpointError(ValueError):
    pass


def _digest(data: bytes) -> int:
    return _CHECKSUM.unpack(hashlib.blake2b(data, digest_size=8).digest())[0]


def encode(state: SchemeState) -> bytes:
    grid, p = state.grid, state.params
    header = _HEADER.pack(
        MAGIC, VERSION, grid.N, len(state.u), int(bool(p.dealias)),
        grid.L, p.eps, p.kappa, p.A, state.t, state.dt, state.step_count,
    )
    payload = b"".join(np.ascontiguousarray(u, dtype="<f8").tobytes() for u in state.u)
    body = header + payload
    return body + _CHECKSUM.pack(_digest(body))


def write_checkpoint(state: SchemeState, path, cfg=None) -> None:
    """Atomically write ``state``; ``cfg`` (if given) must describe the same run."""
    if cfg is not None:
        check_compatible(state, cfg)
    atomic_write_bytes(path, encode(state))


def decode(data: bytes, forcing=None, nonlinear=None, workers: int = 1) -> SchemeState:
    if len(data) < _HEADER.size + _CHECKSUM.size:
        raise CheckpointError("checkpoint truncated: shorter than its header")
    body, tail = data[:-_CHECKSUM.size], data[-_CHECKSUM.size:]
    if data[:8] != MAGIC:
        raise CheckpointError("not a checkpoint file (bad magic)")
    if _digest(body) != _CHECKSUM.unpack(tail)[0]:
        raise CheckpointError("checkpoint checksum mismatch (corrupt or truncated file)")
    magic, version, N, levels, flags, L, eps, kappa, A, t, dt, steps = _HEADER.unpack_from(body)
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    expected = _HEADER.size + levels * N * N * 8
    if len(body) != expected:
        raise CheckpointError(f"payload size {len(body)} does not match header (expected {expected})")
    raw = np.frombuffer(body, dtype="<f8", offset=_HEADER.size).reshape(levels, N, N)
    history = tuple(np.array(raw[k], dtype=float) for k in range(levels))
    grid = SpectralGrid(N, L, workers)
    p = ModelParams(eps=eps, kappa=kappa, A=A, dealias=bool(flags & 1))
    return _from_history(grid, p, t, dt, steps, history, forcing, nonlinear or nonlinear_hat)


def read_checkpoint(path, forcing=None, nonlinear=None, workers: int = 1) -> SchemeState:
    with open(path, "rb") as fh:
        return decode(fh.read(), forcing=forcing, nonlinear=nonlinear, workers=workers)


def check_compatible(state: SchemeState, cfg) -> None:
    """Refuse a checkpoint whose grid or model parameters differ from ``cfg``."""
    problems = []
    if state.grid.N != cfg.N:
        problems.append(f"N {state.grid.N} != {cfg.N}")
    if state.grid.L != cfg.L:
        problems.append(f"L {state.grid.L} != {cfg.L}")
    if state.params != cfg.params:
        problems.append(f"model {state.params} != {cfg.params}")
    if problems:
        raise CheckpointError("checkpoint does not match config: " + "; ".join(problems))
