"""Binary serialization of SF-ETT tensors.

File layout (fixed little-endian, platform independent):
  magic bytes ``SFETT1``;
  header of unsigned 64-bit integers: d, d_t, n_1..n_d, r^tt_1..r^tt_{d-1},
  r^t_1..r^t_{d_t}, r^t_s;
  payload of 64-bit floats: TT cores in order, then the distinct factors,
  then the shared factor, each block flattened first-index-fastest.
"""
from __future__ import annotations

import numpy as np

from .format import SfEttTensor

__all__ = ["MAGIC", "SfEttFileError", "save", "load", "to_bytes", "from_bytes"]

MAGIC = b"SFETT1"


class SfEttFileError(ValueError):
    """Malformed or truncated tensor file."""


def to_bytes(x: SfEttTensor) -> bytes:
    rank = x.rank
    header = [x.d, x.d_t, *x.dims, *rank.tt, *rank.tucker, rank.shared]
    blocks = [np.asarray(header, dtype="<u8").tobytes()]
    for c in x.cores:
        blocks.append(c.ravel(order="F").astype("<f8").tobytes())
    for u in x.factors:
        blocks.append(u.ravel(order="F").astype("<f8").tobytes())
    blocks.append(x.shared_factor.ravel(order="F").astype("<f8").tobytes())
    return MAGIC + b"".join(blocks)


def from_bytes(raw: bytes) -> SfEttTensor:
    if raw[: len(MAGIC)] != MAGIC:
        raise SfEttFileError("bad magic bytes")
    buf = raw[len(MAGIC):]

    def take_u64(count: int) -> np.ndarray:
        nonlocal buf
        nbytes = 8 * count
        if len(buf) < nbytes:
            raise SfEttFileError("truncated header")
        out = np.frombuffer(buf[:nbytes], dtype="<u8").astype(np.int64)
        buf = buf[nbytes:]
        return out

    d, d_t = (int(v) for v in take_u64(2))
    if d < 2 or not 1 <= d_t < d:
        raise SfEttFileError(f"invalid header: d={d}, d_t={d_t}")
    dims = tuple(int(v) for v in take_u64(d))
    rtt = tuple(int(v) for v in take_u64(d - 1))
    rt = tuple(int(v) for v in take_u64(d_t))
    (rts,) = (int(v) for v in take_u64(1))
    if any(v < 1 for v in dims + rtt + rt + (rts,)):
        raise SfEttFileError("non-positive header entry")
    if len(set(dims[d_t:])) != 1:
        raise SfEttFileError("shared modes are not equal-sized")

    bonds = (1,) + rtt + (1,)
    modes = rt + (rts,) * (d - d_t)
    shapes = [(bonds[k], modes[k], bonds[k + 1]) for k in range(d)]
    shapes += [(dims[i], rt[i]) for i in range(d_t)]
    shapes.append((dims[d_t], rts))
    expected = 8 * sum(int(np.prod(s)) for s in shapes)
    if len(buf) != expected:
        raise SfEttFileError(
            f"payload length {len(buf)} does not match header shapes ({expected} expected)"
        )

    arrays = []
    for s in shapes:
        nbytes = 8 * int(np.prod(s))
        arrays.append(
            np.frombuffer(buf[:nbytes], dtype="<f8").astype(np.float64).reshape(s, order="F")
        )
        buf = buf[nbytes:]
    cores = arrays[:d]
    factors = arrays[d : d + d_t]
    shared = arrays[d + d_t]
    return SfEttTensor(cores, factors, shared, d_t)


def save(path, x: SfEttTensor) -> None:
    with open(path, "wb") as f:
        f.write(to_bytes(x))


def load(path) -> SfEttTensor:
    with open(path, "rb") as f:
        return from_bytes(f.read())
