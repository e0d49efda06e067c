"""Dense n-plane bound tables, their monotone envelope and checkpoints."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

CHECKPOINT_VERSION = 1
CHECKPOINT_FORMAT = "eden-bounds-table"


class ChecksumError(ValueError):
    pass


def reachable_mask(shape: Sequence[int]) -> np.ndarray:
    """Boolean mask of reachable states over ``[0..c_0] x ... x [0..c_{n-1}]``.

    Plane 0 must be non-empty and no empty plane may precede a non-empty one.
    """
    dims = [c + 1 for c in shape]
    n = len(dims)
    grids = np.indices(dims, sparse=True)
    mask = np.broadcast_to(grids[0] >= 1, dims).copy()
    for m in range(1, n):
        mask &= ~((grids[m - 1] == 0) & (grids[m] > 0))
    return mask


def monotone_envelope(values: np.ndarray) -> np.ndarray:
    """Replace each reachable cell by the minimum over reachable cells <= it.

    A cluster configuration with more infected sites in every plane is never
    slower, so any bound at a smaller state also bounds a larger one.
    Unreachable cells stay 0.
    """
    mask = reachable_mask([c - 1 for c in values.shape])
    env = np.where(mask, values, np.inf)
    for axis in range(env.ndim):
        np.minimum.accumulate(env, axis=axis, out=env)
    return np.where(mask, env, 0.0)


@dataclass(frozen=True)
class BoundTableND:
    """Upper bounds over plane-size states ``(i_0, ..., i_{n-1})``.

    ``values`` has shape ``(shape[0]+1, ..., shape[-1]+1)``; the ``i_0 = 0``
    row and unreachable states hold 0.  ``box`` is the capacity vector of the
    sweep that produced the table, which may exceed ``shape`` when only a
    block was retained.
    """

    d: int
    n: int
    shape: tuple[int, ...]
    values: np.ndarray
    box: tuple[int, ...]

    def value(self, state: Sequence[int]) -> float:
        state = tuple(int(x) for x in state)
        if len(state) != self.n:
            raise ValueError(f"expected {self.n} indices, got {state}")
        if any(x < 0 or x > c for x, c in zip(state, self.shape)):
            raise IndexError(f"state {state} outside table shape {self.shape}")
        return float(self.values[state])

    @property
    def start_value(self) -> float:
        return self.value((1,) + (0,) * (self.n - 1))

    def _checksum(self) -> str:
        h = hashlib.sha256()
        h.update(json.dumps(self._header(), sort_keys=True).encode())
        h.update(np.ascontiguousarray(self.values, dtype="<f8").tobytes())
        return h.hexdigest()

    def _header(self) -> dict:
        return {"format": CHECKPOINT_FORMAT, "version": CHECKPOINT_VERSION,
                "d": self.d, "n": self.n, "shape": list(self.shape), "box": list(self.box)}

    def save(self, path: str | Path) -> None:
        header = dict(self._header(), sha256=self._checksum())
        with open(path, "wb") as fh:
            np.savez_compressed(fh, header=np.array(json.dumps(header)),
                                values=np.ascontiguousarray(self.values, dtype="<f8"))

    @classmethod
    def load(cls, path: str | Path) -> "BoundTableND":
        with np.load(path, allow_pickle=False) as z:
            header = json.loads(str(z["header"]))
            values = np.array(z["values"], dtype=np.float64)
        if header.get("format") != CHECKPOINT_FORMAT:
            raise ValueError(f"{path} is not a bound-table checkpoint")
        if header.get("version") != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {header.get('version')}")
        values.setflags(write=False)
        table = cls(d=header["d"], n=header["n"], shape=tuple(header["shape"]),
                    values=values, box=tuple(header["box"]))
        if values.shape != tuple(c + 1 for c in table.shape):
            raise ChecksumError(f"array shape {values.shape} disagrees with header {table.shape}")
        if table._checksum() != header["sha256"]:
            raise ChecksumError(f"checksum mismatch in {path}")
        return table
