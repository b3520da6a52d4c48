"""Uniform complex grids, multilinear interpolation and the QOZGRID1 file format.

Binary layout (little-endian)::

    offset  size  field
    0       8     magic b"QOZGRID1"
    8       8     uint64 rank (1..3)
    16      8     uint64 total node count
    24      40    reserved, zero
    64      24*r  per axis: float64 origin, float64 spacing, uint64 count
    ...     16*n  interleaved float64 (re, im), row-major
"""

from __future__ import annotations

import csv
import io
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"QOZGRID1"
HEADER_SIZE = 64
_AXIS = struct.Struct("<ddQ")


class GridBoundsError(ValueError):
    """A point lies outside the grid; ``axis`` names the offending axis."""

    def __init__(self, axis, value, lo, hi):
        super().__init__(f"coordinate {value!r} on axis {axis} outside [{lo}, {hi}]")
        self.axis = axis


@dataclass(frozen=True)
class Axis:
    origin: float
    spacing: float
    count: int

    def __post_init__(self):
        if not self.spacing > 0:
            raise ValueError(f"axis spacing must be positive, got {self.spacing}")
        if self.count < 1:
            raise ValueError(f"axis count must be positive, got {self.count}")

    @property
    def nodes(self):
        return self.origin + self.spacing * np.arange(self.count)

    @property
    def end(self):
        return self.origin + self.spacing * (self.count - 1)

    @classmethod
    def from_nodes(cls, nodes):
        nodes = np.asarray(nodes, dtype=float)
        if nodes.size == 1:
            return cls(float(nodes[0]), 1.0, 1)
        step = np.diff(nodes)
        if not np.allclose(step, step[0], rtol=1e-9, atol=0):
            raise ValueError("grid axes must be uniform")
        return cls(float(nodes[0]), float(step.mean()), nodes.size)

    @classmethod
    def symmetric(cls, half_width, count):
        """``count`` nodes spanning ``[-half_width, half_width]``."""
        return cls(-half_width, 2 * half_width / (count - 1), count)


class ComplexGrid:
    """Complex values on a uniform rectangular grid of rank 1 to 3."""

    def __init__(self, axes, data, names=None):
        axes = tuple(a if isinstance(a, Axis) else Axis(*a) for a in axes)
        if not 1 <= len(axes) <= 3:
            raise ValueError(f"grid rank must be 1..3, got {len(axes)}")
        data = np.asarray(data, dtype=complex)
        shape = tuple(a.count for a in axes)
        if data.size != int(np.prod(shape)):
            raise ValueError(f"data length {data.size} does not match axes {shape}")
        self.axes = axes
        self.data = data.reshape(shape)
        self.data.setflags(write=False)
        self.names = tuple(names) if names is not None else tuple(f"x{i}" for i in range(len(axes)))

    @property
    def rank(self):
        return len(self.axes)

    @property
    def shape(self):
        return self.data.shape

    def coordinates(self, i):
        return self.axes[i].nodes

    def __repr__(self):
        dims = ", ".join(f"{n}[{a.origin:g}:{a.end:g}; {a.count}]" for n, a in zip(self.names, self.axes))
        return f"ComplexGrid({dims})"

    def interpolate(self, points):
        """Multilinear interpolation at one point or an ``(n, rank)`` array of points."""
        pts = np.asarray(points, dtype=float)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        if pts.shape[-1] != self.rank:
            raise ValueError(f"points must have {self.rank} coordinates")
        result = np.zeros(pts.shape[0], dtype=complex)
        idx, frac = [], []
        for i, ax in enumerate(self.axes):
            x = pts[:, i]
            lo, hi = ax.origin, ax.end
            tol = 1e-12 * max(1.0, abs(lo), abs(hi))
            bad = (x < lo - tol) | (x > hi + tol) | ~np.isfinite(x)
            if np.any(bad):
                raise GridBoundsError(i, float(x[np.argmax(bad)]), lo, hi)
            if ax.count == 1:
                idx.append(np.zeros(x.size, dtype=int))
                frac.append(np.zeros(x.size))
                continue
            t = np.clip((x - lo) / ax.spacing, 0, ax.count - 1)
            j = np.minimum(np.floor(t).astype(int), ax.count - 2)
            idx.append(j)
            frac.append(t - j)
        for corner in np.ndindex(*(2,) * self.rank):
            weight = np.ones(pts.shape[0])
            index = []
            for i, c in enumerate(corner):
                if self.axes[i].count == 1:
                    if c:
                        weight = weight * 0
                    index.append(idx[i])
                    continue
                weight = weight * (frac[i] if c else 1 - frac[i])
                index.append(idx[i] + c)
            mask = weight != 0
            if np.any(mask):
                result[mask] += weight[mask] * self.data[tuple(ix[mask] for ix in index)]
        return result[0] if single else result

    # -- serialization -------------------------------------------------------

    def to_bytes(self):
        buf = io.BytesIO()
        head = MAGIC + struct.pack("<QQ", self.rank, self.data.size)
        buf.write(head.ljust(HEADER_SIZE, b"\0"))
        for ax in self.axes:
            buf.write(_AXIS.pack(ax.origin, ax.spacing, ax.count))
        inter = np.empty(self.data.size * 2, dtype="<f8")
        flat = self.data.ravel()
        inter[0::2] = flat.real
        inter[1::2] = flat.imag
        buf.write(inter.tobytes())
        return buf.getvalue()

    @classmethod
    def from_bytes(cls, blob):
        if blob[:8] != MAGIC:
            raise ValueError("not a QOZGRID1 file")
        rank, total = struct.unpack_from("<QQ", blob, 8)
        if not 1 <= rank <= 3:
            raise ValueError(f"bad rank {rank}")
        axes = [Axis(*_AXIS.unpack_from(blob, HEADER_SIZE + i * _AXIS.size)) for i in range(rank)]
        start = HEADER_SIZE + rank * _AXIS.size
        raw = np.frombuffer(blob, dtype="<f8", count=2 * total, offset=start)
        return cls(axes, raw[0::2] + 1j * raw[1::2])

    def save(self, path):
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path):
        return cls.from_bytes(Path(path).read_bytes())

    def to_csv(self, path_or_buffer):
        """One row per node: coordinates, real part, imaginary part (17 digits)."""
        close = False
        if isinstance(path_or_buffer, (str, Path)):
            fh = open(path_or_buffer, "w", newline="")
            close = True
        else:
            fh = path_or_buffer
        try:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow([*self.names, "re", "im"])
            mesh = np.meshgrid(*(a.nodes for a in self.axes), indexing="ij")
            cols = [m.ravel() for m in mesh] + [self.data.real.ravel(), self.data.imag.ravel()]
            for row in zip(*cols):
                writer.writerow([f"{v:.17g}" for v in row])
        finally:
            if close:
                fh.close()


def grid_interpolate(grid, point):
    """Multilinear interpolation of a :class:`ComplexGrid` at ``point``."""
    return grid.interpolate(point)
