"""Sampled phase-space functions on uniform rectangular grids.

File layout written by :meth:`GridFunction.save`::

    NCPHASE-GRID 1
    ndim <d>
    axis <min> <max> <count>        (one line per axis)
    dtype <float64|complex128>
    meta <json object>
    end
    <row-major little-endian samples>

The header is plain ASCII so ``head`` shows the grid geometry.
"""
from __future__ import annotations

import io
import json
from dataclasses import dataclass, field
from typing import Sequence, Tuple

import numpy as np
from scipy.integrate import trapezoid

MAGIC = "NCPHASE-GRID 1"

Axis = Tuple[float, float, int]


def is_power_of_two(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


@dataclass(frozen=True)
class GridFunction:
    """Samples on the tensor grid spanned by ``linspace(min, max, count)`` per axis.

    Both endpoints are grid points.  ``meta`` carries free-form parameters
    that travel with the file (quantum numbers, deformation values, ...).
    """

    axes: Tuple[Axis, ...]
    samples: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        axes = tuple((float(lo), float(hi), int(n)) for lo, hi, n in self.axes)
        for lo, hi, n in axes:
            if n < 2 or not hi > lo:
                raise ValueError(f"invalid axis ({lo}, {hi}, {n})")
        samples = np.asarray(self.samples)
        if samples.dtype.kind not in "fc":
            samples = samples.astype(float)
        if samples.shape != tuple(n for _, _, n in axes):
            raise ValueError(f"samples shape {samples.shape} does not match axes {axes}")
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "samples", samples)

    # construction --------------------------------------------------------
    @classmethod
    def from_callable(cls, f, axes: Sequence[Axis], meta=None) -> "GridFunction":
        """Sample ``f(*coordinate_arrays)`` with open-mesh broadcasting."""
        axes = tuple((float(lo), float(hi), int(n)) for lo, hi, n in axes)
        coords = np.meshgrid(*[np.linspace(*ax) for ax in axes], indexing="ij", sparse=True)
        values = np.broadcast_to(f(*coords), tuple(n for _, _, n in axes))
        return cls(axes, np.array(values), dict(meta or {}))

    @classmethod
    def symmetric(cls, f, dim: int, extent: float, points: int, meta=None) -> "GridFunction":
        return cls.from_callable(f, [(-extent, extent, points)] * dim, meta)

    def with_samples(self, samples) -> "GridFunction":
        return GridFunction(self.axes, samples, dict(self.meta))

    # geometry ------------------------------------------------------------
    @property
    def ndim(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.samples.shape

    @property
    def spacing(self) -> np.ndarray:
        return np.array([(hi - lo) / (n - 1) for lo, hi, n in self.axes])

    def coordinates(self):
        return [np.linspace(*ax) for ax in self.axes]

    def mesh(self, sparse: bool = True):
        return np.meshgrid(*self.coordinates(), indexing="ij", sparse=sparse)

    def same_grid(self, other: "GridFunction") -> bool:
        return self.axes == other.axes

    def require_same_grid(self, other: "GridFunction"):
        if not self.same_grid(other):
            raise ValueError("grid functions live on different grids")

    def boundary_max(self) -> float:
        """Largest ``|sample|`` on the outer faces of the grid."""
        s = np.abs(self.samples)
        return float(max(max(np.take(s, 0, axis=i).max(), np.take(s, -1, axis=i).max()) for i in range(self.ndim)))

    # numerics ------------------------------------------------------------
    def integral(self):
        """Trapezoid rule over every axis; real for real samples."""
        out = self.samples
        for ax in reversed(self.coordinates()):
            out = trapezoid(out, ax, axis=-1)
        return out.item() if np.ndim(out) == 0 else out

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.samples)))

    def __add__(self, other):
        if isinstance(other, GridFunction):
            self.require_same_grid(other)
            other = other.samples
        return self.with_samples(self.samples + other)

    def __sub__(self, other):
        if isinstance(other, GridFunction):
            self.require_same_grid(other)
            other = other.samples
        return self.with_samples(self.samples - other)

    def __mul__(self, other):
        if isinstance(other, GridFunction):
            self.require_same_grid(other)
            other = other.samples
        return self.with_samples(self.samples * other)

    __rmul__ = __mul__

    # serialization -------------------------------------------------------
    def header(self) -> str:
        dtype = "complex128" if np.iscomplexobj(self.samples) else "float64"
        lines = [MAGIC, f"ndim {self.ndim}"]
        lines += [f"axis {lo!r} {hi!r} {n}" for lo, hi, n in self.axes]
        lines += [f"dtype {dtype}", "meta " + json.dumps(self.meta, sort_keys=True), "end"]
        return "\n".join(lines) + "\n"

    def to_bytes(self) -> bytes:
        dtype = "<c16" if np.iscomplexobj(self.samples) else "<f8"
        return self.header().encode("ascii") + np.ascontiguousarray(self.samples, dtype=dtype).tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "GridFunction":
        stream = io.BytesIO(data)
        if stream.readline().decode("ascii").strip() != MAGIC:
            raise ValueError("not a grid file")
        ndim = int(stream.readline().decode("ascii").split()[1])
        axes = []
        for _ in range(ndim):
            tag, lo, hi, n = stream.readline().decode("ascii").split()
            if tag != "axis":
                raise ValueError("malformed axis line")
            axes.append((float(lo), float(hi), int(n)))
        dtype = {"float64": "<f8", "complex128": "<c16"}[stream.readline().decode("ascii").split()[1]]
        meta_line = stream.readline().decode("ascii")
        meta = json.loads(meta_line[len("meta "):])
        if stream.readline().decode("ascii").strip() != "end":
            raise ValueError("missing header terminator")
        shape = tuple(n for _, _, n in axes)
        payload = stream.read()
        expected = int(np.prod(shape)) * np.dtype(dtype).itemsize
        if len(payload) != expected:
            raise ValueError(f"payload has {len(payload)} bytes, expected {expected}")
        samples = np.frombuffer(payload, dtype=dtype).reshape(shape).astype(np.dtype(dtype).newbyteorder("="))
        return cls(tuple(axes), samples, meta)

    def save(self, path):
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def load(cls, path) -> "GridFunction":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())
