"""Dense operators on ordered, labelled tensor legs.

Composite indices are row-major in the listed leg order (first leg slowest),
matching ``np.kron`` and ``ndarray.reshape``.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "Kind", "Space", "Operator", "IndexMask", "embed", "compose",
    "partial_trace_weighted", "residual", "identity", "write_dump", "read_dump",
    "write_sidecar", "read_sidecar",
]


class Kind(str, Enum):
    OSC1 = "osc1"
    OSC2 = "osc2"
    VERMA = "verma"
    FUNDAMENTAL = "fundamental"
    SPIN_SITE = "spin_site"


@dataclass(frozen=True)
class Space:
    label: str
    dim: int
    kind: Kind
    params: tuple = ()

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"space {self.label!r}: dim must be >= 1")
        if self.kind in (Kind.FUNDAMENTAL, Kind.SPIN_SITE) and self.dim != 2:
            raise ValueError(f"space {self.label!r}: {self.kind.value} spaces have dim 2")
        object.__setattr__(self, "kind", Kind(self.kind))

    def relabel(self, label: str) -> "Space":
        return Space(label, self.dim, self.kind, self.params)


def _check_spaces(spaces: Sequence[Space]) -> tuple[Space, ...]:
    spaces = tuple(spaces)
    labels = [s.label for s in spaces]
    if len(set(labels)) != len(labels):
        raise ValueError(f"duplicate leg labels: {labels}")
    return spaces


@dataclass(frozen=True, eq=False)
class Operator:
    spaces: tuple[Space, ...]
    data: np.ndarray

    def __post_init__(self):
        spaces = _check_spaces(self.spaces)
        data = np.array(self.data, dtype=complex)
        n = int(np.prod([s.dim for s in spaces])) if spaces else 1
        if data.shape != (n, n):
            raise ValueError(f"matrix shape {data.shape} does not match leg dims {[s.dim for s in spaces]}")
        data.setflags(write=False)
        object.__setattr__(self, "spaces", spaces)
        object.__setattr__(self, "data", data)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(s.label for s in self.spaces)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(s.dim for s in self.spaces)

    def space(self, label: str) -> Space:
        for s in self.spaces:
            if s.label == label:
                return s
        raise KeyError(f"leg {label!r} not found in {self.labels}")

    def _same(self, other: "Operator") -> None:
        if self.labels != other.labels or self.dims != other.dims:
            raise ValueError(f"space-list mismatch: {self.labels}{self.dims} vs {other.labels}{other.dims}")

    def __matmul__(self, other: "Operator") -> "Operator":
        self._same(other)
        return Operator(self.spaces, self.data @ other.data)

    def __add__(self, other: "Operator") -> "Operator":
        self._same(other)
        return Operator(self.spaces, self.data + other.data)

    def __sub__(self, other: "Operator") -> "Operator":
        self._same(other)
        return Operator(self.spaces, self.data - other.data)

    def __neg__(self) -> "Operator":
        return Operator(self.spaces, -self.data)

    def __mul__(self, c) -> "Operator":
        return Operator(self.spaces, c * self.data)

    __rmul__ = __mul__

    def __truediv__(self, c) -> "Operator":
        return Operator(self.spaces, self.data / c)

    def inv(self) -> "Operator":
        return Operator(self.spaces, np.linalg.inv(self.data))

    def diag(self) -> np.ndarray:
        return np.diag(self.data).copy()

    def is_diagonal(self) -> bool:
        return not (self.data - np.diag(np.diag(self.data))).any()

    def commutator(self, other: "Operator", coeff: complex = 1) -> "Operator":
        """``[A, B]_c = AB - c BA``."""
        return self @ other - coeff * (other @ self)


def identity(spaces: Sequence[Space]) -> Operator:
    n = int(np.prod([s.dim for s in spaces]))
    return Operator(tuple(spaces), np.eye(n, dtype=complex))


def embed(op: Operator, target_spaces: Sequence[Space]) -> Operator:
    """Extend ``op`` by identities onto ``target_spaces`` (matched by label)."""
    target = _check_spaces(target_spaces)
    tlabels = [s.label for s in target]
    pos = []
    for s in op.spaces:
        if s.label not in tlabels:
            raise KeyError(f"leg {s.label!r} not found in target {tlabels}")
        t = target[tlabels.index(s.label)]
        if t.dim != s.dim:
            raise ValueError(f"dimension mismatch on leg {s.label!r}: {s.dim} vs {t.dim}")
        pos.append(tlabels.index(s.label))
    rest = [i for i in range(len(target)) if i not in pos]
    rest_dim = int(np.prod([target[i].dim for i in rest])) if rest else 1
    full = np.kron(op.data, np.eye(rest_dim))
    order = pos + rest  # current leg order of `full`
    dims = [target[i].dim for i in order]
    k = len(order)
    t = full.reshape(dims + dims)
    perm = [order.index(i) for i in range(k)]
    t = t.transpose(perm + [p + k for p in perm])
    n = int(np.prod([s.dim for s in target]))
    return Operator(target, t.reshape(n, n))


def compose(ops: Iterable[Operator]) -> Operator:
    ops = list(ops)
    if not ops:
        raise ValueError("nothing to compose")
    out = ops[0]
    for o in ops[1:]:
        out = out @ o
    return out


def partial_trace_weighted(op: Operator, leg: str, weight: Operator | None = None) -> Operator:
    """``Tr_leg(op @ embed(weight))`` as an operator on the remaining legs."""
    labels = op.labels
    if leg not in labels:
        raise KeyError(f"leg {leg!r} not found in {labels}")
    i = labels.index(leg)
    dims = list(op.dims)
    k = len(dims)
    t = op.data.reshape(dims + dims)
    if weight is not None:
        if weight.labels != (leg,):
            raise ValueError(f"weight must act on exactly leg {leg!r}, got {weight.labels}")
        # contract the column index of `leg` with the weight's row index
        t = np.tensordot(t, weight.data, axes=([k + i], [0]))
        t = np.moveaxis(t, -1, k + i)
    t = np.trace(t, axis1=i, axis2=k + i)
    rest = [s for s in op.spaces if s.label != leg]
    n = int(np.prod([s.dim for s in rest])) if rest else 1
    return Operator(tuple(rest), t.reshape(n, n))


@dataclass(frozen=True)
class IndexMask:
    """Predicate on composite basis multi-indices, keyed by leg label."""

    predicate: Callable[[Mapping[str, np.ndarray]], np.ndarray]
    description: str = "full"

    @classmethod
    def full(cls) -> "IndexMask":
        return cls(lambda idx: np.ones_like(next(iter(idx.values())), dtype=bool), "full")

    @classmethod
    def fock_max(cls, label: str, nmax: int) -> "IndexMask":
        return cls(lambda idx: idx[label] <= nmax, f"{label} <= {nmax}")

    @classmethod
    def total_degree(cls, labels: Sequence[str], smax: int) -> "IndexMask":
        labels = tuple(labels)
        return cls(lambda idx: sum(idx[l] for l in labels) <= smax,
                   f"{'+'.join(labels)} <= {smax}")

    def __and__(self, other: "IndexMask") -> "IndexMask":
        return IndexMask(lambda idx: self.predicate(idx) & other.predicate(idx),
                         f"({self.description}) & ({other.description})")

    def select(self, spaces: Sequence[Space]) -> np.ndarray:
        dims = [s.dim for s in spaces]
        grids = np.indices(dims).reshape(len(dims), -1)
        sel = np.asarray(self.predicate({s.label: g for s, g in zip(spaces, grids)}), dtype=bool)
        if not sel.any():
            raise ValueError(f"empty mask: {self.description}")
        return sel


def residual(a: Operator, b: Operator, mask: IndexMask | None = None) -> float:
    """Max entry of ``|a - b|`` over masked columns, scaled by ``1 + max|a| + max|b|``."""
    a._same(b)
    cols = (mask or IndexMask.full()).select(a.spaces)
    A, B = a.data[:, cols], b.data[:, cols]
    diff = np.abs(A - B).max()
    return float(diff / (1 + np.abs(A).max() + np.abs(B).max()))


# --- binary dump -----------------------------------------------------------

MAGIC = b"QLOP"
DUMP_VERSION = 1


def write_dump(op: Operator, path: str | Path) -> Path:
    path = Path(path)
    buf = bytearray(MAGIC)
    buf += struct.pack("<II", DUMP_VERSION, len(op.spaces))
    for s in op.spaces:
        lab = s.label.encode()
        if len(lab) > 255:
            raise ValueError("leg label too long")
        buf += struct.pack("<B", len(lab)) + lab + struct.pack("<I", s.dim)
    payload = np.ascontiguousarray(op.data, dtype="<c16")
    buf += payload.tobytes()
    path.write_bytes(bytes(buf))
    return path


def read_dump(path: str | Path, kinds: Sequence[Kind | str] | None = None) -> Operator:
    """Inverse of :func:`write_dump`. The format stores no leg kinds; pass them
    (e.g. from the sidecar's ``legN.kind`` keys) or dim 2 reads as fundamental
    and anything else as Verma."""
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise ValueError("not a QLOP dump")
    version, nlegs = struct.unpack_from("<II", raw, 4)
    if version != DUMP_VERSION:
        raise ValueError(f"unsupported dump version {version}")
    if kinds is not None and len(kinds) != nlegs:
        raise ValueError(f"got {len(kinds)} leg kinds for {nlegs} legs")
    off = 12
    spaces = []
    for _ in range(nlegs):
        (n,) = struct.unpack_from("<B", raw, off)
        label = raw[off + 1:off + 1 + n].decode()
        (dim,) = struct.unpack_from("<I", raw, off + 1 + n)
        off += 5 + n
        if kinds is not None:
            kind = Kind(kinds[len(spaces)])
        else:
            kind = Kind.FUNDAMENTAL if dim == 2 else Kind.VERMA
        spaces.append(Space(label, dim, kind))
    total = int(np.prod([s.dim for s in spaces])) if spaces else 1
    data = np.frombuffer(raw, dtype="<c16", offset=off)
    if data.size != total * total:
        raise ValueError(f"payload has {data.size} entries, expected {total * total}")
    return Operator(tuple(spaces), data.reshape(total, total))


def write_sidecar(params: Mapping[str, object], path: str | Path) -> Path:
    """``key=value`` lines, sorted by key."""
    path = Path(path)
    path.write_text("".join(f"{k}={params[k]}\n" for k in sorted(params)))
    return path


def read_sidecar(path: str | Path) -> dict[str, str]:
    out = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        k, _, v = line.partition("=")
        out[k.strip()] = v.strip()
    return out
