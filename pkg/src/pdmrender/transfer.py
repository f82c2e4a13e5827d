"""Transfer functions, intensity partition schemes, and partition selection.

A transfer function is an RGBA lookup table with one entry per representable
intensity (length 2^bits). Partition schemes split that intensity range into
contiguous, covering, non-overlapping partitions; selection picks the 1-based
partitions whose range contains at least one intensity with nonzero opacity.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

TF_ARCHETYPES = ("tf1", "tf2", "tf3", "tf4")
TF_FIXTURES = ("tf5", "tf6")


class TransferFunctionError(ValueError):
    """Invalid transfer function definition."""


class SchemeError(ValueError):
    """Invalid partition scheme request."""


class SelectionError(ValueError):
    """Partition selection indices outside the scheme."""


def _bits_for_length(length: int) -> int:
    bits = int(length).bit_length() - 1
    if length < 2 or (1 << bits) != length:
        raise TransferFunctionError(
            f"lut length must be a power of two >= 2, got {length}"
        )
    return bits


@dataclass(frozen=True)
class TransferFunction:
    """An RGBA lookup table; channels are floats in [0, 1]."""

    lut: np.ndarray  # shape (2^bits, 4), float64
    control_points: tuple[tuple[float, ...], ...] | None = None

    def __post_init__(self) -> None:
        lut = np.asarray(self.lut, dtype=np.float64)
        if lut.ndim != 2 or lut.shape[1] != 4:
            raise TransferFunctionError(f"lut must have shape (L, 4), got {lut.shape}")
        _bits_for_length(lut.shape[0])
        if np.any(lut < 0.0) or np.any(lut > 1.0):
            raise TransferFunctionError("lut channels must lie in [0, 1]")
        object.__setattr__(self, "lut", lut)

    @property
    def bits(self) -> int:
        return _bits_for_length(self.lut.shape[0])

    @property
    def alpha(self) -> np.ndarray:
        return self.lut[:, 3]

    def nonzero_support(self) -> np.ndarray:
        """Intensities with alpha strictly greater than zero."""
        return np.flatnonzero(self.lut[:, 3] > 0.0)


def bake_lut(
    control_points: Sequence[Sequence[float]],
    bits: int,
) -> TransferFunction:
    """Linearly interpolate RGBA control points into a full lookup table.

    Each control point is (intensity, r, g, b, a). Intensities must be
    strictly increasing with endpoints at 0 and 2^bits - 1.
    """
    if bits < 1 or bits > 16:
        raise TransferFunctionError(f"bits must be in [1, 16], got {bits}")
    pts = [tuple(float(v) for v in p) for p in control_points]
    if len(pts) < 2:
        raise TransferFunctionError("need at least two control points")
    if any(len(p) != 5 for p in pts):
        raise TransferFunctionError("control points must be (intensity, r, g, b, a)")
    length = 1 << bits
    xs = np.array([p[0] for p in pts])
    if np.any(np.diff(xs) <= 0):
        raise TransferFunctionError("control point intensities must be strictly increasing")
    if xs[0] != 0.0 or xs[-1] != float(length - 1):
        raise TransferFunctionError(
            f"control points must span [0, {length - 1}], got [{xs[0]}, {xs[-1]}]"
        )
    chan = np.array([p[1:] for p in pts])
    if np.any(chan < 0.0) or np.any(chan > 1.0):
        raise TransferFunctionError("control point channels must lie in [0, 1]")
    grid = np.arange(length, dtype=np.float64)
    lut = np.column_stack([np.interp(grid, xs, chan[:, c]) for c in range(4)])
    return TransferFunction(lut=lut, control_points=tuple(pts))


@dataclass(frozen=True)
class Partition:
    """A contiguous inclusive intensity range [rho_lo, rho_hi]."""

    rho_lo: int
    rho_hi: int

    def __post_init__(self) -> None:
        if self.rho_lo < 0 or self.rho_hi < self.rho_lo:
            raise SchemeError(f"bad partition bounds [{self.rho_lo}, {self.rho_hi}]")

    @property
    def width(self) -> int:
        return self.rho_hi - self.rho_lo + 1

    def contains(self, intensity: int) -> bool:
        return self.rho_lo <= intensity <= self.rho_hi


@dataclass(frozen=True)
class PartitionScheme:
    """An ordered list of partitions covering [0, 2^bits - 1] without gaps."""

    partitions: tuple[Partition, ...]

    def __post_init__(self) -> None:
        parts = tuple(self.partitions)
        if not parts:
            raise SchemeError("scheme needs at least one partition")
        if parts[0].rho_lo != 0:
            raise SchemeError("first partition must start at intensity 0")
        for prev, cur in zip(parts, parts[1:]):
            if cur.rho_lo != prev.rho_hi + 1:
                raise SchemeError(
                    f"partitions must be contiguous; [{prev.rho_lo},{prev.rho_hi}] "
                    f"then [{cur.rho_lo},{cur.rho_hi}]"
                )
        try:
            _bits_for_length(parts[-1].rho_hi + 1)
        except TransferFunctionError as exc:
            raise SchemeError(
                f"scheme must cover a full 2^bits range, ends at {parts[-1].rho_hi}"
            ) from exc
        object.__setattr__(self, "partitions", parts)

    @property
    def n(self) -> int:
        return len(self.partitions)

    @property
    def intensity_span(self) -> int:
        return self.partitions[-1].rho_hi + 1

    @property
    def bits(self) -> int:
        return _bits_for_length(self.intensity_span)

    def partition_of(self, intensity: int) -> int:
        """1-based index of the partition containing an intensity."""
        if intensity < 0 or intensity >= self.intensity_span:
            raise SchemeError(f"intensity {intensity} outside [0, {self.intensity_span - 1}]")
        return int(self.pid_lut()[intensity]) + 1

    def pid_lut(self) -> np.ndarray:
        """0-based partition index per intensity, shape (2^bits,), int32."""
        widths = [p.width for p in self.partitions]
        return np.repeat(np.arange(self.n, dtype=np.int32), widths)

    def bounds(self) -> list[tuple[int, int]]:
        return [(p.rho_lo, p.rho_hi) for p in self.partitions]


@dataclass(frozen=True)
class PartitionSelection:
    """The 1-based indices of partitions a transfer function touches."""

    selected: frozenset[int]
    n: int

    def __post_init__(self) -> None:
        sel = frozenset(int(i) for i in self.selected)
        if any(i < 1 or i > self.n for i in sel):
            raise SelectionError(f"selection {sorted(sel)} outside [1, {self.n}]")
        object.__setattr__(self, "selected", sel)

    @property
    def sorted(self) -> list[int]:
        return sorted(self.selected)

    def __len__(self) -> int:
        return len(self.selected)

    def __contains__(self, index: int) -> bool:
        return index in self.selected


def _near_uniform_widths(total: int, n: int) -> list[int]:
    base, rem = divmod(total, n)
    return [base + 1 if i < rem else base for i in range(n)]


def scheme_uniform(n: int, bits: int) -> PartitionScheme:
    """Split [0, 2^bits - 1] into n near-uniform contiguous partitions.

    When n does not divide the range, earlier partitions are one wider.
    """
    length = 1 << bits
    if bits < 1 or bits > 16:
        raise SchemeError(f"bits must be in [1, 16], got {bits}")
    if n < 1 or n > length:
        raise SchemeError(f"partition count must be in [1, {length}], got {n}")
    parts = []
    lo = 0
    for w in _near_uniform_widths(length, n):
        parts.append(Partition(lo, lo + w - 1))
        lo += w
    return PartitionScheme(tuple(parts))


def scheme_with_min_special(n: int, bits: int, rho_min: int) -> PartitionScheme:
    """Partition 1 is exactly [0, rho_min]; the rest split the remainder near-uniformly.

    Dedicating a partition to the background value lets selection drop it
    independently of the far smaller structures elsewhere in the range.
    """
    length = 1 << bits
    if bits < 1 or bits > 16:
        raise SchemeError(f"bits must be in [1, 16], got {bits}")
    if n < 2:
        raise SchemeError(f"need at least 2 partitions, got {n}")
    if rho_min < 0 or rho_min >= length:
        raise SchemeError(f"rho_min {rho_min} outside [0, {length - 1}]")
    if rho_min >= length - n + 1:
        raise SchemeError(
            f"rho_min {rho_min} leaves fewer than {n - 1} intensities for the "
            f"remaining partitions"
        )
    parts = [Partition(0, rho_min)]
    lo = rho_min + 1
    for w in _near_uniform_widths(length - lo, n - 1):
        parts.append(Partition(lo, lo + w - 1))
        lo += w
    return PartitionScheme(tuple(parts))


def select_partitions(tf: TransferFunction, scheme: PartitionScheme) -> PartitionSelection:
    """Partitions whose intensity range holds at least one alpha > 0 entry."""
    if tf.lut.shape[0] != scheme.intensity_span:
        raise SelectionError(
            f"tf covers {tf.lut.shape[0]} intensities but scheme spans "
            f"{scheme.intensity_span}"
        )
    nz = tf.lut[:, 3] > 0.0
    hit = {int(pid) + 1 for pid in np.unique(scheme.pid_lut()[nz])}
    return PartitionSelection(selected=frozenset(hit), n=scheme.n)


def _ramp(length: int) -> np.ndarray:
    return np.arange(length, dtype=np.float64) / (length - 1)


def tf_archetype(kind: str, bits: int = 8) -> TransferFunction:
    """Canonical opacity shapes used across tests and benchmarks.

    tf1: zero only at intensity 0; tf2: nonzero everywhere; tf3: nonzero on
    the upper half; tf4: nonzero on the second and fourth quarters.
    """
    kind = kind.lower()
    if kind not in TF_ARCHETYPES:
        raise TransferFunctionError(
            f"unknown archetype {kind!r}; expected one of {TF_ARCHETYPES}"
        )
    length = 1 << bits
    t = _ramp(length)
    support = np.zeros(length, dtype=bool)
    if kind == "tf1":
        support[1:] = True
    elif kind == "tf2":
        support[:] = True
    elif kind == "tf3":
        support[length // 2 :] = True
    else:  # tf4
        support[length // 4 : length // 2] = True
        support[3 * length // 4 :] = True
    lut = np.zeros((length, 4), dtype=np.float64)
    lut[support, 0] = t[support]
    lut[support, 1] = 1.0 - 0.5 * t[support]
    lut[support, 2] = 0.25 + 0.5 * (1.0 - t[support])
    lut[support, 3] = 0.05 + 0.45 * t[support]
    return TransferFunction(lut=lut)


def tf_to_json(tf: TransferFunction) -> str:
    """Serialize a transfer function; control points when known, else the lut."""
    if tf.control_points is not None:
        obj = {
            "bits": tf.bits,
            "control_points": [
                {"intensity": p[0], "r": p[1], "g": p[2], "b": p[3], "a": p[4]}
                for p in tf.control_points
            ],
        }
    else:
        obj = {"bits": tf.bits, "lut": [[float(c) for c in row] for row in tf.lut]}
    return json.dumps(obj, indent=2)


def tf_from_json(source: str | dict) -> TransferFunction:
    """Parse a transfer function from a JSON string or already-decoded object."""
    if isinstance(source, str):
        try:
            obj = json.loads(source)
        except json.JSONDecodeError as exc:
            raise TransferFunctionError(f"malformed transfer function JSON: {exc}") from exc
    else:
        obj = source
    if not isinstance(obj, dict):
        raise TransferFunctionError("transfer function JSON must be an object")
    if "control_points" in obj:
        if "bits" not in obj:
            raise TransferFunctionError("control_points form requires 'bits'")
        pts = [
            (p["intensity"], p["r"], p["g"], p["b"], p["a"])
            for p in obj["control_points"]
        ]
        return bake_lut(pts, int(obj["bits"]))
    if "lut" in obj:
        return TransferFunction(lut=np.asarray(obj["lut"], dtype=np.float64))
    raise TransferFunctionError("transfer function JSON needs 'control_points' or 'lut'")


def load_tf_file(path: str | Path) -> TransferFunction:
    return tf_from_json(Path(path).read_text())


def fixture_tf(name: str) -> TransferFunction:
    """Packaged multi-bump fixtures (tf5, tf6) for CT-style feature bands."""
    name = name.lower()
    if name not in TF_FIXTURES:
        raise TransferFunctionError(f"unknown fixture {name!r}; expected one of {TF_FIXTURES}")
    payload = resources.files("pdmrender.data").joinpath(f"{name}.json").read_text()
    return tf_from_json(payload)
