"""Core data types: weight tables, LSB-first bit paths, and the random stream."""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field
from typing import IO, Iterable

import numpy as np

GENERATOR_NAME = "numpy.random.PCG64"


class ValidationError(ValueError):
    """Weights are negative, non-finite, or sum to zero."""


class FormatError(ValueError):
    """Input could not be parsed under the requested format."""


def depth_for(n_max: int) -> int:
    """Least d with 2**d >= n_max + 1 (0 for a single-point support)."""
    if n_max < 0:
        raise ValueError(f"n_max must be non-negative, got {n_max}")
    return int(n_max).bit_length()


@dataclass(frozen=True)
class BitPath:
    """Bits (n_1, ..., n_d), least significant first."""

    bits: tuple[int, ...]

    def __post_init__(self):
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError(f"bits must be 0 or 1, got {self.bits}")

    @property
    def depth(self) -> int:
        return len(self.bits)

    def value(self) -> int:
        return sum(b << j for j, b in enumerate(self.bits))

    def prefix(self, length: int) -> "BitPath":
        return BitPath(self.bits[:length])


def encode(i: int, d: int) -> BitPath:
    if not 0 <= i < (1 << d):
        raise ValueError(f"index {i} out of range for depth {d}")
    return BitPath(tuple((i >> j) & 1 for j in range(d)))


def decode(path: BitPath) -> int:
    return path.value()


@dataclass(frozen=True)
class WeightTable:
    """Non-negative weights over {0, ..., N} with a positive pairwise total.

    ``normalized`` records that the caller asserts the weights sum to one; it
    only changes how the inverse-transform baselines scale their variate.
    """

    weights: np.ndarray
    normalized: bool = False
    total: float = field(init=False)

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64).ravel()
        if w.size < 1:
            raise ValidationError("weight table must have at least one entry")
        if not np.all(np.isfinite(w)):
            raise ValidationError("weights must be finite")
        if np.any(w < 0):
            raise ValidationError(f"negative weight at index {int(np.argmax(w < 0))}")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        total = pairwise_total(w)
        if not total > 0:
            raise ValidationError("weights must have a positive total")
        object.__setattr__(self, "total", total)

    @classmethod
    def strict(cls, weights, normalized: bool = False) -> "WeightTable":
        """Like the constructor but also rejects zero entries."""
        table = cls(weights, normalized=normalized)
        if np.any(table.weights == 0):
            raise ValidationError("strict mode requires every weight to be positive")
        return table

    @property
    def n_max(self) -> int:
        return self.weights.size - 1

    @property
    def depth(self) -> int:
        return depth_for(self.n_max)

    def probabilities(self) -> np.ndarray:
        return self.weights / self.total

    def scaled(self, factor: float) -> "WeightTable":
        return WeightTable(self.weights * factor, normalized=False)

    def __len__(self):
        return self.weights.size


def pairwise_total(weights: np.ndarray) -> float:
    """Total of ``weights`` summed in the stride-pairing order of the tree.

    Equal bit-for-bit to the root of a pairwise tree built from the same
    weights.
    """
    d = depth_for(weights.size - 1)
    level = np.zeros(1 << d, dtype=weights.dtype)
    level[: weights.size] = weights
    while level.size > 1:
        half = level.size // 2
        level = level[:half] + level[half:]
    return float(level[0])


def _reject_nonfinite_token(token: str) -> float:
    value = float(token)
    if not math.isfinite(value):
        raise FormatError(f"non-finite weight token {token!r}")
    return value


def parse_plain(text: str) -> list[float]:
    values = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            values.append(_reject_nonfinite_token(line))
        except ValueError as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(f"line {lineno}: cannot parse {line!r} as a number") from None
    return values


def _no_constants(name):
    raise FormatError(f"non-finite weight token {name!r}")


def load_weights(source: IO | bytes | str, format: str = "plain") -> WeightTable:
    """Read a weight table from a byte stream, bytes, or text.

    ``plain``: one decimal weight per line, ``#`` comments allowed.
    ``json``: ``{"weights": [...], "normalized": bool}``.
    """
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        try:
            source = source.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise FormatError(f"input is not UTF-8: {exc}") from None

    if format == "plain":
        return WeightTable(parse_plain(source))
    if format == "json":
        try:
            doc = json.loads(source, parse_constant=_no_constants)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid JSON: {exc}") from None
        if not isinstance(doc, dict) or not isinstance(doc.get("weights"), list):
            raise FormatError('JSON input must be an object with a "weights" list')
        weights = doc["weights"]
        if not all(isinstance(w, (int, float)) and not isinstance(w, bool) for w in weights):
            raise FormatError("JSON weights must all be numbers")
        return WeightTable(weights, normalized=bool(doc.get("normalized", False)))
    raise FormatError(f"unknown weight format {format!r}")


def dump_plain(table: WeightTable) -> str:
    buf = io.StringIO()
    for w in table.weights:
        buf.write(f"{w!r}\n")
    return buf.getvalue()


_INV_2_53 = 2.0**-53


class RngStream:
    """Seeded uniform variates strictly inside (0, 1).

    Each variate is ``(k + 0.5) / 2**53`` where ``k`` is the top 53 bits of
    one raw 64-bit PCG64 output, so a batch of ``n`` variates equals ``n``
    single draws and the stream is identical on every platform.
    """

    generator = GENERATOR_NAME

    def __init__(self, seed: int):
        if not 0 <= seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        self.seed = int(seed)
        self._bitgen = np.random.PCG64(self.seed)
        self.draw_count = 0

    def uniforms(self, n: int) -> np.ndarray:
        raw = self._bitgen.random_raw(n)
        self.draw_count += n
        return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * _INV_2_53

    def uniform(self) -> float:
        return float(self.uniforms(1)[0])

    def bernoulli(self, rho: float) -> int:
        return int(self.uniform() < rho)

    def spawn(self, n: int) -> list["RngStream"]:
        """Independent child streams derived from this stream's seed."""
        children = np.random.SeedSequence(self.seed).spawn(n)
        return [RngStream(int(c.generate_state(1, dtype=np.uint64)[0])) for c in children]

    def identity(self) -> dict:
        return {"generator": self.generator, "numpy": np.__version__, "seed": self.seed}


class ScriptedStream:
    """Replays a fixed list of variates; used to force coin outcomes."""

    generator = "scripted"

    def __init__(self, values: Iterable[float]):
        self._values = list(values)
        self._pos = 0
        self.draw_count = 0
        self.seed = 0

    def uniforms(self, n: int) -> np.ndarray:
        if self._pos + n > len(self._values):
            raise RuntimeError("scripted stream exhausted")
        out = np.asarray(self._values[self._pos : self._pos + n], dtype=np.float64)
        self._pos += n
        self.draw_count += n
        return out

    def uniform(self) -> float:
        return float(self.uniforms(1)[0])

    def bernoulli(self, rho: float) -> int:
        return int(self.uniform() < rho)

    @property
    def remaining(self) -> int:
        return len(self._values) - self._pos


def forcing_variate(bit: int, rho: float) -> float:
    """A variate in (0, 1) that makes ``bernoulli(rho)`` return ``bit``."""
    if bit:
        if rho <= 0:
            raise ValueError("cannot force a 1 when rho is 0")
        return rho / 2
    if rho >= 1:
        raise ValueError("cannot force a 0 when rho is 1")
    return (1 + rho) / 2
