"""Explicit binary linear codes and their weight-enumeration data."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import kernels
from .errors import ConfigError, SizeGuardError

MAX_ENUM_K = 28
MAX_MATERIALIZE_K = 16


def gf2_rank(matrix) -> int:
    a = np.array(matrix, dtype=np.uint8) % 2
    rows, cols = a.shape
    rank = 0
    for c in range(cols):
        pivot = np.nonzero(a[rank:, c])[0]
        if pivot.size == 0:
            continue
        p = rank + pivot[0]
        a[[rank, p]] = a[[p, rank]]
        others = np.nonzero(a[:, c])[0]
        others = others[others != rank]
        a[others] ^= a[rank]
        rank += 1
        if rank == rows:
            break
    return rank


def _systematic_positions(gen: np.ndarray):
    """Columns carrying an identity submatrix, one per row, or None."""
    k = gen.shape[0]
    positions = []
    for i in range(k):
        unit = np.zeros(k, dtype=np.uint8)
        unit[i] = 1
        hits = np.nonzero((gen.T == unit).all(axis=1))[0]
        if hits.size == 0:
            return None
        positions.append(int(hits[0]))
    return tuple(positions)


@dataclass(frozen=True, eq=False)
class LinearCode:
    """Binary linear block code given by a full-rank k x n generator matrix.

    ``info_positions`` lists, for each message bit, the codeword position that
    carries it verbatim. It is inferred when the generator contains identity
    columns and may be supplied explicitly otherwise.
    """

    generator: np.ndarray
    info_positions: tuple | None = None
    name: str = ""

    def __post_init__(self):
        gen = np.array(self.generator, dtype=np.uint8)
        if gen.ndim != 2 or gen.size == 0:
            raise ConfigError("generator must be a non-empty 2-D array")
        if np.any(gen > 1):
            raise ConfigError("generator entries must be 0 or 1")
        k, n = gen.shape
        if not 0 < k <= n:
            raise ConfigError(f"need 0 < k <= n, got k={k}, n={n}")
        if gf2_rank(gen) != k:
            raise ConfigError("generator rows are linearly dependent over GF(2)")
        gen.setflags(write=False)
        object.__setattr__(self, "generator", gen)
        info = self.info_positions
        if info is None:
            info = _systematic_positions(gen)
        elif len(info) != k or len(set(info)) != k or not all(0 <= p < n for p in info):
            raise ConfigError("info_positions must name k distinct codeword positions")
        elif gf2_rank(gen[:, list(info)]) != k:
            raise ConfigError("info_positions do not form an information set")
        object.__setattr__(self, "info_positions", None if info is None else tuple(int(p) for p in info))

    @property
    def k(self) -> int:
        return self.generator.shape[0]

    @property
    def n(self) -> int:
        return self.generator.shape[1]

    @property
    def rate(self) -> float:
        return self.k / self.n

    @property
    def rate_fraction(self) -> Fraction:
        return Fraction(self.k, self.n)

    def __eq__(self, other):
        if not isinstance(other, LinearCode):
            return NotImplemented
        return self.generator.shape == other.generator.shape and np.array_equal(self.generator, other.generator)

    def __hash__(self):
        return hash((self.generator.shape, self.generator.tobytes()))

    def __repr__(self):
        label = f" {self.name!r}" if self.name else ""
        return f"LinearCode{label}(n={self.n}, k={self.k})"

    @classmethod
    def from_rows(cls, rows, **kwargs) -> "LinearCode":
        return cls(np.array([[int(ch) for ch in r] for r in rows], dtype=np.uint8), **kwargs)

    @classmethod
    def repetition(cls, n: int) -> "LinearCode":
        return cls(np.ones((1, n), dtype=np.uint8), name=f"repetition({n})")

    @classmethod
    def hamming74(cls) -> "LinearCode":
        return cls.from_rows(["1000110", "0100101", "0010011", "0001111"], name="hamming(7,4)")

    @classmethod
    def extended_hamming84(cls) -> "LinearCode":
        return cls.from_rows(["10001101", "01001011", "00100111", "00011110"], name="ext-hamming(8,4)")

    def encode(self, messages) -> np.ndarray:
        m = np.atleast_2d(np.asarray(messages, dtype=np.int64))
        return ((m @ self.generator) % 2).astype(np.uint8)

    def messages(self) -> np.ndarray:
        """All 2^k messages, row i is the binary expansion of i (bit 0 first)."""
        if self.k > MAX_MATERIALIZE_K:
            raise SizeGuardError(f"k={self.k} exceeds materialization guard {MAX_MATERIALIZE_K}")
        idx = np.arange(1 << self.k, dtype=np.int64)
        return ((idx[:, None] >> np.arange(self.k)) & 1).astype(np.uint8)

    def codewords(self) -> np.ndarray:
        return self.encode(self.messages())

    def info_mask(self) -> np.ndarray:
        mask = np.zeros(self.n, dtype=np.uint8)
        if self.info_positions is not None:
            mask[list(self.info_positions)] = 1
        return mask


@dataclass
class DistanceSpectrum:
    """Counts ``counts[d]`` of codewords of Hamming weight d, d = 0..n.

    Real-valued so that ensemble averages fit the same type. ``d_max`` marks a
    truncated spectrum (entries above it were not computed); ``tail_estimate``
    carries whatever estimate of the dropped mass the producer could make.
    """

    n: int
    counts: np.ndarray
    k: int | None = None
    ensemble: bool = False
    d_max: int | None = None
    tail_estimate: float | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.dtype != object:
            counts = counts.astype(np.float64)
        if counts.ndim != 1 or counts.shape[0] > self.n + 1:
            raise ConfigError("spectrum counts must be a vector of length <= n + 1")
        if counts.shape[0] < self.n + 1:
            counts = np.concatenate([counts, np.zeros(self.n + 1 - counts.shape[0], dtype=counts.dtype)])
        if np.any(counts < 0):
            raise ConfigError("spectrum counts must be non-negative")
        self.counts = counts

    @classmethod
    def from_terms(cls, n: int, terms: dict, **kwargs) -> "DistanceSpectrum":
        counts = np.zeros(n + 1)
        for d, a in terms.items():
            counts[int(d)] = a
        return cls(n, counts, **kwargs)

    @property
    def values(self) -> np.ndarray:
        return self.counts.astype(np.float64)

    def terms(self) -> dict:
        conv = (lambda x: x) if self.counts.dtype == object else float
        return {d: conv(self.counts[d]) for d in range(self.n + 1) if self.counts[d] != 0}

    def nonzero(self, include_zero: bool = False):
        """(weights, counts) of the populated entries, optionally skipping d = 0."""
        vals = self.values
        d = np.nonzero(vals)[0]
        if not include_zero:
            d = d[d > 0]
        return d, vals[d]

    def log_nonzero(self, include_zero: bool = False):
        """(weights, natural-log counts) of populated entries; safe for exact counts above 1e308."""
        if self.counts.dtype != object:
            d, a = self.nonzero(include_zero)
            return d, np.log(a)
        d = [i for i in range(self.n + 1) if self.counts[i] != 0 and (include_zero or i > 0)]
        logs = []
        for i in d:
            c = self.counts[i]
            if isinstance(c, Fraction):
                logs.append(math.log(c.numerator) - math.log(c.denominator))
            else:
                logs.append(math.log(c))
        return np.array(d, dtype=np.int64), np.array(logs, dtype=np.float64)

    def total(self) -> float:
        return float(self.values.sum())

    def min_distance(self) -> int | None:
        d, _ = self.nonzero()
        return int(d[0]) if d.size else None

    def check_specific_code(self) -> None:
        """Raise unless this looks like the spectrum of one specific code."""
        vals = self.values
        if self.ensemble:
            raise ConfigError("spectrum is an ensemble average, not a specific code")
        if not np.all(vals == np.round(vals)):
            raise ConfigError("specific-code spectrum must be integral")
        if vals[0] != 1:
            raise ConfigError("specific-code spectrum needs A_0 = 1")
        if self.k is not None and self.d_max is None and vals.sum() != 2.0**self.k:
            raise ConfigError("specific-code spectrum must sum to 2^k")


CONVENTIONS = ("parity", "codeword")


@dataclass
class IOWEF:
    """Input-output weight enumerator ``counts[w, j]``.

    With ``convention='parity'`` the column index is the parity weight and the
    codeword weight is ``w + j``; with ``'codeword'`` it is the codeword weight
    itself. Counts may be float64 or exact Python numbers (object dtype).
    """

    n: int
    k: int
    counts: np.ndarray
    convention: str = "parity"
    ensemble: bool = False
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.convention not in CONVENTIONS:
            raise ConfigError(f"unknown IOWEF convention {self.convention!r}")
        counts = np.asarray(self.counts)
        if counts.dtype != object:
            counts = counts.astype(np.float64)
        if counts.ndim != 2:
            raise ConfigError("IOWEF counts must be a 2-D table")
        if np.any(counts < 0):
            raise ConfigError("IOWEF counts must be non-negative")
        self.counts = counts

    @property
    def w_max(self) -> int:
        return self.counts.shape[0] - 1

    @property
    def j_max(self) -> int:
        return self.counts.shape[1] - 1

    def entry(self, w: int, j: int):
        if w > self.w_max or j > self.j_max:
            return 0
        return self.counts[w, j]

    def total(self):
        return self.counts.sum()

    def codeword_table(self) -> np.ndarray:
        """Table indexed [w, d] with d the codeword weight (length n + 1)."""
        exact = self.counts.dtype == object
        out = np.zeros((self.w_max + 1, self.n + 1), dtype=object if exact else np.float64)
        if exact:
            out[:] = 0
        if self.convention == "codeword":
            width = min(self.j_max + 1, self.n + 1)
            out[:, :width] = self.counts[:, :width]
            return out
        for w in range(self.w_max + 1):
            hi = min(self.j_max, self.n - w)
            if hi >= 0:
                out[w, w : w + hi + 1] = self.counts[w, : hi + 1]
        return out

    def to_spectrum(self, **kwargs) -> DistanceSpectrum:
        """Marginal over the input weight."""
        col = self.codeword_table().sum(axis=0)
        return DistanceSpectrum(self.n, col, k=self.k, ensemble=self.ensemble, **kwargs)

    def bit_spectrum(self, **kwargs) -> DistanceSpectrum:
        """Bit-weighted spectrum sum_w (w / k) A_{w,d}, which replaces A_d in bit-error bounds."""
        table = self.codeword_table().astype(np.float64)
        weights = np.arange(self.w_max + 1) / self.k
        col = weights @ table
        meta = dict(self.metadata)
        meta["bit_weighted"] = True
        return DistanceSpectrum(self.n, col, k=self.k, ensemble=True, metadata=meta, **kwargs)


# ---------------------------------------------------------------------------
# enumeration


def _packed_masks(code: LinearCode, mask_bits: np.ndarray):
    gen = kernels.pack_rows(code.generator)
    mask = kernels.pack_rows(mask_bits[None, :])[0]
    inv = kernels.pack_rows((1 - mask_bits)[None, :])[0]
    return gen, mask, inv


def _guard(code: LinearCode):
    if code.k > MAX_ENUM_K:
        raise SizeGuardError(f"k={code.k} exceeds enumeration guard {MAX_ENUM_K}")


def enumerate_spectrum(code: LinearCode) -> DistanceSpectrum:
    """Exact weight distribution by walking the span of the generator in Gray order."""
    _guard(code)
    zero = np.zeros(code.n, dtype=np.uint8)
    gen, mask, inv = _packed_masks(code, zero)
    hist = kernels.span_histogram(gen, mask, inv, 0, code.n)
    return DistanceSpectrum(code.n, hist[0].astype(np.float64), k=code.k)


def enumerate_iowef(code: LinearCode, info_positions=None) -> IOWEF:
    """Exact (input weight, parity weight) counts.

    The input weight is the weight on the information positions; this needs a
    systematic generator or an explicit list of positions.
    """
    _guard(code)
    if info_positions is not None:
        code = LinearCode(code.generator, info_positions=tuple(info_positions), name=code.name)
    if code.info_positions is None:
        raise ConfigError("non-systematic generator: supply info_positions")
    mask_bits = code.info_mask()
    gen, mask, inv = _packed_masks(code, mask_bits)
    hist = kernels.span_histogram(gen, mask, inv, code.k, code.n - code.k)
    return IOWEF(code.n, code.k, hist.astype(np.float64), convention="parity")


def brute_force_min_distance(code: LinearCode) -> int:
    cws = code.codewords()
    return int(cws[1:].sum(axis=1).min())


# ---------------------------------------------------------------------------
# file formats


def parse_code(text: str, name: str = "") -> LinearCode:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ConfigError("empty code file")
    head = lines[0].split()
    if len(head) != 2:
        raise ConfigError("first line must be 'n k'")
    try:
        n, k = int(head[0]), int(head[1])
    except ValueError as exc:
        raise ConfigError(f"bad header {lines[0]!r}") from exc
    rows = lines[1:]
    if len(rows) != k:
        raise ConfigError(f"expected {k} generator rows, found {len(rows)}")
    for r in rows:
        if len(r) != n or set(r) - {"0", "1"}:
            raise ConfigError(f"generator row {r!r} is not {n} characters of 0/1")
    return LinearCode.from_rows(rows, name=name)


def load_code(path) -> LinearCode:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read code file {path}: {exc}") from exc
    return parse_code(text, name=path.stem)


def format_code(code: LinearCode) -> str:
    rows = ["".join(str(int(b)) for b in row) for row in code.generator]
    return "\n".join([f"{code.n} {code.k}", *rows]) + "\n"


def store_code(code: LinearCode, path) -> None:
    Path(path).write_text(format_code(code))


def _count_str(x) -> str:
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    xf = float(x)
    if xf.is_integer() and abs(xf) < 2**53:
        return str(int(xf))
    return repr(xf)


def _parse_count(s):
    s = str(s)
    if "/" in s:
        return Fraction(s)
    try:
        return int(s)
    except ValueError:
        return float(s)


def spectrum_to_dict(spec) -> dict:
    """JSON-ready document; spectra carry terms ``{"j": d, "count": ...}`` with no ``w``."""
    if isinstance(spec, IOWEF):
        terms = [
            {"w": int(w), "j": int(j), "count": _count_str(spec.counts[w, j])}
            for w, j in zip(*np.nonzero(spec.counts.astype(np.float64) != 0))
        ]
        doc = {"n": spec.n, "k": spec.k, "convention": spec.convention, "terms": terms}
        if spec.ensemble:
            doc["ensemble"] = True
        if spec.metadata:
            doc["metadata"] = spec.metadata
        return doc
    terms = [{"j": int(d), "count": _count_str(spec.counts[d])} for d in range(spec.n + 1) if spec.counts[d] != 0]
    doc = {"n": spec.n, "k": spec.k, "convention": "codeword", "terms": terms}
    if spec.ensemble:
        doc["ensemble"] = True
    if spec.d_max is not None:
        doc["d_max"] = spec.d_max
    if spec.tail_estimate is not None:
        doc["tail_estimate"] = repr(float(spec.tail_estimate))
    if spec.metadata:
        doc["metadata"] = spec.metadata
    return doc


def spectrum_from_dict(doc: dict):
    try:
        n = int(doc["n"])
        k = doc.get("k")
        terms = doc["terms"]
        convention = doc.get("convention", "codeword")
        parsed = [(t.get("w"), int(t["j"]), _parse_count(t["count"])) for t in terms]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed spectrum document: {exc}") from exc
    exact = any(isinstance(c, Fraction) or (isinstance(c, int) and c >= 2**53) for _, _, c in parsed)
    dtype = object if exact else np.float64
    if parsed and all(w is not None for w, _, _ in parsed):
        w_max = max(w for w, _, _ in parsed)
        j_max = max(j for _, j, _ in parsed)
        counts = np.zeros((w_max + 1, j_max + 1), dtype=dtype)
        for w, j, c in parsed:
            counts[int(w), j] = c
        return IOWEF(n, int(k), counts, convention=convention, ensemble=bool(doc.get("ensemble", False)),
                     metadata=doc.get("metadata", {}))
    counts = np.zeros(n + 1, dtype=dtype)
    for _, j, c in parsed:
        counts[j] = c
    tail = doc.get("tail_estimate")
    return DistanceSpectrum(
        n, counts, k=None if k is None else int(k), ensemble=bool(doc.get("ensemble", False)),
        d_max=doc.get("d_max"), tail_estimate=None if tail is None else float(tail),
        metadata=doc.get("metadata", {}),
    )


def store_spectrum(spec, path) -> None:
    Path(path).write_text(json.dumps(spectrum_to_dict(spec), indent=1) + "\n")


def load_spectrum(path):
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read spectrum file {path}: {exc}") from exc
    return spectrum_from_dict(doc)
