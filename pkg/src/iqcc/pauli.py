"""Symplectic-bitmask algebra for Pauli words and real linear combinations.

An n-qubit Pauli word is stored as a pair of bitmasks: bit j of ``x_mask``
is set iff qubit j carries x or y, bit j of ``z_mask`` iff it carries z or
y.  The represented operator is the qubit-wise product of {1, x, y, z}, so
(0,0)=1, (1,0)=x, (0,1)=z and (1,1)=y with no hidden prefactor.  Word
products then carry an explicit power of i, returned as an exponent mod 4.

Operators are real linear combinations of words kept in a canonical merged
form: terms sorted lexicographically by (x_mask, z_mask), duplicate words
summed, coefficients below MERGE_TOL dropped.  Internally an operator holds
three parallel numpy arrays, which the heavier routines (commutators,
conjugation, dressing) operate on directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, TextIO

import numpy as np

MERGE_TOL = 1e-12  # floating-point dust cutoff; distinct from compression epsilon
MAX_QUBITS = 64

_LETTER_OF_BITS = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
_BITS_OF_LETTER = {v: k for k, v in _LETTER_OF_BITS.items()}


class DimensionError(ValueError):
    """Raised when operands act on different qubit counts."""


class ParseError(ValueError):
    """Raised on malformed operator or integral text input."""


@dataclass(frozen=True, slots=True)
class PauliWord:
    """One n-qubit Pauli word in symplectic bitmask form."""

    n_qubits: int
    x_mask: int
    z_mask: int

    def __post_init__(self) -> None:
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise ValueError(f"qubit count must be in [1, {MAX_QUBITS}], got {self.n_qubits}")
        full = (1 << self.n_qubits) - 1
        if not 0 <= self.x_mask <= full or not 0 <= self.z_mask <= full:
            raise ValueError("mask has bits outside the qubit range")

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliWord":
        return cls(n_qubits, 0, 0)

    @classmethod
    def single(cls, n_qubits: int, qubit: int, letter: str) -> "PauliWord":
        """Word with one non-identity letter at `qubit`."""
        if not 0 <= qubit < n_qubits:
            raise ValueError(f"qubit {qubit} out of range")
        xb, zb = _BITS_OF_LETTER[letter.upper()]
        return cls(n_qubits, xb << qubit, zb << qubit)

    @classmethod
    def from_label(cls, label: str) -> "PauliWord":
        """Build from a letter string, qubit 0 leftmost (e.g. "XZYI")."""
        x = z = 0
        for j, ch in enumerate(label.upper()):
            if ch not in _BITS_OF_LETTER:
                raise ParseError(f"invalid Pauli letter {ch!r} in {label!r}")
            xb, zb = _BITS_OF_LETTER[ch]
            x |= xb << j
            z |= zb << j
        return cls(len(label), x, z)

    def letter(self, qubit: int) -> str:
        return _LETTER_OF_BITS[((self.x_mask >> qubit) & 1, (self.z_mask >> qubit) & 1)]

    def to_label(self) -> str:
        return "".join(self.letter(j) for j in range(self.n_qubits))

    @property
    def is_identity(self) -> bool:
        return self.x_mask == 0 and self.z_mask == 0

    @property
    def support(self) -> tuple[int, ...]:
        both = self.x_mask | self.z_mask
        return tuple(j for j in range(self.n_qubits) if (both >> j) & 1)

    @property
    def weight(self) -> int:
        return (self.x_mask | self.z_mask).bit_count()

    def __repr__(self) -> str:
        return f"PauliWord({self.to_label()!r})"


def _check_words(a: PauliWord, b: PauliWord) -> None:
    if a.n_qubits != b.n_qubits:
        raise DimensionError(f"qubit counts differ: {a.n_qubits} vs {b.n_qubits}")


def phase_value(exponent: int) -> complex:
    """Numeric value of i**exponent."""
    return (1, 1j, -1, -1j)[exponent % 4]


def mask_product(ax: int, az: int, bx: int, bz: int) -> tuple[int, int, int]:
    """Mask-level word product: (x, z, k) with a*b = i**k * word(x, z)."""
    x = ax ^ bx
    z = az ^ bz
    k = (
        (ax & az).bit_count()
        + (bx & bz).bit_count()
        - (x & z).bit_count()
        + 2 * (az & bx).bit_count()
    ) % 4
    return x, z, k


def multiply(a: PauliWord, b: PauliWord) -> tuple[PauliWord, int]:
    """Product a*b as (word, k) with a*b = i**k * word, k mod 4.

    The exponent is exact: multiply(a, a) gives (identity, 0) for any a.
    """
    _check_words(a, b)
    x, z, k = mask_product(a.x_mask, a.z_mask, b.x_mask, b.z_mask)
    return PauliWord(a.n_qubits, x, z), k


def commutes(a: PauliWord, b: PauliWord) -> bool:
    """True iff the symplectic form <a, b> is even."""
    _check_words(a, b)
    return ((a.x_mask & b.z_mask).bit_count() + (a.z_mask & b.x_mask).bit_count()) % 2 == 0


def y_parity(w: PauliWord) -> int:
    """Parity (0 even, 1 odd) of the number of y letters in w."""
    return (w.x_mask & w.z_mask).bit_count() % 2


def flip_indices(w: PauliWord) -> frozenset[int]:
    """Qubits where w acts with x or y (the set bits of x_mask)."""
    return frozenset(j for j in range(w.n_qubits) if (w.x_mask >> j) & 1)


def _popcount_u64(a: np.ndarray) -> np.ndarray:
    return np.bitwise_count(a).astype(np.int64)


def _canonical_arrays(
    xs: np.ndarray, zs: np.ndarray, cs: np.ndarray, tol: float = MERGE_TOL
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Sort by (x, z), merge duplicates, drop dust."""
    if len(xs) == 0:
        return xs, zs, cs
    order = np.lexsort((zs, xs))
    xs, zs, cs = xs[order], zs[order], cs[order]
    first = np.empty(len(xs), dtype=bool)
    first[0] = True
    first[1:] = (xs[1:] != xs[:-1]) | (zs[1:] != zs[:-1])
    starts = np.flatnonzero(first)
    sums = np.add.reduceat(cs, starts)
    keep = np.abs(sums) >= tol
    return xs[starts][keep], zs[starts][keep], sums[keep]


class Operator:
    """Real-coefficient linear combination of Pauli words, canonically merged.

    Immutable after construction; iteration yields (PauliWord, coefficient)
    in lexicographic (x_mask, z_mask) order.
    """

    __slots__ = ("n_qubits", "_xs", "_zs", "_cs")

    def __init__(self, n_qubits: int, terms: Iterable[tuple[PauliWord, float]] = ()):
        words = list(terms)
        xs = np.fromiter((w.x_mask for w, _ in words), dtype=np.uint64, count=len(words))
        zs = np.fromiter((w.z_mask for w, _ in words), dtype=np.uint64, count=len(words))
        cs = np.fromiter((float(c) for _, c in words), dtype=np.float64, count=len(words))
        for w, _ in words:
            if w.n_qubits != n_qubits:
                raise DimensionError(f"term on {w.n_qubits} qubits in {n_qubits}-qubit operator")
        self.n_qubits = int(n_qubits)
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise ValueError(f"qubit count must be in [1, {MAX_QUBITS}]")
        self._xs, self._zs, self._cs = _canonical_arrays(xs, zs, cs)
        self._freeze()

    def _freeze(self) -> None:
        for a in (self._xs, self._zs, self._cs):
            a.setflags(write=False)

    @classmethod
    def _from_raw(cls, n_qubits: int, xs: np.ndarray, zs: np.ndarray, cs: np.ndarray) -> "Operator":
        """Canonicalize raw parallel arrays (internal fast path)."""
        op = cls.__new__(cls)
        op.n_qubits = n_qubits
        op._xs, op._zs, op._cs = _canonical_arrays(
            np.ascontiguousarray(xs, dtype=np.uint64),
            np.ascontiguousarray(zs, dtype=np.uint64),
            np.ascontiguousarray(cs, dtype=np.float64),
        )
        op._freeze()
        return op

    @classmethod
    def _from_canonical(cls, n_qubits: int, xs: np.ndarray, zs: np.ndarray, cs: np.ndarray) -> "Operator":
        """Adopt arrays already in canonical order (internal fast path)."""
        op = cls.__new__(cls)
        op.n_qubits = n_qubits
        op._xs = np.ascontiguousarray(xs, dtype=np.uint64)
        op._zs = np.ascontiguousarray(zs, dtype=np.uint64)
        op._cs = np.ascontiguousarray(cs, dtype=np.float64)
        op._freeze()
        return op

    @classmethod
    def zero(cls, n_qubits: int) -> "Operator":
        return cls(n_qubits, ())

    @classmethod
    def from_labels(cls, terms: dict[str, float]) -> "Operator":
        """Build from {letter-string: coefficient}; qubit count from label length."""
        if not terms:
            raise ValueError("cannot infer qubit count from empty mapping")
        n = len(next(iter(terms)))
        return cls(n, ((PauliWord.from_label(lbl), c) for lbl, c in terms.items()))

    # -- array views (read-only) ------------------------------------------

    @property
    def x_masks(self) -> np.ndarray:
        return self._xs

    @property
    def z_masks(self) -> np.ndarray:
        return self._zs

    @property
    def coefficients(self) -> np.ndarray:
        return self._cs

    # -- container protocol ------------------------------------------------

    def __len__(self) -> int:
        return len(self._cs)

    @property
    def is_empty(self) -> bool:
        return len(self._cs) == 0

    def __iter__(self) -> Iterator[tuple[PauliWord, float]]:
        n = self.n_qubits
        for x, z, c in zip(self._xs, self._zs, self._cs):
            yield PauliWord(n, int(x), int(z)), float(c)

    def terms(self) -> Iterator[tuple[PauliWord, float]]:
        return iter(self)

    def coefficient(self, w: PauliWord) -> float:
        """Coefficient of word w (0.0 if absent)."""
        if w.n_qubits != self.n_qubits:
            raise DimensionError("word/operator qubit mismatch")
        i = np.searchsorted(self._xs, np.uint64(w.x_mask))
        while i < len(self._xs) and self._xs[i] == w.x_mask:
            if self._zs[i] == w.z_mask:
                return float(self._cs[i])
            i += 1
        return 0.0

    @property
    def identity_coefficient(self) -> float:
        if len(self._xs) and self._xs[0] == 0 and self._zs[0] == 0:
            return float(self._cs[0])
        return 0.0

    # -- arithmetic ----------------------------------------------------------

    def _check_op(self, other: "Operator") -> None:
        if self.n_qubits != other.n_qubits:
            raise DimensionError(f"qubit counts differ: {self.n_qubits} vs {other.n_qubits}")

    def __add__(self, other: "Operator") -> "Operator":
        self._check_op(other)
        return Operator._from_raw(
            self.n_qubits,
            np.concatenate([self._xs, other._xs]),
            np.concatenate([self._zs, other._zs]),
            np.concatenate([self._cs, other._cs]),
        )

    def __sub__(self, other: "Operator") -> "Operator":
        return self + (-1.0) * other

    def __mul__(self, scale: float) -> "Operator":
        cs = self._cs * float(scale)
        keep = np.abs(cs) >= MERGE_TOL
        return Operator._from_canonical(self.n_qubits, self._xs[keep], self._zs[keep], cs[keep])

    __rmul__ = __mul__

    def __neg__(self) -> "Operator":
        return Operator._from_canonical(self.n_qubits, self._xs, self._zs, -self._cs)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Operator):
            return NotImplemented
        return (
            self.n_qubits == other.n_qubits
            and np.array_equal(self._xs, other._xs)
            and np.array_equal(self._zs, other._zs)
            and np.array_equal(self._cs, other._cs)
        )

    def __repr__(self) -> str:
        return f"Operator(n_qubits={self.n_qubits}, terms={len(self)})"


def commutator_half(h: Operator, p: PauliWord) -> Operator:
    """-(i/2)[h, p], always real for real h.

    Terms of h that commute with p contribute nothing; each anticommuting
    term c*w maps to +-c * (w*p) with the sign fixed by the product phase.
    """
    if h.n_qubits != p.n_qubits:
        raise DimensionError("operator/word qubit mismatch")
    px, pz = np.uint64(p.x_mask), np.uint64(p.z_mask)
    xs, zs, cs = h.x_masks, h.z_masks, h.coefficients
    anti = ((_popcount_u64(xs & pz) + _popcount_u64(zs & px)) & 1).astype(bool)
    if not anti.any():
        return Operator.zero(h.n_qubits)
    xa, za, ca = xs[anti], zs[anti], cs[anti]
    xn, zn = xa ^ px, za ^ pz
    k = (
        _popcount_u64(xa & za)
        + int(p.x_mask & p.z_mask).bit_count()
        - _popcount_u64(xn & zn)
        + 2 * _popcount_u64(za & px)
    ) % 4
    # k is odd for anticommuting pairs, so -i * i**k is +-1
    sign = np.where(k == 1, 1.0, -1.0)
    return Operator._from_raw(h.n_qubits, xn, zn, ca * sign)


def conjugate_by_word(h: Operator, p: PauliWord) -> Operator:
    """p*h*p: same word set as h, sign flipped on terms anticommuting with p."""
    if h.n_qubits != p.n_qubits:
        raise DimensionError("operator/word qubit mismatch")
    px, pz = np.uint64(p.x_mask), np.uint64(p.z_mask)
    xs, zs, cs = h.x_masks, h.z_masks, h.coefficients
    anti = (_popcount_u64(xs & pz) + _popcount_u64(zs & px)) & 1
    return Operator._from_canonical(h.n_qubits, xs, zs, cs * (1.0 - 2.0 * anti))


def frobenius_norm(h: Operator) -> float:
    """2**(n/2) * sqrt(sum of squared coefficients)."""
    return math.sqrt(2.0**h.n_qubits * float(np.dot(h.coefficients, h.coefficients)))


# -- text operator format ----------------------------------------------------
#
# One term per line: `<coefficient> <letters>`, letters in I/X/Y/Z with
# qubit 0 leftmost; `#` starts a comment.


def write_operator(h: Operator, stream: TextIO) -> None:
    stream.write(f"# qubits: {h.n_qubits}  terms: {len(h)}\n")
    for w, c in h:
        stream.write(f"{c!r} {w.to_label()}\n")


def read_operator(stream: TextIO) -> Operator:
    terms: list[tuple[PauliWord, float]] = []
    n: int | None = None
    for lineno, raw in enumerate(stream, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"line {lineno}: expected '<coefficient> <letters>', got {raw!r}")
        try:
            coeff = float(parts[0])
        except ValueError as exc:
            raise ParseError(f"line {lineno}: bad coefficient {parts[0]!r}") from exc
        label = parts[1]
        if n is None:
            n = len(label)
        elif len(label) != n:
            raise ParseError(f"line {lineno}: word length {len(label)} != {n}")
        try:
            word = PauliWord.from_label(label)
        except ParseError as exc:
            raise ParseError(f"line {lineno}: {exc}") from exc
        terms.append((word, coeff))
    if n is None:
        raise ParseError("no operator terms found")
    return Operator(n, terms)
