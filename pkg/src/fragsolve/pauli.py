"""Symplectic-bit Pauli algebra: N-qubit Pauli words and real-weighted sums.

A Pauli word is stored as two packed integers ``x`` and ``z``; qubit ``q``
occupies bit ``n - 1 - q``, so comparing ``(z, x)`` as plain integers gives
the big-endian lexicographic canonical order used everywhere downstream
(deterministic greedy tie-breaking, serialization).

Phase convention: the operator represented by bits (x, z) on one qubit is
``i**(x*z) * X**x * Z**z``, i.e. Y = iXZ.  All product phases are derived
from this convention and are reproduced bit-exactly.
"""

from __future__ import annotations

from typing import Dict, Iterable, Iterator, Mapping, Tuple

TAU_ZERO = 1e-12

_AXES = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}


class PauliError(ValueError):
    """Base class for Pauli algebra errors."""


class UnknownAxis(PauliError):
    pass


class IndexOutOfRange(PauliError):
    pass


class DuplicateIndex(PauliError):
    pass


class SizeMismatch(PauliError):
    pass


class ComplexCoefficient(PauliError):
    pass


class PauliWord:
    """Immutable N-qubit Pauli word in symplectic bit representation.

    Phase is never stored in the word; it lives in products and in the
    coefficients of :class:`PauliSum`.
    """

    __slots__ = ("n", "x", "z")

    def __init__(self, n: int, x: int, z: int):
        if n <= 0:
            raise PauliError(f"n_qubits must be positive, got {n}")
        mask = (1 << n) - 1
        if x & ~mask or z & ~mask:
            raise PauliError("bit pattern exceeds n_qubits")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "z", z)

    def __setattr__(self, name, value):
        raise AttributeError("PauliWord is immutable")

    @classmethod
    def identity(cls, n: int) -> "PauliWord":
        return cls(n, 0, 0)

    @classmethod
    def from_axes(cls, n: int, axes: Mapping[int, str]) -> "PauliWord":
        """Build a word from {qubit: axis} with axis in 'XYZ'."""
        x = z = 0
        for q, a in axes.items():
            if not 0 <= q < n:
                raise IndexOutOfRange(f"qubit {q} outside 0..{n - 1}")
            bit = 1 << (n - 1 - q)
            if a == "X":
                x |= bit
            elif a == "Y":
                x |= bit
                z |= bit
            elif a == "Z":
                z |= bit
            elif a != "I":
                raise UnknownAxis(f"unknown axis {a!r}")
        return cls(n, x, z)

    def axis(self, q: int) -> str:
        if not 0 <= q < self.n:
            raise IndexOutOfRange(f"qubit {q} outside 0..{self.n - 1}")
        bit = 1 << (self.n - 1 - q)
        return _AXES[(1 if self.x & bit else 0, 1 if self.z & bit else 0)]

    @property
    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def support(self) -> Tuple[int, ...]:
        """Qubits on which the word acts nontrivially, ascending."""
        occ = self.x | self.z
        n = self.n
        return tuple(q for q in range(n) if occ >> (n - 1 - q) & 1)

    def weight(self) -> int:
        return (self.x | self.z).bit_count()

    def key(self) -> Tuple[int, int]:
        """Canonical sort key: lexicographic on (z_bits, x_bits) big-endian."""
        return (self.z, self.x)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PauliWord)
            and self.n == other.n
            and self.x == other.x
            and self.z == other.z
        )

    def __hash__(self) -> int:
        return hash((self.n, self.x, self.z))

    def __lt__(self, other: "PauliWord") -> bool:
        return self.key() < other.key()

    def __str__(self) -> str:
        if self.is_identity:
            return "I"
        return " ".join(f"{self.axis(q)}{q}" for q in self.support())

    def __repr__(self) -> str:
        return f"PauliWord({self.n}, {str(self)!r})"


def parse_pauli(text: str, n_qubits: int) -> PauliWord:
    """Parse whitespace-separated tokens like ``"X0 Z3"`` into a word.

    "I" tokens are ignored; an empty string is the identity; a repeated
    qubit index is an error.
    """
    x = z = 0
    seen = set()
    for token in text.split():
        letter, idx_text = token[0].upper(), token[1:]
        if letter not in "IXYZ":
            raise UnknownAxis(f"unknown axis in token {token!r}")
        try:
            q = int(idx_text)
        except ValueError:
            raise UnknownAxis(f"malformed token {token!r}") from None
        if not 0 <= q < n_qubits:
            raise IndexOutOfRange(f"qubit {q} outside 0..{n_qubits - 1}")
        if q in seen:
            raise DuplicateIndex(f"qubit {q} referenced twice")
        seen.add(q)
        if letter == "I":
            continue
        bit = 1 << (n_qubits - 1 - q)
        if letter in ("X", "Y"):
            x |= bit
        if letter in ("Y", "Z"):
            z |= bit
    return PauliWord(n_qubits, x, z)


def _check_sizes(a: PauliWord, b: PauliWord) -> None:
    if a.n != b.n:
        raise SizeMismatch(f"qubit counts differ: {a.n} vs {b.n}")


def multiply(a: PauliWord, b: PauliWord) -> Tuple[complex, PauliWord]:
    """Product of two words: phase in {1, -1, 1j, -1j} and the XOR word.

    With the per-qubit convention W(x,z) = i**(xz) X**x Z**z, the phase
    exponent mod 4 is pc(ax&az) + pc(bx&bz) - pc(cx&cz) + 2*pc(az&bx)
    where c = a XOR b.
    """
    _check_sizes(a, b)
    cx = a.x ^ b.x
    cz = a.z ^ b.z
    e = (
        (a.x & a.z).bit_count()
        + (b.x & b.z).bit_count()
        - (cx & cz).bit_count()
        + 2 * (a.z & b.x).bit_count()
    ) % 4
    return (1, 1j, -1, -1j)[e], PauliWord(a.n, cx, cz)


def commutes(a: PauliWord, b: PauliWord) -> bool:
    """True iff the symplectic form <a, b> is even (operators commute)."""
    _check_sizes(a, b)
    return ((a.x & b.z).bit_count() + (a.z & b.x).bit_count()) % 2 == 0


def _coerce_real(c) -> float:
    if isinstance(c, complex):
        if abs(c.imag) > TAU_ZERO:
            raise ComplexCoefficient(f"coefficient {c} is not real")
        return float(c.real)
    return float(c)


class PauliSum:
    """Real-weighted sum of Pauli words on a fixed qubit count.

    Terms with |coefficient| <= TAU_ZERO are pruned at construction.
    Instances are treated as immutable values; all arithmetic returns
    new sums.
    """

    __slots__ = ("n", "_terms")

    def __init__(self, n: int, terms: Mapping[PauliWord, float] | None = None):
        if n <= 0:
            raise PauliError(f"n_qubits must be positive, got {n}")
        clean: Dict[PauliWord, float] = {}
        for word, coeff in (terms or {}).items():
            if word.n != n:
                raise SizeMismatch(f"word on {word.n} qubits in {n}-qubit sum")
            c = _coerce_real(coeff)
            if abs(c) > TAU_ZERO:
                clean[word] = c
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "_terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("PauliSum is immutable")

    @classmethod
    def zero(cls, n: int) -> "PauliSum":
        return cls(n, {})

    @classmethod
    def from_strings(cls, n: int, terms: Iterable[Tuple[float, str]]) -> "PauliSum":
        acc: Dict[PauliWord, float] = {}
        for coeff, text in terms:
            word = parse_pauli(text, n)
            acc[word] = acc.get(word, 0.0) + _coerce_real(coeff)
        return cls(n, acc)

    def terms(self) -> Dict[PauliWord, float]:
        return dict(self._terms)

    def coeff(self, word: PauliWord) -> float:
        return self._terms.get(word, 0.0)

    def words(self) -> Tuple[PauliWord, ...]:
        return tuple(sorted(self._terms, key=PauliWord.key))

    def items(self) -> Iterator[Tuple[PauliWord, float]]:
        """Terms in canonical word order."""
        for word in sorted(self._terms, key=PauliWord.key):
            yield word, self._terms[word]

    def __len__(self) -> int:
        return len(self._terms)

    def __contains__(self, word: PauliWord) -> bool:
        return word in self._terms

    def __add__(self, other: "PauliSum") -> "PauliSum":
        if not isinstance(other, PauliSum):
            return NotImplemented
        if self.n != other.n:
            raise SizeMismatch(f"qubit counts differ: {self.n} vs {other.n}")
        acc = dict(self._terms)
        for word, coeff in other._terms.items():
            acc[word] = acc.get(word, 0.0) + coeff
        return PauliSum(self.n, acc)

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self + (other * -1.0)

    def __mul__(self, scalar: float) -> "PauliSum":
        c = _coerce_real(scalar)
        return PauliSum(self.n, {w: v * c for w, v in self._terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PauliSum)
            and self.n == other.n
            and self._terms == other._terms
        )

    def __hash__(self):
        return hash((self.n, tuple((w, c) for w, c in self.items())))

    def one_norm(self) -> float:
        return sum(abs(c) for c in self._terms.values())

    def max_abs_diff(self, other: "PauliSum") -> float:
        """Largest coefficient-wise absolute difference."""
        if self.n != other.n:
            raise SizeMismatch(f"qubit counts differ: {self.n} vs {other.n}")
        words = set(self._terms) | set(other._terms)
        if not words:
            return 0.0
        return max(abs(self.coeff(w) - other.coeff(w)) for w in words)

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        return " + ".join(f"{c:+.6g}*{w}" for w, c in self.items())

    def __repr__(self) -> str:
        return f"PauliSum(n={self.n}, terms={len(self._terms)})"


def sum_arithmetic(a: PauliSum, b, op: str) -> PauliSum:
    """Coefficient-wise arithmetic: op in {"add", "subtract", "scale"}.

    For "scale", b is a real scalar.
    """
    if op == "add":
        return a + b
    if op == "subtract":
        return a - b
    if op == "scale":
        return a * b
    raise PauliError(f"unknown op {op!r}")
