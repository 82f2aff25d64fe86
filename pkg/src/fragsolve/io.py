"""File formats, fixture access, and the Heisenberg-chain model generator.

All formats are JSON documents with a ``format`` tag and a schema version.
Canonical serialization sorts Pauli terms in canonical word order and
formats coefficients with 17 significant digits, so write(read(f)) is
byte-identical for canonicalized files and digests are stable.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from .pauli import PauliError, PauliSum, parse_pauli

SCHEMA_VERSION = 1
TENSOR_SYMMETRY_TOL = 1e-8


class ParseError(ValueError):
    """Malformed document; message carries the offending field."""


class InvariantViolation(ValueError):
    """Well-formed document whose contents break a type invariant."""


class BadLengths(ValueError):
    pass


def _fmt(x: float) -> float:
    # Round-trip through 17 significant digits; exact for float64.
    return float(f"{x:.17g}")


# ---------------------------------------------------------------------------
# Qubit Hamiltonian files


def pauli_sum_to_doc(h: PauliSum, metadata: Optional[dict] = None) -> dict:
    return {
        "format": "pauli-hamiltonian",
        "version": SCHEMA_VERSION,
        "n_qubits": h.n,
        "terms": [
            {"coeff": _fmt(c), "pauli": str(w)} for w, c in h.items()
        ],
        "metadata": metadata or {},
    }


def pauli_sum_from_doc(doc: dict) -> PauliSum:
    if doc.get("format") != "pauli-hamiltonian":
        raise ParseError(f"unexpected format tag {doc.get('format')!r}")
    try:
        n = int(doc["n_qubits"])
        records = doc["terms"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"missing or malformed field: {exc}") from None
    seen = set()
    terms = []
    for i, rec in enumerate(records):
        try:
            coeff = float(rec["coeff"])
            text = rec["pauli"]
        except (KeyError, TypeError, ValueError):
            raise ParseError(f"terms[{i}]: need coeff and pauli") from None
        try:
            word = parse_pauli("" if text == "I" else text, n)
        except PauliError as exc:
            raise ParseError(f"terms[{i}]: {exc}") from None
        if word in seen:
            raise InvariantViolation(f"terms[{i}]: duplicate word {text}")
        seen.add(word)
        terms.append((word, coeff))
    return PauliSum(n, dict(terms))


def save_qubit_hamiltonian(path, h: PauliSum, metadata: Optional[dict] = None) -> None:
    Path(path).write_text(canonical_json(pauli_sum_to_doc(h, metadata)))


def load_qubit_hamiltonian(path) -> PauliSum:
    return pauli_sum_from_doc(_read_json(path))


def load_qubit_hamiltonian_with_metadata(path):
    doc = _read_json(path)
    return pauli_sum_from_doc(doc), doc.get("metadata", {})


# ---------------------------------------------------------------------------
# Fermionic tensor files


def tensor_to_doc(n: int, h: np.ndarray, g: np.ndarray, metadata: Optional[dict] = None) -> dict:
    return {
        "format": "fermion-tensor",
        "version": SCHEMA_VERSION,
        "n_spin_orbitals": n,
        "h": [[_fmt(v) for v in row] for row in np.asarray(h)],
        "g": [
            [[[_fmt(v) for v in c] for c in b] for b in a]
            for a in np.asarray(g)
        ],
        "metadata": metadata or {},
    }


def tensor_from_doc(doc: dict):
    """Return (n, h, g) with symmetrization applied at the boundary."""
    if doc.get("format") != "fermion-tensor":
        raise ParseError(f"unexpected format tag {doc.get('format')!r}")
    try:
        n = int(doc["n_spin_orbitals"])
        h = np.asarray(doc["h"], dtype=float)
        g = np.asarray(doc["g"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"missing or malformed field: {exc}") from None
    if h.shape != (n, n):
        raise ParseError(f"h has shape {h.shape}, expected {(n, n)}")
    if g.shape != (n, n, n, n):
        raise ParseError(f"g has shape {g.shape}, expected {(n,) * 4}")
    if not (np.isfinite(h).all() and np.isfinite(g).all()):
        raise InvariantViolation("non-finite tensor entries")
    if np.max(np.abs(h - h.T)) > TENSOR_SYMMETRY_TOL:
        raise InvariantViolation("one-body tensor not symmetric: h_pq != h_qp")
    swapped = np.transpose(g, (2, 3, 0, 1))
    if np.max(np.abs(g - swapped)) > TENSOR_SYMMETRY_TOL:
        raise InvariantViolation("two-body tensor violates g_pqrs = g_rspq")
    h = 0.5 * (h + h.T)
    g = 0.5 * (g + swapped)
    return n, h, g


def save_fermion_tensor(path, n, h, g, metadata=None) -> None:
    Path(path).write_text(canonical_json(tensor_to_doc(n, h, g, metadata)))


def load_fermion_tensor(path):
    return tensor_from_doc(_read_json(path))


def load_fermion_tensor_with_metadata(path):
    doc = _read_json(path)
    return tensor_from_doc(doc), doc.get("metadata", {})


# ---------------------------------------------------------------------------
# Fragment-set files


def fragments_to_doc(method: str, fragments: Sequence[PauliSum], source_hash: str,
                     metadata: Optional[dict] = None) -> dict:
    n = fragments[0].n if fragments else 0
    return {
        "format": "fragment-set",
        "version": SCHEMA_VERSION,
        "method": method,
        "n_qubits": n,
        "source_hash": source_hash,
        "fragments": [
            [{"coeff": _fmt(c), "pauli": str(w)} for w, c in frag.items()]
            for frag in fragments
        ],
        "metadata": metadata or {},
    }


def fragments_from_doc(doc: dict):
    if doc.get("format") != "fragment-set":
        raise ParseError(f"unexpected format tag {doc.get('format')!r}")
    n = int(doc["n_qubits"])
    frags = []
    for terms in doc["fragments"]:
        frags.append(
            PauliSum(n, {parse_pauli("" if t["pauli"] == "I" else t["pauli"], n): float(t["coeff"])
                         for t in terms})
        )
    return doc["method"], frags, doc.get("source_hash", "")


def save_fragments(path, method, fragments, source_hash, metadata=None) -> None:
    Path(path).write_text(canonical_json(fragments_to_doc(method, fragments, source_hash, metadata)))


def load_fragments(path):
    return fragments_from_doc(_read_json(path))


# ---------------------------------------------------------------------------
# Heisenberg chain model


@dataclass(frozen=True)
class HeisenbergSpec:
    """Coefficients for the 2n-qubit extended Heisenberg chain.

    a, b, c weight the XX/YY/ZZ bond terms (length 2n-1), d the single-Z
    field (length 2n).  ``draw`` builds a spec with seeded nonzero
    coefficients.
    """

    n: int
    a: tuple
    b: tuple
    c: tuple
    d: tuple

    def __post_init__(self):
        m = 2 * self.n
        if not (len(self.a) == len(self.b) == len(self.c) == m - 1 and len(self.d) == m):
            raise BadLengths(
                f"need bond arrays of length {m - 1} and field array of length {m}"
            )

    @classmethod
    def draw(cls, n: int, seed: int) -> "HeisenbergSpec":
        rng = np.random.default_rng(seed)

        def nonzero(k):
            mag = rng.uniform(0.1, 1.0, size=k)
            sign = rng.choice([-1.0, 1.0], size=k)
            return tuple(mag * sign)

        m = 2 * n
        return cls(n, nonzero(m - 1), nonzero(m - 1), nonzero(m - 1), nonzero(m))


def heisenberg_model(spec: HeisenbergSpec) -> PauliSum:
    """Extended Heisenberg chain: bond XX+YY+ZZ terms plus a Z field.

    3(2n-1) + 2n terms on 2n qubits; all coefficients assumed nonzero.
    """
    m = 2 * spec.n
    terms: List[tuple] = []
    for i in range(m - 1):
        terms.append((spec.a[i], f"X{i} X{i + 1}"))
        terms.append((spec.b[i], f"Y{i} Y{i + 1}"))
        terms.append((spec.c[i], f"Z{i} Z{i + 1}"))
    for j in range(m):
        terms.append((spec.d[j], f"Z{j}"))
    return PauliSum.from_strings(m, terms)


# ---------------------------------------------------------------------------
# Digests, canonical JSON, fixtures


def canonical_json(doc: dict) -> str:
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def hamiltonian_digest(h: PauliSum) -> str:
    """SHA-256 of the canonical term list; stable across runs and platforms."""
    payload = json.dumps(
        [[f"{c:.17g}", str(w)] for w, c in h.items()], separators=(",", ":")
    )
    return hashlib.sha256(payload.encode()).hexdigest()


def tensor_digest(h: np.ndarray, g: np.ndarray) -> str:
    m = hashlib.sha256()
    m.update(np.ascontiguousarray(h, dtype=float).tobytes())
    m.update(np.ascontiguousarray(g, dtype=float).tobytes())
    return m.hexdigest()


def _read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}: {exc.msg}") from None


QUBIT_FIXTURES = {"h2", "lih", "beh2", "h2o", "nh3"}
TENSOR_FIXTURES = {"h2", "h4", "lih", "beh2", "h2o", "nh3"}


def fixture_path(kind: str, name: str) -> Path:
    """Path to a shipped fixture; kind is 'qubit' or 'tensor'."""
    name = name.lower()
    pool = QUBIT_FIXTURES if kind == "qubit" else TENSOR_FIXTURES
    if name not in pool:
        raise ParseError(f"no {kind} fixture named {name!r}")
    fname = f"{name}_{'qubit' if kind == 'qubit' else 'tensor'}.json"
    return Path(resources.files("fragsolve") / "data" / fname)
