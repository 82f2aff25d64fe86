"""Greedy decomposition of Pauli sums into exactly solvable fragments.

Methods: AC (pairwise anticommuting), FC (pairwise commuting), NC
(non-contextual set), and the FNC heuristic (greedy FC followed by moving
words of smaller fragments into larger ones while they stay
non-contextual).  Closed-form partitions of the extended Heisenberg chain
are provided separately since greedy search cannot reach them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from . import io as model_io
from .contextuality import (
    NCDecomposition,
    admits_insertion,
    decompose,
    is_blockwise_noncontextual,
)
from .pauli import PauliSum, PauliWord, commutes

METHODS = ("AC", "FC", "NC", "FNC")


class EmptyHamiltonian(ValueError):
    pass


@dataclass(frozen=True)
class Partition:
    method: str
    fragments: Tuple[PauliSum, ...]
    source_hash: str

    @property
    def n_fragments(self) -> int:
        return len(self.fragments)


def _sorted_terms(h: PauliSum) -> Tuple[List[Tuple[PauliWord, float]], float]:
    """Non-identity terms by |coeff| descending (canonical tie-break),
    plus the identity coefficient handled as a constant shift."""
    ident = PauliWord.identity(h.n)
    shift = h.coeff(ident)
    terms = [(w, c) for w, c in h.terms().items() if not w.is_identity]
    terms.sort(key=lambda wc: (-abs(wc[1]), wc[0].key()))
    return terms, shift


class _ACState:
    def __init__(self, n):
        self.members: List[PauliWord] = []

    def try_add(self, w: PauliWord) -> bool:
        if any(commutes(w, m) for m in self.members):
            return False
        self.members.append(w)
        return True


class _FCState:
    def __init__(self, n):
        self.members: List[PauliWord] = []

    def try_add(self, w: PauliWord) -> bool:
        if any(not commutes(w, m) for m in self.members):
            return False
        self.members.append(w)
        return True


class _NCState:
    def __init__(self, n):
        self.dec = NCDecomposition(n, (), (), True)

    def try_add(self, w: PauliWord) -> bool:
        ok, updated = admits_insertion(self.dec, w)
        if ok:
            self.dec = updated
        return ok


_STATES: Dict[str, Callable] = {"AC": _ACState, "FC": _FCState, "NC": _NCState}


def greedy_partition(h: PauliSum, criterion: str, sweeps: int = 1) -> Partition:
    """Sorted-insertion greedy grouping under the given criterion.

    Terms are sorted by |coefficient| descending; each fragment is seeded
    with the largest unassigned term and swept over the remaining terms in
    order, keeping every term whose insertion preserves the criterion.
    The identity term never enters the grouping and is re-attached to the
    first fragment as a constant shift.  Deterministic for fixed input.
    """
    criterion = criterion.upper()
    if criterion not in _STATES:
        raise ValueError(f"criterion must be one of AC, FC, NC, got {criterion!r}")
    if len(h) == 0:
        raise EmptyHamiltonian("cannot partition an empty Hamiltonian")
    terms, shift = _sorted_terms(h)
    digest = model_io.hamiltonian_digest(h)

    groups: List[List[Tuple[PauliWord, float]]] = []
    remaining = terms
    while remaining:
        state = _STATES[criterion](h.n)
        group: List[Tuple[PauliWord, float]] = []
        for _ in range(max(1, sweeps)):
            rest = []
            for w, c in remaining:
                if state.try_add(w):
                    group.append((w, c))
                else:
                    rest.append((w, c))
            remaining = rest
            if not remaining:
                break
        groups.append(group)

    return _finish(criterion, h.n, groups, shift, digest)


def _finish(method, n, groups, shift, digest) -> Partition:
    fragments = [PauliSum(n, dict(g)) for g in groups if g]
    if not fragments and abs(shift) > 0:
        fragments = [PauliSum(n, {})]
    if abs(shift) > 0:
        first = fragments[0] + PauliSum(n, {PauliWord.identity(n): shift})
        fragments[0] = first
    return Partition(method, tuple(fragments), digest)


def fnc_partition(h: PauliSum) -> Partition:
    """FC partition refined by non-contextual moves (3-step heuristic).

    Step 1 finds greedy FC fragments, step 2 sorts them by term count,
    step 3 walks the smaller fragments and moves each of their words into
    the largest fragment that stays non-contextual after the insertion.
    Emptied fragments disappear, so the count never exceeds the FC count.
    """
    if len(h) == 0:
        raise EmptyHamiltonian("cannot partition an empty Hamiltonian")
    terms, shift = _sorted_terms(h)
    digest = model_io.hamiltonian_digest(h)

    fc = greedy_partition(
        PauliSum(h.n, dict(terms)) if terms else h, "FC"
    )
    groups: List[Dict[PauliWord, float]] = [dict(f.terms()) for f in fc.fragments]
    states: List[NCDecomposition] = [
        decompose(list(g)) for g in groups
    ]

    donor_order = sorted(
        range(len(groups)),
        key=lambda i: (len(groups[i]), min(w.key() for w in groups[i])),
    )
    for di in donor_order:
        donor = groups[di]
        for w in sorted(donor, key=lambda w: (-abs(donor[w]), w.key())):
            # Ties in size are allowed as recipients; the strict reading
            # would leave equal singleton fragments unmergeable.
            recipients = sorted(
                (i for i in range(len(groups)) if i != di and len(groups[i]) >= len(donor)),
                key=lambda i: (-len(groups[i]), i),
            )
            for ri in recipients:
                ok, updated = admits_insertion(states[ri], w)
                if ok:
                    groups[ri][w] = donor.pop(w)
                    states[ri] = updated
                    break

    kept = [g for g in groups if g]
    kept.sort(key=lambda g: (-len(g), min(w.key() for w in g)))
    return _finish("FNC", h.n, [list(g.items()) for g in kept], shift, digest)


# ---------------------------------------------------------------------------
# Verification


@dataclass(frozen=True)
class FragmentReport:
    index: int
    size: int
    one_norm: float
    criterion_ok: bool
    certificate: str


@dataclass(frozen=True)
class PartitionReport:
    ok: bool
    sum_ok: bool
    disjoint_ok: bool
    discrepancies: Tuple[Tuple[str, float], ...]
    fragments: Tuple[FragmentReport, ...]


def _certify(method: str, words: Sequence[PauliWord]) -> Tuple[bool, str]:
    if method == "AC":
        ok = all(
            not commutes(a, b)
            for i, a in enumerate(words)
            for b in words[i + 1:]
        )
        return ok, "pairwise-anticommuting" if ok else "anticommutation-failure"
    if method == "FC":
        ok = all(
            commutes(a, b) for i, a in enumerate(words) for b in words[i + 1:]
        )
        return ok, "pairwise-commuting" if ok else "commutation-failure"
    if method in ("NC", "FNC"):
        if not words:
            return True, "noncontextual"
        if decompose(list(words)).is_noncontextual:
            return True, "noncontextual"
        # Disjoint-support unions of non-contextual blocks are exactly
        # solvable even when the union set itself fails transitivity.
        if is_blockwise_noncontextual(list(words)):
            return True, "noncontextual-blockwise"
        return False, "contextual"
    raise ValueError(f"unknown method {method!r}")


def verify_partition(p: Partition, h: PauliSum) -> PartitionReport:
    """Check reassembly and per-fragment criteria; failures go in the report."""
    total = PauliSum.zero(h.n)
    seen: Dict[PauliWord, int] = {}
    disjoint_ok = True
    for i, frag in enumerate(p.fragments):
        total = total + frag
        for w in frag.terms():
            if w.is_identity:
                continue
            if w in seen:
                disjoint_ok = False
            seen[w] = i

    discrepancies = []
    for w in set(h.terms()) | set(total.terms()):
        delta = total.coeff(w) - h.coeff(w)
        if abs(delta) > 1e-12:
            discrepancies.append((str(w), delta))
    discrepancies.sort()
    sum_ok = not discrepancies

    reports = []
    for i, frag in enumerate(p.fragments):
        words = [w for w in frag.words() if not w.is_identity]
        ok, cert = _certify(p.method, words)
        reports.append(
            FragmentReport(i, len(words), frag.one_norm(), ok, cert)
        )

    all_ok = sum_ok and disjoint_ok and all(r.criterion_ok for r in reports)
    return PartitionReport(
        all_ok, sum_ok, disjoint_ok, tuple(discrepancies), tuple(reports)
    )


# ---------------------------------------------------------------------------
# Closed-form Heisenberg partitions


def heisenberg_partition(spec: "model_io.HeisenbergSpec", method: str) -> Partition:
    """The chain's closed-form partitions: 3 FC fragments or 2 NC fragments.

    FC: odd bonds / even bonds / the Z field.  NC: odd bonds plus the
    whole field (a disjoint union of five-term non-contextual blocks) and
    the even bonds.  Greedy search does not reliably find the two-fragment
    form, so these are constructed directly from the coefficient arrays.
    """
    method = method.upper()
    h = model_io.heisenberg_model(spec)
    digest = model_io.hamiltonian_digest(h)
    m = 2 * spec.n

    def bond_terms(b):
        return [
            (spec.a[b], f"X{b} X{b + 1}"),
            (spec.b[b], f"Y{b} Y{b + 1}"),
            (spec.c[b], f"Z{b} Z{b + 1}"),
        ]

    odd = [t for b in range(0, m - 1, 2) for t in bond_terms(b)]
    even = [t for b in range(1, m - 1, 2) for t in bond_terms(b)]
    fields = [(spec.d[j], f"Z{j}") for j in range(m)]

    if method == "FC":
        parts = [odd, even, fields]
    elif method == "NC":
        parts = [odd + fields, even]
    else:
        raise ValueError(f"closed-form Heisenberg partition needs FC or NC, got {method!r}")
    fragments = tuple(
        PauliSum.from_strings(m, part) for part in parts if part
    )
    return Partition(method, fragments, digest)
