"""Non-contextuality test for Pauli sets and its Z/T class decomposition.

A set S is non-contextual when it splits as S = Z u T with Z the words
commuting with all of S, and commutation an equivalence relation on T:
within a class all pairs commute, across classes all pairs anticommute.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple

from .pauli import PauliError, PauliWord, SizeMismatch, commutes


class DuplicateWord(PauliError):
    pass


@dataclass(frozen=True)
class NCDecomposition:
    """Z/T split of a Pauli set; classes are the commutation classes of T.

    When ``is_noncontextual`` is False the class list holds the partial
    grouping reached when transitivity first failed and must not be used
    for solving.
    """

    n_qubits: int
    z_set: Tuple[PauliWord, ...]
    classes: Tuple[Tuple[PauliWord, ...], ...]
    is_noncontextual: bool

    def all_words(self) -> Tuple[PauliWord, ...]:
        out = list(self.z_set)
        for cls in self.classes:
            out.extend(cls)
        return tuple(out)

    def __len__(self) -> int:
        return len(self.z_set) + sum(len(c) for c in self.classes)


def _canonical(n: int, z_set, classes, verdict) -> NCDecomposition:
    z = tuple(sorted(z_set, key=PauliWord.key))
    cls = tuple(
        tuple(sorted(c, key=PauliWord.key))
        for c in sorted(classes, key=lambda c: min(w.key() for w in c))
    )
    return NCDecomposition(n, z, cls, verdict)


def decompose(words: Sequence[PauliWord]) -> NCDecomposition:
    """Split a Pauli set into Z and commutation classes; test transitivity.

    Z is canonical-maximal: every word commuting with the whole set goes
    to Z before classes are formed.  The class grouping checks every pair
    exactly once, so a True verdict certifies the full commutation table.
    """
    if not words:
        raise PauliError("empty Pauli set")
    n = words[0].n
    seen = set()
    for w in words:
        if w.n != n:
            raise SizeMismatch("mixed qubit counts in Pauli set")
        if w in seen:
            raise DuplicateWord(f"duplicate word {w}")
        seen.add(w)

    z_set = [
        w for w in words if all(commutes(w, v) for v in words if v is not w)
    ]
    z_words = set(z_set)
    t_words = [w for w in words if w not in z_words]

    classes: List[List[PauliWord]] = []
    for w in t_words:
        home = None
        for cls in classes:
            rel = [commutes(w, member) for member in cls]
            if all(rel):
                if home is not None:
                    return _canonical(n, z_set, classes, False)
                home = cls
            elif any(rel):
                return _canonical(n, z_set, classes, False)
        if home is None:
            classes.append([w])
        else:
            home.append(w)
    return _canonical(n, z_set, classes, True)


def admits_insertion(
    dec: NCDecomposition, w: PauliWord
) -> Tuple[bool, NCDecomposition | None]:
    """Whether dec's word set stays non-contextual with w added.

    Fast paths cover the common greedy-partitioning cases (w joins Z, one
    class, or a new class).  When w anticommutes with a current Z word the
    Z/T split itself changes, so the verdict falls back to a from-scratch
    decompose; the result always equals the from-scratch answer.

    A full membership scan per class is required for soundness: a
    candidate's commutation pattern against a valid class need not be
    uniform, so checking one representative per class can miss
    transitivity failures.
    """
    if not dec.is_noncontextual:
        raise PauliError("cannot insert into a contextual decomposition")
    if w.n != dec.n_qubits:
        raise SizeMismatch(f"word on {w.n} qubits, decomposition on {dec.n_qubits}")
    if len(dec) == 0:
        return True, _canonical(dec.n_qubits, [w], [], True)
    if w in dec.z_set or any(w in c for c in dec.classes):
        raise DuplicateWord(f"duplicate word {w}")

    z_clean = all(commutes(w, zw) for zw in dec.z_set)
    rels = []  # per class: (all_commute, any_commute)
    for cls in dec.classes:
        rel = [commutes(w, member) for member in cls]
        rels.append((all(rel), any(rel)))

    if z_clean and all(allc for allc, _ in rels):
        # w commutes with everything present: joins Z.
        return True, _canonical(dec.n_qubits, list(dec.z_set) + [w], dec.classes, True)

    # w lands in T.  Mixed pattern against one class breaks transitivity
    # regardless of how the Z/T split shifts, as does full commutation
    # with two distinct (mutually anticommuting) classes.
    full = [i for i, (allc, _) in enumerate(rels) if allc]
    mixed = any(anyc and not allc for allc, anyc in rels)
    if mixed or len(full) >= 2:
        return False, None
    if not z_clean:
        # Some Z words move into T; recompute from scratch (rare).
        fresh = decompose(list(dec.all_words()) + [w])
        return (fresh.is_noncontextual, fresh if fresh.is_noncontextual else None)

    classes = [list(c) for c in dec.classes]
    if full:
        classes[full[0]].append(w)
    else:
        classes.append([w])
    return True, _canonical(dec.n_qubits, dec.z_set, classes, True)


def connected_components(words: Sequence[PauliWord]) -> List[List[PauliWord]]:
    """Group words into connected components of the shared-qubit graph.

    Words in different components act on disjoint qubits, hence commute;
    a fragment is exactly solvable when every component is non-contextual
    even if the union set is not.
    """
    remaining = list(words)
    components: List[List[PauliWord]] = []
    while remaining:
        seed = remaining.pop(0)
        comp = [seed]
        occ = seed.x | seed.z
        grew = True
        while grew:
            grew = False
            keep = []
            for w in remaining:
                if (w.x | w.z) & occ:
                    comp.append(w)
                    occ |= w.x | w.z
                    grew = True
                else:
                    keep.append(w)
            remaining = keep
        components.append(sorted(comp, key=PauliWord.key))
    components.sort(key=lambda c: c[0].key())
    return components


def is_blockwise_noncontextual(words: Sequence[PauliWord]) -> bool:
    """True when every support-connected component is non-contextual.

    Weaker than plain non-contextuality of the union, but still certifies
    exact solvability (components act on disjoint qubits).
    """
    nontrivial = [w for w in words if not w.is_identity]
    if not nontrivial:
        return True
    return all(
        decompose(comp).is_noncontextual
        for comp in connected_components(nontrivial)
    )
