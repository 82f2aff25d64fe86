"""Analytic solver for non-contextual Pauli fragments.

Pipeline: factor the fragment into a symmetry-group part (an abelian group
of Pauli words with GF(2)-independent generators) and a mutually
anticommuting representative set, with group-algebra polynomials as
coefficients; build a Clifford tableau sending the generators to
single-qubit Z's; then solve each simultaneous eigenspace ("sector") of
the generators by a plane-rotation recursion that collapses the
anticommuting combination onto one Pauli word.

Fragments whose support splits into disjoint connected components are
solved per component; the components' solutions combine by convolution.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from .contextuality import connected_components, decompose
from .pauli import PauliError, PauliSum, PauliWord, commutes, multiply

SECTOR_CAP = 20


class ContextualInput(PauliError):
    pass


class PhaseInconsistency(PauliError):
    """A group element acquired an imaginary coefficient; cannot happen
    for Hermitian input and indicates an internal error."""


class NonCommutingInput(PauliError):
    pass


class BadSectorLength(PauliError):
    pass


class TooManySectors(PauliError):
    pass


# ---------------------------------------------------------------------------
# GF(2) helpers.  Symplectic vectors are packed ints (z << n) | x; the
# constraint row for "symplectic product with v" is (v.x << n) | v.z.


def _vec(w: PauliWord) -> int:
    return (w.z << w.n) | w.x


def _dual(w: PauliWord) -> int:
    return (w.x << w.n) | w.z


def _word_from_vec(n: int, vec: int) -> PauliWord:
    mask = (1 << n) - 1
    return PauliWord(n, vec & mask, vec >> n)


class _GF2Span:
    """Echelonized span with combination tracking (pivot = highest bit)."""

    def __init__(self):
        self.rows: Dict[int, Tuple[int, int]] = {}

    def reduce(self, vec: int, combo: int = 0) -> Tuple[int, int]:
        while vec:
            pivot = vec.bit_length() - 1
            if pivot not in self.rows:
                break
            rvec, rcombo = self.rows[pivot]
            vec ^= rvec
            combo ^= rcombo
        return vec, combo

    def insert(self, vec: int, combo: int) -> bool:
        """Insert (reduced against current rows); False if dependent."""
        vec, combo = self.reduce(vec, combo)
        if vec == 0:
            return False
        self.rows[vec.bit_length() - 1] = (vec, combo)
        return True

    def coordinates(self, vec: int) -> Optional[int]:
        """Combination mask expressing vec, or None if outside the span."""
        vec, combo = self.reduce(vec)
        return combo if vec == 0 else None


class _GF2System:
    """Linear constraints row * x = rhs over GF(2), kept in reduced form."""

    def __init__(self, m: int):
        self.m = m
        self.rows: Dict[int, Tuple[int, int]] = {}  # pivot -> (mask, rhs)

    def _reduce(self, mask: int, rhs: int) -> Tuple[int, int]:
        while mask:
            pivot = mask.bit_length() - 1
            if pivot not in self.rows:
                break
            rmask, rrhs = self.rows[pivot]
            mask ^= rmask
            rhs ^= rrhs
        return mask, rhs

    def add(self, mask: int, rhs: int) -> bool:
        """Add a constraint; False (and no change) when inconsistent."""
        mask, rhs = self._reduce(mask, rhs)
        if mask == 0:
            return rhs == 0
        pivot = mask.bit_length() - 1
        # Back-eliminate the new pivot to keep rows fully reduced.
        for p, (rmask, rrhs) in list(self.rows.items()):
            if rmask >> pivot & 1:
                self.rows[p] = (rmask ^ mask, rrhs ^ rhs)
        self.rows[pivot] = (mask, rhs)
        return True

    def solve(self) -> int:
        """Particular solution with all free variables zero."""
        x = 0
        for pivot, (_, rhs) in self.rows.items():
            if rhs:
                x |= 1 << pivot
        return x

    def homogeneous_nonzero(self) -> int:
        """A nonzero solution of rows * x = 0; requires an underdetermined
        system (fewer pivots than unknowns)."""
        pivots = set(self.rows)
        free = next(i for i in range(self.m) if i not in pivots)
        x = 1 << free
        for pivot, (mask, _) in self.rows.items():
            if mask >> free & 1:
                x |= 1 << pivot
        return x


# ---------------------------------------------------------------------------
# Group reduction and fragment factorization


def group_reduce(
    words: Sequence[PauliWord],
) -> Tuple[List[PauliWord], List[Tuple[int, ...]], List[int]]:
    """Minimal generating set of a commuting word list, with bookkeeping.

    Returns (basis, exponents, signs): basis is GF(2)-independent and each
    input word equals sign * product of basis elements flagged by its
    exponent vector (product taken in ascending basis order).
    """
    for i, a in enumerate(words):
        for b in words[i + 1:]:
            if not commutes(a, b):
                raise NonCommutingInput(f"{a} and {b} anticommute")

    basis: List[PauliWord] = []
    span = _GF2Span()
    combos: List[int] = []
    for w in words:
        vec, combo = span.reduce(_vec(w))
        if vec == 0:
            combos.append(combo)
        else:
            idx = len(basis)
            basis.append(w)
            span.insert(_vec(w), combo | (1 << idx))
            combos.append(1 << idx)

    k = len(basis)
    exponents: List[Tuple[int, ...]] = []
    signs: List[int] = []
    for w, combo in zip(words, combos):
        exp = tuple((combo >> j) & 1 for j in range(k))
        phase, prod = _product(basis, combo)
        if prod != w:
            raise PhaseInconsistency(f"reduction of {w} does not reproduce it")
        if phase == 1:
            signs.append(1)
        elif phase == -1:
            signs.append(-1)
        else:
            raise PhaseInconsistency(f"imaginary phase {phase} for {w}")
        exponents.append(exp)
    return basis, exponents, signs


def _product(words: Sequence[PauliWord], combo: int) -> Tuple[complex, PauliWord]:
    """Multiply out the words flagged by combo (ascending index order)."""
    n = words[0].n if words else 1
    phase: complex = 1
    acc = PauliWord.identity(n)
    j = 0
    while combo:
        if combo & 1:
            p, acc = multiply(acc, words[j])
            phase *= p
        combo >>= 1
        j += 1
    return phase, acc


@dataclass(frozen=True)
class NonContextualStructure:
    """Factored fragment: sum_i p_i(C_1..C_K) A_i + p_0(C_1..C_K).

    polys[0] is p_0 and polys[i] belongs to reps[i-1]; each polynomial
    maps a GF(2)^K exponent tuple (which generators multiply) to a real
    coefficient with all Pauli-product signs folded in.
    """

    n_qubits: int
    group_basis: Tuple[PauliWord, ...]
    reps: Tuple[PauliWord, ...]
    polys: Tuple[Dict[Tuple[int, ...], float], ...]

    @property
    def k(self) -> int:
        return len(self.group_basis)

    @property
    def l(self) -> int:
        return len(self.reps)


def expand_structure(s: NonContextualStructure) -> PauliSum:
    """Multiply the factored form back out term by term."""
    acc: Dict[PauliWord, float] = {}
    anchors = (None,) + s.reps
    for poly, anchor in zip(s.polys, anchors):
        for exp, coeff in poly.items():
            combo = sum(1 << j for j, e in enumerate(exp) if e)
            phase, word = _product(list(s.group_basis), combo)
            if anchor is not None:
                p2, word = multiply(word, anchor)
                phase *= p2
            if phase == 1:
                val = coeff
            elif phase == -1:
                val = -coeff
            else:
                raise PhaseInconsistency(f"imaginary expansion phase {phase}")
            acc[word] = acc.get(word, 0.0) + val
    return PauliSum(s.n_qubits, acc)


def factor_noncontextual(frag: PauliSum) -> NonContextualStructure:
    """Factor a non-contextual fragment per the class-representative scheme.

    Representatives are the canonical-first member of each commutation
    class; every other class member A_ij contributes the group word
    C_ij = A_ij * A_i to p_i with its product sign; the group basis is the
    GF(2) reduction of the Z words together with all C_ij.  The expansion
    is re-checked against the input before returning.
    """
    words = [w for w in frag.words() if not w.is_identity]
    if not words:
        raise ContextualInput("fragment has no non-identity terms")
    dec = decompose(words)
    if not dec.is_noncontextual:
        raise ContextualInput("fragment set is contextual")

    reps = tuple(cls[0] for cls in dec.classes)
    group_words: List[PauliWord] = list(dec.z_set)
    group_coeffs: List[Tuple[int, float]] = [
        (0, frag.coeff(w)) for w in dec.z_set
    ]  # (poly index, coefficient with product phase folded in)
    for i, cls in enumerate(dec.classes):
        for member in cls:
            phase, c_word = multiply(member, reps[i])
            if phase == 1:
                val = frag.coeff(member)
            elif phase == -1:
                val = -frag.coeff(member)
            else:
                raise PhaseInconsistency(
                    f"commuting same-class product {member} * {reps[i]} gave {phase}"
                )
            group_words.append(c_word)
            group_coeffs.append((i + 1, val))

    basis, exponents, signs = group_reduce(group_words)
    polys: List[Dict[Tuple[int, ...], float]] = [dict() for _ in range(len(reps) + 1)]
    ident = PauliWord.identity(frag.n)
    const = frag.coeff(ident)
    if const:
        polys[0][(0,) * len(basis)] = const
    for (poly_idx, coeff), exp, sign in zip(group_coeffs, exponents, signs):
        key = exp
        polys[poly_idx][key] = polys[poly_idx].get(key, 0.0) + coeff * sign

    s = NonContextualStructure(frag.n, tuple(basis), reps, tuple(polys))
    if expand_structure(s).max_abs_diff(frag) > 1e-12:
        raise PhaseInconsistency("factored form does not reproduce the fragment")
    return s


# ---------------------------------------------------------------------------
# Tapering Clifford


def z_word(n: int, q: int) -> PauliWord:
    return PauliWord(n, 0, 1 << (n - 1 - q))


def x_word(n: int, q: int) -> PauliWord:
    return PauliWord(n, 1 << (n - 1 - q), 0)


@dataclass(frozen=True)
class CliffordTableau:
    """Conjugation action of a Clifford: images of all X_q and Z_q.

    Each image is (sign, word) with sign +-1.  The underlying GF(2) map is
    symplectic, so commutation relations are preserved and the tableau is
    invertible.
    """

    n: int
    x_images: Tuple[Tuple[int, PauliWord], ...]
    z_images: Tuple[Tuple[int, PauliWord], ...]

    def apply(self, w: PauliWord) -> Tuple[int, PauliWord]:
        """Image of a word under conjugation, as (sign, word)."""
        if w.n != self.n:
            raise PauliError(f"word on {w.n} qubits, tableau on {self.n}")
        n = self.n
        phase: complex = 1j ** ((w.x & w.z).bit_count())
        sign = 1
        acc = PauliWord.identity(n)
        for q in range(n):
            if w.x >> (n - 1 - q) & 1:
                s, img = self.x_images[q]
                sign *= s
                p, acc = multiply(acc, img)
                phase *= p
        for q in range(n):
            if w.z >> (n - 1 - q) & 1:
                s, img = self.z_images[q]
                sign *= s
                p, acc = multiply(acc, img)
                phase *= p
        # Reference decomposition w = i^{|x&z|} prod X_q prod Z_q carries
        # the inverse of that i power; fold it back in.
        phase *= (-1j) ** ((w.x & w.z).bit_count())
        if phase == 1:
            return sign, acc
        if phase == -1:
            return -sign, acc
        raise PhaseInconsistency(f"non-real tableau image phase {phase}")

    def matrix(self):
        """2n x 2n GF(2) symplectic matrix (column = image bits, x rows
        first) and the per-generator sign vector."""
        import numpy as np

        n = self.n
        m = np.zeros((2 * n, 2 * n), dtype=np.uint8)
        signs = np.zeros(2 * n, dtype=np.int8)
        for col, (s, img) in enumerate(self.x_images + self.z_images):
            signs[col] = s
            for q in range(n):
                if img.x >> (n - 1 - q) & 1:
                    m[q, col] = 1
                if img.z >> (n - 1 - q) & 1:
                    m[n + q, col] = 1
        return m, signs


def build_tapering_clifford(s: NonContextualStructure) -> CliffordTableau:
    """Clifford sending generator C_k to Z on qubit k with +1 sign.

    Built abstractly as a symplectic basis map: destabilizers D_k are
    solved over GF(2) to pair with the C_k, preferring solutions that
    also commute with every representative so rep images avoid the
    symmetry qubits; the remaining register is completed by symplectic
    Gram-Schmidt.  Any GF(2) dependency between representatives and
    generators makes full avoidance impossible, in which case rep images
    carry Z factors on symmetry qubits (handled downstream as
    sector-dependent signs).
    """
    n = s.n_qubits
    m = 2 * n
    k = s.k
    c_vecs = [_vec(w) for w in s.group_basis]
    a_vecs = [_vec(w) for w in s.reps]

    d_vecs: List[int] = []
    for idx in range(k):
        sys = _GF2System(m)
        for l, cv in enumerate(c_vecs):
            if not sys.add(_dual(_word_from_vec(n, cv)), 1 if l == idx else 0):
                raise PhaseInconsistency("generator constraints inconsistent")
        for dv in d_vecs:
            sys.add(_dual(_word_from_vec(n, dv)), 0)
        for av in a_vecs:
            sys.add(_dual(_word_from_vec(n, av)), 0)  # soft; skipped if inconsistent
        d_vecs.append(sys.solve())

    found = [(cv, dv) for cv, dv in zip(c_vecs, d_vecs)]
    pairs: List[Tuple[int, int]] = list(found)
    flat = [v for pair in pairs for v in pair]
    while len(pairs) < n:
        sys = _GF2System(m)
        for v in flat:
            sys.add(_dual(_word_from_vec(n, v)), 0)
        s_vec = sys.homogeneous_nonzero()
        sys2 = _GF2System(m)
        for v in flat:
            sys2.add(_dual(_word_from_vec(n, v)), 0)
        if not sys2.add(_dual(_word_from_vec(n, s_vec)), 1):
            raise PhaseInconsistency("symplectic completion failed")
        t_vec = sys2.solve()
        pairs.append((s_vec, t_vec))
        flat.extend((s_vec, t_vec))

    basis_words: List[PauliWord] = []
    target_words: List[PauliWord] = []
    for q, (sv, tv) in enumerate(pairs):
        basis_words.append(_word_from_vec(n, sv))
        target_words.append(z_word(n, q))
        basis_words.append(_word_from_vec(n, tv))
        target_words.append(x_word(n, q))

    span = _GF2Span()
    for j, w in enumerate(basis_words):
        if not span.insert(_vec(w), 1 << j):
            raise PhaseInconsistency("tapering basis is GF(2)-dependent")

    def image(w: PauliWord) -> Tuple[int, PauliWord]:
        combo = span.coordinates(_vec(w))
        if combo is None:
            raise PhaseInconsistency("tapering basis does not span the register")
        pb, wb = _product(basis_words, combo)
        if wb != w:
            raise PhaseInconsistency("basis product mismatch")
        pt, wt = _product(target_words, combo)
        ratio = pt / pb
        if ratio == 1:
            return 1, wt
        if ratio == -1:
            return -1, wt
        raise PhaseInconsistency(f"non-real image phase {ratio}")

    tab = CliffordTableau(
        n,
        tuple(image(x_word(n, q)) for q in range(n)),
        tuple(image(z_word(n, q)) for q in range(n)),
    )
    for idx, cw in enumerate(s.group_basis):
        sign, img = tab.apply(cw)
        if sign != 1 or img != z_word(n, idx):
            raise PhaseInconsistency(f"generator {cw} did not taper to Z{idx}")
    return tab


@dataclass(frozen=True)
class TaperedStructure:
    """Tapering data for one structure: rep images split into a sign, a
    Z-dressing on the symmetry qubits, and a core word beyond them."""

    structure: NonContextualStructure
    tableau: CliffordTableau
    rep_signs: Tuple[int, ...]
    rep_dressings: Tuple[Tuple[int, ...], ...]  # symmetry-qubit indices
    rep_cores: Tuple[PauliWord, ...]
    zs_qubit: Optional[int]
    zs_word: Optional[PauliWord]
    r_reflections: Tuple[Tuple[PauliWord, PauliWord], ...]


def taper_structure(s: NonContextualStructure) -> TaperedStructure:
    tab = build_tapering_clifford(s)
    n, k = s.n_qubits, s.k
    signs: List[int] = []
    dressings: List[Tuple[int, ...]] = []
    cores: List[PauliWord] = []
    sym_mask = 0
    for q in range(k):
        sym_mask |= 1 << (n - 1 - q)
    for a in s.reps:
        sign, img = tab.apply(a)
        if img.x & sym_mask:
            raise PhaseInconsistency("rep image has X support on a symmetry qubit")
        dress = tuple(q for q in range(k) if img.z >> (n - 1 - q) & 1)
        core = PauliWord(n, img.x, img.z & ~sym_mask)
        signs.append(sign)
        dressings.append(dress)
        cores.append(core)
    for i, a in enumerate(cores):
        for b in cores[i + 1:]:
            if commutes(a, b):
                raise PhaseInconsistency("tapered cores do not anticommute")

    zs_qubit = zs = None
    reflections: List[Tuple[PauliWord, PauliWord]] = []
    if cores:
        last = cores[-1]
        zs_qubit = last.support()[0]
        zs = z_word(n, zs_qubit)
        if last != zs:
            if not commutes(last, zs):
                reflections.append((last, zs))
            else:
                bridge = x_word(n, zs_qubit)
                reflections.append((last, bridge))
                reflections.append((bridge, zs))
    return TaperedStructure(
        s, tab, tuple(signs), tuple(dressings), tuple(cores),
        zs_qubit, zs, tuple(reflections),
    )


# ---------------------------------------------------------------------------
# Sector solutions and spectra


@dataclass(frozen=True)
class SectorSolution:
    v: Tuple[int, ...]
    p_values: Tuple[float, ...]  # (p_0, p_1, ..., p_L)
    a: float
    thetas: Tuple[float, ...]
    energies: Tuple[float, float]


def sectors(k: int) -> Iterator[Tuple[int, ...]]:
    """All eigenvalue assignments in {+1,-1}^k; +1 first on every qubit so
    the order matches computational-basis enumeration."""
    return itertools.product((1, -1), repeat=k)


def _poly_value(poly: Dict[Tuple[int, ...], float], v: Sequence[int]) -> float:
    total = 0.0
    for exp, coeff in poly.items():
        term = coeff
        for vk, e in zip(v, exp):
            if e:
                term *= vk
        total += term
    return total


def sector_rotation_coeffs(
    s: NonContextualStructure,
    v: Sequence[int],
    tapered: Optional[TaperedStructure] = None,
) -> Tuple[Tuple[float, ...], Tuple[float, ...], float]:
    """Effective anticommuting coefficients in sector v, the rotation
    angles that collapse them onto the last slot, and the final signed
    coefficient left there.

    When tapering data is supplied, each p_i(v) picks up the tableau sign
    of its rep image and the product of v over the image's Z dressing on
    the symmetry qubits.
    """
    p = [_poly_value(poly, v) for poly in s.polys[1:]]
    if tapered is not None:
        for i in range(len(p)):
            eff = tapered.rep_signs[i]
            for q in tapered.rep_dressings[i]:
                eff *= v[q]
            p[i] *= eff
    if not p:
        return (), (), 0.0
    thetas: List[float] = []
    run = p[-1]
    for j in range(len(p) - 1):
        thetas.append(math.atan2(p[j], run))
        run = math.hypot(p[j], run)
    return tuple(p), tuple(thetas), run


def evaluate_sector(
    s: NonContextualStructure,
    v: Sequence[int],
    tapered: Optional[TaperedStructure] = None,
) -> SectorSolution:
    """Substitute an eigenvalue assignment into the polynomials.

    a(v) is the norm of (p_1..p_L); the angles come from the plane-rotation
    recursion theta_1 = atan2(p_1, p_L), theta_j = atan2(p_j, accumulated
    norm), which leaves (0,...,0,a) when applied to the coefficient vector.
    """
    v = tuple(v)
    if len(v) != s.k:
        raise BadSectorLength(f"sector length {len(v)}, expected K={s.k}")
    if any(x not in (-1, 1) for x in v):
        raise BadSectorLength("sector entries must be +1 or -1")
    p0 = _poly_value(s.polys[0], v)
    p_raw = tuple(_poly_value(poly, v) for poly in s.polys[1:])
    a = math.sqrt(sum(x * x for x in p_raw))
    _, thetas, _ = sector_rotation_coeffs(s, v, tapered)
    return SectorSolution(v, (p0,) + p_raw, a, thetas, (p0 - a, p0 + a))


def _check_sector_cap(k: int, force: bool) -> None:
    if k > SECTOR_CAP and not force:
        raise TooManySectors(
            f"K={k} means 2^{k} sectors; pass force=True to enumerate anyway"
        )


def fragment_spectrum(
    s: NonContextualStructure, force: bool = False
) -> List[Tuple[float, int]]:
    """Full eigenvalue multiset as sorted (eigenvalue, multiplicity) pairs.

    Each sector of dimension 2^(n-K) contributes p_0(v) +- a(v) with the
    two branches splitting the dimension evenly; a(v) = 0 merges them.
    """
    _check_sector_cap(s.k, force)
    dim = 1 << (s.n_qubits - s.k)
    acc: Dict[float, int] = {}
    for v in sectors(s.k):
        sol = evaluate_sector(s, v)
        if sol.a == 0.0:
            acc[sol.energies[0]] = acc.get(sol.energies[0], 0) + dim
        else:
            for e in sol.energies:
                acc[e] = acc.get(e, 0) + dim // 2
    return sorted(acc.items())


def structure_ground_energy(s: NonContextualStructure, force: bool = False) -> float:
    _check_sector_cap(s.k, force)
    return min(
        evaluate_sector(s, v).energies[0] for v in sectors(s.k)
    )


# ---------------------------------------------------------------------------
# Conditioned diagonalizer description


@dataclass(frozen=True)
class SectorRotationPlan:
    v: Tuple[int, ...]
    p0: float
    a: float
    final_coeff: float  # signed coefficient on the last core after rotating
    rotations: Tuple[Tuple[complex, PauliWord, float], ...]  # (phase, word, angle)


@dataclass(frozen=True)
class DiagonalizerPlan:
    """Everything needed to compile R * V * U_T: the tableau for U_T, the
    per-sector rotation sequences for V, and the final reflections for R."""

    tapered: TaperedStructure
    sector_plans: Tuple[SectorRotationPlan, ...]


def conditioned_diagonalizer(
    s: NonContextualStructure,
    tapered: Optional[TaperedStructure] = None,
    force: bool = False,
) -> DiagonalizerPlan:
    """Per-sector rotation sequences exp(theta/2 * A'_L A'_j) plus the
    final word rotation, as data for dense compilation.

    For L = 1 (no plane available) a negative sector coefficient is fixed
    by a conditional pi rotation against a bridge word, so the compiled
    unitary always diagonalizes the fragment.
    """
    if tapered is None:
        tapered = taper_structure(s)
    _check_sector_cap(s.k, force)
    cores = tapered.rep_cores
    plans: List[SectorRotationPlan] = []
    for v in sectors(s.k):
        p0 = _poly_value(s.polys[0], v)
        ptilde, thetas, final = sector_rotation_coeffs(s, v, tapered)
        a = math.sqrt(sum(x * x for x in ptilde))
        rotations: List[Tuple[complex, PauliWord, float]] = []
        if len(cores) >= 2:
            for j, theta in enumerate(thetas):
                phase, gen = multiply(cores[-1], cores[j])
                rotations.append((phase, gen, theta))
        elif len(cores) == 1 and final < 0.0:
            core = cores[0]
            q0 = core.support()[0]
            bridge = (
                z_word(s.n_qubits, q0)
                if core.axis(q0) in ("X", "Y")
                else x_word(s.n_qubits, q0)
            )
            phase, gen = multiply(bridge, core)
            rotations.append((phase, gen, math.pi))
            final = -final
        plans.append(SectorRotationPlan(v, p0, a, final, tuple(rotations)))
    return DiagonalizerPlan(tapered, tuple(plans))


# ---------------------------------------------------------------------------
# Whole-fragment solving (disjoint-component composition)


@dataclass(frozen=True)
class ComponentSolution:
    """Solution of one support-connected component on its compact register."""

    qubits: Tuple[int, ...]  # global qubit index per local qubit
    structure: NonContextualStructure
    tapered: TaperedStructure
    plan: DiagonalizerPlan


@dataclass(frozen=True)
class FragmentSolution:
    n_qubits: int
    constant: float
    components: Tuple[ComponentSolution, ...]

    @property
    def idle_qubits(self) -> int:
        return self.n_qubits - sum(len(c.qubits) for c in self.components)


def _localize(words: Iterable[PauliWord], qubits: Sequence[int], n_local: int):
    index = {g: i for i, g in enumerate(qubits)}

    def to_local(w: PauliWord) -> PauliWord:
        axes = {index[q]: w.axis(q) for q in w.support()}
        return PauliWord.from_axes(n_local, axes)

    return to_local


def solve_fragment(frag: PauliSum, force: bool = False) -> FragmentSolution:
    """Factor, taper, and plan every support-connected component.

    Raises ContextualInput when any component fails the non-contextuality
    test; disjoint unions of non-contextual blocks are accepted even when
    the union set is not non-contextual.
    """
    words = [w for w in frag.words() if not w.is_identity]
    constant = frag.coeff(PauliWord.identity(frag.n))
    comps: List[ComponentSolution] = []
    for comp_words in connected_components(words):
        qubits = tuple(sorted({q for w in comp_words for q in w.support()}))
        to_local = _localize(comp_words, qubits, len(qubits))
        local = PauliSum(
            len(qubits), {to_local(w): frag.coeff(w) for w in comp_words}
        )
        structure = factor_noncontextual(local)
        tapered = taper_structure(structure)
        plan = conditioned_diagonalizer(structure, tapered, force=force)
        comps.append(ComponentSolution(qubits, structure, tapered, plan))
    return FragmentSolution(frag.n, constant, tuple(comps))


def solution_spectrum(sol: FragmentSolution, force: bool = False) -> List[Tuple[float, int]]:
    """Eigenvalue multiset of the whole fragment: the convolution of the
    component spectra, shifted by the constant, padded by idle qubits."""
    acc: Dict[float, int] = {sol.constant: 1 << sol.idle_qubits}
    for comp in sol.components:
        spec = fragment_spectrum(comp.structure, force=force)
        new: Dict[float, int] = {}
        for e0, m0 in acc.items():
            for e1, m1 in spec:
                key = e0 + e1
                new[key] = new.get(key, 0) + m0 * m1
        acc = new
    return sorted(acc.items())


def solution_ground_energy(sol: FragmentSolution, force: bool = False) -> float:
    total = sol.constant
    for comp in sol.components:
        total += structure_ground_energy(comp.structure, force=force)
    return total
