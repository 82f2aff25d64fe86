"""Tests for non-contextuality decomposition and incremental insertion."""

import itertools

import numpy as np
import pytest

from fragsolve.contextuality import (
    DuplicateWord,
    admits_insertion,
    connected_components,
    decompose,
    is_blockwise_noncontextual,
)
from fragsolve.pauli import PauliWord, commutes, parse_pauli


def words(n, *texts):
    return [parse_pauli(t, n) for t in texts]


def random_words(rng, n, k):
    out = []
    seen = set()
    while len(out) < k:
        w = PauliWord(n, int(rng.integers(0, 1 << n)), int(rng.integers(0, 1 << n)))
        if w not in seen and not w.is_identity:
            seen.add(w)
            out.append(w)
    return out


class TestDecompose:
    def test_pairwise_commuting_all_in_z(self):
        dec = decompose(words(3, "Z0", "Z1", "Z0 Z1", "Z2"))
        assert dec.is_noncontextual
        assert len(dec.z_set) == 4 and not dec.classes

    def test_pairwise_anticommuting_singleton_classes(self):
        dec = decompose(words(1, "X0", "Y0", "Z0"))
        assert dec.is_noncontextual
        assert not dec.z_set and len(dec.classes) == 3
        assert all(len(c) == 1 for c in dec.classes)

    def test_contextual_triple(self):
        # X0 ~ X0X1 and X0X1 ~ Z0Z1 commute, but X0, Z0Z1 anticommute.
        dec = decompose(words(2, "X0", "Z0", "X0 X1", "Z0 Z1"))
        assert not dec.is_noncontextual

    def test_zset_membership_is_commutes_with_all(self):
        ws = words(2, "X0 X1", "Y0 Y1", "Z0 Z1", "Z0", "Z1")
        dec = decompose(ws)
        assert dec.is_noncontextual
        for zw in dec.z_set:
            assert all(commutes(zw, w) for w in ws)
        # Z0Z1 commutes with everything here and must land in Z.
        assert parse_pauli("Z0 Z1", 2) in dec.z_set
        assert len(dec.classes) == 2

    def test_across_class_pairs_anticommute(self):
        dec = decompose(words(2, "X0 X1", "Y0 Y1", "Z0", "Z1"))
        assert dec.is_noncontextual
        for c1, c2 in itertools.combinations(dec.classes, 2):
            for a in c1:
                for b in c2:
                    assert not commutes(a, b)

    def test_order_independent(self):
        rng = np.random.default_rng(19)
        ws = words(2, "X0 X1", "Y0 Y1", "Z0 Z1", "Z0", "Z1", "X0 Y1")
        base = decompose(ws)
        for _ in range(20):
            perm = list(ws)
            rng.shuffle(perm)
            dec = decompose(perm)
            assert dec.is_noncontextual == base.is_noncontextual
            assert dec.z_set == base.z_set
            assert dec.classes == base.classes

    def test_duplicate_rejected(self):
        with pytest.raises(DuplicateWord):
            decompose(words(1, "X0", "X0"))


class TestAdmitsInsertion:
    def test_identity_always_insertable(self):
        dec = decompose(words(1, "X0", "Y0"))
        ok, updated = admits_insertion(dec, PauliWord.identity(1))
        assert ok and PauliWord.identity(1) in updated.z_set

    def test_insert_into_empty(self):
        from fragsolve.contextuality import NCDecomposition

        empty = NCDecomposition(2, (), (), True)
        ok, updated = admits_insertion(empty, parse_pauli("X0", 2))
        assert ok and len(updated) == 1

    def test_lazy_representative_check_would_be_unsound(self):
        # Valid decomposition: class {X0, Z1} (reps commute) vs {Y0 X1}.
        dec = decompose(words(2, "X0", "Z1", "Y0 X1"))
        assert dec.is_noncontextual
        # Z0 anticommutes with both class representatives but commutes
        # with the non-representative member Z1: must be rejected.
        ok, _ = admits_insertion(dec, parse_pauli("Z0", 2))
        assert not ok
        fresh = decompose(words(2, "X0", "Z1", "Y0 X1", "Z0"))
        assert not fresh.is_noncontextual

    def test_duplicate_rejected(self):
        dec = decompose(words(1, "X0"))
        with pytest.raises(DuplicateWord):
            admits_insertion(dec, parse_pauli("X0", 1))

    @pytest.mark.parametrize("seed", range(10))
    def test_incremental_matches_scratch(self, seed):
        # 50 insert sequences per seed: incremental verdict and structure
        # must equal decompose-from-scratch at every step.
        rng = np.random.default_rng(seed)
        for _ in range(50):
            ws = random_words(rng, 4, int(rng.integers(2, 9)))
            from fragsolve.contextuality import NCDecomposition

            dec = NCDecomposition(4, (), (), True)
            accepted = []
            for w in ws:
                ok, updated = admits_insertion(dec, w)
                fresh = decompose(accepted + [w]) if accepted else decompose([w])
                assert ok == fresh.is_noncontextual
                if ok:
                    accepted.append(w)
                    dec = updated
                    assert dec.z_set == fresh.z_set
                    assert dec.classes == fresh.classes


class TestComponents:
    def test_disjoint_blocks_split(self):
        ws = words(4, "X0 X1", "Z0", "X2 X3", "Z3")
        comps = connected_components(ws)
        assert len(comps) == 2
        assert all(len(c) == 2 for c in comps)

    def test_chain_merges(self):
        ws = words(3, "X0 X1", "X1 X2")
        assert len(connected_components(ws)) == 1

    def test_blockwise_nc_weaker_than_global(self):
        # Two disjoint blocks, each non-contextual, whose union fails the
        # global transitivity test (X0X1 ~ Z2 ~ Z0 but X0X1, Z0 anticommute).
        ws = words(4, "X0 X1", "Y0 Y1", "Z0", "Z1", "X2 X3", "Y2 Y3", "Z2", "Z3")
        assert not decompose(ws).is_noncontextual
        assert is_blockwise_noncontextual(ws)
