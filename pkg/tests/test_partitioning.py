"""Tests for greedy partitioning, FNC refinement, and verification."""

import numpy as np
import pytest

from fragsolve.contextuality import decompose
from fragsolve.io import HeisenbergSpec, heisenberg_model
from fragsolve.partitioning import (
    EmptyHamiltonian,
    Partition,
    fnc_partition,
    greedy_partition,
    heisenberg_partition,
    verify_partition,
)
from fragsolve.pauli import PauliSum, PauliWord, commutes, parse_pauli


def random_hamiltonian(rng, n, k):
    terms = {}
    while len(terms) < k:
        w = PauliWord(n, int(rng.integers(0, 1 << n)), int(rng.integers(0, 1 << n)))
        terms[w] = float(rng.normal())
    return PauliSum(n, terms)


def reassemble(p):
    total = PauliSum.zero(p.fragments[0].n)
    for f in p.fragments:
        total = total + f
    return total


class TestGreedy:
    def test_single_term_every_criterion(self):
        h = PauliSum.from_strings(2, [(0.7, "X0 Z1")])
        for crit in ("AC", "FC", "NC"):
            p = greedy_partition(h, crit)
            assert p.n_fragments == 1

    def test_empty_rejected(self):
        with pytest.raises(EmptyHamiltonian):
            greedy_partition(PauliSum.zero(2), "FC")

    def test_identity_only(self):
        h = PauliSum.from_strings(2, [(0.5, "")])
        p = greedy_partition(h, "NC")
        assert p.n_fragments == 1
        assert p.fragments[0].coeff(PauliWord.identity(2)) == 0.5

    def test_identity_attached_to_first_fragment(self):
        h = PauliSum.from_strings(1, [(1.0, "X0"), (0.5, "Z0"), (0.25, "")])
        p = greedy_partition(h, "FC")
        assert p.fragments[0].coeff(PauliWord.identity(1)) == 0.25
        assert reassemble(p).max_abs_diff(h) < 1e-12

    @pytest.mark.parametrize("crit", ["AC", "FC", "NC"])
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_reassembly_and_criteria(self, crit, seed):
        rng = np.random.default_rng(seed)
        h = random_hamiltonian(rng, 4, 24)
        p = greedy_partition(h, crit)
        assert reassemble(p).max_abs_diff(h) < 1e-12
        report = verify_partition(p, h)
        assert report.ok, report

    def test_deterministic(self):
        rng = np.random.default_rng(42)
        h = random_hamiltonian(rng, 5, 30)
        p1 = greedy_partition(h, "NC")
        p2 = greedy_partition(h, "NC")
        assert p1 == p2

    def test_extra_sweeps_change_nothing(self):
        # The three criteria are monotone under fragment growth, so
        # re-sweeping the residual cannot admit new terms.
        rng = np.random.default_rng(3)
        h = random_hamiltonian(rng, 4, 20)
        for crit in ("AC", "FC", "NC"):
            assert greedy_partition(h, crit) == greedy_partition(h, crit, sweeps=3)

    def test_nc_never_more_fragments_than_single_terms(self):
        rng = np.random.default_rng(9)
        h = random_hamiltonian(rng, 3, 12)
        p = greedy_partition(h, "NC")
        assert 1 <= p.n_fragments <= len(h)


class TestFNC:
    def test_single_fc_fragment_is_noop(self):
        h = PauliSum.from_strings(2, [(1.0, "Z0"), (0.5, "Z1"), (0.25, "Z0 Z1")])
        fc = greedy_partition(h, "FC")
        assert fc.n_fragments == 1
        p = fnc_partition(h)
        assert p.n_fragments == 1
        assert reassemble(p).max_abs_diff(h) < 1e-12

    @pytest.mark.parametrize("seed", [0, 1, 2, 3])
    def test_fnc_never_exceeds_fc(self, seed):
        rng = np.random.default_rng(seed)
        h = random_hamiltonian(rng, 4, 30)
        fc = greedy_partition(h, "FC")
        p = fnc_partition(h)
        assert p.n_fragments <= fc.n_fragments
        report = verify_partition(p, h)
        assert report.ok, report

    def test_fnc_actually_merges(self):
        # One qubit: FC needs 3 fragments (X, Y, Z mutually anticommute),
        # NC admits all three as singleton classes.
        h = PauliSum.from_strings(1, [(1.0, "X0"), (0.8, "Y0"), (0.6, "Z0")])
        assert greedy_partition(h, "FC").n_fragments == 3
        assert fnc_partition(h).n_fragments == 1


class TestVerify:
    def test_detects_perturbed_coefficient(self):
        rng = np.random.default_rng(5)
        h = random_hamiltonian(rng, 3, 10)
        p = greedy_partition(h, "FC")
        frag0 = p.fragments[0]
        word = frag0.words()[0]
        tampered = frag0 + PauliSum(3, {word: 1e-3})
        bad = Partition(p.method, (tampered,) + p.fragments[1:], p.source_hash)
        report = verify_partition(bad, h)
        assert not report.sum_ok
        assert any(abs(d - 1e-3) < 1e-9 for _, d in report.discrepancies)

    def test_detects_wrong_criterion(self):
        h = PauliSum.from_strings(1, [(1.0, "X0"), (0.5, "Z0")])
        bad = Partition("FC", (h,), "x")
        report = verify_partition(bad, h)
        assert not report.ok
        assert not report.fragments[0].criterion_ok


class TestHeisenberg:
    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_fc_three_fragments(self, n):
        spec = HeisenbergSpec.draw(n, seed=7 + n)
        h = heisenberg_model(spec)
        p = heisenberg_partition(spec, "FC")
        assert p.n_fragments == 3
        assert reassemble(p).max_abs_diff(h) < 1e-12
        assert verify_partition(p, h).ok

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_nc_two_fragments(self, n):
        spec = HeisenbergSpec.draw(n, seed=n)
        h = heisenberg_model(spec)
        p = heisenberg_partition(spec, "NC")
        assert p.n_fragments == 2
        assert reassemble(p).max_abs_diff(h) < 1e-12
        report = verify_partition(p, h)
        assert report.ok, report

    def test_nc_first_fragment_needs_blockwise_certificate(self):
        # The odd-bond + field fragment is a disjoint union of NC blocks
        # but fails the plain single-set transitivity test.
        spec = HeisenbergSpec.draw(2, seed=1)
        p = heisenberg_partition(spec, "NC")
        words = [w for w in p.fragments[0].words() if not w.is_identity]
        assert not decompose(words).is_noncontextual
        report = verify_partition(p, heisenberg_model(spec))
        assert report.fragments[0].certificate == "noncontextual-blockwise"

    def test_term_counts(self):
        for n in (1, 2, 5):
            spec = HeisenbergSpec.draw(n, seed=n)
            h = heisenberg_model(spec)
            assert len(h) == 3 * (2 * n - 1) + 2 * n
