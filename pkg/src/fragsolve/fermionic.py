"""Fermionic two-body-tensor decompositions and mean-field sector solves.

Tensor convention: g_pqrs multiplies a+_p a_q a+_r a_s (not the
normal-ordered a+a+aa form), with Hermiticity g_pqrs = g_rspq for real
coefficients.  LR eigendecomposes the (pq),(rs) supermatrix; GFRO and
GMF(K) greedily subtract optimized mean-field-solvable fragments, GFRO
being the K = N special case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
import scipy.optimize


class NonSymmetricInput(ValueError):
    pass


class AsymmetricSupermatrix(ValueError):
    pass


class BadK(ValueError):
    pass


class BadSectorLength(ValueError):
    pass


class NonConvergence(RuntimeError):
    """Greedy decomposition hit its fragment cap; carries partial results."""

    def __init__(self, message, fragments):
        super().__init__(message)
        self.fragments = fragments


def frob2(g: np.ndarray) -> float:
    return float(np.sum(np.asarray(g) ** 2))


@dataclass
class TwoBodyTensor:
    """One- and two-body coefficient tensors over n spin orbitals."""

    n: int
    h: np.ndarray
    g: np.ndarray

    def __post_init__(self):
        self.h = np.array(self.h, dtype=float)
        self.g = np.array(self.g, dtype=float)
        if self.h.shape != (self.n, self.n):
            raise NonSymmetricInput(f"h shape {self.h.shape} != {(self.n,) * 2}")
        if self.g.shape != (self.n,) * 4:
            raise NonSymmetricInput(f"g shape {self.g.shape} != {(self.n,) * 4}")
        if not (np.isfinite(self.h).all() and np.isfinite(self.g).all()):
            raise NonSymmetricInput("non-finite tensor entries")
        if np.max(np.abs(self.h - self.h.T), initial=0.0) > 1e-8:
            raise NonSymmetricInput("h_pq != h_qp")
        swapped = np.transpose(self.g, (2, 3, 0, 1))
        if np.max(np.abs(self.g - swapped), initial=0.0) > 1e-8:
            raise NonSymmetricInput("g_pqrs != g_rspq")
        self.h = 0.5 * (self.h + self.h.T)
        self.g = 0.5 * (self.g + swapped)
        self.h.flags.writeable = False
        self.g.flags.writeable = False

    @classmethod
    def two_body_only(cls, g: np.ndarray) -> "TwoBodyTensor":
        g = np.asarray(g, dtype=float)
        return cls(g.shape[0], np.zeros((g.shape[0],) * 2), g)


@dataclass(frozen=True)
class OrbitalRotation:
    """Real orthogonal orbital rotation exp(X) with X antisymmetric;
    the angles are the strictly-lower-triangular entries of X."""

    n: int
    generator: np.ndarray  # antisymmetric n x n

    def __post_init__(self):
        gen = np.array(self.generator, dtype=float)
        if gen.shape != (self.n, self.n):
            raise NonSymmetricInput("generator shape mismatch")
        if np.max(np.abs(gen + gen.T), initial=0.0) > 1e-10:
            raise NonSymmetricInput("generator not antisymmetric")
        gen.flags.writeable = False
        object.__setattr__(self, "generator", gen)

    @classmethod
    def identity(cls, n: int) -> "OrbitalRotation":
        return cls(n, np.zeros((n, n)))

    @classmethod
    def from_angles(cls, n: int, angles: Sequence[float]) -> "OrbitalRotation":
        gen = np.zeros((n, n))
        rows, cols = np.tril_indices(n, -1)
        gen[rows, cols] = angles
        gen[cols, rows] = -np.asarray(angles)
        return cls(n, gen)

    def angles(self) -> np.ndarray:
        rows, cols = np.tril_indices(self.n, -1)
        return self.generator[rows, cols].copy()

    def orbital_matrix(self) -> np.ndarray:
        return scipy.linalg.expm(self.generator)


def _real_log_special_orthogonal(v: np.ndarray) -> np.ndarray:
    """Real antisymmetric logarithm of a special orthogonal matrix.

    Uses the real Schur form (2x2 rotation blocks plus +-1 entries); -1
    entries come in pairs for det +1 and are logged as pi rotations.
    """
    t, q = scipy.linalg.schur(v, output="real")
    n = v.shape[0]
    log_t = np.zeros((n, n))
    minus_ones = []
    i = 0
    while i < n:
        if i + 1 < n and abs(t[i + 1, i]) > 1e-12:
            theta = math.atan2(t[i + 1, i], t[i, i])
            log_t[i, i + 1] = -theta
            log_t[i + 1, i] = theta
            i += 2
        else:
            if t[i, i] < 0:
                minus_ones.append(i)
            i += 1
    for a, b in zip(minus_ones[::2], minus_ones[1::2]):
        log_t[a, b] = -math.pi
        log_t[b, a] = math.pi
    return q @ log_t @ q.T


def diagonalize_one_body(h: np.ndarray) -> Tuple[OrbitalRotation, np.ndarray]:
    """Orthogonal eigendecomposition of a real symmetric one-body tensor,
    returning the rotation whose orbital matrix is the eigenvector matrix
    (determinant fixed to +1 by flipping the last column)."""
    h = np.asarray(h, dtype=float)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise NonSymmetricInput(f"not square: {h.shape}")
    if h.size and np.max(np.abs(h - h.T)) > 1e-10:
        raise NonSymmetricInput("one-body tensor not symmetric")
    if h.size == 0:
        return OrbitalRotation.identity(0), np.zeros(0)
    gamma, vecs = np.linalg.eigh(h)
    if np.linalg.det(vecs) < 0:
        vecs = vecs.copy()
        vecs[:, -1] *= -1.0
    gen = _real_log_special_orthogonal(vecs)
    rot = OrbitalRotation(h.shape[0], 0.5 * (gen - gen.T))
    if np.max(np.abs(rot.orbital_matrix() - vecs)) > 1e-10:
        raise NonSymmetricInput("matrix logarithm failed to reproduce eigenvectors")
    return rot, gamma


# ---------------------------------------------------------------------------
# Low-rank (LR) decomposition


@dataclass(frozen=True)
class LRFragment:
    n: int
    eps: float
    l_matrix: np.ndarray

    def to_tensor(self) -> TwoBodyTensor:
        g = self.eps * np.einsum("pq,rs->pqrs", self.l_matrix, self.l_matrix)
        return TwoBodyTensor.two_body_only(g)


def lr_decompose(t: TwoBodyTensor, tol: float = 1e-6) -> List[LRFragment]:
    """Eigendecompose the n^2 x n^2 supermatrix M[(pq),(rs)] = g_pqrs.

    Retains eigenpairs with |eps| * ||L||_F^2 above tol, ordered by |eps|
    descending; eigenvector signs are fixed so the output is reproducible
    bit for bit.
    """
    n = t.n
    m = t.g.reshape(n * n, n * n)
    if np.max(np.abs(m - m.T), initial=0.0) > 1e-8:
        raise AsymmetricSupermatrix("supermatrix not symmetric")
    vals, vecs = np.linalg.eigh(0.5 * (m + m.T))
    order = np.argsort(-np.abs(vals), kind="stable")
    fragments = []
    for idx in order:
        eps = float(vals[idx])
        vec = vecs[:, idx]
        if abs(eps) * float(vec @ vec) <= tol:
            continue
        nz = np.nonzero(np.abs(vec) > 1e-8)[0]
        if nz.size and vec[nz[0]] < 0:
            vec = -vec
        l_mat = vec.reshape(n, n)
        if np.max(np.abs(l_mat - l_mat.T)) < 1e-8:
            l_mat = 0.5 * (l_mat + l_mat.T)
        fragments.append(LRFragment(n, eps, l_mat))
    return fragments


# ---------------------------------------------------------------------------
# Mean-field solvable fragments (GMF and its K = N special case GFRO)


@dataclass(frozen=True)
class GMFFragment:
    """Rotated mean-field fragment: orbitals split into S_1 (one-body part,
    size n-K) and S_2 (K number-operator symmetries)."""

    n: int
    k: int
    u_t: OrbitalRotation
    h_k: np.ndarray  # (K, n-K, n-K), symmetric in the last two axes
    lam: np.ndarray  # (K, K) symmetric

    @property
    def s1(self) -> Tuple[int, ...]:
        return tuple(range(self.n - self.k))

    @property
    def s2(self) -> Tuple[int, ...]:
        return tuple(range(self.n - self.k, self.n))

    def to_tensor(self) -> TwoBodyTensor:
        return TwoBodyTensor.two_body_only(gmf_fragment_tensor(self))


@dataclass(frozen=True)
class GFROFragment:
    n: int
    u: OrbitalRotation
    lam: np.ndarray  # (n, n) symmetric

    def as_gmf(self) -> GMFFragment:
        return GMFFragment(
            self.n, self.n, self.u,
            np.zeros((self.n, 0, 0)), np.asarray(self.lam, dtype=float),
        )

    def to_tensor(self) -> TwoBodyTensor:
        return TwoBodyTensor.two_body_only(gmf_fragment_tensor(self.as_gmf()))


def _rotate4(g: np.ndarray, e: np.ndarray) -> np.ndarray:
    """Apply sum_abcd g_abcd E_ap E_bq E_cr E_ds (adjoint: pass e.T)."""
    out = np.tensordot(g, e, axes=([0], [0]))
    out = np.tensordot(out, e, axes=([0], [0]))
    out = np.tensordot(out, e, axes=([0], [0]))
    out = np.tensordot(out, e, axes=([0], [0]))
    return out


def _inner_tensor(n: int, k: int, h_k: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """Unrotated fragment tensor: h^(k)_ij on the (i,j,k,k)/(k,k,i,j) slots
    and lambda_kl on (k,k,l,l)."""
    m = n - k
    g0 = np.zeros((n,) * 4)
    for ki in range(k):
        orb = m + ki
        g0[:m, :m, orb, orb] += 0.5 * h_k[ki]
        g0[orb, orb, :m, :m] += 0.5 * h_k[ki]
    for ka in range(k):
        for kb in range(k):
            g0[m + ka, m + ka, m + kb, m + kb] += lam[ka, kb]
    return g0


def gmf_fragment_tensor(f: GMFFragment) -> np.ndarray:
    """Two-body tensor of the fragment in the original orbital basis."""
    g0 = _inner_tensor(f.n, f.k, np.asarray(f.h_k), np.asarray(f.lam))
    return _rotate4(g0, f.u_t.orbital_matrix())


class _GMFParams:
    """Packing of (orbital angles, symmetric h^(k) blocks, symmetric lambda)
    into a flat optimization vector."""

    def __init__(self, n: int, k: int):
        self.n, self.k, self.m = n, k, n - k
        self.tri_rows, self.tri_cols = np.tril_indices(n, -1)
        self.h_rows, self.h_cols = np.tril_indices(self.m)
        self.l_rows, self.l_cols = np.tril_indices(k)
        self.n_theta = len(self.tri_rows)
        self.n_h = k * len(self.h_rows)
        self.n_lam = len(self.l_rows)
        self.size = self.n_theta + self.n_h + self.n_lam

    def unpack(self, x: np.ndarray):
        n, k, m = self.n, self.k, self.m
        theta = x[: self.n_theta]
        gen = np.zeros((n, n))
        gen[self.tri_rows, self.tri_cols] = theta
        gen -= gen.T
        h_k = np.zeros((k, m, m))
        per = len(self.h_rows)
        for ki in range(k):
            blk = x[self.n_theta + ki * per: self.n_theta + (ki + 1) * per]
            h_k[ki][self.h_rows, self.h_cols] = blk
            h_k[ki][self.h_cols, self.h_rows] = blk
        lam = np.zeros((k, k))
        lam_flat = x[self.n_theta + self.n_h:]
        lam[self.l_rows, self.l_cols] = lam_flat
        lam[self.l_cols, self.l_rows] = lam_flat
        return gen, h_k, lam

    def pack_gradient(self, g_gen, g_h, g_lam):
        out = np.empty(self.size)
        out[: self.n_theta] = g_gen[self.tri_rows, self.tri_cols]
        per = len(self.h_rows)
        for ki in range(self.k):
            blk = g_h[ki][self.h_rows, self.h_cols]
            out[self.n_theta + ki * per: self.n_theta + (ki + 1) * per] = blk
        out[self.n_theta + self.n_h:] = g_lam[self.l_rows, self.l_cols]
        return out


def _gmf_cost_grad(x: np.ndarray, packer: _GMFParams, target: np.ndarray):
    """L2 distance squared between target and the fragment tensor, with
    the analytic gradient (expm differentiated via its Frechet adjoint)."""
    n, k, m = packer.n, packer.k, packer.m
    gen, h_k, lam = packer.unpack(x)
    e = scipy.linalg.expm(gen)
    g0 = _inner_tensor(n, k, h_k, lam)
    t_tensor = _rotate4(g0, e)
    d = t_tensor - target
    cost = float(np.sum(d * d))

    y = 2.0 * d
    # Gradient w.r.t. the inner tensor: the adjoint rotation of y.
    g0_grad = _rotate4(y, e.T)
    g_h = np.zeros((k, m, m))
    for ki in range(k):
        orb = m + ki
        blk = 0.5 * (g0_grad[:m, :m, orb, orb] + g0_grad[orb, orb, :m, :m])
        g_h[ki] = blk + blk.T - np.diag(np.diag(blk))
    g_lam = np.zeros((k, k))
    for ka in range(k):
        for kb in range(k):
            g_lam[ka, kb] = g0_grad[m + ka, m + ka, m + kb, m + kb]
    g_lam = g_lam + g_lam.T - np.diag(np.diag(g_lam))

    # Gradient w.r.t. the orbital matrix, one slot at a time.
    p1 = np.tensordot(y, e, axes=([1], [1]))
    p1 = np.tensordot(p1, e, axes=([1], [1]))
    p1 = np.tensordot(p1, e, axes=([1], [1]))  # (p, b, c, d)
    a1 = np.tensordot(g0, p1, axes=([1, 2, 3], [1, 2, 3]))
    p2 = np.tensordot(y, e, axes=([0], [1]))
    p2 = np.tensordot(p2, e, axes=([1], [1]))
    p2 = np.tensordot(p2, e, axes=([1], [1]))  # (q, a, c, d)
    a2 = np.tensordot(g0, p2, axes=([0, 2, 3], [1, 2, 3]))
    p3 = np.tensordot(y, e, axes=([0], [1]))
    p3 = np.tensordot(p3, e, axes=([0], [1]))
    p3 = np.tensordot(p3, e, axes=([1], [1]))  # (r, a, b, d)
    a3 = np.tensordot(g0, p3, axes=([0, 1, 3], [1, 2, 3]))
    p4 = np.tensordot(y, e, axes=([0], [1]))
    p4 = np.tensordot(p4, e, axes=([0], [1]))
    p4 = np.tensordot(p4, e, axes=([0], [1]))  # (s, a, b, c)
    a4 = np.tensordot(g0, p4, axes=([0, 1, 2], [1, 2, 3]))
    dc_de = a1.T + a2.T + a3.T + a4.T

    _, g_gen_full = scipy.linalg.expm_frechet(gen.T, dc_de)
    g_gen = g_gen_full  # packer reads the lower triangle; X antisymmetric
    g_gen = g_gen - g_gen.T

    grad = packer.pack_gradient(g_gen, g_h, g_lam)
    return cost, grad


@dataclass
class DecomposeResult:
    """Greedy decomposition output; iterates over the fragments."""

    fragments: list
    residuals: List[float]
    converged: bool
    seed: int

    def __iter__(self):
        return iter(self.fragments)

    def __len__(self):
        return len(self.fragments)

    def __getitem__(self, i):
        return self.fragments[i]


def _greedy_mean_field(
    g: np.ndarray,
    n: int,
    k: int,
    tol: float,
    seed: int,
    f_max: int,
    restarts: int,
    make_fragment,
) -> DecomposeResult:
    rng = np.random.default_rng(seed)
    packer = _GMFParams(n, k)
    residual = np.array(g, dtype=float)
    fragments = []
    residuals = [frob2(residual)]
    while residuals[-1] >= tol:
        if len(fragments) >= f_max:
            return DecomposeResult(fragments, residuals, False, seed)
        best = None
        for _ in range(restarts + 1):
            x0 = rng.uniform(-0.01, 0.01, size=packer.size)
            res = scipy.optimize.minimize(
                _gmf_cost_grad,
                x0,
                args=(packer, residual),
                jac=True,
                method="L-BFGS-B",
                options={"maxiter": 3000, "ftol": 1e-14, "gtol": 1e-10},
            )
            if best is None or res.fun < best.fun:
                best = res
            if best.fun < residuals[-1] * (1.0 - 1e-10):
                break
        if best.fun >= residuals[-1] * (1.0 - 1e-10):
            # No restart made progress; flag and stop rather than loop.
            return DecomposeResult(fragments, residuals, False, seed)
        gen, h_k, lam = packer.unpack(best.x)
        frag = make_fragment(OrbitalRotation(n, gen), h_k, lam)
        fragments.append(frag)
        residual = residual - _rotate4(
            _inner_tensor(n, k, h_k, lam), scipy.linalg.expm(gen)
        )
        residuals.append(frob2(residual))
    return DecomposeResult(fragments, residuals, True, seed)


def gmf_decompose(
    t: TwoBodyTensor,
    k: int,
    tol: float = 1e-6,
    seed: int = 0,
    f_max: int = 300,
    restarts: int = 5,
) -> DecomposeResult:
    """Greedy GMF(K): repeatedly fit one mean-field fragment to the
    residual two-body tensor by quasi-Newton descent and subtract it,
    until the squared residual norm drops below tol."""
    if not 0 < k <= t.n:
        raise BadK(f"K must be in 1..{t.n}, got {k}")

    def make(u_t, h_k, lam):
        return GMFFragment(t.n, k, u_t, h_k, lam)

    return _greedy_mean_field(t.g, t.n, k, tol, seed, f_max, restarts, make)


def gfro_decompose(
    t: TwoBodyTensor,
    tol: float = 1e-6,
    seed: int = 0,
    f_max: int = 300,
    restarts: int = 5,
) -> DecomposeResult:
    """Greedy full-rank decomposition: the K = N mean-field special case."""

    def make(u, h_k, lam):
        return GFROFragment(t.n, u, lam)

    return _greedy_mean_field(t.g, t.n, t.n, tol, seed, f_max, restarts, make)


# ---------------------------------------------------------------------------
# Sector solves


def solve_gmf_sector(f, v: Sequence[int]):
    """Sector of a mean-field fragment fixed by occupations v on S_2.

    Returns (gamma eigenvalues, constant, rotation): the one-body tensor
    gamma_ij(v) = sum_k h^(k)_ij v_k diagonalized on S_1, plus the scalar
    sum_kl lambda_kl v_k v_l.  Sector energies are all subset sums of the
    eigenvalues shifted by the constant.
    """
    if isinstance(f, GFROFragment):
        f = f.as_gmf()
    v = np.asarray(v, dtype=float)
    if v.shape != (f.k,):
        raise BadSectorLength(f"sector length {v.shape} != K={f.k}")
    if not np.all((v == 0) | (v == 1)):
        raise BadSectorLength("sector entries must be 0 or 1")
    h_k = np.asarray(f.h_k)
    gamma_mat = np.tensordot(v, h_k, axes=([0], [0])) if f.k else np.zeros((f.n, f.n))
    constant = float(v @ np.asarray(f.lam) @ v)
    rot, gamma = diagonalize_one_body(gamma_mat)
    return gamma, constant, rot


def gmf_fragment_spectrum(f) -> np.ndarray:
    """Full Fock-space spectrum (2^n values) from the analytic sector data."""
    if isinstance(f, GFROFragment):
        f = f.as_gmf()
    m = f.n - f.k
    energies = []
    for idx in range(1 << f.k):
        v = [(idx >> j) & 1 for j in range(f.k)]
        gamma, const, _ = solve_gmf_sector(f, v)
        for occ in range(1 << m):
            e = const
            for j in range(m):
                if occ >> j & 1:
                    e += gamma[j]
            energies.append(e)
    return np.sort(np.asarray(energies))
