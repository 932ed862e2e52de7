"""Shared test oracles, independent of the package's bitmask algebra.

Dense matrices are built from explicit single-qubit matrices with Kronecker
products (qubit 0 is the least-significant index bit); fermionic reference
energies come from a brute-force determinant construction acting on
occupation-number kets.  These provide the second route for every
dual-checked operation.
"""

from __future__ import annotations

import itertools
from functools import reduce

import numpy as np
import pytest

from iqcc.fermion import IntegralData
from iqcc.pauli import Operator, PauliWord

SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def dense_word(w: PauliWord) -> np.ndarray:
    """Kronecker-product matrix of a word; qubit 0 = least significant bit."""
    return reduce(np.kron, [SINGLE[w.letter(q)] for q in reversed(range(w.n_qubits))])


def dense_op(h: Operator) -> np.ndarray:
    dim = 2**h.n_qubits
    out = np.zeros((dim, dim), dtype=complex)
    for w, c in h:
        out += c * dense_word(w)
    return out


def product_state_vector(theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Statevector of the coherent product state, amplitude by amplitude."""
    n = len(theta)
    vec = np.empty(2**n, dtype=complex)
    for b in range(2**n):
        amp = 1.0 + 0.0j
        for j in range(n):
            if (b >> j) & 1:
                amp *= np.exp(1j * phi[j]) * np.sin(theta[j] / 2)
            else:
                amp *= np.cos(theta[j] / 2)
        vec[b] = amp
    return vec


def basis_state_vector(bits: tuple[int, ...]) -> np.ndarray:
    """|b> with bit j of the index set where bits[j] == -1."""
    index = sum(1 << j for j, b in enumerate(bits) if b == -1)
    vec = np.zeros(2 ** len(bits), dtype=complex)
    vec[index] = 1.0
    return vec


def random_word(rng: np.random.Generator, n: int, nontrivial: bool = False) -> PauliWord:
    while True:
        w = PauliWord(n, int(rng.integers(0, 1 << n)), int(rng.integers(0, 1 << n)))
        if not nontrivial or not w.is_identity:
            return w


def random_odd_y_word(rng: np.random.Generator, n: int) -> PauliWord:
    while True:
        w = random_word(rng, n)
        if (w.x_mask & w.z_mask).bit_count() % 2 == 1:
            return w


def random_operator(rng: np.random.Generator, n: int, n_terms: int, scale: float = 1.0) -> Operator:
    terms = [(random_word(rng, n), float(rng.normal(0, scale))) for _ in range(n_terms)]
    return Operator(n, terms)


def random_real_operator(rng: np.random.Generator, n: int, n_terms: int, scale: float = 1.0) -> Operator:
    """Random operator with even y-parity in every term (real matrix)."""
    terms = []
    while len(terms) < n_terms:
        w = random_word(rng, n)
        if (w.x_mask & w.z_mask).bit_count() % 2 == 0:
            terms.append((w, float(rng.normal(0, scale))))
    return Operator(n, terms)


def random_real_2local(seed: int, n: int = 4, coupling: float = 0.3, p_term: float = 0.7) -> Operator:
    """Random real 2-local Hamiltonian: z fields plus XX/YY/ZZ couplings.

    Every term has even y-parity and an even-size flip set, the structure
    shared by mapped electronic Hamiltonians.
    """
    rng = np.random.default_rng(seed)
    terms: dict[str, float] = {}
    for j in range(n):
        lbl = ["I"] * n
        lbl[j] = "Z"
        terms["".join(lbl)] = float(rng.uniform(0.4, 1.2) * rng.choice([-1, 1]))
    for i, j in itertools.combinations(range(n), 2):
        for a, b in (("X", "X"), ("Y", "Y"), ("Z", "Z")):
            if rng.random() < p_term:
                lbl = ["I"] * n
                lbl[i] = a
                lbl[j] = b
                terms["".join(lbl)] = float(rng.normal(0, coupling))
    return Operator.from_labels(terms)


def random_integrals(rng: np.random.Generator, n_spatial: int, scale: float = 0.5) -> IntegralData:
    """Random symmetric one-electron and 8-fold-symmetric two-electron tensors."""
    h = rng.normal(0, scale, (n_spatial, n_spatial))
    h = (h + h.T) / 2
    g = rng.normal(0, scale / 2, (n_spatial,) * 4)
    for perm in ((1, 0, 2, 3), (0, 1, 3, 2), (2, 3, 0, 1)):
        g = (g + g.transpose(perm)) / 2
    for perm in ((1, 0, 2, 3), (0, 1, 3, 2), (2, 3, 0, 1)):
        assert np.allclose(g, g.transpose(perm))
    return IntegralData(n_spatial, h, g, float(rng.normal(0, scale)))


def op_allclose(a: Operator, b: Operator, tol: float = 1e-10) -> bool:
    diff = a - b
    return diff.is_empty or float(np.max(np.abs(diff.coefficients))) <= tol


# -- determinant CI oracle ------------------------------------------------------
#
# Occupation-number kets are integers; bit j set means spin-orbital j is
# occupied.  Ladder operators act with the standard (-1)**(occupied below)
# sign, independent of any qubit mapping.


def _apply_ladder(ket: int, orbital: int, dagger: bool) -> tuple[int, int] | None:
    occupied = (ket >> orbital) & 1
    if dagger == bool(occupied):
        return None
    sign = (-1) ** bin(ket & ((1 << orbital) - 1)).count("1")
    return ket ^ (1 << orbital), sign


def apply_chain(ket: int, ops: list[tuple[int, bool]]) -> tuple[int, int] | None:
    """Apply (orbital, dagger) operators right to left; None if annihilated."""
    sign = 1
    for orbital, dagger in reversed(ops):
        step = _apply_ladder(ket, orbital, dagger)
        if step is None:
            return None
        ket, s = step
        sign *= s
    return ket, sign


def determinant_hamiltonian(data: IntegralData) -> np.ndarray:
    """Dense Fock-space matrix of the electronic Hamiltonian from integrals."""
    nsp = data.n_spatial
    n_so = data.n_so
    dim = 1 << n_so
    mat = np.zeros((dim, dim))
    spins = (0, nsp)
    chains: list[tuple[float, list[tuple[int, bool]]]] = []
    for p in range(nsp):
        for q in range(nsp):
            if data.h[p, q] != 0.0:
                for off in spins:
                    chains.append((data.h[p, q], [(p + off, True), (q + off, False)]))
    for p, q, r, s in itertools.product(range(nsp), repeat=4):
        v = data.g[p, q, r, s]
        if v == 0.0:
            continue
        for so in spins:
            for to in spins:
                chains.append(
                    (0.5 * v, [(p + so, True), (r + to, True), (s + to, False), (q + so, False)])
                )
    for ket in range(dim):
        for coeff, ops in chains:
            step = apply_chain(ket, ops)
            if step is not None:
                bra, sign = step
                mat[bra, ket] += coeff * sign
    return mat + data.e_core * np.eye(dim)


@pytest.fixture(scope="session")
def rng() -> np.random.Generator:
    return np.random.default_rng(20240811)
