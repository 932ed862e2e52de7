"""Exact similarity transformation of operators by single-word exponentials.

One step maps h to exp(i*tau*P/2) h exp(-i*tau*P/2), evaluated in closed
form on the term list:

    h + sin(tau) * (-(i/2)[h, P]) + (1 - cos(tau))/2 * (P h P - h)

Terms commuting with the generator pass through unchanged; anticommuting
terms are scaled by cos(tau) and spawn at most one new word each, so the
term count at most doubles per step.  No Trotterization is involved:
single-word exponentials are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .pauli import DimensionError, Operator, PauliWord, _popcount_u64


def _reduce_angle(tau: float) -> float:
    """Map tau into (-pi, pi]; the transformation is 2*pi-periodic."""
    r = math.remainder(tau, 2.0 * math.pi)
    return math.pi if r == -math.pi else r


@dataclass(frozen=True)
class DressingStep:
    """One generator word with its rotation amplitude (radians)."""

    generator: PauliWord
    tau: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "tau", _reduce_angle(float(self.tau)))


def _split_by_commutation(h: Operator, p: PauliWord):
    px, pz = np.uint64(p.x_mask), np.uint64(p.z_mask)
    xs, zs, cs = h.x_masks, h.z_masks, h.coefficients
    anti = ((_popcount_u64(xs & pz) + _popcount_u64(zs & px)) & 1).astype(bool)
    return xs, zs, cs, anti, px, pz


def _commutator_words(xa, za, ca, px, pz, p: PauliWord):
    """Words and signed coefficients of -(i/2)[., p] for anticommuting terms."""
    xn, zn = xa ^ px, za ^ pz
    k = (
        _popcount_u64(xa & za)
        + (p.x_mask & p.z_mask).bit_count()
        - _popcount_u64(xn & zn)
        + 2 * _popcount_u64(za & px)
    ) % 4
    return xn, zn, ca * np.where(k == 1, 1.0, -1.0)


def dress(h: Operator, step: DressingStep) -> Operator:
    """Similarity-transform h by one exponential factor."""
    p = step.generator
    if h.n_qubits != p.n_qubits:
        raise DimensionError("operator/generator qubit mismatch")
    if step.tau == 0.0 or h.is_empty:
        return h
    sin_t, cos_t = math.sin(step.tau), math.cos(step.tau)
    xs, zs, cs, anti, px, pz = _split_by_commutation(h, p)
    if not anti.any():
        return h
    xa, za, ca = xs[anti], zs[anti], cs[anti]
    xn, zn, cn = _commutator_words(xa, za, ca, px, pz, p)
    return Operator._from_raw(
        h.n_qubits,
        np.concatenate([xs[~anti], xa, xn]),
        np.concatenate([zs[~anti], za, zn]),
        np.concatenate([cs[~anti], ca * cos_t, cn * sin_t]),
    )


def dress_derivative(h: Operator, step: DressingStep) -> Operator:
    """d/dtau of dress(h, step) at the step's own amplitude.

    Equals cos(tau) * (-(i/2)[h, P]) + sin(tau)/2 * (P h P - h).
    """
    p = step.generator
    if h.n_qubits != p.n_qubits:
        raise DimensionError("operator/generator qubit mismatch")
    if h.is_empty:
        return h
    sin_t, cos_t = math.sin(step.tau), math.cos(step.tau)
    xs, zs, cs, anti, px, pz = _split_by_commutation(h, p)
    if not anti.any():
        return Operator.zero(h.n_qubits)
    xa, za, ca = xs[anti], zs[anti], cs[anti]
    xn, zn, cn = _commutator_words(xa, za, ca, px, pz, p)
    return Operator._from_raw(
        h.n_qubits,
        np.concatenate([xa, xn]),
        np.concatenate([za, zn]),
        np.concatenate([-ca * sin_t, cn * cos_t]),
    )


def dress_sequence(h: Operator, steps: Iterable[DressingStep]) -> Operator:
    """Left fold of dress over the steps, in order."""
    out = h
    for step in steps:
        out = dress(out, step)
    return out
