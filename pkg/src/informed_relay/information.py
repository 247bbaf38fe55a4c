"""Joint pmfs over named axes and exact (conditional) mutual information."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

MASS_TOL = 1e-10


@dataclass(frozen=True)
class JointPmf:
    """Dense probability tensor whose axes carry variable names."""

    p: np.ndarray
    axes: tuple[str, ...]

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.ndim != len(self.axes):
            raise ValueError(f"tensor has {p.ndim} axes but {len(self.axes)} names were given")
        if len(set(self.axes)) != len(self.axes):
            raise ValueError(f"duplicate axis names in {self.axes}")
        if np.any(p < 0):
            raise ValueError("joint pmf has negative entries")
        if abs(p.sum() - 1.0) > MASS_TOL:
            raise ValueError(f"joint pmf has total mass {p.sum()!r}, expected 1")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "axes", tuple(self.axes))

    @classmethod
    def trusted(cls, p: np.ndarray, axes: tuple[str, ...]) -> "JointPmf":
        """Skip validation for tensors built from normalized factors."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "p", p)
        object.__setattr__(obj, "axes", axes)
        return obj

    def marginal(self, names: Sequence[str]) -> np.ndarray:
        """Marginal over ``names``, axes in the order given."""
        names = tuple(names)
        missing = [n for n in names if n not in self.axes]
        if missing:
            raise KeyError(f"unknown axes {missing}; have {self.axes}")
        drop = tuple(i for i, a in enumerate(self.axes) if a not in names)
        m = self.p.sum(axis=drop)
        kept = [a for a in self.axes if a in names]
        return np.transpose(m, [kept.index(n) for n in names])

    def size(self, name: str) -> int:
        return self.p.shape[self.axes.index(name)]


def _names(group: str | Iterable[str]) -> tuple[str, ...]:
    return (group,) if isinstance(group, str) else tuple(group)


def mutual_information(
    joint: JointPmf,
    a: str | Iterable[str],
    b: str | Iterable[str],
    given: str | Iterable[str] = (),
) -> float:
    """I(A; B | C) in bits.

    Evaluated as ``sum p(a,b,c) log2[p(a,b,c) p(c) / (p(a,c) p(b,c))]`` with
    ``0 log 0 = 0``.
    """
    a, b, c = _names(a), _names(b), _names(given)
    if not a or not b:
        raise ValueError("both information groups must be non-empty")
    if set(a) & set(b) or set(a) & set(c) or set(b) & set(c):
        raise ValueError(f"groups overlap: {a}, {b}, {c}")
    m = joint.marginal(a + b + c)
    na = int(np.prod([joint.size(n) for n in a]))
    nb = int(np.prod([joint.size(n) for n in b]))
    m = m.reshape(na, nb, -1)
    pac = m.sum(axis=1, keepdims=True)
    pbc = m.sum(axis=0, keepdims=True)
    pc = m.sum(axis=(0, 1), keepdims=True)
    pos = m > 0
    num = (m * pc)[pos]
    den = np.broadcast_to(pac * pbc, m.shape)[pos]
    return float(np.sum(m[pos] * np.log2(num / den)))


def entropy(joint: JointPmf, group: str | Iterable[str]) -> float:
    """H(group) in bits."""
    m = joint.marginal(_names(group)).ravel()
    m = m[m > 0]
    return float(-np.sum(m * np.log2(m)))
