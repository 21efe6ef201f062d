"""Perfect binary trees as (possibly symbolic) quantum states.

Only the ``2**n`` leaves are stored; the internal node at depth ``d`` always
carries the qubit symbol ``x_{d+1}``.  Leaf ``idx`` corresponds to the basis
string whose first bit (qubit 1) is the most significant bit of ``idx``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .amplitude import AlgebraicComplex, LinearTerm, ONE, ZERO, AmplitudeLike
from .errors import BadBasisLength, DimensionMismatch


@dataclass(frozen=True)
class PerfectTree:
    n: int
    leaves: tuple[LinearTerm, ...]

    def __post_init__(self):
        if len(self.leaves) != 1 << self.n:
            raise DimensionMismatch(
                f"a height-{self.n} tree needs {1 << self.n} leaves, got {len(self.leaves)}"
            )

    @classmethod
    def of(cls, values: Sequence) -> PerfectTree:
        """Tree from a flat leaf sequence whose length is a power of two."""
        size = len(values)
        n = size.bit_length() - 1
        if size == 0 or 1 << n != size:
            raise DimensionMismatch(f"{size} leaves do not form a perfect tree")
        return cls(n, tuple(LinearTerm.coerce(v) for v in values))

    @classmethod
    def zero(cls, n: int) -> PerfectTree:
        return cls(n, (LinearTerm.const(ZERO),) * (1 << n))

    @classmethod
    def basis(cls, bits: str, amplitude: AmplitudeLike = ONE) -> PerfectTree:
        return tree_from_state(len(bits), {bits: LinearTerm.coerce(amplitude)})

    def __getitem__(self, bits: str) -> LinearTerm:
        return self.leaves[basis_index(bits, self.n)]

    def vars(self) -> frozenset[str]:
        out: set[str] = set()
        for leaf in self.leaves:
            out |= leaf.vars()
        return frozenset(out)

    def is_ground(self) -> bool:
        return all(leaf.is_constant() for leaf in self.leaves)

    def is_zero(self) -> bool:
        return all(leaf.is_zero() for leaf in self.leaves)

    def values(self) -> tuple[AlgebraicComplex, ...]:
        return tuple(leaf.as_constant() for leaf in self.leaves)

    def scale(self, factor: AmplitudeLike) -> PerfectTree:
        return PerfectTree(self.n, tuple(leaf.scale(factor) for leaf in self.leaves))

    def bit(self, idx: int, qubit: int) -> int:
        """Value of ``qubit`` (1-based) in the basis string of leaf ``idx``."""
        return (idx >> (self.n - qubit)) & 1

    def sort_key(self) -> tuple:
        return (self.n, tuple(leaf.sort_key() for leaf in self.leaves))

    def __str__(self):
        return format_dirac(self)


def basis_index(bits: str, n: int) -> int:
    if len(bits) != n or any(ch not in "01" for ch in bits):
        raise BadBasisLength(f"basis string {bits!r} is not a {n}-bit string")
    return int(bits, 2) if n else 0


def tree_from_state(n: int, entries: Mapping[str, LinearTerm | AmplitudeLike],
                    default: LinearTerm | AmplitudeLike = ZERO) -> PerfectTree:
    leaves = [LinearTerm.coerce(default)] * (1 << n)
    for bits, value in entries.items():
        leaves[basis_index(bits, n)] = LinearTerm.coerce(value)
    return PerfectTree(n, tuple(leaves))


def tree_assign(tree: PerfectTree, sigma: Mapping[str, AmplitudeLike]) -> PerfectTree:
    return PerfectTree(tree.n, tuple(LinearTerm.const(leaf.substitute(sigma)) for leaf in tree.leaves))


def tree_equal_up_to_scale(t1: PerfectTree, t2: PerfectTree) -> AlgebraicComplex | None:
    """Real ``r != 0`` with ``t1 = r * t2`` leafwise, or ``None``.

    Both trees must be variable-free.  Two all-zero trees are related by 1.
    """
    if t1.n != t2.n:
        raise DimensionMismatch(f"heights differ: {t1.n} vs {t2.n}")
    v1, v2 = t1.values(), t2.values()
    ratio = None
    for x, y in zip(v1, v2):
        if y.is_zero():
            continue
        ratio = x / y
        break
    if ratio is None:
        # t2 is all zero, so t1 must be too
        return ONE if all(x.is_zero() for x in v1) else None
    if ratio.is_zero() or not ratio.is_real():
        return None
    if all(x == ratio * y for x, y in zip(v1, v2)):
        return ratio
    return None


def format_dirac(tree: PerfectTree) -> str:
    """Formal-sum rendering, e.g. ``(a0)|10> + (a1)|11>``."""
    parts = []
    for idx, leaf in enumerate(tree.leaves):
        if leaf.is_zero():
            continue
        bits = format(idx, f"0{tree.n}b") if tree.n else ""
        parts.append(f"({leaf})|{bits}>")
    return " + ".join(parts) if parts else "0"
