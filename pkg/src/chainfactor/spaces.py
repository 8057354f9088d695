"""Product state spaces and coordinate bookkeeping.

A state space is a product of d finite coordinate spaces. Flat state indices
use the lexicographic (mixed-radix) codec with coordinate 1 most significant;
the same codec is shared by every projection and tensor operation in the
package so coordinates never get silently transposed.

Coordinates are 1-based everywhere in the public API.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class ProductSpace:
    """A finite product space with per-coordinate cardinalities ``dims``."""

    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(k) for k in self.dims)
        object.__setattr__(self, "dims", dims)
        if not dims:
            raise ValidationError("a product space needs at least one coordinate")
        if any(k < 2 for k in dims):
            raise ValidationError(f"every coordinate needs cardinality >= 2, got {dims}")

    @property
    def d(self) -> int:
        return len(self.dims)

    @property
    def size(self) -> int:
        return int(reduce(lambda a, b: a * b, self.dims, 1))

    def encode(self, coords: tuple[int, ...]) -> int:
        """Flat index of a coordinate tuple (coordinate 1 most significant)."""
        if len(coords) != self.d:
            raise ValidationError(f"expected {self.d} coordinates, got {len(coords)}")
        idx = 0
        for value, card in zip(coords, self.dims):
            if not 0 <= value < card:
                raise ValidationError(f"coordinate value {value} out of range [0, {card})")
            idx = idx * card + value
        return idx

    def decode(self, index: int) -> tuple[int, ...]:
        """Coordinate tuple for a flat index; inverse of :meth:`encode`."""
        if not 0 <= index < self.size:
            raise ValidationError(f"flat index {index} out of range [0, {self.size})")
        out = []
        for card in reversed(self.dims):
            out.append(index % card)
            index //= card
        return tuple(reversed(out))

    def digits(self, coord: int) -> np.ndarray:
        """Vector of coordinate ``coord`` (1-based) values over all flat indices."""
        check_subset(self, (coord,))
        stride = 1
        for card in self.dims[coord:]:
            stride *= card
        arr = (np.arange(self.size) // stride) % self.dims[coord - 1]
        arr.flags.writeable = False
        return arr

    def subspace(self, subset: tuple[int, ...]) -> "ProductSpace":
        """Product space over the coordinates in ``subset`` (kept in sorted order)."""
        subset = check_subset(self, subset)
        return ProductSpace(tuple(self.dims[i - 1] for i in subset))

    def subindex_map(self, subset: tuple[int, ...]) -> np.ndarray:
        """Map each flat index of this space to the flat index of its ``subset`` part.

        The image uses the subspace codec of :meth:`subspace`, i.e. the smallest
        coordinate in ``subset`` is most significant.
        """
        subset = check_subset(self, subset)
        out = np.zeros(self.size, dtype=np.intp)
        for coord in subset:
            out = out * self.dims[coord - 1] + self.digits(coord)
        out.flags.writeable = False
        return out

    def complement(self, subset: tuple[int, ...]) -> tuple[int, ...]:
        subset = check_subset(self, subset)
        return tuple(i for i in range(1, self.d + 1) if i not in subset)


def check_subset(space: ProductSpace, subset) -> tuple[int, ...]:
    """Validate a coordinate subset: 1-based, strictly increasing, within [1, d]."""
    subset = tuple(int(e) for e in subset)
    if any(not 1 <= e <= space.d for e in subset):
        raise ValidationError(f"coordinates must lie in [1, {space.d}], got {subset}")
    if any(a >= b for a, b in zip(subset, subset[1:])):
        raise ValidationError(f"coordinate subset must be strictly increasing, got {subset}")
    return subset


@dataclass(frozen=True)
class Partition:
    """An ordered tuple of pairwise-disjoint coordinate subsets.

    The union of the blocks (the support) need not cover all coordinates;
    full-cover partitions are required only where an operation says so.
    Blocks may be empty in partial tuples.
    """

    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        blocks = tuple(tuple(int(e) for e in b) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        seen: set[int] = set()
        for b in blocks:
            if any(a >= c for a, c in zip(b, b[1:])):
                raise ValidationError(f"block {b} must be strictly increasing")
            if any(e < 1 for e in b):
                raise ValidationError(f"block {b} has non-positive coordinates")
            if seen.intersection(b):
                raise ValidationError(f"blocks overlap at {sorted(seen.intersection(b))}")
            seen.update(b)

    @property
    def m(self) -> int:
        return len(self.blocks)

    def support(self) -> tuple[int, ...]:
        return tuple(sorted(e for b in self.blocks for e in b))

    def covers(self, d: int) -> bool:
        return self.support() == tuple(range(1, d + 1))

    def validate_within(self, space: ProductSpace) -> None:
        for b in self.blocks:
            check_subset(space, b)
