"""Exhaustive enumeration of W_m with b-coefficients and word weights.

The tree of words is expanded one level at a time as a numpy stack of 2x2
tilde matrices: the children of a stack of n parents are
``einsum("sij,njk->nsik")`` reshaped to (n * #S, 2, 2), so the child of
parent p by symbol s sits at index p * #S + s. Positions therefore follow the
lexicographic (depth-first) order of words, and a word is recovered from its
position without storing symbols.

The tree is partitioned at the first symbol; partitions run on a thread pool
and are merged in symbol order, so results do not depend on the worker count.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Iterator, List, Optional, Tuple, TypeVar

import numpy as np

from ..models.coefficients import BVector
from ..models.errors import DepthCapError, PreconditionError
from ..models.word import Word
from ..utils.workers import resolve_workers, run_partitioned
from .energy_model import EnergyModel

logger = logging.getLogger(__name__)

T = TypeVar("T")


@dataclass(frozen=True)
class WordMeasure:
    """Probability measure on words of a fixed length.

    uniform: (#S)^-|w|; product: prod_i p_{w_i}; nu: nu(K_w).
    """

    kind: str = "uniform"
    probabilities: Optional[Tuple[float, ...]] = None  # product measure only

    @classmethod
    def uniform(cls) -> "WordMeasure":
        return cls("uniform")

    @classmethod
    def nu(cls) -> "WordMeasure":
        return cls("nu")

    @classmethod
    def product(cls, probabilities) -> "WordMeasure":
        return cls("product", tuple(float(p) for p in probabilities))

    @classmethod
    def from_config(cls, kind: str, weights: Optional[Tuple[float, ...]] = None) -> "WordMeasure":
        if kind == "product":
            return cls.product(weights or ())
        return cls(kind)

    def validate(self, num_symbols: int) -> None:
        if self.kind not in ("uniform", "nu", "product"):
            raise PreconditionError(f"unknown word measure {self.kind!r}")
        if self.kind != "product":
            return
        p = self.probabilities or ()
        if len(p) != num_symbols:
            raise PreconditionError(
                f"product measure needs {num_symbols} probabilities, got {len(p)}"
            )
        if any(x <= 0 for x in p) or abs(sum(p) - 1.0) > 1e-9:
            raise PreconditionError("product probabilities must be positive and sum to 1")

    def symbol_probabilities(self, num_symbols: int) -> np.ndarray:
        """Per-symbol probabilities of a product measure (uniform included)."""
        if self.kind == "product":
            return np.array(self.probabilities, dtype=float)
        return np.full(num_symbols, 1.0 / num_symbols)


@dataclass
class LevelBatch:
    """All words of one length inside one contiguous index range."""

    depth: int
    offset: int  # lexicographic index of the first word in S^depth
    num_symbols: int
    tilde: np.ndarray  # (n, 2, 2) stack of B_w
    b: np.ndarray  # (n, 3)
    weight: np.ndarray  # (n,) measure of each word
    nu: np.ndarray  # (n,) nu(K_w)

    def __len__(self) -> int:
        return int(self.b.shape[0])

    def word(self, i: int) -> Word:
        return Word.from_index(self.offset + i, self.depth, self.num_symbols)

    def sum_squares(self) -> np.ndarray:
        return (self.b * self.b).sum(axis=1)

    def items(self) -> Iterator[Tuple[Word, BVector, float]]:
        for i in range(len(self)):
            row = self.b[i]
            yield self.word(i), BVector((float(row[0]), float(row[1]), float(row[2]))), float(
                self.weight[i]
            )

    @classmethod
    def concatenate(cls, batches: List["LevelBatch"]) -> "LevelBatch":
        """Join contiguous batches of the same depth, in the given order."""
        first = batches[0]
        if len(batches) == 1:
            return first
        return cls(
            depth=first.depth,
            offset=first.offset,
            num_symbols=first.num_symbols,
            tilde=np.concatenate([x.tilde for x in batches]),
            b=np.concatenate([x.b for x in batches]),
            weight=np.concatenate([x.weight for x in batches]),
            nu=np.concatenate([x.nu for x in batches]),
        )


@dataclass
class EnumerationProgress:
    """Progress of a partitioned enumeration."""

    partition: int  # 1-based first symbol of the finished partition
    partitions_done: int
    partitions_total: int
    leaves_done: int
    leaves_total: int


ProgressCallback = Callable[[EnumerationProgress], None]
WordVisitor = Callable[[Word, BVector, float], None]


class WordEnumerator:
    """Enumerates W_m under a word measure with a bounded number of leaves."""

    def __init__(
        self,
        model: EnergyModel,
        max_leaves: int = 2_000_000,
        allow_deep: bool = False,
        workers: Optional[int] = None,
    ):
        """Initialize the enumerator.

        Args:
            model: Energy model of the structure
            max_leaves: Largest #S^depth enumerated without ``allow_deep``
            allow_deep: Override the leaf cap
            workers: Thread count; None uses every logical CPU
        """
        self.model = model
        self.num_symbols = model.num_symbols
        self.max_leaves = max_leaves
        self.allow_deep = allow_deep
        self.workers = resolve_workers(workers)

    def max_depth(self) -> int:
        """Deepest level whose leaf count fits under the cap."""
        depth = 0
        while self.num_symbols ** (depth + 1) <= self.max_leaves:
            depth += 1
        return depth

    def check_depth(self, depth: int) -> None:
        """Refuse depths beyond the cap unless overridden.

        Raises:
            DepthCapError: if #S^depth exceeds max_leaves without allow_deep
            PreconditionError: if depth is negative
        """
        if depth < 0:
            raise PreconditionError(f"depth must be non-negative, got {depth}")
        leaves = self.num_symbols ** depth
        if leaves <= self.max_leaves:
            return
        if not self.allow_deep:
            raise DepthCapError(
                f"depth {depth} on SG_{self.model.structure.level} has {leaves} words; "
                f"the cap is depth {self.max_depth()} ({self.max_leaves} leaves), "
                "pass --allow-deep to override"
            )
        logger.warning("enumerating %d words beyond the cap of %d", leaves, self.max_leaves)

    # ------------------------------------------------------------------
    # Batch construction
    # ------------------------------------------------------------------

    def _make_batch(
        self,
        depth: int,
        offset: int,
        tilde: np.ndarray,
        probability: Optional[np.ndarray],
        measure: WordMeasure,
    ) -> LevelBatch:
        b = self.model.batch_b(tilde)
        nu = self.model.batch_nu(tilde, depth)
        if measure.kind == "uniform":
            weight = np.full(len(tilde), float(self.num_symbols) ** -depth)
        elif measure.kind == "product":
            weight = probability
        else:
            weight = nu
        return LevelBatch(
            depth=depth,
            offset=offset,
            num_symbols=self.num_symbols,
            tilde=tilde,
            b=b,
            weight=weight,
            nu=nu,
        )

    def root_batch(self, measure: WordMeasure) -> LevelBatch:
        return self._make_batch(0, 0, np.eye(2)[None], np.ones(1), measure)

    def _expand(
        self, symbol: int, depth: int, measure: WordMeasure
    ) -> Iterator[Tuple[int, np.ndarray, np.ndarray]]:
        """Yield (level, tilde stack, product probability) for levels 1..depth."""
        p = measure.symbol_probabilities(self.num_symbols)
        tilde = self.model.b_maps[symbol][None].copy()
        probability = np.array([p[symbol]])
        yield 1, tilde, probability
        for level in range(2, depth + 1):
            tilde = np.einsum("sij,njk->nsik", self.model.b_maps, tilde).reshape(-1, 2, 2)
            probability = np.outer(probability, p).ravel()
            yield level, tilde, probability

    def _partition_levels(
        self, symbol: int, depth: int, measure: WordMeasure, all_levels: bool
    ) -> List[LevelBatch]:
        batches = []
        for level, tilde, probability in self._expand(symbol, depth, measure):
            if all_levels or level == depth:
                offset = symbol * self.num_symbols ** (level - 1)
                batches.append(self._make_batch(level, offset, tilde, probability, measure))
        logger.debug("partition %d expanded to depth %d", symbol + 1, depth)
        return batches

    # ------------------------------------------------------------------
    # Public API
    # ------------------------------------------------------------------

    def map_partitions(
        self,
        depth: int,
        measure: WordMeasure,
        reducer: Callable[[LevelBatch], T],
        progress_callback: Optional[ProgressCallback] = None,
    ) -> List[T]:
        """Apply ``reducer`` to the depth-``depth`` batch of every partition.

        Each worker reduces its own partition (e.g. to a private histogram);
        results come back in symbol order. Depth 0 has a single partition.
        """
        measure.validate(self.num_symbols)
        self.check_depth(depth)
        if depth == 0:
            return [reducer(self.root_batch(measure))]

        total = self.num_symbols
        per_partition = self.num_symbols ** (depth - 1)
        done = {"count": 0}

        def task_for(symbol: int) -> Callable[[], T]:
            def task() -> T:
                batch = self._partition_levels(symbol, depth, measure, all_levels=False)[0]
                return reducer(batch)

            return task

        def on_done(index: int, _: T) -> None:
            done["count"] += 1
            if progress_callback is not None:
                progress_callback(
                    EnumerationProgress(
                        partition=index + 1,
                        partitions_done=done["count"],
                        partitions_total=total,
                        leaves_done=done["count"] * per_partition,
                        leaves_total=total * per_partition,
                    )
                )

        return run_partitioned([task_for(s) for s in range(total)], self.workers, on_done)

    def levels(
        self,
        depth: int,
        measure: WordMeasure,
        progress_callback: Optional[ProgressCallback] = None,
    ) -> List[LevelBatch]:
        """Merged batches for every length 0..depth (index = length)."""
        measure.validate(self.num_symbols)
        self.check_depth(depth)
        result = [self.root_batch(measure)]
        if depth == 0:
            return result

        total = self.num_symbols
        done = {"count": 0}

        def task_for(symbol: int) -> Callable[[], List[LevelBatch]]:
            return lambda: self._partition_levels(symbol, depth, measure, all_levels=True)

        def on_done(index: int, _: List[LevelBatch]) -> None:
            done["count"] += 1
            if progress_callback is not None:
                per_partition = self.num_symbols ** (depth - 1)
                progress_callback(
                    EnumerationProgress(
                        partition=index + 1,
                        partitions_done=done["count"],
                        partitions_total=total,
                        leaves_done=done["count"] * per_partition,
                        leaves_total=total * per_partition,
                    )
                )

        partitions = run_partitioned([task_for(s) for s in range(total)], self.workers, on_done)
        for level in range(1, depth + 1):
            result.append(LevelBatch.concatenate([p[level - 1] for p in partitions]))
        return result

    def enumerate(
        self,
        depth: int,
        measure: WordMeasure,
        visitor: Optional[WordVisitor] = None,
        progress_callback: Optional[ProgressCallback] = None,
    ) -> LevelBatch:
        """All words of length ``depth`` in lexicographic order.

        Args:
            depth: Word length m
            measure: Word measure supplying the weights
            visitor: Called with (word, b, weight) for every word, in order
            progress_callback: Receives EnumerationProgress per partition

        Returns:
            The merged LevelBatch
        """
        parts = self.map_partitions(depth, measure, lambda batch: batch, progress_callback)
        batch = LevelBatch.concatenate(parts)
        if visitor is not None:
            for word, b, weight in batch.items():
                visitor(word, b, weight)
        return batch

    def iter_words(
        self, depth: int, measure: WordMeasure
    ) -> Iterator[Tuple[Word, BVector, float]]:
        """Stream (word, b, weight) in lexicographic order."""
        yield from self.enumerate(depth, measure).items()
