"""Seeded Monte Carlo paths for the almost-sure behaviour of b along words.

Each sample path owns a generator
``Generator(PCG64(SeedSequence(seed, spawn_key=(stream, index))))`` where
``stream`` is derived from a name, so results are reproducible per sample and
do not depend on how samples are split across threads. Samples are processed
in fixed-size chunks and each chunk is vectorized over its samples.
"""

import hashlib
import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np

from ..models.errors import PreconditionError
from ..utils import small_matrix
from ..utils.workers import resolve_workers, run_partitioned
from .energy_model import EnergyModel, polar_arrays
from .word_enumerator import WordMeasure

logger = logging.getLogger(__name__)

CHUNK_SIZE = 64


def stream_id(name: str) -> int:
    """Stable 32-bit stream number for a name (e.g. a check name)."""
    return int.from_bytes(hashlib.sha256(name.encode("utf-8")).digest()[:4], "big")


def substream(seed: int, stream: str, index: int) -> np.random.Generator:
    """Generator for sample ``index`` of the named stream."""
    sequence = np.random.SeedSequence(seed, spawn_key=(stream_id(stream), index))
    return np.random.Generator(np.random.PCG64(sequence))


def named_generator(seed: int, name: str) -> np.random.Generator:
    """Generator owned by one named consumer (e.g. a verifier check)."""
    sequence = np.random.SeedSequence(seed, spawn_key=(stream_id(name),))
    return np.random.Generator(np.random.PCG64(sequence))


@dataclass
class MonteCarloResult:
    """Per-sample trajectories at n = 0..length (column n)."""

    seed: int
    measure: str
    sum_squares: np.ndarray  # (samples, length + 1)
    radius: np.ndarray
    det_ratio: np.ndarray
    density_det: np.ndarray  # det of the energy density matrix
    symbols: np.ndarray  # (samples, length), 1-based

    @property
    def samples(self) -> int:
        return int(self.sum_squares.shape[0])

    @property
    def length(self) -> int:
        return int(self.sum_squares.shape[1]) - 1

    def deviation(self) -> np.ndarray:
        """|sum_j b_j^2 - 1/2| per sample and step."""
        return np.abs(self.sum_squares - 0.5)

    def quantile_rows(self) -> List[Tuple[int, float, float, float]]:
        """(n, q10, median, q90) of the deviation for n = 0..length."""
        q = np.quantile(self.deviation(), [0.1, 0.5, 0.9], axis=0)
        return [
            (n, float(q[0, n]), float(q[1, n]), float(q[2, n]))
            for n in range(self.length + 1)
        ]


class MonteCarloService:
    """Samples random words under a word measure and tracks b along them."""

    def __init__(
        self,
        model: EnergyModel,
        workers: Optional[int] = None,
        chunk_size: int = CHUNK_SIZE,
    ):
        self.model = model
        self.workers = resolve_workers(workers)
        self.chunk_size = chunk_size
        b_dets = small_matrix.det2(model.b_maps)
        self._log_abs_det_maps = np.log(np.abs(b_dets))
        frame_det = abs(float(small_matrix.det2(model.frame_tilde)))
        self._log_density_const = 2.0 * np.log(frame_det) + np.log(
            float(small_matrix.det2(model.neg_d_tilde))
        )

    def _uniforms(self, seed: int, stream: str, start: int, stop: int, length: int) -> np.ndarray:
        return np.stack([substream(seed, stream, i).random(length) for i in range(start, stop)])

    def _run_chunk(
        self,
        start: int,
        stop: int,
        length: int,
        seed: int,
        measure: WordMeasure,
        stream: str,
    ) -> Tuple[np.ndarray, ...]:
        model = self.model
        count = stop - start
        num_symbols = model.num_symbols
        uniforms = self._uniforms(seed, stream, start, stop, length)
        cumulative = np.cumsum(measure.symbol_probabilities(num_symbols))

        tilde = np.broadcast_to(np.eye(2), (count, 2, 2)).copy()
        log_abs_det = np.zeros(count)
        sum_squares = np.empty((count, length + 1))
        radius = np.empty((count, length + 1))
        det_ratio = np.empty((count, length + 1))
        density_det = np.empty((count, length + 1))
        symbols = np.empty((count, length), dtype=np.int64)
        rows = np.arange(count)

        def record(n: int) -> None:
            b = model.batch_b(tilde)
            sum_squares[:, n] = (b * b).sum(axis=1)
            radius[:, n] = polar_arrays(b)[0]
            sigma = small_matrix.largest_singular_value(tilde)
            det_ratio[:, n] = np.exp(2.0 * log_abs_det - 4.0 * np.log(sigma))
            trace = model.batch_energy_trace(tilde)
            density_det[:, n] = np.exp(
                2.0 * log_abs_det + self._log_density_const - 2.0 * np.log(trace)
            )

        record(0)
        for n in range(1, length + 1):
            u = uniforms[:, n - 1]
            if measure.kind == "nu":
                children = np.einsum("sij,njk->nsik", model.b_maps, tilde)
                weights = model.batch_energy_trace(children.reshape(-1, 2, 2)).reshape(
                    count, num_symbols
                )
                cum = np.cumsum(weights, axis=1)
                chosen = (cum <= (u * cum[:, -1])[:, None]).sum(axis=1)
                chosen = np.minimum(chosen, num_symbols - 1)
                tilde = children[rows, chosen]
            else:
                chosen = np.searchsorted(cumulative, u, side="right")
                chosen = np.minimum(chosen, num_symbols - 1)
                tilde = model.b_maps[chosen] @ tilde
            symbols[:, n - 1] = chosen + 1
            norms = np.sqrt(small_matrix.frobenius_sq(tilde))
            tilde = tilde / norms[:, None, None]
            log_abs_det += self._log_abs_det_maps[chosen] - 2.0 * np.log(norms)
            record(n)
        return sum_squares, radius, det_ratio, density_det, symbols

    def run(
        self,
        samples: int,
        length: int,
        seed: int,
        measure: WordMeasure,
        stream: str = "montecarlo",
        progress_callback: Optional[Callable[[int, int], None]] = None,
    ) -> MonteCarloResult:
        """Sample ``samples`` words of length ``length`` and track b along each.

        Args:
            samples: Number of sample paths
            length: Path length n
            seed: Master seed
            measure: uniform / product (i.i.d. symbols) or nu (sequential
                conditional weights nu(K_ws) / nu(K_w))
            stream: Name of the random stream
            progress_callback: Called with (chunks done, chunks total)

        Returns:
            MonteCarloResult with trajectories for n = 0..length
        """
        if samples < 1 or length < 1:
            raise PreconditionError("samples and length must be positive")
        measure.validate(self.model.num_symbols)
        bounds = [
            (start, min(start + self.chunk_size, samples))
            for start in range(0, samples, self.chunk_size)
        ]
        done = {"count": 0}

        def task_for(start: int, stop: int) -> Callable[[], Tuple[np.ndarray, ...]]:
            return lambda: self._run_chunk(start, stop, length, seed, measure, stream)

        def on_done(_: int, __: Tuple[np.ndarray, ...]) -> None:
            done["count"] += 1
            if progress_callback is not None:
                progress_callback(done["count"], len(bounds))

        logger.debug("monte carlo: %d samples in %d chunks", samples, len(bounds))
        chunks = run_partitioned([task_for(a, b) for a, b in bounds], self.workers, on_done)
        merged = [np.concatenate([c[i] for c in chunks]) for i in range(5)]
        return MonteCarloResult(
            seed=seed,
            measure=measure.kind,
            sum_squares=merged[0],
            radius=merged[1],
            det_ratio=merged[2],
            density_det=merged[3],
            symbols=merged[4],
        )
