"""Property checks for the harmonic structure, energy measures and b-coefficients.

Every check returns a VerificationReport; a failing report always carries the
worst witness found. Checks that draw random inputs use a generator derived
from (master seed, check name), so each check is reproducible on its own.
"""

import logging
import math
import time
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from ..models.errors import UnsupportedStructureError
from ..models.report import VerificationReport, Witness
from ..models.word import Word
from ..utils import rational_linalg as rl
from ..utils import small_matrix
from ..utils.output import format_scalar
from .energy_model import EnergyModel, random_word
from .montecarlo import MonteCarloService, named_generator
from .structure_builder import StructureBuilder, harmonic_identity_holds
from .word_enumerator import WordEnumerator, WordMeasure

logger = logging.getLogger(__name__)

FLOAT_TOL = 1e-10
NOISE_FLOOR = 1e-12

# SG_2 skewness identity: (1/5)(b_j - 1/3) = (1/4)(nu(K_wj)/nu(K_w) - 1/3)
SKEW_B = 1.0 / 5.0
SKEW_NU = 1.0 / 4.0

# Tilde-plane eigenvectors of A_j (eigenvalue r first, then mu).
CORNER_EIGENVECTORS = {
    1: ((2, -1, -1), (0, 1, -1)),
    2: ((-1, 2, -1), (1, 0, -1)),
    3: ((-1, -1, 2), (1, -1, 0)),
}


class TheoremVerifier:
    """Runs property checks against one structure."""

    CHECK_NAMES = (
        "structure",
        "A2",
        "lemmaD",
        "lemmaA",
        "lemmaa",
        "thmB",
        "bhs1",
        "irr",
        "detratio",
        "jjj",
        "eqbj",
        "decomp",
        "cs",
        "additivity",
        "frame",
        "nu",
        "rank",
    )

    def __init__(
        self,
        model: EnergyModel,
        builder: Optional[StructureBuilder] = None,
        workers: Optional[int] = None,
        max_leaves: int = 2_000_000,
        allow_deep: bool = False,
        timing: bool = False,
    ):
        self.model = model
        self.hs = model.hs
        self.level = model.structure.level
        self.builder = builder or StructureBuilder()
        self.enumerator = WordEnumerator(model, max_leaves, allow_deep, workers)
        self.montecarlo = MonteCarloService(model, workers)
        self.timing = timing

    # ------------------------------------------------------------------
    # Plumbing
    # ------------------------------------------------------------------

    def _report(self, check: str, **parameters: Any) -> VerificationReport:
        params = {"level": self.level, "backend": self.hs.backend}
        params.update(parameters)
        return VerificationReport(check=check, parameters=params)

    def _finish(self, report: VerificationReport, started: float) -> VerificationReport:
        if self.timing:
            report.runtime_s = time.perf_counter() - started
        if report.passed:
            logger.info("check %s passed", report.check)
        else:
            witness = report.witness.to_dict() if report.witness else None
            logger.warning("check %s failed: %s", report.check, witness)
        return report

    def _label(self, w: Word) -> str:
        return w.label(self.model.num_symbols)

    def _random_words(self, rng: np.random.Generator, count: int, max_length: int) -> List[Word]:
        return [random_word(rng, self.model.num_symbols, max_length) for _ in range(count)]

    # ------------------------------------------------------------------
    # Structure checks
    # ------------------------------------------------------------------

    def check_structure(self) -> VerificationReport:
        """G' = r D, A_i 1 = 1, tA_j u_j = r u_j, sum_i tA_i D A_i = r D, D^2 = -gamma D."""
        started = time.perf_counter()
        hs = self.hs
        report = self._report("structure", tolerance=0 if hs.is_exact else FLOAT_TOL)
        if hs.is_exact:
            d, r = hs.d_matrix, hs.r
            ones = (Fraction(1),) * 3
            items: Dict[str, bool] = {
                "schur_equals_rD": hs.schur_complement == rl.scale(d, r),
                "constants_preserved": all(rl.matvec(a, ones) == ones for a in hs.a_maps),
                "corner_eigenvectors": all(
                    rl.matvec(rl.transpose(hs.a_maps[j]), hs.u_vectors[j])
                    == tuple(r * x for x in hs.u_vectors[j])
                    for j in range(3)
                ),
                "harmonic_identity": harmonic_identity_holds(hs.a_maps, d, r),
                "d_squared": rl.matmul(d, d) == rl.scale(d, -hs.gamma),
                "regular": 0 < r < 1,
            }
            report.details = {"r": format_scalar(r), "gamma": format_scalar(hs.gamma), **items}
            failed = [name for name, ok in items.items() if not ok]
            if failed:
                report.fail(Witness(word="", residual=1.0, detail={"failed": failed}))
        else:
            d, r, a = hs.d_array(), float(hs.r), hs.a_array()
            u = hs.u_array()
            residuals = {
                "schur_equals_rD": float(np.max(np.abs(np.array(hs.schur_complement) - r * d))),
                "constants_preserved": float(np.max(np.abs(a.sum(axis=2) - 1.0))),
                "corner_eigenvectors": max(
                    float(np.max(np.abs(a[j].T @ u[j] - r * u[j]))) for j in range(3)
                ),
                "harmonic_identity": float(
                    np.max(np.abs(np.einsum("sji,jk,skl->il", a, d, a) - r * d))
                ),
                "d_squared": float(np.max(np.abs(d @ d + float(hs.gamma) * d))),
            }
            report.details = {"r": r, "gamma": float(hs.gamma), **residuals}
            worst = max(residuals, key=residuals.get)
            if residuals[worst] > FLOAT_TOL or not 0 < r < 1:
                report.fail(Witness(word="", residual=residuals[worst], detail={"item": worst}))
        return self._finish(report, started)

    def check_a2(self) -> VerificationReport:
        """Invertible extension matrices at every level from 2 up to this structure's level."""
        started = time.perf_counter()
        report = self._report(
            "A2", levels=[2, self.level], certify_cap=self.builder.certify_cap
        )
        per_level = []
        for level in range(2, self.level + 1):
            if level == self.level:
                a2 = self.builder.check_a2(self.hs.structure, self.hs)
            else:
                a2 = self.builder.certify_a2(level)
            per_level.append(a2.to_dict())
            if not a2.all_invertible:
                report.fail(
                    Witness(
                        word=str(a2.zero_symbols[0]),
                        residual=0.0,
                        detail={"level": level, "zero_symbols": a2.zero_symbols},
                    )
                )
        report.details = {"levels": per_level}
        return self._finish(report, started)

    def check_lemma_d(self, d_matrix: Optional[Sequence[Sequence]] = None) -> VerificationReport:
        """Range of D is the mean-zero subspace: rank #V0 - 1 and 1^t D = 0."""
        started = time.perf_counter()
        d = rl.to_matrix(d_matrix if d_matrix is not None else self.hs.d_matrix)
        n = len(d)
        report = self._report("lemmaD", expected_rank=n - 1)
        rank = rl.rank(d)
        column_sums = [sum((d[i][k] for i in range(n)), Fraction(0)) for k in range(n)]
        report.details = {
            "rank": rank,
            "column_sums": [format_scalar(x) for x in column_sums],
            "range_basis": [
                [format_scalar(x) for x in row] for row in rl.row_echelon(rl.transpose(d))
                if any(x != 0 for x in row)
            ],
        }
        worst = max((abs(x) for x in column_sums), default=Fraction(0))
        if rank != n - 1 or worst != 0:
            report.fail(
                Witness(word="", residual=float(worst), detail={"rank": rank})
            )
        return self._finish(report, started)

    def check_lemma_a(self) -> VerificationReport:
        """Spectrum of A_j is {1, r, mu} with r simple and |mu| < r; eigenvectors u_j, v_j."""
        started = time.perf_counter()
        hs = self.hs
        report = self._report("lemmaA", tolerance=FLOAT_TOL)
        per_corner = []
        worst: Optional[Witness] = None
        one = Fraction(1) if hs.is_exact else 1.0
        for j in range(3):
            a = hs.a_maps[j]
            u, v = hs.u_vectors[j], hs.v_vectors[j]
            r = hs.r
            trace = sum(a[i][i] for i in range(3))
            mu = trace - 1 - r
            minors = sum(
                a[p][p] * a[q][q] - a[p][q] * a[q][p] for p, q in ((0, 1), (0, 2), (1, 2))
            )
            det = rl.determinant(rl.to_matrix(a)) if hs.is_exact else float(np.linalg.det(np.array(a)))
            eigen = np.sort(np.linalg.eigvals(np.array(a, dtype=float)).real)
            expected = np.sort(np.array([1.0, float(r), float(mu)]))
            eigen_residual = float(np.max(np.abs(eigen - expected)))
            au = [sum(a[i][k] * u[i] for i in range(3)) for k in range(3)]
            av = [sum(a[k][i] * v[i] for i in range(3)) for k in range(3)]
            u_residual = max(abs(float(au[k] - r * u[k])) for k in range(3))
            v_residual = max(abs(float(av[k] - r * v[k])) for k in range(3))
            pairing = sum(u[k] * v[k] for k in range(3))
            if hs.is_exact:
                characteristic = det == r * mu and minors == r + mu + r * mu
            else:
                characteristic = (
                    abs(det - float(r) * float(mu)) < FLOAT_TOL
                    and abs(minors - (r + mu + r * mu)) < FLOAT_TOL
                )
            items = {
                "characteristic_polynomial": bool(characteristic),
                "mu_below_r": bool(abs(mu) < r),
                "r_simple": bool(r != mu and r != 1),
                "spectrum": eigen_residual < FLOAT_TOL,
                "left_eigenvector": u_residual < FLOAT_TOL,
                "right_eigenvector": v_residual < FLOAT_TOL,
                "v_nonnegative": all(x >= (0 if hs.is_exact else -FLOAT_TOL) for x in v),
                "pairing_one": abs(float(pairing) - 1.0) < FLOAT_TOL,
            }
            per_corner.append(
                {
                    "j": j + 1,
                    "eigenvalues": [format_scalar(one), format_scalar(r), format_scalar(mu)],
                    "det": format_scalar(det),
                    "v": [format_scalar(x) for x in v],
                    **items,
                }
            )
            failed = [name for name, ok in items.items() if not ok]
            if failed and worst is None:
                worst = Witness(
                    word=str(j + 1),
                    residual=max(eigen_residual, u_residual, v_residual),
                    detail={"failed": failed},
                )
        report.details = {"corners": per_corner}
        if worst is not None:
            report.fail(worst)
        return self._finish(report, started)

    # ------------------------------------------------------------------
    # Energy-core checks
    # ------------------------------------------------------------------

    def check_lemma_a_limit(self, seed: int = 0, starts: int = 20, n_max: int = 40) -> VerificationReport:
        """r^-n P A_j^n x -> (u_j, x) P v_j, monotonically and below 1e-8 at n_max."""
        started = time.perf_counter()
        model = self.model
        report = self._report("lemmaa", seed=seed, starts=starts, n_max=n_max, tolerance=1e-8)
        rng = named_generator(seed, "lemmaa")
        worst = Witness(word="", residual=0.0)
        final_max = 0.0
        for j in range(3):
            b_j = model.b_maps[j]
            target_dir = model.q.T @ model.v[j]
            candidates = [model.v[j], np.ones(3)] + [rng.normal(size=3) for _ in range(starts)]
            for index, x in enumerate(candidates):
                y = model.q.T @ x
                coefficient = float(model.u[j] @ x)
                previous = float(np.linalg.norm(y - coefficient * target_dir))
                monotone = True
                for n in range(1, n_max + 1):
                    y = b_j @ y / model.r
                    residual = float(np.linalg.norm(y - coefficient * target_dir))
                    if previous > NOISE_FLOOR and residual >= previous:
                        monotone = False
                    previous = residual
                final_max = max(final_max, previous)
                if not monotone or previous >= 1e-8:
                    report.fail(
                        Witness(
                            word=self._label(Word((j + 1,) * n_max)),
                            residual=previous,
                            detail={"start": index, "x": x.tolist(), "monotone": monotone},
                        )
                    )
                elif previous > worst.residual:
                    worst = Witness(word=str(j + 1), residual=previous, detail={"start": index})
        report.details = {"max_residual_at_n_max": final_max}
        if report.passed:
            report.witness = worst
        return self._finish(report, started)

    def check_density_limits(self, seed: int = 0, cases: int = 100, n: int = 30,
                             max_length: int = 8) -> VerificationReport:
        """nu_f(K_{w j^n}) / nu(K_{w j^n}) is within 1e-6 of (u_j, A_w f)^2 / a_j."""
        started = time.perf_counter()
        report = self._report("jjj", seed=seed, cases=cases, n=n, tolerance=1e-6)
        rng = named_generator(seed, "jjj")
        worst = Witness(word="", residual=0.0)
        for _ in range(cases):
            w = random_word(rng, self.model.num_symbols, max_length)
            j = int(rng.integers(1, 4))
            f = rng.normal(size=3)
            limit = self.model.limit_density(w, j, f)
            finite = self.model.density_ratio(w, j, f, n)
            residual = abs(finite - limit) / max(1.0, abs(limit))
            if residual > worst.residual:
                worst = Witness(
                    word=self._label(w), residual=residual,
                    detail={"j": j, "f": f.tolist(), "limit": limit, "finite": finite},
                )
        report.witness = worst
        report.sampled = True
        if worst.residual > 1e-6:
            report.fail()
        return self._finish(report, started)

    def check_sum_b_squared(self, seed: int = 0, words: int = 1000, max_length: int = 12) -> VerificationReport:
        """The z_j identity for sum_j b_j^2 agrees with b_coeffs for every k."""
        started = time.perf_counter()
        report = self._report("eqbj", seed=seed, words=words, tolerance=FLOAT_TOL,
                              k_tolerance=1e-12)
        rng = named_generator(seed, "eqbj")
        worst = Witness(word="", residual=0.0)
        worst_spread = 0.0
        above_half = 0
        for w in [Word.empty()] + self._random_words(rng, words, max_length):
            direct = self.model.b_coeffs(w).sum_squares()
            values = [self.model.sum_b_squared_formula(w, k) for k in (1, 2, 3)]
            residual = max(abs(v - direct) for v in values)
            spread = max(values) - min(values)
            worst_spread = max(worst_spread, spread)
            if direct >= 0.5:
                above_half += 1
            if residual > worst.residual:
                worst = Witness(word=self._label(w), residual=residual, detail={"values": values})
        report.witness = worst
        report.details = {"max_k_spread": worst_spread, "sum_squares_at_least_half": above_half}
        report.sampled = True
        if worst.residual > FLOAT_TOL or worst_spread > 1e-12 or above_half:
            report.fail()
        return self._finish(report, started)

    def check_decomposition(self, seed: int = 0, cases: int = 1000, max_length: int = 10) -> VerificationReport:
        """nu_f(K_w) / nu(K_w) = sum_j b_j (u_j, A_w f)^2 / a_j."""
        started = time.perf_counter()
        report = self._report("decomp", seed=seed, cases=cases, tolerance=FLOAT_TOL)
        rng = named_generator(seed, "decomp")
        worst = Witness(word="", residual=0.0)
        for w in self._random_words(rng, cases, max_length):
            f = rng.normal(size=3)
            lhs = self.model.cell_energy(f, w) / self.model.nu_mass(w)
            b = self.model.b_coeffs(w).b
            rhs = sum(b[j - 1] * self.model.limit_density(w, j, f) for j in (1, 2, 3))
            residual = abs(lhs - rhs) / max(1.0, abs(lhs))
            if residual > worst.residual:
                worst = Witness(word=self._label(w), residual=residual, detail={"f": f.tolist()})
        report.witness = worst
        report.sampled = True
        if worst.residual > FLOAT_TOL:
            report.fail()
        return self._finish(report, started)

    def check_cauchy_schwarz(self, seed: int = 0, cases: int = 1000, max_length: int = 10) -> VerificationReport:
        """|nu_{f,g}(K_w)|^2 <= nu_f(K_w) nu_g(K_w); polarization matches the bilinear form."""
        started = time.perf_counter()
        report = self._report("cs", seed=seed, cases=cases, slack=1e-12)
        rng = named_generator(seed, "cs")
        worst = Witness(word="", residual=-math.inf)
        worst_polar = 0.0
        for w in self._random_words(rng, cases, max_length):
            f, g = rng.normal(size=3), rng.normal(size=3)
            mutual = self.model.mutual_cell_energy(f, g, w)
            direct = self.model.bilinear_cell_energy(f, g, w)
            nf, ng = self.model.cell_energy(f, w), self.model.cell_energy(g, w)
            scale = max(nf * ng, 1e-300)
            excess = (direct * direct - nf * ng) / scale
            worst_polar = max(worst_polar, abs(mutual - direct) / max(1.0, abs(direct)))
            if excess > worst.residual:
                worst = Witness(word=self._label(w), residual=excess,
                                detail={"f": f.tolist(), "g": g.tolist()})
        report.witness = worst
        report.details = {"max_polarization_residual": worst_polar}
        report.sampled = True
        if worst.residual > 1e-12 or worst_polar > 1e-9:
            report.fail()
        return self._finish(report, started)

    def check_additivity(self, seed: int = 0, cases: int = 200, max_length: int = 10) -> VerificationReport:
        """nu_f(K_w) = sum_s nu_f(K_ws) (no mass on V_*)."""
        started = time.perf_counter()
        report = self._report("additivity", seed=seed, cases=cases, tolerance=1e-9)
        rng = named_generator(seed, "additivity")
        worst = Witness(word="", residual=0.0)
        for w in self._random_words(rng, cases, max_length):
            f = rng.normal(size=3)
            parent = self.model.cell_energy(f, w)
            children = sum(
                self.model.cell_energy(f, w.append(s))
                for s in range(1, self.model.num_symbols + 1)
            )
            residual = abs(parent - children) / max(abs(parent), 1e-300)
            if residual > worst.residual:
                worst = Witness(word=self._label(w), residual=residual, detail={"f": f.tolist()})
        report.witness = worst
        report.sampled = True
        if worst.residual > 1e-9:
            report.fail()
        return self._finish(report, started)

    def check_frame_invariance(self, seed: int = 0, words: int = 100, angles: int = 8,
                               max_length: int = 10) -> VerificationReport:
        """Rotating the frame changes no a_j; the frame stays normalized."""
        started = time.perf_counter()
        report = self._report("frame", seed=seed, words=words, angles=angles, tolerance=1e-12)
        rng = named_generator(seed, "frame")
        rotated = [
            self.model.rotated(2.0 * math.pi * (k + 0.5) / angles) for k in range(angles)
        ]
        gram_residual = max(
            float(np.max(np.abs(m.frame_gram() - np.eye(2) / 4.0)))
            for m in [self.model] + rotated
        )
        worst = Witness(word="", residual=0.0)
        for w in [Word.empty()] + self._random_words(rng, words, max_length):
            base = np.array(self.model.a_coeffs(w))
            for k, other in enumerate(rotated):
                residual = float(np.max(np.abs(np.array(other.a_coeffs(w)) - base)))
                if residual > worst.residual:
                    worst = Witness(word=self._label(w), residual=residual, detail={"angle_index": k})
        report.witness = worst
        report.details = {"frame_gram_residual": gram_residual}
        report.sampled = True
        if worst.residual > 1e-12 or gram_residual > 1e-12:
            report.fail()
        return self._finish(report, started)

    def check_nu_probability(self, depth: int) -> VerificationReport:
        """nu(K) = 1 and sum_{|w| = m} nu(K_w) = 1 for m <= depth."""
        started = time.perf_counter()
        report = self._report("nu", depth=depth, tolerance=1e-9)
        levels = self.enumerator.levels(depth, WordMeasure.uniform())
        totals = [float(batch.nu.sum()) for batch in levels]
        uniform_totals = [float(batch.weight.sum()) for batch in levels]
        residuals = [abs(t - 1.0) for t in totals]
        worst_depth = int(np.argmax(residuals))
        root = self.model.nu_mass(Word.empty())
        report.details = {
            "nu_total_per_depth": totals,
            "uniform_total_per_depth": uniform_totals,
            "nu_of_K": root,
            "frame_gram_residual": float(np.max(np.abs(self.model.frame_gram() - np.eye(2) / 4))),
        }
        report.witness = Witness(word="", residual=residuals[worst_depth],
                                 detail={"depth": worst_depth})
        if (
            residuals[worst_depth] > 1e-9
            or abs(root - 1.0) > 1e-12
            or max(abs(t - 1.0) for t in uniform_totals) > 1e-9
            or report.details["frame_gram_residual"] > 1e-12
        ):
            report.fail()
        return self._finish(report, started)

    # ------------------------------------------------------------------
    # Distribution checks
    # ------------------------------------------------------------------

    def check_theorem_b(self, depth: int) -> VerificationReport:
        """SG_2 only: (1/5)(b_j^(w) - 1/3) = (1/4)(nu(K_wj)/nu(K_w) - 1/3) for |w| <= depth.

        Raises:
            UnsupportedStructureError: on any level other than 2
        """
        if self.level != 2:
            raise UnsupportedStructureError("the skewness identity is specific to SG_2")
        started = time.perf_counter()
        report = self._report("thmB", depth=depth, tolerance=FLOAT_TOL)
        levels = self.enumerator.levels(depth + 1, WordMeasure.uniform())
        worst = Witness(word="", residual=0.0)
        per_depth = []
        for m in range(depth + 1):
            parent, child = levels[m], levels[m + 1]
            ratio = child.nu.reshape(-1, self.model.num_symbols) / parent.nu[:, None]
            residual = np.abs(SKEW_B * (parent.b - 1.0 / 3.0) - SKEW_NU * (ratio - 1.0 / 3.0))
            flat = int(np.argmax(residual))
            i, j = divmod(flat, 3)
            value = float(residual[i, j])
            per_depth.append(value)
            if value > worst.residual:
                worst = Witness(word=self._label(parent.word(i)), residual=value, detail={"j": j + 1})
        spot = None
        if depth >= 1:
            spot = self.model.nu_mass(Word((1, 1))) / self.model.nu_mass(Word((1,)))
        report.details = {
            "max_residual_per_depth": per_depth,
            "ratio_11_over_1": spot,
            "expected_ratio_11_over_1": format_scalar(Fraction(41, 75)),
        }
        report.witness = worst
        spot_bad = spot is not None and abs(spot - 41.0 / 75.0) > FLOAT_TOL
        if worst.residual > FLOAT_TOL or spot_bad:
            report.fail()
        return self._finish(report, started)

    def check_bhs1(self, depth: int) -> VerificationReport:
        """sum_j (b_j - 1/3)^2 < 1/6 for every |w| <= depth; sup per depth reported."""
        started = time.perf_counter()
        report = self._report("bhs1", depth=depth, bound=format_scalar(Fraction(1, 6)))
        levels = self.enumerator.levels(depth, WordMeasure.uniform())
        sups: List[float] = []
        witness = Witness(word="", residual=0.0)
        violations = 0
        for batch in levels:
            centered = ((batch.b - 1.0 / 3.0) ** 2).sum(axis=1)
            sum_squares = batch.sum_squares()
            bad = (
                (centered >= 1.0 / 6.0)
                | (sum_squares >= 0.5)
                | (np.abs(batch.b.sum(axis=1) - 1.0) > 1e-12)
                | np.any(batch.b <= 0, axis=1)
            )
            violations += int(bad.sum())
            i = int(np.argmax(centered))
            sups.append(float(centered[i]))
            if bad.any() and report.passed:
                k = int(np.argmax(bad))
                report.fail(Witness(word=self._label(batch.word(k)), residual=float(centered[k]),
                                    detail={"b": batch.b[k].tolist()}))
            if centered[i] > witness.residual:
                witness = Witness(word=self._label(batch.word(i)), residual=float(centered[i]),
                                  detail={"b": batch.b[i].tolist()})
        if report.passed:
            report.witness = witness
        report.details = {
            "sup_per_depth": sups,
            "sup": max(sups),
            "gap_to_bound": 1.0 / 6.0 - max(sups),
            "words_checked": int(sum(len(b) for b in levels)),
            "violations": violations,
            "trend_increasing": bool(len(sups) > 2 and sups[-1] > sups[1]),
        }
        return self._finish(report, started)

    def check_strong_irreducibility(self, grid: int = 360) -> VerificationReport:
        """Corner eigenvectors of the tilde maps and a sampled pairwise-independence grid."""
        started = time.perf_counter()
        model = self.model
        report = self._report("irr", grid=grid, tolerance=FLOAT_TOL)
        report.sampled = True
        r = float(self.hs.r)
        eigen_residual = 0.0
        eigen_details = []
        for j, (z_r, z_mu) in CORNER_EIGENVECTORS.items():
            a = self.hs.a_maps[j - 1]
            mu = float(sum(a[i][i] for i in range(3))) - 1.0 - r
            b_j = model.b_maps[j - 1]
            for z, value in ((z_r, r), (z_mu, mu)):
                y = model.q.T @ np.array(z, dtype=float)
                residual = float(np.max(np.abs(b_j @ y - value * y)))
                eigen_residual = max(eigen_residual, residual)
                eigen_details.append({"j": j, "z": list(z), "eigenvalue": value,
                                      "residual": residual})

        def independent_triple(x: np.ndarray) -> bool:
            for i in (0, 1):
                triple = [x, model.b_maps[i] @ x, model.b_maps[i] @ model.b_maps[i] @ x]
                if all(
                    small_matrix.angular_distance(triple[p], triple[q]) > 1e-9
                    for p, q in ((0, 1), (0, 2), (1, 2))
                ):
                    return True
            candidates = [x] + [
                np.linalg.matrix_power(model.b_maps[s], n) @ x
                for s in range(model.num_symbols)
                for n in (1, 2)
            ]
            for p in range(len(candidates)):
                for q in range(p + 1, len(candidates)):
                    if small_matrix.angular_distance(candidates[p], candidates[q]) <= 1e-9:
                        continue
                    for k in range(q + 1, len(candidates)):
                        if (
                            small_matrix.angular_distance(candidates[p], candidates[k]) > 1e-9
                            and small_matrix.angular_distance(candidates[q], candidates[k]) > 1e-9
                        ):
                            return True
            return False

        failures = []
        for k in range(grid):
            angle = math.pi * k / grid
            x = np.array([math.cos(angle), math.sin(angle)])
            if not independent_triple(x):
                failures.append(angle)
        z1 = model.q.T @ np.array(CORNER_EIGENVECTORS[1][0], dtype=float)
        z1_triple = [z1, model.b_maps[1] @ z1, model.b_maps[1] @ model.b_maps[1] @ z1]
        z1_ok = all(
            small_matrix.angular_distance(z1_triple[p], z1_triple[q]) > 1e-9
            for p, q in ((0, 1), (0, 2), (1, 2))
        )
        report.details = {
            "eigenvectors": eigen_details,
            "grid_failures": len(failures),
            "z1_under_A2_independent": z1_ok,
        }
        if eigen_residual > FLOAT_TOL or failures or not z1_ok:
            report.fail(Witness(word="", residual=eigen_residual,
                                detail={"failed_angles": failures[:10]}))
        else:
            report.witness = Witness(word="", residual=eigen_residual)
        return self._finish(report, started)

    @staticmethod
    def _checkpoints(length: int) -> List[int]:
        points = list(range(10, length + 1, 10))
        return points if points else [length]

    @staticmethod
    def _sum_squares_contraction(deviation: np.ndarray, checkpoints: List[int]) -> Dict[str, Any]:
        """Median |sum b^2 - 1/2| at the first and last checkpoint; passes below one tenth."""
        first = float(np.median(deviation[:, checkpoints[0]]))
        last = float(np.median(deviation[:, checkpoints[-1]]))
        return {
            "sum_squares_median_first": first,
            "sum_squares_median_last": last,
            "sum_squares_contracts": len(checkpoints) == 1 or last < 0.1 * first,
        }

    def check_det_ratio_decay(self, samples: int = 500, length: int = 50, seed: int = 0) -> VerificationReport:
        """det(B_w)^2 / |B_w|^4 decays along uniform random words.

        Per-sample monotonicity at the checkpoints is counted; the check
        passes when the checkpoint medians strictly decrease and the last
        median is below 1e-3 of the first.
        """
        started = time.perf_counter()
        checkpoints = self._checkpoints(length)
        report = self._report("detratio", samples=samples, length=length, seed=seed,
                              checkpoints=checkpoints, median_ratio=1e-3)
        report.sampled = True
        result = self.montecarlo.run(samples, length, seed, WordMeasure.uniform(), stream="detratio")
        ratios = result.det_ratio[:, checkpoints]
        increasing = np.any(np.diff(ratios, axis=1) >= 0, axis=1)
        medians = np.median(ratios, axis=0)

        b1 = self.model.b_maps[0]
        power_residual = 0.0
        per_step = (abs(float(small_matrix.det2(b1))) / float(self.hs.r) ** 2) ** 2
        for n in range(1, 11):
            observed = self.model.tilde_matrix(Word((1,) * n)).det_ratio
            expected = per_step ** n
            power_residual = max(power_residual, abs(observed - expected) / expected)

        report.details = {
            "median_per_checkpoint": medians.tolist(),
            "non_monotone_samples": int(increasing.sum()),
            "median_at_length": float(medians[-1]),
            "median_below_1e-6": bool(medians[-1] < 1e-6),
            "single_symbol_closed_form_residual": power_residual,
            **self._sum_squares_contraction(result.deviation(), checkpoints),
        }
        medians_decrease = bool(np.all(np.diff(medians) < 0))
        ratio_ok = bool(medians[-1] < 1e-3 * medians[0]) if len(medians) > 1 else True
        if increasing.any():
            i = int(np.argmax(increasing))
            witness = Witness(
                word=self._label(Word(tuple(int(s) for s in result.symbols[i]))),
                residual=float(np.max(np.diff(ratios[i]))),
                detail={"sample": i, "ratios": ratios[i].tolist()},
            )
        else:
            witness = Witness(word="", residual=float(medians[-1]))
        report.witness = witness
        if (
            not medians_decrease
            or not ratio_ok
            or power_residual > 1e-9
            or not report.details["sum_squares_contracts"]
        ):
            report.fail()
        return self._finish(report, started)

    def check_energy_density_rank(self, samples: int = 500, length: int = 50,
                                  seed: int = 0) -> VerificationReport:
        """det of nu_{x_i,x_j}(K_w)/nu(K_w) decays along nu-typical words."""
        started = time.perf_counter()
        checkpoints = self._checkpoints(length)
        report = self._report("rank", samples=samples, length=length, seed=seed,
                              checkpoints=checkpoints)
        report.sampled = True
        result = self.montecarlo.run(samples, length, seed, WordMeasure.nu(), stream="rank")
        dets = result.density_det[:, checkpoints]
        medians = np.median(dets, axis=0)
        root = self.model.energy_density_matrix(Word.empty())
        report.details = {
            "median_det_per_checkpoint": medians.tolist(),
            "root_matrix": root.tolist(),
            **self._sum_squares_contraction(result.deviation(), checkpoints),
        }
        report.witness = Witness(word="", residual=float(medians[-1]))
        if (
            not np.all(np.diff(medians) < 0)
            or abs(np.trace(root) - 1.0) > 1e-12
            or not report.details["sum_squares_contracts"]
        ):
            report.fail()
        return self._finish(report, started)

    # ------------------------------------------------------------------
    # Dispatch
    # ------------------------------------------------------------------

    def run(self, check: str, depth: int = 8, seed: int = 0, samples: int = 500,
            length: int = 50) -> List[VerificationReport]:
        """Run one named check, or every check for "all"."""
        if check == "all":
            reports = []
            for name in self.CHECK_NAMES:
                if name == "thmB" and self.level != 2:
                    logger.info("skipping thmB on SG_%d", self.level)
                    continue
                reports.extend(self.run(name, depth, seed, samples, length))
            return reports
        table: Dict[str, Callable[[], VerificationReport]] = {
            "structure": self.check_structure,
            "A2": self.check_a2,
            "lemmaD": self.check_lemma_d,
            "lemmaA": self.check_lemma_a,
            "lemmaa": lambda: self.check_lemma_a_limit(seed),
            "thmB": lambda: self.check_theorem_b(depth),
            "bhs1": lambda: self.check_bhs1(depth),
            "irr": self.check_strong_irreducibility,
            "detratio": lambda: self.check_det_ratio_decay(samples, length, seed),
            "jjj": lambda: self.check_density_limits(seed),
            "eqbj": lambda: self.check_sum_b_squared(seed),
            "decomp": lambda: self.check_decomposition(seed),
            "cs": lambda: self.check_cauchy_schwarz(seed),
            "additivity": lambda: self.check_additivity(seed),
            "frame": lambda: self.check_frame_invariance(seed),
            "nu": lambda: self.check_nu_probability(depth),
            "rank": lambda: self.check_energy_density_rank(samples, length, seed),
        }
        if check not in table:
            raise ValueError(f"unknown check {check!r}")
        return [table[check]()]
