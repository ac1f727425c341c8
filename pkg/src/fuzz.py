"""
Seeded fuzzing driver
Generates random shaped modules, runs every pipeline on them and tallies the
invariants that must hold; failing inputs are kept as replayable documents
"""

import logging
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np

from src.algebra import EpsilonModel, FieldParams
from src.config import FUZZ_CONFIG, KERNEL_CONFIG
from src.documents import module_document
from src.errors import DimensionTooLarge, NotGeneric, ToolkitError
from src.export import ReportExporter, tally_frame
from src.kisin import MUTATION_KINDS, UTKisinModule, height_check, mutate_module, random_lift, random_shaped_module
from src.lift import LiftPipeline, chars_of_module, genericity_check, twist_sweep, verify_certificate
from src.phigamma import diagonal_template, kernel_oracle, tropical_forced_zeros
from src.shape import ShapeAnalyzer, closed_set_from_weights, find_sigma

logger = logging.getLogger(__name__)

INVARIANTS = (
    'engine_agreement',
    'genericity_witness',
    'lift_certificate',
    'mutation_flagged',
    'reduction_compatibility',
    'shape_clean',
    'sigma_sorting',
    'twist_invariance',
)


def random_weights(p: int, d: int, rng) -> tuple:
    """d distinct weights in [0, p] containing 0, in random slot order"""
    chosen = [0] + [int(t) + 1 for t in rng.choice(p, size=d - 1, replace=False)]
    rng.shuffle(chosen)
    return tuple(chosen)


class FuzzRunner:
    """
    Deterministic corpus run

    Every item draws from its own generator seeded by (seed, index), so a
    failing item can be replayed in isolation.
    """

    def __init__(self, p: int = 5, f: int = 1, d: int = 3, count: int = 100, seed: int = 0,
                 model: Optional[EpsilonModel] = None):
        self.logger = logging.getLogger(__name__)
        if d < 1 or d > FUZZ_CONFIG['max_dimension']:
            raise DimensionTooLarge(f"fuzzing is limited to 1 <= d <= {FUZZ_CONFIG['max_dimension']}, got {d}")
        if d > p + 1:
            raise DimensionTooLarge(f"{d} distinct weights do not fit in [0, {p}]")
        if count < 1 or count > FUZZ_CONFIG['max_count']:
            raise ValueError(f"count must lie in [1, {FUZZ_CONFIG['max_count']}], got {count}")

        self.params = FieldParams(p, f)
        self.d = d
        self.count = count
        self.seed = seed
        self.model = model or EpsilonModel.from_name()
        self.analyzer = ShapeAnalyzer()
        self.pipeline = LiftPipeline()
        self.tallies: Dict[str, Dict[str, int]] = {name: {'passed': 0, 'failed': 0} for name in INVARIANTS}
        self.failures: List[dict] = []
        self.not_generic = 0

    def _record(self, name: str, passed: bool, index: int, module: Optional[UTKisinModule] = None) -> None:
        self.tallies[name]['passed' if passed else 'failed'] += 1
        if not passed:
            self.logger.warning(f"item {index}: invariant {name} failed")
            self.failures.append({'index': index, 'invariant': name, 'module': module})

    def run_item(self, index: int) -> None:
        rng = np.random.default_rng([self.seed, index])
        item_seed = int(rng.integers(0, 2 ** 31))
        weights = random_weights(self.params.p, self.d, rng)
        module = random_shaped_module(self.params, self.d, weights, item_seed)

        report = self.analyzer.analyze(module)
        self._record('shape_clean', report.ok, index, module)

        sigma = find_sigma(weights)
        ordered = [weights[sigma(i) - 1] for i in range(1, self.d + 1)]
        self._record('sigma_sorting', ordered == sorted(weights), index, module)

        kind = MUTATION_KINDS[index % len(MUTATION_KINDS)]
        mutation = mutate_module(module, kind, item_seed)
        if mutation is not None:
            codes = self.analyzer.analyze(mutation.module).codes()
            self._record('mutation_flagged', kind in codes, index, mutation.module)

        self._check_lift(index, module)

        chars = chars_of_module(module)
        verdicts = {verdict for _, verdict in twist_sweep(chars)}
        self._record('twist_invariance', len(verdicts) <= 1, index, module)

        lift = random_lift(self.params, self.d, weights, item_seed)
        reduced = lift.reduce()
        compatible = bool(height_check(reduced.A_phi, reduced.r)) and self.analyzer.analyze(reduced).ok
        self._record('reduction_compatibility', compatible, index, reduced)

        every = FUZZ_CONFIG['kernel_every']
        if self.d <= KERNEL_CONFIG['max_dimension'] and every and index % every == 0:
            self._check_engines(index, weights)

    def _check_lift(self, index: int, module: UTKisinModule) -> None:
        try:
            cert = self.pipeline.run(module)
            self._record('lift_certificate', verify_certificate(cert, module), index, module)
        except NotGeneric as e:
            self.not_generic += 1
            i, j = e.witness
            chars = chars_of_module(module)
            self._record('genericity_witness', (chars[i - 1] / chars[j - 1]).is_cyclotomic()
                         and not genericity_check(chars), index, module)
        except ToolkitError as e:
            self.logger.error(f"item {index}: lift pipeline raised {e}")
            self._record('lift_certificate', False, index, module)

    def _check_engines(self, index: int, weights: tuple) -> None:
        template = diagonal_template(self.params, weights)
        tropical = tropical_forced_zeros(weights, p=self.params.p)
        kernel = kernel_oracle(template, model=self.model)
        C = closed_set_from_weights(weights)
        complement = {(i, j) for i in range(1, self.d + 1) for j in range(i + 1, self.d + 1)
                      if (i, j) not in C}
        agree = tropical.forced_zero_positions == kernel.forced_zero_positions == complement
        self._record('engine_agreement', agree and bool(kernel.consistent), index, template)

    def run(self) -> dict:
        """
        Run every item and build the summary document

        Returns:
            dict: parameters, per-invariant tallies and failing item indices
        """
        self.logger.info(f"Fuzzing {self.count} items: p={self.params.p} f={self.params.f} "
                         f"d={self.d} seed={self.seed}")
        for index in range(self.count):
            self.run_item(index)
        summary = self.summary()
        self.logger.info(f"Fuzzing finished with {len(self.failures)} failures")
        return summary

    def summary(self) -> dict:
        return {
            'p': self.params.p,
            'f': self.params.f,
            'd': self.d,
            'count': self.count,
            'seed': self.seed,
            'epsilon_model': self.model.name,
            'tallies': {name: dict(counts) for name, counts in sorted(self.tallies.items())},
            'not_generic': self.not_generic,
            'failures': [{'index': f['index'], 'invariant': f['invariant']} for f in self.failures],
        }

    def write_corpus(self, out_dir: Union[str, Path], summary: dict) -> Path:
        """summary.json, summary.csv and one replayable document per failure"""
        out_dir = Path(out_dir)
        exporter = ReportExporter(out_dir)
        exporter.emit_json(summary, out_dir / 'summary.json')
        exporter.export_to_csv(tally_frame(summary['tallies']), out_dir / 'summary.csv')
        for failure in self.failures:
            if failure['module'] is None:
                continue
            document = module_document(failure['module'])
            exporter.emit_json(document, out_dir / 'failures' / f"item_{failure['index']}.json")
        return out_dir
