"""
Verify Theorems Use Case
Checks the point-wise identity and the pair-wise and list-wise upper bounds
of the ensemble loss on seeded random instances, dumping counterexamples
"""
import json
import logging
from pathlib import Path
from typing import Callable, Dict, List

import numpy as np

from ..dto.reports import TheoremReport, TheoremSummary
from ..dto.requests import VerifyTheoremsRequest
from ...domain.services.theorem_verifier import (
    VerificationResult, VerifierInstance, random_instance, spread_annealing_sweep,
    verify_listwise, verify_pairwise, verify_pointwise
)

logger = logging.getLogger(__name__)

REPORT_NAME = "report.json"
COUNTEREXAMPLE_DIR = "counterexamples"


class VerifyTheoremsUseCase:
    """Randomized verification of the three loss decompositions"""

    def execute(self, request: VerifyTheoremsRequest) -> TheoremReport:
        output_dir = Path(request.output_dir)
        output_dir.mkdir(parents=True, exist_ok=True)
        rng = np.random.default_rng(request.seed)

        checks: Dict[str, tuple] = {
            "pointwise": (verify_pointwise, request.max_items),
            "pairwise": (verify_pairwise, request.max_items),
            "listwise": (verify_listwise, request.max_items_listwise),
        }
        theorems = {}
        for name, (verify, max_items) in checks.items():
            # one instance seed per trial, drawn from the master stream
            seeds = rng.integers(0, 2**31 - 1, size=request.trials)
            theorems[name] = self._run(name, verify, seeds, max_items, request, rng, output_dir)

        sweep = spread_annealing_sweep(
            request.seed, max(request.model_counts), min(10, request.max_items_listwise), request.sweep_steps,
            request.delta_cap,
        )
        report = TheoremReport(
            seed=request.seed,
            trials=request.trials,
            delta_cap=request.delta_cap,
            theorems=theorems,
            spread_sweep=[list(step) for step in sweep],
        )
        report_path = output_dir / REPORT_NAME
        with open(report_path, "w", encoding="utf-8", newline="\n") as f:
            json.dump(report.model_dump(mode="json", exclude={"report_path"}), f, indent=2, sort_keys=True)
            f.write("\n")
        report.report_path = report_path

        for summary in theorems.values():
            log = logger.info if summary.holds else logger.warning
            log(
                f"{summary.name}: {summary.trials - summary.failures}/{summary.trials} hold, "
                f"worst slack {summary.worst_slack:.3e}"
            )
        return report

    def _run(
        self,
        name: str,
        verify: Callable[[VerifierInstance], VerificationResult],
        seeds: np.ndarray,
        max_items: int,
        request: VerifyTheoremsRequest,
        rng: np.random.Generator,
        output_dir: Path
    ) -> TheoremSummary:
        failures = 0
        worst = np.inf
        tolerance = 0.0
        dumps: List[str] = []
        for trial, seed in enumerate(seeds):
            num_models = int(rng.choice(request.model_counts))
            num_items = int(rng.integers(2, max_items + 1))
            instance = random_instance(int(seed), num_models, num_items, request.delta_cap)
            result = verify(instance)
            worst = min(worst, result.slack)
            tolerance = result.tolerance
            if not result.holds:
                failures += 1
                dumps.append(str(self._dump(output_dir, name, trial, instance, result)))
        return TheoremSummary(
            name=name,
            trials=len(seeds),
            failures=failures,
            worst_slack=float(worst),
            tolerance=tolerance,
            counterexamples=dumps,
        )

    @staticmethod
    def _dump(
        output_dir: Path,
        name: str,
        trial: int,
        instance: VerifierInstance,
        result: VerificationResult
    ) -> Path:
        path = output_dir / COUNTEREXAMPLE_DIR / f"{name}_{trial:05d}.json"
        path.parent.mkdir(parents=True, exist_ok=True)
        payload = {
            "instance": instance.to_dict(),
            "lhs": result.lhs,
            "rhs": result.rhs,
            "slack": result.slack,
            "components": list(result.components),
            "details": result.details,
        }
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            json.dump(payload, f, indent=2)
        logger.warning(f"Counterexample for {name} at trial {trial} written to {path}")
        return path
