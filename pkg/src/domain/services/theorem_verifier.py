"""
Theorem Verifier Service
Numerical checks of the error-ambiguity decompositions of the point-wise,
pair-wise and list-wise ensemble losses on concrete instances.

Pair-wise and list-wise checks use the exact Lagrange interpolation point
of each Taylor expansion (found by a one-dimensional search over theta),
not the theta -> 0 shortcut used during training.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Tuple

import numpy as np
from scipy.optimize import brentq
from scipy.special import expit

from ..entities.session import GroundTruth
from ..exceptions import IntelValidationError, PreconditionViolatedError
from ..value_objects.scores import ScoreMatrix, WeightMatrix, ensemble_scores
from .ranking_losses import sample_bpr_pairs

logger = logging.getLogger(__name__)

IDENTITY_TOLERANCE = 1e-9
INEQUALITY_TOLERANCE = 1e-7
THETA_GRID = np.linspace(0.0, 1.0, 33)
DEFAULT_NUM_LEVELS = 4


@dataclass(frozen=True, eq=False)
class VerifierInstance:
    """One randomized decomposition instance with its recorded weight spread"""
    scores: ScoreMatrix
    weights: WeightMatrix
    ground_truth: GroundTruth
    seed: int
    delta: float

    def __post_init__(self):
        if self.scores.values.shape != self.weights.values.shape:
            raise IntelValidationError("Scores and weights of an instance must share their shape")
        if self.ground_truth.num_items != self.scores.num_items:
            raise IntelValidationError("Ground truth length differs from the number of items")

    @property
    def num_models(self) -> int:
        return self.scores.num_models

    @property
    def num_items(self) -> int:
        return self.scores.num_items

    def to_dict(self) -> Dict:
        return {
            "seed": self.seed,
            "delta": self.delta,
            "scores": self.scores.values.tolist(),
            "weights": self.weights.values.tolist(),
            "levels": self.ground_truth.levels.tolist(),
            "pi_order": self.ground_truth.pi_order.tolist(),
        }


@dataclass(frozen=True)
class VerificationResult:
    """Both sides of one decomposition. holds <=> slack >= -tolerance"""
    lhs: float
    rhs: float
    slack: float
    holds: bool
    weighted_basic_loss: float
    correction: float
    weighted_ambiguity: float
    tolerance: float
    details: Dict[str, float] = field(default_factory=dict)

    @property
    def components(self) -> Tuple[float, float, float]:
        return self.weighted_basic_loss, self.correction, self.weighted_ambiguity


def random_instance(
    seed: int,
    num_models: int,
    num_items: int,
    delta_cap: float,
    num_levels: int = DEFAULT_NUM_LEVELS
) -> VerifierInstance:
    """
    Scores ~ U[0, 1], weight rows ~ Dirichlet(1, ..., 1) shrunk toward the
    mean row until the spread is within delta_cap, levels ~ U{0..L-1}.
    """
    if num_models < 1 or num_items < 2:
        raise IntelValidationError(f"Need K >= 1 and N >= 2, got K={num_models}, N={num_items}")
    if not 0.0 <= delta_cap <= 1.0:
        raise IntelValidationError(f"delta_cap must lie in [0, 1], got {delta_cap}")

    rng = np.random.default_rng(seed)
    scores = rng.uniform(0.0, 1.0, size=(num_items, num_models))
    weights = rng.dirichlet(np.ones(num_models), size=num_items)
    levels = rng.integers(0, num_levels, size=num_items)

    mean_row = weights.mean(axis=0, keepdims=True)
    spread = WeightMatrix(weights).spread
    if spread > delta_cap:
        shrink = delta_cap / spread
        while True:
            shrunk = mean_row + shrink * (weights - mean_row)
            if shrink == 0.0 or WeightMatrix(shrunk).spread <= delta_cap:
                break
            shrink *= 1.0 - 1e-9
        weights = np.repeat(mean_row, num_items, axis=0) if shrink == 0.0 else shrunk

    weight_matrix = WeightMatrix(weights)
    item_ids = [f"item{n:04d}" for n in range(num_items)]
    return VerifierInstance(
        scores=ScoreMatrix(
            values=scores,
            mask=np.ones_like(scores, dtype=bool),
            model_ids=tuple(f"model{k}" for k in range(num_models)),
        ),
        weights=weight_matrix,
        ground_truth=GroundTruth.from_levels(levels, item_ids),
        seed=seed,
        delta=weight_matrix.spread,
    )


def _require_preconditions(instance: VerifierInstance, non_negative_scores: bool) -> None:
    if not instance.weights.on_simplex():
        raise PreconditionViolatedError("Weight rows must be non-negative and sum to 1")
    if non_negative_scores and np.any(instance.scores.values < 0):
        raise PreconditionViolatedError("The bound needs non-negative basic scores")


def verify_pointwise(instance: VerifierInstance) -> VerificationResult:
    """
    Exact per-item identity
    (S_ens - pi)^2 = sum_k w^k (S^k - pi)^2 - sum_k w^k (S^k - S_ens)^2
    evaluated in extended precision. slack is minus the largest residual.
    """
    _require_preconditions(instance, non_negative_scores=False)
    scores = instance.scores.values.astype(np.longdouble)
    weights = instance.weights.values.astype(np.longdouble)
    targets = instance.ground_truth.levels.astype(np.longdouble)[:, None]

    ensemble = (weights * scores).sum(axis=1, keepdims=True)
    ensemble_loss = ((ensemble - targets) ** 2)[:, 0]
    weighted_basic = (weights * (scores - targets) ** 2).sum(axis=1)
    weighted_ambiguity = (weights * (scores - ensemble) ** 2).sum(axis=1)
    residuals = np.abs(ensemble_loss - (weighted_basic - weighted_ambiguity))
    residual = float(residuals.max())

    n = instance.num_items
    return VerificationResult(
        lhs=float(ensemble_loss.sum() / n),
        rhs=float((weighted_basic - weighted_ambiguity).sum() / n),
        slack=-residual,
        holds=residual <= IDENTITY_TOLERANCE,
        weighted_basic_loss=float(weighted_basic.sum() / n),
        correction=0.0,
        weighted_ambiguity=float(weighted_ambiguity.sum() / n),
        tolerance=IDENTITY_TOLERANCE,
        details={"max_residual": residual},
    )


def _bpr_loss(z: np.ndarray) -> np.ndarray:
    """l(z) = -log sigmoid(z)"""
    return np.logaddexp(0.0, -z)


def _bpr_first(z):
    return expit(z) - 1.0


def _bpr_second(z):
    s = expit(z)
    return s * (1.0 - s)


def interpolation_theta(remainder: float, curvature_term: Callable[[float], float]) -> float:
    """
    theta in [0, 1] such that curvature_term(theta) equals the exact Taylor
    remainder. Falls back to the grid point with the smallest mismatch when
    rounding leaves no sign change.
    """
    grid = np.array([curvature_term(t) for t in THETA_GRID]) - remainder
    exact = np.flatnonzero(grid == 0.0)
    if exact.size:
        return float(THETA_GRID[exact[0]])
    changes = np.flatnonzero(np.sign(grid[:-1]) != np.sign(grid[1:]))
    if changes.size:
        left = changes[0]
        return float(brentq(
            lambda t: curvature_term(t) - remainder,
            THETA_GRID[left], THETA_GRID[left + 1],
            xtol=1e-15, rtol=1e-15,
        ))
    return float(THETA_GRID[int(np.argmin(np.abs(grid)))])


def _pairs_for(instance: VerifierInstance) -> List[Tuple[int, int]]:
    levels = instance.ground_truth.levels
    if np.any(levels >= 1):
        pairs = sample_bpr_pairs(instance.ground_truth, instance.seed)
        if not pairs.is_empty:
            return pairs.as_index_pairs()
    order = instance.ground_truth.pi_order
    return [(int(order[i]), int(order[i + 1])) for i in range(order.size - 1)]


def pairwise_exact_ambiguity(z_basic: float, z_ensemble: float) -> Tuple[float, float]:
    """(A, theta) with A = 1/2 * l''(z_ens + theta * dz) * dz^2 equal to the exact remainder"""
    dz = z_basic - z_ensemble
    if dz == 0.0:
        return 0.0, 0.0
    remainder = float(_bpr_loss(z_basic) - _bpr_loss(z_ensemble) - _bpr_first(z_ensemble) * dz)
    theta = interpolation_theta(remainder, lambda t: 0.5 * _bpr_second(z_ensemble + t * dz) * dz * dz)
    return float(0.5 * _bpr_second(z_ensemble + theta * dz) * dz * dz), theta


def verify_pairwise(instance: VerifierInstance) -> VerificationResult:
    """
    Per pair (n, m):
    l_b(z^ens) <= sum_k w_n^k l_b(z^k) + delta * sum_k S_m^k - sum_k w_n^k A_nm^k.
    Reports the tightest pair.
    """
    _require_preconditions(instance, non_negative_scores=True)
    scores = instance.scores.values
    weights = instance.weights.values
    ensemble = ensemble_scores(instance.weights, instance.scores).values

    tightest = None
    for n, m in _pairs_for(instance):
        z_basic = scores[n] - scores[m]
        z_ensemble = float(ensemble[n] - ensemble[m])
        ambiguity = np.array([pairwise_exact_ambiguity(float(z), z_ensemble)[0] for z in z_basic])

        lhs = float(_bpr_loss(z_ensemble))
        weighted_basic = float(np.dot(weights[n], _bpr_loss(z_basic)))
        correction = float(instance.delta * scores[m].sum())
        weighted_ambiguity = float(np.dot(weights[n], ambiguity))
        rhs = weighted_basic + correction - weighted_ambiguity
        if tightest is None or rhs - lhs < tightest[1] - tightest[0]:
            tightest = (lhs, rhs, weighted_basic, correction, weighted_ambiguity, n, m)

    lhs, rhs, weighted_basic, correction, weighted_ambiguity, n, m = tightest
    slack = rhs - lhs
    return VerificationResult(
        lhs=lhs,
        rhs=rhs,
        slack=slack,
        holds=slack >= -INEQUALITY_TOLERANCE,
        weighted_basic_loss=weighted_basic,
        correction=correction,
        weighted_ambiguity=weighted_ambiguity,
        tolerance=INEQUALITY_TOLERANCE,
        details={"positive_index": float(n), "negative_index": float(m)},
    )


def _pl_tail_term(z: np.ndarray) -> float:
    """g(z) = log(1 + sum_m exp(-z_m))"""
    return float(np.logaddexp.reduce(np.concatenate(([0.0], -z))))


def _pl_probabilities(z: np.ndarray) -> np.ndarray:
    exponents = np.concatenate(([0.0], -z))
    exponents = np.exp(exponents - exponents.max())
    return (exponents / exponents.sum())[1:]


def _pl_curvature(z: np.ndarray, dz: np.ndarray) -> float:
    """1/2 * dz^T H(z) dz with H = diag(p) - p p^T"""
    p = _pl_probabilities(z)
    return 0.5 * float(np.dot(p, dz * dz) - np.dot(p, dz) ** 2)


def listwise_exact_ambiguity(z_basic: np.ndarray, z_ensemble: np.ndarray) -> Tuple[float, float]:
    """(A, theta) for one position: exact second-order remainder of g around z^ens"""
    dz = z_basic - z_ensemble
    if dz.size == 0 or not np.any(dz):
        return 0.0, 0.0
    remainder = (
        _pl_tail_term(z_basic) - _pl_tail_term(z_ensemble)
        + float(np.dot(_pl_probabilities(z_ensemble), dz))
    )
    theta = interpolation_theta(remainder, lambda t: _pl_curvature(z_ensemble + t * dz, dz))
    return _pl_curvature(z_ensemble + theta * dz, dz), theta


def _pl_loss(ordered_scores: np.ndarray) -> float:
    return sum(
        _pl_tail_term(ordered_scores[n] - ordered_scores[n + 1:])
        for n in range(ordered_scores.size)
    )


def verify_listwise(instance: VerifierInstance) -> VerificationResult:
    """
    l_pl(S^ens) <= sum_k w_max^k l_pl(S^k) + delta * N * S_sum^max
                   - sum_n sum_k w_n^k A_n^k
    with S_sum^max = max_m sum_k S_m^k and positions taken along pi.
    """
    _require_preconditions(instance, non_negative_scores=True)
    order = instance.ground_truth.pi_order
    scores = instance.scores.values[order]
    weights = instance.weights.values[order]
    ensemble = (weights * scores).sum(axis=1)
    n_items, n_models = scores.shape

    total_ambiguity = 0.0
    for n in range(n_items):
        z_ensemble = ensemble[n] - ensemble[n + 1:]
        for k in range(n_models):
            z_basic = scores[n, k] - scores[n + 1:, k]
            ambiguity, _ = listwise_exact_ambiguity(z_basic, z_ensemble)
            total_ambiguity += weights[n, k] * ambiguity

    lhs = _pl_loss(ensemble)
    w_max = instance.weights.values.max(axis=0)
    weighted_basic = float(sum(w_max[k] * _pl_loss(scores[:, k]) for k in range(n_models)))
    correction = float(instance.delta * n_items * instance.scores.values.sum(axis=1).max())
    rhs = weighted_basic + correction - total_ambiguity
    slack = rhs - lhs
    return VerificationResult(
        lhs=lhs,
        rhs=rhs,
        slack=slack,
        holds=slack >= -INEQUALITY_TOLERANCE,
        weighted_basic_loss=weighted_basic,
        correction=correction,
        weighted_ambiguity=float(total_ambiguity),
        tolerance=INEQUALITY_TOLERANCE,
    )


def spread_annealing_sweep(
    seed: int,
    num_models: int,
    num_items: int,
    steps: int = 11,
    delta_cap: float = 0.3
) -> List[Tuple[float, float, float]]:
    """
    Shrink basic scores toward their per-item mean and weight rows toward
    the mean row by a factor lambda from 1 down to 0, returning
    (lambda, pair-wise slack, list-wise slack). At lambda = 0 all models
    agree and delta = 0, so both slacks vanish.
    """
    if steps < 2:
        raise IntelValidationError("A sweep needs at least two steps")
    base = random_instance(seed, num_models, num_items, delta_cap)
    scores = base.scores.values
    weights = base.weights.values
    score_mean = scores.mean(axis=1, keepdims=True)
    weight_mean = weights.mean(axis=0, keepdims=True)

    sweep = []
    for lam in np.linspace(1.0, 0.0, steps):
        shrunk_weights = WeightMatrix(weight_mean + lam * (weights - weight_mean))
        instance = VerifierInstance(
            scores=ScoreMatrix(
                values=score_mean + lam * (scores - score_mean),
                mask=base.scores.mask,
                model_ids=base.scores.model_ids,
            ),
            weights=shrunk_weights,
            ground_truth=base.ground_truth,
            seed=seed,
            delta=shrunk_weights.spread,
        )
        sweep.append((
            float(lam),
            verify_pairwise(instance).slack,
            verify_listwise(instance).slack,
        ))
    logger.debug(f"Spread annealing sweep (seed={seed}): {sweep}")
    return sweep
