"""Scene-matching Jaccard Index, QA exact-match accuracy, and QA baselines.

Matching is greedy first-fit: predictions in sequence order scan unmatched
ground-truth objects in list order; a pair matches when the criterion
attributes are equal, the spatial distance is strictly below tau, and any
pose/dimension constraint holds. J = tp / (tp + fp + fn), defined as 1.0
when both scenes are empty.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .errors import EmptyInputError, LengthMismatchError, StyleMismatchError
from .scene import AnswerType, DatasetStyle, QAItem, Scene, SceneObject

DEFAULT_TAUS = (0.05, 0.10, 0.15, 0.20, 0.25)
ARKITSCENES_TAUS = (1.25, 1.50, 1.75, 2.00, 2.25)


@dataclass(frozen=True)
class MatchCriteria:
    attributes: tuple[str, ...]
    distance_field: str = "location"
    pose_tolerance: float | None = None
    dims_mae_max: float | None = None


CLEVR_CRITERIA = MatchCriteria(("shape", "size", "color", "material"))
OBJAWORLD_CRITERIA = MatchCriteria(("shape",), pose_tolerance=0.15)
OBJAWORLD_SHAPES_CRITERIA = MatchCriteria(("shape_codes",), pose_tolerance=0.15)
OBJECTRON_CRITERIA = MatchCriteria(("category",), "center_cam", dims_mae_max=0.05)
ARKITSCENES_CRITERIA = MatchCriteria(("category",), "center_cam", dims_mae_max=1.00)

_PRESETS = {
    DatasetStyle.CLEVR: (CLEVR_CRITERIA, DEFAULT_TAUS),
    DatasetStyle.OBJAWORLD: (OBJAWORLD_CRITERIA, DEFAULT_TAUS),
    DatasetStyle.OBJAWORLD_SHAPES: (OBJAWORLD_SHAPES_CRITERIA, DEFAULT_TAUS),
    DatasetStyle.OBJECTRON: (OBJECTRON_CRITERIA, DEFAULT_TAUS),
    DatasetStyle.ARKITSCENES: (ARKITSCENES_CRITERIA, ARKITSCENES_TAUS),
}


def criteria_for(style: DatasetStyle) -> MatchCriteria:
    return _PRESETS[DatasetStyle(style)][0]


def taus_for(style: DatasetStyle) -> tuple[float, ...]:
    return _PRESETS[DatasetStyle(style)][1]


def _wrapped_angle_diff(a: float, b: float) -> float:
    """Absolute angular difference with wrap-around at +/- pi."""
    d = abs(a - b) % (2.0 * math.pi)
    return min(d, 2.0 * math.pi - d)


def _pair_matches(pred: SceneObject, gt: SceneObject,
                  crit: MatchCriteria, tau: float) -> bool:
    for attr in crit.attributes:
        if getattr(pred, attr, None) != getattr(gt, attr, None):
            return False
    p_vec = getattr(pred, crit.distance_field, None)
    g_vec = getattr(gt, crit.distance_field, None)
    if p_vec is None or g_vec is None:
        return False
    if math.dist(p_vec, g_vec) >= tau:
        return False
    if crit.pose_tolerance is not None:
        if pred.pose is None or gt.pose is None:
            return False
        # azimuth is the final Euler component
        if _wrapped_angle_diff(pred.pose[2], gt.pose[2]) > crit.pose_tolerance:
            return False
    if crit.dims_mae_max is not None:
        if pred.dimensions is None or gt.dimensions is None:
            return False
        mae = sum(abs(p - g) for p, g in zip(pred.dimensions, gt.dimensions)) / 3.0
        if mae > crit.dims_mae_max:
            return False
    return True


def jaccard_scene(gt: Scene, pred: Scene, crit: MatchCriteria,
                  tau: float) -> tuple[int, int, int, float]:
    """Greedy first-fit matching of one scene pair; returns (tp, fp, fn, J)."""
    if gt.dataset_style != pred.dataset_style:
        raise StyleMismatchError(
            f"gt is {gt.dataset_style.value}, pred is {pred.dataset_style.value}"
        )
    if tau <= 0:
        raise ValueError("tau must be positive")
    matched = [False] * len(gt.objects)
    tp = fp = 0
    for pred_obj in pred.objects:
        found = False
        for j, gt_obj in enumerate(gt.objects):
            if matched[j]:
                continue
            if _pair_matches(pred_obj, gt_obj, crit, tau):
                matched[j] = True
                found = True
                tp += 1
                break
        if not found:
            fp += 1
    fn = matched.count(False)
    denom = tp + fp + fn
    j = 1.0 if denom == 0 else tp / denom
    return tp, fp, fn, j


@dataclass(frozen=True)
class EvalReport:
    per_tau: dict[float, float]
    mean_jaccard: float
    per_scene: dict[float, tuple[tuple[int, int, int], ...]]

    def to_json(self, indent: int | None = 2) -> str:
        doc = {
            "per_tau": {f"{tau:g}": value for tau, value in self.per_tau.items()},
            "mean_jaccard": self.mean_jaccard,
            "per_scene": {
                f"{tau:g}": [list(counts) for counts in rows]
                for tau, rows in self.per_scene.items()
            },
        }
        return json.dumps(doc, indent=indent)


def jaccard_dataset(gts, preds, crit: MatchCriteria, taus, jobs: int = 1) -> EvalReport:
    """Mean Jaccard per tau over scene pairs, then mean over the tau set.

    ``jobs`` > 1 evaluates scene pairs in parallel; results are identical to
    the serial run (scene order is preserved).
    """
    gts, preds = list(gts), list(preds)
    if len(gts) != len(preds):
        raise LengthMismatchError(f"{len(gts)} ground-truth vs {len(preds)} predicted scenes")
    if not gts:
        raise EmptyInputError("need at least one scene pair")
    taus = [float(t) for t in taus]
    if not taus:
        raise EmptyInputError("need at least one tau")
    per_tau: dict[float, float] = {}
    per_scene: dict[float, tuple] = {}
    if jobs > 1:
        from multiprocessing import Pool

        work = [(g, p, crit, tau) for tau in taus for g, p in zip(gts, preds)]
        with Pool(jobs) as pool:
            flat = pool.starmap(jaccard_scene, work)
        chunks = [flat[i * len(gts):(i + 1) * len(gts)] for i in range(len(taus))]
    else:
        chunks = [[jaccard_scene(g, p, crit, tau) for g, p in zip(gts, preds)]
                  for tau in taus]
    for tau, rows in zip(taus, chunks):
        per_scene[tau] = tuple((tp, fp, fn) for tp, fp, fn, _ in rows)
        per_tau[tau] = sum(r[3] for r in rows) / len(rows)
    mean = sum(per_tau.values()) / len(per_tau)
    return EvalReport(per_tau, mean, per_scene)


# ---- question answering -------------------------------------------------------


def _normalize(answer: str) -> str:
    return " ".join(answer.split())


def qa_accuracy(pred_answers, gt_answers) -> float:
    """Exact-match fraction after whitespace normalization (case-sensitive)."""
    pred_answers, gt_answers = list(pred_answers), list(gt_answers)
    if len(pred_answers) != len(gt_answers):
        raise LengthMismatchError(f"{len(pred_answers)} predictions vs {len(gt_answers)} answers")
    if not gt_answers:
        raise EmptyInputError("need at least one answer pair")
    hits = sum(_normalize(p) == _normalize(g) for p, g in zip(pred_answers, gt_answers))
    return hits / len(gt_answers)


def qa_baselines(train_items, test_items) -> tuple[float, float]:
    """(random_expected, frequency) baseline accuracies on the test set.

    The frequency baseline predicts the training-majority answer of each
    answer type. The random baseline is the analytic expected accuracy of
    guessing uniformly over the answers seen in training for that type:
    each test item contributes 1/|answer space| when its answer is in the
    space, 0 otherwise.
    """
    train_items, test_items = list(train_items), list(test_items)
    if not train_items or not test_items:
        raise EmptyInputError("both train and test QA sets must be non-empty")
    spaces: dict[AnswerType, dict[str, int]] = {}
    for item in train_items:
        counts = spaces.setdefault(item.answer_type, {})
        answer = _normalize(item.answer)
        counts[answer] = counts.get(answer, 0) + 1
    majority = {
        t: min(counts, key=lambda a: (-counts[a], a))  # tie -> lexicographic
        for t, counts in spaces.items()
    }
    random_total = 0.0
    frequency_hits = 0
    for item in test_items:
        answer = _normalize(item.answer)
        counts = spaces.get(item.answer_type)
        if counts:
            if answer in counts:
                random_total += 1.0 / len(counts)
            if answer == majority[item.answer_type]:
                frequency_hits += 1
    n = len(test_items)
    return random_total / n, frequency_hits / n
