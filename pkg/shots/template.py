# shots/template.py
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence, Tuple, Union

import numpy as np

from .config import PipelineConfig
from .exceptions import (
    GridMismatch,
    LengthMismatch,
    NoSuccessfulShots,
    PhaseOutOfBounds,
    RankDeficient,
    SingleClass,
    TooFewSamples,
)
from .segmentation import PhaseWindow
from .types import (
    CHANNELS,
    FEATURE_NAMES,
    SUCCESS,
    GroundTruthTemplate,
    OutcomeModel,
    ShotRecord,
)

# smallest / largest singular value of the normal matrix below which we refuse to solve
RANK_TOL = 1e-10

MIN_TRAINING_SHOTS = 5


# -----------------------------
# Closed-form least squares
# -----------------------------

def solve_normal_equations(design: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Solve (XᵀX) b = Xᵀy, refusing near-singular systems."""
    design = np.asarray(design, dtype=float)
    y = np.asarray(y, dtype=float)
    normal = design.T @ design
    rhs = design.T @ y
    s = np.linalg.svd(normal, compute_uv=False)
    if s[0] == 0.0 or s[-1] <= RANK_TOL * s[0]:
        raise RankDeficient(
            f"normal matrix is singular (condition {s[0] / s[-1] if s[-1] else float('inf'):.3g})"
        )
    return np.linalg.solve(normal, rhs)


@dataclass(frozen=True)
class PolynomialFit:
    """
    Polynomial in the mapped variable u = (x - center) / half_span, with
    ``coefficients`` in ascending powers of u.
    """

    coefficients: Tuple[float, ...]
    center: float
    half_span: float

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def to_unit(self, x) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.center) / self.half_span

    def evaluate(self, x) -> np.ndarray:
        return np.polynomial.polynomial.polyval(self.to_unit(x), np.asarray(self.coefficients))

    def residual(self, xs, ys) -> float:
        """Sum of squared residuals."""
        return float(np.sum((np.asarray(ys, dtype=float) - self.evaluate(xs)) ** 2))


def fit_polynomial_least_squares(xs, ys, degree: int) -> PolynomialFit:
    """
    Least-squares polynomial of ``degree`` through (xs, ys).

    xs are mapped affinely onto [-1, 1] before building the Vandermonde
    system; the map is kept on the result.
    """
    xs = np.asarray(xs, dtype=float).ravel()
    ys = np.asarray(ys, dtype=float).ravel()
    if xs.shape != ys.shape:
        raise LengthMismatch(f"{xs.size} xs for {ys.size} ys")
    if degree < 0:
        raise ValueError("degree must be >= 0")
    if xs.size < degree + 1:
        raise RankDeficient(f"{xs.size} points cannot fix a degree {degree} polynomial")

    lo, hi = float(xs.min()), float(xs.max())
    if hi == lo:
        raise RankDeficient("all xs are identical")
    center, half_span = (lo + hi) / 2.0, (hi - lo) / 2.0

    u = (xs - center) / half_span
    vander = np.vander(u, degree + 1, increasing=True)
    coef = solve_normal_equations(vander, ys)
    return PolynomialFit(coefficients=tuple(coef.tolist()), center=center, half_span=half_span)


# -----------------------------
# Ground Truth template
# -----------------------------

def effective_degree(cfg: PipelineConfig, grid_len: int) -> int:
    """
    Degree the fit actually runs at. A local fit sees at most
    ``2 * fit_window + 1`` distinct slots, so anything higher is capped.
    """
    cap = grid_len - 1 if cfg.fit_window is None else min(grid_len - 1, 2 * cfg.fit_window)
    return min(cfg.fit_degree, cap)


def _fit_channel(values: np.ndarray, cfg: PipelineConfig) -> np.ndarray:
    """
    ``values`` is shots x N for one channel. Points are pooled per grid index
    in sorted order, so the fit does not depend on the order of the shots.
    """
    k, n = values.shape
    pooled = np.sort(values, axis=0).T  # n x k: row i holds every value at slot i
    grid = np.arange(n, dtype=float)

    if cfg.fit_window is None:
        xs = np.repeat(grid, k)
        fit = fit_polynomial_least_squares(xs, pooled.ravel(), effective_degree(cfg, n))
        return fit.evaluate(grid)

    curve = np.empty(n)
    w = cfg.fit_window
    for i in range(n):
        lo, hi = max(0, i - w), min(n - 1, i + w)
        xs = np.repeat(grid[lo:hi + 1], k)
        ys = pooled[lo:hi + 1].ravel()
        degree = min(effective_degree(cfg, n), hi - lo)
        curve[i] = fit_polynomial_least_squares(xs, ys, degree).evaluate(grid[i])
    return curve


def build_ground_truth(shots: Sequence[ShotRecord], cfg: PipelineConfig) -> GroundTruthTemplate:
    """
    Fit the optimal-shot template from the success-labelled, impact-aligned shots.

    With ``fit_window`` null one polynomial of ``fit_degree`` spans the whole
    grid. Otherwise every slot gets its own fit over the pooled points within
    ``fit_window`` slots, which is what lets the template follow a strike that
    lasts only a couple of samples. The template records the degree from
    ``effective_degree``: with the default window of 2 that is 4, and a
    degree-4 fit through five slots reproduces the per-slot means.
    """
    successes = [s for s in shots if s.label == SUCCESS]
    if not successes:
        raise NoSuccessfulShots("no shot is labelled success")

    grid_lens = {s.grid_len for s in successes}
    if len(grid_lens) != 1:
        raise GridMismatch(f"shots disagree on grid length: {sorted(grid_lens)}")
    impacts = {s.impact_index for s in successes}
    if None in impacts or len(impacts) != 1:
        raise GridMismatch("shots are not aligned on a common impact index")

    stacked = np.stack([s.as_array() for s in successes])  # shots x 6 x N
    channels = [_fit_channel(stacked[:, c, :], cfg) for c in range(len(CHANNELS))]

    return GroundTruthTemplate(
        grid_len=grid_lens.pop(),
        channels=tuple(tuple(c.tolist()) for c in channels),
        fit_degree=effective_degree(cfg, stacked.shape[2]),
        source_count=len(successes),
        impact_index=impacts.pop(),
        fit_window=cfg.fit_window,
    )


# -----------------------------
# Features
# -----------------------------

def template_window(template: GroundTruthTemplate, phase: PhaseWindow) -> PhaseWindow:
    """The phase window moved onto the template's impact slot."""
    window = phase.shifted(template.impact_index - phase.impact_index)
    if window.start_index < 0 or window.end_index >= template.grid_len:
        raise PhaseOutOfBounds(
            f"phase {window.start_index}..{window.end_index} overruns the template grid"
        )
    return window


def channel_deviation(shot: ShotRecord, template: GroundTruthTemplate, phase: PhaseWindow, name: str) -> np.ndarray:
    """Pointwise shot - template over the phase window."""
    if shot.grid_len != template.grid_len:
        raise GridMismatch(f"shot grid {shot.grid_len} != template grid {template.grid_len}")
    window = template_window(template, phase)
    return shot.channel(name)[phase.slice()] - template.channel(name)[window.slice()]


def _rmse(d: np.ndarray) -> float:
    return float(np.sqrt(np.mean(d ** 2)))


def extract_features(shot: ShotRecord, template: GroundTruthTemplate, phase: PhaseWindow) -> np.ndarray:
    """[rmse_acc_y, rmse_gyro_z, peak_dev_acc_y, peak_dev_gyro_z] over the phase window."""
    d_acc = channel_deviation(shot, template, phase, "acc_y")
    d_gyro = channel_deviation(shot, template, phase, "gyro_z")
    return np.array([
        _rmse(d_acc),
        _rmse(d_gyro),
        float(np.max(np.abs(d_acc))),
        float(np.max(np.abs(d_gyro))),
    ])


# -----------------------------
# Outcome model
# -----------------------------

def label_value(label: Union[str, float, int]) -> float:
    if label == SUCCESS:
        return 1.0
    if label in ("fail",):
        return 0.0
    value = float(label)
    if value not in (0.0, 1.0):
        raise ValueError(f"label must be 0/1 or success/fail, got {label!r}")
    return value


def train_outcome_model(features, labels) -> OutcomeModel:
    """
    Linear-probability model: ordinary least squares of the 0/1 outcome on
    the deviation features plus an intercept. Predictions are clamped later.
    """
    x = np.asarray(features, dtype=float)
    y = np.array([label_value(v) for v in labels], dtype=float)
    if x.ndim != 2 or x.shape[1] != len(FEATURE_NAMES):
        raise LengthMismatch(f"features must be K x {len(FEATURE_NAMES)}, got shape {x.shape}")
    if x.shape[0] != y.shape[0]:
        raise LengthMismatch(f"{x.shape[0]} feature rows for {y.shape[0]} labels")
    if x.shape[0] < MIN_TRAINING_SHOTS:
        raise TooFewSamples(f"need at least {MIN_TRAINING_SHOTS} shots, got {x.shape[0]}")
    if np.unique(y).size < 2:
        raise SingleClass("training labels contain a single outcome")

    design = np.hstack([np.ones((x.shape[0], 1)), x])
    coef = solve_normal_equations(design, y)
    return OutcomeModel(weights=tuple(coef[1:].tolist()), intercept=float(coef[0]))


# -----------------------------
# Persistence
# -----------------------------

def dump_json(data: Any) -> str:
    return json.dumps(data, indent=2) + "\n"


def write_template(template: GroundTruthTemplate, path: Union[str, Path]) -> None:
    Path(path).write_text(dump_json(template.to_dict()), encoding="utf-8")


def read_template(path: Union[str, Path]) -> GroundTruthTemplate:
    return GroundTruthTemplate.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def write_model(model: OutcomeModel, path: Union[str, Path]) -> None:
    Path(path).write_text(dump_json(model.to_dict()), encoding="utf-8")


def read_model(path: Union[str, Path]) -> OutcomeModel:
    return OutcomeModel.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

