"""Cost-weighted L2-regularized logistic regression.

The objective per binary subproblem is

    f(w, b) = 0.5 * ||w||^2 + sum_i cost_i * log(1 + exp(-y_i * (x_i . w + b)))

with labels y in {-1, +1}, a per-instance positive ``cost`` vector, and an
unregularized (but trainable) bias. Multiclass problems are handled
one-vs-rest with the per-instance cost tied to the instance's original
label, identical across all subproblems.

The solver is a truncated Newton method: conjugate-gradient inner solves on
Hessian-vector products with Armijo backtracking. It is deterministic, so
retraining on identical inputs reproduces identical parameters.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.special import expit
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import ConvergenceWarning
from sklearn.utils.validation import check_array, check_is_fitted

from ._parallel import thread_map

__all__ = [
    "BinaryModel",
    "logistic_objective",
    "logistic_gradient",
    "train_binary",
    "CostWeightedLogisticRegression",
]


@dataclass
class BinaryModel:
    """Parameters of one trained binary subproblem."""

    weights: np.ndarray
    bias: float
    converged: bool
    n_iter: int


def _margins(w: np.ndarray, bias: float, X, y: np.ndarray) -> np.ndarray:
    return y * (X @ w + bias)


def logistic_objective(w: np.ndarray, bias: float, X, y: np.ndarray, cost: np.ndarray) -> float:
    """Evaluate the cost-weighted logistic objective at ``(w, bias)``."""
    m = _margins(w, bias, X, y)
    return 0.5 * float(w @ w) + float(cost @ np.logaddexp(0.0, -m))


def logistic_gradient(
    w: np.ndarray, bias: float, X, y: np.ndarray, cost: np.ndarray
) -> tuple[np.ndarray, float]:
    """Analytic gradient of :func:`logistic_objective` in ``w`` and ``bias``."""
    m = _margins(w, bias, X, y)
    t = cost * y * expit(-m)
    return w - X.T @ t, -float(t.sum())


def _cg_direction(
    X, D: np.ndarray, g_w: np.ndarray, g_b: float, fit_intercept: bool, max_cg: int
) -> tuple[np.ndarray, float]:
    """Approximately solve ``H s = -g`` by conjugate gradients.

    ``H v = v_w + X^T (D (X v_w + v_b))`` on the weight block with the
    matching bias row; D holds the per-instance curvature. Starting from
    zero, every CG iterate is a descent direction for the Newton step.
    """
    s_w = np.zeros_like(g_w)
    s_b = 0.0
    r_w = -g_w
    r_b = -g_b if fit_intercept else 0.0
    p_w = r_w.copy()
    p_b = r_b
    rs = float(r_w @ r_w) + r_b * r_b
    # Eisenstat-Walker forcing: looser solves far from the optimum.
    gnorm = np.sqrt(rs)
    eta = min(0.5, np.sqrt(gnorm))
    stop_sq = (eta * gnorm) ** 2
    for _ in range(max_cg):
        if rs <= stop_sq:
            break
        u = X @ p_w
        if fit_intercept:
            u = u + p_b
        Du = D * u
        hp_w = p_w + X.T @ Du
        hp_b = float(Du.sum()) if fit_intercept else 0.0
        pHp = float(p_w @ hp_w) + p_b * hp_b
        if pHp <= 0.0:
            # Curvature lost to rounding; keep the progress made so far.
            break
        alpha = rs / pHp
        s_w += alpha * p_w
        s_b += alpha * p_b
        r_w -= alpha * hp_w
        r_b -= alpha * hp_b
        rs_new = float(r_w @ r_w) + r_b * r_b
        beta = rs_new / rs
        p_w = r_w + beta * p_w
        p_b = r_b + beta * p_b
        rs = rs_new
    return s_w, s_b


def train_binary(
    X,
    y: np.ndarray,
    cost: np.ndarray,
    *,
    fit_intercept: bool = True,
    tol: float = 1e-6,
    max_iter: int = 10000,
) -> BinaryModel:
    """Minimize the cost-weighted logistic objective for one binary problem.

    ``y`` must contain both -1 and +1; ``cost`` must be positive. Converges
    when the gradient's Euclidean norm drops to ``tol``; if ``max_iter``
    Newton iterations do not get there, the best iterate is returned with a
    ``ConvergenceWarning``.
    """
    if sp.issparse(X):
        X = X.tocsr()
    else:
        X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    cost = np.asarray(cost, dtype=np.float64)
    n, d = X.shape
    if y.shape != (n,) or cost.shape != (n,):
        raise ValueError("X, y, and cost must agree on the number of instances")
    present = set(np.unique(y))
    if not present <= {-1.0, 1.0}:
        raise ValueError(f"labels must be -1 or +1, got {sorted(present)}")
    if present != {-1.0, 1.0}:
        raise ValueError("both classes must be present")
    if not np.all(cost > 0):
        raise ValueError("instance costs must be positive")
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if max_iter < 1:
        raise ValueError(f"max_iter must be at least 1, got {max_iter}")

    w = np.zeros(d)
    b = 0.0
    f = logistic_objective(w, b, X, y, cost)
    max_cg = max(20, min(d + 1, 1000))
    n_iter = 0
    gnorm = np.inf
    for n_iter in range(1, max_iter + 1):
        g_w, g_b = logistic_gradient(w, b, X, y, cost)
        if not fit_intercept:
            g_b = 0.0
        gnorm = float(np.sqrt(g_w @ g_w + g_b * g_b))
        if gnorm <= tol:
            return BinaryModel(weights=w, bias=b, converged=True, n_iter=n_iter - 1)
        m = _margins(w, b, X, y)
        D = cost * expit(m) * expit(-m)
        s_w, s_b = _cg_direction(X, D, g_w, g_b, fit_intercept, max_cg)
        g_dot_s = float(g_w @ s_w) + g_b * s_b
        step = 1.0
        accepted = False
        for _ in range(60):
            w_new = w + step * s_w
            b_new = b + step * s_b
            f_new = logistic_objective(w_new, b_new, X, y, cost)
            if f_new <= f + 1e-4 * step * g_dot_s:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            # No further float-representable progress along the Newton
            # direction; the current iterate is the best available.
            break
        w, b, f = w_new, b_new, f_new
    warnings.warn(
        f"solver did not converge in {n_iter} iterations "
        f"(gradient norm {gnorm:.3e} > tol {tol:g}); returning best iterate",
        ConvergenceWarning,
    )
    return BinaryModel(weights=w, bias=b, converged=False, n_iter=n_iter)


class CostWeightedLogisticRegression(ClassifierMixin, BaseEstimator):
    """L2-regularized logistic regression with class-conditional instance costs.

    Parameters
    ----------
    C : float
        Base misclassification cost applied to every instance.
    class_weight : dict, optional
        Per-class multipliers on ``C``. An instance's cost is
        ``C * class_weight[its original label]`` in every one-vs-rest
        subproblem, whichever side it lands on.
    classes : sequence, optional
        Explicit class order; defaults to the sorted distinct labels. The
        order fixes decision columns and argmax tie-breaking.
    positive_class : optional
        For binary problems, which class the single model scores positively;
        defaults to the last class in order. Invalid for multiclass.
    fit_intercept : bool
        Train an unregularized bias term (on by default).
    tol : float
        Gradient-norm convergence threshold.
    max_iter : int
        Newton iteration cap; hitting it warns and keeps the best iterate.
    n_jobs : int, optional
        Threads for one-vs-rest subproblems. Results do not depend on it.

    Attributes
    ----------
    classes_ : ndarray
        Class labels in declared order.
    coef_ : ndarray of shape (1, n_features) or (n_classes, n_features)
    intercept_ : ndarray
    positive_class_ : label, only set for binary problems.
    converged_ : ndarray of bool, per trained subproblem.
    n_iter_ : ndarray of int, per trained subproblem.
    """

    def __init__(
        self,
        C: float = 1.0,
        class_weight: Mapping[str, float] | None = None,
        classes: Sequence | None = None,
        positive_class=None,
        fit_intercept: bool = True,
        tol: float = 1e-6,
        max_iter: int = 10000,
        n_jobs: int | None = None,
    ):
        self.C = C
        self.class_weight = class_weight
        self.classes = classes
        self.positive_class = positive_class
        self.fit_intercept = fit_intercept
        self.tol = tol
        self.max_iter = max_iter
        self.n_jobs = n_jobs

    def _resolve_classes(self, y: list) -> list:
        observed = sorted(set(y))
        if self.classes is None:
            classes = observed
        else:
            classes = list(self.classes)
            if len(set(classes)) != len(classes):
                raise ValueError(f"duplicate entries in classes {classes!r}")
            stray = set(observed) - set(classes)
            if stray:
                raise ValueError(f"labels {sorted(stray)} missing from declared classes")
        absent = [c for c in classes if c not in set(observed)]
        if absent:
            raise ValueError(f"declared classes {absent} have no training instances")
        if len(classes) < 2:
            raise ValueError("training data must contain at least 2 classes")
        return classes

    def fit(self, X, y) -> "CostWeightedLogisticRegression":
        """Train one binary model or one one-vs-rest model per class."""
        X = check_array(X, accept_sparse="csr", dtype=np.float64)
        y = list(y)
        if X.shape[0] != len(y):
            raise ValueError(f"X has {X.shape[0]} rows but y has {len(y)} labels")
        if self.C <= 0:
            raise ValueError(f"C must be positive, got {self.C}")
        classes = self._resolve_classes(y)
        weight_map = dict(self.class_weight) if self.class_weight else {}
        unknown = set(weight_map) - set(classes)
        if unknown:
            raise ValueError(f"class_weight names unknown classes {sorted(unknown)}")
        bad = {c: v for c, v in weight_map.items() if not v > 0}
        if bad:
            raise ValueError(f"class weights must be positive, got {bad}")
        cost = self.C * np.array([weight_map.get(lab, 1.0) for lab in y], dtype=np.float64)

        self.classes_ = np.asarray(classes)
        if len(classes) == 2:
            positive = self.positive_class if self.positive_class is not None else classes[-1]
            if positive not in classes:
                raise ValueError(f"positive_class {positive!r} is not one of {classes}")
            yy = np.where(np.asarray([lab == positive for lab in y]), 1.0, -1.0)
            models = [self._train_one(X, yy, cost)]
            self.positive_class_ = positive
        else:
            if self.positive_class is not None:
                raise ValueError("positive_class applies only to binary problems")
            targets = [
                np.where(np.asarray([lab == c for lab in y]), 1.0, -1.0) for c in classes
            ]
            models = thread_map(
                lambda yy: self._train_one(X, yy, cost), targets, self.n_jobs
            )
        self.coef_ = np.vstack([m.weights for m in models])
        self.intercept_ = np.array([m.bias for m in models])
        self.converged_ = np.array([m.converged for m in models])
        self.n_iter_ = np.array([m.n_iter for m in models])
        return self

    def _train_one(self, X, yy: np.ndarray, cost: np.ndarray) -> BinaryModel:
        return train_binary(
            X,
            yy,
            cost,
            fit_intercept=self.fit_intercept,
            tol=self.tol,
            max_iter=self.max_iter,
        )

    def decision_function(self, X) -> np.ndarray:
        """Raw decision values, one column per class in ``classes_`` order.

        Binary models expose both columns: the positive class's score and its
        negation (unlike scikit-learn's single-column binary convention).
        """
        check_is_fitted(self, "coef_")
        X = check_array(X, accept_sparse="csr", dtype=np.float64)
        if X.shape[1] != self.coef_.shape[1]:
            raise ValueError(
                f"X has {X.shape[1]} features, model expects {self.coef_.shape[1]}"
            )
        raw = X @ self.coef_.T + self.intercept_
        if len(self.classes_) == 2:
            pos_idx = int(np.flatnonzero(self.classes_ == self.positive_class_)[0])
            scores = np.empty((raw.shape[0], 2))
            scores[:, pos_idx] = raw[:, 0]
            scores[:, 1 - pos_idx] = -raw[:, 0]
            return scores
        return raw

    def predict(self, X) -> np.ndarray:
        """Predict the argmax class; exact ties go to the earliest class in order."""
        scores = self.decision_function(X)
        return self.classes_[np.argmax(scores, axis=1)]
