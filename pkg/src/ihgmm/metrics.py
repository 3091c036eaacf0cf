"""Permutation-optimal misclassification and its aggregation over replicates."""
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .exceptions import EmptyInput, LengthMismatch, ValidationError


def linear_assignment(cost):
    """Minimum-cost bijection for a square cost matrix.

    Returns ``perm`` with row ``i`` assigned to column ``perm[i]``.
    """
    cost = np.asarray(cost, dtype=np.float64)
    if cost.ndim != 2 or cost.shape[0] != cost.shape[1] or cost.shape[0] < 1:
        raise ValidationError("cost must be a non-empty square matrix")
    if not np.all(np.isfinite(cost)):
        raise ValidationError("cost entries must be finite")
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty(cost.shape[0], dtype=np.intp)
    perm[rows] = cols
    return perm


@dataclass(frozen=True)
class EvalResult:
    loss: int
    rate: float
    exact: bool
    permutation: tuple
    confusion: tuple

    def to_dict(self):
        return {
            "loss": self.loss,
            "rate": self.rate,
            "exact": self.exact,
            "permutation": list(self.permutation),
            "confusion": [list(r) for r in self.confusion],
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            loss=int(d["loss"]),
            rate=float(d["rate"]),
            exact=bool(d["exact"]),
            permutation=tuple(d["permutation"]),
            confusion=tuple(tuple(r) for r in d["confusion"]),
        )


def confusion_matrix(z_hat, z, K):
    C = np.zeros((K, K), dtype=np.int64)
    np.add.at(C, (z_hat, z), 1)
    return C


def misclassification(z_hat, z, K=None):
    """Misclassified count under the best relabelling of ``z_hat``.

    ``confusion[a, b]`` counts points with estimate ``a`` and truth ``b``;
    ``permutation[a]`` is the true label matched to estimated label ``a``.
    Labels unused by either vector simply give zero rows or columns.
    """
    z_hat = np.asarray(z_hat, dtype=np.intp)
    z = np.asarray(z, dtype=np.intp)
    if z_hat.shape != z.shape or z.ndim != 1:
        raise LengthMismatch(f"label vectors differ: {z_hat.shape} vs {z.shape}")
    n = z.shape[0]
    if n == 0:
        raise EmptyInput("no labels to compare")
    if min(z_hat.min(), z.min()) < 0:
        raise ValidationError("labels must be non-negative")
    K = max(int(z_hat.max()), int(z.max())) + 1 if K is None else int(K)
    if max(z_hat.max(), z.max()) >= K:
        raise ValidationError("labels exceed K")
    C = confusion_matrix(z_hat, z, K)
    perm = linear_assignment(-C)
    matched = int(C[np.arange(K), perm].sum())
    loss = n - matched
    return EvalResult(
        loss=loss,
        rate=loss / n,
        exact=loss == 0,
        permutation=tuple(int(v) for v in perm),
        confusion=tuple(tuple(int(v) for v in row) for row in C),
    )


@dataclass(frozen=True)
class Summary:
    mean_rate: float
    exact_proportion: float
    count: int
    rate_se: float

    def to_dict(self):
        return {
            "mean_rate": self.mean_rate,
            "exact_proportion": self.exact_proportion,
            "count": self.count,
            "rate_se": self.rate_se,
        }


def aggregate(results):
    """Mean rate, exact-recovery proportion, count and standard error of the rate."""
    results = list(results)
    if not results:
        raise EmptyInput("nothing to aggregate")
    rates = np.array([r.rate for r in results], dtype=np.float64)
    m = len(results)
    se = float(rates.std(ddof=1) / math.sqrt(m)) if m > 1 else 0.0
    return Summary(
        mean_rate=float(rates.mean()),
        exact_proportion=sum(r.exact for r in results) / m,
        count=m,
        rate_se=se,
    )
