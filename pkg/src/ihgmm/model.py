"""Individual-heterogeneous sub-Gaussian mixtures: generator and diagnostics.

Observation ``i`` is ``x_i = omega_i * theta[z_i] + eps_i``. Labels are
0-based integers in ``range(K)``.
"""
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .exceptions import DegenerateCenters, Infeasible, RankDeficient, ValidationError
from .linalg import qr_orthonormal_columns, thin_svd
from .rng import as_generator

NOISE_SCENARIOS = ("GHe", "SHe", "None")


@dataclass(frozen=True)
class NoiseSpec:
    """Heteroskedastic noise; each column gets ``sigma_i ~ Uniform(sigma_low, sigma_high)``.

    ``GHe`` draws Gaussian entries, ``SHe`` scaled Rademacher signs and
    ``None`` no noise at all.
    """

    scenario: str = "GHe"
    sigma_low: float = 0.5
    sigma_high: float = 1.5

    def __post_init__(self):
        if self.scenario not in NOISE_SCENARIOS:
            raise ValidationError(f"unknown noise scenario {self.scenario!r}")
        if not 0 <= self.sigma_low <= self.sigma_high:
            raise ValidationError("need 0 <= sigma_low <= sigma_high")

    @property
    def eta(self):
        """Upper bound on the sub-Gaussian norm of every noise entry."""
        return 0.0 if self.scenario == "None" else float(self.sigma_high)


@dataclass
class GroundTruth:
    """Everything the generator knows about a dataset."""

    labels: np.ndarray
    K: int
    centers: np.ndarray
    scales: np.ndarray
    noise_spec: NoiseSpec = field(default_factory=NoiseSpec)

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.intp)
        self.centers = np.asarray(self.centers, dtype=np.float64)
        self.scales = np.asarray(self.scales, dtype=np.float64)
        n = self.labels.shape[0]
        if self.centers.ndim != 2 or self.centers.shape[1] != self.K:
            raise ValidationError("centers must be a p x K matrix")
        if self.scales.shape != (n,):
            raise ValidationError("need one scale per observation")
        if np.any(self.scales <= 0) or not np.all(np.isfinite(self.scales)):
            raise ValidationError("scales must be positive and finite")
        if n and (self.labels.min() < 0 or self.labels.max() >= self.K):
            raise ValidationError("labels must lie in range(K)")

    @property
    def n(self):
        return self.labels.shape[0]

    @property
    def p(self):
        return self.centers.shape[0]

    @property
    def signal(self):
        """The mean matrix ``P``; column ``i`` is ``omega_i * theta[z_i]``."""
        return self.centers[:, self.labels] * self.scales

    def membership(self):
        Z = np.zeros((self.n, self.K))
        Z[np.arange(self.n), self.labels] = 1.0
        return Z

    def cluster_sizes(self):
        return np.bincount(self.labels, minlength=self.K)

    def to_dict(self):
        return {
            "n": int(self.n),
            "p": int(self.p),
            "K": int(self.K),
            "labels": self.labels.tolist(),
            "scales": self.scales.tolist(),
            "centers": self.centers.T.tolist(),
            "noise": asdict(self.noise_spec),
        }

    @classmethod
    def from_dict(cls, d):
        centers = np.asarray(d["centers"], dtype=np.float64).T
        truth = cls(
            labels=d["labels"],
            K=int(d["K"]),
            centers=centers,
            scales=d["scales"],
            noise_spec=NoiseSpec(**d.get("noise", {"scenario": "None"})),
        )
        if truth.n != d.get("n", truth.n) or truth.p != d.get("p", truth.p):
            raise ValidationError("declared n/p disagree with array shapes")
        return truth

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def make_centers(p, K, delta, rng):
    """Orthogonal centers with every pairwise distance equal to ``delta``."""
    if not p >= K >= 2:
        raise ValidationError(f"need p >= K >= 2, got p={p}, K={K}")
    if not delta > 0:
        raise ValidationError("delta must be positive")
    rng = as_generator(rng)
    for attempt in range(4):
        try:
            Q = qr_orthonormal_columns(rng.standard_normal((p, K)))
        except RankDeficient:
            if attempt == 3:
                raise
            continue
        return (delta / math.sqrt(2.0)) * Q


def cluster_sizes_for(n, K, beta):
    """Sizes with one cluster of ``max(1, floor(beta n / K))`` and the rest even.

    Cluster 0 is the small one; leftover points go to the lowest-index
    remaining clusters.
    """
    if K < 1 or n < K:
        raise Infeasible(f"cannot split n={n} observations into K={K} clusters")
    if not 0 < beta <= 1:
        raise ValidationError("beta must lie in (0, 1]")
    if K == 1:
        return np.array([n])
    # guard against beta*n/K landing a hair below an integer
    n_min = max(1, math.floor(beta * n / K + 1e-9))
    base, extra = divmod(n - n_min, K - 1)
    return np.array([n_min] + [base + 1] * extra + [base] * (K - 1 - extra))


def make_labels(n, K, beta, rng):
    sizes = cluster_sizes_for(n, K, beta)
    rng = as_generator(rng)
    return rng.permutation(np.repeat(np.arange(K), sizes)).astype(np.intp)


def make_scales(n, R, rng):
    """``n`` i.i.d. draws from Uniform(1, R)."""
    if not R >= 1:
        raise ValidationError("R must be >= 1")
    rng = as_generator(rng)
    return rng.uniform(1.0, R, size=n)


def sample_noise(p, n, spec, rng):
    if spec.scenario == "None":
        return np.zeros((p, n))
    rng = as_generator(rng)
    sigma = rng.uniform(spec.sigma_low, spec.sigma_high, size=n)
    if spec.scenario == "GHe":
        E = rng.standard_normal((p, n))
    else:
        E = 2.0 * rng.integers(0, 2, size=(p, n)) - 1.0
    E *= sigma
    return E


def generate_dataset(n, p, K, delta, R, beta, spec, rng):
    """Draw ``(X, truth)``; centers, labels, scales and noise come from ``rng`` in that order."""
    rng = as_generator(rng)
    centers = make_centers(p, K, delta, rng)
    labels = make_labels(n, K, beta, rng)
    scales = make_scales(n, R, rng)
    truth = GroundTruth(labels=labels, K=K, centers=centers, scales=scales, noise_spec=spec)
    X = truth.signal + sample_noise(p, n, spec, rng)
    return X, truth


def separation_delta(C, K, p, n):
    """``C * sqrt(K log d) * max(1, (p/n)^(1/4))`` with ``d = max(n, p)``, natural log."""
    d = max(n, p)
    if not C > 0:
        raise ValidationError("C must be positive")
    if d < 2:
        raise ValidationError("need max(n, p) >= 2")
    return C * math.sqrt(K * math.log(d)) * max(1.0, (p / n) ** 0.25)


@dataclass(frozen=True)
class Diagnostics:
    delta: float
    beta: float
    tau: float
    kappa: float
    mu0: float
    mu1: float
    mu2: float
    mu: float
    sigma_k_p: float
    sigma_1_p: float
    kappa_p: float
    d: int
    cluster_sizes: tuple
    omega_min: float
    omega_max: float
    degenerate: bool
    sigma_k_lower_bound: float
    kappa_p_upper_bound: float
    mu1_upper_bound: float
    condition_ratios: dict

    def lemma_checks(self, rtol=1e-9):
        """Which of the three structural bounds hold (``rtol`` absorbs rounding at equality)."""
        return {
            "sigma_k_p": self.sigma_k_p >= self.sigma_k_lower_bound * (1 - rtol),
            "kappa_p": self.kappa_p <= self.kappa_p_upper_bound * (1 + rtol),
            "mu1": self.mu1 <= self.mu1_upper_bound * (1 + rtol),
        }

    def to_dict(self):
        d = asdict(self)
        d["cluster_sizes"] = list(self.cluster_sizes)
        return d


def min_pairwise_distance(centers):
    centers = np.asarray(centers)
    K = centers.shape[1]
    best = math.inf
    for a in range(K):
        for b in range(a + 1, K):
            best = min(best, float(np.linalg.norm(centers[:, a] - centers[:, b])))
    return best


def compute_diagnostics(truth):
    """Model-side quantities governing recovery difficulty for ``truth``."""
    K, n, p = truth.K, truth.n, truth.p
    if K < 2:
        raise ValidationError("diagnostics need K >= 2")
    sizes = truth.cluster_sizes()
    if np.any(sizes == 0):
        raise ValidationError("every cluster must be nonempty")
    delta = min_pairwise_distance(truth.centers)
    if delta == 0:
        raise DegenerateCenters("two centers coincide")
    if p < K:
        raise DegenerateCenters("centers cannot have full column rank when p < K")
    s_theta = thin_svd(truth.centers, K).singulars
    if s_theta[-1] <= 1e-12 * s_theta[0]:
        raise DegenerateCenters("centers do not have full column rank")
    kappa = float(s_theta[0] / s_theta[-1])

    P = truth.signal
    svd = thin_svd(P, K)
    s = svd.singulars
    mu0 = p * n * float(np.max(P * P)) / float(np.sum(P * P))
    mu1 = (n / K) * float(np.max(np.sum(svd.right**2, axis=1)))
    mu2 = (p / K) * float(np.max(np.sum(svd.left**2, axis=1)))
    degenerate = bool(np.any(np.abs(np.diff(s)) < 1e-8 * s[0])) if K > 1 else False

    n_min, n_max = int(sizes.min()), int(sizes.max())
    beta = n_min / (n / K)
    tau = n_max / n_min
    w_min, w_max = float(truth.scales.min()), float(truth.scales.max())
    d = max(n, p)
    mu = max(mu0, mu1, mu2)

    return Diagnostics(
        delta=delta,
        beta=beta,
        tau=tau,
        kappa=kappa,
        mu0=mu0,
        mu1=mu1,
        mu2=mu2,
        mu=mu,
        sigma_k_p=float(s[-1]),
        sigma_1_p=float(s[0]),
        kappa_p=float(s[0] / s[-1]),
        d=d,
        cluster_sizes=tuple(int(x) for x in sizes),
        omega_min=w_min,
        omega_max=w_max,
        degenerate=degenerate,
        sigma_k_lower_bound=(w_min * delta / (2 * kappa)) * math.sqrt(beta * n / K),
        kappa_p_upper_bound=kappa * (w_max / w_min) * math.sqrt(tau),
        mu1_upper_bound=w_max**2 / (w_min**2 * beta),
        condition_ratios=_condition_ratios(
            n, p, K, d, delta, beta, tau, kappa, mu, w_min, w_max, n_max, truth.noise_spec.eta
        ),
    )


def _condition_ratios(n, p, K, d, delta, beta, tau, kappa, mu, w_min, w_max, n_max, eta):
    """Left side over right side of each sufficient condition, constants dropped.

    Values well above 1 indicate the condition is comfortably met; the
    absolute constants of the recovery theorem are unknown, so no verdict
    is attached.
    """
    L = math.log(d)
    r = w_max / w_min
    out = {
        "corollary_np": n * p / (K**2 * L**4),
        "corollary_p": p / (K * L**2),
        "corollary_n": n / K,
        "corollary_delta": delta / (math.sqrt(K * L) * max(1.0, (p / n) ** 0.25)),
        "theorem_np": n * p / (mu**2 * tau**4 * kappa**8 * r**8 * K**2 * L**4),
        "theorem_p": p / (mu * tau**4 * kappa**8 * r**8 * K * L**2),
        "theorem_n": n
        / (
            tau ** (4 / 3) * kappa ** (8 / 3) * r ** (14 / 3) * mu ** (1 / 3)
            / beta ** (2 / 3) * K * n_max ** (1 / 3)
        ),
        "theorem_delta_1": None,
        "theorem_delta_2": None,
    }
    if eta > 0:
        rhs1 = (
            kappa**2 * eta * w_max**1.5 * tau**0.5 * mu**0.25
            / (w_min**2.5 * beta**0.5)
            * (K * p * n_max / n**2) ** 0.25
            * math.sqrt(K * L)
        )
        rhs2 = (
            kappa**4 * eta * w_max**4 * math.sqrt(tau**3 * mu)
            / (w_min**5 * beta**0.5)
            * K
            * math.sqrt(n_max * L / n)
        )
        out["theorem_delta_1"] = delta / rhs1
        out["theorem_delta_2"] = delta / rhs2
    return out
