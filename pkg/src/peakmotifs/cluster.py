"""Feature-matrix normalization and the five clustering algorithms compared
in the pipeline: k-means, fuzzy c-means, hexagonal SOM, Ward hierarchical,
and random-forest dissimilarity with PAM."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage
from sklearn.ensemble import RandomForestClassifier

log = logging.getLogger(__name__)

ALGORITHMS = ("kmeans", "fuzzy", "som", "hier", "rfpam")

DEFAULT_K = 8
DEFAULT_FUZZIFIER = 2.0
DEFAULT_RF_TREES = 500
MAX_ITER = 300
FCM_TOL = 1e-6

SOM_COLS, SOM_ROWS = 4, 2
SOM_EPOCHS = 500
SOM_LR_START, SOM_LR_END = 0.05, 0.01


class ClusterConfigError(Exception):
    pass


@dataclass
class FeatureMatrix:
    household_ids: list[str]
    rows: np.ndarray
    feature_names: list[str]
    normalized: bool = False

    @property
    def n(self) -> int:
        return len(self.household_ids)


@dataclass
class Partition:
    ids: list[str]
    labels: np.ndarray  # cluster label per household, 1..K
    k: int
    algorithm: str
    seed: int | None = None
    centers: np.ndarray | None = None
    memberships: np.ndarray | None = None
    params: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def assignments(self) -> dict[str, int]:
        return dict(zip(self.ids, (int(c) for c in self.labels)))


@dataclass
class DissimilarityMatrix:
    ids: list[str]
    d: np.ndarray


def minmax_normalize(matrix: FeatureMatrix) -> FeatureMatrix:
    """Rescale every column to [0, 1]; constant columns map to 0."""
    if matrix.n < 2:
        raise ClusterConfigError("need at least 2 rows to normalize")
    lo = matrix.rows.min(axis=0)
    hi = matrix.rows.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    rows = (matrix.rows - lo) / span
    rows[:, hi == lo] = 0.0
    return FeatureMatrix(matrix.household_ids, rows, matrix.feature_names, normalized=True)


def _wcss(X: np.ndarray, centers: np.ndarray, labels: np.ndarray) -> float:
    return float(np.sum((X - centers[labels]) ** 2))


def kmeans(matrix: FeatureMatrix, k: int = DEFAULT_K, seed: int = 0,
           init: str = "random") -> Partition:
    """Lloyd's algorithm from k distinct random rows (or k-means++ with
    ``init='kmeanspp'``); empty clusters are reseeded with the point farthest
    from its assigned center."""
    X = matrix.rows
    n = len(X)
    if n < k:
        raise ClusterConfigError(f"kmeans needs at least k={k} rows, got {n}")
    rng = np.random.default_rng(seed)
    if init == "kmeanspp":
        centers = _kmeanspp_init(X, k, rng)
    else:
        centers = X[rng.choice(n, size=k, replace=False)].copy()
    labels = np.zeros(n, dtype=int)
    wcss_history = []
    for _ in range(MAX_ITER):
        dist2 = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = dist2.argmin(axis=1)
        for c in range(k):
            if not (new_labels == c).any():
                farthest = int(np.argmax(dist2[np.arange(n), new_labels]))
                new_labels[farthest] = c
                centers[c] = X[farthest]
        wcss_history.append(_wcss(X, centers, new_labels))
        if (new_labels == labels).all() and len(wcss_history) > 1:
            break
        labels = new_labels
        for c in range(k):
            members = X[labels == c]
            if len(members):  # repair can re-empty a donor cluster
                centers[c] = members.mean(axis=0)
        wcss_history.append(_wcss(X, centers, labels))
    return Partition(
        ids=matrix.household_ids, labels=labels + 1, k=k, algorithm="kmeans",
        seed=seed, centers=centers, params={"init": init},
        diagnostics={"wcss_history": wcss_history},
    )


def _kmeanspp_init(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    centers = [X[rng.integers(len(X))]]
    for _ in range(1, k):
        d2 = np.min(((X[:, None, :] - np.array(centers)[None]) ** 2).sum(axis=2), axis=1)
        probs = d2 / d2.sum() if d2.sum() > 0 else np.full(len(X), 1 / len(X))
        centers.append(X[rng.choice(len(X), p=probs)])
    return np.array(centers)


def fuzzy_cmeans(matrix: FeatureMatrix, k: int = DEFAULT_K,
                 fuzzifier: float = DEFAULT_FUZZIFIER, seed: int = 0) -> Partition:
    """Alternating membership/center updates; hard assignment by maximum
    membership, ties to the lowest label. A point coinciding with a center
    gets full membership there."""
    X = matrix.rows
    n = len(X)
    if n < k:
        raise ClusterConfigError(f"fuzzy c-means needs at least k={k} rows, got {n}")
    if fuzzifier <= 1:
        raise ClusterConfigError("fuzzifier must be > 1")
    rng = np.random.default_rng(seed)
    centers = X[rng.choice(n, size=k, replace=False)].copy()
    u = _fcm_memberships(X, centers, fuzzifier)
    row_sum_errors = [float(np.abs(u.sum(axis=1) - 1.0).max())]
    for _ in range(MAX_ITER):
        w = u ** fuzzifier
        centers = (w.T @ X) / w.sum(axis=0)[:, None]
        u_new = _fcm_memberships(X, centers, fuzzifier)
        row_sum_errors.append(float(np.abs(u_new.sum(axis=1) - 1.0).max()))
        if np.abs(u_new - u).max() < FCM_TOL:
            u = u_new
            break
        u = u_new
    labels = u.argmax(axis=1)  # argmax takes the lowest index on ties
    return Partition(
        ids=matrix.household_ids, labels=labels + 1, k=k, algorithm="fuzzy",
        seed=seed, centers=centers, memberships=u,
        params={"fuzzifier": fuzzifier},
        diagnostics={"membership_row_sum_errors": row_sum_errors},
    )


def _fcm_memberships(X: np.ndarray, centers: np.ndarray, m: float) -> np.ndarray:
    d2 = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    u = np.zeros_like(d2)
    at_center = d2.min(axis=1) == 0.0
    if at_center.any():
        hit = d2[at_center].argmin(axis=1)
        u[np.flatnonzero(at_center), hit] = 1.0
    rest = ~at_center
    inv = d2[rest] ** (-1.0 / (m - 1.0))
    u[rest] = inv / inv.sum(axis=1, keepdims=True)
    return u


def _hex_positions(cols: int, rows: int) -> np.ndarray:
    pos = []
    for r in range(rows):
        for c in range(cols):
            pos.append((c + 0.5 * (r % 2), r * np.sqrt(3) / 2))
    return np.array(pos)


def _som_linear_init(X: np.ndarray, pos: np.ndarray) -> np.ndarray:
    """Kohonen linear initialization: spread the units across the plane of
    the first two principal components."""
    Xc = X - X.mean(axis=0)
    _, s, vt = np.linalg.svd(Xc, full_matrices=False)
    g = pos - pos.mean(axis=0)
    g = g / np.abs(g).max(axis=0)
    comps = vt[:2] * (s[:2] / np.sqrt(len(X)))[:, None]
    if comps.shape[0] < 2:
        comps = np.vstack([comps, np.zeros((2 - comps.shape[0], X.shape[1]))])
    return X.mean(axis=0) + g @ comps


def som(matrix: FeatureMatrix, k: int = DEFAULT_K, seed: int = 0,
        epochs: int = SOM_EPOCHS) -> Partition:
    """4x2 hexagonal self-organising map, one unit per cluster. Linear
    (principal-plane) initialization, then online training with linearly
    decaying learning rate and neighborhood radius; assignment to the
    best-matching unit by Euclidean distance."""
    if k != SOM_COLS * SOM_ROWS:
        raise ClusterConfigError(f"SOM layout is fixed at {SOM_COLS}x{SOM_ROWS} units (k=8)")
    X = matrix.rows
    n, h = X.shape
    if n < k:
        raise ClusterConfigError(f"SOM needs at least {k} rows, got {n}")
    rng = np.random.default_rng(seed)
    pos = _hex_positions(SOM_COLS, SOM_ROWS)
    grid_d2 = ((pos[:, None, :] - pos[None, :, :]) ** 2).sum(axis=2)
    map_radius = float(np.sqrt(grid_d2.max()) / 2)
    weights = _som_linear_init(X, pos)
    for epoch in range(epochs):
        frac = epoch / max(epochs - 1, 1)
        lr = SOM_LR_START + (SOM_LR_END - SOM_LR_START) * frac
        radius = map_radius + (1.0 - map_radius) * frac
        sigma = radius / 3.0  # radius acts as a 3-sigma cutoff
        neighborhood = np.exp(-grid_d2 / (2.0 * sigma ** 2))
        for i in rng.permutation(n):
            bmu = int(((weights - X[i]) ** 2).sum(axis=1).argmin())
            weights += lr * neighborhood[bmu][:, None] * (X[i] - weights)
    labels = ((X[:, None, :] - weights[None, :, :]) ** 2).sum(axis=2).argmin(axis=1)
    return Partition(
        ids=matrix.household_ids, labels=labels + 1, k=k, algorithm="som",
        seed=seed, centers=weights,
        params={"layout": f"{SOM_COLS}x{SOM_ROWS}-hex", "epochs": epochs},
    )


def hierarchical_ward(matrix: FeatureMatrix, k: int = DEFAULT_K) -> Partition:
    """Agglomerative clustering, Euclidean distance with Ward linkage, cut to
    exactly k clusters. Deterministic."""
    if matrix.n < k:
        raise ClusterConfigError(f"hierarchical needs at least k={k} rows, got {matrix.n}")
    Z = linkage(matrix.rows, method="ward")
    labels = fcluster(Z, t=k, criterion="maxclust")
    return Partition(
        ids=matrix.household_ids, labels=np.asarray(labels, dtype=int), k=k,
        algorithm="hier", diagnostics={"merge_heights": Z[:, 2].tolist()},
    )


def rf_dissimilarity(matrix: FeatureMatrix, trees: int = DEFAULT_RF_TREES,
                     seed: int = 0) -> DissimilarityMatrix:
    """Unsupervised random-forest dissimilarity: real rows vs a synthetic
    class built by permuting each column independently; proximity is the
    fraction of trees in which two real rows share a terminal node, and
    dissimilarity sqrt(1 - proximity)."""
    X = matrix.rows
    if len(X) < 10:
        raise ClusterConfigError("rf_dissimilarity needs at least 10 rows")
    rng = np.random.default_rng(seed)
    synthetic = np.column_stack([rng.permutation(col) for col in X.T])
    data = np.vstack([X, synthetic])
    target = np.concatenate([np.zeros(len(X)), np.ones(len(X))])
    forest = RandomForestClassifier(
        n_estimators=trees, max_features="sqrt", min_samples_leaf=1,
        bootstrap=True, criterion="gini",
        random_state=int(rng.integers(2 ** 31)), n_jobs=1,
    )
    forest.fit(data, target)
    leaves = forest.apply(X)  # n x trees terminal-node ids
    n = len(X)
    prox = np.zeros((n, n))
    for t in range(leaves.shape[1]):
        prox += leaves[:, t, None] == leaves[None, :, t]
    prox /= leaves.shape[1]
    d = np.sqrt(np.clip(1.0 - prox, 0.0, 1.0))
    np.fill_diagonal(d, 0.0)
    return DissimilarityMatrix(matrix.household_ids, d)


def pam(dissim: DissimilarityMatrix, k: int = DEFAULT_K, seed: int = 0) -> Partition:
    """Partitioning around medoids: greedy BUILD then best-improvement SWAP
    until a local optimum; the total dissimilarity to medoids is
    non-increasing across swaps."""
    d = dissim.d
    n = len(d)
    if n < k:
        raise ClusterConfigError(f"pam needs at least k={k} points, got {n}")
    # BUILD: start with the most central point, then greedily add the point
    # giving the largest cost reduction
    medoids = [int(d.sum(axis=1).argmin())]
    while len(medoids) < k:
        current = d[:, medoids].min(axis=1)
        gains = np.maximum(current[None, :] - d, 0.0).sum(axis=1)
        gains[medoids] = -np.inf
        medoids.append(int(gains.argmax()))
    cost = float(d[:, medoids].min(axis=1).sum())
    cost_history = [cost]
    improved = True
    while improved:
        improved = False
        best = (0.0, None, None)
        for mi, m in enumerate(medoids):
            others = [x for x in medoids if x != m]
            base = d[:, others].min(axis=1) if others else np.full(n, np.inf)
            for cand in range(n):
                if cand in medoids:
                    continue
                new_cost = float(np.minimum(base, d[:, cand]).sum())
                if cost - new_cost > best[0] + 1e-12:
                    best = (cost - new_cost, mi, cand)
        if best[1] is not None:
            medoids[best[1]] = best[2]
            cost -= best[0]
            cost_history.append(cost)
            improved = True
    labels = np.asarray(d[:, medoids].argmin(axis=1), dtype=int)
    return Partition(
        ids=dissim.ids, labels=labels + 1, k=k, algorithm="pam", seed=seed,
        params={"medoids": [int(m) for m in medoids]},
        diagnostics={"cost_history": cost_history},
    )


def run_suite(matrix: FeatureMatrix, k: int = DEFAULT_K, seed: int = 0,
              algorithms=ALGORITHMS, fuzzifier: float = DEFAULT_FUZZIFIER,
              rf_trees: int = DEFAULT_RF_TREES,
              kmeans_init: str = "random") -> dict[str, Partition]:
    """Run the requested algorithms with a shared seed; failures are logged
    and skipped so one bad configuration does not sink the suite."""
    if not matrix.normalized:
        raise ClusterConfigError("run_suite expects a min-max normalized matrix")
    results: dict[str, Partition] = {}
    for name in algorithms:
        try:
            if name == "kmeans":
                results[name] = kmeans(matrix, k, seed, init=kmeans_init)
            elif name == "fuzzy":
                results[name] = fuzzy_cmeans(matrix, k, fuzzifier, seed)
            elif name == "som":
                results[name] = som(matrix, k, seed)
            elif name == "hier":
                results[name] = hierarchical_ward(matrix, k)
            elif name == "rfpam":
                dissim = rf_dissimilarity(matrix, rf_trees, seed)
                part = pam(dissim, k, seed)
                part.algorithm = "rfpam"
                results[name] = part
            else:
                raise ClusterConfigError(f"unknown algorithm {name!r}")
        except ClusterConfigError as exc:
            log.error("algorithm %s failed: %s", name, exc)
    return results
