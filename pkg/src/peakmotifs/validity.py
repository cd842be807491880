"""Cluster validity (MIA, CDI) and cross-algorithm consistency (corrected
Rand index)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cluster import FeatureMatrix, Partition


class ValidityError(Exception):
    pass


@dataclass
class PartitionSummary:
    algorithm: str
    cluster_sizes: list[int]  # ascending
    mia: float
    cdi: float | None  # None when centers coincide (undefined)


@dataclass
class ValidityReport:
    partitions: list[PartitionSummary]
    rand_names: list[str]
    rand_matrix: np.ndarray  # pairwise corrected Rand, unit diagonal
    mean_offdiagonal_rand: float

    def to_dict(self) -> dict:
        return {
            "partitions": [
                {
                    "algorithm": p.algorithm,
                    "cluster_sizes": p.cluster_sizes,
                    "mia": p.mia,
                    "cdi": p.cdi,
                }
                for p in self.partitions
            ],
            "corrected_rand": {
                "names": self.rand_names,
                "matrix": [[float(v) for v in row] for row in self.rand_matrix],
                "mean_offdiagonal": self.mean_offdiagonal_rand,
            },
        }


def record_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Attribute-count-normalized Euclidean distance:
    sqrt((1/H) sum_h (a_h - b_h)^2)."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    if a.shape != b.shape or a.ndim != 1 or len(a) < 1:
        raise ValidityError("record_distance needs two equal-width vectors")
    return float(np.sqrt(np.mean((a - b) ** 2)))


def within_set_distance(records: np.ndarray) -> float:
    """sqrt((1/2N) sum_n sum_p d^2(s_n, s_p)) over all ordered pairs."""
    records = np.atleast_2d(np.asarray(records, float))
    n = len(records)
    if n < 1:
        raise ValidityError("within_set_distance of an empty set is undefined")
    h = records.shape[1]
    diff2 = ((records[:, None, :] - records[None, :, :]) ** 2).sum(axis=2) / h
    return float(np.sqrt(diff2.sum() / (2 * n)))


def _clusters(partition: Partition, matrix: FeatureMatrix) -> list[np.ndarray]:
    order = {hid: i for i, hid in enumerate(matrix.household_ids)}
    rows = matrix.rows[[order[hid] for hid in partition.ids]]
    return [rows[partition.labels == lab] for lab in np.unique(partition.labels)]


def mia(partition: Partition, matrix: FeatureMatrix, raw: bool = False) -> float:
    """Mean index adequacy over the occupied clusters, with cluster centers
    as member means.

    The default normalizes each cluster's contribution by its size (RMS
    member-center distance per cluster); ``raw=True`` sums squared distances
    without the per-cluster normalization.
    """
    members = _clusters(partition, matrix)
    if any(len(m) == 0 for m in members):
        raise ValidityError("MIA is undefined with an empty cluster")
    terms = []
    for m in members:
        center = m.mean(axis=0)
        d2 = ((m - center) ** 2).mean(axis=1)  # squared record_distance
        terms.append(d2.sum() if raw else d2.mean())
    return float(np.sqrt(np.mean(terms)))


def cdi(partition: Partition, matrix: FeatureMatrix) -> float | None:
    """Cluster dispersion indicator: within-cluster dispersion over the
    dispersion of the center set. None (undefined) when all centers
    coincide."""
    members = _clusters(partition, matrix)
    if len(members) < 2:
        raise ValidityError("CDI needs at least 2 clusters")
    centers = np.array([m.mean(axis=0) for m in members])
    center_spread = within_set_distance(centers)
    if center_spread == 0.0:
        return None
    inner = np.mean([within_set_distance(m) ** 2 for m in members])
    return float(np.sqrt(inner) / center_spread)


def corrected_rand(p: Partition, q: Partition) -> float:
    """Hubert-Arabie adjusted Rand index from the contingency table."""
    if set(p.ids) != set(q.ids):
        raise ValidityError("partitions cover different household sets")
    n = len(p.ids)
    if n < 2:
        raise ValidityError("corrected Rand needs at least 2 items")
    q_by_id = q.assignments()
    pl = np.asarray(p.labels)
    ql = np.array([q_by_id[hid] for hid in p.ids])
    _, pi = np.unique(pl, return_inverse=True)
    _, qi = np.unique(ql, return_inverse=True)
    table = np.zeros((pi.max() + 1, qi.max() + 1), dtype=np.int64)
    np.add.at(table, (pi, qi), 1)

    def comb2(x):
        return x * (x - 1) / 2.0

    sum_ij = comb2(table).sum()
    sum_a = comb2(table.sum(axis=1)).sum()
    sum_b = comb2(table.sum(axis=0)).sum()
    expected = sum_a * sum_b / comb2(n)
    max_index = 0.5 * (sum_a + sum_b)
    if max_index == expected:  # both partitions trivial
        return 1.0
    return float((sum_ij - expected) / (max_index - expected))


def consistency_report(
    partitions: dict[str, Partition],
    matrix: FeatureMatrix,
    mia_raw: bool = False,
) -> ValidityReport:
    """MIA/CDI per partition plus the full pairwise corrected-Rand matrix;
    the consistency score is the mean of the off-diagonal upper triangle."""
    if not partitions:
        raise ValidityError("consistency report needs at least 1 partition")
    names = sorted(partitions)
    summaries = []
    for name in names:
        part = partitions[name]
        sizes = sorted(np.bincount(part.labels)[1:].tolist())
        sizes = [s for s in sizes if s > 0]
        summaries.append(
            PartitionSummary(
                algorithm=name,
                cluster_sizes=sizes,
                mia=mia(part, matrix, raw=mia_raw),
                cdi=cdi(part, matrix),
            )
        )
    m = len(names)
    rand = np.eye(m)
    for i in range(m):
        for j in range(i + 1, m):
            rand[i, j] = rand[j, i] = corrected_rand(partitions[names[i]], partitions[names[j]])
    off = rand[np.triu_indices(m, k=1)]
    mean_off = float(off.mean()) if len(off) else float("nan")
    return ValidityReport(summaries, names, rand, mean_off)
