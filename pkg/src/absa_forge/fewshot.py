"""Few-shot subset selection: shortest shuffled prefix covering every stratum.

The dataset is shuffled once with a seeded Fisher-Yates pass, then the subset
is the shortest prefix in which every stratum value v (aspect category or
sentiment class) occurs at least min(k, total_v) times, an example counting
once toward each distinct value among its quads.  Because subsets for every k
are prefixes of the same shuffle, growing k only ever extends the subset.
Dev splits are sampled with the same spec; test splits are never subsampled.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from ._rng import Rng
from .core import Example, ForgeError
from .ingest import Dataset

STRATIFY_CHOICES = ("category", "sentiment")


class InvalidSpec(ForgeError):
    """The sampling spec is unusable for this dataset."""


@dataclass(frozen=True)
class FewShotSpec:
    k: int
    stratify_by: str
    seed: int

    def __post_init__(self) -> None:
        if self.k <= 0:
            raise InvalidSpec(f"k must be positive, got {self.k}")
        if self.stratify_by not in STRATIFY_CHOICES:
            raise InvalidSpec(f"stratify_by must be one of {STRATIFY_CHOICES}, got {self.stratify_by!r}")
        if not 0 <= self.seed < 2**64:
            raise InvalidSpec(f"seed must be an unsigned 64-bit integer, got {self.seed}")


def strata_of(example: Example, stratify_by: str) -> set[str]:
    """Distinct stratum values among an example's quads."""
    if stratify_by == "category":
        return {q.category.surface for q in example.quads if q.category is not None}
    return {q.sentiment.value for q in example.quads}


def stratum_totals(dataset: Dataset, stratify_by: str) -> Counter:
    totals: Counter = Counter()
    for ex in dataset.examples:
        totals.update(strata_of(ex, stratify_by))
    return totals


def sample_fewshot(dataset: Dataset, spec: FewShotSpec) -> Dataset:
    """Deterministic stratified subset; see module docstring for the rule."""
    if spec.stratify_by == "category" and not dataset.capabilities.has_category:
        raise InvalidSpec("stratify_by=category requires category annotations")

    order = list(dataset.examples)
    Rng(spec.seed).shuffle(order)

    totals = stratum_totals(dataset, spec.stratify_by)
    needed = {v: min(spec.k, t) for v, t in totals.items()}
    have: Counter = Counter()
    prefix_len = 0
    if needed:
        satisfied = 0
        for i, ex in enumerate(order):
            for v in strata_of(ex, spec.stratify_by):
                have[v] += 1
                if have[v] == needed[v]:
                    satisfied += 1
            if satisfied == len(needed):
                prefix_len = i + 1
                break
        else:
            # Unreachable under the min(k, total) cap, kept as a guard.
            prefix_len = len(order)

    return Dataset.build(
        name=dataset.name,
        split=dataset.split,
        examples=order[:prefix_len],
        capabilities=dataset.capabilities,
    )
