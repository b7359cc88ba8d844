"""Codeword ensembles: product, constant-composition and cost-shell.

Provides exact enumeration (for oracle-scale instances) and vectorized
sampling used by the Monte Carlo and simulation routines.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import BudgetError, Error
from .model import AuxiliaryCostSet, ChannelModel, InputDistribution


def largest_remainder(q_vec: np.ndarray, n: int) -> np.ndarray:
    """Round n*Q to an integer composition of n; each entry moves by at most 1.

    Seats left after flooring go to the largest fractional remainders, ties
    broken by lower index so the rounding is deterministic.
    """
    scaled = np.asarray(q_vec, dtype=float) * n
    counts = np.floor(scaled).astype(int)
    rem = scaled - counts
    short = n - counts.sum()
    order = sorted(range(len(counts)), key=lambda i: (-rem[i], i))
    for i in order[:short]:
        counts[i] += 1
    return counts


@dataclass(frozen=True)
class EnsembleSpec:
    kind: str                                  # "iid" | "cc" | "cost"
    q_in: InputDistribution
    aux: AuxiliaryCostSet | None = None

    def __post_init__(self):
        if self.kind not in ("iid", "cc", "cost"):
            raise Error(f"unknown ensemble kind {self.kind!r}")
        if self.kind == "cost" and self.aux is None:
            raise Error("cost ensemble requires an auxiliary cost set")

    def composition(self, n: int) -> np.ndarray:
        return largest_remainder(self.q_in.q_vec, n)

    def base_word(self, n: int) -> np.ndarray:
        counts = self.composition(n)
        return np.repeat(np.arange(len(counts)), counts)

    def _in_shell(self, word: np.ndarray, channel: ChannelModel, n: int) -> bool:
        if channel.cost is not None and channel.budget is not None:
            if float(channel.cost[word].mean()) > channel.budget + 1e-12:
                return False
        for a, phi in zip(self.aux.costs, self.aux.means):
            if abs(float(a[word].mean()) - phi) > self.aux.shell_width / n + 1e-12:
                return False
        return True

    def enumerate_words(self, n: int, channel: ChannelModel | None = None,
                        budget: int = 10 ** 6) -> Iterator[tuple[np.ndarray, float]]:
        """Yield (word, probability) pairs; exact, for oracle-scale n only."""
        qv = self.q_in.q_vec
        support = np.flatnonzero(qv > 0)
        if self.kind == "cc":
            base = self.base_word(n)
            count = math.factorial(n)
            for c in self.composition(n):
                count //= math.factorial(int(c))
            if count > budget:
                raise BudgetError(f"{count} constant-composition words exceed the budget {budget}")
            p = 1.0 / count
            for word in _multiset_permutations(base.tolist()):
                yield np.array(word, dtype=int), p
            return
        if len(support) ** n > budget:
            raise BudgetError(f"|support|^n = {len(support) ** n} words exceed the budget {budget}")
        words = list(itertools.product(support.tolist(), repeat=n))
        probs = [float(np.prod(qv[list(w)])) for w in words]
        if self.kind == "iid":
            for w, p in zip(words, probs):
                yield np.array(w, dtype=int), p
            return
        if channel is None:
            raise Error("cost ensemble enumeration needs the channel for its cost function")
        keep = [i for i, w in enumerate(words)
                if self._in_shell(np.array(w, dtype=int), channel, n)]
        mass = math.fsum(probs[i] for i in keep)
        if mass <= 0:
            raise Error("cost shell is empty at this blocklength")
        for i in keep:
            yield np.array(words[i], dtype=int), probs[i] / mass

    def sample_words(self, n: int, count: int, rng: np.random.Generator,
                     channel: ChannelModel | None = None) -> np.ndarray:
        if self.kind == "iid":
            return rng.choice(len(self.q_in.q_vec), size=(count, n), p=self.q_in.q_vec)
        if self.kind == "cc":
            base = np.tile(self.base_word(n), (count, 1))
            return rng.permuted(base, axis=1)
        if channel is None:
            raise Error("cost ensemble sampling needs the channel for its cost function")
        out = np.empty((count, n), dtype=int)
        filled = 0
        for _ in range(10_000):
            batch = rng.choice(len(self.q_in.q_vec), size=(count, n), p=self.q_in.q_vec)
            for row in batch:
                if self._in_shell(row, channel, n):
                    out[filled] = row
                    filled += 1
                    if filled == count:
                        return out
        raise Error("cost-shell rejection sampling failed to fill the batch")


def _multiset_permutations(items: list[int]) -> Iterator[list[int]]:
    """Distinct permutations in lexicographic order (Knuth's algorithm L)."""
    seq = sorted(items)
    n = len(seq)
    while True:
        yield list(seq)
        j = n - 2
        while j >= 0 and seq[j] >= seq[j + 1]:
            j -= 1
        if j < 0:
            return
        k = n - 1
        while seq[j] >= seq[k]:
            k -= 1
        seq[j], seq[k] = seq[k], seq[j]
        seq[j + 1:] = reversed(seq[j + 1:])
