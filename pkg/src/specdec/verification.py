"""
Verification Rules - SpecDec Lab

Pure acceptance functions for greedy and temperature-sampled verification,
plus the exact single-step emitted-token distribution used as an oracle.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from src.errors import DistributionError

logger = logging.getLogger(__name__)


@dataclass
class Verdict:
    """Accepted prefix length plus the tokens to append (accepted proposals then one target token)."""
    accepted: int
    tokens: List[int] = field(default_factory=list)
    residual: bool = False


def split_seed(seed: int) -> Tuple[np.random.Generator, np.random.Generator]:
    """Independent (draft, verify) generators spawned from one seed."""
    draft_seq, verify_seq = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(draft_seq), np.random.default_rng(verify_seq)


def sample_token(probs: np.ndarray, rng: np.random.Generator) -> int:
    cdf = np.cumsum(probs)
    index = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    return min(index, probs.size - 1)


def verify_greedy(proposals: Sequence[int], target_probs: np.ndarray) -> Verdict:
    """target_probs has one row per proposal plus one beyond the last."""
    k = len(proposals)
    if target_probs.shape[0] != k + 1:
        raise DistributionError(f"Expected {k + 1} target rows, got {target_probs.shape[0]}")
    choices = np.argmax(target_probs, axis=-1)
    accepted = 0
    while accepted < k and int(proposals[accepted]) == int(choices[accepted]):
        accepted += 1
    return Verdict(accepted=accepted, tokens=[int(t) for t in proposals[:accepted]] + [int(choices[accepted])])


def verify_sampled(proposals: Sequence[int], draft_probs: np.ndarray, target_probs: np.ndarray,
                   rng: np.random.Generator) -> Verdict:
    """
    Accept x with probability min(1, p(x) / q(x)). The first rejection emits a
    token from max(0, p - q) renormalized; if every proposal survives, one
    bonus token is drawn from p at the next position.
    """
    k = len(proposals)
    if target_probs.shape[0] != k + 1 or draft_probs.shape[0] != k:
        raise DistributionError("Draft needs one row per proposal and target one row more")
    for i, token in enumerate(proposals):
        p = target_probs[i, token]
        q = draft_probs[i, token]
        if rng.random() * q < p:
            continue
        residual = np.maximum(target_probs[i] - draft_probs[i], 0.0)
        mass = residual.sum()
        if mass <= 0:
            # p == q everywhere: the rejection branch has zero probability.
            continue
        replacement = sample_token(residual / mass, rng)
        logger.debug(f"Rejected proposal {i} (token {token}); residual token {replacement}")
        return Verdict(accepted=i, tokens=[int(t) for t in proposals[:i]] + [replacement], residual=True)
    return Verdict(accepted=k, tokens=[int(t) for t in proposals] + [sample_token(target_probs[k], rng)])


def emitted_token_distribution(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """
    Exact distribution of the first emitted token when the draft samples from q
    and verification uses p, by summing the accept and reject branches.
    """
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise DistributionError("p and q must have the same shape")
    accept = np.where(q > 0, np.minimum(q, p), 0.0)
    reject_mass = 1.0 - accept.sum()
    residual = np.maximum(p - q, 0.0)
    if residual.sum() <= 0 or reject_mass <= 0:
        return accept
    return accept + reject_mass * residual / residual.sum()


def total_variation(a: np.ndarray, b: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)).sum())
