"""
Speculative Decoding Engine - SpecDec Lab

Draft-then-verify generation loop, the autoregressive baseline, and lookahead
sweeps.

Each model's state holds a prefix of the committed sequence; the tokens after
that prefix are "pending" and are fed at the start of the next pass, so the
target runs exactly one extend() per iteration over pending + proposals.
"""

import time
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Any

import numpy as np

from src.errors import ConfigError, ContextOverflowError, EmptyInputError, VocabularyError
from src.language_models import LanguageModel, DecodeState, distribution
from .config import SpecRunConfig
from .traces import IterationTrace, RunStats, timed_window
from .verification import split_seed, sample_token, verify_greedy, verify_sampled

logger = logging.getLogger(__name__)

Clock = Callable[[], float]


def _check_prompt(model: LanguageModel, prompt: Sequence[int], config: SpecRunConfig) -> List[int]:
    ids = [int(t) for t in prompt]
    if not ids:
        raise EmptyInputError("Prompt must contain at least one token")
    if min(ids) < 0 or max(ids) >= model.vocab_size:
        raise VocabularyError(f"Prompt ids must lie in [0, {model.vocab_size}) for {model.name}")
    needed = len(ids) + max(config.max_new_tokens - 1, 0)
    if not model.fits(needed):
        raise ContextOverflowError(
            f"Prompt of {len(ids)} tokens plus {config.max_new_tokens} new tokens needs {needed} positions; "
            f"{model.name} has {model.max_positions}"
        )
    return ids


def _rollback(model: LanguageModel, state: DecodeState, sequence: List[int]) -> None:
    """Truncate the state to its longest prefix agreeing with sequence, leaving at least one token pending."""
    limit = min(state.length, len(sequence) - 1)
    keep = 0
    while keep < limit and state.tokens[keep] == sequence[keep]:
        keep += 1
    if keep < state.length:
        model.truncate(state, keep)


def _pick(probs: np.ndarray, config: SpecRunConfig, rng: np.random.Generator) -> int:
    if config.is_greedy:
        return int(np.argmax(probs))
    return sample_token(probs, rng)


def _truncate_at_eos(tokens: List[int], eos_token: Optional[int]) -> List[int]:
    if eos_token is not None and eos_token in tokens:
        return tokens[:tokens.index(eos_token) + 1]
    return tokens


def generate_autoregressive(target: LanguageModel, prompt: Sequence[int], config: SpecRunConfig,
                            clock: Clock = time.perf_counter) -> RunStats:
    """Baseline: one target pass per emitted token."""
    sequence = _check_prompt(target, prompt, config)
    prompt_length = len(sequence)
    _, rng = split_seed(config.rng_seed)
    state = target.new_state()
    stats = RunStats(output=[], mode="autoregressive", warmup_iterations=config.warmup_iterations)

    while len(sequence) - prompt_length < config.max_new_tokens:
        start = clock()
        logits = target.extend(state, sequence[state.length:])[-1]
        token = _pick(distribution(logits, config.sampling_temperature), config, rng)
        elapsed = clock() - start
        stats.target_passes += 1
        sequence.append(token)
        stats.traces.append(IterationTrace(proposed=0, accepted=0, emitted=1, draft_time=0.0,
                                           verify_time=elapsed, iteration_time=elapsed))
        if token == config.eos_token:
            break

    stats.output = sequence[prompt_length:]
    return stats


def generate_speculative(draft: LanguageModel, target: LanguageModel, prompt: Sequence[int],
                         config: SpecRunConfig, clock: Clock = time.perf_counter) -> RunStats:
    """Draft proposes up to lookahead tokens, target verifies them in a single extend pass."""
    if draft.vocab_size != target.vocab_size:
        raise VocabularyError(
            f"Draft vocabulary ({draft.vocab_size}) differs from target vocabulary ({target.vocab_size})"
        )
    _check_prompt(draft, prompt, config)
    sequence = _check_prompt(target, prompt, config)
    prompt_length = len(sequence)
    temperature = config.sampling_temperature
    draft_rng, verify_rng = split_seed(config.rng_seed)
    draft_state = draft.new_state()
    target_state = target.new_state()
    stats = RunStats(output=[], mode="speculative", lookahead=config.lookahead,
                     warmup_iterations=config.warmup_iterations)

    while True:
        remaining = config.max_new_tokens - (len(sequence) - prompt_length)
        if remaining <= 0:
            break
        # Keep the verify pass inside the token budget: k proposals + 1 target token.
        k = min(config.lookahead, remaining - 1)

        start = clock()
        proposals: List[int] = []
        draft_rows: List[np.ndarray] = []
        if k > 0:
            logits = draft.extend(draft_state, sequence[draft_state.length:])[-1]
            for i in range(k):
                q = distribution(logits, temperature)
                token = _pick(q, config, draft_rng)
                proposals.append(token)
                draft_rows.append(q)
                if i < k - 1:
                    logits = draft.decode_step(draft_state, token)
        drafted = clock()

        logits = target.extend(target_state, sequence[target_state.length:] + proposals)
        stats.target_passes += 1
        target_probs = distribution(logits[-(k + 1):], temperature)
        if config.is_greedy:
            verdict = verify_greedy(proposals, target_probs)
        else:
            draft_probs = np.array(draft_rows) if draft_rows else np.zeros((0, target.vocab_size))
            verdict = verify_sampled(proposals, draft_probs, target_probs, verify_rng)
        new_tokens = _truncate_at_eos(verdict.tokens, config.eos_token)
        sequence.extend(new_tokens)
        _rollback(draft, draft_state, sequence)
        _rollback(target, target_state, sequence)
        finished = clock()

        trace = IterationTrace(
            proposed=k,
            accepted=min(verdict.accepted, len(new_tokens)),
            emitted=len(new_tokens),
            draft_time=drafted - start,
            verify_time=finished - drafted,
            iteration_time=finished - start
        )
        stats.traces.append(trace)
        logger.debug(f"Iteration {len(stats.traces)}: proposed {k}, accepted {trace.accepted}, "
                     f"emitted {trace.emitted}")
        if config.eos_token is not None and new_tokens[-1] == config.eos_token:
            break

    stats.output = sequence[prompt_length:]
    return stats


@dataclass
class SweepRow:
    lookahead: int
    tar: float
    acceptance_rate: Optional[float]
    throughput: float
    iterations: int
    emitted_tokens: int
    mean_draft_time: float
    mean_verify_time: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lookahead": self.lookahead,
            "tar": self.tar,
            "acceptance_rate": self.acceptance_rate,
            "throughput": self.throughput,
            "iterations": self.iterations,
            "emitted_tokens": self.emitted_tokens,
            "mean_draft_time": self.mean_draft_time,
            "mean_verify_time": self.mean_verify_time
        }


@dataclass
class LookaheadSweep:
    rows: List[SweepRow] = field(default_factory=list)

    @property
    def best_lookahead(self) -> int:
        """Highest throughput; ties go to the smallest lookahead."""
        return max(self.rows, key=lambda r: (r.throughput, -r.lookahead)).lookahead

    def row(self, lookahead: int) -> SweepRow:
        for row in self.rows:
            if row.lookahead == lookahead:
                return row
        raise KeyError(lookahead)

    def to_rows(self) -> List[Dict[str, Any]]:
        best = self.best_lookahead
        return [dict(r.to_dict(), best=r.lookahead == best) for r in self.rows]


def summarize_runs(lookahead: int, runs: Sequence[RunStats]) -> SweepRow:
    """Pool runs: TAR over every iteration, timing over each run's post-warm-up window."""
    traces = [t for run in runs for t in run.traces]
    timed = [t for run in runs for t in timed_window(run.traces, run.warmup_iterations)]
    proposed = sum(t.proposed for t in traces)
    elapsed = sum(t.iteration_time for t in timed)
    return SweepRow(
        lookahead=lookahead,
        tar=sum(t.emitted for t in traces) / len(traces) if traces else 0.0,
        acceptance_rate=sum(t.accepted for t in traces) / proposed if proposed else None,
        throughput=sum(t.emitted for t in timed) / elapsed if elapsed > 0 else 0.0,
        iterations=len(traces),
        emitted_tokens=sum(t.emitted for t in traces),
        mean_draft_time=sum(t.draft_time for t in timed) / len(timed) if timed else 0.0,
        mean_verify_time=sum(t.verify_time for t in timed) / len(timed) if timed else 0.0
    )


def sweep_lookahead(draft: LanguageModel, target: LanguageModel, prompts: Sequence[Sequence[int]],
                    lookaheads: Sequence[int], config: SpecRunConfig,
                    clock: Clock = time.perf_counter) -> LookaheadSweep:
    if not lookaheads:
        raise ConfigError("sweep_lookahead needs at least one lookahead value")
    if not prompts:
        raise EmptyInputError("sweep_lookahead needs at least one prompt")
    sweep = LookaheadSweep()
    for lookahead in lookaheads:
        run_config = config.with_overrides(lookahead=int(lookahead))
        runs = [generate_speculative(draft, target, prompt, run_config, clock=clock) for prompt in prompts]
        row = summarize_runs(int(lookahead), runs)
        logger.info(f"lookahead={lookahead}: TAR {row.tar:.3f}, {row.throughput:.1f} tokens/s")
        sweep.rows.append(row)
    return sweep
