"""
Experiment Pipelines - SpecDec Lab

One handler per ExperimentKind. A handler returns a list of
(metrics rows, summary) pairs, one per ResultRecord, and registers any extra
files it writes with the run context so failed runs can be cleaned up.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Any, Sequence, Tuple

from src.errors import ConfigError, ValidationError
from src.model_core import ModelConfig
from src.language_models import (
    LanguageModel, ByteTokenizer, fit_ngram, load_ngram, replay_model, create_transformer_lm
)
from src.specdec import (
    SpecRunConfig, RunStats, generate_autoregressive, generate_speculative, sweep_lookahead,
    measure_breakdown, export_traces_jsonl
)
from src.perf_model import (
    DraftMeasurement, LatencyModel, load_measurements, parity_table, extra_tar_table, required_tar_curve,
    ThroughputObservation, validate_predictions
)
from src.design_explorer import (
    ParamBudgetSpec, enumerate_configs, DraftCandidate, compare_wide_vs_deep, param_formula
)
from .experiment import ExperimentKind, ExperimentSpec
from .corpus import ingest_corpus, generate_markov_corpus, split_prompts
from .timing import depth_series, width_series, budget_series, measure_decode_latency
from .plotdata import emit_plotdata

logger = logging.getLogger(__name__)

Outcome = List[Tuple[List[Dict[str, Any]], Dict[str, Any]]]


@dataclass
class RunContext:
    spec: ExperimentSpec
    written: List[Path] = field(default_factory=list)

    @property
    def out_dir(self) -> Path:
        return Path(self.spec.out_dir)

    @property
    def params(self) -> Dict[str, Any]:
        return self.spec.params

    def track(self, paths) -> None:
        if isinstance(paths, Path):
            paths = [paths]
        self.written.extend(paths)

    def plotdata(self, records: Sequence[Dict[str, Any]], kind: str) -> None:
        if self.params.get("plotdata"):
            target = self.out_dir / f"{self.spec.experiment_id}_plotdata"
            self.track(emit_plotdata(records, kind, str(target)))
            self.track(target / f"{kind}.schema.json")


# Inputs

def load_corpus(ctx: RunContext) -> List[List[int]]:
    if ctx.spec.dataset:
        corpus = ingest_corpus(ctx.spec.dataset)
        if not corpus:
            raise ValidationError(f"Dataset {ctx.spec.dataset} has no records")
        return corpus
    options = dict(ctx.params.get("synthetic", {}))
    options.setdefault("seed", ctx.spec.seed)
    return generate_markov_corpus(**options)


def build_language_model(model_spec: Dict[str, Any], corpus: Optional[List[List[int]]]) -> LanguageModel:
    kind = model_spec.get("type")
    if kind == "ngram":
        if corpus is None:
            raise ConfigError("An n-gram model needs a corpus")
        return fit_ngram(corpus, int(model_spec.get("order", 2)), float(model_spec.get("discount", 0.5)),
                         int(model_spec.get("vocab_size", ByteTokenizer.vocab_size)))
    if kind == "ngram_file":
        return load_ngram(model_spec["path"])
    if kind == "transformer":
        return create_transformer_lm(ModelConfig.from_dict(model_spec["config"]), name=model_spec.get("name"))
    if kind == "replay":
        return replay_model(model_spec["script"], int(model_spec.get("prompt_length", 1)))
    raise ConfigError(f"Unknown model type {kind!r}; expected ngram, ngram_file, transformer or replay")


def _needs_corpus(*model_specs: Dict[str, Any]) -> bool:
    return any(m.get("type") == "ngram" for m in model_specs)


def load_prompts(ctx: RunContext, corpus: Optional[List[List[int]]]) -> List[List[int]]:
    if "prompt" in ctx.params:
        return [list(ctx.params["prompt"])]
    if "prompt_text" in ctx.params:
        return [ByteTokenizer().encode(ctx.params["prompt_text"], add_eos=False)]
    if corpus is None:
        raise ConfigError("Give prompt, prompt_text, or an n-gram model spec with a corpus")
    return split_prompts(corpus, int(ctx.params.get("num_prompts", 1)), int(ctx.params.get("prompt_length", 8)))


def _run_config(ctx: RunContext) -> SpecRunConfig:
    options = dict(ctx.params.get("run", {}))
    options.setdefault("rng_seed", ctx.spec.seed)
    options.setdefault("warmup_iterations", ctx.spec.warmup)
    return SpecRunConfig.from_dict(options)


def _models(ctx: RunContext) -> Tuple[LanguageModel, LanguageModel, List[List[int]]]:
    draft_spec = ctx.params.get("draft", {"type": "ngram", "order": 2})
    target_spec = ctx.params.get("target", {"type": "ngram", "order": 4})
    needs_corpus = _needs_corpus(draft_spec, target_spec) or not ({"prompt", "prompt_text"} & set(ctx.params))
    corpus = load_corpus(ctx) if needs_corpus else None
    draft = build_language_model(draft_spec, corpus)
    target = draft if draft_spec == target_spec else build_language_model(target_spec, corpus)
    return draft, target, load_prompts(ctx, corpus)


def _stats_row(stats: RunStats, repetition: int) -> Dict[str, Any]:
    row = {
        "repetition": repetition,
        "mode": stats.mode,
        "lookahead": stats.lookahead,
        "iterations": stats.iterations,
        "emitted_tokens": stats.emitted_tokens,
        "tar": stats.tar,
        "acceptance_rate": stats.acceptance_rate,
        "throughput": stats.throughput,
        "mean_draft_ms": stats.mean_draft_time * 1e3,
        "mean_verify_ms": stats.mean_verify_time * 1e3,
        "target_passes": stats.target_passes,
        "output": " ".join(str(t) for t in stats.output)
    }
    if stats.total_draft_time + stats.total_verify_time > 0:
        row["draft_fraction"], row["verify_fraction"] = measure_breakdown(stats.timed_traces)
    return row


# Handlers

def run_specdec(ctx: RunContext) -> Outcome:
    draft, target, prompts = _models(ctx)
    config = _run_config(ctx)
    autoregressive = ctx.params.get("mode") == "autoregressive"
    outcome: Outcome = []
    for repetition in range(ctx.spec.repetitions):
        rows = []
        for index, prompt in enumerate(prompts):
            if autoregressive:
                stats = generate_autoregressive(target, prompt, config)
            else:
                stats = generate_speculative(draft, target, prompt, config)
            row = _stats_row(stats, repetition)
            row["prompt_index"] = index
            rows.append(row)
            if ctx.params.get("traces"):
                path = ctx.out_dir / f"{ctx.spec.experiment_id}_r{repetition}_p{index}_traces.jsonl"
                ctx.track(export_traces_jsonl(stats.traces, str(path)))
        outcome.append((rows, {"draft": draft.name, "target": target.name, "run": config.to_dict()}))

    breakdown = []
    for rows, _ in outcome[:1]:
        for row in rows:
            if "draft_fraction" in row:
                name = f"{draft.name}_p{row['prompt_index']}"
                breakdown.append({"model": name, "phase": "draft", "fraction": row["draft_fraction"]})
                breakdown.append({"model": name, "phase": "verify", "fraction": row["verify_fraction"]})
    if breakdown:
        ctx.plotdata(breakdown, "breakdown")
    return outcome


def run_sweep(ctx: RunContext) -> Outcome:
    draft, target, prompts = _models(ctx)
    lookaheads = [int(g) for g in ctx.params.get("lookaheads", range(1, 9))]
    sweep = sweep_lookahead(draft, target, prompts, lookaheads, _run_config(ctx))
    rows = sweep.to_rows()
    ctx.plotdata([{"model": f"{draft.name}_g{r['lookahead']}", "tar": r["tar"], "throughput": r["throughput"]}
                  for r in rows], "tput_vs_tar")
    observations = [
        ThroughputObservation(name=f"g{r.lookahead}", tar=r.tar, t_draft=r.mean_draft_time,
                              t_target=r.mean_verify_time, measured_throughput=r.throughput)
        for r in sweep.rows if r.throughput > 0 and r.mean_draft_time > 0 and r.mean_verify_time > 0
    ]
    summary: Dict[str, Any] = {"best_lookahead": sweep.best_lookahead, "draft": draft.name, "target": target.name}
    if observations:
        check = validate_predictions(observations)
        summary.update(median_prediction_error=check.median_error, max_prediction_error=check.max_error)
    return [(rows, summary)]


def run_bench_latency(ctx: RunContext) -> Outcome:
    p = ctx.params
    series_kind = p.get("series", "depth")
    timing = {"repetitions": ctx.spec.repetitions, "warmup": ctx.spec.warmup,
              "context_length": int(p.get("context_length", 16))}
    if series_kind == "depth":
        series = depth_series(p.get("depths", [1, 2, 4, 8, 16]), int(p.get("model_dim", 64)),
                              int(p.get("num_heads", 4)), **timing)
        model = series.fit()
        summary = {"series": "depth", "slope_ms": model.slope * 1e3, "intercept_ms": model.intercept * 1e3,
                   "r_squared": model.r_squared, "latency_model": model.to_dict()}
        ctx.plotdata([{"layers": r["layers"], "ms": r["median_ms"]} for r in series.rows], "latency_depth")
    elif series_kind == "width":
        series = width_series(p.get("widths", [64, 128, 256]), int(p.get("num_layers", 4)),
                              int(p.get("head_dim", 16)), **timing)
        first, last = series.rows[0], series.rows[-1]
        summary = {"series": "width", "latency_ratio": last["median_ms"] / first["median_ms"],
                   "width_ratio": last["model_dim"] / first["model_dim"]}
        ctx.plotdata([{"model_dim": r["model_dim"], "ms": r["median_ms"]} for r in series.rows], "latency_width")
    elif series_kind == "budget":
        series = budget_series(float(p.get("budget", 2.0e5)), p.get("depths", [1, 2, 4, 8]),
                               head_dim=int(p.get("head_dim", 16)), **timing)
        summary = {"series": "budget", "budget": p.get("budget", 2.0e5)}
        ctx.plotdata([{"layers": r["layers"], "ms": r["median_ms"]} for r in series.rows], "latency_depth")
    else:
        raise ConfigError(f"Unknown latency series {series_kind!r}; expected depth, width or budget")
    return [(series.rows, summary)]


def _measurements(ctx: RunContext) -> List[DraftMeasurement]:
    if ctx.spec.dataset:
        return load_measurements(ctx.spec.dataset)
    rows = ctx.params.get("rows")
    if rows is None and "tar" in ctx.params:
        rows = [{k: ctx.params[k] for k in ("model_id", "tar", "t_draft_ms", "t_target_ms") if k in ctx.params}]
    if not rows:
        raise ConfigError("Give a measurement CSV dataset or rows of model_id, tar, t_draft_ms, t_target_ms")
    return [DraftMeasurement(model_id=str(r.get("model_id", f"model{i}")), tar=float(r["tar"]),
                             t_draft_ms=float(r["t_draft_ms"]), t_target_ms=float(r["t_target_ms"]))
            for i, r in enumerate(rows)]


def run_predict(ctx: RunContext) -> Outcome:
    rows = [dict(m.to_dict(), throughput=m.throughput) for m in _measurements(ctx)]
    return [(rows, {})]


def run_parity(ctx: RunContext) -> Outcome:
    rows = parity_table(_measurements(ctx), ctx.params.get("baseline"))
    ctx.plotdata(rows, "parity")
    return [(rows, {"baseline": ctx.params.get("baseline")})]


def run_extra_tar(ctx: RunContext) -> Outcome:
    gamma = int(ctx.params.get("gamma", 7))
    rows = extra_tar_table(_measurements(ctx), gamma, ctx.params.get("baseline"))
    ctx.plotdata(rows, "extra_tar")
    return [(rows, {"gamma": gamma, "cap": gamma + 1})]


def run_required_tar(ctx: RunContext) -> Outcome:
    gamma = int(ctx.params.get("gamma", 7))
    throughputs = [float(t) for t in ctx.params.get("throughputs", [10, 20, 30, 40, 50])]
    rows = required_tar_curve(_measurements(ctx), throughputs, gamma)
    ctx.plotdata(rows, "required_tar")
    return [(rows, {"gamma": gamma, "cap": gamma + 1})]


def run_explore(ctx: RunContext) -> Outcome:
    p = ctx.params
    spec = ParamBudgetSpec.from_dict(p.get("budget_spec", {"budget": p.get("budget", 3.5e8)}))
    latency_model = LatencyModel.from_dict(p["latency_model"]) if "latency_model" in p else None
    tar_estimate = p.get("tar_estimate")
    if isinstance(tar_estimate, dict):
        tar_estimate = {int(k): float(v) for k, v in tar_estimate.items()}
    t_target = float(p["t_target_ms"]) / 1e3 if "t_target_ms" in p else None
    reports = enumerate_configs(spec, latency_model, tar_estimate, t_target, int(p.get("lookahead", 6)))
    limit = p.get("limit")
    rows = [r.to_dict() for r in (reports[:int(limit)] if limit else reports)]
    return [(rows, {"matches": len(reports), "formula": param_formula(spec.convention)})]


def _candidate(data: Dict[str, Any]) -> DraftCandidate:
    return DraftCandidate(
        name=data["name"],
        tar=float(data["tar"]),
        t_draft=float(data["t_draft_ms"]) / 1e3 if "t_draft_ms" in data else None,
        config=ModelConfig.from_dict(data["config"]) if "config" in data else None
    )


def run_compare(ctx: RunContext) -> Outcome:
    p = ctx.params
    if "a" not in p or "b" not in p or "t_target_ms" not in p:
        raise ConfigError("compare needs candidates a, b and t_target_ms")
    measure = lambda config: measure_decode_latency(config, ctx.spec.repetitions, ctx.spec.warmup).median
    verdict = compare_wide_vs_deep(_candidate(p["a"]), _candidate(p["b"]), float(p["t_target_ms"]) / 1e3,
                                   lookahead=int(p.get("lookahead", 8)), measure=measure)
    rows = [{"model": name, "throughput": tput, "draft_latency_ms": verdict.draft_latencies[name] * 1e3,
             "winner": verdict.winner == name}
            for name, tput in verdict.throughputs.items()]
    return [(rows, verdict.to_dict())]


def run_ingest(ctx: RunContext) -> Outcome:
    if not ctx.spec.dataset:
        raise ConfigError("ingest needs a dataset path")
    sequences = ingest_corpus(ctx.spec.dataset, eos=bool(ctx.params.get("eos", True)))
    rows = [{"record": i, "tokens": len(seq)} for i, seq in enumerate(sequences)]
    return [(rows, {"records": len(sequences), "tokens": sum(len(s) for s in sequences)})]


PIPELINES: Dict[ExperimentKind, Callable[[RunContext], Outcome]] = {
    ExperimentKind.BENCH_LATENCY: run_bench_latency,
    ExperimentKind.RUN_SPECDEC: run_specdec,
    ExperimentKind.SWEEP_LOOKAHEAD: run_sweep,
    ExperimentKind.PREDICT: run_predict,
    ExperimentKind.PARITY: run_parity,
    ExperimentKind.EXTRA_TAR: run_extra_tar,
    ExperimentKind.REQUIRED_TAR: run_required_tar,
    ExperimentKind.EXPLORE: run_explore,
    ExperimentKind.COMPARE: run_compare,
    ExperimentKind.INGEST: run_ingest,
}
