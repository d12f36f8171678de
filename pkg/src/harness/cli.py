"""
Command Line Interface - SpecDec Lab

    specdec [--config params.json] [--seed N] [--out-dir DIR] [--format csv|json] <command> ...

Exit codes: 0 success, 1 validation error, 2 runtime failure.
"""

import sys
import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Any

import click

from src.config import get_settings, configure_logging
from src.errors import ValidationError, ConfigError
from src.language_models import fit_ngram, save_ngram, perplexity
from .experiment import ExperimentKind, ExperimentSpec
from .runner import run_experiment
from .corpus import ingest_corpus, generate_markov_corpus

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2


class LabGroup(click.Group):
    """click group that maps failures onto the lab's exit codes."""

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            rv = super().main(args=args, prog_name=prog_name, complete_var=complete_var,
                              standalone_mode=False, **extra)
            code = rv if isinstance(rv, int) else EXIT_OK
        except click.ClickException as e:
            e.show()
            code = EXIT_VALIDATION
        except click.Abort:
            click.echo("Aborted!", err=True)
            code = EXIT_VALIDATION
        except ValidationError as e:
            logger.error(f"Validation error: {e}")
            click.echo(f"Error: {e}", err=True)
            code = EXIT_VALIDATION
        except Exception as e:
            logger.error(f"Runtime failure: {e}")
            click.echo(f"Error: {e}", err=True)
            code = EXIT_RUNTIME
        if standalone_mode:
            sys.exit(code)
        return code


def _int_list(value: Optional[str]) -> Optional[List[int]]:
    if value is None:
        return None
    try:
        return [int(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got {value!r}")


def _float_list(value: Optional[str]) -> Optional[List[float]]:
    if value is None:
        return None
    try:
        return [float(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated numbers, got {value!r}")


def _read_json_object(path: str, option: str) -> Dict[str, Any]:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"{option} file not found: {path}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"{option} must contain a JSON object")
    return data


def _execute(ctx: click.Context, kind: ExperimentKind, params: Dict[str, Any],
             dataset: Optional[str] = None) -> None:
    obj = ctx.obj
    merged = dict(obj["params"])
    merged.update({k: v for k, v in params.items() if v is not None})
    spec = ExperimentSpec(
        kind=kind,
        params=merged,
        experiment_id=obj.get("experiment_id"),
        dataset=dataset,
        out_dir=obj["out_dir"],
        repetitions=obj["repetitions"],
        warmup=obj["warmup"],
        seed=obj["seed"],
        format=obj["format"]
    )
    repository = None
    if obj["ledger"]:
        from src.database import get_repository
        repository = get_repository()
    records = run_experiment(spec, repository=repository)
    for record in records:
        click.echo(json.dumps({"experiment_id": record.experiment_id, "summary": record.summary,
                               "metrics": record.metrics}, indent=2, default=str))


@click.group(cls=LabGroup)
@click.option("--config", "config_path", type=click.Path(dir_okay=False), help="JSON object of experiment params.")
@click.option("--seed", type=int, default=None, help="Experiment seed (default SPECDEC_SEED).")
@click.option("--out-dir", default=None, help="Output directory (default SPECDEC_OUT_DIR).")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
@click.option("--repetitions", type=int, default=None, help="Repetitions (default SPECDEC_REPETITIONS for timed runs).")
@click.option("--warmup", type=int, default=None, help="Warm-up count (default SPECDEC_WARMUP).")
@click.option("--experiment-id", default=None)
@click.option("--ledger/--no-ledger", default=False, help="Record results in the database ledger.")
@click.option("--log-level", default=None)
@click.pass_context
def cli(ctx, config_path, seed, out_dir, fmt, repetitions, warmup, experiment_id, ledger, log_level):
    """Desk-scale speculative decoding lab."""
    settings = get_settings()
    configure_logging(log_level.upper() if log_level else None)
    params: Dict[str, Any] = {}
    if config_path:
        params = _read_json_object(config_path, "--config")
    ctx.obj = {
        "params": params,
        "seed": settings.seed if seed is None else seed,
        "out_dir": out_dir or settings.out_dir,
        "format": fmt,
        "repetitions": repetitions,
        "warmup": settings.warmup if warmup is None else warmup,
        "experiment_id": experiment_id,
        "ledger": ledger
    }


def _repetitions(ctx: click.Context, timed_default: bool) -> None:
    if ctx.obj["repetitions"] is None:
        ctx.obj["repetitions"] = get_settings().repetitions if timed_default else 1


def _model_spec(order: Optional[int]) -> Optional[Dict[str, Any]]:
    return None if order is None else {"type": "ngram", "order": order}


def _run_options(lookahead, max_new_tokens, temperature, eos_token) -> Optional[Dict[str, Any]]:
    run: Dict[str, Any] = {}
    if lookahead is not None:
        run["lookahead"] = lookahead
    if max_new_tokens is not None:
        run["max_new_tokens"] = max_new_tokens
    if temperature is not None:
        run.update(policy="temperature", temperature=temperature)
    if eos_token is not None:
        run["eos_token"] = eos_token
    return run or None


def generation_options(fn):
    options = [
        click.option("--dataset", type=click.Path(), default=None, help="Text or JSONL corpus (synthetic if omitted)."),
        click.option("--draft-order", type=int, default=None, help="Draft n-gram order."),
        click.option("--target-order", type=int, default=None, help="Target n-gram order."),
        click.option("--max-new-tokens", type=int, default=None),
        click.option("--temperature", type=float, default=None, help="Sample at this temperature instead of greedy."),
        click.option("--eos-token", type=int, default=None),
        click.option("--prompt", "prompt_text", default=None, help="Prompt text (byte tokens)."),
        click.option("--num-prompts", type=int, default=None),
        click.option("--plotdata", is_flag=True, default=False, help="Also emit plot-data CSVs."),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


@cli.command("bench-latency")
@click.option("--series", type=click.Choice(["depth", "width", "budget"]), default=None)
@click.option("--depths", default=None, help="Comma-separated layer counts.")
@click.option("--widths", default=None, help="Comma-separated model dims.")
@click.option("--model-dim", type=int, default=None)
@click.option("--num-layers", type=int, default=None)
@click.option("--budget", type=float, default=None)
@click.option("--plotdata", is_flag=True, default=False)
@click.pass_context
def bench_latency(ctx, series, depths, widths, model_dim, num_layers, budget, plotdata):
    """Decode-step latency across depth, width or a fixed budget."""
    _repetitions(ctx, timed_default=True)
    _execute(ctx, ExperimentKind.BENCH_LATENCY, {
        "series": series, "depths": _int_list(depths), "widths": _int_list(widths),
        "model_dim": model_dim, "num_layers": num_layers, "budget": budget, "plotdata": plotdata or None
    })


@cli.command("run-specdec")
@generation_options
@click.option("--lookahead", type=int, default=None)
@click.option("--autoregressive", is_flag=True, default=False, help="Run the target-only baseline.")
@click.option("--traces", is_flag=True, default=False, help="Export per-iteration traces as JSONL.")
@click.pass_context
def run_specdec(ctx, dataset, draft_order, target_order, max_new_tokens, temperature, eos_token, prompt_text,
                num_prompts, plotdata, lookahead, autoregressive, traces):
    """Speculative (or baseline) generation with per-iteration traces."""
    _repetitions(ctx, timed_default=False)
    _execute(ctx, ExperimentKind.RUN_SPECDEC, {
        "draft": _model_spec(draft_order), "target": _model_spec(target_order),
        "run": _run_options(lookahead, max_new_tokens, temperature, eos_token),
        "prompt_text": prompt_text, "num_prompts": num_prompts, "plotdata": plotdata or None, "traces": traces or None,
        "mode": "autoregressive" if autoregressive else None
    }, dataset)


@cli.command("sweep-lookahead")
@generation_options
@click.option("--lookaheads", default=None, help="Comma-separated lookahead values (default 1..8).")
@click.pass_context
def sweep(ctx, dataset, draft_order, target_order, max_new_tokens, temperature, eos_token, prompt_text,
          num_prompts, plotdata, lookaheads):
    """TAR and throughput per lookahead, with the best lookahead flagged."""
    _repetitions(ctx, timed_default=False)
    _execute(ctx, ExperimentKind.SWEEP_LOOKAHEAD, {
        "draft": _model_spec(draft_order), "target": _model_spec(target_order),
        "run": _run_options(None, max_new_tokens, temperature, eos_token),
        "lookaheads": _int_list(lookaheads), "prompt_text": prompt_text, "num_prompts": num_prompts,
        "plotdata": plotdata or None
    }, dataset)


def _measurement_params(tar, t_draft_ms, t_target_ms, model_id) -> Dict[str, Any]:
    if tar is None:
        return {}
    if t_draft_ms is None or t_target_ms is None:
        raise click.UsageError("--tar needs --t-draft-ms and --t-target-ms")
    return {"rows": [{"model_id": model_id, "tar": tar, "t_draft_ms": t_draft_ms, "t_target_ms": t_target_ms}]}


def measurement_options(fn):
    options = [
        click.option("--dataset", type=click.Path(), default=None,
                     help="Measurement CSV: model_id, tar, t_draft_ms, t_target_ms."),
        click.option("--tar", type=float, default=None),
        click.option("--t-draft-ms", type=float, default=None),
        click.option("--t-target-ms", type=float, default=None),
        click.option("--model-id", default="model"),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


@cli.command("predict")
@measurement_options
@click.pass_context
def predict(ctx, dataset, tar, t_draft_ms, t_target_ms, model_id):
    """Analytical throughput from TAR and phase latencies."""
    _repetitions(ctx, timed_default=False)
    _execute(ctx, ExperimentKind.PREDICT, _measurement_params(tar, t_draft_ms, t_target_ms, model_id), dataset)


@cli.command("parity")
@measurement_options
@click.option("--baseline", default=None, help="Baseline model id (default: first row).")
@click.option("--plotdata", is_flag=True, default=False)
@click.pass_context
def parity(ctx, dataset, tar, t_draft_ms, t_target_ms, model_id, baseline, plotdata):
    """Draft latency each model needs to match the baseline's throughput."""
    _repetitions(ctx, timed_default=False)
    params = _measurement_params(tar, t_draft_ms, t_target_ms, model_id)
    _execute(ctx, ExperimentKind.PARITY, dict(params, baseline=baseline, plotdata=plotdata or None), dataset)


@cli.command("extra-tar")
@measurement_options
@click.option("--baseline", default=None)
@click.option("--gamma", type=int, default=None, help="Lookahead; TAR is capped at gamma + 1.")
@click.option("--plotdata", is_flag=True, default=False)
@click.pass_context
def extra_tar(ctx, dataset, tar, t_draft_ms, t_target_ms, model_id, baseline, gamma, plotdata):
    """Extra TAR each model needs to match the baseline, or infeasible."""
    _repetitions(ctx, timed_default=False)
    params = _measurement_params(tar, t_draft_ms, t_target_ms, model_id)
    _execute(ctx, ExperimentKind.EXTRA_TAR, dict(params, baseline=baseline, gamma=gamma, plotdata=plotdata or None), dataset)


@cli.command("required-tar")
@measurement_options
@click.option("--throughputs", default=None, help="Comma-separated target throughputs (tokens/s).")
@click.option("--gamma", type=int, default=None)
@click.option("--plotdata", is_flag=True, default=False)
@click.pass_context
def required_tar(ctx, dataset, tar, t_draft_ms, t_target_ms, model_id, throughputs, gamma, plotdata):
    """TAR required to hit each target throughput."""
    _repetitions(ctx, timed_default=False)
    params = _measurement_params(tar, t_draft_ms, t_target_ms, model_id)
    _execute(ctx, ExperimentKind.REQUIRED_TAR,
             dict(params, throughputs=_float_list(throughputs), gamma=gamma, plotdata=plotdata or None), dataset)


@cli.command("explore")
@click.option("--budget", type=float, default=None)
@click.option("--tolerance", type=float, default=None)
@click.option("--depths", default=None)
@click.option("--head-dim", type=int, default=None)
@click.option("--ffn-dims", default=None)
@click.option("--budget-spec", type=click.Path(dir_okay=False), default=None, help="ParamBudgetSpec JSON file.")
@click.option("--limit", type=int, default=None)
@click.pass_context
def explore(ctx, budget, tolerance, depths, head_dim, ffn_dims, budget_spec, limit):
    """Configurations within tolerance of a parameter budget."""
    _repetitions(ctx, timed_default=False)
    spec = dict(ctx.obj["params"].get("budget_spec", {}))
    if budget_spec:
        spec.update(_read_json_object(budget_spec, "--budget-spec"))
    overrides = {"budget": budget, "tolerance": tolerance, "depths": _int_list(depths),
                 "head_dim": head_dim, "ffn_dims": _int_list(ffn_dims)}
    spec.update({k: v for k, v in overrides.items() if v is not None})
    spec.setdefault("budget", 3.5e8)
    _execute(ctx, ExperimentKind.EXPLORE, {"budget_spec": spec, "limit": limit})


def _parse_candidate(value: str) -> Dict[str, Any]:
    parts = value.split(":")
    if len(parts) != 3:
        raise click.BadParameter(f"expected NAME:TAR:T_DRAFT_MS, got {value!r}")
    try:
        return {"name": parts[0], "tar": float(parts[1]), "t_draft_ms": float(parts[2])}
    except ValueError:
        raise click.BadParameter(f"TAR and latency must be numbers in {value!r}")


@cli.command("compare")
@click.option("--candidate", "candidates", multiple=True, help="NAME:TAR:T_DRAFT_MS (give exactly two).")
@click.option("--t-target-ms", type=float, default=None)
@click.option("--lookahead", type=int, default=None)
@click.pass_context
def compare(ctx, candidates, t_target_ms, lookahead):
    """Wide-vs-deep verdict from TARs and draft latencies."""
    _repetitions(ctx, timed_default=True)
    params: Dict[str, Any] = {"t_target_ms": t_target_ms, "lookahead": lookahead}
    if candidates:
        if len(candidates) != 2:
            raise click.UsageError("compare needs exactly two --candidate values")
        params["a"], params["b"] = (_parse_candidate(c) for c in candidates)
    _execute(ctx, ExperimentKind.COMPARE, params)


@cli.command("ingest")
@click.argument("dataset", type=click.Path())
@click.option("--eos/--no-eos", default=True)
@click.pass_context
def ingest(ctx, dataset, eos):
    """Tokenize a text or JSONL corpus and report its size."""
    _repetitions(ctx, timed_default=False)
    _execute(ctx, ExperimentKind.INGEST, {"eos": eos}, dataset)


@cli.command("fit-ngram")
@click.argument("dataset", type=click.Path(), required=False)
@click.option("--order", type=int, default=3, show_default=True)
@click.option("--discount", type=float, default=0.5, show_default=True)
@click.option("--output", type=click.Path(dir_okay=False), required=True, help="Where to write the model JSON.")
@click.pass_context
def fit_ngram_command(ctx, dataset, order, discount, output):
    """Fit an n-gram model on a corpus (synthetic if omitted) and save it."""
    corpus = ingest_corpus(dataset) if dataset else generate_markov_corpus(seed=ctx.obj["seed"])
    if not corpus:
        raise ValidationError(f"Corpus {dataset} is empty")
    model = fit_ngram(corpus, order, discount)
    save_ngram(model, output)
    click.echo(json.dumps({"model": model.name, "contexts": model.num_contexts,
                           "perplexity": perplexity(model, corpus), "path": output}, indent=2))


def main() -> None:
    cli(prog_name="specdec")


if __name__ == "__main__":
    main()
