"""Command-line interface tying the pipeline together."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import corpus as corpus_mod
from .corpus import SynthSpec, default_ruleset, generate_synthetic, load_dataset, save_dataset
from .enrich import ReferenceEnricher
from .evaluation import arc_csv, cross_validate
from .features import FeatureSchema, export_matrix_csv, fit_schema, transform_matrix
from .learn import TrainConfig, load_model, make_classifier, save_model, smote
from .reject import RejectingClassifier
from .rules import RuleSet, load_ruleset, save_ruleset
from .sigparse import RuleParseError, parse_rule

_MODEL_ALIASES = {
    "svm": "linear_svm_ovr",
    "mlp": "mlp",
    "dt": "cart",
    "rf": "random_forest",
    "knn": "knn",
    "de": "deep_ensemble",
}

_FEATURES = click.Choice(["itrf", "mcf"])
_MODELS = click.Choice(sorted(_MODEL_ALIASES))


def _apply_config(ctx, param, value):
    """--config FILE: JSON mapping of option names, overriding all flags."""
    if value is None:
        return None
    with open(value, "r", encoding="utf-8") as fh:
        overrides = json.load(fh)
    ctx.default_map = ctx.default_map or {}
    for key, val in overrides.items():
        ctx.params[key.replace("-", "_")] = val
    return value


_config_option = click.option(
    "--config",
    type=click.Path(exists=True),
    callback=_apply_config,
    expose_value=False,
    is_eager=False,
    help="JSON config file whose values override all flags.",
)


def _load_rules(path: str | None) -> RuleSet:
    if path is None:
        return default_ruleset()
    return load_ruleset(path)


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


@click.group()
def main():
    """Classify IDPS signatures by importance, with a reject option."""


@main.command()
@click.argument("rules_file", type=click.Path(exists=True))
def parse(rules_file):
    """Validate a Snort rules file; non-zero exit on the first bad rule."""
    ok = 0
    with open(rules_file, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                parse_rule(line)
                ok += 1
            except RuleParseError as exc:
                _fail(f"{rules_file}:{lineno}: {exc}")
    click.echo(f"{ok} rules parsed")


@main.command()
@click.option("--rules", type=click.Path(exists=True), help="Rule file; default: built-in synthetic ruleset.")
@click.option("--n", default=1000, show_default=True)
@click.option("--mix", default="0.8,0.1,0.1", show_default=True, help="low,medium,high proportions.")
@click.option("--mad-fraction", default=0.0, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", required=True, type=click.Path())
@click.option("--fixtures", type=click.Path(), help="Also write enrichment fixture files here.")
@click.option("--emit-rules", type=click.Path(), help="Write the ruleset used to this path.")
@_config_option
def gen(rules, n, mix, mad_fraction, seed, out, fixtures, emit_rules):
    """Generate a synthetic labeled corpus."""
    rs = _load_rules(rules)
    proportions = tuple(float(p) for p in mix.split(","))
    if len(proportions) != 3:
        _fail("--mix needs three comma-separated proportions")
    spec = SynthSpec(n=n, class_mix=proportions, mad_fraction=mad_fraction, vocab_seed=seed)
    try:
        ds = generate_synthetic(rs, spec)
    except corpus_mod.CorpusError as exc:
        _fail(str(exc))
    save_dataset(ds, out)
    if fixtures:
        corpus_mod.write_fixtures(ds, fixtures)
    if emit_rules:
        save_ruleset(rs, emit_rules)
    counts = ds.class_counts()
    click.echo(f"wrote {len(ds)} items to {out} (counts: {counts})")


@main.command()
@click.option("--dataset", required=True, type=click.Path(exists=True))
@click.option("--rules", type=click.Path(exists=True))
@click.option("--features", "layout", type=_FEATURES, default="mcf", show_default=True)
@click.option("--out", required=True, type=click.Path())
@click.option("--schema-out", type=click.Path())
@_config_option
def featurize(dataset, rules, layout, out, schema_out):
    """Fit a feature schema on a dataset and emit the matrix as CSV."""
    ds = load_dataset(dataset)
    rs = _load_rules(rules)
    pairs = ds.pairs()
    schema = fit_schema(pairs, rs)
    matrix = transform_matrix(pairs, schema, layout)
    export_matrix_csv(out, matrix, schema.dimension_names(layout))
    if schema_out:
        schema.save(schema_out)
    click.echo(f"wrote {matrix.shape[0]}x{matrix.shape[1]} matrix to {out}")


@main.command()
@click.option("--dataset", required=True, type=click.Path(exists=True))
@click.option("--rules", type=click.Path(exists=True))
@click.option("--features", "layout", type=_FEATURES, default="mcf", show_default=True)
@click.option("--model", "model_alias", type=_MODELS, default="mlp", show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--no-smote", is_flag=True, default=False)
@click.option("--out", required=True, type=click.Path())
@click.option("--schema-out", type=click.Path())
@_config_option
def train(dataset, rules, layout, model_alias, seed, no_smote, out, schema_out):
    """Train a model on a full dataset and persist it."""
    ds = load_dataset(dataset)
    rs = _load_rules(rules)
    pairs = ds.pairs()
    labels = np.asarray(ds.labels())
    schema = fit_schema(pairs, rs)
    X = transform_matrix(pairs, schema, layout)
    cfg = TrainConfig(rng_seed=seed)
    if not no_smote:
        X, labels = smote(X, labels, k=cfg.smote_k, seed=seed)
    model = make_classifier(_MODEL_ALIASES[model_alias], cfg)
    model.fit(X, labels)
    save_model(model, out, schema_id=schema.schema_id)
    if schema_out:
        schema.save(schema_out)
    click.echo(f"trained {model.kind} on {X.shape[0]} samples; saved to {out}")


@main.command(name="eval")
@click.option("--dataset", required=True, type=click.Path(exists=True))
@click.option("--rules", type=click.Path(exists=True))
@click.option("--features", "layout", type=_FEATURES, default="mcf", show_default=True)
@click.option("--model", "model_alias", type=_MODELS, default="mlp", show_default=True)
@click.option("--folds", default=10, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--arc-out", type=click.Path(), help="Write pooled ARC points as CSV.")
@_config_option
def eval_cmd(dataset, rules, layout, model_alias, folds, seed, arc_out):
    """Stratified cross-validation report for one model/feature pair."""
    ds = load_dataset(dataset)
    rs = _load_rules(rules)
    pairs = ds.pairs()
    labels = np.asarray(ds.labels())
    schema = fit_schema(pairs, rs)
    X = transform_matrix(pairs, schema, layout)
    cfg = TrainConfig(rng_seed=seed)
    report = cross_validate(
        lambda: make_classifier(_MODEL_ALIASES[model_alias], cfg),
        X,
        labels,
        k=folds,
        seed=seed,
        smote_k=cfg.smote_k,
    )
    click.echo(report.to_text(), nl=False)
    if arc_out:
        Path(arc_out).write_text(arc_csv(report.arc), "utf-8")


@main.command()
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--schema", "schema_path", required=True, type=click.Path(exists=True))
@click.option("--features", "layout", type=_FEATURES, default="mcf", show_default=True)
@click.option("--tau", default=0.5, show_default=True)
@click.option("--offline", is_flag=True, default=True)
@click.option("--cache-dir", type=click.Path())
@click.option("--fixtures", type=click.Path())
@click.argument("rules_file", type=click.Path(exists=True))
@_config_option
def classify(model_path, schema_path, layout, tau, offline, cache_dir, fixtures, rules_file):
    """Print a label or REJECT for each rule line in RULES_FILE."""
    model = load_model(model_path)
    schema = FeatureSchema.load(schema_path)
    if model.schema_id and model.schema_id != schema.schema_id:
        _fail("model was trained against a different feature schema")
    enricher = ReferenceEnricher(
        cache_dir=cache_dir,
        fixture_dir=fixtures,
        mode="offline" if offline else "live",
    )
    classifier = RejectingClassifier(model, tau)
    with open(rules_file, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                sig = parse_rule(line)
            except RuleParseError as exc:
                _fail(str(exc))
            ref_text = " ".join(
                resolved.text
                for ref in sig.references
                if (resolved := enricher.resolve(ref)).text
            )
            x = transform_matrix([(sig, ref_text)], schema, layout)
            decision = classifier.decide(x)[0]
            click.echo("REJECT" if decision.rejected else str(decision.label))


@main.command()
@click.option("--dataset", required=True, type=click.Path(exists=True))
@click.option("--rules", type=click.Path(exists=True))
@click.option("--features", "layout", type=_FEATURES, default="mcf", show_default=True)
@click.option("--model", "model_alias", type=_MODELS, default="mlp", show_default=True)
@click.option("--tau", default=0.5, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--state-dir", required=True, type=click.Path())
@click.option("--cache-dir", type=click.Path())
@click.option("--fixtures", type=click.Path())
@click.option("--offline", is_flag=True, default=True)
@click.option("--eval-folds", default=3, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@_config_option
def serve(dataset, rules, layout, model_alias, tau, seed, state_dir, cache_dir,
          fixtures, offline, eval_folds, host, port):
    """Train on the dataset and serve the triage HTTP API."""
    import uvicorn

    from .service import ServiceState, create_app

    state_dir = Path(state_dir)
    state_dir.mkdir(parents=True, exist_ok=True)
    state = ServiceState(
        ruleset=_load_rules(rules),
        base_dataset_path=dataset,
        journal_path=state_dir / "triage-journal.jsonl",
        labeled_path=state_dir / "labeled.jsonl",
        layout=layout,
        model_kind=_MODEL_ALIASES[model_alias],
        tau=tau,
        cfg=TrainConfig(rng_seed=seed),
        enricher=ReferenceEnricher(
            cache_dir=cache_dir,
            fixture_dir=fixtures,
            mode="offline" if offline else "live",
        ),
        eval_folds=eval_folds,
    )
    click.echo("training initial model ...")
    state.retrain()
    uvicorn.run(create_app(state), host=host, port=port)


if __name__ == "__main__":
    main()
