"""Batch entry point: run the pipeline on files and emit reports offline.

Zero-flag runs use the same defaults as the library (theta 0.75, context
factor 0.5, log base 10, blend weights 0.3/0.3/0.4), so the packaged demo
scenarios reproduce their documented numbers without configuration.
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click

from . import fixtures
from .embedding import FixtureProvider, ReferenceProvider, RemoteProvider
from .errors import StratrecError
from .pipeline import analysis_from_document, run_analysis
from .registry import Registry, load_framework_spec, load_heuristic_set
from .reporting import MockGenerator, format_number, load_template, render_recommendation_report
from .scenario import load_scenario
from .semantic import kl_terms
from .validation import (
    StabilityScore,
    compare_to_expert,
    confidence_score,
    cross_validation_score,
    expert_agreement_score,
    load_expert_annotation,
    stability_score,
)


def _resolve_provider(provider: str, fixture_vectors: str | None, scenario_provider: str = ""):
    if fixture_vectors:
        return FixtureProvider.from_file(fixture_vectors)
    name = provider or scenario_provider or "reference"
    if name == "reference":
        return ReferenceProvider()
    packaged = fixtures.fixtures_dir() / "providers"
    for path in sorted(packaged.glob("*.json")):
        doc = json.loads(path.read_text(encoding="utf-8"))
        if doc.get("id") == name:
            return FixtureProvider(doc["id"], doc["dim"], doc["entries"])
    if name.startswith("http://") or name.startswith("https://"):
        return RemoteProvider("remote", name)
    raise click.ClickException(
        f"unknown provider '{name}'; use 'reference', a packaged table id, "
        "an http(s) endpoint, or --fixture-vectors PATH"
    )


def _parse_blend(weights: str) -> tuple[float, float, float]:
    try:
        a, b, g = (float(x) for x in weights.split(","))
    except ValueError:
        raise click.ClickException(f"--weights expects 'a,b,g', got '{weights}'")
    return a, b, g


@click.group()
def main():
    """Semantic framework-to-heuristic recommender."""


@main.command()
@click.option("--framework", "framework_path", required=True, type=click.Path(exists=True), help="Framework definition file.")
@click.option("--heuristics", "heuristics_path", required=True, type=click.Path(exists=True), help="Heuristic-set definition file.")
@click.option("--scenario", "scenario_path", required=True, type=click.Path(exists=True), help="Scenario file with actor parameter values.")
@click.option("--provider", default="", help="Provider id ('reference', packaged table id, or endpoint URL).")
@click.option("--fixture-vectors", type=click.Path(exists=True), default=None, help="Explicit token-vector table file.")
@click.option("--theta", default=0.75, show_default=True, help="Minimum score to keep a heuristic.")
@click.option("--lambda", "context_factor", default=0.5, show_default=True, help="Context weighting for parameter composition.")
@click.option("--log-base", default=10.0, show_default=True, help="Log base for divergence values.")
@click.option("--annotations", "annotations_path", type=click.Path(exists=True), default=None, help="Expert annotation file.")
@click.option("--out", "out_dir", type=click.Path(), default=None, help="Directory for analysis export, CSVs, and figures.")
@click.option("--format", "output_format", type=click.Choice(["text", "json"]), default="text", show_default=True)
def analyze(framework_path, heuristics_path, scenario_path, provider, fixture_vectors,
            theta, context_factor, log_base, annotations_path, out_dir, output_format):
    """Run the full pipeline on files and print ranked heuristics."""
    try:
        framework = load_framework_spec(Path(framework_path))
        heuristic_set = load_heuristic_set(Path(heuristics_path))
        scenario = load_scenario(Path(scenario_path))
        chosen = _resolve_provider(provider, fixture_vectors, scenario.provider_id)
        annotations = [load_expert_annotation(Path(annotations_path))] if annotations_path else []
        record = run_analysis(
            scenario, framework, heuristic_set, chosen,
            theta=theta if theta is not None else (scenario.theta or 0.75),
            context_factor=context_factor,
            annotations=annotations,
            log_base=log_base,
        )
    except StratrecError as exc:
        raise click.ClickException(str(exc))
    except ValueError as exc:
        raise click.ClickException(str(exc))

    if output_format == "json":
        click.echo(json.dumps(record.to_document(), indent=2, sort_keys=True))
    else:
        _print_analysis_text(record, heuristic_set)
    if out_dir:
        _write_analysis_outputs(record, heuristic_set, Path(out_dir))


def _print_analysis_text(record, heuristic_set) -> None:
    click.echo(f"analysis {record.id}  scenario={record.scenario_id}  provider={record.provider_id}  theta={format_number(record.theta)}")
    for actor in record.actors:
        click.echo(f"\nactor {actor.actor_id}")
        if not actor.recommendations:
            click.echo("  no matches: no heuristic cleared the threshold")
        for rec in actor.recommendations:
            name = _heuristic_name(heuristic_set, rec["heuristic_id"])
            click.echo(f"  {rec['rank']:>2}. [{rec['heuristic_id']}] {name}  score={rec['score']:.4f}")
        if actor.alignment:
            click.echo("  alignment path:")
            for row in actor.alignment:
                name = _heuristic_name(heuristic_set, row["heuristic_id"])
                click.echo(f"      [{row['heuristic_id']}] {name}  raw={row['raw']:.4f}  normalized={row['normalized']:.4f}")
    if record.skipped:
        click.echo("\nskipped columns:")
        for entry in record.skipped:
            click.echo(f"  {entry['heuristic_id']}: {entry['reason']}")
    dist = record.matrix_document["distributions"]
    top_ids = {str(r["heuristic_id"]) for a in record.actors for r in a.recommendations[:3]}
    if top_ids:
        click.echo("\ndistributions (top matches):")
        for hid in sorted(top_ids):
            if hid in dist:
                weights = ", ".join(f"{w:.4f}" for w in dist[hid])
                click.echo(f"  {hid}: [{weights}]")
    for entry in record.validation:
        click.echo(f"\nvalidation {entry['heuristic_id']}: e={_fmt_opt(entry['e'])} "
                   f"kl(system||expert)={_fmt_opt(entry['kl_system_expert'])} "
                   f"kl(expert||system)={_fmt_opt(entry['kl_expert_system'])}")


def _fmt_opt(value) -> str:
    return "n/a" if value is None else f"{value:.4f}"


def _heuristic_name(heuristic_set, hid) -> str:
    try:
        return heuristic_set.heuristic(hid).name
    except KeyError:
        return str(hid)


def _write_analysis_outputs(record, heuristic_set, out_dir: Path) -> None:
    from . import figures

    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "analysis.json").write_text(json.dumps(record.to_document(), indent=2, sort_keys=True))
    with (out_dir / "recommendations.csv").open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["scenario_id", "actor_id", "heuristic_id", "name", "score", "rank"])
        for actor in record.actors:
            for rec in actor.recommendations:
                writer.writerow([
                    record.scenario_id, actor.actor_id, rec["heuristic_id"],
                    _heuristic_name(heuristic_set, rec["heuristic_id"]), repr(rec["score"]), rec["rank"],
                ])
    with (out_dir / "distributions.csv").open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["heuristic_id", *record.matrix_document["rows"]])
        for hid, weights in sorted(record.matrix_document["distributions"].items()):
            writer.writerow([hid, *(repr(w) for w in weights)])
    names = {h.id: h.name for h in heuristic_set.heuristics}
    written = figures.render_all(record, names, out_dir / "figures")
    click.echo(f"\nwrote {out_dir}/analysis.json, recommendations.csv, distributions.csv "
               f"and {len(written)} figures under {out_dir}/figures")


@main.command()
@click.option("--mapping", "mapping_paths", multiple=True, type=click.Path(exists=True), help="Matrix export per provider (repeat for cross-validation).")
@click.option("--variant", "variant_paths", multiple=True, type=click.Path(exists=True), help="Matrix export per perturbed text variant (repeat).")
@click.option("--annotations", "annotations_path", type=click.Path(exists=True), default=None, help="Expert annotation file.")
@click.option("--scores", "scores_path", type=click.Path(exists=True), default=None, help="Precomputed {v, s, e} scores file.")
@click.option("--kl-pair", "kl_pair_path", type=click.Path(exists=True), default=None, help="File with {system, expert} distributions.")
@click.option("--heuristic", "heuristic_id", default=None, help="Heuristic id to validate (default: first shared).")
@click.option("--log-base", default=10.0, show_default=True)
@click.option("--weights", default="0.3,0.3,0.4", show_default=True, help="Blend weights a,b,g.")
@click.option("--format", "output_format", type=click.Choice(["text", "json"]), default="text", show_default=True)
def validate(mapping_paths, variant_paths, annotations_path, scores_path, kl_pair_path,
             heuristic_id, log_base, weights, output_format):
    """Score mapping robustness and expert agreement."""
    alpha, beta, gamma = _parse_blend(weights)
    result: dict = {}
    v = s = e = None
    system_dist = None
    try:
        if scores_path:
            doc = json.loads(Path(scores_path).read_text(encoding="utf-8"))
            v, s, e = doc.get("v"), doc.get("s"), doc.get("e")
            result["heuristic_id"] = doc.get("heuristic_id")
        param_rows: list[str] = []
        if mapping_paths:
            dists, hid, index, param_rows = _distributions_from_mappings(mapping_paths, heuristic_id)
            result["heuristic_id"] = hid
            v = cross_validation_score(dists, index)
            system_dist = dists[0]
        if variant_paths:
            dists, hid, index, rows = _distributions_from_mappings(variant_paths, heuristic_id)
            result.setdefault("heuristic_id", hid)
            param_rows = param_rows or rows
            stability: StabilityScore = stability_score(dists, index)
            s = stability.score
            result["stability_std_dev"] = stability.std_dev
            system_dist = system_dist or dists[0]
        if annotations_path:
            annotation = load_expert_annotation(Path(annotations_path))
            result.setdefault("heuristic_id", annotation.heuristic_id)
            if system_dist is not None and param_rows:
                index = max(range(len(system_dist)), key=lambda i: system_dist[i])
                target_param = param_rows[index]
            else:
                target_param = None
            ratings, system_weight = _ratings_for_annotation(annotation, system_dist, target_param)
            if ratings and system_weight is not None:
                e = expert_agreement_score(system_weight, ratings)
            expert_dists = annotation.distributions()
            if expert_dists and system_dist is not None:
                report = compare_to_expert(system_dist, expert_dists[0], log_base)
                result["kl_system_expert"] = report.kl_system_expert
                result["kl_expert_system"] = report.kl_expert_system
                result["kl_terms_system_expert"] = list(report.terms_system_expert)
        if kl_pair_path:
            doc = json.loads(Path(kl_pair_path).read_text(encoding="utf-8"))
            report = compare_to_expert(doc["system"], doc["expert"], log_base)
            result.setdefault("heuristic_id", doc.get("heuristic_id"))
            result["kl_system_expert"] = report.kl_system_expert
            result["kl_expert_system"] = report.kl_expert_system
            result["kl_terms_system_expert"] = list(report.terms_system_expert)
        result["v"], result["s"], result["e"] = v, s, e
        if v is not None and s is not None and e is not None:
            result["c"] = confidence_score(v, s, e, alpha, beta, gamma).combined
    except (StratrecError, ValueError, KeyError, json.JSONDecodeError) as exc:
        raise click.ClickException(str(exc))

    if output_format == "json":
        click.echo(json.dumps(result, indent=2, sort_keys=True))
        return
    click.echo(f"heuristic: {result.get('heuristic_id', 'n/a')}")
    for key, label in (("v", "cross-validation v"), ("s", "stability s"), ("e", "expert agreement e")):
        if result.get(key) is not None:
            click.echo(f"{label} = {result[key]:.4f}")
    if "stability_std_dev" in result:
        click.echo(f"stability population std dev = {result['stability_std_dev']:.4f}")
    if "c" in result:
        click.echo(f"confidence c = {result['c']:.4f}")
    if "kl_system_expert" in result:
        click.echo(f"kl(system||expert) = {result['kl_system_expert']:.4f}")
        click.echo(f"kl(expert||system) = {result['kl_expert_system']:.4f}")
        terms = ", ".join(f"{t:+.4f}" for t in result["kl_terms_system_expert"])
        click.echo(f"per-term (system||expert): [{terms}]")


def _distributions_from_mappings(paths, heuristic_id):
    docs = [json.loads(Path(p).read_text(encoding="utf-8")) for p in paths]
    shared = set(docs[0].get("distributions", {}))
    for doc in docs[1:]:
        shared &= set(doc.get("distributions", {}))
    if heuristic_id is not None:
        hid = str(heuristic_id)
        if hid not in shared:
            raise click.ClickException(f"heuristic '{heuristic_id}' not present in every mapping file")
    elif shared:
        hid = sorted(shared)[0]
    else:
        raise click.ClickException("mapping files share no heuristic distribution")
    dists = [tuple(float(w) for w in doc["distributions"][hid]) for doc in docs]
    index = max(range(len(dists[0])), key=lambda i: dists[0][i])
    rows = [str(r) for r in docs[0].get("rows", [])]
    return dists, hid, index, rows


def _ratings_for_annotation(annotation, system_dist, target_param):
    if target_param is not None:
        ratings = annotation.ratings_for(target_param)
    else:
        all_params = sorted({p for entry in annotation.experts if entry.ratings for p in entry.ratings})
        ratings = annotation.ratings_for(all_params[0]) if all_params else []
    system_weight = None
    if system_dist is not None:
        index = max(range(len(system_dist)), key=lambda i: system_dist[i])
        system_weight = system_dist[index]
    return ratings, system_weight


@main.command()
@click.option("--analysis", "analysis_path", required=True, type=click.Path(exists=True), help="Analysis export file (analyze --out or --format json).")
@click.option("--template", "template_path", type=click.Path(exists=True), default=None, help="Report template file (default: packaged strategy explanation).")
@click.option("--framework", "framework_path", type=click.Path(exists=True), default=None)
@click.option("--heuristics", "heuristics_path", type=click.Path(exists=True), default=None)
@click.option("--mock-generator", is_flag=True, default=True, show_default=True, help="Use the deterministic offline generator.")
@click.option("--generator-url", default=None, help="Remote generator endpoint (overrides --mock-generator).")
@click.option("--out", "out_dir", type=click.Path(), default=None, help="Directory for report text, JSON, and figures.")
@click.option("--format", "output_format", type=click.Choice(["text", "json"]), default="text", show_default=True)
def report(analysis_path, template_path, framework_path, heuristics_path,
           mock_generator, generator_url, out_dir, output_format):
    """Render the constrained narrative report for an analysis export."""
    try:
        doc = json.loads(Path(analysis_path).read_text(encoding="utf-8"))
        record = analysis_from_document(doc)
        framework = load_framework_spec(Path(framework_path) if framework_path else fixtures.framework_file("sixc"))
        heuristic_set = load_heuristic_set(
            Path(heuristics_path) if heuristics_path else fixtures.heuristic_set_file("thirty_six_stratagems")
        )
        template = load_template(Path(template_path) if template_path else fixtures.default_template_file())
        generator = MockGenerator()
        if generator_url:
            from .reporting import HttpGenerator

            generator = HttpGenerator(generator_url)
        rendered = render_recommendation_report(record, heuristic_set, framework, template, generator)
    except StratrecError as exc:
        raise click.ClickException(str(exc))
    except (KeyError, json.JSONDecodeError) as exc:
        raise click.ClickException(f"cannot read analysis export: {exc}")

    if rendered.violations:
        click.echo("template constraint violations:", err=True)
        for violation in rendered.violations:
            click.echo(f"  {violation.kind}: {violation.detail}", err=True)
    if output_format == "json":
        click.echo(json.dumps(rendered.to_document(), indent=2, sort_keys=True))
    else:
        click.echo(rendered.to_text())
    if out_dir:
        from . import figures

        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(json.dumps(rendered.to_document(), indent=2, sort_keys=True))
        (out / "report.txt").write_text(rendered.to_text())
        names = {h.id: h.name for h in heuristic_set.heuristics}
        written = figures.render_all(record, names, out / "figures")
        click.echo(f"wrote {out}/report.txt, report.json and {len(written)} figures under {out}/figures")
    if rendered.violations:
        sys.exit(3)


@main.command()
@click.option("--framework", "framework_paths", multiple=True, type=click.Path(exists=True))
@click.option("--heuristics", "heuristics_paths", multiple=True, type=click.Path(exists=True))
@click.option("--dir", "directory", type=click.Path(exists=True), default=None, help="Directory with frameworks/ and heuristics/ subfolders.")
@click.option("--format", "output_format", type=click.Choice(["text", "json"]), default="text", show_default=True)
def registry(framework_paths, heuristics_paths, directory, output_format):
    """List loadable frameworks and heuristic sets."""
    reg = Registry()
    try:
        if directory:
            reg.load_directory(directory)
        if not directory and not framework_paths and not heuristics_paths:
            reg.load_directory(fixtures.registry_dir())
        for path in framework_paths:
            reg.load_framework(Path(path))
        for path in heuristics_paths:
            reg.load_heuristic_set(Path(path))
    except StratrecError as exc:
        raise click.ClickException(str(exc))
    catalog = reg.list()
    if output_format == "json":
        click.echo(json.dumps(catalog.to_document(), indent=2, sort_keys=True))
        return
    click.echo("frameworks:")
    for fw in catalog.frameworks:
        click.echo(f"  {fw.id}: {fw.name} ({len(fw.parameters)} parameters)")
    click.echo("heuristic sets:")
    for hs in catalog.heuristic_sets:
        click.echo(f"  {hs.id}: {hs.name} ({len(hs.heuristics)} heuristics)")


if __name__ == "__main__":
    main()
