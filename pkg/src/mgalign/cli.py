"""Command line front end.

Exit codes: 0 success, 2 input or format problem, 3 solver failure,
4 verification found violations. Every command takes --seed and produces
byte-identical artifacts on reruns apart from manifest timing fields.
"""

from __future__ import annotations

import sys
import time

import click
import numpy as np

from ._version import __version__
from .barycenter import (
    ground_truth,
    hamming_loss,
    pairwise_triplet_correspondence,
    solve_multi,
    solve_pairwise,
)
from .bench import run_bench, save_bench_csv
from .errors import MgalignError
from .graphs import DEFAULT_K, affinity_pair, build_knn_graph
from .imle import ImleConfig
from .io import (
    build_manifest,
    load_embeddings,
    load_triplet_batch,
    manifest_path,
    save_checkpoint,
    save_trace_csv,
    write_json,
    write_output_with_manifest,
)
from .metric import (
    d_sga,
    random_graph_sampler,
    verify_constant_speed,
    verify_metric_axioms,
)
from .solvers import HeuristicConfig, solve
from .synthetic import SyntheticSpec, generate_synthetic_triplets
from .training import TrainConfig, adversarial_init, evaluate_matching, train

EXIT_INPUT = 2
EXIT_SOLVER = 3
EXIT_VERIFY = 4


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


@click.group()
@click.version_option(__version__)
def main():
    """Multi-graph alignment toolkit."""


@main.command("align")
@click.argument("first", type=click.Path(exists=True, dir_okay=False))
@click.argument("second", type=click.Path(exists=True, dir_okay=False))
@click.option("--k", default=DEFAULT_K, show_default=True, help="Neighbors per node.")
@click.option("--metric", default="cosine", show_default=True,
              type=click.Choice(["cosine", "euclidean"]))
@click.option("--solver", default="exact", show_default=True,
              type=click.Choice(["exact", "heuristic"]))
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--seed", default=0, show_default=True)
def cmd_align(first, second, k, metric, solver, out, seed):
    """Align two embedding files and write the matching report."""
    timings = {}
    start = time.perf_counter()
    try:
        g1 = build_knn_graph(load_embeddings(first), k=k, metric=metric)
        g2 = build_knn_graph(load_embeddings(second), k=k, metric=metric)
        aff = affinity_pair(g1, g2, metric)
    except MgalignError as exc:
        _fail(EXIT_INPUT, str(exc))
    timings["build_seconds"] = time.perf_counter() - start
    start = time.perf_counter()
    try:
        report = solve(aff, solver, HeuristicConfig(seed=seed))
    except MgalignError as exc:
        _fail(EXIT_SOLVER, str(exc))
    timings["solve_seconds"] = time.perf_counter() - start
    config = {"k": k, "metric": metric, "solver": solver}
    manifest = build_manifest("align", config, [first, second], seed, timings)
    write_output_with_manifest(out, report.to_dict(), manifest)
    click.echo(f"objective {report.objective:.9g} method {report.method} -> {out}")


@main.command("multi-align")
@click.argument("records", type=click.Path(exists=True, dir_okay=False))
@click.option("--k", default=DEFAULT_K, show_default=True)
@click.option("--metric", default="cosine", show_default=True,
              type=click.Choice(["cosine", "euclidean"]))
@click.option("--solver", default="exact", show_default=True,
              type=click.Choice(["exact", "heuristic"]))
@click.option("--mode", default="barycenter", show_default=True,
              type=click.Choice(["barycenter", "pairwise"]))
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--seed", default=0, show_default=True)
def cmd_multi_align(records, k, metric, solver, mode, out, seed):
    """Align all modalities of a JSON-lines triplet file."""
    try:
        batch, ids = load_triplet_batch(records)
        keff = min(k, max(1, batch.size - 1))
    except MgalignError as exc:
        _fail(EXIT_INPUT, str(exc))
    timings = {}
    start = time.perf_counter()
    cfg = HeuristicConfig(seed=seed)
    try:
        if mode == "barycenter":
            result = solve_multi(batch, k=keff, solver=solver, metric=metric, config=cfg)
            payload = result.to_dict()
            payload["ids"] = list(ids)
            payload["hamming_vs_identity"] = hamming_loss(
                result.matchings, ground_truth(batch)
            )
            payload["triplets"] = result.matchings.triplet_correspondence()
        else:
            reports = solve_pairwise(batch, k=keff, solver=solver, metric=metric, config=cfg)
            payload = {
                "ids": list(ids),
                "pairs": {
                    f"{a}-{b}": rep.to_dict() for (a, b), rep in reports.items()
                },
                "total_objective": float(sum(r.objective for r in reports.values())),
                "triplets": pairwise_triplet_correspondence(reports),
            }
    except MgalignError as exc:
        _fail(EXIT_SOLVER, str(exc))
    timings["solve_seconds"] = time.perf_counter() - start
    config = {"k": k, "metric": metric, "solver": solver, "mode": mode}
    manifest = build_manifest("multi-align", config, [records], seed, timings)
    write_output_with_manifest(out, payload, manifest)
    click.echo(f"total objective {payload['total_objective']:.9g} -> {out}")


@main.command("verify")
@click.option("--trials", default=200, show_default=True)
@click.option("--n", "size", default=4, show_default=True, help="Nodes per sampled graph.")
@click.option("--geodesic-pairs", default=20, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--mutant", is_flag=True, hidden=True,
              help="Self-test: verify a deliberately broken distance is flagged.")
def cmd_verify(trials, size, geodesic_pairs, seed, out, mutant):
    """Check the metric axioms and the constant-speed geodesic identity."""
    sampler = random_graph_sampler(size)
    distance = None
    if mutant:
        def distance(a, b, metric="euclidean"):
            return d_sga(a, b, metric) + 0.1 * (a.features.sum() - b.features.sum())

    timings = {}
    start = time.perf_counter()
    try:
        axioms = verify_metric_axioms(sampler, trials, seed=seed, distance=distance)
        rng = np.random.default_rng(seed + 1)
        speed_violations = []
        for _ in range(geodesic_pairs):
            g1, g2 = sampler(rng), sampler(rng)
            speed_violations.extend(verify_constant_speed(g1, g2))
    except MgalignError as exc:
        _fail(EXIT_SOLVER, str(exc))
    timings["verify_seconds"] = time.perf_counter() - start
    payload = {
        "trials": axioms.trials,
        "violations": axioms.violations,
        "constant_speed": {
            "pairs": geodesic_pairs,
            "violations": speed_violations,
        },
    }
    config = {"trials": trials, "n": size, "geodesic_pairs": geodesic_pairs, "mutant": mutant}
    manifest = build_manifest("verify", config, [], seed, timings)
    write_output_with_manifest(out, payload, manifest)
    bad = len(axioms.violations) + len(speed_violations)
    click.echo(f"{trials} trials, {geodesic_pairs} geodesic pairs, {bad} violations -> {out}")
    if bad:
        sys.exit(EXIT_VERIFY)


@main.command("train")
@click.option("--size", default=16, show_default=True)
@click.option("--raw-dim", default=8, show_default=True)
@click.option("--embed-dim", default=4, show_default=True)
@click.option("--margin", default=3.0, show_default=True)
@click.option("--sigma", default=1.0, show_default=True)
@click.option("--epochs", default=50, show_default=True)
@click.option("--learning-rate", default=2.0, show_default=True)
@click.option("--alpha", default=1.0, show_default=True)
@click.option("--surrogate-weight", default=0.5, show_default=True)
@click.option("--k", default=DEFAULT_K, show_default=True)
@click.option("--metric", default="euclidean", show_default=True,
              type=click.Choice(["cosine", "euclidean"]))
@click.option("--solver", default="heuristic", show_default=True,
              type=click.Choice(["exact", "heuristic"]))
@click.option("--imle-config", type=click.Path(exists=True, dir_okay=False),
              help="JSON file overriding the estimator settings.")
@click.option("--seed", default=0, show_default=True)
@click.option("--out-prefix", required=True,
              help="Writes <prefix>.checkpoint.json, <prefix>.trace.csv, <prefix>.eval.json.")
def cmd_train(size, raw_dim, embed_dim, margin, sigma, epochs, learning_rate, alpha,
              surrogate_weight, k, metric, solver, imle_config, seed, out_prefix):
    """Train encoders on synthetic triplets with solver-based gradients."""
    try:
        spec = SyntheticSpec(
            size=size, raw_dim=raw_dim, embed_dim=embed_dim,
            margin=margin, sigma=sigma, seed=seed,
        )
        data = generate_synthetic_triplets(spec)
        imle = (
            ImleConfig.load(imle_config)
            if imle_config
            else ImleConfig(noise_scale=5.0, samples=3, seed=seed)
        )
    except MgalignError as exc:
        _fail(EXIT_INPUT, str(exc))
    cfg = TrainConfig(
        alpha=alpha, surrogate_weight=surrogate_weight, learning_rate=learning_rate,
        epochs=epochs, imle=imle, k=k, metric=metric, solver=solver,
        heuristic=HeuristicConfig(restarts=1, seed=seed), seed=seed,
    )
    timings = {}
    start = time.perf_counter()
    try:
        encoders = adversarial_init(
            data.views, raw_dim, embed_dim, k=k, metric=metric, solver=solver, base_seed=seed
        )
        result = train(data.views, encoders, cfg)
        held = generate_synthetic_triplets(spec, data_seed=seed + 10_000)
        accuracy = evaluate_matching(
            held.views, result.encoders, k=k, solver=solver, metric=metric,
            heuristic=HeuristicConfig(restarts=2, seed=seed),
        )
    except MgalignError as exc:
        _fail(EXIT_SOLVER, str(exc))
    timings["train_seconds"] = time.perf_counter() - start
    config = {
        "spec": {"size": size, "raw_dim": raw_dim, "embed_dim": embed_dim,
                 "margin": margin, "sigma": sigma},
        "train": {"alpha": alpha, "surrogate_weight": surrogate_weight,
                  "learning_rate": learning_rate, "epochs": epochs, "k": k,
                  "metric": metric, "solver": solver},
        "imle": cfg.imle.to_dict(),
    }
    manifest = build_manifest("train", config, [], seed, timings)
    eval_path = f"{out_prefix}.eval.json"
    write_output_with_manifest(
        eval_path,
        {"held_out_accuracy": accuracy, "final_hamming": result.trace[-1].hamming},
        manifest,
    )
    save_checkpoint(
        f"{out_prefix}.checkpoint.json", result.encoders, result.decoders,
        epoch=epochs, seeds={"seed": seed, "imle_seed": cfg.imle.seed},
    )
    save_trace_csv(f"{out_prefix}.trace.csv", result.trace, manifest_path(eval_path).name)
    click.echo(f"held-out accuracy {accuracy:.3f} -> {out_prefix}.*")


@main.command("bench")
@click.option("--modalities", default="3,4,5,6", show_default=True,
              help="Comma-separated K values.")
@click.option("--sizes", default="8,16,32,64", show_default=True,
              help="Comma-separated batch sizes.")
@click.option("--solver", default="heuristic", show_default=True,
              type=click.Choice(["exact", "heuristic"]))
@click.option("--k", default=DEFAULT_K, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def cmd_bench(modalities, sizes, solver, k, seed, out):
    """Compare K barycenter solves against K(K-1)/2 pairwise solves."""
    try:
        kvals = [int(x) for x in modalities.split(",") if x]
        bvals = [int(x) for x in sizes.split(",") if x]
    except ValueError as exc:
        _fail(EXIT_INPUT, f"bad grid: {exc}")
    timings = {}
    start = time.perf_counter()
    try:
        rows = run_bench(kvals, bvals, solver=solver, k=k, seed=seed)
    except MgalignError as exc:
        _fail(EXIT_SOLVER, str(exc))
    timings["bench_seconds"] = time.perf_counter() - start
    config = {"modalities": kvals, "sizes": bvals, "solver": solver, "k": k}
    manifest = build_manifest("bench", config, [], seed, timings)
    mname = manifest_path(out).name
    save_bench_csv(out, rows, mname)
    manifest["outputs"] = [str(out)]
    write_json(manifest_path(out), manifest)
    counts = sorted({(r.modalities, r.mode, r.solves) for r in rows})
    click.echo("; ".join(f"K={a} {b}:{c}" for a, b, c in counts) + f" -> {out}")


if __name__ == "__main__":
    main()
