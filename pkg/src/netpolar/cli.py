"""Command line interface.

Subcommands: score, normalize, sweep, evaluate, generate. Exit codes:
0 on success, 1 when some rows/scores errored but others succeeded,
2 on fatal errors (bad usage, unreadable input, nothing computable).

Outputs are deterministic byte-for-byte for a given seed: JSON is
emitted with sorted keys and CSV with a fixed column order.
"""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from pathlib import Path

import click
import numpy as np

from .evaluation import (
    LabeledScore,
    mean_combine,
    read_labeled_csv,
    roc_from_arrays,
    windowed_auc,
)
from .graph import (
    Graph,
    graph_summary,
    joint_degree_matrix,
    load_edge_list,
    preprocess,
    write_edge_list,
    write_label_map,
    write_partition_csv,
)
from .normalize import denoise_value, null_ensembles
from .nullmodels import (
    NULL_KINDS,
    SBM_SCHEMES,
    gen_er,
    gen_powerlaw,
    gen_sbm,
    randomize,
)
from .partition import PARTITIONER_NAMES, make_partitioner
from .scores import SCORE_IDS, ScoreConfig, score_all
from .validation import spawn_seed

PARTIAL, FATAL = 1, 2


def _fail(message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(FATAL)


def _parse_scores(text: str) -> tuple[str, ...]:
    ids = tuple(s.strip() for s in text.split(",") if s.strip())
    unknown = [s for s in ids if s not in SCORE_IDS]
    if unknown:
        raise click.UsageError(
            f"unknown scores: {', '.join(unknown)}; valid: {', '.join(SCORE_IDS)}"
        )
    return ids or SCORE_IDS


def _parse_float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise click.UsageError(f"expected a comma-separated number list, got {text!r}")


def _load_graph(path: str) -> Graph:
    try:
        return preprocess(load_edge_list(path))
    except (OSError, ValueError) as exc:
        _fail(str(exc))


def _emit(text: str, output: str | None):
    if output:
        Path(output).write_text(text)
    else:
        click.echo(text, nl=False)


def _json_text(payload) -> str:
    return json.dumps(payload, sort_keys=True, indent=2, allow_nan=True) + "\n"


def _csv_text(fieldnames: list[str], rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def _fmt_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


@click.group()
def main():
    """Structural polarization scores with null-model normalization."""


_input_opt = click.option("--input", "input_path", required=True, type=click.Path(exists=True, dir_okay=False), help="Edge list file (two labels per line).")
_partitioner_opt = click.option("--partitioner", default="mincut", type=click.Choice(PARTITIONER_NAMES), show_default=True, help="Two-way partitioner.")
_scores_opt = click.option("--scores", default=",".join(SCORE_IDS), show_default=True, help="Comma-separated score ids.")
_seed_opt = click.option("--seed", default=0, show_default=True, type=int, help="Root random seed.")
_output_opt = click.option("--output", default=None, type=click.Path(dir_okay=False), help="Output path (default stdout).")
_format_opt = click.option("--format", "fmt", default="json", type=click.Choice(["json", "csv"]), show_default=True, help="Output format.")
_k_opt = click.option("--k", default=10, show_default=True, type=int, help="Influencers per side for RWC.")
_bigk_opt = click.option("--K", "big_k", default=0.01, show_default=True, type=float, help="Influencer fraction for ARWC and DP.")


def _score_rows(g: Graph, results) -> tuple[list[str], list[dict]]:
    summary = graph_summary(g)
    fields = [
        "score_id", "value", "flags", "error",
        "n", "m", "mean_degree", "degree_assortativity",
    ]
    rows = []
    for res in results:
        rows.append(
            {
                "score_id": res.score_id,
                "value": _fmt_cell(res.value),
                "flags": ";".join(res.flags),
                "error": _fmt_cell(res.error),
                "n": summary["n"],
                "m": summary["m"],
                "mean_degree": _fmt_cell(summary["mean_degree"]),
                "degree_assortativity": _fmt_cell(summary["degree_assortativity"]),
            }
        )
    return fields, rows


@main.command()
@_input_opt
@_partitioner_opt
@_scores_opt
@_k_opt
@_bigk_opt
@_seed_opt
@_output_opt
@_format_opt
@click.option("--partition-output", default=None, type=click.Path(dir_okay=False), help="Also write the node,block CSV of the partition.")
@click.option("--labelmap-output", default=None, type=click.Path(dir_okay=False), help="Also write the id,label CSV of the preprocessed graph.")
def score(input_path, partitioner, scores, k, big_k, seed, output, fmt,
          partition_output, labelmap_output):
    """Partition one graph and evaluate polarization scores."""
    ids = _parse_scores(scores)
    g = _load_graph(input_path)
    try:
        part = make_partitioner(partitioner, random_state=seed)
        labels = part.fit(g).labels_
    except Exception as exc:
        _fail(str(exc))
    cfg = ScoreConfig(k=k, K=big_k, dp_K=big_k, random_state=seed)
    results = score_all(g, labels, cfg, ids)
    if partition_output:
        write_partition_csv(g, labels, partition_output)
    if labelmap_output:
        write_label_map(g, labelmap_output)
    if fmt == "json":
        payload = {
            "graph": graph_summary(g),
            "partitioner": partitioner,
            "partition_sizes": [
                int(np.count_nonzero(labels == 0)),
                int(np.count_nonzero(labels == 1)),
            ],
            "seed": seed,
            "scores": [r.to_dict() for r in results],
        }
        _emit(_json_text(payload), output)
    else:
        fields, rows = _score_rows(g, results)
        _emit(_csv_text(fields, rows), output)
    if any(r.error is not None for r in results):
        sys.exit(PARTIAL)


@main.command()
@_input_opt
@_partitioner_opt
@_scores_opt
@_k_opt
@_bigk_opt
@click.option("--null", "null_kind", default="d1", type=click.Choice(NULL_KINDS), show_default=True, help="Null model for the ensemble.")
@click.option("--samples", default=500, show_default=True, type=int, help="Null samples per score.")
@click.option("--workers", default=1, show_default=True, type=int, help="Parallel workers (results are worker-count independent).")
@_seed_opt
@_output_opt
@_format_opt
def normalize(input_path, partitioner, scores, k, big_k, null_kind, samples,
              workers, seed, output, fmt):
    """Score a graph and normalize against a null-model ensemble."""
    ids = _parse_scores(scores)
    g = _load_graph(input_path)
    cfg = ScoreConfig(k=k, K=big_k, dp_K=big_k, random_state=seed)
    try:
        part = make_partitioner(partitioner, random_state=seed)
        labels = part.fit(g).labels_
        ensembles = null_ensembles(
            g,
            part,
            score_ids=ids,
            config=cfg,
            null_kind=null_kind,
            n_samples=samples,
            random_state=seed,
            n_jobs=workers,
            strict=False,
        )
    except Exception as exc:
        _fail(str(exc))
    raws = {r.score_id: r for r in score_all(g, labels, cfg, ids)}

    records = []
    partial = False
    for sid in ids:
        ens = ensembles[sid]
        raw = raws[sid]
        rec = {
            "score_id": sid,
            "null": ens.to_dict(),
            "raw": raw.value,
            "flags": list(raw.flags),
            "error": None,
        }
        if raw.error is not None:
            rec["error"] = raw.error
            rec["denoised"] = None
            rec["standardized"] = None
            partial = True
        elif ens.error is not None:
            rec["error"] = ens.error
            rec["denoised"] = None
            rec["standardized"] = None
            partial = True
        else:
            norm = denoise_value(raw, ens)
            rec["denoised"] = norm.denoised
            rec["standardized"] = norm.standardized
            rec["flags"] = list(norm.flags)
        records.append(rec)

    if fmt == "json":
        payload = {
            "graph": graph_summary(g),
            "partitioner": partitioner,
            "null": null_kind,
            "samples": samples,
            "seed": seed,
            "scores": records,
        }
        _emit(_json_text(payload), output)
    else:
        fields = [
            "score_id", "raw", "denoised", "standardized", "null_mean",
            "null_std", "null_stderr", "n_samples", "n_errors", "flags", "error",
        ]
        rows = []
        for rec in records:
            ens = rec["null"]
            rows.append(
                {
                    "score_id": rec["score_id"],
                    "raw": _fmt_cell(rec["raw"]),
                    "denoised": _fmt_cell(rec.get("denoised")),
                    "standardized": _fmt_cell(rec.get("standardized")),
                    "null_mean": _fmt_cell(ens["mean"]),
                    "null_std": _fmt_cell(ens["std"]),
                    "null_stderr": _fmt_cell(ens["stderr"]),
                    "n_samples": ens["n_samples"],
                    "n_errors": ens["n_errors"],
                    "flags": ";".join(rec["flags"]),
                    "error": _fmt_cell(rec["error"]),
                }
            )
        _emit(_csv_text(fields, rows), output)
    if partial:
        sys.exit(PARTIAL)


@main.command()
@click.option("--generator", required=True, type=click.Choice(["er", "powerlaw", "sbm"]), help="Synthetic graph family.")
@click.option("--n", default="1000", show_default=True, help="Node counts (comma list).")
@click.option("--mean-degree", default="4", show_default=True, help="Mean degrees (comma list; er and powerlaw).")
@click.option("--gamma", default="2.5", show_default=True, help="Power-law exponents (comma list).")
@click.option("--frac-small", default="0.3", show_default=True, help="Small-block fractions (comma list; sbm).")
@click.option("--k-in", default=4.5, show_default=True, type=float, help="Within-block expected degree (sbm).")
@click.option("--contrast", default=25.0, show_default=True, type=float, help="k_in / k_out ratio (sbm).")
@click.option("--scheme", default="high", show_default=True, help="SBM cross-edge schemes (comma list of low,medium,high).")
@click.option("--replicates", default=20, show_default=True, type=int, help="Graphs per parameter combination.")
@_partitioner_opt
@_scores_opt
@_k_opt
@_bigk_opt
@click.option("--normalize", "do_normalize", is_flag=True, help="Also denoise each score against a null ensemble.")
@click.option("--null", "null_kind", default="d1", type=click.Choice(NULL_KINDS), show_default=True)
@click.option("--samples", default=100, show_default=True, type=int, help="Null samples per graph when normalizing.")
@click.option("--workers", default=1, show_default=True, type=int)
@_seed_opt
@_output_opt
@click.option("--format", "fmt", default="csv", type=click.Choice(["json", "csv"]), show_default=True)
def sweep(generator, n, mean_degree, gamma, frac_small, k_in, contrast, scheme,
          replicates, partitioner, scores, k, big_k, do_normalize, null_kind,
          samples, workers, seed, output, fmt):
    """Score sweeps over synthetic graph families.

    Emits one row per (graph, score); graphs are generated over the
    cartesian product of the relevant parameter lists.
    """
    ids = _parse_scores(scores)
    ns = [int(x) for x in _parse_float_list(n)]
    cfg = ScoreConfig(k=k, K=big_k, dp_K=big_k, random_state=seed)

    combos: list[dict] = []
    if generator == "er":
        for nn in ns:
            for kbar in _parse_float_list(mean_degree):
                combos.append({"n": nn, "mean_degree": kbar})
    elif generator == "powerlaw":
        for nn in ns:
            for gam in _parse_float_list(gamma):
                for kbar in _parse_float_list(mean_degree):
                    combos.append({"n": nn, "gamma": gam, "mean_degree": kbar})
    else:
        schemes = [s.strip() for s in scheme.split(",") if s.strip()]
        bad = [s for s in schemes if s not in SBM_SCHEMES]
        if bad:
            raise click.UsageError(f"unknown sbm schemes: {', '.join(bad)}")
        for nn in ns:
            for frac in _parse_float_list(frac_small):
                for sch in schemes:
                    combos.append(
                        {"n": nn, "frac_small": frac, "scheme": sch,
                         "k_in": k_in, "contrast": contrast}
                    )

    param_names = sorted({key for combo in combos for key in combo})
    rows = []
    partial = False
    graph_index = 0
    for combo in combos:
        for rep in range(replicates):
            gseed = spawn_seed(seed, graph_index)
            pseed = spawn_seed(seed, graph_index, 1)
            network_id = f"{generator}-{graph_index:04d}"
            graph_index += 1
            base = {name: combo.get(name, "") for name in param_names}
            base.update({"network_id": network_id, "replicate": rep})
            try:
                if generator == "er":
                    m = int(round(combo["n"] * combo["mean_degree"] / 2.0))
                    raw = gen_er(combo["n"], m, gseed)
                elif generator == "powerlaw":
                    raw = gen_powerlaw(
                        combo["n"], combo["gamma"], combo["mean_degree"], gseed
                    )
                else:
                    raw, _ = gen_sbm(
                        combo["n"], combo["frac_small"], combo["k_in"],
                        combo["contrast"], combo["scheme"], gseed,
                    )
                g = preprocess(raw)
                part = make_partitioner(partitioner, random_state=pseed)
                labels = part.fit(g).labels_
                results = score_all(g, labels, cfg, ids)
                ensembles = None
                if do_normalize:
                    ensembles = null_ensembles(
                        g, part, score_ids=ids, config=cfg, null_kind=null_kind,
                        n_samples=samples, random_state=gseed, n_jobs=workers,
                        strict=False,
                    )
            except Exception as exc:
                partial = True
                for sid in ids:
                    row = dict(base)
                    row.update({"score_id": sid, "value": "", "flags": "",
                                "error": str(exc)})
                    rows.append(row)
                continue
            for res in results:
                row = dict(base)
                row.update(
                    {
                        "score_id": res.score_id,
                        "value": _fmt_cell(res.value),
                        "flags": ";".join(res.flags),
                        "error": _fmt_cell(res.error),
                    }
                )
                if res.error is not None:
                    partial = True
                if do_normalize:
                    ens = ensembles[res.score_id]
                    if res.error is None and ens.error is None:
                        norm = denoise_value(res, ens)
                        row["denoised"] = _fmt_cell(norm.denoised)
                        row["standardized"] = _fmt_cell(norm.standardized)
                        row["null_mean"] = _fmt_cell(ens.mean)
                        row["null_std"] = _fmt_cell(ens.std)
                    else:
                        if ens.error is not None:
                            partial = True
                            row["error"] = _fmt_cell(res.error or ens.error)
                        row["denoised"] = ""
                        row["standardized"] = ""
                        row["null_mean"] = ""
                        row["null_std"] = ""
                rows.append(row)

    fields = ["network_id"] + param_names + ["replicate", "score_id", "value"]
    if do_normalize:
        fields += ["denoised", "standardized", "null_mean", "null_std"]
    fields += ["flags", "error"]
    if fmt == "csv":
        _emit(_csv_text(fields, rows), output)
    else:
        _emit(_json_text(rows), output)
    if partial:
        sys.exit(PARTIAL)


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True, dir_okay=False), help="Labeled corpus CSV: network_id,label,score columns.")
@click.option("--scores", default=None, help="Score columns to evaluate (default: every known score id present).")
@click.option("--window", default=None, type=int, help="Windowed AUC window size (needs --covariate).")
@click.option("--covariate", default=None, help="Covariate column for the windowed AUC.")
@click.option("--combine", "do_combine", is_flag=True, help="Add the rescaled-mean combination of the evaluated scores.")
@_output_opt
@_format_opt
def evaluate(input_path, scores, window, covariate, do_combine, output, fmt):
    """ROC/AUC/Gini evaluation of scores on a labeled corpus."""
    try:
        ids, labels, columns = read_labeled_csv(input_path)
    except (OSError, ValueError) as exc:
        _fail(str(exc))
    if scores is None:
        wanted = [s for s in SCORE_IDS if s in columns]
        if not wanted:
            wanted = [name for name in columns if name != covariate]
    else:
        wanted = [s.strip() for s in scores.split(",") if s.strip()]
        missing = [s for s in wanted if s not in columns]
        if missing:
            _fail(f"score columns not in {input_path}: {', '.join(missing)}")
    if not wanted:
        _fail("no score columns to evaluate")
    if (window is None) != (covariate is None):
        raise click.UsageError("--window and --covariate go together")
    if covariate is not None and covariate not in columns:
        _fail(f"covariate column {covariate!r} not in {input_path}")

    score_columns = {name: columns[name] for name in wanted}
    if do_combine:
        try:
            combined, dropped = mean_combine(score_columns)
        except ValueError as exc:
            _fail(str(exc))
        score_columns["combined"] = combined

    positives = np.array([lab == "polarized" for lab in labels])
    results = {}
    for name, col in score_columns.items():
        try:
            curve = roc_from_arrays(col, positives)
        except ValueError as exc:
            _fail(str(exc))
        entry = {"auc": curve.auc, "gini": curve.gini}
        if window is not None:
            scored = [
                LabeledScore(ids[i], float(col[i]), labels[i],
                             {covariate: float(columns[covariate][i])})
                for i in range(len(ids))
            ]
            try:
                entry["windows"] = windowed_auc(scored, covariate, window)
            except ValueError as exc:
                _fail(str(exc))
        results[name] = entry
    payload = {"corpus": {"file": str(input_path), "networks": len(ids),
                          "positives": int(positives.sum())},
               "scores": results}
    if do_combine:
        payload["combined_from"] = sorted(
            name for name in score_columns if name != "combined"
        )
        payload["dropped_constant"] = sorted(dropped)
    if fmt == "json":
        _emit(_json_text(payload), output)
    else:
        fields = ["score_id", "auc", "gini"]
        rows = [
            {"score_id": name, "auc": _fmt_cell(entry["auc"]),
             "gini": _fmt_cell(entry["gini"])}
            for name, entry in results.items()
        ]
        _emit(_csv_text(fields, rows), output)


@main.command()
@click.option("--generator", required=True, type=click.Choice(["er", "powerlaw", "sbm", "d0", "d1", "d2"]), help="Family, or a dk-null of --input.")
@click.option("--input", "input_path", default=None, type=click.Path(exists=True, dir_okay=False), help="Observed graph (required for d0/d1/d2).")
@click.option("--n", default=1000, show_default=True, type=int)
@click.option("--m", default=None, type=int, help="Edge count (er).")
@click.option("--mean-degree", default=4.0, show_default=True, type=float)
@click.option("--gamma", default=2.5, show_default=True, type=float)
@click.option("--frac-small", default=0.3, show_default=True, type=float)
@click.option("--k-in", default=4.5, show_default=True, type=float)
@click.option("--contrast", default=25.0, show_default=True, type=float)
@click.option("--scheme", default="high", type=click.Choice(SBM_SCHEMES), show_default=True)
@click.option("--labels-output", default=None, type=click.Path(dir_okay=False), help="Write planted block labels (sbm) as node,block CSV.")
@click.option("--verify", is_flag=True, help="Check and report generator invariants on the output.")
@_seed_opt
@click.option("--output", required=True, type=click.Path(dir_okay=False), help="Edge list output path.")
def generate(generator, input_path, n, m, mean_degree, gamma, frac_small, k_in,
             contrast, scheme, labels_output, verify, seed, output):
    """Generate a synthetic graph or a dk-series null of an input."""
    planted = None
    try:
        if generator in NULL_KINDS:
            if input_path is None:
                raise click.UsageError(f"--generator {generator} needs --input")
            observed = preprocess(load_edge_list(input_path))
            g = randomize(observed, generator, seed)
        elif generator == "er":
            m_eff = m if m is not None else int(round(n * mean_degree / 2.0))
            g = gen_er(n, m_eff, seed)
        elif generator == "powerlaw":
            g = gen_powerlaw(n, gamma, mean_degree, seed)
        else:
            g, planted = gen_sbm(n, frac_small, k_in, contrast, scheme, seed)
    except click.UsageError:
        raise
    except Exception as exc:
        _fail(str(exc))

    write_edge_list(g, output)
    if labels_output:
        if planted is None:
            _fail("--labels-output only applies to --generator sbm")
        write_partition_csv(g, planted, labels_output)

    if verify:
        ok = True
        checks = []
        if generator in ("d1", "d2"):
            same_deg = np.array_equal(
                np.sort(observed.degrees), np.sort(g.degrees)
            ) and g.n == observed.n
            checks.append(("degree sequence preserved", same_deg))
            if generator == "d2":
                checks.append(
                    (
                        "joint degree matrix preserved",
                        joint_degree_matrix(observed) == joint_degree_matrix(g),
                    )
                )
        elif generator == "d0":
            checks.append(("node count preserved", g.n == observed.n))
            checks.append(("edge count preserved", g.m == observed.m))
        elif generator == "er":
            checks.append(("node count", g.n == n))
            checks.append(("edge count", g.m == m_eff))
        elif generator == "sbm":
            small = int(np.count_nonzero(planted == 0))
            expect = int(math.floor(frac_small * n + 0.5))
            checks.append(("small block size", small == expect))
        else:
            achieved = g.mean_degree
            checks.append(
                (f"mean degree {achieved:.3f} within 15% of {mean_degree}",
                 abs(achieved - mean_degree) <= 0.15 * mean_degree)
            )
        for name, passed in checks:
            click.echo(f"verify {'PASS' if passed else 'FAIL'}: {name}", err=True)
            ok = ok and passed
        if not ok:
            sys.exit(FATAL)


if __name__ == "__main__":
    main()
