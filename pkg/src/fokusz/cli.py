"""Command-line entry point wiring the pipeline:

    fokusz run       query a VLM endpoint over the stimulus grid
    fokusz code      turn parsed responses into coded records
    fokusz analyze   profiles, deltas, indefiniteness, statistics
    fokusz cluster   strategy vectors, K-means, elbow selection
    fokusz power     effect size and required-N from a contingency CSV
    fokusz simulate  synthesize trials from a strategy profile
    fokusz report    human-readable tables plus plot-data JSON

Outputs are byte-stable across runs on identical inputs: sort keys are
fixed and floats are printed with 4 decimals. Linguistic exclusions are
data, not failures; only I/O and usage errors exit nonzero.
"""

from __future__ import annotations

import argparse
import io
import json
import statistics
import sys
from pathlib import Path

from . import cluster as cluster_mod
from . import coder, conllu, corpus, metrics, simgen, stats
from .errors import EmptyDataset, FokuszError, OrphanRecord

COND_ORDER = (corpus.FocusCondition.OBJECT_FOCUS, corpus.FocusCondition.SUBJECT_FOCUS)


def _fmt(x) -> str:
    return f"{float(x):.4f}"


def _write_json(obj, path: Path) -> None:
    corpus.atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n")


def _write_csv(header: list[str], rows: list[list], path: Path) -> None:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(str(cell) for cell in row) + "\n")
    corpus.atomic_write_text(path, buf.getvalue())


# --------------------------------------------------------------------------
# shared analysis assembly
# --------------------------------------------------------------------------


def _load_joined(trials_path, coded_path, exclude_sources=()):
    trials = corpus.load_trials(trials_path)
    coded = corpus.load_coded(coded_path)
    if exclude_sources:
        excluded = set(exclude_sources)
        keep_ids = {t.trial_id for t in trials if t.source_id not in excluded}
        trials = [t for t in trials if t.trial_id in keep_ids]
        coded = [c for c in coded if c.trial_id in keep_ids]
    return trials, coded


def _indefiniteness_cells(coded, trials):
    """Per (source, unit, condition) indefiniteness; humans pool per participant.

    VLM sources group by source_id with run_index as the pairing unit;
    human participants pool under the group "human" with source_id as the
    unit, matching per-participant analysis.
    """
    by_id = {t.trial_id: t for t in trials}
    grouped: dict[tuple, list] = {}
    kinds: dict[str, corpus.SourceKind] = {}
    for record in coded:
        trial = by_id.get(record.trial_id)
        if trial is None:
            raise OrphanRecord(f"coded record {record.trial_id!r} has no trial")
        if trial.source_kind is corpus.SourceKind.HUMAN:
            group, unit = "human", trial.source_id
        else:
            group, unit = trial.source_id, trial.run_index
        kinds[group] = trial.source_kind
        grouped.setdefault((group, unit, trial.condition), []).append(record)
    cells = {}
    for key in sorted(grouped, key=lambda k: (k[0], str(k[1]), k[2].value)):
        value = metrics.indefiniteness_proportion(grouped[key])
        if value is not None:
            cells[key] = (value, len(grouped[key]))
    return cells, kinds


def _indefiniteness_stats(cells, kinds):
    """Omnibus Kruskal-Wallis over VLM group x condition cells, then pairwise
    Wilcoxon (per group, across conditions, paired by unit) with Bonferroni."""
    notices = []
    groups: dict[tuple, list[float]] = {}
    for (group, unit, cond), (value, _n) in cells.items():
        groups.setdefault((group, cond), []).append(value)

    vlm_groups = {k: v for k, v in groups.items() if kinds[k[0]] is not corpus.SourceKind.HUMAN}
    omnibus = None
    if len(vlm_groups) >= 2:
        try:
            omnibus = stats.kruskal_wallis([vlm_groups[k] for k in sorted(vlm_groups)]).to_json()
            omnibus["groups"] = [f"{g}:{c.value}" for g, c in sorted(vlm_groups)]
        except FokuszError as exc:
            notices.append(f"omnibus test skipped: {exc}")
    else:
        notices.append("omnibus test skipped: fewer than two model-condition groups")

    pairwise = []
    raw_ps = []
    for group in sorted({g for g, _c in groups}):
        units_obj = {
            unit: value
            for (g, unit, cond), (value, _n) in cells.items()
            if g == group and cond is corpus.FocusCondition.OBJECT_FOCUS
        }
        units_subj = {
            unit: value
            for (g, unit, cond), (value, _n) in cells.items()
            if g == group and cond is corpus.FocusCondition.SUBJECT_FOCUS
        }
        shared = sorted(set(units_obj) & set(units_subj), key=str)
        if len(shared) < 1:
            notices.append(f"pairwise test skipped for {group}: no paired units")
            continue
        x = [units_subj[u] for u in shared]
        y = [units_obj[u] for u in shared]
        try:
            result = stats.wilcoxon_signed_rank(x, y)
        except FokuszError as exc:
            notices.append(f"pairwise test skipped for {group}: {exc}")
            continue
        entry = result.to_json()
        entry.update(
            {
                "group": group,
                "n_pairs": len(shared),
                "median_subj": statistics.median(x),
                "median_obj": statistics.median(y),
            }
        )
        pairwise.append(entry)
        raw_ps.append(result.p_value)
    if raw_ps:
        for entry, p_adj in zip(pairwise, stats.bonferroni(raw_ps)):
            entry["p_bonf"] = p_adj
    if len(groups) <= 1:
        notices.append("single-source dataset: pairwise comparisons limited")
    return {"kruskal_wallis": omnibus, "pairwise_wilcoxon": pairwise, "notices": notices}


def _analysis_bundle(trials, coded):
    profiles = metrics.build_profiles(coded, trials)
    if all(p.n_categorised == 0 for p in profiles):
        raise EmptyDataset("no categorisable records in the dataset")
    deltas, skipped = metrics.build_deltas(profiles)
    cells, kinds = _indefiniteness_cells(coded, trials)
    stats_obj = _indefiniteness_stats(cells, kinds)
    for key in skipped:
        stats_obj["notices"].append(f"delta skipped for source/run {key}: missing condition")
    return profiles, deltas, cells, kinds, stats_obj


def _proportion_rows(profiles):
    rows = []
    for profile in profiles:
        props = profile.proportions()
        for label in corpus.IS_TYPE_LABELS:
            rows.append(
                [
                    profile.source_id,
                    profile.run_index,
                    profile.condition.value,
                    label,
                    _fmt(props[label]),
                    profile.n_categorised,
                ]
            )
    return rows


def _delta_rows(deltas):
    return [
        [d.source_id, d.run_index, _fmt(d.p_topic_obj), _fmt(d.p_topic_subj), _fmt(d.delta)]
        for d in deltas
    ]


def _indef_rows(cells):
    return [
        [group, unit, cond.value, _fmt(value), n]
        for (group, unit, cond), (value, n) in cells.items()
    ]


def _plot_data(profiles, deltas, cells, kinds):
    # Figure-style series: per-condition IS-type medians per VLM source and
    # the human inter-quartile range; per-run topicalisation deltas; and
    # per-unit Focus indefiniteness.
    dist = []
    by_source: dict[tuple, list] = {}
    for profile in profiles:
        if profile.n_categorised == 0:
            continue
        by_source.setdefault((profile.source_id, profile.source_kind, profile.condition), []).append(
            profile.proportions()
        )
    for cond in COND_ORDER:
        for label in corpus.IS_TYPE_LABELS:
            human_values = []
            vlm_medians = []
            for (source_id, kind, pcond), plist in sorted(
                by_source.items(), key=lambda kv: (kv[0][0], kv[0][2].value)
            ):
                if pcond is not cond:
                    continue
                values = [p[label] for p in plist]
                if kind is corpus.SourceKind.HUMAN:
                    human_values.extend(values)
                else:
                    vlm_medians.append({"source_id": source_id, "median": statistics.median(values)})
            entry = {"condition": cond.value, "is_type": label, "vlm_medians": vlm_medians}
            if human_values:
                qs = statistics.quantiles(human_values, n=4) if len(human_values) > 1 else [
                    human_values[0]
                ] * 3
                entry["human"] = {
                    "q1": qs[0],
                    "median": statistics.median(human_values),
                    "q3": qs[2],
                    "n": len(human_values),
                }
            else:
                entry["human"] = None
            dist.append(entry)

    delta_series: dict[str, dict] = {}
    for d in deltas:
        series = delta_series.setdefault(d.source_id, {"source_id": d.source_id, "deltas": []})
        series["deltas"].append(d.delta)
    indef_series: dict[tuple, dict] = {}
    for (group, unit, cond), (value, _n) in cells.items():
        series = indef_series.setdefault(
            (group, cond),
            {"source_id": group, "condition": cond.value, "values": []},
        )
        series["values"].append(value)
    return {
        "distribution": dist,
        "delta": [delta_series[k] for k in sorted(delta_series)],
        "indefiniteness": [indef_series[k] for k in sorted(indef_series, key=lambda k: (k[0], k[1].value))],
    }


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def cmd_run(args) -> int:
    from . import runner

    manifest = corpus.load_manifest(args.manifest)
    conditions = tuple(corpus.FocusCondition.parse(c) for c in args.conditions.split(","))
    config = runner.RunConfig(
        endpoint=args.endpoint,
        model=args.model,
        runs=args.runs,
        conditions=conditions,
        base_seed=args.seed,
        max_inflight=args.max_inflight,
        max_attempts=args.max_attempts,
        backoff_base=args.backoff_base,
        timeout=args.timeout,
        send_seed=not args.no_send_seed,
    )
    summary = runner.run_experiment(
        config, manifest, args.out, api_key=args.api_key, resume=args.resume
    )
    print(
        f"planned={summary.planned} skipped={summary.skipped} "
        f"succeeded={summary.succeeded} failed={len(summary.failed)} "
        f"requests={summary.requests_issued}"
    )
    for item_id, cond, run, err in summary.failed:
        print(f"FAILED {item_id} {cond} run={run}: {err}", file=sys.stderr)
    return 0 if not summary.failed else 1


def cmd_code(args) -> int:
    manifest = corpus.load_manifest(args.manifest)
    by_item = {item.item_id: item for item in manifest}
    trials = corpus.load_trials(args.trials)
    corpus.resolve_items(trials, manifest)
    sentences = conllu.load_conllu(args.conllu)
    grouped, unkeyed = conllu.group_by_response(sentences)

    records = []
    n_excluded = 0
    trial_ids = set()
    for trial in sorted(trials, key=lambda t: t.trial_id):
        trial_ids.add(trial.trial_id)
        sents = grouped.get(trial.trial_id, [])
        if not sents:
            record = corpus.CodedRecord(
                trial_id=trial.trial_id,
                exclusion_reason=coder.ExclusionReason.PARSE_FAILURE.value,
            )
        else:
            record = coder.code_response(sents, by_item[trial.item_id], trial.condition, trial.trial_id)
        if not record.categorised:
            n_excluded += 1
        records.append(record)
    corpus.save_coded(records, args.out)

    unmatched = sorted(rid for rid in grouped if rid not in trial_ids)
    report = {
        "trials": len(trials),
        "coded": len(records),
        "excluded": n_excluded,
        "unmatched_response_ids": unmatched,
        "sentences_without_response_id": len(unkeyed),
    }
    report_path = Path(args.report) if args.report else Path(args.out).with_suffix(".report.json")
    _write_json(report, report_path)
    print(f"coded {len(records)} trials ({n_excluded} excluded); report at {report_path}")
    return 0


def cmd_analyze(args) -> int:
    exclude = _read_source_list(args.exclude_sources) if args.exclude_sources else ()
    trials, coded = _load_joined(args.trials, args.coded, exclude)
    profiles, deltas, cells, kinds, stats_obj = _analysis_bundle(trials, coded)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(
        ["source_id", "run_index", "condition", "is_type", "proportion", "n"],
        _proportion_rows(profiles),
        out / "proportions.csv",
    )
    _write_csv(
        ["source_id", "run_index", "p_topic_obj", "p_topic_subj", "delta"],
        _delta_rows(deltas),
        out / "deltas.csv",
    )
    _write_csv(
        ["source_id", "unit", "condition", "proportion", "n"],
        _indef_rows(cells),
        out / "indefiniteness.csv",
    )
    _write_json(stats_obj, out / "stats.json")
    plots = _plot_data(profiles, deltas, cells, kinds)
    for name, payload in plots.items():
        _write_json(payload, out / f"plot_{name}.json")
    print(f"wrote proportions/deltas/indefiniteness/stats to {out}")
    return 0


def _read_source_list(path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [line.strip() for line in fh if line.strip()]


def cmd_cluster(args) -> int:
    trials, coded = _load_joined(args.trials, args.coded)
    profiles = metrics.build_profiles(coded, trials)
    if all(p.n_categorised == 0 for p in profiles):
        raise EmptyDataset("no categorisable records in the dataset")
    vectors = cluster_mod.build_vectors(profiles)

    curve = None
    if args.k is not None:
        k = args.k
    else:
        result = cluster_mod.elbow(
            vectors, range(args.k_min, args.k_max + 1), seed=args.seed, restarts=args.restarts
        )
        k = result.k
        curve = result
        flag = " (low confidence)" if result.low_confidence else ""
        print(f"elbow selected k={k}{flag}")
    clustering = cluster_mod.kmeans(vectors, k, seed=args.seed, restarts=args.restarts)

    rows = [[sid, cl] for sid, cl in sorted(clustering.assignments.items())]
    _write_csv(["source_id", "cluster"], rows, Path(args.out_assignments))
    if args.out_curve:
        payload = []
        if curve is not None:
            payload = [{"k": kk, "inertia": inertia} for kk, inertia in curve.curve]
        else:
            payload = [{"k": k, "inertia": clustering.inertia}]
        _write_json(payload, Path(args.out_curve))
    if args.exclude_cluster is not None:
        keep = sorted(sid for sid, cl in clustering.assignments.items() if cl != args.exclude_cluster)
        corpus.atomic_write_text(Path(args.out_keep), "\n".join(keep) + ("\n" if keep else ""))
        print(f"kept {len(keep)} sources outside cluster {args.exclude_cluster} -> {args.out_keep}")
    sizes = {}
    for cl in clustering.assignments.values():
        sizes[cl] = sizes.get(cl, 0) + 1
    print(f"k={clustering.k} sizes={[sizes.get(i, 0) for i in range(clustering.k)]} inertia={_fmt(clustering.inertia)}")
    return 0


def cmd_power(args) -> int:
    table = stats.ContingencyTable.from_csv(args.table)
    test = stats.chi_square(table)
    v = stats.cramers_v(table)
    df = args.df if args.df is not None else (table.r - 1) * (table.c - 1)
    result = stats.required_n(v, df, args.alpha, args.target_power)
    payload = result.to_json()
    payload["cramers_v"] = v
    payload["chi_square"] = test.to_json()
    if args.out:
        _write_json(payload, Path(args.out))
    print(f"V={_fmt(v)} w={_fmt(result.effect_w)} df={df} required_n={result.required_n} "
          f"achieved_power={_fmt(result.achieved_power)}")
    return 0


def cmd_simulate(args) -> int:
    if args.list_profiles:
        for name in sorted(simgen.BUNDLED_PROFILES):
            print(name)
        return 0
    if not args.out_dir:
        raise FokuszError("--out-dir is required unless --list-profiles is given")
    profile = _resolve_profile(args.profile)
    stimuli = corpus.load_manifest(args.manifest) if args.manifest else simgen.demo_stimuli()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    all_trials, all_parses, all_gold = [], [], []
    for run in range(args.runs):
        trials, parses, gold = simgen.generate(
            profile,
            stimuli,
            args.per_condition,
            seed=args.seed,
            source_id=args.source_id or profile.name,
            run_index=run,
        )
        all_trials.extend(trials)
        all_parses.extend(parses)
        all_gold.extend(gold)
    corpus.save_trials(all_trials, out / "trials.jsonl")
    conllu.save_conllu(all_parses, out / "responses.conllu")
    corpus.save_coded(all_gold, out / "gold_coded.jsonl")
    if not args.manifest:
        corpus.save_manifest(stimuli, out / "manifest.csv")
    print(f"generated {len(all_trials)} trials into {out}")
    return 0


def _resolve_profile(spec: str) -> simgen.StrategyProfile:
    if spec in simgen.BUNDLED_PROFILES:
        return simgen.BUNDLED_PROFILES[spec]
    path = Path(spec)
    if path.exists():
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
        return simgen.StrategyProfile(
            name=obj["name"],
            distributions={
                corpus.FocusCondition.parse(cond): dist
                for cond, dist in obj["distributions"].items()
            },
            indefinite_rate={
                corpus.FocusCondition.parse(cond): rate
                for cond, rate in obj["indefinite_rate"].items()
            },
        )
    raise FokuszError(
        f"unknown profile {spec!r}; use a bundled name (see --list-profiles) or a JSON file"
    )


def cmd_report(args) -> int:
    exclude = _read_source_list(args.exclude_sources) if args.exclude_sources else ()
    trials, coded = _load_joined(args.trials, args.coded, exclude)
    profiles, deltas, cells, kinds, stats_obj = _analysis_bundle(trials, coded)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    lines = []
    lines.append("IS-type distribution per source and condition (proportions of categorised)")
    header = ["source", "condition"] + list(corpus.IS_TYPE_LABELS) + ["n", "excluded"]
    lines.append("  ".join(f"{h:>12}" for h in header))
    by_source: dict[str, list] = {}
    for profile in profiles:
        by_source.setdefault(profile.source_id, []).append(profile)
    for source_id in sorted(by_source):
        merged = metrics.merge_profiles(by_source[source_id], source_id)
        for cond in COND_ORDER:
            profile = merged.get(cond)
            if profile is None:
                continue
            props = profile.proportions()
            row = [source_id[:12], cond.value]
            row += [_fmt(props[label]) for label in corpus.IS_TYPE_LABELS]
            row += [str(profile.n_categorised), str(profile.n_excluded)]
            lines.append("  ".join(f"{cell:>12}" for cell in row))
    lines.append("")
    lines.append("Topicalisation delta per source (mean over runs)")
    lines.append("  ".join(f"{h:>12}" for h in ["source", "mean_delta", "runs"]))
    by_delta: dict[str, list] = {}
    for d in deltas:
        by_delta.setdefault(d.source_id, []).append(d.delta)
    for source_id in sorted(by_delta):
        values = by_delta[source_id]
        lines.append(
            "  ".join(
                f"{cell:>12}"
                for cell in [source_id[:12], _fmt(sum(values) / len(values)), str(len(values))]
            )
        )
    lines.append("")
    lines.append("Median Focus indefiniteness per group and condition")
    lines.append("  ".join(f"{h:>12}" for h in ["group", "condition", "median", "units"]))
    by_group: dict[tuple, list] = {}
    for (group, unit, cond), (value, _n) in cells.items():
        by_group.setdefault((group, cond), []).append(value)
    for group, cond in sorted(by_group, key=lambda k: (k[0], k[1].value)):
        values = by_group[(group, cond)]
        lines.append(
            "  ".join(
                f"{cell:>12}"
                for cell in [group[:12], cond.value, _fmt(statistics.median(values)), str(len(values))]
            )
        )
    lines.append("")
    if args.clusters:
        lines.append("Cluster assignments")
        with open(args.clusters, encoding="utf-8") as fh:
            for line in fh.read().splitlines()[1:]:
                lines.append(f"  {line}")
        lines.append("")

    corpus.atomic_write_text(out / "report.txt", "\n".join(lines) + "\n")
    _write_json(stats_obj, out / "stats.json")
    plots = _plot_data(profiles, deltas, cells, kinds)
    for name, payload in plots.items():
        _write_json(payload, out / f"plot_{name}.json")
    print(f"report written to {out / 'report.txt'}")
    return 0


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fokusz", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="query a VLM endpoint over the stimulus grid")
    p.add_argument("--endpoint", required=True, help="chat-completions URL")
    p.add_argument("--model", required=True, help="model identifier sent in the request")
    p.add_argument("--manifest", required=True, help="stimulus manifest CSV")
    p.add_argument("--out", required=True, help="trials JSONL to append to")
    p.add_argument("--runs", type=int, default=30, help="repeated runs per condition (default 30)")
    p.add_argument("--conditions", default="OBJ_FOC,SUBJ_FOC", help="comma list of conditions")
    p.add_argument("--max-inflight", type=int, default=4, help="concurrent requests")
    p.add_argument("--resume", action="store_true", help="skip (item, condition, run) already persisted")
    p.add_argument("--seed", type=int, default=0, help="base seed; run r uses seed+r")
    p.add_argument("--timeout", type=float, default=60.0, help="request timeout in seconds")
    p.add_argument("--max-attempts", type=int, default=3, help="attempts per request")
    p.add_argument("--backoff-base", type=float, default=0.5, help="exponential backoff base seconds")
    p.add_argument("--no-send-seed", action="store_true", help="omit seed from request bodies")
    p.add_argument("--api-key", default=None, help="overrides the FOKUSZ_API_KEY environment variable")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("code", help="code parsed responses into IS-type records")
    p.add_argument("--trials", required=True)
    p.add_argument("--conllu", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="coded JSONL output")
    p.add_argument("--report", default=None, help="sidecar report path (default <out>.report.json)")
    p.set_defaults(func=cmd_code)

    p = sub.add_parser("analyze", help="profiles, deltas, indefiniteness, statistics")
    p.add_argument("--trials", required=True)
    p.add_argument("--coded", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--exclude-sources", default=None, help="file with one source_id per line to drop")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("cluster", help="strategy vectors, K-means, elbow")
    p.add_argument("--trials", required=True)
    p.add_argument("--coded", required=True)
    p.add_argument("--k", type=int, default=None, help="fixed k (skips elbow)")
    p.add_argument("--k-min", type=int, default=1)
    p.add_argument("--k-max", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--out-assignments", required=True, help="CSV source_id,cluster")
    p.add_argument("--out-curve", default=None, help="JSON [{k,inertia}]")
    p.add_argument("--exclude-cluster", type=int, default=None, help="emit a keep-list without this cluster")
    p.add_argument("--out-keep", default="kept_sources.txt", help="keep-list path for --exclude-cluster")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("power", help="Cramer's V and required N from a contingency CSV")
    p.add_argument("--table", required=True, help="CSV of cell counts, one row per line")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--target-power", type=float, default=0.8)
    p.add_argument("--df", type=int, default=None, help="override solver df (default (r-1)(c-1))")
    p.add_argument("--out", default=None, help="write the result JSON here")
    p.set_defaults(func=cmd_power)

    p = sub.add_parser("simulate", help="synthesize trials from a strategy profile")
    p.add_argument("--profile", default="vlm-aggregate", help="bundled profile name or JSON file")
    p.add_argument("--manifest", default=None, help="stimulus manifest (default: bundled demo stimuli)")
    p.add_argument("--per-condition", type=int, default=100, help="trials per condition per run")
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--source-id", default=None)
    p.add_argument("--out-dir", default=None)
    p.add_argument("--list-profiles", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("report", help="human-readable tables plus plot-data JSON")
    p.add_argument("--trials", required=True)
    p.add_argument("--coded", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--clusters", default=None, help="assignments CSV to include")
    p.add_argument("--exclude-sources", default=None)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FokuszError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
