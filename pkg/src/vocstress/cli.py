"""Command-line entry point wiring every pipeline stage.

Commands: simulate, ingest, features, couple, train-eval, attribute, serve,
reproduce. Every command is deterministic given --seed and writes only under
--out. Config and cohort files use the same key=value dialect as archive
META sections.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np


def _read_kv(path: str) -> dict[str, str]:
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#") or "=" not in line:
                continue
            k, v = line.split("=", 1)
            out[k.strip()] = v.strip()
    return out


def _cohort_spec_from_kv(kv: dict[str, str]):
    from .sim import CohortSpec

    kwargs = {}
    casts = {
        "n": int,
        "high_reactor_frac": float,
        "sign_pos_frac": float,
        "sign_neg_frac": float,
        "snr_db": float,
        "hr_noise_bpm": float,
        "gsr_noise_rel": float,
        "tvoc_noise_rel": float,
        "resp_delta": float,
        "min_baseline_tvoc": float,
    }
    for key, cast in casts.items():
        if key in kv:
            kwargs[key] = cast(kv[key])
    for key in ("dropout.hr", "dropout.gsr", "dropout.tvoc", "dropout.gas320"):
        if key in kv:
            from .sim.cohort import DEFAULT_DROPOUT

            dropout = kwargs.setdefault("dropout", dict(DEFAULT_DROPOUT))
            dropout[key.split(".")[1]] = float(kv[key])
    return CohortSpec(**kwargs)


def _load_sessions(path: str):
    from .core import read_archive

    sessions = []
    if os.path.isdir(path):
        names = sorted(n for n in os.listdir(path) if n.endswith(".txt"))
        for name in names:
            sessions.append(read_archive(os.path.join(path, name)))
    else:
        sessions.append(read_archive(path))
    if not sessions:
        raise SystemExit(f"no session archives found under {path!r}")
    return sessions


def cmd_simulate(args) -> int:
    from .core import write_archive
    from .sim import CohortSpec, simulate_cohort

    spec = _cohort_spec_from_kv(_read_kv(args.cohort)) if args.cohort else CohortSpec()
    os.makedirs(args.out, exist_ok=True)
    result = simulate_cohort(spec, args.seed)
    truth_lines = ["participant,reactivity,emitter,coupling_sign,coupling_lag_s,hr_delta"]
    for pspec, session in zip(result.specs, result.sessions):
        write_archive(session, os.path.join(args.out, f"session_{pspec.participant_id}.txt"))
        truth_lines.append(
            f"{pspec.participant_id},{pspec.reactivity.value},{pspec.emitter.value},"
            f"{pspec.coupling_sign},{pspec.coupling_lag_s:.0f},{pspec.hr_delta:.2f}"
        )
    with open(os.path.join(args.out, "ground_truth.csv"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(truth_lines) + "\n")
    print(f"wrote {len(result.sessions)} sessions to {args.out}")
    return 0


def cmd_ingest(args) -> int:
    from .core import (
        CHANNELS,
        CHANNEL_FIELDS,
        EnvironmentSummary,
        ParticipantMeta,
        SessionRecord,
        write_archive,
    )
    from .ingest.wire import Ack, MalformedLine, Marker, parse_line

    frames, markers = [], []
    n_bad = 0
    with open(args.infile, "r", encoding="ascii", errors="replace") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.endswith("\n"):
                line += "\n"
            try:
                item = parse_line(line)
            except MalformedLine as exc:
                n_bad += 1
                print(f"line {lineno}: {exc}", file=sys.stderr)
                continue
            if isinstance(item, Marker):
                markers.append((item.timestamp, item.event))
            elif isinstance(item, Ack):
                continue
            else:
                frames.append(item)
    frames.sort(key=lambda f: f.timestamp)
    ratings = {}
    for _, name in markers:
        if name.startswith("RATING_T") and "=" in name:
            cp, val = name[len("RATING_") :].split("=")
            ratings[cp] = int(val)
    availability = {
        ch: any(
            (bool(f.rr_intervals) if field == "rr_intervals" else getattr(f, field) is not None)
            for f in frames
            for field in CHANNEL_FIELDS[ch]
        )
        for ch in CHANNELS
    }

    def _env(vals):
        arr = np.asarray([v for v in vals if v is not None], dtype=float)
        if arr.size == 0:
            return None, None
        return round(float(arr.mean()), 3), (
            round(float(arr.std(ddof=1)), 3) if arr.size > 1 else 0.0
        )

    t_m, t_s = _env([f.temp_bme for f in frames])
    h_m, h_s = _env([f.humidity_bme for f in frames])
    p_m, p_s = _env([f.pressure for f in frames])
    record = SessionRecord(
        meta=ParticipantMeta(id=args.participant, stress_ratings=ratings),
        frames=tuple(frames),
        markers=tuple(markers),
        environment=EnvironmentSummary(
            temp_mean=t_m, temp_sd=t_s, humidity_mean=h_m, humidity_sd=h_s,
            pressure_mean=p_m, pressure_sd=p_s,
        ),
        channel_availability=availability,
    )
    write_archive(record, args.out)
    print(f"wrote {len(frames)} frames, {len(markers)} markers ({n_bad} bad lines) to {args.out}")
    return 0


def cmd_features(args) -> int:
    from .features import build_dataset, save_dataset_csv

    dataset = build_dataset(_load_sessions(args.infile))
    save_dataset_csv(dataset, args.out)
    counts = dataset.class_counts
    print(
        f"{len(dataset.windows)} windows ({counts['Stress']} Stress / "
        f"{counts['NonStress']} NonStress) -> {args.out}"
    )
    return 0


def cmd_couple(args) -> int:
    from .coupling import analyze_cohort
    from .reporting import render_coupling, render_manipulation

    report = analyze_cohort(_load_sessions(args.infile), n_perm=args.permutations, seed=args.seed)
    text = render_manipulation(report) + "\n" + render_coupling(report)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    print(f"coupling report -> {args.out}")
    return 0


def cmd_train_eval(args) -> int:
    from .features import load_dataset_csv
    from .learn import ModelSpec, evaluate, save_model, train
    from .reporting import render_eval_table, render_loso_table

    dataset = load_dataset_csv(args.dataset)
    kind = {"rf": "rf", "svm-rbf": "svm_rbf", "svm-linear": "svm_linear"}[args.model]
    report = evaluate(ModelSpec(kind=kind), dataset, args.regime, seed=args.seed)
    if args.regime == "loso":
        text = render_loso_table(report)
    else:
        text = render_eval_table([report], "CLASSIFICATION PERFORMANCE (STRATIFIED 5-FOLD)")
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    if args.save_model:
        model = train(ModelSpec(kind=kind), dataset.X, dataset.y, seed=args.seed)
        save_model(model, args.save_model)
        print(f"full-data model -> {args.save_model}")
    print(f"evaluation report -> {args.out}")
    return 0


def cmd_attribute(args) -> int:
    from .attribution.fusion import full_attribution
    from .features import load_dataset_csv
    from .reporting import render_attribution, render_fusion

    dataset = load_dataset_csv(args.dataset)
    report = full_attribution(dataset, seed=args.seed)
    text = render_fusion(report) + "\n" + render_attribution(report)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    print(f"attribution report -> {args.out}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import SessionService, SimulatedBridge, create_app

    os.makedirs(args.out, exist_ok=True)
    bridge = SimulatedBridge(seed=args.seed)
    service = SessionService(bridge=bridge, archive_dir=args.out)
    app = create_app(service)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_reproduce(args) -> int:
    from .pipeline import reproduce

    config = _read_kv(args.config) if args.config else {}
    ok = reproduce(args.out, seed=args.seed, config=config, threads=args.threads)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vocstress", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", help="generate a synthetic cohort of session archives")
    sp.add_argument("--cohort", help="cohort spec file (key=value)", default=None)
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("ingest", help="parse a wire-protocol capture into a session archive")
    sp.add_argument("--in", dest="infile", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--participant", default="P00")
    sp.set_defaults(func=cmd_ingest)

    sp = sub.add_parser("features", help="extract the windowed feature dataset")
    sp.add_argument("--in", dest="infile", required=True, help="archive file or directory")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_features)

    sp = sub.add_parser("couple", help="physiology-VOC coupling analysis")
    sp.add_argument("--in", dest="infile", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--permutations", type=int, default=1000)
    sp.add_argument("--threads", type=int, default=1, help="worker budget; output is identical for any value")
    sp.set_defaults(func=cmd_couple)

    sp = sub.add_parser("train-eval", help="train a classifier under a CV regime")
    sp.add_argument("--dataset", required=True)
    sp.add_argument("--model", choices=["rf", "svm-rbf", "svm-linear"], default="rf")
    sp.add_argument("--regime", choices=["kfold", "loso"], default="kfold")
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--out", required=True)
    sp.add_argument("--save-model", default=None, help="also fit on the full dataset and serialize")
    sp.add_argument("--threads", type=int, default=1, help="worker budget; output is identical for any value")
    sp.set_defaults(func=cmd_train_eval)

    sp = sub.add_parser("attribute", help="fusion comparison and Shapley attribution")
    sp.add_argument("--dataset", required=True)
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--out", required=True)
    sp.add_argument("--threads", type=int, default=1, help="worker budget; output is identical for any value")
    sp.set_defaults(func=cmd_attribute)

    sp = sub.add_parser("serve", help="run the live session service")
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--port", type=int, default=8765)
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--out", default="./sessions")
    sp.set_defaults(func=cmd_serve)

    sp = sub.add_parser("reproduce", help="full pipeline: simulate -> analyze -> reports")
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--out", required=True)
    sp.add_argument("--config", default=None, help="cohort spec overrides (key=value)")
    sp.add_argument("--threads", type=int, default=1)
    sp.set_defaults(func=cmd_reproduce)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
