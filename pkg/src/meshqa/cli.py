"""Command-line entry point for the whole pipeline.

Exit codes: 0 success, 1 usage error, 2 data error. With --json a machine
readable {"error": ..., "detail": ...} object is printed to stderr on
failure. Every randomized step takes an explicit --seed and reports it.
"""

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import errors as err
from .assets import decode_image, encode_pgm, encode_ppm, parse_obj, write_obj
from .assets.image import CoverageMask
from .characterize import (
    characterize_model,
    normalize_scores,
    write_scores_csv,
)
from .distort import (
    DistortionSpec,
    LevelSets,
    PAPER_LEVELS,
    distort_stimulus,
    enumerate_specs,
    manifest_row,
    write_manifest,
)
from .distort.simplify import simplify_levels
from .metric import (
    ConvStackExtractor,
    TrainConfig,
    image_quality,
    image_quality_multiview,
    kfold_split,
    load_model,
    save_model,
    train,
)
from .metric.model import quality_to_mos
from .metric.train import build_feature_cache
from .render import RenderConfig, frame_model, render, ring_viewpoints
from .render.config import load_render_config
from .stats import (
    SelectionCandidate,
    anova_factorial,
    apply_logistic,
    fit_logistic,
    krasula_auc,
    load_votes_jsonl,
    mos_table,
    plcc,
    screen_bt500,
    screen_golden,
    select_stimuli,
    srocc,
)
from .stats.anova import format_effect_table
from .stats.mos import MosRecord


def _read_image(path):
    with open(path, "rb") as fh:
        return decode_image(fh.read())


def _read_mask(path):
    return CoverageMask.from_image(_read_image(path))


def _read_mesh(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_obj(fh.read(), name=os.path.splitext(os.path.basename(path))[0])


def _levels_from_args(args):
    kwargs = {}
    for name in ("lod", "qp", "qt", "ts", "tq"):
        raw = getattr(args, f"{name}_levels", None)
        if raw:
            kwargs[name] = tuple(int(v) for v in raw.split(","))
    return LevelSets(**kwargs) if kwargs else PAPER_LEVELS


def cmd_distort(args):
    mesh = _read_mesh(args.model)
    texture = _read_image(args.texture)
    levels = _levels_from_args(args)
    if args.all:
        specs = enumerate_specs(levels)
    elif args.spec:
        specs = [DistortionSpec.parse(args.spec).validate(levels)]
    else:
        raise err.MeshQAError("pass --spec L,qp,qt,ts,tq or --all")
    os.makedirs(args.out, exist_ok=True)
    model_id = mesh.name or "model"
    cache = simplify_levels(mesh, sorted({s.lod for s in specs}))
    rows = []
    for i, spec in enumerate(specs):
        result = distort_stimulus(mesh, texture, spec, levels, simplified_cache=cache)
        label = spec.label()
        mesh_path = os.path.join(args.out, f"{model_id}_{label}.obj")
        tex_path = os.path.join(args.out, f"{model_id}_{label}.jpg")
        if not args.manifest_only:
            with open(mesh_path, "w", encoding="utf-8") as fh:
                fh.write(write_obj(result.mesh))
            with open(tex_path, "wb") as fh:
                fh.write(result.jpeg_bytes)
        rows.append(manifest_row(model_id, spec, result.report, mesh_path, tex_path))
        if args.progress and (i + 1) % 100 == 0:
            print(f"{i + 1}/{len(specs)} stimuli", file=sys.stderr)
    manifest_path = os.path.join(args.out, "manifest.jsonl")
    write_manifest(rows, manifest_path)
    print(f"wrote {len(rows)} manifest rows to {manifest_path}")
    return 0


def cmd_render(args):
    mesh = _read_mesh(args.model)
    texture = _read_image(args.texture)
    config = load_render_config(args.config) if args.config else RenderConfig()
    if args.viewpoint == "main":
        viewpoints = [frame_model(mesh, config, args.azimuth, args.elevation)]
    else:
        n = int(args.viewpoint.replace("ring", ""))
        distance = frame_model(mesh, config).distance
        viewpoints = ring_viewpoints(n, distance, args.azimuth)
    os.makedirs(args.out, exist_ok=True)
    base = os.path.join(args.out, mesh.name or "render")
    for i, viewpoint in enumerate(viewpoints):
        image, mask = render(mesh, texture, config, viewpoint)
        suffix = "" if len(viewpoints) == 1 else f"_v{i}"
        with open(f"{base}{suffix}.ppm", "wb") as fh:
            fh.write(encode_ppm(image))
        with open(f"{base}{suffix}_mask.pgm", "wb") as fh:
            fh.write(encode_pgm(mask.to_image()))
    print(f"rendered {len(viewpoints)} view(s) to {args.out}")
    return 0


def cmd_characterize(args):
    config = load_render_config(args.config) if args.config else RenderConfig()
    pairs = []
    for name in sorted(os.listdir(args.corpus)):
        if not name.endswith(".obj"):
            continue
        stem = name[:-4]
        for ext in (".jpg", ".jpeg", ".ppm", ".pgm"):
            tex = os.path.join(args.corpus, stem + ext)
            if os.path.exists(tex):
                pairs.append((stem, os.path.join(args.corpus, name), tex))
                break
    if not pairs:
        raise err.MeshQAError(f"no .obj + texture pairs under {args.corpus}")
    scores = []
    for stem, mesh_path, tex_path in pairs:
        mesh = _read_mesh(mesh_path)
        texture = _read_image(tex_path)
        scores.append(characterize_model(stem, mesh, texture, config, view_mode=args.views))
    normalize_scores(scores)
    write_scores_csv(scores, args.out)
    print(f"characterized {len(scores)} model(s) -> {args.out}")
    return 0


def cmd_select(args):
    candidates = []
    with open(args.candidates, "r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            candidates.append(
                SelectionCandidate(
                    stimulus_id=row["stimulus_id"],
                    pivot=float(row["pivot"]),
                    secondary=float(row["secondary"]),
                    model_id=row["model_id"],
                    levels=(
                        int(row["lod"]), int(row["qp"]), int(row["qt"]),
                        int(row["ts"]), int(row["tq"]),
                    ),
                )
            )
    chosen = select_stimuli(
        candidates, args.count, seed=args.seed,
        dimension_names=["lod", "qp", "qt", "ts", "tq"],
    )
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["stimulus_id", "pivot", "secondary", "model_id", "lod", "qp", "qt", "ts", "tq"])
        for c in chosen:
            writer.writerow([c.stimulus_id, c.pivot, c.secondary, c.model_id, *c.levels])
    print(f"selected {len(chosen)} of {len(candidates)} candidates (seed {args.seed}) -> {args.out}")
    return 0


def _load_dataset_manifest(path):
    """Rows: ref_image_path, dist_image_path, mask_path, mos, model_id.

    The three path columns accept ';'-separated lists for the multi-view
    (view-independent) mode; pair that with --patches 300.
    """
    items = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            refs = row["ref_image_path"].split(";")
            dists = row["dist_image_path"].split(";")
            masks = row["mask_path"].split(";")
            if len(refs) != len(dists) or len(refs) != len(masks):
                raise err.MeshQAError(f"ragged view lists in row {row!r}")
            ref = [_read_image(p) for p in refs]
            dist = [_read_image(p) for p in dists]
            mask = [_read_mask(p) for p in masks]
            if len(ref) == 1:
                ref, dist, mask = ref[0], dist[0], mask[0]
            items.append((ref, dist, mask, float(row["mos"]), row["model_id"]))
    if not items:
        raise err.EmptyDataset(f"no rows in {path}")
    return items


def _make_extractor(spec_text, seed):
    if spec_text == "seeded":
        return ConvStackExtractor.seeded(seed)
    if spec_text.startswith("pretrained:"):
        with open(spec_text.split(":", 1)[1], "rb") as fh:
            return ConvStackExtractor.from_blob(fh.read())
    raise err.MeshQAError(f"unknown extractor {spec_text!r} (use seeded or pretrained:FILE)")


def cmd_train(args):
    items = _load_dataset_manifest(args.manifest)
    extractor = _make_extractor(args.extractor, args.seed)
    config = TrainConfig(
        images_per_batch=args.batch_images,
        patches_per_image=args.patches,
        epochs=args.epochs,
        learning_rate=args.lr,
        seed=args.seed,
    )
    print(f"training config: {config}")
    cache = build_feature_cache(extractor, items)
    ids = [item[4] for item in items]
    folds = kfold_split(ids, k=args.folds, seed=args.seed)
    reports = []
    fold_models = []
    for fi, (train_ids, test_ids) in enumerate(folds):
        train_cache = [c for c in cache if c.model_id in set(train_ids)]
        model = train(None, config, extractor=extractor, feature_cache=train_cache)
        test_idx = [i for i, c in enumerate(cache) if c.model_id in set(test_ids)]
        predictions = []
        truths = []
        for i in test_idx:
            ref, dist, mask, mos, _ = items[i]
            if isinstance(ref, list):
                q = image_quality_multiview(ref, dist, mask, model)
            else:
                q = image_quality(ref, dist, mask, model)
            predictions.append(quality_to_mos(q))
            truths.append(mos)
        fold_plcc = plcc(predictions, truths) if len(set(truths)) > 1 else float("nan")
        fold_srocc = srocc(predictions, truths) if len(set(truths)) > 1 else float("nan")
        reports.append((fi, fold_plcc, fold_srocc, model.history[-1]))
        fold_models.append(model)
        print(f"fold {fi}: plcc={fold_plcc:.4f} srocc={fold_srocc:.4f} "
              f"final_loss={model.history[-1]:.6f} test_models={sorted(test_ids)}")
    # keep the fold with median correlation as the representative model
    order = sorted(range(len(reports)), key=lambda i: (np.isnan(reports[i][1]), reports[i][1]))
    keep = order[len(order) // 2]
    with open(args.out, "wb") as fh:
        fh.write(save_model(fold_models[keep]))
    mean_plcc = np.nanmean([r[1] for r in reports])
    mean_srocc = np.nanmean([r[2] for r in reports])
    print(f"mean over folds: plcc={mean_plcc:.4f} srocc={mean_srocc:.4f}")
    print(f"saved fold-{keep} model (seed {args.seed}) -> {args.out}")
    return 0


def cmd_predict(args):
    with open(args.model_file, "rb") as fh:
        model = load_model(fh.read())
    ref = _read_image(args.ref)
    dist = _read_image(args.dist)
    mask = _read_mask(args.mask) if args.mask else CoverageMask(
        np.ones((ref.height, ref.width), dtype=bool)
    )
    q = image_quality(ref, dist, mask, model)
    print(f"distance: {q:.6f}")
    print(f"predicted_mos: {quality_to_mos(q):.4f}")
    return 0


def _read_two_column_csv(path, value_field):
    values = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            values[row["stimulus_id"]] = row
    return values


def cmd_eval(args):
    preds = _read_two_column_csv(args.predictions, "value")
    moses = _read_two_column_csv(args.mos, "mos")
    common = sorted(set(preds) & set(moses))
    if len(common) < 3:
        raise err.MeshQAError(f"only {len(common)} aligned stimuli between the two files")
    metric = np.array([float(preds[k].get("value", preds[k].get("prediction", 0))) for k in common])
    mos = np.array([float(moses[k]["mos"]) for k in common])
    records = [
        MosRecord(
            k,
            float(moses[k]["mos"]),
            float(moses[k].get("ci95", 0.0)),
            int(float(moses[k].get("n", 1))),
        )
        for k in common
    ]
    raw_plcc = plcc(metric, mos)
    params = fit_logistic(metric, mos, seed=args.seed)
    mapped = apply_logistic(params, metric)
    rows = [
        ("seed", args.seed),
        ("n_stimuli", len(common)),
        ("plcc_raw", f"{raw_plcc:.4f}"),
        ("plcc_logistic", f"{plcc(mapped, mos):.4f}"),
        ("srocc", f"{srocc(metric, mos):.4f}"),
    ]
    try:
        auc_ds, auc_bw = krasula_auc(records, metric)
        rows.append(("auc_ds", f"{auc_ds:.4f}"))
        rows.append(("auc_bw", f"{auc_bw:.4f}"))
    except (err.NoSignificantPairs, err.NoSimilarPairs) as exc:
        rows.append(("auc", f"undefined ({type(exc).__name__})"))
    width = max(len(k) for k, _ in rows)
    for key, value in rows:
        print(f"{key:<{width}}  {value}")
    return 0


def cmd_screen(args):
    matrix = load_votes_jsonl(args.votes)
    rejected_gold = screen_golden(matrix) if matrix.golden else set()
    rejected_bt = screen_bt500(matrix)
    rejected = rejected_gold | rejected_bt
    for participant in sorted(rejected):
        reasons = []
        if participant in rejected_bt:
            reasons.append("bt500")
        if participant in rejected_gold:
            reasons.append("golden")
        print(f"reject {participant} ({'+'.join(reasons)})")
    print(f"rejected {len(rejected)} of {len(matrix.participants())} participants")
    records = mos_table(matrix, rejected)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["stimulus_id", "mos", "ci95", "n"])
        for record in records:
            writer.writerow([record.stimulus_id, record.mos, record.ci95, record.n])
    print(f"wrote {len(records)} cleaned MOS rows -> {args.out}")
    return 0


def cmd_anova(args):
    rows = []
    with open(args.scores, "r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            rows.append(row)
    if not rows:
        raise err.IncompleteFactorial(f"no rows in {args.scores}")
    factors = ["lod", "qp", "qt", "ts", "tq"]
    levels = {f: sorted({float(r[f]) for r in rows}) for f in factors}
    shape = tuple(len(levels[f]) for f in factors)
    table = np.full(shape, np.nan)
    for row in rows:
        idx = tuple(levels[f].index(float(row[f])) for f in factors)
        table[idx] = float(row["score"])
    effects = anova_factorial(table, factors)
    text = format_effect_table(effects)
    print(text)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["effect", "ss", "df", "f", "p"])
            for effect in effects:
                writer.writerow([effect.name, effect.ss, effect.df, effect.f, effect.p])
        print(f"wrote effect table -> {args.out}")
    return 0


def cmd_serve(args):
    from .study import StudyService, load_playlists, serve_http

    playlists = load_playlists(args.playlists)
    service = StudyService(
        playlists, args.store, secret=args.secret, seed=args.seed
    )
    server = serve_http(service, args.media, args.port, host=args.host)
    print(f"study service on http://{args.host}:{server.server_address[1]} "
          f"({len(playlists)} playlists, store {args.store})")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="meshqa",
        description="Textured-mesh quality assessment workbench.",
    )
    parser.add_argument("--json", action="store_true", help="machine-readable errors on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("distort", help="generate distorted stimuli and a manifest")
    p.add_argument("--model", required=True)
    p.add_argument("--texture", required=True)
    p.add_argument("--spec", help="levels as L,qp,qt,ts,tq, e.g. L3,9,8,1024,50")
    p.add_argument("--all", action="store_true", help="full level-grid cross product")
    p.add_argument("--out", required=True)
    p.add_argument("--manifest-only", action="store_true")
    p.add_argument("--progress", action="store_true")
    for name in ("lod", "qp", "qt", "ts", "tq"):
        p.add_argument(f"--{name}-levels", help=f"comma list overriding the {name} levels")
    p.set_defaults(func=cmd_distort)

    p = sub.add_parser("render", help="render PPM snapshot(s) plus coverage mask(s)")
    p.add_argument("--model", required=True)
    p.add_argument("--texture", required=True)
    p.add_argument("--viewpoint", default="main", help="main or ringN (e.g. ring4)")
    p.add_argument("--config", help="render config file")
    p.add_argument("--azimuth", type=float, default=0.0)
    p.add_argument("--elevation", type=float, default=0.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("characterize", help="geometry/color/attention measures for a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--config")
    p.add_argument("--views", choices=("main", "ring4"), default="main",
                   help="single main viewpoint or max over a 4-view ring")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_characterize)

    p = sub.add_parser("select", help="balanced subset of candidate stimuli")
    p.add_argument("--candidates", required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("train", help="fit the metric head with k-fold validation")
    p.add_argument("--manifest", required=True)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--extractor", default="seeded")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--batch-images", type=int, default=4)
    p.add_argument("--patches", type=int, default=150)
    p.add_argument("--lr", type=float, default=1e-4)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="score one distorted/reference pair")
    p.add_argument("--model-file", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--dist", required=True)
    p.add_argument("--mask")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="PLCC/SROCC/AUC table for predictions vs MOS")
    p.add_argument("--predictions", required=True)
    p.add_argument("--mos", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("screen", help="participant screening and cleaned MOS")
    p.add_argument("--votes", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_screen)

    p = sub.add_parser("anova", help="factorial effect table from per-HRC scores")
    p.add_argument("--scores", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_anova)

    p = sub.add_parser("serve", help="run the rating study service")
    p.add_argument("--playlists", required=True)
    p.add_argument("--media")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--store", default="votes.jsonl")
    p.add_argument("--secret", default="change-me")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except err.MeshQAError as exc:
        _report_error(args, exc)
        return 2
    except (OSError, ValueError, KeyError) as exc:
        _report_error(args, exc)
        return 2


def _report_error(args, exc):
    if getattr(args, "json", False):
        print(json.dumps({"error": type(exc).__name__, "detail": str(exc)}), file=sys.stderr)
    else:
        print(f"error: {exc}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
