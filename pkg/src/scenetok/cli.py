"""Command-line pipeline: generate, serialize, parse, build sequences, reorder,
evaluate, and compute token statistics.

All subcommands write data to stdout (or --out) and diagnostics to stderr;
exit code 0 on success, 1 on runtime errors, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import random
import sys
from functools import partial
from multiprocessing import Pool

from . import __version__
from . import reorder as reorder_mod
from . import stats as stats_mod
from . import vocab as vocab_mod
from .errors import SceneTokError
from .evaluate import (
    criteria_for,
    jaccard_dataset,
    qa_accuracy,
    qa_baselines,
    taus_for,
)
from .errors import PlacementInfeasibleError
from .generate import (
    CLEVR_COLORS,
    CLEVR_HEIGHTS,
    CLEVR_MATERIALS,
    CLEVR_SIZES,
    EditOp,
    EditParams,
    GenConfig,
    edit_scene,
    generate_scenes,
)
from .quantize import QuantizerConfig
from .scene import DatasetStyle, QAItem, Scene, SceneObject, scene_from_json, scene_to_json
from .sequences import ModalityOrder, SequenceBuilder, SequenceOptions, loss_weights
from .serialize import (
    ParseMode,
    parse_scene,
    read_token_lines,
    serialize_scene,
    write_id_records,
    write_token_lines,
)
from .vocab import ShapeCode, Vocabulary, build_vocab, load_manifest, tokenize_words


def _load_config(path: str) -> dict:
    if path.endswith(".toml"):
        try:
            import tomllib  # py311+
        except ImportError:
            try:
                import tomli as tomllib
            except ImportError:
                raise SceneTokError("TOML config needs Python 3.11+ or the tomli package")
        with open(path, "rb") as fh:
            config = tomllib.load(fh)
    else:
        with open(path, "r", encoding="utf-8") as fh:
            config = json.load(fh)
    # range_min/range_max are the documented config spelling of --range
    if "range_min" in config or "range_max" in config:
        lo = config.pop("range_min", -8)
        hi = config.pop("range_max", 8)
        config.setdefault("range", f"{lo},{hi}")
    return config


def _parse_pair(text: str) -> tuple[str, str]:
    parts = [p.strip() for p in str(text).split(",")]
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected 'LO,HI', got {text!r}")
    return parts[0], parts[1]


def _parse_taus(text: str) -> tuple[float, ...]:
    return tuple(float(p) for p in str(text).split(",") if p.strip())


def _qcfg(args) -> QuantizerConfig:
    lo, hi = _parse_pair(args.range)
    return QuantizerConfig(str(args.granularity), lo, hi)


def _vocab(args, extra_words=()) -> Vocabulary:
    if getattr(args, "manifest", None):
        with open(args.manifest, "r", encoding="utf-8") as fh:
            return load_manifest(fh)
    words = list(vocab_mod.DEFAULT_WORDS)
    for w in extra_words:
        if w not in words:
            words.append(w)
    return build_vocab(
        _qcfg(args),
        image_codes=args.image_codes,
        with_shapes=args.with_shapes,
        words=words,
        base_size=args.base_size,
    )


@contextlib.contextmanager
def _open_in(args, binary: bool = False):
    path = getattr(args, "infile", None)
    if path and path != "-":
        with open(path, "rb" if binary else "r", encoding=None if binary else "utf-8") as fh:
            yield fh
    else:
        yield sys.stdin.buffer if binary else sys.stdin


@contextlib.contextmanager
def _open_out(args, binary: bool = False):
    path = getattr(args, "out", None)
    if path and path != "-":
        with open(path, "wb" if binary else "w", encoding=None if binary else "utf-8") as fh:
            yield fh
    else:
        yield sys.stdout.buffer if binary else sys.stdout


def _read_scenes(args) -> list[Scene]:
    with _open_in(args) as fh:
        return [scene_from_json(line) for line in fh.read().splitlines() if line.strip()]


def _read_jsonl(path: str) -> list[dict]:
    with open(path, "r", encoding="utf-8") as fh:
        return [json.loads(line) for line in fh.read().splitlines() if line.strip()]


# ---- gen ----------------------------------------------------------------------


_EDIT_ATTRS = {"color": CLEVR_COLORS, "material": CLEVR_MATERIALS, "size": CLEVR_SIZES}


def _unique_reference(scene: Scene, rng: random.Random) -> tuple[int, dict] | None:
    descs = [(o.size, o.color, o.material, o.shape) for o in scene.objects]
    unique = [i for i, d in enumerate(descs) if descs.count(d) == 1]
    if not unique:
        return None
    idx = rng.choice(unique)
    o = scene.objects[idx]
    return idx, {"size": o.size, "color": o.color, "material": o.material, "shape": o.shape}


def _sample_edit(scene: Scene, op_name: str, rng: random.Random,
                 qcfg: QuantizerConfig, gen_cfg: GenConfig):
    ops = list(EditOp) if op_name == "mixed" else [EditOp(op_name)]
    op = rng.choice(ops)
    picked = _unique_reference(scene, rng)
    if op is not EditOp.ADD and picked is None:
        op = EditOp.ADD
    if op is EditOp.ADD:
        from .generate import _place_xy  # reuse the sampling rules

        placed = [(o.location[0], o.location[1]) for o in scene.objects]
        try:
            x, y = _place_xy(rng, gen_cfg, qcfg, placed)
        except PlacementInfeasibleError:
            return None
        size = rng.choice(CLEVR_SIZES)
        new = SceneObject(size=size, color=rng.choice(CLEVR_COLORS),
                          material=rng.choice(CLEVR_MATERIALS),
                          shape=rng.choice(("cube", "sphere", "cylinder")),
                          location=(x, y, CLEVR_HEIGHTS[size]))
        return edit_scene(scene, EditOp.ADD, EditParams(new_object=new))
    idx, reference = picked
    if op is EditOp.CHANGE_ATTR:
        attr = rng.choice(sorted(_EDIT_ATTRS))
        current = getattr(scene.objects[idx], attr)
        value = rng.choice([v for v in _EDIT_ATTRS[attr] if v != current])
        return edit_scene(scene, op, EditParams(reference=reference, attr=attr, value=value))
    if op is EditOp.REMOVE:
        return edit_scene(scene, op, EditParams(reference=reference))
    delta = (rng.choice((-1.0, -0.5, 0.5, 1.0)), rng.choice((-1.0, -0.5, 0.5, 1.0)))
    return edit_scene(scene, EditOp.MOVE, EditParams(reference=reference, delta=delta))


def cmd_gen(args) -> int:
    qcfg = _qcfg(args)
    lo, hi = (int(p) for p in _parse_pair(args.objects))
    plo, phi = (float(p) for p in _parse_pair(args.positions))
    gen_cfg = GenConfig(
        seed=args.seed,
        style=DatasetStyle(args.style),
        n_objects_range=(lo, hi),
        position_range=(plo, phi),
        min_separation=args.min_sep,
    )
    scenes = generate_scenes(gen_cfg, args.n, qcfg)
    with _open_out(args) as out:
        if args.edits:
            if gen_cfg.style is not DatasetStyle.CLEVR:
                raise SceneTokError("--edits is only supported for the clevr style")
            rng = random.Random(args.seed + 1)
            for scene in scenes:
                result = _sample_edit(scene, args.edits, rng, qcfg, gen_cfg)
                if result is None:
                    continue
                edited, text = result
                out.write(json.dumps({
                    "input": json.loads(scene_to_json(scene)),
                    "instruction": text,
                    "output": json.loads(scene_to_json(edited)),
                }, separators=(",", ":")) + "\n")
        else:
            for scene in scenes:
                out.write(scene_to_json(scene) + "\n")
    return 0


# ---- serialize / parse ---------------------------------------------------------


def _tokens_of(scene: Scene, cfg: QuantizerConfig) -> list[str]:
    return list(serialize_scene(scene, cfg).tokens)


def cmd_serialize(args) -> int:
    cfg = _qcfg(args)
    scenes = _read_scenes(args)
    if args.jobs > 1 and scenes:
        with Pool(args.jobs) as pool:
            token_seqs = pool.map(partial(_tokens_of, cfg=cfg), scenes)
    else:
        token_seqs = [_tokens_of(s, cfg) for s in scenes]
    if args.ids or args.binary:
        vocab = _vocab(args)
        id_seqs = [[vocab.lookup(t) for t in seq] for seq in token_seqs]
        if args.binary:
            with _open_out(args, binary=True) as out:
                write_id_records(id_seqs, out)
        else:
            with _open_out(args) as out:
                write_token_lines(id_seqs, out)
    else:
        with _open_out(args) as out:
            write_token_lines(token_seqs, out)
    return 0


def cmd_parse(args) -> int:
    cfg = _qcfg(args)
    mode = ParseMode(args.mode)
    style = DatasetStyle(args.style) if args.style else None
    vocab = _vocab(args) if args.ids else None
    with _open_in(args) as fh:
        lines = read_token_lines(fh)
    if args.ids:
        token_lines = []
        for ids in lines:
            toks = []
            for raw in ids:
                tok = vocab.id_to_token(int(raw))
                toks.append(vocab_mod.shape_code_token(tok) if isinstance(tok, ShapeCode) else str(tok))
            token_lines.append(toks)
        lines = token_lines
    with _open_out(args) as out:
        for i, tokens in enumerate(lines):
            scene, diags = parse_scene(tokens, cfg, mode, style)
            for d in diags:
                print(f"line {i}: token {d.position}: {d.message}", file=sys.stderr)
            out.write(scene_to_json(scene) + "\n")
    return 0


# ---- build-seq -----------------------------------------------------------------


def _image_lines(path: str) -> list[list[int]]:
    with open(path, "r", encoding="utf-8") as fh:
        return [[int(t) for t in line.split()] for line in fh.read().splitlines() if line.strip()]


def _synth_images(rng: random.Random, count: int, length: int, codes: int) -> list[list[int]]:
    return [[rng.randrange(codes) for _ in range(length)] for _ in range(count)]


def _collect_words(texts) -> list[str]:
    words = []
    for text in texts:
        words.extend(tokenize_words(text))
    return words


def cmd_build_seq(args) -> int:
    cfg = _qcfg(args)
    opts = SequenceOptions(
        center_reorder=args.center_reorder,
        context_weight=args.context_weight,
        image_length=args.image_length,
    )
    rng = random.Random(args.seed)

    if args.task == "instruction":
        pairs = _read_jsonl(args.pairs)
        texts = [p["instruction"] for p in pairs]
        n = len(pairs)
    elif args.task == "qa":
        if not args.scenes:
            raise SceneTokError("qa task needs --scenes")
        qa_rows = _read_jsonl(args.qa)
        texts = [r["question"] for r in qa_rows] + [r["answer"] for r in qa_rows]
        n = len(qa_rows)
    else:
        if not args.scenes:
            raise SceneTokError(f"{args.task} task needs --scenes")
        with open(args.scenes, "r", encoding="utf-8") as fh:
            scenes = [scene_from_json(line) for line in fh.read().splitlines() if line.strip()]
        texts = []
        n = len(scenes)

    vocab = _vocab(args, extra_words=_collect_words(texts))
    builder = SequenceBuilder(vocab, cfg, opts)

    def images_for(count: int, path: str | None) -> list[list[int]]:
        if path:
            lines = _image_lines(path)
            if len(lines) != count:
                raise SceneTokError(f"{path} has {len(lines)} image lines, need {count}")
            return lines
        if not args.synth_images:
            raise SceneTokError("need --images FILE or --synth-images")
        return _synth_images(rng, count, args.image_length, args.image_codes)

    sequences = []
    if args.task == "rendering":
        for scene, image in zip(scenes, images_for(n, args.images)):
            sequences.append(builder.rendering(scene, image))
    elif args.task == "recognition":
        for scene, image in zip(scenes, images_for(n, args.images)):
            sequences.append(builder.recognition(image, scene))
    elif args.task == "instruction":
        order = ModalityOrder(args.order)
        ctx_images = images_for(n, args.images)
        out_images = images_for(n, args.out_images)
        for pair, ctx_img, out_img in zip(pairs, ctx_images, out_images):
            sequences.append(builder.instruction(
                ctx_img, scene_from_json(pair["input"]), pair["instruction"],
                out_img, scene_from_json(pair["output"]), order))
    else:  # qa
        if args.scenes:
            with open(args.scenes, "r", encoding="utf-8") as fh:
                scenes = [scene_from_json(line) for line in fh.read().splitlines() if line.strip()]
            if len(scenes) != n:
                raise SceneTokError(f"{len(scenes)} scenes for {n} QA rows")
        for scene, row, image in zip(scenes, qa_rows, images_for(n, args.images)):
            sequences.append(builder.qa(image, scene, row["question"], row["answer"],
                                        include_scene=args.include_scene))

    weighted = [loss_weights(s, vocab, args.image_head_weight, args.head_len)
                for s in sequences]
    prefix = args.out
    if args.binary:
        with open(prefix + ".stk1", "wb") as out:
            write_id_records([s.ids for s in weighted], out)
    else:
        with open(prefix + ".ids.txt", "w", encoding="utf-8") as out:
            write_token_lines([s.ids for s in weighted], out)
    with open(prefix + ".weights.txt", "w", encoding="utf-8") as out:
        write_token_lines([[f"{w:g}" for w in s.weights] for s in weighted], out)
    print(f"wrote {len(weighted)} sequences to {prefix}.*", file=sys.stderr)
    return 0


# ---- reorder -------------------------------------------------------------------


def cmd_reorder(args) -> int:
    with _open_in(args) as fh:
        lines = read_token_lines(fh)
    plans: dict[int, reorder_mod.ReorderPlan] = {}
    func = reorder_mod.invert if args.invert else reorder_mod.apply
    with _open_out(args) as out:
        for tokens in lines:
            plan = plans.setdefault(len(tokens), reorder_mod.center_plan(len(tokens)))
            out.write(" ".join(func(plan, tokens)) + "\n")
    return 0


# ---- eval ----------------------------------------------------------------------


def _read_scene_file(path: str) -> list[Scene]:
    with open(path, "r", encoding="utf-8") as fh:
        return [scene_from_json(line) for line in fh.read().splitlines() if line.strip()]


def cmd_eval_jaccard(args) -> int:
    gts = _read_scene_file(args.gt)
    preds = _read_scene_file(args.pred)
    style = DatasetStyle(args.dataset)
    crit = criteria_for(style)
    taus = _parse_taus(args.tau) if args.tau else taus_for(style)
    report = jaccard_dataset(gts, preds, crit, taus, jobs=args.jobs)
    with _open_out(args) as out:
        out.write(report.to_json() + "\n")
    return 0


def cmd_eval_qa(args) -> int:
    with open(args.gt, "r", encoding="utf-8") as fh:
        gt = fh.read().splitlines()
    with open(args.pred, "r", encoding="utf-8") as fh:
        pred = fh.read().splitlines()
    with _open_out(args) as out:
        out.write(json.dumps({"accuracy": qa_accuracy(pred, gt)}, indent=2) + "\n")
    return 0


def _qa_items(path: str) -> list[QAItem]:
    return [QAItem(r["question"], r["answer"], r["answer_type"]) for r in _read_jsonl(path)]


def cmd_eval_qa_baselines(args) -> int:
    random_expected, frequency = qa_baselines(_qa_items(args.train), _qa_items(args.test))
    with _open_out(args) as out:
        out.write(json.dumps(
            {"random_expected": random_expected, "frequency": frequency}, indent=2) + "\n")
    return 0


# ---- stats ---------------------------------------------------------------------


def cmd_stats(args) -> int:
    with _open_in(args) as fh:
        sequences = [[int(t) for t in line] for line in read_token_lines(fh)]
    with _open_out(args) as out:
        if args.kind == "concentration":
            stats_mod.write_concentration_csv(stats_mod.position_concentration(sequences), out)
        else:
            if not args.code_range:
                raise SceneTokError("histogram needs --code-range")
            hist = stats_mod.usage_histogram(sequences, args.code_range)
            stats_mod.write_histogram_csv(hist, out)
            print(f"used_fraction {hist.used_fraction:.6f}", file=sys.stderr)
    return 0


# ---- vocab ---------------------------------------------------------------------


def cmd_vocab(args) -> int:
    extra = []
    if args.extra_words:
        with open(args.extra_words, "r", encoding="utf-8") as fh:
            extra = _collect_words(fh.read().splitlines())
    vocab = _vocab(args, extra_words=extra)
    with _open_out(args) as out:
        vocab.save_manifest(out)
    return 0


# ---- parser --------------------------------------------------------------------


def _add_io(p, stdin_ok=True):
    if stdin_ok:
        p.add_argument("--in", dest="infile", default="-", help="input file (default stdin)")
    p.add_argument("--out", default="-", help="output file (default stdout)")


def _add_quant(p):
    p.add_argument("--granularity", default="0.05", help="bin width (default 0.05)")
    p.add_argument("--range", default="-8,8", help="numeric range LO,HI (default -8,8)")


def _add_vocab(p):
    p.add_argument("--image-codes", type=int, default=vocab_mod.DEFAULT_IMAGE_CODES)
    p.add_argument("--with-shapes", action="store_true",
                   help="include the 8192-ID shape codebook")
    p.add_argument("--base-size", type=int, default=vocab_mod.DEFAULT_BASE_SIZE)
    p.add_argument("--manifest", help="load the vocabulary from a manifest file")


def build_parser() -> tuple[argparse.ArgumentParser, list[argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(
        prog="scenetok",
        description="Structured 3D scene tokenization, sequence assembly, and evaluation.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="TOML/JSON config mirroring the flags")
    sub = parser.add_subparsers(dest="command", required=True)
    created = []

    p = sub.add_parser("gen", help="generate synthetic scenes (or edit pairs)")
    _add_quant(p)
    _add_io(p, stdin_ok=False)
    p.add_argument("--style", default="clevr", choices=["clevr", "objaworld"])
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--objects", default="3,10", help="object count range MIN,MAX")
    p.add_argument("--positions", default="-3,3", help="xy position range LO,HI")
    p.add_argument("--min-sep", type=float, default=0.4)
    p.add_argument("--edits", choices=["change_attr", "add", "remove", "move", "mixed"],
                   help="emit instruction edit pairs instead of plain scenes")
    p.set_defaults(func=cmd_gen)
    created.append(p)

    p = sub.add_parser("serialize", help="scene JSONL -> token lines")
    _add_quant(p)
    _add_vocab(p)
    _add_io(p)
    p.add_argument("--ids", action="store_true", help="emit vocabulary IDs")
    p.add_argument("--binary", action="store_true", help="emit the binary STK1 stream")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_serialize)
    created.append(p)

    p = sub.add_parser("parse", help="token lines -> scene JSONL")
    _add_quant(p)
    _add_vocab(p)
    _add_io(p)
    p.add_argument("--mode", default="strict", choices=["strict", "lenient"])
    p.add_argument("--style", choices=[s.value for s in DatasetStyle])
    p.add_argument("--ids", action="store_true", help="input lines are vocabulary IDs")
    p.set_defaults(func=cmd_parse)
    created.append(p)

    p = sub.add_parser("build-seq", help="assemble task sequences with loss weights")
    _add_quant(p)
    _add_vocab(p)
    p.add_argument("--task", required=True,
                   choices=["rendering", "recognition", "instruction", "qa"])
    p.add_argument("--scenes", help="scene JSONL input")
    p.add_argument("--pairs", help="instruction pair JSONL (instruction task)")
    p.add_argument("--qa", help="question/answer JSONL (qa task)")
    p.add_argument("--images", help="context image token lines (one scene per line)")
    p.add_argument("--out-images", help="target image token lines (instruction task)")
    p.add_argument("--synth-images", action="store_true",
                   help="draw seeded synthetic image tokens instead of reading files")
    p.add_argument("--center-reorder", action="store_true")
    p.add_argument("--order", default="image-first", choices=["image-first", "scene-first"])
    p.add_argument("--include-scene", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--image-length", type=int, default=256)
    p.add_argument("--image-head-weight", type=float, default=10.0)
    p.add_argument("--head-len", type=int, default=5)
    p.add_argument("--context-weight", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--binary", action="store_true")
    p.add_argument("--out", required=True, help="output prefix")
    p.set_defaults(func=cmd_build_seq)
    created.append(p)

    p = sub.add_parser("reorder", help="center-reorder token lines (or invert)")
    _add_io(p)
    p.add_argument("--invert", action="store_true")
    p.set_defaults(func=cmd_reorder)
    created.append(p)

    p = sub.add_parser("eval", help="evaluation metrics")
    esub = p.add_subparsers(dest="metric", required=True)

    pj = esub.add_parser("jaccard", help="scene-matching Jaccard Index")
    pj.add_argument("--gt", required=True)
    pj.add_argument("--pred", required=True)
    pj.add_argument("--dataset", default="clevr", choices=[s.value for s in DatasetStyle])
    pj.add_argument("--tau", help="comma-separated taus (default: dataset preset)")
    pj.add_argument("--jobs", type=int, default=1)
    pj.add_argument("--out", default="-")
    pj.set_defaults(func=cmd_eval_jaccard)
    created.append(pj)

    pq = esub.add_parser("qa", help="exact-match answer accuracy")
    pq.add_argument("--gt", required=True)
    pq.add_argument("--pred", required=True)
    pq.add_argument("--out", default="-")
    pq.set_defaults(func=cmd_eval_qa)
    created.append(pq)

    pb = esub.add_parser("qa-baselines", help="random/frequency QA baselines")
    pb.add_argument("--train", required=True)
    pb.add_argument("--test", required=True)
    pb.add_argument("--out", default="-")
    pb.set_defaults(func=cmd_eval_qa_baselines)
    created.append(pb)

    p = sub.add_parser("stats", help="token statistics (CSV)")
    _add_io(p)
    p.add_argument("--kind", default="concentration", choices=["concentration", "histogram"])
    p.add_argument("--code-range", type=int, help="codebook size for histograms")
    p.set_defaults(func=cmd_stats)
    created.append(p)

    p = sub.add_parser("vocab", help="build and print the vocabulary manifest")
    _add_quant(p)
    _add_vocab(p)
    _add_io(p, stdin_ok=False)
    p.add_argument("--extra-words", help="file of extra word tokens to register")
    p.set_defaults(func=cmd_vocab)
    created.append(p)

    return parser, created


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    parser, subparsers = build_parser()
    if known.config:
        config = _load_config(known.config)
        parser.set_defaults(**config)
        for sp in subparsers:
            sp.set_defaults(**config)
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        return 0
    except (SceneTokError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
