"""attnclust command line: run experiments, batch GrabCut, evaluate, serve.

Exit codes: 0 success, 2 config error, 3 data error, 4 diverged training.
"""

from __future__ import annotations

import argparse
import csv
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import ConfigError, load_config
from .dataio import DataFormatError, load_labels
from .engine import DivergedError
from .grabcut import Stroke, grabcut_segment
from .imageio import encode_pgm_mask, load_image
from .metrics import ari, clustering_accuracy, nmi
from .pipeline import StageError, run_experiment

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_DIVERGED = 0, 2, 3, 4


def _parse_bbox(text: str) -> tuple:
    parts = text.split(",")
    if len(parts) != 4:
        raise ConfigError(f"bbox must be x,y,w,h, got {text!r}")
    try:
        return tuple(int(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"bbox must be integers, got {text!r}") from exc


def load_strokes_file(path) -> list:
    """Stroke file: one `fg|bg x0 y0 x1 y1` polyline segment per line."""
    strokes = []
    for i, ln in enumerate(Path(path).read_text().splitlines()):
        ln = ln.strip()
        if not ln or ln.startswith("#"):
            continue
        parts = ln.split()
        if len(parts) != 5:
            raise DataFormatError(f"strokes line {i}: expected 'fg|bg x0 y0 x1 y1', got {ln!r}")
        kind = parts[0]
        try:
            x0, y0, x1, y1 = (int(v) for v in parts[1:])
        except ValueError as exc:
            raise DataFormatError(f"strokes line {i}: non-integer coordinate") from exc
        strokes.append(Stroke(kind=kind, points=((x0, y0), (x1, y1))))
    return strokes


def _cmd_run(args) -> int:
    cfg = load_config(args.config, args.overrides)
    run_experiment(cfg)
    return EXIT_OK


def _cmd_grabcut(args) -> int:
    image = load_image(args.image)
    strokes = load_strokes_file(args.strokes) if args.strokes else None
    mask = grabcut_segment(
        image, _parse_bbox(args.bbox), strokes, iterations=args.iters, seed=args.seed
    )
    Path(args.out).write_bytes(encode_pgm_mask(mask))
    return EXIT_OK


def _batch_row(row) -> str:
    path, bbox, strokes_path, out_path, iters, seed = row
    image = load_image(path)
    strokes = load_strokes_file(strokes_path) if strokes_path else None
    mask = grabcut_segment(image, bbox, strokes, iterations=iters, seed=seed)
    Path(out_path).write_bytes(encode_pgm_mask(mask))
    return out_path


def _cmd_grabcut_batch(args) -> int:
    """Manifest CSV rows: image_path,x,y,w,h[,strokes_path]."""
    out_dir = Path(args.out_dir)
    rows = []
    with open(args.manifest, newline="") as fh:
        for i, cells in enumerate(csv.reader(fh)):
            if not cells or not cells[0].strip():
                continue
            if len(cells) not in (5, 6):
                raise DataFormatError(
                    f"manifest row {i}: expected image_path,x,y,w,h[,strokes_path]"
                )
            image_path = cells[0].strip()
            try:
                bbox = tuple(int(c) for c in cells[1:5])
            except ValueError as exc:
                raise DataFormatError(f"manifest row {i}: non-integer bbox") from exc
            strokes_path = cells[5].strip() if len(cells) == 6 and cells[5].strip() else None
            out_path = out_dir / (Path(image_path).stem + ".pgm")
            rows.append((image_path, bbox, strokes_path, str(out_path), args.iters, args.seed))
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            for done in pool.map(_batch_row, rows):
                print(done)
    else:
        for row in rows:
            print(_batch_row(row))
    return EXIT_OK


def _cmd_eval(args) -> int:
    pred = load_labels(args.pred)
    truth = load_labels(args.truth)
    print(
        f"acc={clustering_accuracy(pred, truth):.4f} "
        f"nmi={nmi(pred, truth):.4f} "
        f"ari={ari(pred, truth):.4f}"
    )
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(ui_dir=args.ui_dir)
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="attnclust")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a clustering experiment from a config file")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("overrides", nargs="*", help="key=value config overrides")
    p_run.set_defaults(func=_cmd_run)

    p_gc = sub.add_parser("grabcut", help="segment one image")
    p_gc.add_argument("--image", required=True)
    p_gc.add_argument("--bbox", required=True, help="x,y,w,h")
    p_gc.add_argument("--strokes")
    p_gc.add_argument("--out", required=True)
    p_gc.add_argument("--iters", type=int, default=5)
    p_gc.add_argument("--seed", type=int, default=0)
    p_gc.set_defaults(func=_cmd_grabcut)

    p_gb = sub.add_parser("grabcut-batch", help="segment a manifest of images")
    p_gb.add_argument("--manifest", required=True)
    p_gb.add_argument("--out-dir", required=True)
    p_gb.add_argument("--iters", type=int, default=5)
    p_gb.add_argument("--seed", type=int, default=0)
    p_gb.add_argument("--jobs", type=int, default=1)
    p_gb.set_defaults(func=_cmd_grabcut_batch)

    p_ev = sub.add_parser("eval", help="compare predicted labels against ground truth")
    p_ev.add_argument("--pred", required=True)
    p_ev.add_argument("--truth", required=True)
    p_ev.set_defaults(func=_cmd_eval)

    p_sv = sub.add_parser("serve", help="start the annotation HTTP service")
    p_sv.add_argument("--port", type=int, default=8000)
    p_sv.add_argument("--host", default="127.0.0.1")
    p_sv.add_argument("--ui-dir", default=None)
    p_sv.set_defaults(func=_cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergedError as exc:
        print(f"training diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except StageError as exc:
        if isinstance(exc.cause, DivergedError):
            print(f"training diverged: {exc}", file=sys.stderr)
            return EXIT_DIVERGED
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ValueError, OSError) as exc:
        # DataFormatError, ImageFormatError, SegmentationError, InvariantError
        # and metric shape errors all surface as data problems
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
