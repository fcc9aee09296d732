"""Command line entry point: ``nrsp {segment,noise,edges,eval,bench,fixtures}``.

Exit status: 0 on success, 1 if some benchmark cells failed, 2 on
configuration or usage errors.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import bench
from .centroidx import segment
from .clustering import ClusterParams
from .errors import ConfigError, NrspError
from .imagecore import load_image, load_labels, rgb_to_lab, save_labels, save_png
from .metrics import evaluate_segmentation, normalize_edges
from .noise import NoiseSpec
from .sbed import DETECTORS, detect_edges

log = logging.getLogger("nrsp")


def _on_off(v):
    if v not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected 'on' or 'off'")
    return v == "on"


def build_parser():
    p = argparse.ArgumentParser(prog="nrsp", description=__doc__.splitlines()[0])
    p.add_argument("--config", type=Path, help="key = value benchmark config file")
    p.add_argument("--seed", type=int, default=0, help="default random seed")
    p.add_argument("--threads", type=int, default=None, help="worker threads for bench")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("segment", help="superpixel-segment an image")
    s.add_argument("image", type=Path)
    s.add_argument("--method", choices=("slic", "snic"), default="slic")
    s.add_argument("--centroidx", type=_on_off, default=True, metavar="{on,off}")
    s.add_argument("--k", type=int, default=600)
    s.add_argument("--compactness", type=float, default=30.0)
    s.add_argument("--max-iters", type=int, default=10)
    s.add_argument("--out", type=Path, required=True, help="16-bit label PNG")

    s = sub.add_parser("noise", help="corrupt an image with seeded noise")
    s.add_argument("image", type=Path)
    s.add_argument("--kind", choices=("gaussian", "sp"), required=True)
    s.add_argument("--level", type=float, required=True)
    s.add_argument("--seed", type=int, default=None, dest="noise_seed")
    s.add_argument("--out", type=Path, required=True)

    s = sub.add_parser("edges", help="edge map from SBED or a baseline")
    s.add_argument("image", type=Path)
    s.add_argument("--detector", choices=DETECTORS, default="sbed")
    s.add_argument("--k", type=int, default=1500)
    s.add_argument("--threshold", type=float, default=0.1, help="baseline threshold as a fraction of max")
    s.add_argument("--out", type=Path, required=True)

    s = sub.add_parser("eval", help="BR/UE/CO of a label map against ground truth")
    s.add_argument("labels", type=Path)
    s.add_argument("groundtruth", type=Path)
    s.add_argument("--eps", type=int, default=2)

    s = sub.add_parser("bench", help="run the benchmark grid described by --config")
    s.add_argument("--edges-only", action="store_true", help="skip the segmentation grid")

    s = sub.add_parser("fixtures", help="write the synthetic fixture dataset")
    s.add_argument("out", type=Path)
    s.add_argument("--n", type=int, default=10)
    s.add_argument("--size", type=int, default=128)
    return p


def _cmd_segment(args):
    lab = rgb_to_lab(load_image(args.image))
    params = ClusterParams(k=args.k, compactness=args.compactness, max_iters=args.max_iters)
    labels, _ = segment(args.method, lab, params, centroidx=args.centroidx)
    sidecar = save_labels(args.out, labels)
    print(sidecar.read_text().strip())
    return 0


def _cmd_noise(args):
    seed = args.seed if args.noise_seed is None else args.noise_seed
    try:
        spec = NoiseSpec(args.kind, args.level, seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    save_png(args.out, spec.apply(load_image(args.image)))
    return 0


def _cmd_edges(args):
    edges = detect_edges(args.detector, load_image(args.image), k=args.k, threshold=args.threshold)
    save_png(args.out, np.round(normalize_edges(edges) * 255.0).astype(np.uint8))
    return 0


def _cmd_eval(args):
    rep = evaluate_segmentation(load_labels(args.labels), load_labels(args.groundtruth), args.eps)
    print("k_out,br,ue,co")
    print(f"{rep.k_out},{rep.br:.6f},{rep.ue:.6f},{rep.co:.6f}")
    return 0


def _cmd_bench(args):
    cfg = bench.load_config(args.config) if args.config else bench.BenchConfig()
    if args.threads is not None:
        cfg = replace(cfg, threads=args.threads)
    failed = 0
    if not args.edges_only:
        rows, f = bench.run_benchmark(cfg)
        failed += f
        print(f"{len(rows)} segmentation rows -> {cfg.output_dir / 'segmentation.csv'}")
    if cfg.edge_detectors:
        rows, f = bench.run_edge_benchmark(cfg)
        failed += f
        print(f"{len(rows)} edge rows -> {cfg.output_dir / 'edges.csv'}")
    elif args.edges_only:
        raise ConfigError("--edges-only needs edge_detectors in the config")
    if failed:
        print(f"{failed} cells failed", file=sys.stderr)
        return 1
    return 0


def _cmd_fixtures(args):
    entries = bench.write_fixtures(args.out, args.n, args.size, args.seed)
    print(f"wrote {len(entries)} fixtures to {args.out}")
    return 0


COMMANDS = {
    "segment": _cmd_segment,
    "noise": _cmd_noise,
    "edges": _cmd_edges,
    "eval": _cmd_eval,
    "bench": _cmd_bench,
    "fixtures": _cmd_fixtures,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NrspError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
