"""Benchmark orchestration: dataset ingestion, experiment grid, CSV output.

A dataset directory holds ``images/<id>.png`` (or ``.ppm``) and
``groundtruth/<id>.png`` (16-bit label map). Without a dataset the built-in
synthetic fixtures are used.
"""
from __future__ import annotations

import configparser
import csv
import io
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .centroidx import segment
from .clustering import ClusterParams
from .errors import ConfigError, DimensionMismatch, EmptyDataset
from .fixtures import fixture_set
from .imagecore import load_image, load_labels, rgb_to_lab, save_labels, save_png
from .metrics import CSV_FIELDS, boundary_map, evaluate_segmentation, normalize_edges, psnr, ssim
from .noise import NoiseSpec
from .sbed import DETECTORS, detect_edges

log = logging.getLogger(__name__)

METHOD_NAMES = {
    "slic": ("slic", False),
    "snic": ("snic", False),
    "centroid-slic": ("slic", True),
    "centroid-snic": ("snic", True),
}
SEG_FIELDS = CSV_FIELDS + ("seed",)
SEG_CURVE_FIELDS = ("method", "noise_kind", "noise_level", "k_requested", "n", "k_out", "br", "ue", "co", "runtime_ms")
EDGE_FIELDS = ("image_id", "detector", "noise_kind", "noise_level", "seed", "psnr", "ssim")
EDGE_SUMMARY_FIELDS = ("detector", "noise_kind", "noise_level", "n", "psnr", "ssim", "psnr_rank", "ssim_rank")


@dataclass(frozen=True)
class DatasetEntry:
    id: str
    image_path: Path
    gt_label_path: Path


@dataclass
class BenchConfig:
    output_dir: Path = Path("bench_out")
    dataset_dir: Path | None = None
    methods: list = field(default_factory=lambda: ["slic", "centroid-slic", "snic", "centroid-snic"])
    k_values: list = field(default_factory=lambda: [64])
    # (kind, level) pairs; kind "none" is the noise-free condition
    noise: list = field(default_factory=lambda: [("none", 0.0)])
    seeds: list = field(default_factory=lambda: [0])
    eps: int = 2
    compactness: float = 30.0
    timing: bool = True
    edge_detectors: list = field(default_factory=list)
    edge_k: int = 1500
    fixtures_n: int = 10
    fixtures_size: int = 128
    threads: int = 1

    def __post_init__(self):
        self.output_dir = Path(self.output_dir)
        if self.dataset_dir is not None:
            self.dataset_dir = Path(self.dataset_dir)
        if not self.noise:
            self.noise = [("none", 0.0)]
        for name in ("methods", "k_values", "seeds"):
            if not getattr(self, name):
                raise ConfigError(f"{name} must not be empty")
        bad = [m for m in self.methods if m not in METHOD_NAMES]
        if bad:
            raise ConfigError(f"unknown methods {bad}; choose from {sorted(METHOD_NAMES)}")
        bad = [d for d in self.edge_detectors if d not in DETECTORS]
        if bad:
            raise ConfigError(f"unknown edge detectors {bad}; choose from {DETECTORS}")
        if list(self.k_values) != sorted(self.k_values):
            raise ConfigError("k_values must be sorted ascending")
        for kind, level in self.noise:
            if kind != "none":
                try:
                    NoiseSpec(kind, level)
                except ValueError as exc:
                    raise ConfigError(str(exc)) from exc
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")


def _split(v):
    return [s.strip() for s in v.split(",") if s.strip()]


def _bool(v):
    v = v.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {v!r}")


def _noise_item(s):
    if s == "none":
        return ("none", 0.0)
    kind, _, level = s.partition(":")
    if not level:
        raise ConfigError(f"noise entries look like 'gaussian:0.15' or 'sp:0.1', got {s!r}")
    return (kind, float(level))


_PARSERS = {
    "output_dir": Path,
    "dataset_dir": Path,
    "methods": _split,
    "k_values": lambda v: [int(x) for x in _split(v)],
    "noise": lambda v: [_noise_item(x) for x in _split(v)],
    "seeds": lambda v: [int(x) for x in _split(v)],
    "eps": int,
    "compactness": float,
    "timing": _bool,
    "edge_detectors": _split,
    "edge_k": int,
    "fixtures_n": int,
    "fixtures_size": int,
    "threads": int,
}


def parse_config(text: str, base_dir=None) -> BenchConfig:
    """Parse ``key = value`` lines (``#`` comments, comma-separated lists)."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        cp.read_string("[bench]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    kwargs = {}
    for key, raw in cp["bench"].items():
        if key not in _PARSERS:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            kwargs[key] = _PARSERS[key](raw)
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}") from exc
    if base_dir is not None:
        for key in ("output_dir", "dataset_dir"):
            if key in kwargs and not kwargs[key].is_absolute():
                kwargs[key] = Path(base_dir) / kwargs[key]
    return BenchConfig(**kwargs)


def load_config(path) -> BenchConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return parse_config(path.read_text(), base_dir=path.parent)


# ---------------------------------------------------------------------- dataset


def _image_size(path):
    with Image.open(path) as im:
        return im.size


def ingest_dataset(directory) -> list[DatasetEntry]:
    """Pair ``images/<id>.{png,ppm}`` with ``groundtruth/<id>.png``, sorted by id.

    Unmatched files and size mismatches are logged and skipped.
    """
    directory = Path(directory)
    images = {}
    for p in sorted((directory / "images").glob("*")):
        if p.suffix.lower() in (".png", ".ppm"):
            images.setdefault(p.stem, p)
    gts = {p.stem: p for p in sorted((directory / "groundtruth").glob("*.png"))}
    entries = []
    for key in sorted(images):
        if key not in gts:
            log.warning("image %s has no ground truth; skipped", key)
            continue
        if _image_size(images[key]) != _image_size(gts[key]):
            log.warning("%s", DimensionMismatch(f"{key}: image and ground truth sizes differ; skipped"))
            continue
        entries.append(DatasetEntry(key, images[key], gts[key]))
    for key in sorted(set(gts) - set(images)):
        log.warning("ground truth %s has no image; skipped", key)
    if not entries:
        raise EmptyDataset(f"no usable image/ground-truth pairs under {directory}")
    return entries


def write_fixtures(directory, n=10, size=128, seed=0) -> list[DatasetEntry]:
    """Write the synthetic fixture set in dataset layout."""
    directory = Path(directory)
    (directory / "images").mkdir(parents=True, exist_ok=True)
    (directory / "groundtruth").mkdir(parents=True, exist_ok=True)
    out = []
    for fid, rgb, gt in fixture_set(n, size, seed=seed):
        ip = directory / "images" / f"{fid}.png"
        gp = directory / "groundtruth" / f"{fid}.png"
        save_png(ip, rgb)
        save_labels(gp, gt)
        gp.with_suffix(".txt").unlink()
        out.append(DatasetEntry(fid, ip, gp))
    return out


def _load_items(cfg: BenchConfig):
    if cfg.dataset_dir is None:
        return [(fid, rgb, gt) for fid, rgb, gt in fixture_set(cfg.fixtures_n, cfg.fixtures_size)]
    return [(e.id, e, None) for e in ingest_dataset(cfg.dataset_dir)]


def _materialize(item):
    fid, rgb, gt = item
    if gt is None:
        return fid, load_image(rgb.image_path), load_labels(rgb.gt_label_path)
    return fid, rgb, gt


def _conditions(cfg):
    """Expand noise specs over seeds; the noise-free condition runs once."""
    for kind, level in cfg.noise:
        if kind == "none" or level == 0.0:
            yield "none", 0.0, cfg.seeds[0]
        else:
            for s in cfg.seeds:
                yield kind, level, s


def _noisy(rgb, kind, level, seed):
    if kind == "none":
        return rgb
    return NoiseSpec(kind, level, seed).apply(rgb)


def _fmt(v):
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.10g}"


def _write_csv(path, fields, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for r in rows:
        w.writerow([_fmt(r[f]) for f in fields])
    Path(path).write_text(buf.getvalue())


# ------------------------------------------------------------------ segmentation


def _segment_task(cfg, item, cond):
    fid, rgb, gt = _materialize(item)
    kind, level, seed = cond
    noisy = _noisy(rgb, kind, level, seed)
    lab = rgb_to_lab(noisy)
    rows = []
    for name in cfg.methods:
        method, cx = METHOD_NAMES[name]
        for k in cfg.k_values:
            row = dict(image_id=fid, method=name, noise_kind=kind, noise_level=level, k_requested=k, seed=seed)
            try:
                params = ClusterParams(k=k, compactness=cfg.compactness)
                t0 = time.perf_counter()
                labels, _ = segment(method, lab, params, centroidx=cx)
                ms = (time.perf_counter() - t0) * 1000.0
                rep = evaluate_segmentation(labels, gt, cfg.eps)
                row.update(k_out=rep.k_out, br=rep.br, ue=rep.ue, co=rep.co, runtime_ms=ms if cfg.timing else float("nan"))
            except Exception as exc:  # noqa: BLE001 - one bad cell must not stop the grid
                log.error("%s %s k=%d %s:%g seed=%d failed: %s", fid, name, k, kind, level, seed, exc)
                row.update(k_out="FAILED", br=float("nan"), ue=float("nan"), co=float("nan"), runtime_ms=float("nan"))
            rows.append(row)
    return rows


def _row_key(r):
    return (r["image_id"], r["method"], r["noise_kind"], r["noise_level"], r["k_requested"], r["seed"])


def aggregate_segmentation(rows):
    groups = {}
    for r in rows:
        if r["k_out"] == "FAILED":
            continue
        groups.setdefault((r["method"], r["noise_kind"], r["noise_level"], r["k_requested"]), []).append(r)
    out = []
    for key in sorted(groups):
        g = groups[key]
        agg = dict(zip(("method", "noise_kind", "noise_level", "k_requested"), key), n=len(g))
        for f in ("k_out", "br", "ue", "co", "runtime_ms"):
            agg[f] = float(np.mean([float(r[f]) for r in g]))
        out.append(agg)
    return out


def _run_tasks(fn, tasks, threads):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda t: fn(*t), tasks))
    else:
        results = [fn(*t) for t in tasks]
    return [r for batch in results for r in batch]


def run_benchmark(cfg: BenchConfig):
    """Segment every (image, noise, seed, method, k) cell and write the CSVs.

    Writes ``segmentation.csv`` and ``segmentation_curves.csv`` under
    ``cfg.output_dir``. Returns ``(rows, n_failed)``.
    """
    items = _load_items(cfg)
    tasks = [(cfg, item, cond) for item in items for cond in _conditions(cfg)]
    rows = sorted(_run_tasks(_segment_task, tasks, cfg.threads), key=_row_key)
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(cfg.output_dir / "segmentation.csv", SEG_FIELDS, rows)
    _write_csv(cfg.output_dir / "segmentation_curves.csv", SEG_CURVE_FIELDS, aggregate_segmentation(rows))
    failed = sum(r["k_out"] == "FAILED" for r in rows)
    return rows, failed


# ------------------------------------------------------------------------- edges


def edge_scores(edge, gt_labels):
    """PSNR and SSIM of a max-normalised edge map against the ground-truth boundary map."""
    ref = boundary_map(gt_labels).astype(np.float64)
    e = normalize_edges(edge)
    return psnr(e, ref), ssim(e, ref)


def _edge_task(cfg, item, cond):
    fid, rgb, gt = _materialize(item)
    kind, level, seed = cond
    noisy = _noisy(rgb, kind, level, seed)
    rows = []
    for det in cfg.edge_detectors:
        row = dict(image_id=fid, detector=det, noise_kind=kind, noise_level=level, seed=seed)
        try:
            p, s = edge_scores(detect_edges(det, noisy, k=cfg.edge_k), gt)
            row.update(psnr=p, ssim=s)
        except Exception as exc:  # noqa: BLE001
            log.error("%s %s failed: %s", fid, det, exc)
            row.update(psnr="FAILED", ssim="FAILED")
        rows.append(row)
    return rows


def _ranks(values):
    order = sorted(range(len(values)), key=lambda i: -values[i])
    ranks = [0] * len(values)
    for r, i in enumerate(order, 1):
        ranks[i] = r
    return ranks


def aggregate_edges(rows):
    groups = {}
    for r in rows:
        if r["psnr"] == "FAILED":
            continue
        groups.setdefault((r["noise_kind"], r["noise_level"]), {}).setdefault(r["detector"], []).append(r)
    out = []
    for cond in sorted(groups):
        dets = sorted(groups[cond])
        ps = [float(np.mean([r["psnr"] for r in groups[cond][d]])) for d in dets]
        ss = [float(np.mean([r["ssim"] for r in groups[cond][d]])) for d in dets]
        for d, p, s, rp, rs in zip(dets, ps, ss, _ranks(ps), _ranks(ss)):
            out.append(
                dict(detector=d, noise_kind=cond[0], noise_level=cond[1], n=len(groups[cond][d]), psnr=p, ssim=s, psnr_rank=rp, ssim_rank=rs)
            )
    return out


def run_edge_benchmark(cfg: BenchConfig):
    """Score every detector on every image/noise condition; writes ``edges.csv`` and ``edges_summary.csv``."""
    if not cfg.edge_detectors:
        raise ConfigError("edge_detectors is empty")
    items = _load_items(cfg)
    tasks = [(cfg, item, cond) for item in items for cond in _conditions(cfg)]
    key = lambda r: (r["image_id"], r["detector"], r["noise_kind"], r["noise_level"], r["seed"])  # noqa: E731
    rows = sorted(_run_tasks(_edge_task, tasks, cfg.threads), key=key)
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(cfg.output_dir / "edges.csv", EDGE_FIELDS, rows)
    _write_csv(cfg.output_dir / "edges_summary.csv", EDGE_SUMMARY_FIELDS, aggregate_edges(rows))
    failed = sum(r["psnr"] == "FAILED" for r in rows)
    return rows, failed
