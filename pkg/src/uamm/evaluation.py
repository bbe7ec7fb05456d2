"""Quantified comparison of the prediction modes.

The runner drives both modes over the same frames with shared motion
search, accumulates quality and a rate proxy per operating point, and
reduces mode pairs to a Bjontegaard delta rate.

Rate points sweep block size and search range rather than a quantiser:
there is no residual coding here, so the proxy rate is motion vector bits
(signed exp-Golomb against the previous block's vector) plus a residual
energy term, log2(block SAD + 1) summed over blocks. Proxy rates are only
comparable between modes of the same run, never to real bitrates.

Reference frames are the source frames themselves (lossless
reconstruction), so prediction quality isolates the motion model.
"""

from __future__ import annotations

import csv
import math
import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import IO, Optional

import numpy as np

from .kinematics import MotionVector, TimeInterval
from .motion_field import CELL_SIZE, MotionField, derive_field_params
from .predictor import (
    BlockSpec,
    full_search_me,
    predict_uamm,
    predict_uniform,
)
from .sequences import FrameBuffer, TrajectorySpec, read_yuv, synth_sequence

MODES = ("uniform", "uamm")

REPORT_COLUMNS = ("sequence", "rate_point", "mode", "mean_sad",
                  "pred_psnr_db", "rate_proxy", "corrected_pct")


class BdRateError(ValueError):
    """Raised when two curves cannot be reduced to a BD-rate."""


@dataclass(frozen=True)
class RdPoint:
    """One (rate, quality) sample of an RD curve."""

    rate: float
    psnr: float

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError(f"rate must be positive, got {self.rate}")


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """Peak signal-to-noise ratio between two 8-bit planes, in dB.

    Identical planes return +inf.
    """
    if a.shape != b.shape:
        raise ValueError(f"plane shapes differ: {a.shape} vs {b.shape}")
    diff = a.astype(np.int64) - b.astype(np.int64)
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(255.0 * 255.0 / mse)


def _validate_curve(name: str, curve) -> tuple[np.ndarray, np.ndarray]:
    if len(curve) != 4:
        raise BdRateError(f"{name} must have exactly 4 points, got {len(curve)}")
    rates = np.array([p.rate for p in curve], dtype=np.float64)
    quals = np.array([p.psnr for p in curve], dtype=np.float64)
    if not np.all(np.isfinite(rates)) or not np.all(np.isfinite(quals)):
        raise BdRateError(f"{name} has non-finite values")
    if np.any(np.diff(rates) <= 0):
        raise BdRateError(f"{name} rates must be strictly increasing")
    if np.any(np.diff(quals) <= 0):
        raise BdRateError(f"{name} is not monotonic: psnr must increase with rate")
    return rates, quals


def bd_rate(curve_a, curve_b) -> float:
    """Average rate difference of curve_b against curve_a, in percent.

    Classic cubic-fit Bjontegaard metric: fit log10(rate) as a cubic in
    PSNR for both curves, integrate over the common PSNR interval and map
    the mean log offset back to a ratio. Negative means curve_b reaches
    the same quality cheaper than curve_a.
    """
    rates_a, quals_a = _validate_curve("curve_a", curve_a)
    rates_b, quals_b = _validate_curve("curve_b", curve_b)
    lo = max(quals_a.min(), quals_b.min())
    hi = min(quals_a.max(), quals_b.max())
    if hi <= lo:
        raise BdRateError(
            f"no PSNR overlap: [{quals_a.min():.3f}, {quals_a.max():.3f}] vs "
            f"[{quals_b.min():.3f}, {quals_b.max():.3f}]"
        )
    fit_a = np.polyfit(quals_a, np.log10(rates_a), 3)
    fit_b = np.polyfit(quals_b, np.log10(rates_b), 3)
    int_a = np.polyint(fit_a)
    int_b = np.polyint(fit_b)
    area_a = np.polyval(int_a, hi) - np.polyval(int_a, lo)
    area_b = np.polyval(int_b, hi) - np.polyval(int_b, lo)
    avg_diff = (area_b - area_a) / (hi - lo)
    return float((10.0 ** avg_diff - 1.0) * 100.0)


@dataclass(frozen=True)
class SequenceSource:
    """Where a sequence's frames come from: a file or the generator."""

    name: str
    width: int
    height: int
    frames: int
    kind: str = "synth"                       # "yuv" or "synth"
    path: Optional[str] = None
    trajectory: Optional[TrajectorySpec] = None

    def __post_init__(self):
        if self.kind not in ("yuv", "synth"):
            raise ValueError(f"unknown sequence kind {self.kind!r}")
        if self.frames < 2:
            raise ValueError(f"need at least 2 frames to predict, got {self.frames}")
        if self.width % 4 or self.height % 4:
            raise ValueError(
                f"frame dimensions must be multiples of 4, got {self.width}x{self.height}"
            )
        if self.kind == "yuv" and not self.path:
            raise ValueError("yuv sequence needs a path")
        if self.kind == "synth" and self.trajectory is None:
            raise ValueError("synthetic sequence needs a trajectory")

    def load(self) -> list[FrameBuffer]:
        if self.kind == "yuv":
            return read_yuv(self.path, self.width, self.height, self.frames)
        frames, _ = synth_sequence(self.trajectory, self.frames, self.width, self.height)
        return frames


@dataclass(frozen=True)
class RatePoint:
    """One operating point of the sweep."""

    label: str
    block_size: int
    search_range: int

    def __post_init__(self):
        if self.block_size < 4 or self.block_size % 4:
            raise ValueError(f"block size must be a multiple of 4, got {self.block_size}")
        if self.search_range < 0:
            raise ValueError(f"search range must be non-negative, got {self.search_range}")


DEFAULT_RATE_POINTS = (
    RatePoint("22", 8, 8),
    RatePoint("27", 16, 8),
    RatePoint("32", 32, 8),
    RatePoint("37", 64, 8),
)


@dataclass(frozen=True)
class ExperimentConfig:
    sequences: tuple[SequenceSource, ...]
    rate_points: tuple[RatePoint, ...] = DEFAULT_RATE_POINTS
    modes: tuple[str, ...] = MODES
    delta_max: int = 32
    output_dir: Optional[str] = None
    write_rd_curves: bool = False

    def __post_init__(self):
        if not self.modes:
            raise ValueError("at least one mode is required")
        for m in self.modes:
            if m not in MODES:
                raise ValueError(f"unknown mode {m!r}, valid modes: {', '.join(MODES)}")
        labels = [rp.label for rp in self.rate_points]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate rate point labels: {labels}")


@dataclass
class ReportRow:
    sequence: str
    rate_point: str
    mode: str
    mean_sad: float
    pred_psnr_db: float
    rate_proxy: float
    corrected_pct: float


@dataclass
class ExperimentReport:
    rows: list[ReportRow] = field(default_factory=list)
    bd_summary: list[tuple[str, Optional[float]]] = field(default_factory=list)


def _signed_exp_golomb_bits(v: int) -> int:
    u = 2 * v - 1 if v > 0 else -2 * v
    return 2 * (u + 1).bit_length() - 1


def _frame_blocks(width: int, height: int, block_size: int) -> list[BlockSpec]:
    blocks = []
    for y in range(0, height, block_size):
        for x in range(0, width, block_size):
            blocks.append(BlockSpec(x, y, min(block_size, width - x),
                                    min(block_size, height - y)))
    return blocks


@dataclass
class _ModeTally:
    sad_total: int = 0
    blocks: int = 0
    mv_bits: int = 0
    residual_bits: float = 0.0
    corrected: int = 0
    subblocks: int = 0
    frame_psnrs: list = field(default_factory=list)


def _run_rate_point(
    frames: list[FrameBuffer], rp: RatePoint, modes: tuple[str, ...], delta_max: int
) -> dict[str, _ModeTally]:
    """Predict every frame after the first at one operating point."""
    width, height = frames[0].width, frames[0].height
    blocks = _frame_blocks(width, height, rp.block_size)
    tick = TimeInterval(1)
    tallies = {m: _ModeTally() for m in modes}

    raw_fields = [MotionField.empty(0, width, height)]
    for k in range(1, len(frames)):
        src, ref = frames[k], frames[k - 1]
        if k >= 2:
            ref_field = derive_field_params(raw_fields[k - 1], raw_fields[k - 2])
        else:
            ref_field = raw_fields[0]

        field_k = MotionField.empty(k, width, height)
        pred_frames = {m: np.empty((height, width), dtype=np.uint8) for m in modes}
        prev_mv = {m: MotionVector(0, 0) for m in modes}
        for block in blocks:
            initial = full_search_me(src, ref, block, rp.search_range)
            field_k.set_block_mv(block.x, block.y, block.w, block.h, initial, tick)
            for m in modes:
                if m == "uniform":
                    result = predict_uniform(src, ref, block, rp.search_range,
                                             initial_mv=initial)
                else:
                    result = predict_uamm(src, ref, ref_field, block,
                                          rp.search_range, t0=1, t1=1, t2=1,
                                          delta_max=delta_max, initial_mv=initial)
                tally = tallies[m]
                tally.sad_total += result.sad
                tally.blocks += 1
                tally.mv_bits += _signed_exp_golomb_bits(
                    result.initial_mv.x - prev_mv[m].x)
                tally.mv_bits += _signed_exp_golomb_bits(
                    result.initial_mv.y - prev_mv[m].y)
                prev_mv[m] = result.initial_mv
                tally.residual_bits += math.log2(result.sad + 1)
                tally.corrected += result.corrected_count
                tally.subblocks += (block.w // CELL_SIZE) * (block.h // CELL_SIZE)
                pred_frames[m][block.y:block.y + block.h,
                               block.x:block.x + block.w] = result.pred_block
        for m in modes:
            tallies[m].frame_psnrs.append(psnr(src.luma, pred_frames[m]))
        raw_fields.append(field_k)
    return tallies


def _worker_count(n_jobs: int) -> int:
    raw = os.environ.get("UAMM_THREADS", "0")
    try:
        cap = int(raw)
    except ValueError:
        raise ValueError(f"UAMM_THREADS must be an integer, got {raw!r}")
    if cap < 0:
        raise ValueError(f"UAMM_THREADS must be non-negative, got {cap}")
    if cap == 0:
        cap = os.cpu_count() or 1
    return max(1, min(cap, n_jobs))


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Run every sequence at every rate point in every mode.

    Returns the report and, when an output directory is configured, writes
    report.csv, bd_summary.csv and optional RD curve dumps there. Output
    is a pure function of the config: no timestamps, stable ordering.
    """
    report = ExperimentReport()
    if not config.sequences:
        _maybe_write(config, report)
        return report

    loaded = [(src, src.load()) for src in config.sequences]
    jobs = [(si, ri) for si in range(len(loaded)) for ri in range(len(config.rate_points))]

    def run_job(job):
        si, ri = job
        return _run_rate_point(loaded[si][1], config.rate_points[ri],
                               config.modes, config.delta_max)

    workers = _worker_count(len(jobs))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_job, jobs))
    else:
        results = [run_job(j) for j in jobs]

    tally_by_job = dict(zip(jobs, results))
    curves: dict[tuple[str, str], list[RdPoint]] = {}
    for si, (source, _) in enumerate(loaded):
        for ri, rp in enumerate(config.rate_points):
            tallies = tally_by_job[(si, ri)]
            for m in config.modes:
                t = tallies[m]
                mean_sad = t.sad_total / t.blocks
                mean_psnr = (sum(t.frame_psnrs) / len(t.frame_psnrs)
                             if t.frame_psnrs else math.inf)
                rate_proxy = t.mv_bits + t.residual_bits
                corrected_pct = 100.0 * t.corrected / t.subblocks if t.subblocks else 0.0
                report.rows.append(ReportRow(
                    sequence=source.name,
                    rate_point=rp.label,
                    mode=m,
                    mean_sad=mean_sad,
                    pred_psnr_db=mean_psnr,
                    rate_proxy=rate_proxy,
                    corrected_pct=corrected_pct,
                ))
                if rate_proxy > 0:
                    curves.setdefault((source.name, m), []).append(
                        RdPoint(rate_proxy, mean_psnr))

    if "uniform" in config.modes and "uamm" in config.modes:
        for source, _ in loaded:
            report.bd_summary.append(
                (source.name, _try_bd(curves.get((source.name, "uniform"), []),
                                      curves.get((source.name, "uamm"), []))))

    _maybe_write(config, report)
    return report


def _try_bd(curve_a: list[RdPoint], curve_b: list[RdPoint]) -> Optional[float]:
    try:
        a = sorted(curve_a, key=lambda p: p.rate)
        b = sorted(curve_b, key=lambda p: p.rate)
        return bd_rate(a, b)
    except (BdRateError, ValueError):
        return None


def _fmt(v: float) -> str:
    return f"{v:.4f}"


def write_report_csv(report: ExperimentReport, stream: IO[str]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for r in report.rows:
        writer.writerow([r.sequence, r.rate_point, r.mode, _fmt(r.mean_sad),
                         _fmt(r.pred_psnr_db), _fmt(r.rate_proxy),
                         _fmt(r.corrected_pct)])


def write_bd_summary_csv(report: ExperimentReport, stream: IO[str]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["sequence", "bd_rate_pct"])
    for name, value in report.bd_summary:
        writer.writerow([name, "NA" if value is None else _fmt(value)])


def _safe_name(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]", "_", name)


def _maybe_write(config: ExperimentConfig, report: ExperimentReport) -> None:
    if config.output_dir is None:
        return
    os.makedirs(config.output_dir, exist_ok=True)
    with open(os.path.join(config.output_dir, "report.csv"), "w") as fh:
        write_report_csv(report, fh)
    with open(os.path.join(config.output_dir, "bd_summary.csv"), "w") as fh:
        write_bd_summary_csv(report, fh)
    if config.write_rd_curves:
        by_key: dict[tuple[str, str], list[ReportRow]] = {}
        for r in report.rows:
            by_key.setdefault((r.sequence, r.mode), []).append(r)
        for (seq, mode), rows in by_key.items():
            fname = f"rd_{_safe_name(seq)}_{mode}.dat"
            with open(os.path.join(config.output_dir, fname), "w") as fh:
                fh.write("# rate_proxy pred_psnr_db\n")
                for r in sorted(rows, key=lambda r: r.rate_proxy):
                    fh.write(f"{_fmt(r.rate_proxy)} {_fmt(r.pred_psnr_db)}\n")
