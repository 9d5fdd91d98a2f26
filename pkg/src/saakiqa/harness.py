"""Batch evaluation: manifest ingestion, scoring, per-codec statistics,
report emission, and a synthetic block-DCT distorter for self-contained
testing.

A manifest is UTF-8 CSV with header ``ref,dist,mos,codec``; image paths
resolve relative to the manifest's directory. Records are scored
independently (a bounded thread pool, capped by ``SAAKIQA_THREADS``), and
row failures are recorded without aborting the batch.
"""

from __future__ import annotations

import csv
import datetime
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._version import __version__
from .config import CODEC_LAMBDAS, QualityConfig
from .errors import (
    GeometryMismatchError,
    MalformedRowError,
    NoValidRecordsError,
    SaakIqaError,
)
from .image import as_image, read_pgm
from .metric import assess
from .stats import kendall_tau_b, logistic5_eval, logistic5_fit, pearson, psnr, spearman

_MANIFEST_HEADER = ("ref", "dist", "mos", "codec")
_KNOWN_CODECS = frozenset(CODEC_LAMBDAS)
_MIN_REGRESSION_N = 10


@dataclass(frozen=True)
class EvalRecord:
    """One manifest row: a reference/distorted pair with its MOS."""

    ref_path: str
    dist_path: str
    mos: float
    codec: str


@dataclass
class RecordResult:
    record: EvalRecord
    score: float | None = None
    psnr_db: float | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class CodecResult:
    """Fitted statistics for all records sharing one codec."""

    n: int
    n_scored: int
    plcc: float | None = None
    srcc: float | None = None
    krcc: float | None = None
    beta: list[float] | None = None
    fit_converged: bool | None = None
    warning: str | None = None


@dataclass
class EvalReport:
    results: list[RecordResult]
    codecs: dict[str, CodecResult]
    config: dict
    warnings: list[str] = field(default_factory=list)
    tool: str = f"saakiqa {__version__}"

    def to_dict(self) -> dict:
        """JSON-ready view with deterministic content (no timestamp)."""
        return {
            "tool": self.tool,
            "config": self.config,
            "warnings": list(self.warnings),
            "records": [
                {
                    "ref": r.record.ref_path,
                    "dist": r.record.dist_path,
                    "codec": r.record.codec,
                    "mos": r.record.mos,
                    "score": r.score,
                    "psnr_db": _json_float(r.psnr_db),
                    "error": r.error,
                }
                for r in self.results
            ],
            "codecs": {
                name: {
                    "n": c.n,
                    "n_scored": c.n_scored,
                    "plcc": c.plcc,
                    "srcc": c.srcc,
                    "krcc": c.krcc,
                    "beta": c.beta,
                    "fit_converged": c.fit_converged,
                    "warning": c.warning,
                }
                for name, c in sorted(self.codecs.items())
            },
        }


def _json_float(v):
    # JSON has no Infinity; None marks the identical-images PSNR sentinel.
    if v is None or not math.isfinite(v):
        return None
    return v


def parse_manifest(path) -> list[EvalRecord]:
    """Read evaluation records from a ``ref,dist,mos,codec`` CSV file.

    Blank lines are skipped, unknown codec strings map to ``other``, and
    relative image paths are resolved against the manifest's directory.
    Raises :class:`MalformedRowError` (naming the line) on bad rows.
    """
    base = os.path.dirname(os.path.abspath(path))
    records = []
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header_seen = False
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            if not header_seen:
                if tuple(c.strip().lower() for c in row) != _MANIFEST_HEADER:
                    raise MalformedRowError(
                        f"line {reader.line_num}: expected header "
                        f"{','.join(_MANIFEST_HEADER)}")
                header_seen = True
                continue
            if len(row) != 4:
                raise MalformedRowError(
                    f"line {reader.line_num}: expected 4 columns, got {len(row)}")
            ref, dist, mos_s, codec = (c.strip() for c in row)
            if not ref or not dist:
                raise MalformedRowError(f"line {reader.line_num}: empty image path")
            try:
                mos = float(mos_s)
            except ValueError:
                raise MalformedRowError(
                    f"line {reader.line_num}: unparsable mos {mos_s!r}") from None
            if not math.isfinite(mos):
                raise MalformedRowError(f"line {reader.line_num}: non-finite mos")
            codec = codec.lower()
            if codec not in _KNOWN_CODECS:
                codec = "other"
            records.append(EvalRecord(
                ref_path=_resolve(base, ref),
                dist_path=_resolve(base, dist),
                mos=mos,
                codec=codec,
            ))
    return records


def _resolve(base: str, p: str) -> str:
    return p if os.path.isabs(p) else os.path.join(base, p)


def _worker_count(n_records: int) -> int:
    workers = min(n_records, os.cpu_count() or 1)
    env = os.environ.get("SAAKIQA_THREADS")
    if env:
        try:
            workers = min(workers, max(1, int(env)))
        except ValueError:
            pass
    return max(1, workers)


def _score_record(record: EvalRecord, config: QualityConfig,
                  lam_override: float | None) -> RecordResult:
    try:
        if lam_override is not None:
            lam = lam_override
        elif record.codec in CODEC_LAMBDAS:
            lam = CODEC_LAMBDAS[record.codec]
        else:
            raise SaakIqaError(
                f"codec {record.codec!r} has no default lambda; pass an override")
        ref = read_pgm(record.ref_path)
        dist = read_pgm(record.dist_path)
        psnr_db = psnr(ref, dist)
        score, _ = assess(ref, dist, config.with_overrides(lam=lam))
        return RecordResult(record, score=score, psnr_db=psnr_db)
    except (SaakIqaError, OSError, ValueError) as exc:
        return RecordResult(record, error=f"{type(exc).__name__}: {exc}")


def _codec_stats(scored: list[RecordResult], n_total: int) -> CodecResult:
    result = CodecResult(n=n_total, n_scored=len(scored))
    if len(scored) < _MIN_REGRESSION_N:
        result.warning = (
            f"correlations omitted: {len(scored)} scored records < "
            f"{_MIN_REGRESSION_N}")
        return result
    scores = np.array([r.score for r in scored])
    mos = np.array([r.record.mos for r in scored])
    try:
        fit = logistic5_fit(scores, mos)
        result.plcc = pearson(logistic5_eval(fit.beta, scores), mos)
        result.srcc = spearman(scores, mos)
        result.krcc = kendall_tau_b(scores, mos)
        result.beta = [float(b) for b in fit.beta]
        result.fit_converged = fit.converged
    except SaakIqaError as exc:
        result.warning = f"correlations omitted: {type(exc).__name__}: {exc}"
    return result


def run_eval(records: list[EvalRecord], config: QualityConfig | None = None,
             lam_override: float | None = None) -> EvalReport:
    """Score every record and fit per-codec correlation statistics.

    The blend factor resolves as CLI override > per-codec default > row
    error for codec ``other``. Per-record failures become row-level error
    entries; :class:`NoValidRecordsError` is raised only when nothing at
    all could be scored. Output order follows the input order regardless
    of worker scheduling.
    """
    config = config or QualityConfig()
    workers = _worker_count(len(records))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(
                lambda r: _score_record(r, config, lam_override), records))
    else:
        results = [_score_record(r, config, lam_override) for r in records]

    if not any(r.ok for r in results):
        raise NoValidRecordsError("every record failed to score")

    codecs: dict[str, CodecResult] = {}
    for codec in sorted({r.record.codec for r in results}):
        of_codec = [r for r in results if r.record.codec == codec]
        codecs[codec] = _codec_stats([r for r in of_codec if r.ok], len(of_codec))

    warnings = [f"{name}: {c.warning}" for name, c in codecs.items() if c.warning]
    warnings.extend(
        f"record {i} ({os.path.basename(r.record.dist_path)}): {r.error}"
        for i, r in enumerate(results) if not r.ok)
    return EvalReport(
        results=results,
        codecs=codecs,
        config=_config_echo(config, lam_override),
        warnings=warnings,
    )


def _config_echo(config: QualityConfig, lam_override: float | None) -> dict:
    return {
        "lambda_override": lam_override,
        "codec_lambdas": dict(CODEC_LAMBDAS),
        "c": config.c,
        "h": config.h,
        "sigma": config.filter.sigma,
        "radius": config.filter.radius,
        "border": config.filter.border,
        "block_size": config.block_size,
        "num_stages": config.num_stages,
        "train_stride": config.train_stride,
        "std_threshold": config.std_threshold,
    }


_DCT_SIZE = 8


def _dct_matrix(n: int = _DCT_SIZE) -> np.ndarray:
    k = np.arange(n, dtype=np.float64)
    t = np.sqrt(2.0 / n) * np.cos(np.pi * (2.0 * k[None, :] + 1.0) * k[:, None] / (2.0 * n))
    t[0] /= np.sqrt(2.0)
    return t


def synth_distort(img, qstep: float) -> np.ndarray:
    """Compression-like distortion: per-block DCT coefficient quantization.

    Each non-overlapping 8x8 block is transformed by the orthonormal 2-D
    DCT-II, uniformly quantized with step ``qstep``, inverse transformed,
    and clamped to [0, 255]. Small steps approach identity; large steps
    produce blocking artifacts.
    """
    img = as_image(img)
    if qstep <= 0:
        raise ValueError("qstep must be positive")
    h, w = img.shape
    n = _DCT_SIZE
    if h % n or w % n:
        raise GeometryMismatchError(f"{w}x{h} image not divisible by {n}")
    t = _dct_matrix(n)
    blocks = img.reshape(h // n, n, w // n, n).transpose(0, 2, 1, 3)
    coefs = t @ blocks @ t.T
    coefs = np.round(coefs / qstep) * qstep
    out = (t.T @ coefs @ t).transpose(0, 2, 1, 3).reshape(h, w)
    return np.clip(out, 0.0, 255.0)


def emit_report(report: EvalReport, json_path=None, csv_path=None,
                scatter_path=None) -> None:
    """Write the report in up to three forms; missing paths are skipped.

    JSON carries the full report with stable key order plus a
    ``generated_at`` timestamp (the one key excluded from byte-stability).
    CSV holds one ``ref,dist,codec,score,psnr_db,mos`` row per record.
    The scatter TSV holds one block per fitted codec with
    ``score<TAB>mos<TAB>fit`` rows sorted by score, ready for plotting.
    """
    if json_path:
        payload = report.to_dict()
        payload["generated_at"] = datetime.datetime.now(
            datetime.timezone.utc).isoformat()
        with open(json_path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")

    if csv_path:
        with open(csv_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["ref", "dist", "codec", "score", "psnr_db", "mos"])
            for r in report.results:
                writer.writerow([
                    r.record.ref_path,
                    r.record.dist_path,
                    r.record.codec,
                    "" if r.score is None else repr(r.score),
                    "" if r.psnr_db is None else repr(r.psnr_db),
                    repr(r.record.mos),
                ])

    if scatter_path:
        with open(scatter_path, "w", encoding="utf-8") as fh:
            for codec, cres in sorted(report.codecs.items()):
                if cres.beta is None:
                    continue
                rows = [r for r in report.results
                        if r.ok and r.record.codec == codec]
                rows.sort(key=lambda r: r.score)
                fh.write(f"# codec={codec} n={len(rows)}\n")
                beta = np.asarray(cres.beta)
                for r in rows:
                    fit = logistic5_eval(beta, r.score)
                    fh.write(f"{r.score!r}\t{r.record.mos!r}\t{fit!r}\n")
