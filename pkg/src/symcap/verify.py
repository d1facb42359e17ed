"""Batch verification harness.

Runs the capacity estimators over a suite of bodies and checks the headline
inequalities: the capacity ratio c_EHZ / c_J must be at least 2 + 1/n for
centrally symmetric bodies and at least 1 + 1/(2n) in general, and symmetric
bodies additionally get the boundary-curve length check against 4 + 4/d.
Everything the run produces is deterministic in the seed: randomness is
drawn from per-body streams derived from (seed, body index), report rows
follow input order, and wall-clock times stay out of the reports unless
explicitly requested.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, asdict
from pathlib import Path
from typing import Optional

import numpy as np

from ._util import fmt
from .capacity import OptimizerConfig, c_j, clarke_minimize, ellipsoid_ehz_exact
from .errors import SpecParseError
from .geometry import Ellipsoid, body_from_dict
from .girth import check_schaffer_bound, symmetric_girth

DEFAULT_PROFILES = {
    "fast": {"points": 128, "restarts": 4, "girth_samples": 2048},
    "full": {"points": 256, "restarts": 8, "girth_samples": 4096},
}

CSV_COLUMNS = [
    "body_id",
    "dim",
    "n",
    "symmetric",
    "c_j",
    "c_j_method",
    "clarke",
    "clarke_method",
    "exact",
    "ratio",
    "bound_general",
    "margin_general",
    "bound_symmetric",
    "margin_symmetric",
    "girth_length",
    "schaffer_bound",
    "schaffer_margin",
    "seed",
    "status",
    "wall_time_s",
]


@dataclass
class VerificationRecord:
    """One body's results and inequality margins."""

    body_id: str
    dim: int = 0
    n: int = 0
    symmetric: Optional[bool] = None
    c_j: Optional[float] = None
    c_j_method: Optional[str] = None
    clarke: Optional[float] = None
    clarke_method: Optional[str] = None
    exact: Optional[float] = None
    ratio: Optional[float] = None
    bound_general: Optional[float] = None
    margin_general: Optional[float] = None
    bound_symmetric: Optional[float] = None
    margin_symmetric: Optional[float] = None
    girth_length: Optional[float] = None
    schaffer_bound: Optional[float] = None
    schaffer_margin: Optional[float] = None
    seed: int = 0
    status: str = "ok"
    wall_time_s: Optional[float] = None

    def margins(self):
        return [
            m
            for m in (
                self.margin_general,
                self.margin_symmetric,
                self.schaffer_margin,
            )
            if m is not None
        ]

    def passed(self, tol: float) -> bool:
        if self.status != "ok":
            return False
        return all(m >= -tol for m in self.margins())


def _derived_seed(base_seed: int, index: int, salt: int = 0) -> int:
    return int(np.random.SeedSequence([base_seed, index, salt]).generate_state(1)[0])


def load_suite(path) -> dict:
    """Parse a suite description, reporting position info on bad JSON."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SpecParseError(f"cannot read suite file {path}: {exc}") from exc
    try:
        suite = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecParseError(
            f"suite parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(suite, dict) or "bodies" not in suite:
        raise SpecParseError('suite must be an object with a "bodies" list')
    if not isinstance(suite["bodies"], list):
        raise SpecParseError('"bodies" must be a list')
    return suite


def verify_body(entry: dict, index: int, seed: int, profile_params: dict, tol: float):
    """Produce the verification record for one suite entry."""
    body_id = str(entry.get("id", f"body{index}"))
    record = VerificationRecord(body_id=body_id, seed=_derived_seed(seed, index))
    start = time.perf_counter()
    try:
        body = body_from_dict(entry)
        if body.dim % 2 != 0:
            raise SpecParseError(
                f"verification needs an even dimension, got {body.dim}"
            )
        record.dim = body.dim
        record.n = body.dim // 2
        record.symmetric = bool(body.is_symmetric)

        cj_res = c_j(body, seed=_derived_seed(seed, index, 1))
        record.c_j = cj_res.value
        record.c_j_method = cj_res.method

        config = OptimizerConfig(
            seed=record.seed,
            restarts=int(profile_params.get("restarts", 8)),
            points=int(profile_params.get("points", 256)),
        )
        clarke_res = clarke_minimize(body, config)
        record.clarke = clarke_res.value
        record.clarke_method = clarke_res.method

        if isinstance(body, Ellipsoid):
            record.exact = ellipsoid_ehz_exact(body).value

        record.ratio = record.clarke / record.c_j
        record.bound_general = 1.0 + 1.0 / (2.0 * record.n)
        record.margin_general = record.ratio - record.bound_general
        if record.symmetric:
            record.bound_symmetric = 2.0 + 1.0 / record.n
            record.margin_symmetric = record.ratio - record.bound_symmetric

            girth_len, girth_loop = symmetric_girth(
                body,
                n_samples=int(profile_params.get("girth_samples", 4096)),
                rng=_derived_seed(seed, index, 2),
            )
            record.girth_length = girth_len
            report = check_schaffer_bound(body, girth_loop)
            record.schaffer_bound = report["bound"]
            record.schaffer_margin = report["margin"]
    except Exception as exc:  # record per-body failures, keep the run going
        record.status = f"error: {type(exc).__name__}: {exc}"
    record.wall_time_s = time.perf_counter() - start
    return record


def write_reports(records, out_dir, seed, profile, tol, timings=False):
    """Write report.csv and report.json; returns their paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "report.csv"
    json_path = out_dir / "report.json"

    lines = [",".join(CSV_COLUMNS)]
    for rec in records:
        row = []
        for col in CSV_COLUMNS:
            value = getattr(rec, col)
            if col == "wall_time_s" and not timings:
                value = None
            row.append(fmt(value))
        lines.append(",".join(row))
    csv_path.write_text("\n".join(lines) + "\n")

    payload = {
        "seed": seed,
        "profile": profile,
        "tolerance": tol,
        "all_pass": all(r.passed(tol) for r in records),
        "records": [],
    }
    for rec in records:
        data = asdict(rec)
        if not timings:
            data.pop("wall_time_s")
        payload["records"].append(data)
    json_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return csv_path, json_path


def run_verify(
    suite,
    out_dir,
    seed: int = 0,
    profile: str = "fast",
    tol: float = 1e-2,
    jobs: int = 1,
    timings: bool = False,
):
    """Run the suite and persist reports; returns (exit_code, records).

    Exit code 0 means every body was processed and every inequality margin
    is at least -tol; any error or violated margin gives 1.
    """
    if isinstance(suite, (str, Path)):
        suite = load_suite(suite)
    profiles = {**DEFAULT_PROFILES, **suite.get("profiles", {})}
    if profile not in profiles:
        raise SpecParseError(
            f"unknown profile {profile!r}; available: {sorted(profiles)}"
        )
    params = profiles[profile]
    bodies = suite["bodies"]

    if jobs > 1 and len(bodies) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            records = list(
                pool.map(
                    lambda pair: verify_body(pair[1], pair[0], seed, params, tol),
                    enumerate(bodies),
                )
            )
    else:
        records = [
            verify_body(entry, i, seed, params, tol)
            for i, entry in enumerate(bodies)
        ]

    write_reports(records, out_dir, seed, profile, tol, timings=timings)
    exit_code = 0 if all(r.passed(tol) for r in records) else 1
    return exit_code, records
