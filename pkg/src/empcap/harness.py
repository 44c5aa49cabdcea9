"""Experiment configuration, Monte-Carlo orchestration and CSV persistence."""

from __future__ import annotations

import csv
import io
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from . import channels as ch
from .protocol import (SchemeParams, TrialRecord, run_dithered, run_finite_horizon,
                       run_genie, run_horizon_free)
from .seeding import TrialSeeds, trial_seed

CSV_HEADER = ["seed", "n", "rate", "emp_capacity", "gap", "error", "discarded_blocks",
              "update_bit_errors"]
BLOCK_HEADER = ["seed", "n", "block", "start", "length", "accepted", "reason",
                "train_distance", "m_t", "m_u", "m_r", "bit_errors", "budget_bits"]


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    variant: str = "finite_horizon"
    mode: str = "protocol"          # protocol | genie
    n: int = 1 << 14
    q: int = 2
    a0: float = 0.75
    a1: float | None = None
    a2: float | None = None
    a3: float = 3 / 8
    a4: float = 1 / 16
    b0: int = 64
    sync: str = "free"
    arith: str = "fast"
    family_mode: str = "modulo_additive"
    genie_b: int = 1
    tau: float | None = None
    channel: str = "clean"
    dither: bool = False
    trials: int = 1
    seed: int = 0
    stop_times: list = field(default_factory=list)
    out: str | None = None
    verbose: bool = False
    strict: bool = True
    workers: int = 1

    def scheme(self) -> SchemeParams:
        hf = self.variant == "horizon_free"
        a1 = self.a1 if self.a1 is not None else (7 / 8 if hf else 1 / 2)
        a2 = self.a2 if self.a2 is not None else (1 / 8 if hf else 1 / 16)
        try:
            return SchemeParams(q=self.q, n=self.n, a0=self.a0, a1=a1, a2=a2,
                                sync_mode=self.sync, variant=self.variant,
                                family_mode=self.family_mode, b0=self.b0, a3=self.a3,
                                a4=self.a4, arith=self.arith, genie_b=self.genie_b,
                                tau_override=self.tau)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def horizons(self) -> list:
        if self.variant == "horizon_free" and self.stop_times:
            return list(self.stop_times)
        return [self.n]

    def validate(self) -> "ExperimentConfig":
        if self.mode not in ("protocol", "genie"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.mode == "genie" and self.arith != "exact":
            raise ConfigError("genie mode requires arith=exact")
        params = self.scheme()
        if self.mode == "protocol":
            for name, ok in params.conditions():
                if not ok and (self.strict or name in _HARD):
                    raise ConfigError(f"parameter condition violated: {name}")
        make_channel(self.channel, self.q, self.n)
        return self


_HARD = ("b <= n", "b_a < b (charged sync)", "2m <= b_p", "payload fits in s bits")

_BOOL = {"1": True, "true": True, "yes": True, "on": True,
         "0": False, "false": False, "no": False, "off": False}


def _coerce(name: str, raw: str):
    kinds = {f.name: f.type for f in fields(ExperimentConfig)}
    if name not in kinds:
        raise ConfigError(f"unknown config key {name!r}")
    kind = kinds[name]
    raw = raw.strip()
    try:
        if name == "stop_times":
            return [int(_num(v)) for v in raw.replace(",", " ").split()]
        if kind.startswith("bool"):
            return _BOOL[raw.lower()]
        if raw.lower() in ("none", "") and "None" in kind:
            return None
        if kind.startswith("int"):
            return int(_num(raw))
        if kind.startswith("float"):
            return float(_num(raw))
    except (KeyError, ValueError):
        raise ConfigError(f"bad value for {name}: {raw!r}") from None
    return raw


def _num(text: str):
    """Accepts plain numbers, p/q fractions and 2^k powers."""
    text = text.strip()
    if "^" in text:
        base, exp = text.split("^")
        return int(base) ** int(exp)
    if "/" in text:
        a, b = text.split("/")
        return float(a) / float(b)
    v = float(text)
    return int(v) if v.is_integer() and "." not in text and "e" not in text.lower() else v


def parse_config(text: str, overrides: dict | None = None) -> ExperimentConfig:
    """Flat key=value lines; '#' starts a comment."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value")
        key, raw = line.split("=", 1)
        values[key.strip()] = _coerce(key.strip(), raw)
    for key, raw in (overrides or {}).items():
        values[key] = _coerce(key, raw) if isinstance(raw, str) else raw
    return ExperimentConfig(**values).validate()


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    return parse_config(Path(path).read_text(), overrides)


def make_channel(spec: str, q: int = 2, n: int = 1 << 14) -> ch.Channel:
    """Build a channel from a spec string such as ``bsc:0.1`` or
    ``general:0.9,0.7``. See the README for the full list."""
    name, _, arg = spec.partition(":")
    name = name.strip().lower()

    def floats():
        return [float(_num(v)) for v in arg.split(",") if v.strip()]

    try:
        if name == "clean":
            return ch.clean(q)
        if name == "uniform":
            return ch.MemorylessAdditive([1 / q] * q)
        if name == "bsc":
            return ch.bsc(float(arg))
        if name == "memoryless":
            return ch.MemorylessAdditive(floats())
        if name == "individual":
            return ch.IndividualNoise(ch.read_noise_file(arg, q), q)
        if name == "fixed":
            return ch.FixedCompositionNoise.with_fraction(n, float(arg), q)
        if name == "adversary":
            return ch.StateConstrainedAdversary(float(arg), q)
        if name == "push_uniform":
            return ch.PushToUniformAdversary(q)
        if name == "output_only":
            return ch.OutputOnly(float(arg), q)
        if name == "general":
            if ";" in arg:
                rows = [[float(_num(v)) for v in r.split(",")] for r in arg.split(";")]
                return ch.GeneralMemoryless(rows)
            p00, p11 = floats()
            return ch.GeneralMemoryless.binary(p00, p11)
    except (ValueError, OSError) as exc:
        raise ConfigError(f"bad channel spec {spec!r}: {exc}") from None
    raise ConfigError(f"unknown channel family {name!r}")


def run_trial(config: ExperimentConfig, index: int, horizon: int | None = None) -> TrialRecord:
    seed = trial_seed(config.seed, index)
    horizon = horizon or config.n
    params = config.scheme()
    channel = make_channel(config.channel, config.q, horizon)
    seeds = TrialSeeds.from_seed(seed)
    if config.mode == "genie":
        return run_genie(replace(params, n=horizon), channel, seeds=seeds)
    if config.dither:
        return run_dithered(replace(params, n=horizon), channel, seeds=seeds, stop_time=horizon)
    if config.variant == "horizon_free":
        return run_horizon_free(params, channel, stop_time=horizon, seeds=seeds)
    return run_finite_horizon(replace(params, n=horizon), channel, seeds=seeds)


def _job(args):
    config, index, horizon = args
    return run_trial(config, index, horizon)


def run_trials(config: ExperimentConfig) -> list:
    jobs = [(config, i, h) for h in config.horizons() for i in range(config.trials)]
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            return list(pool.map(_job, jobs))
    return [_job(j) for j in jobs]


def summarize(records: list) -> dict:
    """Per-horizon summary: gap quantiles, error rate, discard rate."""
    out = {}
    for n in sorted({r.n for r in records}):
        rs = [r for r in records if r.n == n]
        gaps = sorted(r.gap for r in rs)
        blocks = sum(1 for r in rs for b in r.blocks if b.complete)
        out[n] = {
            "trials": len(rs),
            "median_rate": statistics.median(r.rate for r in rs),
            "median_gap": statistics.median(gaps),
            "gap_q10": _quantile(gaps, 0.1),
            "gap_q90": _quantile(gaps, 0.9),
            "error_rate": sum(r.error for r in rs) / len(rs),
            "discard_rate": (sum(r.discarded_blocks for r in rs) / blocks) if blocks else math.nan,
            "positive_rate_fraction": sum(r.rate > 0 for r in rs) / len(rs),
        }
    return out


def _quantile(sorted_vals: list, p: float) -> float:
    # linear interpolation between order statistics
    if not sorted_vals:
        return math.nan
    pos = p * (len(sorted_vals) - 1)
    lo = math.floor(pos)
    hi = min(lo + 1, len(sorted_vals) - 1)
    return sorted_vals[lo] + (sorted_vals[hi] - sorted_vals[lo]) * (pos - lo)


def record_row(rec: TrialRecord) -> dict:
    return {"seed": rec.seed, "n": rec.n, "rate": rec.rate, "emp_capacity": rec.emp_capacity,
            "gap": rec.gap, "error": int(rec.error), "discarded_blocks": rec.discarded_blocks,
            "update_bit_errors": rec.update_bit_errors}


def format_csv(rows: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for row in rows:
        w.writerow([repr(row[k]) if isinstance(row[k], float) else row[k] for k in CSV_HEADER])
    return buf.getvalue()


def parse_csv(text: str) -> list:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    rows = []
    for r in reader:
        rows.append({"seed": int(r["seed"]), "n": int(r["n"]), "rate": float(r["rate"]),
                     "emp_capacity": float(r["emp_capacity"]), "gap": float(r["gap"]),
                     "error": int(r["error"]), "discarded_blocks": int(r["discarded_blocks"]),
                     "update_bit_errors": int(r["update_bit_errors"])})
    return rows


def write_csv(path, records: list):
    Path(path).write_text(format_csv([record_row(r) for r in records]))


def read_csv(path) -> list:
    return parse_csv(Path(path).read_text())


def block_log_path(path) -> Path:
    p = Path(path)
    return p.with_name(p.stem + ".blocks" + (p.suffix or ".csv"))


def format_block_log(records: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BLOCK_HEADER)
    for r in records:
        for b in r.blocks:
            w.writerow([r.seed, r.n, b.index, b.start, b.length, int(b.accepted), b.reason,
                        repr(b.train_distance), b.m_t, b.m_u, b.m_r, b.bit_errors, b.budget_bits])
    return buf.getvalue()


def run_experiment(config: ExperimentConfig) -> tuple:
    """Run all trials, write the CSV (and block log when verbose), summarize."""
    records = run_trials(config)
    if config.out:
        write_csv(config.out, records)
        if config.verbose:
            block_log_path(config.out).write_text(format_block_log(records))
    return records, summarize(records)


def format_summary(summary: dict) -> str:
    lines = []
    for n, s in summary.items():
        lines.append(
            f"n={n} trials={s['trials']} median_rate={s['median_rate']:.6f} "
            f"median_gap={s['median_gap']:.6f} gap[10%,90%]=[{s['gap_q10']:.6f}, {s['gap_q90']:.6f}] "
            f"error_rate={s['error_rate']:.4f} discard_rate={s['discard_rate']:.4f}")
    return "\n".join(lines)


def inspect_block_log(text: str, seed: int | None = None) -> str:
    """Human-readable table of a per-block log."""
    rows = list(csv.DictReader(io.StringIO(text)))
    if seed is not None:
        rows = [r for r in rows if int(r["seed"]) == seed]
    out = [f"{'seed':>20} {'n':>7} {'blk':>4} {'start':>7} {'len':>6} {'acc':>3} "
           f"{'reason':>10} {'dist':>8} {'M_t':>5} {'M_u':>5} {'M_r':>6} {'errs':>4}"]
    for r in rows:
        dist = float(r["train_distance"])
        out.append(f"{r['seed']:>20} {r['n']:>7} {r['block']:>4} {r['start']:>7} {r['length']:>6} "
                   f"{r['accepted']:>3} {r['reason'] or '-':>10} {dist:8.4f} {r['m_t']:>5} "
                   f"{r['m_u']:>5} {r['m_r']:>6} {r['bit_errors']:>4}")
    return "\n".join(out)
