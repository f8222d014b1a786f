"""Command-line entry point with deterministic, reproducible file outputs.

All CSV files use '.' as the decimal separator and 17 significant digits for
reals, so 64-bit floats round-trip exactly; repeated runs with identical
config and seed produce byte-identical files.

Exit codes: 0 ok, 1 benchmark failure, 2 numerical failure, 3 degenerate input.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .bounds import jordan_constants, sufficient_b, decay_bound
from .entropy import RegionSpec
from .exceptions import (
    BenchmarkFailed,
    DegenerateSpectrum,
    EmptyCurve,
    NearDegenerate,
    NonConvergence,
    NotHermitian,
)
from .experiments import (
    analytic_family,
    benchmark_kraus,
    golden_benchmark,
    distinct_magnitudes,
    gap_statistics,
    run_ensemble,
    scan_instance,
)
from .mps import (
    CASE1,
    CASE2,
    CASE3,
    KrausSet,
    build_case1,
    build_case2,
    build_case3,
    build_iumps,
    transfer_matrix,
)
from .numerics import RandomStream

EXIT_OK = 0
EXIT_BENCHMARK = 1
EXIT_NUMERICAL = 2
EXIT_DEGENERATE = 3

_CASES = {"1": CASE1, "2": CASE2, "3": CASE3, "a": "golden", "golden": "golden"}


@dataclass(frozen=True)
class RunConfig:
    """Flat run configuration; defaults reproduce the standard parameter set."""

    d_s: int = 3
    d_M: int = 4
    len_a: int = 1
    len_c: int = 1
    b_max_limit: int = 40
    k: int = 12
    n_instances: int = 1
    case_tag: str = CASE1
    master_seed: int = 0
    threshold: float = 1e-12
    peripheral_tol: float = 1e-8
    burn_in: int = 3
    jobs: int = 1
    output_dir: str = "."
    kraus_path: str | None = None  # reload an instance instead of sampling
    save_kraus: bool = False  # persist the constructed instance as JSON

    def validate(self) -> None:
        if self.b_max_limit % 2 != 0:
            raise ValueError("b_max_limit must be even")
        if self.n_instances < 1:
            raise ValueError("n_instances must be >= 1")


def load_config(path: str | None, overrides: dict) -> RunConfig:
    """Config file first, then command-line flags on top."""
    base: dict = {}
    if path is not None:
        base = json.loads(Path(path).read_text())
    base.update({k: v for k, v in overrides.items() if v is not None})
    config = RunConfig(**base)
    config.validate()
    return config


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _write(path: Path, lines: list[str]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")


def _instance(config: RunConfig, instance_id: int):
    kraus = _kraus(config, instance_id)
    _persist_kraus(config, kraus, instance_id)
    return build_iumps(kraus, config.peripheral_tol)


_KRAUS_BUILDERS = {CASE1: build_case1, CASE2: build_case2, CASE3: build_case3}


def _kraus(config: RunConfig, instance_id: int):
    if config.kraus_path is not None:
        return KrausSet.from_json(Path(config.kraus_path).read_text())
    if config.case_tag == "golden":
        return benchmark_kraus()
    stream = RandomStream(config.master_seed, instance_id)
    return _KRAUS_BUILDERS[config.case_tag](config.d_s, config.d_M, stream)


def _persist_kraus(config: RunConfig, kraus, instance_id: int) -> None:
    if config.save_kraus:
        out = Path(config.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"kraus_{instance_id}.json").write_text(kraus.to_json() + "\n")


def cmd_spectrum(config: RunConfig) -> int:
    out = Path(config.output_dir)
    rows = ["instance_id,eig_index,re,im,abs,is_peripheral"]
    gap_payload: dict = {}
    for i in range(config.n_instances):
        kraus = _kraus(config, i)
        _persist_kraus(config, kraus, i)
        transfer = transfer_matrix(kraus, config.peripheral_tol)
        peripheral = set(transfer.peripheral_indices.tolist())
        for idx, v in enumerate(transfer.spectrum.values):
            rows.append(
                f"{i},{idx},{_fmt(v.real)},{_fmt(v.imag)},{_fmt(abs(v))},"
                f"{int(idx in peripheral)}"
            )
        if i == 0:
            gap_payload = {
                "nu_gap": transfer.nu_gap,
                "peripheral_count": int(len(peripheral)),
            }
            if transfer.nu_gap is None:
                gap_payload["error"] = "degenerate spectrum: every eigenvalue is peripheral"
    _write(out / "spectrum.csv", rows)
    (out / "gap.json").write_text(json.dumps(gap_payload, sort_keys=True) + "\n")
    if gap_payload.get("nu_gap") is None:
        return EXIT_DEGENERATE
    return EXIT_OK


def cmd_scan(config: RunConfig) -> int:
    out = Path(config.output_dir)
    mps = _instance(config, 0)
    curve = scan_instance(
        mps,
        RegionSpec(config.len_a, 2, config.len_c),
        config.b_max_limit,
        config.k,
        config.threshold,
        instance_id=0,
    )
    bound_values: dict[int, float] = {}
    try:
        constants = jordan_constants(mps)
        bound_values = {p.b_len: decay_bound(constants, p.b_len) for p in curve.points}
    except (NearDegenerate, DegenerateSpectrum):
        pass
    rows = ["b_len,qmi,qcmi,f,bound"]
    for p in curve.points:
        bound = _fmt(bound_values[p.b_len]) if p.b_len in bound_values else ""
        rows.append(f"{p.b_len},{_fmt(p.qmi)},{_fmt(p.qcmi)},{_fmt(p.f)},{bound}")
    _write(out / f"curve_{curve.instance_id}.csv", rows)
    return EXIT_OK


def cmd_ensemble(config: RunConfig) -> int:
    out = Path(config.output_dir)
    summary = run_ensemble(
        n=config.n_instances,
        case_mix={config.case_tag: 1.0},
        region=RegionSpec(config.len_a, 2, config.len_c),
        master_seed=config.master_seed,
        b_max_limit=config.b_max_limit,
        k=config.k,
        burn_in=config.burn_in,
        d_s=config.d_s,
        d_m=config.d_M,
        threshold=config.threshold,
        peripheral_tol=config.peripheral_tol,
        jobs=config.jobs,
    )
    rows = ["instance_id,nu_gap,b_max,rate,n_points"]
    for r in summary.records:
        rate = _fmt(r.rate) if r.rate is not None else ""
        rows.append(f"{r.instance_id},{_fmt(r.nu_gap)},{r.b_max},{rate},{r.n_points}")
    _write(out / "rates.csv", rows)
    rows = ["i,j,count"]
    for i in range(summary.histogram.shape[0]):
        for j in range(summary.histogram.shape[1]):
            c = int(summary.histogram[i, j])
            if c:
                rows.append(f"{i},{j},{c}")
    _write(out / "histogram.csv", rows)
    _write(out / "cdf_all.csv", ["rate"] + [_fmt(r) for r in summary.cdf_all])
    _write(out / "cdf_full.csv", ["rate"] + [_fmt(r) for r in summary.cdf_full])
    payload = {
        "config": asdict(config),
        "n_instances": summary.n_instances,
        "n_completed": len(summary.records),
        "n_skipped": len(summary.skipped),
        "skipped": [[i, msg] for i, msg in summary.skipped],
        "out_of_range": summary.out_of_range,
        "total_shifted": summary.total_shifted,
    }
    (out / "summary.json").write_text(json.dumps(payload, sort_keys=True) + "\n")
    if not summary.records:
        print("ensemble: every instance failed", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_bound(config: RunConfig) -> int:
    mps = _instance(config, 0)
    constants = jordan_constants(mps)
    payload = asdict(constants)
    b_suff = sufficient_b(constants, config.d_s)
    payload["sufficient_b"] = b_suff
    payload["sufficient_b_within_scan"] = b_suff <= config.b_max_limit
    print(json.dumps(payload, sort_keys=True))
    return EXIT_OK


def cmd_gapstats(config: RunConfig) -> int:
    out = Path(config.output_dir)
    stats = gap_statistics(config.n_instances, config.master_seed, config.d_s, config.d_M)
    rows = ["rank,one_minus_nu1,nu1_minus_nu2,nu2_minus_nu3"]
    for r in range(len(stats.one_minus_nu1)):
        rows.append(
            f"{r},{_fmt(stats.one_minus_nu1[r])},{_fmt(stats.nu1_minus_nu2[r])},"
            f"{_fmt(stats.nu2_minus_nu3[r])}"
        )
    _write(out / "gapstats.csv", rows)
    (out / "gapstats.json").write_text(json.dumps(stats.markers(), sort_keys=True) + "\n")
    return EXIT_OK


def cmd_benchmark(config: RunConfig) -> int:
    try:
        report = golden_benchmark(k=config.k)
    except BenchmarkFailed as exc:
        print(f"benchmark FAILED: {exc}")
        return EXIT_BENCHMARK
    print("golden instance:")
    print(f"  canonical deviation      {report.canonical_dev:.3e}")
    print(f"  fixed point vs I/4       {report.sigma_dev:.3e}  ({report.notes})")
    print(f"  nu_gap                   {report.nu_gap:.12f}")
    print(f"  I_th reference           {report.i_th:.17g}")
    print(f"  QMI(|B|=26)              {report.qmi_at_26:.17g}")
    print(f"  |QMI(26) - I_th|         {report.qmi_dev:.3e}")
    print(f"  rho_A dev (|B|=40)       {report.rho_a_dev:.3e}")
    print(f"  rho_AC dev (|B|=40)      {report.rho_ac_dev:.3e}")
    print(f"  QCMI curve               {len(report.qcmi_curve)} points, "
          f"b_max={report.qcmi_curve[-1][0]}, ln-monotone tail ok")

    stats = gap_statistics(200, config.master_seed, config.d_s, config.d_M)
    worst = stats.markers()["max_one_minus_nu1"]
    print(f"gap statistics (n=200): max |1 - |nu1|| = {worst:.3e}")
    if worst > 1e-12:
        print("benchmark FAILED: leading eigenvalue error above 1e-12")
        return EXIT_BENCHMARK

    for beta in (0.1, 0.01):
        fam = analytic_family("first", beta)
        mags = distinct_magnitudes(transfer_matrix(fam).spectrum.values)
        expected = np.array([1.0, 1.0 - beta, 1.0 - 2 * beta])
        if np.abs(mags - expected).max() > 1e-10:
            print(f"benchmark FAILED: first-family spectrum at beta={beta}")
            return EXIT_BENCHMARK
        print(
            f"first family beta={beta}: distinct |eig| = (1, 1-b, 1-2b); "
            f"population-sector split 2b = {2 * beta}, leading gap = {mags[0] - mags[1]:.6f}"
        )
    coeff = (np.sqrt(6) - 2) / np.sqrt(3)
    for beta in (1e-3, 1e-4):
        fam = analytic_family("second", beta)
        mags = distinct_magnitudes(transfer_matrix(fam).spectrum.values)
        dev = abs((mags[1] - mags[2]) - coeff * beta)
        if dev > 10 * beta**2:
            print(f"benchmark FAILED: second-family |nu2|-|nu3| at beta={beta}, dev={dev:.3e}")
            return EXIT_BENCHMARK
        print(f"second family beta={beta}: |nu2|-|nu3| matches {coeff:.6f}*beta to {dev:.1e}")
    print("benchmark PASSED")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="iumps",
        description="Random infinite uniform MPS: spectra, entropies, and QCMI decay",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("spectrum", "scan", "ensemble", "benchmark", "bound", "gapstats"):
        p = sub.add_parser(name)
        p.add_argument("--config", type=str, default=None, help="flat JSON config file")
        p.add_argument("--seed", type=int, default=None, help="master seed")
        p.add_argument("--case", type=str, choices=sorted(_CASES), default=None)
        p.add_argument("--n", type=int, default=None, help="number of instances")
        p.add_argument("--b-max", type=int, default=None, help="largest even |B|")
        p.add_argument("--k", type=int, default=None, help="QCMI floor exponent")
        p.add_argument("--jobs", type=int, default=None, help="parallel workers")
        p.add_argument("--out", type=str, default=None, help="output directory")
        p.add_argument("--kraus", type=str, default=None,
                       help="load the instance from a KrausSet JSON file")
        p.add_argument("--save-kraus", action="store_true", default=None,
                       help="persist the constructed instance as kraus_<id>.json")
    return parser


_COMMANDS = {
    "spectrum": cmd_spectrum,
    "scan": cmd_scan,
    "ensemble": cmd_ensemble,
    "benchmark": cmd_benchmark,
    "bound": cmd_bound,
    "gapstats": cmd_gapstats,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {
        "master_seed": args.seed,
        "case_tag": _CASES[args.case] if args.case is not None else None,
        "n_instances": args.n,
        "b_max_limit": args.b_max,
        "k": args.k,
        "jobs": args.jobs,
        "output_dir": args.out,
        "kraus_path": args.kraus,
        "save_kraus": args.save_kraus,
    }
    try:
        config = load_config(args.config, overrides)
        return _COMMANDS[args.command](config)
    except (NonConvergence, NotHermitian) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (DegenerateSpectrum, EmptyCurve) as exc:
        print(f"degenerate input: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except BenchmarkFailed as exc:
        print(f"benchmark failure: {exc}", file=sys.stderr)
        return EXIT_BENCHMARK


if __name__ == "__main__":
    sys.exit(main())
