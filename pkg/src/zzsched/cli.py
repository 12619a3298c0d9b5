"""Command-line front end: circuit in, schedule, pulses, simulated report out.

Every stage error surfaces as `error [module] message` on stderr with a
nonzero exit; reports are plain JSON/CSV so any plotting tool can consume
them, and re-running an identical config reproduces the bytes.
"""

import argparse
import concurrent.futures
import contextlib
import hashlib
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .circuit import GateTimes, benchmark, load_circuit, save_circuit, to_native
from .pulse import (
    OptimizeConfig,
    OptimizedPulse,
    RegionModel,
    dcg_sequence,
    load_pulse,
    optimize,
    save_pulse,
)
from .quantumsim import (
    backend_gate_times,
    dcg_library,
    gaussian_library,
    ramsey_experiment,
    sample_device,
    simulate_plan,
    suppression_sweep,
    uniform_device,
)
from .scheduler import SuppressionRequirement, par_sched, save_plan, schedule
from .scheduler import load_plan as load_plan_file
from .suppression import alpha_optimal, save_result
from .topology import adjacency, grid_snake_order, load_topology

TWO_PI = 2 * math.pi

BACKENDS = ("gaussian", "pert", "optctrl", "dcg")
GATE_KINDS = ("rx90", "id", "rzx90")


class PipelineError(RuntimeError):
    def __init__(self, module, message):
        super().__init__(message)
        self.module = module


@contextlib.contextmanager
def _stage(module):
    """Tag any failure inside a block with the owning module's name."""
    try:
        yield
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError(module, str(exc)) from exc


@dataclass(frozen=True)
class RunConfig:
    topology: str
    circuit: str
    policy: str = "both"  # zzx | par | both (both adds the baseline row)
    alpha: float = 0.5
    k: int = 3
    nq_max: int | None = None
    nc_max: float | None = None
    backend: str = "pert"
    lambda_mu_hz: float = 200e3
    lambda_sigma_hz: float = 50e3
    seeds: tuple = (0,)
    out_dir: str = "runs"

    def __post_init__(self):
        if self.policy not in ("zzx", "par", "both"):
            raise ValueError(f"unknown policy {self.policy!r}")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.nq_max is not None and self.nq_max <= 0:
            raise ValueError("n_q threshold must be positive")
        if self.nc_max is not None and self.nc_max <= 0:
            raise ValueError("n_c threshold must be positive")
        if self.backend not in BACKENDS:
            raise ValueError(f"unknown pulse backend {self.backend!r}")
        if self.lambda_mu_hz < 0 or self.lambda_sigma_hz < 0:
            raise ValueError("strength distribution must be nonnegative")
        if len(self.seeds) == 0:
            raise ValueError("need at least one seed")

    def to_json(self):
        return {
            "topology": self.topology,
            "circuit": self.circuit,
            "policy": self.policy,
            "alpha": self.alpha,
            "k": self.k,
            "nq_max": self.nq_max,
            "nc_max": self.nc_max,
            "backend": self.backend,
            "lambda_mu_hz": self.lambda_mu_hz,
            "lambda_sigma_hz": self.lambda_sigma_hz,
            "seeds": list(self.seeds),
            "out_dir": self.out_dir,
        }


# --------------------------------------------------------- pulse provisioning


def _pulse_cache_name(kind, m, backend, T, lams_hz):
    tag = hashlib.sha1(
        ",".join(f"{v:.6e}" for v in sorted(lams_hz)).encode()
    ).hexdigest()[:12]
    return f"{kind}_{backend}_{m}n_{round(T * 1e9)}ns_{tag}.json"


def _wrap(spec, kind, backend):
    return OptimizedPulse(spec, kind, backend, 0.0, 0, True, None)


def _build_pulse(kind, backend, m, lambda_hz):
    lam = TWO_PI * lambda_hz
    if backend == "gaussian":
        return _wrap(gaussian_library()[kind], kind, backend)
    if backend == "dcg":
        if kind == "rzx90":
            raise ValueError("no composed sequence for rzx90; it keeps the "
                             "plain Gaussian shape")
        name = "rx_half_pi" if kind == "rx90" else "identity"
        return _wrap(dcg_sequence(name), kind, backend)
    if kind == "rzx90":
        model = RegionModel("two", neighbor_lambdas_a=(lam,) * m,
                            neighbor_lambdas_b=(lam,) * m)
        return optimize(model, kind, backend, OptimizeConfig(T=80e-9))
    model = RegionModel("single", neighbor_lambdas_a=(lam,) * max(m, 1))
    return optimize(model, kind, backend)


def provision_pulses(g, backend, lambda_hz, pulses_dir, verbose=False):
    """One pulse per native kind, optimized for the device's worst-case
    neighbor counts and cached on disk by shape-defining parameters."""
    pulses_dir = Path(pulses_dir)
    pulses_dir.mkdir(parents=True, exist_ok=True)
    adj = adjacency(g)
    deg_max = max((len(a) for a in adj), default=1)
    times = backend_gate_times(backend)
    slots = {"rx90": times.rx90, "id": times.id, "rzx90": times.rzx90}
    counts = {"rx90": deg_max, "id": deg_max, "rzx90": max(deg_max - 1, 1)}
    out = {}
    for kind in GATE_KINDS:
        m = counts[kind]
        effective = "gaussian" if backend == "dcg" and kind == "rzx90" else backend
        name = _pulse_cache_name(kind, m, effective, slots[kind],
                                 (lambda_hz,) * m)
        path = pulses_dir / name
        if path.exists():
            out[kind] = load_pulse(path)
            if verbose:
                print(f"  pulse {kind}: cached {name}", file=sys.stderr)
            continue
        out[kind] = _build_pulse(kind, effective, m, lambda_hz)
        save_pulse(path, out[kind])
        if verbose:
            print(f"  pulse {kind}: optimized -> {name}", file=sys.stderr)
    return out


def _load_pulse_dir(path):
    pulses = {}
    files = sorted(Path(path).glob("*.json"))
    if not files:
        raise ValueError(f"no pulse files in {path}")
    for f in files:
        op = load_pulse(f)
        if op.target_gate in pulses:
            raise ValueError(f"duplicate pulse for {op.target_gate!r} ({f.name})")
        pulses[op.target_gate] = op
    return pulses


# ------------------------------------------------------------------ pipeline


def _schedule_policy(g, circ, policy, cfg, gate_times):
    if policy == "par":
        return par_sched(g, circ, gate_times=gate_times)
    if cfg.nq_max is None and cfg.nc_max is None:
        r = SuppressionRequirement.default(g)
    else:
        base = SuppressionRequirement.default(g)
        r = SuppressionRequirement(cfg.nq_max or base.max_n_q,
                                   cfg.nc_max or base.max_n_c)
    return schedule(g, circ, r, alpha=cfg.alpha, k=cfg.k, gate_times=gate_times)


def _simulate_seeds(g, plan, pulses, cfg, policy, threads):
    def one(seed):
        dev = sample_device(g, cfg.lambda_mu_hz, cfg.lambda_sigma_hz, seed)
        return simulate_plan(dev, plan, pulses, policy=policy,
                             pulse_backend=cfg.backend)

    if threads > 1 and len(cfg.seeds) > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(one, cfg.seeds))
    return [one(s) for s in cfg.seeds]


def run_pipeline(cfg, threads=1, verbose=False):
    """Schedule, provision pulses, simulate across seeds, write artifacts.

    Returns {policy: [SimReport]} after writing plan/pulse/report files
    under cfg.out_dir and printing the summary table.
    """
    with _stage("topology"):
        g = load_topology(cfg.topology)
    with _stage("circuit"):
        circ = to_native(load_circuit(cfg.circuit))
    gate_times = backend_gate_times(cfg.backend)
    policies = ("zzx", "par") if cfg.policy == "both" else (cfg.policy,)

    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    plans = {}
    with _stage("scheduler"):
        for policy in policies:
            plans[policy] = _schedule_policy(g, circ, policy, cfg, gate_times)
            save_plan(out_dir / f"plan_{policy}.json", plans[policy])
            if verbose:
                p = plans[policy]
                print(f"  {policy}: {len(p.layers)} layers, "
                      f"{p.total_duration * 1e9:.0f} ns", file=sys.stderr)

    with _stage("pulse"):
        pulses = provision_pulses(g, cfg.backend, cfg.lambda_mu_hz,
                                  out_dir / "pulses", verbose)

    reports = {}
    with _stage("quantumsim"):
        for policy in policies:
            reports[policy] = _simulate_seeds(g, plans[policy], pulses, cfg,
                                              policy, threads)

    with _stage("cli"):
        doc = _report_json(cfg, plans, reports)
        report_path = out_dir / "report.json"
        with open(report_path, "w") as fh:
            json.dump(doc, fh, indent=1, sort_keys=True)
            fh.write("\n")
    _print_summary(doc)
    return reports


def _report_json(cfg, plans, reports):
    runs = []
    for policy in sorted(reports):
        for rep in reports[policy]:
            runs.append({
                "policy": policy,
                "seed": rep.seed,
                "fidelity": rep.fidelity,
                "layers": len(rep.per_layer),
                "total_duration_ns": rep.total_duration * 1e9,
            })
    mean_fid = {p: float(np.mean([r.fidelity for r in reps]))
                for p, reps in reports.items()}
    summary = {
        "mean_fidelity": mean_fid,
        "layers": {p: len(plans[p].layers) for p in plans},
        "total_duration_ns": {p: plans[p].total_duration * 1e9 for p in plans},
        "fidelity_ratio_zzx_over_par": None,
        "duration_ratio_zzx_over_par": None,
    }
    if "zzx" in reports and "par" in reports:
        if mean_fid["par"] > 0:
            summary["fidelity_ratio_zzx_over_par"] = mean_fid["zzx"] / mean_fid["par"]
        if plans["par"].total_duration > 0:
            summary["duration_ratio_zzx_over_par"] = (
                plans["zzx"].total_duration / plans["par"].total_duration)
    times = backend_gate_times(cfg.backend)
    return {
        "config": cfg.to_json(),
        "meta": {
            "alpha": cfg.alpha,
            "k": cfg.k,
            "backend": cfg.backend,
            "policy": cfg.policy,
            "lambda_mu_hz": cfg.lambda_mu_hz,
            "lambda_sigma_hz": cfg.lambda_sigma_hz,
            "seeds": list(cfg.seeds),
            "gate_times_ns": {"rx90": times.rx90 * 1e9, "id": times.id * 1e9,
                              "rz": times.rz * 1e9, "rzx90": times.rzx90 * 1e9},
        },
        "runs": runs,
        "summary": summary,
    }


def _print_summary(doc):
    summary = doc["summary"]
    print(f"{'policy':<8} {'mean_fid':>10} {'layers':>8} {'duration_ns':>12}")
    for policy in sorted(summary["mean_fidelity"]):
        print(f"{policy:<8} {summary['mean_fidelity'][policy]:>10.4f} "
              f"{summary['layers'][policy]:>8d} "
              f"{summary['total_duration_ns'][policy]:>12.0f}")
    ratio = summary["fidelity_ratio_zzx_over_par"]
    if ratio is not None:
        print(f"fidelity improvement zzx/par: {ratio:.2f}x")
    dur = summary["duration_ratio_zzx_over_par"]
    if dur is not None:
        print(f"duration ratio zzx/par: {dur:.2f}")


# ---------------------------------------------------------------- subcommands


def _parse_qubits(text):
    if not text:
        return frozenset()
    return frozenset(int(tok) for tok in text.split(",") if tok)


def cmd_suppress(args):
    with _stage("topology"):
        g = load_topology(args.topology)
    with _stage("suppression"):
        q = _parse_qubits(args.qubits)
        res = alpha_optimal(g, q, args.alpha, k=args.k)
        save_result(args.out, res)
    print(f"n_q={res.n_q} n_c={res.n_c} objective={res.objective:.3f} "
          f"-> {args.out}")
    return 0


def cmd_bench(args):
    with _stage("circuit"):
        order = None
        if args.grid:
            rows, cols = (int(v) for v in args.grid.lower().split("x"))
            order = grid_snake_order(rows, cols)[: args.n]
        circ = benchmark(args.name, args.n, seed=args.seed, qubit_order=order)
        save_circuit(args.out, circ)
    print(f"{args.name}-{args.n}: {len(circ.gates)} gates -> {args.out}")
    return 0


def cmd_schedule(args):
    with _stage("topology"):
        g = load_topology(args.topology)
    with _stage("circuit"):
        circ = to_native(load_circuit(args.circuit))
    with _stage("scheduler"):
        cfg = RunConfig(args.topology, args.circuit, policy=args.policy,
                        alpha=args.alpha, k=args.k, nq_max=args.nq_max,
                        nc_max=args.nc_max, backend=args.backend)
        plan = _schedule_policy(g, circ, args.policy, cfg,
                                backend_gate_times(args.backend))
        save_plan(args.out, plan)
    print(f"{args.policy}: {len(plan.layers)} layers, "
          f"{plan.total_duration * 1e9:.0f} ns -> {args.out}")
    return 0


def cmd_optimize_pulse(args):
    with _stage("pulse"):
        op = _build_pulse(args.gate, args.backend, args.neighbors,
                          args.lambda_hz)
        save_pulse(args.out, op)
    print(f"{args.gate} [{args.backend}] converged={op.converged} "
          f"-> {args.out}")
    return 0


def cmd_simulate(args):
    with _stage("topology"):
        g = load_topology(args.topology)
    with _stage("scheduler"):
        plan = load_plan_file(args.plan)
    with _stage("pulse"):
        pulses = _load_pulse_dir(args.pulses)
    with _stage("quantumsim"):
        seeds = tuple(range(args.seed, args.seed + args.samples))
        backends = {op.backend for op in pulses.values()}
        label = backends.pop() if len(backends) == 1 else "mixed"
        reports = []
        for s in seeds:
            dev = sample_device(g, args.lambda_mu_hz, args.lambda_sigma_hz, s)
            reports.append(simulate_plan(dev, plan, pulses, pulse_backend=label))
    with _stage("cli"):
        doc = {
            "topology": args.topology,
            "plan": args.plan,
            "pulses": args.pulses,
            "lambda_mu_hz": args.lambda_mu_hz,
            "lambda_sigma_hz": args.lambda_sigma_hz,
            "seeds": list(seeds),
            "policy": reports[0].policy,
            "pulse_backend": label,
            "runs": [{"seed": r.seed, "fidelity": r.fidelity} for r in reports],
            "mean_fidelity": float(np.mean([r.fidelity for r in reports])),
            "total_duration_ns": plan.total_duration * 1e9,
        }
        with open(args.out, "w") as fh:
            json.dump(doc, fh, indent=1, sort_keys=True)
            fh.write("\n")
    print(f"mean fidelity {doc['mean_fidelity']:.4f} over {len(seeds)} "
          f"samples -> {args.out}")
    return 0


def cmd_ramsey(args):
    with _stage("topology"):
        g = load_topology(args.topology)
    with _stage("pulse"):
        pulses = _load_pulse_dir(args.pulses)
    with _stage("quantumsim"):
        dev = uniform_device(g, args.lambda_hz)
        res = ramsey_experiment(dev, pulses, args.policy, probe=args.probe,
                                control=args.control)
    with _stage("cli"):
        with open(args.out, "w") as fh:
            fh.write("tau_s,p_control0,p_control1\n")
            for tau, p0, p1 in zip(res.taus, res.populations[0],
                                   res.populations[1]):
                fh.write(f"{tau:.9e},{p0:.9e},{p1:.9e}\n")
    print(f"{args.policy}: effective ZZ {res.effective_zz_hz / 1e3:.3f} kHz "
          f"(fringes {res.freqs_hz[0] / 1e6:.4f} / {res.freqs_hz[1] / 1e6:.4f} "
          f"MHz, R^2 {min(res.r_squared):.3f}) -> {args.out}")
    return 0


def cmd_sweep(args):
    with _stage("pulse"):
        op = load_pulse(args.pulse)
    with _stage("quantumsim"):
        lams_hz = np.logspace(math.log10(args.lambda_hz_min),
                              math.log10(args.lambda_hz_max), args.points)
        curve = suppression_sweep(args.scenario, op,
                                  [TWO_PI * v for v in lams_hz])
    with _stage("cli"):
        with open(args.out, "w") as fh:
            fh.write("lambda_hz,infidelity\n")
            for lam, infid in curve:
                fh.write(f"{lam / TWO_PI:.9e},{infid:.9e}\n")
    print(f"{args.scenario}: {args.points} points -> {args.out}")
    return 0


def cmd_report(args):
    seeds = tuple(range(args.seed, args.seed + args.samples))
    with _stage("cli"):
        cfg = RunConfig(args.topology, args.circuit, policy=args.policy,
                        alpha=args.alpha, k=args.k, nq_max=args.nq_max,
                        nc_max=args.nc_max, backend=args.backend,
                        lambda_mu_hz=args.lambda_mu_hz,
                        lambda_sigma_hz=args.lambda_sigma_hz,
                        seeds=seeds, out_dir=args.out_dir)
    run_pipeline(cfg, threads=args.threads, verbose=args.verbose)
    return 0


# -------------------------------------------------------------------- parser


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--verbose", action="store_true")

    p = argparse.ArgumentParser(
        prog="zzsched",
        description="crosstalk-aware scheduling and pulse shaping toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("suppress", parents=[common],
                       help="find a cut meeting gate constraints")
    s.add_argument("--topology", required=True)
    s.add_argument("--qubits", default="")
    s.add_argument("--alpha", type=float, default=0.5)
    s.add_argument("--k", type=int, default=3)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_suppress)

    s = sub.add_parser("bench", parents=[common],
                       help="emit a deterministic benchmark circuit")
    s.add_argument("--name", required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--grid", default=None,
                   help="RxC; embed the chain as a grid snake")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("schedule", parents=[common],
                       help="layer a circuit over a device")
    s.add_argument("--topology", required=True)
    s.add_argument("--circuit", required=True)
    s.add_argument("--policy", choices=("zzx", "par"), default="zzx")
    s.add_argument("--alpha", type=float, default=0.5)
    s.add_argument("--k", type=int, default=3)
    s.add_argument("--nq-max", type=int, default=None)
    s.add_argument("--nc-max", type=float, default=None)
    s.add_argument("--backend", choices=BACKENDS, default="gaussian",
                   help="sets the gate slot durations")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_schedule)

    s = sub.add_parser("optimize-pulse", parents=[common],
                       help="shape one native-gate pulse")
    s.add_argument("--gate", choices=GATE_KINDS, required=True)
    s.add_argument("--backend", choices=BACKENDS, default="pert")
    s.add_argument("--neighbors", type=int, default=1)
    s.add_argument("--lambda-hz", type=float, default=200e3)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_optimize_pulse)

    s = sub.add_parser("simulate", parents=[common],
                       help="run a plan on sampled devices")
    s.add_argument("--topology", required=True)
    s.add_argument("--plan", required=True)
    s.add_argument("--pulses", required=True, help="directory of pulse JSON")
    s.add_argument("--samples", type=int, default=20)
    s.add_argument("--lambda-mu-hz", type=float, default=200e3)
    s.add_argument("--lambda-sigma-hz", type=float, default=50e3)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("ramsey", parents=[common],
                       help="probe the effective ZZ strength")
    s.add_argument("--topology", required=True)
    s.add_argument("--pulses", required=True)
    s.add_argument("--policy",
                   choices=("bare", "suppressed_B", "suppressed_C"),
                   default="bare")
    s.add_argument("--lambda-hz", type=float, default=200e3)
    s.add_argument("--probe", type=int, default=0)
    s.add_argument("--control", type=int, default=1)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_ramsey)

    s = sub.add_parser("sweep", parents=[common],
                       help="infidelity vs coupling strength curve")
    s.add_argument("--scenario",
                   choices=("single_gate_pair", "two_gate_chain"),
                   default="single_gate_pair")
    s.add_argument("--pulse", required=True)
    s.add_argument("--lambda-hz-min", type=float, default=10e3)
    s.add_argument("--lambda-hz-max", type=float, default=200e3)
    s.add_argument("--points", type=int, default=7)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("report", parents=[common],
                       help="full pipeline with summary table")
    s.add_argument("--topology", required=True)
    s.add_argument("--circuit", required=True)
    s.add_argument("--policy", choices=("zzx", "par", "both"), default="both")
    s.add_argument("--alpha", type=float, default=0.5)
    s.add_argument("--k", type=int, default=3)
    s.add_argument("--nq-max", type=int, default=None)
    s.add_argument("--nc-max", type=float, default=None)
    s.add_argument("--backend", choices=BACKENDS, default="pert")
    s.add_argument("--lambda-mu-hz", type=float, default=200e3)
    s.add_argument("--lambda-sigma-hz", type=float, default=50e3)
    s.add_argument("--samples", type=int, default=1)
    s.add_argument("--out-dir", default="runs")
    s.set_defaults(func=cmd_report)

    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PipelineError as exc:
        print(f"error [{exc.module}] {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
