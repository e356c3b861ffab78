"""Command line runner: ``qthermo {simulate,steady,otto,cool,check} SCENARIO [flags]``.

Exit status: 0 success, 1 configuration error, 2 numerical failure,
3 a thermodynamic audit failed.
"""
import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import operators as ops
from .baths import HarmonicField, ground_state_criterion, third_law_coupling_criterion
from .davies import CouplingChannel, build_generator, gibbs_state
from .devices import (OttoSpec, TricycleSpec, TruncationGuard, build_driven_tls, build_otto_cycle,
                      build_oscillator, build_tls, build_tricycle)
from .dynamics import propagate, spectral_gap, steady_state
from .errors import ConfigError, NumericalError, PhysicsViolation, SchemaError
from .floquet import DrivenGenerator, build_floquet_generator
from .ledger import FAIL, NOT_APPLICABLE, PASS, Verdict, build_ledger, floquet_currents, second_law_check
from .scenario import load_scenario
from .tables import write_table
from .thirdlaw import (CoolingTrajectory, cooling_sweep, fit_zeta, integrate_cooling,
                       thermoelectric_bound)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_PHYSICS = 0, 1, 2, 3
SUBCOMMANDS = ("simulate", "steady", "otto", "cool", "check")


@dataclass
class RunReport:
    subcommand: str
    digest: str
    verdicts: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)
    exit_status: int = EXIT_OK

    def finish(self):
        if any(v.status == FAIL for v in self.verdicts):
            self.exit_status = EXIT_PHYSICS
        return self

    def as_dict(self):
        return {"subcommand": self.subcommand, "scenario_digest": self.digest,
                "verdicts": [v.as_dict() for v in self.verdicts], "summary": self.summary,
                "outputs": self.outputs, "exit_status": self.exit_status}


# model binding

def _channels(scn, S, ids):
    return [CouplingChannel(S, scn.bath(b), b) for b in ids]


def static_generator(scn):
    """Davies generator for the static models (tls, oscillator, tricycle)."""
    m = scn.model
    kind = m["kind"]
    if kind == "tls":
        H, S = build_tls(m["omega0"])
        return build_generator(H, _channels(scn, S, m["baths"]))
    if kind == "oscillator":
        H, S = build_oscillator(m["omega"], m["n_max"])
        return build_generator(H, _channels(scn, S, m["baths"]))
    if kind == "tricycle":
        spec = TricycleSpec(m["omega_h"], m["omega_c"], scn.bath(m["hot"]), scn.bath(m["cold"]),
                            scn.bath(m["work"]), couplings=tuple(m.get("couplings", (1.0, 1.0, 1.0))))
        H, channels = build_tricycle(spec)
        gen = build_generator(H, channels)
        ids = {"hot": m["hot"], "cold": m["cold"], "work": m["work"]}
        return _rename(gen, ids)
    raise ConfigError(f"model kind {kind!r} is not a static model")


def _rename(gen, ids):
    terms = tuple(replace(t, bath_id=ids[t.bath_id]) for t in gen.terms)
    temps = {ids[k]: v for k, v in gen.temperatures.items()}
    baths = {ids[k]: v for k, v in gen.baths.items()}
    return replace(gen, terms=terms, temperatures=temps, baths=baths)


def floquet_generator(scn, q_max=None):
    m = scn.model
    ph = build_driven_tls(m["omega0"], m["g"], m["Omega"])
    sx = ops.pauli()[0]
    return build_floquet_generator(ph, _channels(scn, sx, m["baths"]), q_max)


def initial_state(kind, dim, H, seed):
    if kind == "ground" or kind == "excited":
        w, V = np.linalg.eigh(H)
        return ops.pure_state(V[:, 0 if kind == "ground" else -1])
    if kind == "maximally_mixed":
        return np.eye(dim, dtype=complex) / dim
    return ops.random_density(dim, np.random.default_rng(seed))


def _out_path(args, scn, name):
    d = Path(args.out or scn.output.get("dir", "."))
    d.mkdir(parents=True, exist_ok=True)
    return d / f"{scn.output.get('prefix', '')}{name}"


def _plot_script(path, csv_name, xcol, ycols):
    lines = ["set datafile separator ','", "set key autotitle columnhead",
             "plot " + ", ".join(f"'{csv_name}' using {xcol}:{c} with lines" for c in ycols)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# subcommands

def run_simulate(scn, args, report):
    m = scn.model
    run = scn.run
    driven = m["kind"] == "driven_tls"
    if driven:
        gen = DrivenGenerator(floquet_generator(scn, args.qmax or run.get("q_max")))
        H0 = gen.hamiltonian_at(0.0)
    elif m["kind"] in ("tls", "oscillator", "tricycle"):
        gen = static_generator(scn)
        H0 = gen.hamiltonian
    else:
        raise ConfigError(f"simulate does not support model kind {m['kind']!r}")
    dim = H0.shape[0]
    rho0 = initial_state(run.get("initial_state", "excited"), dim, H0, args.seed)
    t_end = args.tmax or run.get("t_end")
    if t_end is None:
        t_end = 20.0 / spectral_gap(gen if not driven else gen.gen)
    tol = args.tol or run.get("tol", 1e-8)
    samples = run.get("samples", 201)
    # The I-law audit differentiates E(t) numerically, so it runs on a grid
    # refined until the spacing resolves the fastest rate of the generator
    # (oscillation or relaxation, i.e. its spectral radius).
    static = gen.gen if driven else gen
    w_max = float(np.max(np.abs(np.linalg.eigvals(static.superoperator()))))
    if driven:
        w_max = max(w_max, 2 * math.pi / gen.periodic.period)
    refine = max(1, math.ceil(t_end / (samples - 1) * w_max / 0.02))
    ts = np.linspace(0.0, t_end, (samples - 1) * refine + 1)
    guard = TruncationGuard() if m["kind"] == "oscillator" else None
    traj = propagate(gen, rho0, t_end, tol=tol, t_eval=ts, on_step=guard)
    ledger = build_ledger(gen, traj.times, traj.states)
    res = np.abs(ledger.first_law_residual())
    scale = max(np.max(np.abs(ledger.P)), max(np.max(np.abs(J)) for J in ledger.J.values()), 1.0)
    ledger = ledger.subsample(refine)
    path = _out_path(args, scn, "trajectory.csv")
    ledger.to_csv(path)
    report.outputs.append(str(path))
    report.verdicts.append(Verdict("I", PASS if res.max() < 1e-6 * scale else FAIL,
                                   "|dE/dt - P - sum_j J_j| < 1e-6 scale", float(res.max()), 1e-6 * scale))
    smin = float(ledger.sigma.min())
    report.verdicts.append(Verdict("II", PASS if smin >= -1e-9 else FAIL, "sigma >= 0", smin, 1e-9))
    report.summary.update({"t_end": t_end, "steps": traj.accepted, "rejected": traj.rejected,
                           "max_trace_drift": traj.max_trace_drift, "E_final": float(ledger.E[-1])})
    if scn.output.get("plot"):
        _plot_script(_out_path(args, scn, "trajectory.gp"), path.name, 1, [2, 3, 4])


def run_steady(scn, args, report):
    m = scn.model
    if m["kind"] == "driven_tls":
        gen = floquet_generator(scn, args.qmax or scn.run.get("q_max"))
    elif m["kind"] in ("tls", "oscillator", "tricycle"):
        gen = static_generator(scn)
    else:
        raise ConfigError(f"steady does not support model kind {m['kind']!r}")
    rho = steady_state(gen)
    J = floquet_currents(gen, rho)
    verdict = second_law_check(J, gen.temperatures)
    report.verdicts.append(verdict)
    # power handed by the thermal baths to the work sink (drive or T = inf reservoir)
    p_out = sum(v for b, v in J.items() if not math.isinf(gen.temperatures[b]))
    report.summary.update({"currents": J, "power_out": p_out,
                           "populations": [float(x) for x in np.real(np.diag(rho))]})
    path = _out_path(args, scn, "steady.csv")
    header = [f"J_{b} [energy/time]" for b in J] + ["P_out [energy/time]", "sum_J_over_T [k_B/time]"]
    write_table(path, header, [list(J.values()) + [p_out, verdict.detail["sum_J_over_T"]]])
    report.outputs.append(str(path))


def run_otto(scn, args, report):
    m = scn.model
    if m["kind"] != "otto":
        raise ConfigError("otto needs an otto model")
    spec = OttoSpec(m["omega_h"], m["omega_c"], scn.bath(m["hot"]), scn.bath(m["cold"]),
                    tuple(m["durations"]), m.get("transverse", 0.2), m.get("schedule", "linear"),
                    m.get("medium", "tls"), m.get("n_max", 6))
    cycle = build_otto_cycle(spec)
    kind = scn.run.get("initial_state")
    rho0 = (gibbs_state(cycle.H_c, spec.cold.temperature) if kind is None
            else initial_state(kind, cycle.H_c.shape[0], cycle.H_c, args.seed))
    lc = cycle.limit_cycle(rho0, scn.run.get("max_cycles", 1000))
    n = scn.run.get("cycles", lc.iterations + 1)
    rows = cycle.cycle_table(rho0, n, lc.state)
    path = _out_path(args, scn, "cycles.csv")
    cycle.write_table(path, rows)
    report.outputs.append(str(path))
    Q_h, Q_c, W = cycle.cycle_ledger(lc.state)
    T_h, T_c = spec.hot.temperature, spec.cold.temperature
    first = abs(Q_h + Q_c + W)
    second = Q_h / T_h + Q_c / T_c
    mono = lc.max_entropy_increase()
    report.verdicts += [
        Verdict("I", PASS if first < 1e-7 else FAIL, "|W + Q_h + Q_c| < 1e-7", first, 1e-7),
        Verdict("II", PASS if second <= 1e-7 else FAIL, "Q_h/T_h + Q_c/T_c <= 0", second, 1e-7),
        Verdict("II", PASS if mono <= 1e-10 else FAIL, "S(rho_n|rho*) nonincreasing", mono, 1e-10),
    ]
    report.summary.update({"iterations": lc.iterations, "Q_h": Q_h, "Q_c": Q_c, "W": W})


def run_cool(scn, args, report):
    run = scn.run
    bath_id = run.get("bath") or (scn.bath_ids[0] if len(scn.bath_ids) == 1 else None)
    if bath_id is None:
        raise ConfigError("cool needs run.bath when several baths are declared")
    bath = scn.bath(bath_id)
    T0 = run.get("T0", bath.temperature)
    T_floor = run.get("T_floor", 1e-6 * T0)
    t_end = args.tmax or run.get("t_end", math.inf)
    if "sweep" in run:
        pts = cooling_sweep(bath, sorted(run["sweep"], reverse=True))
        traj = CoolingTrajectory(np.full(len(pts), np.nan), *(np.array([getattr(p, k) for p in pts])
                                 for k in ("T_c", "omega_opt", "J_c", "dT_dt")), False, min(run["sweep"]))
    else:
        traj = integrate_cooling(bath, T0, t_end, T_floor, run.get("samples", 200))
    path = _out_path(args, scn, "cooling.csv")
    traj.to_csv(path)
    report.outputs.append(str(path))
    rep = fit_zeta(traj)
    report.verdicts.append(rep.verdict)
    report.summary.update({"exponents": rep.as_dict(), "reached_floor": traj.reached_floor,
                           "elapsed": float(traj.times[-1])})
    if scn.output.get("plot"):
        _plot_script(_out_path(args, scn, "cooling.gp"), path.name, 1, [3, 4])


def run_check(scn, args, report):
    for b in scn.bath_ids:
        bath = scn.bath(b)
        if not isinstance(bath, HarmonicField):
            continue
        ok = ground_state_criterion(bath.kappa, bath.dim)
        report.verdicts.append(Verdict("ground-state", PASS if ok else FAIL, "kappa > 2 - d",
                                       bath.kappa - (2 - bath.dim), 0.0, {"bath": b}))
        ok = third_law_coupling_criterion(bath.kappa)
        report.verdicts.append(Verdict("III", PASS if ok else FAIL, "kappa >= 1",
                                       bath.kappa, 0.0, {"bath": b}))
    te = scn.run.get("thermoelectric")
    if te:
        value = thermoelectric_bound(te["N_c"], te["T_c"])
        report.summary["thermoelectric_bound"] = value
        report.verdicts.append(Verdict("III", NOT_APPLICABLE, "J_c <= (pi^2/6) N_c T_c^2", value, 0.0,
                                       {"N_c": te["N_c"], "T_c": te["T_c"], "implied_zeta": 1.0}))


RUNNERS = {"simulate": run_simulate, "steady": run_steady, "otto": run_otto, "cool": run_cool,
           "check": run_check}


def execute(subcommand, scenario_path, args):
    """Run one subcommand; always returns a report (errors become exit codes)."""
    report = RunReport(subcommand, "")
    try:
        scn = load_scenario(scenario_path)
        report.digest = scn.digest
        mode = scn.run.get("mode")
        if mode is not None and mode != subcommand:
            raise ConfigError(f"scenario is for {mode!r}, not {subcommand!r}")
        RUNNERS[subcommand](scn, args, report)
        report.finish()
        if scn.output.get("dir") or args.out:
            path = _out_path(args, scn, "report.json")
            report.outputs.append(str(path))
            path.write_text(json.dumps(report.as_dict(), indent=2, sort_keys=True, default=float) + "\n")
    except SchemaError as exc:
        report.summary["errors"] = exc.errors
        report.exit_status = EXIT_CONFIG
    except ConfigError as exc:
        report.summary["errors"] = [str(exc)]
        report.exit_status = EXIT_CONFIG
    except NumericalError as exc:
        report.summary["errors"] = [f"{type(exc).__name__}: {exc}"]
        report.exit_status = EXIT_NUMERICAL
    except PhysicsViolation as exc:
        report.summary["errors"] = [f"{type(exc).__name__}: {exc}"]
        report.exit_status = EXIT_PHYSICS
    except (OSError, ValueError) as exc:
        report.summary["errors"] = [f"{type(exc).__name__}: {exc}"]
        report.exit_status = EXIT_CONFIG
    return report


def build_parser():
    parser = argparse.ArgumentParser(prog="qthermo", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("scenario", help="TOML scenario file")
        p.add_argument("--out", metavar="DIR", help="output directory")
        p.add_argument("--tol", type=float, help="integrator tolerance")
        p.add_argument("--tmax", type=float, help="final time (overrides run.t_end)")
        p.add_argument("--qmax", type=int, help="Floquet harmonic cutoff")
        p.add_argument("--seed", type=int, default=0, help="seed for random initial states")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    report = execute(args.subcommand, args.scenario, args)
    print(json.dumps(report.as_dict(), indent=2, sort_keys=True, default=float))
    for v in report.verdicts:
        if v.status == FAIL:
            print(f"FAIL [{v.law}] {v.inequality}: measured {v.measured:.6g}", file=sys.stderr)
    return report.exit_status


if __name__ == "__main__":
    sys.exit(main())
