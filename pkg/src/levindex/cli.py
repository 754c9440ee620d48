"""Command-line front end.

    levindex <subcommand> --config exp.toml [--out DIR] [--threads K]
             [--lattice-size M] [--seed S]

Exit status: 0 ok / PASS, 1 FAIL, 2 bad configuration, 3 indeterminate
index, 4 PASS withheld because of a threshold (zero-energy) flag.
"""

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from .channels import channel_cutoff, validate_assumption
from .config import ConfigError, load_config
from .index import (IndexEstimate, channel_indices, coupling_sweep, default_lattice,
                    estimate_index, hardy_pairing_operator, json_safe, levinson_report,
                    model_wave_operator, symbol_on_lattice, synthetic_symbol)
from .mellin import LatticeError, LogLattice
from .scatter import export_csv, scattering_symbol, threshold_check, det_winding
from .spectrum import count_bound_states, negative_eigenvalues

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_INDETERMINATE, EXIT_THRESHOLD = 0, 1, 2, 3, 4

log = logging.getLogger("levindex")


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(json_safe(obj), fh, indent=2, sort_keys=True, default=_plain)
        fh.write("\n")


def _plain(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, Path):
        return str(o)
    return str(o)


def _writer(path, header):
    fh = open(path, "w", newline="")
    wr = csv.writer(fh)
    wr.writerow(header)
    return fh, wr


def cmd_bound_states(cfg, out, args):
    V = cfg.build_potential()
    rep = validate_assumption(V, cfg.n)
    bc = count_bound_states(V, cfg.n, cfg.radial)
    fh, wr = _writer(out / "bound_states.csv",
                     ["ell", "multiplicity", "eigen_count", "node_count", "energies"])
    for ch, ne, nn in bc.per_channel:
        energies = negative_eigenvalues(ch, V, cfg.radial) if ne else []
        wr.writerow([ch.ell, ch.multiplicity, ne, nn, " ".join(f"{e:.10e}" for e in energies)])
    fh.close()
    summary = {"n": cfg.n, "potential_id": V.label, "N_eigen": bc.total, "N_nodes": bc.total_nodes,
               "methods_agree": bc.methods_agree,
               "threshold_flags": [ch.ell for ch in bc.threshold_flags],
               "resolution_flags": [ch.ell for ch in bc.resolution_flags],
               "assumption": asdict(rep)}
    _write_json(out / "bound_states.json", summary)
    print(f"N_eigen={bc.total}, N_nodes={bc.total_nodes}, "
          f"threshold flags={summary['threshold_flags'] or 'none'}; {rep.message}")
    return EXIT_OK if bc.methods_agree else EXIT_FAIL


def cmd_phase_shifts(cfg, out, args):
    V = cfg.build_potential()
    ell_max = channel_cutoff(V, cfg.n, cfg.energy.lambda_max, cfg.cutoff_tol,
                             lambda_min=cfg.energy.lambda_min)
    sym = scattering_symbol(V, cfg.n, cfg.energy, ell_max=ell_max)
    export_csv(sym, out / "phase_shifts.csv")
    thr = threshold_check(sym)
    w = det_winding(sym)
    _write_json(out / "phase_shifts.json", {"n": cfg.n, "potential_id": V.label, "ell_max": ell_max,
                                            "winding": w.value, "threshold": asdict(thr)})
    print(f"channels 0..{ell_max}, winding={w.value:.3f}, "
          f"|S-1| at lambda_min={thr.low_deviation:.3g}, at lambda_max={thr.high_deviation:.3g}")
    return EXIT_OK


def _report_status(rep):
    if rep.passed:
        return EXIT_OK
    if any(f.startswith("indeterminate") for f in rep.flags):
        return EXIT_INDETERMINATE
    if any(f.startswith(("threshold", "closure:low")) for f in rep.flags):
        return EXIT_THRESHOLD
    return EXIT_FAIL


def cmd_levinson(cfg, out, args):
    V = cfg.build_potential()
    rep = levinson_report(V, cfg.n, cfg.energy, cfg.radial, cfg.lattice.sizes,
                          tol=cfg.cutoff_tol, taper=cfg.lattice.taper, workers=args.threads)
    with open(out / "levinson.json", "w") as fh:
        fh.write(rep.to_json(indent=2, sort_keys=True) + "\n")
    verdict = "PASS" if rep.passed else "FAIL"
    print(f"N={rep.N_eigen}, winding={rep.winding:.3f}, model index={rep.model_index_total}, "
          f"hardy index={rep.hardy_index_total}, {verdict}"
          + (f" (flags: {', '.join(rep.flags)})" if rep.flags else ""))
    return _report_status(rep)


def _estimate_row(est: IndexEstimate):
    return [est.dim_kernel, est.dim_cokernel, est.index, f"{est.gap_ratio:.4g}", est.determinate]


def cmd_index_pair(cfg, out, args):
    header = ["case", "size", "model_ker", "model_coker", "model_index", "model_gap", "model_ok",
              "hardy_ker", "hardy_coker", "hardy_index", "hardy_gap", "hardy_ok"]
    fh, wr = _writer(out / "index_pair.csv", header)
    status = EXIT_OK
    if cfg.synthetic is not None:
        syn = cfg.synthetic
        for size in cfg.lattice.sizes:
            lat = LogLattice(syn.X, size)
            for w in syn.windings:
                s = synthetic_symbol(lat, w, syn.width)
                m = estimate_index(model_wave_operator(s, lat))
                h = estimate_index(hardy_pairing_operator(s, lat))
                wr.writerow([f"winding={w}", size, *_estimate_row(m), *_estimate_row(h)])
                ok = m.determinate and h.determinate
                print(f"size {size} winding {w:+d}: model {m.index:+d}, hardy {h.index:+d}"
                      + ("" if ok else " (indeterminate)"))
                if not ok:
                    status = EXIT_INDETERMINATE
                elif m.index != h.index and status == EXIT_OK:
                    status = EXIT_FAIL
    else:
        V = cfg.build_potential()
        sym = scattering_symbol(V, cfg.n, cfg.energy, tol=cfg.cutoff_tol)
        for size in cfg.lattice.sizes:
            lat = default_lattice(cfg.energy, size, cfg.lattice.taper)
            for b in sym.blocks:
                s, _ = symbol_on_lattice(b.lam, b.delta, lat, cfg.lattice.taper)
                ci = channel_indices(s, lat, int(b.label), b.multiplicity, -b.delta[0] / np.pi)
                wr.writerow([f"ell={b.label}", size, *_estimate_row(ci.model), *_estimate_row(ci.hardy)])
                if not (ci.model.determinate and ci.hardy.determinate):
                    status = EXIT_INDETERMINATE
                if not ci.shortcut:
                    print(f"size {size} ell {b.label} (x{b.multiplicity}): model {ci.model.index:+d}, "
                          f"hardy {ci.hardy.index:+d}, winding {ci.winding:+.3f}")
    fh.close()
    return status


def cmd_sweep(cfg, out, args):
    V = cfg.build_potential()
    sw = cfg.sweep
    g = np.linspace(sw.g_min, sw.g_max, sw.steps + 1)
    res = coupling_sweep(V, cfg.n, g, cfg.energy, cfg.radial, tol=cfg.cutoff_tol,
                         workers=args.threads,
                         progress=lambda r: log.info("g=%.4f N=%d winding=%.4f", r.g, r.N_eigen, r.winding))
    fh, wr = _writer(out / "sweep.csv", ["g", "N_eigen", "N_nodes", "winding", "flags"])
    for r in res.rows:
        wr.writerow([f"{r.g:.10g}", r.N_eigen, r.N_nodes, f"{r.winding:.10f}", ";".join(r.flags)])
    fh.close()
    staircase = bool(np.all(np.diff(res.N) >= 0))
    _write_json(out / "sweep.json", {"n": cfg.n, "potential_id": V.label,
                                     "jumps_N": [float(res.g[i]) for i in res.jumps_N()],
                                     "jumps_winding": [float(res.g[i]) for i in res.jumps_winding()],
                                     "nondecreasing": staircase,
                                     "max_winding_step": res.max_winding_step()})
    print(f"{len(res.rows)} couplings, N: {res.N[0]} -> {res.N[-1]}, "
          f"jumps of N at g={[round(float(res.g[i]), 4) for i in res.jumps_N()]}, "
          f"jumps of winding at g={[round(float(res.g[i]), 4) for i in res.jumps_winding()]}")
    return EXIT_OK if staircase else EXIT_FAIL


def cmd_selftest(cfg, out, args):
    import pytest
    tests = Path(__file__).resolve().parents[2] / "tests" / "test_acceptance.py"
    if not tests.exists():
        print(f"acceptance suite not found at {tests}", file=sys.stderr)
        return EXIT_CONFIG
    if args.seed is not None:
        os.environ["LEVINDEX_SEED"] = str(args.seed)
    code = pytest.main([str(tests), "-q", "-s", f"--junitxml={out / 'selftest.xml'}"])
    return EXIT_OK if code == 0 else EXIT_FAIL


COMMANDS = {
    "bound-states": cmd_bound_states,
    "phase-shifts": cmd_phase_shifts,
    "levinson": cmd_levinson,
    "index-pair": cmd_index_pair,
    "sweep": cmd_sweep,
    "selftest": cmd_selftest,
}


def build_parser():
    p = argparse.ArgumentParser(prog="levindex", description=__doc__.split("\n\n")[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="TOML experiment file (not needed for selftest)")
    p.add_argument("--out", help="output directory (overrides the config)")
    p.add_argument("--threads", type=int, default=1, help="worker threads for channels / couplings")
    p.add_argument("--lattice-size", type=int, help="base lattice size m; the check uses 2m")
    p.add_argument("--seed", type=int, help="seed for randomised suites")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.threads < 1:
        print("--threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    cfg = None
    if args.command != "selftest" or args.config:
        if not args.config:
            print("--config is required", file=sys.stderr)
            return EXIT_CONFIG
        try:
            cfg = load_config(args.config)
            if args.lattice_size:
                m = args.lattice_size
                LogLattice(6.0, m)      # validates the size
                cfg.lattice = replace(cfg.lattice, sizes=(m, 2 * m))
            cfg.build_potential()
        except (ConfigError, LatticeError, ValueError, KeyError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    out = Path(args.out or (cfg.output if cfg else "out"))
    out.mkdir(parents=True, exist_ok=True)
    return COMMANDS[args.command](cfg, out, args)


if __name__ == "__main__":
    sys.exit(main())
