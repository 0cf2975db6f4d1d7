"""Command-line front end.

Subcommands dispatch the library's experiments and write CSV/JSON
artifacts.  Configuration comes from an optional JSON file (--config)
with flat keys mirroring the flags; explicit flags override file values.
Exit codes: 0 success, 2 configuration/validation error, 3 runtime cap
exhaustion (partial results are still written and flagged).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from . import checkgraph, experiments, protocol
from .noise import NoiseParams

OUTPUT_DIR_ENV = "SURGESIM_OUTPUT_DIR"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CAPPED = 3


class ConfigError(Exception):
    pass


def _parse_int_list(text):
    """'1..15' (inclusive range), or comma-separated values."""
    text = str(text)
    if ".." in text:
        a, b = text.split("..", 1)
        return list(range(int(a), int(b) + 1))
    return [int(v) for v in text.split(",") if v != ""]


def _parse_float_list(text):
    return [float(v) for v in str(text).split(",") if v != ""]


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="surgesim",
        description="Lattice-surgery logical-operation simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, noise=True, run=True):
        p.add_argument("--config", help="JSON config file (flags override)")
        p.add_argument("--output-dir", default=None,
                       help=f"output directory (default: env "
                            f"{OUTPUT_DIR_ENV} or '.')")
        if noise:
            p.add_argument("--model", default="independent",
                           choices=["independent", "depolarizing", "xBiased"])
            p.add_argument("--p", type=float, default=None)
            p.add_argument("--q", type=float, default=None)
        if run:
            p.add_argument("--seed", type=int, default=0)
            p.add_argument("--shots", type=int, default=None,
                           help="fixed shot count")
            p.add_argument("--min-failures", type=int, default=None)
            p.add_argument("--cap", type=int, default=10**7,
                           help="shot cap under --min-failures")
            p.add_argument("--workers", type=int, default=0,
                           help="worker count (0 = available parallelism)")

    p = sub.add_parser("zz-sweep", help="joint-ZZ error rates vs h2")
    common(p)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--w", type=int, default=1)
    p.add_argument("--h1", type=int, default=1)
    p.add_argument("--h3", type=int, default=1)
    p.add_argument("--h2", default=None,
                   help="h2 values: '1..15' or '1,3,5'")

    p = sub.add_parser("w-sweep", help="joint-ZZ timelike fraction vs w")
    common(p)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--h2", type=int, default=None)
    p.add_argument("--h1", type=int, default=1)
    p.add_argument("--h3", type=int, default=1)
    p.add_argument("--w", default=None, help="w values: '1,5,15'")

    p = sub.add_parser("cnot-channel",
                       help="16-class logical CNOT channel + factorized fit")
    common(p)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--w", type=int, default=1)
    p.add_argument("--h1", type=int, default=1)
    p.add_argument("--h2", type=int, default=None,
                   help="merge duration (default: d)")
    p.add_argument("--h3", type=int, default=1)

    p = sub.add_parser("threshold", help="distance-crossing threshold")
    common(p)
    p.add_argument("--protocol", default="memory",
                   choices=["memory", "zz", "xx", "cnot"])
    p.add_argument("--d-list", default="3,5,7")
    p.add_argument("--p-grid", default=None, help="e.g. '0.02,0.03,0.04'")

    p = sub.add_parser("memory-correlation",
                       help="memory channel and X/Z correlation measure")
    common(p)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--rounds", type=int, default=None,
                   help="measurement rounds (default: d)")

    p = sub.add_parser("fault-distance",
                       help="fault distance of a compiled protocol")
    common(p, noise=False, run=False)
    p.add_argument("--protocol", default=None,
                   choices=["memory", "zz", "xx", "cnot"])
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--w", type=int, default=1)
    p.add_argument("--h1", type=int, default=1)
    p.add_argument("--h2", type=int, default=None)
    p.add_argument("--h3", type=int, default=1)
    p.add_argument("--rounds", type=int, default=None)

    p = sub.add_parser("decode-check",
                       help="sample shots and assert homology soundness")
    common(p)
    p.add_argument("--protocol", default="memory",
                   choices=["memory", "zz", "xx", "cnot"])
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--w", type=int, default=1)
    p.add_argument("--h1", type=int, default=1)
    p.add_argument("--h2", type=int, default=None)
    p.add_argument("--h3", type=int, default=1)
    return parser


def _apply_config(args, argv):
    """Overlay JSON config values under explicit flags."""
    if not getattr(args, "config", None):
        return args
    try:
        with open(args.config) as f:
            cfg = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    for key, value in cfg.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            raise ConfigError(f"unknown config key: {key}")
        # Flags given on the command line win over the file.
        flags = {f"--{key}", f"--{attr.replace('_', '-')}"}
        if any(tok.split("=", 1)[0] in flags for tok in argv):
            continue
        setattr(args, attr, value)
    return args


def _require(args, *names):
    for name in names:
        if getattr(args, name, None) is None:
            raise ConfigError(f"--{name.replace('_', '-')} is required")


def _stop_rule(args):
    if args.shots is not None and args.min_failures is not None:
        raise ConfigError("--shots and --min-failures are exclusive")
    if args.min_failures is not None:
        return experiments.StopRule(min_failures=int(args.min_failures),
                                    cap=int(args.cap))
    return experiments.StopRule(
        fixed_shots=int(args.shots) if args.shots is not None else 10**4)


def _noise(args):
    if args.p is None:
        raise ConfigError("--p is required")
    try:
        return NoiseParams(args.model, float(args.p),
                           float(args.q) if args.q is not None else None)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _out_dir(args):
    out = (args.output_dir or os.environ.get(OUTPUT_DIR_ENV) or ".")
    os.makedirs(out, exist_ok=True)
    return out


def _noise_tag(noise):
    return f"{noise.model}_p{noise.p:g}_q{noise.q:g}"


def _summary(args, noise, extra):
    payload = {"command": args.command, "timestamp": time.time()}
    if noise is not None:
        payload["noise"] = {"model": noise.model, "p": noise.p, "q": noise.q}
    payload.update(extra)
    return payload


def _cmd_zz_sweep(args):
    _require(args, "d", "h2")
    noise = _noise(args)
    rule = _stop_rule(args)
    h2_list = _parse_int_list(args.h2)
    rows = experiments.sweep_h2(args.d, args.w, args.h1, args.h3, noise,
                                h2_list, rule, args.seed)
    out = _out_dir(args)
    base = f"zz_sweep_d{args.d}_w{args.w}_{_noise_tag(noise)}"
    header = ["h2", "shots", "failures", "p_l", "p_l_low", "p_l_high",
              "timelike_fraction", "timelike_low", "timelike_high", "capped"]
    csv_path = os.path.join(out, base + ".csv")
    experiments.write_csv(csv_path, header, rows)
    for r in rows:
        frac = experiments.format_value(r["timelike_fraction"])
        print(f"h2={r['h2']} shots={r['shots']} "
              f"P_L={experiments.format_value(r['p_l'])} "
              f"timelike_fraction={frac or 'n/a'}")
    summary = _summary(args, noise, {
        "d": args.d, "w": args.w, "h1": args.h1, "h3": args.h3,
        "seed": args.seed, "csv": csv_path,
        "saturation_h2": experiments.saturation_h2(rows),
        "timelike_half_crossing": experiments.timelike_crossing_h2(rows),
        "rows": rows})
    experiments.write_json(os.path.join(out, base + ".json"), summary)
    return EXIT_CAPPED if any(r["capped"] for r in rows) else EXIT_OK


def _cmd_w_sweep(args):
    _require(args, "d", "h2", "w")
    noise = _noise(args)
    rule = _stop_rule(args)
    w_list = _parse_int_list(args.w)
    rows = experiments.sweep_w(args.d, args.h2, noise, w_list, rule,
                               args.seed, h1=args.h1, h3=args.h3)
    out = _out_dir(args)
    base = f"w_sweep_d{args.d}_h2{args.h2}_{_noise_tag(noise)}"
    header = ["w", "shots", "failures", "p_l", "p_l_low", "p_l_high",
              "timelike_fraction", "timelike_low", "timelike_high", "capped"]
    csv_path = os.path.join(out, base + ".csv")
    experiments.write_csv(csv_path, header, rows)
    for r in rows:
        frac = experiments.format_value(r["timelike_fraction"])
        print(f"w={r['w']} shots={r['shots']} "
              f"P_L={experiments.format_value(r['p_l'])} "
              f"timelike_fraction={frac or 'n/a'}")
    summary = _summary(args, noise, {
        "d": args.d, "h2": args.h2, "seed": args.seed, "csv": csv_path,
        "rows": rows})
    experiments.write_json(os.path.join(out, base + ".json"), summary)
    return EXIT_CAPPED if any(r["capped"] for r in rows) else EXIT_OK


def _cmd_cnot_channel(args):
    _require(args, "d")
    noise = _noise(args)
    rule = _stop_rule(args)
    h2 = args.h2 if args.h2 is not None else args.d
    spec = protocol.build_cnot(args.d, args.w, args.h1, h2, args.h3)
    tally = experiments.run_shots(spec, noise, rule, args.seed)
    estimate = experiments.estimate_cnot_channel(tally)
    fit = experiments.fit_connection_params(estimate)
    partners = experiments.symmetry_partner_check(tally)
    out = _out_dir(args)
    base = f"cnot_channel_d{args.d}_{_noise_tag(noise)}"
    rows = []
    for label in experiments.CNOT_CLASSES:
        est, low, high = estimate.probs[label]
        rows.append({"class": label, "count": tally.counts.get(label, 0),
                     "estimate": est, "ci_low": low, "ci_high": high})
        print(f"{label}: {experiments.format_value(est)} "
              f"[{experiments.format_value(low)}, "
              f"{experiments.format_value(high)}]")
    csv_path = os.path.join(out, base + ".csv")
    experiments.write_csv(csv_path, ["class", "count", "estimate",
                                      "ci_low", "ci_high"], rows)
    print(f"fit: p1={fit.p1:.6g} p2={fit.p2:.6g} p3={fit.p3:.6g} "
          f"chi2/dof={fit.chi_square_per_dof:.4g}")
    summary = _summary(args, noise, {
        "d": args.d, "w": args.w, "h1": args.h1, "h2": h2, "h3": args.h3,
        "seed": args.seed, "shots": tally.shots, "csv": csv_path,
        "fit": {"p0": fit.p0, "p1": fit.p1, "p2": fit.p2, "p3": fit.p3,
                "objective": fit.objective, "dof": fit.dof,
                "chi_square_per_dof": fit.chi_square_per_dof,
                "converged": fit.converged},
        "symmetry_partners": [
            {"pair": list(pair), "z": z} for pair, z in partners],
        "counts": tally.counts, "capped": tally.capped})
    experiments.write_json(os.path.join(out, base + ".json"), summary)
    return EXIT_CAPPED if tally.capped else EXIT_OK


def _cmd_threshold(args):
    _require(args, "p_grid")
    noise_probe = _noise(args)  # validates model/p; p reused as grid fallback
    rule = _stop_rule(args)
    d_list = _parse_int_list(args.d_list)
    p_grid = _parse_float_list(args.p_grid)
    q_rule = None
    if args.q is not None:
        ratio = float(args.q) / float(args.p)
        q_rule = lambda p: ratio * p  # noqa: E731
    result = experiments.find_threshold(args.protocol, d_list, args.model,
                                        p_grid, rule, args.seed,
                                        q_rule=q_rule)
    out = _out_dir(args)
    base = f"threshold_{args.protocol}_{args.model}"
    rows = []
    for d, pts in sorted(result.curves.items()):
        for p, p_l, shots, failures in pts:
            rows.append({"d": d, "p": p, "p_l": p_l, "shots": shots,
                         "failures": failures})
            print(f"d={d} p={experiments.format_value(p)} "
                  f"P_L={experiments.format_value(p_l)}")
    csv_path = os.path.join(out, base + ".csv")
    experiments.write_csv(csv_path, ["d", "p", "p_l", "shots", "failures"],
                          rows)
    if result.crossing is None:
        print("threshold: no crossing")
    else:
        print(f"threshold: {result.crossing:.6g} "
              f"(spread {result.spread:.3g})")
    summary = _summary(args, noise_probe, {
        "protocol": args.protocol, "d_list": d_list, "p_grid": p_grid,
        "seed": args.seed, "csv": csv_path,
        "crossing": result.crossing, "spread": result.spread,
        "crossings": result.crossings, "message": result.message})
    experiments.write_json(os.path.join(out, base + ".json"), summary)
    return EXIT_OK


def _cmd_memory_correlation(args):
    _require(args, "d")
    noise = _noise(args)
    rule = _stop_rule(args)
    rounds = args.rounds if args.rounds is not None else args.d
    spec = protocol.build_memory(args.d, rounds)
    tally = experiments.run_shots(spec, noise, rule, args.seed)
    est = experiments.correlation_measure(tally)
    out = _out_dir(args)
    base = f"memory_correlation_d{args.d}_r{rounds}_{_noise_tag(noise)}"
    rows = [{"d": args.d, "rounds": rounds, "shots": tally.shots,
             "p_i": est.p_i, "p_x": est.p_x, "p_y": est.p_y, "p_z": est.p_z,
             "m": est.m}]
    csv_path = os.path.join(out, base + ".csv")
    experiments.write_csv(csv_path, ["d", "rounds", "shots", "p_i", "p_x",
                                      "p_y", "p_z", "m"], rows)
    m_text = (experiments.format_value(est.m) if est.m_defined
              else "undefined")
    print(f"d={args.d} rounds={rounds} shots={tally.shots} "
          f"P_I={est.p_i:.6g} P_X={est.p_x:.6g} P_Y={est.p_y:.6g} "
          f"P_Z={est.p_z:.6g} M={m_text}")
    summary = _summary(args, noise, {
        "d": args.d, "rounds": rounds, "seed": args.seed,
        "shots": tally.shots, "csv": csv_path,
        "p_i": est.p_i, "p_x": est.p_x, "p_y": est.p_y, "p_z": est.p_z,
        "m": est.m if est.m_defined else "undefined",
        "capped": tally.capped})
    experiments.write_json(os.path.join(out, base + ".json"), summary)
    return EXIT_CAPPED if tally.capped else EXIT_OK


def _build_spec(args):
    kind = args.protocol
    if kind == "memory":
        rounds = getattr(args, "rounds", None)
        return protocol.build_memory(args.d,
                                     rounds if rounds is not None else args.d)
    h2 = args.h2 if args.h2 is not None else args.d
    if kind == "zz":
        return protocol.build_zz(args.d, args.w, args.h1, h2, args.h3)
    if kind == "xx":
        return protocol.build_xx(args.d, args.w, args.h1, h2, args.h3)
    return protocol.build_cnot(args.d, args.w, args.h1, h2, args.h3)


def _cmd_fault_distance(args):
    _require(args, "protocol", "d")
    spec = _build_spec(args)
    pair = checkgraph.compile(spec, NoiseParams("independent", 0.001))
    dz = checkgraph.fault_distance(pair.zgraph)
    dx = checkgraph.fault_distance(pair.xgraph)
    values = [v for v in (dz, dx) if v is not None]
    print(min(values) if values else "undefined")
    return EXIT_OK


def _cmd_decode_check(args):
    _require(args, "d")
    noise = _noise(args)
    rule = _stop_rule(args)
    spec = _build_spec(args)
    tally = experiments.run_shots(spec, noise, rule, args.seed,
                                  check_homology=True)
    print(f"shots={tally.shots} homology_violations="
          f"{tally.homology_violations}")
    if tally.homology_violations:
        return 1
    return EXIT_CAPPED if tally.capped else EXIT_OK


_COMMANDS = {
    "zz-sweep": _cmd_zz_sweep,
    "w-sweep": _cmd_w_sweep,
    "cnot-channel": _cmd_cnot_channel,
    "threshold": _cmd_threshold,
    "memory-correlation": _cmd_memory_correlation,
    "fault-distance": _cmd_fault_distance,
    "decode-check": _cmd_decode_check,
}


def main(argv=None):
    if argv is None:
        argv = sys.argv[1:]
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        args = _apply_config(args, argv)
        return _COMMANDS[args.command](args)
    except (ConfigError, ValueError) as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
