"""Command-line pipeline: ``turbscale <subcommand> [options]``.

Subcommands
-----------
synth    write a synthetic ESS point file and, optionally, a velocity signal
sf       structure functions of a velocity signal
ess      ESS points from a velocity signal
slopes   per-experiment points, local slopes and reference lines as CSV
fit      per-Re slopes and the alpha1 (and C0, C1) fit
compare  shared-slope versus Re-dependent-slope comparison
report   everything above in one JSON report plus plot data

Options may also come from a JSON config file (``--config``) whose keys are
the long option names; options given on the command line win.
"""

from __future__ import annotations

import argparse
import datetime
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ContractError, DomainError, ParseError
from .ess import anchored_local_slopes, build_ess, split_dissipation_range, successive_slopes
from .estimator import default_lag_grid, structure_function
from .fit import DEFAULT_MARGIN, LineFit, compare_hypotheses, fit_incomplete_similarity, fit_per_re
from .io import (emit_plot_data, file_digest, read_ess_csv, read_signal, write_ess_csv,
                 write_report, write_signal)
from .scales import FlowParameters
from .synth import SimilarityModel, SyntheticSpec, synth_ess_dataset, synth_velocity_signal

log = logging.getLogger("turbscale")

REFERENCE_RE = (6000.0, 18000.0, 300000.0)
DEFAULT_LABELS = {6000.0: "C6", 18000.0: "C18", 300000.0: "J"}
DEFAULT_NU = 1.5e-5
DEFAULT_EPS = 1.0
DEFAULT_B3 = 0.8


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


def _common_options() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("common options")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--config", help="JSON file of option defaults")
    g.add_argument("--out", help="output file or directory")
    g.add_argument("--re", type=_float_list, help="comma-separated Reynolds numbers")
    g.add_argument("--alpha1", type=float, default=0.29)
    g.add_argument("--c0", type=float, default=1.5)
    g.add_argument("--c1", type=float, default=2.0)
    g.add_argument("--b3", type=float, help="third-order prefactor; enables C0/C1 recovery in fit")
    g.add_argument("--nu", type=float, default=DEFAULT_NU, help="kinematic viscosity, m^2/s")
    g.add_argument("--eps", type=float, default=DEFAULT_EPS, help="mean dissipation rate, m^2/s^3")
    g.add_argument("--noise", type=float, default=0.0, help="noise std in log10 units")
    g.add_argument("--k-threshold", type=float, default=10.0)
    g.add_argument("--tol", type=float, default=0.01, help="slope tolerance of the split rule")
    g.add_argument("--split", choices=("auto", "none"), default="auto",
                   help="'none' treats every point as inertial")
    g.add_argument("--margin", type=float, default=DEFAULT_MARGIN)
    g.add_argument("--moment-kind", choices=("signed", "absolute"), default="absolute")
    g.add_argument("--no-timestamp", action="store_true")
    g.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(prog="turbscale", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    parser.subcommands = sub.choices

    p = sub.add_parser("synth", parents=[common], help="write synthetic data")
    p.add_argument("--points", type=int, default=200, help="separations per experiment")
    p.add_argument("--rho-min", type=float, default=1e-2, help="smallest r / lambda_k")
    p.add_argument("--rho-max", type=float, default=1e5, help="largest r / lambda_k")
    p.add_argument("--sharpness", type=float, default=1.0)
    p.add_argument("--grid-re", type=float,
                   help="also write a 'grid' experiment at this Re, with its Re left blank")
    p.add_argument("--signal-n", type=int, help="also write a velocity signal of this length")
    p.add_argument("--spectrum-exponent", type=float, default=5.0 / 3.0)
    p.add_argument("--spacing", type=float, default=1e-3)

    p = sub.add_parser("sf", parents=[common], help="structure functions of a signal")
    p.add_argument("--signal", required=True)
    p.add_argument("--orders", type=_float_list, default=[2.0, 3.0])
    p.add_argument("--points-per-decade", type=int, default=8)

    p = sub.add_parser("ess", parents=[common], help="ESS points from a signal")
    p.add_argument("--signal", required=True)
    p.add_argument("--label")
    p.add_argument("--points-per-decade", type=int, default=8)

    for name, text in (("slopes", "local slope profiles and plot data"),
                       ("fit", "per-Re slopes and the alpha1 fit"),
                       ("compare", "shared versus Re-dependent slopes"),
                       ("report", "full analysis report")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--input", required=True, help="ESS point CSV")
        p.add_argument("--a1", type=float, help="offset of the 2/3 reference line")
        p.add_argument("--a2", type=float, help="offset of the 0.7 reference line")
    return parser


def _load_config(path, parser: argparse.ArgumentParser) -> dict:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        parser.error(f"cannot read config {path}: {exc}")
    if not isinstance(data, dict):
        parser.error(f"config {path} must hold a JSON object")
    return {str(k).replace("-", "_"): v for k, v in data.items()}


def parse_args(argv) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        config = _load_config(args.config, parser)
        sub = parser.subcommands[args.command]
        known = {a.dest for a in sub._actions}
        unknown = sorted(set(config) - known)
        if unknown:
            parser.error(f"unknown config keys: {', '.join(unknown)}")
        if "re" in config and isinstance(config["re"], (int, float)):
            config["re"] = [config["re"]]
        sub.set_defaults(**config)
        args = parser.parse_args(argv)
    return args


def _timestamp(args):
    if args.no_timestamp:
        return None
    return datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")


def _config_echo(args) -> dict:
    skip = {"command", "verbose", "no_timestamp", "out", "config"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _emit_json(payload: dict, out) -> None:
    if out:
        write_report(payload, out)
    else:
        json.dump(payload, sys.stdout, indent=2, allow_nan=False)
        sys.stdout.write("\n")


# -- analysis helpers ---------------------------------------------------------

def _flow_for(re, args):
    return None if re is None else FlowParameters.from_reynolds(re, args.nu, args.eps)


def _prepare(args):
    """Read the input, split every experiment, and pair each with its flow."""
    records = read_ess_csv(args.input)
    sets, flows = [], []
    for rec in records:
        pts = rec.points
        flow = _flow_for(rec.re, args)
        if args.split == "none":
            pts = replace(pts, split_index=0)
        else:
            pts = split_dissipation_range(pts, flow, args.k_threshold, tol=args.tol)
        sets.append(pts)
        flows.append(flow)
    digests = {str(args.input): file_digest(args.input)}
    if args.config:
        digests[str(args.config)] = file_digest(args.config)
    return sets, flows, digests


def _line_dict(f: LineFit) -> dict:
    return {"slope": f.slope, "intercept": f.intercept, "slope_stderr": f.slope_stderr,
            "residual_rms": f.residual_rms, "n_points": f.n_points}


def _profile_summary(points) -> dict:
    prof = anchored_local_slopes(points)
    seg = points.inertial()
    inertial_mean = None
    if len(seg) >= 2:
        inertial_mean = float(np.mean(anchored_local_slopes(seg).slopes))
    return {"anchor": list(prof.anchor), "n_entries": int(prof.slopes.size),
            "first_slope": float(prof.slopes[0]), "last_slope": float(prof.slopes[-1]),
            "inertial_mean_slope": inertial_mean}


def _fit_section(sets, flows, args):
    tagged = [(s, f) for s, f in zip(sets, flows) if s.re_tag is not None]
    untagged = [{"label": s.label, "reason": "no Reynolds number"} for s in sets if s.re_tag is None]
    per = fit_per_re([s for s, _ in tagged])
    excluded = untagged + [{"label": lab, "reason": why} for lab, why in per.excluded]
    by_label = {s.label: f for s, f in tagged}
    flows_aligned = [by_label[lab] for lab in per.labels] if args.b3 is not None else None
    sim = fit_incomplete_similarity(per.fits, flows_aligned, args.b3)
    section = {
        "per_re_fits": [dict(label=lab, re=re, **_line_dict(f))
                        for lab, (re, f) in zip(per.labels, per.fits)],
        "excluded": excluded,
        "similarity_fit": {
            "alpha1_hat": sim.alpha1_hat,
            "alpha1_stderr": sim.alpha1_stderr,
            "slope_model_residual_rms": sim.slope_model_residual_rms,
            "c0_hat": sim.c0_hat,
            "c1_hat": sim.c1_hat,
            "prefactors": [{"re": r, "c": c} for r, c in (sim.prefactors or [])],
            "offset_diagnostic": sim.offset_diagnostic,
            "model_exponents": [{"re": re, "exponent": sim.exponent(re)} for re, _ in per.fits],
        },
    }
    return section, [s for s, _ in tagged]


def _comparison_section(tagged_sets, args) -> dict:
    c = compare_hypotheses(tagged_sets, args.margin)
    return {"rss_shared": c.rss_shared, "rss_per_re": c.rss_per_re, "preferred": c.preferred,
            "monotone_decreasing": c.monotone_decreasing, "margin": c.margin,
            "shared_slope_fit": _line_dict(c.shared_fit), "intercepts": list(c.intercepts)}


def _header(args, digests) -> dict:
    head = {"tool": "turbscale", "version": __version__}
    stamp = _timestamp(args)
    if stamp is not None:
        head["generated_at"] = stamp
    head["config"] = _config_echo(args)
    head["digests"] = digests
    return head


# -- subcommands --------------------------------------------------------------

def cmd_synth(args) -> int:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    res = list(args.re or REFERENCE_RE)
    labels = [DEFAULT_LABELS.get(r, f"Re={r:g}") for r in res]
    # write the requested Re, not the value recomputed from the flow
    written_re = dict(zip(labels, res))
    if args.grid_re is not None:
        res.append(args.grid_re)
        labels.append("grid")
        written_re["grid"] = None
    flows = [FlowParameters.from_reynolds(r, args.nu, args.eps) for r in res]
    lk = flows[0].lambda_k
    if args.points < 2 or not 0 < args.rho_min < args.rho_max:
        raise DomainError("need --points >= 2 and 0 < --rho-min < --rho-max")
    r_grid = lk * np.logspace(np.log10(args.rho_min), np.log10(args.rho_max), args.points)
    model = SimilarityModel(args.c0, args.c1, args.alpha1, args.b3 if args.b3 is not None else DEFAULT_B3)
    spec = SyntheticSpec(model, flows, r_grid, crossover_sharpness=args.sharpness,
                         noise_sigma=args.noise, seed=args.seed, labels=labels)
    write_ess_csv(synth_ess_dataset(spec), out / "ess.csv", re_override=written_re)
    written = ["ess.csv"]
    if args.signal_n is not None:
        sig = synth_velocity_signal(args.signal_n, args.spectrum_exponent, args.spacing, args.seed)
        write_signal(sig, out / "signal.txt")
        written.append("signal.txt")
    print("wrote " + ", ".join(str(out / w) for w in written))
    return 0


def cmd_sf(args) -> int:
    sig = read_signal(args.signal)
    lags = default_lag_grid(len(sig), args.points_per_decade)
    curves = [structure_function(sig, int(p), lags, args.moment_kind) for p in args.orders]
    lines = ["r,n_increments," + ",".join(f"D{int(c.order)}" for c in curves)]
    for i, r in enumerate(curves[0].separations):
        vals = ",".join(format(c.values[i], ".17g") for c in curves)
        lines.append(f"{r:.17g},{curves[0].sample_counts[i]},{vals}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_ess(args) -> int:
    sig = read_signal(args.signal)
    lags = default_lag_grid(len(sig), args.points_per_decade)
    d2 = structure_function(sig, 2, lags, args.moment_kind)
    d3 = structure_function(sig, 3, lags, args.moment_kind)
    if args.re:
        d2.re_tag = args.re[0]
    pts = build_ess(d2, d3, label=args.label or sig.label)
    if pts.dropped:
        log.warning("dropped %d separations with a non-positive moment", pts.dropped)
    write_ess_csv([pts], args.out or "ess.csv")
    return 0


def cmd_slopes(args) -> int:
    sets, _, _ = _prepare(args)
    profiles = [anchored_local_slopes(s) for s in sets]
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    emit_plot_data(sets, profiles, str(out) + "/", args.a1, args.a2)
    for s in sets:
        succ = successive_slopes(s)
        prof = anchored_local_slopes(s)
        print(f"{s.label}: {len(s)} points, split at {s.split_index}, anchored slope "
              f"{prof.slopes[0]:.4f} -> {prof.slopes[-1]:.4f}, successive-slope std {np.std(succ.slopes):.3g}")
    return 0


def cmd_fit(args) -> int:
    sets, flows, digests = _prepare(args)
    section, _ = _fit_section(sets, flows, args)
    _emit_json({**_header(args, digests), **section}, args.out)
    return 0


def cmd_compare(args) -> int:
    sets, _, digests = _prepare(args)
    tagged = [s for s in sets if s.re_tag is not None]
    comparison = _comparison_section(tagged, args)
    _emit_json({**_header(args, digests), "comparison": comparison}, args.out)
    print(f"preferred: {comparison['preferred']}", file=sys.stderr)
    return 0


def cmd_report(args) -> int:
    sets, flows, digests = _prepare(args)
    section, tagged = _fit_section(sets, flows, args)
    experiments = []
    fits = {d["label"]: d for d in section["per_re_fits"]}
    for s in sets:
        experiments.append({
            "label": s.label, "re": s.re_tag, "n_points": len(s), "split_index": s.split_index,
            "line_fit": {k: v for k, v in fits[s.label].items() if k not in ("label", "re")}
            if s.label in fits else None,
            "slope_profile": _profile_summary(s),
        })
    report = {**_header(args, digests), "experiments": experiments, **section,
              "comparison": _comparison_section(tagged, args)}
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    write_report(report, out / "report.json")
    emit_plot_data(sets, [anchored_local_slopes(s) for s in sets], str(out) + "/", args.a1, args.a2)
    print(f"wrote {out / 'report.json'}; preferred: {report['comparison']['preferred']}")
    return 0


COMMANDS = {"synth": cmd_synth, "sf": cmd_sf, "ess": cmd_ess, "slopes": cmd_slopes,
            "fit": cmd_fit, "compare": cmd_compare, "report": cmd_report}


def main(argv=None) -> int:
    args = parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (DomainError, ContractError, ParseError, OSError) as exc:
        print(f"turbscale {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
