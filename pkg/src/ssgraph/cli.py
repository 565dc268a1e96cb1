"""Command-line front end.

Subcommands: ``ssg estimate``, ``ssg analytic``, ``stability check``,
``certify``, ``loop simulate``, ``loop gain``, ``hilbert``. Every run is
driven by a JSON config (systems, input family, tolerances, tau grid);
``--seed``, ``--out`` and ``--jobs`` override config values from the command
line. Outputs are deterministic: the same config and seed produce byte
identical CSV/JSON/SVG payloads, each stamped with the config hash and seed.

Exit codes: 0 completed (verdicts live in the JSON, not the exit code),
2 config error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import certify as certify_mod
from . import geometry, loop, spectral, ssg, svg
from .errors import (
    CatalogError,
    ConfigError,
    LoopDivergenceError,
    ParameterError,
    SsgraphError,
    UnstableModelError,
)
from .signals import InputFamily, signal_from_csv, signal_to_csv
from .systems import CATALOG_ENTRIES, analytic_region, model_from_config

DEFAULT_TOLERANCES = {
    "zero_pairing": ssg.ZERO_PAIRING_TOL,
    "real_axis_band": certify_mod.REAL_AXIS_BAND,
    "product_slack": certify_mod.PRODUCT_SLACK,
}


class Experiment:
    """Validated experiment configuration."""

    def __init__(self, doc: dict, seed=None, jobs=1):
        if not isinstance(doc, dict):
            raise ConfigError("config root must be a JSON object")
        self.doc = doc
        self.jobs = jobs
        self.seed = int(seed if seed is not None else doc.get("seed", 0))
        self.systems = {}
        for name, sysdoc in doc.get("systems", {}).items():
            try:
                self.systems[name] = model_from_config(sysdoc)
            except (ParameterError, UnstableModelError) as exc:
                raise ConfigError(f"systems.{name}: {exc}") from None
        fam = dict(doc.get("family", {}))
        fam.setdefault("kind", "multisine")
        fam["seed"] = self.seed
        if "omegas" in fam and fam["omegas"] is not None:
            fam["omegas"] = tuple(float(w) for w in fam["omegas"])
        try:
            self.family = InputFamily(**fam)
        except TypeError as exc:
            raise ConfigError(f"family: unknown field ({exc})") from None
        except ParameterError as exc:
            raise ConfigError(f"family: {exc}") from None
        tol = {**DEFAULT_TOLERANCES, **doc.get("tolerances", {})}
        self.zero_pairing = float(tol["zero_pairing"])
        self.real_axis_band = float(tol["real_axis_band"])
        self.product_slack = float(tol["product_slack"])
        grid = doc.get("tau_grid", {})
        self.tau_grid = geometry.default_tau_grid(
            count=int(grid.get("count", 64)), tau_min=float(grid.get("min", 1e-3))
        )
        self.r = float(doc.get("r", 0.05))
        canonical = json.dumps(
            {"doc": doc, "seed": self.seed}, sort_keys=True, separators=(",", ":")
        )
        self.config_hash = hashlib.sha256(canonical.encode()).hexdigest()[:16]

    def system(self, name: str):
        if name not in self.systems:
            raise ConfigError(
                f"unknown system {name!r}; config defines {sorted(self.systems)}"
            )
        return self.systems[name]

    def provenance(self) -> str:
        return f"config_sha256={self.config_hash} seed={self.seed}"

    def stamp(self, payload: dict) -> dict:
        return {**payload, "_provenance": {"config_sha256": self.config_hash, "seed": self.seed}}


def _load_experiment(args) -> Experiment:
    path = Path(args.config)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    return Experiment(doc, seed=args.seed, jobs=getattr(args, "jobs", 1))


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write(path: Path, text: str):
    path.write_text(text)
    print(f"wrote {path}")


def _parse_entry(spec: str):
    """'second-order-perimeter:k=8' -> (entry, k)."""
    entry, _, rest = spec.partition(":")
    k = None
    if rest:
        key, _, val = rest.partition("=")
        if key != "k":
            raise ConfigError(f"unknown catalog parameter {key!r} in {spec!r}")
        k = float(val)
    if entry not in CATALOG_ENTRIES:
        raise ConfigError(f"unknown catalog entry {entry!r}; choose from {CATALOG_ENTRIES}")
    return entry, k


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_ssg_estimate(args) -> int:
    exp = _load_experiment(args)
    model = exp.system(args.system)
    cloud = ssg.estimate_ssg(
        model, exp.family, tol=exp.zero_pairing, jobs=exp.jobs
    )
    out = _outdir(args)
    _write(out / f"cloud_{args.system}.csv", cloud.to_csv(comments=[exp.provenance()]))
    overlays = []
    if args.overlay:
        entry, k = _parse_entry(args.overlay)
        overlays.append(analytic_region(entry, k=k, signed=not args.full_overlay))
    doc = svg.scatter_svg(
        [(cloud.expanded_points(), args.system)],
        overlays=overlays,
        title=f"signed scaled graph of {args.system}",
        provenance=exp.provenance(),
    )
    _write(out / f"cloud_{args.system}.svg", doc)
    return 0


def cmd_ssg_analytic(args) -> int:
    entry, k = _parse_entry(args.entry)
    region = analytic_region(entry, k=k, signed=not args.full)
    out = _outdir(args)
    lines = ["re,im"]
    if isinstance(region, geometry.ParametricPerimeter):
        pts = region.points
    elif isinstance(region, geometry.VerticalLine):
        lo = region.im_lo if np.isfinite(region.im_lo) else -10.0
        hi = region.im_hi if np.isfinite(region.im_hi) else 10.0
        pts = region.re + 1j * np.linspace(lo, hi, 512)
    else:
        raise CatalogError(f"no sampler for region type {type(region).__name__}")
    for z in pts:
        lines.append(f"{z.real:.15g},{z.imag:.15g}")
    stem = entry if k is None else f"{entry}_k{k:g}"
    _write(out / f"region_{stem}.csv", "\n".join(lines) + "\n")
    doc = svg.scatter_svg([], overlays=[region], title=f"analytic region {entry}")
    _write(out / f"region_{stem}.svg", doc)
    return 0


def _analytic_pair(args, mode: str):
    entry1, k1 = _parse_entry(args.h1)
    entry2, k2 = _parse_entry(args.h2)
    signed = mode == "signed"
    a = analytic_region(entry1, k=k1, signed=signed)
    b0 = analytic_region(entry2, k=k2, signed=signed)
    if "inverse" not in entry2:
        raise ConfigError(
            "--analytic expects the h2 entry to be an inverse region "
            "(lead-inverse-halfline or lag-inverse-halfline)"
        )
    return a, lambda tau: b0.scale_negate(1.0 / tau)


def cmd_stability(args) -> int:
    exp = _load_experiment(args)
    modes = ["signed", "unsigned"] if args.mode == "both" else [args.mode]
    r = args.r if args.r is not None else exp.r
    verdicts = {}
    svg_sets = []
    svg_overlays = []
    if args.analytic:
        for mode in modes:
            a, b_of_tau = _analytic_pair(args, mode)
            verdicts[mode] = geometry.separation_check(
                a, b_of_tau, r, tau_grid=exp.tau_grid, mode=mode, jobs=exp.jobs
            )
        if isinstance(a, geometry.ParametricPerimeter):
            svg_overlays.append(a)
        svg_overlays.append(_analytic_pair(args, modes[-1])[1](1.0))
        name1, name2 = args.h1.split(":")[0], args.h2.split(":")[0]
    else:
        c1 = ssg.estimate_ssg(exp.system(args.h1), exp.family, tol=exp.zero_pairing, jobs=exp.jobs)
        c2 = ssg.estimate_ssg(exp.system(args.h2), exp.family, tol=exp.zero_pairing, jobs=exp.jobs)
        for mode in modes:
            a_pts, b_of_tau = ssg.separation_sets(c1, c2, mode)
            verdicts[mode] = geometry.separation_check(
                a_pts, b_of_tau, r, tau_grid=exp.tau_grid, mode=mode, jobs=exp.jobs
            )
        a_pts, b_of_tau = ssg.separation_sets(c1, c2, modes[-1])
        svg_sets = [(a_pts, args.h1), (b_of_tau(1.0), f"inv(-{args.h2}), tau=1")]
        name1, name2 = args.h1, args.h2
    payload = {mode: v.to_json_dict() for mode, v in verdicts.items()}
    if len(verdicts) == 2:
        payload["comparison"] = {
            "unsigned_separated": verdicts["unsigned"].separated,
            "signed_separated": verdicts["signed"].separated,
            "unsigned_conservative": bool(
                verdicts["signed"].separated and not verdicts["unsigned"].separated
            ),
            "signed_margin_minus_unsigned": verdicts["signed"].margin
            - verdicts["unsigned"].margin,
        }
    out = _outdir(args)
    _write(
        out / f"stability_{name1}_vs_{name2}.json",
        json.dumps(exp.stamp(payload), indent=2, sort_keys=True) + "\n",
    )
    if args.svg:
        doc = svg.scatter_svg(
            svg_sets,
            overlays=svg_overlays,
            title=f"separation: {name1} vs {name2}",
            provenance=exp.provenance(),
        )
        _write(out / f"stability_{name1}_vs_{name2}.svg", doc)
    return 0


def cmd_certify(args) -> int:
    exp = _load_experiment(args)
    prop = args.property
    out = _outdir(args)
    if prop in ("passive", "strict-passive", "ssg-ni"):
        if not args.system:
            raise ConfigError(f"--property {prop} needs --system")
        model = exp.system(args.system)
        eps = args.epsilon if args.epsilon is not None else 0.0
        if prop == "strict-passive" and not eps > 0:
            raise ConfigError("--property strict-passive needs --epsilon > 0")
        if prop == "ssg-ni":
            report = certify_mod.check_ssg_ni(
                model, exp.family, eps, flip_sign=args.flip_sign,
                zero_pairing_tol=exp.zero_pairing,
            )
        else:
            report = certify_mod.check_passive(model, exp.family, eps)
        target = args.system
    elif prop in ("passivity-theorem", "ni-theorem"):
        if not (args.h1 and args.h2):
            raise ConfigError(f"--property {prop} needs --h1 and --h2")
        h1, h2 = exp.system(args.h1), exp.system(args.h2)
        if prop == "passivity-theorem":
            eps = args.epsilon if args.epsilon is not None else 0.0
            report = certify_mod.passivity_theorem_verdict(h1, h2, exp.family, eps)
        else:
            report = certify_mod.ni_theorem_verdict(
                h1,
                h2,
                exp.family,
                epsilon=args.epsilon if args.epsilon is not None else 0.0,
                band=exp.real_axis_band,
                product_slack=exp.product_slack,
            )
        target = f"{args.h1}_{args.h2}"
    else:
        raise ConfigError(f"unknown property {prop!r}")
    _write(
        out / f"certify_{prop}_{target}.json",
        json.dumps(exp.stamp(report.to_json_dict()), indent=2, sort_keys=True) + "\n",
    )
    print(f"{prop}: {report.verdict}")
    return 0


def cmd_loop_simulate(args) -> int:
    exp = _load_experiment(args)
    h1, h2 = exp.system(args.h1), exp.system(args.h2)
    from .signals import generate_input

    w = generate_input(exp.family, args.input_index)
    traj = loop.closed_loop_simulate(h1, h2, w, tau=args.tau, sign=args.sign)
    out = _outdir(args)
    stem = f"loop_{args.h1}_{args.h2}"
    _write(out / f"{stem}.csv", traj.to_csv(comments=[exp.provenance()]))
    diag = certify_mod.w_set_diagnostic(traj)
    payload = {
        "interconnection_residual": traj.interconnection_residual(),
        "tau": args.tau,
        "sign": args.sign,
        "excluded_input_diagnostic": diag.to_json_dict(),
    }
    _write(
        out / f"{stem}.json",
        json.dumps(exp.stamp(payload), indent=2, sort_keys=True) + "\n",
    )
    return 0


def cmd_loop_gain(args) -> int:
    exp = _load_experiment(args)
    h1, h2 = exp.system(args.h1), exp.system(args.h2)
    report = loop.empirical_gain(h1, h2, exp.family, tau_grid=exp.tau_grid, sign=args.sign)
    out = _outdir(args)
    _write(
        out / f"gain_{args.h1}_{args.h2}.json",
        json.dumps(exp.stamp(report.to_json_dict()), indent=2, sort_keys=True) + "\n",
    )
    print(f"gamma={report.gamma:.6g} unstable_flag={report.unstable_flag}")
    return 0


def cmd_hilbert(args) -> int:
    src = Path(args.input)
    try:
        u = signal_from_csv(src.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {src}: {exc}") from None
    transformed = spectral.hilbert(u, pad_factor=args.pad)
    dest = Path(args.out) if args.out else src.with_name(src.stem + "_hilbert.csv")
    dest.parent.mkdir(parents=True, exist_ok=True)
    _write(dest, signal_to_csv(transformed, comments=[f"hilbert pad_factor={args.pad}"]))
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _add_common(p, config=True):
    if config:
        p.add_argument("--config", required=True, help="experiment config JSON")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--jobs", type=int, default=1, help="worker pool size")
    p.add_argument("--out", default="out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ssgraph",
        description="scaled graphs, signed scaled graphs, and graphical stability checks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ssg_p = sub.add_parser("ssg", help="point-cloud estimation and analytic regions")
    ssg_sub = ssg_p.add_subparsers(dest="subcommand", required=True)
    est = ssg_sub.add_parser("estimate", help="estimate a signed scaled graph cloud")
    _add_common(est)
    est.add_argument("--system", required=True)
    est.add_argument("--overlay", default=None, help="catalog entry to draw behind the cloud")
    est.add_argument("--full-overlay", action="store_true", help="overlay without sign restriction")
    est.set_defaults(func=cmd_ssg_estimate)
    ana = ssg_sub.add_parser("analytic", help="emit a catalog region")
    _add_common(ana, config=False)
    ana.add_argument("--entry", required=True, help="e.g. second-order-perimeter:k=8")
    ana.add_argument("--full", action="store_true", help="without the sign restriction")
    ana.set_defaults(func=cmd_ssg_analytic)

    stab = sub.add_parser("stability", help="graph separation over the tau homotopy")
    stab_sub = stab.add_subparsers(dest="subcommand", required=True)
    chk = stab_sub.add_parser("check")
    _add_common(chk)
    chk.add_argument("--h1", required=True, help="system name (or catalog entry with --analytic)")
    chk.add_argument("--h2", required=True)
    chk.add_argument("--mode", choices=["signed", "unsigned", "both"], default="both")
    chk.add_argument("--r", type=float, default=None, help="required separation margin")
    chk.add_argument("--analytic", action="store_true", help="use catalog regions, not clouds")
    chk.add_argument("--svg", action="store_true", help="also draw both sets")
    chk.set_defaults(func=cmd_stability)

    cert = sub.add_parser("certify", help="system-class certification")
    _add_common(cert)
    cert.add_argument(
        "--property",
        required=True,
        choices=["passive", "strict-passive", "ssg-ni", "passivity-theorem", "ni-theorem"],
    )
    cert.add_argument("--system", default=None)
    cert.add_argument("--h1", default=None)
    cert.add_argument("--h2", default=None)
    cert.add_argument("--epsilon", type=float, default=None)
    cert.add_argument(
        "--flip-sign",
        action="store_true",
        help="evaluate the ssg-ni inequality under the opposite pairing orientation",
    )
    cert.set_defaults(func=cmd_certify)

    lp = sub.add_parser("loop", help="closed-loop simulation and empirical gain")
    lp_sub = lp.add_subparsers(dest="subcommand", required=True)
    sim = lp_sub.add_parser("simulate")
    _add_common(sim)
    sim.add_argument("--h1", required=True)
    sim.add_argument("--h2", required=True)
    sim.add_argument("--tau", type=float, default=1.0)
    sim.add_argument("--sign", type=int, choices=[-1, 1], default=-1)
    sim.add_argument("--input-index", type=int, default=0)
    sim.set_defaults(func=cmd_loop_simulate)
    gain = lp_sub.add_parser("gain")
    _add_common(gain)
    gain.add_argument("--h1", required=True)
    gain.add_argument("--h2", required=True)
    gain.add_argument("--sign", type=int, choices=[-1, 1], default=-1)
    gain.set_defaults(func=cmd_loop_gain)

    hil = sub.add_parser("hilbert", help="Hilbert-transform a CSV signal")
    hil.add_argument("--input", required=True, help="CSV with a t,value header")
    hil.add_argument("--out", default=None, help="output CSV path")
    hil.add_argument("--pad", type=int, default=4, help="FFT padding factor")
    hil.set_defaults(func=cmd_hilbert)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ParameterError, CatalogError, UnstableModelError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except LoopDivergenceError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except SsgraphError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
