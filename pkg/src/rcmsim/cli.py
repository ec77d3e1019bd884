"""Command-line front end: ``rcmsim {sample,build,functional,nerve,experiment,render}``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .boolean import build_nerve, config_to_grains, grains_from_json, grains_to_config, load_grains
from .complex import SimplicialComplex, build_complex
from .config import load_config, preset_names
from .errors import ConfigError, RcmError, RejectedInputError
from .experiments import (
    ExperimentConfig,
    Model,
    degree_distribution_experiment,
    poincare_check,
    run_clt_experiment,
    run_covariance_experiment,
    stabilization_probe,
    write_files,
)
from .functionals import parse_functional
from .homology import betti_vector
from .pointprocess import PointConfiguration, Window, sample_poisson
from .svg import complex_svg, nerve_svg


def _model(cfg: dict) -> Model:
    try:
        return Model.from_json(cfg["model"])
    except TypeError as exc:
        # bad kernel or mark parameters surface as unexpected keyword arguments
        raise ConfigError(f"model: {exc}") from None


def _window(cfg: dict) -> Window:
    w = cfg["window"]
    return Window(cfg["model"]["dim"], float(w["side"]), tuple(w.get("center", ())))


def _resolve(path: str, base: Path | None) -> Path:
    p = Path(path)
    return p if p.is_absolute() or base is None else base / p


def _points(cfg: dict, args, base) -> PointConfiguration:
    ref = args.input or cfg.get("input")
    if ref:
        path = Path(args.input) if args.input else _resolve(ref, base)
        with open(path) as fh:
            obj = json.load(fh)
        try:
            return PointConfiguration.from_json(obj)
        except (KeyError, TypeError) as exc:
            raise RejectedInputError(f"{path}: not a point configuration (missing {exc})") from exc
    m = _model(cfg)
    return sample_poisson(_window(cfg), m.gamma, m.marks, cfg["master_seed"], cfg["replication"])


def _grains(cfg: dict, args, base):
    if args.input:
        return load_grains(args.input)
    g = cfg.get("grains")
    if g is None:
        raise ConfigError("no grains given (use --input or the 'grains' key)")
    if isinstance(g, str):
        return load_grains(_resolve(g, base))
    return grains_from_json(g)


def _dump(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def _positions(config: PointConfiguration) -> dict:
    return {int(i): tuple(p) for i, p in zip(config.ids, config.positions)}


def _complex_figure(config: PointConfiguration, cx: SimplicialComplex, title: str) -> str:
    w = config.window
    return complex_svg(_positions(config), cx, bounds=(w.lower, w.upper), title=title)


# ---------------------------------------------------------------------------
# subcommands: each returns {file name: contents} plus lines for stdout


def cmd_sample(cfg, args, base):
    config = _points(cfg, args, base)
    return {"points.json": config.dumps() + "\n"}, [f"sampled {len(config)} points"]


def cmd_build(cfg, args, base):
    config = _points(cfg, args, base)
    kernel = _model(cfg).kernel
    cx = build_complex(config, kernel)
    files = {"complex.json": _dump(cx.to_json())}
    if args.render or cfg["output"]["render"]:
        files["complex.svg"] = _complex_figure(config, cx, kernel.name)
    return files, [f"f-vector {list(cx.f_vector)}"]


def cmd_render(cfg, args, base):
    if cfg.get("grains") is not None:
        grains = _grains(cfg, args, base)
        nerve = build_nerve(grains_to_config(grains), cfg["alpha"])
        return {"nerve.svg": nerve_svg(grains, nerve)}, []
    config = _points(cfg, args, base)
    kernel = _model(cfg).kernel
    return {"complex.svg": _complex_figure(config, build_complex(config, kernel), kernel.name)}, []


def cmd_functional(cfg, args, base):
    ref = args.input or cfg.get("input")
    if not ref:
        raise ConfigError("functional needs a complex file (--input or the 'input' key)")
    path = Path(args.input) if args.input else _resolve(ref, base)
    with open(path) as fh:
        cx = SimplicialComplex.from_json(json.load(fh))
    specs = args.functionals or cfg.get("functionals") or []
    if not specs:
        raise ConfigError("no functionals requested")
    funcs = [parse_functional(s, base or Path.cwd()) for s in specs]
    rows = [f"{f}\t{_fmt(f(cx))}" for f in funcs]
    return {}, rows


def _fmt(v) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def cmd_nerve(cfg, args, base):
    grains = _grains(cfg, args, base)
    config = grains_to_config(grains, master_seed=cfg["master_seed"])
    nerve = build_nerve(config, cfg["alpha"])
    betti = betti_vector(nerve, max(nerve.dim, 1))
    files = {"nerve.json": _dump(nerve.to_json())}
    if args.render or cfg["output"]["render"]:
        files["nerve.svg"] = nerve_svg(config_to_grains(config), nerve)
    lines = [f"grains {len(grains)}", f"f-vector {list(nerve.f_vector)}"]
    lines += [f"beta_{p} {b}" for p, b in enumerate(betti)]
    return files, lines


def _experiment_config(cfg, base, threads: int) -> ExperimentConfig:
    exp = cfg["experiment"]
    funcs = exp.get("functionals") or cfg.get("functionals") or []
    if "sides" not in exp:
        raise ConfigError("experiment.sides is required")
    return ExperimentConfig(
        _model(cfg),
        [parse_functional(f, base or Path.cwd()) for f in funcs],
        exp["sides"],
        exp["replications"],
        master_seed=cfg["master_seed"],
        significance=exp["significance"],
        variance_tolerance=exp["variance_tolerance"],
        threads=threads,
        nested=exp["nested"],
    )


def cmd_experiment(cfg, args, base):
    exp = cfg.get("experiment")
    if exp is None:
        raise ConfigError("configuration has no 'experiment' section")
    kind = exp["kind"]
    seed = cfg["master_seed"]
    if kind == "clt":
        rep = run_clt_experiment(_experiment_config(cfg, base, args.threads))
        lines = [f"{lab}: Var/|W| change {rep.variance_change(lab):.4f}" for lab in rep.labels]
        last = rep.config.sides[-1]
        for lab in rep.labels:
            s = rep.stat(last, lab)
            lines.append(f"{lab}: side {last:g} " + ("degenerate" if s.degenerate else
                                                     f"KS p={s.ks.pvalue:.4f}" if s.ks else "KS skipped"))
        lines.append(f"runtime {rep.runtime['seconds']:.1f}s")
        return rep.files(), lines
    if kind == "covariance":
        cov = run_covariance_experiment(_experiment_config(cfg, base, args.threads))
        files = cov.experiment.files()
        files["covariance_report.json"] = _dump(cov.to_json())
        return files, [f"psd {cov.psd}", f"max relative change {float(cov.relative_change.max()):.4f}",
                       f"passed {cov.passed}"]
    model = _model(cfg)
    funcs = [parse_functional(f, base or Path.cwd()) for f in (exp.get("functionals") or cfg.get("functionals") or [])]
    if kind == "degree":
        side = exp.get("side", cfg["window"]["side"])
        rep = degree_distribution_experiment(model, exp["replications"], side, master_seed=seed,
                                             significance=exp["significance"], threads=args.threads)
        lines = [f"{rep.test}: statistic {rep.statistic:.4f}, p={rep.pvalue:.4f}, passed {rep.passed}"]
        lines += [f"warning: {w}" for w in rep.warnings]
        return {"degree.json": _dump(rep.to_json())}, lines
    if not funcs:
        raise ConfigError(f"experiment kind {kind!r} needs functionals")
    if kind == "poincare":
        side = exp.get("side", cfg["window"]["side"])
        out = {str(f): poincare_check(model, f, side, exp["replications"], exp["inner_replications"],
                                      master_seed=seed, threads=args.threads).to_json() for f in funcs}
        return {"poincare.json": _dump(out)}, [f"{k}: passed {v['passed']}" for k, v in out.items()]
    if kind == "stabilization":
        if "sides" not in exp:
            raise ConfigError("experiment.sides is required")
        out = {str(f): stabilization_probe(model, f, exp["sides"], exp["replications"], master_seed=seed,
                                           threshold=exp["stabilization_threshold"],
                                           threads=args.threads).to_json() for f in funcs}
        return {"stabilization.json": _dump(out)}, [f"{k}: fractions {v['fractions']}" for k, v in out.items()]
    raise ConfigError(f"unknown experiment kind {kind!r}")


COMMANDS = {
    "sample": cmd_sample,
    "build": cmd_build,
    "functional": cmd_functional,
    "nerve": cmd_nerve,
    "experiment": cmd_experiment,
    "render": cmd_render,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help=f"config file or preset name ({', '.join(preset_names())})")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config entry by dotted key (repeatable)")
    common.add_argument("--out", help="output directory (default: output.dir)")
    common.add_argument("--render", action="store_true", help="also write an SVG figure")
    common.add_argument("--threads", type=int, default=1, help="worker threads for replications")
    common.add_argument("--seed", type=int, help="master seed (overrides master_seed)")
    common.add_argument("--input", help="input file (points, complex or grains, per subcommand)")

    parser = argparse.ArgumentParser(prog="rcmsim", description="Random connection model simplicial complexes.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("sample", parents=[common], help="sample a marked Poisson configuration")
    sub.add_parser("build", parents=[common], help="build the random complex of a configuration")
    f = sub.add_parser("functional", parents=[common], help="evaluate functionals on a complex file")
    f.add_argument("functionals", nargs="*", help='descriptors such as "betti:1", "euler", "d:m=1,l=3"')
    sub.add_parser("nerve", parents=[common], help="nerve of a grain configuration")
    sub.add_parser("experiment", parents=[common], help="run a Monte-Carlo experiment")
    sub.add_parser("render", parents=[common], help="write an SVG of a complex or grain union")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if not hasattr(args, "functionals"):
        args.functionals = []
    try:
        cfg, base = load_config(args.config, args.overrides, args.seed)
        files, lines = COMMANDS[args.command](cfg, args, base)
        out_dir = Path(args.out or cfg["output"]["dir"])
        # every output is computed before anything is written
        written = write_files(out_dir, files) if files else []
    except (ConfigError, RejectedInputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (RcmError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for line in lines:
        print(line)
    for p in written:
        print(f"wrote {p}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
