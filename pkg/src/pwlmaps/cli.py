"""Command-line entry points.

Every subcommand prints ``key=value`` lines (or a CSV path) on stdout and, when
``--out`` is given, writes its result files and a JSON metadata file there.
Options can also come from a flat ``key=value`` file passed with ``--config``;
flags on the command line take precedence.
"""

from __future__ import annotations

import argparse
import re
import sys
import time
from pathlib import Path

from .errors import ConfigError, PwlError
from .grid import Axis
from .normal_form import PARAM_NAMES, NormalFormParams

FLAG_TO_PARAM = {"tauL": "tau_L", "deltaL": "delta_L", "tauR": "tau_R", "deltaR": "delta_R"}
PARAM_TO_FLAG = {v: k for k, v in FLAG_TO_PARAM.items()}


def read_config_file(path: str | Path) -> dict[str, str]:
    out: dict[str, str] = {}
    for n, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key=value, got {raw!r}")
        k, v = line.split("=", 1)
        out[k.strip().replace("-", "_")] = v.strip()
    return out


def parse_assignments(text: str) -> dict[str, float]:
    """``tauL=2,deltaL=0.75`` -> {'tau_L': 2.0, 'delta_L': 0.75}."""
    out = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        if "=" not in part:
            raise ConfigError(f"expected name=value, got {part!r}")
        k, v = part.split("=", 1)
        k = FLAG_TO_PARAM.get(k.strip(), k.strip())
        if k not in PARAM_NAMES:
            raise ConfigError(f"unknown parameter {k!r}")
        try:
            out[k] = float(v)
        except ValueError as exc:
            raise ConfigError(f"bad number in {part!r}") from exc
    return out


def _add_params(p: argparse.ArgumentParser, ranges: bool = False) -> None:
    kind = "value, or min:max:n for a scan axis" if ranges else "value"
    for flag in FLAG_TO_PARAM:
        p.add_argument(f"--{flag}", type=str, default=None, help=f"{flag} ({kind})")


def _point(args: argparse.Namespace) -> NormalFormParams:
    vals = {}
    for flag, name in FLAG_TO_PARAM.items():
        v = getattr(args, flag)
        if v is None:
            raise ConfigError(f"--{flag} is required")
        try:
            vals[name] = float(v)
        except ValueError as exc:
            raise ConfigError(f"--{flag}: expected a number, got {v!r}") from exc
    return NormalFormParams(**vals)


def _emit(pairs: dict) -> None:
    for k, v in pairs.items():
        print(f"{k}={v}")


def _out_dir(args: argparse.Namespace) -> Path | None:
    if getattr(args, "out", None):
        d = Path(args.out)
        d.mkdir(parents=True, exist_ok=True)
        return d
    return None


def _write_meta(out: Path, name: str, payload: dict, t0: float, seed: int | None = None) -> None:
    from .io import code_version, write_json

    write_json(
        {
            "config": payload,
            "seed": seed,
            "resolution": payload.get("resolution"),
            "runtime_seconds": round(time.perf_counter() - t0, 3),
            "version": code_version(),
        },
        out / f"{name}.json",
    )


def _axes_from(args: argparse.Namespace, names: dict[str, str]) -> tuple[list[Axis], dict[str, float]]:
    axes, fixed = [], {}
    for flag, name in names.items():
        v = getattr(args, flag)
        if v is None:
            continue
        if ":" in v:
            axes.append(Axis.parse(name, v))
        else:
            try:
                fixed[name] = float(v)
            except ValueError as exc:
                raise ConfigError(f"--{flag}: expected a number or min:max:n, got {v!r}") from exc
    if args.axes:
        order = [FLAG_TO_PARAM.get(a.strip(), a.strip()) for a in args.axes.split(",")]
        by_name = {a.name: a for a in axes}
        if set(order) != set(by_name):
            raise ConfigError("--axes must list exactly the two ranged parameters")
        axes = [by_name[n] for n in order]
    if len(axes) != 2:
        raise ConfigError(f"exactly two parameters must be given as min:max:n ranges, got {len(axes)}")
    return axes, fixed


def _run_scan(args: argparse.Namespace, family: str) -> int:
    from .atlas import SCAN_BUDGETS_1D, SCAN_BUDGETS_2D, ScanConfig, scan
    from .boundaries import extract_boundaries
    from .classify import Budgets1D
    from .io import write_scan
    from .plotting import plot_scan

    if family == "OneD":
        names = {"eta": "eta", "nu": "nu", "sigma": "sigma"}
        budgets = SCAN_BUDGETS_1D
        if args.orbit_len:
            budgets = Budgets1D(orbit_len=args.orbit_len)
    else:
        names = dict(FLAG_TO_PARAM)
        budgets = SCAN_BUDGETS_2D
    (a1, a2), fixed = _axes_from(args, names)
    cfg = ScanConfig(
        family=family,
        axis1=a1,
        axis2=a2,
        fixed=fixed,
        budgets=budgets,
        rng_seed=args.seed,
        n_workers=args.workers,
        m=getattr(args, "m", 2),
        grow_cycles=getattr(args, "grow_cycles", False),
    )
    res = scan(cfg)
    out = Path(args.out)
    paths = write_scan(res, out, args.stem)
    bnd = extract_boundaries(res)
    png = plot_scan(res, out / f"{args.stem}.png", bnd)
    for name, mask in res.cycle_masks.items():
        from .cycles import write_mask_csv

        write_mask_csv(out / f"{args.stem}_mask_{name.replace('^', '')}.csv", cfg.grid, mask)
    counts: dict[str, int] = {}
    for row in res.cells:
        for c in row:
            counts[str(c.cls)] = counts.get(str(c.cls), 0) + 1
    _emit({"csv": paths["csv"], "pgm": paths["pgm"], "json": paths["json"], "png": png, "runtime_seconds": f"{res.runtime_seconds:.2f}"})
    for k in sorted(counts):
        print(f"cells[{k}]={counts[k]}")
    return 0


def cmd_scan_1d(args: argparse.Namespace) -> int:
    return _run_scan(args, "OneD")


def cmd_scan_2d(args: argparse.Namespace) -> int:
    return _run_scan(args, "TwoD")


def cmd_slice(args: argparse.Namespace) -> int:
    from .atlas import slice_1d, slice_2d
    from .io import write_slice_csv
    from .plotting import plot_slice

    t0 = time.perf_counter()
    if args.family == "OneD":
        if args.sigma is None or args.ratio is None or args.eta is None:
            raise ConfigError("OneD slices need --sigma, --ratio and --eta lo:hi")
        lo, hi = (float(v) for v in args.eta.split(":")[:2])
        res = slice_1d(float(args.sigma), float(args.ratio), (lo, hi), args.n)
    else:
        if not args.start or not args.end:
            raise ConfigError("TwoD slices need --start and --end as tauL,deltaL,tauR,deltaR")
        a = NormalFormParams(*map(float, args.start.split(",")))
        b = NormalFormParams(*map(float, args.end.split(",")))
        res = slice_2d(a, b, args.n)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_slice_csv(res, out / f"{args.stem}.csv")
    plot_slice(res, out / f"{args.stem}.png")
    _write_meta(out, args.stem, {**res.description, "family": res.family, "n_points": args.n, "resolution": [args.n]}, t0)
    _emit({"csv": out / f"{args.stem}.csv", "png": out / f"{args.stem}.png", "points": len(res.points)})
    return 0


def cmd_params_reduce(args: argparse.Namespace) -> int:
    from .reduction import ReductionSpec, SaddleKind, period3_saddle_frame, reduced_params_generic

    t0 = time.perf_counter()
    params = _point(args)
    if args.period3:
        fr = period3_saddle_frame(params)
        pairs = {"eta": repr(fr.eta), "nu": repr(fr.nu), "sigma": repr(fr.sigma), "nu_prime": repr(fr.nu_prime)}
    else:
        rp, rec = reduced_params_generic(ReductionSpec(params, SaddleKind.FIXED_POINT, args.m))
        pairs = {"eta": repr(rp.eta), "nu": repr(rp.nu), "sigma": repr(rp.sigma), "epsilon": repr(rec.epsilon), "c": repr(rec.c)}
    _emit(pairs)
    out = _out_dir(args)
    if out:
        _write_meta(out, "params_reduce", {"params": list(params.as_tuple()), "m": args.m, "period3": args.period3, "result": pairs}, t0)
    return 0


def cmd_locate_codim2(args: argparse.Namespace) -> int:
    from .reduction import SaddleKind, locate_codim2, reduce_params

    t0 = time.perf_counter()
    fixed = parse_assignments(args.fix)
    guess = parse_assignments(args.guess)
    kind = SaddleKind.PERIOD_THREE if args.period3 else SaddleKind.FIXED_POINT
    p = locate_codim2(fixed, guess, m=args.m, kind=kind)
    pairs = {PARAM_TO_FLAG[n]: repr(v) for n, v in zip(PARAM_NAMES, p.as_tuple())}
    if kind is SaddleKind.FIXED_POINT:
        rp = reduce_params(p, args.m)
        pairs.update({"eta": repr(rp.eta), "nu": repr(rp.nu)})
    _emit(pairs)
    out = _out_dir(args)
    if out:
        _write_meta(out, "locate_codim2", {"fixed": fixed, "guess": guess, "m": args.m, "result": pairs}, t0)
    return 0


def cmd_cycle(args: argparse.Namespace) -> int:
    from .cycles import Itinerary, solve_cycle

    params = _point(args)
    itin = Itinerary.parse(args.word)
    sol = solve_cycle(params, itin)
    _emit(
        {
            "itinerary": itin.pretty(),
            "period": itin.period,
            "degenerate": sol.degenerate,
            "admissible": sol.admissible,
            "stable": sol.stable,
            "multipliers": ";".join(f"{m.real:.12g}{m.imag:+.12g}j" for m in sol.multipliers),
            "moduli": ";".join(f"{abs(m):.12g}" for m in sol.multipliers),
        }
    )
    if args.points:
        for p in sol.points:
            print(f"point={p.x!r},{p.y!r}")
    return 0


def cmd_verify_reduction(args: argparse.Namespace) -> int:
    from . import _kernels as K
    from .reduction import reduce_params
    from .return_map import geometric_ray, sample_psi, verify_theorem1_scaling

    t0 = time.perf_counter()
    params = _point(args)
    rp = reduce_params(params, args.m)
    stats, samples = sample_psi(params, rp, args.samples, args.seed, return_samples=True)
    pairs = {
        "eta": repr(rp.eta),
        "nu": repr(rp.nu),
        "epsilon": repr(stats.epsilon),
        "c": repr(stats.c),
        "fraction_outside": repr(stats.fraction_outside),
        "sup_error": repr(stats.sup_error),
        "n_psi0": stats.n_psi0,
    }
    if args.toward:
        target = NormalFormParams(*map(float, args.toward.split(",")))
        direction = {n: a - b for n, a, b in zip(PARAM_NAMES, params.as_tuple(), target.as_tuple())}
        ray = geometric_ray(target, direction, 1.0, args.ratio, args.ray_points)
        fit = verify_theorem1_scaling(ray, args.m, args.samples, args.seed, codim2=target)
        pairs.update(
            {
                "c_expected": repr(fit.c_expected),
                "error_slope": "" if fit.error_slope is None else repr(fit.error_slope),
                "fraction_slope": repr(fit.fraction_slope),
            }
        )
    _emit(pairs)
    out = _out_dir(args)
    if out:
        from .plotting import plot_return_samples

        hz = K.h_eval_array(samples.z, rp.eta, rp.nu, rp.sigma)
        plot_return_samples(samples.z, samples.z_prime, hz, samples.in_psi0, out / "return_map.png")
        with open(out / "return_samples.csv", "w") as fh:
            fh.write("z,z_prime,ell,r,in_psi0\n")
            for z, zp, ell, r, ok in zip(samples.z, samples.z_prime, samples.ell, samples.r, samples.in_psi0):
                fh.write(f"{z!r},{zp!r},{ell},{r},{int(ok)}\n")
        _write_meta(out, "verify_reduction", {"params": list(params.as_tuple()), "m": args.m, "samples": args.samples, "result": pairs}, t0, args.seed)
    return 0


def cmd_basin(args: argparse.Namespace) -> int:
    from .atlas import basin

    t0 = time.perf_counter()
    params = _point(args)
    xa, ya = Axis.parse("x", args.x), Axis.parse("y", args.y)
    labels, classes = basin(params, xa, ya)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "basin.csv", "w") as fh:
        fh.write("x,y,label,class,itinerary\n")
        for i, x in enumerate(xa.values):
            for j, y in enumerate(ya.values):
                c = classes[labels[i, j]]
                fh.write(f"{float(x)!r},{float(y)!r},{labels[i, j]},{c},{c.itinerary.pretty() if c.itinerary else ''}\n")
    from .plotting import plot_mask

    plot_mask(labels.astype(float), (xa.lo, xa.hi, ya.lo, ya.hi), out / "basin.png", "basin labels")
    _write_meta(out, "basin", {"params": list(params.as_tuple()), "x": args.x, "y": args.y, "resolution": [xa.n, ya.n]}, t0)
    _emit({"csv": out / "basin.csv", "png": out / "basin.png"})
    for k, c in enumerate(classes):
        print(f"label[{k}]={c}{' ' + c.itinerary.pretty() if c.itinerary else ''}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pwlmaps", description=__doc__.splitlines()[0])
    ap.add_argument("--config", help="flat key=value file; command-line flags override it")
    sub = ap.add_subparsers(dest="command", required=True)

    def common_scan(p: argparse.ArgumentParser) -> None:
        p.add_argument("--out", required=True)
        p.add_argument("--stem", default="scan")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--axes", default=None, help="order of the two ranged parameters, e.g. deltaR,tauR")

    p = sub.add_parser("scan-1d", help="bifurcation set of the 1D map")
    for n in ("eta", "nu", "sigma"):
        p.add_argument(f"--{n}", type=str, default=None)
    p.add_argument("--orbit-len", dest="orbit_len", type=int, default=None)
    common_scan(p)
    p.set_defaults(func=cmd_scan_1d)

    p = sub.add_parser("scan-2d", help="bifurcation set of the normal form")
    _add_params(p, ranges=True)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--grow-cycles", dest="grow_cycles", action="store_true")
    common_scan(p)
    p.set_defaults(func=cmd_scan_2d)

    p = sub.add_parser("slice", help="one-parameter bifurcation diagram")
    p.add_argument("--family", choices=("OneD", "TwoD"), default="OneD")
    p.add_argument("--sigma", type=float)
    p.add_argument("--ratio", type=float, help="nu/eta along the slice")
    p.add_argument("--eta", help="lo:hi")
    p.add_argument("--start")
    p.add_argument("--end")
    p.add_argument("--n", type=int, default=400)
    p.add_argument("--out", required=True)
    p.add_argument("--stem", default="slice")
    p.set_defaults(func=cmd_slice)

    p = sub.add_parser("params-reduce", help="reduced parameters eta, nu, sigma")
    _add_params(p)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--period3", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_params_reduce)

    p = sub.add_parser("locate-codim2", help="solve eta = nu = 0 in two free parameters")
    p.add_argument("--fix", required=True, help="e.g. tauL=2,deltaL=0.75")
    p.add_argument("--guess", required=True, help="e.g. deltaR=1.4,tauR=-0.45")
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--period3", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_locate_codim2)

    p = sub.add_parser("cycle", help="solve a periodic orbit from its itinerary")
    _add_params(p)
    p.add_argument("--word", required=True, help="e.g. L^8R^2")
    p.add_argument("--points", action="store_true")
    p.set_defaults(func=cmd_cycle)

    p = sub.add_parser("verify-reduction", help="compare the first-return map with h")
    _add_params(p)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--toward", help="codimension-two point tauL,deltaL,tauR,deltaR for a scaling fit")
    p.add_argument("--ratio", type=float, default=1 / 1.5)
    p.add_argument("--ray-points", dest="ray_points", type=int, default=6)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify_reduction)

    p = sub.add_parser("basin", help="classify a grid of initial conditions")
    _add_params(p)
    p.add_argument("--x", required=True, help="min:max:n")
    p.add_argument("--y", required=True, help="min:max:n")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_basin)
    return ap


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, rest = pre.parse_known_args(argv)
    if known.config:
        choices = {}
        for action in parser._subparsers._group_actions:  # type: ignore[union-attr]
            choices.update(action.choices)
        command = next((tok for tok in rest if tok in choices), None)
        if command is None:
            raise ConfigError("no subcommand given")
        sub_parser = choices[command]
        valid = {a.dest: a for a in sub_parser._actions}
        defaults = {}
        for k, v in read_config_file(known.config).items():
            if k not in valid or k == "help":
                raise ConfigError(f"config key {k!r} is not an option of {command}")
            act = valid[k]
            if isinstance(act, argparse._StoreTrueAction):
                defaults[k] = v.lower() in ("1", "true", "yes")
            elif act.type is not None:
                defaults[k] = act.type(v)
            else:
                defaults[k] = v
            # a value from the file satisfies a required option
            act.required = False
        sub_parser.set_defaults(**defaults)
    return parser.parse_args(argv)


_NEGATIVE_VALUE = re.compile(r"^-[\d.]")


def join_negative_values(argv: list[str]) -> list[str]:
    """Turn ``--tauR -0.6:-0.4:20`` into ``--tauR=-0.6:-0.4:20`` so argparse keeps the value."""
    out: list[str] = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok.startswith("--") and "=" not in tok and i + 1 < len(argv) and _NEGATIVE_VALUE.match(argv[i + 1]):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def main(argv: list[str] | None = None) -> int:
    argv = join_negative_values(list(sys.argv[1:] if argv is None else argv))
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        return int(args.func(args) or 0)
    except (ConfigError, PwlError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
