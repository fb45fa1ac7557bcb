"""Batch command line: every pipeline behind file-based, scriptable subcommands.

Exit codes: 0 success, 1 domain error (bad image, no strip, ...), 2 usage.
Machine-readable payloads go to stdout (JSON for most subcommands, CSV for
the Hough detectors); human diagnostics go to stderr. Output files are only
written after the computation succeeded, so failures never leave partial
artifacts behind.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import flight, fuzzy, neural, sidewalk, vision
from .errors import AerobotError
from .raster import Image, histogram, parse_pnm, to_grayscale, write_pnm

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2


def _read_image(path: str):
    return parse_pnm(Path(path).read_bytes())


def _emit(payload: dict) -> None:
    sys.stdout.write(json.dumps(payload, indent=2) + "\n")


def _write_files(files: list[tuple[str, bytes]]) -> None:
    for path, data in files:
        Path(path).write_bytes(data)


def _cmd_otsu(args) -> int:
    img = to_grayscale(_read_image(args.image))
    t = vision.otsu_threshold(histogram(img))
    files = []
    if args.out:
        mask = np.where(img.to_array() > t, 255, 0).astype(np.uint8)
        files.append((args.out, write_pnm(Image.from_array(mask))))
    _write_files(files)
    _emit({"threshold": t})
    return EXIT_OK


def _cmd_green_density(args) -> int:
    img = _read_image(args.image)
    result = vision.green_density(img, exg_threshold=args.threshold)
    files = []
    if args.mask:
        files.append((args.mask, write_pnm(result.mask)))
    _write_files(files)
    _emit({"green_fraction": result.fraction, "exg_threshold": args.threshold})
    return EXIT_OK


def _cmd_dose(args) -> int:
    img = _read_image(args.image)
    result = vision.green_density(img)
    system = None
    if args.system:
        system = fuzzy.system_from_json(Path(args.system).read_text())
    dose = fuzzy.pesticide_dose(result.fraction, system)
    _emit({"green_fraction": result.fraction, "dose_liters": dose})
    return EXIT_OK


def _cmd_detect_lines(args) -> int:
    edges = to_grayscale(_read_image(args.image))
    hits = vision.hough_lines(edges, theta_step=args.theta_step, threshold=args.min_votes)
    sys.stdout.write(vision.line_hits_csv(hits))
    return EXIT_OK


def _cmd_detect_circles(args) -> int:
    edges = to_grayscale(_read_image(args.image))
    hits = vision.hough_circles(edges, args.r_min, args.r_max, threshold=args.min_votes)
    sys.stdout.write(vision.circle_hits_csv(hits))
    return EXIT_OK


def _cmd_inspect_sidewalk(args) -> int:
    img = _read_image(args.image)
    config = sidewalk.InspectConfig(sigma=args.sigma, block_length=args.block)
    report, overlay = sidewalk.inspect(img, config)
    doc = report.to_dict()
    files = []
    if args.overlay:
        files.append((args.overlay, write_pnm(overlay)))
    if args.report:
        files.append((args.report, (json.dumps(doc, indent=2) + "\n").encode()))
    _write_files(files)
    _emit(doc)
    return EXIT_OK


def _cmd_thermal(args) -> int:
    if args.to_temp is not None:
        _emit({"temperature_k": vision.radiance_to_temperature(args.to_temp)})
    else:
        _emit({"radiance_w_m2": vision.temperature_to_radiance(args.to_radiance)})
    return EXIT_OK


def _cmd_thrust(args) -> int:
    table = flight.load_mass_table(args.mass_table)
    total_g = flight.total_mass(table)
    spec = flight.ThrustSpec(total_g / 1000.0, args.rotors, args.safety)
    kgf = flight.thrust_per_rotor(spec)
    _emit({
        "total_g": int(total_g) if float(total_g).is_integer() else total_g,
        "per_rotor_kgf": kgf,
        "per_rotor_n": flight.kgf_to_newtons(kgf),
    })
    return EXIT_OK


def _cmd_simulate(args) -> int:
    cfg = flight.SimConfig.from_json(Path(args.config).read_text())
    trace = flight.simulate_hover(cfg)
    files = []
    if args.trace:
        files.append((args.trace, flight.trace_to_csv(trace).encode()))
    _write_files(files)
    _emit({
        "steps": len(trace),
        "controller": cfg.controller,
        "max_abs_roll_rad": max(abs(s.roll) for s in trace),
        "max_abs_pitch_rad": max(abs(s.pitch) for s in trace),
        "max_abs_tilt_rad": flight.max_tilt(trace),
        "final_roll_rad": trace[-1].roll,
        "final_pitch_rad": trace[-1].pitch,
    })
    return EXIT_OK


_ACTIVATIONS = {
    "sigmoid": neural.SIGMOID,
    "relu": neural.RELU,
    "leaky": neural.LEAKY_RELU,
}


def _layer_sizes(text: str) -> tuple:
    try:
        return tuple(int(s) for s in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad layer list {text!r}") from None


def _cmd_nn_demo(args) -> int:
    sizes = args.layers
    activation = neural.Activation(_ACTIVATIONS[args.activation])
    net = neural.mlp_init(sizes, activation, args.seed)
    rng = np.random.default_rng(args.seed)
    if args.gradient_check:
        x = rng.uniform(-1.0, 1.0, size=sizes[0])
        target = rng.uniform(0.0, 1.0, size=sizes[-1])
        err = neural.gradient_check(net, x, target, epsilon=1e-5)
        _emit({"mode": "gradient-check", "layers": list(sizes),
               "activation": args.activation, "seed": args.seed,
               "max_relative_error": err})
    else:
        dataset = rng.uniform(0.0, 1.0, size=(32, sizes[0]))
        report = neural.diagnose(net, dataset)
        _emit({"mode": "diagnose", "layers": list(sizes),
               "activation": args.activation, "seed": args.seed,
               "layer_mean_abs_grad": list(report.layer_mean_abs_grad),
               "dead_neurons": [list(d) for d in report.dead_neurons()]})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aerobot",
                                     description="Aerial-robot perception and control toolbox.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("otsu", help="automatic gray threshold of a PGM image")
    p.add_argument("image")
    p.add_argument("--out", help="write the binarized mask as PGM")
    p.set_defaults(func=_cmd_otsu)

    p = sub.add_parser("green-density", help="excess-green vegetation fraction of a PPM image")
    p.add_argument("image")
    p.add_argument("--threshold", type=int, default=vision.DEFAULT_EXG_THRESHOLD,
                   help="excess-green cutoff (default %(default)s)")
    p.add_argument("--mask", help="write the green mask as PGM")
    p.set_defaults(func=_cmd_green_density)

    p = sub.add_parser("dose", help="pesticide dose from the image's green density")
    p.add_argument("image")
    p.add_argument("--system", help="fuzzy system JSON replacing the built-in dosing rules")
    p.set_defaults(func=_cmd_dose)

    p = sub.add_parser("detect-lines", help="Hough line hits of a binary edge image (CSV)")
    p.add_argument("image")
    p.add_argument("--theta-step", type=float, default=1.0)
    p.add_argument("--min-votes", type=int, default=50)
    p.set_defaults(func=_cmd_detect_lines)

    p = sub.add_parser("detect-circles", help="Hough circle hits of a binary edge image (CSV)")
    p.add_argument("image")
    p.add_argument("--r-min", type=int, required=True)
    p.add_argument("--r-max", type=int, required=True)
    p.add_argument("--min-votes", type=int, default=20)
    p.set_defaults(func=_cmd_detect_circles)

    p = sub.add_parser("inspect-sidewalk", help="flag erased curb blocks of a PGM image")
    p.add_argument("image")
    p.add_argument("--sigma", type=float, default=2.0)
    p.add_argument("--block", type=int, default=8)
    p.add_argument("--overlay", help="write the flagged-block overlay as PGM")
    p.add_argument("--report", help="write the JSON report to a file as well")
    p.set_defaults(func=_cmd_inspect_sidewalk)

    p = sub.add_parser("thermal", help="blackbody radiance/temperature conversion")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--to-temp", type=float, metavar="P",
                       help="power density W/m^2 to kelvin")
    group.add_argument("--to-radiance", type=float, metavar="T",
                       help="kelvin to power density W/m^2")
    p.set_defaults(func=_cmd_thermal)

    p = sub.add_parser("thrust", help="per-rotor thrust from a mass table CSV")
    p.add_argument("--mass-table", required=True)
    p.add_argument("--rotors", type=int, required=True)
    p.add_argument("--safety", type=float, default=1.2)
    p.set_defaults(func=_cmd_thrust)

    p = sub.add_parser("simulate", help="hover simulation from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--trace", help="write the per-step trace CSV")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("nn-demo", help="gradient checking and pathology diagnostics")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--gradient-check", action="store_true")
    group.add_argument("--diagnose", action="store_true")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--layers", type=_layer_sizes, default=(2, 3, 1),
                   help="comma-separated layer sizes")
    p.add_argument("--activation", choices=sorted(_ACTIVATIONS), default="sigmoid")
    p.set_defaults(func=_cmd_nn_demo)

    return parser


def run(argv=None) -> int:
    """Dispatch one command line; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed usage to stderr
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    try:
        return args.func(args)
    except AerobotError as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_DOMAIN
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_DOMAIN
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_DOMAIN


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
