"""Command line: ``thintlm run|sweep|analyze``.

Exit status 0 on success, 1 for configuration errors, 2 for runtime errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import analysis, config, scenario, sources

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


def _cmd_run(args):
    cfg = config.load(args.config)
    manifest = scenario.run_scenario(cfg, args.out)
    for name, freqs in manifest["resonances_Hz"].items():
        print(f"{name}: " + ", ".join(f"{f / 1e9:.4f}" for f in freqs) + " GHz")
    for name, se in manifest["se_mean_dB"].items():
        print(f"{name}: mean SE {se:.2f} dB")
    return EXIT_OK


def _cmd_sweep(args):
    cfg = config.load(args.config)
    dls = args.dl or (cfg.raw.get("sweep") or {}).get("dl")
    if not dls:
        raise config.ConfigError("sweep.dl", "no dl values given (use --dl or the config)")
    for n, dl in enumerate(dls):
        if not dl > 0:
            raise config.ConfigError(f"sweep.dl[{n}]", f"invalid dl {dl!r}")
        cfg.with_dl(dl)
    rows = scenario.sweep(cfg, dls, args.out, args.probe)
    for dl, ratio, freqs in rows:
        print(f"dl={dl:g}: " + ", ".join(f"{f / 1e9:.4f}" for f in freqs) + " GHz")
    return EXIT_OK


def _cmd_analyze(args):
    x, dt, n = sources.read_probe_csv(args.probe)
    if n < 16:
        raise config.ConfigError("probe", f"{args.probe} holds {n} samples, need 16")
    spec = analysis.spectrum(x, dt, args.window)
    table = analysis.find_resonances(spec, args.n_peaks, args.min_prominence,
                                     args.f_min, args.f_max)
    if args.out:
        table.to_csv(args.out)
    for r in table:
        print(f"{r.f:.6e} Hz  |X|={r.amplitude:.4e}  prominence {r.prominence_db:.1f} dB")
    if args.se:
        with_path, without_path = args.se
        xw, dtw, _ = sources.read_probe_csv(with_path)
        xo, dto, _ = sources.read_probe_csv(without_path)
        if len(xw) != len(xo) or not np.isclose(dtw, dto, rtol=1e-12):
            raise config.ConfigError("--se", "records differ in length or time step")
        se = analysis.shielding_effectiveness(analysis.spectrum(xo, dto, args.window),
                                              analysis.spectrum(xw, dtw, args.window))
        if args.se_out:
            se.to_csv(args.se_out)
        lo, hi = args.f_min, args.f_max or se.f[-1]
        f, s = se.band(lo, hi)
        print(json.dumps({"se_min_dB": float(s.min()), "se_max_dB": float(s.max()),
                          "se_mean_dB": float(s.mean())}))
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="thintlm", description="2D TLM with embedded thin panels")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a scenario file")
    r.add_argument("config")
    r.add_argument("--out", help="output directory (overrides outputs.dir)")
    r.set_defaults(func=_cmd_run)

    s = sub.add_parser("sweep", help="rerun a scenario over several dl values")
    s.add_argument("config")
    s.add_argument("--dl", type=float, nargs="+")
    s.add_argument("--out", default="sweep.csv")
    s.add_argument("--probe")
    s.set_defaults(func=_cmd_sweep)

    a = sub.add_parser("analyze", help="spectrum/resonances (and SE) of probe CSVs")
    a.add_argument("probe")
    a.add_argument("--se", nargs=2, metavar=("WITH", "WITHOUT"))
    a.add_argument("--se-out")
    a.add_argument("--window", default="rectangular", choices=analysis.WINDOWS)
    a.add_argument("--n-peaks", type=int, default=6)
    a.add_argument("--min-prominence", type=float, default=6.0)
    a.add_argument("--f-min", type=float, default=0.0)
    a.add_argument("--f-max", type=float)
    a.add_argument("--out")
    a.set_defaults(func=_cmd_analyze)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except config.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - reported as a runtime failure
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
