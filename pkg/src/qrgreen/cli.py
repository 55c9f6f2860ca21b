"""``qrgreen`` command line: render images and export CSV reports.

Exit status: 0 success, 2 configuration error, 3 numerical failure
(bracketing, Newton, overflow, parameter inside the Mandelbrot set),
4 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from . import imaging
from .boundary import BracketError, compute_profile, unit_profile
from .config import ConfigError, LevelUnits, Mode, RenderConfig, apply, dump_config, load_config
from .core_maps import MapOverflowError
from .escape import sample_dynamical_grid, sample_parameter_grid
from .fixed_points import (ManifoldError, Stability, periodic_points, region_geometry,
                           stability_grid, trace_manifolds, write_records_csv)
from .greens import (InMandelbrotError, critical_level, extract_equipotential, greens_grid,
                     predicted_components, profile_for)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

NUMERIC_ERRORS = (BracketError, ManifoldError, InMandelbrotError, MapOverflowError)

# flag -> config key; every flag takes a string parsed by the config layer
_FLAGS = {
    "--mode": "mode", "--K": "K", "--theta": "theta", "--c-re": "c_re", "--c-im": "c_im",
    "--xmin": "xmin", "--xmax": "xmax", "--ymin": "ymin", "--ymax": "ymax",
    "--width": "width", "--height": "height", "--budget": "budget", "--levels": "levels",
    "--level-units": "level_units", "--depth-ratio": "depth_ratio",
    "--palette": "palette", "--out": "out",
    "--image": "image", "--plot": "plot", "--profile-angles": "profile_angles",
    "--tol": "tol", "--period": "period", "--seeds": "seeds", "--arc-budget": "arc_budget",
    "--mark": "mark",
}


class NumericFailure(RuntimeError):
    pass


def _sibling(path: Path, tag: str) -> Path:
    return path.with_name(f"{path.stem}_{tag}{path.suffix}")


def _plot(cfg: RenderConfig, **kwargs):
    from .plotting import save_plane_figure
    save_plane_figure(cfg.plot, **kwargs)
    return [Path(cfg.plot)]


def _run_dynamical(cfg: RenderConfig):
    p, spec = cfg.params, cfg.spec
    grid = sample_dynamical_grid(p, spec, cfg.budget)
    buf = imaging.escape_image(grid.counts, cfg.palette.value)
    imaging.encode_image(buf, cfg.out)
    out = [Path(cfg.out)]
    if cfg.plot:
        pts = []
        if cfg.mark:
            pts = [(r.z, r.stability.value) for r in periodic_points(p, 1, seeds_per_axis=cfg.seeds)]
        out += _plot(cfg, buf=buf, spec=spec, points=pts,
                     title=f"K={p.K:g}, theta={p.theta:g}, c={p.c:g}")
    return out


def _run_mandelbrot(cfg: RenderConfig):
    spec = cfg.spec
    grid = sample_parameter_grid(cfg.K, cfg.theta, spec, cfg.budget)
    buf = imaging.escape_image(grid.counts, cfg.palette.value)
    imaging.encode_image(buf, cfg.out)
    out = [Path(cfg.out)]
    if cfg.plot:
        c = complex(cfg.c_re, cfg.c_im)
        pts = [(c, f"c={c:g}")] if cfg.mark else []
        out += _plot(cfg, buf=buf, spec=spec, points=pts,
                     title=f"Mandelbrot set, K={cfg.K:g}, theta={cfg.theta:g}")
    return out


def _greens_setup(cfg: RenderConfig):
    p = cfg.params
    profile = profile_for(p, cfg.profile_angles, cfg.tol)
    return p, profile, greens_grid(p, profile, cfg.spec, cfg.budget, cfg.tol)


def _run_greens_field(cfg: RenderConfig):
    _, _, field = _greens_setup(cfg)
    field.write_csv(cfg.out)
    out = [Path(cfg.out)]
    if cfg.image:
        imaging.encode_image(imaging.gray_log(field.values), cfg.image)
        out.append(Path(cfg.image))
    if cfg.plot:
        out += _plot(cfg, buf=imaging.gray_log(field.values), spec=cfg.spec, title="G")
    return out


def _run_equipotential(cfg: RenderConfig):
    p, profile, field = _greens_setup(cfg)
    t0 = None
    try:
        t0 = critical_level(p, profile, cfg.budget, cfg.tol)
    except InMandelbrotError:
        if cfg.level_units is LevelUnits.CRITICAL:
            raise
    scale = t0 if cfg.level_units is LevelUnits.CRITICAL else 1.0
    summary = Path(cfg.out)
    out = [summary]
    rows = []
    curves = []
    for k, level in enumerate(cfg.levels):
        t = level * scale
        try:
            eq = extract_equipotential(field, t, cfg.depth_ratio)
        except ValueError as exc:
            raise NumericFailure(str(exc)) from None
        path = _sibling(summary, f"L{k}")
        eq.write_csv(path)
        out.append(path)
        predicted = predicted_components(t, t0) if t0 else ""
        rows.append([k, repr(t), eq.component_count, predicted, path.name])
        curves += eq.polylines
        print(f"level {k}: t={t:.6g} components={eq.component_count} predicted={predicted}")
    with open(summary, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["level_id", "t", "components", "predicted_components", "file"])
        w.writerows(rows)
    if cfg.image or cfg.plot:
        buf = imaging.draw_polylines(imaging.gray_log(field.values), cfg.spec,
                                     [np.append(c, c[:1]) for c in curves])
        if cfg.image:
            imaging.encode_image(buf, cfg.image)
            out.append(Path(cfg.image))
        if cfg.plot:
            out += _plot(cfg, buf=imaging.gray_log(field.values), spec=cfg.spec,
                         curves=[(np.append(c, c[:1]), "red") for c in curves],
                         title="equipotentials")
    return out


def _region_curves(K: float, n: int = 720):
    g = region_geometry(K)
    s = np.linspace(0.0, 2 * np.pi, n)
    a, b = g.gamma
    curves = [(np.cos(s) / np.sqrt(a) + 1j * np.sin(s) / np.sqrt(b), "white")]
    for w in g.ellipse_centers:
        curves.append((w + g.semi_axis_h * np.cos(s) + 1j * g.semi_axis_v * np.sin(s), "white"))
    return curves


def _run_fixed_points(cfg: RenderConfig):
    p = cfg.params
    records = periodic_points(p, cfg.period, seeds_per_axis=cfg.seeds)
    write_records_csv(records, cfg.out)
    out = [Path(cfg.out)]
    if cfg.image or cfg.plot:
        buf = imaging.stability_image(stability_grid(p.K, p.theta, cfg.spec))
        curves = _region_curves(p.K) if p.K > 1 and p.theta == 0 else []
        if cfg.image:
            img = imaging.draw_polylines(buf, cfg.spec, [c for c, _ in curves], (255, 255, 255))
            imaging.encode_image(img, cfg.image)
            out.append(Path(cfg.image))
        if cfg.plot:
            out += _plot(cfg, buf=buf, spec=cfg.spec, curves=curves,
                         points=[(r.z, r.stability.value) for r in records],
                         title=f"fixed-point classes, K={p.K:g}")
    return out


def _run_boundary_profile(cfg: RenderConfig):
    q, _ = cfg.params.conjugated()
    if q.K == 1.0:
        profile = unit_profile(cfg.profile_angles)
    else:
        profile = compute_profile(q.K, q.theta, cfg.profile_angles, cfg.tol)
    with open(cfg.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["phi", "b"])
        for phi, r in zip(profile.angles, profile.radii):
            w.writerow([repr(float(phi)), repr(float(r))])
    out = [Path(cfg.out)]
    if cfg.plot:
        from .plotting import save_profile_figure
        save_profile_figure(cfg.plot, profile, f"b for K={q.K:g}, theta={q.theta:g}")
        out.append(Path(cfg.plot))
    return out


def _run_manifolds(cfg: RenderConfig):
    p, spec = cfg.params, cfg.spec
    saddles = [r for r in periodic_points(p, 1, seeds_per_axis=cfg.seeds)
               if r.stability is Stability.SADDLE]
    if not saddles:
        raise NumericFailure(f"no saddle fixed point found for {p}")
    traced = [(s, trace_manifolds(p, s, cfg.arc_budget, spec)) for s in saddles]
    with open(cfg.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["saddle_id", "manifold", "vertex_id", "re", "im"])
        for k, (_, m) in enumerate(traced):
            for name, line in (("stable", m.stable), ("unstable", m.unstable)):
                for v, z in enumerate(line):
                    w.writerow([k, name, v, repr(float(z.real)), repr(float(z.imag))])
    out = [Path(cfg.out)]
    if cfg.image or cfg.plot:
        grid = sample_dynamical_grid(p, spec, cfg.budget)
        buf = imaging.escape_image(grid.counts, cfg.palette.value)
        if cfg.image:
            img = imaging.draw_polylines(buf, spec, [m.stable for _, m in traced], (64, 160, 255))
            img = imaging.draw_polylines(img, spec, [m.unstable for _, m in traced], (255, 64, 64))
            imaging.encode_image(img, cfg.image)
            out.append(Path(cfg.image))
        if cfg.plot:
            curves = [(m.stable, "tab:blue") for _, m in traced]
            curves += [(m.unstable, "tab:red") for _, m in traced]
            out += _plot(cfg, buf=buf, spec=spec, curves=curves,
                         points=[(s.z, "saddle") for s, _ in traced],
                         title="stable (blue) and unstable (red) manifolds")
    return out


_RUNNERS = {
    Mode.DYNAMICAL: _run_dynamical,
    Mode.MANDELBROT: _run_mandelbrot,
    Mode.GREENS_FIELD: _run_greens_field,
    Mode.EQUIPOTENTIAL: _run_equipotential,
    Mode.FIXED_POINTS: _run_fixed_points,
    Mode.BOUNDARY_PROFILE: _run_boundary_profile,
    Mode.MANIFOLDS: _run_manifolds,
}


def run(cfg: RenderConfig) -> list[Path]:
    """Execute one configuration and return the files written."""
    cfg.validate()
    for target in (cfg.out, cfg.image, cfg.plot):
        if target:
            Path(target).parent.mkdir(parents=True, exist_ok=True)
    return _RUNNERS[cfg.mode](cfg)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qrgreen", description=__doc__.splitlines()[0])
    ap.add_argument("--config", help="key = value configuration file")
    for flag, key in _FLAGS.items():
        ap.add_argument(flag, dest=key, metavar=key.upper(), default=None)
    ap.add_argument("--dump-config", action="store_true",
                    help="print the resolved configuration and exit")
    return ap


def resolve(argv=None) -> tuple[RenderConfig, bool]:
    args = build_parser().parse_args(argv)
    cfg = load_config(args.config) if args.config else RenderConfig()
    pairs = [(key, getattr(args, key), f" {flag}") for flag, key in _FLAGS.items()
             if getattr(args, key) is not None]
    return apply(cfg, pairs, "command line"), args.dump_config


def main(argv=None) -> int:
    try:
        cfg, dump = resolve(argv)
        if dump:
            sys.stdout.write(dump_config(cfg.validate()))
            return EXIT_OK
        for path in run(cfg):
            print(f"wrote {path}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericFailure, *NUMERIC_ERRORS) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
