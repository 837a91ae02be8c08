"""Sweep and optimisation jobs driven by a parsed config."""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import OptimizeConfig, SweepConfig
from .geometry import GeometryError, NormalPerturbation, perturb
from .impedance import drude_gold, reflection_coefficient
from .shape_optim import StepRule, ascend_j, fourier_basis, trajectory_header, trajectory_rows
from .svgplot import boundary_svg, line_plot_svg
from .sweep import dump_operators, fmt, sweep_geometry, write_csv, write_sweep_outputs

log = logging.getLogger(__name__)


@dataclass
class JobReport:
    outputs: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    summary: list = field(default_factory=list)
    sweeps: list = field(default_factory=list)
    ascents: list = field(default_factory=list)


def run_sweep(cfg: SweepConfig, out_dir, threads=None, svg=None, dump=False, timestamp=None):
    """Sweep every geometry of ``cfg`` and write one CSV (plus SVGs) per geometry."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    threads = threads or cfg.threads
    svg = cfg.svg if svg is None else svg
    rep = JobReport()
    for g in cfg.geometries:
        boundary = g.build(cfg.n_nodes)
        gs = sweep_geometry(g.name, boundary, cfg.wavelengths_nm, cfg.drude, threads)
        stem = f"{cfg.name}_{g.name}"
        rep.outputs += write_sweep_outputs(gs, out_dir, stem, timestamp, svg)
        rep.outputs += _reflection_table(cfg, gs, out_dir, stem, timestamp)
        if dump:
            rep.outputs += dump_operators(gs.engine, out_dir, stem)
        rep.failures += [f"{g.name}: {e}" for e in gs.failures]
        rep.sweeps.append(gs)
        peaks = ", ".join(f"{p.wavelength_nm:.2f} nm (|alpha| {p.abs_alpha:.4g})" for p in gs.peaks)
        rep.summary.append(f"{g.name}: {len(gs.peaks)} peak(s){': ' + peaks if peaks else ''}")
    if svg and len(cfg.geometries) > 1:
        p = out_dir / f"{cfg.name}_overlay.svg"
        p.write_text(line_plot_svg(cfg.wavelengths_nm, [s.abs_alpha for s in rep.sweeps],
                                   [s.name for s in rep.sweeps], title=f"|alpha_inf| ({cfg.name})",
                                   xlabel="wavelength (nm)", ylabel="|alpha_inf|"), encoding="utf-8")
        rep.outputs.append(p)
    return rep


def wavenumber_per_um(wavelength_nm):
    """Vacuum wavenumber ``2 pi / lambda`` in 1/um."""
    return 2.0 * np.pi / (wavelength_nm * 1e-3)


def _reflection_table(cfg, gs, out_dir, stem, timestamp):
    d = cfg.incidence()
    rows = []
    for wl, r in zip(gs.wavelengths_nm, gs.results):
        if r is None:
            rows.append([fmt(wl), "nan", "nan", "nan"])
            continue
        # delta is the period in micrometres, so k_m is taken in 1/um
        R = reflection_coefficient(r.impedance_z, wavenumber_per_um(wl), d, cfg.delta)
        rows.append([fmt(wl), fmt(R.real), fmt(R.imag), fmt(abs(R))])
    p = Path(out_dir) / f"{stem}_reflection.csv"
    top = [f"generated {timestamp}"] if timestamp else []
    write_csv(p, ["wavelength_nm", "re_R", "im_R", "abs_R"], rows, top)
    return [p]


def _random_starts(base, spec, n_modes):
    """Deterministic random Fourier perturbations of ``base``."""
    rng = np.random.default_rng(spec["seed"])
    B = fourier_basis(base, min(n_modes, 4) if n_modes else 4)
    out = []
    for i in range(spec["count"]):
        c = rng.standard_normal(B.shape[1])
        c[0] = 0.0
        h = B @ c
        h *= spec["amplitude"] / np.max(np.abs(h))
        try:
            out.append((f"random{i}", perturb(base, NormalPerturbation(h, 1.0))))
        except GeometryError as exc:
            log.warning("random start %d rejected: %s", i, exc)
    return out


def run_optimize(cfg: OptimizeConfig, out_dir, threads=None, svg=None, timestamp=None):
    """Gradient ascent of ``J`` from every start; one trajectory CSV per start."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    threads = threads or cfg.threads
    svg = cfg.svg if svg is None else svg
    material = drude_gold(cfg.wavelength_nm * 1e-9, cfg.drude)
    starts = [(g.name if len(cfg.starts) > 1 else "start", g.build(cfg.n_nodes)) for g in cfg.starts]
    if cfg.random_starts:
        starts += _random_starts(starts[0][1], cfg.random_starts, cfg.n_modes)
    rule = StepRule(initial_move=cfg.initial_move)

    def job(item):
        return ascend_j(item[1], material, cfg.steps, rule, n_modes=cfg.n_modes)

    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(job, starts))
    else:
        results = [job(s) for s in starts]

    rep = JobReport()
    top = [f"generated {timestamp}"] if timestamp else []
    for (label, b0), res in zip(starts, results):
        stem = f"{cfg.name}_{label}"
        p = out_dir / f"{stem}_trajectory.csv"
        rows = [[str(r[0])] + [fmt(v) for v in r[1:]] for r in trajectory_rows(res, cfg.n_modes)]
        write_csv(p, trajectory_header(b0, cfg.n_modes), rows, top, [f"status: {res.status}"])
        rep.outputs.append(p)
        if svg:
            s = out_dir / f"{stem}_shapes.svg"
            s.write_text(boundary_svg([b0, res.final.boundary], ["initial", "final"],
                                      title=f"{label}: J {res.trajectory[0].J:.4g} -> {res.final.J:.4g}"),
                         encoding="utf-8")
            rep.outputs.append(s)
        rep.ascents.append(res)
        rep.summary.append(f"{label}: J {res.trajectory[0].J:.6g} -> {res.final.J:.6g} "
                           f"in {len(res.trajectory) - 1} step(s), status {res.status}")
    return rep
