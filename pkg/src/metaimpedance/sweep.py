"""Wavelength sweeps, peak detection and CSV/SVG output."""
from __future__ import annotations

import csv
import io
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.signal import find_peaks

from .impedance import (DrudeParameters, ImpedanceResult, ModalData, NearSingularError,
                        alpha_inf_direct, alpha_inf_spectral, drude_gold)
from .operators import PeriodicOperators, eigendecompose
from .svgplot import boundary_svg, line_plot_svg

log = logging.getLogger(__name__)

SWEEP_HEADER = ["wavelength_nm", "re_alpha", "im_alpha", "abs_alpha", "re_z", "im_z",
                "dominant_mode_index", "dominant_mode_lambda"]

#: minimal peak prominence as a fraction of the sweep maximum
PEAK_PROMINENCE = 0.05


def fmt(x):
    """Locale-independent shortest round-trip representation of a float."""
    x = float(x)
    if x != x:
        return "nan"
    return repr(x)


@dataclass(frozen=True)
class Peak:
    wavelength_nm: float
    abs_alpha: float
    prominence: float
    dominant_mode_index: int
    dominant_mode_lambda: float


@dataclass
class GeometrySweep:
    """Sweep of one geometry; ``results[i]`` is ``None`` where the solve failed."""

    name: str
    boundary: object
    wavelengths_nm: np.ndarray
    results: list
    failures: list = field(default_factory=list)
    peaks: list = field(default_factory=list)
    engine: object = field(default=None, repr=False)

    @property
    def abs_alpha(self):
        return np.array([abs(r.alpha_inf) if r else np.nan for r in self.results])

    @property
    def alpha(self):
        return np.array([r.alpha_inf if r else np.nan for r in self.results])


class SweepEngine:
    """Geometry-only data (operators, spectrum, modal couplings) shared by all wavelengths."""

    def __init__(self, boundary, drude: DrudeParameters | None = None):
        self.boundary = boundary
        self.drude = drude or DrudeParameters()
        self.ops = PeriodicOperators.assemble(boundary)
        self.spec = eigendecompose(self.ops)
        self.modal = ModalData.from_spectrum(self.spec, boundary)

    def material(self, wavelength_nm):
        return drude_gold(wavelength_nm * 1e-9, self.drude)

    def spectral(self, wavelength_nm) -> ImpedanceResult:
        m = self.material(wavelength_nm)
        return alpha_inf_spectral(self.spec, self.boundary, m.resolvent_lambda,
                                  m.wavelength, self.modal)

    def direct(self, wavelength_nm) -> ImpedanceResult:
        m = self.material(wavelength_nm)
        return alpha_inf_direct(self.ops, m.resolvent_lambda, m.wavelength)

    def abs_alpha(self, wavelength_nm):
        m = self.material(wavelength_nm)
        return abs(self.modal.terms(m.resolvent_lambda).sum())


def _evaluate(engine, wl):
    try:
        res = engine.spectral(wl)
        if not np.isfinite(res.alpha_inf):
            raise FloatingPointError("non-finite alpha_inf")
        return res, None
    except (NearSingularError, FloatingPointError, ValueError, np.linalg.LinAlgError) as exc:
        return None, f"{wl:.6g} nm: {exc}"


def find_sweep_peaks(engine: SweepEngine, wavelengths_nm, values, refine=True):
    """Local maxima with prominence at least 5% of the sweep maximum.

    With ``refine`` each peak is relocated to the maximum of ``|alpha_inf|``
    between its grid neighbours (bounded scalar search on the spectral series).
    """
    vals = np.nan_to_num(np.asarray(values, dtype=float), nan=0.0)
    if vals.size < 3 or vals.max() <= 0:
        return []
    idx, props = find_peaks(vals, prominence=PEAK_PROMINENCE * vals.max())
    peaks = []
    for i, prom in zip(idx, props["prominences"]):
        wl, val = float(wavelengths_nm[i]), float(vals[i])
        if refine and engine is not None:
            lo, hi = float(wavelengths_nm[i - 1]), float(wavelengths_nm[i + 1])
            opt = minimize_scalar(lambda x: -engine.abs_alpha(x), bounds=(lo, hi),
                                  method="bounded", options={"xatol": 1e-4})
            if -opt.fun > val:
                wl, val = float(opt.x), float(-opt.fun)
        j, lam_j = (engine.spectral(wl).dominant_mode() if engine is not None else (-1, np.nan))
        peaks.append(Peak(wl, val, float(prom), j, lam_j))
    return peaks


def sweep_geometry(name, boundary, wavelengths_nm, drude=None, threads=1) -> GeometrySweep:
    """Evaluate ``alpha_inf`` at every wavelength; output order follows the grid."""
    engine = SweepEngine(boundary, drude)
    wls = [float(w) for w in wavelengths_nm]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            out = list(pool.map(lambda w: _evaluate(engine, w), wls))
    else:
        out = [_evaluate(engine, w) for w in wls]
    results = [r for r, _ in out]
    failures = [e for _, e in out if e]
    for e in failures:
        log.error("sweep %s: %s", name, e)
    gs = GeometrySweep(name, boundary, np.asarray(wls), results, failures, engine=engine)
    gs.peaks = find_sweep_peaks(engine, gs.wavelengths_nm, gs.abs_alpha)
    return gs


def sweep_rows(gs: GeometrySweep):
    rows = []
    for wl, r in zip(gs.wavelengths_nm, gs.results):
        if r is None:
            rows.append([fmt(wl)] + ["nan"] * 5 + ["-1", "nan"])
            continue
        a = r.alpha_inf
        z = r.impedance_z
        j, lam_j = r.dominant_mode()
        rows.append([fmt(wl), fmt(a.real), fmt(a.imag), fmt(abs(a)), fmt(z.real), fmt(z.imag),
                     str(j), fmt(lam_j)])
    return rows


def write_csv(path, header, rows, comments_top=(), comments_bottom=()):
    """Write a CSV with ``\\n`` line endings and optional ``#`` comment lines."""
    buf = io.StringIO()
    for c in comments_top:
        buf.write(f"# {c}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    for c in comments_bottom:
        buf.write(f"# {c}\n")
    Path(path).write_text(buf.getvalue(), encoding="utf-8", newline="")


def peak_comments(peaks):
    out = [f"peaks: {len(peaks)}"]
    for p in peaks:
        out.append(f"peak wavelength_nm={fmt(p.wavelength_nm)} abs_alpha={fmt(p.abs_alpha)} "
                   f"prominence={fmt(p.prominence)} dominant_mode_index={p.dominant_mode_index} "
                   f"dominant_mode_lambda={fmt(p.dominant_mode_lambda)}")
    return out


def write_sweep_outputs(gs: GeometrySweep, out_dir, stem, timestamp=None, svg=True):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    top = [f"generated {timestamp}"] if timestamp else []
    csv_path = out_dir / f"{stem}.csv"
    write_csv(csv_path, SWEEP_HEADER, sweep_rows(gs), top, peak_comments(gs.peaks))
    paths = [csv_path]
    if svg:
        p = out_dir / f"{stem}.svg"
        p.write_text(line_plot_svg(gs.wavelengths_nm, [gs.abs_alpha], [gs.name],
                                   title=f"|alpha_inf| ({gs.name})", xlabel="wavelength (nm)",
                                   ylabel="|alpha_inf|",
                                   markers=[(pk.wavelength_nm, pk.abs_alpha) for pk in gs.peaks]),
                     encoding="utf-8")
        g = out_dir / f"{stem}_geometry.svg"
        g.write_text(boundary_svg([gs.boundary], [gs.name]), encoding="utf-8")
        paths += [p, g]
    return paths


def dump_operators(engine: SweepEngine, out_dir, stem):
    """Write ``S``, ``K*``, weights and the eigenvalues as plain CSV matrices."""
    out_dir = Path(out_dir)
    paths = []
    for tag, mat in (("S", engine.ops.S), ("K", engine.ops.K)):
        p = out_dir / f"{stem}_{tag}.csv"
        write_csv(p, [f"col{j}" for j in range(mat.shape[1])], [[fmt(v) for v in row] for row in mat])
        paths.append(p)
    p = out_dir / f"{stem}_nodes.csv"
    b = engine.boundary
    write_csv(p, ["x1", "x2", "nu1", "nu2", "weight"],
              [[fmt(v) for v in row] for row in np.column_stack([b.points, b.normal, b.weights])])
    paths.append(p)
    p = out_dir / f"{stem}_eigenvalues.csv"
    write_csv(p, ["index", "lambda", "c_nu", "c_y"],
              [[str(i), fmt(l), fmt(cn), fmt(cy)] for i, (l, cn, cy) in
               enumerate(zip(engine.spec.eigenvalues, engine.modal.c_nu, engine.modal.c_y))])
    paths.append(p)
    return paths

