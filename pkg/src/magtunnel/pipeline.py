"""Stage orchestration: band -> geometry -> eikonal -> wkb -> predict -> validate.

Each stage writes its artifacts under out_dir; the band table and geometry
profile go through the content-addressed cache.  All numeric output uses
repr() of Python floats, so identical configs reproduce byte-identical files.
"""

from __future__ import annotations

import json
import os

import numpy as np

from . import __version__
from .band import BandTable, Grid1D, build_band_table, default_grid
from .cache import Cache, content_key
from .config import hbar_grid
from .eikonal import agmon_distances, solve_eikonal
from .geometry import GeometryProfile, build_geometry
from .tunneling import gap_scan, interaction_term, leading_asymptotics, scan_csv
from .validator import (
    StripDiscretization,
    campaign_csv,
    compare_report,
    discretize_strip,
    lowest_eigs_hermitian,
)
from .wkb import compute_wkb_constants


def _write(path, text):
    with open(path, "w") as fh:
        fh.write(text)


def _json_dump(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)
        fh.write("\n")


class Pipeline:
    def __init__(self, cfg):
        self.cfg = cfg
        os.makedirs(cfg.out_dir, exist_ok=True)
        self.cache = Cache(cfg.cache_dir)
        self._table = None
        self._profile = None
        self._right = None
        self._left = None
        self._constants = None
        self._distances = None

    # -- band ---------------------------------------------------------------
    def band_key(self):
        b = self.cfg.band
        return content_key({
            "kind": "band", "version": __version__, "k": self.cfg.k,
            "xi": [b["xi_min"], b["xi_max"]],
            "grid": [b["grid_half_width"], b["grid_points"]],
            "taylor_order": b["taylor_order"],
        })

    def band_table(self):
        if self._table is not None:
            return self._table
        key = self.band_key()
        cached = self.cache.load("band", key, BandTable.from_dict)
        if cached is None:
            b = self.cfg.band
            if b["grid_half_width"] is None:
                grid = default_grid(self.cfg.k)
                if b["grid_points"] != 3201:
                    grid = Grid1D(grid.half_width, b["grid_points"])
            else:
                grid = Grid1D(b["grid_half_width"], b["grid_points"])
            cached = build_band_table(
                self.cfg.k, (b["xi_min"], b["xi_max"]), grid,
                taylor_order=b["taylor_order"],
            )
            self.cache.store("band", key, cached.to_dict())
        self._table = cached
        return cached

    def run_band(self):
        table = self.band_table()
        _json_dump(os.path.join(self.cfg.out_dir, "band_summary.json"), {
            "k": table.k, "xi0": table.xi0, "nu0": table.nu0,
            "nu0_dd": table.nu0_dd, "taylor_radius": table.taylor_radius,
        })
        return table

    # -- geometry -------------------------------------------------------------
    def geometry_key(self):
        c, f = self.cfg.curve, self.cfg.field
        return content_key({
            "kind": "geometry", "version": __version__, "k": self.cfg.k,
            "curve": [c.kind, c.x_expr, c.y_expr],
            "field": f.expression,
            "n_samples": self.cfg.geometry["n_samples"],
        })

    def profile(self):
        if self._profile is not None:
            return self._profile
        key = self.geometry_key()

        def loader(data):
            prof = GeometryProfile.from_dict(
                data, curve=self.cfg.curve, field_spec=self.cfg.field)
            from .geometry import ArcLengthMap

            prof.arcmap = ArcLengthMap(self.cfg.curve)
            return prof

        cached = self.cache.load("geometry", key, loader)
        if cached is None:
            cached = build_geometry(self.cfg.curve, self.cfg.field,
                                    n_samples=self.cfg.geometry["n_samples"])
            self.cache.store("geometry", key, cached.to_dict())
        self._profile = cached
        return cached

    def run_geometry(self):
        prof = self.profile()
        _write(os.path.join(self.cfg.out_dir, "geometry_profile.csv"), prof.to_csv())
        _json_dump(os.path.join(self.cfg.out_dir, "geometry_summary.json"), {
            "L": prof.L, "beta0": prof.beta0, "s_r": prof.s_r, "s_l": prof.s_l,
            "gamma0": prof.gamma0, "gamma_dd": prof.gamma_dd,
            "variability": prof.variability,
        })
        return prof

    # -- eikonal ----------------------------------------------------------------
    def eikonal(self):
        if self._right is None:
            th = self.cfg.eikonal["target_h"]
            self._right = solve_eikonal(self.profile(), self.band_table(), "right", th)
            self._left = solve_eikonal(self.profile(), self.band_table(), "left", th)
            self._distances, self._eik_diag = agmon_distances(self._right, self._left)
        return self._right, self._left, self._distances

    def run_eikonal(self):
        right, left, dist = self.eikonal()
        _write(os.path.join(self.cfg.out_dir, "eikonal_right.csv"), right.to_csv())
        _write(os.path.join(self.cfg.out_dir, "eikonal_left.csv"), left.to_csv())
        _json_dump(os.path.join(self.cfg.out_dir, "agmon_summary.json"), {
            "S_u": dist.S_u, "S_d": dist.S_d, "S": dist.S,
            "residual_max": right.residual_max,
            **self._eik_diag,
        })
        return dist

    # -- wkb --------------------------------------------------------------------
    def wkb(self):
        if self._constants is None:
            right, _, _ = self.eikonal()
            self._constants = compute_wkb_constants(self.profile(), self.band_table(), right)
        return self._constants

    def run_wkb(self):
        con = self.wkb()
        _json_dump(os.path.join(self.cfg.out_dir, "wkb_summary.json"), con.to_dict())
        _write(os.path.join(self.cfg.out_dir, "wkb_profiles.csv"), con.profiles_csv())
        return con

    # -- predict ------------------------------------------------------------------
    def run_predict(self):
        right, _, dist = self.eikonal()
        con = self.wkb()
        hbars = hbar_grid(self.cfg)
        preds, nodes = gap_scan(hbars, self.profile(), con, dist, right)
        _write(os.path.join(self.cfg.out_dir, "prediction_scan.csv"),
               scan_csv(preds, nodes))
        lead = leading_asymptotics(min(hbars), 1, self.profile(), self.band_table(), con)
        _json_dump(os.path.join(self.cfg.out_dir, "prediction_summary.json"), {
            "constants": con.to_dict(),
            "S_u": dist.S_u, "S_d": dist.S_d,
            "predicted_nodes_hbar": nodes,
            "leading_lambda1_at_min_hbar": lead.lambda1_leading,
        })
        return preds, nodes

    # -- validate -------------------------------------------------------------------
    def run_validate(self):
        right, _, dist = self.eikonal()
        con = self.wkb()
        prof = self.profile()
        st = self.cfg.strip
        va = self.cfg.validate
        preds, spectra = [], []
        for h in va["h_values"]:
            disc = StripDiscretization(
                n_sigma=st["n_sigma"], n_tau=st["n_tau"], T=st["T"],
                h=float(h), keep_delta=st["keep_delta"], weight_on=st["weight_on"],
            )
            op = discretize_strip(prof, disc)
            shift = con.delta10 * (1.0 - va["shift_margin"])
            spec, _ = lowest_eigs_hermitian(op, m=va["n_eigs"], shift=shift)
            spectra.append(spec)
            preds.append(interaction_term(float(h) ** (self.cfg.k + 2), prof, con,
                                          dist, right))
        report = compare_report(preds, spectra, dist)
        _write(os.path.join(self.cfg.out_dir, "validation_campaign.csv"),
               campaign_csv(report))
        _json_dump(os.path.join(self.cfg.out_dir, "validation_summary.json"), {
            "slope_corrected": report["slope_corrected"],
            "slope_raw": report["slope_raw"],
            "S_expected": report["S_expected"],
            "slope_rel_error": report["slope_rel_error"],
            "ratio_spread": report["ratio_spread"],
            "h": list(report["h"]),
            "ratio": list(report["ratio"]),
        })
        return report

    def run(self, stages=None):
        stages = stages or self.cfg.stages
        runners = {
            "band": self.run_band,
            "geometry": self.run_geometry,
            "eikonal": self.run_eikonal,
            "wkb": self.run_wkb,
            "predict": self.run_predict,
            "validate": self.run_validate,
        }
        results = {}
        for st in stages:
            results[st] = runners[st]()
        return results
