"""Dispatch of validated experiment configs to the owning modules."""
from __future__ import annotations

import os
import time

import numpy as np

from .. import fieldio, graphs, kinetic, quantum, spectral
from .calibration import LADDER_C, ladder_eta, ladder_panel
from .config import ExperimentConfig
from .results import ResultTable


def _spectral(p, cfg):
    energies = np.asarray(p["energies"], dtype=float)
    curve = spectral.phi_curve(energies, p["width"], p["n_samples"], p["seed"])
    im_theta = np.imag(spectral.theta(energies, p["epsilon"]))
    cols = {"energy": energies, "phi": curve.value, "phi_err": curve.stderr,
            "im_theta": im_theta, "neg_pi_phi": -np.pi * curve.value}
    return ResultTable(cols, {"energy": "band units"}, ("phi",)), {}


def _evolve(p, cfg):
    lattice = quantum.TorusLattice(p["L"])
    psi = quantum.gaussian_packet(lattice, p["p0"], p["packet_width"])
    V = quantum.sample_disorder(lattice, p["distribution"], p["seed"])
    times = np.linspace(0, p["t"], p["n_frames"] + 1)
    norms, moments = [], []
    for i, t in enumerate(times):
        if i:
            psi = quantum.evolve(psi, V, p["lam"], t - times[i - 1], p["dt"])
        norms.append(float(np.linalg.norm(psi.amplitudes)))
        moments.append(quantum.position_second_moment(psi))
    cols = {"t": times, "norm": np.array(norms), "second_moment": np.array(moments)}
    return ResultTable(cols, {"t": "hbar/hopping", "second_moment": "sites^2"}), {"final_state": psi}


def _kinetic_compare(p, cfg):
    lattice = quantum.TorusLattice(p["L"])
    psi0 = quantum.gaussian_packet(lattice, p["p0"], p["packet_width"])
    q_seed, b_seed = np.random.SeedSequence(p["seed"]).spawn(2)
    q = kinetic.quantum_kinetic_run(psi0, p["lam"], p["T"], p["n_samples"], q_seed,
                                    dt=p["dt"], threads=cfg.effective_threads())
    b = kinetic.boltzmann_kinetic_run(psi0, p["T"], p["n_paths"], b_seed, scale=q.scale,
                                      rate_scale=1.0 if p["lam"] > 0 else 0.0)
    report = kinetic.kinetic_comparison(q, b, bins=p["bins"])
    names = sorted(report)
    cols = {"observable": names, "discrepancy": [report[n] for n in names]}
    return ResultTable(cols), {"quantum_momentum_weights": q.momentum_weights}


def _boltzmann(p, cfg):
    T_list = np.linspace(p["T"] / p["n_times"], p["T"], p["n_times"])
    rep = kinetic.msd_diffusive_check(p["energy"], T_list, p["n_paths"], p["seed"], p["width"])
    cols = {
        "T": [r.T for r in rep.rows],
        "msd": [r.msd for r in rep.rows],
        "msd_err": [r.stderr for r in rep.rows],
        "predicted": [r.prediction for r in rep.rows],
    }
    table = ResultTable(cols, {"T": "kinetic time", "msd": "macro length^2"}, ("msd",))
    table.metadata.update(slope=rep.slope, slope_err=rep.slope_stderr, predicted_slope=rep.predicted_slope,
                          D=rep.diffusion.scalar, D_err=rep.diffusion.scalar_stderr,
                          ks_pvalue=rep.ks_pvalue)
    return table, {}


def _graphs(p, cfg):
    k, lam = p["k"], p["lam"]
    t = p["t"] if p["t"] is not None else lam**-2
    eta = p["eta"] if p["eta"] is not None else 1.0 / t
    rows = {"sigma": [], "degree": [], "value_re": [], "value_im": [], "value_re_err": [],
            "value_im_err": [], "e_eta": [], "e_eta_err": []}
    for g in graphs.permutations(k):
        a = graphs.amplitude(k, g, lam, t, eta, {"n_samples": p["n_samples"]}, seed=p["seed"],
                             epsilon=p["epsilon"])
        rows["sigma"].append("".join(map(str, g.sigma)))
        rows["degree"].append(graphs.degree(g))
        rows["value_re"].append(a.value.real)
        rows["value_im"].append(a.value.imag)
        rows["value_re_err"].append(a.error)
        rows["value_im_err"].append(a.error)
        if k <= graphs.amplitudes.MAX_BOUND_K:
            e = graphs.e_eta_bound(k, g, lam, eta, {"n_samples": p["bound_samples"]}, seed=p["seed"],
                                   epsilon=p["epsilon"])
            rows["e_eta"].append(e.value)
            rows["e_eta_err"].append(e.stderr)
        else:
            rows["e_eta"].append(float("nan"))
            rows["e_eta_err"].append(float("nan"))
    return ResultTable(rows, {}, ("value_re", "value_im", "e_eta")), {}


def _ladder_check(p, cfg):
    panel = ladder_panel(p["seed"], p["panel_size"])
    cols = {"lam": [], "eta": [], "sup_value": [], "bound": []}
    for lam in p["lambdas"]:
        eta = ladder_eta(lam)
        vals = [spectral.ladder_integral(a, b, w, lam, eta, sign=s) for a, b, w, s in panel]
        cols["lam"].append(lam)
        cols["eta"].append(eta)
        cols["sup_value"].append(max(vals))
        cols["bound"].append(1 + LADDER_C * lam**0.25)
    return ResultTable(cols), {}


def _census(p, cfg):
    census = graphs.degree_census(p["k"])
    cols = {"k": [p["k"]] * len(census), "degree": list(census), "count": list(census.values())}
    return ResultTable(cols), {}


DISPATCH = {
    "spectral": _spectral,
    "evolve": _evolve,
    "kinetic-compare": _kinetic_compare,
    "boltzmann": _boltzmann,
    "graphs": _graphs,
    "ladder-check": _ladder_check,
    "census": _census,
}


def run(config: ExperimentConfig, write=True) -> ResultTable:
    """Validate ``config``, run it, and write ``<experiment>.csv`` and ``.json`` (plus fields).

    Raises
    ------
    ConfigInvalid
        On validation failure; downstream errors propagate unchanged.
    """
    config.validate()
    params = config.resolved()
    start = time.perf_counter()
    table, payloads = DISPATCH[config.experiment](params, config)
    wall = time.perf_counter() - start
    table.metadata["config_hash"] = config.config_hash()
    if write:
        os.makedirs(config.output_path, exist_ok=True)
        stem = os.path.join(config.output_path, config.experiment)
        table.to_csv(stem + ".csv")
        files = {}
        for name, obj in payloads.items():
            path = f"{stem}.{name}.qlzf"
            fieldio.write_field(path, obj)
            files[name] = os.path.basename(path)
        table.to_json(stem + ".json", {"config": config.to_dict(), "resolved": params,
                                       "wall_time_s": wall, "fields": files})
    table.metadata["wall_time_s"] = wall
    return table

