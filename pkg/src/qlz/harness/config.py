"""Experiment configuration and validation."""
from __future__ import annotations

import copy
import hashlib
import json
import math
import os
from dataclasses import dataclass, field

from ..errors import ConfigInvalid

EXPERIMENTS = ("spectral", "evolve", "kinetic-compare", "boltzmann", "graphs", "ladder-check", "census")
SCALINGS = ("kinetic", "diffusive")

COMMON = {"threads": 1, "scaling": None, "kappa": None}

# Parameter keys and defaults per experiment. ``None`` seeds are required inputs.
SCHEMA = {
    "spectral": {"energies": [1.0, 2.0, 3.0, 4.0, 5.0], "width": 0.06, "n_samples": 2_000_000,
                 "epsilon": 0.01, "seed": None},
    "evolve": {"L": 16, "lam": 0.1, "t": 1.0, "dt": 0.01, "n_frames": 5, "p0": [0.25, 0.25, 0.25],
               "packet_width": 2.0, "distribution": "gaussian", "seed": None},
    "kinetic-compare": {"L": 64, "lam": 0.3, "T": 1.0, "t": None, "n_samples": 200, "n_paths": 20_000,
                        "p0": [0.25, 0.25, 0.25], "packet_width": 1.0, "dt": 0.0625, "bins": 20,
                        "seed": None},
    "boltzmann": {"energy": 3.0, "T": 20.0, "n_times": 8, "n_paths": 10_000, "width": 0.06, "seed": None},
    "graphs": {"k": 2, "lam": 0.3, "t": None, "eta": None, "n_samples": 200_000, "epsilon": 0.01,
               "bound_samples": 20_000, "seed": None},
    "ladder-check": {"lambdas": [0.5, 0.35, 0.25], "panel_size": 20, "seed": None},
    "census": {"k": 6},
}

SEEDLESS = {"census"}


def _is_number(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


@dataclass
class ExperimentConfig:
    """``experiment`` tag, flat ``parameters`` map and an ``output_path`` directory."""

    experiment: str
    parameters: dict = field(default_factory=dict)
    output_path: str = "results"

    def resolved(self):
        """Parameters with defaults filled in for keys not supplied."""
        out = copy.deepcopy(COMMON)
        out.update(copy.deepcopy(SCHEMA.get(self.experiment, {})))
        out.update({k: v for k, v in self.parameters.items() if v is not None})
        return out

    def validate(self):
        """Raise :class:`ConfigInvalid` naming the first offending field."""
        if self.experiment not in EXPERIMENTS:
            raise ConfigInvalid(f"unknown experiment {self.experiment!r}; expected one of {EXPERIMENTS}",
                                "experiment")
        allowed = set(SCHEMA[self.experiment]) | set(COMMON)
        for key in self.parameters:
            if key not in allowed:
                raise ConfigInvalid(f"not a parameter of {self.experiment}", key)
        p = self.resolved()
        if self.experiment not in SEEDLESS and p.get("seed") is None:
            raise ConfigInvalid("an explicit seed is required", "seed")
        if "seed" in p and p["seed"] is not None and (not isinstance(p["seed"], int) or p["seed"] < 0):
            raise ConfigInvalid("seed must be a non-negative integer", "seed")
        threads = p["threads"]
        if not isinstance(threads, int) or threads < 1:
            raise ConfigInvalid("threads must be a positive integer", "threads")
        for key in ("L", "n_samples", "n_paths", "k", "n_frames", "n_times", "bins", "panel_size",
                    "bound_samples"):
            if key in p and p[key] is not None and (not isinstance(p[key], int) or p[key] < 1):
                raise ConfigInvalid("must be a positive integer", key)
        for key in ("lam", "T", "t", "dt", "width", "epsilon", "eta", "packet_width", "energy", "kappa"):
            v = p.get(key)
            if v is not None and (not _is_number(v) or v < 0):
                raise ConfigInvalid("must be a finite non-negative number", key)
        if p["scaling"] is not None and p["scaling"] not in SCALINGS:
            raise ConfigInvalid(f"must be one of {SCALINGS}", "scaling")
        self._check_scaling(p)
        return self

    def _check_scaling(self, p):
        t, T, lam = p.get("t"), p.get("T"), p.get("lam")
        if t is None or T is None:
            return
        scaling = p["scaling"] or ("kinetic" if self.experiment == "kinetic-compare" else None)
        if scaling is None:
            raise ConfigInvalid("both t and T given; declare scaling 'kinetic' or 'diffusive'", "scaling")
        if lam is None:
            raise ConfigInvalid("scaling check needs lam", "lam")
        if scaling == "kinetic":
            expected = lam**2 * t
        else:
            if p["kappa"] is None:
                raise ConfigInvalid("diffusive scaling needs kappa", "kappa")
            expected = lam ** (p["kappa"] + 2) * t
        if not math.isclose(T, expected, rel_tol=1e-9, abs_tol=1e-12):
            raise ConfigInvalid(f"T={T} inconsistent with {scaling} scaling (expected {expected:.6g})", "T")

    def effective_threads(self):
        cap = os.environ.get("QLZ_THREADS")
        n = self.resolved()["threads"]
        if cap:
            try:
                n = min(n, max(1, int(cap)))
            except ValueError:
                raise ConfigInvalid("QLZ_THREADS must be an integer", "QLZ_THREADS") from None
        return n

    def to_dict(self):
        return {"experiment": self.experiment, "parameters": self.parameters, "output_path": self.output_path}

    def config_hash(self):
        """SHA-256 of the canonical JSON of the experiment and its resolved parameters."""
        blob = json.dumps({"experiment": self.experiment, "parameters": self.resolved()},
                          sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict) or "experiment" not in data:
            raise ConfigInvalid("config must be an object with an 'experiment' key", "experiment")
        params = data.get("parameters", {})
        if not isinstance(params, dict):
            raise ConfigInvalid("parameters must be a key-value map", "parameters")
        return cls(data["experiment"], dict(params), data.get("output_path", "results"))

    @classmethod
    def from_json(cls, path):
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigInvalid(f"cannot read {path}: {exc}", "config") from None
        return cls.from_dict(data)
