"""Result tables: named columns with units, plus provenance metadata.

CSV files start with ``#`` comment lines carrying the config hash and code
version, then a header row of ``name[unit]`` labels. Wall time and other
run-dependent metadata go to the JSON sidecar only, so reruns of a
deterministic experiment produce byte-identical CSV.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .. import __version__

ERROR_SUFFIX = "_err"


class StaleGolden(ValueError):
    """A stored table was produced by a different configuration."""


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


@dataclass
class ResultTable:
    columns: dict
    units: dict = field(default_factory=dict)
    stochastic: tuple = ()
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        lengths = {len(v) for v in self.columns.values()}
        if len(lengths) > 1:
            raise ValueError(f"columns have unequal lengths {sorted(lengths)}")
        for name in self.stochastic:
            if name + ERROR_SUFFIX not in self.columns:
                raise ValueError(f"stochastic column {name!r} lacks {name + ERROR_SUFFIX!r}")
        self.metadata.setdefault("code_version", __version__)

    def __len__(self):
        return len(next(iter(self.columns.values()), []))

    def __getitem__(self, name):
        return np.asarray(self.columns[name])

    def header(self):
        return [f"{n}[{self.units[n]}]" if self.units.get(n) else n for n in self.columns]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write(f"# config_hash: {self.metadata.get('config_hash', '')}\n")
            fh.write(f"# code_version: {self.metadata['code_version']}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.header())
            for row in zip(*self.columns.values()):
                w.writerow([_fmt(v) for v in row])

    def to_json(self, path, extra=None):
        doc = {"metadata": self.metadata, "units": self.units, "stochastic": list(self.stochastic)}
        if extra:
            doc.update(extra)
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True, default=_fmt)
            fh.write("\n")


def read_table(path, config_hash=None):
    """Read a table written by :meth:`ResultTable.to_csv`.

    With ``config_hash`` the stored hash must match, else :class:`StaleGolden`.
    Values are parsed as floats where possible.
    """
    meta = {}
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    body = []
    for line in lines:
        if line.startswith("#"):
            key, _, value = line[1:].partition(":")
            meta[key.strip()] = value.strip()
        else:
            body.append(line)
    if config_hash is not None and meta.get("config_hash") != config_hash:
        raise StaleGolden(f"{path} has config hash {meta.get('config_hash')!r}, expected {config_hash!r}")
    rows = list(csv.reader(body))
    names, units = [], {}
    for label in rows[0]:
        name, _, unit = label.partition("[")
        names.append(name)
        if unit:
            units[name] = unit.rstrip("]")
    cols = {n: [] for n in names}
    for row in rows[1:]:
        for n, v in zip(names, row):
            try:
                cols[n].append(float(v))
            except ValueError:
                cols[n].append(v)
    stochastic = tuple(n for n in names if n + ERROR_SUFFIX in cols)
    return ResultTable(cols, units, stochastic, meta)
