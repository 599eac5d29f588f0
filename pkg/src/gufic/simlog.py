"""Fixed-schema simulation log and its CSV form."""
from __future__ import annotations

import warnings

import numpy as np

from .errors import LogFormatError

LOG_VERSION = "gufic-log v1"


def _vec(name, n=6):
    return [f"{name}{i}" for i in range(n)]


def _pose(name):
    return [f"{name}_R{i}{j}" for i in range(3) for j in range(3)] + [f"{name}_p{a}" for a in "xyz"]


COLUMNS = tuple(
    ["t"] + _vec("q") + _vec("qd") + _pose("g") + _pose("gbar") + _pose("gdp")
    + _vec("Vb") + _vec("Vds") + _vec("Vdsp")
    + _vec("Fe") + _vec("Febar") + _vec("Fd") + _vec("Ff") + _vec("Ffp") + _vec("Fip")
    + _vec("tau")
    + ["gamma_f", "beta_f", "alpha_f", "gamma_i", "beta_i", "alpha_i", "s_i"]
    + ["T_f", "T_i", "psi", "kinetic", "potential", "storage", "port_power", "port_energy"]
    + ["cap_f", "cap_d", "cap_i"]
)
INDEX = {c: i for i, c in enumerate(COLUMNS)}


class SimLog:
    """Row-per-control-step table with named columns."""

    def __init__(self, data=None, columns=COLUMNS, meta=None):
        self.columns = tuple(columns)
        self._index = {c: i for i, c in enumerate(self.columns)}
        self.data = np.zeros((0, len(self.columns))) if data is None else np.asarray(data, dtype=float)
        self.meta = dict(meta or {})

    def __len__(self):
        return self.data.shape[0]

    def column(self, name):
        return self.data[:, self._index[name]]

    def block(self, prefix, n=6):
        return self.data[:, [self._index[f"{prefix}{i}"] for i in range(n)]]

    def pose_block(self, name):
        return self.data[:, [self._index[c] for c in _pose(name)]]

    def write_csv(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"# {LOG_VERSION}\n")
            fh.write(",".join(self.columns) + "\n")
            if len(self):
                np.savetxt(fh, self.data, fmt="%.17g", delimiter=",")

    @classmethod
    def read_csv(cls, path):
        try:
            with open(path, encoding="utf-8") as fh:
                first = fh.readline().strip()
                header = fh.readline().strip()
                if first != f"# {LOG_VERSION}":
                    raise LogFormatError(f"{path}: unsupported log version line {first!r}")
                columns = header.split(",")
                with warnings.catch_warnings():
                    # a header-only log is valid and simply has no rows
                    warnings.filterwarnings("ignore", message="loadtxt: input contained no data")
                    data = np.loadtxt(fh, delimiter=",", ndmin=2)
        except OSError as exc:
            raise LogFormatError(f"{path}: {exc.strerror}") from None
        except ValueError as exc:
            raise LogFormatError(f"{path}: malformed data ({exc})") from None
        if data.size == 0:
            data = np.zeros((0, len(columns)))
        if data.shape[1] != len(columns):
            raise LogFormatError(f"{path}: {data.shape[1]} values per row but {len(columns)} columns")
        return cls(data, columns)
