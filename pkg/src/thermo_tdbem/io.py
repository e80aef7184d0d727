"""File formats: complex literals, matrix/density JSON, field and signal CSV."""
import csv
import io
import json
import re

import numpy as np

from . import geometry
from .errors import DomainError, ValidationError
from .material import validate_material
from .operators import Density, OperatorMatrix

_NUM = r"(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?"
_COMPLEX = re.compile(rf"^[+-]?{_NUM}(([+-]{_NUM})?[ij])?$")


def parse_complex(text):
    """Parse an ``a+bi`` literal (also ``a``, ``bi``, ``a-bi``)."""
    t = text.strip().replace(" ", "")
    if not t or not _COMPLEX.match(t):
        raise ValidationError(f"not a complex literal: {text!r}")
    if t[-1] in "ij":
        return complex(t[:-1] + "j")
    return complex(float(t), 0.0)


def format_complex(z):
    z = complex(z)
    return f"{z.real:.17g}{'+' if z.imag >= 0 else '-'}{abs(z.imag):.17g}i"


def pair(z):
    return [float(np.real(z)), float(np.imag(z))]


def unpair(p):
    a = np.asarray(p, dtype=float)
    return a[..., 0] + 1j * a[..., 1]


def fmt(x):
    return format(float(x), ".17g")


def parse_point(text, dim=None):
    try:
        p = np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise ValidationError(f"not a point: {text!r}") from None
    if dim is not None and len(p) != dim:
        raise ValidationError(f"point {text!r} must have {dim} coordinates")
    return p


def parse_points(text, dim=None):
    return np.array([parse_point(p, dim) for p in text.split(";") if p.strip()])


def load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ValidationError(f"file not found: {path}") from None
    except json.JSONDecodeError as e:
        raise ValidationError(f"{path}: invalid JSON ({e})") from None


def write_text(path, text):
    with open(path, "w") as fh:
        fh.write(text)


def load_material(path):
    raw = load_json(path)
    return validate_material(raw.get("material", raw))


def load_mesh(path):
    try:
        return geometry.mesh_from_dict(load_json(path))
    except KeyError as e:
        raise ValidationError(f"{path}: missing mesh field {e}") from None


def matrix_to_dict(A: OperatorMatrix):
    n, k = A.entries.shape
    return {"kind": A.kind, "s": pair(A.s), "mesh_id": A.mesh_id, "m": n, "n": k,
            "domain": A.domain, "range": A.range,
            "entries": [pair(z) for z in A.entries.reshape(-1)]}


def matrix_from_dict(d, dim):
    E = unpair(d["entries"]).reshape(d["m"], d["n"])
    return OperatorMatrix(d["kind"], complex(*d["s"]), d["mesh_id"], E, dim)


def density_to_dict(rho: Density, mesh_id=None, s=None):
    d = {"space": rho.space, "values": [pair(z) for z in rho.values]}
    if mesh_id is not None:
        d["mesh_id"] = mesh_id
    if s is not None:
        d["s"] = pair(s)
    if rho.cond is not None:
        d["cond"] = rho.cond
    return d


def density_from_dict(d):
    if "space" not in d or "values" not in d:
        raise DomainError("density JSON needs 'space' and 'values'")
    return Density(unpair(d["values"]), d["space"])


def dumps(obj):
    return json.dumps(obj, indent=1)


def field_csv(points, values):
    """Columns x, y(, z), then re/im of each component."""
    points = np.atleast_2d(points)
    d, nc = points.shape[1], values.shape[1]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    head = ["x", "y", "z"][:d]
    for c in range(nc):
        head += [f"re_{c}", f"im_{c}"]
    w.writerow(head)
    for p, v in zip(points, values):
        w.writerow([fmt(x) for x in p] + [fmt(f) for z in v for f in (z.real, z.imag)])
    return buf.getvalue()


def signal_csv(times, samples, labels=None):
    """Column t, then re/im interleaved per column of the flattened samples."""
    S = np.asarray(samples).reshape(len(times), -1)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    labels = labels or [str(k) for k in range(S.shape[1])]
    w.writerow(["t"] + [f"{p}_{lab}" for lab in labels for p in ("re", "im")])
    for t, row in zip(times, S):
        w.writerow([fmt(t)] + [fmt(f) for z in row for f in (np.real(z), np.imag(z))])
    return buf.getvalue()


def read_signal_csv(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    data = np.array(rows[1:], dtype=float)
    t = data[:, 0]
    vals = data[:, 1::2] + 1j * data[:, 2::2]
    return t, vals
