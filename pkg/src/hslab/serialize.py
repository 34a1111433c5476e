"""JSON and CSV interchange for patches, reports and samples.

All documents carry ``schema_version``; floats are rendered with 17
significant digits so values round-trip exactly. Parse failures raise
``InputError`` with a pointer to the offending key.
"""

import csv
import io
import json

import numpy as np

from .curve_lab import CurveImmersion
from .diagnostics import VarifoldSample
from .errors import InputError
from .graph_calculus import GradientGraphPatch
from .immersion_calculus import ImmersedPatch

SCHEMA_VERSION = 1


def _fmt(x):
    return format(float(x), ".17g")


def _encode(obj, out):
    if obj is None:
        out.write("null")
    elif obj is True:
        out.write("true")
    elif obj is False:
        out.write("false")
    elif isinstance(obj, (int, np.integer)):
        out.write(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.write(_fmt(obj))
    elif isinstance(obj, str):
        out.write(json.dumps(obj))
    elif isinstance(obj, np.ndarray):
        _encode(obj.tolist(), out)
    elif isinstance(obj, (list, tuple)):
        out.write("[")
        for i, v in enumerate(obj):
            if i:
                out.write(", ")
            _encode(v, out)
        out.write("]")
    elif isinstance(obj, dict):
        out.write("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                out.write(", ")
            out.write(json.dumps(str(k)))
            out.write(": ")
            _encode(v, out)
        out.write("}")
    else:
        raise InputError(f"cannot serialize object of type {type(obj).__name__}")


def dumps(obj):
    """Deterministic JSON text with 17-significant-digit floats."""
    buf = io.StringIO()
    _encode(obj, buf)
    return buf.getvalue()


def dump(obj, path):
    with open(path, "w") as fh:
        _encode(obj, fh)
        fh.write("\n")


def _need(doc, key, where):
    if key not in doc:
        raise InputError(f"{where}: missing key {key!r}")
    return doc[key]


def load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc
    except OSError as exc:
        raise InputError(f"{path}: {exc}") from exc


# ------------------------------ graph patches ------------------------------


def patch_to_doc(patch):
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "gradient_graph_patch",
        "dim": patch.dim,
        "origin": patch.origin,
        "spacing": patch.spacing,
        "shape": list(patch.shape),
        "u": patch.u.ravel(),
    }


def patch_from_doc(doc, where="patch"):
    dim = int(_need(doc, "dim", where))
    shape = [int(s) for s in _need(doc, "shape", where)]
    if len(shape) != dim:
        raise InputError(f"{where}: shape length != dim")
    u = np.asarray(_need(doc, "u", where), dtype=np.float64)
    if u.size != int(np.prod(shape)):
        raise InputError(f"{where}: u has {u.size} samples, expected {np.prod(shape)}")
    return GradientGraphPatch(
        origin=np.asarray(_need(doc, "origin", where), dtype=np.float64),
        spacing=np.asarray(_need(doc, "spacing", where), dtype=np.float64),
        u=u.reshape(shape),
    )


def geometry_report_to_doc(report):
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "geometry_report",
        "dim": report.dim,
        "origin": report.origin,
        "spacing": report.spacing,
        "shape": list(report.shape),
        "fields": {
            "interior_mask": report.interior_mask.astype(int).ravel(),
            "phase": report.phase.ravel(),
            "phase_residual": report.phase_residual.ravel(),
            "sff_norm": report.sff_norm.ravel(),
            "mean_curv_norm": report.mean_curv_norm.ravel(),
            "volume_element": report.volume_element.ravel(),
            "eigenvalues": report.eigenvalues.reshape(-1, report.dim),
            "metric": report.metric.reshape(-1, report.dim * report.dim),
        },
        "summary": {
            "volume": report.volume,
            "total_extrinsic": report.total_extrinsic,
            "max_phase_residual": report.max_interior(report.phase_residual),
            "max_sff_norm": report.max_interior(report.sff_norm),
            "max_mean_curv_norm": report.max_interior(report.mean_curv_norm),
        },
    }


def report_csv(report, path):
    """Interior per-sample fields: x1..xn, theta, res, |A|, |H|, sqrtdetg."""
    coords = report.coordinates()
    n = report.dim
    header = [f"x{i + 1}" for i in range(n)] + [
        "theta",
        "res",
        "sff_norm",
        "mean_curv_norm",
        "sqrtdetg",
    ]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        mask = report.interior_mask
        cc = coords[mask]
        rows = zip(
            cc,
            report.phase[mask],
            report.phase_residual[mask],
            report.sff_norm[mask],
            report.mean_curv_norm[mask],
            report.volume_element[mask],
        )
        for xyz, th, rs, sf, mc, vg in rows:
            writer.writerow([_fmt(v) for v in xyz] + [_fmt(th), _fmt(rs), _fmt(sf), _fmt(mc), _fmt(vg)])


# ---------------------------- immersed patches -----------------------------


def immersion_to_doc(patch):
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "immersed_patch",
        "dim": patch.dim,
        "param_origin": patch.param_origin,
        "param_spacing": patch.param_spacing,
        "shape": list(patch.grid_shape),
        "periodic": patch.periodic.astype(int),
        "multiplicity": int(patch.multiplicity),
        "points": patch.points.reshape(-1, 2 * patch.dim),
    }


def immersion_from_doc(doc, where="immersion"):
    dim = int(_need(doc, "dim", where))
    shape = [int(s) for s in _need(doc, "shape", where)]
    pts = np.asarray(_need(doc, "points", where), dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 * dim or pts.shape[0] != int(np.prod(shape)):
        raise InputError(f"{where}: points must be (prod(shape), 2 dim)")
    return ImmersedPatch(
        param_origin=np.asarray(_need(doc, "param_origin", where), dtype=np.float64),
        param_spacing=np.asarray(_need(doc, "param_spacing", where), dtype=np.float64),
        periodic=np.asarray(_need(doc, "periodic", where), dtype=bool),
        points=pts.reshape(tuple(shape) + (2 * dim,)),
        multiplicity=int(doc.get("multiplicity", 1)),
    )


def immersion_report_to_doc(report):
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "immersion_report",
        "dim": report.dim,
        "param_origin": report.param_origin,
        "param_spacing": report.param_spacing,
        "shape": list(report.interior_mask.shape),
        "periodic": report.periodic.astype(int),
        "fields": {
            "interior_mask": report.interior_mask.astype(int).ravel(),
            "lagrangian_defect": report.lagrangian_defect.ravel(),
            "phase": report.phase.ravel(),
            "phase_residual": report.phase_residual.ravel(),
            "sff_norm": report.sff_norm.ravel(),
            "mean_curv_norm": report.mean_curv_norm.ravel(),
        },
        "summary": {
            "volume": report.volume,
            "total_extrinsic": report.total_extrinsic,
            "max_defect": report.max_defect,
            "max_phase_residual": report.max_interior(report.phase_residual),
        },
    }


# ------------------------------- curves ------------------------------------


def curve_to_doc(curve):
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "curve",
        "multiplicity": int(curve.multiplicity),
        "vertices": curve.vertices,
    }


def curve_from_doc(doc, where="curve"):
    verts = np.asarray(_need(doc, "vertices", where), dtype=np.float64)
    return CurveImmersion(verts, multiplicity=int(doc.get("multiplicity", 1)))


def curve_from_csv(path):
    """Two-column CSV (x, y), optional header row."""
    rows = []
    try:
        with open(path, newline="") as fh:
            for rec in csv.reader(fh):
                if not rec:
                    continue
                try:
                    rows.append((float(rec[0]), float(rec[1])))
                except ValueError:
                    if rows:
                        raise InputError(f"{path}: non-numeric row {rec!r}")
    except OSError as exc:
        raise InputError(f"{path}: {exc}") from exc
    if len(rows) < 8:
        raise InputError(f"{path}: need at least 8 vertices")
    V = np.asarray(rows)
    if np.allclose(V[0], V[-1]):
        V = V[:-1]
    return CurveImmersion(V)


# ------------------------------- varifolds ---------------------------------


def varifold_to_doc(sample):
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "varifold_sample",
        "dim": sample.dim,
        "ambient_dim": sample.ambient_dim,
        "points": sample.points,
        "weights": sample.weights,
        "tangents": sample.tangents.reshape(sample.points.shape[0], -1),
        "mean_curv": sample.mean_curv,
    }


def varifold_from_doc(doc, where="varifold"):
    pts = np.asarray(_need(doc, "points", where), dtype=np.float64)
    dim = int(_need(doc, "dim", where))
    m = pts.shape[0]
    tang = np.asarray(_need(doc, "tangents", where), dtype=np.float64)
    return VarifoldSample(
        points=pts,
        weights=np.asarray(_need(doc, "weights", where), dtype=np.float64),
        tangents=tang.reshape(m, dim, pts.shape[1]),
        mean_curv=np.asarray(_need(doc, "mean_curv", where), dtype=np.float64),
    )


def load_patch(path):
    doc = load_json(path)
    if doc.get("kind") != "gradient_graph_patch":
        raise InputError(f"{path}: expected kind 'gradient_graph_patch'")
    return patch_from_doc(doc, path)


def load_immersion(path):
    doc = load_json(path)
    if doc.get("kind") != "immersed_patch":
        raise InputError(f"{path}: expected kind 'immersed_patch'")
    return immersion_from_doc(doc, path)


def load_curve(path):
    if str(path).endswith(".csv"):
        return curve_from_csv(path)
    doc = load_json(path)
    if doc.get("kind") != "curve":
        raise InputError(f"{path}: expected kind 'curve'")
    return curve_from_doc(doc, path)


def load_varifold(path):
    doc = load_json(path)
    if doc.get("kind") != "varifold_sample":
        raise InputError(f"{path}: expected kind 'varifold_sample'")
    return varifold_from_doc(doc, path)
