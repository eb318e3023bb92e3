"""Edge lists, run configuration, and report serialization.

Edge list grammar: one edge per line, ``source target layer weight``,
separated by whitespace and/or commas. Blank lines and lines starting with
``#`` are skipped. A per-layer file (``--layer-file NAME=PATH``) holds
``source target [weight]`` lines; a missing weight means 1.

Reports render numbers with 12 significant digits so identical inputs give
byte-identical output.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
import re
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .errors import InputError
from .multiplex import NORMALIZATIONS, MultiplexNetwork, build_network
from .opinion import UTILITY_KINDS, UtilitySpec
from .results import CentralityResult

_SPLIT = re.compile(r"[,\s]+")


@dataclass(frozen=True)
class EdgeRecord:
    source_id: str
    target_id: str
    layer_id: str
    weight: float
    line: int | None = field(default=None, compare=False)

    def __post_init__(self):
        if not (self.source_id and self.target_id and self.layer_id):
            raise InputError("edge ids must be non-empty")
        if not (self.weight >= 0 and math.isfinite(self.weight)):
            raise InputError(f"edge weight must be finite and >= 0, got {self.weight}")

    def __iter__(self):
        return iter((self.source_id, self.target_id, self.layer_id, self.weight))

    def __getitem__(self, i):
        return tuple(self)[i]


def _data_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield lineno, [f for f in _SPLIT.split(line) if f]


def _weight(tok: str, lineno: int, where: str) -> float:
    try:
        w = float(tok)
    except ValueError:
        raise InputError(f"{where}line {lineno}: weight {tok!r} is not a number") from None
    if not math.isfinite(w):
        raise InputError(f"{where}line {lineno}: weight {tok!r} is not finite")
    if w < 0:
        raise InputError(f"{where}line {lineno}: negative weight {w}")
    return w


def parse_edge_list(text: str, source: str = "") -> list[EdgeRecord]:
    where = f"{source}: " if source else ""
    out = []
    for lineno, toks in _data_lines(text):
        if len(toks) != 4:
            raise InputError(f"{where}line {lineno}: expected 4 fields "
                             f"(source target layer weight), got {len(toks)}")
        out.append(EdgeRecord(toks[0], toks[1], toks[2], _weight(toks[3], lineno, where), lineno))
    return out


def parse_layer_file(text: str, layer_id: str, source: str = "") -> list[EdgeRecord]:
    where = f"{source}: " if source else ""
    out = []
    for lineno, toks in _data_lines(text):
        if len(toks) not in (2, 3):
            raise InputError(f"{where}line {lineno}: expected 'source target [weight]', "
                             f"got {len(toks)} fields")
        w = _weight(toks[2], lineno, where) if len(toks) == 3 else 1.0
        out.append(EdgeRecord(toks[0], toks[1], layer_id, w, lineno))
    return out


def render_edges(edges) -> str:
    lines = []
    for e in edges:
        s, t, c, w = tuple(e)[:4]
        for tok in (s, t, c):
            if not tok or _SPLIT.search(str(tok)) or str(tok).startswith("#"):
                raise InputError(f"id {tok!r} cannot be written to an edge list")
        lines.append(f"{s} {t} {c} {float(w)!r}")
    return "\n".join(lines) + ("\n" if lines else "")


def load_network(edge_paths=(), layer_files=(), normalize: str = "cap") -> MultiplexNetwork:
    """Read ``--edges`` files and ``NAME=PATH`` layer files into one network."""
    records = []
    for p in edge_paths:
        records.extend(parse_edge_list(Path(p).read_text(), str(p)))
    for spec in layer_files:
        name, sep, path = spec.partition("=")
        if not sep or not name or not path:
            raise InputError(f"layer file must be NAME=PATH, got {spec!r}")
        records.extend(parse_layer_file(Path(path).read_text(), name, path))
    if not records:
        raise InputError("no edges given (use --edges and/or --layer-file)")
    return build_network(records, normalize=normalize)


def parse_alpha_table(text: str, net: MultiplexNetwork) -> np.ndarray:
    """I x C internal rates from a table with header ``node <layer ids...>``."""
    rows = list(_data_lines(text))
    if not rows:
        raise InputError("alpha table is empty")
    _, header = rows[0]
    layers = header[1:]
    missing = set(net.layer_ids) - set(layers)
    if missing:
        raise InputError(f"alpha table lacks layers {sorted(missing)}")
    col = {c: k for k, c in enumerate(layers)}
    node_pos = {n: i for i, n in enumerate(net.node_ids)}
    alpha = np.full((net.n_nodes, net.n_layers), np.nan)
    for lineno, toks in rows[1:]:
        if len(toks) != len(header):
            raise InputError(f"alpha table line {lineno}: expected {len(header)} fields")
        if toks[0] not in node_pos:
            raise InputError(f"alpha table line {lineno}: unknown node {toks[0]!r}")
        try:
            vals = [float(v) for v in toks[1:]]
        except ValueError:
            raise InputError(f"alpha table line {lineno}: non-numeric rate") from None
        if any(v < 0 or not math.isfinite(v) for v in vals):
            raise InputError(f"alpha table line {lineno}: rates must be finite and >= 0")
        alpha[node_pos[toks[0]]] = [vals[col[c]] for c in net.layer_ids]
    if np.isnan(alpha).any():
        absent = [net.node_ids[i] for i in np.flatnonzero(np.isnan(alpha).any(axis=1))]
        raise InputError(f"alpha table lacks nodes {absent[:5]}")
    return alpha


@dataclass(frozen=True)
class RunConfig:
    budget: float = 1.0
    gamma: float | str = "auto"
    alpha_mode: str = "uniform"
    alpha_hat: float = 1.0
    alpha_file: str | None = None
    delta: float = 0.001
    seed: int = 0
    normalize: str = "cap"
    utility: str = "linear"
    utility_weights: object = None

    def __post_init__(self):
        if not (isinstance(self.budget, (int, float)) and self.budget > 0):
            raise InputError(f"budget: must be a number > 0, got {self.budget!r}")
        g = self.gamma
        if not (g == "auto" or (isinstance(g, (int, float)) and not isinstance(g, bool) and g > 0)):
            raise InputError(f"gamma: must be 'auto' or a number > 0, got {g!r}")
        if self.alpha_mode not in ("uniform", "file"):
            raise InputError(f"alpha_mode: must be 'uniform' or 'file', got {self.alpha_mode!r}")
        if self.alpha_mode == "uniform" and not (isinstance(self.alpha_hat, (int, float))
                                                 and self.alpha_hat >= 0):
            raise InputError(f"alpha_hat: must be a number >= 0, got {self.alpha_hat!r}")
        if self.alpha_mode == "file" and not self.alpha_file:
            raise InputError("alpha_file: required when alpha_mode is 'file'")
        if not (isinstance(self.delta, (int, float)) and 0 < self.delta < 1):
            raise InputError(f"delta: must lie in (0, 1), got {self.delta!r}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise InputError(f"seed: must be an integer, got {self.seed!r}")
        if self.normalize not in NORMALIZATIONS:
            raise InputError(f"normalize: must be one of {NORMALIZATIONS}, got {self.normalize!r}")
        if self.utility not in UTILITY_KINDS:
            raise InputError(f"utility: must be one of {UTILITY_KINDS}, got {self.utility!r}")
        w = self.utility_weights
        if w is not None:
            vals = list(w.values()) if isinstance(w, dict) else w
            if not isinstance(vals, (list, tuple)) or not all(
                    isinstance(v, (int, float)) and v > 0 for v in vals):
                raise InputError("utility_weights: must be positive numbers (list or node map)")

    def with_overrides(self, **kw) -> "RunConfig":
        vals = {f.name: getattr(self, f.name) for f in fields(self)}
        vals.update({k: v for k, v in kw.items() if v is not None})
        if kw.get("alpha_file") is not None:
            vals["alpha_mode"] = "file"
        elif kw.get("alpha_hat") is not None:
            vals["alpha_mode"] = "uniform"
        return RunConfig(**vals)

    def utility_spec(self, net: MultiplexNetwork) -> UtilitySpec:
        w = self.utility_weights
        if self.utility == "linear" or w is None:
            return UtilitySpec(self.utility)
        if isinstance(w, dict):
            unknown = set(w) - set(net.node_ids)
            if unknown:
                raise InputError(f"utility_weights: unknown nodes {sorted(unknown)[:5]}")
            w = [w.get(n, 1.0) for n in net.node_ids]
        return UtilitySpec(self.utility, np.asarray(w, dtype=float))


_CONFIG_KEYS = {f.name for f in fields(RunConfig)}


def parse_config(text: str) -> RunConfig:
    """Flat JSON object; unknown keys are rejected."""
    try:
        doc = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise InputError(f"config is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise InputError("config must be a flat JSON object")
    unknown = sorted(set(doc) - _CONFIG_KEYS)
    if unknown:
        raise InputError(f"unknown config keys: {', '.join(unknown)}")
    for k, v in doc.items():
        if isinstance(v, dict) and k != "utility_weights":
            raise InputError(f"{k}: nested objects are not allowed")
    return RunConfig(**doc)


# --- rendering -------------------------------------------------------------

def fmt_num(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        return format(v, ".12g")
    return str(v)


def _json_safe(obj):
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _json_safe(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return None if not math.isfinite(v) else float(format(v, ".12g"))
    return obj


def _dump_json(doc) -> str:
    return json.dumps(_json_safe(doc), indent=2) + "\n"


def write_rows(rows, columns) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt_num(r.get(c)) for c in columns])
    return buf.getvalue()


REPORT_COLUMNS = ("node", "value", "budget_share", "rank")


def _result_rows(res: CentralityResult) -> list[dict]:
    order = np.argsort(res.ranks, kind="stable")
    shares = res.budget_shares
    return [{
        "node": res.node_ids[i],
        "value": float(res.values[i]),
        "budget_share": None if shares is None else float(shares[i]),
        "rank": float(res.ranks[i]),
    } for i in order]


def write_report(obj, fmt: str = "csv") -> str:
    """Render a CentralityResult or a ComparisonReport as CSV or JSON.

    An empty list renders as a header-only CSV (or an empty JSON node list).
    """
    from .analysis import ComparisonReport

    if fmt not in ("csv", "json"):
        raise InputError(f"unknown format {fmt!r}")
    if isinstance(obj, (list, tuple)) and not obj:
        return write_rows([], REPORT_COLUMNS) if fmt == "csv" else _dump_json({"nodes": []})
    if isinstance(obj, CentralityResult):
        rows = _result_rows(obj)
        if fmt == "csv":
            return write_rows(rows, REPORT_COLUMNS)
        return _dump_json({"measure": obj.measure, "budget": obj.budget, "nodes": rows,
                           "diagnostics": obj.diagnostics})
    if isinstance(obj, ComparisonReport):
        return _write_comparison(obj, fmt)
    raise InputError(f"cannot render {type(obj).__name__}")


# wall-clock timings are left out so identical runs render identical bytes
COMPARISON_COLUMNS = ("measure", "spearman_vs_opinion", "status")


def _write_comparison(rep, fmt):
    rows = []
    for m in rep.measures:
        rho = rep.rho.get((m, "opinion"))
        if rep.results[m] is None:
            status = "skipped" if m not in rep.timings else "failed"
        elif rho is not None and math.isnan(rho):
            status = "undefined"
        else:
            status = "ok"
        rows.append({
            "measure": m,
            "spearman_vs_opinion": None if rho is None or math.isnan(rho) else rho,
            "status": status,
        })
    if fmt == "csv":
        return write_rows(rows, COMPARISON_COLUMNS)
    matrix = [[rep.rho.get((a, b)) for b in rep.measures] for a in rep.measures]
    doc = {
        "node_ids": list(rep.node_ids),
        "measures": rep.measures,
        "summary": rows,
        "spearman_matrix": matrix,
        "notices": rep.notices,
        "values": {m: (None if r is None else r.values) for m, r in rep.results.items()},
        "rank_differences": {
            m: [{"node": n, "delta": d} for n, d in zip(rd.node_ids, rd.deltas.tolist())]
            for m, rd in rep.rank_differences.items()
        },
    }
    return _dump_json(doc)


def write_matrix_csv(rep) -> str:
    """Flat Spearman matrix: one row per measure, one column per measure."""
    rows = []
    for a in rep.measures:
        row = {"measure": a}
        for b in rep.measures:
            v = rep.rho.get((a, b))
            row[b] = None if v is None or math.isnan(v) else v
        rows.append(row)
    return write_rows(rows, ["measure", *rep.measures])


TRACE_COLUMNS = ("event", "node", "x")


def write_trace(trace) -> str:
    rows = []
    for k, x in zip(trace.sample_events.tolist(), trace.samples):
        for node, v in zip(trace.node_ids, x.tolist()):
            rows.append({"event": k, "node": node, "x": v})
    return write_rows(rows, TRACE_COLUMNS)


def dump_json(doc) -> str:
    return _dump_json(doc)
