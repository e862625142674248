"""Problem-file parsing and report serialization.

Complex numbers are written as ``[re, im]`` pairs and every float is printed
with 17 significant digits, so a report re-parsed and re-serialized is
byte-identical.
"""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from . import __version__
from .deutsch import DensityMatrix, InteractionUnitary, InvalidStateError
from .linalg import MAX_DIM, Spectrum, Tolerances

TOOL = "deutschctc"


class ProblemFileError(ValueError):
    """Malformed or invalid problem file."""


# -- canonical JSON ----------------------------------------------------------


def format_float(x: float) -> str:
    x = float(x)
    if not np.isfinite(x):
        raise ValueError(f"non-finite value {x!r} cannot be serialized")
    s = format(x, ".17g")
    if not any(c in s for c in ".en"):
        s += ".0"
    return s


def _scalar(x) -> bool:
    return x is None or isinstance(x, (bool, int, float, str, np.floating, np.integer))


def _dump(obj: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_dump(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(_scalar(x) for x in obj) or all(
            isinstance(x, (list, tuple)) and all(_scalar(y) for y in x) for x in obj
        ):
            return "[" + ", ".join(_dump(x, indent, level) for x in obj) + "]"
        items = [pad + _dump(x, indent, level + 1) for x in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_canonical(obj: Any, indent: int = 2) -> str:
    return _dump(obj, indent, 0) + "\n"


def loads(text: str) -> Any:
    return json.loads(text)


# -- complex encoding --------------------------------------------------------


def encode_complex(z) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def encode_vector(v) -> list[list[float]]:
    return [encode_complex(z) for z in np.asarray(v).reshape(-1)]


def encode_matrix(m) -> list[list[list[float]]]:
    m = np.asarray(m)
    return [encode_vector(row) for row in m]


def _decode_pair(p, where: str) -> complex:
    if not (isinstance(p, list) and len(p) == 2 and all(isinstance(x, (int, float)) for x in p)):
        raise ProblemFileError(f"{where}: expected a [re, im] pair, got {p!r}")
    return complex(p[0], p[1])


def decode_vector(v, where: str) -> np.ndarray:
    if not isinstance(v, list) or not v:
        raise ProblemFileError(f"{where}: expected a non-empty array of [re, im] pairs")
    return np.array([_decode_pair(p, f"{where}[{i}]") for i, p in enumerate(v)], dtype=np.complex128)


def decode_matrix(m, where: str) -> np.ndarray:
    if not isinstance(m, list) or not m:
        raise ProblemFileError(f"{where}: expected a non-empty nested array")
    rows = [decode_vector(r, f"{where}[{i}]") for i, r in enumerate(m)]
    if len({len(r) for r in rows}) != 1:
        raise ProblemFileError(f"{where}: rows have different lengths")
    return np.array(rows)


# -- problem files -----------------------------------------------------------


def parse_problem(data: Any, tol: Tolerances = Tolerances()) -> tuple[InteractionUnitary, DensityMatrix]:
    """Validate a decoded problem file and return ``(unitary, cr_state)``."""
    if not isinstance(data, dict):
        raise ProblemFileError("problem file must be a JSON object")
    for key in ("dims", "unitary", "cr_state"):
        if key not in data:
            raise ProblemFileError(f"missing field {key!r}")
    dims = data["dims"]
    try:
        dcr, dctc = int(dims["cr"]), int(dims["ctc"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ProblemFileError("dims must be an object with integer 'cr' and 'ctc'") from exc
    if dcr < 1 or dctc < 2:
        raise ProblemFileError(f"invalid dims cr={dcr}, ctc={dctc}")
    if dcr * dctc > MAX_DIM:
        raise ProblemFileError(f"total dimension {dcr * dctc} exceeds the cap of {MAX_DIM}")
    u = decode_matrix(data["unitary"], "unitary")
    n = dcr * dctc
    if u.shape != (n, n):
        raise ProblemFileError(f"unitary has shape {u.shape}, expected {n}x{n} from dims")
    try:
        iu = InteractionUnitary(u, dcr, dctc, tol=tol.unitary)
    except InvalidStateError as exc:
        raise ProblemFileError(f"unitary check failed: {exc}") from exc

    state = data["cr_state"]
    if not isinstance(state, dict) or len(state) != 1 or not ({"pure", "mixed"} & set(state)):
        raise ProblemFileError("cr_state must be {'pure': [...]} or {'mixed': [[...]]}")
    try:
        if "pure" in state:
            psi = decode_vector(state["pure"], "cr_state.pure")
            if psi.size != dcr:
                raise ProblemFileError(f"cr_state.pure has length {psi.size}, expected {dcr}")
            rho = DensityMatrix.pure(psi, tol=tol.state)
        else:
            r = decode_matrix(state["mixed"], "cr_state.mixed")
            if r.shape != (dcr, dcr):
                raise ProblemFileError(f"cr_state.mixed has shape {r.shape}, expected {dcr}x{dcr}")
            rho = DensityMatrix(r, tol_herm=tol.state, tol_trace=tol.state, tol_psd=tol.state)
    except InvalidStateError as exc:
        raise ProblemFileError(f"cr_state check failed: {exc}") from exc
    return iu, rho


def load_problem(path: str, tol: Tolerances = Tolerances()) -> tuple[dict, InteractionUnitary, DensityMatrix]:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ProblemFileError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ProblemFileError(f"{path} is not valid JSON: {exc}") from exc
    u, rho = parse_problem(data, tol)
    return data, u, rho


def problem_dict(u: InteractionUnitary, psi=None, rho=None) -> dict:
    if (psi is None) == (rho is None):
        raise ValueError("give exactly one of psi, rho")
    state = {"pure": encode_vector(psi)} if psi is not None else {"mixed": encode_matrix(rho)}
    return {
        "dims": {"cr": u.dim_cr, "ctc": u.dim_ctc},
        "unitary": encode_matrix(u.u),
        "cr_state": state,
    }


# -- reports -----------------------------------------------------------------


def tool_block() -> dict:
    return {"name": TOOL, "version": __version__}


def spectrum_block(spectrum: Spectrum) -> dict:
    return {
        "spectrum": encode_vector(spectrum.values),
        "multiplicities": [
            {"value": encode_complex(v), "count": int(c)} for v, c in spectrum.multiplicities
        ],
    }


def entanglement_block(ent) -> Any:
    if ent is None:
        return None
    return {
        "entropy_nats": ent.entropy_nats,
        "entropy_bits": ent.entropy_bits,
        "purity": ent.purity,
        "concurrence": ent.concurrence,
        "is_product": ent.is_product,
        "product_tol": ent.product_tol,
    }


def report_dict(report, command: str, inputs: dict, seed=None) -> dict:
    """Machine-readable form of a :class:`~deutschctc.scenarios.ScenarioReport`."""
    fset = report.fixed_set
    out = {"tool": tool_block(), "command": command, "scenario_id": report.scenario_id,
           "input": inputs, "seed": seed, "rule": str(report.rule)}
    out.update(spectrum_block(report.spectrum))
    out.update({
        "fixed_subspace_dim": report.fixed_subspace_dim,
        "particular_solution": encode_matrix(fset.particular.mat),
        "directions": [encode_matrix(d) for d in fset.directions],
        "feasible_intervals": [[float(lo), float(hi)] for lo, hi in report.intervals],
        "selected_ctc": encode_matrix(report.selected_ctc.mat),
        "cr_output": None if report.cr_output is None else encode_matrix(report.cr_output.mat),
        "entanglement": entanglement_block(report.entanglement),
        "residual": report.residual,
    })
    return out


def sweep_dict(result, rule, seed=None) -> dict:
    rows = []
    for row in result.rows:
        rows.append({
            "epsilon": row.epsilon,
            "lambda2_a": row.lambda2_a,
            "lambda2_c": row.lambda2_c,
            "m_distance_ab": row.m_distance_ab,
            "trace_distance_ac": row.trace_distance_ac,
            "selected_ctc": {v: encode_matrix(row.reports[v].selected_ctc.mat) for v in "ABC"},
            "residuals": {v: row.reports[v].residual for v in "ABC"},
        })
    return {"tool": tool_block(), "command": "sweep", "seed": seed, "rule": str(rule),
            "epsilons": list(result.epsilons), "rows": rows}


# -- text rendering ----------------------------------------------------------


def _fmt_c(pair) -> str:
    re, im = pair
    sign = "-" if np.copysign(1.0, im) < 0 else "+"
    return f"{format_float(re)} {sign} {format_float(abs(im))}i"


def _fmt_matrix(m, indent: str = "    ") -> list[str]:
    return [indent + "[" + ", ".join(_fmt_c(p) for p in row) + "]" for row in m]


def render_text(d: dict) -> str:
    """Plain-text rendering of a report dict; numbers are formatted as in the JSON form."""
    lines: list[str] = []
    lines.append(f"{d['tool']['name']} {d['tool']['version']}  command: {d['command']}")
    if d["command"] == "sweep":
        return _render_sweep(d, lines)
    if "scenario_id" in d:
        lines.append(f"scenario: {d['scenario_id']}")
    if "rule" in d:
        lines.append(f"rule: {d['rule']}")
    lines.append("spectrum of M:")
    for p in d["spectrum"]:
        lines.append("    " + _fmt_c(p))
    lines.append("multiplicities:")
    for g in d["multiplicities"]:
        lines.append(f"    {_fmt_c(g['value'])}  x{g['count']}")
    if d["command"] == "spectrum":
        return "\n".join(lines) + "\n"
    lines.append(f"fixed subspace dimension: {d['fixed_subspace_dim']}")
    lines.append("particular solution:")
    lines += _fmt_matrix(d["particular_solution"])
    for k, (dm, iv) in enumerate(zip(d["directions"], d["feasible_intervals"])):
        lines.append(f"direction {k}: t in [{format_float(iv[0])}, {format_float(iv[1])}]")
        lines += _fmt_matrix(dm)
    lines.append("selected rho_CTC:")
    lines += _fmt_matrix(d["selected_ctc"])
    if d["cr_output"] is not None:
        lines.append("CR output:")
        lines += _fmt_matrix(d["cr_output"])
    ent = d["entanglement"]
    if ent is not None:
        lines.append("entanglement of CR output:")
        for key in ("entropy_nats", "entropy_bits", "purity", "concurrence"):
            val = ent[key]
            lines.append(f"    {key}: {'n/a' if val is None else format_float(val)}")
        prod = ent["is_product"]
        lines.append(f"    is_product: {'n/a' if prod is None else str(prod).lower()}"
                     f" (tol {format_float(ent['product_tol'])})")
    lines.append(f"residual: {format_float(d['residual'])}")
    return "\n".join(lines) + "\n"


def _render_sweep(d: dict, lines: list[str]) -> str:
    lines.append(f"rule: {d['rule']}")
    header = ["epsilon", "lambda2_A", "lambda2_C", "||M_A-M_B||_F", "trace_dist(A,C)"]
    body = [[format_float(r[k]) for k in ("epsilon", "lambda2_a", "lambda2_c", "m_distance_ab",
                                          "trace_distance_ac")] for r in d["rows"]]
    widths = [max(len(h), *(len(row[i]) for row in body)) for i, h in enumerate(header)]
    lines.append("  ".join(h.rjust(w) for h, w in zip(header, widths)))
    for row in body:
        lines.append("  ".join(c.rjust(w) for c, w in zip(row, widths)))
    return "\n".join(lines) + "\n"
