"""Command-line front end: ``ospos <command> [flags]``.

Exit status is 0 on success, 2 when an input breaks a precondition (including
parse and schema errors) and 1 on any other failure.  Reports are JSON with
sorted keys, so identical inputs give byte-identical output.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from . import covariance as cov
from . import hs
from . import io
from .errors import OsposError, PreconditionError, SchemaError
from .linalg import TOL_PSD
from .markov import (
    WITNESS_MARGIN,
    in_R_epsilon,
    markov_implies_os,
    markov_residual,
    osm_witness_search,
)
from .reflection import (
    contraction_from_subspace,
    intersection_kernel_spaces,
    is_maximal_os,
    maximal_extension,
    one_dim_instance,
    one_dim_os_bound,
    os_positivity,
    plus_minus_meet,
    zero_extension,
)
from .renormalize import (
    RANK_TOL,
    build_renormalized,
    contractive_inclusion,
    extended_projections,
    induce_operator,
    induce_semigroup_generator,
)
from .twoblock import TwoBlockModel, characteristic_projection, markov_iff_zero, model_triple

COMMANDS = ("geometry", "renorm", "markov", "twoblock", "covariance", "hs")
SCHEMAS = ("inputs", "report", "error")


@dataclass
class RunConfig:
    command: str
    tol: float = TOL_PSD
    seed: Optional[int] = None
    input_path: Optional[str] = None
    output_path: Optional[str] = None
    options: dict = field(default_factory=dict)


def _read_input(path: Optional[str], definition: str) -> dict:
    if path is None:
        raise SchemaError("--input is required for this command")
    if path == "-":
        text, source = sys.stdin.read(), "<stdin>"
    else:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise SchemaError(f"{path}: {exc.strerror}") from None
        source = path
    doc = io.parse_json(text, source)
    io.validate(doc, definition)
    return doc


def _psd(rep) -> dict:
    out = {"is_psd": bool(rep.is_psd), "min_eigenvalue": io.num(rep.min_eigenvalue)}
    if rep.witness is not None:
        out["witness"] = io.encode_vector(rep.witness)
    return out


def _geometry(cfg: RunConfig) -> tuple[str, dict, dict, dict]:
    o = cfg.options
    if o.get("alpha") is not None:
        alpha = o["alpha"]
        c = complex(*[float(p) for p in str(o.get("c", "0")).split(",")])
        theta, H = one_dim_instance(alpha, c)
        rep = os_positivity(theta, H, cfg.tol)
        res = {"bound": one_dim_os_bound(alpha, c), "direct": _psd(rep)}
        return "one_dim_os_bound", {"alpha": alpha, "c": io.encode_complex(c)}, res, {"bound_tol": 1e-12}
    doc = _read_input(cfg.input_path, "geometry_input")
    theta = io.decode_reflection(doc["theta"])
    H = io.decode_subspace(doc["H_plus"])
    rep = os_positivity(theta, H, cfg.tol)
    res: dict = {"os_positivity": _psd(rep), "plus_cap_theta_plus_dim": plus_minus_meet(theta, H).dim}
    if rep.is_psd:
        C = contraction_from_subspace(theta, H, cfg.tol)
        Cx = zero_extension(theta, C)
        sp = intersection_kernel_spaces(theta, Cx)
        res["contraction"] = {
            "domain": io.encode_subspace(C.domain),
            "ambient_matrix": io.encode_matrix(C.ambient_matrix()),
            "norm": io.num(C.norm),
        }
        res["is_maximal"] = is_maximal_os(theta, H, cfg.tol)
        res["maximal_extension"] = io.encode_subspace(maximal_extension(theta, H, cfg.tol))
        res["extended_intersection_kernel"] = {
            "holds": sp.plus_cap_minus.same_as(sp.kernel) and sp.kernel.same_as(sp.plus_cap_fixed),
            "plus_cap_minus_dim": sp.plus_cap_minus.dim,
            "kernel": io.encode_subspace(sp.kernel),
            "plus_cap_fixed_dim": sp.plus_cap_fixed.dim,
        }
    return "os_positivity", doc, res, {}


def _renorm(cfg: RunConfig) -> tuple[str, dict, dict, dict]:
    doc = _read_input(cfg.input_path, "renorm_input")
    theta = io.decode_reflection(doc["theta"])
    H = io.decode_subspace(doc["H_plus"])
    rank_tol = doc.get("rank_tol", RANK_TOL)
    K = build_renormalized(theta, H, rank_tol, cfg.tol)
    res: dict = {"k_dim": K.k_dim, "h_dim": K.h_dim, "gram_eigenvalues": io.encode_reals(K.gram_eigenvalues)}
    if "U" in doc:
        Ut = induce_operator(K, io.decode_matrix(doc["U"]))
        res["u_tilde"] = io.encode_matrix(Ut.matrix)
        res["u_tilde_spectrum"] = io.encode_reals(Ut.spectrum()[::-1])
    if "A" in doc:
        t0 = doc.get("t0", 1.0)
        L = induce_semigroup_generator(K, io.decode_matrix(doc["A"]), t0)
        res["generator"] = io.encode_matrix(L)
        res["generator_spectrum"] = io.encode_reals(np.linalg.eigvalsh((L + L.conj().T) / 2))
    if "H_zero" in doc:
        inc = contractive_inclusion(theta, H, io.decode_subspace(doc["H_zero"]))
        out = {"contractive": inc.contractive, "norm": io.num(inc.norm)}
        if inc.witness is not None:
            out["witness"] = {"h_plus": io.encode_vector(inc.witness[0]), "h_zero": io.encode_vector(inc.witness[1])}
            out["violation"] = io.num(inc.violation)
        res["inclusion"] = out
    return "build_renormalized", doc, res, {"rank_tol": rank_tol, "premise_tol": 1e-9, "law_tol": 1e-8}


def _markov(cfg: RunConfig) -> tuple[str, dict, dict, dict]:
    doc = _read_input(cfg.input_path, "markov_input")
    eps = io.decode_triple(doc["triple"])
    trials = cfg.options.get("trials", 64)
    res: dict = {"markov": {"holds": markov_residual(eps) <= cfg.tol, "residual": io.num(markov_residual(eps))}}
    w = osm_witness_search(eps, trials, cfg.seed, cfg.tol)
    wr = {"status": w.status.value, "trials": w.trials}
    if w.reflection is not None:
        wr["reflection"] = io.encode_reflection(w.reflection)
        wr["violation"] = io.num(w.violation)
    if w.best_residual is not None:
        wr["best_membership_residual"] = io.num(w.best_residual)
    wr["diagnostics"] = {k: io.num(v) for k, v in sorted(w.diagnostics.items())}
    res["witness"] = wr
    if "theta" in doc:
        theta = io.decode_reflection(doc["theta"])
        res["in_R_epsilon"] = in_R_epsilon(theta, eps, cfg.tol)
        res["os_positivity"] = _psd(os_positivity(theta, eps.H_plus, cfg.tol))
        if res["markov"]["holds"] and res["in_R_epsilon"]:
            res["markov_implies_os"] = _psd(markov_implies_os(eps, theta, cfg.tol))
        ex = extended_projections(eps, theta, cfg.tol)
        res["extended"] = {
            "plus_dim": ex.plus.dim,
            "minus_dim": ex.minus.dim,
            "swap_residual": io.num(ex.swap_residual),
            "ep3_residual": io.num(ex.ep3_residual),
        }
    inputs = dict(doc, trials=trials, seed=cfg.seed)
    return "osm_witness_search", inputs, res, {"witness_margin": WITNESS_MARGIN}


def _twoblock(cfg: RunConfig) -> tuple[str, dict, dict, dict]:
    o = cfg.options
    if o.get("c") is not None:
        doc = {"C": io.parse_json(o["c"], "--c")}
        io.validate(doc, "twoblock_input")
    else:
        doc = _read_input(cfg.input_path, "twoblock_input")
    m = TwoBlockModel(io.decode_matrix(doc["C"]), cfg.tol)
    Ep = characteristic_projection(m, 1)
    Em = characteristic_projection(m, -1)
    holds, r = markov_iff_zero(m, o.get("markov_tol", 1e-10))
    eps = model_triple(m)
    res = {
        "n1": m.n1,
        "n2": m.n2,
        "norm_C": io.num(np.linalg.norm(m.C, 2)),
        "E_plus": io.encode_matrix(Ep.matrix),
        "E_minus": io.encode_matrix(Em.matrix),
        "condition_1_plus_CstarC": io.num(Ep.condition),
        "triple": {"H0": io.encode_subspace(eps.H0), "H_plus": io.encode_subspace(eps.H_plus),
                   "H_minus": io.encode_subspace(eps.H_minus)},
        "theta_in_R_epsilon": in_R_epsilon(m.theta, eps),
        "markov": holds,
        "markov_residual": io.num(r),
    }
    return "markov_iff_zero", doc, res, {"markov_tol": o.get("markov_tol", 1e-10)}


def _parse_grid(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise SchemaError(f"--grid: cannot parse {text!r} as comma-separated numbers") from None


def _covariance(cfg: RunConfig) -> tuple[str, dict, dict, dict]:
    o = cfg.options
    grid = _parse_grid(o.get("grid", "0,1,2"))
    inputs: dict = {"grid": grid}
    if o.get("table"):
        doc = _read_input(o["table"], "covariance_table")
        samples = sorted((float(k), float(v)) for k, v in doc["samples"].items())
        r = cov.tabulated([t for t, _ in samples], [v for _, v in samples], doc.get("name", "table"))
        inputs["table"] = doc
    else:
        params = {}
        if o.get("param") is not None:
            params = {"a": o["param"]} if o.get("name", "ou") == "ou" else {"b": o["param"]}
        r = cov.by_name(o.get("name", "ou"), **params)
        inputs["name"] = r.name
        inputs["params"] = params
    pairs = [(s, t) for s in grid for t in grid]
    sg_tol = o.get("semigroup_tol", 1e-12)
    res: dict = {
        "covariance": r.name,
        "description": r.description,
        "approximate": r.approximate,
        "stationary_gram": _psd(cov.stationary_gram(r, grid, tol=cfg.tol).report),
    }
    if all(t >= 0 for t in grid):
        res["os_gram"] = _psd(cov.os_gram(r, grid, tol=cfg.tol).report)
        sres = cov.semigroup_residual(r, pairs)
        res["semigroup"] = {"holds": sres <= sg_tol, "residual": io.num(sres), "pairs": len(pairs)}
    for key in ("stationary_gram", "os_gram"):
        if key in res:
            res[key].pop("witness", None)
    if o.get("shift") is not None:
        R = cov.reflected_semigroup(r, grid, o["shift"], tol=max(cfg.tol, 1e-9))
        inputs["shift"] = o["shift"]
        res["reflected_semigroup"] = {
            "k_dim": R.k_dim,
            "matrix": io.encode_matrix(R.matrix),
            "spectrum": io.encode_reals(R.spectrum),
            "norm": io.num(R.norm),
            "hermitian_residual": io.num(R.hermitian_residual),
            "law_residual": io.num(R.law_residual),
            "kernel_residual": io.num(R.kernel_residual),
        }
    return "gram_tests", inputs, res, {"semigroup_tol": sg_tol}


def _hs(cfg: RunConfig) -> tuple[str, dict, dict, dict]:
    o = cfg.options
    s, a, N, k = o.get("s", 0.5), o.get("a", 2.0), o.get("n", 200), o.get("k", 3)
    rank_tol = o.get("rank_tol") or hs.HS_RANK_TOL
    d = hs.build_hs(s, N)
    ev = hs.u_tilde_spectrum(d, a, k, rank_tol)
    ref = hs.reference_spectrum(s, a, k)
    geo = hs.geometric_set(a, k)
    W = hs.whiten(d.gram, rank_tol)
    res: dict = {
        "eigenvalues": io.encode_reals(ev),
        "reference": io.encode_reals(ref),
        "reference_formula": "a^(s-1-2n), n = 0..k-1",
        "relative_errors": io.encode_reals(np.abs(ev - ref) / ref),
        "geometric_set": io.encode_reals(geo),
        "geometric_set_formula": "a^(-2n), n = 1..k",
        "relative_errors_vs_geometric_set": io.encode_reals(np.abs(ev - geo) / geo),
        "ratios": io.encode_reals(ev[1:] / ev[:-1]),
        "leading_exponent": io.num(np.log(ev[0]) / np.log(a)) if ev.size and ev[0] > 0 else None,
        "gram_condition": io.num(W.condition),
        "gram_rank": W.rank,
        "symmetry_residual": io.num(hs.reflection_symmetry_check(d, a)),
    }
    if o.get("converge"):
        st = hs.convergence_study(s, a, k, rank_tol=rank_tol, until=N)
        res["convergence"] = {
            "N": list(st.Ns),
            "eigenvalues": [io.encode_reals(e) for e in st.eigenvalues],
            "max_change": [io.num(c) for c in st.changes],
            "converged_N": st.converged_N,
            "tol": st.tol,
        }
    if o.get("certify"):
        ok, piv, dps = hs.certify_gram_pd(d)
        res["pd_certificate"] = {"cholesky_ok": ok, "min_pivot": io.num(piv), "dps": dps}
    inputs = {"s": s, "a": a, "n": N, "k": k, "rank_tol": rank_tol}
    return "u_tilde_spectrum", inputs, res, {"rank_tol": rank_tol}


HANDLERS = {
    "geometry": ("reflection-geometry", _geometry),
    "renorm": ("renormalize", _renorm),
    "markov": ("markov-os", _markov),
    "twoblock": ("two-block-model", _twoblock),
    "covariance": ("covariance", _covariance),
    "hs": ("hs-quadrature", _hs),
}


def run(cfg: RunConfig) -> tuple[int, str]:
    """Execute one command; returns (exit code, JSON text)."""
    try:
        if cfg.command not in HANDLERS:
            raise SchemaError(f"unknown command {cfg.command!r}")
        if not cfg.tol > 0:
            raise SchemaError("tolerance must be positive")
        if cfg.command == "markov" and cfg.seed is None:
            raise SchemaError("--seed is required for the randomized witness search")
        module, handler = HANDLERS[cfg.command]
        op, inputs, results, extra_tols = handler(cfg)
        report = {
            "tool": "ospos",
            "version": __version__,
            "module": module,
            "operation": op,
            "tolerances": dict(extra_tols, tol=cfg.tol),
            "inputs": inputs,
            "results": results,
            "provenance": {"inputs": "echo of supplied values", "results": "computed"},
            "status": "ok",
        }
        io.validate(report, "", "report")
        return 0, io.dumps(report)
    except PreconditionError as exc:
        return 2, _error(exc, 2)
    except OsposError as exc:
        return 1, _error(exc, 1)
    except Exception as exc:  # noqa: BLE001 - last-resort internal failure
        return 1, _error(exc, 1)


def _error(exc: BaseException, code: int) -> str:
    return io.dumps({"tool": "ospos", "status": "error", "error": type(exc).__name__, "message": str(exc),
                     "exit_code": code})


def _env_tol() -> float:
    raw = os.environ.get("OSPOS_TOL")
    if raw is None:
        return TOL_PSD
    try:
        return float(raw)
    except ValueError:
        return float("nan")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ospos", description="Reflection positivity toolkit")
    p.add_argument("--version", action="version", version=f"ospos {__version__}")
    p.add_argument("--schema", nargs="?", const="all", choices=("all",) + SCHEMAS,
                   help="print the shipped JSON schemas and exit")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", "-i", help="input JSON file, '-' for stdin")
    common.add_argument("--output", "-o", help="write the report here instead of stdout")
    common.add_argument("--tol", type=float, help="tolerance (default: OSPOS_TOL or 1e-10)")
    sub = p.add_subparsers(dest="command")

    g = sub.add_parser("geometry", parents=[common], help="OS positivity and contraction of a subspace")
    g.add_argument("--alpha", type=float, help="one-dimensional example: ||Pf||^2")
    g.add_argument("--c", default="0", help="one-dimensional example: c as 're' or 're,im'")

    sub.add_parser("renorm", parents=[common], help="renormalized space and induced operators")

    m = sub.add_parser("markov", parents=[common], help="Markov check and reflection witness search")
    m.add_argument("--trials", type=int, default=64)
    m.add_argument("--seed", type=int)

    t = sub.add_parser("twoblock", parents=[common], help="two-block model for a contraction C")
    t.add_argument("--c", help="C as a JSON matrix, e.g. '[[0.5]]'")
    t.add_argument("--markov-tol", type=float, default=1e-10, help="||C|| threshold for the Markov verdict")

    c = sub.add_parser("covariance", parents=[common], help="Gram, semigroup and reflected-semigroup tests")
    c.add_argument("--name", default="ou", help="ou, avg_exp, inv_linear or inv_sqrt_exp")
    c.add_argument("--param", type=float, help="rate parameter (a for ou, b for avg_exp)")
    c.add_argument("--table", help="JSON file {\"samples\": {t: r(t)}} interpolated linearly")
    c.add_argument("--grid", default="0,1,2", help="comma-separated times")
    c.add_argument("--shift", type=float, help="s for the reflected semigroup R(s)")
    c.add_argument("--semigroup-tol", type=float, default=1e-12)

    h = sub.add_parser("hs", parents=[common], help="spectrum of the induced scaling operator")
    h.add_argument("--s", type=float, default=0.5)
    h.add_argument("--a", type=float, default=2.0)
    h.add_argument("--n", type=int, default=200)
    h.add_argument("--k", type=int, default=3)
    h.add_argument("--rank-tol", type=float)
    h.add_argument("--converge", action="store_true", help="run the doubling study up to --n")
    h.add_argument("--certify", action="store_true", help="high-precision Cholesky certificate of the Gram")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.schema:
        names = SCHEMAS if args.schema == "all" else (args.schema,)
        sys.stdout.write(io.dumps({n: io.load_schema(n) for n in names}))
        return 0
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    opts = {k: v for k, v in vars(args).items() if k not in ("command", "input", "output", "tol", "seed", "schema")}
    cfg = RunConfig(args.command, args.tol if args.tol is not None else _env_tol(), getattr(args, "seed", None),
                    args.input, args.output, opts)
    code, text = run(cfg)
    if code == 0 and cfg.output_path:
        with open(cfg.output_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    elif code == 0:
        sys.stdout.write(text)
    else:
        sys.stderr.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
