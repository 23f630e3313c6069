"""Batch command-line entry point.

Subcommands wire JSON specs to the library operations and emit
machine-readable JSON/CSV reports; with --figures the report path also
renders matplotlib summaries next to the delimited output.  Exit codes:
0 ok, 1 invariant or inequality violation, 2 usage, 3 budget.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import varadhan
from .configspace import DEFAULT_BUDGET, irreducibly_quantified_check
from .errors import (
    BudgetExceededError,
    InvalidQueryError,
    LgformsError,
    NotClosedError,
)
from .forms import Form, is_closed, solve_potential
from .interaction import conserved_basis, is_simple, load_interaction
from .locales import (
    Locale,
    complete,
    counting_report,
    cycle,
    grid,
    load_locale,
    orbit_edge_counts,
    path,
    tempered_ratio,
)
from .measure import expand_base, expand_mu, load_measure
from .spectral import (
    uniform_gap_scan,
    verify_boundary_estimate,
    verify_dagger_bound,
    verify_mpl,
    verify_sigma_gap_bound,
)
from .tables import FunctionTable

USAGE_ERROR = 2
VIOLATION = 1
BUDGET_ERROR = 3


def _read_json(path: str):
    with open(path) as fh:
        return json.load(fh)


def _emit(doc, out: str | None):
    text = json.dumps(doc, indent=2, sort_keys=True)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def parse_locales(spec: str) -> list:
    """Comma list of selectors: p3, k4, c5, box2x2, and ranges like k2..k6."""
    makers = {"p": path, "k": complete, "c": cycle}
    out = []
    for token in spec.split(","):
        token = token.strip().lower()
        if not token:
            continue
        if token.startswith("box"):
            shape = tuple(int(s) for s in token[3:].split("x"))
            out.append(grid(shape))
            continue
        if ".." in token:
            lo, hi = token.split("..")
            kind = lo[0]
            if kind not in makers or not hi.startswith(kind):
                raise InvalidQueryError(f"bad range selector {token!r}")
            for k in range(int(lo[1:]), int(hi[1:]) + 1):
                out.append(makers[kind](k))
            continue
        kind = token[0]
        if kind not in makers:
            raise InvalidQueryError(f"unknown locale selector {token!r}")
        out.append(makers[kind](int(token[1:])))
    if not out:
        raise InvalidQueryError("empty locale list")
    return out


def _normalize_vertex(v):
    return tuple(v) if isinstance(v, list) else (v,) if isinstance(v, int) else v


def load_table(doc, space) -> FunctionTable:
    window = tuple(_normalize_vertex(v) for v in doc["window"])
    return FunctionTable(space, window, np.asarray(doc["values"], dtype=float))


def dump_table(tab: FunctionTable) -> dict:
    return {"window": [list(v) for v in tab.window],
            "values": [float(x) for x in tab.values]}


def load_invariant_form(doc, phi) -> varadhan.ShiftInvariantForm:
    d = int(doc["d"])
    reps = {}
    for j, entry in enumerate(doc["directions"]):
        reps[j] = load_table(entry, phi.space)
    return varadhan.ShiftInvariantForm(d=d, space=phi.space, phi=phi, reps=reps)


def load_form_bundle(doc, phi) -> Form:
    locale = load_locale(doc["locale"])
    tabs = {}
    for edge, values in zip(doc["edges"], doc["tables"]):
        u, v = _normalize_vertex(edge[0]), _normalize_vertex(edge[1])
        window = tuple(sorted(locale.vertices))
        tabs[(u, v)] = FunctionTable(phi.space, window, np.asarray(values, dtype=float))
    return Form(locale=locale, space=phi.space, tables=tabs)


def cmd_consv(args) -> int:
    phi = load_interaction(_read_json(args.interaction))
    basis = conserved_basis(phi)
    doc = {
        "dimension": basis.dimension,
        "basis": [[str(x) for x in vec] for vec in basis.vectors],
        "basis_float": basis.as_floats(),
        "simple": is_simple(phi),
    }
    _emit(doc, args.out)
    return 0


def cmd_irreducible(args) -> int:
    phi = load_interaction(_read_json(args.interaction))
    locales = parse_locales(args.locales)
    rows = []
    all_ok = True
    for loc in locales:
        rep = irreducibly_quantified_check(phi, loc, args.budget)
        all_ok = all_ok and rep.ok
        rows.append({
            "locale": rep.locale_name,
            "ok": rep.ok,
            "configs": rep.n_configs,
            "classes": rep.n_classes,
            "components": rep.n_components,
            "witness": [list(w) for w in rep.witness] if rep.witness else None,
        })
    _emit({"verified_on_family": rows, "all_ok": all_ok}, args.out)
    return 0 if all_ok else VIOLATION


def cmd_gap(args) -> int:
    phi = load_interaction(_read_json(args.interaction))
    nu = load_measure(args.measure, phi.space)
    locales = parse_locales(args.locales)
    sizes = [len(loc.vertices) for loc in locales]
    if any(loc.name[0] != "k" for loc in locales):
        raise InvalidQueryError("gap scan expects complete locales (k...)")
    rows = uniform_gap_scan(phi, nu, sizes, budget=args.budget)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["n", "status", "gap", "normalized", "running_min"])
            for r in rows:
                writer.writerow([r["n"], r["status"], r["gap"],
                                 r["normalized"], r["running_min"]])
    else:
        _emit({"rows": rows}, None)
    if args.figures:
        from .plotting import plot_gap_scan

        plot_gap_scan(rows, args.figures)
    bad = any(r["status"] != "ok" for r in rows)
    return VIOLATION if bad else 0


def cmd_verify(args) -> int:
    phi = load_interaction(_read_json(args.interaction))
    nu = load_measure(args.measure, phi.space)
    sigma = parse_locales(args.sigma)[0]
    reports = []
    lemmas = args.lemma.split(",")
    for lemma in lemmas:
        if lemma == "mpl":
            reports.append(verify_mpl(sigma, phi, nu, args.trials, args.seed))
        elif lemma == "be":
            lam = parse_locales(args.lam)[0].vertices
            reports.append(verify_boundary_estimate(lam, sigma, phi, nu,
                                                    args.trials, args.seed))
        elif lemma == "sg":
            reports.append(verify_sigma_gap_bound(sigma, phi, nu,
                                                  args.trials, args.seed))
        elif lemma == "dagger":
            lam = parse_locales(args.lam)[0].vertices
            reports.append(verify_dagger_bound(lam, sigma, phi, nu,
                                               args.trials, args.seed))
        else:
            raise InvalidQueryError(f"unknown lemma {lemma!r}")
    doc = {"reports": [{
        "name": r.name, "constants": r.constants,
        "worst_ratio": r.worst_ratio, "trials": r.trials, "passed": r.passed,
    } for r in reports]}
    _emit(doc, args.out)
    if args.figures:
        from .plotting import plot_verify

        plot_verify(reports, args.figures)
    return 0 if all(r.passed for r in reports) else VIOLATION


def cmd_expand(args) -> int:
    phi = load_interaction(_read_json(args.interaction))
    nu = load_measure(args.measure, phi.space)
    f = load_table(_read_json(args.function), phi.space)
    if args.flavor == "mu":
        pieces = expand_mu(f, nu)
    else:
        pieces = expand_base(f)
    doc = {"flavor": pieces.flavor, "pieces": [
        {"window": [list(v) for v in sorted(key)],
         "values": [float(x) for x in pieces.pieces[key].values]}
        for key in pieces.windows()
    ]}
    _emit(doc, args.out)
    return 0


def cmd_decompose(args) -> int:
    phi = load_interaction(_read_json(args.interaction))
    nu = load_measure(args.measure, phi.space)
    omega = load_invariant_form(_read_json(args.omega), phi)
    basis = conserved_basis(phi)
    if omega.d == 1 and not is_simple(phi):
        print("warning: interaction is not simple; one-dimensional "
              "uniqueness is not guaranteed", file=sys.stderr)
    if args.check_closed:
        if not varadhan.is_closed_shift_invariant(omega, phi, nu,
                                                  max_box=args.check_closed):
            raise NotClosedError("input form is not closed on the test boxes")
    result = varadhan.decompose(omega, phi, basis, args.radius, nu)
    doc = {
        "a": [[float(x) for x in row] for row in result.a],
        "residuals": [float(r) for r in result.residuals],
        "rank": result.rank,
        "n_params": result.n_params,
        "gauge": result.gauge_note,
    }
    try:
        doc["f"] = dump_table(result.f)
    except BudgetExceededError:
        doc["f_pieces"] = [
            {"window": [list(v) for v in w], "values": [float(x) for x in t.values]}
            for w, t in result.f_pieces
        ]
    _emit(doc, args.out)
    if args.figures:
        from .plotting import plot_decompose

        plot_decompose(result, args.figures)
    return 0


def cmd_psi(args) -> int:
    phi = load_interaction(_read_json(args.interaction))
    nu = load_measure(args.measure, phi.space)
    omega = load_invariant_form(_read_json(args.omega), phi)
    steps = []
    for n in range(1, args.n + 1):
        steps.append(varadhan.psi_sequence(omega, phi, nu, n, budget=args.budget))
    doc = {"steps": [{
        "n": s.n,
        "identity_residual": s.identity_residual,
        "dagger_sup_norm": s.dagger_sup_norm,
        "bound_value": s.bound_value,
        "bound_ok": s.bound_ok,
        "constants": s.constants,
    } for s in steps]}
    _emit(doc, args.out)
    if args.figures:
        from .plotting import plot_psi

        plot_psi(steps, args.figures)
    ok = all(s.bound_ok and s.identity_residual <= 1e-10 for s in steps)
    return 0 if ok else VIOLATION


def cmd_counts(args) -> int:
    ells = tuple(int(x) for x in args.ell.split(","))
    reports = [counting_report(args.d, n, ells) for n in range(1, args.n_max + 1)] \
        if args.n_max else []
    doc = {"tempered_ratio": tempered_ratio(args.d, args.n), "d": args.d, "n": args.n}
    if reports:
        doc["boxes"] = reports
    else:
        doc["box"] = counting_report(args.d, min(args.n, 50), ells)
    if args.orbit_n:
        e = ((0,) * args.d, (1,) + (0,) * (args.d - 1))
        doc["orbit"] = orbit_edge_counts(args.d, args.orbit_n, e)
    _emit(doc, args.out)
    if args.figures and reports:
        from .plotting import plot_counts

        plot_counts(reports, args.figures)
    checks = doc.get("boxes", [doc.get("box")])
    ok = all(r["check_perim1_le_boundary"] and r["check_boundary_le_deg_perim1"]
             and r["check_perim_growth"] for r in checks if r)
    return 0 if ok else VIOLATION


def cmd_check_closed(args) -> int:
    phi = load_interaction(_read_json(args.interaction))
    form = load_form_bundle(_read_json(args.form), phi)
    closed = is_closed(form, phi, tol=args.tol)
    _emit({"closed": closed}, args.out)
    return 0 if closed else VIOLATION


def cmd_solve_potential(args) -> int:
    phi = load_interaction(_read_json(args.interaction))
    form = load_form_bundle(_read_json(args.form), phi)
    pot = solve_potential(form, phi, tol=args.tol)
    _emit({"potential": dump_table(pot.table),
           "anchors": list(pot.anchors)}, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lgforms",
        description="conserved quantities, form calculus, spectral gaps and "
                    "closed-form decomposition for lattice interacting systems",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, measure=True):
        p.add_argument("--interaction", required=True, help="interaction JSON file")
        if measure:
            p.add_argument("--measure", default="uniform",
                           help="uniform | geometric:RHO | JSON file")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
        p.add_argument("--out", help="output file (default stdout)")
        p.add_argument("--figures", help="directory for rendered figures")

    p = sub.add_parser("consv", help="conserved-quantity basis and dimension")
    common(p, measure=False)
    p.set_defaults(func=cmd_consv)

    p = sub.add_parser("irreducible", help="irreducible quantification on a family")
    common(p, measure=False)
    p.add_argument("--locales", default="p2,p3,k3,box2x2")
    p.set_defaults(func=cmd_irreducible)

    p = sub.add_parser("gap", help="spectral gap scan over complete locales")
    common(p)
    p.add_argument("--locales", default="k2..k5")
    p.set_defaults(func=cmd_gap)

    p = sub.add_parser("verify", help="verify the inequality constants")
    common(p)
    p.add_argument("--lemma", required=True, help="mpl|be|sg|dagger (comma list)")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--sigma", default="p4", help="ambient locale selector")
    p.add_argument("--lam", default="p2", help="inner locale selector (be/dagger)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("expand", help="exact-support expansion of a table")
    common(p)
    p.add_argument("--function", required=True, help="function table JSON")
    p.add_argument("--flavor", choices=["mu", "base"], default="mu")
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("decompose", help="decompose a shift-invariant closed form")
    common(p)
    p.add_argument("--omega", required=True, help="per-direction window tables JSON")
    p.add_argument("--radius", type=int, required=True)
    p.add_argument("--check-closed", type=int, default=0, metavar="MAXBOX",
                   help="verify closedness on boxes up to this radius first")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("psi", help="averaged-potential sequence diagnostics")
    common(p)
    p.add_argument("--omega", required=True)
    p.add_argument("--n", type=int, default=3)
    p.set_defaults(func=cmd_psi)

    p = sub.add_parser("counts", help="lattice box counting and enlargement ratio")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--n-max", type=int, default=0,
                   help="also report boxes for radii 1..N_MAX")
    p.add_argument("--ell", default="1,2,3")
    p.add_argument("--orbit-n", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--figures")
    p.set_defaults(func=cmd_counts)

    p = sub.add_parser("check-closed", help="closedness of a finite form bundle")
    common(p, measure=False)
    p.add_argument("--form", required=True, help="form bundle JSON")
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_check_closed)

    p = sub.add_parser("solve-potential", help="potential of a closed finite form")
    common(p, measure=False)
    p.add_argument("--form", required=True, help="form bundle JSON")
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_solve_potential)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BudgetExceededError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return BUDGET_ERROR
    except (NotClosedError,) as exc:
        print(f"violation: {exc}", file=sys.stderr)
        return VIOLATION
    except (InvalidQueryError, FileNotFoundError, KeyError, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except LgformsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return VIOLATION


if __name__ == "__main__":
    sys.exit(main())
