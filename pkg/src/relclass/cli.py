"""Batch front-end: corpus ingestion, invariant suites, bound tables.

Corpus lines are "n,m,delta_a,delta_b[,hK,t]" with delta = delta_a +
delta_b * omega; '#' comments.  Reports are byte-deterministic: sorted keys,
fixed-precision floats, rows emitted in input order.

Exit codes: 0 success, 1 inequality/lemma violation, 2 input error,
3 budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction

import mpmath

from . import bounds as bnd
from . import dseries, forms, hecke
from .cm import class_counts, class_group_K, make_cm
from .errors import (
    AssumptionViolated,
    InequalityViolated,
    LemmaViolation,
    NonSquarefree,
    ParityFails,
    RelclassError,
    SearchBudgetExceeded,
)
from .field import make_field

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_INPUT = 2
EXIT_BUDGET = 3


def _fmt(x):
    if isinstance(x, float):
        return f"{x:.12g}"
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    return x


def _emit(data, args) -> str:
    if getattr(args, "csv", False):
        buf = io.StringIO()
        rows = data if isinstance(data, list) else [data]
        keys = sorted({k for r in rows for k in r})
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(keys)
        for r in rows:
            w.writerow([_fmt(r.get(k, "")) for k in keys])
        return buf.getvalue()
    return json.dumps(data, sort_keys=True, default=_fmt, indent=1) + "\n"


class CorpusEntry:
    def __init__(self, line: str, lineno: int):
        parts = [p.strip() for p in line.split(",")]
        if len(parts) not in (4, 5, 6):
            raise ValueError(f"line {lineno}: expected 4-6 fields, got {len(parts)}")
        self.n = int(parts[0])
        self.m = int(parts[1]) if parts[1] not in ("", "-") else None
        self.delta_a = int(parts[2])
        self.delta_b = int(parts[3])
        self.expected_hK = int(parts[4]) if len(parts) > 4 and parts[4] != "" else None
        self.expected_t = int(parts[5]) if len(parts) > 5 and parts[5] != "" else None
        self.lineno = lineno

    def field(self):
        return make_field(self.n, self.m)

    def cm(self):
        F = self.field()
        return make_cm(F, F.elem(self.delta_a, self.delta_b))

    def label(self) -> str:
        if self.n == 1:
            return f"Q(sqrt({self.delta_a}))"
        return f"Q(sqrt{self.m})(sqrt({self.delta_a}+{self.delta_b}w))"


def load_corpus(path: str) -> list[CorpusEntry]:
    out = []
    with open(path) as fh:
        for i, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            out.append(CorpusEntry(line, i))
    return out


def cmd_field(args) -> int:
    try:
        F = make_field(args.n, args.m)
    except NonSquarefree as exc:
        sys.stderr.write(f"NonSquarefree: {exc}\n")
        return EXIT_INPUT
    data = json.loads(F.to_json())
    data["regulator"] = F.regulator
    data["class_reps"] = len(F.class_reps)
    sys.stdout.write(_emit(data, args))
    return EXIT_OK


def cmd_classify(args) -> int:
    try:
        F = make_field(args.n, args.m)
        K = make_cm(F, F.elem(args.delta_a, args.delta_b))
    except (NonSquarefree, RelclassError) as exc:
        sys.stderr.write(f"{type(exc).__name__}: {exc}\n")
        return EXIT_INPUT
    h_K, reps, orbits, h, hp = class_group_K(K)
    strong, weak = forms.classify(K)
    decorated = []
    for Q in weak:
        decorated.append(
            (
                Q.norm_ideal().norm(),
                (Q.a.a, Q.a.b, Q.b.a, Q.b.b, Q.c.a, Q.c.b),
                {
                    "a": str(Q.a),
                    "b": str(Q.b),
                    "c": str(Q.c),
                    "norm_ideal": _fmt(Q.norm_ideal().norm()),
                    "disc_ideal": _fmt(Q.disc_ideal().norm()),
                },
            )
        )
    decorated.sort(key=lambda t: (t[0], t[1]))
    entries = [t[2] for t in decorated]
    data = {
        "field": K.F.to_json(),
        "reldisc": K.rel_disc_norm,
        "h_K": h_K,
        "h": h,
        "weak_classes": len(weak),
        "strong_refinements": len(strong),
        "orbits": orbits,
        "bijection_ok": len(weak) == orbits and len(weak) <= h_K <= 2 * len(weak),
        "unit_equal": K.unit_equal,
        "classes": entries,
    }
    sys.stdout.write(_emit(data, args))
    return EXIT_OK if data["bijection_ok"] else EXIT_VIOLATION


ALL_CHECKS = ("regression", "genus", "vsum", "lemma41", "normcounts", "measures")


def cmd_verify(args) -> int:
    try:
        corpus = load_corpus(args.corpus)
    except (OSError, ValueError) as exc:
        sys.stderr.write(f"corpus error: {exc}\n")
        return EXIT_INPUT
    checks = tuple(args.checks.split(",")) if args.checks else ALL_CHECKS
    bad = [c for c in checks if c not in ALL_CHECKS]
    if bad:
        sys.stderr.write(f"unknown checks: {bad}\n")
        return EXIT_INPUT
    dseries.MAX_TRUNCATION = args.X
    lat_cache: dict = {}
    rows = []
    worst = EXIT_OK
    for entry in corpus:
        row = {"entry": entry.label(), "line": entry.lineno}
        try:
            K = entry.cm()
            K.budget = args.budget
            K.F.unit_budget = args.budget
            row["reldisc"] = K.rel_disc_norm
            row["unit_equal"] = K.unit_equal
            h_K, orbits = class_counts(K)
            row["h_K"] = h_K
            row["orbits"] = orbits
            if "regression" in checks and entry.expected_hK is not None:
                if entry.expected_hK != h_K:
                    raise InequalityViolated(
                        f"expected h_K = {entry.expected_hK}, computed {h_K}"
                    )
                row["regression"] = "ok"
            if "genus" in checks and K.unit_equal:
                t, bound = forms.lower_bound_t(K)
                if entry.expected_t is not None and entry.expected_t != t:
                    raise InequalityViolated(f"expected t = {entry.expected_t}, computed {t}")
                row["genus"] = f"2^{t - 1}<={h_K}"
            if "vsum" in checks and K.unit_equal:
                rep = dseries.vsum_check(K)
                row["vsum"] = f"{rep['partial_sum']}<={rep['h']}"
            if "lemma41" in checks and K.unit_equal and K.rel_disc_norm > 4**K.F.n:
                bp = bnd.bound_params(K)
                row["lemma41"] = f"V={bp.V:.4g},U={bp.U:.4g},R={bp.R}"
            if "normcounts" in checks and K.unit_equal:
                F = K.F
                if F not in lat_cache:
                    lat_cache[F] = bnd.lattice_constants(F)
                lat = lat_cache[F]
                cd = K.class_data()
                bnd.norm_count_check_K(K, cd.N_reps[0], Fraction(5), lat)
                bnd.norm_count_check_F(F, F.unit_ideal(), Fraction(7), lat)
                row["normcounts"] = "ok"
            if "measures" in checks and K.unit_equal:
                F = K.F
                if F not in lat_cache:
                    lat_cache[F] = bnd.lattice_constants(F)
                lat = lat_cache[F]
                dseries.measure_compare(
                    K, [2.0, 5.0, 10.0], lat.A1.hi, lat.A2.hi
                )
                row["measures"] = "ok"
            row["status"] = "ok"
        except (InequalityViolated, LemmaViolation, bnd.BoundViolated) as exc:
            row["status"] = f"VIOLATION: {exc}"
            worst = max(worst, EXIT_VIOLATION)
        except SearchBudgetExceeded as exc:
            row["status"] = f"BUDGET: {exc}"
            worst = max(worst, EXIT_BUDGET)
        except AssumptionViolated as exc:
            row["status"] = f"skipped: {exc}"
        rows.append(row)
    summary = {
        "entries": len(rows),
        "checks": ",".join(checks),
        "violations": sum(1 for r in rows if str(r.get("status", "")).startswith("VIOLATION")),
    }
    sys.stdout.write(_emit(rows if args.csv else {"summary": summary, "rows": rows}, args))
    return worst


def _load_injected(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def cmd_bound(args) -> int:
    try:
        corpus = load_corpus(args.corpus)
    except (OSError, ValueError) as exc:
        sys.stderr.write(f"corpus error: {exc}\n")
        return EXIT_INPUT
    strategy = args.strategy
    injected = None
    if strategy.startswith("injected:"):
        injected = _load_injected(strategy.split(":", 1)[1])
        strategy = "injected"
    grid = [float(x) for x in args.lambda_grid.split(",")] if args.lambda_grid else None
    bundles: dict = {}
    rows = []
    worst = EXIT_OK
    for entry in corpus:
        row = {"entry": entry.label(), "line": entry.lineno}
        try:
            K = entry.cm()
            K.budget = args.budget
            F = K.F
            if not bnd.parity_applicable(F):
                raise ParityFails("the 37-splitting parity condition fails for this base field")
            if F not in bundles:
                base = hecke.gz_table(args.pmax)
                eps, _ = hecke.epsilon_numeric(base)
                base.eps_sign = eps
                Q = make_field(1)
                chi0 = hecke.QuadChar(make_cm(Q, -139))
                if F.n == 1:
                    f_table = hecke.twist_table(base, chi0)
                    f_table.eps_sign = hecke.epsilon_factor(base, chi0, eps)
                else:
                    bc = hecke.base_change_table(base, F)
                    chiF = hecke.QuadChar(make_cm(F, F.elem(-139)))
                    f_table = hecke.twist_table(bc, chiF)
                bundles[F] = bnd.make_bundle(
                    F, f_table, strategy, injected, lambda_grid=grid, prime_cap=min(300, args.pmax)
                )
            bundle = bundles[F]
            fc = bnd.final_C(bundle)
            fb = bnd.final_bound(K, bundle, C=fc["C"])
            t, genus_bound = forms.lower_bound_t(K)
            vs = dseries.vsum_check(K)
            row.update(
                {
                    "reldisc": K.rel_disc_norm,
                    "t": t,
                    "h_K": fb["h_K"],
                    "genus_bound": genus_bound,
                    "vsum_ok": vs["ok"],
                    "bound": _fmt(fb["bound"]),
                    "branch_split": _fmt(fb["branch_split"]),
                    "branch_main": _fmt(fb["branch_main"]),
                    "C": _fmt(fb["C"]),
                    "lambda": _fmt(float(fc["lambda"])),
                    "slack": _fmt(fb["slack"]),
                    "rigor_G1": bundle.rigor["G1"],
                    "status": "ok",
                }
            )
        except ParityFails as exc:
            row["status"] = f"ParityFails: {exc}"
        except AssumptionViolated as exc:
            row["status"] = f"skipped: {exc}"
        except bnd.NoFeasibleLambda as exc:
            row["status"] = f"NoFeasibleLambda: {exc}"
        except (InequalityViolated, LemmaViolation, bnd.BoundViolated) as exc:
            row["status"] = f"VIOLATION: {exc}"
            worst = max(worst, EXIT_VIOLATION)
        except SearchBudgetExceeded as exc:
            row["status"] = f"BUDGET: {exc}"
            worst = max(worst, EXIT_BUDGET)
        rows.append(row)
    sys.stdout.write(_emit(rows, args))
    return worst


def main(argv=None) -> int:
    bits = int(os.environ.get("RELCLASS_PRECISION_BITS", "128"))
    mpmath.mp.prec = bits
    ap = argparse.ArgumentParser(prog="relclass", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p_field = sub.add_parser("field", help="base field report")
    p_field.add_argument("--n", type=int, required=True)
    p_field.add_argument("--m", type=int, default=None)

    p_cls = sub.add_parser("classify", help="form classes of one extension")
    p_cls.add_argument("--n", type=int, required=True)
    p_cls.add_argument("--m", type=int, default=None)
    p_cls.add_argument("--delta-a", dest="delta_a", type=int, required=True)
    p_cls.add_argument("--delta-b", dest="delta_b", type=int, default=0)

    p_ver = sub.add_parser("verify", help="invariant suites over a corpus")
    p_ver.add_argument("--corpus", required=True)
    p_ver.add_argument("--checks", default=None, help=",".join(ALL_CHECKS))

    p_bnd = sub.add_parser("bound", help="per-extension bound table")
    p_bnd.add_argument("--corpus", required=True)
    p_bnd.add_argument("--strategy", default="heuristic")
    p_bnd.add_argument("--lambda-grid", dest="lambda_grid", default=None)

    for p in (p_field, p_cls, p_ver, p_bnd):
        p.add_argument("--json", action="store_true", default=True)
        p.add_argument("--csv", action="store_true", default=False)
        p.add_argument("--X", type=int, default=10**4)
        p.add_argument("--pmax", type=int, default=2000)
        p.add_argument("--budget", type=int, default=10**6)
        p.add_argument("--seed", type=int, default=20260808)

    args = ap.parse_args(argv)
    if args.command == "field":
        return cmd_field(args)
    if args.command == "classify":
        return cmd_classify(args)
    if args.command == "verify":
        return cmd_verify(args)
    if args.command == "bound":
        return cmd_bound(args)
    return EXIT_INPUT  # pragma: no cover


if __name__ == "__main__":
    raise SystemExit(main())
