"""Command-line front end (``ctk``).

Exit codes: 0 success, 1 a demo value missed its expectation, 2 unreadable
or malformed input, 3 an invariant failed, 4 an unknown name, 5 a malformed
expression or overlapping variable lists.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Callable, Sequence

import numpy as np

from . import diagram as dg
from . import files
from .errors import (
    CausalTheoryError,
    ExpressionError,
    FileFormatError,
    InvariantError,
    NameLookupError,
)
from .model import (
    check_compatibility,
    classify_morphism,
    evaluate,
    evaluate_rel,
    joint_prior,
    marginal_prior,
    validate_morphism,
)
from .stoch import TOL, JointDistribution, conditional_from_joint, marginalize
from .structure import CausalStructure

EXIT_OK = 0
EXIT_EXPECTATION = 1
EXIT_IO = 2
EXIT_INVARIANT = 3
EXIT_NAME = 4
EXIT_EXPRESSION = 5


def exit_code(exc: BaseException) -> int:
    if isinstance(exc, FileFormatError):
        return EXIT_IO
    if isinstance(exc, NameLookupError):
        return EXIT_NAME
    if isinstance(exc, ExpressionError):
        return EXIT_EXPRESSION
    return EXIT_INVARIANT


def tolerance() -> float:
    """Comparison tolerance; ``CTK_TOLERANCE`` overrides the default."""
    raw = os.environ.get("CTK_TOLERANCE")
    if not raw:
        return TOL
    try:
        return float(raw)
    except ValueError:
        raise FileFormatError(f"CTK_TOLERANCE={raw!r} is not a number") from None


def _names(values: Sequence[str] | None) -> list[str]:
    out: list[str] = []
    for v in values or ():
        out += [x for x in v.replace(",", " ").split() if x]
    return out


def _resolve(G: CausalStructure, names: Sequence[str]) -> list[int]:
    return [G.index(n) for n in names]


# -- commands -----------------------------------------------------------------------


def cmd_validate(args, out) -> int:
    G = files.load_structure(args.structure)
    order = ",".join(G.names[v] for v in G.ancestral_ordering())
    print(f"valid; order {order}", file=out)
    print(f"{len(G)} variables, {len(G.arrows)} arrows", file=out)
    for v in G.vertices:
        pa = ",".join(G.names[p] for p in G.parents(v)) or "-"
        print(f"  {G.names[v]}: parents {pa}", file=out)
    if args.model:
        m = files.load_model(args.model)
        if m.structure != G:
            raise InvariantError(f"model {args.model} is over a different structure")
        print(f"model valid; outcome spaces {', '.join(f'{s.name}:{s.size}' for s in m.spaces)}", file=out)
    return EXIT_OK


def cmd_dsep(args, out) -> int:
    G = files.load_structure(args.structure)
    U, T, S = (_resolve(G, _names(x)) for x in (args.x, args.y, args.given))
    sep = G.d_separated(U, T, S)
    given = ",".join(G.names[s] for s in S) or "{}"
    lhs = ",".join(G.names[u] for u in U)
    rhs = ",".join(G.names[t] for t in T)
    print(f"{lhs} and {rhs} given {given}: {'separated' if sep else 'not separated'}", file=out)
    if not sep and args.path:
        path = G.unblocked_path(U, T, S)
        print("unblocked path: " + G.describe_path(path), file=out)
    return EXIT_OK


def cmd_conditional(args, out) -> int:
    m = files.load_model(args.model)
    G = m.structure
    targets = _resolve(G, _names(args.targets))
    given = _resolve(G, _names(args.given))
    if set(targets) & set(given):
        raise ExpressionError("targets and givens overlap")
    if not targets:
        raise ExpressionError("no target variables")
    if args.source == "diagram":
        K = evaluate(dg.causal_conditional(G, given, targets), m)
        label = f"[{' '.join(G.names[v] for v in sorted(targets))} || {' '.join(G.names[v] for v in sorted(given))}]"
    else:
        K = conditional_from_joint(joint_prior(m), targets, given)
        label = f"P({','.join(G.names[v] for v in sorted(targets))} | {','.join(G.names[v] for v in sorted(given))})"
    print(label, file=out)
    print(files.format_matrix(K), file=out)
    if K.zero_mass_columns:
        print(f"note: columns {list(K.zero_mass_columns)} have zero mass and were filled uniformly", file=out)
    return EXIT_OK


def _load_joint_or_model(path) -> JointDistribution:
    d = files.read_json(path)
    if isinstance(d, dict) and "mechanisms" in d:
        return joint_prior(files.load_model(path))
    return files.joint_from_dict(d, str(path))


def cmd_check_compat(args, out) -> int:
    G = files.load_structure(args.structure)
    P = _load_joint_or_model(args.data)
    verdict = check_compatibility(G, P, tolerance())
    if verdict:
        print("compatible", file=out)
        for name, K in verdict.conditionals.items():
            print(f"P({name} | {','.join(s.name for s in K.dom) or '-'})", file=out)
            print(files.format_matrix(K), file=out)
    else:
        print("incompatible", file=out)
        print(f"offending outcome ({','.join(verdict.offending)}): joint {verdict.joint_value:.6f} "
              f"vs product of conditionals {verdict.product_value:.6f}", file=out)
    return EXIT_OK


def cmd_check_morphism(args, out) -> int:
    phi = files.load_morphism(args.morphism)
    verdict = validate_morphism(phi, tolerance())
    if not verdict:
        print("invalid", file=out)
        print(f"failing at {verdict.variable}: {verdict.reason} (max deviation {verdict.residual:.6g})", file=out)
        return EXIT_OK
    c = classify_morphism(phi, tolerance())
    print(f"valid; {c.kind}", file=out)
    for s_src, s_mid, s_tgt in zip(phi.source.spaces, c.intermediate.spaces, phi.target.spaces):
        print(f"  {s_src.name}: {list(s_src.outcomes)} -> {list(s_mid.outcomes)} -> {list(s_tgt.outcomes)}", file=out)
    return EXIT_OK


def cmd_render(args, out) -> int:
    G = files.load_structure(args.file)
    d = files.parse_expression(G, args.expression)
    out.write(dg.to_dot(d, G, title=args.expression.strip()))
    return EXIT_OK


# -- demos --------------------------------------------------------------------------------


class _Report:
    def __init__(self, out, tol: float):
        self.out = out
        self.tol = tol
        self.failed = 0

    def check(self, label: str, got, expected) -> None:
        got = np.asarray(got, dtype=float)
        expected = np.asarray(expected, dtype=float)
        ok = got.shape == expected.shape and bool(np.all(np.abs(got - expected) <= self.tol))
        self.failed += not ok
        print(f"[{'PASS' if ok else 'FAIL'}] {label}", file=self.out)
        print("    got      " + np.array2string(got, precision=6, floatmode="fixed").replace("\n", "\n" + " " * 13),
              file=self.out)
        if not ok:
            print("    expected " + np.array2string(expected, precision=6, floatmode="fixed"), file=self.out)

    def flag(self, label: str, ok: bool) -> None:
        self.failed += not ok
        print(f"[{'PASS' if ok else 'FAIL'}] {label}", file=self.out)


FOOD_JOINT = [0.24, 0.0, 0.18, 0.18, 0.06, 0.10, 0.0, 0.24]
FOOD_C_GIVEN_AB = [[1, 0.5, 0.375, 0], [0, 0.5, 0.625, 1]]
FOOD_AB_GIVEN_c = [0.5, 0.375, 0.125, 0]
MEDIATOR_R_GIVEN_T = [[0.39, 0.42], [0.61, 0.58]]
NULLIFIED_R_GIVEN_T = [[0.51, 0.34], [0.49, 0.66]]


def nullified_diagram(G: CausalStructure) -> dg.Diagram:
    """Treatment enters R directly; B's port gets [B|T] applied to a fresh prior on T."""
    T, B, R = (G.index(n) for n in "TBR")
    fed_b = dg.seq(dg.mechanism(G, T), dg.mechanism(G, B))
    return dg.seq(dg.par(dg.identity(T), fed_b), dg.mechanism(G, R))


def _demo_food(rep: _Report) -> None:
    m = files.load_model(files.data_path("food_model.json"))
    G = m.structure
    P = joint_prior(m)
    rep.check("joint prior P(A,B,C)", P.values, FOOD_JOINT)
    rep.check("P_A", marginal_prior(m, ["A"]).values, [0.6, 0.4])
    rep.check("P_B", marginal_prior(m, ["B"]).values, [0.4, 0.6])
    rep.check("P_AB", marginal_prior(m, ["A", "B"]).values, [0.24, 0.36, 0.16, 0.24])
    rep.check("P_A (x) P_B", np.kron(marginalize(P, ["A"]).values, marginalize(P, ["B"]).values),
              [0.24, 0.36, 0.16, 0.24])
    rep.check("P_C|AB from the joint", conditional_from_joint(P, ["C"], ["A", "B"]).data, FOOD_C_GIVEN_AB)
    rep.check("P_AB|C at c", conditional_from_joint(P, ["A", "B"], ["C"]).data[:, 0], FOOD_AB_GIVEN_c)
    rep.flag("A,B compatible with A -> C <- B", bool(check_compatibility(G, P, rep.tol)))
    rep.flag("A and B d-separated given {}", G.d_separated(["A"], ["B"], []))
    rep.flag("A and B not d-separated given C", not G.d_separated(["A"], ["B"], ["C"]))
    supp = evaluate_rel(dg.prior(G, G.vertices), m.support_model()).data[:, 0]
    rep.check("possible outcomes (support of the joint)", supp, np.asarray(FOOD_JOINT) > 0)


def _demo_mediator(rep: _Report) -> None:
    m = files.load_model(files.data_path("simpson_mediator.json"))
    G = m.structure
    rep.check("[R||T] under T -> B -> R, T -> R", evaluate(dg.causal_conditional(G, ["T"], ["R"]), m).data,
              MEDIATOR_R_GIVEN_T)
    rep.check("nullified diagram (B fed by [B|T] . [T])", evaluate(nullified_diagram(G), m).data,
              NULLIFIED_R_GIVEN_T)


def _demo_confounder(rep: _Report) -> None:
    m = files.load_model(files.data_path("simpson_confounder.json"))
    G = m.structure
    rep.check("[R||T] under B -> T, B -> R, T -> R", evaluate(dg.causal_conditional(G, ["T"], ["R"]), m).data,
              NULLIFIED_R_GIVEN_T)


DEMOS: dict[str, Callable[[_Report], None]] = {
    "food": _demo_food,
    "simpson-mediator": _demo_mediator,
    "simpson-confounder": _demo_confounder,
}


def cmd_demo(args, out) -> int:
    rep = _Report(out, tolerance())
    print(f"demo {args.name} (tolerance {rep.tol:g})", file=out)
    DEMOS[args.name](rep)
    print(f"{'all checks passed' if not rep.failed else f'{rep.failed} check(s) failed'}", file=out)
    return EXIT_EXPECTATION if rep.failed else EXIT_OK


# -- entry point ------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ctk", description="Causal theories toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", help="validate a structure file (and optionally a model file)")
    s.add_argument("structure")
    s.add_argument("--model")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("dsep", help="test d-separation")
    s.add_argument("structure")
    s.add_argument("-x", "--from", dest="x", nargs="+", required=True, help="first variable set")
    s.add_argument("-y", "--to", dest="y", nargs="+", required=True, help="second variable set")
    s.add_argument("-g", "--given", nargs="*", default=[], help="conditioning set")
    s.add_argument("--path", action="store_true", help="print an unblocked path when not separated")
    s.set_defaults(func=cmd_dsep)

    s = sub.add_parser("conditional", help="print a conditional as a matrix")
    s.add_argument("model")
    s.add_argument("-t", "--targets", nargs="+", required=True)
    s.add_argument("-g", "--given", nargs="*", default=[])
    s.add_argument("--source", choices=("diagram", "joint"), default="diagram")
    s.set_defaults(func=cmd_conditional)

    s = sub.add_parser("check-compat", help="check a joint (or a model's prior) against a structure")
    s.add_argument("structure")
    s.add_argument("data", help="joint distribution file or model file")
    s.set_defaults(func=cmd_check_compat)

    s = sub.add_parser("check-morphism", help="validate and classify a morphism of models")
    s.add_argument("morphism")
    s.set_defaults(func=cmd_check_morphism)

    s = sub.add_parser("render", help="emit a causal conditional as Graphviz DOT")
    s.add_argument("file", help="structure or model file")
    s.add_argument("expression", help="e.g. '[D E || B]', '[A B]' or 'id[A]'")
    s.set_defaults(func=cmd_render)

    s = sub.add_parser("demo", help="run a bundled worked example")
    s.add_argument("name", choices=sorted(DEMOS))
    s.set_defaults(func=cmd_demo)
    return p


def main(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_IO if e.code else EXIT_OK
    try:
        return args.func(args, out)
    except CausalTheoryError as e:
        print(f"error: {e}", file=err)
        return exit_code(e)


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
