"""Command-line interface.

Exit codes: 0 success, 2 invalid input or failed validation, 3 error target
not met.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import io
from .decompose import NotHermitianError
from .dilation import (NotUnitaryError, LeakageError, analytic_evolution, compile_dilation,
                       certify, dilate)
from .models import qtm, symrep, walk
from .sparse import DimensionError, distance, random_sparse_unitary, to_dense
from .trotter import TrotterCapError, dense_evolution, load_manifest, save_manifest, trotterize

EXIT_OK, EXIT_INVALID, EXIT_UNMET = 0, 2, 3


class CLIError(Exception):
    def __init__(self, message, code=EXIT_INVALID):
        super().__init__(message)
        self.code = code


@dataclass
class RunManifest:
    command: str
    inputs: dict = field(default_factory=dict)
    parameters: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    certified_error: float | None = None
    wall_time: float | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        return cls(**json.loads(text))


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise CLIError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise CLIError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def _read_mtx(path):
    try:
        return io.read_matrix_market(path)
    except OSError as exc:
        raise CLIError(f"cannot read {path}: {exc.strerror}") from None


def cmd_random_unitary(args, run):
    u = random_sparse_unitary(args.n, args.d, args.seed)
    io.write_matrix_market(u, args.out)
    run.parameters.update(n=args.n, d=args.d, seed=args.seed)
    run.outputs["matrix"] = args.out
    print(f"wrote {args.n}x{args.n} unitary with sparsity {u.sparsity} to {args.out}")


def cmd_dilate(args, run):
    d = dilate(_read_mtx(args.input))
    io.write_matrix_market(d.h, args.output)
    run.inputs["matrix"] = args.input
    run.outputs["dilation"] = args.output
    print(f"wrote {d.dim}x{d.dim} dilation (involutory={d.involutory}) to {args.output}")


def cmd_evolve(args, run):
    h = _read_mtx(args.h)
    f = trotterize(h, args.t, args.epsilon, args.order)
    run.inputs["h"] = args.h
    run.parameters.update(t=args.t, epsilon=args.epsilon, order=args.order)
    run.certified_error = f.certified_error
    run.outputs["manifest"] = args.out
    extra = {"command": "evolve", "inputs": run.inputs, "parameters": run.parameters}
    save_manifest(f, args.out, extra=extra)
    print(f"r={f.r} order={f.order} factors={len(f)} certified_error={_fmt(f.certified_error)}")
    if f.certified_error is not None and f.certified_error > args.epsilon:
        raise CLIError(f"certified error {f.certified_error:.3e} exceeds epsilon", EXIT_UNMET)


def cmd_implement(args, run):
    u = _read_mtx(args.u)
    psi = io.read_state(args.state)
    circuit = compile_dilation(u, args.method, args.epsilon, args.order)
    out = circuit.apply(psi, keep_phase=args.keep_phase)
    err = certify(circuit)
    run.inputs.update(u=args.u, state=args.state)
    run.parameters.update(method=args.method, epsilon=args.epsilon, order=args.order,
                          keep_phase=args.keep_phase)
    run.certified_error = err
    if args.out:
        io.write_state(out, args.out)
        run.outputs["state"] = args.out
    else:
        print(json.dumps(io.state_to_json(out)))
    print(f"certified_error={_fmt(err)}", file=sys.stderr)
    if args.method == "trotter" and err > args.epsilon:
        raise CLIError(f"certified error {err:.3e} exceeds epsilon {args.epsilon:g}", EXIT_UNMET)


def cmd_verify(args, run):
    u = _read_mtx(args.u)
    f = load_manifest(args.factors)
    d = dilate(u)
    if f.dim != d.dim:
        raise CLIError(f"{args.factors}: dimension {f.dim} does not match dilation of {args.u} "
                       f"({d.dim})")
    target = analytic_evolution(d, f.target_t) if d.involutory else dense_evolution(d.h, f.target_t)
    err = distance(f.to_dense(), target, phase_invariant=args.phase_invariant)
    eps = args.epsilon if args.epsilon is not None else f.epsilon
    run.inputs.update(u=args.u, factors=args.factors)
    run.parameters.update(phase_invariant=args.phase_invariant, epsilon=eps)
    run.certified_error = err
    print(f"certified_error={_fmt(err)}")
    if eps is not None and err > eps:
        raise CLIError(f"certified error {err:.3e} exceeds epsilon {eps:g}", EXIT_UNMET)


def _parse_tape(text, rule):
    if not text:
        return ()
    by_name = {str(s): s for s in rule.alphabet}
    out = []
    for tok in text.split(","):
        if tok.strip() not in by_name:
            raise CLIError(f"tape symbol {tok!r} not in alphabet {list(rule.alphabet)}")
        out.append(by_name[tok.strip()])
    return tuple(out)


def _load_rule(path):
    try:
        rule = qtm.TransitionRule.from_json(_read_json(path))
        rule.check_normalized()
    except qtm.RuleError as exc:
        raise CLIError(f"{path}: {exc}") from None
    return rule


def cmd_qtm_run(args, run):
    rule = _load_rule(args.rule)
    radius = args.radius if args.radius is not None else args.steps + 1
    tape = _parse_tape(args.tape, rule)
    v = qtm.qtm_run(rule, tape, args.state, args.steps, radius, args.method, args.epsilon)
    bound = qtm.qtm_step_bound(radius)
    run.inputs["rule"] = args.rule
    run.parameters.update(steps=args.steps, radius=radius, method=args.method,
                          epsilon=args.epsilon, tape=list(map(str, tape)))
    codec = qtm.TruncatedQTM(rule, radius)
    configs = [
        {"index": int(i), "head": codec.decode(i)[0], "state": codec.decode(i)[1],
         "tape": list(codec.decode(i)[2]), "amp": [float(v[i].real), float(v[i].imag)]}
        for i in np.flatnonzero(np.abs(v) > 1e-14)
    ]
    result = {"dim": codec.dim, "norm": float(np.linalg.norm(v)),
              "step_bound": bound, "configurations": configs}
    if args.out:
        _write_json(args.out, result)
        run.outputs["state"] = args.out
    else:
        print(json.dumps(result, sort_keys=True))


def cmd_qtm_validate(args, run):
    rule = _load_rule(args.rule)
    rep = qtm.qtm_validate(rule, args.probe_radius)
    run.inputs["rule"] = args.rule
    print(f"interior_defect={rep.interior_defect:.3e} boundary_defect={rep.boundary_defect:.3e}")
    if not rep.interior_unitary:
        raise CLIError(f"{args.rule}: interior columns not orthonormal "
                       f"(defect {rep.interior_defect:.3e})")


def cmd_walk_run(args, run):
    try:
        cfg = walk.load_walk_config(args.config)
    except OSError as exc:
        raise CLIError(f"cannot read {args.config}: {exc.strerror}") from None
    n = cfg["n"]
    v0 = walk.start_state(n, cfg["x"], cfg["coin"])
    res = walk.walk_run(n, v0, cfg["steps"], args.method, args.epsilon)
    run.inputs["config"] = args.config
    run.parameters.update(method=args.method, epsilon=args.epsilon, **cfg)
    if args.format == "csv":
        text = "site,probability\n" + "".join(f"{x},{float(p)!r}\n" for x, p in enumerate(res.distribution))
    else:
        text = json.dumps({"n": n, "steps": cfg["steps"],
                           "distribution": [float(p) for p in res.distribution]}) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        run.outputs["distribution"] = args.out
    else:
        sys.stdout.write(text)


def cmd_symrep(args, run):
    try:
        lam = symrep.check_partition(int(x) for x in args.partition.split(","))
    except ValueError as exc:
        raise CLIError(f"--partition {args.partition!r}: {exc}") from None
    n = sum(lam)
    run.parameters.update(partition=list(lam), generator=args.generator, check=args.check)
    if args.generator is not None:
        if not 1 <= args.generator < n:
            raise CLIError(f"--generator {args.generator} out of range 1..{n - 1}")
        g = symrep.symrep_generator(lam, args.generator)
        if args.out:
            io.write_matrix_market(g, args.out)
            run.outputs["generator"] = args.out
        else:
            print(np.array2string(to_dense(g).real, precision=6, suppress_small=True))
    basis = symrep.standard_tableaux(lam)
    print(f"dim={len(basis)} basis(last-letter order)={[list(map(list, t)) for t in basis]}")
    if args.check:
        rep = symrep.symrep_check(lam)
        for name, j, k, res in rep.failures:
            print(f"FAIL {name} j={j} k={k} residual={res:.3e}")
        if not rep.ok:
            raise CLIError(f"representation relations failed for partition {list(lam)}")
        print("relations ok")


def _fmt(x):
    return "n/a" if x is None else f"{x:.6e}"


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sparse-unitary", description=__doc__.splitlines()[0])
    p.add_argument("--manifest", help="write a JSON run manifest to this path")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("random-unitary", help="generate a random sparse unitary")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_random_unitary)

    s = sub.add_parser("dilate", help="write the Hermitian dilation of a matrix")
    s.add_argument("input")
    s.add_argument("output")
    s.set_defaults(func=cmd_dilate)

    s = sub.add_parser("evolve", help="product-formula factors for exp(-i h t)")
    s.add_argument("--h", required=True)
    s.add_argument("--t", type=float, default=math.pi / 2)
    s.add_argument("--epsilon", type=float, required=True)
    s.add_argument("--order", type=int, choices=(1, 2), default=2)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_evolve)

    s = sub.add_parser("implement", help="apply a unitary to a state through its dilation")
    s.add_argument("--u", required=True)
    s.add_argument("--state", required=True)
    s.add_argument("--method", choices=("analytic", "trotter", "exact"), default="trotter")
    s.add_argument("--epsilon", type=float, default=1e-3)
    s.add_argument("--order", type=int, choices=(1, 2), default=2)
    s.add_argument("--keep-phase", action="store_true")
    s.add_argument("--out")
    s.set_defaults(func=cmd_implement)

    s = sub.add_parser("verify", help="certify factors against the exact dilation evolution")
    s.add_argument("--u", required=True)
    s.add_argument("--factors", required=True)
    s.add_argument("--phase-invariant", action="store_true")
    s.add_argument("--epsilon", type=float)
    s.set_defaults(func=cmd_verify)

    q = sub.add_parser("qtm", help="quantum Turing machine tools").add_subparsers(
        dest="qtm_command", required=True)
    s = q.add_parser("run")
    s.add_argument("--rule", required=True)
    s.add_argument("--steps", type=int, required=True)
    s.add_argument("--radius", type=int)
    s.add_argument("--method", choices=("direct", "dilation"), default="direct")
    s.add_argument("--epsilon", type=float, default=1e-4)
    s.add_argument("--tape", default="")
    s.add_argument("--state")
    s.add_argument("--out")
    s.set_defaults(func=cmd_qtm_run)
    s = q.add_parser("validate")
    s.add_argument("--rule", required=True)
    s.add_argument("--probe-radius", type=int, default=2)
    s.set_defaults(func=cmd_qtm_validate)

    w = sub.add_parser("walk", help="coined quantum walk").add_subparsers(
        dest="walk_command", required=True)
    s = w.add_parser("run")
    s.add_argument("--config", required=True)
    s.add_argument("--method", choices=("direct", "dilation"), default="direct")
    s.add_argument("--epsilon", type=float, default=1e-4)
    s.add_argument("--format", choices=("json", "csv"), default="json")
    s.add_argument("--out")
    s.set_defaults(func=cmd_walk_run)

    s = sub.add_parser("symrep", help="Young orthogonal form generators")
    s.add_argument("--partition", required=True)
    s.add_argument("--generator", type=int)
    s.add_argument("--check", action="store_true")
    s.add_argument("--out")
    s.set_defaults(func=cmd_symrep)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    name = args.command
    for sub in ("qtm_command", "walk_command"):
        if getattr(args, sub, None):
            name += " " + getattr(args, sub)
    run = RunManifest(name)
    start = time.perf_counter()
    code = EXIT_OK
    try:
        args.func(args, run)
    except CLIError as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = exc.code
    except TrotterCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_UNMET
    except (io.FormatError, NotHermitianError, NotUnitaryError, LeakageError, DimensionError,
            qtm.RuleError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc.filename}: {exc.strerror}", file=sys.stderr)
        code = EXIT_INVALID
    run.wall_time = time.perf_counter() - start
    if args.manifest:
        run.outputs.setdefault("exit_code", code)
        with open(args.manifest, "w") as fh:
            fh.write(run.to_json())
    return code


if __name__ == "__main__":
    sys.exit(main())
