"""Command-line front end.

Each subcommand writes its artifacts plus ``manifest.json`` into ``--out``.
Exit codes: 0 ok, 2 invalid input, 3 resource budget, 4 failed assertion.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import platform
import re
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .errors import (CertificateError, DegenerateInputError, HypothesisError, ResourceError,
                     StructuralError, UnsupportedError)

EXIT_OK, EXIT_USAGE, EXIT_RESOURCE, EXIT_ASSERT = 0, 2, 3, 4

ALIASES = {
    "Z": ("wreath", {"p": 2, "d": 1}, ("t",)),
    "Z2": ("wreath", {"p": 2, "d": 2}, ("t1", "t2")),
    "lamplighter": ("wreath", {"p": 2, "d": 1}, ("t", "b")),
    "grig": ("grigorchuk", {}, None),
    "sym": ("symext", {"d": 1}, None),
}


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# group strings
# ---------------------------------------------------------------------------

def _parse_value(key: str, text: str):
    text = text.strip()
    if key == "D":
        if text in ("all", "*"):
            return "all"
        if text == "evens":
            from .nilpotent2 import DSpec
            return DSpec.evens().to_json()
        m = re.fullmatch(r"\{([\d,\s]*)\}", text)
        if not m:
            raise UsageError(f"field D: expected {{i,j,...}}, 'all' or 'evens', got {text!r}")
        return [int(t) for t in m.group(1).split(",") if t.strip()]
    if key == "k":
        if text.isdigit():
            return int(text)
        m = re.fullmatch(r"\{([\d:,\s]*)\}", text)
        if not m:
            raise UsageError(f"field k: expected an integer or {{d:k,...}}, got {text!r}")
        table = {}
        for part in filter(None, (p.strip() for p in m.group(1).split(","))):
            d, _, kd = part.partition(":")
            if not d.strip().isdigit() or not kd.strip().isdigit():
                raise UsageError(f"field k: malformed entry {part!r}")
            table[d.strip()] = int(kd)
        return {"table": table}
    if key in ("p", "d"):
        if not text.lstrip("-").isdigit():
            raise UsageError(f"field {key}: expected an integer, got {text!r}")
        return int(text)
    return text


def parse_group(text: str):
    """'nil2:D={2,6,7}', 'nil2:D=evens;k=3', 'lamplighter', 'grig:omega=|012', or GroupSpec JSON."""
    from .core import GroupSpec

    text = text.strip()
    if text.startswith("{"):
        try:
            return GroupSpec.from_json(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"group JSON: {exc}") from exc
    name, _, rest = text.partition(":")
    if name in ALIASES:
        family, params, labels = ALIASES[name]
        params = dict(params)
    else:
        family, params, labels = name, {}, None
    for item in filter(None, (s.strip() for s in rest.split(";"))):
        key, eq, val = item.partition("=")
        if not eq:
            raise UsageError(f"group field {item!r} needs key=value")
        if key == "gens":
            labels = tuple(v for v in val.split(",") if v)
            continue
        params[key] = _parse_value(key, val)
    return GroupSpec(family, params, labels)


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def _versions() -> dict:
    import networkx
    import numpy
    import scipy
    return {"folnerkit": __version__, "python": platform.python_version(), "numpy": numpy.__version__,
            "scipy": scipy.__version__, "networkx": networkx.__version__}


class Sink:
    def __init__(self, out: str | None, command: str):
        self.dir = Path(out) if out else Path("folnerkit-out") / command
        self.dir.mkdir(parents=True, exist_ok=True)
        self.files: list[str] = []

    def write(self, name: str, text: str):
        (self.dir / name).write_text(text)
        self.files.append(name)

    def csv(self, name: str, rows: list[dict]):
        buf = io.StringIO()
        if rows:
            w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
            w.writeheader()
            w.writerows(rows)
        self.write(name, buf.getvalue())

    def manifest(self, args: dict, constants: dict, status: str):
        payload = {"command": args["command"], "inputs": {k: v for k, v in args.items() if k != "func"},
                   "constants": {k: str(v) for k, v in constants.items()}, "versions": _versions(),
                   "outputs": sorted(self.files), "status": status,
                   "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat()}
        (self.dir / "manifest.json").write_text(json.dumps(payload, indent=2, sort_keys=True, default=str))


def _fail(msg: str):
    raise CertificateError(msg)


# ---------------------------------------------------------------------------
# commands; each returns a dict of constants used
# ---------------------------------------------------------------------------

def cmd_ball(a, sink):
    from .core import ball
    G = parse_group(a["group"]).build()
    B = ball(G, a["r"])
    sink.csv("ball.csv", [{"element": G.format_element(x), "length": L}
                          for x, L in sorted(B.members.items(), key=lambda kv: (kv[1], G.format_element(kv[0])))])
    layers = [sum(1 for L in B.members.values() if L == i) for i in range(a["r"] + 1)]
    sink.write("layers.json", json.dumps(layers))
    print(f"|B(e,{a['r']})| = {len(B.members)}; layers {layers}")
    return {}


def cmd_boundary(a, sink):
    from .core import ball, inner_boundary
    G = parse_group(a["group"]).build()
    V = set(ball(G, a["r"]).members)
    rep = inner_boundary(G, V)
    sink.csv("boundary.csv", [{"r": a["r"], "size": len(V), "boundary": rep.boundary_size, "ratio": str(rep.ratio)}])
    print(f"ball r={a['r']}: |V|={len(V)} |dV|={rep.boundary_size} ratio={rep.ratio}")
    return {}


def _nil2(a):
    from .nilpotent2 import Nil2Group
    G = parse_group(a["group"]).build()
    if not isinstance(G, Nil2Group):
        raise UsageError("this command needs a nil2 group")
    return G


def cmd_omega(a, sink):
    from .nilpotent2 import OmegaSet, commutator_rank, omega_cardinality
    G = _nil2(a)
    n = a["n"]
    if n is None or n < 1:
        raise UsageError("--n must be >= 1")
    om = OmegaSet(G, n)
    size = omega_cardinality(G, n)
    rank = commutator_rank(G, n)
    row = {"n": n, "cardinality": size, "rank_check": (n + 1) * 2 ** (n + 1 + rank) == size}
    target = Fraction(2, n + 1)
    if a["verify_ratio"]:
        ratio = om.boundary_ratio()
        row["ratio"] = str(ratio)
        row["expected"] = str(target)
    sink.csv("omega.csv", [row])
    print(",".join(f"{k}={v}" for k, v in row.items()))
    if not row["rank_check"]:
        _fail("cardinality formula disagrees with the commutator rank")
    if a["verify_ratio"] and row["ratio"] != str(target):
        _fail(f"boundary ratio {row['ratio']} != {target}")
    return {"expected_ratio": target}


def _tset(a, G):
    from .isoperimetry import certify_tset, tset_from_words
    from .nilpotent2 import commutator_word
    kind, _, val = (a["T"] or "z:1").partition(":")
    try:
        r = int(val)
    except ValueError as exc:
        raise UsageError(f"--T {a['T']!r}: expected kind:integer") from exc
    if kind == "z":
        words = [["z"] * j for j in range(1, r + 1)] + [["z^-1"] * j for j in range(1, r + 1)]
        return tset_from_words(G, words)
    if kind == "comm":
        words = [commutator_word(i, j) for i in range(-r, r + 1) for j in range(i + 1, r + 1)]
        words = [w for w in words if len(w) <= r]
        elems, seen = [], set()
        for w in words:
            x = G.evaluate(w)
            if x != G.identity and x not in seen:
                seen.add(x)
                elems.append(x)
        return certify_tset(G, elems, r)
    if kind == "gens":
        return tset_from_words(G, [[lab] for lab, _ in G.symmetric_generators])
    raise UsageError(f"--T kind must be z, comm or gens, got {kind!r}")


def cmd_satisfactory(a, sink):
    from .isoperimetry import C1_PROOF, C2_THEOREM, C_REMOVAL, P_PROOF, theorem11_pipeline
    from .nilpotent2 import OmegaSet
    G = _nil2(a)
    if a["n"] is None or a["n"] < 1:
        raise UsageError("--n must be >= 1")
    V = OmegaSet(G, a["n"])
    T = _tset(a, G)
    cert = theorem11_pipeline(G, V, T, enforce=not a["no_enforce"])
    sink.write("certificate.json", cert.to_json(G.format_element) if cert.size <= 10_000 else
               json.dumps({"subset_size": cert.size, "threshold": cert.threshold, "ratio": str(cert.ratio)}))
    print(f"V' size {cert.size}, threshold {cert.threshold}, ratio {cert.ratio}")
    return {"p": P_PROOF, "C1": C1_PROOF, "c": C_REMOVAL, "C2": C2_THEOREM}


def cmd_lowerbound(a, sink):
    from .isoperimetry import C2_THEOREM, GRIG_C, SANDWICH_C, corollary32_sandwich, grigorchuk_bound
    spec = parse_group(a["group"])
    if spec.family == "grigorchuk":
        if a["k"] is None:
            raise UsageError("--k (tree level) is required")
        rep = grigorchuk_bound(a["k"], spec.params.get("omega", "|012"))
        sink.csv("lowerbound.csv", [rep.to_row()])
        print(f"log2 FOL({rep.n}) >= {rep.exponent} (N = {rep.N})")
        return {"C2": C2_THEOREM, "C": GRIG_C}
    if spec.family == "nil2":
        n_max = a["n"] or 64
        rows = corollary32_sandwich(n_max)
        sink.csv("sandwich.csv", [r.to_row() for r in rows])
        bad = [r.n for r in rows if not (r.upper_ok and r.lower_ok)]
        print(f"tau(n) = floor(n^1.5), n <= {n_max}: {'all rows hold' if not bad else f'failing n {bad}'}")
        if bad:
            _fail(f"sandwich fails at n = {bad}")
        return {"C2": C2_THEOREM, "c": SANDWICH_C}
    raise UsageError("lowerbound supports grig or nil2 (tau prescription)")


def cmd_grig(a, sink):
    from . import grigorchuk as gr
    omega = parse_group(a["group"] or "grig").params.get("omega", "|012")
    k = a["k"] if a["k"] is not None else 3
    check = a["check"]
    if check == "sigma":
        w = gr.sigma_power("abab", k)
        sink.write("sigma.txt", w.letters + "\n")
        print(w.letters)
        if len(w.letters) != 4 * 2 ** k:
            _fail(f"|sigma^{k}(abab)| = {len(w.letters)} != {4 * 2 ** k}")
        return {"expected_length": 4 * 2 ** k}
    if check == "schreier":
        rep = gr.schreier_graph(k, omega)
        gr.write_schreier_dot(rep, sink.dir / "schreier.dot")
        gr.write_schreier_csv(rep, sink.dir / "schreier.csv")
        sink.files += ["schreier.dot", "schreier.csv"]
        print(f"k={k}: connected={rep.connected} diameter={rep.diameter}")
        if not rep.connected or rep.diameter > 2 ** k:
            _fail("Schreier graph disconnected or diameter above 2^k")
        return {"diameter_bound": 2 ** k}
    if check == "rist":
        wit = gr.level_witnesses(k, omega)
        rows = []
        for u, w in sorted(wit.items()):
            rows.append({"vertex": u, "length": len(w.letters), "ok": gr.verify_rist(w, u, omega).ok,
                         "word": w.letters})
        sink.csv("rist.csv", rows)
        bad = [r["vertex"] for r in rows if not r["ok"] or r["length"] > 6 * 2 ** k]
        print(f"{len(rows)} witnesses, max length {max(r['length'] for r in rows)}")
        if bad:
            _fail(f"witness check failed at {bad}")
        return {"length_bound": 6 * 2 ** k}
    if check == "trivial":
        if a["word"] is None:
            raise UsageError("--word is required for --check trivial")
        if set(a["word"]) - set("abcd"):
            raise UsageError("--word must be over abcd")
        res = gr.is_trivial(gr.GrigWord(a["word"], 0), omega)
        print("trivial" if res else "nontrivial")
        sink.write("trivial.txt", f"{a['word']},{res}\n")
        return {}
    raise UsageError(f"unknown --check {check!r}")


def _floats(text, cast=float):
    try:
        return tuple(cast(t) for t in str(text).split(",") if t.strip())
    except ValueError as exc:
        raise UsageError(f"could not parse list {text!r}") from exc


def cmd_walk(a, sink):
    from .walks import Measure, WalkConfig, return_probability, simulate
    spec = parse_group(a["group"])
    measure = Measure.parse(a["measure"])
    cfg = WalkConfig(spec, _floats(a["times"], int), a["trials"], a["seed"], measure,
                     _floats(a["c"]), a["block_size"])
    stats = simulate(cfg, threads=a["threads"])
    if a["return_mode"]:
        G = spec.build()
        stats.return_prob.update(return_probability(G, cfg.times, measure, a["return_mode"],
                                                    a["trials"], a["seed"], a["threads"]))
    sink.write("walk.csv", stats.to_csv())
    for n in cfg.times:
        print(f"n={n}: drift {stats.drift[n][0]:.4f} +- {stats.drift[n][1]:.4f}")
    return {"measure": measure, "block_size": a["block_size"]}


def cmd_spectral(a, sink):
    from .walks import Measure, dirichlet_lambda, spectral_csv, survival_bound_check
    G = parse_group(a["group"]).build()
    measure = Measure.parse(a["measure"])
    reps = []
    rows = []
    for r in _floats(a["r"], int):
        rep = dirichlet_lambda(G, r, measure)
        reps.append(rep)
        if a["survival"] is not None:
            s = survival_bound_check(G, r, a["survival"], measure, rep)
            rows.append({"r": r, "n": s.n, "log_stay": repr(s.log_stay), "log_lower": repr(s.log_lower)})
        print(f"r={r}: |B|={rep.ball_size} lambda={rep.lam:.12g} lambda*r^2={rep.lam * r * r:.6g}")
    sink.write("spectral.csv", spectral_csv(reps))
    if rows:
        sink.csv("survival.csv", rows)
    return {"measure": measure, "residual_tol": 1e-9}


def cmd_pairs(a, sink):
    from .isoperimetry import folner_pairs_check, lamplighter_pair
    from .wreath import WreathGroup
    r = a["r"]
    G = WreathGroup(2, 1, ("t", "b"))
    Fp, F = lamplighter_pair(int(r))
    C = Fraction(a["C"]) if a["C"] else Fraction(14)
    n = a["n"] if a["n"] is not None else (int(r) + 1) // 2
    rep = folner_pairs_check(G, Fp, F, n, C, controlled=True)
    sink.csv("pairs.csv", [{"r": r, "n": n, "C": str(C), "size_ok": rep.size_ok, "depth": rep.depth,
                            "controlled_ok": rep.controlled_ok, "violation": rep.first_violation or ""}])
    print(f"r={r} n={n} C={C}: {'ok' if rep.ok else rep.first_violation}")
    if not rep.ok:
        _fail(f"pair condition violated: {rep.first_violation}")
    return {"C": C}


COMMANDS = {"ball": cmd_ball, "boundary": cmd_boundary, "omega": cmd_omega, "satisfactory": cmd_satisfactory,
            "lowerbound": cmd_lowerbound, "grig": cmd_grig, "walk": cmd_walk, "spectral": cmd_spectral,
            "pairs": cmd_pairs}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="folnerkit", description="Folner sets, volume bounds and walks on groups")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command")

    def add(name, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--group", help="e.g. nil2:D={2,6,7}, lamplighter, grig:omega=|012, or GroupSpec JSON")
        sp.add_argument("--job", help="JSON file with any of these options")
        sp.add_argument("--out", help="output directory (default folnerkit-out/<command>)")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--threads", type=int, default=1)
        return sp

    add("ball", "enumerate B(e, r)").add_argument("--r", type=int, default=3)
    add("boundary", "inner boundary of B(e, r)").add_argument("--r", type=int, default=3)
    sp = add("omega", "Omega_D(n): cardinality and boundary ratio")
    sp.add_argument("--n", type=int)
    sp.add_argument("--verify-ratio", action="store_true")
    sp = add("satisfactory", "satisfactory subset of Omega_D(n)")
    sp.add_argument("--n", type=int)
    sp.add_argument("--T", help="z:r (powers of z), comm:r (commutators), gens:0")
    sp.add_argument("--no-enforce", action="store_true", help="skip the ratio precondition")
    sp = add("lowerbound", "volume lower-bound reports")
    sp.add_argument("--k", type=int)
    sp.add_argument("--n", type=int)
    sp = add("grig", "Grigorchuk group checks")
    sp.add_argument("--check", choices=["sigma", "schreier", "rist", "trivial"], default="sigma")
    sp.add_argument("--k", type=int)
    sp.add_argument("--word")
    sp = add("walk", "random-walk drift and cautiousness")
    sp.add_argument("--times", default="100,1000")
    sp.add_argument("--trials", type=int, default=1000)
    sp.add_argument("--measure", default="uniform")
    sp.add_argument("--c", default="1.0")
    sp.add_argument("--block-size", type=int, default=1000)
    sp.add_argument("--return-mode", choices=["exact", "mc"])
    sp = add("spectral", "Dirichlet eigenvalues of balls")
    sp.add_argument("--r", default="4")
    sp.add_argument("--measure", default="uniform")
    sp.add_argument("--survival", type=int)
    sp = add("pairs", "lamplighter Folner pair check")
    sp.add_argument("--r", type=int, default=4)
    sp.add_argument("--n", type=int)
    sp.add_argument("--C")
    return p


def _merge_job(parser, args) -> dict:
    opts = vars(args).copy()
    if opts.get("job"):
        try:
            job = json.loads(Path(opts["job"]).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"--job: {exc}") from exc
        if job.get("command", opts["command"]) != opts["command"]:
            raise UsageError(f"--job is for {job['command']!r}, not {opts['command']!r}")
        for key, val in job.items():
            key = key.replace("-", "_")
            if key == "group" and isinstance(val, dict):
                val = json.dumps(val)
            if key != "command" and key not in opts:
                raise UsageError(f"--job: unknown option {key!r}")
            if key != "command":
                opts[key] = val
    if opts["command"] not in ("grig", "pairs") and not opts.get("group"):
        raise UsageError("--group is required")
    return opts


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if not args.command:
        parser.print_help()
        return EXIT_USAGE
    try:
        opts = _merge_job(parser, args)
        sink = Sink(opts.get("out"), opts["command"])
        try:
            constants = COMMANDS[opts["command"]](opts, sink)
        except (CertificateError, AssertionError) as exc:
            sink.manifest(opts, {}, f"assertion failed: {exc}")
            print(f"assertion failed: {exc}", file=sys.stderr)
            return EXIT_ASSERT
        sink.manifest(opts, constants, "ok")
        return EXIT_OK
    except (UsageError, StructuralError, DegenerateInputError, HypothesisError, UnsupportedError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceError as exc:
        print(f"resource budget exceeded: {exc}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
