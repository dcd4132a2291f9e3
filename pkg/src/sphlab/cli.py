"""Command-line front end: ``sphlab <subcommand> [flags]``, JSON in and out.

Every output document records the command, the run configuration and the
normalised inputs next to the result, so ``sphlab verify --input doc.json``
can recompute it in a fresh process.  Exit status: 0 on success, 2 when a
bounded search finds nothing (NotFound), 1 on any other error.
"""

from __future__ import annotations

import argparse
import json
import math
import random
import sys
from fractions import Fraction

from . import cosets, hecke, positivity, spherical
from .config import RunConfig
from .errors import NotFound, SphlabError
from .padic import (
    GroupElement,
    PrimeContext,
    cartan_decompose,
    cartan_label,
    dominant_coweights,
    iwasawa_decompose,
)

EXIT_OK, EXIT_ERROR, EXIT_NOT_FOUND = 0, 1, 2

FLOAT_TOL = 1e-9


# ---------------------------------------------------------------------------
# input parsing


def parse_coweight(text) -> tuple:
    if isinstance(text, (list, tuple)):
        return tuple(int(x) for x in text)
    return tuple(int(x) for x in str(text).replace(" ", "").split(","))


def parse_coweight_list(text) -> list:
    if isinstance(text, list):
        return [parse_coweight(m) for m in text]
    return [parse_coweight(part) for part in str(text).split(";") if part.strip()]


def parse_matrix(text) -> list:
    """'a,b;c,d' or a JSON list of rows; entries are ints or 'num/den'."""
    if isinstance(text, str):
        text = text.strip()
        if text.startswith("["):
            text = json.loads(text)
        else:
            text = [row.split(",") for row in text.split(";")]
    return [[str(Fraction(str(x).strip())) for x in row] for row in text]


def parse_element(ctx: PrimeContext, spec) -> GroupElement:
    if isinstance(spec, dict) and "coweight" in spec:
        return GroupElement.pi(ctx, parse_coweight(spec["coweight"]))
    return GroupElement(ctx, [[Fraction(x) for x in row] for row in parse_matrix(spec)])


def parse_param(ctx: PrimeContext, spec) -> spherical.SatakeParameter:
    """``trivial``, ``s:j``, ``sigma:x`` (n = 2), ``re1,...,ren[;im1,...,imn]``
    or a JSON object {"re": [...], "im": [...]}."""
    if isinstance(spec, dict):
        return spherical.SatakeParameter.from_json(ctx, spec)
    text = str(spec).strip()
    if text.startswith("{"):
        return spherical.SatakeParameter.from_json(ctx, json.loads(text))
    if text == "trivial":
        return spherical.trivial_param(ctx)
    if text.startswith("s:") or (text.startswith("s(") and text.endswith(")")):
        j = int(text[2:].rstrip(")"))
        return spherical.sequence_param(j, ctx)
    if text.startswith("sigma:"):
        return positivity.sigma_param(_number(text[6:]), ctx)
    parts = text.split(";")
    re = [_number(x) for x in parts[0].split(",")]
    im = [_number(x) for x in parts[1].split(",")] if len(parts) > 1 else [0] * len(re)
    return spherical.SatakeParameter(ctx, tuple(re), tuple(im))


def _number(text):
    text = str(text).strip()
    try:
        return Fraction(text)
    except ValueError:
        return float(text)


def parse_hecke(ctx: PrimeContext, spec) -> hecke.HeckeElement:
    """A JSON list of {"m", "re", "im"} or ``m1:c1;m2:c2`` with m as 'a,b,c'."""
    if isinstance(spec, str) and spec.strip().startswith("["):
        spec = json.loads(spec)
    if isinstance(spec, list):
        return hecke.HeckeElement.from_json(ctx, spec)
    coeffs = {}
    for part in str(spec).split(";"):
        if not part.strip():
            continue
        m, _, c = part.partition(":")
        coeffs[parse_coweight(m)] = _number(c) if c else 1
    return hecke.HeckeElement(ctx, coeffs)


# ---------------------------------------------------------------------------
# JSON helpers


def num_json(x):
    if isinstance(x, bool) or x is None:
        return x
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else x.numerator
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    return x


def complex_json(z) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def hecke_json(f: hecke.HeckeElement) -> list:
    out = []
    for m in f.support:
        c = f.coeffs[m]
        if isinstance(c, Fraction) or isinstance(c, int):
            out.append({"m": list(m), "re": str(Fraction(c)), "im": 0})
        else:
            c = complex(c)
            out.append({"m": list(m), "re": c.real, "im": c.imag})
    return out


def _need(inputs: dict, key: str):
    if inputs.get(key) is None:
        raise SphlabError(f"missing input '{key}'")
    return inputs[key]


# ---------------------------------------------------------------------------
# subcommands; each maps (config, inputs) to a JSON-ready result


def cmd_cartan(cfg, inputs):
    g = parse_element(cfg.ctx, _need(inputs, "matrix"))
    form = cartan_decompose(g)
    return {
        "m": list(form.m),
        "u1": form.u1.to_json(),
        "u2": form.u2.to_json(),
        "reconstructs": form.reconstruct().entries == g.entries,
    }


def cmd_iwasawa(cfg, inputs):
    g = parse_element(cfg.ctx, _need(inputs, "matrix"))
    form = iwasawa_decompose(g)
    return {
        "u": form.u.to_json(),
        "hval": list(form.hval),
        "hunit": [str(x) for x in form.hunit],
        "n": form.nmat.to_json(),
        "reconstructs": form.reconstruct().entries == g.entries,
    }


def cmd_cosets(cfg, inputs):
    ctx = cfg.ctx
    m = parse_coweight(_need(inputs, "coweight"))
    out = {"m": list(m), "count": cosets.count_for(m, ctx, cfg.coset_cap)}
    if inputs.get("reps"):
        out["reps"] = [w.to_json() for w in cosets.left_coset_reps(m, ctx, cfg.coset_cap).reps]
    if inputs.get("oracle"):
        out["oracle_count"] = cosets.quotient_oracle_count(m, ctx)
    return out


def cmd_convolve(cfg, inputs):
    f = parse_hecke(cfg.ctx, _need(inputs, "f"))
    g = parse_hecke(cfg.ctx, _need(inputs, "g"))
    return {"product": hecke_json(hecke.convolve(f, g, cfg.coset_cap))}


def cmd_structure_constants(cfg, inputs):
    ctx = cfg.ctx
    m1 = parse_coweight(_need(inputs, "m1"))
    m2 = parse_coweight(_need(inputs, "m2"))
    sc = hecke.structure_constants(m1, m2, ctx, cfg.coset_cap)
    return {
        "constants": [{"m": list(m), "c": c} for m, c in sorted(sc.items(), reverse=True)],
        "mass": hecke.mass(sc, ctx, cfg.coset_cap),
        "count_product": cosets.count_for(m1, ctx, cfg.coset_cap)
        * cosets.count_for(m2, ctx, cfg.coset_cap),
    }


def cmd_l1_norm(cfg, inputs):
    f = parse_hecke(cfg.ctx, _need(inputs, "f"))
    return {"l1_norm": num_json(hecke.l1_norm(f, cfg.coset_cap))}


def cmd_alpha(cfg, inputs):
    s = parse_param(cfg.ctx, _need(inputs, "param"))
    h = parse_coweight(_need(inputs, "h"))
    re, im = spherical.alpha_exponent(s, h)
    out = complex_json(spherical.alpha_eval(s, h))
    out["exponent"] = {"re": num_json(re), "im": num_json(im)}
    return out


def cmd_omega(cfg, inputs):
    ctx = cfg.ctx
    s = parse_param(ctx, _need(inputs, "param"))
    if inputs.get("matrix") is not None:
        g = parse_element(ctx, inputs["matrix"])
    else:
        g = GroupElement.pi(ctx, parse_coweight(_need(inputs, "coweight")))
    spherical.coset_data(cartan_label(g), ctx, cfg.coset_cap)
    return complex_json(spherical.omega_eval(s, g))


def cmd_tau(cfg, inputs):
    s = parse_param(cfg.ctx, _need(inputs, "param"))
    f = parse_hecke(cfg.ctx, _need(inputs, "f"))
    return complex_json(spherical.tau_eval(s, f, cfg.coset_cap))


def cmd_satake(cfg, inputs):
    f = parse_hecke(cfg.ctx, _need(inputs, "f"))
    poly = spherical.satake_transform(f, cfg.coset_cap)
    return {"polynomial": poly.to_json(), "w_invariant": poly.is_w_invariant()}


def cmd_param_equiv(cfg, inputs):
    s1 = parse_param(cfg.ctx, _need(inputs, "param"))
    s2 = parse_param(cfg.ctx, _need(inputs, "param2"))
    return {
        "equivalent": spherical.params_equivalent(s1, s2),
        "exact_path": s1.exact and s2.exact,
    }


def cmd_star_test(cfg, inputs):
    ctx = cfg.ctx
    s = parse_param(ctx, _need(inputs, "param"))
    w = spherical.is_star_param(s)
    grid = dominant_coweights(ctx.n, int(inputs.get("spread") or 2))
    for m in grid:
        spherical.coset_data(m, ctx, cfg.coset_cap)
    return {
        "witness": None if w is None else list(w),
        "defect": spherical.star_defect(s, grid),
    }


def _elements(cfg, inputs) -> list:
    ctx = cfg.ctx
    if inputs.get("elements") is not None:
        return [parse_element(ctx, e) for e in inputs["elements"]]
    return [GroupElement.pi(ctx, m) for m in parse_coweight_list(_need(inputs, "coweights"))]


def cmd_gram(cfg, inputs):
    s = parse_param(cfg.ctx, _need(inputs, "param"))
    cert = positivity.certify(s, _elements(cfg, inputs), cfg.tol)
    out = cert.to_json()
    if inputs.get("z") is not None:
        z = [complex(*x) if isinstance(x, list) else complex(x) for x in inputs["z"]]
        out["inner_form"] = complex_json(positivity.inner_form(s, cert.elements, z))
    return out


def cmd_psd(cfg, inputs):
    if inputs.get("certificate") is not None:
        gram = positivity.GramCertificate.from_json(inputs["certificate"]).gram
    else:
        gram = [[positivity._cparse(x) for x in row] for row in _need(inputs, "gram")]
    v = positivity.psd_verdict(gram, cfg.tol)
    return {
        "verdict": v.kind,
        "min_eigenvalue": v.min_eigenvalue,
        "witness": None if v.witness is None else [positivity._cjson(x) for x in v.witness],
    }


def search_config(cfg, inputs) -> positivity.SearchConfig:
    return positivity.SearchConfig(
        j_min=cfg.j_min,
        j_max=cfg.j_max,
        max_size=int(inputs.get("max_size") or 8),
        trials=int(inputs.get("trials") or 64),
        seed=cfg.seed,
        spread=int(inputs.get("spread") or 2),
        tol=cfg.tol,
        threads=cfg.threads,
        coset_cap=cfg.coset_cap,
    )


def cmd_find_witness(cfg, inputs):
    cert = positivity.find_nonpd_witness(cfg.ctx, search_config(cfg, inputs))
    out = cert.to_json()
    out["verification"] = positivity.verify_certificate(cert, cfg.tol)
    return out


def cmd_unbounded(cfg, inputs):
    ctx = cfg.ctx
    sigma = _number(_need(inputs, "sigma"))
    m_max = int(inputs.get("m_max") or 10)
    cert = positivity.unboundedness_certificate(sigma, ctx, m_max, cfg.coset_cap)
    g = GroupElement.pi(ctx, (cert.m, -cert.m))
    forms = positivity.two_point_forms(cert.s, g)
    out = cert.to_json()
    out["two_point_forms"] = [
        {"z": row["z"], "value": complex_json(row["value"])} for row in forms
    ]
    out["two_point_refutes"] = positivity.two_point_refutes(cert.s, g)
    return out


def cmd_verify_axioms(cfg, inputs):
    """omega(e) = 1, label dependence, W-invariance, omega_{-s}(g) = omega_s(g^{-1}),
    and (n = 2 or on request) the functional equation."""
    ctx = cfg.ctx
    s = parse_param(ctx, _need(inputs, "param"))
    spread = int(inputs.get("spread") or 2)
    grid = dominant_coweights(ctx.n, spread)
    rng = random.Random(f"axioms:{cfg.seed}")
    checks = {"omega_e": complex_json(spherical.omega_at(s, (0,) * ctx.n))}
    bi, weyl, neg = 0.0, 0.0, 0.0
    perms = [tuple(rng.sample(range(ctx.n), ctx.n)) for _ in range(3)]
    for m in grid:
        reps = cosets.left_coset_reps(m, ctx, cfg.coset_cap).reps
        spherical.coset_data(m, ctx, cfg.coset_cap)
        base = spherical.omega_at(s, m)
        for w in rng.sample(reps, min(3, len(reps))):
            bi = max(bi, abs(spherical.omega_direct(s, w, cfg.coset_cap) - base))
            g_inv = w.inverse()
            neg = max(neg, abs(spherical.omega_eval(-s, w) - spherical.omega_eval(s, g_inv)))
        for perm in perms:
            weyl = max(weyl, abs(spherical.omega_at(s.permuted(perm), m) - base))
    checks.update(
        {"bi_invariance": bi, "weyl_invariance": weyl, "inverse_identity": neg}
    )
    if ctx.n == 2 or inputs.get("functional_equation"):
        m = parse_coweight(inputs.get("fe_coweight") or ",".join(["1"] + ["0"] * (ctx.n - 2) + ["-1"]))
        g = GroupElement.pi(ctx, m)
        lhs, rhs = spherical.functional_equation_sides(s, g, g)
        checks["functional_equation"] = {
            "lhs": complex_json(lhs),
            "rhs": complex_json(rhs),
            "defect": abs(lhs - rhs),
        }
    return checks


def cmd_convergence_profile(cfg, inputs):
    ctx = cfg.ctx
    grid = dominant_coweights(ctx.n, int(inputs.get("spread") or 2))
    js = parse_coweight(inputs.get("js") or "1,2,4,8,16,32,64")
    for m in grid:
        spherical.coset_data(m, ctx, cfg.coset_cap)
    return {"rows": spherical.convergence_profile(ctx, grid, js)}


COMMANDS = {
    "cartan": cmd_cartan,
    "iwasawa": cmd_iwasawa,
    "cosets": cmd_cosets,
    "convolve": cmd_convolve,
    "structure-constants": cmd_structure_constants,
    "l1-norm": cmd_l1_norm,
    "alpha": cmd_alpha,
    "omega": cmd_omega,
    "tau": cmd_tau,
    "satake": cmd_satake,
    "param-equiv": cmd_param_equiv,
    "star-test": cmd_star_test,
    "gram": cmd_gram,
    "psd": cmd_psd,
    "find-witness": cmd_find_witness,
    "unbounded": cmd_unbounded,
    "verify-axioms": cmd_verify_axioms,
    "convergence-profile": cmd_convergence_profile,
}

# flags each subcommand accepts, as (flag, input key, help)
SUBCOMMAND_FLAGS = {
    "cartan": [("--matrix", "matrix", "rows separated by ';', e.g. '2,0;0,1/2'")],
    "iwasawa": [("--matrix", "matrix", "rows separated by ';'")],
    "cosets": [("--coweight", "coweight", "dominant coweight, e.g. 1,-1")],
    "convolve": [("--f", "f", "Hecke element 'm:c;m:c' or JSON"), ("--g", "g", "second factor")],
    "structure-constants": [("--m1", "m1", "coweight"), ("--m2", "m2", "coweight")],
    "l1-norm": [("--f", "f", "Hecke element")],
    "alpha": [("--param", "param", "Satake parameter"), ("--h", "h", "sum-zero vector")],
    "omega": [
        ("--param", "param", "trivial, s:j, sigma:x, 're..;im..' or JSON"),
        ("--coweight", "coweight", "evaluate at pi^m"),
        ("--matrix", "matrix", "evaluate at a matrix instead"),
    ],
    "tau": [("--param", "param", "Satake parameter"), ("--f", "f", "Hecke element")],
    "satake": [("--f", "f", "Hecke element with rational coefficients")],
    "param-equiv": [("--param", "param", "first parameter"), ("--param2", "param2", "second")],
    "star-test": [("--param", "param", "Satake parameter"), ("--spread", "spread", "grid size")],
    "gram": [
        ("--param", "param", "Satake parameter"),
        ("--coweights", "coweights", "elements pi^m, e.g. '0,0,0;1,0,-1'"),
    ],
    "psd": [],
    "find-witness": [
        ("--max-size", "max_size", "largest element set (default 8)"),
        ("--trials", "trials", "sets per (size, j) (default 64)"),
        ("--spread", "spread", "pool grid spread (default 2)"),
    ],
    "unbounded": [("--sigma", "sigma", "s = (sigma, -sigma)"), ("--m-max", "m_max", "default 10")],
    "verify-axioms": [("--param", "param", "Satake parameter"), ("--spread", "spread", "grid")],
    "convergence-profile": [("--js", "js", "comma list of j (default 1,2,4,...,64)")],
}

BOOL_FLAGS = {"cosets": [("--reps", "reps"), ("--oracle", "oracle")]}


# ---------------------------------------------------------------------------
# dispatch and verification


def dispatch(command: str, cfg: RunConfig, inputs: dict) -> dict:
    if command not in COMMANDS:
        raise SphlabError(f"unknown subcommand {command!r}")
    previous = cosets.get_default_cap()
    cosets.set_default_cap(cfg.coset_cap)
    try:
        result = COMMANDS[command](cfg, inputs)
    finally:
        cosets.set_default_cap(previous)
    config = cfg.to_json()
    config.pop("out", None)
    config.pop("threads", None)
    return {"command": command, "config": config, "inputs": inputs, **result}


RESERVED = {"command", "config", "inputs"}


def compare(a, b, tol: float = FLOAT_TOL, path: str = "$") -> list:
    """Paths where two JSON documents differ (floats within tol)."""
    if isinstance(a, dict) and isinstance(b, dict):
        diffs = []
        for key in sorted(set(a) | set(b)):
            if key not in a or key not in b:
                diffs.append(f"{path}.{key}")
            else:
                diffs.extend(compare(a[key], b[key], tol, f"{path}.{key}"))
        return diffs
    if isinstance(a, list) and isinstance(b, list):
        if len(a) != len(b):
            return [path]
        return [d for i, (x, y) in enumerate(zip(a, b)) for d in compare(x, y, tol, f"{path}[{i}]")]
    if isinstance(a, float) or isinstance(b, float):
        if isinstance(a, bool) or isinstance(b, bool):
            return [] if a == b else [path]
        try:
            x, y = float(a), float(b)
        except (TypeError, ValueError):
            return [path]
        ok = math.isclose(x, y, rel_tol=tol, abs_tol=tol) or (math.isnan(x) and math.isnan(y))
        return [] if ok else [path]
    return [] if a == b else [path]


def verify_document(doc: dict, threads: int = 1) -> dict:
    """Re-run the recorded command from its stored config and inputs."""
    command = doc["command"]
    cfg = RunConfig(**doc["config"], threads=threads)
    fresh = dispatch(command, cfg, doc["inputs"])
    expected = {k: v for k, v in doc.items() if k not in RESERVED}
    got = {k: v for k, v in fresh.items() if k not in RESERVED}
    report = {"command": command, "differences": compare(expected, got)}
    if doc.get("witness") is not None and "elements" in doc:
        cert = positivity.GramCertificate.from_json(doc)
        report["certificate"] = positivity.verify_certificate(cert, cfg.tol)
    if command == "unbounded":
        report["certificate"] = positivity.verify_unboundedness(
            positivity.UnboundednessCertificate.from_json(doc), cfg.coset_cap
        )
    cert_ok = report.get("certificate", {}).get("ok", True)
    report["ok"] = not report["differences"] and cert_ok
    return report


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    # usage errors exit 1 so that 2 keeps meaning NotFound
    def error(self, message):
        self.print_usage(sys.stderr)
        print(json.dumps({"error": "usage", "message": message}), file=sys.stderr)
        sys.exit(EXIT_ERROR)


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=int, help="the prime p")
    common.add_argument("--n", type=int, help="the rank n")
    common.add_argument("--tol", type=float, help="PSD tolerance (default 1e-6)")
    common.add_argument("--coset-cap", dest="coset_cap", type=int, help="max cosets per coweight")
    common.add_argument("--seed", type=int, help="search seed (default 1)")
    common.add_argument("--j-min", dest="j_min", type=int)
    common.add_argument("--j-max", dest="j_max", type=int)
    common.add_argument("--threads", type=int)
    common.add_argument("--out", help="write the JSON document here instead of stdout")
    common.add_argument("--input", help="JSON payload file ('-' for stdin)")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="sphlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in list(COMMANDS) + ["verify"]:
        sp = sub.add_parser(name, parents=[common], help=(COMMANDS.get(name) or verify_document).__doc__)
        for flag, key, help_text in SUBCOMMAND_FLAGS.get(name, []):
            sp.add_argument(flag, dest=f"in_{key}", help=help_text)
        for flag, key in BOOL_FLAGS.get(name, []):
            sp.add_argument(flag, dest=f"in_{key}", action="store_true", default=None)
    return parser


def _read_payload(path):
    if path is None:
        return {}
    if path == "-":
        return json.load(sys.stdin)
    with open(path) as fh:
        return json.load(fh)


def _emit(doc: dict, out: str | None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True, default=num_json)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = args.out
    try:
        payload = _read_payload(args.input)
        if args.command == "verify":
            cfg = RunConfig.from_env(threads=args.threads)
            report = verify_document(payload, threads=cfg.threads)
            _emit(report, out)
            return EXIT_OK if report["ok"] else EXIT_ERROR
        overrides = {
            k: getattr(args, k)
            for k in ("p", "n", "tol", "coset_cap", "seed", "j_min", "j_max", "threads", "out")
        }
        cfg = RunConfig.from_env(**overrides)
        out = cfg.out
        inputs = dict(payload)
        for key, value in vars(args).items():
            if key.startswith("in_") and value is not None:
                inputs[key[3:]] = value
        _emit(dispatch(args.command, cfg, inputs), out)
        return EXIT_OK
    except NotFound as exc:
        _emit({"command": args.command, "error": "not_found", "message": str(exc),
               "report": exc.report}, out)
        return EXIT_NOT_FOUND
    except (SphlabError, ValueError, TypeError, KeyError, ZeroDivisionError, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
