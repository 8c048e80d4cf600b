"""Command-line front end.

Every verification subcommand prints one JSON document on standard output and
exits 0 when all claims pass, 1 when any claim fails, and 2 on usage or input
errors.  Reports contain no timings so that equal configurations produce
byte-identical output.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import random
import sys
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

SCHEMA = "k3lab.report/1"
SERIES_SCHEMA = "k3lab.series/1"

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class Config:
    order: int = 14
    tol: float = 1e-10
    cache_dir: str | None = None
    bound: int = 3
    seed: int = 2024
    samples: int = 5

    def validate(self) -> "Config":
        if self.order < 6:
            raise UsageError("series order must be at least 6")
        if not self.tol > 0:
            raise UsageError("tolerance must be positive")
        if self.bound < 1:
            raise UsageError("search bound must be positive")
        if self.samples < 1:
            raise UsageError("samples must be positive")
        return self


_CONFIG_TYPES: dict[str, Callable] = {
    "order": int, "tol": float, "cache_dir": str, "bound": int, "seed": int, "samples": int,
}


def parse_config_text(text: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _CONFIG_TYPES:
            raise UsageError(f"config line {lineno}: unknown key {key!r}")
        try:
            out[key] = _CONFIG_TYPES[key](value)
        except ValueError as e:
            raise UsageError(f"config line {lineno}: {e}") from None
    return out


def load_config(path: str | None = None, overrides: dict | None = None,
                environ: dict | None = None) -> Config:
    """Defaults, then the config file, then K3LAB_CACHE, then command-line flags."""
    env = os.environ if environ is None else environ
    values: dict = {}
    if path:
        try:
            values.update(parse_config_text(Path(path).read_text()))
        except OSError as e:
            raise UsageError(f"cannot read config file: {e}") from None
    if env.get("K3LAB_CACHE"):
        values["cache_dir"] = env["K3LAB_CACHE"]
    for k, v in (overrides or {}).items():
        if v is not None:
            values[k] = v
    return Config(**values).validate()


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class Claim:
    id: str
    source: str
    computed: str
    expected: str
    verdict: str  # pass / fail / inconclusive
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        d = {"id": self.id, "source": self.source, "computed": self.computed,
             "expected": self.expected, "verdict": self.verdict}
        if self.detail:
            d["detail"] = self.detail
        return d


def _s(x) -> str:
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)
    if hasattr(x, "as_expr"):
        return str(x.as_expr())
    return str(x)


def claim_eq(cid: str, source: str, computed, expected, detail: dict | None = None) -> Claim:
    ok = computed == expected
    return Claim(cid, source, _s(computed), _s(expected), "pass" if ok else "fail", detail or {})


def claim_true(cid: str, source: str, ok: bool, detail: dict | None = None) -> Claim:
    return Claim(cid, source, str(bool(ok)).lower(), "true", "pass" if ok else "fail", detail or {})


def build_report(command: str, claims: Sequence[Claim], extra: dict | None = None) -> dict:
    claims = sorted(claims, key=lambda c: c.id)
    counts = {v: sum(1 for c in claims if c.verdict == v) for v in ("pass", "fail", "inconclusive")}
    rep = {"schema": SCHEMA, "command": command, "claims": [c.to_json() for c in claims],
           "summary": {**counts, "total": len(claims)}}
    if extra:
        rep.update(extra)
    return rep


def exit_code(report: dict) -> int:
    return EXIT_FAIL if report["summary"]["fail"] else EXIT_PASS


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False)


def render_text(report: dict) -> str:
    lines = [f"{report['command']}: {report['summary']['pass']} pass, "
             f"{report['summary']['fail']} fail, {report['summary']['inconclusive']} inconclusive"]
    for c in report["claims"]:
        mark = {"pass": "PASS", "fail": "FAIL", "inconclusive": "????"}[c["verdict"]]
        line = f"{mark}  {c['id']}"
        if c["verdict"] != "pass":
            line += f"  computed={c['computed']} expected={c['expected']}"
        lines.append(line)
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# series cache (JSON lines, first line a header with a checksum of the rest)


class SeriesCache:
    def __init__(self, directory: str | None):
        self.dir = Path(directory) if directory else None
        self.hits = 0
        self.misses = 0

    def path(self, j: int, N: int) -> Path | None:
        return None if self.dir is None else self.dir / f"series-f{j}-n{N}.jsonl"

    @staticmethod
    def _body(j: int, s) -> list[str]:
        return [json.dumps({"family": j, "n": n, "m": m,
                            "num": str(s[n, m].numerator), "den": str(s[n, m].denominator)},
                           sort_keys=True)
                for n, m in s.indices()]

    @staticmethod
    def _digest(lines: Sequence[str]) -> str:
        h = hashlib.sha256()
        for ln in lines:
            h.update(ln.encode())
            h.update(b"\n")
        return h.hexdigest()

    def _read(self, p: Path, j: int, N: int):
        from .exactcore import BiSeries

        lines = p.read_text().splitlines()
        if not lines:
            return None
        head = json.loads(lines[0])
        body = lines[1:]
        if (head.get("schema") != SERIES_SCHEMA or head.get("family") != j or head.get("order") != N
                or head.get("checksum") != self._digest(body)):
            return None
        coeffs = {}
        for ln in body:
            rec = json.loads(ln)
            coeffs[(rec["n"], rec["m"])] = Fraction(int(rec["num"]), int(rec["den"]))
        if len(coeffs) != (N + 1) * (N + 2) // 2:
            return None
        return BiSeries(N, coeffs)

    def series(self, j: int, N: int):
        from .periods import period_series

        p = self.path(j, N)
        if p is not None and p.exists():
            try:
                s = self._read(p, j, N)
            except (ValueError, KeyError, TypeError):
                s = None
            if s is not None:
                self.hits += 1
                return s
        self.misses += 1
        s = period_series(j, N)
        if p is not None:
            body = self._body(j, s)
            head = json.dumps({"schema": SERIES_SCHEMA, "family": j, "order": N,
                               "checksum": self._digest(body)}, sort_keys=True)
            p.parent.mkdir(parents=True, exist_ok=True)
            tmp = p.with_suffix(".tmp")
            tmp.write_text("\n".join([head] + body) + "\n")
            tmp.replace(p)
        return s


# ---------------------------------------------------------------------------
# suites


def suite_polytopes(cfg: Config) -> list[Claim]:
    from .polytopes import FANO_EXPECTED, is_fano, is_reflexive_terminal, polytope

    out = []
    for j in range(5):
        P = polytope(j)
        out.append(claim_true(f"polytopes.P{j}.reflexive_terminal", "polytope list",
                              is_reflexive_terminal(P)))
        out.append(claim_eq(f"polytopes.P{j}.fano", "Fano classification",
                            is_fano(P), j in FANO_EXPECTED))
    return out


def suite_lattices(cfg: Config) -> list[Claim]:
    from . import lattices as L

    out = []
    for key in (0, 1, 2, 3, "L3prime", "T2", "T3"):
        name = f"M{key}" if isinstance(key, int) else key
        out.append(claim_eq(f"lattices.det.{name}", "intersection matrix determinant",
                            L.det_exact(L.build_M(key)), L.PRINTED_DETS[key]))
    mw = L.mw_claims()
    k = L.K_SYM
    out.append(claim_eq("lattices.det.Tbar1", "extended trivial lattice, symbolic in k",
                        mw["Tbar1"], -72 * (1 + k + k**2)))
    for pos in (1, 4, 7):
        v = mw[f"L1tilde_a{pos}"]
        out.append(Claim(f"lattices.det.L1tilde.a{pos}", "section extension of family 1",
                         str(v), "{12, -30, 6}", "pass" if v in (12, -30, 6) else "fail"))
    out.append(claim_eq("lattices.det.L2tilde", "section extension of family 2", mw["L2tilde"], -38))
    for q in (0, 1):
        v = mw[f"L3tilde_q{q}"]
        out.append(Claim(f"lattices.det.L3tilde.q{q}", "section extension of family 3",
                         str(v), "{-16, -112}", "pass" if v in (-16, -112) else "fail"))
    for j in range(4):
        U = L.certificate(j)
        ok = L.verify_equivalence(L.build_M(j), U, L.ns_target(j))
        out.append(claim_true(f"lattices.ns_certificate.{j}", "unimodular change to E8+E8+tail", ok,
                              {"det_U": L.det_exact(U)}))
    for j in range(4):
        _, gm = L.orthogonal_complement(L.ns_embedding(j, cfg.bound))
        g = L.find_congruence(gm, L.TRANSCENDENTAL[j], cfg.bound)
        if g is None:
            out.append(Claim(f"lattices.transcendental.{j}", "orthogonal complement",
                             "no congruence within bound", "congruent", "inconclusive"))
        else:
            out.append(claim_true(f"lattices.transcendental.{j}", "orthogonal complement",
                                  L.transform(gm, g) == L.TRANSCENDENTAL[j], {"g": g}))
    return out


def suite_gkz(cfg: Config, j: int, N: int, cache: SeriesCache) -> list[Claim]:
    from .periods import (CORRECTED, annihilates, appell_f4, gkz_operators, operator,
                          printed_operator)

    s = cache.series(j, N)
    out = []
    for name in ("D1", "D2", "D3"):
        op = printed_operator(j, name)
        out.append(claim_true(f"gkz.{j}.{name}.printed.annihilates", "period operator", annihilates(op, s),
                              {"operator": str(op)}))
        if (j, name) in CORRECTED:
            out.append(claim_true(f"gkz.{j}.{name}.corrected.annihilates", "period operator, repaired",
                                  annihilates(operator(j, name), s), {"operator": str(operator(j, name))}))
    g1, g2 = gkz_operators(j)
    for lab, op in (("D1", g1), ("D2", g2)):
        out.append(claim_true(f"gkz.{j}.reduction.{lab}.annihilates", "GKZ reduction", annihilates(op, s),
                              {"operator": str(op)}))
    if j == 0:
        out.append(claim_eq("gkz.0.reduction.D1.equals_printed", "GKZ reduction", str(g1),
                            str(printed_operator(0, "D1"))))
        out.append(claim_eq("gkz.0.reduction.D2.equals_printed", "GKZ reduction", str(g2),
                            str(printed_operator(0, "D2"))))
    if j == 1:
        M = min(N, 12)
        ps = s.truncate(M)
        lit = appell_f4(Fraction(1, 3), Fraction(2, 3), 1, 1, M)
        scaled = appell_f4(Fraction(1, 3), Fraction(2, 3), 1, 1, M, x_scale=-27, y_scale=-27)
        out.append(claim_true("gkz.1.appell.literal", "Appell F4(1/3,2/3,1,1;27lam,27mu)",
                              ps == lit))
        out.append(claim_true("gkz.1.appell.sign_corrected", "Appell F4(1/3,2/3,1,1;-27lam,-27mu)",
                              ps == scaled))
    return out


def pfaffian_certificate(j: int) -> tuple[list[Claim], dict]:
    from .pfaffian import (check_integrability, compare_entries, corrected_pfaffian, derived_system,
                           integrability_residual, matches_parameter_locus, pfaffian_data,
                           printed_pfaffian, singular_locus_from)

    D = derived_system(j)
    read = printed_pfaffian(j, "read")
    fixed = printed_pfaffian(j, "corrected")
    entries = compare_entries(read, D)
    bad = [e for e in entries if e.status != "match"]
    P = pfaffian_data(j)
    res = integrability_residual(P)
    nonzero = [{"row": i + 1, "col": k + 1, "value": _s(res[i][k])}
               for i in range(4) for k in range(4) if res[i][k] != 0]
    loc = singular_locus_from(D)
    out = [
        claim_true(f"pfaffian.{j}.derived.integrable", "integrability of the derived system",
                   check_integrability(D)),
        claim_true(f"pfaffian.{j}.printed.integrable", "integrability of the printed matrices",
                   not nonzero),
        claim_eq(f"pfaffian.{j}.printed.entrywise", "printed matrices vs derivation", len(bad), 0,
                 {"mismatched": [f"{e.matrix}[{e.row + 1}][{e.col + 1}]" for e in bad]}),
        claim_true(f"pfaffian.{j}.corrected.integrable", "integrability after repairs",
                   check_integrability(corrected_pfaffian(j))),
        claim_eq(f"pfaffian.{j}.corrected.entrywise", "repaired matrices vs derivation",
                 sum(1 for e in compare_entries(fixed, D) if e.status != "match"), 0),
        claim_true(f"pfaffian.{j}.singular_locus", "singular locus vs parameter domain",
                   matches_parameter_locus(loc, j),
                   {"true": sorted(_s(f) for f in loc.true_factors),
                    "apparent": sorted(_s(f) for f in loc.apparent_factors)}),
    ]
    cert = {"family": j, "entries": [e.to_json() for e in entries], "printed_residual": nonzero}
    return out, cert


def suite_hilbert(cfg: Config) -> list[Claim]:
    from .hilbert import verify_all

    return [Claim(f"hilbert.{r['claim']}", "uniformizing equation correspondence",
                  "true" if r["verdict"] == "pass" else "false", "true", r["verdict"],
                  {"detail": r["detail"]} if r["detail"] else {})
            for r in verify_all()]


def sample_points(cfg: Config, j: int) -> list[tuple[Fraction, Fraction]]:
    from .fibrations import random_lambda_point

    rng = random.Random(cfg.seed * 10 + j)
    return [random_lambda_point(j, rng) for _ in range(cfg.samples)]


def fibre_claims(j: int, lam0: Fraction, mu0: Fraction, variant: str = "default") -> tuple[list[Claim], dict]:
    from .fibrations import expected_fibres, fibre_table

    T = fibre_table(j, lam0, mu0, variant)
    tag = f"fibres.{j}.{variant}.({_s(lam0)},{_s(mu0)})"
    exp = expected_fibres(j, variant)
    got = T.multiset()
    fmt = lambda c: " + ".join(f"{c[k]}{k}" if c[k] > 1 else k for k in sorted(c))
    claims = [Claim(f"{tag}.types", "singular fibre list", fmt(got), fmt(exp),
                    "pass" if got == exp else "fail"),
              claim_eq(f"{tag}.euler", "Euler number", T.euler_sum, 24)]
    return claims, T.to_json()


def suite_fibres(cfg: Config) -> list[Claim]:
    out = []
    for j in range(4):
        for lam0, mu0 in sample_points(cfg, j):
            out.extend(fibre_claims(j, lam0, mu0)[0])
    return out


# ---------------------------------------------------------------------------
# monodromy


def parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise UsageError(f"not a complex number: {text!r}") from None


def monodromy_loop(j: int, kind: str, center: tuple[complex, complex], radius: float | None):
    from .monodromy import circle, discriminant_circle, isolating_circle

    lam0, mu0 = center
    if kind == "lambda-circle":
        if radius is None:
            return isolating_circle("lam", j, mu0, lam0)
        return circle("lam", (lam0 + radius, mu0), lam0)
    if kind == "mu-circle":
        if radius is None:
            return isolating_circle("mu", j, lam0, mu0)
        return circle("mu", (lam0, mu0 + radius), mu0)
    if kind == "disc-circle":
        loop = discriminant_circle(j, lam0, near=mu0)
        if radius is None:
            return loop
        root = loop.segments[0].center
        return circle("mu", (lam0, root + radius), root)
    raise UsageError(f"unknown loop kind {kind!r}")


def run_monodromy(j: int, kind: str, center, radius, tol: float) -> tuple[list[Claim], dict]:
    import numpy as np

    from .monodromy import TransportError, char_poly_residual, integer_char_poly, quasi_unipotent, transport

    loop = monodromy_loop(j, kind, center, radius)
    try:
        res = transport(j, loop, tol=tol)
    except TransportError as e:
        raise UsageError(str(e)) from None
    M = res.M
    cp = integer_char_poly(M, 1e-6)
    qu, orders = quasi_unipotent(M, 1e-6)
    sq = float(np.abs(M @ M - np.eye(4)).max())
    cres = char_poly_residual(M)
    claims = [
        claim_true("monodromy.step_halving", "transport convergence", res.converged,
                   {"error": f"{res.error:.3e}"}),
        claim_true("monodromy.integral_char_poly", "characteristic polynomial", cp is not None,
                   {"residual": f"{cres:.3e}"}),
        claim_true("monodromy.quasi_unipotent", "local monodromy", qu, {"root_orders": orders}),
    ]
    if kind == "disc-circle":
        claims.append(claim_true("monodromy.reflection", "square of the discriminant loop",
                                 sq < 1e-6, {"residual": f"{sq:.3e}"}))
    rnd = lambda z: [round(float(z.real), 9), round(float(z.imag), 9)]
    extra = {
        "family": j, "loop": kind,
        "basepoint": [rnd(complex(c)) for c in loop.basepoint],
        "matrix": [[rnd(z) for z in row] for row in M],
        "char_poly": cp if cp is not None else [rnd(complex(c)) for c in np.poly(M)],
        "residuals": {"transport": float(f"{res.error:.3e}"), "char_poly": float(f"{cres:.3e}"),
                      "square_minus_identity": float(f"{sq:.3e}")},
    }
    return claims, extra


# ---------------------------------------------------------------------------
# argument parsing


def _family(text: str) -> int:
    try:
        j = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid family {text!r}") from None
    if j not in (0, 1, 2, 3):
        raise argparse.ArgumentTypeError("family must be 0, 1, 2 or 3")
    return j


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"invalid rational {text!r}") from None


def _center(text: str) -> tuple[complex, complex]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("center must be lam,mu")
    try:
        return tuple(complex(p.strip().replace("i", "j")) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid center {text!r}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="k3lab", description="Exact verification suites for five-vertex K3 families.")
    p.add_argument("--config", help="key=value configuration file")
    p.add_argument("--cache-dir", help="directory for cached series (overrides K3LAB_CACHE)")
    p.add_argument("--no-cache", action="store_true", help="do not read or write the cache")
    p.add_argument("--order", type=int, help="series order N (default 14)")
    p.add_argument("--bound", type=int, help="search bound for lattice congruences (default 3)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", help="run a verification suite")
    vs = v.add_subparsers(dest="suite", required=True, parser_class=_Parser)
    vs.add_parser("lattices")
    vs.add_parser("polytopes")
    g = vs.add_parser("gkz")
    g.add_argument("--family", type=_family, required=True)
    g.add_argument("--order", type=int, dest="suite_order")
    pf = vs.add_parser("pfaffian")
    pf.add_argument("--family", type=_family, required=True)
    vs.add_parser("hilbert")

    f = sub.add_parser("fibres", help="singular fibres at a parameter point")
    f.add_argument("--family", type=_family, required=True)
    f.add_argument("--lambda", dest="lam", type=_rational, required=True)
    f.add_argument("--mu", type=_rational, required=True)
    f.add_argument("--variant", choices=("default", "alternate"), default="default")

    m = sub.add_parser("monodromy", help="numerical monodromy of one loop")
    m.add_argument("--family", type=_family, required=True)
    m.add_argument("--loop", choices=("lambda-circle", "mu-circle", "disc-circle"), required=True)
    m.add_argument("--center", type=_center, required=True)
    m.add_argument("--radius", type=float)
    m.add_argument("--tol", type=float)

    r = sub.add_parser("report", help="all exact suites")
    r.add_argument("--format", choices=("json", "text"), default="json")

    h = sub.add_parser("hilbert", help="uniformizing equation correspondence")
    h.add_argument("action", choices=("verify-all",))
    return p


def _config_from(args) -> Config:
    over = {"order": args.order, "bound": args.bound}
    if getattr(args, "suite_order", None) is not None:
        over["order"] = args.suite_order
    if getattr(args, "tol", None) is not None:
        over["tol"] = args.tol
    if args.cache_dir:
        over["cache_dir"] = args.cache_dir
    cfg = load_config(args.config, over)
    if args.no_cache:
        cfg = replace(cfg, cache_dir=None)
    return cfg


def dispatch(args, out) -> int:
    cfg = _config_from(args)
    cache = SeriesCache(cfg.cache_dir)
    cmd = args.command
    if cmd == "verify":
        suite = args.suite
        if suite == "lattices":
            rep = build_report("verify lattices", suite_lattices(cfg))
        elif suite == "polytopes":
            rep = build_report("verify polytopes", suite_polytopes(cfg))
        elif suite == "gkz":
            rep = build_report(f"verify gkz --family {args.family} --order {cfg.order}",
                               suite_gkz(cfg, args.family, cfg.order, cache))
        elif suite == "pfaffian":
            claims, cert = pfaffian_certificate(args.family)
            rep = build_report(f"verify pfaffian --family {args.family}", claims, {"certificate": cert})
        else:
            rep = build_report("verify hilbert", suite_hilbert(cfg))
    elif cmd == "hilbert":
        rep = build_report("hilbert verify-all", suite_hilbert(cfg))
    elif cmd == "fibres":
        from .fibrations import in_lambda

        if not in_lambda(args.family, args.lam, args.mu):
            raise UsageError("the point lies on the singular locus of the family")
        claims, table = fibre_claims(args.family, args.lam, args.mu, args.variant)
        rep = build_report(f"fibres --family {args.family} --lambda {_s(args.lam)} --mu {_s(args.mu)}",
                           claims, {"table": table})
    elif cmd == "monodromy":
        claims, extra = run_monodromy(args.family, args.loop, args.center, args.radius, cfg.tol)
        rep = build_report(f"monodromy --family {args.family} --loop {args.loop}", claims, extra)
    else:
        claims = (suite_polytopes(cfg) + suite_lattices(cfg)
                  + [c for j in range(4) for c in suite_gkz(cfg, j, cfg.order, cache)]
                  + [c for j in range(4) for c in pfaffian_certificate(j)[0]]
                  + suite_hilbert(cfg) + suite_fibres(cfg))
        rep = build_report("report", claims)
        if args.format == "text":
            out.write(render_text(rep) + "\n")
            return exit_code(rep)
    out.write(dumps(rep) + "\n")
    return exit_code(rep)


def run(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else EXIT_USAGE
    try:
        return dispatch(args, out)
    except UsageError as e:
        print(f"k3lab: error: {e}", file=sys.stderr)
        return EXIT_USAGE


def main(argv: Sequence[str] | None = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
