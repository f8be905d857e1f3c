"""Declarative scenario files: parse, dispatch, grade, and emit reports.

A scenario is a JSON document that fixes a chart model, a map triple,
named scalar fields and regions, and a list of checks with explicit
expectations.  Expectations make suites self-grading: the run PASSes only
when every check lands on its expected verdict, and any theorem harness
that reports VIOLATED under verified premises escalates the whole run to
FALSIFICATION.

Everything that can influence numbers lives in the file (seeds included);
command-line flags only select paths, formats, parallelism, and explicit
key overrides, so a fixed file + seed + version reproduces byte-identical
reports.
"""

from __future__ import annotations

import json
import math
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .errors import ConfigError, EmptyNeighborhood, InfeasibleStart, InvexkitError, PremiseFailure
from .geometry import Manifold, Point, manifold_from_dict
from .invexity import (
    check_convex_function_classical,
    check_convex_set_classical,
    check_convex_set_flat,
    check_geodesic_invex_set,
    check_invex_function,
    check_invex_set_flat,
    check_level_set_invex,
    check_preinvex,
    check_sum_preinvex,
    check_transport_compatibility,
    theorem_invex_plus_compat_implies_preinvex,
    theorem_preinvex_implies_invex,
)
from .maps import (
    MapTriple,
    bimap_from_dict,
    point_map_from_dict,
    scalar_field_from_dict,
    set_predicate_from_dict,
)
from .optimize import (
    Backtracking,
    DescentConfig,
    FixedStep,
    geodesic_descent,
    multistart_local_global,
    solution_set_invex,
)
from .report import HOLDS, INCONCLUSIVE, VIOLATED, CheckReport, canonical_json
from .sampling import scheme_from_dict
from .subgradient import (
    DEFAULT_LAMBDA_GRID,
    ProximalCertificate,
    search_proximal_subgradient,
    theorem_proximal_direction_bound,
    verify_proximal_subgradient,
)

__all__ = [
    "Scenario",
    "CheckSpec",
    "RunReport",
    "run_scenario",
    "scenario_from_dict",
    "emit_report",
    "apply_override",
]

PASS = "PASS"
FAIL = "FAIL"
FALSIFICATION = "FALSIFICATION"

_EXPECTATIONS = {
    "holds": HOLDS,
    "violated": VIOLATED,
    "inconclusive": INCONCLUSIVE,
}


@dataclass(frozen=True)
class CheckSpec:
    name: str
    op: str
    expect: str
    scheme: object
    args: dict
    maps: MapTriple


@dataclass(frozen=True)
class Scenario:
    name: str
    manifold: Manifold
    maps: MapTriple
    fields: dict
    sets: dict
    checks: tuple
    raw: dict


@dataclass
class RunReport:
    scenario: str
    version: str
    overall: str
    checks: list
    totals: dict
    timing_ms: float | None = None

    def to_dict(self):
        d = {
            "scenario": self.scenario,
            "version": self.version,
            "overall": self.overall,
            "checks": self.checks,
            "totals": self.totals,
        }
        if self.timing_ms is not None:
            d["timing_ms"] = self.timing_ms
        return d

    def exit_code(self) -> int:
        return {PASS: 0, FAIL: 1, FALSIFICATION: 2}[self.overall]


# ---------------------------------------------------------------------------
# parsing


def _parse_maps(d: dict, manifold: Manifold, where: str) -> MapTriple:
    if not isinstance(d, dict):
        raise ConfigError("maps must be a dict with target/base/direction", where)
    return MapTriple(
        target=point_map_from_dict(d.get("target", {"kind": "identity"}), manifold, where + ".target"),
        base=point_map_from_dict(d.get("base", {"kind": "identity"}), manifold, where + ".base"),
        direction=bimap_from_dict(d.get("direction"), manifold, where + ".direction"),
    )


def _parse_descent_config(d: dict, where: str) -> DescentConfig:
    if d is None:
        return DescentConfig()
    if not isinstance(d, dict):
        raise ConfigError("descent config must be a dict", where)
    step_d = d.get("step", {"kind": "backtracking"})
    kind = step_d.get("kind")
    try:
        if kind == "fixed":
            step = FixedStep(eta=float(step_d["eta"]))
        elif kind == "backtracking":
            step = Backtracking(
                eta0=float(step_d.get("eta0", 1.0)),
                shrink=float(step_d.get("shrink", 0.5)),
                armijo=float(step_d.get("armijo", 1e-4)),
            )
        else:
            raise ConfigError(f"unknown step kind {kind!r}", where + ".step")
        return DescentConfig(
            step=step,
            max_iters=int(d.get("max_iters", 500)),
            grad_tol=float(d.get("grad_tol", 1e-9)),
            subgradient_mode=bool(d.get("subgradient_mode", False)),
        )
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad descent config: {exc}", where)


def scenario_from_dict(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise ConfigError("scenario document must be a JSON object")
    name = doc.get("name")
    if not name or not isinstance(name, str):
        raise ConfigError("scenario needs a string 'name'", "name")
    try:
        manifold = manifold_from_dict(doc.get("manifold", {}))
    except InvexkitError as exc:
        raise ConfigError(str(exc), "manifold")
    maps = _parse_maps(doc.get("maps"), manifold, "maps")
    fields = {
        key: scalar_field_from_dict(fd, manifold, f"fields.{key}")
        for key, fd in doc.get("fields", {}).items()
    }
    sets = {
        key: set_predicate_from_dict(sd, manifold, f"sets.{key}")
        for key, sd in doc.get("sets", {}).items()
    }
    default_scheme_doc = doc.get("scheme")
    checks = []
    seen = set()
    for i, cd in enumerate(doc.get("checks", [])):
        where = f"checks[{i}]"
        if not isinstance(cd, dict):
            raise ConfigError("check must be a dict", where)
        cname = cd.get("name") or f"check_{i}"
        if cname in seen:
            raise ConfigError(f"duplicate check name {cname!r}", where)
        seen.add(cname)
        op = cd.get("op")
        if op not in _OPS:
            raise ConfigError(
                f"unknown op {op!r}; known ops: {', '.join(sorted(_OPS))}", where + ".op"
            )
        expect = cd.get("expect")
        if expect not in _EXPECTATIONS:
            raise ConfigError(
                f"expect must be one of {sorted(_EXPECTATIONS)}, got {expect!r}",
                where + ".expect",
            )
        scheme_doc = cd.get("scheme", default_scheme_doc)
        if scheme_doc is None:
            raise ConfigError("no scheme given (check-level or scenario-level)", where)
        scheme = scheme_from_dict(scheme_doc, manifold, where + ".scheme")
        cmaps = maps
        if "maps" in cd:
            cmaps = _parse_maps(cd["maps"], manifold, where + ".maps")
        checks.append(
            CheckSpec(
                name=cname,
                op=op,
                expect=expect,
                scheme=scheme,
                args=cd.get("args", {}),
                maps=cmaps,
            )
        )
    if not isinstance(doc.get("checks", []), list):
        raise ConfigError("checks must be a list", "checks")
    return Scenario(
        name=name,
        manifold=manifold,
        maps=maps,
        fields=fields,
        sets=sets,
        checks=tuple(checks),
        raw=doc,
    )


# ---------------------------------------------------------------------------
# op dispatch


def _named_field(scn: Scenario, args: dict, where: str, key: str = "field"):
    name = args.get(key)
    if name not in scn.fields:
        raise ConfigError(
            f"unknown field {name!r}; scenario defines {sorted(scn.fields)}", f"{where}.args.{key}"
        )
    return scn.fields[name]


def _named_set(scn: Scenario, args: dict, where: str, key: str = "region", required=True):
    name = args.get(key)
    if name is None and not required:
        return None
    if name not in scn.sets:
        raise ConfigError(
            f"unknown set {name!r}; scenario defines {sorted(scn.sets)}", f"{where}.args.{key}"
        )
    return scn.sets[name]


def _parse_cert(scn: Scenario, args: dict, where: str) -> ProximalCertificate:
    d = args.get("certificate")
    if not isinstance(d, dict):
        raise ConfigError("op needs a 'certificate' dict", f"{where}.args.certificate")
    try:
        base = scn.manifold.point(np.asarray(d["base"], dtype=float), project=True)
        sigma = scn.manifold.tangent(base, np.asarray(d["sigma"], dtype=float), project=True)
        return ProximalCertificate(base, sigma, float(d["lambda"]), float(d["mu"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad certificate: {exc}", f"{where}.args.certificate")
    except InvexkitError as exc:
        raise ConfigError(str(exc), f"{where}.args.certificate")


def _parse_point_arg(scn: Scenario, args: dict, key: str, where: str) -> Point:
    try:
        return scn.manifold.point(np.asarray(args[key], dtype=float), project=True)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad point {key!r}: {exc}", f"{where}.args.{key}")
    except InvexkitError as exc:
        raise ConfigError(str(exc), f"{where}.args.{key}")


def _op_invex_set_flat(scn, spec, where, jobs):
    return check_invex_set_flat(_named_set(scn, spec.args, where), spec.maps, spec.scheme)


def _op_convex_set_flat(scn, spec, where, jobs):
    return check_convex_set_flat(
        _named_set(scn, spec.args, where), spec.maps.target, spec.maps.base, spec.scheme
    )


def _op_convex_set_classical(scn, spec, where, jobs):
    return check_convex_set_classical(_named_set(scn, spec.args, where), spec.scheme)


def _op_convex_function_classical(scn, spec, where, jobs):
    return check_convex_function_classical(
        _named_field(scn, spec.args, where),
        spec.scheme,
        domain=_named_set(scn, spec.args, where, key="domain", required=False),
    )


def _op_geodesic_invex_set(scn, spec, where, jobs):
    return check_geodesic_invex_set(_named_set(scn, spec.args, where), spec.maps, spec.scheme)


def _op_preinvex(scn, spec, where, jobs):
    return check_preinvex(
        _named_field(scn, spec.args, where),
        spec.maps,
        spec.scheme,
        strict=bool(spec.args.get("strict", False)),
        domain=_named_set(scn, spec.args, where, key="domain", required=False),
    )


def _op_invex_function(scn, spec, where, jobs):
    return check_invex_function(
        _named_field(scn, spec.args, where),
        spec.maps,
        spec.scheme,
        domain=_named_set(scn, spec.args, where, key="domain", required=False),
    )


def _op_transport_compatibility(scn, spec, where, jobs):
    return check_transport_compatibility(
        spec.maps,
        spec.scheme,
        domain=_named_set(scn, spec.args, where, key="domain", required=False),
    )


def _op_sum_preinvex(scn, spec, where, jobs):
    terms = []
    for j, t in enumerate(spec.args.get("terms", [])):
        try:
            weight = float(t[0])
            fname = t[1]
        except (TypeError, ValueError, IndexError):
            raise ConfigError(
                "terms must be [weight, field_name] pairs", f"{where}.args.terms[{j}]"
            )
        if fname not in scn.fields:
            raise ConfigError(f"unknown field {fname!r}", f"{where}.args.terms[{j}]")
        terms.append((weight, scn.fields[fname]))
    return check_sum_preinvex(
        terms,
        spec.maps,
        spec.scheme,
        domain=_named_set(scn, spec.args, where, key="domain", required=False),
    )


def _op_level_set_invex(scn, spec, where, jobs):
    try:
        level = float(spec.args["level"])
    except (KeyError, TypeError, ValueError):
        raise ConfigError("op needs a numeric 'level'", f"{where}.args.level")
    return check_level_set_invex(
        _named_field(scn, spec.args, where),
        level,
        spec.maps,
        spec.scheme,
        domain=_named_set(scn, spec.args, where, key="domain", required=False),
    )


def _op_thm_preinvex_implies_invex(scn, spec, where, jobs):
    return theorem_preinvex_implies_invex(
        _named_field(scn, spec.args, where),
        spec.maps,
        spec.scheme,
        domain=_named_set(scn, spec.args, where, key="domain", required=False),
    )


def _op_thm_invex_plus_compat(scn, spec, where, jobs):
    return theorem_invex_plus_compat_implies_preinvex(
        _named_field(scn, spec.args, where),
        spec.maps,
        spec.scheme,
        domain=_named_set(scn, spec.args, where, key="domain", required=False),
    )


def _op_verify_proximal(scn, spec, where, jobs):
    return verify_proximal_subgradient(
        _named_field(scn, spec.args, where), _parse_cert(scn, spec.args, where), spec.scheme
    )


def _op_search_proximal(scn, spec, where, jobs):
    h = _named_field(scn, spec.args, where)
    base = _parse_point_arg(scn, spec.args, "base", where)
    try:
        mu = float(spec.args["mu"])
    except (KeyError, TypeError, ValueError):
        raise ConfigError("op needs a numeric 'mu'", f"{where}.args.mu")
    grid = tuple(float(v) for v in spec.args.get("lambda_grid", DEFAULT_LAMBDA_GRID))
    certs = search_proximal_subgradient(h, base, mu, spec.scheme, lambda_grid=grid)
    rep = CheckReport(
        op="search_proximal_subgradient",
        verdict=HOLDS if certs else VIOLATED,
        tol=spec.scheme.tol,
        scheme=spec.scheme.to_dict(),
        details={"n_found": len(certs), "certificates": [c.to_dict() for c in certs]},
        notes=()
        if certs
        else ("no certificate in the candidate grid survived verification "
              "(the proximal subdifferential may be empty)",),
    )
    return rep


def _op_thm_proximal_direction_bound(scn, spec, where, jobs):
    return theorem_proximal_direction_bound(
        _named_field(scn, spec.args, where),
        spec.maps,
        _named_set(scn, spec.args, where),
        _parse_cert(scn, spec.args, where),
        spec.scheme,
    )


def _op_geodesic_descent(scn, spec, where, jobs):
    h = _named_field(scn, spec.args, where)
    start = _parse_point_arg(scn, spec.args, "start", where)
    cfg = _parse_descent_config(spec.args.get("config"), f"{where}.args.config")
    region = _named_set(scn, spec.args, where, key="region", required=False)
    res = geodesic_descent(h, start, cfg, region)
    return CheckReport(
        op="geodesic_descent",
        verdict=HOLDS if res.converged else INCONCLUSIVE,
        tol=cfg.grad_tol,
        scheme=spec.scheme.to_dict(),
        details={
            "minimizer": [float(t) for t in res.minimizer.coords],
            "value": res.value,
            "iterations": res.iterations,
            "converged": res.converged,
            "stop_reason": res.stop_reason,
        },
    )


def _op_multistart(scn, spec, where, jobs):
    try:
        n_starts = int(spec.args["n_starts"])
    except (KeyError, TypeError, ValueError):
        raise ConfigError("op needs an integer 'n_starts'", f"{where}.args.n_starts")
    cfg = _parse_descent_config(spec.args.get("config"), f"{where}.args.config")
    return multistart_local_global(
        _named_field(scn, spec.args, where),
        spec.maps,
        _named_set(scn, spec.args, where),
        n_starts,
        cfg,
        spec.scheme,
        demonstration=bool(spec.args.get("demonstration", False)),
        tol_spread=float(spec.args.get("tol_spread", 1e-6)),
        jobs=jobs,
    )


def _op_solution_set_invex(scn, spec, where, jobs):
    h = _named_field(scn, spec.args, where)
    region = _named_set(scn, spec.args, where)
    if "pool" in spec.args:
        try:
            results = [
                scn.manifold.point(np.asarray(p, dtype=float), project=True)
                for p in spec.args["pool"]
            ]
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad pool: {exc}", f"{where}.args.pool")
        except InvexkitError as exc:
            raise ConfigError(str(exc), f"{where}.args.pool")
    else:
        try:
            n_starts = int(spec.args["n_starts"])
        except (KeyError, TypeError, ValueError):
            raise ConfigError(
                "op needs 'pool' points or an integer 'n_starts'", f"{where}.args"
            )
        cfg = _parse_descent_config(spec.args.get("config"), f"{where}.args.config")
        from .optimize import _feasible_seeds  # local import: private helper reuse

        seeds = _feasible_seeds(spec.scheme, region, n_starts)
        results = [geodesic_descent(h, p, cfg, region) for p in seeds]
    return solution_set_invex(
        h,
        spec.maps,
        region,
        results,
        spec.scheme,
        strict=bool(spec.args.get("strict", False)),
        tol_opt=(float(spec.args["tol_opt"]) if "tol_opt" in spec.args else None),
        tol_diam=float(spec.args.get("tol_diam", 1e-6)),
    )


_OPS = {
    "check_invex_set_flat": _op_invex_set_flat,
    "check_convex_set_flat": _op_convex_set_flat,
    "check_convex_set_classical": _op_convex_set_classical,
    "check_convex_function_classical": _op_convex_function_classical,
    "check_geodesic_invex_set": _op_geodesic_invex_set,
    "check_preinvex": _op_preinvex,
    "check_invex_function": _op_invex_function,
    "check_transport_compatibility": _op_transport_compatibility,
    "check_sum_preinvex": _op_sum_preinvex,
    "check_level_set_invex": _op_level_set_invex,
    "theorem_preinvex_implies_invex": _op_thm_preinvex_implies_invex,
    "theorem_invex_plus_compat_implies_preinvex": _op_thm_invex_plus_compat,
    "verify_proximal_subgradient": _op_verify_proximal,
    "search_proximal_subgradient": _op_search_proximal,
    "theorem_proximal_direction_bound": _op_thm_proximal_direction_bound,
    "geodesic_descent": _op_geodesic_descent,
    "multistart_local_global": _op_multistart,
    "solution_set_invex": _op_solution_set_invex,
}


# ---------------------------------------------------------------------------
# overrides and execution


def apply_override(doc: dict, key: str, value):
    """Set a dotted/indexed path like ``checks[0].scheme.n_pairs`` in-place."""
    parts = []
    for chunk in key.split("."):
        while "[" in chunk:
            head, rest = chunk.split("[", 1)
            idx, chunk = rest.split("]", 1)
            if head:
                parts.append(head)
            parts.append(int(idx))
        if chunk:
            parts.append(chunk)
    node = doc
    for i, part in enumerate(parts[:-1]):
        try:
            node = node[part]
        except (KeyError, IndexError, TypeError):
            raise ConfigError(f"override path does not resolve at {part!r}", key)
    last = parts[-1]
    try:
        node[last] = value
    except (IndexError, TypeError):
        raise ConfigError(f"override path does not resolve at {last!r}", key)


def _override_seeds(doc: dict, seed: int):
    def walk(node):
        if isinstance(node, dict):
            for k, v in node.items():
                if k == "rng_seed":
                    node[k] = seed
                else:
                    walk(v)
        elif isinstance(node, list):
            for v in node:
                walk(v)

    walk(doc)


def run_check(scn: Scenario, spec: CheckSpec, jobs: int = 1) -> CheckReport:
    where = f"checks[{spec.name}]"
    runner = _OPS[spec.op]
    try:
        return runner(scn, spec, where, jobs)
    except PremiseFailure as exc:
        return CheckReport(
            op=spec.op,
            verdict=INCONCLUSIVE,
            tol=spec.scheme.tol,
            scheme=spec.scheme.to_dict(),
            details={"failed_premise": exc.premise},
            notes=(f"premise_failure: {exc}",),
            theorem_harness=True,
        )
    except (EmptyNeighborhood, InfeasibleStart) as exc:
        return CheckReport(
            op=spec.op,
            verdict=INCONCLUSIVE,
            tol=spec.scheme.tol,
            scheme=spec.scheme.to_dict(),
            notes=(f"{type(exc).__name__}: {exc}",),
        )


def run_scenario(
    source,
    *,
    seed: int | None = None,
    set_overrides=(),
    jobs: int = 1,
    include_timing: bool = False,
) -> RunReport:
    """Execute a scenario file (path) or pre-parsed document (dict)."""
    if isinstance(source, dict):
        doc = json.loads(json.dumps(source))  # private copy
    else:
        try:
            with open(source, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read scenario file: {exc}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"scenario file is not valid JSON: {exc}")
    for key, value in set_overrides:
        apply_override(doc, key, value)
    if seed is not None:
        _override_seeds(doc, seed)

    scn = scenario_from_dict(doc)
    t0 = time.perf_counter()
    checks = []
    n_evaluated = 0
    n_falsifications = 0
    n_met = 0
    for spec in scn.checks:
        rep = run_check(scn, spec, jobs=jobs)
        met = rep.verdict == _EXPECTATIONS[spec.expect]
        n_met += int(met)
        n_evaluated += rep.n_evaluated
        n_falsifications += int(rep.falsification)
        checks.append(
            {
                "name": spec.name,
                "op": spec.op,
                "expect": spec.expect,
                "verdict": rep.verdict,
                "expectation_met": met,
                "falsification": rep.falsification,
                "report": rep.to_dict(),
            }
        )
    elapsed_ms = (time.perf_counter() - t0) * 1000.0
    if n_falsifications:
        overall = FALSIFICATION
    elif n_met == len(checks):
        overall = PASS
    else:
        overall = FAIL
    return RunReport(
        scenario=scn.name,
        version=__version__,
        overall=overall,
        checks=checks,
        totals={
            "n_checks": len(checks),
            "n_expectations_met": n_met,
            "n_evaluated": n_evaluated,
            "n_falsifications": n_falsifications,
        },
        timing_ms=elapsed_ms if include_timing else None,
    )


# ---------------------------------------------------------------------------
# emission


def emit_report(report: RunReport, fmt: str = "json") -> str:
    if fmt == "json":
        return canonical_json(report.to_dict()) + "\n"
    if fmt == "text":
        return _emit_text(report)
    if fmt == "csv":
        return _emit_csv(report)
    raise ConfigError(f"unknown format {fmt!r} (expected json, text, or csv)")


def _emit_text(report: RunReport) -> str:
    lines = [
        f"scenario: {report.scenario}",
        f"toolkit:  invexkit {report.version}",
        f"overall:  {report.overall}",
        "",
    ]
    for c in report.checks:
        status = "ok " if c["expectation_met"] else "MISS"
        lines.append(
            f"[{status}] {c['name']} ({c['op']}): verdict={c['verdict']} expected={c['expect']}"
        )
        r = c["report"]
        lines.append(
            f"       evaluated={r['n_evaluated']} skipped={r['n_skipped']} "
            f"inconclusive={r['n_inconclusive']} max_gap={r['max_gap']!r} tol={r['tol']!r}"
        )
        for key in sorted(r["details"]):
            lines.append(f"       {key}={r['details'][key]!r}")
        for note in r["notes"]:
            lines.append(f"       note: {note}")
        for w in r["witnesses"][:5]:
            lines.append(
                f"       witness[{w['index']}] label={w['label']!r} param={w['param']!r} "
                f"first={w['first']!r} second={w['second']!r}"
            )
            lines.append(
                f"            lhs={w['lhs']!r} rhs={w['rhs']!r} gap={w['gap']!r}"
            )
        if c["falsification"]:
            lines.append("       *** FALSIFICATION EVENT ***")
    t = report.totals
    lines.append("")
    lines.append(
        f"checks={t['n_checks']} met={t['n_expectations_met']} "
        f"evaluations={t['n_evaluated']} falsifications={t['n_falsifications']}"
    )
    if report.timing_ms is not None:
        lines.append(f"wall_ms={report.timing_ms:.3f}")
    return "\n".join(lines) + "\n"


def _emit_csv(report: RunReport) -> str:
    rows = ["name,op,expect,verdict,expectation_met,falsification,n_evaluated,max_gap"]
    for c in report.checks:
        r = c["report"]
        rows.append(
            ",".join(
                [
                    c["name"],
                    c["op"],
                    c["expect"],
                    c["verdict"],
                    str(c["expectation_met"]).lower(),
                    str(c["falsification"]).lower(),
                    str(r["n_evaluated"]),
                    repr(r["max_gap"]) if r["max_gap"] is not None else "",
                ]
            )
        )
    return "\n".join(rows) + "\n"


def write_atomic(path: str, content: str):
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(content)
    os.replace(tmp, path)
