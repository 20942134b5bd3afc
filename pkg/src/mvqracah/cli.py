"""Command-line front end: ``mvqracah {eval,table,gram,verify,limits}``.

Jobs are described by a JSON config in which every number is a string, so
rationals cross the I/O boundary without loss.  A minimal config::

    {
      "family": "QRacahMV",
      "s": "2", "N": "3",
      "q_root": "1/2",
      "a_roots": ["1/3", "2/5", "3/7"],
      "b_root": "2/9"
    }

Parameters may be given by their square roots (``q_root``, ``a_roots``,
``b_root``, ``beta_root``) or by value (``q``, ``a``, ``b``, ``beta``).  A
value needs a rational square root in the exact backend; the float backend
takes the square root numerically.  The classical Racah system uses plain
``a`` and ``eta``.

Exit codes: 0 every check passed, 1 a verification failed, 2 configuration
or evaluation error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

from . import families as fam
from . import multivar as mv
from . import verify as V
from .scalar import DEFAULT_PRECISION, MIN_PRECISION, Backend, FloatBackend, RootParam, get_backend

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_ERROR = 2

DEFAULT_TOL = "1e-20"
DEFAULT_EPSILONS = ("1e-4", "1e-6")


class ConfigError(ValueError):
    """The job configuration is malformed or inconsistent."""


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------


def _parse_rational(text, what: str) -> Fraction:
    if isinstance(text, bool) or not isinstance(text, (str, int)):
        raise ConfigError(f"{what}: expected a number written as a string, got {text!r}")
    text = str(text).strip()
    try:
        value = Fraction(text)
    except ZeroDivisionError:
        raise ConfigError(f"{what}: zero denominator in {text!r}") from None
    except ValueError:
        raise ConfigError(f"{what}: cannot parse {text!r} as a rational") from None
    return value


def _parse_int(text, what: str) -> int:
    v = _parse_rational(text, what)
    if v.denominator != 1:
        raise ConfigError(f"{what}: expected an integer, got {text!r}")
    return int(v)


def _exact_sqrt(v: Fraction, what: str) -> Fraction:
    if v < 0:
        raise ConfigError(f"{what}: negative value {v} has no real square root")
    n, d = math.isqrt(v.numerator), math.isqrt(v.denominator)
    if n * n != v.numerator or d * d != v.denominator:
        raise ConfigError(f"{what}: {v} is not the square of a rational; give its root instead")
    return Fraction(n, d)


class Job:
    """A resolved configuration: backend, parameters and run options."""

    def __init__(self, raw: Dict, overrides: Optional[Dict] = None):
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        cfg = dict(raw)
        for k, v in (overrides or {}).items():
            if v is not None:
                cfg[k] = v
        self.raw = cfg
        self.family = cfg.get("family")
        if self.family not in mv.FAMILIES_MV:
            raise ConfigError(f"unknown family {self.family!r}; choose from {', '.join(mv.FAMILIES_MV)}")
        default_backend = "exact" if self.family in mv.EXACT_FAMILIES else "float"
        self.backend_name = cfg.get("backend", default_backend)
        self.precision = _parse_int(cfg.get("precision", str(DEFAULT_PRECISION)), "precision")
        if self.precision < MIN_PRECISION:
            raise ConfigError(f"precision must be >= {MIN_PRECISION} bits, got {self.precision}")
        try:
            self.backend: Backend = get_backend(self.backend_name, self.precision)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.backend.exact and self.family not in mv.EXACT_FAMILIES:
            raise ConfigError(f"{self.family} needs the float backend")
        self.threads = _parse_int(cfg.get("threads", "1"), "threads")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        self.tol = None
        if not self.backend.exact:
            tol = _parse_rational(cfg.get("tol", DEFAULT_TOL), "tol")
            if tol <= 0:
                raise ConfigError("tol must be > 0 for float jobs")
            self.tol = tol
        self.degree_cap = _parse_int(cfg.get("degree_cap", str(V.DEFAULT_DEGREE_CAP)), "degree_cap")
        self.timing = str(cfg.get("timing", "true")).lower() != "false"
        variants = cfg.get("variants", {})
        if not isinstance(variants, dict):
            raise ConfigError("variants must be an object")
        self.params = self._params(cfg)
        try:
            self.F = mv.FamilyMV(self.family, self.params, dict(variants))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    # parameter parsing -----------------------------------------------------

    def _value(self, v: Fraction):
        return self.backend.convert(v)

    def _root_param(self, cfg, name: str, required: bool = True) -> Optional[RootParam]:
        if f"{name}_root" in cfg:
            return RootParam(self._value(_parse_rational(cfg[f"{name}_root"], f"{name}_root")))
        if name in cfg:
            v = _parse_rational(cfg[name], name)
            if self.backend.exact:
                return RootParam(_exact_sqrt(v, name))
            if v < 0:
                raise ConfigError(f"{name}: negative value {v} has no real square root")
            return RootParam(self.backend.ctx.sqrt(self._value(v)))
        if required:
            raise ConfigError(f"missing parameter {name!r} (or {name}_root)")
        return None

    def _root_list(self, cfg) -> tuple:
        if "a_roots" in cfg:
            vals = cfg["a_roots"]
            if not isinstance(vals, list):
                raise ConfigError("a_roots must be a list")
            return tuple(RootParam(self._value(_parse_rational(v, f"a_roots[{i}]"))) for i, v in enumerate(vals))
        if "a" in cfg:
            vals = cfg["a"]
            if not isinstance(vals, list):
                raise ConfigError("a must be a list")
            return tuple(self._root_param({"a": v}, "a") for v in vals)
        raise ConfigError("missing parameter list 'a' (or 'a_roots')")

    def _params(self, cfg) -> mv.ParamSetMV:
        if "s" not in cfg:
            raise ConfigError("missing 's'")
        s = _parse_int(cfg["s"], "s")
        if s < 1:
            raise ConfigError("s must be >= 1")
        N = None
        if self.family not in mv.INFINITE_FAMILIES:
            if "N" not in cfg:
                raise ConfigError(f"{self.family} needs 'N'")
            N = _parse_int(cfg["N"], "N")
            if N < 0:
                raise ConfigError("N must be >= 0")
        if self.family == mv.RACAH_MV:
            vals = cfg.get("a")
            if not isinstance(vals, list):
                raise ConfigError("the classical Racah system needs a list 'a'")
            a = tuple(self._value(_parse_rational(v, f"a[{i}]")) for i, v in enumerate(vals))
            if "eta" not in cfg:
                raise ConfigError("the classical Racah system needs 'eta'")
            return mv.ParamSetMV(s=s, a=a, N=N, eta=self._value(_parse_rational(cfg["eta"], "eta")))
        q = self._root_param(cfg, "q")
        a = self._root_list(cfg)
        b = self._root_param(cfg, "b", required=self.family in (mv.QRACAH_MV, mv.QRACAH_MV2))
        beta = self._root_param(cfg, "beta", required=self.family == mv.QMEIXNER_MV)
        return mv.ParamSetMV(s=s, a=a, q=q, b=b, N=N, beta=beta)

    # helpers -----------------------------------------------------------------

    def fmt(self, value) -> str:
        if isinstance(value, (Fraction, int)):
            return str(Fraction(value))
        return self.backend.format(value)

    def echo(self) -> Dict:
        """The config as run, with every option resolved (numbers as strings)."""
        out = {k: v for k, v in self.raw.items() if k not in ("backend", "precision", "threads", "tol", "degree_cap")}
        out["backend"] = self.backend_name
        out["precision"] = str(self.precision)
        out["threads"] = str(self.threads)
        if self.tol is not None:
            out["tol"] = str(self.raw.get("tol", DEFAULT_TOL))
        if self.family in mv.INFINITE_FAMILIES:
            out["degree_cap"] = str(self.degree_cap)
        return out

    def params_text(self) -> str:
        return ";".join(f"{k}={' '.join(v) if isinstance(v, list) else v}" for k, v in V.serialize_params(self.params).items())


def load_config(path: Optional[str]) -> Dict:
    if path is None:
        raise ConfigError("--config is required")
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc


def _vector(text, what: str, s: int) -> tuple:
    if text is None:
        raise ConfigError(f"missing {what}")
    items = text if isinstance(text, list) else str(text).split(",")
    vals = tuple(_parse_int(v, what) for v in items)
    if len(vals) != s:
        raise ConfigError(f"{what} needs {s} components, got {len(vals)}")
    return vals


# --------------------------------------------------------------------------
# reports
# --------------------------------------------------------------------------


def _write(text: str, out: Optional[str]):
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _report(job: Job, checks: List[Dict]) -> Dict:
    return {
        "config": job.echo(),
        "exact": bool(job.backend.exact),
        "status": "pass" if all(c["status"] == "pass" for c in checks) else "fail",
        "checks": checks,
    }


def _dump(report: Dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def _timed(job: Job, seconds: float):
    return round(seconds, 6) if job.timing else None


def _variant_rows(family: str) -> List[Dict[str, str]]:
    return [row for row in V.variant_catalog() if row["family"] == family]


def gram_check(job: Job, norm=None) -> Dict:
    F = job.F
    plan = None
    start = time.perf_counter()
    if not F.bounded:
        plan = V.plan_truncation(F, job.degree_cap, job.backend.convert(job.tol))
    rep = V.gram(F, plan=plan, threads=job.threads, tol=None if job.tol is None else job.backend.convert(job.tol), norm=norm)
    elapsed = time.perf_counter() - start
    witness = None
    if rep.witness is not None and not rep.passed:
        n, m = rep.witness
        kind = "diagonal" if n == m else "off-diagonal"
        witness = f"{kind} entry n={n} m={m}"
    check = {
        "name": f"gram:{F.id}",
        "formula": "sum_x P_n(x) P_m(x) rho(x) = delta_nm lambda_n",
        "status": "pass" if rep.passed else "fail",
        "max_residual": job.fmt(rep.max_abs_residual),
        "max_rel_residual": job.fmt(rep.max_rel_residual) if not rep.exact else str(rep.max_rel_residual),
        "witness": witness,
        "exact": rep.exact,
        "indices": len(rep.indices),
        "lattice_size": rep.lattice_size,
        "variants": _variant_rows(F.id),
        "wall_time": _timed(job, elapsed),
    }
    if plan is not None:
        check["truncation_cutoff"] = plan.cutoff
        check["truncation_bound"] = job.fmt(plan.bound)
        check["tol"] = job.fmt(job.backend.convert(job.tol))
    return check


def _identity_targets(job: Job) -> Dict[str, object]:
    """Identity checks meaningful for the configured family."""
    P, F = job.params, job.F
    out: Dict[str, object] = {}
    if F.id in (mv.QRACAH_MV, mv.QRACAH_MV2):
        out["weight_permutation"] = (P, {})
        out["second_family"] = (P, {})
        if P.s >= 2:
            for j in range(1, P.s):
                out[f"partial_sum:j={j}"] = (P, {"j": j})
        f1 = fam.Family1V(fam.QRACAH, {"a": P.ak(1), "b": P.b, "c": P.ak(2)}, P.N, P.q)
        out["sears_symmetry"] = (f1, {})
    if F.id == mv.QHAHN_MV and P.s >= 1:
        out["qhahn_label_invariance"] = (P, {})
    if F.id in (mv.DUAL_QHAHN_MV, mv.DUAL_QHAHN_STAR_MV):
        out["dstar_weight_relation"] = (P, {})
    return out


def identity_checks(job: Job, names: Optional[Sequence[str]] = None) -> List[Dict]:
    targets = _identity_targets(job)
    if names:
        missing = [n for n in names if n not in targets and not any(t.startswith(n + ":") for t in targets)]
        if missing:
            raise ConfigError(f"identities {missing} do not apply to {job.family}; available: {sorted(targets)}")
        targets = {k: v for k, v in targets.items() if k in names or k.split(":")[0] in names}
    checks = []
    for label, (P, opts) in targets.items():
        res = V.check_identity(label.split(":")[0], P, **opts)
        d = res.to_dict()
        d["name"] = label
        d["wall_time"] = _timed(job, res.wall_time)
        checks.append(d)
    return checks


def _limit_targets(job: Job) -> Dict[str, object]:
    P, F = job.params, job.F
    out: Dict[str, object] = {}
    if F.id in (mv.QRACAH_MV, mv.DUAL_QHAHN_MV, mv.DUAL_QHAHN_STAR_MV):
        out["b_to_0_R_to_D"] = P
        out["b_to_inf_R_to_Dstar"] = P
        out["a_to_0_r_to_d"] = fam.Family1V(fam.DUAL_QHAHN, {"b": P.ak(1), "c": P.ak(2)}, P.N, P.q)
    if F.id == mv.QHAHN_MV:
        out["a1_path_to_H"] = P
    if F.id in mv.INFINITE_FAMILIES:
        out["beta_to_0_M_to_C"] = P
    return out


def limit_checks(job: Job, names: Optional[Sequence[str]] = None) -> List[Dict]:
    if job.backend.exact:
        raise ConfigError("limit checks need --backend float")
    targets = _limit_targets(job)
    if names:
        missing = [n for n in names if n not in targets]
        if missing:
            raise ConfigError(f"limits {missing} do not apply to {job.family}; available: {sorted(targets)}")
        targets = {k: targets[k] for k in names}
    eps = [_parse_rational(e, "epsilons") for e in job.raw.get("epsilons", list(DEFAULT_EPSILONS))]
    lo = _parse_rational(job.raw.get("ratio_min", "50"), "ratio_min")
    hi = _parse_rational(job.raw.get("ratio_max", "200"), "ratio_max")
    opts = {"b_to_inf_R_to_Dstar": {"multiplier": job.raw.get("multiplier", "degree")}}
    checks = []
    for name, P in targets.items():
        table = V.check_limit(name, P, eps, **opts.get(name, {}))
        d = table.to_dict(job.backend.convert(lo), job.backend.convert(hi))
        d["witness"] = None if d["status"] == "pass" else f"ratios {d['ratios']} outside [{lo}, {hi}]"
        d["wall_time"] = _timed(job, table.wall_time)
        checks.append(d)
    return checks


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def cmd_eval(job: Job, args) -> int:
    n = _vector(args.n if args.n is not None else job.raw.get("n"), "n", job.F.s)
    x = _vector(args.x if args.x is not None else job.raw.get("x"), "x", job.F.s)
    if job.F.bounded:
        problems = mv.validate_params_mv(job.F)
        if problems:
            raise ConfigError("invalid parameters: " + "; ".join(problems))
    value = mv.eval_poly_mv(job.F, n, x)
    lines = [job.fmt(value)]
    if not job.backend.exact:
        lines.append(f"# float backend, {job.precision}-bit precision (about {job.backend.digits} digits)")
    _write("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_table(job: Job, args) -> int:
    F = job.F
    if F.bounded:
        points = list(V.enumerate_lattice(F))
        indices = V.enumerate_indices(F)
    else:
        top = _parse_int(job.raw.get("x_cap", "8"), "x_cap")
        points = list(V.enumerate_lattice(F, top))
        indices = V.enumerate_indices(F, job.degree_cap)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["family", "backend", "params", "n", "x", "value"])
    params = job.params_text()
    backend = job.backend_name if job.backend.exact else f"float{job.precision}"
    for n in indices:
        for x in points:
            value = mv.eval_poly_mv(F, n, x)
            w.writerow([F.id, backend, params, " ".join(map(str, n)), " ".join(map(str, x)), job.fmt(value)])
    _write(buf.getvalue(), args.out)
    return EXIT_OK


def _finish(report: Dict, out: Optional[str]) -> int:
    _write(_dump(report), out)
    failed = [c["name"] for c in report["checks"] if c["status"] != "pass"]
    if failed:
        print(f"verification failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_gram(job: Job, args, norm=None) -> int:
    return _finish(_report(job, [gram_check(job, norm)]), args.out)


def cmd_verify(job: Job, args, norm=None) -> int:
    suite = job.raw.get("suite", ["gram", "identities"])
    if isinstance(suite, str):
        suite = [suite]
    unknown = set(suite) - {"gram", "identities", "limits"}
    if unknown:
        raise ConfigError(f"unknown suite entries {sorted(unknown)}")
    checks: List[Dict] = []
    if "gram" in suite:
        checks.append(gram_check(job, norm))
    if "identities" in suite:
        checks.extend(identity_checks(job, job.raw.get("identities")))
    if "limits" in suite:
        checks.extend(limit_checks(job, job.raw.get("limits")))
    return _finish(_report(job, checks), args.out)


def cmd_limits(job: Job, args) -> int:
    return _finish(_report(job, limit_checks(job, job.raw.get("limits"))), args.out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mvqracah", description="Multivariable q-Racah polynomials: evaluation and verification.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON job file (numbers as strings)")
    common.add_argument("--backend", choices=("exact", "float"))
    common.add_argument("--precision", help="float precision in bits (>= 64)")
    common.add_argument("--threads", help="worker threads for Gram sums")
    common.add_argument("--tol", help="tolerance for float checks, e.g. 1e-20")
    common.add_argument("--out", help="output file (default stdout)")
    sub = parser.add_subparsers(dest="command", required=True)
    ev = sub.add_parser("eval", parents=[common], help="evaluate one polynomial value")
    ev.add_argument("--n", help="degree vector, comma separated")
    ev.add_argument("--x", help="lattice point, comma separated")
    sub.add_parser("table", parents=[common], help="CSV table of P_n(x)")
    sub.add_parser("gram", parents=[common], help="Gram-matrix orthogonality check")
    sub.add_parser("verify", parents=[common], help="run the configured check suite")
    sub.add_parser("limits", parents=[common], help="limit-transition convergence tables")
    return parser


def main(argv: Optional[Sequence[str]] = None, *, norm=None) -> int:
    """Entry point.  ``norm`` replaces the squared-norm function (fault injection)."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    overrides = {"backend": args.backend, "precision": args.precision, "threads": args.threads, "tol": args.tol}
    try:
        job = Job(load_config(args.config), overrides)
        if args.command == "eval":
            return cmd_eval(job, args)
        if args.command == "table":
            return cmd_table(job, args)
        if args.command == "gram":
            return cmd_gram(job, args, norm)
        if args.command == "verify":
            return cmd_verify(job, args, norm)
        return cmd_limits(job, args)
    except (ConfigError, ZeroDivisionError, ValueError, TypeError, OSError, V.TruncationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
