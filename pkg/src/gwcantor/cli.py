"""Command-line front end: ``gwcantor <subcommand> [flags]``.

Exit codes: 0 on success or a passing check, 1 when a check fails,
2 on a usage error.
"""

from __future__ import annotations

import argparse
import math
import os
import random
import re
import sys
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence

from . import acceptance
from . import dimension as dm
from . import mltests as ml
from .measures import (
    conditional_child_distribution,
    florida_pattern_prob,
    mu_c_cylinder,
    mu_c_oracle,
    mu_i_cylinder,
    valid_pairs,
)
from .overlay import escape_report, overlay_pattern_report, verify_measure_preservation
from .params import (
    MAX_EXACT_HORIZON,
    SurvivalParams,
    extinction_probability,
    extinction_recursion,
    format_prob,
    parse_prob,
)
from .report import to_csv, to_json, to_jsonl
from .sampling import (
    SampleConfig,
    chi_square_report,
    default_probes,
    filler_reach_report,
    florida_pattern_counts,
    sample_florida,
    sample_lambda_1gamma,
    sample_lambda_f,
    set_to_mask,
    survival_report,
)
from .strings import (
    MAX_ENUM_DEPTH,
    all_trees,
    encode_set,
    extendible_shapes,
    minimal_prefix_free,
    omega,
    parse_set,
    truncate_to_tree,
)

LOG2_FORM = re.compile(r"^\s*log2\(\s*(\d+)\s*/\s*(\d+)\s*\)\s*$")
DEFAULT_GAMMA = "log2(3/2)"
MAX_LISTED_SAMPLES = 1000


class UsageError(Exception):
    """Bad flag value detected after argparse succeeded."""


# --- run configuration --------------------------------------------------------


@dataclass
class RunConfig:
    subcommand: str
    gamma: Optional[str] = None
    depth: Optional[int] = None
    seed: int = 0
    replicates: Optional[int] = None
    format: Optional[str] = None
    out: Optional[str] = None
    mode: str = "auto"
    workers: int = 1
    options: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        return cls(**data)

    def echo(self) -> dict:
        """The part of the config that belongs in a report. Worker count and
        output path do not affect results, so they are left out."""
        d = {k: v for k, v in self.to_dict().items() if k not in ("workers", "out")}
        return d

    def survival_params(self) -> SurvivalParams:
        text = self.gamma if self.gamma is not None else DEFAULT_GAMMA
        symbolic = bool(LOG2_FORM.match(text))
        if self.mode == "exact" and not symbolic:
            raise UsageError(f"--mode exact needs --gamma of the form log2(q/r), got {text!r}")
        try:
            params = SurvivalParams.from_gamma(text)
        except ValueError as exc:
            raise UsageError(f"--gamma: {exc}") from None
        return params.as_float() if self.mode == "float" else params

    def real_gamma(self, default: float) -> float:
        """``--gamma`` as a plain exponent (energy, weights, thresholds)."""
        if self.gamma is None:
            return default
        m = LOG2_FORM.match(self.gamma)
        try:
            return math.log2(int(m.group(1)) / int(m.group(2))) if m else float(self.gamma)
        except (ValueError, ZeroDivisionError):
            raise UsageError(f"--gamma: not a number: {self.gamma!r}") from None

    def get(self, name: str, default):
        value = getattr(self, name)
        return default if value is None else value

    def sample_config(self, depth: int, replicates: int) -> SampleConfig:
        try:
            return SampleConfig(
                self.survival_params().as_float(),
                depth=self.get("depth", depth),
                seed=self.seed,
                replicates=self.get("replicates", replicates),
            )
        except ValueError as exc:
            raise UsageError(str(exc)) from None


@dataclass
class Outcome:
    kind: str
    payload: dict
    ok: bool = True
    rows: Optional[list] = None
    columns: Optional[Sequence[str]] = None
    text: Optional[str] = None
    default_format: str = "json"


def _int_range(text: str) -> list[int]:
    """``"3"``, ``"1-6"`` or ``"0,2,5"``."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part:
            a, b = part.split("-", 1)
            out.extend(range(int(a), int(b) + 1))
        else:
            out.append(int(part))
    return out


_POLY = re.compile(r"^\s*(\d+)?\s*\*?\s*n\s*(?:\*\*\s*(\d+))?\s*$")


def parse_budget(text: str) -> Callable[[int], int]:
    """A flip budget like ``n``, ``2*n``, ``n**2`` or a constant ``3``."""
    text = text.strip()
    if text.isdigit():
        c = int(text)
        return lambda n: c
    m = _POLY.match(text)
    if not m:
        raise UsageError(f"--f: expected c, n, c*n or c*n**k, got {text!r}")
    coef = int(m.group(1) or 1)
    power = int(m.group(2) or 1)
    return lambda n: coef * n**power


def parse_measure(text: str) -> dm.CylinderMeasure:
    name, _, arg = text.partition(":")
    try:
        if name == "uniform":
            return dm.uniform_measure()
        if name == "bernoulli":
            return dm.bernoulli_measure(parse_prob(arg))
        if name == "hope":
            return dm.hope_measure()
        if name == "hope-modified":
            return dm.hope_measure(float(arg or 0.5))
        if name == "tz":
            q, r = (int(x) for x in arg.split(","))
            return dm.tz_measure(dm.ZPattern(q, r))
    except ValueError as exc:
        raise UsageError(f"--measure: {exc}") from None
    raise UsageError(
        f"--measure: expected uniform, bernoulli:P, hope, hope-modified:EPS or tz:Q,R; got {text!r}"
    )


# --- subcommands --------------------------------------------------------------


def cmd_extinction(cfg: RunConfig) -> Outcome:
    params = cfg.survival_params()
    e = extinction_probability(params)
    payload = {"params": params.describe(), "e": format_prob(e), "e_root": format_prob(params.e_root)}
    text = format_prob(e)
    L = cfg.options.get("horizon")
    if L is not None:
        p = params.p if L <= MAX_EXACT_HORIZON else float(params.p)
        ext = extinction_recursion(p, L)
        payload["horizon"] = L
        payload["ext_L"] = format_prob(ext)
        text += "\n" + format_prob(ext)
    return Outcome("extinction", payload, text=text + "\n", default_format="text")


def cmd_child_dist(cfg: RunConfig) -> Outcome:
    params = cfg.survival_params()
    L = cfg.options["horizon"]
    if L > MAX_EXACT_HORIZON:
        params = params.as_float()
    dist = conditional_child_distribution(params, L)
    labels = ("left_only", "right_only", "both")
    rows = [{"children": k, "prob": format_prob(v)} for k, v in zip(labels, dist)]
    return Outcome(
        "child-dist",
        {"params": params.describe(), "horizon": L, "distribution": rows},
        rows=rows,
        columns=("children", "prob"),
        text=" ".join(format_prob(v) for v in dist) + "\n",
    )


def _listing(cfg: RunConfig, kind: str, draw: Callable[[int], dict], reps: int) -> Outcome:
    if reps > MAX_LISTED_SAMPLES:
        raise UsageError(f"--replicates: at most {MAX_LISTED_SAMPLES} samples can be listed")
    rows = [{"replicate": r, **draw(r)} for r in range(reps)]
    columns = ["replicate"] + [k for k in rows[0] if k != "replicate"]
    return Outcome(
        kind, {"config": cfg.echo(), "samples": rows}, rows=rows, columns=columns,
        default_format="jsonl",
    )


def cmd_sample_gw(cfg: RunConfig) -> Outcome:
    if cfg.options.get("check"):
        sc = cfg.sample_config(12, 100_000)
        probes = default_probes(sc.depth, 20, cfg.seed)
        rows = survival_report(sc, probes, cfg.workers)
        return Outcome(
            "sample-gw.survival",
            {"config": cfg.echo(), "rows": rows},
            ok=all(r["pass"] for r in rows),
            rows=rows,
            columns=list(rows[0]),
        )
    sc = cfg.sample_config(6, 1)

    def draw(r: int) -> dict:
        s = sample_lambda_1gamma(sc, r)
        return {"raw": encode_set(s.raw), "tree": encode_set(s.tree)}

    return _listing(cfg, "sample-gw", draw, sc.replicates)


def cmd_sample_florida(cfg: RunConfig) -> Outcome:
    if cfg.options.get("check"):
        sc = cfg.sample_config(2, 100_000)
        if sc.depth > MAX_ENUM_DEPTH:
            raise UsageError(f"--depth: pattern checks need depth <= {MAX_ENUM_DEPTH}")
        counts = florida_pattern_counts(sc, cfg.workers)
        exact = cfg.survival_params()
        expected = {
            set_to_mask(T): florida_pattern_prob(T, sc.depth, exact) for T in all_trees(sc.depth)
        }
        chi = chi_square_report(counts, expected, sc.replicates)
        return Outcome("sample-florida.chi-square", {"config": cfg.echo(), **chi}, ok=chi["pass"])
    sc = cfg.sample_config(3, 1)
    return _listing(
        cfg, "sample-florida", lambda r: {"tree": encode_set(sample_florida(sc, r))}, sc.replicates
    )


def cmd_sample_subcritical(cfg: RunConfig) -> Outcome:
    if cfg.options.get("check"):
        sc = cfg.sample_config(8, 100_000)
        rows = filler_reach_report(sc, cfg.workers)
        return Outcome(
            "sample-subcritical.reach",
            {"config": cfg.echo(), "rows": rows},
            ok=all(r["pass"] for r in rows),
            rows=rows,
            columns=list(rows[0]),
        )
    sc = cfg.sample_config(6, 1)

    def draw(r: int) -> dict:
        raw = sample_lambda_f(sc, r)
        return {"raw": encode_set(raw), "tree": encode_set(truncate_to_tree(raw, sc.depth))}

    return _listing(cfg, "sample-subcritical", draw, sc.replicates)


def _enum_depth(cfg: RunConfig, default: int) -> int:
    n = cfg.get("depth", default)
    if not 1 <= n <= MAX_ENUM_DEPTH:
        raise UsageError(f"--depth: exact tables need 1 <= depth <= {MAX_ENUM_DEPTH}, got {n}")
    return n


def cmd_measure_table(cfg: RunConfig) -> Outcome:
    params = cfg.survival_params()
    n = _enum_depth(cfg, 2)
    L = cfg.options.get("horizon")
    if L is not None and L < n:
        raise UsageError(f"--horizon: must be >= depth {n}")
    if L is not None and L > MAX_EXACT_HORIZON and params.exact:
        params = params.as_float()
    rows = []
    total = params.p * 0
    for pair in valid_pairs(n):
        v = mu_c_cylinder(pair, n, params)
        total += v
        row = {"T": encode_set(pair.T), "T_prime": encode_set(pair.T_prime), "mu_c": format_prob(v)}
        if L is not None:
            row["oracle"] = format_prob(mu_c_oracle(pair, n, L, params))
        rows.append(row)
    trace = [
        {
            "T_prime": encode_set(Tp),
            "mu_i": format_prob(mu_i_cylinder(Tp, n, params)),
            "florida": format_prob(florida_pattern_prob(Tp, n, params)),
        }
        for Tp in extendible_shapes(n)
    ]
    ok = abs(float(total) - 1) <= 1e-12 and all(
        abs(float(parse_prob(t["mu_i"])) - float(parse_prob(t["florida"]))) <= 1e-12 for t in trace
    )
    columns = ["T", "T_prime", "mu_c"] + (["oracle"] if L is not None else [])
    return Outcome(
        "measure-table",
        {"params": params.describe(), "depth": n, "horizon": L, "rows": rows,
         "total": format_prob(total), "trace_law": trace},
        ok=ok,
        rows=rows,
        columns=columns,
    )


def cmd_verify_psi(cfg: RunConfig) -> Outcome:
    params = cfg.survival_params()
    rep = verify_measure_preservation(_enum_depth(cfg, 2), params)
    d = rep.to_dict()
    return Outcome(
        "verify-psi", d, ok=rep.passed, rows=d["rows"], columns=("T", "T_prime", "lhs", "rhs", "equal")
    )


def cmd_overlay_sample(cfg: RunConfig) -> Outcome:
    sc = cfg.sample_config(3, 20_000)
    if sc.depth > 3:
        raise UsageError("--depth: overlay pattern tables need depth <= 3")
    rows = overlay_pattern_report(sc, cfg.workers)
    esc = escape_report(sc, cfg.workers)
    return Outcome(
        "overlay-sample",
        {"config": cfg.echo(), "patterns": rows, "escape": esc},
        ok=all(r["pass"] for r in rows) and esc["pass"],
        rows=rows,
        columns=("probe", "expected", "observed", "stderr", "pass"),
    )


def _required_set(cfg: RunConfig) -> frozenset:
    text = cfg.options.get("set")
    if text is None:
        raise UsageError("--set: a string set is required, e.g. --set e,0,01")
    try:
        return parse_set(text)
    except ValueError as exc:
        raise UsageError(f"--set: {exc}") from None


def cmd_weight(cfg: RunConfig) -> Outcome:
    gamma = cfg.real_gamma(cfg.survival_params().gamma)
    U = _required_set(cfg)
    minimal = minimal_prefix_free(U)
    return Outcome(
        "weight",
        {"gamma": gamma, "set": encode_set(U), "weight": ml.weight_gamma(U, gamma),
         "prefix_free": encode_set(minimal), "prefix_free_weight": ml.weight_gamma(minimal, gamma)},
        text=format(ml.weight_gamma(U, gamma), ".15g") + "\n",
    )


def random_string_sets(count: int, depth: int, seed: int) -> list[frozenset]:
    """Reproducible small string sets inside ``omega(depth)``."""
    gen = random.Random(seed)
    pool = omega(min(depth, 8))
    return [frozenset(gen.sample(pool, gen.randint(1, min(6, len(pool))))) for _ in range(count)]


def cmd_hitting_check(cfg: RunConfig) -> Outcome:
    sc = cfg.sample_config(8, 20_000)
    if cfg.options.get("set") is not None:
        sets = [_required_set(cfg)]
    else:
        sets = random_string_sets(cfg.options["random_sets"], sc.depth, cfg.seed)
    rows = []
    for U in sets:
        r = ml.hitting_bound_check(U, sc, cfg.workers)
        rows.append({"set": encode_set(U), **r, "prefix_free": encode_set(r["prefix_free"])})
    return Outcome(
        "hitting-check",
        {"config": cfg.echo(), "rows": rows},
        ok=all(r["pass"] for r in rows),
        rows=rows,
        columns=("set", "bound", "estimate", "stderr", "estimate_given_root", "pass"),
    )


def cmd_m_schedule(cfg: RunConfig) -> Outcome:
    params = cfg.survival_params()
    rows = [
        {"n": n, "ell": ell, "m": ml.m_schedule(n, ell, params)}
        for n in _int_range(cfg.options["n"])
        for ell in _int_range(cfg.options["ell"])
    ]
    return Outcome(
        "m-schedule", {"params": params.describe(), "rows": rows}, rows=rows, columns=("n", "ell", "m")
    )


def cmd_xn_check(cfg: RunConfig) -> Outcome:
    sc = cfg.sample_config(16, 10_000)
    ells = _int_range(cfg.options["ells"]) if cfg.options.get("ells") else None
    try:
        rows = ml.xn_violation_table(_int_range(cfg.options["n"]), sc, ells, cfg.workers)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return Outcome(
        "xn-check",
        {"config": cfg.echo(), "rows": rows},
        ok=all(r["pass"] for r in rows),
        rows=rows,
        columns=("n", "bound", "estimate", "stderr", "undefined", "pass"),
    )


def cmd_fce_cover(cfg: RunConfig) -> Outcome:
    gamma = cfg.real_gamma(0.5)
    f = parse_budget(cfg.options["f"])
    path = cfg.options.get("snapshots")
    if path:
        with open(path, encoding="utf-8") as fh:
            log = [line.strip() for line in fh if line.strip()]
    else:
        log = ml.synthetic_change_log(f, cfg.options["width"], cfg.options["stages"], cfg.seed)
    try:
        fam = ml.fce_cover(log, f, gamma, k_max=cfg.options["k_max"])
    except ValueError as exc:
        return Outcome("fce-cover", {"error": str(exc)}, ok=False)
    d = fam.to_dict()
    rows = [{"n": int(n), **v} for n, v in d["levels"].items()]
    ok = all(s["bound"] <= s["target"] for s in d["selection"])
    return Outcome("fce-cover", d, ok=ok, rows=rows, columns=("n", "cones", "weight", "bound", "sound_bound"))


def cmd_energy(cfg: RunConfig) -> Outcome:
    gamma = cfg.real_gamma(0.5)
    mu = parse_measure(cfg.options["measure"])
    D = cfg.get("depth", 20)
    try:
        table = dm.energy_table(mu, gamma, D) if cfg.options["method"] == "auto" else None
        if table is None:
            inc = dm.energy_increments(mu, gamma, D, cfg.options["method"])
            acc: list[float] = []
            table = []
            for n, t in enumerate(inc):
                acc.append(t)
                table.append((n + 1, math.fsum(acc), t))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows = [{"D": d, "partial_sum": s, "increment": t} for d, s, t in table]
    return Outcome(
        "energy",
        {"measure": mu.tag, "gamma": gamma, "rows": rows},
        rows=rows,
        columns=("D", "partial_sum", "increment"),
        default_format="csv",
    )


def cmd_hope(cfg: RunConfig) -> Outcome:
    gamma = cfg.real_gamma(0.5)
    eps = cfg.options.get("epsilon")
    K = cfg.options["terms"]
    try:
        mu = dm.hope_measure(eps)
    except ValueError as exc:
        raise UsageError(f"--epsilon: {exc}") from None
    terms = mu.split_terms(gamma, K)
    checkpoints = sorted({k for k in (1, 10, 100, 1000, 10_000, 100_000, K) if k <= K})
    rows = [{"k": k, "partial_sum": math.fsum(terms[:k])} for k in checkpoints]
    payload = {"measure": mu.tag, "gamma": gamma, "terms": K,
               "split_levels_head": mu.split_levels(min(K, 16)), "rows": rows}
    if eps is not None and gamma == 0.5:
        try:
            lo, hi = dm.modified_tail_bounds(eps, K)
            payload["tail_after_terms"] = {"lower": lo, "upper": hi}
        except ValueError as exc:
            payload["tail_after_terms"] = {"error": str(exc)}
    return Outcome("hope", payload, rows=rows, columns=("k", "partial_sum"))


def cmd_tz(cfg: RunConfig) -> Outcome:
    try:
        z = dm.ZPattern(cfg.options["q"], cfg.options["r"])
    except ValueError as exc:
        raise UsageError(f"--q/--r: {exc}") from None
    depth = cfg.get("depth", 9)
    if depth > 16:
        raise UsageError("--depth: support checks need depth <= 16")
    counts = [
        {"m": m, "count": dm.tz_tree_count(z, m), "closed_form": 2 ** (m * z.r)}
        for m in range(cfg.options["m"] + 1)
    ]
    mu = dm.tz_measure(z)
    bad = [s for s in omega(depth + 1) if (mu.mass(s) > 0) != z.in_tree(s)]
    gamma = cfg.real_gamma(z.r / z.q - 0.1)
    inc = dm.energy_increments(mu, gamma, 10 * z.q)
    blocks = [math.fsum(inc[j * z.q:(j + 1) * z.q]) for j in range(10)]
    return Outcome(
        "tz",
        {"q": z.q, "r": z.r, "counts": counts, "support_depth": depth, "support_mismatches": bad,
         "gamma": gamma, "period_sums": blocks, "period_ratio": 2.0 ** (z.q * gamma - z.r)},
        ok=not bad and all(c["count"] == c["closed_form"] for c in counts),
        rows=counts,
        columns=("m", "count", "closed_form"),
    )


def cmd_bernoulli_entropy(cfg: RunConfig) -> Outcome:
    try:
        p = parse_prob(cfg.options["p"])
        h = dm.bernoulli_entropy(p)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"--p: {exc}") from None
    return Outcome(
        "bernoulli-entropy", {"p": format_prob(p), "entropy": h},
        text=format(h, ".15g") + "\n",
    )


def cmd_bernoulli_interval(cfg: RunConfig) -> Outcome:
    gamma = cfg.real_gamma(math.log2(1.5))
    try:
        r = dm.bernoulli_member_interval(gamma)
    except ValueError as exc:
        raise UsageError(f"--gamma: {exc}") from None
    return Outcome("bernoulli-interval", r, ok=r["residual"] < 1e-10)


def cmd_repro_all(cfg: RunConfig) -> Outcome:
    result = acceptance.run_all(seed=cfg.seed, workers=cfg.workers)
    rows = [{"id": c["id"], "title": c["title"], "pass": c["pass"]} for c in result["criteria"]]
    return Outcome("repro-all", result, ok=result["pass"], rows=rows, columns=("id", "title", "pass"))


# --- parser -------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # one-line diagnostic, exit 2
        self.exit(2, f"{self.prog}: error: {message}\n")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("common flags")
    g.add_argument("--gamma", help="survival exponent (float or log2(q/r) for exact p=r/q); "
                   "for energy-style commands, the energy exponent")
    g.add_argument("--depth", type=int, help="depth of the string universe")
    g.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    g.add_argument("--replicates", type=int, help="number of Monte Carlo replicates")
    g.add_argument("--workers", type=int, default=os.cpu_count() or 1,
                   help="worker processes (default: machine parallelism)")
    g.add_argument("--format", choices=("json", "jsonl", "csv", "text"), help="report format")
    g.add_argument("--out", help="write the report here instead of stdout")
    g.add_argument("--mode", choices=("auto", "exact", "float"), default="auto",
                   help="arithmetic: exact needs --gamma log2(q/r); auto follows --gamma")
    return p


COMMANDS: dict[str, tuple[Callable[[RunConfig], Outcome], str]] = {
    "sample-gw": (cmd_sample_gw, "Draw GW string sets and their trees; --check compares "
                  "probe survival frequencies with p**|sigma|."),
    "sample-florida": (cmd_sample_florida, "Draw Florida trees; --check runs a chi-square "
                       "test of depth-n pattern frequencies."),
    "sample-subcritical": (cmd_sample_subcritical, "Draw filler sets; --check compares reach "
                           "frequencies with the subcritical recursion."),
    "extinction": (cmd_extinction, "Extinction probability (1-p)/p, and optionally the "
                   "finite-horizon recursion at --horizon."),
    "child-dist": (cmd_child_dist, "Law of the surviving child set given survival, at a horizon."),
    "measure-table": (cmd_measure_table, "Conditioned cylinder probabilities for every valid "
                      "(T, T') pair, with an optional finite-horizon oracle column."),
    "verify-psi": (cmd_verify_psi, "Exact check that the overlay map pushes the product law "
                   "to the conditioned GW law."),
    "overlay-sample": (cmd_overlay_sample, "Monte Carlo law of the overlay map and the escape "
                       "frequency of filler nodes at the top level."),
    "weight": (cmd_weight, "gamma-weight of a string set and of its minimal prefix-free part."),
    "hitting-check": (cmd_hitting_check, "Monte Carlo probability that the GW tree meets a "
                      "string set, against the weight bound."),
    "m-schedule": (cmd_m_schedule, "Least m with e**m <= 2**-(n+2l), for ranges of n and l."),
    "xn-check": (cmd_xn_check, "Frequency with which the look-ahead guess of the extendible "
                 "trace is wrong, against 2**-n."),
    "fce-cover": (cmd_fce_cover, "Covers V_n built from a finite-change approximation log, "
                  "with weight bounds and the selected subsequence."),
    "energy": (cmd_energy, "Partial gamma-energy sums of a cylinder measure (CSV: D, "
               "partial_sum, increment)."),
    "hope": (cmd_hope, "Energy series of the half-dimensional measure, plain or modified."),
    "tz": (cmd_tz, "T_Z tree counts, support of its natural measure and energy increments."),
    "bernoulli-entropy": (cmd_bernoulli_entropy, "Binary entropy in bits."),
    "bernoulli-interval": (cmd_bernoulli_interval, "Biases p whose Bernoulli entropy exceeds "
                           "gamma, by bisection."),
    "repro-all": (cmd_repro_all, "Run every acceptance check and emit one consolidated report."),
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gwcantor", description="Random closed sets from GW trees: exact "
                     "tables, samplers and checks.")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    common = _common()
    subs = {}
    for name, (_, help_text) in COMMANDS.items():
        subs[name] = sub.add_parser(name, parents=[common], help=help_text, description=help_text)

    subs["extinction"].add_argument("--horizon", type=int, help="also report ext_L")
    subs["child-dist"].add_argument("--horizon", type=int, default=100)
    subs["measure-table"].add_argument("--horizon", type=int, help="add the oracle at this horizon")
    for name in ("sample-gw", "sample-florida", "sample-subcritical"):
        subs[name].add_argument("--check", action="store_true", help="run the frequency check")
    for name in ("weight", "hitting-check"):
        subs[name].add_argument("--set", help="string set: JSON array or e,0,01")
    subs["hitting-check"].add_argument("--random-sets", type=int, default=50,
                                       help="number of random sets when --set is absent")
    subs["m-schedule"].add_argument("--n", default="0-16", help="n values, e.g. 0-16")
    subs["m-schedule"].add_argument("--ell", default="0-16", help="l values, e.g. 0-16")
    subs["xn-check"].add_argument("--n", default="1-6", help="n values, e.g. 1-6")
    subs["xn-check"].add_argument("--ells", help="levels l to test (default 0..5)")
    fce = subs["fce-cover"]
    fce.add_argument("--f", default="n", help="flip budget: c, n, c*n or c*n**k")
    fce.add_argument("--width", type=int, default=48, help="length of synthetic snapshots")
    fce.add_argument("--stages", type=int, default=400, help="flips in the synthetic log")
    fce.add_argument("--snapshots", help="file with one snapshot per line")
    fce.add_argument("--k-max", type=int, default=10)
    en = subs["energy"]
    en.add_argument("--measure", default="hope",
                    help="uniform, bernoulli:P, hope, hope-modified:EPS or tz:Q,R")
    en.add_argument("--method", choices=("auto", "split", "brute"), default="auto")
    subs["hope"].add_argument("--epsilon", type=float, help="modified schedule parameter")
    subs["hope"].add_argument("--terms", type=int, default=10_000, help="number of splits")
    tz = subs["tz"]
    tz.add_argument("--q", type=int, default=3)
    tz.add_argument("--r", type=int, default=2)
    tz.add_argument("--m", type=int, default=4, help="largest block count")
    subs["bernoulli-entropy"].add_argument("--p", required=True, help="bias, float or a/b")
    return parser


_COMMON_KEYS = ("gamma", "depth", "seed", "replicates", "format", "out", "mode", "workers")


def parse_config(argv: Sequence[str]) -> RunConfig:
    ns = vars(build_parser().parse_args(list(argv)))
    name = ns.pop("subcommand")
    common = {k: ns.pop(k) for k in _COMMON_KEYS}
    if common["workers"] < 1:
        raise UsageError("--workers: must be >= 1")
    return RunConfig(subcommand=name, options=ns, **common)


def render(outcome: Outcome, cfg: RunConfig) -> str:
    fmt = cfg.format or outcome.default_format
    if fmt == "text" and outcome.text is not None:
        return outcome.text
    if fmt == "csv" and outcome.rows is not None:
        return to_csv(outcome.rows, outcome.columns)
    if fmt == "jsonl" and outcome.rows is not None:
        return to_jsonl(outcome.rows)
    return to_json({"pass": outcome.ok, **outcome.payload}, outcome.kind)


def run(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
        handler = COMMANDS[cfg.subcommand][0]
        outcome = handler(cfg)
    except SystemExit as exc:
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"gwcantor: error: {exc}", file=sys.stderr)
        return 2
    text = render(outcome, cfg)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if outcome.ok else 1


def main() -> None:
    sys.exit(run())
