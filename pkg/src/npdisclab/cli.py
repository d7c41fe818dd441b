"""Batch experiment runner: every construction reproducible as a CSV recipe.

Grammar:  npdisclab <recipe> key=value ... [--out PATH] [--seed U64]
          [--reproducible]

With no arguments the recipe catalog is printed.  Output is deterministic
for a fixed configuration and seed; ``--reproducible`` suppresses the
timestamp comment so two runs are byte-identical.  Randomness goes through
a counter-based generator keyed by the recorded seed.

Exit codes: 0 success, 2 unknown recipe, 3 malformed parameter,
4 unwritable output path.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from . import __version__, kernels
from .csvio import write_rows
from .geometry import (
    crossing_map,
    crossing_scalar,
    distortion_profile,
    hs_embedding,
)
from .pick import (
    PickProblem,
    crossing_determinant,
    extract_interpolating_subsequence,
    pick_matrix,
    psd_check,
)
from .sequences import (
    blaschke_sum,
    carleson_ratio,
    garnett_targets,
    is_separated,
    named_sequence,
    separation_delta,
)
from .tangential import ConformalChain, assemble_embedding, tangency_report

EXIT_OK = 0
EXIT_UNKNOWN_RECIPE = 2
EXIT_BAD_PARAMETER = 3
EXIT_UNWRITABLE = 4


class ParameterError(Exception):
    pass


@dataclass
class ExperimentConfig:
    recipe: str
    parameters: dict
    out: str | None
    seed: int
    reproducible: bool


def _parse_complex(text: str) -> complex:
    return complex(text.replace(" ", ""))


def _parse_list(parser):
    def inner(text):
        return [parser(part) for part in text.split(";") if part]

    return inner


@dataclass(frozen=True)
class Param:
    name: str
    parse: object
    default: object
    help: str


@dataclass(frozen=True)
class Recipe:
    name: str
    summary: str
    params: tuple
    run: object


def _comments(config: ExperimentConfig) -> list[str]:
    lines = [
        f"npdisclab {__version__}",
        f"recipe = {config.recipe}",
    ]
    for key in sorted(config.parameters):
        lines.append(f"param {key} = {config.parameters[key]}")
    lines.append(f"seed = {config.seed}")
    if not config.reproducible:
        lines.append(f"generated = {datetime.now(timezone.utc).isoformat()}")
    return lines


# -- recipe implementations ---------------------------------------------------


def _run_classify(p, rng):
    handle = kernels.parse_family(p["family"], p["N"])
    rep = kernels.classify(handle)
    return list(rep.CSV_COLUMNS), [rep.as_row()]


def _run_compare(p, rng):
    a = kernels.parse_family(p["family"], p["N"]).weights
    b = kernels.parse_family(p["family2"], p["N"]).weights
    rep = kernels.are_comparable(a, b)
    cols = ["family", "family2", "comparable", "ratio_min", "ratio_max",
            "tail_drift", "verdict"]
    return cols, [[p["family"], p["family2"], rep.comparable, rep.ratio_min,
                   rep.ratio_max, rep.tail_drift, rep.verdict]]


def _run_pick_check(p, rng):
    handle = kernels.parse_family(p["family"], p["N"])
    problem = PickProblem(p["nodes"], p["targets"], handle)
    verdict = psd_check(pick_matrix(problem))
    cols = ["size", "min_eigenvalue", "matrix_scale", "verdict", "solvable"]
    return cols, [[problem.size, verdict.min_eigenvalue, verdict.matrix_scale,
                   verdict.verdict, verdict.verdict != "indefinite"]]


def _run_interp_extract(p, rng):
    seq = named_sequence(p["tag"], p["n"])
    from .geometry import BallPoint

    points = [
        BallPoint.radial(g) if g > 0.0 else BallPoint([pt])
        for g, pt in zip(seq.gaps, seq.points)
    ]
    res = extract_interpolating_subsequence(
        points, p["r"], p["kmax"], seed=p["_seed"]
    )
    cols = ["k", "index", "point_norm", "min_eigenvalue", "rule"]
    return cols, [[r.k, r.index, r.point_norm, r.min_eigenvalue, r.rule]
                  for r in res.rows]


def _run_crossing(p, rng):
    res = crossing_determinant(p["r"], p["C"], p["x"])
    cols = ["r", "C", "x", "scalar_s", "det", "lhs", "rhs", "kernel_ratio"]
    return cols, [[p["r"], p["C"], p["x"], res.scalar_s, res.det, res.lhs,
                   res.rhs, res.kernel_ratio]]


def _run_distortion(p, rng):
    tag = p["map"]
    if tag.startswith("crossing:"):
        curve = crossing_map(float(tag[9:]))
    elif tag.startswith("hs:"):
        curve = hs_embedding(float(tag[3:]), p["N"]).as_curve()
    else:
        raise ParameterError(f"unknown map tag {tag!r} (crossing:<r> or hs:<s>)")
    if p["xs"]:
        if not tag.startswith("crossing:"):
            raise ParameterError("pinch pairs need a crossing map")
        s = crossing_scalar(curve)
        pairs = [(1.0 - x, -1.0 + s * x) for x in p["xs"]]
    else:
        draws = rng.uniform(-1.0, 1.0, (p["pairs"], 4))
        pairs = [
            (0.9 * (a + 1j * b) / math.sqrt(2.0), 0.9 * (c + 1j * d) / math.sqrt(2.0))
            for a, b, c, d in draws
        ]
    prof = distortion_profile(curve, pairs)
    return ["d_source", "d_image"], [[a, b] for a, b in prof.rows]


def _run_carleson(p, rng):
    seq = named_sequence(p["tag"], p["n"])
    rows = [[q, carleson_ratio(seq, q)] for q in range(1, p["p_max"] + 1)]
    return ["p", "carleson_ratio"], rows


def _run_separation(p, rng):
    seq = named_sequence(p["tag"], p["n"])
    budgets = garnett_targets(seq)
    bl = blaschke_sum(seq)
    _, inf_gap = is_separated(seq)
    rows = []
    for i in range(seq.n):
        delta = separation_delta(seq, i)
        gap_i = min(seq.pair_dist(j, i) for j in range(seq.n) if j != i)
        rows.append([i + 1, delta.value, gap_i, budgets[i].budget])
    cols = ["n", "delta_n", "gap_n", "budget_n"]
    comments = [f"blaschke_sum = {bl.total!r} (converged = {bl.converged})",
                f"inf_gap = {inf_gap!r}"]
    return cols, rows, comments


def _run_tangential_embed(p, rng):
    emb = assemble_embedding(ConformalChain(p["r"]), p["m"])
    defect = emb.sphere_defect()
    rows = []
    for i in range(emb.m):
        rows.append([
            emb.u1.angles[i], emb.u1.values[i], emb.u1_tilde.values[i],
            abs(emb.f1_boundary[i]), abs(emb.f2_boundary[i]), defect[i],
        ])
    cols = ["t", "u1", "u1_tilde", "abs_f1", "abs_f2", "sphere_defect"]
    return cols, rows


def _run_tangency_report(p, rng):
    emb = assemble_embedding(ConformalChain(p["r"]), p["m"])
    rep = tangency_report(emb, p["jmin"], p["jmax"])
    comments = [
        f"c1_fit = {rep.c1!r}",
        f"correlation = {rep.correlation!r}",
        f"ratio1_decreasing = {rep.ratio1_decreasing}",
        f"ratio2_increasing = {rep.ratio2_increasing}",
    ]
    return ["x", "ratio1", "ratio2"], [[x, r1, r2] for x, r1, r2 in rep.rows], comments


RECIPES = {
    r.name: r
    for r in (
        Recipe(
            "classify",
            "isomorphism-classification row for one kernel family",
            (
                Param("family", str, "hardy", "kernel tag: hardy | hs:<s> | geom:<q> | custom:<csv>"),
                Param("N", int, 256, "truncation length"),
            ),
            _run_classify,
        ),
        Recipe(
            "compare",
            "weight-ratio comparability verdict for two families",
            (
                Param("family", str, None, "first kernel tag"),
                Param("family2", str, None, "second kernel tag"),
                Param("N", int, 256, "truncation length"),
            ),
            _run_compare,
        ),
        Recipe(
            "pick-check",
            "positivity verdict of the interpolation matrix for nodes/targets",
            (
                Param("family", str, "hardy", "kernel tag"),
                Param("nodes", _parse_list(_parse_complex), None, "nodes, ';'-separated complex"),
                Param("targets", _parse_list(_parse_complex), None, "targets, ';'-separated complex"),
                Param("N", int, 256, "truncation length"),
            ),
            _run_pick_check,
        ),
        Recipe(
            "interp-extract",
            "greedy interpolating-subsequence extraction audit trail",
            (
                Param("tag", str, "wn_gaussian", "named sequence tag"),
                Param("n", int, 12, "sequence length"),
                Param("r", float, 0.5, "target polydisc radius"),
                Param("kmax", int, 10, "subsequence length to extract"),
            ),
            _run_interp_extract,
        ),
        Recipe(
            "crossing",
            "determinant obstruction at the self-crossing boundary point",
            (
                Param("r", float, 0.5, "automorphism parameter of the curve"),
                Param("C", float, 2.0, "candidate inverse-multiplier norm"),
                Param("x", float, 1e-4, "pinch distance parameter"),
            ),
            _run_crossing,
        ),
        Recipe(
            "distortion",
            "pseudohyperbolic distances before/after a disc-to-ball map",
            (
                Param("map", str, "crossing:0.5", "curve tag: crossing:<r> | hs:<s>"),
                Param("xs", _parse_list(float), [], "pinch parameters, ';'-separated"),
                Param("pairs", int, 100, "random pair count when xs is empty"),
                Param("N", int, 512, "embedding truncation for hs maps"),
            ),
            _run_distortion,
        ),
        Recipe(
            "carleson",
            "dyadic box-mass ratios of a disc sequence",
            (
                Param("tag", str, "dyadic_separated", "named sequence tag"),
                Param("n", int, 20, "sequence size parameter"),
                Param("p_max", int, 10, "largest box exponent"),
            ),
            _run_carleson,
        ),
        Recipe(
            "separation",
            "per-point separation products, gaps and interpolation budgets",
            (
                Param("tag", str, "vn_quadratic", "named sequence tag"),
                Param("n", int, 40, "sequence length"),
            ),
            _run_separation,
        ),
        Recipe(
            "tangential-embed",
            "boundary data and sphere defect of the tangential embedding",
            (
                Param("r", float, 0.75, "clip parameter in (2/3, 1)"),
                Param("m", int, 4096, "grid size (power of two)"),
            ),
            _run_tangential_embed,
        ),
        Recipe(
            "tangency-report",
            "boundary-approach ratios of the tangential embedding",
            (
                Param("r", float, 0.75, "clip parameter in (2/3, 1)"),
                Param("m", int, 2**18, "grid size (power of two)"),
                Param("jmin", int, 4, "smallest dyadic exponent"),
                Param("jmax", int, 14, "largest dyadic exponent"),
            ),
            _run_tangency_report,
        ),
    )
}


def list_recipes() -> str:
    lines = ["recipes:"]
    for name in RECIPES:
        lines.append(f"  {name:18s} {RECIPES[name].summary}")
    lines.append("")
    lines.append("usage: npdisclab <recipe> key=value ... [--out PATH] [--seed U64] [--reproducible]")
    lines.append("       npdisclab <recipe> --help")
    return "\n".join(lines)


def recipe_help(recipe: Recipe) -> str:
    lines = [f"{recipe.name}: {recipe.summary}", "parameters:"]
    for param in recipe.params:
        default = "required" if param.default is None else f"default {param.default!r}"
        lines.append(f"  {param.name:10s} {param.help} ({default})")
    return "\n".join(lines)


def _parse_argv(argv) -> ExperimentConfig | None:
    recipe_name = argv[0]
    rest = argv[1:]
    params, out, seed, reproducible = {}, None, 0, False
    i = 0
    while i < len(rest):
        token = rest[i]
        if token == "--help":
            params["_help"] = True
        elif token == "--reproducible":
            reproducible = True
        elif token == "--out":
            i += 1
            if i >= len(rest):
                raise ParameterError("--out needs a path")
            out = rest[i]
        elif token == "--seed":
            i += 1
            if i >= len(rest):
                raise ParameterError("--seed needs an integer")
            try:
                seed = int(rest[i])
            except ValueError as exc:
                raise ParameterError(f"bad seed {rest[i]!r}") from exc
        elif "=" in token:
            key, _, value = token.partition("=")
            params[key] = value
        else:
            raise ParameterError(f"unrecognized argument {token!r}")
        i += 1
    return ExperimentConfig(recipe_name, params, out, seed, reproducible)


def _resolve_params(recipe: Recipe, raw: dict, seed: int) -> dict:
    known = {p.name: p for p in recipe.params}
    resolved = {}
    for key, value in raw.items():
        if key.startswith("_"):
            continue
        if key not in known:
            raise ParameterError(
                f"unknown parameter {key!r} for recipe {recipe.name!r}"
            )
        try:
            resolved[key] = known[key].parse(value)
        except (ValueError, TypeError) as exc:
            raise ParameterError(f"bad value for {key!r}: {value!r}") from exc
    for param in recipe.params:
        if param.name not in resolved:
            if param.default is None:
                raise ParameterError(
                    f"recipe {recipe.name!r} requires parameter {param.name!r}"
                )
            resolved[param.name] = param.default
    resolved["_seed"] = seed
    return resolved


def run(config: ExperimentConfig) -> int:
    """Execute a recipe and write its CSV artifact."""
    recipe = RECIPES[config.recipe]
    try:
        params = _resolve_params(recipe, config.parameters, config.seed)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_PARAMETER
    rng = np.random.default_rng(np.random.Philox(config.seed))
    try:
        result = recipe.run(params, rng)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_PARAMETER
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_PARAMETER
    cols, rows, *extra = result
    comments = _comments(config) + (extra[0] if extra else [])
    if config.out is None:
        write_rows(sys.stdout, comments, cols, rows)
        return EXIT_OK
    try:
        with open(config.out, "w", encoding="utf-8", newline="") as fh:
            write_rows(fh, comments, cols, rows)
    except OSError as exc:
        print(f"error: cannot write {config.out!r}: {exc}", file=sys.stderr)
        return EXIT_UNWRITABLE
    return EXIT_OK


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv == ["--help"]:
        print(list_recipes())
        return EXIT_OK
    try:
        config = _parse_argv(argv)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_PARAMETER
    if config.recipe not in RECIPES:
        print(f"error: unknown recipe {config.recipe!r}", file=sys.stderr)
        print(list_recipes(), file=sys.stderr)
        return EXIT_UNKNOWN_RECIPE
    if config.parameters.get("_help"):
        print(recipe_help(RECIPES[config.recipe]))
        return EXIT_OK
    return run(config)


if __name__ == "__main__":
    raise SystemExit(main())
