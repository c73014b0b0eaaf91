"""Command-line front end: ``run``, ``bounds``, ``tables``, ``validate``.

Exit codes: 0 success, 1 table mismatch, 2 invalid input, 3 arms violate
the chain conditions (irreducible, aperiodic, irreducible
symmetrization, positive rewards).
"""

from __future__ import annotations

import argparse
import math
import sys
import warnings

from . import harness
from .bounds import GapError, bound_constants, lemma_play_count_bound, min_exploration_constant, theorem1_bound, theorem2_bound
from .config import ConfigError, config_from_dict, read_document
from .markov import ChainError, check_condition1
from .policies import rank_by_mean
from .presets import PRESET_NAMES, TABLE_TOLERANCE, table_deviation

EXIT_OK, EXIT_MISMATCH, EXIT_INVALID, EXIT_CONDITION = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        super().__init__(message)


def _load(args, **overrides) -> harness.ExperimentConfig:
    if getattr(args, "config", None):
        doc = read_document(args.config)
    elif getattr(args, "preset", None):
        doc = {"preset": args.preset}
    else:
        raise CliError(EXIT_INVALID, "give --config or --preset")
    return config_from_dict(doc, **overrides)


def _condition_failures(specs) -> list[str]:
    out = []
    for k, spec in enumerate(specs):
        rep = check_condition1(spec)
        if not rep.passed:
            out.append(f"arm {k + 1}: " + "; ".join(rep.messages))
    return out


def _require_condition(specs) -> None:
    fails = _condition_failures(specs)
    if fails:
        raise CliError(EXIT_CONDITION, "condition check failed:\n  " + "\n  ".join(fails))


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


def cmd_run(args) -> int:
    checkpoints = [int(c) for c in args.checkpoints.split(",")] if args.checkpoints else None
    cfg = _load(args, policy=args.policy, M=args.M, L=args.L, horizon=args.n, runs=args.runs,
                seed=args.seed, mode=args.mode, initial=args.initial, checkpoints=checkpoints,
                allow_mismatch=True if args.allow_mismatch else None)
    _require_condition(cfg.arms)
    L_min = min_exploration_constant(cfg.arms)
    if cfg.L < L_min:
        _warn(f"L = {cfg.L:g} is below the sufficient exploration constant {L_min:.6g}")
    means = [s.analysis.mean_reward for s in cfg.arms]
    order = rank_by_mean(means)
    if cfg.M < cfg.K and means[order[cfg.M - 1]] - means[order[cfg.M]] <= 1e-12:
        _warn("the M-th and (M+1)-th mean rewards are equal; restless guarantees need a strict gap")
    result = harness.monte_carlo(cfg, workers=args.threads, backend=args.backend)
    text = harness.to_csv(result)
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _bounds_report(specs, M: int, L: float, ns) -> str:
    c = bound_constants(specs, M)
    lines = [
        f"arms                {len(specs)}",
        f"M                   {M}",
        f"L                   {L:.12g}",
        f"L_min               {c.L_min:.12g}",
        f"beta                {c.beta:.12g}",
        f"pi_min              {c.pi_min:.12g}",
        f"eps_min             {c.eps_min:.12g}",
        f"S_max               {c.S_max}",
        f"r_max               {c.r_max:.12g}",
        f"pi_hat_max          {c.pi_hat_max:.12g}",
        f"F                   {c.F:.12g}",
        f"optimal arms        {' '.join(str(i + 1) for i in sorted(c.optimal))}",
        "",
        "arm,mu,gap_to_M,gap_to_best,sum_j_C,D,E",
    ]
    for i in c.suboptimal:
        csum = sum(c.C[i, j] for j in c.optimal)
        lines.append(",".join([str(i + 1)] + ["%.12g" % v for v in (c.means[i], c.gap_to_M[i], c.gap_to_best[i], csum, c.D[i], c.E[i])]))
    lines += ["", "n,ln_n,theorem1_rested,theorem2_restless"]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for n in ns:
            b1 = theorem1_bound(specs, M, L, n)
            b2 = theorem2_bound(specs, M, L, n)
            lines.append(f"{n},{math.log(n):.12g},{b1.value:.12g},{b2.value:.12g}")
        lines += ["", "play-count bounds at n = %d" % ns[-1], "arm,rested,restless"]
        for i in c.suboptimal:
            r = lemma_play_count_bound(specs, M, L, ns[-1], i, "rested").value
            s = lemma_play_count_bound(specs, M, L, ns[-1], i, "restless").value
            lines.append(f"{i + 1},{r:.12g},{s:.12g}")
    lines += ["", "note: theorem1_rested omits the additive constant depending on the state spaces, "
              "rewards and transition matrices (not available in closed form)"]
    return "\n".join(lines) + "\n"


def cmd_bounds(args) -> int:
    cfg = _load(args, M=args.M)
    _require_condition(cfg.arms)
    L = args.L if args.L is not None else cfg.L
    ns = sorted(args.n) if args.n else [10**3, 10**4, 10**5]
    try:
        report = _bounds_report(cfg.arms, cfg.M, L, ns)
    except (GapError, ValueError) as exc:
        raise CliError(EXIT_INVALID, str(exc)) from exc
    if L < bound_constants(cfg.arms, cfg.M).L_min:
        _warn(f"L = {L:g} is below L_min; bounds are reported but not guaranteed")
    sys.stdout.write(report)
    return EXIT_OK


def cmd_tables(args) -> int:
    names = [args.preset] if args.preset else list(PRESET_NAMES)
    worst_ok = True
    for name in names:
        rows = table_deviation(name)
        tol = TABLE_TOLERANCE[name]
        dev = max(r[3] for r in rows)
        print(f"{name} (tolerance {tol:g})")
        print("channel,computed,reference,abs_dev")
        for ch, mu, target, d in rows:
            print(f"{ch},{mu:.6f},{target:.3f},{d:.6f}")
        print(f"max_abs_dev,{dev:.6f},{'ok' if dev <= tol else 'FAIL'}")
        print()
        worst_ok &= dev <= tol
    return EXIT_OK if worst_ok else EXIT_MISMATCH


def cmd_validate(args) -> int:
    cfg = _load(args)
    failed = False
    for k, spec in enumerate(cfg.arms):
        rep = check_condition1(spec)
        status = "pass" if rep.passed else "FAIL"
        clauses = " ".join(f"{name}={'ok' if ok else 'no'}" for name, ok in rep.clauses().items())
        print(f"arm {k + 1}: {status} {clauses}")
        for m in rep.messages:
            print(f"  {m}")
        failed |= not rep.passed
    if failed:
        print("condition check: FAIL")
        return EXIT_CONDITION
    means = [s.analysis.mean_reward for s in cfg.arms]
    order = rank_by_mean(means)
    if cfg.M < cfg.K:
        gap = means[order[cfg.M - 1]] - means[order[cfg.M]]
        if gap <= 1e-12:
            _warn(f"mu^M = mu^(M+1) = {means[order[cfg.M]]:.6g} for M = {cfg.M}: the M best arms are "
                  "not strictly separated, which restless regret guarantees require")
            print(f"strict gap: FAIL (M = {cfg.M})")
        else:
            print(f"strict gap: ok (mu^M - mu^(M+1) = {gap:.6g})")
    L_min = min_exploration_constant(cfg.arms)
    verdict = "ok" if cfg.L >= L_min else "below (bounds not guaranteed)"
    print(f"L = {cfg.L:g}, L_min = {L_min:.6g}: {verdict}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="markov-bandits", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def source(sp, preset_required=False):
        g = sp.add_mutually_exclusive_group(required=preset_required)
        g.add_argument("--config", help="JSON experiment file")
        g.add_argument("--preset", choices=PRESET_NAMES)

    r = sub.add_parser("run", help="Monte-Carlo regret experiment, CSV output")
    source(r)
    r.add_argument("--policy", choices=harness.POLICIES)
    r.add_argument("--M", type=int)
    r.add_argument("--L", type=float)
    r.add_argument("--n", type=int, help="horizon in slots")
    r.add_argument("--runs", type=int)
    r.add_argument("--seed", type=int)
    r.add_argument("--mode", choices=("rested", "restless"))
    r.add_argument("--initial", help="stationary | uniform")
    r.add_argument("--checkpoints", help="comma-separated slot numbers")
    r.add_argument("--allow-mismatch", action="store_true", help="permit ucbm on restless or rcam on rested arms")
    r.add_argument("--threads", type=int, default=None, help="parallel runs (default: BANDIT_THREADS or CPU count)")
    r.add_argument("--backend", choices=("auto", "compiled", "python"), default="auto")
    r.add_argument("--out", help="CSV path (default: stdout)")
    r.set_defaults(func=cmd_run)

    b = sub.add_parser("bounds", help="exploration constant and regret bounds")
    source(b)
    b.add_argument("--M", type=int)
    b.add_argument("--L", type=float)
    b.add_argument("--n", type=int, nargs="+")
    b.set_defaults(func=cmd_bounds)

    t = sub.add_parser("tables", help="computed vs reference channel mean rewards")
    t.add_argument("--preset", choices=PRESET_NAMES)
    t.set_defaults(func=cmd_tables)

    v = sub.add_parser("validate", help="check a configuration file")
    v.add_argument("config")
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (ConfigError, ChainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
