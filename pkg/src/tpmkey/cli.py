"""Command line entry point: simulate, nist, keyagree, distill.

Exit status: 0 success, 1 usage error, 2 session failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import netlink
from .distill import DistillConfig, distill, pack_bits, parse_bool
from .experiment import (
    after_distillation_stream,
    before_equalization_stream,
    run_batch,
    summarize,
)
from .randsuite import SuiteReport, TestId, run_suite
from .tpm import Role, Rule, TpmParams

EXIT_OK, EXIT_USAGE, EXIT_SESSION, EXIT_IO = 0, 1, 2, 3

log = logging.getLogger("tpmkey")

# config-file key -> (argparse dest, converter)
_CONFIG_KEYS = {
    "k": ("k", int), "l": ("l", int), "m": ("m", int), "n": ("n", int),
    "rule": ("rule", str), "sessions": ("sessions", int), "seed": ("seed", int),
    "hash": ("hash", str), "out": ("out", str), "port": ("port", int),
    "workers": ("workers", int), "equalization": ("equalization", parse_bool),
    "baseline": ("baseline", parse_bool), "allow_large_m": ("allow_large_m", parse_bool),
}

_DEFAULTS = {
    "k": 3, "l": 8, "m": 1, "n": 60, "rule": "hebbian", "sessions": 1000, "seed": None,
    "hash": "sha256", "out": None, "port": netlink.DEFAULT_PORT, "workers": 1,
    "equalization": True, "baseline": True, "allow_large_m": False,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def read_config(path: str) -> dict:
    """Plain ``key = value`` lines; '#' starts a comment."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().lower().replace("-", "_")
        if not sep or key not in _CONFIG_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown or malformed entry {raw.strip()!r}")
        dest, conv = _CONFIG_KEYS[key]
        try:
            values[dest] = conv(value.strip())
        except ValueError as exc:
            raise UsageError(f"{path}:{lineno}: {exc}") from exc
    return values


def _resolve(args) -> argparse.Namespace:
    merged = dict(_DEFAULTS)
    if getattr(args, "config", None):
        merged.update(read_config(args.config))
    for key in _DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    merged.update({k: v for k, v in vars(args).items() if k not in merged})
    return argparse.Namespace(**merged)


def _params(ns) -> TpmParams:
    try:
        return TpmParams(ns.k, ns.l, ns.m, ns.n, Rule(ns.rule), allow_large_m=ns.allow_large_m)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def _distill_cfg(ns) -> DistillConfig:
    try:
        return DistillConfig(hash_name=ns.hash, equalization=ns.equalization)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _out_dir(ns, default: str) -> Path:
    out = Path(ns.out or default)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _params_dict(p: TpmParams) -> dict:
    return {"K": p.K, "L": p.L, "M": p.M, "N": p.N, "rule": p.rule.value}


def cmd_simulate(ns) -> int:
    params = _params(ns)
    if ns.sessions < 1:
        raise UsageError("sessions must be >= 1")
    out = _out_dir(ns, "results")
    seed = 0 if ns.seed is None else ns.seed
    batch = run_batch(params, ns.sessions, seed, workers=ns.workers)
    summary = summarize(batch)
    (out / "distribution.csv").write_text(summary.to_csv())
    doc = {"params": _params_dict(params), "seed": seed, **summary.to_dict()}
    (out / "summary.json").write_text(json.dumps(doc, indent=2) + "\n")
    print(json.dumps(doc, indent=2))
    return EXIT_OK


def _cell(result) -> str:
    if not result.applicable:
        return "n/a"
    if len(result.p_values) == 1:
        return f"{result.p_values[0]:.3f}"
    if result.id is TestId.NON_OVERLAPPING_TEMPLATE:
        return f"min {result.p_value:.3f} ({sum(result.passes)}/{len(result.p_values)} pass)"
    return ", ".join(f"{p:.3f}" for p in result.p_values)


def render_table(columns: dict[str, SuiteReport]) -> str:
    """Text table: one row per test (cusums split into forward and backward)."""
    names = list(columns)
    lines = ["test | " + " | ".join(names)]
    for i, test_id in enumerate(TestId, start=1):
        results = [columns[c][test_id] for c in names]
        if test_id is TestId.CUMULATIVE_SUMS:
            for j, label in enumerate(("Fwd", "Bwd")):
                cells = [f"{r.p_values[j]:.3f}" if r.applicable else "n/a" for r in results]
                lines.append(f"{i}) {test_id.value} ({label}) | " + " | ".join(cells))
            continue
        lines.append(f"{i}) {test_id.value} | " + " | ".join(_cell(r) for r in results))
    lines.append("families passed | " + " | ".join(
        str(len(columns[c].passed_families())) for c in names))
    return "\n".join(lines) + "\n"


def cmd_nist(ns) -> int:
    params = _params(ns)
    cfg = _distill_cfg(ns)
    out = _out_dir(ns, "results")
    seed = 0 if ns.seed is None else ns.seed
    batch = run_batch(params, ns.sessions, seed, workers=ns.workers)
    columns = {}
    if ns.baseline:
        columns["before equalization"] = run_suite(before_equalization_stream(batch))
    after = after_distillation_stream(batch, cfg)
    if after.size == 0:
        log.warning("distillation produced no bits")
        return EXIT_SESSION
    columns["after distillation"] = run_suite(after)
    table = render_table(columns)
    doc = {
        "params": _params_dict(params), "seed": seed, "sessions": ns.sessions,
        "distill": cfg.to_text(), "columns": {k: v.to_dict() for k, v in columns.items()},
    }
    (out / "nist.json").write_text(json.dumps(doc, indent=2) + "\n")
    (out / "nist.txt").write_text(table)
    print(table, end="")
    return EXIT_OK


def secret_hex(bits) -> str:
    """Lowercase hex of the secret, bits packed least significant first."""
    return pack_bits(bits).hex()


def cmd_keyagree(ns) -> int:
    params = _params(ns)
    cfg = _distill_cfg(ns)
    if ns.role is None:
        role = Role.RECIPIENT if ns.listen is not None else Role.SENDER
    else:
        role = Role(ns.role)
    # without --seed each party draws fresh entropy; with it, the role keeps
    # the two sides apart even when both were given the same number
    root = np.random.SeedSequence(ns.seed, spawn_key=(list(Role).index(role),))
    seed_weights, seed_inputs = root.spawn(2)
    if ns.listen is not None:
        server = netlink.listen(ns.listen, ns.port)
        try:
            log.info("listening on %s:%d", ns.listen, server.getsockname()[1])
            channel = netlink.accept(server, timeout=ns.timeout)
        finally:
            server.close()
    else:
        channel = netlink.connect(ns.connect, ns.port, timeout=ns.timeout)
    with channel:
        report = netlink.run_remote_session(
            channel, params, role, seed_weights, seed_inputs, hash_name="sha256"
        )
    if not report.synchronized:
        print(f"key agreement failed: {report.detail}", file=sys.stderr)
        return EXIT_SESSION
    secret = distill(report.final_weights, params, cfg)
    out = Path(ns.out or "secret.hex")
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(secret_hex(secret) + "\n")
    meta = {
        "params": _params_dict(params), "role": role.value, "iterations": report.iterations,
        "updates": report.updates, "sync_digest": report.sync_digest.hex(),
        "secret_bits": int(secret.size), "hash": cfg.hash_name,
    }
    out.with_name(out.name + ".json").write_text(json.dumps(meta, indent=2) + "\n")
    print(f"{role.value}: synchronized after {report.iterations} rounds, "
          f"{secret.size}-bit secret written to {out}")
    return EXIT_OK


def read_weights(path: str) -> np.ndarray:
    text = Path(path).read_text()
    try:
        return np.array([int(tok) for tok in text.replace(",", " ").split()], dtype=np.int64)
    except ValueError as exc:
        raise UsageError(f"{path}: weights must be integers") from exc


def cmd_distill(ns) -> int:
    params = _params(ns)
    cfg = _distill_cfg(ns)
    weights = read_weights(ns.weights)
    try:
        secret = distill(weights, params, cfg)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    text = secret_hex(secret) + "\n"
    if ns.out:
        Path(ns.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="plain key = value file; flags override it")
    common.add_argument("--k", type=int, help="hidden units (default 3)")
    common.add_argument("--l", type=int, help="weight bound (default 8)")
    common.add_argument("--m", type=int, help="input bound (default 1)")
    common.add_argument("--n", type=int, help="inputs per hidden unit (default 60)")
    common.add_argument("--rule", choices=[r.value for r in Rule])
    common.add_argument("--allow-large-m", action="store_const", const=True, default=None)
    common.add_argument("--hash", help="substitution hash (default sha256)")
    common.add_argument("--seed", type=int,
                        help="master seed (simulate/nist default 0, keyagree default random)")
    common.add_argument("--out", help="output directory or file")
    common.add_argument("-v", "--verbose", action="store_true")

    batch = argparse.ArgumentParser(add_help=False)
    batch.add_argument("--sessions", type=int, help="synchronizations to run (default 1000)")
    batch.add_argument("--workers", type=int, help="worker processes (default 1)")

    parser = _Parser(prog="tpmkey", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", parents=[common, batch],
                       help="weight distributions before and after equalization")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("nist", parents=[common, batch], help="randomness suite before/after")
    p.add_argument("--no-baseline", dest="baseline", action="store_const", const=False, default=None,
                   help="skip the before-equalization column")
    p.add_argument("--no-equalization", dest="equalization", action="store_const", const=False,
                   default=None, help="distill without the equalization phase")
    p.set_defaults(func=cmd_nist)

    p = sub.add_parser("keyagree", parents=[common], help="run one side over TCP")
    where = p.add_mutually_exclusive_group(required=True)
    where.add_argument("--listen", nargs="?", const="127.0.0.1", metavar="HOST")
    where.add_argument("--connect", metavar="HOST")
    p.add_argument("--port", type=int, help=f"TCP port (default {netlink.DEFAULT_PORT})")
    p.add_argument("--role", choices=[r.value for r in Role],
                   help="default: listener is recipient, connector is sender")
    p.add_argument("--timeout", type=float, default=60.0)
    p.set_defaults(func=cmd_keyagree)

    p = sub.add_parser("distill", parents=[common], help="weights file -> secret hex")
    p.add_argument("weights", help="file of K*N whitespace separated integers, row-major")
    p.set_defaults(func=cmd_distill)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(_resolve(args))
    except UsageError as exc:
        print(f"tpmkey: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"tpmkey: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
