"""Command-line front end.

Every run writes its artifacts plus a manifest.json into --out. Output
is deterministic byte-for-byte for a fixed command line: floats are
written with shortest round-trip literals, JSON keys are sorted, and
the only randomness (dutchbook sampling) is seeded. Failures write
error.json and exit with the error's status: 2 parse, 3 invariant,
4 not decoherent, 5 cap exceeded.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .errors import EngineError, InvariantViolation
from .histories import (
    DEFAULT_DEC_TOL,
    branch_matrix,
    decoherence_functional,
    dec_measure,
    offdiagonal_offenders,
)
from .records import (
    construct_records,
    record_correlation_report,
    verify_strong_records,
    verify_weak_records,
)
from .coarsegrain import (
    Partition,
    class_sums,
    coarse_decoherence_functional,
    greedy_decohering_search,
    partition_from_literal,
)
from .composite import product_rule_report
from .finegrained import fundamental_distribution
from .twoslit import (
    TwoSlitConfig,
    binned_extended_probabilities,
    default_config,
    deepest_fringe_location,
    delta_sweep,
    extended_density,
    arrival_density,
    interference_integral,
    self_convergence,
)
from .threebox import greedy_sector_search, three_box_model, three_box_report
from .dutchbook import BetSpec, exploit_negative_price, gain_report
from .modelfile import BuiltModel, format_complex, load_model


@dataclass(frozen=True)
class RunManifest:
    """What ran, with which options, and what it wrote."""

    command: str
    engine_version: str
    options: dict
    outputs: tuple[str, ...]

    def to_json(self) -> str:
        return _dump_json({
            "command": self.command,
            "engine_version": self.engine_version,
            "options": self.options,
            "outputs": list(self.outputs),
        })


def _py(value):
    """Recursively convert to JSON-serializable builtins."""
    if isinstance(value, np.ndarray):
        return [_py(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [_py(v) for v in value]
    if isinstance(value, dict):
        return {k: _py(v) for k, v in value.items()}
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, (complex, np.complexfloating)):
        return format_complex(complex(value))
    return value


def _dump_json(obj) -> str:
    return json.dumps(_py(obj), indent=2, sort_keys=True) + "\n"


def _fmt_cell(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (complex, np.complexfloating)):
        return format_complex(complex(x))
    s = str(x)
    # history labels can contain commas
    return '"' + s.replace('"', '""') + '"' if "," in s or '"' in s else s


def _csv(header: Sequence[str], rows) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt_cell(c) for c in row) for row in rows)
    return "\n".join(lines) + "\n"


class _OutDir:
    def __init__(self, path: str):
        self.path = path
        os.makedirs(path, exist_ok=True)
        self.written: list[str] = []

    def write(self, name: str, text: str):
        with open(os.path.join(self.path, name), "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        self.written.append(name)


def _require_model(args) -> BuiltModel:
    if not args.model:
        raise InvariantViolation("missing-option", 1.0, "this command needs --model PATH")
    return load_model(args.model)


def _require(model: BuiltModel, attr: str, what: str):
    value = getattr(model, attr)
    if value is None or value == {}:
        raise InvariantViolation("missing-section", 1.0,
                                 f"model file {model.path} declares no {what}")
    return value


def _resolve_partition(model: BuiltModel | None, text: str, fine_count: int) -> Partition:
    if text.lstrip().startswith("["):
        return partition_from_literal(text, fine_count)
    if model is None or text not in model.partitions:
        raise InvariantViolation("unknown-partition", 0.0,
                                 f"no partition named {text!r} in the model file")
    return Partition(fine_count, model.partitions[text])


def _tol(args, default: float = DEFAULT_DEC_TOL) -> float:
    return default if args.tol is None else args.tol


def _cmd_eval(args, out: _OutDir):
    model = _require_model(args)
    hs = _require(model, "history_set", "slots")
    psi = _require(model, "psi", "state")
    b = branch_matrix(hs, psi)
    ep = np.real(psi.amplitudes.conj() @ b)
    dh = np.linalg.norm(b, axis=0) ** 2
    rows = []
    for idx in hs.indices():
        flat = hs.flat(idx)
        rows.append((flat, hs.history_label(idx), ep[flat], dh[flat], dh[flat] - ep[flat]))
    out.write("histories.csv", _csv(("flat", "label", "ep", "dh", "dh_minus_ep"), rows))
    out.write("summary.json", _dump_json({
        "dim": hs.dim,
        "n_times": hs.n_times,
        "size": hs.size,
        "sum_ep": float(ep.sum()),
        "sum_dh": float(dh.sum()),
        "min_ep": float(ep.min()),
        "total_negative": float(ep[ep < 0.0].sum()),
    }))


def _cmd_decohere(args, out: _OutDir):
    model = _require_model(args)
    hs = _require(model, "history_set", "slots")
    psi = _require(model, "psi", "state")
    report = decoherence_functional(hs, psi, tol=_tol(args))
    out.write("functional.csv", _csv(
        tuple(f"c{j}" for j in range(report.size)),
        report.functional,
    ))
    out.write("decoherence.json", _dump_json({
        "tolerance": report.tolerance,
        "dec": report.dec,
        "max_offdiagonal": report.max_offdiagonal,
        "medium_decoherent": report.medium_decoherent,
        "linearly_positive": report.linearly_positive,
        "ep": report.ep_probs,
        "dh": report.dh_probs,
        "offenders": [
            {"alpha": a, "beta": bta, "magnitude": mag}
            for (a, bta), mag in offdiagonal_offenders(report.functional, report.tolerance)
        ],
    }))


def _cmd_records(args, out: _OutDir):
    model = _require_model(args)
    hs = _require(model, "history_set", "slots")
    psi = _require(model, "psi", "state")
    tol = _tol(args)
    rs = construct_records(hs, psi, tol=tol)
    strong = verify_strong_records(hs, psi, rs, tol=tol)
    weak = verify_weak_records(hs, psi, rs, tol=tol)
    corr = record_correlation_report(hs, psi, rs, epsilon=tol)
    out.write("records.json", _dump_json({
        "t_rec": rs.t_rec,
        "completion_index": rs.completion_index,
        "labels": [r.label for r in rs.members],
        "ranks": [r.rank for r in rs.members],
        "strong_max_defect": strong.max_defect,
        "weak_max_defect": weak.max_defect,
        "correlation": {
            "record_probs": corr.record_probs,
            "ep_probs": corr.ep_probs,
            "max_defect": corr.max_defect,
            "negative_bound_ok": corr.negative_bound_ok,
        },
    }))


def _cmd_coarsen(args, out: _OutDir):
    model = _require_model(args)
    hs = _require(model, "history_set", "slots")
    psi = _require(model, "psi", "state")
    fine = decoherence_functional(hs, psi, tol=_tol(args))
    if args.partition:
        part = _resolve_partition(model, args.partition, hs.size)
        coarse = coarse_decoherence_functional(fine.functional, part)
        coarse_ep = class_sums(fine.ep_probs, part)
        out.write("coarsen.json", _dump_json({
            "classes": part.classes,
            "labels": part.labels,
            "fine_dec": fine.dec,
            "coarse_dec": dec_measure(coarse),
            "fine_ep": fine.ep_probs,
            "coarse_ep": coarse_ep,
            "fine_total_negative": float(fine.ep_probs[fine.ep_probs < 0.0].sum()),
            "coarse_total_negative": float(coarse_ep[coarse_ep < 0.0].sum()),
            "dec_monotone": bool(dec_measure(coarse) <= fine.dec + 1e-12),
        }))
    else:
        result = greedy_decohering_search(hs, psi, target_tol=_tol(args))
        out.write("greedy.json", _dump_json({
            "classes": result.partition.classes,
            "dec": result.dec,
            "succeeded": result.succeeded,
            "trace": [{"merge": list(pair), "dec_after": d} for pair, d in result.trace],
            "fine_dec": fine.dec,
        }))


def _cmd_composite(args, out: _OutDir):
    model = _require_model(args)
    composites = _require(model, "composites", "composite")
    report = {}
    for name in sorted(composites):
        cs = composites[name]
        rule = product_rule_report(cs)
        report[name] = {
            "dims": cs.dims,
            "joint_dim": cs.joint_dim,
            "counts": cs.counts,
            "joint_count": cs.joint_count,
            "joint_ep": rule.joint_ep,
            "factor_ep_product": rule.factor_ep_product,
            "max_violation": rule.max_violation,
        }
    out.write("composite.json", _dump_json(report))


def _cmd_finegrained(args, out: _OutDir):
    model = _require_model(args)
    spec = _require(model, "finegrained", "finegrained basis")
    dist = fundamental_distribution(spec)
    rows = [(flat, ";".join(str(b) for b in outcome), dist.values[flat])
            for flat, outcome in enumerate(dist.outcomes())]
    out.write("finegrained.csv", _csv(("flat", "outcome", "w"), rows))
    summary = {
        "shape": dist.shape,
        "size": dist.size,
        "sum": float(dist.values.sum()),
        "min": float(dist.values.min()),
        "max": float(dist.values.max()),
        "total_negative": float(dist.values[dist.values < 0.0].sum()),
    }
    if args.partition:
        part = _resolve_partition(model, args.partition, dist.size)
        summary["class_sums"] = class_sums(dist.values, part)
        summary["classes"] = part.classes
    out.write("summary.json", _dump_json(summary))


def _cmd_twoslit(args, out: _OutDir):
    if args.bins is not None:
        cfg = TwoSlitConfig(bins=args.bins)
    else:
        cfg = default_config(k_delta=5.0 if args.k_delta is None else args.k_delta)
    upper, lower = binned_extended_probabilities(cfg)
    cross = np.array([interference_integral(cfg, i) for i in range(cfg.bins)])
    edges = cfg.bin_edges()
    out.write("bins.csv", _csv(
        ("bin", "y_lo", "y_hi", "p_upper", "p_lower", "cross"),
        ((i, edges[i], edges[i + 1], upper[i], lower[i], cross[i]) for i in range(cfg.bins)),
    ))
    ys = np.linspace(cfg.y_range[0], cfg.y_range[1], 801)
    du = extended_density(cfg, ys, "U")
    dl = extended_density(cfg, ys, "L")
    arr = arrival_density(cfg, ys)
    out.write("curve.csv", _csv(
        ("y", "density_upper", "density_lower", "arrival"),
        zip(ys, du, dl, arr),
    ))
    out.write("sweep.csv", _csv(
        ("k_delta", "bins", "min_upper", "min_lower",
         "n_negative_upper", "n_negative_lower", "max_cross_ratio"),
        ((r.k_delta, r.bins, r.min_upper, r.min_lower,
          len(r.negative_upper), len(r.negative_lower), r.max_cross_ratio)
         for r in delta_sweep(k=cfg.k, y_range=cfg.y_range)),
    ))
    out.write("summary.json", _dump_json({
        "k": cfg.k,
        "d": cfg.d,
        "D": cfg.D,
        "y_range": cfg.y_range,
        "bins": cfg.bins,
        "k_delta": cfg.k_delta,
        "min_upper": float(upper.min()),
        "min_lower": float(lower.min()),
        "negative_bins_upper": np.flatnonzero(upper < 0.0),
        "negative_bins_lower": np.flatnonzero(lower < 0.0),
        "deepest_fringe_abs_y": deepest_fringe_location(cfg),
        "self_convergence_128_512": self_convergence(cfg, 128, 512),
    }))


def _cmd_threebox(args, out: _OutDir):
    report = three_box_report(tol=_tol(args, default=1e-10))
    greedy = greedy_sector_search(three_box_model(), target_tol=_tol(args, default=1e-10))
    out.write("threebox.json", _dump_json({
        "fine_ep": report.fine_eps,
        "fine_dec": report.fine_dec,
        "sector_ep": report.sector_eps,
        "p_phi": report.p_phi,
        "conditionals_given_phi": report.conditionals,
        "sector_functional": [[format_complex(z) for z in row]
                              for row in report.sector_functional],
        "coarse": [
            {
                "name": box.name,
                "ep": box.decoherence.ep_probs,
                "conditional_pair": box.conditional_pair,
                "medium_decoherent": box.decoherence.medium_decoherent,
                "max_offdiagonal": box.decoherence.max_offdiagonal,
            }
            for box in report.coarse
        ],
        "greedy_sector": {
            "classes": greedy.partition.classes,
            "dec": greedy.dec,
            "succeeded": greedy.succeeded,
        },
    }))


def _cmd_dutchbook(args, out: _OutDir):
    seed = 0 if args.seed is None else args.seed
    rng = np.random.default_rng(seed)
    canonical = exploit_negative_price(p_a=-1.0, stake=-1.0)
    rows = [("canonical", canonical)]
    for _ in range(20):
        bet = BetSpec(
            p_a=float(rng.uniform(-1.5, 1.5)),
            s_a=float(rng.uniform(-2.0, 2.0)),
            s_not_a=float(rng.uniform(-2.0, 2.0)),
        )
        rows.append(("sampled", gain_report(bet)))
    out.write("dutchbook.csv", _csv(
        ("kind", "p_a", "p_not_a", "s_a", "s_not_a", "gain_a", "gain_not_a", "sure_loss"),
        ((kind, r.bet.p_a, r.bet.p_not_a, r.bet.s_a, r.bet.s_not_a,
          r.gain_a, r.gain_not_a, r.sure_loss) for kind, r in rows),
    ))
    out.write("summary.json", _dump_json({
        "seed": seed,
        "canonical": {
            "p_a": canonical.bet.p_a,
            "s_a": canonical.bet.s_a,
            "gain_a": canonical.gain_a,
            "gain_not_a": canonical.gain_not_a,
            "sure_loss": canonical.sure_loss,
            "loss_if_a": -canonical.gain_a,
        },
        "sampled_sure_losses": sum(1 for kind, r in rows if kind == "sampled" and r.sure_loss),
    }))


_COMMANDS: dict[str, tuple[Callable, str]] = {
    "eval": (_cmd_eval, "extended and standard probabilities per history"),
    "decohere": (_cmd_decohere, "decoherence functional and its diagnostics"),
    "records": (_cmd_records, "construct and verify record projectors"),
    "coarsen": (_cmd_coarsen, "coarse grain by partition, or search greedily"),
    "composite": (_cmd_composite, "product-rule report for composite systems"),
    "finegrained": (_cmd_finegrained, "fundamental distribution over a fine basis"),
    "twoslit": (_cmd_twoslit, "two-slit extended densities and binned values"),
    "threebox": (_cmd_threebox, "built-in three-box example report"),
    "dutchbook": (_cmd_dutchbook, "bet gains at quoted prices"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", help="model file path")
    common.add_argument("--tol", type=float, default=None, help="tolerance override")
    common.add_argument("--out", default="out", help="output directory (default: out)")
    common.add_argument("--seed", type=int, default=None, help="RNG seed (dutchbook)")
    common.add_argument("--kDelta", dest="k_delta", type=float, default=None,
                        help="two-slit bin width in phase units")
    common.add_argument("--bins", type=int, default=None, help="two-slit bin count override")
    common.add_argument("--partition", default=None,
                        help="partition name from the model, or a literal like [[0],[1,2]]")

    parser = argparse.ArgumentParser(
        prog="ephist",
        description="Extended-probability engine for finite closed quantum systems.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (handler, blurb) in _COMMANDS.items():
        sp = sub.add_parser(name, parents=[common], help=blurb, description=blurb)
        sp.set_defaults(handler=handler)
    return parser


def run_command(argv: Sequence[str]) -> int:
    args = build_parser().parse_args(argv)
    out = _OutDir(args.out)
    options = {
        "model": args.model,
        "tol": args.tol,
        "seed": args.seed,
        "kDelta": args.k_delta,
        "bins": args.bins,
        "partition": args.partition,
    }
    try:
        args.handler(args, out)
    except EngineError as err:
        out.write("error.json", _dump_json({"command": args.command, **err.payload()}))
        print(f"error: {err}", file=sys.stderr)
        return err.exit_status
    manifest = RunManifest(
        command=args.command,
        engine_version=__version__,
        options=options,
        outputs=tuple(sorted(out.written)),
    )
    out.write("manifest.json", manifest.to_json())
    print(f"{args.command}: wrote {len(out.written)} file(s) to {args.out}")
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    return run_command(sys.argv[1:] if argv is None else list(argv))


if __name__ == "__main__":
    sys.exit(main())
