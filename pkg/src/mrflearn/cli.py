"""Command-line front end.

Subcommands: ``sample`` (draw configurations from a model file),
``learn-ising`` / ``learn-pairwise`` (fit weights and a graph from a sample
CSV), ``incoherence`` (exact diagnostic for one node), and ``experiment``
(recovery sweep from a JSON config with flag overrides). Failures print a
machine-readable JSON object on stderr and exit nonzero.
"""

import argparse
import json
import sys
from pathlib import Path

from .experiments import (ExperimentConfig, emit_plot_data, incoherence,
                          run_recovery_experiment)
from .learning import LearnConfig, learn_ising, learn_pairwise
from .models import load_model
from .sampling import load_samples, sample_exact, sample_gibbs, save_samples
from .sparsitron import SparsitronConfig, sparsitron_learn_pairwise


class CLIError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CLIError(message)


def _out_dir(path):
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_sample(args):
    model = load_model(args.model)
    if args.method == "exact":
        ss = sample_exact(model, args.num, args.seed)
    else:
        ss = sample_gibbs(model, args.num, args.seed,
                          burn_in=args.burn_in, thinning=args.thinning)
    out = _out_dir(args.out)
    save_samples(ss, out / "samples.csv")
    print(json.dumps({"samples": str(out / "samples.csv"),
                      "num": ss.num, "n": ss.n, "method": ss.method}))
    return 0


def _learn_config(args, solver):
    return LearnConfig(lam=args.lam, eta=args.eta, solver=solver,
                       iterations=args.iterations, tol=args.tol,
                       or_rule=args.or_rule)


def _emit_learn(result, n, out):
    out = _out_dir(out)
    result.save_json(out / "result.json")
    result.save_edges_csv(out / "edges.csv", n)
    print(json.dumps({"result": str(out / "result.json"),
                      "edges": [list(e) for e in result.edges]}))
    return 0


def _cmd_learn_ising(args):
    if args.solver == "sparsitron":
        raise CLIError("the sparsitron solver applies to learn-pairwise")
    samples = load_samples(args.samples)
    result = learn_ising(samples, _learn_config(args, args.solver))
    return _emit_learn(result, samples.n, args.out)


def _cmd_learn_pairwise(args):
    samples = load_samples(args.samples)
    if args.solver == "sparsitron":
        result = sparsitron_learn_pairwise(
            samples, _learn_config(args, "mirror"),
            SparsitronConfig(seed=args.seed))
    else:
        result = learn_pairwise(samples, _learn_config(args, args.solver))
    return _emit_learn(result, samples.n, args.out)


def _cmd_incoherence(args):
    model = load_model(args.model)
    value = incoherence(model, args.node)
    print(json.dumps({"node": args.node, "incoherence": value}))
    return 0


def _cmd_experiment(args):
    with open(args.config) as fh:
        raw = json.load(fh)
    if args.seed is not None:
        raw["master_seed"] = args.seed
    if args.solver is not None:
        raw["solver"] = args.solver
    if args.runs is not None:
        raw["runs"] = args.runs
    if args.jobs is not None:
        raw["jobs"] = args.jobs
    config = ExperimentConfig.from_dict(raw)
    result = run_recovery_experiment(config)
    out = _out_dir(args.out)
    csv_path, manifest_path = emit_plot_data(result, out / "curve.csv")
    with open(out / "records.json", "w") as fh:
        json.dump(result.to_dict(), fh, indent=1)
    print(json.dumps({"curve": str(csv_path), "manifest": str(manifest_path),
                      "aggregates": result.aggregates()}))
    return 0


def build_parser():
    parser = _Parser(prog="mrflearn",
                     description="Structure learning for discrete pairwise "
                                 "graphical models")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw i.i.d. configurations from a model")
    p.add_argument("--model", required=True, help="model JSON file")
    p.add_argument("--num", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--method", choices=["exact", "gibbs"], default="exact")
    p.add_argument("--burn-in", type=int, default=1000, dest="burn_in")
    p.add_argument("--thinning", type=int, default=5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_sample)

    for name, func in (("learn-ising", _cmd_learn_ising),
                       ("learn-pairwise", _cmd_learn_pairwise)):
        p = sub.add_parser(name, help=f"{name} from a sample CSV")
        p.add_argument("--samples", required=True, help="sample CSV path")
        p.add_argument("--lam", type=float, required=True,
                       help="width upper bound")
        p.add_argument("--eta", type=float, required=True,
                       help="minimum edge weight lower bound")
        p.add_argument("--solver", choices=["mirror", "reference", "sparsitron"],
                       default="mirror")
        p.add_argument("--iterations", type=int, default=None)
        p.add_argument("--tol", type=float, default=1e-8)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--or-rule", action="store_true", dest="or_rule")
        p.add_argument("--out", required=True)
        p.set_defaults(func=func)

    p = sub.add_parser("incoherence", help="exact incoherence of one node")
    p.add_argument("--model", required=True)
    p.add_argument("--node", type=int, required=True)
    p.set_defaults(func=_cmd_incoherence)

    p = sub.add_parser("experiment", help="run a recovery sweep")
    p.add_argument("--config", required=True, help="experiment JSON config")
    p.add_argument("--seed", type=int, default=None, help="master seed override")
    p.add_argument("--solver", choices=["mirror", "reference", "sparsitron"],
                   default=None)
    p.add_argument("--runs", type=int, default=None)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_experiment)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except Exception as exc:  # contract: nonzero exit, JSON error report
        json.dump({"error": type(exc).__name__, "message": str(exc)},
                  sys.stderr)
        sys.stderr.write("\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
