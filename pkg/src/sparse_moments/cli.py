"""Command-line front end: ``sparse-moments {gen,moments,recover,eval,sweep}``.

Exit status: 0 ok, 2 bad input, 3 bad configuration, 4 numerical failure.
JSON outputs have sorted keys and embed the fully resolved configuration;
CSV outputs get a ``<out>.config.json`` sidecar.
"""

import argparse
import csv
import io
import json
import os
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .errors import BadInput, ConfigError, SparseMomentsError
from .highdim import RecoveryConfigHD, recover_highdim
from .mixtures import Domain, SpikeMixture, random_mixture, transport_1d, transport_general
from .moments import moment_distance, moments_from_dict, projected_moments
from .oracles import (
    GaussianModel,
    GaussianOracle,
    SyntheticOracle,
    TopicCorpus,
    TopicOracle,
)
from .prony1d import RecoveryConfig1D, recover_1d
from .prony2d import RecoveryConfig2D, recover_2d

THREADS_ENV = "SPARSE_MOMENTS_THREADS"

# ---------------------------------------------------------------------------
# I/O helpers
# ---------------------------------------------------------------------------


def dumps(obj):
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_output(path, text):
    """Write ``text`` atomically; ``None`` or ``-`` means stdout."""
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise BadInput(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise BadInput(f"{path}: malformed JSON ({exc.msg} at line {exc.lineno})") from None


def read_mixture(path):
    data = read_json(path)
    if isinstance(data, dict) and "mixture" in data:
        data = data["mixture"]  # a recovery report
    if not isinstance(data, dict) or "domain" not in data:
        raise BadInput(f"{path}: not a mixture file")
    return SpikeMixture.from_dict(data)


def _domain_from_args(kind, d):
    if kind == "interval":
        return Domain.interval()
    if kind == "triangle":
        return Domain.triangle()
    if kind in ("simplex", "ball", "box"):
        return getattr(Domain, kind)(d)
    raise ConfigError(f"unknown domain {kind!r}")


# ---------------------------------------------------------------------------
# config merging
# ---------------------------------------------------------------------------


def resolve(args, defaults, keys):
    """Merge --config file values under explicit flags; returns a plain dict."""
    cfg = dict(defaults)
    if getattr(args, "config", None):
        data = read_json(args.config)
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(data) - set(keys)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(data)
    for key in keys:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


def _num(cfg, key, kind=float, lo=None):
    try:
        v = kind(cfg[key])
    except (KeyError, TypeError, ValueError):
        noun = "an integer" if kind is int else "a number"
        raise ConfigError(f"config value {key!r} must be {noun}") from None
    if lo is not None and v < lo:
        raise ConfigError(f"{key} must be >= {lo}")
    return v


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

GEN_KEYS = ("k", "d", "domain", "separation", "zeta", "min_weight", "concentration", "seed")


def cmd_gen(args):
    cfg = resolve(
        args,
        {"d": 1, "domain": "interval", "separation": "random", "zeta": 0.1,
         "min_weight": 0.0, "concentration": 1.0, "seed": 0},
        GEN_KEYS,
    )
    k = _num(cfg, "k", int, 1)
    d = _num(cfg, "d", int, 1)
    domain = _domain_from_args(cfg["domain"], d)
    cfg["d"] = domain.dim
    mode = cfg["separation"]
    if mode not in ("random", "separated", "coincident"):
        raise ConfigError("separation must be random, separated or coincident")
    m = random_mixture(
        domain,
        k,
        _num(cfg, "seed", int, 0),
        separation=_num(cfg, "zeta") if mode == "separated" else None,
        coincident=mode == "coincident",
        min_weight=_num(cfg, "min_weight"),
        concentration=_num(cfg, "concentration"),
    )
    out = m.to_dict()
    out["config"] = cfg
    write_output(args.out, dumps(out))
    return 0


def _noisy_oracle(truth, cfg):
    return SyntheticOracle(truth, cfg["noise"], cfg["xi"], cfg["seed"])


def cmd_moments(args):
    cfg = resolve(args, {"xi": 0.0, "noise": "none", "seed": 0}, ("k", "xi", "noise", "seed"))
    m = read_mixture(args.inp)
    k = _num(cfg, "k", int, 1)
    K = 2 * k - 1
    if m.dim not in (1, 2):
        raise BadInput("moments command handles 1-D and 2-D mixtures")
    M = _noisy_oracle(m, cfg).query(np.eye(m.dim), K)
    out = M.to_dict()
    out["config"] = cfg
    write_output(args.out, dumps(out))
    return 0


RECOVER_KEYS = ("kind", "k", "d", "xi", "seed", "noise", "workers", "sigma", "threshold")


def _load_source(args, cfg):
    """Return either a moment container or an oracle for the recover command."""
    if args.corpus:
        corpus = TopicCorpus.load(args.corpus, cfg.get("d"))
        return TopicOracle(corpus, cfg["seed"])
    if args.samples:
        X = GaussianModel.load_samples(args.samples)
        sigma = _num(cfg, "sigma")
        return GaussianOracle(GaussianModel(sigma**2 * np.eye(X.shape[1]), X))
    if not args.inp:
        raise BadInput("recover needs --in, --corpus or --samples")
    data = read_json(args.inp)
    if not isinstance(data, dict):
        raise BadInput(f"{args.inp}: expected a JSON object")
    if "domain" in data:
        return _noisy_oracle(SpikeMixture.from_dict(data), cfg)
    return moments_from_dict(data)


def cmd_recover(args):
    cfg = resolve(
        args,
        {"xi": 0.0, "seed": 0, "noise": "none", "workers": 1, "sigma": 1.0, "threshold": None},
        RECOVER_KEYS,
    )
    kind = cfg.get("kind")
    if kind not in ("1d", "2d", "hd"):
        raise ConfigError("--kind must be 1d, 2d or hd")
    k = _num(cfg, "k", int, 1)
    xi = _num(cfg, "xi", float, 0.0)
    seed = _num(cfg, "seed", int, 0)
    src = _load_source(args, cfg)
    K = 2 * k - 1
    extra = {}
    if kind == "hd":
        if not hasattr(src, "query"):
            raise BadInput("hd recovery needs a mixture, corpus or samples source")
        d = src.domain.dim
        cfg["d"] = d
        hd = RecoveryConfigHD(
            k, d, xi, weight_threshold_override=cfg["threshold"], rng_seed=seed,
            workers=_num(cfg, "workers", int, 1),
        )
        rep = recover_highdim(src, hd)
        extra["queries"] = [R.tolist() for R in src.queries]
    else:
        dim = 1 if kind == "1d" else 2
        M = src.query(np.eye(dim), K) if hasattr(src, "query") else src
        if kind == "1d":
            rep = recover_1d(M, RecoveryConfig1D(k, xi, rng_seed=seed))
        else:
            rep = recover_2d(M, RecoveryConfig2D(k, xi, rng_seed=seed))
    out = rep.to_dict()
    out.update(extra)
    if args.truth:
        truth = read_mixture(args.truth)
        out["transport"] = _distance(rep.mixture, truth, args.metric or "l1")
    out["config"] = cfg
    write_output(args.out, dumps(out))
    return 0


def _distance(a, b, metric):
    if a.dim == 1 and metric == "l1":
        return transport_1d(a, b)
    return transport_general(a, b, metric)[0]


def cmd_eval(args):
    a = read_mixture(args.inp)
    b = read_mixture(args.truth)
    metric = args.metric or "l1"
    cost, plan = transport_general(a, b, metric)
    out = {"metric": metric, "transport": cost,
           "plan": {"source": plan.source.tolist(), "sink": plan.sink.tolist(),
                    "mass": plan.mass.tolist()}}
    if a.dim == 1:
        out["transport_1d"] = transport_1d(a, b)
    if a.dim in (1, 2):
        K = 2 * max(a.k, b.k) - 1
        eye = np.eye(a.dim)
        out["moment_distance"] = moment_distance(
            projected_moments(a.locations, a.weights, eye, K),
            projected_moments(b.locations, b.weights, eye, K),
            K,
        )
    out["config"] = {"in": args.inp, "truth": args.truth, "metric": metric}
    write_output(args.out, dumps(out))
    return 0


SWEEP_KEYS = ("kind", "k", "xi", "seeds", "d", "noise", "zeta", "min_weight", "concentration", "seed")


def sweep_cells(cfg):
    ks = cfg["k"] if isinstance(cfg["k"], list) else [cfg["k"]]
    xis = cfg["xi"] if isinstance(cfg["xi"], list) else [cfg["xi"]]
    seeds = cfg["seeds"]
    seeds = list(range(seeds)) if isinstance(seeds, int) else list(seeds)
    return [(int(k), float(xi), int(s)) for k in ks for xi in xis for s in seeds]


def run_cell(cfg, k, xi, seed):
    """One sweep cell: draw a truth, query a noisy oracle, recover, score."""
    kind = cfg["kind"]
    dom = {"1d": Domain.interval(), "2d": Domain.triangle(), "hd": Domain.simplex(cfg["d"])}[kind]
    base = np.random.SeedSequence([cfg["seed"], k, seed])
    truth = random_mixture(
        dom, k, int(base.generate_state(1)[0]),
        separation=cfg["zeta"] or None, min_weight=cfg["min_weight"],
        concentration=cfg["concentration"],
    )
    oracle = SyntheticOracle(truth, cfg["noise"], xi, seed)
    t0 = time.perf_counter()
    if kind == "hd":
        rep = recover_highdim(oracle, RecoveryConfigHD(k, cfg["d"], xi, rng_seed=seed))
    else:
        dim = 1 if kind == "1d" else 2
        M = oracle.query(np.eye(dim), 2 * k - 1)
        fn, C = (recover_1d, RecoveryConfig1D) if kind == "1d" else (recover_2d, RecoveryConfig2D)
        rep = fn(M, C(k, xi, rng_seed=seed))
    runtime = time.perf_counter() - t0
    err = transport_1d(rep.mixture, truth) if kind == "1d" else transport_general(rep.mixture, truth)[0]
    return err, runtime


def thread_count(n_cells):
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer") from None
    if n < 1:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer")
    return max(1, min(n, n_cells))


def cmd_sweep(args):
    cfg = resolve(
        args,
        {"kind": "1d", "d": 1, "noise": "uniform", "zeta": 0.0, "min_weight": 0.0,
         "concentration": 1.0, "seed": 0, "seeds": 1},
        SWEEP_KEYS,
    )
    if cfg["kind"] not in ("1d", "2d", "hd"):
        raise ConfigError("kind must be 1d, 2d or hd")
    for key in ("k", "xi"):
        if key not in cfg:
            raise ConfigError(f"sweep config needs {key!r}")
    try:
        cells = sweep_cells(cfg)
    except (TypeError, ValueError):
        raise ConfigError("k, xi and seeds must be numbers or lists of numbers") from None
    if not cells:
        raise ConfigError("sweep grid is empty")
    workers = thread_count(len(cells))
    cfg["threads"] = workers
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(lambda c: run_cell(cfg, *c), cells))
    else:
        results = [run_cell(cfg, *c) for c in cells]

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "xi", "seed", "transport_error", "runtime"])
    for (k, xi, seed), (err, rt) in zip(cells, results):
        w.writerow([k, repr(xi), seed, repr(float(err)), "" if args.no_timing else f"{rt:.6f}"])
    write_output(args.out, buf.getvalue())
    if args.out not in (None, "-"):
        write_output(args.out + ".config.json", dumps(cfg))
    else:
        sys.stderr.write(dumps(cfg))
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="sparse-moments", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON file with defaults for the flags")
        sp.add_argument("--out", help="output path (default stdout)")
        sp.add_argument("--seed", type=int)

    g = sub.add_parser("gen", help="write a random mixture")
    common(g)
    g.add_argument("--k", type=int)
    g.add_argument("--d", type=int)
    g.add_argument("--domain", choices=["interval", "triangle", "simplex", "box", "ball"])
    g.add_argument("--separation", choices=["random", "separated", "coincident"])
    g.add_argument("--zeta", type=float, help="minimum pairwise L1 distance when separated")
    g.add_argument("--min-weight", dest="min_weight", type=float)
    g.add_argument("--concentration", type=float, help="Dirichlet parameter for simplex spikes")
    g.set_defaults(func=cmd_gen)

    m = sub.add_parser("moments", help="exact or noisy moments of a 1-D/2-D mixture")
    common(m)
    m.add_argument("--in", dest="inp", required=True)
    m.add_argument("--k", type=int)
    m.add_argument("--xi", type=float)
    m.add_argument("--noise", choices=["none", "uniform", "adversarial"])
    m.set_defaults(func=cmd_moments)

    r = sub.add_parser("recover", help="run 1-D, 2-D or high-dimensional recovery")
    common(r)
    r.add_argument("--kind", choices=["1d", "2d", "hd"])
    r.add_argument("--in", dest="inp", help="moments file, or mixture file for a synthetic oracle")
    r.add_argument("--corpus", help="topic corpus (JSON lines)")
    r.add_argument("--samples", help="Gaussian samples (CSV)")
    r.add_argument("--sigma", type=float, help="isotropic Gaussian standard deviation")
    r.add_argument("--k", type=int)
    r.add_argument("--d", type=int)
    r.add_argument("--xi", type=float)
    r.add_argument("--noise", choices=["none", "uniform", "adversarial"])
    r.add_argument("--threshold", type=float, help="override the 2-D weight threshold")
    r.add_argument("--workers", type=int)
    r.add_argument("--truth", help="mixture file to score the result against")
    r.add_argument("--metric", choices=["l1", "l2"])
    r.set_defaults(func=cmd_recover)

    e = sub.add_parser("eval", help="transport distance between two mixtures")
    e.add_argument("--in", dest="inp", required=True)
    e.add_argument("--truth", required=True)
    e.add_argument("--metric", choices=["l1", "l2"])
    e.add_argument("--out")
    e.set_defaults(func=cmd_eval)

    s = sub.add_parser("sweep", help="CSV of recovery error over (k, xi, seed)")
    common(s)
    s.add_argument("--kind", choices=["1d", "2d", "hd"])
    s.add_argument("--k", type=int, nargs="+")
    s.add_argument("--xi", type=float, nargs="+")
    s.add_argument("--seeds", type=int, help="number of seeds per cell")
    s.add_argument("--d", type=int)
    s.add_argument("--no-timing", action="store_true", help="leave the runtime column empty")
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SparseMomentsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
