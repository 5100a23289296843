"""``affinekit`` command-line front end.

Results go to stdout as sorted-key JSON. With ``--out DIR`` the result (and a
CSV histogram where relevant) is also written there together with
``manifest.json``. Exit codes: 0 success, 2 input error, 3 computation failure.
"""
from __future__ import annotations

import argparse
import sys
import time
from fractions import Fraction
from importlib import metadata
from pathlib import Path

from . import affine, atlas, cech, cookbook, io, kernels, lattice, measure, realization, rng, variation
from .exact import DimMismatch, ExactError, ExactVector, PeriodBasis

EXIT_OK, EXIT_INPUT, EXIT_FAILURE = 0, 2, 3

FAILURES = (realization.NoReturnFound, realization.NonCompactFiber, realization.NonCommuting,
            realization.DomainViolation, atlas.InconsistentCrossing, cech.NotACocycle, cech.LiftInconsistent,
            lattice.SymbolRelationError, measure.RankDeficient)


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INPUT, excerpt: str = ""):
        super().__init__(message)
        self.code = code
        self.excerpt = excerpt


def version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:  # pragma: no cover
        return "0+unknown"


# ---------------------------------------------------------------------------
# helpers


def _vector(text: str, basis: PeriodBasis | None = None) -> ExactVector:
    parts = [p for p in text.replace(",", " ").split() if p]
    if not parts:
        raise CliError(f"empty vector {text!r}")
    return ExactVector.of(parts, basis or PeriodBasis.rational())


def _floats(text: str) -> list[float]:
    try:
        return [float(p) for p in text.replace(",", " ").split()]
    except ValueError:
        raise CliError(f"cannot parse numbers from {text!r}") from None


def _basis(symbols: list[str]) -> PeriodBasis:
    approx = {}
    for s in symbols or ():
        if "=" not in s:
            raise CliError(f"symbol must be NAME=DIGITS, got {s!r}")
        k, v = s.split("=", 1)
        approx[k.strip()] = v.strip()
    return PeriodBasis.with_symbols(**approx) if approx else PeriodBasis.rational()


class Run:
    """Collects inputs and outputs for the manifest."""

    def __init__(self, argv):
        self.argv = list(argv)
        self.inputs: dict[str, str] = {}
        self.seed = None
        self.files: dict[str, str] = {}

    def load(self, name: str, schema: str):
        p = io.resolve(name)
        self.inputs[str(name)] = io.sha256(p)
        return io.load_json(str(p), schema)


# ---------------------------------------------------------------------------
# group


def cmd_group(args, run: Run):
    P = affine.GroupPresentation.from_json(run.load(args.file, "group"))
    if args.bound:
        P = P.with_bound(args.bound)
    if args.action == "analyze":
        return affine.analyze(P).to_json()
    if args.action == "enumerate":
        return {"elements": [{"word": affine.word_str(w.word), **w.element.to_json()}
                             for w in affine.enumerate_words(P)]}
    if args.action == "isotropy":
        if not args.x:
            raise CliError("group isotropy needs --x")
        x = _vector(args.x, P.basis)
        return {"x": x.to_json(), "isotropy": [affine.word_str(w.word) for w in affine.isotropy(P, x)]}
    if args.action == "check-closed-form":
        if P.closed_form is None:
            raise CliError("group has no closed_form")
        bad = affine.closed_form_mismatches(P)
        return {"mismatches": [affine.word_str(w.word) for w in bad], "agrees": not bad}
    raise CliError(f"unknown group action {args.action}")


def cmd_classify(args, run: Run):
    return {"types": sorted(affine.classify_linear_model(args.gamma_finite, args.s_compact, args.pi1_finite)),
            "compact": False}


# ---------------------------------------------------------------------------
# atlas


def cmd_atlas(args, run: Run):
    A = atlas.AtlasGraph.from_json(run.load(args.file, "atlas"))
    x0 = _vector(args.x0, A.basis) if args.x0 else None
    path = atlas.EdgePath.of(args.start, args.word or "", x0)
    if args.action == "develop":
        end, comp = atlas.develop_path(A, path)
        return {"composite": comp.to_json(), "endpoint": end.to_json() if end is not None else None,
                "end_chart": atlas.path_end(A, path)}
    if args.action == "holonomy":
        return atlas.holonomy(A, path).to_json()
    if args.action == "cocycle":
        if not args.tau:
            raise CliError("atlas cocycle needs --tau")
        tau = atlas.EdgePath.of(args.start, args.tau)
        return {"holds": atlas.cocycle_check(A, path, tau)}
    raise CliError(f"unknown atlas action {args.action}")


# ---------------------------------------------------------------------------
# variation


def cmd_variation(args, run: Run):
    if args.action == "monodromy":
        B = _basis(args.symbol)
        res = variation.monodromy_product_family(args.spherical or [], args.all or [], args.intermediate, B)
        return res.to_json()
    if args.action == "su2":
        a = variation.coadjoint_su2_area(args.r, args.mesh)
        return {"r": args.r, "mesh": args.mesh, "area": a, "expected": 4 * 3.141592653589793 * args.r}
    if args.action == "reeb":
        return variation.reeb_example(args.mesh)
    if not args.file:
        raise CliError(f"variation {args.action} needs a leaf file")
    L = variation.LeafModel.from_json(run.load(args.file, "leaf"))
    if args.action == "run":
        if not args.dev:
            raise CliError("variation run needs --dev")
        klass = variation.variation_along(L, _vector(args.dev, L.omega0.basis))
        return {"class": klass.to_json(), "in_cone": variation.in_symplectic_cone(L, klass)}
    if args.action == "decompose":
        return variation.variation_decomposition(L).to_json()
    if args.action == "act":
        if not args.u:
            raise CliError("variation act needs --u")
        A = [[int(x) for x in row.split(",")] for row in args.A.split(";")] if args.A else None
        g = affine.AffineElement.of(_vector(args.u, L.omega0.basis), A)
        return variation.pi1_action(L, g).to_json()
    raise CliError(f"unknown variation action {args.action}")


# ---------------------------------------------------------------------------
# realization


def _system(args, run: Run):
    spec = args.system
    if spec in ("oscillator", "oscillator2", "free_particle"):
        return realization.builtin(spec, args.scale)
    data = run.load(spec, "system")
    sys_ = realization.from_json(data)
    return sys_ if args.scale == 1.0 else sys_.scaled(args.scale)


def cmd_realization(args, run: Run):
    run.seed = args.seed
    S = _system(args, run)
    if args.action == "periods":
        if not args.base:
            raise CliError("realization periods needs --base")
        return realization.period_lattice(S, _floats(args.base), args.tol, args.seed).to_json()
    if args.action == "check":
        return {"max_residual": realization.moment_condition_check(S, args.samples, args.seed)}
    raise CliError(f"unknown realization action {args.action}")


# ---------------------------------------------------------------------------
# measure


def cmd_measure(args, run: Run):
    run.seed = args.seed
    n = int(float(args.samples)) if args.samples else None
    if args.action == "dh":
        n = n or 1_000_000
        if args.system == "s1":
            h = measure.s1_on_c2(n, args.seed, args.bins or 10)
        elif args.system == "t2":
            h = measure.t2_on_c2(n, args.seed, args.bins or 5)
        else:
            raise CliError("measure dh --system must be s1 or t2")
        out = {"histogram": h.to_json()}
        if len(h.edges) == 1:
            out["fits"] = {str(d): measure.polynomial_fit(h, d).to_json() for d in range(min(3, h.shape[0] - 1))}
            run.files["histogram.csv"] = io.histogram_csv(h.rows())
            if args.csv:
                Path(args.csv).write_text(run.files["histogram.csv"], newline="")
        return out
    if args.action == "fubini":
        f = {"z2": lambda x, y, z, b: z * z, "one": lambda x, y, z, b: 1.0 + 0 * z}[args.f or "z2"]
        return measure.fubini_check(f, lambda b: args.iota, mu_scale=args.iota, samples=n or 100_000,
                                    seed=args.seed).to_json()
    if args.action == "weyl":
        name = args.f or "gaussian"
        if name not in measure.RADIAL:
            raise CliError(f"weyl --f must be one of {sorted(measure.RADIAL)}")
        r = measure.weyl_su2_check(name, n or 1_000_000, args.seed)
        out = r.to_json()
        out["relative_error"] = out["lhs_relative_error"]
        return out
    if args.action == "pairmass":
        e = measure.pair_groupoid_mass(args.area, n or 100_000, args.seed)
        return dict(e.to_json(), expected=args.area ** 2, relative_error=abs(e.value / args.area ** 2 - 1))
    if args.action == "density":
        vs = [_vector(v) for v in args.vectors]
        return {"density": str(measure.affine_density_exact(vs)) if all(v.is_rational for v in vs)
                else measure.affine_density(vs)}
    raise CliError(f"unknown measure action {args.action}")


# ---------------------------------------------------------------------------
# cech


def _cochain(N: cech.Nerve, data: dict, rank: int, ring: str) -> cech.Cochain:
    vals = {k: [Fraction(str(x)) for x in v] for k, v in data["values"].items()}
    default = data.get("default")
    return cech.Cochain.from_mapping(N, int(data["degree"]), vals, rank, ring,
                                     Fraction(str(default)) if default is not None else None)


def cmd_cech(args, run: Run):
    data = run.load(args.file, "nerve")
    N = cech.Nerve.from_json(data)
    S = cech.LocalSystem.from_json(N, data)
    if args.action == "cohomology":
        degrees = [args.degree] if args.degree is not None else list(range(N.dim + 1))
        return {str(p): cech.cohomology(N, S.with_ring("Z"), p).to_json() for p in degrees}
    if args.action in ("dd-check", "dd-trivialize"):
        if not args.cochain:
            raise CliError(f"cech {args.action} needs --cochain")
        c = _cochain(N, run.load(args.cochain, "cochain"), S.rank, "T")
        T = S.with_ring("T")
        if args.action == "dd-check":
            return {"cocycle": cech.dd_cocycle_check(c, T)}
        lam = cech.dd_trivialize(c, T)
        return {"trivializable": lam is not None, "lambda": lam.to_json(N) if lam else None,
                "class": [str(x) for x in cech.dd_class(c, T)]}
    if args.action == "chern":
        if not args.lift:
            raise CliError("cech chern needs --lift")
        ld = run.load(args.lift, "lift")
        base = _cochain(N, {"degree": 1, "values": ld["base"], "default": "0"}, S.rank, "R")
        shifts = {}
        for s in ld.get("shifts", []):
            e = tuple(N._index(v) for v in s["edge"].split(","))
            t = tuple(N._index(v) for v in s["triangle"].split(","))
            shifts[(e, t)] = tuple(s["shift"])
        return cech.chern_class(cech.TransitionLift(base, shifts), S.with_ring("Z")).to_json()
    raise CliError(f"unknown cech action {args.action}")


# ---------------------------------------------------------------------------
# cookbook


def cmd_cookbook(args, run: Run):
    run.seed = args.seed
    if args.action == "list":
        return {"scenarios": [{"name": n, "description": cookbook.REGISTRY[n].description}
                              for n in cookbook.names()]}
    if args.action == "run":
        if not args.name:
            raise CliError("cookbook run needs a scenario name")
        if args.name == "all":
            return {n: cookbook.run(n, args.seed)["result"] for n in cookbook.names()}
        if args.name not in cookbook.REGISTRY:
            raise CliError(f"unknown scenario {args.name!r}")
        return cookbook.run(args.name, args.seed)
    raise CliError(f"unknown cookbook action {args.action}")


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="affinekit", description="Integral affine and Poisson-geometry computations.")
    p.add_argument("--out", help="directory for result files and manifest.json")
    p.add_argument("--threads", type=int, default=1, help="worker threads (results do not depend on it)")
    p.add_argument("--version", action="version", version=f"affinekit {version()}")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("group", help="affine group presentations (JSON: schemas/group)")
    g.add_argument("action", choices=["analyze", "enumerate", "isotropy", "check-closed-form", "classify"])
    g.add_argument("file", nargs="?", help="group JSON or bundled name (torus1, torus2, z2z2)")
    g.add_argument("--bound", type=int, help="word bound override")
    g.add_argument("--x", help="point for isotropy, e.g. '1/2'")
    g.add_argument("--gamma-finite", action="store_true")
    g.add_argument("--s-compact", action="store_true")
    g.add_argument("--pi1-finite", action="store_true")

    a = sub.add_parser("atlas", help="developing maps and holonomy (JSON: schemas/atlas)")
    a.add_argument("action", choices=["develop", "holonomy", "cocycle"])
    a.add_argument("file")
    a.add_argument("--start", required=True, help="start chart")
    a.add_argument("--word", default="", help="edge word, rightmost edge first, e.g. 'g1 g2^-1'")
    a.add_argument("--tau", help="second loop for the cocycle check")
    a.add_argument("--x0", help="start point, e.g. '0,1/2'")

    v = sub.add_parser("variation", help="linear variation and monodromy groups (JSON: schemas/leaf)")
    v.add_argument("action", choices=["run", "decompose", "act", "monodromy", "su2", "reeb"])
    v.add_argument("file", nargs="?")
    v.add_argument("--dev", help="developing vector")
    v.add_argument("--u", help="translation part for act")
    v.add_argument("--A", help="linear part for act, rows ';'-separated, e.g. '1,1;0,1'")
    v.add_argument("--spherical", nargs="*", help="spherical periods (symbols or rationals)")
    v.add_argument("--all", nargs="*", help="all periods")
    v.add_argument("--intermediate", nargs="*", help="optional N_E generators")
    v.add_argument("--symbol", action="append", help="period symbol NAME=DIGITS (>= 30 digits)")
    v.add_argument("--r", type=float, default=1.0)
    v.add_argument("--mesh", type=int, default=256)

    r = sub.add_parser("realization", help="period lattices of moment systems (JSON: schemas/system)")
    r.add_argument("action", choices=["periods", "check"])
    r.add_argument("--system", required=True, help="built-in name or system JSON")
    r.add_argument("--base", help="regular value b")
    r.add_argument("--scale", type=float, default=1.0)
    r.add_argument("--tol", type=float, default=1e-6)
    r.add_argument("--samples", type=int, default=100)
    r.add_argument("--seed", type=int, default=0)

    m = sub.add_parser("measure", help="DH, Fubini, Weyl and pair-groupoid Monte Carlo")
    m.add_argument("action", choices=["dh", "fubini", "weyl", "pairmass", "density"])
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--samples", help="sample count (accepts 1e6)")
    m.add_argument("--bins", type=int)
    m.add_argument("--system", default="s1", help="dh: s1 or t2")
    m.add_argument("--f", help="fubini: z2|one; weyl: gaussian|ball|zero")
    m.add_argument("--iota", type=int, default=1)
    m.add_argument("--area", type=float, default=1.0)
    m.add_argument("--csv", help="also write the histogram CSV here")
    m.add_argument("vectors", nargs="*", help="density: lattice basis vectors, e.g. '2,0' '0,1'")

    c = sub.add_parser("cech", help="Čech cohomology and DD cocycles (JSON: schemas/nerve, cochain, lift)")
    c.add_argument("action", choices=["cohomology", "dd-check", "dd-trivialize", "chern"])
    c.add_argument("file")
    c.add_argument("--degree", type=int)
    c.add_argument("--cochain")
    c.add_argument("--lift")

    k = sub.add_parser("cookbook", help="named scenarios reproducing the worked examples")
    k.add_argument("action", choices=["list", "run"])
    k.add_argument("name", nargs="?", help="scenario name or 'all'")
    k.add_argument("--seed", type=int, default=0)
    return p


HANDLERS = {"group": cmd_group, "atlas": cmd_atlas, "variation": cmd_variation, "realization": cmd_realization,
            "measure": cmd_measure, "cech": cmd_cech, "cookbook": cmd_cookbook}


def _dispatch(args, run: Run):
    if args.command == "group" and args.action == "classify":
        return cmd_classify(args, run)
    if args.command == "group" and not args.file:
        raise CliError("group needs a file")
    return HANDLERS[args.command](args, run)


def _write_outputs(out_dir: Path, run: Run, text: str, wall: float, threads: int):
    out_dir.mkdir(parents=True, exist_ok=True)
    files = {"result.json": text, **run.files}
    hashes = {}
    for name, content in files.items():
        (out_dir / name).write_text(content, newline="")
        hashes[name] = io.sha256(out_dir / name)
    manifest = {"command": run.argv, "inputs": run.inputs, "seed": run.seed, "version": version(),
                "outputs": hashes, "runtime": {"wall_time_s": round(wall, 6), "threads": threads,
                                               "backend": kernels.BACKEND}}
    io.validate(manifest, "manifest")
    (out_dir / "manifest.json").write_text(io.dumps(manifest))


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    run = Run(argv)
    t0 = time.perf_counter()
    try:
        threads = max(1, args.threads)
        rng.set_threads(threads)
        kernels.set_threads(threads)
        result = _dispatch(args, run)
    except CliError as exc:
        print(f"affinekit: {exc}", file=sys.stderr)
        if exc.excerpt:
            print(exc.excerpt, file=sys.stderr)
        return exc.code
    except io.InputError as exc:
        print(f"affinekit: {exc}", file=sys.stderr)
        if exc.excerpt:
            print("expected schema:\n" + exc.excerpt, file=sys.stderr)
        return EXIT_INPUT
    except FAILURES as exc:
        print(f"affinekit: computation failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except (ExactError, KeyError, ValueError, TypeError) as exc:
        print(f"affinekit: input error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    text = io.dumps(result)
    sys.stdout.write(text)
    if args.out:
        _write_outputs(Path(args.out), run, text, time.perf_counter() - t0, threads)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
