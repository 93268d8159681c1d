"""Command-line interface.

Subcommands: gen-init (write an initialization bank container), denoise
(filter a CSV trace online), figures (emit per-figure CSV data and an SVG
plot), bench-disc (time the transition-matrix constructions). Exit codes:
0 success, 1 numeric failure, 2 usage or validation error. The environment
variable UNHIPPO_SEED overrides the default seed.
"""

from __future__ import annotations

import argparse
import math
import os
import statistics
import sys
import time

import numpy as np

from . import container, signals
from .dynamics import TRANSITION_SCHEMES, data_free_matrix, make_regularized, transition
from .errors import NumericError
from .hippo import discretize_hippo, init_pair, make_hippo
from .kalman import KalmanState, NoiseConfig, build_init_bank, extract_unhippo_pair, run_filter
from .matfun import expm
from .legendre import Basis, project, reconstruct

DEFAULT_SEED = 0

HIPPO_BANK_SCHEMES = ("trapezoidal_lssl", "forward", "backward")

FIGURES = (
    "legendre",
    "extrapolation",
    "comparison",
    "sigma-effect",
    "time-invariance",
    "discretizations",
)


def _default_seed() -> int:
    env = os.environ.get("UNHIPPO_SEED")
    if env is None:
        return DEFAULT_SEED
    try:
        return int(env)
    except ValueError:
        raise ValueError(f"UNHIPPO_SEED must be an integer, got {env!r}") from None


def shifted_times(taus: np.ndarray) -> np.ndarray:
    """Map sample times onto a positive filter time axis.

    The window dynamics are singular at t = 0, so traces starting at 0 are
    shifted by one grid spacing: t_k = tau_k - tau_0 + (tau_1 - tau_0). On a
    uniform grid this reproduces the integer-step time axis up to scale, and
    the closed-form transitions depend on time ratios only.
    """
    return taus - taus[0] + (taus[1] - taus[0])


def denoise_signal(
    taus,
    values,
    n: int,
    kind: str,
    noise: NoiseConfig | None = None,
    scheme: str | None = None,
) -> np.ndarray:
    """Run the chosen recurrence over a sampled signal.

    Returns the reconstruction at each step's window endpoint, i.e. the
    online estimate b^T c_k of the current signal value.
    """
    taus = np.asarray(taus, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    times = shifted_times(taus)
    sys_h = make_hippo(n)
    if kind == "unhippo":
        reg = make_regularized(sys_h)
        means = run_filter(reg, times, values, noise, scheme or "closed_form")
        return means @ sys_h.b
    if kind == "hippo":
        scheme = scheme or "trapezoidal_lssl"
        c = np.zeros(n)
        recon = np.empty(times.size)
        prev = 0.0
        for k, (t, y) in enumerate(zip(times, values)):
            dt = t - prev
            a_bar, b_bar = init_pair(sys_h, scheme, t, dt)
            c = a_bar @ c + b_bar * y
            recon[k] = sys_h.b @ c
            prev = t
        return recon
    raise ValueError(f"unknown kind {kind!r}, expected 'hippo' or 'unhippo'")


# ---------------------------------------------------------------------------
# figures


def _write_csv(path, header: list, columns: list) -> None:
    data = np.column_stack(columns)
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in data:
            fh.write(",".join(f"{cell:.17g}" for cell in row) + "\n")


def _plot(path, seed: int, curves, title: str, xlabel: str, log_y: bool = False) -> None:
    """Render labeled (x, y) curves to a deterministic SVG."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = str(seed)
    fig, ax = plt.subplots(figsize=(7, 4))
    for label, x, y in curves:
        finite = np.isfinite(y)
        ax.plot(np.asarray(x)[finite], np.asarray(y)[finite], label=label, linewidth=1.2)
    if log_y:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_title(title)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)


def fig_legendre(outdir: str, seed: int) -> None:
    basis = Basis(5, 1.0)
    taus = np.linspace(0.0, 1.0, 401)
    curves = [reconstruct(basis, np.eye(5)[i], taus) for i in range(5)]
    _write_csv(
        os.path.join(outdir, "legendre_basis.csv"),
        ["tau"] + [f"g{i}" for i in range(5)],
        [taus] + curves,
    )
    trace = signals.sample_gp(401, 1.0, 0.15, seed)
    basis8 = Basis(8, 1.0)
    coefs = project(basis8, trace.taus, trace.clean)
    fhat = reconstruct(basis8, coefs, taus)
    _write_csv(
        os.path.join(outdir, "legendre_projection.csv"),
        ["tau", "f", "fhat"],
        [taus, trace.clean, fhat],
    )
    _plot(
        os.path.join(outdir, "legendre.svg"),
        seed,
        [(f"g{i}", taus, c) for i, c in enumerate(curves)]
        + [("f", taus, trace.clean), ("fhat", taus, fhat)],
        "Basis polynomials and an order-8 projection",
        "tau",
    )


def fig_extrapolation(outdir: str, seed: int) -> None:
    n = 16
    t_old, t_new = 1.0, 1.3
    trace = signals.sample_gp(801, t_old, 0.12, seed)
    coefs = project(Basis(n, t_old), trace.taus, trace.clean)
    sys_h = make_hippo(n)
    reg = make_regularized(sys_h)
    taus = np.linspace(0.0, t_new, 801)
    naive = reconstruct(Basis(n, t_old), coefs, taus)
    ratio = math.log(t_new / t_old)
    c_unreg = expm(ratio * data_free_matrix(sys_h)) @ coefs
    c_reg = transition(reg, t_old, t_new) @ coefs
    unreg = reconstruct(Basis(n, t_new), c_unreg, taus)
    regd = reconstruct(Basis(n, t_new), c_reg, taus)
    _write_csv(
        os.path.join(outdir, "extrapolation.csv"),
        ["tau", "fhat_polynomial", "fhat_extended", "fhat_regularized"],
        [taus, naive, unreg, regd],
    )
    _plot(
        os.path.join(outdir, "extrapolation.svg"),
        seed,
        [
            ("polynomial beyond its window", taus, naive),
            ("extended, unregularized", taus, unreg),
            ("extended, regularized", taus, regd),
        ],
        "Window extension with and without slope regularization",
        "tau",
    )


def _comparison_data(seed: int, sigma2: float = 1e10, n: int = 64):
    trace = signals.add_noise(signals.sample_gp(250, 10.0, 1.0, seed), 0.1, seed + 1)
    rec_h = denoise_signal(trace.taus, trace.noisy, n, "hippo")
    rec_u = denoise_signal(trace.taus, trace.noisy, n, "unhippo", NoiseConfig(sigma2=sigma2))
    return trace, rec_h, rec_u


def fig_comparison(outdir: str, seed: int) -> None:
    trace, rec_h, rec_u = _comparison_data(seed)
    _write_csv(
        os.path.join(outdir, "comparison.csv"),
        ["tau", "clean", "noisy", "hippo", "unhippo"],
        [trace.taus, trace.clean, trace.noisy, rec_h, rec_u],
    )
    _plot(
        os.path.join(outdir, "comparison.svg"),
        seed,
        [
            ("clean", trace.taus, trace.clean),
            ("noisy", trace.taus, trace.noisy),
            ("hippo", trace.taus, rec_h),
            ("unhippo", trace.taus, rec_u),
        ],
        "Online reconstruction under observation noise",
        "tau",
    )


def fig_sigma_effect(outdir: str, seed: int) -> None:
    trace = signals.add_noise(signals.sample_gp(250, 10.0, 1.0, seed), 0.1, seed + 1)
    sigmas = [1e6, 1e8, 1e10, 1e12]
    recons = [
        denoise_signal(trace.taus, trace.noisy, 64, "unhippo", NoiseConfig(sigma2=s))
        for s in sigmas
    ]
    _write_csv(
        os.path.join(outdir, "sigma_effect.csv"),
        ["tau", "clean", "noisy"] + [f"recon_{s:.0e}" for s in sigmas],
        [trace.taus, trace.clean, trace.noisy] + recons,
    )
    _plot(
        os.path.join(outdir, "sigma_effect.svg"),
        seed,
        [("clean", trace.taus, trace.clean), ("noisy", trace.taus, trace.noisy)]
        + [(f"sigma2={s:.0e}", trace.taus, r) for s, r in zip(sigmas, recons)],
        "Filtering strength across the observation-noise hyperparameter",
        "tau",
    )


def fig_time_invariance(outdir: str, seed: int, k: int = 500, n: int = 64) -> None:
    """Roll a fixed step-k pair over a signal and track the horizontal
    compression of the encoded history."""
    bank = build_init_bank(n, k, "unhippo")
    a_u, b_u = bank.pairs[k - 1]
    trace = signals.sample_gp(250, 10.0, 1.0, seed)
    c = np.zeros(n)
    steps = len(trace.taus)
    factors = np.empty(steps)
    running = 1.0
    checkpoints = {50: None, 100: None, 150: None, 200: None, 250: None}
    for i, y in enumerate(trace.noisy, start=1):
        c = a_u @ c + b_u * y
        running *= (k - 1) / k
        factors[i - 1] = running
        if i in checkpoints:
            checkpoints[i] = c.copy()
    rel = np.linspace(0.0, 1.0, 501)
    basis = Basis(n, 1.0)
    recon_cols = {
        f"recon_{i}": reconstruct(basis, state, rel) for i, state in checkpoints.items()
    }
    _write_csv(
        os.path.join(outdir, "time_invariance_recon.csv"),
        ["relative_position"] + list(recon_cols),
        [rel] + list(recon_cols.values()),
    )
    _write_csv(
        os.path.join(outdir, "time_invariance_factor.csv"),
        ["step", "factor_iterated", "factor_power"],
        [
            np.arange(1, steps + 1, dtype=np.float64),
            factors,
            ((k - 1) / k) ** np.arange(1, steps + 1, dtype=np.float64),
        ],
    )
    _plot(
        os.path.join(outdir, "time_invariance.svg"),
        seed,
        [(name, rel, col) for name, col in recon_cols.items()],
        f"Reconstructions under repeated application of the step-{k} pair",
        "relative position in window",
    )


def unhippo_matrix_at(reg, b, k: int, noise: NoiseConfig, scheme: str) -> np.ndarray:
    """Step-k uncertainty-aware matrix with the covariance recursion run
    entirely in the given discretization scheme (no PSD guard, so divergent
    schemes can be visualized)."""
    state = KalmanState(0, np.zeros(reg.n), np.eye(reg.n))
    a_u = np.eye(reg.n)
    for j in range(1, k + 1):
        t_from = float(j - 1) if j > 1 else float(j)
        a_bar = transition(reg, t_from, float(j), scheme)
        a_u, _, p = extract_unhippo_pair(state, a_bar, b, noise)
        state = KalmanState(j, state.m, p)
    return a_u


def fig_discretizations(outdir: str, seed: int, n: int = 64, k: int = 10, reps: int = 250):
    """Norm trajectories of repeated applications of step-k transition
    matrices, one curve per discretization and kind.

    The timescale k = 10 is the smallest one selected by the default layer
    initialization, where the schemes differ most visibly.
    """
    sys_h = make_hippo(n)
    reg = make_regularized(sys_h)
    trace = signals.sample_gp(2000, 1.0, 0.1, seed)
    c0 = project(Basis(n, 1.0), trace.taus, trace.clean)
    c0 /= np.linalg.norm(c0)
    curves = {}
    for scheme in ("forward", "backward", "trapezoidal", "trapezoidal_lssl"):
        a_bar = discretize_hippo(sys_h, scheme, float(k - 1), 1.0).a_bar
        curves[f"hippo_{scheme}"] = _norm_trajectory(a_bar, c0, reps)
    for scheme in TRANSITION_SCHEMES:
        try:
            a_u = unhippo_matrix_at(reg, sys_h.b, k, NoiseConfig(), scheme)
            curves[f"unhippo_{scheme}"] = _norm_trajectory(a_u, c0, reps)
        except NumericError:
            curves[f"unhippo_{scheme}"] = np.full(reps + 1, np.nan)
    steps = np.arange(reps + 1, dtype=np.float64)
    _write_csv(
        os.path.join(outdir, "discretizations.csv"),
        ["step"] + list(curves),
        [steps] + list(curves.values()),
    )
    _plot(
        os.path.join(outdir, "discretizations.svg"),
        seed,
        [(name, steps, col) for name, col in curves.items()],
        f"State norm under repeated application of step-{k} matrices",
        "applications",
        log_y=True,
    )


def _norm_trajectory(a_bar: np.ndarray, c0: np.ndarray, reps: int) -> np.ndarray:
    norms = np.empty(reps + 1)
    c = c0.copy()
    norms[0] = np.linalg.norm(c)
    for i in range(1, reps + 1):
        c = a_bar @ c
        norms[i] = np.linalg.norm(c)
        if not np.isfinite(norms[i]):
            norms[i + 1 :] = np.nan
            break
    return norms


_FIGURE_FUNCS = {
    "legendre": fig_legendre,
    "extrapolation": fig_extrapolation,
    "comparison": fig_comparison,
    "sigma-effect": fig_sigma_effect,
    "time-invariance": fig_time_invariance,
    "discretizations": fig_discretizations,
}


# ---------------------------------------------------------------------------
# benchmark


def bench_transitions(n: int = 256, reps: int = 5) -> dict:
    """Median seconds to build one step-500 transition matrix per scheme."""
    if n < 1:
        raise ValueError(f"state size must be >= 1, got {n}")
    if reps < 1:
        raise ValueError(f"need at least one repetition, got {reps}")
    reg = make_regularized(make_hippo(n))
    results = {}
    for scheme in ("closed_form", "trapezoidal", "forward", "backward"):
        times = []
        transition(reg, 500.0, 501.0, scheme)  # warm up
        for _ in range(reps):
            start = time.perf_counter()
            transition(reg, 500.0, 501.0, scheme)
            times.append(time.perf_counter() - start)
        results[scheme] = statistics.median(times)
    return results


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen_init(args) -> int:
    if args.n < 1:
        print(f"error: --n must be >= 1, got {args.n}", file=sys.stderr)
        return 2
    if args.t_max < 1:
        print(f"error: --t-max must be >= 1, got {args.t_max}", file=sys.stderr)
        return 2
    scheme = args.scheme
    if args.kind == "hippo":
        scheme = scheme or "trapezoidal_lssl"
        if scheme not in HIPPO_BANK_SCHEMES:
            print(
                f"error: scheme {scheme!r} is not available for hippo banks "
                f"(closed form exists only for the data-free dynamics); "
                f"choose one of {HIPPO_BANK_SCHEMES}",
                file=sys.stderr,
            )
            return 2
    else:
        scheme = scheme or "closed_form"
        if scheme not in TRANSITION_SCHEMES:
            print(
                f"error: scheme {scheme!r} is not available for unhippo banks; "
                f"choose one of {TRANSITION_SCHEMES}",
                file=sys.stderr,
            )
            return 2
    try:
        noise = NoiseConfig(sigma2=args.sigma2, process_scale=args.process_scale)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    bank = build_init_bank(args.n, args.t_max, args.kind, noise, scheme)
    container.save_bank(args.out, bank)
    print(f"wrote={args.out} kind={args.kind} n={args.n} t_max={args.t_max} scheme={scheme}")
    return 0


def cmd_denoise(args) -> int:
    if args.n < 1:
        print(f"error: --n must be >= 1, got {args.n}", file=sys.stderr)
        return 2
    try:
        trace = signals.read_trace(args.input)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        noise = NoiseConfig(sigma2=args.sigma2, process_scale=args.process_scale)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    recon = denoise_signal(trace.taus, trace.noisy, args.n, args.kind, noise)
    with open(args.out, "w") as fh:
        fh.write("tau,recon\n")
        for tau, value in zip(trace.taus, recon):
            fh.write(f"{tau:.17g},{value:.17g}\n")
    print(
        f"mse_clean={signals.mse(recon, trace.clean):.17g} "
        f"mse_noisy={signals.mse(recon, trace.noisy):.17g}"
    )
    return 0


def cmd_figures(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    _FIGURE_FUNCS[args.which](args.out, args.seed)
    print(f"wrote={args.out} which={args.which} seed={args.seed}")
    return 0


def cmd_bench_disc(args) -> int:
    if args.n < 1 or args.reps < 1:
        print("error: --n and --reps must be >= 1", file=sys.stderr)
        return 2
    results = bench_transitions(args.n, args.reps)
    print(f"{'scheme':<14} median_ms")
    for scheme, seconds in results.items():
        print(f"{scheme:<14} {seconds * 1e3:9.3f}")
    for scheme, seconds in results.items():
        print(f"scheme={scheme} median_ms={seconds * 1e3:.6g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="unhippo",
        description="State-space-model initializations and online signal denoising",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    gen = sub.add_parser("gen-init", help="write an initialization bank container")
    gen.add_argument("--kind", choices=("hippo", "unhippo"), required=True)
    gen.add_argument("--n", type=int, default=128)
    gen.add_argument("--t-max", dest="t_max", type=int, default=1000)
    gen.add_argument("--sigma2", type=float, default=1e10)
    gen.add_argument("--process-scale", dest="process_scale", type=float, default=1.0)
    gen.add_argument("--scheme", default=None)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=cmd_gen_init)

    den = sub.add_parser("denoise", help="filter a tau,clean,noisy CSV trace online")
    den.add_argument("--input", required=True)
    den.add_argument("--n", type=int, default=64)
    den.add_argument("--sigma2", type=float, default=1e10)
    den.add_argument("--process-scale", dest="process_scale", type=float, default=1.0)
    den.add_argument("--kind", choices=("hippo", "unhippo"), required=True)
    den.add_argument("--out", required=True)
    den.set_defaults(func=cmd_denoise)

    fig = sub.add_parser("figures", help="emit per-figure CSV data and an SVG plot")
    fig.add_argument("--which", choices=FIGURES, required=True)
    fig.add_argument("--out", required=True)
    fig.add_argument("--seed", type=int, default=None)
    fig.set_defaults(func=cmd_figures)

    bench = sub.add_parser("bench-disc", help="time transition-matrix constructions")
    bench.add_argument("--n", type=int, default=256)
    bench.add_argument("--reps", type=int, default=5)
    bench.set_defaults(func=cmd_bench_disc)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        if getattr(args, "seed", None) is None and hasattr(args, "seed"):
            args.seed = _default_seed()
        return args.func(args)
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
