"""Experiment runner: reproduces the reference figure data as CSV series.

Commands
--------
zeno             projected-product error against the analytic Zeno bound
trajectories     Monte-Carlo trajectory statistics against their bounds
tail             empirical tail probability of a statistic
pulse-inversion  pulse-inverted distances and the triangle-inequality check
verify           full invariant/bound suite; nonzero exit on any failure
fixtures         dump the reference Hamiltonian, projector, and sequences

Configuration is a flat ``key = value`` text file (``#`` comments); every
key is also a command-line flag, and flags override the file.  Exit codes:
0 success, 1 check failure, 2 usage error, 3 I/O error.

CSV schema: one header line, comma separated, floats printed with 12
significant digits, LF line endings.  Bound columns are pure functions of
the configuration, never of sampled data.  Statistics whose analytic floors bound
the deviation from one (purities, operator norms, fidelities) are emitted
as ``1 - mean``; distances are emitted directly.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, fields, replace
from itertools import product as iproduct

import numpy as np

from . import bounds, channel, linalg, model, montecarlo, protocol
from .bounds import BoundInputs, clip_floor
from .channel import choi_of_reduced_map, identity_choi
from .linalg import dag, schatten_norm, substream, tensor
from .model import BipartiteModel
from .montecarlo import REGISTRY, make_statistic


class UsageError(Exception):
    pass


class CheckFailure(Exception):
    pass


@dataclass
class ExperimentConfig:
    model: str = "reference"
    d1: int = 2
    d2: int = 2
    big_t: float = 1.0
    set: str = "pauli"
    n_min: int = 1
    n_max: int = 100
    n_points: int = 24
    samples: int = 100
    seed: int = 2024
    sigma1: str = "pure-0"
    sigma2: str = "pure-0"
    threshold: float = 0.99
    out: str = "out"
    threads: int = 0  # 0: take ZENO_DD_THREADS, else 1
    zeno_variant: str = "last"
    enum_cap: int = 500_000

    def resolved_threads(self) -> int:
        if self.threads > 0:
            return self.threads
        env = os.environ.get("ZENO_DD_THREADS", "")
        if env.strip():
            try:
                return max(1, int(env))
            except ValueError as e:
                raise UsageError(f"ZENO_DD_THREADS={env!r} is not an integer") from e
        return 1


_CONFIG_KEYS = {f.name.replace("_", "-"): f for f in fields(ExperimentConfig)}


def parse_config_file(path: str) -> dict:
    """Flat ``key = value`` lines with ``#`` comments; unknown keys error."""
    raw: dict[str, str] = {}
    with open(path) as fh:
        for ln, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{ln}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            raw[key.replace("_", "-")] = value
    out = {}
    for key, value in raw.items():
        if key not in _CONFIG_KEYS:
            raise UsageError(f"{path}: unknown config key {key!r}")
        f = _CONFIG_KEYS[key]
        try:
            out[f.name] = _coerce(value, f.default)
        except ValueError as e:
            raise UsageError(f"{path}: bad value for {key}: {e}") from e
    return out


def _coerce(value: str, default):
    if isinstance(default, bool):
        return value.lower() in ("1", "true", "yes")
    if isinstance(default, int):
        return int(value)
    if isinstance(default, float):
        return float(value)
    return value


def load_config(config_path: str | None, overrides: dict) -> ExperimentConfig:
    cfg = ExperimentConfig()
    if config_path:
        cfg = replace(cfg, **parse_config_file(config_path))
    clean = {k: v for k, v in overrides.items() if v is not None}
    return replace(cfg, **clean)


def n_grid(cfg: ExperimentConfig) -> list[int]:
    """Geometric integer grid in [n_min, n_max], deduplicated ascending."""
    if cfg.n_min < 1 or cfg.n_max < cfg.n_min or cfg.n_points < 1:
        raise UsageError("need 1 <= n-min <= n-max and n-points >= 1")
    pts = np.geomspace(cfg.n_min, cfg.n_max, cfg.n_points)
    return sorted({int(round(p)) for p in pts})


def resolve_model(cfg: ExperimentConfig) -> BipartiteModel:
    if cfg.big_t < 0:
        raise UsageError("big-t must be nonnegative")
    if cfg.model == "reference":
        if (cfg.d1, cfg.d2) != (2, 2):
            raise UsageError("the reference model is fixed at d1 = d2 = 2")
        h = model.REFERENCE_H
    elif cfg.model.startswith("random"):
        spec = cfg.model[len("random") :].strip("():")
        try:
            seed = int(spec)
        except ValueError as e:
            raise UsageError(f"model {cfg.model!r}: expected random:SEED") from e
        d = cfg.d1 * cfg.d2
        h = linalg.random_traceless_hermitian(d, seed)
        h = h - (np.trace(h) / d) * np.eye(d)  # remove the rounding residue
    else:
        raise UsageError(f"unknown model {cfg.model!r} (reference | random:SEED)")
    base = model.make_model(h, cfg.d1, cfg.d2)
    t = cfg.big_t / base.gen_norm if base.gen_norm > 1e-14 else 0.0
    return model.make_model(h, cfg.d1, cfg.d2, t=t)


def resolve_set(cfg: ExperimentConfig) -> protocol.DecouplingSet:
    if cfg.set == "pauli":
        return protocol.pauli_set()
    if cfg.set == "pauli-atypical":
        return protocol.pauli_atypical_set()
    if os.path.exists(cfg.set):
        return load_set_file(cfg.set)
    raise UsageError(f"unknown decoupling set {cfg.set!r} (pauli | pauli-atypical | file)")


def load_set_file(path: str) -> protocol.DecouplingSet:
    """Custom pulse sets: ``pulse LABEL WEIGHT`` headers followed by rows."""
    unitaries, weights, labels = [], [], []
    rows: list[list[complex]] = []
    header: tuple[str, float] | None = None

    def flush():
        nonlocal rows, header
        if header is None:
            return
        labels.append(header[0])
        weights.append(header[1])
        unitaries.append(np.array(rows, dtype=complex))
        rows = []
        header = None

    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("pulse"):
                flush()
                parts = line.split()
                if len(parts) != 3:
                    raise UsageError(f"{path}: expected 'pulse LABEL WEIGHT'")
                header = (parts[1], float(parts[2]))
            else:
                rows.append([complex(tok) for tok in line.split()])
    flush()
    if not unitaries:
        raise UsageError(f"{path}: no pulses found")
    return protocol.DecouplingSet(unitaries=unitaries, weights=weights, labels=labels)


def resolve_sigma(spec: str, d: int) -> np.ndarray:
    if spec == "pure-0":
        sigma = np.zeros((d, d), dtype=complex)
        sigma[0, 0] = 1.0
        return sigma
    if spec == "max-mixed":
        return np.eye(d, dtype=complex) / d
    if os.path.exists(spec):
        sigma = model.load_matrix_txt(spec)
        if sigma.shape != (d, d):
            raise UsageError(f"{spec}: expected a {d}x{d} density matrix")
        return sigma
    raise UsageError(f"unknown sigma spec {spec!r} (pure-0 | max-mixed | file)")


def _sigma_tag(which: int, spec: str) -> str:
    base = os.path.splitext(os.path.basename(spec))[0] if os.path.exists(spec) else spec
    return f"s{which}-{base}"


def fmt(x) -> str:
    return "" if x is None else format(float(x), ".12g")


@dataclass
class CsvSeries:
    path: str
    columns: list[str]
    rows: list[tuple]


def write_csv(series: CsvSeries) -> None:
    os.makedirs(os.path.dirname(series.path) or ".", exist_ok=True)
    lines = [",".join(series.columns)]
    for row in series.rows:
        if len(row) != len(series.columns):
            raise ValueError(f"row width {len(row)} != header width {len(series.columns)}")
        lines.append(",".join(fmt(x) for x in row))
    with open(series.path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# per-statistic presentation and bound columns
# ---------------------------------------------------------------------------


def _unitary_dist_fro_system2(b: BoundInputs) -> float:
    # mirror of the system-1 composite bound with the system-2 deviation
    base = clip_floor(1.0 - bounds.tr2_deviation(b))
    return float(2.0 * b.d2 * np.sqrt(max(1.0 - base**4, 0.0)))


STAT_PRESENTATION: dict[str, tuple[str, object, int]] = {
    # name: (presentation, bound column fn or None, subsystem whose sigma matters)
    "purity-1": ("one-minus", lambda b: 1.0 - clip_floor(bounds.tr1_purity_floor(b)) ** 2, 1),
    "purity-2": ("one-minus", lambda b: 1.0 - clip_floor(bounds.tr2_purity_floor(b)) ** 2, 2),
    "opnorm-1": ("one-minus", bounds.tr1_deviation, 1),
    "opnorm-2": ("one-minus", bounds.tr2_deviation, 2),
    "fidelity-2-zeno": ("one-minus", bounds.tr2_deviation, 2),
    "frob-dist-2-zeno": ("direct", lambda b: bounds.tr2_distance_bound(b)[0], 2),
    "trace-dist-1-identity": ("direct", None, 1),
    "frob-dist-superop-1-closest-unitary": ("direct", lambda b: bounds.tr1_unitary_distance_bounds(b)[0], 1),
    "frob-dist-superop-2-closest-unitary": ("direct", _unitary_dist_fro_system2, 2),
    "diamond-upper-1-closest-unitary": ("direct", lambda b: bounds.tr1_unitary_distance_bounds(b)[2], 1),
}


def _bound_inputs(mdl: BipartiteModel, n: int, sigma1, sigma2, r: float = 0.0) -> BoundInputs:
    return BoundInputs(
        d1=mdl.d1,
        d2=mdl.d2,
        big_t=mdl.big_t,
        n=n,
        sigma_fro=schatten_norm(sigma1, 2),
        sigma_inf=schatten_norm(sigma2, np.inf),
        r=r,
    )


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_zeno(cfg: ExperimentConfig) -> CsvSeries:
    """Error of the projected Zeno product against its analytic bound."""
    mdl = resolve_model(cfg)
    variant = {"last": "P-last", "sandwich": "P-sandwich", "first": "P-first"}.get(
        cfg.zeno_variant
    )
    if variant is None:
        raise UsageError(f"unknown zeno variant {cfg.zeno_variant!r}")
    bound_fn = (
        bounds.zeno_bound_sandwich if variant == "P-sandwich" else bounds.zeno_bound_one_sided
    )
    dproj = model.projector_d(cfg.d1, cfg.d2)
    target = protocol.zeno_target(mdl.gen, dproj, mdl.t)
    rows = []
    for n in n_grid(cfg):
        prod = protocol.zeno_product(mdl.gen, dproj, mdl.t, n, variant)
        err = schatten_norm(prod - target, np.inf)
        bnd = bound_fn(mdl.big_t, n)
        if err > bnd + 1e-12:
            raise CheckFailure(
                f"zeno {variant} error {err:.6e} exceeds bound {bnd:.6e} at n={n}"
            )
        rows.append((n, err, bnd))
    path = os.path.join(cfg.out, f"zeno_{cfg.zeno_variant}_n{cfg.n_min}-{cfg.n_max}.csv")
    series = CsvSeries(path=path, columns=["n", "error", "bound"], rows=rows)
    write_csv(series)
    return series


def cmd_trajectories(cfg: ExperimentConfig, statistic_names: list[str]) -> list[CsvSeries]:
    """Monte-Carlo means of registered statistics, with bound columns."""
    names = statistic_names or sorted(REGISTRY)
    unknown = [n for n in names if n not in REGISTRY]
    if unknown:
        raise UsageError(f"unknown statistics: {unknown}; known: {sorted(REGISTRY)}")
    mdl = resolve_model(cfg)
    dset = resolve_set(cfg)
    sigma1 = resolve_sigma(cfg.sigma1, cfg.d1)
    sigma2 = resolve_sigma(cfg.sigma2, cfg.d2)
    threads = cfg.resolved_threads()
    grid = n_grid(cfg)
    out: list[CsvSeries] = []
    violations: list[str] = []
    stats = [make_statistic(name, mdl, dset, sigma1=sigma1, sigma2=sigma2) for name in names]
    per_stat_rows: dict[str, list[tuple]] = {name: [] for name in names}
    for n in grid:
        if cfg.samples >= 2:
            reports = montecarlo.estimate_many(
                mdl, dset, n, cfg.samples, cfg.seed, stats, threads=threads
            )
            means = {r.statistic: (r.mean, r.stderr) for r in reports}
        else:
            sample = montecarlo.sample_trajectory(dset, n, cfg.seed, 0)
            means = {s.name: (s.evaluator(mdl, dset, sample), None) for s in stats}
        for name in names:
            presentation, bound_fn, _ = STAT_PRESENTATION[name]
            mean, stderr = means[name]
            value = 1.0 - mean if presentation == "one-minus" else mean
            bnd = bound_fn(_bound_inputs(mdl, n, sigma1, sigma2)) if bound_fn else None
            if bnd is not None and stderr is not None:
                if value > bnd + 3.0 * stderr + 1e-9:
                    violations.append(
                        f"{name} at n={n}: value {value:.6e} > bound {bnd:.6e} "
                        f"+ 3*stderr {stderr:.2e}"
                    )
            per_stat_rows[name].append((n, value, stderr, bnd))
    for name in names:
        _, _, which = STAT_PRESENTATION[name]
        tag = _sigma_tag(2, cfg.sigma2) if which == 1 else _sigma_tag(1, cfg.sigma1)
        path = os.path.join(
            cfg.out, f"trajectories_{name}_{tag}_n{cfg.n_min}-{cfg.n_max}.csv"
        )
        series = CsvSeries(
            path=path, columns=["n", "mean", "stderr", "bound"], rows=per_stat_rows[name]
        )
        write_csv(series)
        out.append(series)
    if violations:
        raise CheckFailure("bound violations:\n  " + "\n  ".join(violations))
    return out


def cmd_tail(cfg: ExperimentConfig, statistic_name: str = "purity-1") -> CsvSeries:
    """Empirical tail probability P[statistic <= threshold] per grid point."""
    if not (0.0 <= cfg.threshold < 1.0):
        raise UsageError("threshold must lie in [0, 1)")
    if statistic_name not in REGISTRY:
        raise UsageError(f"unknown statistic {statistic_name!r}")
    mdl = resolve_model(cfg)
    dset = resolve_set(cfg)
    sigma1 = resolve_sigma(cfg.sigma1, cfg.d1)
    sigma2 = resolve_sigma(cfg.sigma2, cfg.d2)
    stat = make_statistic(statistic_name, mdl, dset, sigma1=sigma1, sigma2=sigma2)
    threads = cfg.resolved_threads()
    rows = []
    for n in n_grid(cfg):
        p, se = montecarlo.tail_probability(
            mdl, dset, n, cfg.samples, cfg.seed, stat, cfg.threshold, "le", threads
        )
        rows.append((n, p, se))
    _, _, which = STAT_PRESENTATION[statistic_name]
    tag = _sigma_tag(2, cfg.sigma2) if which == 1 else _sigma_tag(1, cfg.sigma1)
    path = os.path.join(
        cfg.out, f"tail_{statistic_name}_{tag}_n{cfg.n_min}-{cfg.n_max}.csv"
    )
    series = CsvSeries(path=path, columns=["n", "probability", "stderr"], rows=rows)
    write_csv(series)
    return series


def cmd_pulse_inversion(cfg: ExperimentConfig) -> CsvSeries:
    """Pulse-inversion distances and the per-sample triangle inequality.

    Emits three mean series per n: the pulse-inverted reduced Choi state
    against the identity Choi, its weighted leading projector against the
    identity Choi, and the reduced Choi state against its weighted leading
    projector.  The first never exceeds the sum of the other two.
    """
    mdl = resolve_model(cfg)
    dset = resolve_set(cfg)
    sigma2 = resolve_sigma(cfg.sigma2, cfg.d2)
    target = identity_choi(mdl.d1).matrix
    rows = []
    for n in n_grid(cfg):
        blues, reds, greens = [], [], []
        for ordinal in range(cfg.samples):
            sample = montecarlo.sample_trajectory(dset, n, cfg.seed, ordinal)
            traj = protocol.trajectory_evolution(mdl, dset, sample)
            w = np.eye(dset.d1, dtype=complex)
            for i in sample.indices:
                w = dset.unitaries[i] @ w
            w_hat = channel.superop_from_unitary(tensor(w, np.eye(mdl.d2)))
            tilde = dag(w_hat) @ traj
            lam1 = choi_of_reduced_map(traj, sigma2, 2)
            lam1t = choi_of_reduced_map(tilde, sigma2, 2)
            spec = lam1.spectrum
            spec_t = lam1t.spectrum
            p0 = np.outer(spec.eigenvectors[:, 0], spec.eigenvectors[:, 0].conj())
            p0t = np.outer(spec_t.eigenvectors[:, 0], spec_t.eigenvectors[:, 0].conj())
            blue = schatten_norm(lam1t.matrix - target, 1)
            green = schatten_norm(lam1.matrix - spec.eigenvalues[0] * p0, 1)
            red = schatten_norm(spec_t.eigenvalues[0] * p0t - target, 1)
            if blue > green + red + 1e-9:
                raise CheckFailure(
                    f"triangle inequality violated at n={n}, ordinal={ordinal}: "
                    f"{blue:.6e} > {green:.6e} + {red:.6e}"
                )
            blues.append(blue)
            reds.append(red)
            greens.append(green)
        row = [n]
        for vals in (blues, reds, greens):
            arr = np.asarray(vals)
            row.append(float(arr.mean()))
            row.append(
                float(np.sqrt(arr.var(ddof=1) / len(arr))) if len(arr) > 1 else None
            )
        rows.append(tuple(row))
    tag = _sigma_tag(2, cfg.sigma2)
    path = os.path.join(cfg.out, f"pulse-inversion_triangle_{tag}_n{cfg.n_min}-{cfg.n_max}.csv")
    series = CsvSeries(
        path=path,
        columns=[
            "n",
            "inverted_vs_identity",
            "inverted_vs_identity_stderr",
            "leading_vs_identity",
            "leading_vs_identity_stderr",
            "dist_to_leading",
            "dist_to_leading_stderr",
        ],
        rows=rows,
    )
    write_csv(series)
    return series


def cmd_fixtures(cfg: ExperimentConfig) -> list[str]:
    """Dump the reference Hamiltonian, the projector, and both sequences."""
    os.makedirs(cfg.out, exist_ok=True)
    paths = []
    p = os.path.join(cfg.out, "reference_hamiltonian.txt")
    model.save_matrix_txt(p, model.REFERENCE_H)
    paths.append(p)
    p = os.path.join(cfg.out, "projector_d.txt")
    model.save_matrix_txt(p, model.projector_d(2, 2))
    paths.append(p)
    for name, labels in (
        ("typical_sequence.txt", protocol.TYPICAL_LABELS),
        ("atypical_sequence.txt", protocol.ATYPICAL_LABELS),
    ):
        p = os.path.join(cfg.out, name)
        with open(p, "w", newline="\n") as fh:
            fh.write(",".join(labels) + "\n")
        paths.append(p)
    return paths


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


@dataclass
class CheckResult:
    name: str
    tolerance: float
    margin: float  # >= 0 means pass

    @property
    def passed(self) -> bool:
        return self.margin >= 0.0


def _run_verify_checks(cfg: ExperimentConfig, corrupt_projector: bool) -> list[CheckResult]:
    mdl = resolve_model(cfg)
    dset = resolve_set(cfg)
    sigma1 = resolve_sigma(cfg.sigma1, cfg.d1)
    sigma2 = resolve_sigma(cfg.sigma2, cfg.d2)
    proj = model.projector_d(mdl.d1, mdl.d2)
    results: list[CheckResult] = []

    def record(name: str, tolerance: float, defect: float):
        results.append(CheckResult(name=name, tolerance=tolerance, margin=tolerance - defect))

    rng = substream(cfg.seed, 101)

    # Roth's lemma on random triples
    defect = 0.0
    for _ in range(25):
        a, b, c = (rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)) for _ in range(3))
        lhs = linalg.vectorize(a @ b @ c)
        rhs = tensor(a, c.T) @ linalg.vectorize(b)
        defect = max(defect, float(np.abs(lhs - rhs).max()))
    record("roth-lemma", 1e-12, defect)

    # exponential remainder bounds for Hermitian generators
    defect = 0.0
    for _ in range(20):
        x = linalg.hermitize(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
        t = float(rng.uniform(0.0, 2.0))
        nx = schatten_norm(x, np.inf)
        e = linalg.expm_i(x, t)
        defect = max(defect, schatten_norm(e - np.eye(4), np.inf) - t * nx)
        defect = max(
            defect,
            schatten_norm(e - np.eye(4) + 1j * t * x, np.inf) - 0.5 * t * t * nx * nx,
        )
    record("exp-remainder-lemma", 1e-12, defect)

    # telescope identity
    defect = 0.0
    for n in range(1, 7):
        a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        b = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        tele = sum(
            np.linalg.matrix_power(a, k)
            @ (a - b)
            @ np.linalg.matrix_power(b, n - 1 - k)
            for k in range(n)
        )
        diff = np.linalg.matrix_power(a, n) - np.linalg.matrix_power(b, n)
        defect = max(defect, float(np.abs(tele - diff).max()))
    record("telescope-identity", 1e-10, defect)

    # norm equivalence chains on Choi-sized positive matrices
    defect = 0.0
    for d in (2, 3, 4):
        for _ in range(10):
            lam = linalg.random_density(d * d, rng)
            n_inf = schatten_norm(lam, np.inf)
            n_fro = schatten_norm(lam, 2)
            n_tr = schatten_norm(lam, 1)
            defect = max(
                defect,
                n_inf - n_fro,
                n_fro - d * n_inf,
                n_inf - n_tr,
                n_tr - d * d * n_inf,
                n_fro - n_tr,
                n_tr - d * n_fro,
            )
    record("choi-norm-chains", 1e-12, defect)

    # purity/opnorm sandwich and Frobenius-purity identity on random channels
    defect_sand = 0.0
    defect_fp = 0.0
    defect_p10 = 0.0
    defect_dia = 0.0
    for i in range(40):
        d = 2 if i % 2 == 0 else 3
        kraus = channel.random_cptp_kraus(d, 1 + i % 4, rng)
        s = channel.superop_from_kraus(kraus)
        c = channel.choi_from_superop(s)
        p = c.purity()
        op = c.opnorm()
        defect_sand = max(defect_sand, op * op - p, p - op)
        defect_fp = max(defect_fp, abs(schatten_norm(s, 2) ** 2 - d * d * p))
        u, lower, upper_fro, upper_dia = channel.closest_unitary_channel(c)
        direct = schatten_norm(s - channel.superop_from_unitary(u), 2)
        loose = bounds.channel_unitary_bounds(d, p, op)[2]
        defect_p10 = max(defect_p10, lower - direct, direct - upper_fro, upper_fro - loose)
        sampled = channel.sampled_diamond_lower(
            s, channel.superop_from_unitary(u), 20, cfg.seed + i
        )
        defect_dia = max(defect_dia, sampled - upper_dia)
    record("purity-opnorm-sandwich", 1e-12, defect_sand)
    record("frobenius-purity-identity", 1e-9, defect_fp)
    record("closest-unitary-sandwich", 1e-9, defect_p10)
    record("sampled-diamond-vs-upper", 1e-9, defect_dia)

    # reduced Choi states of random two-qubit channels
    defect = 0.0
    for _ in range(15):
        kraus = channel.random_cptp_kraus(4, 2, rng)
        s = channel.superop_from_kraus(kraus)
        c = channel.choi_from_superop(s)
        for which, fixed_on, dd in ((1, 2, 2), (2, 1, 2)):
            direct = channel.reduced_choi(c, which, 2, 2)
            via_map = channel.choi_of_reduced_map(s, np.eye(dd) / dd, fixed_on)
            defect = max(defect, float(np.abs(direct.matrix - via_map.matrix).max()))
    record("reduced-choi-lemma", 1e-10, defect)

    # max-mixed decomposition
    defect = 0.0
    for _ in range(15):
        sig = linalg.random_density(3, rng)
        split = channel.max_mixed_split(sig)
        recon = split.p * sig + (1 - split.p) * split.residual
        defect = max(defect, float(np.abs(recon - np.eye(3) / 3).max()))
    record("max-mixed-split", 1e-12, defect)

    # reduced-Choi opnorm floor on trajectory channels
    defect = 0.0
    for ordinal in range(10):
        sample = montecarlo.sample_trajectory(dset, 12, cfg.seed + 7, ordinal)
        s = protocol.trajectory_evolution(mdl, dset, sample)
        c = channel.choi_from_superop(s)
        lam1 = channel.reduced_choi(c, 1, mdl.d1, mdl.d2)
        lam1_sig = channel.choi_of_reduced_map(s, sigma2, 2)
        floor = channel.reduced_choi_lower_bounds(
            lam1, schatten_norm(sigma2, np.inf), mdl.d2, "opnorm"
        )
        defect = max(defect, floor - lam1_sig.opnorm())
    record("reduced-choi-opnorm-floor", 1e-10, defect)

    # projected-generator identity (the corruption hook targets this check)
    proj_used = proj.copy()
    if corrupt_projector:
        proj_used[2, 2] += 0.01  # rank perturbation
    bath_gen = model.generator_superop(tensor(np.eye(mdl.d1), mdl.h2))
    gap = schatten_norm(proj_used @ mdl.gen @ proj_used - bath_gen @ proj_used, np.inf)
    for k in range(10):
        h = linalg.random_traceless_hermitian(4, cfg.seed + 300 + k)
        h = h - (np.trace(h) / 4) * np.eye(4)
        rm = model.make_model(h, 2, 2)
        bg = model.generator_superop(tensor(np.eye(2), rm.h2))
        gap = max(
            gap, schatten_norm(proj_used @ rm.gen @ proj_used - bg @ proj_used, np.inf)
        )
    record("projected-generator-identity", 1e-10, gap)

    # Zeno products against their bounds over the grid
    target = protocol.zeno_target(mdl.gen, proj, mdl.t)
    defect_last = 0.0
    defect_sandwich = 0.0
    for n in n_grid(cfg):
        err = schatten_norm(protocol.zeno_product(mdl.gen, proj, mdl.t, n, "P-last") - target, np.inf)
        defect_last = max(defect_last, err - bounds.zeno_bound_one_sided(mdl.big_t, n))
        err = schatten_norm(
            protocol.zeno_product(mdl.gen, proj, mdl.t, n, "P-sandwich") - target, np.inf
        )
        defect_sandwich = max(defect_sandwich, err - bounds.zeno_bound_sandwich(mdl.big_t, n))
    record("zeno-product-bound", 1e-12, defect_last)
    record("zeno-sandwich-bound", 1e-12, defect_sandwich)

    # average protocol: enumeration oracle and distance bound
    defect = 0.0
    for n in (1, 2, 3):
        diff = protocol.average_evolution_exact(mdl, n) - protocol.brute_force_average(
            mdl, dset, n, cap=cfg.enum_cap
        )
        defect = max(defect, schatten_norm(diff, np.inf))
    record("average-vs-enumeration", 1e-10, defect)

    u2 = linalg.expm_i(mdl.h2, mdl.t)
    target_choi = channel.pure_choi(u2).matrix
    defect = 0.0
    for n in n_grid(cfg):
        av = protocol.average_evolution_exact(mdl, n)
        lam2 = channel.choi_of_reduced_map(av, sigma1, 1)
        dist = schatten_norm(lam2.matrix - target_choi, 2)
        bi = _bound_inputs(mdl, n, sigma1, sigma2)
        defect = max(defect, dist - bounds.av2_bounds(bi)[0])
    record("average-distance-bound", 1e-12, defect)

    # exact enumeration bound checks at small n
    defect = 0.0
    for n in (1, 2, 3):
        bi = _bound_inputs(mdl, n, sigma1, sigma2)
        fid = montecarlo.enumerate_statistic(
            mdl, dset, n, make_statistic("fidelity-2-zeno", mdl, dset, sigma1, sigma2),
            cap=cfg.enum_cap,
        )
        defect = max(defect, bounds.tr2_purity_floor(bi) - fid.mean)
        dist = montecarlo.enumerate_statistic(
            mdl, dset, n, make_statistic("frob-dist-2-zeno", mdl, dset, sigma1, sigma2),
            cap=cfg.enum_cap,
        )
        defect = max(defect, dist.mean - bounds.tr2_distance_bound(bi)[0])
        opn = montecarlo.enumerate_statistic(
            mdl, dset, n, make_statistic("opnorm-1", mdl, dset, sigma1, sigma2),
            cap=cfg.enum_cap,
        )
        defect = max(defect, bounds.tr1_purity_floor(bi) - opn.mean)
        defect = max(defect, (1.0 - opn.mean) - bounds.tr1_pure_choi_distance(bi))
        for r in (0.5, 0.9):
            bir = _bound_inputs(mdl, n, sigma1, sigma2, r=r)
            defect = max(defect, fid.tail(r) - bounds.tr2_tail(bir))
    record("enumeration-bound-checks", 1e-9, defect)

    # Schmidt symmetry of trajectory reductions
    defect_pur = 0.0
    defect_op = 0.0
    for ordinal in range(20):
        sample = montecarlo.sample_trajectory(dset, 20, cfg.seed + 11, ordinal)
        c = channel.choi_from_superop(protocol.trajectory_evolution(mdl, dset, sample))
        l1 = channel.reduced_choi(c, 1, mdl.d1, mdl.d2)
        l2 = channel.reduced_choi(c, 2, mdl.d1, mdl.d2)
        defect_pur = max(defect_pur, abs(l1.purity() - l2.purity()))
        defect_op = max(defect_op, abs(l1.opnorm() - l2.opnorm()))
    record("schmidt-symmetry-purity", 1e-10, defect_pur)
    record("schmidt-symmetry-opnorm", 1e-8, defect_op)

    # convexity: Choi of the average equals the average of trajectory Chois
    n = 2
    probs = dset.probabilities()
    acc = np.zeros((mdl.dim**2, mdl.dim**2), dtype=complex)
    for idx in iproduct(range(len(dset)), repeat=n + 1):
        w = float(np.prod([probs[i] for i in idx]))
        s = protocol.trajectory_evolution(
            mdl, dset, protocol.TrajectorySample(n=n, indices=idx)
        )
        acc += w * channel.choi_from_superop(s).matrix
    av_choi = channel.choi_from_superop(protocol.average_evolution_exact(mdl, n)).matrix
    record("choi-convexity", 1e-10, float(np.abs(acc - av_choi).max()))

    # dropping the terminal pulse: altered average form and weaker constant
    defect = 0.0
    dn = 3
    bf = protocol.brute_force_average(mdl, dset, dn, cap=cfg.enum_cap, terminal_pulse=False)
    alt = protocol.average_evolution_exact(mdl, dn, terminal_pulse=False)
    defect = max(defect, schatten_norm(bf - alt, np.inf))
    record("no-terminal-pulse-form", 1e-10, defect)
    defect = 0.0
    for n in n_grid(cfg):
        err = schatten_norm(
            protocol.average_evolution_exact(mdl, n, terminal_pulse=False) - target, np.inf
        )
        defect = max(defect, err - (mdl.big_t + mdl.big_t**2) / n)
    record("no-terminal-pulse-bound", 1e-12, defect)

    return results


def cmd_verify(cfg: ExperimentConfig, corrupt_projector: bool = False) -> int:
    """Run the whole invariant/bound suite; report and return exit status."""
    results = _run_verify_checks(cfg, corrupt_projector)
    width = max(len(r.name) for r in results)
    failures = 0
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        if not r.passed:
            failures += 1
        print(f"[{status}] {r.name:<{width}}  tol={r.tolerance:.1e}  margin={r.margin:+.3e}")
    print(f"{len(results) - failures}/{len(results)} checks passed")
    return 0 if failures == 0 else 1


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--model", help="reference | random:SEED")
    p.add_argument("--d1", type=int)
    p.add_argument("--d2", type=int)
    p.add_argument("--big-t", dest="big_t", type=float)
    p.add_argument("--set", help="pauli | pauli-atypical | pulse file")
    p.add_argument("--seed", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--n-min", dest="n_min", type=int)
    p.add_argument("--n-max", dest="n_max", type=int)
    p.add_argument("--n-points", dest="n_points", type=int)
    p.add_argument("--sigma1", help="pure-0 | max-mixed | matrix file")
    p.add_argument("--sigma2", help="pure-0 | max-mixed | matrix file")
    p.add_argument("--threshold", type=float)
    p.add_argument("--out", help="output directory")
    p.add_argument("--threads", type=int, help="worker threads (env ZENO_DD_THREADS)")
    p.add_argument("--zeno-variant", dest="zeno_variant", choices=["last", "sandwich", "first"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zenodd", description="decoupling/Zeno experiment runner"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("zeno", "tail", "pulse-inversion", "verify", "fixtures"):
        p = sub.add_parser(name)
        _add_common_flags(p)
        if name == "tail":
            p.add_argument("--statistic", default="purity-1")
    p = sub.add_parser("trajectories")
    _add_common_flags(p)
    p.add_argument("statistics", nargs="*", help="registered statistic names (default all)")
    return parser


_CONFIG_FIELDS = [f.name for f in fields(ExperimentConfig)]


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    overrides = {k: getattr(args, k) for k in _CONFIG_FIELDS if hasattr(args, k)}
    try:
        cfg = load_config(args.config, overrides)
        if args.command == "zeno":
            cmd_zeno(cfg)
        elif args.command == "trajectories":
            cmd_trajectories(cfg, args.statistics)
        elif args.command == "tail":
            cmd_tail(cfg, args.statistic)
        elif args.command == "pulse-inversion":
            cmd_pulse_inversion(cfg)
        elif args.command == "fixtures":
            cmd_fixtures(cfg)
        elif args.command == "verify":
            return cmd_verify(cfg)
        return 0
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except CheckFailure as e:
        print(f"check failed: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
