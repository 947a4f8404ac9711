"""Measurement simulation and linear-inversion reconstruction.

The pipeline is: pick a protocol, generate its observation vector from a
true state (ideally or with shot noise), and invert by least squares.  No
positivity or trace repair is applied to the reconstruction; the trace of
the estimate is itself the recovered detection efficiency.

Randomness is fully keyed: every trial draws from an independent substream
derived from (seed, indices), so serial and parallel runs agree bit for
bit and rerunning a seed reproduces the data.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .linalg import least_squares_solve
from .protocols import ProtocolSpec
from .states import (
    fidelity,
    psd_clip,
    random_density_matrix,
    trace_distance,
    unvec,
)

PSD_ATOL = 1e-10
PROB_ATOL = 1e-9

NOISE_MODES = ("ideal", "gaussian", "poisson")


@dataclass(frozen=True)
class NoiseModel:
    """How the observation vector is degraded.

    ``ideal`` returns b = A x exactly.  ``gaussian`` adds N(0, sigma) to
    every entry with sigma = sigma_rel * max|b| (a simple instrument-noise
    proxy).  ``poisson`` simulates photon counting: every projection
    probability p is estimated from a count c ~ Poisson(N * eta * p) as
    c / (N * eta_assumed), with N shots per projector outcome and detection
    efficiency eta (``efficiency_assumed`` defaults to ``efficiency``,
    i.e. a calibrated experiment).
    """

    mode: str = "ideal"
    shots_per_setting: int = 10_000
    efficiency: float = 1.0
    efficiency_assumed: float | None = None
    sigma_rel: float = 0.01

    def __post_init__(self):
        if self.mode not in NOISE_MODES:
            raise ValueError(f"noise mode must be one of {NOISE_MODES}")
        if self.efficiency <= 0.0:
            raise ValueError("efficiency must be positive")
        if self.efficiency_assumed is not None and self.efficiency_assumed <= 0.0:
            raise ValueError("assumed efficiency must be positive")

    @classmethod
    def ideal(cls) -> "NoiseModel":
        return cls(mode="ideal")

    @classmethod
    def gaussian(cls, sigma_rel: float) -> "NoiseModel":
        return cls(mode="gaussian", sigma_rel=sigma_rel)

    @classmethod
    def poisson(
        cls,
        shots_per_setting: int,
        efficiency: float = 1.0,
        efficiency_assumed: float | None = None,
    ) -> "NoiseModel":
        return cls(
            mode="poisson",
            shots_per_setting=shots_per_setting,
            efficiency=efficiency,
            efficiency_assumed=efficiency_assumed,
        )


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator keyed by (seed, key); stable across runs."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return substream(int(seed))


def effective_shots(spec: ProtocolSpec, noise: NoiseModel, budget: str) -> int:
    """Shots per projector outcome under the chosen budgeting convention.

    ``per-setting`` gives every outcome the full budget; ``total`` splits
    the budget evenly over all projector outcomes of the protocol, which
    makes protocols with different projector counts comparable at equal
    total resources.
    """
    if budget == "per-setting":
        return noise.shots_per_setting
    if budget == "total":
        n_outcomes = sum(len(r.eigen) for r in spec.readouts)
        return max(1, noise.shots_per_setting // n_outcomes)
    raise ValueError(f"budget must be 'per-setting' or 'total', got {budget!r}")


def ideal_observation(rho: np.ndarray, spec: ProtocolSpec) -> np.ndarray:
    """b = A x (minus the constant displacement, when the protocol has one)."""
    x = spec.state_coordinates(rho)
    b = spec.rotation_matrix @ x
    if spec.b_offset is not None:
        b = b - spec.b_offset
    return b


def _check_measurable(rho: np.ndarray, spec: ProtocolSpec) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (spec.dim, spec.dim):
        raise ValueError(
            f"state dimension {rho.shape} does not match protocol dim {spec.dim}"
        )
    if float(np.abs(rho - rho.conj().T).max()) > 1e-10:
        raise ValueError("state must be Hermitian")
    if float(np.linalg.eigvalsh(rho).min()) < -PSD_ATOL:
        raise ValueError("state must be positive semidefinite (within 1e-10)")
    if spec.trace_one_reduced and abs(rho.trace().real - 1.0) > 1e-9:
        raise ValueError("the trace-reduced protocol requires a normalized state")
    return rho


def _sampling_arrays(spec: ProtocolSpec):
    """Stack all projector outcomes: eigenstates, weights, target rows."""
    vectors, weights, rows = [], [], []
    for r_idx, readout in enumerate(spec.readouts):
        for lam, psi in readout.eigen:
            vectors.append(psi)
            weights.append(lam)
            rows.append(r_idx)
    if not vectors:
        raise ValueError("protocol has no projector outcomes to sample")
    return (
        np.array(vectors),
        np.array(weights, dtype=float),
        np.array(rows, dtype=int),
    )


def measure(
    rho: np.ndarray,
    spec: ProtocolSpec,
    noise: NoiseModel | None = None,
    seed: int | np.random.Generator = 0,
) -> np.ndarray:
    """Observation vector for a state under a noise model.

    The ideal vector is the exact linear image A x; the noisy modes
    perturb it (gaussian) or re-derive every entry from sampled projection
    probabilities (poisson).  Deterministic given (inputs, seed).
    """
    noise = noise or NoiseModel.ideal()
    rho = _check_measurable(rho, spec)
    b_ideal = ideal_observation(rho, spec)
    if noise.mode == "ideal":
        return b_ideal
    rng = _as_rng(seed)
    if noise.mode == "gaussian":
        sigma = noise.sigma_rel * float(np.abs(b_ideal).max())
        return b_ideal + rng.normal(0.0, sigma, size=b_ideal.shape)
    # poisson counting
    vectors, weights, rows = _sampling_arrays(spec)
    probs = np.einsum("ib,ib->i", vectors.conj() @ rho, vectors).real
    if probs.min() < -PROB_ATOL or probs.max() > 1.0 + PROB_ATOL:
        raise ValueError(
            f"projection probability outside [0, 1]: range "
            f"[{probs.min():.3e}, {probs.max():.3e}] signals an invalid state"
        )
    probs = np.clip(probs, 0.0, 1.0)
    shots = noise.shots_per_setting
    eta = noise.efficiency
    eta_assumed = eta if noise.efficiency_assumed is None else noise.efficiency_assumed
    counts = rng.poisson(shots * eta * probs)
    p_hat = counts / (shots * eta_assumed)
    b = np.zeros(spec.n_readouts)
    np.add.at(b, rows, weights * p_hat)
    return spec.scale * b


@dataclass(frozen=True)
class ReconstructionResult:
    """Linear-inversion output plus quality metrics against the truth.

    ``x`` is the solved unknown vector (three entries for the reduced
    single-qubit protocol), ``state_vector`` the completed d^2 vector, and
    ``rho`` its matrix form -- possibly unnormalized and non-positive, by
    design.  ``trace`` is the recovered efficiency.  Fidelity and trace
    distance are evaluated on normalized copies (PSD-clipped when needed,
    with the flag recorded); they are None when no truth was supplied.
    """

    x: np.ndarray
    state_vector: np.ndarray
    rho: np.ndarray
    residual_norm: float
    trace: float
    fidelity_to_truth: float | None = None
    trace_distance_to_truth: float | None = None
    element_abs_errors: np.ndarray | None = None
    max_abs_error: float | None = None
    psd_clipped: bool | None = None


def reconstruct(
    b: np.ndarray, spec: ProtocolSpec, rho_true: np.ndarray | None = None
) -> ReconstructionResult:
    """Least-squares inversion of the observation vector.

    Applies the protocol's constant displacement (if any) before solving;
    performs no physicality repair afterwards.
    """
    b = np.asarray(b, dtype=float)
    if b.shape != (spec.n_readouts,):
        raise ValueError(
            f"observation vector has length {b.size}, protocol expects "
            f"{spec.n_readouts}"
        )
    b_eff = b if spec.b_offset is None else b + spec.b_offset
    x = least_squares_solve(spec.rotation_matrix, b_eff)
    residual = float(np.linalg.norm(spec.rotation_matrix @ x - b_eff))
    x_full = spec.complete_state(x)
    rho = unvec(x_full)
    trace = float(rho.trace().real)
    fid = tdist = max_err = None
    errors = None
    clipped = None
    if rho_true is not None:
        rho_true = np.asarray(rho_true, dtype=complex)
        errors = np.abs(rho - rho_true)
        max_err = float(errors.max())
        if trace > 0.0:
            est, clipped = psd_clip(rho / trace)
            truth_norm = rho_true / rho_true.trace().real
            truth_psd, _ = psd_clip(truth_norm)
            fid = fidelity(est, truth_psd)
            tdist = trace_distance(est, truth_norm)
    return ReconstructionResult(
        x=x,
        state_vector=x_full,
        rho=rho,
        residual_norm=residual,
        trace=trace,
        fidelity_to_truth=fid,
        trace_distance_to_truth=tdist,
        element_abs_errors=errors,
        max_abs_error=max_err,
        psd_clipped=clipped,
    )


def run_tomography(
    rho: np.ndarray,
    spec: ProtocolSpec,
    noise: NoiseModel | None = None,
    seed: int | np.random.Generator = 0,
) -> ReconstructionResult:
    """measure + reconstruct against the same state."""
    b = measure(rho, spec, noise, seed)
    return reconstruct(b, spec, rho_true=rho)


# ---------------------------------------------------------------------------
# perturbation-bound trials (analytic noise, no counting statistics)


@dataclass(frozen=True)
class AmplificationTrial:
    rel_change_x: float
    rel_change_b: float
    amplification: float
    upper_ok: bool
    lower_ok: bool


def amplification_trial(
    spec: ProtocolSpec,
    rho: np.ndarray,
    delta_b: np.ndarray,
    rtol: float = 1e-9,
) -> AmplificationTrial:
    """Check the condition-number bounds for one explicit perturbation.

    The upper bound |dx|/|x| <= kappa(A) |db|/|b| holds for arbitrary
    perturbations of any full-column-rank system.  The matching lower
    bound is a square-matrix statement; for overdetermined protocols it is
    checked against the component of delta_b inside the range of A (the
    part a least-squares solve can respond to).
    """
    a = spec.rotation_matrix
    x = spec.state_coordinates(rho)
    b = a @ x
    delta_b = np.asarray(delta_b, dtype=float)
    x_pert = least_squares_solve(a, b + delta_b)
    rel_x = float(np.linalg.norm(x_pert - x) / np.linalg.norm(x))
    norm_b = float(np.linalg.norm(b))
    rel_b = float(np.linalg.norm(delta_b)) / norm_b
    s = np.linalg.svd(a, compute_uv=False)
    kappa = float(s[0] / s[-1])
    if a.shape[0] == a.shape[1]:
        rel_b_in_range = rel_b
    else:
        u = np.linalg.svd(a, full_matrices=False)[0]
        rel_b_in_range = float(np.linalg.norm(u.T @ delta_b)) / norm_b
    slack = rtol * max(1.0, rel_x)
    ratio = rel_x / rel_b if rel_b > 0 else float("nan")
    return AmplificationTrial(
        rel_change_x=rel_x,
        rel_change_b=rel_b,
        amplification=ratio,
        upper_ok=rel_x <= kappa * rel_b + slack,
        lower_ok=rel_x >= rel_b_in_range / kappa - slack,
    )


def atkinson_trials(
    spec: ProtocolSpec,
    n_trials: int,
    seed: int,
    noise_scale: float = 1e-3,
    rtol: float = 1e-9,
) -> list[AmplificationTrial]:
    """Random (state, delta_b) perturbation trials for one protocol.

    Same bound checks as :func:`amplification_trial`, with the protocol's
    SVD factored once; the solution perturbation is dx = A^+ db exactly.
    """
    a = spec.rotation_matrix
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    kappa = float(s[0] / s[-1])
    square = a.shape[0] == a.shape[1]
    trials = []
    for t in range(n_trials):
        rng = substream(seed, t)
        rho = random_density_matrix(spec.dim, rng)
        x = spec.state_coordinates(rho)
        b = a @ x
        norm_b = float(np.linalg.norm(b))
        direction = rng.normal(size=spec.n_readouts)
        direction /= np.linalg.norm(direction)
        delta_b = noise_scale * norm_b * direction
        proj = u.T @ delta_b
        delta_x = vt.T @ (proj / s)
        rel_x = float(np.linalg.norm(delta_x) / np.linalg.norm(x))
        rel_b = float(np.linalg.norm(delta_b)) / norm_b
        rel_b_range = rel_b if square else float(np.linalg.norm(proj)) / norm_b
        slack = rtol * max(1.0, rel_x)
        trials.append(
            AmplificationTrial(
                rel_change_x=rel_x,
                rel_change_b=rel_b,
                amplification=rel_x / rel_b if rel_b > 0 else float("nan"),
                upper_ok=rel_x <= kappa * rel_b + slack,
                lower_ok=rel_x >= rel_b_range / kappa - slack,
            )
        )
    return trials


# ---------------------------------------------------------------------------
# Monte Carlo robustness comparison


@dataclass(frozen=True)
class TrialRecord:
    protocol_id: int | None
    protocol_name: str
    noise_index: int
    trial: int
    rel_x_error: float
    rel_b_error: float
    amplification: float
    bounds_ok: bool
    trace_distance: float
    fidelity: float
    trace: float


@dataclass(frozen=True)
class RobustnessRow:
    protocol_id: int | None
    protocol_name: str
    noise_mode: str
    noise_param: float
    budget: str
    trials: int
    mean_rel_x_error: float
    std_rel_x_error: float
    mean_trace_distance: float
    std_trace_distance: float
    mean_fidelity: float
    mean_amplification: float
    max_amplification: float
    kappa_a: float
    bound_violations: int


@dataclass(frozen=True)
class RobustnessResult:
    rows: list[RobustnessRow]
    trial_records: list[TrialRecord] | None = None


def _noise_param(noise: NoiseModel) -> float:
    if noise.mode == "poisson":
        return float(noise.shots_per_setting)
    if noise.mode == "gaussian":
        return noise.sigma_rel
    return 0.0


def _trial_state(
    states, trial: int, seed: int, dim: int
) -> np.ndarray:
    if states is None:
        return random_density_matrix(dim, substream(seed, 0xD1CE, trial))
    return states[trial % len(states)]


def robustness_experiment(
    specs: list[ProtocolSpec],
    noise_models: list[NoiseModel],
    trials: int,
    seed: int = 0,
    states: list[np.ndarray] | None = None,
    budget: str = "per-setting",
    jobs: int = 1,
    keep_trials: bool = False,
) -> RobustnessResult:
    """Compare protocols' reconstruction error over a common state ensemble.

    The state of trial t is shared by every (protocol, noise) cell, so the
    comparison is paired.  Substreams are keyed by (protocol, noise, trial);
    results are independent of ``jobs``.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    kappas, ranges = [], []
    for s in specs:
        u, sv, _ = np.linalg.svd(s.rotation_matrix, full_matrices=False)
        kappas.append(float(sv[0] / sv[-1]))
        square = s.rotation_matrix.shape[0] == s.rotation_matrix.shape[1]
        ranges.append(None if square else u)

    def one_trial(p_idx: int, n_idx: int, t: int) -> TrialRecord:
        spec = specs[p_idx]
        noise = noise_models[n_idx]
        rho = _trial_state(states, t, seed, spec.dim)
        shots = effective_shots(spec, noise, budget)
        noise_eff = (
            noise
            if noise.mode != "poisson" or shots == noise.shots_per_setting
            else replace(noise, shots_per_setting=shots)
        )
        rng = substream(seed, p_idx, n_idx, t)
        b_ideal = ideal_observation(rho, spec)
        b_noisy = measure(rho, spec, noise_eff, rng)
        result = reconstruct(b_noisy, spec, rho_true=rho)
        x_true = spec.state_coordinates(rho)
        rel_x = float(
            np.linalg.norm(result.x - x_true) / np.linalg.norm(x_true)
        )
        delta_b = b_noisy - b_ideal
        norm_b = float(np.linalg.norm(b_ideal))
        rel_b = float(np.linalg.norm(delta_b)) / norm_b
        ratio = rel_x / rel_b if rel_b > 0 else float("nan")
        # both condition-number bounds; the lower one against the in-range
        # component of the perturbation for overdetermined protocols
        u_range = ranges[p_idx]
        rel_b_range = (
            rel_b
            if u_range is None
            else float(np.linalg.norm(u_range.T @ delta_b)) / norm_b
        )
        slack = 1e-9 * max(1.0, rel_x)
        bounds_ok = (
            rel_x <= kappas[p_idx] * rel_b + slack
            and rel_x >= rel_b_range / kappas[p_idx] - slack
        )
        tdist = result.trace_distance_to_truth
        fid = result.fidelity_to_truth
        return TrialRecord(
            protocol_id=spec.id,
            protocol_name=spec.name,
            noise_index=n_idx,
            trial=t,
            rel_x_error=rel_x,
            rel_b_error=rel_b,
            amplification=ratio,
            bounds_ok=bounds_ok,
            trace_distance=float("nan") if tdist is None else tdist,
            fidelity=float("nan") if fid is None else fid,
            trace=result.trace,
        )

    cells = [
        (p, n, t)
        for p in range(len(specs))
        for n in range(len(noise_models))
        for t in range(trials)
    ]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(lambda c: one_trial(*c), cells))
    else:
        records = [one_trial(*c) for c in cells]
    by_cell: dict[tuple[int, int], list[TrialRecord]] = {}
    for (p, n, _), rec in zip(cells, records):
        by_cell.setdefault((p, n), []).append(rec)

    rows = []
    for p_idx, spec in enumerate(specs):
        for n_idx, noise in enumerate(noise_models):
            recs = by_cell[(p_idx, n_idx)]
            rel_x = np.array([r.rel_x_error for r in recs])
            tdist = np.array([r.trace_distance for r in recs])
            fid = np.array([r.fidelity for r in recs])
            ratios = np.array(
                [r.amplification for r in recs if np.isfinite(r.amplification)]
            )
            violations = sum(not r.bounds_ok for r in recs)
            rows.append(
                RobustnessRow(
                    protocol_id=spec.id,
                    protocol_name=spec.name,
                    noise_mode=noise.mode,
                    noise_param=_noise_param(noise),
                    budget=budget,
                    trials=trials,
                    mean_rel_x_error=float(rel_x.mean()),
                    std_rel_x_error=float(rel_x.std()),
                    mean_trace_distance=float(np.nanmean(tdist)),
                    std_trace_distance=float(np.nanstd(tdist)),
                    mean_fidelity=float(np.nanmean(fid)),
                    mean_amplification=float(ratios.mean()) if ratios.size else float("nan"),
                    max_amplification=float(ratios.max()) if ratios.size else float("nan"),
                    kappa_a=kappas[p_idx],
                    bound_violations=violations,
                )
            )
    return RobustnessResult(rows, records if keep_trials else None)
