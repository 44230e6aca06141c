"""Acceptance battery.

Each test checks one headline claim over a seeded Haar corpus at its
stated tolerance and prints a single PASS/FAIL line even under pytest
capture.  The corpus and its solver sweep are shared module-scoped
fixtures, so the expensive programs run once; the whole battery is
sized for desk scale (d <= 8, tensor powers below 1e7 amplitudes).
"""

import math

import numpy as np
import pytest

from cohdist.distill import (
    fidelity_distill,
    min_hypothesis_pure,
    one_shot_distillable,
)
from cohdist.errors import CoherenceError
from cohdist.experiments import haar_states, predicted_distillable_fraction, run_haar
from cohdist.linalg import DensityMatrix, StateVector, max_coherent_state
from cohdist.monotones import theta, theta_hat
from cohdist.purestate import m_distillation_norm, m_norm_dual_check, rate_from_probs
from cohdist.transforms import (
    apply_choi,
    certify_dio,
    dio_channel_family,
    optimal_distillation_channel,
)

DIMS = tuple(range(2, 9))
PER_DIM = 50
CORPUS_SEED = 109
EPS_GRID = (0.0, 0.01, 0.1, 0.3)


def emit(capsys, ok, label, detail):
    with capsys.disabled():
        print("[%s] %s: %s" % ("PASS" if ok else "FAIL", label, detail))


@pytest.fixture(scope="module")
def corpus():
    rng = np.random.default_rng(CORPUS_SEED)
    return {
        d: [StateVector(v) for v in haar_states(d, PER_DIM, rng)] for d in DIMS
    }


@pytest.fixture(scope="module")
def sweep(corpus):
    """Solver sweep: both monotone families, the norm, and the fidelity
    program for every corpus state at every order m in [1, d]."""
    rows = []
    for d, states in corpus.items():
        for idx, psi in enumerate(states):
            for m in range(1, d + 1):
                rows.append(
                    {
                        "d": d,
                        "i": idx,
                        "m": m,
                        "psi": psi,
                        "theta": theta(psi, m - 1),
                        "theta_hat": theta_hat(psi, m - 1),
                        "norm": m_distillation_norm(psi, m),
                        "fid": fidelity_distill(psi, m, cross_check=False),
                    }
                )
    return rows


@pytest.fixture(scope="module")
def rate_sweep(corpus):
    """One-shot rate reports and both reference minimizations for every
    corpus state at every epsilon on the grid."""
    rows = []
    for d, states in corpus.items():
        for idx, psi in enumerate(states):
            cache = {}
            cells = {}
            for eps in EPS_GRID:
                try:
                    rep = one_shot_distillable(psi, eps, fidelity_cache=cache)
                except CoherenceError as exc:
                    cells[eps] = {"error": str(exc)}
                    continue
                cells[eps] = {
                    "rep": rep,
                    "unfloored": -math.log2(rep.k_value),
                    "pure_min": min_hypothesis_pure(psi, eps),
                }
            rows.append({"d": d, "i": idx, "eps": cells})
    return rows


def test_criterion_01_monotone_equals_squared_norm(sweep, capsys):
    worst = max(
        abs(r["theta"].value - (r["norm"].value ** 2 - 1.0)) for r in sweep
    )
    ok = worst <= 1e-6
    emit(
        capsys, ok, "criterion 1",
        "witness program vs rearrangement closed form, worst |diff| %.3e "
        "over %d (state, m) instances" % (worst, len(sweep)),
    )
    assert ok


def test_criterion_02_norm_oracle(corpus, capsys):
    rng = np.random.default_rng(271828)
    worst_brute = worst_random = worst_dual = 0.0
    instances = 0
    for d, states in corpus.items():
        for psi in states:
            amps = psi.amps
            mags = np.sort(np.abs(amps))[::-1]
            for m in range(1, d + 1):
                instances += 1
                value = m_distillation_norm(psi, m).value

                # every split level, costed honestly, plus the k = 0 split
                costs = [float(mags.sum())]
                for k in range(1, m + 1):
                    head = m - k
                    tail_sq = float(np.sum(mags[head:] ** 2))
                    tau = math.sqrt(tail_sq / k)
                    y = np.concatenate([np.full(head, tau), mags[head:]])
                    x = mags[:head] - tau
                    costs.append(
                        float(np.abs(x).sum())
                        + math.sqrt(m) * float(np.linalg.norm(y))
                    )
                worst_brute = max(worst_brute, abs(value - min(costs)))

                y = (
                    rng.normal(size=(10_000, d)) + 1j * rng.normal(size=(10_000, d))
                ) * rng.uniform(0, 1, size=(10_000, 1))
                x = amps[None, :] - y
                sampled = np.abs(x).sum(axis=1) + math.sqrt(m) * np.linalg.norm(
                    y, axis=1
                )
                worst_random = max(worst_random, value - float(sampled.min()))

                dual = m_norm_dual_check(psi, m)
                assert dual["max_abs"] <= 1.0 + 1e-12
                assert dual["sq_norm"] <= m + 1e-9
                worst_dual = max(worst_dual, abs(dual["overlap"] - value))

    ok = worst_brute <= 1e-10 and worst_random <= 1e-8 and worst_dual <= 1e-10
    emit(
        capsys, ok, "criterion 2",
        "brute-force gap %.3e, best random-decomposition margin %.3e, "
        "dual certificate gap %.3e over %d instances"
        % (worst_brute, worst_random, worst_dual, instances),
    )
    assert ok


def test_criterion_03_fidelity_chain(sweep, capsys):
    worst_hat = worst_pure = worst_channel = worst_cov = 0.0
    for r in sweep:
        m, rep = r["m"], r["fid"]
        worst_hat = max(
            worst_hat, abs(rep.fidelity - (r["theta_hat"].value + 1.0) / m)
        )
        worst_pure = max(
            worst_pure, abs(rep.fidelity - r["norm"].value ** 2 / m)
        )
        ch = optimal_distillation_channel(rep.witness_G, m)
        out = apply_choi(ch, r["psi"])
        target = max_coherent_state(m).projector().mat
        overlap = float(np.real(np.trace(target @ out.mat)))
        worst_channel = max(worst_channel, abs(overlap - rep.fidelity))
        _, viol = certify_dio(ch)
        worst_cov = max(worst_cov, viol)

    ok = (
        worst_hat <= 1e-6
        and worst_pure <= 1e-6
        and worst_channel <= 1e-8
        and worst_cov <= 1e-8
    )
    emit(
        capsys, ok, "criterion 3",
        "fidelity vs shifted monotone %.3e, vs squared norm %.3e; channel "
        "overlap gap %.3e, covariance violation %.3e"
        % (worst_hat, worst_pure, worst_channel, worst_cov),
    )
    assert ok


def test_criterion_04_rate_routes(rate_sweep, capsys):
    errors = []
    worst_delta_low = worst_delta_high = 0.0
    worst_floor_band = 0.0
    worst_unfloored = 0.0
    worst_unfloored_zero = 0.0
    cells = 0
    for row in rate_sweep:
        for eps, cell in row["eps"].items():
            cells += 1
            if "error" in cell:
                errors.append((row["d"], row["i"], eps, cell["error"]))
                continue
            rep = cell["rep"]
            # the direct route raises if it ever disagrees with the scan,
            # so a constructed report is itself the equality witness
            assert rep.m == rep.scan_m
            worst_delta_low = max(worst_delta_low, -rep.delta)
            worst_delta_high = max(worst_delta_high, rep.delta - (1.0 - 1e-12))
            # flooring the density-reference minimum recovers the rate
            target = 2.0 ** cell["pure_min"]
            worst_floor_band = max(
                worst_floor_band,
                rep.m - target,
                target - (rep.m + 1),
            )
            gap = abs(cell["unfloored"] - cell["pure_min"])
            if eps == 0.0:
                worst_unfloored_zero = max(worst_unfloored_zero, gap)
            worst_unfloored = max(worst_unfloored, gap)

    routes_ok = not errors
    delta_ok = worst_delta_low <= 0.0 and worst_delta_high <= 0.0
    floor_ok = worst_floor_band <= 1e-6
    unfloored_ok = worst_unfloored <= 1e-6
    ok = routes_ok and delta_ok and floor_ok and unfloored_ok
    emit(
        capsys, ok, "criterion 4",
        "%d route disagreements over %d cells; delta bounds ok=%s; floored "
        "reference agreement band %.3e; unfloored reference gap %.3e "
        "(%.3e at eps=0)"
        % (
            len(errors), cells, delta_ok, worst_floor_band,
            worst_unfloored, worst_unfloored_zero,
        ),
    )
    assert routes_ok, "direct/scan disagreements: %r" % errors[:3]
    assert delta_ok
    assert floor_ok
    if not unfloored_ok:
        pytest.fail(
            "the before-flooring equality does not hold at eps > 0: the "
            "rate program minimizes -log2 k over sign-free diagonal "
            "references and its optimum uses negative entries, so it sits "
            "below the minimum over diagonal density references (measured "
            "gap up to %.4g bits here, e.g. 0.0297 bits for "
            "(sqrt .7, sqrt .2, sqrt .1) at eps=0.1).  At eps=0 the two "
            "minima coincide (worst gap %.3e) and after flooring they "
            "agree on every corpus instance (band %.3e), which is the "
            "claim the construction actually supports."
            % (worst_unfloored, worst_unfloored_zero, worst_floor_band)
        )


def test_criterion_05_haar_fraction(capsys):
    devs = []
    for d in (4, 8):
        _, summary = run_haar(d, 100_000, seed=5150)
        devs.append(
            (d, abs(summary.fraction_distillable - predicted_distillable_fraction(d)))
        )
    ok = all(dev <= 0.01 for _, dev in devs)
    emit(
        capsys, ok, "criterion 5",
        "zero-error >= 1 bit fraction off prediction by "
        + ", ".join("%.5f (d=%d)" % (dev, d) for d, dev in devs)
        + " at N=1e5",
    )
    assert ok


def test_criterion_06_forced_values(capsys):
    worst_mixed = 0.0
    worst_uniform = 0.0
    for d in (2, 4, 8):
        mixed = DensityMatrix(np.eye(d) / d)
        uniform = max_coherent_state(d)
        for m in range(1, d + 1):
            worst_mixed = max(
                worst_mixed, abs(fidelity_distill(mixed, m).fidelity - 1.0 / m)
            )
            worst_uniform = max(
                worst_uniform, abs(fidelity_distill(uniform, m).fidelity - 1.0)
            )

    rng = np.random.default_rng(66)
    worst_theta = 0.0
    for _ in range(100):
        d = int(rng.integers(2, 9))
        state = DensityMatrix(np.diag(rng.dirichlet(np.ones(d))))
        worst_theta = max(worst_theta, theta(state, int(rng.integers(0, d))).value)

    ok = worst_mixed == 0.0 and worst_uniform <= 1e-7 and worst_theta <= 1e-7
    emit(
        capsys, ok, "criterion 6",
        "max |F(I/d, m) - 1/m| = %.1f (exact), max |F(uniform, m) - 1| = %.3e, "
        "max monotone on 100 incoherent states = %.3e"
        % (worst_mixed, worst_uniform, worst_theta),
    )
    assert ok


def test_criterion_07_asymptotic_trend(capsys):
    probs = np.array([0.7, 0.3])
    reference = float(-(probs * np.log2(probs)).sum())
    devs = {}
    p = np.ones(1)
    for n in range(1, 13):
        p = np.kron(p, probs)
        if n in (4, 8, 12):
            devs[n] = abs(math.log2(rate_from_probs(p, 0.05)) / n - reference)

    close_ok = devs[12] <= 0.15
    trend_ok = devs[4] >= devs[8] >= devs[12]
    ok = close_ok and trend_ok
    emit(
        capsys, ok, "criterion 7",
        "per-copy deviations from %.4f: n=4 %.6f, n=8 %.6f, n=12 %.6f "
        "(within 0.15 at n=12: %s; non-increasing: %s)"
        % (reference, devs[4], devs[8], devs[12], close_ok, trend_ok),
    )
    assert close_ok
    if not trend_ok:
        pytest.fail(
            "the deviation sequence increases over n in {4, 8, 12}: "
            "%.6f -> %.6f -> %.6f.  At these sizes the rate is dominated "
            "by integer flooring of the target size (m = 10, 91, 806), "
            "which happens to land close to the reference at n=4; the "
            "1/sqrt(n) convergence that would make the deviation shrink "
            "monotonically only takes over at much larger n than a 1e7 "
            "amplitude budget allows." % (devs[4], devs[8], devs[12])
        )


def test_criterion_08_monotone_properties(sweep, corpus, capsys):
    theta1 = {(r["d"], r["i"]): r["theta"].value for r in sweep if r["m"] == 2}

    # faithfulness: strictly positive on every (coherent) corpus state
    # at every weight >= 1, zero on incoherent states
    min_coherent = min(r["theta"].value for r in sweep if r["m"] >= 2)
    rng = np.random.default_rng(88)
    worst_incoherent = max(
        theta(DensityMatrix(np.diag(rng.dirichlet(np.ones(4)))), 1).value
        for _ in range(10)
    )

    worst_convex = 0.0
    for _ in range(100):
        d = int(rng.integers(2, 9))
        i, j = rng.integers(0, PER_DIM, size=2)
        lam = float(rng.uniform())
        a, b = corpus[d][int(i)], corpus[d][int(j)]
        mix = DensityMatrix(
            lam * a.projector().mat + (1.0 - lam) * b.projector().mat
        )
        bound = lam * theta1[(d, int(i))] + (1.0 - lam) * theta1[(d, int(j))]
        worst_convex = max(worst_convex, theta(mix, 1).value - bound)

    worst_channel = 0.0
    channels = 0
    for d in DIMS:
        for k, ch in enumerate(dio_channel_family(d, rng, 50)):
            psi = corpus[d][k % PER_DIM]
            after = theta(apply_choi(ch, psi), 1).value
            worst_channel = max(worst_channel, after - theta1[(d, k % PER_DIM)])
            channels += 1

    worst_order = max(
        max(
            r["theta_hat"].value - r["theta"].value,
            r["theta"].value - (r["m"] - 1),
        )
        for r in sweep
    )

    ok = (
        min_coherent > 1e-7
        and worst_incoherent <= 1e-7
        and worst_convex <= 1e-7
        and worst_channel <= 1e-7
        and worst_order <= 1e-7
    )
    emit(
        capsys, ok, "criterion 8",
        "faithfulness floor %.3e (incoherent max %.3e), convexity slack "
        "%.3e over 100 mixtures, monotonicity slack %.3e over %d channels, "
        "ordering slack %.3e"
        % (min_coherent, worst_incoherent, worst_convex, worst_channel,
           channels, worst_order),
    )
    assert ok


def test_criterion_09_solver_health(sweep, rate_sweep, capsys):
    solutions = []
    route_gaps = []
    for r in sweep:
        for res in (r["theta"], r["theta_hat"]):
            solutions.extend(res.solutions)
            route_gaps.append(abs(res.witness_value - res.primal_value))
        solutions.extend(r["fid"].solutions)
    for row in rate_sweep:
        for cell in row["eps"].values():
            rep = cell.get("rep")
            if rep is not None:
                solutions.extend(rep.solutions)

    worst_gap = max(s.gap for s in solutions)
    worst_residual = max(s.residual for s in solutions)
    worst_eig = min(s.min_eigenvalue for s in solutions)
    worst_route = max(route_gaps)

    ok = (
        worst_gap <= 1e-8
        and worst_residual <= 1e-8
        and worst_eig >= -1e-9
        and worst_route <= 1e-6
    )
    emit(
        capsys, ok, "criterion 9",
        "%d certified solutions: gap <= %.3e, residual <= %.3e, min "
        "eigenvalue >= %.3e; worst cross-route disagreement %.3e"
        % (len(solutions), worst_gap, worst_residual, worst_eig, worst_route),
    )
    assert ok
