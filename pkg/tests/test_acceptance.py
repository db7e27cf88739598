"""Acceptance suite: one test per release criterion.

Every test prints a PASS/FAIL line with the measured values at the
pinned tolerance, then asserts.  Numeric work runs on the default
discretization (patch target lam/2, standoff 1 nm, substrate extent
20 W) so the timings below are the real cost of the pipeline.
"""

import math
import time

import numpy as np
import pytest
from scipy.integrate import quad

from squidflux import (
    ModelVariant,
    PipelineConfig,
    QubitTruth,
    SamplingPlan,
    SquidGeometry,
    analytic_variance_integral,
    echo_filter_function,
    fit_defect_density,
    geometry_factor,
    load_dataset,
    packaged_table,
    predict_amplitude,
    run_extraction,
    surface_current_profile,
    synthesize_qubit_dataset,
)
from squidflux.constants import MU0, MU_B
from squidflux.spectroscopy import HPLANCK

LN2 = math.log(2)

TABLE1_MEAN_UPHI0 = 1.6422  # mean of the nine optimized-geometry amplitudes


def report(criterion: int, ok: bool, detail: str) -> None:
    marker = "PASS" if ok else "FAIL"
    print(f"\n[criterion {criterion:2d}] {marker}: {detail}")
    assert ok, f"criterion {criterion}: {detail}"


@pytest.fixture(scope="module")
def accept190():
    return PipelineConfig(b=190e-9, lam=40e-9)


@pytest.fixture(scope="module")
def table_s1():
    return load_dataset(packaged_table("table_s1.csv"))


@pytest.fixture(scope="module")
def numeric_fits(table_s1, accept190):
    """All three Table-S1 fits on default grids, with the wall time."""
    start = time.monotonic()
    fits = {
        variant: fit_defect_density(table_s1, variant, accept190)
        for variant in (ModelVariant.ANALYTIC_TOP, ModelVariant.NUMERIC_TOP, ModelVariant.NUMERIC_ALL)
    }
    return fits, time.monotonic() - start


def test_criterion_1_filter_identity():
    # int_0^inf g_E(w, t) dw/w = ln 2, |delta| < 1e-6, for t in {1, 10, 100} us
    start = time.monotonic()
    deltas = {}
    pieces = 400
    for t in (1e-6, 10e-6, 100e-6):
        total = 0.0
        for k in range(pieces):
            a = 4 * k * math.pi / t
            b = 4 * (k + 1) * math.pi / t
            value, _ = quad(
                lambda w: echo_filter_function(w, t) / w if w > 0 else 0.0, a, b, limit=100
            )
            total += value
        total += 3.0 / (16 * (pieces * math.pi) ** 2)  # mean-value tail beyond the last zero
        deltas[t] = abs(total - LN2)
    elapsed = time.monotonic() - start
    worst = max(deltas.values())
    report(
        1,
        worst < 1e-6 and elapsed < 1.0,
        f"max |integral - ln2| = {worst:.2e} (tolerance 1e-6), runtime {elapsed:.2f} s (< 1 s)",
    )


def _profile_quadrature(eps: float, W: float) -> float:
    join = (1 - eps) / 2
    k_bulk, _ = quad(lambda x: surface_current_profile(x, eps), 0, join, limit=400)
    k_edge, _ = quad(lambda x: surface_current_profile(x, eps), join, 0.5, limit=400)
    k2_bulk, _ = quad(lambda x: surface_current_profile(x, eps) ** 2, 0, join, limit=400)
    k2_edge, _ = quad(lambda x: surface_current_profile(x, eps) ** 2, join, 0.5, limit=400)
    k_int = 2 * (k_bulk + k_edge) * W
    k2_int = 2 * (k2_bulk + k2_edge) * W
    return (MU0 / 2) ** 2 * k2_int / k_int**2


def test_criterion_2_analytic_oracle():
    # quadrature of (mu0/2)^2 int K^2 / (int K)^2 vs the closed form:
    # 1% at eps = 1e-3 and 5% at eps = 1e-2
    start = time.monotonic()
    W, b = 1e-6, 190e-9
    devs = {}
    for eps in (1e-3, 1e-2):
        lam = math.sqrt(eps * b * W)
        closed = analytic_variance_integral(W, b, lam)
        devs[eps] = abs(_profile_quadrature(eps, W) / closed - 1)
    elapsed = time.monotonic() - start
    ok = devs[1e-3] < 0.01 and devs[1e-2] < 0.05 and elapsed < 1.0
    report(
        2,
        ok,
        f"deviation {devs[1e-3] * 100:.2f}% at eps=1e-3 (tolerance 1%), "
        f"{devs[1e-2] * 100:.2f}% at eps=1e-2 (tolerance 5%), runtime {elapsed:.2f} s; "
        "the closed form keeps only the leading order in eps, and the exact quadrature "
        "of the published profile differs by O(sqrt(eps)) of the edge region",
    )


def test_criterion_3_thin_film_agreement():
    # numeric_top at b = 20 nm within 15% of the closed form for W in {1, 2, 5} um
    start = time.monotonic()
    pipeline = PipelineConfig(b=20e-9, lam=40e-9)
    ratios = {}
    for W_um in (1.0, 2.0, 5.0):
        W = W_um * 1e-6
        numeric = pipeline.width_breakdown(W, ModelVariant.NUMERIC_TOP).total
        ratios[W_um] = numeric / analytic_variance_integral(W, 20e-9, 40e-9)
    elapsed = time.monotonic() - start
    ok = all(abs(r - 1) < 0.15 for r in ratios.values()) and elapsed < 300
    detail = ", ".join(f"W={w} um: numeric/analytic = {r:.3f}" for w, r in ratios.items())
    report(3, ok, f"{detail} (tolerance 15%), runtime {elapsed:.1f} s (< 300 s)")


def test_criterion_4_thickness_trend():
    totals = {}
    for b_nm in (20, 190, 800):
        pipeline = PipelineConfig(b=b_nm * 1e-9, lam=40e-9)
        totals[b_nm] = pipeline.width_breakdown(1e-6, ModelVariant.NUMERIC_ALL).total
    ok = totals[20] > totals[190] > totals[800]
    report(
        4,
        ok,
        "numeric_all total strictly decreasing over b = 20/190/800 nm at W = 1 um: "
        + ", ".join(f"{b} nm: {v:.4e}" for b, v in totals.items()),
    )


def test_criterion_5_width_trend(accept190):
    totals = [
        accept190.width_breakdown(w * 1e-6, ModelVariant.NUMERIC_ALL).total
        for w in (0.4, 0.5, 1.0, 2.0, 5.0)
    ]
    ok = bool(np.all(np.diff(totals) < 0))
    report(
        5,
        ok,
        "numeric_all total strictly decreasing over W = 0.4/0.5/1/2/5 um at b = 190 nm: "
        + ", ".join(f"{v:.4e}" for v in totals),
    )


def test_criterion_6_defect_density_recovery(numeric_fits):
    fits, elapsed = numeric_fits
    sigma_analytic = fits[ModelVariant.ANALYTIC_TOP].sigma_for_muB
    sigma_top = fits[ModelVariant.NUMERIC_TOP].sigma_for_muB
    sigma_all = fits[ModelVariant.NUMERIC_ALL].sigma_for_muB
    ok_analytic = 0.8e17 <= sigma_analytic <= 1.6e17
    ok_top = 2.6e17 / 2 <= sigma_top <= 2.6e17 * 2
    ok_all = 6.7e16 / 2 <= sigma_all <= 6.7e16 * 2
    ok = ok_analytic and ok_top and ok_all and elapsed < 900
    report(
        6,
        ok,
        f"analytic sigma = {sigma_analytic:.3e} (window [0.8e17, 1.6e17]: "
        f"{'ok' if ok_analytic else 'out'}), "
        f"numeric_top sigma = {sigma_top:.3e} (window [1.3e17, 5.2e17]: "
        f"{'ok' if ok_top else 'out'}), "
        f"numeric_all sigma = {sigma_all:.3e} (window [3.35e16, 1.34e17]: "
        f"{'ok' if ok_all else 'out'}), runtime {elapsed:.1f} s (< 900 s); "
        "all three land a common factor of about 2.2 below the window centers while "
        "their mutual ratios match the centers' ratios to a few percent, so the shipped "
        "amplitude tables and the documented estimator cannot reach the absolute windows",
    )


def test_criterion_7_optimized_geometry_prediction(numeric_fits, accept190):
    fits, _ = numeric_fits
    m2sigma = fits[ModelVariant.NUMERIC_ALL].m2sigma
    geometry = SquidGeometry(X=6.41e-6, Y=5.6e-6, W=2e-6, b=190e-9, lam=40e-9)
    predicted = predict_amplitude(geometry, ModelVariant.NUMERIC_ALL, m2sigma, accept190)
    deviation = abs(predicted / TABLE1_MEAN_UPHI0 - 1)
    report(
        7,
        deviation < 0.35,
        f"predicted sqrtA = {predicted:.3f} uPhi0 vs measured mean {TABLE1_MEAN_UPHI0} "
        f"(deviation {deviation * 100:.1f}%, tolerance 35%)",
    )


def test_criterion_8_perimeter_linearity(numeric_fits, accept190):
    fits, _ = numeric_fits
    m2sigma = fits[ModelVariant.NUMERIC_ALL].m2sigma
    pairs_um = [(4.58, 4.0), (6.48, 5.66), (9.16, 8.0), (12.95, 11.31), (25.91, 22.63)]
    P = np.array([2 * (x + y) + 4 for x, y in pairs_um])
    A = np.array(
        [
            predict_amplitude(
                SquidGeometry(X=x * 1e-6, Y=y * 1e-6, W=1e-6, b=190e-9, lam=40e-9),
                ModelVariant.NUMERIC_ALL,
                m2sigma,
                accept190,
            )
            ** 2
            for x, y in pairs_um
        ]
    )
    slope, intercept = np.polyfit(P, A, 1)
    residual = A - (slope * P + intercept)
    r2 = 1 - residual.var() / A.var()
    report(
        8,
        r2 > 0.999,
        f"A vs P over P = {P.min():.1f}..{P.max():.1f} um at W = 1 um: R^2 = {r2:.6f} (> 0.999)",
    )


def test_criterion_9_spectroscopy_round_trip():
    start = time.monotonic()
    truth = QubitTruth(sqrtA=2.5e-6, Delta=HPLANCK * 4.6e9, slope_coeff=HPLANCK * 600e9, T1=15e-6)

    spectrum, traces = synthesize_qubit_dataset(truth, SamplingPlan(), seed=0)
    _, _, clean = run_extraction(spectrum, traces, T1_guess=truth.T1)
    clean_dev = abs(clean.combined / 2.5 - 1)

    noisy_plan = SamplingPlan(population_noise=0.02)
    recovered = []
    for seed in range(100):
        spectrum, traces = synthesize_qubit_dataset(truth, noisy_plan, seed=seed)
        _, _, extraction = run_extraction(spectrum, traces, T1_guess=truth.T1)
        recovered.append(extraction.combined)
    recovered = np.array(recovered)
    worst = np.abs(recovered / 2.5 - 1).max()
    bias = abs(recovered.mean() / 2.5 - 1)
    elapsed = time.monotonic() - start
    ok = clean_dev < 0.005 and worst < 0.05 and bias < 0.01 and elapsed < 60
    report(
        9,
        ok,
        f"noiseless deviation {clean_dev * 100:.3f}% (< 0.5%), worst of 100 noisy seeds "
        f"{worst * 100:.2f}% (< 5%), mean bias {bias * 100:.2f}% (< 1%), "
        f"runtime {elapsed:.1f} s (< 60 s)",
    )


def test_criterion_10_convergence_gates():
    W = 1e-6

    def totals(pipeline):
        return np.array(
            [
                pipeline.width_breakdown(W, ModelVariant.NUMERIC_TOP).total,
                pipeline.width_breakdown(W, ModelVariant.NUMERIC_ALL).total,
            ]
        )

    base = PipelineConfig(b=190e-9, lam=40e-9)
    reference = totals(base)

    fine = PipelineConfig(b=190e-9, lam=40e-9, target_patch=10e-9, patch_cap=80_000)
    longer = PipelineConfig(b=190e-9, lam=40e-9, strip_length=2 * base.length_for(W))
    closer = PipelineConfig(b=190e-9, lam=40e-9, standoff=base.standoff / 2)

    deltas = {
        "grid doubling": np.abs(totals(fine) / reference - 1).max(),
        "strip-length doubling": np.abs(totals(longer) / reference - 1).max(),
        "standoff halving": np.abs(totals(closer) / reference - 1).max(),
    }
    thresholds = {"grid doubling": 0.02, "strip-length doubling": 0.01, "standoff halving": 0.02}
    ok = all(deltas[k] < thresholds[k] for k in deltas)
    detail = ", ".join(
        f"{k}: {deltas[k] * 100:.3f}% (< {thresholds[k] * 100:.0f}%)" for k in deltas
    )
    report(10, ok, detail)
