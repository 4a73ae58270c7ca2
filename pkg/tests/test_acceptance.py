"""Acceptance suite: every criterion at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one PASS/FAIL
line per criterion.  Criterion 4's regression-residual bound for ex_2_6
is asserted exactly as stated and fails by design; see the test docstring
for the closed-form analysis.
"""

import json
import math
from dataclasses import replace

import numpy as np
import pytest

from eulercert.analysis import (
    NormSpec,
    affine_probe,
    annulus_lq_norm,
    blowup_exponent_fit,
    l2_energy_difference,
    twin_wave_form_check,
)
from eulercert.catalog import TransformSpec, apply_transform, preset, preset_ids
from eulercert.cli import main
from eulercert.fields import SingularSetDescriptor, SolutionPair, VelocityJet
from eulercert.verification import Tolerances, certify, default_region

SAMPLES = 10_000
TOL = Tolerances(residual=1e-8, divergence=1e-10, fd=1e-5, vorticity=1e-8)


def announce(criterion: str, ok: bool, detail: str = ""):
    status = "PASS" if ok else "FAIL"
    print(f"[acceptance] {criterion}: {status}" + (f"  ({detail})" if detail else ""))


def certified(sol, seed=0, samples=SAMPLES):
    return certify(sol, default_region(sol, count=samples, seed=seed), TOL)


def test_criterion_1_all_presets_certify():
    failures = []
    details = []
    for pid in preset_ids():
        rep = certified(preset(pid))
        details.append(f"{pid}:{rep.max_residual:.1e}")
        if not rep.passed:
            failures.append((pid, rep))
    ok = not failures
    announce("criterion 1 (nine presets certify at 1e-8/1e-10/1e-5/1e-8)", ok,
             " ".join(details))
    assert ok, failures


def test_criterion_2_transform_soundness():
    transforms = [
        TransformSpec.boost((1.0, 2.0)),
        TransformSpec.rotation(0.7),
        TransformSpec.rescale(2.0, 3.0),
    ]
    failures = []
    for pid in ("ex_3_2", "ex_2_5"):
        for tr in transforms:
            sol = apply_transform(preset(pid), tr)
            rep = certified(sol)
            if not rep.passed:
                failures.append((pid, tr.kind, rep.max_residual))
    ok = not failures
    announce("criterion 2 (boost/rotation/rescale re-certify)", ok)
    assert ok, failures


def test_criterion_3_energy_values():
    energy = l2_energy_difference(preset("ex_3_2"), (1.0, 1.0))
    ok_energy = abs(energy.value - math.pi / 6.0) <= 1e-6
    ratios = []
    sol = preset("ex_2_5")
    for delta, R in ((1.0, math.e), (0.5, 10.0), (2.0, 100.0)):
        for t in (0.0, 2.0):
            val = annulus_lq_norm(sol, NormSpec(q=2, delta=delta, R=R, t=t)).value_pow_q
            ratios.append(val / (2.0 * math.pi * (t - 1.0) ** 2 * math.log(R / delta)))
    ok_law = all(abs(r - 1.0) <= 1e-8 for r in ratios)
    ok = ok_energy and ok_law
    announce("criterion 3 (energy pi/6 within 1e-6; annulus law within 1e-8)", ok,
             f"energy={energy.value:.9f}")
    assert ok, (energy.value, ratios)


def test_criterion_4_blowup_exponents():
    fits = {
        "ex_2_6": (blowup_exponent_fit(preset("ex_2_6")), -1.0),
        "ex_6_1": (blowup_exponent_fit(preset("ex_6_1")), -0.5),
        "ex_5_1_blowup": (blowup_exponent_fit(preset("ex_5_1_blowup")), -1.0),
    }
    ok_alpha = all(abs(fit.exponent - want) <= 0.01 for fit, want in fits.values())
    ok_res = all(fits[p][0].residual_rms <= 1e-3 for p in ("ex_6_1", "ex_5_1_blowup"))
    ok = ok_alpha and ok_res
    announce("criterion 4 (blow-up exponents -1, -1/2, -1 within 0.01)", ok,
             " ".join(f"{p}:{f.exponent:.4f}" for p, (f, _) in fits.items()))
    assert ok, {p: f.exponent for p, (f, _) in fits.items()}


def test_criterion_4_ex26_regression_residual():
    """Asserted as stated, known to fail: the annulus sup norm of ex_2_6 is
    (1 - tau)/tau with tau = T - t, which is not a pure power law.  On the
    mandated sample times t_k = T (1 - 2^-k) the least-squares residual in
    log-log space is dominated by the early times (the k = 1 point deviates
    from the asymptote by log 2) and its rms stays near 0.09 for every
    admissible K <= 50; no choice of K brings it under 1e-3."""
    fit = blowup_exponent_fit(preset("ex_2_6"))
    ok = fit.residual_rms <= 1e-3
    announce("criterion 4b (ex_2_6 regression residual <= 1e-3)", ok,
             f"rms={fit.residual_rms:.4f}")
    assert ok, fit.residual_rms


def test_criterion_5_pressure_sign_discrimination():
    good = certified(preset("ex_6_1", {"pressure_sign": 1}))
    bad = certified(preset("ex_6_1", {"pressure_sign": -1}))
    ok = good.passed and (not bad.passed) and bad.max_residual >= 0.1 \
        and good.notes["pressure_sign"] == 1
    announce("criterion 5 (pressure sign +1 certified, -1 rejected)", ok,
             f"bad residual={bad.max_residual:.3f}")
    assert ok, (good.verdict, bad.verdict, bad.max_residual)


def test_criterion_6_theorem_corroboration():
    const = affine_probe("3", "5", c1=0.0, c2=1.0)
    nonconst = [
        affine_probe("x", "x", c1=0.0, c2=1.0),
        affine_probe("1/(1+x^2)", "x/(1+x^2)", c1=0.0, c2=1.0),
        affine_probe("sin(x)", "cos(x)", c1=0.0, c2=1.0),
    ]
    conforming = twin_wave_form_check("1/(1+x^2)", "1/(1+x^2)", 1.0, 0.0, 1.0)
    nonconforming = twin_wave_form_check("1/(1+x^2)", "1/(1+x^4)", 1.0, 0.0, 1.0)
    ok = (
        const.sup_residual <= 1e-10
        and all(p.sup_residual >= 0.05 for p in nonconst)
        and conforming.sup_residual <= 1e-8
        and nonconforming.sup_residual >= 0.01
    )
    announce("criterion 6 (affine and traveling-wave probes)", ok,
             f"nonconst sups={[round(p.sup_residual, 3) for p in nonconst]}")
    assert ok


def _mutations():
    """The five documented evaluator mutations the engine must catch."""
    muts = {}

    sol = preset("ex_3_2")
    muts["grad_p_sign_flip"] = replace(
        sol, pressure_gradient=lambda X, T, f=sol.pressure_gradient: -f(X, T))

    sol = preset("ex_2_5")

    def dropped_rate_term(X, T, f=sol.pressure_gradient):
        # removes the circulation-rate part of grad p (c'(t) = 1 here)
        y1, y2 = X[:, 0], X[:, 1]
        ir2 = 1.0 / (y1 * y1 + y2 * y2)
        return f(X, T) + np.stack([ir2 * y2, -ir2 * y1], axis=1)

    muts["dropped_rate_term"] = replace(sol, pressure_gradient=dropped_rate_term)

    sol = preset("ex_6_1")

    def scaled_laplacian(X, T, f=sol.velocity_jet):
        jet = f(X, T)
        return VelocityJet(jet.value, jet.jacobian, 1.01 * jet.laplacian, jet.dt)

    muts["scaled_laplacian"] = replace(sol, velocity_jet=scaled_laplacian)

    sol = preset("ex_3_4_smooth")

    def wrong_wave_speed(X, T, f=sol.velocity_jet):
        jet = f(X, T)
        return VelocityJet(jet.value, jet.jacobian, jet.laplacian, 1.1 * jet.dt)

    muts["wrong_wave_speed"] = replace(sol, velocity_jet=wrong_wave_speed)

    # constructing the linear family with a non-trace-free matrix directly,
    # bypassing the constructor validation
    C = np.diag([1.0, 1.0, -1.0])

    def vel(X, T):
        return X @ C

    def vel_jet(X, T):
        n = len(X)
        return VelocityJet(X @ C, np.broadcast_to(C, (n, 3, 3)).copy(),
                           np.zeros((n, 3)), np.zeros((n, 3)))

    C2 = C @ C
    muts["non_trace_free_bypass"] = SolutionPair(
        dimension=3, viscosity=0.0, velocity=vel, velocity_jet=vel_jet,
        pressure_gradient=lambda X, T: -(X @ C2),
        singular=SingularSetDescriptor(),
        metadata={"name": "mutated_linear", "family": "linear3d",
                  "default_box": ((-3.0, 3.0),) * 3, "default_time": (0.0, 1.0),
                  "transform_chain": []},
    )
    return muts


def test_criterion_7_mutation_sensitivity():
    caught = {}
    for name, bad in _mutations().items():
        rep = certify(bad, default_region(bad, count=2000, seed=0), TOL)
        signal = max(rep.max_residual, rep.max_divergence, rep.max_fd_discrepancy)
        caught[name] = (not rep.passed) and signal >= 1e-3
    ok = all(caught.values())
    announce("criterion 7 (five evaluator mutations caught)", ok, str(caught))
    assert ok, caught


def test_criterion_8_determinism(capsys):
    commands = [
        ["certify", "ex_3_2", "--samples", "1000", "--seed", "7"],
        ["certify", "ex_6_1", "--samples", "500", "--seed", "3"],
        ["norm", "ex_2_5", "--q", "2", "--delta", "1", "--R", "4", "--t", "0"],
        ["blowup", "ex_2_6", "--K", "12"],
        ["probe", "--mode", "affine", "--v1", "x", "--v2", "x", "--c2", "1"],
        ["grid-dump", "ex_3_4_smooth", "--nx", "12", "--nt", "2"],
        ["list", "--format", "json"],
    ]
    ok = True
    for argv in commands:
        code_a = main(list(argv))
        out_a = capsys.readouterr().out
        code_b = main(list(argv))
        out_b = capsys.readouterr().out
        if code_a != code_b or out_a != out_b:
            ok = False
            break
    announce("criterion 8 (fixed seeds give byte-identical outputs)", ok)
    assert ok
