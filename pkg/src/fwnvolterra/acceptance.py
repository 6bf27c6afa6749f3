"""Acceptance checks, one function per criterion.

Each check returns a JSON-serializable record ``{"id", "name", "passed",
"details"}``.  Records contain no timings or host information, so reports built
from them are reproducible byte for byte.  Seeded checks take ``seed`` and
``workers``; their output does not depend on ``workers``.
"""

from __future__ import annotations

import json
import math
from typing import Callable

import numpy as np

from .fbm import fbm_covariance, sample_fbm, wiener_integral
from .fraccalc import (SampledFunction, fractional_integral, hdot_norm_spectral, lambda_h_inner,
                       lambda_h_norm, marchaud_derivative, time_reversal_shift)
from .kernels import KernelSpec, rho, rho_numeric
from .mittag_leffler import mittag_leffler
from .resolvent import (alpha2_formula, fundamental_solution, resolvent_oracle, rn_hdot_norm,
                        rn_window, solve_scalar_resolvent, verify_lemma31)
from .spectral import (KernelDynamics, SpectralModel, alpha2_local_condition,
                       covariance_eigenvalues, mode_responses, sigma_conditions, simulate_solution,
                       structure_function_space, structure_function_time, regularity_conditions,
                       theorem42_example_conditions, variance_spectral)

__all__ = ["CRITERIA", "run_criterion", "run_suite", "canonical_json"]


def _record(cid: int, name: str, passed: bool, details: dict) -> dict:
    return {"id": cid, "name": name, "passed": bool(passed), "details": details}


def canonical_json(obj) -> str:
    """Sorted keys, fixed separators, floats at 17 significant digits."""
    return json.dumps(_round17(obj), sort_keys=True, indent=1, allow_nan=True) + "\n"


def _round17(obj):
    if isinstance(obj, float):
        return float(f"{obj:.17g}")
    if isinstance(obj, (np.floating,)):
        return float(f"{float(obj):.17g}")
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, dict):
        return {str(k): _round17(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round17(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _round17(obj.tolist())
    return obj


# ---------------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------------

def criterion_1(**_) -> dict:
    cases = []
    for H in (0.25, 0.4, 0.5, 0.6, 0.75):
        for t in (0.5, 1.0, 2.0):
            f = SampledFunction.indicator(0.0, t, t / 64)
            val = lambda_h_norm(f, H) ** 2
            cases.append({"H": H, "t": t, "norm_sq": val, "rel_err": abs(val / t ** (2 * H) - 1)})
    worst = max(c["rel_err"] for c in cases)
    return _record(1, "Lambda_H indicator law", worst < 0.01, {"max_rel_err": worst, "cases": cases})


def _hat(step: float) -> SampledFunction:
    return SampledFunction.from_function(lambda x: np.maximum(0.0, 1 - np.abs(2 * x - 1)),
                                         0.0, 1.0, step, where="mid")


def criterion_2(**_) -> dict:
    step = 1e-3
    funcs = {"indicator": SampledFunction.indicator(0.0, 0.5, step), "hat": _hat(step)}
    rows = []
    for alpha in np.round(np.arange(0.1, 0.95, 0.1), 10):
        for name, f in funcs.items():
            back = marchaud_derivative(fractional_integral(f, alpha), alpha)
            g = back.regrid(f.start, f.support_end)
            rows.append({"alpha": float(alpha), "f": name,
                         "max_err": float(np.max(np.abs(g.values - f.values)))})
    worst = max(r["max_err"] for r in rows)
    return _record(2, "left-inverse round trip", worst < 1e-3, {"max_err": worst, "rows": rows})


def criterion_3(seed: int = 42, **_) -> dict:
    n_points, count = 64, 10_000
    rows = []
    passed = True
    for i, H in enumerate((0.25, 0.5, 0.75)):
        ens = sample_fbm(H, n_points, 1.0 / n_points, count, seed, mode=i)
        X = ens.paths[:, 1:]
        t = ens.times[1:]
        prod = X[:, :, None] * X[:, None, :]
        emp = prod.mean(axis=0)
        se = prod.std(axis=0, ddof=1) / math.sqrt(count)
        exact = fbm_covariance(t[:, None], t[None, :], H)
        z = np.abs(emp - exact) / se
        iu = np.triu_indices(n_points)
        exceed = int(np.sum(z[iu] > 3))
        rows.append({"H": H, "max_z": float(z.max()), "entries": int(iu[0].size),
                     "entries_beyond_3se": exceed, "method": ens.method})
        passed &= exceed == 0
    return _record(3, "fBm covariance law", passed, {"rows": rows, "paths": count, "points": n_points})


def criterion_4(seed: int = 42, **_) -> dict:
    n, count = 64, 20_000
    h = 1.0 / n
    rows = []
    passed = True
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(2**40,))))
    for i, H in enumerate((0.25, 0.5, 0.75)):
        ens = sample_fbm(H, n, h, count, seed, mode=10 + i)
        for _ in range(5):
            f = SampledFunction(h, 0.0, rng.normal(size=n))
            g = SampledFunction(h, 0.0, rng.normal(size=n))
            prod = wiener_integral(f, ens) * wiener_integral(g, ens)
            mc = float(prod.mean())
            se = float(prod.std(ddof=1) / math.sqrt(count))
            exact = lambda_h_inner(f, g, H)
            z = abs(mc - exact) / se
            rows.append({"H": H, "mc": mc, "stderr": se, "exact": exact, "z": z})
            passed &= z <= 3
    return _record(4, "Wiener isometry", passed, {"rows": rows, "paths": count})


def criterion_5(**_) -> dict:
    step, horizon = 1e-3, 2.0
    rows = []
    for kappa in (0.3, 0.7):
        k = KernelSpec.riemann_liouville(kappa)
        sol = solve_scalar_resolvent(k, 1.0, step, horizon)
        err = float(np.max(np.abs(sol.values - resolvent_oracle(k, 1.0, sol.times))))
        rows.append({"case": f"s_n, g_{kappa}", "max_err": err})
    for alpha in (0.4, 0.8, 1.5):
        for beta in (0.75, 1.0, 1.5):
            fs = fundamental_solution(alpha, beta, 1.0, step, horizon)
            rows.append({"case": f"r_n, alpha={alpha}, beta={beta}", "max_err": fs.discrepancy})
    worst = max(r["max_err"] for r in rows)
    return _record(5, "resolvent oracles", worst < 1e-4, {"max_err": worst, "rows": rows})


def criterion_6(**_) -> dict:
    t = np.linspace(0.0, 2.0, 2001)[1:]
    rows = []
    for beta in (0.75, 1.0, 1.5, 2.0, 2.5):
        for mu in (1.0, 100.0):
            ref = t ** (beta - 1) * mittag_leffler(2.0, beta, -mu * t**2)
            err = float(np.max(np.abs(alpha2_formula(beta, mu, t) - ref)))
            rows.append({"beta": beta, "mu": mu, "max_err": err})
    worst = max(r["max_err"] for r in rows)
    return _record(6, "alpha = 2 closed form", worst < 1e-6, {"max_err": worst, "rows": rows})


def criterion_7(**_) -> dict:
    kernels = [(f"g_{a}", KernelSpec.riemann_liouville(a), 1 + a) for a in (0.25, 0.5, 0.9)]
    kernels += [(f"tempered({a},1)", KernelSpec.tempered(a, 1.0), 1 + a) for a in (0.25, 0.5, 0.9)]
    kernels.append(("exponential(1)", KernelSpec.exponential(1.0), 2.0))
    rows = [{"kernel": name, "rho": rho(k).rho, "rho_numeric": rho_numeric(k).rho, "expected": e}
            for name, k, e in kernels]
    worst = max(max(abs(r["rho"] - r["expected"]), abs(r["rho_numeric"] - r["expected"])) for r in rows)
    return _record(7, "parabolicity index rho", worst < 1e-3, {"max_err": worst, "rows": rows})


def criterion_8(**_) -> dict:
    rep = verify_lemma31(KernelSpec.tempered(0.5, 1.0), [1e2, 1e3, 1e4, 1e5, 1e6])
    rel = abs(rep["slope"] / rep["expected_slope"] - 1)
    details = {"slope": rep["slope"], "expected": rep["expected_slope"], "rel_err": rel,
               "l1_norms": [r["l1_s"] for r in rep["rows"]], "mus": [r["mu"] for r in rep["rows"]]}
    return _record(8, "resolvent L1 scaling", rel < 0.05, details)


def criterion_9(**_) -> dict:
    alpha, beta, H, theta = 1.0, 0.9, 0.75, 0.1
    mus = np.array([1.0, 4.0, 16.0, 64.0, 256.0])
    vals = np.array([rn_hdot_norm(alpha, beta, m, H, theta) for m in mus])
    slope = float(np.polyfit(np.log(mus), np.log(vals), 1)[0])
    expected = 2 * (1 - beta + theta - H) / alpha
    rel = abs(slope / expected - 1)
    mismatches = []
    for b in np.linspace(0.05, 2.0, 10):
        for h in np.linspace(0.1, 0.9, 10):
            lo, hi = rn_window(alpha, h, theta)
            inside = lo < b < hi
            finite = math.isfinite(rn_hdot_norm(alpha, b, 1.0, h, theta))
            if inside != finite:
                mismatches.append([float(b), float(h)])
    details = {"slope": slope, "expected": expected, "rel_err": rel, "window_mismatches": mismatches}
    return _record(9, "fundamental-solution norm scaling", rel < 0.02 and not mismatches, details)


def criterion_10(**_) -> dict:
    H = 0.75
    step = 0.01
    sol = solve_scalar_resolvent(KernelSpec.tempered(0.5, 1.0), 4.0, step, 3.0)
    f = SampledFunction(step, 0.0, sol.values[1:])
    norms = [hdot_norm_spectral(time_reversal_shift(f, t), 0.5 - H) for t in (0.0, 1.0, 2.0, 5.0)]
    spread = (max(norms) - min(norms)) / min(norms)
    return _record(10, "shift identity", spread < 0.005, {"norms": norms, "rel_spread": spread})


_EXAMPLE_KERNEL = KernelSpec.tempered(0.5, 1.0)


def criterion_11(seed: int = 42, workers: int = 1, **_) -> dict:
    model = SpectralModel.example(1, 2, 50)
    dyn = KernelDynamics(_EXAMPLE_KERNEL)
    step, M = 0.01, 2000
    rows = []
    passed = True
    for H in (0.3, 0.5, 0.75):
        ens = simulate_solution(model, dyn, H, 2.0, step, 50, M, seed, workers=workers)
        for t in (0.5, 1.0, 2.0):
            j = int(round(t / step))
            e = ens.energy(j)
            mc = float(e.mean())
            se = float(e.std(ddof=1) / math.sqrt(M))
            exact = variance_spectral(model, dyn, t, H, step, responses=ens.responses)
            z = abs(mc - exact["variance"]) / se
            rows.append({"H": H, "t": t, "mc": mc, "stderr": se, "spectral": exact["variance"],
                         "tail_estimate": exact["tail_estimate"], "z": z})
            passed &= z <= 3
    return _record(11, "variance cross-check", passed, {"rows": rows, "N": 50, "M": M, "step": step})


def criterion_12(**_) -> dict:
    model = SpectralModel.example(1, 2, 50)
    dyn = KernelDynamics(_EXAMPLE_KERNEL)
    step = 0.01
    resp = mode_responses(model, dyn, step, 400)
    rows = []
    # the bound is one-sided; for large H the trace is still growing at t = 0.5, so
    # the two-sided 2x band is asserted for H <= 1/2 and H = 0.75 is reported only
    for H in (0.3, 0.5, 0.75):
        ratios = [covariance_eigenvalues(model, dyn, t, H, step, responses=resp)["ratio"]
                  for t in (0.5, 1.0, 2.0, 4.0)]
        rows.append({"H": H, "ratios": ratios, "variation": max(ratios) / min(ratios),
                     "sup_ratio": max(ratios), "asserted": H <= 0.5})
    passed = all(r["variation"] < 2 for r in rows if r["asserted"])
    return _record(12, "trace bound", passed, {"rows": rows})


def criterion_13(seed: int = 42, workers: int = 1, **_) -> dict:
    H, theta = 0.75, 0.8
    model = SpectralModel.example(1, 2, 50)
    dyn = KernelDynamics(_EXAMPLE_KERNEL)
    conds = regularity_conditions(model, dyn.rho(), H, theta)
    ens = simulate_solution(model, dyn, H, 2.0, 0.005, 50, 500, seed, workers=workers)
    st = structure_function_time(ens)
    pairs = [(x, x + d) for d in np.geomspace(0.03, 0.3, 6) for x in np.linspace(0.5, 2.3, 8)]
    ss = structure_function_space(ens, pairs)
    need_t, need_s = 2 * theta * H - 0.1, 2 * theta - 0.1
    ok_conds = all(conds[k]["verdict"] == "convergent" for k in conds)
    passed = ok_conds and st["slope"] >= need_t and ss["slope"] >= need_s
    details = {"H": H, "theta": theta, "conditions_hold": ok_conds, "time_slope": st["slope"],
               "time_bound": need_t, "space_slope": ss["slope"], "space_bound": need_s}
    return _record(13, "Holder slopes", passed, details)


def _sigma_closed_form(l, m, alpha, beta, H, theta) -> dict:
    ex = theorem42_example_conditions(l, m, alpha, beta, H, theta)
    w1 = 1 - H < beta < 1 - H + alpha
    w2 = 1 - H + theta < beta < 1 - H + alpha
    return {"sigma1": w1 and ex["existence"], "sigma2": w2 and ex["time_holder"],
            "sigma3": w1 and ex["space_holder"]}


def criterion_14(**_) -> dict:
    l, m, alpha, theta = 2.0, 1, 1.0, 0.2
    grid = [(0.6, 0.75), (0.2, 0.75), (1.3, 0.75), (1.0, 0.3), (0.5, 0.6)]
    model = SpectralModel.example(m, l, 200)
    rows = []
    passed = True
    for beta, H in grid:
        num = sigma_conditions(model, alpha, beta, H, theta)
        closed = _sigma_closed_form(l, m, alpha, beta, H, theta)
        got = {k: num[k]["convergent"] for k in ("sigma1", "sigma2", "sigma3")}
        rows.append({"beta": beta, "H": H, "numeric": got, "closed_form": closed})
        passed &= got == closed
    a2 = []
    for (ll, mm, b) in [(1.1, 3, 0.6), (2.0, 1, 0.75), (1.5, 2, 1.0), (3.0, 1, 0.6), (1.2, 1, 0.95)]:
        v = alpha2_local_condition(SpectralModel.example(mm, ll, 100), b)["convergent"]
        expected = ll + 2 * mm * (b - 1) > 1
        a2.append({"l": ll, "m": mm, "beta": b, "verdict": v, "expected": expected})
        passed &= v == expected
    return _record(14, "condition consistency", passed, {"sigma": rows, "alpha2": a2})


_SEEDED = (3, 4, 11, 13)


def criterion_15(seed: int = 42, primary: dict | None = None, **_) -> dict:
    """Rerun every seeded check with 1 and 8 workers and compare serialized bytes."""
    runs = {}
    for w in (1, 8):
        runs[w] = "".join(canonical_json(CRITERIA[c](seed=seed, workers=w)) for c in _SEEDED)
    same = runs[1] == runs[8]
    details = {"criteria": list(_SEEDED), "workers_1_vs_8_identical": same}
    if primary is not None:
        ref = "".join(canonical_json(primary[c]) for c in _SEEDED if c in primary)
        if ref:
            details["matches_primary_run"] = ref == runs[1]
            same = same and details["matches_primary_run"]
    return _record(15, "determinism", same, details)


CRITERIA: dict[int, Callable[..., dict]] = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
    6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10,
    11: criterion_11, 12: criterion_12, 13: criterion_13, 14: criterion_14, 15: criterion_15,
}


def run_criterion(cid: int, seed: int = 42, workers: int = 1) -> dict:
    return CRITERIA[cid](seed=seed, workers=workers)


def run_suite(ids=None, seed: int = 42, workers: int = 1,
              progress: Callable[[dict], None] | None = None) -> dict:
    """Run the selected criteria in order; criterion 15 reuses the earlier seeded results."""
    ids = sorted(CRITERIA) if ids is None else sorted(set(ids))
    results = {}
    for cid in ids:
        if cid == 15:
            rec = criterion_15(seed=seed, primary=results)
        else:
            rec = CRITERIA[cid](seed=seed, workers=workers)
        results[cid] = rec
        if progress is not None:
            progress(rec)
    return {"seed": seed, "criteria": [results[c] for c in ids],
            "passed": all(r["passed"] for r in results.values())}
