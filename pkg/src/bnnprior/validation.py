"""Self-checks of the exact evaluators, collected into a JSON-able report.

Every check returns a :class:`Check` with the measured quantity and the
tolerance it was held to.  The report contains no timestamps and all Monte
Carlo runs use fixed seeds, so identical settings give identical reports.
"""

import math
from dataclasses import asdict, dataclass

import numpy as np

from .asymptotics import WidthScaledSpec, edgeworth_density
from .linear_prior import (
    density_linear,
    density_two_layer,
    charfun_linear,
    marginal_density_1d,
    moment_norm_linear,
)
from .mc_oracle import compare_density, empirical_density, empirical_moment, sample_outputs
from .network import NetworkSpec
from .relu_prior import atom_mass, density_relu, enumerate_terms, moment_norm_relu
from .specfun import MellinSpectrum, f_q_nested, hankel_radial, radial_integral
from .tails import estimate_tail_parameter

SCHEMA_VERSION = 1
FAULTS = ("relu-variance",)


@dataclass
class Check:
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""


def _rel(a, b):
    return float(np.max(np.abs(np.asarray(a) / np.asarray(b) - 1)))


def check_closed_form(level):
    widths = (1, 2, 5, 25, 100) if level == "full" else (1, 2, 5)
    r = np.linspace(0.01, 10, 100 if level == "full" else 25)
    worst = 0.0
    for n1 in widths:
        for n2 in (1, 2):
            spec = NetworkSpec.from_kappa((1, n1, n2))
            worst = max(worst, _rel(density_linear(spec, r, method="contour"), density_two_layer(spec, r)))
    return Check("closed_form", worst <= 1e-9, worst, 1e-9, "contour vs Bessel-K, depth 2")


def check_nested_oracle(level):
    specs = [(1, 3, 2, 1), (1, 4, 1, 2)]
    if level == "full":
        specs += [(1, 2, 5, 3, 1), (1, 10, 10, 10, 2)]
    r = np.linspace(0.05, 8, 40 if level == "full" else 12)
    worst = 0.0
    for widths in specs:
        spec = NetworkSpec.from_kappa(widths)
        d, nd = spec.depth, spec.out_width
        nus = [(n - nd) / 2 for n in spec.hidden_widths]
        z = r**2 / (2**d * spec.kappa**2)
        g = math.exp(-sum(math.lgamma(n / 2) for n in spec.hidden_widths))
        ref = g * (2**d * math.pi * spec.kappa**2) ** (-nd / 2) * f_q_nested(z, nus)
        worst = max(worst, _rel(density_linear(spec, r), ref))
    return Check("nested_oracle", worst <= 1e-7, worst, 1e-7, "contour vs nested quadrature")


def _normalization_specs(level):
    specs = [
        NetworkSpec.from_kappa((1, 2, 2, 1)),
        NetworkSpec.from_kappa((1, 100, 2, 100, 1)),
        NetworkSpec.from_kappa((1, 2, 3, 1), activation="relu"),
    ]
    if level == "full":
        specs += [
            NetworkSpec.from_kappa((1, 1, 1, 1)),
            NetworkSpec.from_kappa((1, 5, 3, 2), 0.7),
            NetworkSpec.from_kappa((1, 3, 1, 4, 2)),
            NetworkSpec.from_kappa((1, 25, 1)),
            NetworkSpec.from_kappa((1, 3, 2, 2), 0.8, "relu"),
            NetworkSpec.from_kappa((1, 5, 5, 1), activation="relu"),
            NetworkSpec.from_kappa((1, 2, 2, 2, 1), activation="relu"),
        ]
    return specs


def check_normalization(level):
    worst_mass = worst_moment = 0.0
    for spec in _normalization_specs(level):
        relu = spec.activation == "relu"
        mix = enumerate_terms(spec, mode="none") if relu else None
        fn = (lambda r: density_relu(spec, r, mix)) if relu else (lambda r: density_linear(spec, r))
        atom = atom_mass(spec) if relu else 0.0
        worst_mass = max(worst_mass, abs(radial_integral(fn, spec.out_width) + atom - 1))
        for m in (2, 4, 6):
            exact = moment_norm_relu(spec, m) if relu else moment_norm_linear(spec, m)
            worst_moment = max(worst_moment, abs(radial_integral(fn, spec.out_width, m) / exact - 1))
    ok = worst_mass <= 1e-6 and worst_moment <= 1e-5
    return Check("normalization", ok, max(worst_mass, worst_moment), 1e-6,
                 f"mass error {worst_mass:.3e}, moment error {worst_moment:.3e} (tol 1e-5)")


def check_fourier_pair(level):
    specs = [(1, 2, 1), (1, 2, 2, 1)] + ([(1, 5, 3, 2), (1, 10, 4, 1)] if level == "full" else [])
    r = np.linspace(0.05, 8, 12 if level == "full" else 5)
    worst = 0.0
    for widths in specs:
        spec = NetworkSpec.from_kappa(widths)
        back = hankel_radial(lambda q: charfun_linear(spec, q), spec.out_width, "inverse", r)[:, 1]
        ref = density_linear(spec, r)
        worst = max(worst, float(np.max(np.abs(back - ref) / np.maximum(np.abs(ref), 1.0))))
    return Check("fourier_pair", worst <= 1e-4, worst, 1e-4, "inverse Hankel of charfun vs density")


def check_truncation_counts(level):
    counts = []
    for d in (2, 3, 4):
        spec = NetworkSpec.from_kappa((1,) + (100,) * (d - 1) + (1,), activation="relu")
        counts.append(len(enumerate_terms(spec, mode="product", threshold=2.0**-52)))
    ok = counts == [77, 4537, 208243]
    return Check("truncation_counts", ok, float(sum(abs(a - b) for a, b in zip(counts, [77, 4537, 208243]))),
                 0.0, f"product mode counts {counts}")


def check_mass_conservation(level, samples):
    worst = 0.0
    worst_sigma = 0.0
    for widths in [(1, 1, 1), (1, 1, 1, 1), (1, 3, 2, 1), (1, 100, 100, 1)]:
        spec = NetworkSpec.from_kappa(widths, activation="relu")
        for mode in ("none", "per-factor", "product"):
            if mode == "none" and max(widths) > 10:
                continue
            mix = enumerate_terms(spec, mode=mode)
            worst = max(worst, abs(mix.atom_mass + mix.continuous_mass + mix.discarded_mass - 1))
        if max(widths) <= 3:
            batch = sample_outputs(spec, 7, samples)
            p = atom_mass(spec)
            sigma = math.sqrt(p * (1 - p) / samples)
            worst_sigma = max(worst_sigma, abs(batch.zero_fraction - p) / sigma)
    ok = worst <= 1e-5 and worst_sigma <= 3
    return Check("mass_conservation", ok, worst, 1e-5, f"MC zero fraction max {worst_sigma:.2f} sigma (tol 3)")


def check_variance_ratio(level, samples, fault=None):
    exact_ok = True
    worst_se = 0.0
    for d in (2, 3, 4):
        widths = (1,) + (3,) * (d - 1) + (1,)
        lin = NetworkSpec.from_kappa(widths)
        relu = lin.with_activation("relu")
        m_relu = moment_norm_relu(relu, 2)
        if fault == "relu-variance":
            m_relu = moment_norm_linear(lin, 2) * 2.0**-d
        exact_ok &= m_relu / moment_norm_linear(lin, 2) == 2.0 ** (1 - d)
        est, se = empirical_moment(sample_outputs(relu, 11 + d, samples), 2)
        worst_se = max(worst_se, abs(est - m_relu) / se)
    ok = exact_ok and worst_se <= 3
    return Check("variance_ratio", ok, worst_se, 3.0,
                 f"exact ratio {'matches' if exact_ok else 'differs from'} 2^(1-d)")


def check_mc_agreement(level, samples):
    depths = (2, 3, 4) if level == "full" else (2, 3)
    widths = (1, 2, 5) if level == "full" else (2,)
    worst = 0.0
    tested = 0
    for act in ("linear", "relu"):
        for d in depths:
            for n in widths:
                spec = NetworkSpec.equal_variance((1,) + (n,) * (d - 1) + (1,), act)
                batch = sample_outputs(spec, 1000 * d + n, samples)
                hist = empirical_density(batch)
                if act == "linear":
                    exact = lambda x, s=spec: marginal_density_1d(s, np.abs(x))
                else:
                    mix = enumerate_terms(spec.with_out_width(1))
                    exact = lambda x, s=spec, m=mix: density_relu(s.with_out_width(1), np.abs(x), m)
                cmp = compare_density(exact, hist)
                worst = max(worst, cmp.max_z)
                tested += cmp.bins_tested
    return Check("mc_agreement", worst <= 4, worst, 4.0, f"{tested} bins tested")


def check_tail_slopes(level):
    worst = 0.0
    for act in ("linear", "relu"):
        for d in (1, 2, 3, 4):
            for n in (1, 2):
                spec = NetworkSpec.from_kappa((1,) + (n,) * (d - 1) + (1,), activation=act)
                worst = max(worst, abs(estimate_tail_parameter(spec, 400).theta_hat - d / 2))
    return Check("tail_slopes", worst <= 0.05, worst, 0.05, "theta_hat vs d/2, widths 1 and 2")


def check_edgeworth(level):
    ok = True
    details = []
    for d in (3, 4):
        ws = WidthScaledSpec.from_varkappa((1,) + (10,) * (d - 1) + (1,))
        r = np.linspace(0.05, 12, 240)
        exact = density_linear(ws.base, r)
        edge = edgeworth_density(ws, r)
        above = exact > edge
        below = np.nonzero(~above)[0]
        crossover = r[below[-1] + 1] if below.size else r[0]
        ratio = exact[-1] / edge[-1] if edge[-1] > 0 else math.inf
        ok &= bool(below.size == 0 or below[-1] + 1 < r.size) and ratio > 10
        details.append(f"d={d} crossover {crossover:.3f} ratio {ratio:.3e}")
    ws = WidthScaledSpec.from_varkappa((1, 100, 100, 1))
    r = np.linspace(0, 3 * ws.varkappa, 61)
    gap = float(np.max(np.abs(density_linear(ws.base, r) - edgeworth_density(ws, r))))
    ok &= gap <= 5e-4
    return Check("edgeworth", bool(ok), gap, 5e-4, "; ".join(details))


def run_validation(level="quick", fault=None):
    """Run every check; returns a plain dict ready for JSON serialisation."""
    if level not in ("quick", "full"):
        raise ValueError("level must be 'quick' or 'full'")
    samples_small = 10**6 if level == "full" else 10**5
    samples_mc = 10**7 if level == "full" else 2 * 10**5
    checks = [
        check_closed_form(level),
        check_nested_oracle(level),
        check_normalization(level),
        check_fourier_pair(level),
        check_truncation_counts(level),
        check_mass_conservation(level, samples_small),
        check_variance_ratio(level, samples_small, fault),
        check_mc_agreement(level, samples_mc),
        check_tail_slopes(level),
        check_edgeworth(level),
    ]
    return {
        "schema_version": SCHEMA_VERSION,
        "level": level,
        "fault": fault,
        "passed": all(c.passed for c in checks),
        "checks": [asdict(c) for c in checks],
    }
