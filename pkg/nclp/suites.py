"""
Seeded verification campaigns, one per CLI subcommand.

Every campaign appends CheckRecords to a Report. A record passes when its largest residual
is within its threshold; negative controls are phrased as residuals too, as the shortfall
max(0, bound − observed) of a quantity that must stay above a bound. Trial streams come
from trial_rng(seed, check name, index), so reports do not depend on the worker count.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import __version__
from .algebra import AlgebraDescriptor, commutant
from .cfm import (
    BlochCFM,
    SphereCFM,
    bloch_projection,
    cfm_check_axioms,
    cfm_from_functional,
    fit_linear,
    nonlinearity_witness,
)
from .codec import (
    decode_cfm,
    decode_linear_map,
    decode_triple,
    encode_element,
    encode_superoperator,
    encode_typical,
    encode_yeadon,
    read_json,
    write_json,
)
from .errors import ConfigError, NclpError, NotIncreasing
from .isometry import (
    LinearMap,
    YeadonTriple,
    check_orthogonality_preservation,
    construct_typical,
    construct_yeadon,
    decompose_isometry,
    decompose_l1,
    random_projection_data,
    random_typical_triple,
    symmetric_embedding,
    typical_to_yeadon,
    verify_isometry,
    yeadon_to_typical,
)
from .jordan import JordanMono, Mode, image_bicommutant, jordan_inverse, verify_jordan_mono
from .lp_space import (
    LpElement,
    StateDensity,
    clarkson_equal,
    conjugate_exponent,
    dual_pairing,
    functional_density,
    orthogonal,
    positive_decompose,
    schatten_norm,
)
from .modular import (
    ModularContext,
    check_anticocycle,
    check_ce_cocycle,
    check_centralizer,
    check_cocycle_absolute_value,
    check_hs_conditions,
    chain_rule_residual,
    cocycle_residual,
    cosine_law_residual,
    group_law_residual,
    kms_symmetry_residual,
    phi_identity_residual,
    phi_transform,
    phi_transform_quadrature,
    self_polar_form,
    self_polar_integral,
)
from .projections import (
    Symmetrizer,
    build_positive_projection,
    check_conditional_expectation,
    check_positive_projection,
    check_stormer,
    factor_projection,
    paving_demo,
    trace_ce,
)
from .sampling import (
    random_algebra,
    random_element,
    random_jordan,
    random_positive_definite,
    random_projection_pair,
    random_state,
    random_unitary,
    random_unitary_matrix,
)
from .shared import trial_rng, validate_run_config

logger = logging.getLogger(__name__)

SCHEMA = 1
CLARKSON_EXPONENTS = (1.0, 1.5, 3.0, 4.0)

# Largest campaign sizes; --trials caps them from below.
CAMPAIGN_SIZES = {
    "clarkson": 1000,
    "yeadon": 200,
    "l1": 100,
    "agreement": 50,
    "factor": 100,
    "modular": 20,
    "hs": 20,
    "cfm": 200,
    "functional_fit": 50,
    "paving": 20,
}


@dataclass(frozen=True)
class RunConfig:
    command: str
    p: float = 3.0
    seed: int = 0
    trials: int = 100
    tol: float = 1e-9
    input: str | None = None
    output: str | None = None
    workers: int = 1

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        validate_run_config(self.p, self.trials, self.tol)
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1 (got {self.workers})")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer (got {self.seed})")

    def size(self, campaign: str) -> int:
        return min(self.trials, CAMPAIGN_SIZES[campaign])

    def as_dict(self) -> dict:
        return {
            "command": self.command,
            "p": self.p,
            "seed": self.seed,
            "trials": self.trials,
            "tol": self.tol,
            "input": self.input,
            "output": self.output,
        }


@dataclass(frozen=True)
class CheckRecord:
    name: str
    passed: bool
    max_residual: float
    threshold: float
    witness: object = None
    elapsed_ms: float = 0.0

    def as_dict(self) -> dict:
        payload = {
            "name": self.name,
            "passed": self.passed,
            "max_residual": self.max_residual if math.isfinite(self.max_residual) else None,
            "threshold": self.threshold,
            "elapsed_ms": round(self.elapsed_ms, 3),
        }
        if self.witness is not None:
            payload["witness"] = self.witness
        return payload


@dataclass
class Report:
    config: RunConfig
    checks: list[CheckRecord] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "version": __version__,
            "command": self.config.command,
            "config": self.config.as_dict(),
            "checks": [c.as_dict() for c in self.checks],
            "passed": self.passed,
        }


class Campaign:
    """Runs named checks for one configuration and collects their records."""

    def __init__(self, config: RunConfig, report: Report):
        self.config = config
        self.report = report

    @property
    def tol(self) -> float:
        return self.config.tol

    def rng(self, name: str, index: int) -> np.random.Generator:
        return trial_rng(self.config.seed, name, index)

    def map(self, fn: Callable[[int], object], count: int) -> list:
        """fn over range(count), in index order, on the configured number of threads."""
        if self.config.workers > 1:
            with ThreadPoolExecutor(max_workers=self.config.workers) as pool:
                return list(pool.map(fn, range(count)))
        return [fn(k) for k in range(count)]

    def gather(self, fn: Callable[[int], object], count: int) -> list:
        """Like map, but a trial that raises a library error yields None and fails its check."""
        def guarded(k: int):
            try:
                return fn(k)
            except NclpError as e:
                logger.error(f"trial {k}: {type(e).__name__}: {e}")
                return None

        return self.map(guarded, count)

    def check(self, name: str, compute: Callable[[], object], scale: float = 1.0,
              threshold: float | None = None) -> CheckRecord:
        """
        compute returns a residual or (residual, witness). Library errors fail the check and
        become its witness.
        """
        threshold = scale * self.tol if threshold is None else threshold
        start = time.perf_counter()
        witness = None
        try:
            result = compute()
            residual, witness = result if isinstance(result, tuple) else (result, None)
            residual = float(residual)
        except NclpError as e:
            logger.error(f"{name}: {type(e).__name__}: {e}")
            residual = math.inf
            witness = {"error": type(e).__name__, "message": str(e)}
        elapsed = (time.perf_counter() - start) * 1000
        record = CheckRecord(name, residual <= threshold, residual, threshold, witness, elapsed)
        logger.info(f"{name}: residual {residual:.3e} (threshold {threshold:.1e}) {'ok' if record.passed else 'FAILED'}")
        self.report.checks.append(record)
        return record


def worst(results: list, index: int | None = None) -> float:
    """Largest residual; failed trials count as infinite."""
    return max((math.inf if r is None else (r if index is None else r[index]) for r in results), default=0.0)


def least(results: list, index: int) -> float:
    return min((-math.inf if r is None else r[index] for r in results), default=0.0)


def total(results: list, index: int) -> float:
    return sum(math.inf if r is None else r[index] for r in results)


def shortfall(bound: float, observed: float) -> float:
    return max(0.0, bound - observed)


def _random_case(rng: np.random.Generator, padding: bool = True) -> JordanMono:
    source = random_algebra(rng, max_blocks=2, max_dim=2)
    return random_jordan(source, rng, max_copies=2, padding=padding)


def _trace_projection(J: JordanMono, rng: np.random.Generator, tol: float):
    F = trace_ce(J.target, image_bicommutant(J, tol), tol)
    S = Symmetrizer.from_values(J, rng.uniform(0.2, 0.8, size=J.source.num_blocks))
    return F, S, build_positive_projection(J, F, S, tol)


def _pushed_state(J: JordanMono, P, theta: StateDensity) -> StateDensity:
    """ψ = θ∘J⁻¹∘P on the target."""
    density = functional_density(J.target, lambda y: theta.evaluate(jordan_inverse(J, P(y))))
    return StateDensity(J.target, density.hermitian_part())


# Clarkson and L^p basics


def clarkson_suite(c: Campaign):
    algebras = (AlgebraDescriptor.of(2), AlgebraDescriptor.of(3), AlgebraDescriptor.of(2, 2))
    count = c.config.size("clarkson")
    exponents = sorted(set(CLARKSON_EXPONENTS) | ({c.config.p} - {2.0}))

    for p in exponents:
        name = f"clarkson.p={p:g}"

        def pair(k: int, p=p, name=name):
            rng = c.rng(name, k)
            algebra = algebras[k % len(algebras)]
            q, rest = random_projection_pair(algebra, rng)
            xi = LpElement(q @ random_element(algebra, rng) @ q, p)
            eta = LpElement(rest @ random_element(algebra, rng) @ rest, p)
            disjoint = clarkson_equal(xi, eta, c.tol)

            x = LpElement(random_element(algebra, rng), p)
            y = LpElement(x.element * rng.uniform(0.5, 1.5) + random_element(algebra, rng) * 0.3, p)
            overlapping = clarkson_equal(x, y, c.tol)
            mismatches = int(disjoint.equal != orthogonal(xi, eta, c.tol).orthogonal)
            mismatches += int(overlapping.equal != orthogonal(x, y, c.tol).orthogonal)
            return disjoint.relative_gap, overlapping.relative_gap, mismatches

        results = c.gather(pair, count)
        c.check(f"{name}.orthogonal_pairs", lambda: worst(results, 0))
        c.check(f"{name}.overlapping_pairs", lambda: shortfall(1e-4, least(results, 1)))
        c.check(f"{name}.equivalence", lambda: total(results, 2))

    def parallelogram():
        worst = 0.0
        for k in range(min(count, 100)):
            rng = c.rng("clarkson.p=2", k)
            algebra = algebras[k % len(algebras)]
            xi, eta = (LpElement(random_element(algebra, rng), 2.0) for _ in range(2))
            worst = max(worst, clarkson_equal(xi, eta, c.tol).relative_gap)
        return worst

    c.check("clarkson.p=2.parallelogram", parallelogram)

    def holder_and_decomposition():
        holder = reassembly = 0.0
        p = c.config.p
        q = conjugate_exponent(p)
        for k in range(min(count, 100)):
            rng = c.rng("lp.holder", k)
            algebra = algebras[k % len(algebras)]
            xi = LpElement(random_element(algebra, rng), p)
            other = random_element(algebra, rng)
            eta = other if math.isinf(q) else LpElement(other, q)
            bound = schatten_norm(xi.element, p) * schatten_norm(other, q)
            holder = max(holder, abs(dual_pairing(xi, eta)) - bound)
            h1, h2, h3, h4 = (h.element for h in positive_decompose(xi))
            reassembly = max(reassembly, ((h1 - h2) + (h3 - h4) * 1j).distance(xi.element))
        return max(holder, reassembly, 0.0)

    c.check("lp.holder_and_decomposition", holder_and_decomposition)


# Decomposition and construction


def _yeadon_case(c: Campaign, name: str, k: int, p: float) -> tuple[YeadonTriple, LinearMap]:
    rng = c.rng(name, k)
    J = _random_case(rng)
    y = typical_to_yeadon(random_typical_triple(J, rng, p, c.tol), c.tol)
    return y, construct_yeadon(y, c.tol)


def decompose_suite(c: Campaign):
    if c.config.input is not None:
        return decompose_file(c)
    count = c.config.size("yeadon")
    exponents = sorted({1.0, 3.0} | ({c.config.p} - {2.0}))
    for p in exponents:
        name = f"decompose.yeadon.p={p:g}"

        def roundtrip(k: int, p=p, name=name):
            y, T = _yeadon_case(c, name, k, p)
            deviation = verify_isometry(T, trials=20, seed=k, tol=c.tol).max_rel_deviation
            found = decompose_isometry(T, trials=20, seed=k, tol=c.tol)
            recovered = max(
                y.w.distance(found.w),
                y.B.distance(found.B),
                y.J.superoperator.distance(found.J.superoperator),
            )
            return deviation, recovered

        results = c.gather(roundtrip, count)
        c.check(f"{name}.isometry", lambda: worst(results, 0))
        c.check(f"{name}.recovery", lambda: worst(results, 1), scale=10)

    def l1_paths(k: int):
        rng = c.rng("decompose.l1", k)
        T = construct_typical(random_typical_triple(_random_case(rng), rng, 1.0, c.tol), c.tol)
        direct = decompose_l1(T, trials=20, seed=k, tol=c.tol)
        via_yeadon = yeadon_to_typical(decompose_isometry(T, trials=20, seed=k, tol=c.tol), c.tol)
        return max(
            direct.w.distance(via_yeadon.w),
            direct.J.superoperator.distance(via_yeadon.J.superoperator),
            direct.P.map.distance(via_yeadon.P.map),
        )

    c.check("decompose.l1_paths_agree", lambda: worst(c.gather(l1_paths, c.config.size("l1"))), scale=10)

    def orthogonality():
        worst = 0.0
        for k in range(min(c.config.trials, 20)):
            _, T = _yeadon_case(c, "decompose.orthogonality", k, c.config.p)
            worst = max(worst, check_orthogonality_preservation(T, trials=10, seed=k, tol=c.tol))
        return worst

    c.check("decompose.orthogonality_preserved", orthogonality, scale=10)


def decompose_file(c: Campaign):
    T = decode_linear_map(read_json(c.config.input))
    c.check("decompose.isometry",
            lambda: verify_isometry(T, c.config.trials, c.config.seed, c.config.workers, c.tol).max_rel_deviation)
    outcome = {}

    def run():
        y = decompose_isometry(T, seed=c.config.seed, tol=c.tol)
        outcome["yeadon"] = encode_yeadon(y)
        outcome["typical"] = encode_typical(yeadon_to_typical(y, c.tol))
        return construct_yeadon(y, c.tol).distance(T)

    record = c.check("decompose.reconstruction", run, scale=10)
    if record.passed:
        _emit(c, outcome)


def construct_suite(c: Campaign):
    if c.config.input is not None:
        return construct_file(c)
    p = c.config.p

    def agreement(k: int):
        rng = c.rng("construct.agreement", k)
        J = _random_case(rng)
        t = random_typical_triple(J, rng, p, c.tol)
        typical = construct_typical(t, c.tol)
        yeadon = construct_yeadon(typical_to_yeadon(t, c.tol), c.tol)
        embedding = symmetric_embedding(J, t.P, random_state(J.source, rng), p, c.tol)
        symmetric = LinearMap.from_function(J.source, J.target, lambda x: t.w @ embedding(x), p=p)
        mixed = int(any(s.mode is Mode.ANTI for s in J.slots) and any(s.mode is Mode.MULT for s in J.slots))
        return max(typical.distance(yeadon), typical.distance(symmetric), yeadon.distance(symmetric)), mixed

    results = c.gather(agreement, c.config.size("agreement"))
    c.check("construct.three_way_agreement", lambda: (
        worst(results, 0), {"configurations": len(results), "mixed_slots": sum(r[1] for r in results if r is not None)}
    ))

    def isometric():
        worst = 0.0
        for k in range(min(c.config.size("agreement"), 10)):
            rng = c.rng("construct.isometry", k)
            T = construct_typical(random_typical_triple(_random_case(rng), rng, p, c.tol), c.tol)
            worst = max(worst, verify_isometry(T, trials=20, seed=k, workers=1, tol=c.tol).max_rel_deviation)
        return worst

    c.check("construct.isometry", isometric)


def construct_file(c: Campaign):
    triple = decode_triple(read_json(c.config.input))
    outcome = {}

    def run():
        T = construct_yeadon(triple, c.tol) if isinstance(triple, YeadonTriple) else construct_typical(triple, c.tol)
        outcome["map"] = encode_superoperator(T)
        return verify_isometry(T, c.config.trials, c.config.seed, c.config.workers, c.tol).max_rel_deviation

    record = c.check("construct.isometry", run)
    if record.passed:
        _emit(c, outcome["map"])


def _emit(c: Campaign, payload):
    """Write a produced artifact to --out, or attach it to the last record."""
    if c.config.output is not None:
        write_json(payload, c.config.output)
        logger.info(f"Wrote {c.config.output}")
    else:
        last = c.report.checks[-1]
        c.report.checks[-1] = replace(last, witness=payload)


# Positive projections


def _projection_case(c: Campaign, name: str, k: int):
    rng = c.rng(name, k)
    J = _random_case(rng)
    F, S, P = random_projection_data(J, rng, c.tol)
    return J, F, S, P, rng


def factor_suite(c: Campaign):
    def roundtrip(k: int):
        J, F, S, P, rng = _projection_case(c, "factor", k)
        fac = factor_projection(P, c.tol)
        recovered = max(
            fac.conditional_expectation.map.distance(F.map),
            max(abs(a - b) for a, b in zip(fac.symmetrizer.values, S.values)),
            fac.reconstruction_residual,
        )
        ce = check_conditional_expectation(F, samples=20, rng=rng)
        laws = max(ce.idempotence, ce.unit, ce.bimodule, ce.positivity, ce.state)
        return recovered, laws, verify_jordan_mono(J, c.tol).jordan_product_residual

    results = c.gather(roundtrip, c.config.size("factor"))
    c.check("factor.roundtrip", lambda: worst(results, 0))
    c.check("factor.conditional_expectation_laws", lambda: worst(results, 1), scale=10)
    c.check("factor.jordan_maps", lambda: worst(results, 2))


def stormer_suite(c: Campaign):
    def identities(k: int):
        J, F, S, P, rng = _projection_case(c, "factor", k)
        stormer = check_stormer(P, samples=10, rng=rng, tol=c.tol)
        projection = check_positive_projection(P, samples=20, rng=rng)
        return (
            max(stormer.norm, stormer.jordan_bimodule, stormer.compression, stormer.relative_commutant),
            max(projection.idempotence, projection.fixes_image, projection.support, projection.positivity),
        )

    results = c.gather(identities, c.config.size("factor"))
    c.check("stormer.identities", lambda: worst(results, 0), scale=10)
    c.check("stormer.positive_projection_laws", lambda: worst(results, 1), scale=10)


# Modular theory


def _modular_algebra(k: int) -> AlgebraDescriptor:
    return (AlgebraDescriptor.of(2), AlgebraDescriptor.of(3), AlgebraDescriptor.of(2, 1, weights=(1.0, 0.5)))[k % 3]


def modular_suite(c: Campaign):
    count = c.config.size("modular")

    def identities(k: int):
        rng = c.rng("modular", k)
        algebra = _modular_algebra(k)
        phi, psi, omega = (random_state(algebra, rng) for _ in range(3))
        ctx = ModularContext(algebra, phi, tol=c.tol)
        x, a, b = (random_element(algebra, rng) for _ in range(3))
        s, t = rng.uniform(-2, 2, size=2)
        algebraic = max(
            group_law_residual(ctx, s, t, x),
            cosine_law_residual(ctx, s, t, x),
            kms_symmetry_residual(ctx, t, a, b),
            phi_identity_residual(ctx, x),
            cocycle_residual(phi, psi, s, t, c.tol),
            chain_rule_residual(phi, psi, omega, t, c.tol),
        )
        quadrature = max(
            phi_transform(ctx, x).distance(phi_transform_quadrature(ctx, x)),
            abs(self_polar_form(ctx, a, b) - self_polar_integral(ctx, a, b)),
        )
        alpha = JordanMono.transpose(algebra).with_conjugator(random_unitary(algebra, rng))
        anti = check_anticocycle(alpha, phi, psi, 0.7, c.tol)
        return algebraic, quadrature, max(anti.cocycle, anti.modular)

    results = c.gather(identities, count)
    c.check("modular.algebraic_identities", lambda: worst(results, 0))
    c.check("modular.quadrature", lambda: worst(results, 1), scale=1e3)
    c.check("modular.anticocycle", lambda: worst(results, 2))

    def centralizer(k: int):
        rng = c.rng("modular.centralizer", k)
        algebra = _modular_algebra(k)
        phi = random_state(algebra, rng)
        inside = check_centralizer(phi, commutant([phi.d], algebra, c.tol), c.tol)
        everything = check_centralizer(phi, commutant([algebra.identity()], algebra, c.tol), c.tol)
        return inside, shortfall(1e-3, everything)

    results = c.gather(centralizer, count)
    c.check("modular.centralizer", lambda: worst(results, 0))
    c.check("modular.centralizer_negative_control", lambda: worst(results, 1))

    def cocycles(k: int):
        rng = c.rng("modular.cocycles", k)
        J = _random_case(rng)
        _, _, P = _trace_projection(J, rng, c.tol)
        phi, psi = random_state(J.source, rng), random_state(J.source, rng)
        absolute = check_cocycle_absolute_value(J, P, phi, psi, c.tol)
        inclusion = JordanMono(J.source, J.target, tuple(replace(s, mode=Mode.MULT) for s in J.slots), J.conjugator)
        E = trace_ce(J.target, image_bicommutant(inclusion, c.tol), c.tol)
        return max(absolute, check_ce_cocycle(E, inclusion, phi, psi, float(rng.uniform(-2, 2)), c.tol))

    c.check("modular.cocycle_relations", lambda: worst(c.gather(cocycles, count)), scale=10)


def hs_suite(c: Campaign):
    count = c.config.size("hs")

    def positive(k: int):
        rng = c.rng("hs.positive", k)
        J = _random_case(rng, padding=False)
        _, _, P = _trace_projection(J, rng, c.tol)
        psi = _pushed_state(J, P, random_state(J.source, rng))
        report = check_hs_conditions(J, psi, c.tol)
        if report.projection is None:
            return math.inf
        return max(report.condition_selfpolar, report.condition_cosine, report.condition_state,
                   report.projection.map.distance(P.map))

    def negative(k: int):
        rng = c.rng("hs.negative", k)
        report = check_hs_conditions(JordanMono.doubling(), random_state(AlgebraDescriptor.of(4), rng), c.tol)
        found = 0.0 if report.projection is None else 1.0
        return shortfall(1e-3, max(report.condition_selfpolar, report.condition_cosine)) + found

    def doubling_example():
        J = JordanMono.doubling()
        report = check_hs_conditions(J, StateDensity.trace_state(J.target).normalized(), c.tol)
        F = trace_ce(J.target, image_bicommutant(J, c.tol), c.tol)
        expected = build_positive_projection(J, F, Symmetrizer.uniform(J, 0.5), c.tol)
        if report.projection is None:
            return math.inf
        return max(report.condition_selfpolar, report.condition_cosine, report.condition_state,
                   report.projection.map.distance(expected.map))

    c.check("hs.positive_cases", lambda: worst(c.gather(positive, count)), scale=10)
    c.check("hs.negative_cases", lambda: worst(c.gather(negative, count)))
    c.check("hs.doubling_trace_state", doubling_example, scale=10)


# Extension property on M2


def ep_m2_suite(c: Campaign):
    p = c.config.p
    default = c.config.input is None
    rho = BlochCFM(2.0, {"x^3": 0.5}, p) if default else decode_cfm(read_json(c.config.input))
    trials = c.config.size("cfm")

    def axioms():
        report = cfm_check_axioms(rho, trials, c.config.seed)
        residual = max(report.homogeneity, report.orthogonal_additivity, report.continuity, report.nonnegativity)
        return residual, report.as_dict()

    c.check("ep.axioms", axioms, scale=10)

    def witness():
        found = nonlinearity_witness(rho, p, c.tol)
        h1, h2 = bloch_projection([1, 0, 0]), bloch_projection([0, 0, 1])
        payload = {
            "h1": encode_element(h1),
            "h2": encode_element(h2),
            "gap": found.derived_gap,
            "grid_gap": found.gap,
            "grid_pair": [encode_element(found.h1), encode_element(found.h2)],
        }
        return (abs(found.derived_gap - 0.25) if default else 0.0), payload

    c.check("ep.witness", witness)
    c.check("ep.no_linear_extension", lambda: shortfall(0.05, fit_linear(rho, p).residual))

    even = SphereCFM(lambda n: 1.0 + 0.5 * n[..., 0] ** 2, p)
    c.check("ep.even_term_negative_control",
            lambda: shortfall(1e-3, cfm_check_axioms(even, 20, c.config.seed).orthogonal_additivity))

    m3 = AlgebraDescriptor.of(3)

    def functional(k: int):
        rng = c.rng("ep.functional", k)
        eta = random_positive_definite(m3, rng, 0.05)
        rho3 = cfm_from_functional(eta, p)
        fit = fit_linear(rho3, p)
        report = cfm_check_axioms(rho3, 20, k)
        return max(fit.residual, fit.eta.distance(eta)), max(
            report.homogeneity, report.orthogonal_additivity, report.continuity, report.nonnegativity)

    results = c.gather(functional, c.config.size("functional_fit"))
    c.check("ep.m3_functionals_fit", lambda: worst(results, 0))
    c.check("ep.m3_functional_axioms", lambda: worst(results, 1))


# Paving


def paving_suite(c: Campaign):
    algebra = AlgebraDescriptor.of(4)

    def chain_for(rng):
        u = random_unitary_matrix(rng, 4)
        return u, [algebra.element([u[:, :k] @ u[:, :k].conj().T]) for k in range(1, 5)]

    def demo(k: int):
        rng = c.rng("paving", k)
        u, chain = chain_for(rng)
        generic = paving_demo(algebra, chain, random_state(algebra, rng), random_element(algebra, rng), c.tol)
        weights = rng.uniform(0.1, 1.0, size=4)
        commuting = StateDensity(algebra, algebra.element([(u * (weights / weights.sum())) @ u.conj().T]))
        aligned = paving_demo(algebra, chain, commuting, tol=c.tol)
        return (
            max(generic.terminal, aligned.terminal),
            float(not generic.mass_monotone),
            float(not aligned.distance_monotone),
            int(generic.distance_monotone),
        )

    results = c.gather(demo, c.config.size("paving"))
    c.check("paving.terminal", lambda: worst(results, 0), threshold=1e-12)
    c.check("paving.mass_defect_monotone", lambda: (
        total(results, 1),
        {"distance_monotone_states": sum(r[3] for r in results if r is not None), "states": len(results)},
    ))
    c.check("paving.commuting_distance_monotone", lambda: total(results, 2))

    def rejects_decreasing():
        rng = c.rng("paving.negative", 0)
        _, chain = chain_for(rng)
        try:
            paving_demo(algebra, chain[::-1], random_state(algebra, rng), tol=c.tol)
        except NotIncreasing:
            return 0.0
        return 1.0

    c.check("paving.rejects_decreasing_chain", rejects_decreasing)


def full_suite(c: Campaign):
    inner = Campaign(replace(c.config, input=None, output=None), c.report)
    for command in ("clarkson", "decompose", "construct", "stormer", "factor", "modular", "hs-check", "ep-m2",
                    "paving"):
        logger.info(f"Suite: running {command}")
        COMMANDS[command](inner)


COMMANDS: dict[str, Callable[[Campaign], None]] = {
    "clarkson": clarkson_suite,
    "decompose": decompose_suite,
    "construct": construct_suite,
    "stormer": stormer_suite,
    "modular": modular_suite,
    "hs-check": hs_suite,
    "factor": factor_suite,
    "ep-m2": ep_m2_suite,
    "paving": paving_suite,
    "suite": full_suite,
}


def run(config: RunConfig) -> Report:
    """Run the campaign for config.command; the report passes when every check does."""
    report = Report(config)
    campaign = Campaign(config, report)
    COMMANDS[config.command](campaign)
    logger.info(f"{config.command}: {sum(r.passed for r in report.checks)}/{len(report.checks)} checks passed")
    return report
