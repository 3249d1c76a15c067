"""Configuration, preset catalog, suite orchestration and reports.

A config is a JSON document; every field value, complex constants included,
is written as an expression string of the field language.
"""
from __future__ import annotations

import copy
import hashlib
import json
import math
import time
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import dirac as D
from . import gauge as G
from .checks import ResidualTracker
from .fieldlang import ChartBox, FieldLangError, MatrixField2, ParseError, parse_scalar_expr
from .fieldlang import expr as E
from .fieldlang.expr import EvaluationError
from .geometry import (
    STANDARD_BASIS,
    GeometryError,
    adjugate_frame_relation,
    christoffel_at,
    christoffel_fd,
    clifford_residual,
    contraction_residual,
    frame_at,
    geometry_at,
    max_norm,
    metric_at,
    orthonormality_residual,
    pauli_sandwich_residuals,
    sigma_jet,
    sigma_jet_fd,
)
from .operator_core import (
    OperatorError,
    RawOperator,
    check_nondegenerate,
    check_selfadjoint,
    reconstruct,
    subprincipal_symbol,
)

REPORT_VERSION = 1

SUITES = (
    "selfadjoint",
    "nondegenerate",
    "metric",
    "clifford",
    "sandwich",
    "f_covariance",
    "f_homogeneity",
    "csub_laws",
    "potential_gauge",
    "adjugation",
    "lorentz",
    "theorem1",
    "appendixE",
    "bispinor",
    "oracle_fd",
)

ALGEBRAIC, DERIVATIVE, MIXED = 1e-10, 1e-8, 1e-6
DEFAULT_TOLERANCES = {
    "selfadjoint": ALGEBRAIC,
    "nondegenerate": 1e8,
    "metric": ALGEBRAIC,
    "clifford": ALGEBRAIC,
    "sandwich": ALGEBRAIC,
    "f_covariance": DERIVATIVE,
    "f_homogeneity": 1e-9,
    "csub_laws": DERIVATIVE,
    "potential_gauge": DERIVATIVE,
    "adjugation": 1e-9,
    "lorentz": DERIVATIVE,
    "theorem1": DERIVATIVE,
    "appendixE": DERIVATIVE,
    "bispinor": DERIVATIVE,
    "oracle_fd": MIXED,
}

GAUGE_ALIASES = {"scalar_psi": "psi", "phase_phi": "phi", "sl2c_R": "sl2c", "gl2c_Q": "gl2c"}
NEGATIVE_CONTROLS = ("flip_csub",)


class ConfigError(ValueError):
    """Schema or validation failure; the message starts with the offending block."""


# config


@dataclass(eq=False)
class VerificationConfig:
    name: str
    op: RawOperator
    chart: ChartBox
    gauges: list
    mass_values: list
    suites: list
    tolerances: dict
    seed: int
    p_per_x: int
    test_bispinor: tuple
    negative_control: Optional[str]
    declared_A: Optional[Callable] = None
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def digest(self) -> str:
        canonical = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()


def _expr(value, where: str) -> E.Expr:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return E.const(value)
    if not isinstance(value, str):
        raise ConfigError(f"{where}: expected an expression string, got {type(value).__name__}")
    try:
        return parse_scalar_expr(value)
    except ParseError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _matrix(value, where: str) -> MatrixField2:
    if not (isinstance(value, list) and len(value) == 2 and all(isinstance(r, list) and len(r) == 2 for r in value)):
        raise ConfigError(f"{where}: expected a 2x2 nested list of expressions")
    return MatrixField2(tuple(_expr(value[i][j], f"{where}[{i}][{j}]") for i in range(2) for j in range(2)))


def _matrices(value, where: str, n: int = 4) -> tuple:
    if not (isinstance(value, list) and len(value) == n):
        raise ConfigError(f"{where}: expected a list of {n} matrices")
    return tuple(_matrix(m, f"{where}[{k}]") for k, m in enumerate(value))


def _require_hermitian(m: MatrixField2, box: ChartBox, where: str, n: int = 20) -> None:
    for x in box.points(n, stream=995, margin=0.0):
        try:
            v = m.at(x)
        except EvaluationError as exc:
            raise ConfigError(f"{where}: {exc}") from exc
        if max_norm(v - v.conj().T) > 1e-10:
            raise ConfigError(f"{where}: not Hermitian at x = {[round(float(c), 6) for c in x]}")


def _chart(raw: dict, seed: int) -> ChartBox:
    block = raw.get("chart", {})
    if not isinstance(block, dict):
        raise ConfigError("chart: expected an object")
    try:
        return ChartBox(
            lo=tuple(block.get("lo", (-1.0,) * 4)),
            hi=tuple(block.get("hi", (1.0,) * 4)),
            seed=seed,
            sample_count=int(block.get("samples", 200)),
        )
    except (FieldLangError, TypeError, ValueError) as exc:
        raise ConfigError(f"chart: {exc}") from exc


def _operator(raw: dict, box: ChartBox):
    block = raw.get("operator")
    if not isinstance(block, dict):
        raise ConfigError("operator: missing or not an object")
    rho = _expr(raw.get("rho", "1"), "rho")
    flip = raw.get("negative_control") == "flip_csub"
    if "sigma" in block:
        sigma = _matrices(block["sigma"], "operator.sigma")
        for k, s in enumerate(sigma):
            _require_hermitian(s, box, f"operator.sigma[{k}]")
        if ("A" in block) == ("csub" in block):
            raise ConfigError("operator: give exactly one of 'A' or 'csub' alongside 'sigma'")
        if "A" in block:
            A = block["A"]
            if not (isinstance(A, list) and len(A) == 4):
                raise ConfigError("operator.A: expected four expressions")
            csub = MatrixField2.zero()
            for a, s in enumerate(sigma):
                csub = csub + s.scale(_expr(A[a], f"operator.A[{a}]"))
        else:
            csub = _matrix(block["csub"], "operator.csub")
            _require_hermitian(csub, box, "operator.csub")
        try:
            reference = reconstruct(sigma, csub, rho, box)
            op = reconstruct(sigma, -csub, rho) if flip else reference
        except (OperatorError, GeometryError, EvaluationError) as exc:
            raise ConfigError(f"operator.sigma: {exc}") from exc
        declared = (lambda x: G.extract_A_at(reference, x).A) if flip else None
        return op, declared
    if "P" in block and "Q" in block:
        if flip:
            raise ConfigError("negative_control: flip_csub needs the sigma form of the operator")
        return RawOperator(_matrices(block["P"], "operator.P"), _matrix(block["Q"], "operator.Q"), rho), None
    raise ConfigError("operator: expected 'sigma' with 'A'/'csub', or raw 'P' and 'Q'")


def _gauges(raw: dict, box: ChartBox) -> list:
    out = []
    for k, spec in enumerate(raw.get("gauges", [])):
        where = f"gauges[{k}]"
        if not isinstance(spec, dict) or "kind" not in spec:
            raise ConfigError(f"{where}: expected an object with 'kind'")
        kind = GAUGE_ALIASES.get(spec["kind"], spec["kind"])
        try:
            if kind in ("psi", "phi"):
                g = G.GaugeField(kind, _expr(spec.get("expr"), f"{where}.expr"))
            elif kind in ("sl2c", "gl2c"):
                g = G.GaugeField(kind, _matrix(spec.get("matrix"), f"{where}.matrix"))
            else:
                raise ConfigError(f"{where}: unknown gauge kind {spec['kind']!r}")
            g.validate(box, n=20)
        except (G.GaugeError, EvaluationError) as exc:
            raise ConfigError(f"{where}: {exc}") from exc
        out.append(g)
    return out


def config_from_dict(raw: dict) -> VerificationConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config: top level must be an object")
    raw = copy.deepcopy(raw)
    seed = raw.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ConfigError("seed: expected a non-negative integer")
    box = _chart(raw, seed)
    suites = raw.get("suites", list(SUITES))
    unknown = [s for s in suites if s not in SUITES]
    if unknown:
        raise ConfigError(f"suites: unknown suite(s) {unknown}")
    tolerances = dict(DEFAULT_TOLERANCES)
    for name, tol in raw.get("tolerances", {}).items():
        if name not in SUITES or not isinstance(tol, (int, float)) or tol <= 0:
            raise ConfigError(f"tolerances.{name}: expected a known suite with a positive number")
        tolerances[name] = float(tol)
    masses = raw.get("mass_values", [0.0, 1.0, 2.5])
    if not masses or any(not isinstance(m, (int, float)) or m < 0 for m in masses):
        raise ConfigError("mass_values: expected a non-empty list of non-negative numbers")
    control = raw.get("negative_control")
    if control is not None and control not in NEGATIVE_CONTROLS:
        raise ConfigError(f"negative_control: unknown control {control!r}")
    psi = raw.get("test_bispinor", list(D.DEFAULT_BISPINOR))
    if not (isinstance(psi, list) and len(psi) == 4):
        raise ConfigError("test_bispinor: expected four expressions")
    psi = tuple(_expr(v, f"test_bispinor[{k}]") for k, v in enumerate(psi))
    p_per_x = raw.get("p_per_x", 5)
    if not isinstance(p_per_x, int) or p_per_x < 1:
        raise ConfigError("p_per_x: expected a positive integer")
    op, declared = _operator(raw, box)
    try:
        op.validate(box, n=20)
    except (OperatorError, EvaluationError) as exc:
        raise ConfigError(f"rho: {exc}") from exc
    return VerificationConfig(
        name=str(raw.get("name", "unnamed")),
        op=op,
        chart=box,
        gauges=_gauges(raw, box),
        mass_values=[float(m) for m in masses],
        suites=list(suites),
        tolerances=tolerances,
        seed=seed,
        p_per_x=p_per_x,
        test_bispinor=psi,
        negative_control=control,
        declared_A=declared,
        raw=raw,
    )


def load_config(path, seed: int | None = None, samples: int | None = None) -> VerificationConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if isinstance(raw, dict):
        if seed is not None:
            raw["seed"] = seed
        if samples is not None:
            raw.setdefault("chart", {})["samples"] = samples
    return config_from_dict(raw)


# preset catalog

PSI_DEFAULT = "0.3*sin(x2) + 0.1*x4"
PHI_DEFAULT = "0.5*x1*x3 - 0.2*cos(x4)"
SL2C_TRIANGULAR = [["exp(0.2*x2)", "0.3*x1 + 0.2*i*x3"], ["0", "exp(-0.2*x2)"]]
SL2C_ROTATION = [["cos(0.4*x4)", "i*sin(0.4*x4)"], ["i*sin(0.4*x4)", "cos(0.4*x4)"]]
GL2C_DEFAULT = [["2 + 0.1*x1", "0.3*i"], ["0.1*x2", "1"]]

DEFAULT_GAUGES = [
    {"kind": "psi", "expr": PSI_DEFAULT},
    {"kind": "phi", "expr": PHI_DEFAULT},
    {"kind": "sl2c", "matrix": SL2C_TRIANGULAR},
    {"kind": "sl2c", "matrix": SL2C_ROTATION},
    {"kind": "gl2c", "matrix": GL2C_DEFAULT},
]


def _const_text(z: complex) -> str:
    return str(E.const(complex(z)))


def _standard_sigma() -> list:
    return [[[_const_text(v) for v in row] for row in m] for m in STANDARD_BASIS]


def _field_rows(fields) -> list:
    return [f.rows() for f in fields]


def _conjugated_basis(rows) -> list:
    R = MatrixField2.from_rows(rows)
    basis = [MatrixField2.constant(m) for m in STANDARD_BASIS]
    return _field_rows(G.conjugate_sigma(basis, R))


def _boost_rows(t: float) -> list:
    c, s = math.cosh(t / 2), math.sinh(t / 2)
    return [[_const_text(c), _const_text(s)], [_const_text(s), _const_text(c)]]


def _preset_operators() -> dict:
    sigma = _standard_sigma()
    conformal = [[[f"exp(2*(0.2*sin(x1) + 0.1*x3))*({v})" for v in row] for row in m] for m in sigma]
    curved = copy.deepcopy(sigma)
    curved[3] = [["1 + 0.1*sin(x1)", "0"], ["0", "1 + 0.1*sin(x1)"]]
    return {
        "minkowski": ({"sigma": sigma, "A": ["0", "0", "0", "0"]}, "1"),
        "conformal": ({"sigma": conformal, "A": ["0.1*x2", "0", "0.2*x1", "0.5"]}, "1 + 0.1*x1^2"),
        "em_wave": ({"sigma": sigma, "A": ["0", "0", "0", "0.7*cos(x1)"]}, "1"),
        "boosted": ({"sigma": _conjugated_basis(_boost_rows(0.6)), "A": ["0.2", "0", "0", "0.4"]}, "1"),
        "curved": ({"sigma": curved, "A": ["0", "0.3*cos(x3)", "0", "0.1*x1"]}, "exp(0.1*x3)"),
        "sl2c_xdep": (
            {"sigma": _conjugated_basis([["1 + 0.3*x1", "0.3*i*x1"], ["0.3*i*x1", "1 - 0.3*x1"]]),
             "A": ["0", "0", "0.2*sin(x2)", "0.3"]},
            "1",
        ),
    }


PRESETS = ("minkowski", "conformal", "em_wave", "boosted", "curved", "sl2c_xdep")


def preset_config(name: str) -> dict:
    """A catalog config as a plain JSON-ready dict."""
    operators = _preset_operators()
    if name not in operators:
        raise ConfigError(f"preset: unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    operator, rho = operators[name]
    return {
        "name": name,
        "operator": operator,
        "rho": rho,
        "chart": {"lo": [-1.0] * 4, "hi": [1.0] * 4, "samples": 200},
        "gauges": copy.deepcopy(DEFAULT_GAUGES),
        "mass_values": [0.0, 1.0, 2.5],
        "suites": list(SUITES),
        "tolerances": {},
        "seed": 0,
        "p_per_x": 5,
        "test_bispinor": list(D.DEFAULT_BISPINOR),
    }


def write_preset(name: str, path) -> None:
    Path(path).write_text(json.dumps(preset_config(name), indent=2) + "\n")


# suites


@dataclass(frozen=True)
class SuiteReport:
    suite: str
    status: str
    max_residual: float
    tolerance: float
    worst_x: Optional[tuple]
    worst_p: Optional[tuple]
    samples: int
    wall_time: float
    note: str = ""
    error: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.status == "PASS"

    def to_dict(self, timing: bool = True) -> dict:
        out = {
            "suite": self.suite,
            "status": self.status,
            "max_residual": self.max_residual if math.isfinite(self.max_residual) else None,
            "worst_point": {
                "x": None if self.worst_x is None else list(self.worst_x),
                "p": None if self.worst_p is None else list(self.worst_p),
            },
            "samples": self.samples,
        }
        if timing:
            out["wall_time_s"] = self.wall_time
        if self.error is not None:
            out["error"] = self.error
        return out


class _Context:
    """Shared per-run state: the config plus lazily derived fields."""

    def __init__(self, config: VerificationConfig):
        self.config = config
        self.op = config.op
        self.sigma = config.op.sigma_fields
        self.box = config.chart

    def stream(self, suite: str) -> int:
        return zlib.crc32(suite.encode())

    def points(self, suite: str, n: int | None = None):
        return self.box.points(n, stream=self.stream(suite))

    def rng(self, suite: str):
        return self.box.rng(self.stream(suite) + 1)

    def gauges(self, *kinds):
        return [g for g in self.config.gauges if g.kind in kinds]

    def declared_A(self, x):
        return None if self.config.declared_A is None else self.config.declared_A(x)


def _suite_selfadjoint(ctx: _Context, t: ResidualTracker):
    rep = check_selfadjoint(ctx.op, ctx.box, tol=np.inf, p_per_x=ctx.config.p_per_x)
    t.add(rep.max_residual, rep.worst_x, rep.worst_p)
    t.count(rep.samples)


def _suite_nondegenerate(ctx: _Context, t: ResidualTracker):
    rep = check_nondegenerate(ctx.op, ctx.box)
    t.add(rep.max_residual, rep.worst_x)
    t.count(rep.samples)


def _suite_metric(ctx: _Context, t: ResidualTracker):
    for x in ctx.points("metric"):
        pair = metric_at(ctx.sigma, x)
        wrong_sign = abs(pair.signature[0] - 3) + abs(pair.signature[1] - 1)
        frame = frame_at(ctx.sigma, x)
        t.add(wrong_sign, x)
        t.add(pair.path_residual, x)
        t.add(orthonormality_residual(frame, pair.g_cov), x)
        t.add(adjugate_frame_relation(ctx.sigma, x), x)
        t.count()


def _suite_clifford(ctx: _Context, t: ResidualTracker):
    rng = ctx.rng("clifford")
    for x in ctx.points("clifford"):
        for _ in range(ctx.config.p_per_x):
            p, q = rng.normal(size=4), rng.normal(size=4)
            t.add(clifford_residual(ctx.sigma, x, p, q), x, p)
        t.count()


def _suite_sandwich(ctx: _Context, t: ResidualTracker):
    rng = ctx.rng("sandwich")
    for x in ctx.points("sandwich"):
        P = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        t.add(max(pauli_sandwich_residuals(ctx.sigma, x, P)), x)
        t.count()


def _merge(t: ResidualTracker, reports: dict):
    for rep in reports.values():
        t.add(rep.max_residual, rep.worst_x, rep.worst_p)


def _suite_f_covariance(ctx: _Context, t: ResidualTracker):
    for R in ctx.gauges("sl2c"):
        conjugated = G.conjugate_sigma(ctx.sigma, R)
        for x in ctx.points("f_covariance"):
            t.add(G.f_condition_residual(ctx.sigma, R, x, conjugated), x)
            t.add(max(G.f_condition_pieces(ctx.sigma, R, x).values()), x)
            t.count()


def _suite_f_homogeneity(ctx: _Context, t: ResidualTracker):
    for g in ctx.gauges("psi"):
        factor = E.exp(E.mul(E.const(2), g.data))
        scaled = tuple(s.scale(factor) for s in ctx.sigma)
        for x in ctx.points("f_homogeneity"):
            t.add(G.f_homogeneity_residual(ctx.sigma, g.data, x, scaled), x)
            t.count()


def _suite_csub_laws(ctx: _Context, t: ResidualTracker):
    for g in ctx.config.gauges:
        transformed = G.gl_transform(ctx.op, g)
        for x in ctx.points("csub_laws"):
            t.add(G.subprincipal_law_residual(ctx.op, transformed, g, x), x)
            if g.kind != "gl2c":
                t.add(G.csub_law_residual(ctx.op, transformed, g, x), x)
            t.count()


def _suite_potential_gauge(ctx: _Context, t: ResidualTracker):
    for x in ctx.points("potential_gauge"):
        t.add(G.extract_A_at(ctx.op, x).residual, x)
        t.count()
    for g in ctx.gauges("psi", "phi", "sl2c"):
        transformed = G.gl_transform(ctx.op, g)
        for x in ctx.points("potential_gauge"):
            t.add(G.potential_law_residual(ctx.op, transformed, g, x), x)
            t.count()


def _suite_adjugation(ctx: _Context, t: ResidualTracker):
    rng = ctx.rng("adjugation")
    tilde = tuple(s.adj() for s in ctx.sigma)
    pairs = [D.adjugation_pair(ctx.op, g) for g in ctx.gauges("psi", "phi", "sl2c")]
    for x in ctx.points("adjugation"):
        t.add(D.involution_residual(ctx.op, x), x)
        t.add(G.f_anticommutation_residual(ctx.sigma, x, tilde), x)
        t.add(D.adjugate_symbol_gap(ctx.op, x), x)
        for pair in pairs:
            p = rng.normal(size=4)
            t.add(D.symbol_residual(*pair, x, p), x, p)
        t.count()


def _suite_lorentz(ctx: _Context, t: ResidualTracker):
    rng = ctx.rng("lorentz")
    for R in ctx.gauges("sl2c"):
        pair = D.lorentz_pair(ctx.op, R)
        for x in ctx.points("lorentz"):
            lam, _ = G.lorentz_matrix(R, ctx.sigma, x)
            t.add(G.lorentz_residual(lam, 1.0), x)
            lam_adj, _ = G.lorentz_matrix(None, ctx.sigma, x, adjugation=True)
            t.add(G.lorentz_residual(lam_adj, -1.0), x)
            for m in ctx.config.mass_values:
                p = rng.normal(size=4)
                t.add(D.lorentz_residual_at(ctx.op, R, m, x, p, pair), x, p)
            t.count()


def _suite_main_identity(ctx: _Context, t: ResidualTracker):
    rng = ctx.rng("theorem1")
    for x in ctx.points("theorem1"):
        point = D.MainIdentityPoint(ctx.op, x, ctx.declared_A(x))
        for _ in range(ctx.config.p_per_x):
            p = rng.normal(size=4)
            for m in ctx.config.mass_values:
                t.add(point.residual(p, m), x, p)
        t.count()


def _suite_contraction_identity(ctx: _Context, t: ResidualTracker):
    for x in ctx.points("appendixE"):
        snap = geometry_at(ctx.sigma, x)
        t.add(D.contraction_identity_residual(ctx.sigma, x, snap=snap), x)
        t.add(D.contraction_identity_residual(ctx.sigma, x, tilde=True, snap=snap), x)
        t.add(contraction_residual(snap), x)
        t.count()


def _suite_bispinor(ctx: _Context, t: ResidualTracker):
    check = D.BispinorCheck(ctx.op, ctx.config.test_bispinor)
    for x in ctx.points("bispinor"):
        A = ctx.declared_A(x)
        check.A = A
        for m in ctx.config.mass_values:
            t.add(check.residual(x, m), x)
        t.count()


def _suite_oracle_fd(ctx: _Context, t: ResidualTracker):
    """Symbolic derivatives against finite differences in every derivative-bearing formula."""
    rng = ctx.rng("oracle_fd")
    tilde = tuple(s.adj() for s in ctx.sigma)
    op = ctx.op
    for x in ctx.points("oracle_fd"):
        t.add(max_norm(sigma_jet(ctx.sigma, x)[1] - sigma_jet_fd(ctx.sigma, x)), x)
        t.add(max_norm(christoffel_at(ctx.sigma, x) - christoffel_fd(ctx.sigma, x)), x)
        t.add(max_norm(G.f_at(ctx.sigma, x) - G.f_from_bracket(ctx.sigma, x, derivatives="fd")), x)
        t.add(max_norm(G.f_at(tilde, x) - G.f_from_bracket(tilde, x, derivatives="fd")), x)
        t.add(max_norm(subprincipal_symbol(op, x) - _subprincipal_fd(op, x)), x)
        sym, fd = D.spin_connection_at(ctx.sigma, x), D.spin_connection_fd(ctx.sigma, x)
        t.add(max(max_norm(sym.omega - fd.omega), max_norm(sym.omega_tilde - fd.omega_tilde)), x)
        p = rng.normal(size=4)
        A = G.extract_A_at(op, x).A
        t.add(
            max_norm(
                D.traditional_dirac_full_symbol(ctx.sigma, A, 1.0, x, p)
                - D.traditional_dirac_full_symbol(ctx.sigma, A, 1.0, x, p, derivatives="fd")
            ),
            x,
            p,
        )
        t.count()


def _subprincipal_fd(op: RawOperator, x) -> np.ndarray:
    from .fieldlang.calculus import richardson_central

    P = np.stack([q.at(x) for q in op.P])
    div = sum(richardson_central(op.P[a].at, x, a) for a in range(4))
    rho = lambda y: np.log(op.rho_at(y))  # noqa: E731
    grad = np.array([richardson_central(rho, x, a) for a in range(4)])
    return op.Q.at(x) - 0.5 * div - 0.5 * np.einsum("a,aij->ij", grad, P)


SUITE_RUNNERS = {
    "selfadjoint": _suite_selfadjoint,
    "nondegenerate": _suite_nondegenerate,
    "metric": _suite_metric,
    "clifford": _suite_clifford,
    "sandwich": _suite_sandwich,
    "f_covariance": _suite_f_covariance,
    "f_homogeneity": _suite_f_homogeneity,
    "csub_laws": _suite_csub_laws,
    "potential_gauge": _suite_potential_gauge,
    "adjugation": _suite_adjugation,
    "lorentz": _suite_lorentz,
    "theorem1": _suite_main_identity,
    "appendixE": _suite_contraction_identity,
    "bispinor": _suite_bispinor,
    "oracle_fd": _suite_oracle_fd,
}

SUITE_ERRORS = (GeometryError, OperatorError, G.GaugeError, EvaluationError, np.linalg.LinAlgError, ValueError)


def run_suite(ctx: _Context, name: str) -> SuiteReport:
    tracker = ResidualTracker()
    tol = ctx.config.tolerances[name]
    start = time.perf_counter()
    error = None
    try:
        SUITE_RUNNERS[name](ctx, tracker)
    except SUITE_ERRORS as exc:
        error = f"{type(exc).__name__}: {exc}"
        tracker.add(float("inf"))
    elapsed = time.perf_counter() - start
    note = "" if tracker.samples or error else "no applicable samples"
    passed = error is None and tracker.max_residual <= tol
    return SuiteReport(
        suite=name,
        status="PASS" if passed else "FAIL",
        max_residual=tracker.max_residual,
        tolerance=tol,
        worst_x=tracker.worst_x,
        worst_p=tracker.worst_p,
        samples=tracker.samples,
        wall_time=elapsed,
        note=note,
        error=error,
    )


def run_suites(config: VerificationConfig, suites=None) -> list[SuiteReport]:
    names = list(config.suites if suites is None else suites)
    unknown = [s for s in names if s not in SUITES]
    if unknown:
        raise ConfigError(f"suites: unknown suite(s) {unknown}")
    ctx = _Context(config)
    return [run_suite(ctx, name) for name in names]


def _ordered(reports) -> list[SuiteReport]:
    return sorted(reports, key=lambda r: (r.passed, r.suite))


def emit_report(reports, fmt: str = "text", config: VerificationConfig | None = None, timing: bool = True) -> str:
    """Failures first, then by suite name; JSON fields in a fixed order."""
    if not reports:
        raise ValueError("no reports to emit")
    ordered = _ordered(reports)
    if fmt == "json":
        doc = {
            "version": REPORT_VERSION,
            "config_digest": None if config is None else config.digest,
            "seed": None if config is None else config.seed,
            "suites": [r.to_dict(timing) for r in ordered],
        }
        return json.dumps(doc, indent=2) + "\n"
    if fmt != "text":
        raise ValueError(f"unknown report format {fmt!r}")
    lines = []
    if config is not None:
        lines.append(f"config {config.name}  seed {config.seed}  digest {config.digest[:12]}")
    for r in ordered:
        shown = "error" if r.error else f"{r.max_residual:.3e}"
        line = f"{r.status:4}  {r.suite:15} max_residual {shown:>10}  tol {r.tolerance:.1e}  samples {r.samples:5d}  {r.wall_time:6.2f}s"
        if r.error:
            line += f"  [{r.error}]"
        elif r.note:
            line += f"  [{r.note}]"
        lines.append(line)
    passed = sum(r.passed for r in reports)
    lines.append(f"{passed}/{len(reports)} suites passed")
    return "\n".join(lines) + "\n"


def exit_code(reports) -> int:
    return 0 if all(r.passed for r in reports) else 1
