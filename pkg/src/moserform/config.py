"""Problem configuration: JSON document, schema validation, engine objects."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import jsonschema

from .errors import ConfigurationError
from .normalizer import NormalizerConfig
from .pqseries import MoserHamiltonian, PQSeries
from .timecoeff import ExpPoly, RateBasis

_NUMBER = {"type": "number"}
_POSITIVE = {"type": "number", "exclusiveMinimum": 0}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["omega", "mode", "radius", "trunc_degree", "perturbation"],
    "properties": {
        "omega": _POSITIVE,
        "mode": {"enum": ["aperiodic", "strong"]},
        "decay_rate": _POSITIVE,
        "radius": _POSITIVE,
        "trunc_degree": {"type": "integer", "minimum": 3},
        "max_steps": {"type": "integer", "minimum": 0},
        "d_policy": {"enum": ["certified", "empirical"]},
        "d_value": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 0.5},
        "perturbation": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["alpha", "coeff"],
                "properties": {
                    "alpha": {"type": "array", "items": {"type": "integer", "minimum": 0},
                              "minItems": 2, "maxItems": 2},
                    "coeff": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "additionalProperties": False,
                            "required": ["amp_re", "rate"],
                            "properties": {
                                "amp_re": _NUMBER,
                                "amp_im": _NUMBER,
                                "tpow": {"type": "integer", "minimum": 0},
                                "rate": {
                                    "type": "object",
                                    "additionalProperties": False,
                                    "required": ["i", "j"],
                                    "properties": {"i": {"type": "integer"}, "j": {"type": "integer"}},
                                },
                            },
                        },
                    },
                },
            },
        },
        "verify": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "T": _POSITIVE,
                "tol": _POSITIVE,
                "starts": {"type": "array", "items": {"type": "array", "items": _NUMBER,
                                                      "minItems": 2, "maxItems": 2}},
                "radii": {"type": "array", "items": _POSITIVE},
                "max_error": _POSITIVE,
                "residual_samples": {"type": "integer", "minimum": 1},
                "residual_max": _POSITIVE,
            },
        },
    },
}


@dataclass
class CoeffTerm:
    amp: complex
    tpow: int
    rate: tuple  # (i, j): rate -i*a + j*omega


@dataclass
class MonomialSpec:
    alpha: tuple
    coeff: list


@dataclass
class VerifyConfig:
    T: float = 3.0
    tol: float = 1e-10
    starts: list = field(default_factory=list)
    radii: list = field(default_factory=list)
    max_error: float = 1e-6
    residual_samples: int = 200
    residual_max: float = 1e-10


@dataclass
class ProblemConfig:
    """Validated problem description.

    Rates are given on the integer lattice ``-i*a + j*omega``; ``a`` is the
    decay rate and is optional in aperiodic mode as long as no rate uses it.
    """

    omega: float
    mode: str
    radius: float
    trunc_degree: int
    perturbation: list
    decay_rate: float | None = None
    max_steps: int = 8
    d_policy: str = "empirical"
    d_value: float = 0.1
    verify: VerifyConfig | None = None

    def basis(self) -> RateBasis:
        return RateBasis.for_problem(self.omega, self.decay_rate)

    def rate_value(self, rate: tuple) -> float:
        i, j = rate
        return -i * (self.decay_rate or 0.0) + j * self.omega

    def perturbation_series(self) -> PQSeries:
        basis = self.basis()
        coeffs: dict = {}
        for mono in self.perturbation:
            c = ExpPoly.zero(basis)
            for term in mono.coeff:
                c = c + ExpPoly.term(basis, term.amp, term.tpow, basis.rate(*term.rate))
            coeffs[mono.alpha] = coeffs[mono.alpha] + c if mono.alpha in coeffs else c
        return PQSeries(coeffs, self.trunc_degree, basis)

    def hamiltonian(self) -> MoserHamiltonian:
        return MoserHamiltonian.from_perturbation(self.perturbation_series(), self.omega)

    def normalizer_config(self) -> NormalizerConfig:
        return NormalizerConfig(
            trunc_degree=self.trunc_degree, radius=self.radius, mode=self.mode, max_steps=self.max_steps,
            d_policy=self.d_policy, d_value=self.d_value, decay_rate=self.decay_rate,
        )


def _path(err: jsonschema.ValidationError) -> str:
    return "/" + "/".join(str(x) for x in err.absolute_path)


def _semantic_errors(doc: dict) -> list:
    errors = []
    mode, a, omega = doc.get("mode"), doc.get("decay_rate"), doc.get("omega")
    if mode == "strong" and a is None:
        errors.append({"path": "/decay_rate", "message": "strong mode requires decay_rate"})
    for k, mono in enumerate(doc.get("perturbation", [])):
        alpha = mono.get("alpha", [])
        if len(alpha) == 2 and sum(alpha) < 3:
            errors.append({"path": f"/perturbation/{k}/alpha",
                           "message": f"degree >= 3 required, got |alpha| = {sum(alpha)}"})
        for m, term in enumerate(mono.get("coeff", [])):
            rate = term.get("rate", {})
            i, j = rate.get("i", 0), rate.get("j", 0)
            where = f"/perturbation/{k}/coeff/{m}/rate"
            if i and a is None:
                errors.append({"path": where, "message": "rate uses the decay rate but decay_rate is not set"})
                continue
            if mode == "strong" and isinstance(omega, (int, float)) and a is not None:
                value = -i * a + j * omega
                if not value < 0:
                    errors.append({"path": where,
                                   "message": f"strong mode requires a decaying rate, got {value:g}"})
    return errors


def validate(doc) -> list:
    """All schema and semantic violations of ``doc`` (empty when valid)."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = [{"path": _path(e), "message": e.message}
              for e in sorted(validator.iter_errors(doc), key=lambda e: (list(map(str, e.absolute_path)), e.message))]
    if isinstance(doc, dict):
        errors += _semantic_errors(doc)
    return errors


def config_from_dict(doc: dict) -> ProblemConfig:
    errors = validate(doc)
    if errors:
        exc = ConfigurationError(f"{len(errors)} configuration error(s)")
        exc.errors = errors
        raise exc
    perturbation = [
        MonomialSpec(tuple(m["alpha"]), [
            CoeffTerm(complex(t["amp_re"], t.get("amp_im", 0.0)), t.get("tpow", 0),
                      (t["rate"]["i"], t["rate"]["j"]))
            for t in m["coeff"]
        ])
        for m in doc["perturbation"]
    ]
    verify = VerifyConfig(**{k: v for k, v in doc["verify"].items()}) if "verify" in doc else None
    return ProblemConfig(
        omega=float(doc["omega"]), mode=doc["mode"], radius=float(doc["radius"]),
        trunc_degree=doc["trunc_degree"], perturbation=perturbation, decay_rate=doc.get("decay_rate"),
        max_steps=doc.get("max_steps", 8), d_policy=doc.get("d_policy", "empirical"),
        d_value=doc.get("d_value", 0.1), verify=verify,
    )


def parse_config(text: str) -> ProblemConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        exc = ConfigurationError(f"invalid JSON: {err}")
        exc.errors = [{"path": "/", "message": str(err)}]
        raise exc from None
    return config_from_dict(doc)
