"""Scenario description and the scenario-file format.

A scenario file is a YAML document.  Complex entries are written as numbers,
as strings such as ``"1-0.5i"`` or ``"2i"``, or as ``[re, im]`` pairs; matrices
are row-major lists of rows.  Time-dependent operators use one of the tags::

    [[...], ...]                        constant matrix
    identity | zero                     constant identity / zero matrix
    {constant: M}
    {polynomial: [M0, M1, ...]}         M0 + M1 t + M2 t^2 + ...
    {expm: {generator: K, left: L, right: R}}   L expm(K t) R
    {sum: [op, op, ...]}
    {samples: [M(t_0), M(t_1), ...]}    sampled data, no closed form

Strategy three takes ``reference: standard | stationary | hermitian_root``, a
constant unitary matrix, or ``{textbook: op, omega0: M}``: the auxiliary basis
carried by the Hermitian ``op`` and aligned so that ``Omega(t_0) = M``.

Example (non-stationary 2x2 model, Coriolis input)::

    name: fix-b
    dim: 2
    grid: {start: 0, end: 1, samples: 1001}
    input_kind: two
    sigma: [[0, 0], [0, "1i"]]
    ansatz: [[0, 2], [2, 0]]
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml
from scipy.linalg import expm

from ..errors import InvalidScenario, NipError
from ..operators import OperatorFamily, uniform_grid
from ..spectral import BiorthonormalSystem, extract_kappa, solve_biorthogonal
from ..strategy_three import initial_dyson_alignment, textbook_reference
from .ground_truth import GroundTruthBundle, generate_ground_truth

__all__ = [
    "Scenario",
    "parse_complex",
    "parse_matrix",
    "parse_operator",
    "load_scenario",
    "scenario_from_dict",
    "INPUT_KINDS",
]

INPUT_KINDS = ("one", "two", "three")
PAYLOAD_KEYS = {
    "one": {"H"},
    "two": {"Sigma", "A"},
    "three": {"G", "initial"},
}


@dataclass(eq=False)
class Scenario:
    """Everything needed to run one strategy and judge the result.

    ``payload`` holds the parsed input: ``H`` (kind one); ``Sigma``, ``A`` and
    optionally ``Omega0``/``symmetrize`` (kind two); ``G``, ``initial`` and
    optionally ``reference`` (kind three).  ``truth`` is a closed-form oracle
    when one is known, and ``compare`` lists which of ``theta``, ``sigma``,
    ``H`` are checked against it.
    """

    name: str
    dim: int
    grid: np.ndarray
    input_kind: str
    payload: dict
    kappa: np.ndarray | None = None
    observables: list = field(default_factory=list)
    tolerances: dict = field(default_factory=dict)
    seed: int | None = None
    steps: int = 1
    derivative_order: int = 2
    state: np.ndarray | None = None
    truth: GroundTruthBundle | None = None
    compare: tuple = ()
    description: str = ""

    def __post_init__(self):
        if self.input_kind not in INPUT_KINDS:
            raise InvalidScenario(f"input_kind must be one of {INPUT_KINDS}, got {self.input_kind!r}")
        required = PAYLOAD_KEYS[self.input_kind]
        missing = required - set(self.payload)
        if missing:
            raise InvalidScenario(f"input_kind {self.input_kind!r} requires {sorted(missing)}")
        for other, keys in PAYLOAD_KEYS.items():
            if other != self.input_kind and (keys - PAYLOAD_KEYS[self.input_kind]) & set(self.payload):
                raise InvalidScenario(f"payload for input_kind {other!r} given with {self.input_kind!r}")
        grid = np.asarray(self.grid, dtype=float)
        if grid.ndim != 1 or grid.size < 3:
            raise InvalidScenario("grid needs at least 3 samples")
        self.grid = grid
        if self.steps < 1:
            raise InvalidScenario("steps must be a positive integer")


def parse_complex(x) -> complex:
    """Scalar from a number, a ``"re+im i"`` string or an ``[re, im]`` pair."""
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise InvalidScenario(f"complex pair must have two entries: {x!r}")
        return complex(float(x[0]), float(x[1]))
    if isinstance(x, (int, float, complex)) and not isinstance(x, bool):
        return complex(x)
    if not isinstance(x, str):
        raise InvalidScenario(f"cannot read {x!r} as a complex number")
    try:
        return complex(x.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise InvalidScenario(f"cannot read {x!r} as a complex number") from None


def parse_matrix(M, dim: int | None = None) -> np.ndarray:
    if isinstance(M, str):
        if dim is None:
            raise InvalidScenario(f"{M!r} needs a known dimension")
        if M == "identity":
            return np.eye(dim, dtype=complex)
        if M == "zero":
            return np.zeros((dim, dim), dtype=complex)
        raise InvalidScenario(f"unknown matrix keyword {M!r}")
    if not isinstance(M, list) or not all(isinstance(r, list) for r in M):
        raise InvalidScenario("matrix must be a list of rows")
    out = np.array([[parse_complex(x) for x in row] for row in M], dtype=complex)
    if out.ndim != 2 or out.shape[0] != out.shape[1]:
        raise InvalidScenario(f"matrix must be square, got shape {out.shape}")
    if dim is not None and out.shape[0] != dim:
        raise InvalidScenario(f"matrix has dimension {out.shape[0]}, expected {dim}")
    return out


def _operator_rule(spec, dim):
    """Closed-form rule ``t -> matrix`` for a tagged operator, or ``None`` for samples."""
    if isinstance(spec, (list, str)):
        M = parse_matrix(spec, dim)
        return lambda t: M
    if not isinstance(spec, dict) or len(spec) != 1:
        raise InvalidScenario(f"operator must be a matrix or a single-key mapping: {spec!r}")
    (tag, body), = spec.items()
    if tag == "constant":
        M = parse_matrix(body, dim)
        return lambda t: M
    if tag == "polynomial":
        coeffs = [parse_matrix(c, dim) for c in body]
        if not coeffs:
            raise InvalidScenario("polynomial needs at least one coefficient")

        def poly(t):
            out = np.zeros_like(coeffs[0])
            for c in reversed(coeffs):
                out = out * t + c
            return out

        return poly
    if tag == "expm":
        K = parse_matrix(body["generator"], dim)
        L = parse_matrix(body.get("left", "identity"), dim)
        R = parse_matrix(body.get("right", "identity"), dim)
        return lambda t: L @ expm(K * t) @ R
    if tag == "sum":
        rules = [_operator_rule(s, dim) for s in body]
        return lambda t: sum(r(t) for r in rules)
    raise InvalidScenario(f"unknown operator tag {tag!r}")


def parse_operator(spec, dim: int, grid) -> OperatorFamily:
    """:class:`OperatorFamily` from a scenario operator entry."""
    if isinstance(spec, dict) and set(spec) == {"samples"}:
        values = np.array([parse_matrix(m, dim) for m in spec["samples"]])
        if values.shape[0] != len(grid):
            raise InvalidScenario(f"{values.shape[0]} samples for a grid of {len(grid)}")
        return OperatorFamily(grid, values, tag="samples")
    rule = _operator_rule(spec, dim)
    tag = next(iter(spec)) if isinstance(spec, dict) else "constant"
    return OperatorFamily.from_function(rule, grid, tag=tag)


def _vector(v, dim):
    out = np.array([parse_complex(x) for x in v], dtype=complex)
    if out.shape != (dim,):
        raise InvalidScenario(f"vector must have {dim} entries")
    return out


def _initial_basis(spec, dim, grid) -> BiorthonormalSystem:
    if "hamiltonian" in spec:
        H0 = parse_operator(spec["hamiltonian"], dim, grid)[0]
        return solve_biorthogonal(H0)
    if "kets" in spec:
        energies = spec.get("energies")
        E = None if energies is None else [parse_complex(e) for e in energies]
        return BiorthonormalSystem.from_kets(parse_matrix(spec["kets"], dim), E)
    raise InvalidScenario("initial basis needs 'hamiltonian' or 'kets'")


def _ground_truth_payload(d, name, dim, grid, seed):
    gt_spec = d["ground_truth"] or {}
    seed = int(gt_spec.get("seed", seed if seed is not None else 0))
    truth = generate_ground_truth(seed, dim, grid, int(gt_spec.get("degree", 2)))
    kind = d["input_kind"]
    if kind == "one":
        sys0 = solve_biorthogonal(truth.H[0])
        return {"H": truth.H}, extract_kappa(sys0, truth.Theta[0]), truth, seed
    if kind == "two":
        return {"Sigma": truth.Sigma, "A": truth.A, "Omega0": truth.Omega[0]}, None, truth, seed
    initial = solve_biorthogonal(truth.H[0])
    kappa = extract_kappa(initial, truth.Theta[0])
    U0 = initial_dyson_alignment(initial, kappa, truth.Omega[0])
    reference = textbook_reference(truth.hbar, U0)
    return {"G": truth.G, "initial": initial, "reference": reference}, kappa, truth, seed


def scenario_from_dict(d: dict, seed_override: int | None = None) -> Scenario:
    """Build a :class:`Scenario` from a parsed scenario document."""
    if not isinstance(d, dict):
        raise InvalidScenario("scenario document must be a mapping")
    try:
        name = str(d.get("name", "scenario"))
        dim = int(d["dim"])
        g = d["grid"]
        grid = uniform_grid(float(g["start"]), float(g["end"]), int(g["samples"]))
        kind = d["input_kind"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidScenario(f"missing or malformed field: {exc}") from None
    seed = seed_override if seed_override is not None else d.get("seed")
    kappa = None
    truth = None
    try:
        if "ground_truth" in d:
            payload, kappa, truth, seed = _ground_truth_payload(d, name, dim, grid, seed)
            compare = ("theta",) if kind == "one" else ("theta", "sigma", "H")
        else:
            payload = {}
            compare = ()
            if "kappa" in d:
                kappa = np.array([float(k) for k in d["kappa"]])
            if kind == "one":
                payload["H"] = parse_operator(d["hamiltonian"], dim, grid)
            elif kind == "two":
                payload["Sigma"] = parse_operator(d["sigma"], dim, grid)
                payload["A"] = parse_operator(d["ansatz"], dim, grid)
                if "omega0" in d:
                    payload["Omega0"] = parse_matrix(d["omega0"], dim)
                payload["symmetrize"] = bool(d.get("symmetrize", False))
            elif kind == "three":
                payload["G"] = parse_operator(d["generator"], dim, grid)
                payload["initial"] = _initial_basis(d["initial"], dim, grid)
                ref = d.get("reference", "standard")
                if isinstance(ref, dict) and "textbook" in ref:
                    hbar = parse_operator(ref["textbook"], dim, grid)
                    U0 = None
                    if "omega0" in ref:
                        omega0 = parse_matrix(ref["omega0"], dim)
                        U0 = initial_dyson_alignment(payload["initial"], kappa, omega0)
                    payload["reference"] = textbook_reference(hbar, U0)
                elif isinstance(ref, str):
                    payload["reference"] = ref
                else:
                    payload["reference"] = parse_matrix(ref, dim)
        if "kappa" in d and kappa is None:
            kappa = np.array([float(k) for k in d["kappa"]])
        observables = []
        for i, obs in enumerate(d.get("observables", []) or []):
            label = str(obs.get("label", f"obs{i}"))
            op = obs["operator"]
            observables.append((label, op if op == "H" else parse_operator(op, dim, grid)))
        state = _vector(d["state"], dim) if "state" in d else None
        tolerances = {str(k): float(v) for k, v in (d.get("tolerances") or {}).items()}
        compare = tuple(d.get("compare", compare))
    except (KeyError, TypeError, AttributeError) as exc:
        raise InvalidScenario(f"missing or malformed field: {exc}") from None
    except NipError as exc:
        if isinstance(exc, InvalidScenario):
            raise
        raise InvalidScenario(f"invalid scenario input: {exc}") from exc
    return Scenario(
        name=name,
        dim=dim,
        grid=grid,
        input_kind=kind,
        payload=payload,
        kappa=kappa,
        observables=observables,
        tolerances=tolerances,
        seed=seed,
        steps=int(d.get("steps", 1)),
        derivative_order=int(d.get("derivative_order", 2)),
        state=state,
        truth=truth,
        compare=compare,
        description=str(d.get("description", "")),
    )


def load_scenario(source, seed_override: int | None = None) -> Scenario:
    """Read a scenario from a path or from YAML text."""
    text = source
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source):
        path = Path(source)
        if not path.exists():
            raise InvalidScenario(f"scenario file {source} not found")
        text = path.read_text()
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise InvalidScenario(f"scenario is not valid YAML: {exc}") from None
    return scenario_from_dict(doc, seed_override)
