"""Parametrized MZI meshes with self-configuring diagonal-layer topology.

A diagonal layer i owns N - i MZIs on nearest-neighbor mode pairs
(i, i+1), ..., (N-1, N) plus one output phase on port i.  Every input port
has exactly one path through MZI blocks to the layer's output port, so the
layer can route an arbitrary superposition of modes i..N to port i.  Layers
cascade into a circuit whose rows 1..i-1 pass earlier-extracted ports
through untouched.  Indexing of layers and modes is 1-based.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, ValidationError
from .serialize import dumps_17g

__all__ = [
    "MziParams",
    "DiagonalLayer",
    "MeshCircuit",
    "mzi_unitary",
    "layer_unitary",
    "circuit_unitary",
    "reachable_row",
    "row_jacobian",
    "layer_from_params",
]


@dataclass(frozen=True)
class MziParams:
    """Two phase-shifter settings of one MZI, in radians."""

    theta: float
    phi: float


@dataclass(frozen=True)
class DiagonalLayer:
    """One self-configuring layer: MZIs on pairs (i, i+1)..(N-1, N) plus output phase."""

    layer_index: int
    mzis: tuple[MziParams, ...]
    output_phase: float = 0.0

    def __post_init__(self):
        if self.layer_index < 1:
            raise ValidationError("layer_index is 1-based and must be >= 1")
        object.__setattr__(self, "mzis", tuple(self.mzis))

    def n_params(self) -> int:
        return 2 * len(self.mzis) + 1

    def params(self) -> np.ndarray:
        """Flat parameter vector [theta_1..theta_K, phi_1..phi_K, output_phase]."""
        th = [m.theta for m in self.mzis]
        ph = [m.phi for m in self.mzis]
        return np.array(th + ph + [self.output_phase], dtype=float)


def layer_from_params(layer_index: int, params: np.ndarray) -> DiagonalLayer:
    """Inverse of DiagonalLayer.params()."""
    params = np.asarray(params, dtype=float)
    if params.size % 2 == 0:
        raise ParameterError("parameter vector must have odd length 2K+1")
    k = params.size // 2
    mzis = tuple(MziParams(theta=params[j], phi=params[k + j]) for j in range(k))
    return DiagonalLayer(layer_index=layer_index, mzis=mzis, output_phase=float(params[-1]))


@dataclass(frozen=True)
class MeshCircuit:
    """Ordered diagonal layers 1..l of a self-configuring mesh on N modes."""

    n_modes: int
    layers: tuple[DiagonalLayer, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.n_modes < 1:
            raise ValidationError("n_modes must be positive")
        layers = tuple(self.layers)
        for pos, layer in enumerate(layers, start=1):
            if layer.layer_index != pos:
                raise ValidationError(
                    f"layer indices must be consecutive from 1; position {pos} has index {layer.layer_index}"
                )
            expected = self.n_modes - layer.layer_index
            if len(layer.mzis) != expected:
                raise ValidationError(
                    f"layer {layer.layer_index} must have {expected} MZIs, got {len(layer.mzis)}"
                )
        object.__setattr__(self, "layers", layers)

    def with_layer(self, layer: DiagonalLayer) -> "MeshCircuit":
        """Circuit with the given layer replacing or appending at its index."""
        layers = list(self.layers)
        if layer.layer_index == len(layers) + 1:
            layers.append(layer)
        elif 1 <= layer.layer_index <= len(layers):
            layers[layer.layer_index - 1] = layer
        else:
            raise ParameterError(f"cannot place layer {layer.layer_index} in circuit with {len(layers)} layers")
        return MeshCircuit(n_modes=self.n_modes, layers=tuple(layers))

    def to_json(self) -> str:
        return dumps_17g(self.to_dict())

    def to_dict(self) -> dict:
        return {
            "n_modes": self.n_modes,
            "layers": [
                {
                    "layer_index": layer.layer_index,
                    "output_phase": float(layer.output_phase),
                    "mzis": [{"theta": float(m.theta), "phi": float(m.phi)} for m in layer.mzis],
                }
                for layer in self.layers
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "MeshCircuit":
        layers = tuple(
            DiagonalLayer(
                layer_index=int(ld["layer_index"]),
                mzis=tuple(MziParams(theta=float(m["theta"]), phi=float(m["phi"])) for m in ld["mzis"]),
                output_phase=float(ld["output_phase"]),
            )
            for ld in doc["layers"]
        )
        return cls(n_modes=int(doc["n_modes"]), layers=layers)

    @classmethod
    def from_json(cls, text: str) -> "MeshCircuit":
        return cls.from_dict(json.loads(text))


def mzi_unitary(params: MziParams) -> np.ndarray:
    """2x2 block [[e^{i phi} cos t, -sin t], [e^{i phi} sin t, cos t]]."""
    c, s = np.cos(params.theta), np.sin(params.theta)
    e = np.exp(1j * params.phi)
    return np.array([[e * c, -s], [e * s, c]], dtype=complex)


def layer_unitary(layer: DiagonalLayer, n_modes: int) -> np.ndarray:
    """NxN unitary of one diagonal layer.

    MZI blocks apply from pair (N-1, N) up toward (i, i+1); the output phase
    multiplies row i.  Rows 1..i-1 are exact identity rows.
    """
    i = layer.layer_index
    if i > n_modes:
        raise ParameterError(f"layer index {i} exceeds n_modes {n_modes}")
    if len(layer.mzis) != n_modes - i:
        raise ParameterError(f"layer {i} on {n_modes} modes needs {n_modes - i} MZIs, got {len(layer.mzis)}")
    u = np.eye(n_modes, dtype=complex)
    # mzis[k] acts on 0-based rows (i-1+k, i+k); apply last pair first
    for k in range(len(layer.mzis) - 1, -1, -1):
        block = mzi_unitary(layer.mzis[k])
        rows = [i - 1 + k, i + k]
        u[rows, :] = block @ u[rows, :]
    u[i - 1, :] *= np.exp(1j * layer.output_phase)
    return u


def circuit_unitary(circuit: MeshCircuit) -> np.ndarray:
    """Product U^(l) ... U^(2) U^(1), layer 1 applied first to the input."""
    u = np.eye(circuit.n_modes, dtype=complex)
    for layer in circuit.layers:
        u = layer_unitary(layer, circuit.n_modes) @ u
    return u


def reachable_row(layer: DiagonalLayer, n_modes: int) -> np.ndarray:
    """Row i of the layer unitary: the input superposition routed to port i."""
    w, _ = row_jacobian(layer, n_modes)
    return w


def row_jacobian(layer: DiagonalLayer, n_modes: int) -> tuple[np.ndarray, np.ndarray]:
    """Output row of a layer and its Jacobian w.r.t. the flat parameter vector.

    Returns (w, jac) with w of length N and jac of shape (2K+1, N), complex,
    rows ordered like DiagonalLayer.params().  Closed form of the single-path
    topology: amplitude on mode i+k-1 is
    e^{i rho} e^{i phi_k} cos(theta_k) prod_{j<k} (-sin(theta_j)).
    """
    i = layer.layer_index
    kk = len(layer.mzis)
    if i > n_modes or kk != n_modes - i:
        raise ParameterError(f"layer {i} with {kk} MZIs invalid for {n_modes} modes")
    th = np.array([m.theta for m in layer.mzis], dtype=float)
    ph = np.array([m.phi for m in layer.mzis], dtype=float)
    rho = layer.output_phase
    c, s, e = np.cos(th), np.sin(th), np.exp(1j * ph)
    erho = np.exp(1j * rho)

    # pref[m] = prod_{j<m} (-s_j), m = 0..K
    pref = np.concatenate([[1.0 + 0j], np.cumprod(-s)]) if kk else np.array([1.0 + 0j])
    amps = np.empty(kk + 1, dtype=complex)
    amps[:kk] = erho * e * c * pref[:kk]
    amps[kk] = erho * pref[kk]

    n_par = 2 * kk + 1
    jac_a = np.zeros((n_par, kk + 1), dtype=complex)
    for k in range(kk):
        # d/d theta_k
        jac_a[k, k] = erho * e[k] * (-s[k]) * pref[k]
        for m in range(k + 1, kk + 1):
            prod_excl = pref[k]
            for j in range(k + 1, m):
                prod_excl = prod_excl * (-s[j])
            head = e[m] * c[m] if m < kk else 1.0
            jac_a[k, m] = erho * head * prod_excl * (-c[k])
        # d/d phi_k
        jac_a[kk + k, k] = 1j * amps[k]
    jac_a[2 * kk, :] = 1j * amps  # d/d rho

    w = np.zeros(n_modes, dtype=complex)
    w[i - 1 :] = amps
    jac = np.zeros((n_par, n_modes), dtype=complex)
    jac[:, i - 1 :] = jac_a
    return w, jac
