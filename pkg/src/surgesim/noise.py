"""Phenomenological noise models.

Each round, every active data qubit suffers an independent single-qubit
Pauli channel, and every check measurement outcome is flipped with
probability q.  Models:

- 'xBiased':      X with probability p (no Z or Y component).
- 'independent':  independent X and Z coins of bias p each, so
                  P(X)=P(Z)=p(1-p), P(Y)=p^2; by default q=p.
- 'depolarizing': X, Y, Z each with probability p/3; by default q=2p/3,
                  matching the per-check flip bias induced on either check
                  kind.
"""

from __future__ import annotations

from dataclasses import dataclass

MODELS = ("xBiased", "independent", "depolarizing")


@dataclass(frozen=True)
class NoiseParams:
    model: str
    p: float
    q: float = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown noise model {self.model!r}")
        if not (0.0 <= self.p < 0.5):
            raise ValueError(f"p must lie in [0, 0.5), got {self.p}")
        if self.q is None:
            object.__setattr__(self, "q", self.default_q(self.model, self.p))
        if not (0.0 <= self.q < 0.5):
            raise ValueError(f"q must lie in [0, 0.5), got {self.q}")
        mx, mz = self.marginals()
        if not (mx < 0.5 and mz < 0.5):
            raise ValueError("per-check marginal flip probability must be < 0.5")

    @staticmethod
    def default_q(model, p):
        return 2.0 * p / 3.0 if model == "depolarizing" else p

    def pauli_probs(self):
        """(pX, pY, pZ) per data qubit per round."""
        if self.model == "xBiased":
            return (self.p, 0.0, 0.0)
        if self.model == "independent":
            return (self.p * (1.0 - self.p), self.p * self.p,
                    self.p * (1.0 - self.p))
        return (self.p / 3.0, self.p / 3.0, self.p / 3.0)

    def marginals(self):
        """(mz, mx): probability that a data-qubit error flips a Z-check
        (an X or Y error) respectively an X-check (Z or Y)."""
        px, py, pz = self.pauli_probs()
        return (px + py, pz + py)


def sample_faults(pair, noise_params, master_seed, shot_index):
    """Sample one fault configuration for a compiled check-graph pair.

    Returns a FaultConfig with the flipped fault-edge ids of each graph.
    Deterministic in (master_seed, shot_index); shots are independent
    streams so any subset can be regenerated in isolation.
    """
    from .checkgraph import FaultConfig  # local import to avoid a cycle
    engine = pair.engine(noise_params)
    z_edges, x_edges = engine.sample(master_seed, shot_index)
    return FaultConfig(z_edges=tuple(int(e) for e in z_edges),
                       x_edges=tuple(int(e) for e in x_edges))
