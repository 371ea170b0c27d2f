"""Interactive proof: verifier and prover state machines, estimation, wire."""

from .estimation import (EnergyEstimate, SessionConfig, estimate_energy,
                         estimate_expectations, exact_energy,
                         exact_expectations, rejection_rates)
from .extended import (ExtendedRunStats, extended_protocol,
                       extended_protocol_wire, thresholds)
from .messages import ProtocolError, Transcript
from .prover import (ClassicalGuessProver, HonestProver, InconsistentProver,
                     build_prover, prepare_state)
from .quantumness import quantumness_demo, random_two_to_one
from .verifier import (InProcessChannel, ProtocolTranscript, SubprocessChannel,
                       TcpChannel, TransportError, run_session, serve_prover)

__all__ = [
    "EnergyEstimate", "SessionConfig", "estimate_energy",
    "estimate_expectations", "exact_energy", "exact_expectations",
    "rejection_rates", "ExtendedRunStats", "extended_protocol",
    "extended_protocol_wire", "thresholds", "ProtocolError", "Transcript",
    "ClassicalGuessProver", "HonestProver", "InconsistentProver",
    "build_prover", "prepare_state", "quantumness_demo", "random_two_to_one",
    "InProcessChannel", "ProtocolTranscript", "SubprocessChannel",
    "TcpChannel", "TransportError", "run_session", "serve_prover",
]
