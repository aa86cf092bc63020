"""Full control of a spin network through relaxation induced on a small subsystem."""
from .channel import (SpectralReport, Superoperator, build_tau, build_tau_prime,
                      distance_trajectory, fit_decay_rate, spectral_report)
from .controllability import (AutomatonTrace, ColoredGraph, automaton_step, certify_control,
                              minimal_control_search, oracle_condition_ii)
from .network import (Bipartition, Coupling, SpinNetwork, build_hamiltonian, excitation_conserving,
                      load_network, ordered_bipartition, parse_network)
from .protocol import (CodingMap, Direction, ProtocolConfig, ProtocolRun, build_coding,
                       download_fidelity, fidelity_lower_bound, reverse_download_fidelity,
                       run_download, upload_fidelity)
from .quantum import (StateVector, partial_trace, polar_unitary, project_component, propagator,
                      swap_apply, tensor_product, trace_norm)

__version__ = "0.1.0"
