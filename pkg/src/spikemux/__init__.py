"""Bit-exact software twin of a time-multiplexed, event-driven SNN
accelerator core, plus a precision-aware design-space explorer."""

from .aer import (AerPacket, BoundedQueue, Channel, DecodeContext, PacketKind,
                  decode_packet, encode_packet)
from .cost import (CalibrationTable, CostWeights, ResourceEstimate,
                   ResourceNorms, default_calibration, estimate_bram,
                   estimate_logic, estimate_resources, norms_from_candidates,
                   total_cost)
from .decay import (DecayRate, SelectionUnits, apply_decay, apply_decay_int,
                    encode_decay)
from .dse import (AccuracyCache, CandidateConfig, CandidateSpace, DesignParams,
                  SearchParams, SearchResult, enumerate_candidates,
                  evaluate_accuracy, neighbor, prefetch_accuracies,
                  simulated_annealing)
from .errors import (CalibrationError, CapacityError, ConfigError,
                     DeadlockError, ParseError, ProtocolError, SpikemuxError)
from .fxp import (QFormat, QWord, ResetPolicy, quantize_threshold,
                  quantize_weights, sat_add)
from .model import (QuantizedModel, Topology, TrainedLayer, TrainedModel,
                    quantize_model)
from .neuron import (LeakFireConfig, NeuronModel, NeuronState, integrate,
                     lazy_reset, leak_and_fire, size_state_memory,
                     size_synaptic_memory)
from .reference import dense_reference
from .system import (CoreConfig, EventSample, InferenceResult, Network,
                     NetworkConfig, build_network, run_inference)

__version__ = "0.1.0"
