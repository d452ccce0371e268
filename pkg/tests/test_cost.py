"""Resource estimation and the scalarized cost objective."""

import random

import pytest

from spikemux.cost import (CalibrationTable, CostWeights, LinearCoefficients,
                           ResourceEstimate, ResourceNorms, bram_for_core,
                           default_calibration, estimate_bram, estimate_logic,
                           estimate_resources, hw_cost, logic_for_core,
                           norms_from_candidates, total_cost)
from spikemux.errors import CalibrationError, ConfigError
from spikemux.model import Topology
from spikemux.neuron import NeuronModel
from spikemux.system import CoreConfig, NetworkConfig


def core(topology=Topology.FF, model=NeuronModel.LIF, neurons=128, sources=256,
         ff_bits=6, rec_bits=None, potential=9, current=None, core_id=0):
    return CoreConfig(core_id, topology, model, neurons, sources, ff_bits,
                      rec_bits, potential, current)


def flat_table(lut=(100.0, 10.0, 5.0), ff=(50.0, 5.0, 2.0)):
    entries = {}
    for topo in Topology:
        for model in (NeuronModel.LIF, NeuronModel.SYNAPTIC):
            entries[(topo, model)] = (LinearCoefficients(*lut),
                                      LinearCoefficients(*ff))
    return CalibrationTable(entries)


class TestBram:
    def test_worked_example_256_to_128(self):
        # feedforward: 256 blocks x 16 rows x 48 bits = 196608 -> 6 primitives
        # state: (9 + 8 -> 24 bits) x 128 rows = 3072 -> 1 primitive
        cfg = core(model=NeuronModel.SYNAPTIC, potential=9, current=8)
        assert cfg.ff_geometry.total_bits == 196_608
        assert cfg.state_geometry.total_bits == 3_072
        assert bram_for_core(cfg) == 7

    def test_network_sums_cores(self):
        net = NetworkConfig([core(core_id=0),
                             core(core_id=1, sources=128, neurons=10)],
                            input_channels=256, timesteps=10)
        assert estimate_bram(net) == 7 + 2  # second core: 12288 -> 1, state -> 1

    def test_dense_recurrence_adds_its_memory(self):
        plain = core(topology=Topology.ATA_F, rec_bits=6)
        dense = core(topology=Topology.ATA_T, rec_bits=6)
        assert bram_for_core(dense) > bram_for_core(plain)

    def test_self_loop_weights_cost_no_bram(self):
        ff_only = core()
        self_loop = core(topology=Topology.ATA_F, rec_bits=6)
        assert bram_for_core(self_loop) == bram_for_core(ff_only)

    def test_weight_bits_scale_memory_linearly(self):
        assert (core(ff_bits=8).ff_geometry.total_bits
                == 2 * core(ff_bits=4).ff_geometry.total_bits)


class TestLogic:
    def test_linear_evaluation(self):
        lut, ff = logic_for_core(Topology.ATA_F, NeuronModel.LIF, 8, 4, flat_table())
        assert lut == 100 + 10 * 8 + 5 * 4 == 200
        assert ff == 50 + 5 * 8 + 2 * 4

    def test_degenerate_width_warns(self):
        with pytest.warns(UserWarning):
            lut, _ = logic_for_core(Topology.FF, NeuronModel.LIF, 0, 0, flat_table())
        assert lut == 100.0

    def test_two_identical_cores_double_one(self):
        one = NetworkConfig([core()], 256, 10)
        two = NetworkConfig([core(core_id=0), core(core_id=1, sources=128,
                                                   neurons=128)],
                            256, 10)
        table = flat_table()
        luts1, ffs1 = estimate_logic(one, table)
        luts2, ffs2 = estimate_logic(two, table)
        assert luts2 == 2 * luts1 and ffs2 == 2 * ffs1

    def test_if_uses_lif_calibration(self):
        table = flat_table()
        assert (logic_for_core(Topology.FF, NeuronModel.IF, 8, 0, table)
                == logic_for_core(Topology.FF, NeuronModel.LIF, 8, 0, table))

    def test_missing_entry_raises(self):
        table = CalibrationTable({(Topology.FF, NeuronModel.LIF):
                                  (LinearCoefficients(1, 1, 1),
                                   LinearCoefficients(1, 1, 1))})
        with pytest.raises(CalibrationError):
            table.lookup(Topology.ATA_T, NeuronModel.SYNAPTIC)

    def test_default_table_is_marked_placeholder(self):
        assert default_calibration().placeholder


class TestCostObjective:
    def test_worked_example_exact(self):
        weights = CostWeights(0.5, 0.5, 0.33, 0.33, 0.34)
        est = ResourceEstimate(50.0, 5.0, 2.0)
        norms = ResourceNorms(100.0, 10.0, 4.0)   # all normalized terms = 0.5
        assert abs(total_cost(est, 0.9, weights, norms) - 0.30) < 1e-12

    def test_perfect_accuracy_pure_accuracy_objective(self):
        weights = CostWeights(0.0, 1.0, 0.33, 0.33, 0.34)
        est = ResourceEstimate(50.0, 5.0, 2.0)
        norms = ResourceNorms(100.0, 10.0, 4.0)
        assert total_cost(est, 1.0, weights, norms) == 0.0

    def test_published_weight_split_is_valid(self):
        CostWeights(0.5, 0.5, 0.330, 0.330, 0.340)

    @pytest.mark.parametrize("args", [
        (0.6, 0.5, 0.33, 0.33, 0.34),   # hw + acc != 1
        (0.5, 0.5, 0.5, 0.33, 0.34),    # resource split != 1
        (-0.1, 1.1, 0.33, 0.33, 0.34),  # out of range
    ])
    def test_invalid_weights_rejected(self, args):
        with pytest.raises(ConfigError):
            CostWeights(*args)

    def test_invalid_accuracy_rejected(self):
        weights = CostWeights(0.5, 0.5, 0.33, 0.33, 0.34)
        with pytest.raises(ConfigError):
            total_cost(ResourceEstimate(1, 1, 1), 1.2, weights,
                       ResourceNorms(1, 1, 1))

    def test_bounded_and_monotone(self):
        rng = random.Random(606)
        weights = CostWeights(0.5, 0.5, 0.2, 0.3, 0.5)
        norms = ResourceNorms(100.0, 100.0, 100.0)
        for _ in range(300):
            base = ResourceEstimate(rng.uniform(0, 100), rng.uniform(0, 100),
                                    rng.uniform(0, 100))
            acc = rng.random()
            c = total_cost(base, acc, weights, norms)
            assert 0.0 <= c <= 1.0
            bigger = ResourceEstimate(base.luts + 1, base.flipflops, base.brams)
            assert total_cost(bigger, acc, weights, norms) >= c
            assert total_cost(base, min(1.0, acc + 0.1), weights, norms) <= c

    def test_ranking_invariant_under_common_norm_scaling(self):
        rng = random.Random(607)
        weights = CostWeights(1.0, 0.0, 0.2, 0.3, 0.5)
        estimates = [ResourceEstimate(rng.uniform(1, 100), rng.uniform(1, 100),
                                      rng.uniform(1, 100)) for _ in range(20)]
        norms = norms_from_candidates(estimates)
        scaled = ResourceNorms(norms.luts * 3.5, norms.flipflops * 3.5,
                               norms.brams * 3.5)
        rank = sorted(range(20), key=lambda i: hw_cost(estimates[i], weights, norms))
        rank_scaled = sorted(range(20),
                             key=lambda i: hw_cost(estimates[i], weights, scaled))
        assert rank == rank_scaled

    def test_norms_must_be_positive(self):
        with pytest.raises(ConfigError):
            ResourceNorms(0.0, 1.0, 1.0)


class TestCalibrationRoundtrip:
    def test_dict_roundtrip(self):
        table = default_calibration()
        again = CalibrationTable.from_dict(table.to_dict())
        assert again.to_dict() == table.to_dict()
