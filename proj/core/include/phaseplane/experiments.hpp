#pragma once

#include <array>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "phaseplane/ensemble.hpp"

namespace phaseplane {

struct RatioRow {
    std::uint64_t seed = 0;
    int size = 0;
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
};

// Seeded-ensemble statistics for one experiment; `max_drift` is the largest
// relative growth of the per-size max ratio across consecutive sizes.
struct RatioReport {
    std::string experiment;
    std::vector<RatioRow> rows;
    int sizes = 1;
    double max_ratio = 0.0;
    double p95 = 0.0;
    double max_drift = 0.0;
    std::map<std::string, double> notes;

    void finalize();
};

// Shared experiment parameters; the ensemble seed/tree count are varied by
// the runners (seed stream per row, tree count doubled per size).
struct LabConfig {
    DyadicGrid grid;
    double window = 320.0;
    std::size_t samples = 4096;
    EnsembleSpec ensemble;
    ValueSpace space = ValueSpace::hilbert(4);
    double q = 2.0;
    double alpha = 0.9;
    std::vector<double> p_exponents{1.25, 2.0, 4.0};
    int seeds = 100;
    std::uint64_t base_seed = 1;
    int sizes = 3;
    double major_subset_K = 16.0;
    int threads = 0;

    void validate() const;
};

struct RatioInstance {
    double lhs = 0.0;
    double rhs = 0.0;
};

// Single-instance forms of the quasi-orthogonality experiments.
RatioInstance hilbert_basic_instance(const WavePacketFactory& factory,
                                     const std::vector<Tree>& forest,
                                     const SampledFunction& f);
RatioInstance weak_type_instance(const WavePacketFactory& factory,
                                 const std::vector<Tile>& tiles, const SampledFunction& f,
                                 double lambda);
RatioInstance log_tile_type_instance(const WavePacketFactory& factory,
                                     const std::vector<Tree>& forest,
                                     const SampledFunction& f);
RatioInstance fourier_tile_type_instance(const WavePacketFactory& factory,
                                         const std::vector<Tree>& forest,
                                         const SampledFunction& f, double q, double alpha);

// Restricted weak-type pairing: lhs the absolute pairing sum over the tiles,
// rhs |F|^{1/p} |E|^{1/p'}; when |E| <= |F| the case bound
// |E| (1 + log |F|/|E|) is recorded as `case_rhs`.
struct PairingInstance {
    double lhs = 0.0;
    double rhs = 0.0;
    double case_rhs = 0.0;
};
PairingInstance restricted_weak_type_instance(const WavePacketFactory& factory,
                                              const std::vector<Tile>& tiles,
                                              const SampledFunction& f,
                                              const SampledFunction& g,
                                              const FrequencyChoice& choice,
                                              double measure_F, double measure_E, double p);

// Major subset construction: G = {M 1_F > K|F|/|E|}, Gtilde = {M 1_G > 1/8},
// Etilde = E \ Gtilde. K doubles until |Etilde| >= |E|/2; `k_used` records
// the final K.
struct MajorSubset {
    MeasurableSet e_tilde;
    MeasurableSet g;
    MeasurableSet g_tilde;
    double k_used = 0.0;
};
MajorSubset major_subset(const MeasurableSet& e, const MeasurableSet& f, double K,
                         int refinement = 4);

// Two-case pairing against g supported on the major subset: main bound
// |F| (1 + log |E|/|F|), plus the split into tiles with 2I_P inside Gtilde
// (inside_sum, compared against |F|) and the rest.
struct TwoCaseInstance {
    double lhs = 0.0;
    double rhs = 0.0;
    double inside_sum = 0.0;
    double outside_sum = 0.0;
    double measure_F = 0.0;
    double k_used = 0.0;
};
TwoCaseInstance two_case_pairing_instance(const WavePacketFactory& factory,
                                          const std::vector<Tile>& tiles,
                                          const SampledFunction& f, const MeasurableSet& F,
                                          const MeasurableSet& E, const SampledFunction& g,
                                          const MeasurableSet& g_tilde,
                                          const FrequencyChoice& choice, double p);

// Ensemble runners: `seeds` rows per size, tree count doubling per size.
RatioReport run_hilbert_basic(const LabConfig& cfg);
RatioReport run_weak_type(const LabConfig& cfg);
RatioReport run_log_tile_type(const LabConfig& cfg);
RatioReport run_fourier_tile_type(const LabConfig& cfg, double alpha);
RatioReport run_restricted_weak_type(const LabConfig& cfg, double p);
struct TwoCaseReport {
    RatioReport main;
    RatioReport inside_part;
};
TwoCaseReport run_two_case_pairing(const LabConfig& cfg, double p);
RatioReport run_major_subset(const LabConfig& cfg);
RatioReport run_improved_energy(const LabConfig& cfg);

// Split-contract ensemble (the halving postconditions, recomputed):
// rows carry lhs = recomputed functional of the remainder, rhs = half the
// input functional. notes count any failures (expected zero).
struct SplitContractReport {
    RatioReport density;
    RatioReport energy;
    int density_failures = 0;
    int energy_failures = 0;
    int disjointness_failures = 0;
    int conservation_failures = 0;
};
SplitContractReport run_split_contracts(const LabConfig& cfg);

// Full decomposition ensemble: recomputed level bounds and conservation.
struct DecompositionReport {
    RatioReport level_constants;   // lhs = sum |I_T|, rhs = 2^n per level row
    int bound_failures = 0;
    int conservation_failures = 0;
    int demotions = 0;
};
DecompositionReport run_decomposition(const LabConfig& cfg);

// Desk-scale convergence study (projection identity, kernel cross-check,
// periodic vector-valued convergence, maximal-operator oracle).
struct ConvergenceStudy {
    std::vector<int> orders;
    // per order: sup error in C_p for p = 4/3, 2, 4
    std::vector<std::array<double, 3>> periodic_errors;
    double projection_identity_error = 0.0;
    double kernel_agreement_error = 0.0;
    double maximal_value = 0.0;
    double maximal_oracle_value = 0.0;
};
ConvergenceStudy convergence_study(const LabConfig& cfg, std::size_t periodic_cells,
                                   const std::vector<int>& orders);

// Deterministic per-seed parallel loop; results must be written to
// preallocated slots indexed by the loop counter.
void parallel_for_indexed(int count, int threads, const std::function<void(int)>& body);

}  // namespace phaseplane
