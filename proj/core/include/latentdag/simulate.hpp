#ifndef LATENTDAG_SIMULATE_HPP
#define LATENTDAG_SIMULATE_HPP

#include <latentdag/data.hpp>
#include <latentdag/sem.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace latentdag {

/// Ground-truth SEM over observed and latent variables.
struct GroundTruth {
    LinearSem sem;
    std::vector<std::string> latent_names;
    std::vector<std::string> outcome_names;

    /// Throws InvalidConfig when latents overlap outcomes or a latent has fewer than 2 children.
    void validate() const;
    std::vector<std::string> observed_names() const;
    bool is_latent(std::string_view name) const;
};

struct SimBundle {
    DataMatrix full_data;      // includes latent columns
    DataMatrix observed_data;  // latent columns dropped
    GroundTruth truth;
    std::uint64_t seed = 0;
};

/// Ancestral sampling: each node is intercept + sum(coeff * parent) + N(0, sd^2),
/// visited in topological order. Deterministic given the seed.
SimBundle sample_sem(const GroundTruth& truth, std::size_t n_samples, std::uint64_t seed);

/// Confounded benchmark: drivers V1, V2 -> Z, latents U1, U2 pointing at V1, V2, Z
/// and at `children_per_latent` further observed variables each (A1.. for U1, B1.. for U2).
/// The network is fixed across seeds; the seed drives sampling only.
GroundTruth confounded_benchmark_truth(std::size_t children_per_latent = 32);
SimBundle confounded_benchmark(std::size_t n_samples, std::uint64_t seed, std::size_t children_per_latent = 32);

/// Random observed DAG at the given edge density plus `n_latent` source latents
/// L1.. each wired to `children_per_latent` random observed children.
/// Coefficients have magnitude in [0.5, 1.5] with random sign; noise sd in [0.5, 1.5].
GroundTruth random_pleiotropic_truth(std::size_t n_observed,
                                     std::size_t n_latent,
                                     std::size_t children_per_latent,
                                     double edge_density,
                                     std::uint64_t seed);

}  // namespace latentdag

#endif  // LATENTDAG_SIMULATE_HPP
