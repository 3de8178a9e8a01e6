#ifndef LATENTDAG_TESTS_FIXTURES_HPP
#define LATENTDAG_TESTS_FIXTURES_HPP

#include <latentdag/data.hpp>
#include <latentdag/error.hpp>
#include <latentdag/simulate.hpp>

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fixture {

/// i.i.d. standard normal matrix.
Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed);

/// SEM with the given named edges; every coefficient `coeff`, intercepts 0, noise sd 1.
latentdag::GroundTruth linear_truth(const std::vector<std::string>& nodes,
                                    const std::vector<std::pair<std::string, std::string>>& edges, double coeff = 0.8,
                                    const std::vector<std::string>& latents = {},
                                    const std::vector<std::string>& outcomes = {});

/// A -> B -> C.
latentdag::GroundTruth chain_truth();

/// random_pleiotropic_truth with every observed edge into a latent's child dropped when its
/// tail descends from a latent, so each latent is independent of its children's other parents.
latentdag::GroundTruth orthogonal_latents_truth(std::size_t n_observed, std::size_t n_latent,
                                                std::size_t children_per_latent, double edge_density,
                                                std::uint64_t seed);

/// One orthogonal source latent L1 with 20 children among 30 observed variables.
latentdag::GroundTruth single_latent_truth(std::uint64_t seed);

/// The truth's graph with latent nodes removed.
latentdag::Dag observed_dag(const latentdag::GroundTruth& truth);

/// Kind of the latentdag::Error thrown by `fn`, or nullopt when nothing is thrown.
template <class Fn>
std::optional<latentdag::ErrorKind> thrown_kind(Fn&& fn) {
    try {
        fn();
    } catch (const latentdag::Error& e) {
        return e.kind();
    }
    return std::nullopt;
}

/// Fresh empty directory under the system temp directory.
std::filesystem::path scratch_dir(const std::string& name);

}  // namespace fixture

#endif  // LATENTDAG_TESTS_FIXTURES_HPP
