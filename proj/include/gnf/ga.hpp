#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "gnf/net.hpp"

namespace gnf {

// Real-valued GA over flattened network weights. Fitness is the summed
// absolute output error (lower is better); the loop is score -> scale ->
// select -> elites -> crossover/mutation children -> replace.

struct Genome {
    std::vector<double> genes;

    bool operator==(const Genome&) const = default;
};

struct Population {
    std::vector<Genome> members;
    std::vector<double> fitnesses;  // parallel to members
};

struct GAConfig {
    int population_size = 50;
    int elite_count = 2;               // >= 1, < population_size
    double crossover_fraction = 0.8;   // share of non-elite slots bred by crossover
    double mutation_sigma = 0.1;       // gene-wise gaussian std
    double mutation_anneal = 0.99;     // sigma multiplier per generation, 1 disables
    int max_generations = 2000;
    double fitness_tolerance = 1e-5;   // stop when best fitness <= tolerance
    std::uint64_t rng_seed = 0;

    void validate() const;  // throws ConfigError
};

struct GATrace {
    std::vector<double> best;  // per generation, non-increasing under elitism
    std::vector<double> mean;
    int generations_run = 0;
    bool converged = false;
};

// Pinned order: layer by layer, weight matrix row-major, then biases.
// unflatten(flatten(n), n) == n exactly.
Genome flatten(const Network& net);
Network unflatten(const Genome& genome, const Network& tmpl);

// Summed absolute error over all samples and outputs. A genome whose
// network emits a non-finite output scores +infinity (worst possible)
// rather than failing the run.
double fitness(const Genome& genome, const Network& tmpl, const Dataset& data);

// Rank scaling (score proportional to 1/sqrt(rank); ties share a rank,
// so equal fitnesses get equal probability) followed by stochastic
// universal sampling of `count` parents. Returns member indices;
// deterministic for a given rng state.
std::vector<std::size_t> scale_and_select(const Population& population,
                                          std::size_t count, std::mt19937_64& rng);

// Single-point splice: genes [0, cut) from a, [cut, end) from b.
// Requires 0 < cut < length.
Genome crossover(const Genome& a, const Genome& b, std::size_t cut);

// Independent gaussian(0, sigma) perturbation of every gene.
Genome mutate(Genome genome, double sigma, std::mt19937_64& rng);

struct EvolveResult {
    Network best;
    double best_fitness = 0.0;
    GATrace trace;
};

// The generation loop. initial_seeds are inserted verbatim into
// generation 0; remaining slots are gaussian perturbations of the seeds
// (sigma = mutation_sigma) when seeds exist, otherwise uniform random in
// [-0.5, 0.5]. The whole run is a deterministic function of (template,
// dataset, config, seeds). Fitness scoring may run in parallel; results
// are identical to sequential evaluation.
EvolveResult evolve(const Network& tmpl, const Dataset& data, const GAConfig& config,
                    std::span<const Genome> initial_seeds = {});

}  // namespace gnf
