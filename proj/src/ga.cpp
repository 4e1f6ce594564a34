#include "gnf/ga.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace gnf {

void GAConfig::validate() const {
    if (population_size < 2) throw ConfigError("population_size must be >= 2");
    if (elite_count < 1 || elite_count >= population_size)
        throw ConfigError("elite_count must satisfy 1 <= elite_count < population_size");
    if (!(crossover_fraction >= 0.0 && crossover_fraction <= 1.0))
        throw ConfigError("crossover_fraction must lie in [0, 1]");
    if (!(mutation_sigma > 0.0)) throw ConfigError("mutation_sigma must be positive");
    if (!(mutation_anneal > 0.0 && mutation_anneal <= 1.0))
        throw ConfigError("mutation_anneal must lie in (0, 1]");
    if (max_generations < 1) throw ConfigError("max_generations must be >= 1");
    if (!(fitness_tolerance > 0.0)) throw ConfigError("fitness_tolerance must be positive");
}

Genome flatten(const Network& net) {
    Genome genome;
    genome.genes.resize(parameter_count(net));
    copy_parameters(net, genome.genes);
    return genome;
}

Network unflatten(const Genome& genome, const Network& tmpl) {
    Network net = tmpl;
    set_parameters(net, genome.genes);
    return net;
}

namespace {

double fitness_with_scratch(const Genome& genome, Network& net, const Dataset& data,
                            NetScratch& scratch) {
    set_parameters(net, genome.genes);
    double total = 0.0;
    for (std::size_t s = 0; s < data.size(); ++s) {
        forward_into(net, data.input(s), scratch);
        const auto t = data.target(s);
        for (int k = 0; k < data.target_dim; ++k) {
            const double y = scratch.outputs.back()[k];
            if (!std::isfinite(y)) return std::numeric_limits<double>::infinity();
            total += std::abs(t[k] - y);
        }
    }
    return total;
}

}  // namespace

double fitness(const Genome& genome, const Network& tmpl, const Dataset& data) {
    if (genome.genes.size() != parameter_count(tmpl))
        throw DimensionError("fitness: genome length does not match the template network");
    Network net = tmpl;
    NetScratch scratch;
    return fitness_with_scratch(genome, net, data, scratch);
}

std::vector<std::size_t> scale_and_select(const Population& population,
                                          std::size_t count, std::mt19937_64& rng) {
    const std::size_t n = population.members.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return population.fitnesses[a] < population.fitnesses[b];
    });

    // Competition ranking: ties share the rank of the first member of
    // their block, so equal fitnesses get equal scaled scores.
    std::vector<double> score(n);
    double total = 0.0;
    std::size_t rank = 1;
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0 &&
            population.fitnesses[order[i]] != population.fitnesses[order[i - 1]])
            rank = i + 1;
        score[order[i]] = 1.0 / std::sqrt(static_cast<double>(rank));
        total += score[order[i]];
    }

    // Stochastic universal sampling: `count` equally spaced pointers.
    std::vector<std::size_t> parents;
    parents.reserve(count);
    if (count == 0) return parents;
    const double spacing = total / static_cast<double>(count);
    std::uniform_real_distribution<double> dist(0.0, spacing);
    double pointer = dist(rng);
    double cumulative = 0.0;
    std::size_t member = 0;
    for (std::size_t k = 0; k < count; ++k) {
        const double target = pointer + spacing * static_cast<double>(k);
        while (member + 1 < n && cumulative + score[member] <= target) {
            cumulative += score[member];
            ++member;
        }
        parents.push_back(member);
    }
    return parents;
}

Genome crossover(const Genome& a, const Genome& b, std::size_t cut) {
    if (a.genes.size() != b.genes.size())
        throw DimensionError("crossover: parent lengths differ");
    if (cut == 0 || cut >= a.genes.size())
        throw ConfigError("crossover: cut point must satisfy 0 < cut < length");
    Genome child;
    child.genes.reserve(a.genes.size());
    child.genes.assign(a.genes.begin(), a.genes.begin() + static_cast<long>(cut));
    child.genes.insert(child.genes.end(), b.genes.begin() + static_cast<long>(cut),
                       b.genes.end());
    return child;
}

Genome mutate(Genome genome, double sigma, std::mt19937_64& rng) {
    if (sigma < 0.0) throw ConfigError("mutate: sigma must be non-negative");
    if (sigma == 0.0) return genome;
    std::normal_distribution<double> noise(0.0, sigma);
    for (double& g : genome.genes) g += noise(rng);
    return genome;
}

EvolveResult evolve(const Network& tmpl, const Dataset& data, const GAConfig& config,
                    std::span<const Genome> initial_seeds) {
    config.validate();
    data.validate();
    const std::size_t length = parameter_count(tmpl);
    if (length == 0) throw ConfigError("evolve: template network has no parameters");
    for (const auto& seed : initial_seeds)
        if (seed.genes.size() != length)
            throw DimensionError("evolve: seed genome length does not match the template");

    std::mt19937_64 rng(config.rng_seed);
    const std::size_t pop_size = static_cast<std::size_t>(config.population_size);

    Population pop;
    pop.members.reserve(pop_size);
    for (std::size_t i = 0; i < std::min(initial_seeds.size(), pop_size); ++i)
        pop.members.push_back(initial_seeds[i]);
    while (pop.members.size() < pop_size) {
        if (!initial_seeds.empty()) {
            const Genome& base = initial_seeds[pop.members.size() % initial_seeds.size()];
            pop.members.push_back(mutate(base, config.mutation_sigma, rng));
        } else {
            Genome g;
            g.genes.resize(length);
            std::uniform_real_distribution<double> dist(-0.5, 0.5);
            for (double& v : g.genes) v = dist(rng);
            pop.members.push_back(std::move(g));
        }
    }
    pop.fitnesses.assign(pop_size, 0.0);

    // Per-slot evaluation state so scoring can run in parallel without
    // changing results (each member writes only its own slot).
    Network eval_net = tmpl;
    NetScratch scratch;

    EvolveResult result;
    GATrace& trace = result.trace;
    double sigma = config.mutation_sigma;
    std::size_t best_index = 0;

    for (int gen = 0; gen < config.max_generations; ++gen) {
#pragma omp parallel for schedule(static) firstprivate(eval_net, scratch)
        for (long i = 0; i < static_cast<long>(pop_size); ++i)
            pop.fitnesses[i] =
                fitness_with_scratch(pop.members[i], eval_net, data, scratch);

        best_index = 0;
        double mean = 0.0;
        for (std::size_t i = 0; i < pop_size; ++i) {
            if (pop.fitnesses[i] < pop.fitnesses[best_index]) best_index = i;
            mean += pop.fitnesses[i];
        }
        trace.best.push_back(pop.fitnesses[best_index]);
        trace.mean.push_back(mean / static_cast<double>(pop_size));
        trace.generations_run = gen + 1;

        if (pop.fitnesses[best_index] <= config.fitness_tolerance) {
            trace.converged = true;
            break;
        }
        if (gen + 1 == config.max_generations) break;

        // Elites: best elite_count members, ties broken by index.
        std::vector<std::size_t> order(pop_size);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return pop.fitnesses[a] < pop.fitnesses[b];
        });

        const std::size_t elite = static_cast<std::size_t>(config.elite_count);
        const std::size_t open = pop_size - elite;
        // Single-point crossover needs at least two genes.
        const std::size_t n_cross =
            length >= 2 ? static_cast<std::size_t>(
                              std::lround(config.crossover_fraction *
                                          static_cast<double>(open)))
                        : 0;
        const std::size_t n_mut = open - n_cross;

        auto parents = scale_and_select(pop, 2 * n_cross + n_mut, rng);
        std::shuffle(parents.begin(), parents.end(), rng);

        std::vector<Genome> next;
        next.reserve(pop_size);
        for (std::size_t i = 0; i < elite; ++i) next.push_back(pop.members[order[i]]);
        std::uniform_int_distribution<std::size_t> cut_dist(1, length > 1 ? length - 1 : 1);
        for (std::size_t c = 0; c < n_cross; ++c) {
            const Genome& a = pop.members[parents[2 * c]];
            const Genome& b = pop.members[parents[2 * c + 1]];
            next.push_back(crossover(a, b, cut_dist(rng)));
        }
        for (std::size_t m = 0; m < n_mut; ++m)
            next.push_back(mutate(pop.members[parents[2 * n_cross + m]], sigma, rng));

        pop.members = std::move(next);
        sigma *= config.mutation_anneal;
    }

    result.best = unflatten(pop.members[best_index], tmpl);
    result.best_fitness = pop.fitnesses[best_index];
    return result;
}

}  // namespace gnf
