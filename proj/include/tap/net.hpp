#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tap/rng.hpp"

namespace tap {

struct NetworkConfig {
    int input_dim = 0;
    std::vector<int> hidden_dims = {256, 128};
    int output_dim = 0;
    double dropout_rate = 0.2;  // hidden activations only
    std::uint64_t seed = 0;
};

struct Layer {
    int in = 0;
    int out = 0;
    std::vector<double> w;  // out x in, row-major
    std::vector<double> b;  // out
};

/// Fully-connected net: ReLU hidden layers, linear output. Parameters are
/// doubles in memory; checkpoints store 32-bit blocks.
struct NetworkParams {
    NetworkConfig config;
    std::vector<Layer> layers;
};

NetworkParams init_network(const NetworkConfig& cfg);

/// Activations recorded by a forward pass, consumed by the backward passes.
struct ForwardCache {
    std::vector<std::vector<double>> inputs;   // input to each layer (post-dropout)
    std::vector<std::vector<double>> preacts;  // pre-activation of each layer
    std::vector<std::vector<double>> masks;    // inverted-dropout masks per hidden layer
    bool train_mode = false;
};

/// Forward pass. In train mode inverted dropout is sampled from rng; eval
/// mode is a pure function of (params, x). Throws on dimension mismatch.
std::vector<double> forward(const NetworkParams& params, std::span<const double> x,
                            bool train_mode, Rng* rng, ForwardCache* cache);

/// Same layer shapes as the network; loss gradients accumulate here.
struct GradientSet {
    std::vector<Layer> layers;
};

GradientSet make_gradient_set(const NetworkParams& params);
void zero_gradients(GradientSet& g);
void scale_gradients(GradientSet& g, double s);

/// Gradients of 0.5*(Q(s,a) - td_target)^2 through the taken action's
/// output unit only. The *_acc variants add into an existing set.
GradientSet backward_td(const NetworkParams& params, const ForwardCache& cache, int action_index,
                        double td_target);
double backward_td_acc(const NetworkParams& params, const ForwardCache& cache, int action_index,
                       double td_target, GradientSet& acc);

/// Gradients of the L1 loss sum_i |o_i - t_i|; subgradient 0 at equality.
GradientSet backward_l1(const NetworkParams& params, const ForwardCache& cache,
                        std::span<const double> target);
double backward_l1_acc(const NetworkParams& params, const ForwardCache& cache,
                       std::span<const double> target, GradientSet& acc);

/// Inverse-time decayed SGD: lr = base_lr / (1 + decay * step_count).
struct OptimizerState {
    double base_lr = 1e-3;
    double decay = 5e-5;
    std::uint64_t step_count = 0;

    double effective_lr() const { return base_lr / (1.0 + decay * static_cast<double>(step_count)); }
};

/// One descent step. Throws on non-finite gradients or parameters.
void sgd_step(NetworkParams& params, const GradientSet& grads, OptimizerState& opt);

/// Checkpoint: self-describing header + little-endian float32 blocks.
void save_network(const std::filesystem::path& path, const NetworkParams& params,
                  const OptimizerState* opt = nullptr);

struct LoadedNetwork {
    NetworkParams params;
    std::optional<OptimizerState> opt;
};

LoadedNetwork load_network(const std::filesystem::path& path);

}  // namespace tap
