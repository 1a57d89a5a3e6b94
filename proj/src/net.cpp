#include "tap/net.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "tap/util.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace tap {

namespace {

// 8-accumulator dot product: keeps several FMA chains in flight without
// relying on -ffast-math reassociation.
double dot(const double* a, const double* b, int n) {
    double s0 = 0, s1 = 0, s2 = 0, s3 = 0, s4 = 0, s5 = 0, s6 = 0, s7 = 0;
    int i = 0;
    for (; i + 8 <= n; i += 8) {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
        s4 += a[i + 4] * b[i + 4];
        s5 += a[i + 5] * b[i + 5];
        s6 += a[i + 6] * b[i + 6];
        s7 += a[i + 7] * b[i + 7];
    }
    double tail = 0;
    for (; i < n; ++i) tail += a[i] * b[i];
    return ((s0 + s1) + (s2 + s3)) + ((s4 + s5) + (s6 + s7)) + tail;
}

// acc += s * v
void axpy(double* acc, const double* v, double s, int n) {
    for (int i = 0; i < n; ++i) acc[i] += s * v[i];
}

void check_input(const NetworkParams& params, std::size_t n) {
    if (params.layers.empty()) throw std::invalid_argument("uninitialized network");
    if (static_cast<int>(n) != params.layers.front().in)
        throw std::invalid_argument("input dimension mismatch: got " + std::to_string(n) +
                                    ", expected " + std::to_string(params.layers.front().in));
}

// Shared backward walk. dout is the loss gradient at the linear output;
// entries equal to zero are skipped so sparse heads stay cheap.
void backprop(const NetworkParams& params, const ForwardCache& cache,
              std::span<const double> dout, GradientSet& acc) {
    const int L = static_cast<int>(params.layers.size());
    std::vector<double> delta(dout.begin(), dout.end());
    std::vector<double> prev;
    for (int l = L - 1; l >= 0; --l) {
        const Layer& layer = params.layers[l];
        Layer& g = acc.layers[l];
        const std::vector<double>& input = cache.inputs[l];
        if (l > 0) {
            prev.assign(layer.in, 0.0);
        }
        for (int o = 0; o < layer.out; ++o) {
            const double d = delta[o];
            if (d == 0.0) continue;
            g.b[o] += d;
            axpy(g.w.data() + static_cast<std::size_t>(o) * layer.in, input.data(), d, layer.in);
            if (l > 0) {
                axpy(prev.data(), layer.w.data() + static_cast<std::size_t>(o) * layer.in, d,
                     layer.in);
            }
        }
        if (l > 0) {
            const std::vector<double>& z = cache.preacts[l - 1];
            for (int i = 0; i < layer.in; ++i) {
                prev[i] = z[i] > 0.0 ? prev[i] : 0.0;
            }
            if (cache.train_mode && !cache.masks[l - 1].empty()) {
                const std::vector<double>& m = cache.masks[l - 1];
                for (int i = 0; i < layer.in; ++i) prev[i] *= m[i];
            }
            delta.swap(prev);
        }
    }
}

}  // namespace

NetworkParams init_network(const NetworkConfig& cfg) {
    if (cfg.input_dim < 1 || cfg.output_dim < 1)
        throw std::invalid_argument("network dims must be >= 1");
    for (int h : cfg.hidden_dims)
        if (h < 1) throw std::invalid_argument("hidden dims must be >= 1");
    if (cfg.dropout_rate < 0.0 || cfg.dropout_rate >= 1.0)
        throw std::invalid_argument("dropout rate must be in [0,1)");

    NetworkParams params;
    params.config = cfg;
    Rng rng(derive_seed(cfg.seed, 0x6e6574ull));
    int in = cfg.input_dim;
    std::vector<int> outs = cfg.hidden_dims;
    outs.push_back(cfg.output_dim);
    for (int out : outs) {
        Layer layer;
        layer.in = in;
        layer.out = out;
        layer.w.resize(static_cast<std::size_t>(in) * out);
        layer.b.assign(out, 0.0);
        const double limit = std::sqrt(6.0 / (in + out));
        for (auto& v : layer.w) v = (uniform_real(rng) * 2.0 - 1.0) * limit;
        params.layers.push_back(std::move(layer));
        in = out;
    }
    return params;
}

std::vector<double> forward(const NetworkParams& params, std::span<const double> x,
                            bool train_mode, Rng* rng, ForwardCache* cache) {
    check_input(params, x.size());
    if (train_mode && params.config.dropout_rate > 0.0 && rng == nullptr)
        throw std::invalid_argument("train-mode forward needs an rng for dropout");

    const int L = static_cast<int>(params.layers.size());
    if (cache) {
        cache->inputs.assign(L, {});
        cache->preacts.assign(L, {});
        cache->masks.assign(std::max(0, L - 1), {});
        cache->train_mode = train_mode;
    }

    std::vector<double> cur(x.begin(), x.end());
    for (int l = 0; l < L; ++l) {
        const Layer& layer = params.layers[l];
        if (cache) cache->inputs[l] = cur;
        std::vector<double> z(layer.out);
        for (int o = 0; o < layer.out; ++o) {
            z[o] = layer.b[o] +
                   dot(layer.w.data() + static_cast<std::size_t>(o) * layer.in, cur.data(), layer.in);
        }
        if (cache) cache->preacts[l] = z;
        if (l == L - 1) {
            return z;
        }
        for (auto& v : z) v = v > 0.0 ? v : 0.0;
        if (train_mode && params.config.dropout_rate > 0.0) {
            const double p = params.config.dropout_rate;
            const double scale = 1.0 / (1.0 - p);
            std::vector<double> mask(layer.out);
            for (int o = 0; o < layer.out; ++o) {
                mask[o] = uniform_real(*rng) < p ? 0.0 : scale;
                z[o] *= mask[o];
            }
            if (cache) cache->masks[l] = std::move(mask);
        }
        cur = std::move(z);
    }
    return cur;  // unreachable: loop returns at the last layer
}

GradientSet make_gradient_set(const NetworkParams& params) {
    GradientSet g;
    for (const Layer& layer : params.layers) {
        Layer zero;
        zero.in = layer.in;
        zero.out = layer.out;
        zero.w.assign(layer.w.size(), 0.0);
        zero.b.assign(layer.b.size(), 0.0);
        g.layers.push_back(std::move(zero));
    }
    return g;
}

void zero_gradients(GradientSet& g) {
    for (Layer& layer : g.layers) {
        std::fill(layer.w.begin(), layer.w.end(), 0.0);
        std::fill(layer.b.begin(), layer.b.end(), 0.0);
    }
}

void scale_gradients(GradientSet& g, double s) {
    for (Layer& layer : g.layers) {
        for (auto& v : layer.w) v *= s;
        for (auto& v : layer.b) v *= s;
    }
}

double backward_td_acc(const NetworkParams& params, const ForwardCache& cache, int action_index,
                       double td_target, GradientSet& acc) {
    const Layer& last = params.layers.back();
    if (action_index < 0 || action_index >= last.out)
        throw std::invalid_argument("action index out of range");
    const double q = cache.preacts.back()[action_index];
    const double residual = q - td_target;
    std::vector<double> dout(last.out, 0.0);
    dout[action_index] = residual;
    backprop(params, cache, dout, acc);
    return 0.5 * residual * residual;
}

GradientSet backward_td(const NetworkParams& params, const ForwardCache& cache, int action_index,
                        double td_target) {
    GradientSet g = make_gradient_set(params);
    backward_td_acc(params, cache, action_index, td_target, g);
    return g;
}

double backward_l1_acc(const NetworkParams& params, const ForwardCache& cache,
                       std::span<const double> target, GradientSet& acc) {
    const Layer& last = params.layers.back();
    if (static_cast<int>(target.size()) != last.out)
        throw std::invalid_argument("L1 target dimension mismatch");
    const std::vector<double>& out = cache.preacts.back();
    std::vector<double> dout(last.out, 0.0);
    double loss = 0.0;
    for (int o = 0; o < last.out; ++o) {
        const double r = out[o] - target[o];
        loss += std::abs(r);
        dout[o] = r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0);
    }
    backprop(params, cache, dout, acc);
    return loss;
}

GradientSet backward_l1(const NetworkParams& params, const ForwardCache& cache,
                        std::span<const double> target) {
    GradientSet g = make_gradient_set(params);
    backward_l1_acc(params, cache, target, g);
    return g;
}

void sgd_step(NetworkParams& params, const GradientSet& grads, OptimizerState& opt) {
    if (grads.layers.size() != params.layers.size())
        throw std::invalid_argument("gradient/parameter shape mismatch");
    const double lr = opt.effective_lr();
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        Layer& p = params.layers[l];
        const Layer& g = grads.layers[l];
        if (g.w.size() != p.w.size() || g.b.size() != p.b.size())
            throw std::invalid_argument("gradient/parameter shape mismatch");
        for (std::size_t i = 0; i < p.w.size(); ++i) {
            if (!std::isfinite(g.w[i])) throw std::runtime_error("non-finite gradient");
            p.w[i] -= lr * g.w[i];
            if (!std::isfinite(p.w[i])) throw std::runtime_error("non-finite parameter after update");
        }
        for (std::size_t i = 0; i < p.b.size(); ++i) {
            if (!std::isfinite(g.b[i])) throw std::runtime_error("non-finite gradient");
            p.b[i] -= lr * g.b[i];
            if (!std::isfinite(p.b[i])) throw std::runtime_error("non-finite parameter after update");
        }
    }
    ++opt.step_count;
}

namespace {

constexpr char kMagic[4] = {'T', 'A', 'P', 'N'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::string& buf, T v) {
    char raw[sizeof(T)];
    std::memcpy(raw, &v, sizeof(T));
    buf.append(raw, sizeof(T));
}

template <typename T>
T take(const std::vector<std::uint8_t>& buf, std::size_t& off) {
    if (off + sizeof(T) > buf.size()) throw DataError("truncated checkpoint");
    T v;
    std::memcpy(&v, buf.data() + off, sizeof(T));
    off += sizeof(T);
    return v;
}

}  // namespace

void save_network(const std::filesystem::path& path, const NetworkParams& params,
                  const OptimizerState* opt) {
    std::string buf;
    buf.append(kMagic, 4);
    put<std::uint32_t>(buf, kVersion);
    put<std::uint32_t>(buf, static_cast<std::uint32_t>(params.config.input_dim));
    put<std::uint32_t>(buf, static_cast<std::uint32_t>(params.config.output_dim));
    put<std::uint32_t>(buf, static_cast<std::uint32_t>(params.config.hidden_dims.size()));
    for (int h : params.config.hidden_dims) put<std::uint32_t>(buf, static_cast<std::uint32_t>(h));
    put<double>(buf, params.config.dropout_rate);
    put<std::uint64_t>(buf, params.config.seed);
    put<std::uint8_t>(buf, opt ? 1 : 0);
    if (opt) {
        put<double>(buf, opt->base_lr);
        put<double>(buf, opt->decay);
        put<std::uint64_t>(buf, opt->step_count);
    }
    for (const Layer& layer : params.layers) {
        for (double v : layer.w) put<float>(buf, static_cast<float>(v));
        for (double v : layer.b) put<float>(buf, static_cast<float>(v));
    }
    atomic_write_file(path, buf);
}

LoadedNetwork load_network(const std::filesystem::path& path) {
    const auto buf = read_file_bytes(path);
    std::size_t off = 0;
    if (buf.size() < 4 || std::memcmp(buf.data(), kMagic, 4) != 0)
        throw DataError("not a network checkpoint: " + path.string());
    off = 4;
    if (take<std::uint32_t>(buf, off) != kVersion)
        throw DataError("unsupported checkpoint version: " + path.string());

    NetworkConfig cfg;
    cfg.input_dim = static_cast<int>(take<std::uint32_t>(buf, off));
    cfg.output_dim = static_cast<int>(take<std::uint32_t>(buf, off));
    const auto hidden_count = take<std::uint32_t>(buf, off);
    cfg.hidden_dims.clear();
    for (std::uint32_t i = 0; i < hidden_count; ++i)
        cfg.hidden_dims.push_back(static_cast<int>(take<std::uint32_t>(buf, off)));
    cfg.dropout_rate = take<double>(buf, off);
    cfg.seed = take<std::uint64_t>(buf, off);

    LoadedNetwork loaded;
    if (take<std::uint8_t>(buf, off) != 0) {
        OptimizerState opt;
        opt.base_lr = take<double>(buf, off);
        opt.decay = take<double>(buf, off);
        opt.step_count = take<std::uint64_t>(buf, off);
        loaded.opt = opt;
    }

    loaded.params.config = cfg;
    int in = cfg.input_dim;
    std::vector<int> outs = cfg.hidden_dims;
    outs.push_back(cfg.output_dim);
    for (int out : outs) {
        Layer layer;
        layer.in = in;
        layer.out = out;
        layer.w.resize(static_cast<std::size_t>(in) * out);
        layer.b.resize(out);
        for (auto& v : layer.w) v = take<float>(buf, off);
        for (auto& v : layer.b) v = take<float>(buf, off);
        loaded.params.layers.push_back(std::move(layer));
        in = out;
    }
    if (off != buf.size()) throw DataError("trailing bytes in checkpoint: " + path.string());
    return loaded;
}

}  // namespace tap
