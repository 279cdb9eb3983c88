#include "sphembed/layers.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "sphembed/kernels.hpp"

namespace sphembed {

namespace {

void require_matrix(const Tensor &t, const char *who) {
    if (t.rank() != 2)
        throw contract_error(std::string(who) + ": expected a rank-2 input, got " +
                             shape_str(t.shape()));
}

void require_cache(bool has_cache, const char *who) {
    if (!has_cache)
        throw contract_error(std::string(who) +
                             ": backward called without a matching forward");
}

} // namespace

std::size_t Layer::param_count() const {
    std::size_t n = 0;
    for (const Param *p : const_cast<Layer *>(this)->params())
        n += p->value.size();
    return n;
}

Tensor he_initialize(Rng &rng, std::size_t fan_in, Shape shape) {
    if (fan_in < 1)
        throw contract_error("he_initialize: fan_in must be >= 1");
    const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
    return rng.normal_tensor(std::move(shape), 0.0, stddev);
}

// ---------------------------------------------------------------- dense

DenseLayer::DenseLayer(std::size_t in_dim, std::size_t out_dim, bool use_bias,
                       Rng &rng)
    : in_dim_(in_dim), out_dim_(out_dim), use_bias_(use_bias),
      weight_("weight", he_initialize(rng, in_dim, {in_dim, out_dim})),
      bias_("bias", Tensor::zeros({out_dim})) {}

Tensor DenseLayer::forward(const Tensor &input, Mode, Rng *) {
    require_matrix(input, "dense");
    if (input.dim(1) != in_dim_)
        throw contract_error("dense: input width " +
                             std::to_string(input.dim(1)) +
                             " does not match weight rows " +
                             std::to_string(in_dim_));
    const std::size_t n = input.dim(0);
    Tensor out({n, out_dim_});
    kernels::matmul(input.data(), weight_.value.data(), out.data(), n, in_dim_,
                    out_dim_);
    if (use_bias_)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < out_dim_; ++j)
                out.at2(i, j) += bias_.value[j];
    cached_input_ = input;
    has_cache_ = true;
    return out;
}

Tensor DenseLayer::backward(const Tensor &grad_output) {
    require_cache(has_cache_, "dense");
    has_cache_ = false;
    const std::size_t n = cached_input_.dim(0);
    // dW = Xᵀ·G
    kernels::matmul_tn(cached_input_.data(), grad_output.data(),
                       weight_.grad.data(), in_dim_, n, out_dim_);
    if (use_bias_) {
        bias_.grad.fill(0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < out_dim_; ++j)
                bias_.grad[j] += grad_output.at2(i, j);
    }
    Tensor grad_in({n, in_dim_});
    kernels::matmul_nt(grad_output.data(), weight_.value.data(),
                       grad_in.data(), n, out_dim_, in_dim_);
    return grad_in;
}

std::vector<Param *> DenseLayer::params() {
    if (use_bias_)
        return {&weight_, &bias_};
    return {&weight_};
}

nlohmann::json DenseLayer::config() const {
    return {{"kind", kind()},
            {"in_dim", in_dim_},
            {"out_dim", out_dim_},
            {"bias", use_bias_}};
}

// ----------------------------------------------------------------- relu

Tensor ReluLayer::forward(const Tensor &input, Mode, Rng *) {
    Tensor out = input;
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = std::max(0.0, out[i]);
    cached_input_ = input;
    has_cache_ = true;
    return out;
}

Tensor ReluLayer::backward(const Tensor &grad_output) {
    require_cache(has_cache_, "relu");
    has_cache_ = false;
    Tensor grad = grad_output;
    for (std::size_t i = 0; i < grad.size(); ++i)
        if (cached_input_[i] <= 0.0)
            grad[i] = 0.0;
    return grad;
}

nlohmann::json ReluLayer::config() const { return {{"kind", kind()}}; }

// -------------------------------------------------------------- dropout

DropoutLayer::DropoutLayer(double rate) : rate_(rate) {
    if (rate < 0.0 || rate >= 1.0)
        throw contract_error("dropout rate must be in [0, 1)");
}

Tensor DropoutLayer::forward(const Tensor &input, Mode mode, Rng *rng) {
    if (mode == Mode::Inference || rate_ == 0.0) {
        mask_ = Tensor::full(input.shape(), 1.0);
        has_cache_ = true;
        return input;
    }
    if (rng == nullptr)
        throw contract_error("dropout in training mode needs an rng");
    const double keep = 1.0 - rate_;
    mask_ = Tensor(input.shape());
    Tensor out = input;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double m = rng->uniform() < rate_ ? 0.0 : 1.0 / keep;
        mask_[i] = m;
        out[i] *= m;
    }
    has_cache_ = true;
    return out;
}

Tensor DropoutLayer::backward(const Tensor &grad_output) {
    require_cache(has_cache_, "dropout");
    has_cache_ = false;
    Tensor grad = grad_output;
    for (std::size_t i = 0; i < grad.size(); ++i)
        grad[i] *= mask_[i];
    return grad;
}

nlohmann::json DropoutLayer::config() const {
    return {{"kind", kind()}, {"rate", rate_}};
}

// ----------------------------------------------------------- batch norm

BatchNormLayer::BatchNormLayer(std::size_t dim, double epsilon,
                               double momentum)
    : dim_(dim), epsilon_(epsilon), momentum_(momentum),
      gamma_("gamma", Tensor::full({dim}, 1.0)),
      beta_("beta", Tensor::zeros({dim})),
      running_mean_("running_mean", Tensor::zeros({dim})),
      running_var_("running_var", Tensor::full({dim}, 1.0)) {}

Tensor BatchNormLayer::forward(const Tensor &input, Mode mode, Rng *) {
    require_matrix(input, "batch-norm");
    if (input.dim(1) != dim_)
        throw contract_error("batch-norm: feature width mismatch");
    const std::size_t n = input.dim(0);

    if (mode == Mode::Inference) {
        Tensor out({n, dim_});
        for (std::size_t j = 0; j < dim_; ++j) {
            const double inv =
                1.0 / std::sqrt(running_var_.value[j] + epsilon_);
            for (std::size_t i = 0; i < n; ++i)
                out.at2(i, j) = gamma_.value[j] *
                                    (input.at2(i, j) - running_mean_.value[j]) *
                                    inv +
                                beta_.value[j];
        }
        has_cache_ = false; // inference backward unsupported
        return out;
    }

    if (n < 2)
        throw contract_error("batch-norm training requires a batch of >= 2");

    Tensor mean({dim_}), var({dim_});
    for (std::size_t j = 0; j < dim_; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            s += input.at2(i, j);
        mean[j] = s / static_cast<double>(n);
    }
    centered_ = Tensor({n, dim_});
    for (std::size_t j = 0; j < dim_; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double c = input.at2(i, j) - mean[j];
            centered_.at2(i, j) = c;
            s += c * c;
        }
        var[j] = s / static_cast<double>(n);
    }
    inv_std_ = Tensor({dim_});
    x_hat_ = Tensor({n, dim_});
    Tensor out({n, dim_});
    for (std::size_t j = 0; j < dim_; ++j) {
        inv_std_[j] = 1.0 / std::sqrt(var[j] + epsilon_);
        for (std::size_t i = 0; i < n; ++i) {
            x_hat_.at2(i, j) = centered_.at2(i, j) * inv_std_[j];
            out.at2(i, j) = gamma_.value[j] * x_hat_.at2(i, j) + beta_.value[j];
        }
        running_mean_.value[j] =
            momentum_ * running_mean_.value[j] + (1.0 - momentum_) * mean[j];
        running_var_.value[j] =
            momentum_ * running_var_.value[j] + (1.0 - momentum_) * var[j];
    }
    has_cache_ = true;
    return out;
}

Tensor BatchNormLayer::backward(const Tensor &grad_output) {
    require_cache(has_cache_, "batch-norm");
    has_cache_ = false;
    const std::size_t n = grad_output.dim(0);
    const double inv_n = 1.0 / static_cast<double>(n);

    Tensor grad_in({n, dim_});
    for (std::size_t j = 0; j < dim_; ++j) {
        double dgamma = 0.0, dbeta = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            dgamma += grad_output.at2(i, j) * x_hat_.at2(i, j);
            dbeta += grad_output.at2(i, j);
        }
        gamma_.grad[j] = dgamma;
        beta_.grad[j] = dbeta;
        const double scale = gamma_.value[j] * inv_std_[j];
        for (std::size_t i = 0; i < n; ++i)
            grad_in.at2(i, j) =
                scale * (grad_output.at2(i, j) - dbeta * inv_n -
                         x_hat_.at2(i, j) * dgamma * inv_n);
    }
    return grad_in;
}

std::vector<Param *> BatchNormLayer::params() { return {&gamma_, &beta_}; }
std::vector<Param *> BatchNormLayer::buffers() {
    return {&running_mean_, &running_var_};
}

nlohmann::json BatchNormLayer::config() const {
    return {{"kind", kind()},
            {"dim", dim_},
            {"epsilon", epsilon_},
            {"momentum", momentum_}};
}

// ------------------------------------------------------------------ gap

Tensor GlobalAvgPoolLayer::forward(const Tensor &input, Mode, Rng *) {
    if (input.rank() != 4)
        throw contract_error("global-average-pool expects NHWC input, got " +
                             shape_str(input.shape()));
    const std::size_t n = input.dim(0), h = input.dim(1), w = input.dim(2),
                      c = input.dim(3);
    Tensor out({n, c});
    const double inv = 1.0 / static_cast<double>(h * w);
    for (std::size_t b = 0; b < n; ++b)
        for (std::size_t i = 0; i < h; ++i)
            for (std::size_t j = 0; j < w; ++j)
                for (std::size_t ch = 0; ch < c; ++ch)
                    out.at2(b, ch) += input.at4(b, i, j, ch) * inv;
    cached_shape_ = input.shape();
    has_cache_ = true;
    return out;
}

Tensor GlobalAvgPoolLayer::backward(const Tensor &grad_output) {
    require_cache(has_cache_, "global-average-pool");
    has_cache_ = false;
    const std::size_t n = cached_shape_[0], h = cached_shape_[1],
                      w = cached_shape_[2], c = cached_shape_[3];
    Tensor grad_in(cached_shape_);
    const double inv = 1.0 / static_cast<double>(h * w);
    for (std::size_t b = 0; b < n; ++b)
        for (std::size_t i = 0; i < h; ++i)
            for (std::size_t j = 0; j < w; ++j)
                for (std::size_t ch = 0; ch < c; ++ch)
                    grad_in.at4(b, i, j, ch) = grad_output.at2(b, ch) * inv;
    return grad_in;
}

nlohmann::json GlobalAvgPoolLayer::config() const {
    return {{"kind", kind()}};
}

// --------------------------------------------- depthwise separable conv

DepthwiseSeparableConvLayer::DepthwiseSeparableConvLayer(
    std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
    std::size_t stride, Rng &rng)
    : in_ch_(in_channels), out_ch_(out_channels), kernel_(kernel),
      stride_(stride),
      depthwise_("depthwise",
                 he_initialize(rng, kernel * kernel,
                               {kernel, kernel, in_channels})),
      dw_bias_("depthwise_bias", Tensor::zeros({in_channels})),
      pointwise_("pointwise",
                 he_initialize(rng, in_channels, {in_channels, out_channels})),
      pw_bias_("pointwise_bias", Tensor::zeros({out_channels})) {
    if (kernel % 2 == 0)
        throw contract_error("depthwise kernel size must be odd");
    if (stride != 1 && stride != 2)
        throw contract_error("stride must be 1 or 2");
}

Tensor DepthwiseSeparableConvLayer::forward(const Tensor &input, Mode, Rng *) {
    if (input.rank() != 4)
        throw contract_error("conv expects NHWC input, got " +
                             shape_str(input.shape()));
    if (input.dim(3) != in_ch_)
        throw contract_error("conv: input has " + std::to_string(input.dim(3)) +
                             " channels, layer expects " +
                             std::to_string(in_ch_));
    const std::size_t n = input.dim(0), h = input.dim(1), w = input.dim(2);
    const std::size_t oh = (h + stride_ - 1) / stride_;
    const std::size_t ow = (w + stride_ - 1) / stride_;
    // same padding
    const std::ptrdiff_t pad_h = std::max<std::ptrdiff_t>(
        0, static_cast<std::ptrdiff_t>((oh - 1) * stride_ + kernel_) -
               static_cast<std::ptrdiff_t>(h));
    const std::ptrdiff_t pad_w = std::max<std::ptrdiff_t>(
        0, static_cast<std::ptrdiff_t>((ow - 1) * stride_ + kernel_) -
               static_cast<std::ptrdiff_t>(w));
    const std::ptrdiff_t pt = pad_h / 2, pl = pad_w / 2;

    Tensor mid({n, oh, ow, in_ch_});
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(n); ++b) {
        for (std::size_t i = 0; i < oh; ++i)
            for (std::size_t j = 0; j < ow; ++j)
                for (std::size_t c = 0; c < in_ch_; ++c) {
                    double acc = dw_bias_.value[c];
                    for (std::size_t u = 0; u < kernel_; ++u) {
                        const std::ptrdiff_t y =
                            static_cast<std::ptrdiff_t>(i * stride_ + u) - pt;
                        if (y < 0 || y >= static_cast<std::ptrdiff_t>(h))
                            continue;
                        for (std::size_t v = 0; v < kernel_; ++v) {
                            const std::ptrdiff_t x =
                                static_cast<std::ptrdiff_t>(j * stride_ + v) -
                                pl;
                            if (x < 0 || x >= static_cast<std::ptrdiff_t>(w))
                                continue;
                            acc += input.at4(b, y, x, c) *
                                   depthwise_.value[(u * kernel_ + v) * in_ch_ +
                                                    c];
                        }
                    }
                    mid.at4(b, i, j, c) = acc;
                }
    }

    Tensor out({n, oh, ow, out_ch_});
    // pointwise 1x1 mixing is a matmul over flattened pixels
    kernels::matmul(mid.data(), pointwise_.value.data(), out.data(),
                    n * oh * ow, in_ch_, out_ch_);
    for (std::size_t p = 0; p < n * oh * ow; ++p)
        for (std::size_t o = 0; o < out_ch_; ++o)
            out[p * out_ch_ + o] += pw_bias_.value[o];

    cached_input_ = input;
    cached_mid_ = std::move(mid);
    has_cache_ = true;
    return out;
}

Tensor DepthwiseSeparableConvLayer::backward(const Tensor &grad_output) {
    require_cache(has_cache_, "depthwise-separable-conv");
    has_cache_ = false;
    const std::size_t n = cached_input_.dim(0), h = cached_input_.dim(1),
                      w = cached_input_.dim(2);
    const std::size_t oh = grad_output.dim(1), ow = grad_output.dim(2);
    const std::size_t pixels = n * oh * ow;
    const std::ptrdiff_t pad_h = std::max<std::ptrdiff_t>(
        0, static_cast<std::ptrdiff_t>((oh - 1) * stride_ + kernel_) -
               static_cast<std::ptrdiff_t>(h));
    const std::ptrdiff_t pad_w = std::max<std::ptrdiff_t>(
        0, static_cast<std::ptrdiff_t>((ow - 1) * stride_ + kernel_) -
               static_cast<std::ptrdiff_t>(w));
    const std::ptrdiff_t pt = pad_h / 2, pl = pad_w / 2;

    // pointwise stage
    kernels::matmul_tn(cached_mid_.data(), grad_output.data(),
                       pointwise_.grad.data(), in_ch_, pixels, out_ch_);
    pw_bias_.grad.fill(0.0);
    for (std::size_t p = 0; p < pixels; ++p)
        for (std::size_t o = 0; o < out_ch_; ++o)
            pw_bias_.grad[o] += grad_output[p * out_ch_ + o];
    Tensor grad_mid({n, oh, ow, in_ch_});
    kernels::matmul_nt(grad_output.data(), pointwise_.value.data(),
                       grad_mid.data(), pixels, out_ch_, in_ch_);

    // depthwise stage
    depthwise_.grad.fill(0.0);
    dw_bias_.grad.fill(0.0);
    Tensor grad_in(cached_input_.shape());
    for (std::size_t b = 0; b < n; ++b)
        for (std::size_t i = 0; i < oh; ++i)
            for (std::size_t j = 0; j < ow; ++j)
                for (std::size_t c = 0; c < in_ch_; ++c) {
                    const double g = grad_mid.at4(b, i, j, c);
                    dw_bias_.grad[c] += g;
                    for (std::size_t u = 0; u < kernel_; ++u) {
                        const std::ptrdiff_t y =
                            static_cast<std::ptrdiff_t>(i * stride_ + u) - pt;
                        if (y < 0 || y >= static_cast<std::ptrdiff_t>(h))
                            continue;
                        for (std::size_t v = 0; v < kernel_; ++v) {
                            const std::ptrdiff_t x =
                                static_cast<std::ptrdiff_t>(j * stride_ + v) -
                                pl;
                            if (x < 0 || x >= static_cast<std::ptrdiff_t>(w))
                                continue;
                            const std::size_t ki =
                                (u * kernel_ + v) * in_ch_ + c;
                            depthwise_.grad[ki] +=
                                cached_input_.at4(b, y, x, c) * g;
                            grad_in.at4(b, y, x, c) +=
                                depthwise_.value[ki] * g;
                        }
                    }
                }
    return grad_in;
}

std::vector<Param *> DepthwiseSeparableConvLayer::params() {
    return {&depthwise_, &dw_bias_, &pointwise_, &pw_bias_};
}

nlohmann::json DepthwiseSeparableConvLayer::config() const {
    return {{"kind", kind()},
            {"in_channels", in_ch_},
            {"out_channels", out_ch_},
            {"kernel", kernel_},
            {"stride", stride_}};
}

// ---------------------------------------------------------------- model

Tensor Model::forward(const Tensor &input, Mode mode, Rng *rng) {
    Tensor x = input;
    for (auto &layer : layers)
        x = layer->forward(x, mode, rng);
    return x;
}

Tensor Model::backward(const Tensor &grad_output) {
    Tensor g = grad_output;
    for (auto it = layers.rbegin(); it != layers.rend(); ++it)
        g = (*it)->backward(g);
    return g;
}

std::vector<Param *> Model::params() {
    std::vector<Param *> out;
    for (auto &layer : layers)
        for (Param *p : layer->params())
            out.push_back(p);
    return out;
}

std::size_t Model::param_count() const {
    std::size_t n = 0;
    for (const auto &layer : layers)
        n += layer->param_count();
    return n;
}

namespace {

void write_blob(const std::filesystem::path &path, const Tensor &t) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw numeric_error("cannot open " + path.string() + " for writing");
    os.write(reinterpret_cast<const char *>(t.data()),
             static_cast<std::streamsize>(t.size() * sizeof(double)));
}

void read_blob(const std::filesystem::path &path, Tensor &t) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw contract_error("missing parameter file " + path.string());
    is.read(reinterpret_cast<char *>(t.data()),
            static_cast<std::streamsize>(t.size() * sizeof(double)));
    if (static_cast<std::size_t>(is.gcount()) != t.size() * sizeof(double))
        throw contract_error("parameter file " + path.string() +
                             " is truncated");
}

std::string blob_name(std::size_t layer_idx, const std::string &param) {
    return "p" + std::to_string(layer_idx) + "_" + param + ".f64";
}

} // namespace

void Model::save(const std::filesystem::path &dir) const {
    std::filesystem::create_directories(dir);
    nlohmann::json manifest;
    manifest["embedding_dim"] = embedding_dim;
    manifest["layers"] = nlohmann::json::array();
    for (std::size_t i = 0; i < layers.size(); ++i) {
        Layer &layer = *layers[i];
        manifest["layers"].push_back(layer.config());
        for (Param *p : layer.params())
            write_blob(dir / blob_name(i, p->name), p->value);
        for (Param *p : layer.buffers())
            write_blob(dir / blob_name(i, p->name), p->value);
    }
    std::ofstream os(dir / "model.json");
    os << manifest.dump(2) << "\n";
}

Model Model::load(const std::filesystem::path &dir) {
    std::ifstream is(dir / "model.json");
    if (!is)
        throw contract_error("missing model manifest in " + dir.string());
    nlohmann::json manifest = nlohmann::json::parse(is);
    Model model;
    model.embedding_dim = manifest.at("embedding_dim").get<std::size_t>();
    std::size_t i = 0;
    for (const auto &cfg : manifest.at("layers")) {
        auto layer = layer_from_config(cfg);
        for (Param *p : layer->params())
            read_blob(dir / blob_name(i, p->name), p->value);
        for (Param *p : layer->buffers())
            read_blob(dir / blob_name(i, p->name), p->value);
        model.layers.push_back(std::move(layer));
        ++i;
    }
    return model;
}

std::unique_ptr<Layer> layer_from_config(const nlohmann::json &cfg) {
    const std::string kind = cfg.at("kind").get<std::string>();
    Rng init_rng(0); // placeholder init; checkpoint load overwrites values
    if (kind == "dense")
        return std::make_unique<DenseLayer>(cfg.at("in_dim").get<std::size_t>(),
                                            cfg.at("out_dim").get<std::size_t>(),
                                            cfg.at("bias").get<bool>(),
                                            init_rng);
    if (kind == "relu")
        return std::make_unique<ReluLayer>();
    if (kind == "dropout")
        return std::make_unique<DropoutLayer>(cfg.at("rate").get<double>());
    if (kind == "batch-norm")
        return std::make_unique<BatchNormLayer>(
            cfg.at("dim").get<std::size_t>(), cfg.at("epsilon").get<double>(),
            cfg.at("momentum").get<double>());
    if (kind == "global-average-pool")
        return std::make_unique<GlobalAvgPoolLayer>();
    if (kind == "depthwise-separable-conv")
        return std::make_unique<DepthwiseSeparableConvLayer>(
            cfg.at("in_channels").get<std::size_t>(),
            cfg.at("out_channels").get<std::size_t>(),
            cfg.at("kernel").get<std::size_t>(),
            cfg.at("stride").get<std::size_t>(), init_rng);
    throw contract_error("unknown layer kind '" + kind + "'");
}

} // namespace sphembed
