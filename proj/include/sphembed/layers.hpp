#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "sphembed/rng.hpp"
#include "sphembed/tensor.hpp"

namespace sphembed {

enum class Mode { Training, Inference };

/// Named trainable tensor with its gradient slot.
struct Param {
    std::string name;
    Tensor value;
    Tensor grad;

    explicit Param(std::string n, Tensor v)
        : name(std::move(n)), value(std::move(v)),
          grad(Tensor::zeros(value.shape())) {}
};

class Layer {
  public:
    virtual ~Layer() = default;

    /// rng is consumed only by stochastic layers (dropout).
    virtual Tensor forward(const Tensor &input, Mode mode,
                           Rng *rng = nullptr) = 0;
    /// Requires a preceding forward in the same mode; consumes the cache.
    virtual Tensor backward(const Tensor &grad_output) = 0;

    virtual std::vector<Param *> params() { return {}; }
    /// Non-trainable state that still belongs in a checkpoint
    /// (batch-norm running statistics).
    virtual std::vector<Param *> buffers() { return {}; }

    virtual std::string kind() const = 0;
    virtual nlohmann::json config() const = 0;

    std::size_t param_count() const;
};

/// input·W (+ bias). W is p×q.
class DenseLayer : public Layer {
  public:
    DenseLayer(std::size_t in_dim, std::size_t out_dim, bool use_bias,
               Rng &rng);

    Tensor forward(const Tensor &input, Mode mode, Rng *rng = nullptr) override;
    Tensor backward(const Tensor &grad_output) override;
    std::vector<Param *> params() override;
    std::string kind() const override { return "dense"; }
    nlohmann::json config() const override;

    Param &weight() { return weight_; }
    Param *bias() { return use_bias_ ? &bias_ : nullptr; }

  private:
    std::size_t in_dim_, out_dim_;
    bool use_bias_;
    Param weight_;
    Param bias_;
    Tensor cached_input_;
    bool has_cache_ = false;
};

class ReluLayer : public Layer {
  public:
    Tensor forward(const Tensor &input, Mode mode, Rng *rng = nullptr) override;
    Tensor backward(const Tensor &grad_output) override;
    std::string kind() const override { return "relu"; }
    nlohmann::json config() const override;

  private:
    Tensor cached_input_;
    bool has_cache_ = false;
};

/// Inverted dropout: survivors scaled by 1/(1-rate), inference is identity.
class DropoutLayer : public Layer {
  public:
    explicit DropoutLayer(double rate);

    Tensor forward(const Tensor &input, Mode mode, Rng *rng = nullptr) override;
    Tensor backward(const Tensor &grad_output) override;
    std::string kind() const override { return "dropout"; }
    nlohmann::json config() const override;

  private:
    double rate_;
    Tensor mask_;
    bool has_cache_ = false;
};

/// 1-D batch normalization over N×d inputs with affine parameters.
class BatchNormLayer : public Layer {
  public:
    explicit BatchNormLayer(std::size_t dim, double epsilon = 1e-5,
                            double momentum = 0.9);

    Tensor forward(const Tensor &input, Mode mode, Rng *rng = nullptr) override;
    Tensor backward(const Tensor &grad_output) override;
    std::vector<Param *> params() override;
    std::vector<Param *> buffers() override;
    std::string kind() const override { return "batch-norm"; }
    nlohmann::json config() const override;

  private:
    std::size_t dim_;
    double epsilon_, momentum_;
    Param gamma_, beta_;
    Param running_mean_, running_var_;
    // forward cache
    Tensor x_hat_, inv_std_, centered_;
    bool has_cache_ = false;
};

/// NHWC → N×C per-channel spatial mean.
class GlobalAvgPoolLayer : public Layer {
  public:
    Tensor forward(const Tensor &input, Mode mode, Rng *rng = nullptr) override;
    Tensor backward(const Tensor &grad_output) override;
    std::string kind() const override { return "global-average-pool"; }
    nlohmann::json config() const override;

  private:
    Shape cached_shape_;
    bool has_cache_ = false;
};

/// Per-channel k×k depthwise convolution followed by a 1×1 pointwise
/// convolution mixing C → C'. Same padding, stride 1 or 2, NHWC layout.
class DepthwiseSeparableConvLayer : public Layer {
  public:
    DepthwiseSeparableConvLayer(std::size_t in_channels,
                                std::size_t out_channels, std::size_t kernel,
                                std::size_t stride, Rng &rng);

    Tensor forward(const Tensor &input, Mode mode, Rng *rng = nullptr) override;
    Tensor backward(const Tensor &grad_output) override;
    std::vector<Param *> params() override;
    std::string kind() const override { return "depthwise-separable-conv"; }
    nlohmann::json config() const override;

  private:
    std::size_t in_ch_, out_ch_, kernel_, stride_;
    Param depthwise_; // k×k×C
    Param dw_bias_;   // C
    Param pointwise_; // C×C'
    Param pw_bias_;   // C'
    Tensor cached_input_, cached_mid_; // mid = depthwise output + bias
    bool has_cache_ = false;
};

/// He-initialized weights: normal(0, sqrt(2/fan_in)).
Tensor he_initialize(Rng &rng, std::size_t fan_in, Shape shape);

/// Ordered layer stack ending, for embedding models, in a
/// batch-normalized linear dense layer.
struct Model {
    std::vector<std::unique_ptr<Layer>> layers;
    std::size_t embedding_dim = 256;

    Tensor forward(const Tensor &input, Mode mode, Rng *rng = nullptr);
    Tensor backward(const Tensor &grad_output);
    std::vector<Param *> params();
    std::size_t param_count() const;

    /// Checkpoint: JSON manifest plus one little-endian float64 blob
    /// per named parameter/buffer.
    void save(const std::filesystem::path &dir) const;
    static Model load(const std::filesystem::path &dir);
};

std::unique_ptr<Layer> layer_from_config(const nlohmann::json &cfg);

} // namespace sphembed
