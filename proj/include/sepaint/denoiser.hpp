#ifndef SEPAINT_DENOISER_HPP
#define SEPAINT_DENOISER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "sepaint/field.hpp"

namespace sepaint {

/// Architecture of the reference denoiser: conv3x3 stem (K -> C) with a
/// learned projection of a sinusoidal time embedding added as per-channel
/// bias, `blocks` residual blocks (channel layernorm -> relu -> conv3x3 with
/// dilation 1, 2, 4, ...), and a zero-initialized 1x1 head to K logits with
/// per-pixel softmax.
struct DenoiserSpec {
    int num_classes = 5;
    int height = 32;
    int width = 32;
    int channels = 32;
    int blocks = 3;
    int time_embed_dim = 32;

    std::size_t param_count() const;
    int dilation(int block) const { return 1 << (block < 3 ? block : 3); }

    bool operator==(const DenoiserSpec&) const = default;
};

/// Flat parameter vector plus the layer specs it belongs to. Stored as
/// float32 (the checkpoint width); kernels compute in float or double.
struct DenoiserParams {
    DenoiserSpec spec;
    std::vector<float> values;
};

/// He-normal conv weights, zero output head (so the initial prediction is
/// exactly uniform), unit norm scales. Deterministic per seed.
DenoiserParams init_denoiser(const DenoiserSpec& spec, std::uint64_t seed);

/// One named slice of the flat parameter vector (checkpoint layer table).
struct LayerDesc {
    std::string name;
    std::size_t offset = 0;
    std::size_t count = 0;
};

/// The layer layout implied by a spec, in storage order; offsets partition
/// [0, param_count()).
std::vector<LayerDesc> layer_table(const DenoiserSpec& spec);

/// Activations recorded by a forward pass, consumed by the backward pass.
template <typename Real>
struct DenoiserTrace {
    bool valid = false;
    int t = 0;
    std::vector<Real> input;                  // H*W*K
    std::vector<Real> temb;                   // E
    std::vector<std::vector<Real>> features;  // blocks+1 maps of H*W*C
    std::vector<std::vector<Real>> norm_xhat; // per block, H*W*C
    std::vector<std::vector<Real>> norm_invstd;  // per block, H*W
    std::vector<std::vector<Real>> relu_out;  // per block, H*W*C
    std::vector<Real> softmax_out;            // H*W*K
};

/// x0_hat = net(x_t, t). Output is a valid per-pixel simplex. Pure in
/// (params, x_t, t). Throws DomainError when x_t does not match the spec's
/// trained shape, or t < 1.
template <typename Real>
CategoricalField denoiser_forward(const DenoiserParams& params, const CategoricalField& x_t,
                                  int t, DenoiserTrace<Real>* trace);

/// Gradient of a scalar loss with respect to every parameter, given
/// dLoss/dOutput (same shape as the forward output). Requires the trace of a
/// forward pass on the same inputs; throws UsageError otherwise.
template <typename Real>
std::vector<double> denoiser_backward(const DenoiserParams& params,
                                      const DenoiserTrace<Real>& trace,
                                      const CategoricalField& grad_output);

/// Inference path: float compute, no trace kept.
CategoricalField predict_x0(const DenoiserParams& params, const CategoricalField& x_t, int t);

extern template struct DenoiserTrace<float>;
extern template struct DenoiserTrace<double>;

}  // namespace sepaint

#endif
