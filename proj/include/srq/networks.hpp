#ifndef SRQ_NETWORKS_HPP
#define SRQ_NETWORKS_HPP

#include "srq/layers.hpp"

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace srq {

enum class Role { generator, encoder, decoder, discriminator, custom };

std::string role_name(Role r);

// Scale-independent topology configuration. hr_size only matters for the
// discriminator (dense layer) and for shape checks; the generator and
// encoder are fully convolutional.
struct NetConfig {
    int res_blocks = 8;        // generator
    int gen_base = 64;         // generator channels
    int enc_base = 32;         // encoder channels
    int enc_downsamples = 2;   // encoder stride-2 stages
    int disc_base = 32;        // discriminator channels
    int disc_stages = 5;       // stride-2 stages, 256 -> 8 for 5 stages
    int hr_size = 256;         // square HR patch size
    int upscale_stages = 2;    // generator 2x-upsample count (4x total)
};

// A network is an ordered layer stack plus its build provenance so
// checkpoints can be re-instantiated.
class Network {
public:
    Network(Role role, NetConfig config) : role_(role), config_(config) {}

    Role role() const { return role_; }
    const NetConfig& config() const { return config_; }
    std::vector<std::unique_ptr<Layer>>& layers() { return layers_; }
    const std::vector<std::unique_ptr<Layer>>& layers() const { return layers_; }

    Tensor forward(const Tensor& x, Mode mode);
    Tensor backward(const Tensor& dy);

    std::vector<ParamView> params();
    std::vector<ParamView> state();
    std::int64_t param_count();
    void zero_grad();
    std::string topology() const;

    // bit-exact snapshots; param_snapshot excludes bn running statistics and
    // is what the freezing contracts compare
    std::vector<double> snapshot();
    std::vector<double> param_snapshot();
    void restore(const std::vector<double>& snap);

    void save(const std::filesystem::path& path) const;
    static Network load(const std::filesystem::path& path);

private:
    Role role_;
    NetConfig config_;
    std::vector<std::unique_ptr<Layer>> layers_;
};

// head conv9+relu, long-skip span of res blocks + conv3+bn, then 2x
// [upsample + conv3 + relu], tail conv9 to 3 channels + smooth clamp.
// Maps (N, s, s, 3) to (N, 4s, 4s, 3).
Network build_generator(const NetConfig& config, std::uint64_t seed);

// head conv3+relu, then per downsample: stride-2 conv3 + relu + res block.
Network build_encoder(const NetConfig& config, std::uint64_t seed);

// mirror of the encoder: per level upsample + conv3 + relu + res block,
// final conv3 to 3 channels + smooth clamp.
Network build_decoder(const Network& encoder, std::uint64_t seed);

// stride-2 conv3+bn+leaky stages halving spatial dims, channels doubling
// up to 8x base, then dense to one sigmoid probability.
Network build_discriminator(const NetConfig& config, std::uint64_t seed);

// single image convenience wrapper: (H,W,C) -> (H',W',C') through the net
Tensor forward_image(Network& net, const Tensor& image, Mode mode);

// stack rank-3 images into a (N,H,W,C) batch
Tensor stack_batch(const std::vector<Tensor>& images);
std::vector<Tensor> unstack_batch(const Tensor& batch);

// encoder output channels after d downsamples
int encoder_out_channels(const NetConfig& config);

}  // namespace srq

#endif
