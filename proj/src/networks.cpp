#include "srq/networks.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace srq {

std::string role_name(Role r) {
    switch (r) {
        case Role::generator: return "generator";
        case Role::encoder: return "encoder";
        case Role::decoder: return "decoder";
        case Role::discriminator: return "discriminator";
        case Role::custom: return "custom";
    }
    return "?";
}

Tensor Network::forward(const Tensor& x, Mode mode) {
    Tensor y = x;
    for (auto& layer : layers_) y = layer->forward(y, mode);
    return y;
}

Tensor Network::backward(const Tensor& dy) {
    Tensor d = dy;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) d = (*it)->backward(d);
    return d;
}

std::vector<ParamView> Network::params() {
    std::vector<ParamView> out;
    for (auto& layer : layers_) layer->collect_params(out);
    return out;
}

std::vector<ParamView> Network::state() {
    std::vector<ParamView> out;
    for (auto& layer : layers_) layer->collect_state(out);
    return out;
}

std::int64_t Network::param_count() {
    std::int64_t n = 0;
    for (const auto& p : params()) n += p.size;
    return n;
}

void Network::zero_grad() {
    for (auto& p : params())
        for (std::int64_t i = 0; i < p.size; ++i) p.grad[i] = 0.0;
}

std::string Network::topology() const {
    std::string s = role_name(role_) + "\n";
    for (const auto& layer : layers_) s += layer->descriptor() + "\n";
    return s;
}

std::vector<double> Network::snapshot() {
    std::vector<double> snap;
    for (auto& p : params()) snap.insert(snap.end(), p.value, p.value + p.size);
    for (auto& s : state()) snap.insert(snap.end(), s.value, s.value + s.size);
    return snap;
}

std::vector<double> Network::param_snapshot() {
    std::vector<double> snap;
    for (auto& p : params()) snap.insert(snap.end(), p.value, p.value + p.size);
    return snap;
}

void Network::restore(const std::vector<double>& snap) {
    std::size_t off = 0;
    for (auto& p : params()) {
        std::copy(snap.begin() + static_cast<std::ptrdiff_t>(off),
                  snap.begin() + static_cast<std::ptrdiff_t>(off + static_cast<std::size_t>(p.size)),
                  p.value);
        off += static_cast<std::size_t>(p.size);
    }
    for (auto& s : state()) {
        std::copy(snap.begin() + static_cast<std::ptrdiff_t>(off),
                  snap.begin() + static_cast<std::ptrdiff_t>(off + static_cast<std::size_t>(s.size)),
                  s.value);
        off += static_cast<std::size_t>(s.size);
    }
    if (off != snap.size()) throw std::invalid_argument("restore: snapshot size mismatch");
}

// Checkpoints are plain text: a version line, the build config, then every
// parameter and state value as a hex float (round-trips bit-exactly).
void Network::save(const std::filesystem::path& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write checkpoint: " + path.string());
    os << "srq-checkpoint 1\n" << role_name(role_) << "\n";
    os << config_.res_blocks << " " << config_.gen_base << " " << config_.enc_base << " "
       << config_.enc_downsamples << " " << config_.disc_base << " " << config_.disc_stages << " "
       << config_.hr_size << " " << config_.upscale_stages << "\n";
    auto* self = const_cast<Network*>(this);
    char buf[64];
    for (auto& p : self->params())
        for (std::int64_t i = 0; i < p.size; ++i) {
            std::snprintf(buf, sizeof buf, "%a\n", p.value[i]);
            os << buf;
        }
    for (auto& s : self->state())
        for (std::int64_t i = 0; i < s.size; ++i) {
            std::snprintf(buf, sizeof buf, "%a\n", s.value[i]);
            os << buf;
        }
}

Network Network::load(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read checkpoint: " + path.string());
    std::string magic, rolestr;
    int version = 0;
    is >> magic >> version >> rolestr;
    if (magic != "srq-checkpoint" || version != 1)
        throw std::runtime_error("unrecognized checkpoint format: " + path.string());
    NetConfig cfg;
    is >> cfg.res_blocks >> cfg.gen_base >> cfg.enc_base >> cfg.enc_downsamples >> cfg.disc_base >>
        cfg.disc_stages >> cfg.hr_size >> cfg.upscale_stages;

    Network net = [&] {
        if (rolestr == "generator") return build_generator(cfg, 0);
        if (rolestr == "encoder") return build_encoder(cfg, 0);
        if (rolestr == "decoder") {
            Network enc = build_encoder(cfg, 0);
            return build_decoder(enc, 0);
        }
        if (rolestr == "discriminator") return build_discriminator(cfg, 0);
        throw std::runtime_error("checkpoint with unloadable role: " + rolestr);
    }();

    auto read_values = [&](std::vector<ParamView> views) {
        for (auto& v : views)
            for (std::int64_t i = 0; i < v.size; ++i) {
                std::string tok;
                if (!(is >> tok)) throw std::runtime_error("truncated checkpoint: " + path.string());
                v.value[i] = std::strtod(tok.c_str(), nullptr);
            }
    };
    read_values(net.params());
    read_values(net.state());
    std::string extra;
    if (is >> extra) throw std::runtime_error("checkpoint has trailing data: " + path.string());
    return net;
}

int encoder_out_channels(const NetConfig& config) {
    return config.enc_base << (config.enc_downsamples - 1);
}

Network build_generator(const NetConfig& config, std::uint64_t seed) {
    if (config.res_blocks < 1 || config.gen_base < 8)
        throw std::invalid_argument("build_generator: need res_blocks >= 1 and base >= 8");
    Rng rng(derive_seed(seed, "generator"));
    Network net(Role::generator, config);
    auto& L = net.layers();
    const int base = config.gen_base;

    L.push_back(std::make_unique<Conv2d>(9, 3, base, 1, rng));
    L.push_back(std::make_unique<Relu>());

    // long skip from the head activation across the residual trunk
    std::vector<std::unique_ptr<Layer>> trunk;
    for (int i = 0; i < config.res_blocks; ++i) trunk.push_back(make_res_block(base, rng));
    trunk.push_back(std::make_unique<Conv2d>(3, base, base, 1, rng, /*zero_init=*/true));
    trunk.push_back(std::make_unique<BatchNorm>(base));
    L.push_back(std::make_unique<Residual>(std::move(trunk)));

    for (int i = 0; i < config.upscale_stages; ++i) {
        L.push_back(std::make_unique<Upsample2x>());
        L.push_back(std::make_unique<Conv2d>(3, base, base, 1, rng));
        L.push_back(std::make_unique<Relu>());
    }
    L.push_back(std::make_unique<Conv2d>(9, base, 3, 1, rng));
    L.push_back(std::make_unique<SmoothClamp>());
    return net;
}

Network build_encoder(const NetConfig& config, std::uint64_t seed) {
    if (config.enc_downsamples < 1 || config.enc_base < 1)
        throw std::invalid_argument("build_encoder: need downsamples >= 1");
    Rng rng(derive_seed(seed, "encoder"));
    Network net(Role::encoder, config);
    auto& L = net.layers();

    L.push_back(std::make_unique<Conv2d>(3, 3, config.enc_base, 1, rng));
    L.push_back(std::make_unique<Relu>());
    int ch = config.enc_base;
    for (int d = 0; d < config.enc_downsamples; ++d) {
        int next = d == 0 ? ch : ch * 2;
        L.push_back(std::make_unique<Conv2d>(3, ch, next, 2, rng));
        L.push_back(std::make_unique<Relu>());
        L.push_back(make_res_block(next, rng));
        ch = next;
    }
    return net;
}

Network build_decoder(const Network& encoder, std::uint64_t seed) {
    if (encoder.role() != Role::encoder)
        throw std::invalid_argument("build_decoder: expected an encoder network");
    const NetConfig& config = encoder.config();
    Rng rng(derive_seed(seed, "decoder"));
    Network net(Role::decoder, config);
    auto& L = net.layers();

    int ch = encoder_out_channels(config);
    for (int d = config.enc_downsamples - 1; d >= 0; --d) {
        int next = d == 0 ? ch : ch / 2;
        L.push_back(std::make_unique<Upsample2x>());
        L.push_back(std::make_unique<Conv2d>(3, ch, next, 1, rng));
        L.push_back(std::make_unique<Relu>());
        L.push_back(make_res_block(next, rng));
        ch = next;
    }
    L.push_back(std::make_unique<Conv2d>(3, ch, 3, 1, rng));
    L.push_back(std::make_unique<SmoothClamp>());
    return net;
}

Network build_discriminator(const NetConfig& config, std::uint64_t seed) {
    if (config.disc_base < 8) throw std::invalid_argument("build_discriminator: base must be >= 8");
    if (config.disc_stages < 1) throw std::invalid_argument("build_discriminator: need >= 1 stage");
    if (config.hr_size % (1 << config.disc_stages) != 0)
        throw std::invalid_argument("build_discriminator: hr_size not divisible by 2^stages");
    Rng rng(derive_seed(seed, "discriminator"));
    Network net(Role::discriminator, config);
    auto& L = net.layers();

    int ch = 3;
    int spatial = config.hr_size;
    const int cap = config.disc_base * 8;
    for (int s = 0; s < config.disc_stages; ++s) {
        int next = s == 0 ? config.disc_base : std::min(ch * 2, cap);
        L.push_back(std::make_unique<Conv2d>(3, ch, next, 2, rng));
        L.push_back(std::make_unique<BatchNorm>(next));
        L.push_back(std::make_unique<LeakyRelu>(0.2));
        ch = next;
        spatial /= 2;
    }
    L.push_back(std::make_unique<Flatten>());
    L.push_back(std::make_unique<Dense>(spatial * spatial * ch, 1, rng));
    L.push_back(std::make_unique<Sigmoid>());
    return net;
}

Tensor forward_image(Network& net, const Tensor& image, Mode mode) {
    if (image.rank() != 3) throw std::invalid_argument("forward_image: expected rank-3 image");
    Tensor batch({1, image.dim(0), image.dim(1), image.dim(2)}, image.flat());
    Tensor out = net.forward(batch, mode);
    if (out.rank() == 4)
        return Tensor({out.dim(1), out.dim(2), out.dim(3)}, out.flat());
    return out;
}

Tensor stack_batch(const std::vector<Tensor>& images) {
    if (images.empty()) throw std::invalid_argument("stack_batch: empty batch");
    const Tensor& first = images.front();
    Tensor out({static_cast<int>(images.size()), first.dim(0), first.dim(1), first.dim(2)});
    std::size_t stride = static_cast<std::size_t>(first.numel());
    for (std::size_t i = 0; i < images.size(); ++i) {
        check_same_shape(first, images[i], "stack_batch");
        std::copy(images[i].flat().begin(), images[i].flat().end(),
                  out.flat().begin() + static_cast<std::ptrdiff_t>(i * stride));
    }
    return out;
}

std::vector<Tensor> unstack_batch(const Tensor& batch) {
    if (batch.rank() != 4) throw std::invalid_argument("unstack_batch: expected rank-4 batch");
    std::vector<Tensor> out;
    std::size_t stride = static_cast<std::size_t>(batch.numel() / batch.dim(0));
    for (int i = 0; i < batch.dim(0); ++i) {
        Tensor img({batch.dim(1), batch.dim(2), batch.dim(3)});
        std::copy(batch.flat().begin() + static_cast<std::ptrdiff_t>(i * stride),
                  batch.flat().begin() + static_cast<std::ptrdiff_t>((i + 1) * stride),
                  img.flat().begin());
        out.push_back(std::move(img));
    }
    return out;
}

}  // namespace srq
