#include "srq/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>

namespace srq {

namespace {

struct KeyBinding {
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    std::istringstream is(value);
    T out;
    if (!(is >> out) || !is.eof())
        throw ConfigError("config key '" + key + "': cannot parse value '" + value + "'");
    return out;
}

std::map<std::string, KeyBinding> build_registry() {
    std::map<std::string, KeyBinding> reg;
    auto bind_double = [&](const std::string& key, double RunConfig::* member) {
        reg[key] = {[key, member](RunConfig& c, const std::string& v) {
                        c.*member = parse_number<double>(key, v);
                    },
                    [member](const RunConfig& c) { return format_double(c.*member); }};
    };
    auto bind_int = [&](const std::string& key, int RunConfig::* member) {
        reg[key] = {[key, member](RunConfig& c, const std::string& v) {
                        c.*member = parse_number<int>(key, v);
                    },
                    [member](const RunConfig& c) { return std::to_string(c.*member); }};
    };
    auto bind_string = [&](const std::string& key, std::string RunConfig::* member) {
        reg[key] = {[member](RunConfig& c, const std::string& v) { c.*member = v; },
                    [member](const RunConfig& c) { return c.*member; }};
    };

    bind_double("data.blur_sigma", &RunConfig::blur_sigma);
    bind_string("data.corrupt_target", &RunConfig::corrupt_target);
    bind_double("data.noise_min", &RunConfig::noise_min);
    bind_double("data.noise_max", &RunConfig::noise_max);
    bind_double("data.blur_min", &RunConfig::blur_min);
    bind_double("data.blur_max", &RunConfig::blur_max);
    bind_double("data.contrast_min", &RunConfig::contrast_min);
    bind_double("data.contrast_max", &RunConfig::contrast_max);
    bind_int("data.patch", &RunConfig::patch);
    bind_int("data.stride", &RunConfig::stride);
    bind_int("data.limit", &RunConfig::limit);
    bind_int("data.train_count", &RunConfig::train_count);
    bind_int("data.test_count", &RunConfig::test_count);

    bind_int("model.gen_base", &RunConfig::gen_base);
    bind_int("model.res_blocks", &RunConfig::res_blocks);
    bind_int("model.enc_base", &RunConfig::enc_base);
    bind_int("model.enc_downsamples", &RunConfig::enc_downsamples);
    bind_int("model.disc_base", &RunConfig::disc_base);
    bind_int("model.disc_stages", &RunConfig::disc_stages);
    bind_int("model.hr_size", &RunConfig::hr_size);

    bind_double("loss.q", &RunConfig::q);
    bind_double("loss.epsilon", &RunConfig::epsilon);
    bind_double("loss.lambda_M", &RunConfig::lambda_M);
    bind_double("loss.lambda_S", &RunConfig::lambda_S);
    bind_double("loss.lambda_D", &RunConfig::lambda_D);

    bind_double("optimizer.lr_G", &RunConfig::lr_G);
    bind_double("optimizer.lr_D", &RunConfig::lr_D);
    bind_double("optimizer.lr_AE", &RunConfig::lr_AE);
    bind_double("optimizer.beta1", &RunConfig::beta1);
    bind_double("optimizer.beta2", &RunConfig::beta2);
    bind_double("optimizer.eps_adam", &RunConfig::eps_adam);

    bind_int("schedule.batch_size", &RunConfig::batch_size);
    bind_int("schedule.iterations", &RunConfig::iterations);
    bind_int("schedule.ae_iterations", &RunConfig::ae_iterations);
    bind_int("schedule.disc_steps_per_gen_step", &RunConfig::disc_steps_per_gen_step);
    bind_int("schedule.checkpoint_every", &RunConfig::checkpoint_every);
    reg["schedule.seed"] = {[](RunConfig& c, const std::string& v) {
                                c.seed = parse_number<std::uint64_t>("schedule.seed", v);
                            },
                            [](const RunConfig& c) { return std::to_string(c.seed); }};

    bind_string("sweep.axis", &RunConfig::sweep_axis);
    bind_string("sweep.values", &RunConfig::sweep_values);
    bind_string("sweep.methods", &RunConfig::sweep_methods);
    bind_double("sweep.fraction", &RunConfig::sweep_fraction);
    return reg;
}

const std::map<std::string, KeyBinding>& registry() {
    static const std::map<std::string, KeyBinding> reg = build_registry();
    return reg;
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    std::iota(prev.begin(), prev.end(), std::size_t{0});
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

[[noreturn]] void unknown_key(const std::string& key) {
    std::string best;
    std::size_t best_d = static_cast<std::size_t>(-1);
    for (const auto& [k, _] : registry()) {
        std::size_t d = edit_distance(key, k);
        if (d < best_d) {
            best_d = d;
            best = k;
        }
    }
    throw ConfigError("unknown config key '" + key + "'; nearest valid key is '" + best + "'");
}

void set_key(RunConfig& config, const std::string& key, const std::string& value) {
    auto it = registry().find(key);
    if (it == registry().end()) unknown_key(key);
    it->second.set(config, value);
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

void apply_ini_file(RunConfig& config, const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read config file: " + path.string());
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[' && t.back() == ']') {
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        set_key(config, section.empty() ? key : section + "." + key, value);
    }
}

}  // namespace

void RunConfig::apply_desk_scale() {
    hr_size = 32;
    patch = 32;
    stride = 32;
    gen_base = 16;
    res_blocks = 2;
    enc_base = 8;
    enc_downsamples = 2;
    disc_base = 8;
    disc_stages = 3;
    batch_size = 8;
    iterations = 200;
    ae_iterations = 300;
    checkpoint_every = 100;
    train_count = 64;
    test_count = 16;
    limit = 128;
}

TrainConfig RunConfig::train_config() const {
    TrainConfig tc;
    tc.quasi = {q, epsilon};
    tc.weights = {lambda_M, lambda_S, lambda_D};
    tc.batch_size = batch_size;
    tc.iterations = iterations;
    tc.ae_iterations = ae_iterations;
    tc.lr_g = lr_G;
    tc.lr_d = lr_D;
    tc.lr_ae = lr_AE;
    tc.beta1 = beta1;
    tc.beta2 = beta2;
    tc.eps_adam = eps_adam;
    tc.disc_steps_per_gen_step = disc_steps_per_gen_step;
    tc.checkpoint_every = checkpoint_every;
    tc.seed = seed;
    tc.net.res_blocks = res_blocks;
    tc.net.gen_base = gen_base;
    tc.net.enc_base = enc_base;
    tc.net.enc_downsamples = enc_downsamples;
    tc.net.disc_base = disc_base;
    tc.net.disc_stages = disc_stages;
    tc.net.hr_size = hr_size;
    return tc;
}

ManifestOptions RunConfig::manifest_options() const {
    if (corrupt_target != "hr" && corrupt_target != "lr")
        throw ConfigError("data.corrupt_target must be 'hr' or 'lr'");
    return {blur_sigma, corrupt_target == "lr"};
}

std::vector<CorruptionSpec> RunConfig::corruption_menu(int levels_per_kind) const {
    std::vector<CorruptionSpec> menu;
    for (int i = 0; i < levels_per_kind; ++i) {
        double t = levels_per_kind == 1 ? 1.0 : static_cast<double>(i) / (levels_per_kind - 1);
        menu.push_back({CorruptionKind::noise, noise_min + t * (noise_max - noise_min)});
        menu.push_back({CorruptionKind::blur, blur_min + t * (blur_max - blur_min)});
        menu.push_back({CorruptionKind::contrast, contrast_min + t * (contrast_max - contrast_min)});
    }
    return menu;
}

std::string RunConfig::to_ini() const {
    std::map<std::string, std::vector<std::pair<std::string, std::string>>> sections;
    for (const auto& [key, binding] : registry()) {
        auto dot = key.find('.');
        sections[key.substr(0, dot)].push_back({key.substr(dot + 1), binding.get(*this)});
    }
    std::ostringstream os;
    for (const char* section : {"data", "model", "loss", "optimizer", "schedule", "sweep"}) {
        os << "[" << section << "]\n";
        for (const auto& [k, v] : sections[section]) os << k << " = " << v << "\n";
        os << "\n";
    }
    return os.str();
}

RunConfig resolve_config(const std::optional<std::filesystem::path>& file,
                         const std::vector<std::string>& overrides) {
    return resolve_config(RunConfig{}, file, overrides);
}

RunConfig resolve_config(RunConfig config, const std::optional<std::filesystem::path>& file,
                         const std::vector<std::string>& overrides) {
    if (file) apply_ini_file(config, *file);
    for (const auto& kv : overrides) {
        auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw ConfigError("override '" + kv + "' must have the form section.key=value");
        set_key(config, trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
    }
    return config;
}

std::vector<std::string> known_config_keys() {
    std::vector<std::string> keys;
    for (const auto& [k, _] : registry()) keys.push_back(k);
    return keys;
}

}  // namespace srq
