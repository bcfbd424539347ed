#ifndef SRQ_CONFIG_HPP
#define SRQ_CONFIG_HPP

#include "srq/data.hpp"
#include "srq/training.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace srq {

// Thrown for unknown keys / malformed values so the CLI can map config
// problems to a dedicated exit code.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flat view of every tunable, grouped into the config-file sections
// [data], [model], [loss], [optimizer], [schedule], [sweep]. Precedence is
// CLI override > file > default.
struct RunConfig {
    // [data]
    double blur_sigma = kDefaultLrBlurSigma;
    std::string corrupt_target = "hr";  // "hr" (curation error) or "lr"
    double noise_min = 0.05, noise_max = 0.2;
    double blur_min = 1.0, blur_max = 3.0;
    double contrast_min = 0.4, contrast_max = 0.7;
    int patch = 256, stride = 256, limit = 4000;
    int train_count = 2000, test_count = 2000;

    // [model]
    int gen_base = 64, res_blocks = 8;
    int enc_base = 32, enc_downsamples = 2;
    int disc_base = 32, disc_stages = 5;
    int hr_size = 256;

    // [loss]
    double q = 0.5, epsilon = 1e-3;
    double lambda_M = 0.2, lambda_S = 2.0, lambda_D = 0.016;

    // [optimizer]
    double lr_G = 1e-4, lr_D = 1e-4, lr_AE = 1e-3;
    double beta1 = 0.9, beta2 = 0.999, eps_adam = 1e-8;

    // [schedule]
    int batch_size = 16, iterations = 1000, ae_iterations = 300;
    int disc_steps_per_gen_step = 1, checkpoint_every = 500;
    std::uint64_t seed = 0;

    // [sweep]
    std::string sweep_axis = "corruption";  // "corruption" or "q"
    std::string sweep_values = "0,0.1,0.2,0.3,0.4,0.5";
    std::string sweep_methods = "SRGAN_E,SRGAN_QE,SRGAN_SQE";
    double sweep_fraction = 0.3;  // fixed fraction for the q axis

    // CPU-feasible sizes for smoke runs and sweeps
    void apply_desk_scale();

    TrainConfig train_config() const;
    ManifestOptions manifest_options() const;
    std::vector<CorruptionSpec> corruption_menu(int levels_per_kind = 3) const;

    std::string to_ini() const;
};

// Deterministic merge: defaults, then the file (if given), then overrides of
// the form "section.key=value". Unknown keys raise ConfigError naming the
// nearest valid key.
RunConfig resolve_config(const std::optional<std::filesystem::path>& file,
                         const std::vector<std::string>& overrides);

// Same merge, but starting from a caller-supplied default layer (e.g. the
// desk-scale preset).
RunConfig resolve_config(RunConfig base, const std::optional<std::filesystem::path>& file,
                         const std::vector<std::string>& overrides);

std::vector<std::string> known_config_keys();

}  // namespace srq

#endif
