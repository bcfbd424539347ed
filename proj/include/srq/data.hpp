#ifndef SRQ_DATA_HPP
#define SRQ_DATA_HPP

#include "srq/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace srq {

inline constexpr int kLrSize = 64;
inline constexpr int kHrSize = 256;
inline constexpr int kScale = 4;
inline constexpr double kDefaultLrBlurSigma = 1.2;  // anti-alias width for 4x decimation

enum class CorruptionKind { noise, blur, contrast };

CorruptionKind corruption_kind_from_string(const std::string& s);
std::string to_string(CorruptionKind kind);

// level semantics: noise = Gaussian sigma in intensity units; blur = Gaussian
// kernel sigma in pixels; contrast = scale factor about mid-gray. level 0 is
// the identity for every kind.
struct CorruptionSpec {
    CorruptionKind kind = CorruptionKind::noise;
    double level = 0.0;
};

struct PatchPair {
    Tensor lr;   // (s, s, 3)
    Tensor hr;   // (4s, 4s, 3)
    std::string source_id;
    std::optional<CorruptionSpec> corruption;

    void validate() const;
};

struct ManifestEntry {
    std::string pair_id;
    bool is_train = true;
    std::optional<CorruptionSpec> corruption;  // train entries only
    std::uint64_t seed = 0;
};

struct DatasetManifest {
    std::vector<ManifestEntry> entries;
    double corrupted_fraction = 0.0;
    std::uint64_t seed = 0;

    std::vector<const ManifestEntry*> split(bool train) const;
    void save(const std::filesystem::path& path) const;
    static DatasetManifest load(const std::filesystem::path& path);
};

// Row-major grid of axis-aligned crops; the last window in each axis is
// clamped so it still fits. Returns at most count_limit patches.
std::vector<Tensor> extract_patches(const Tensor& source, int patch_size, int stride,
                                    int count_limit);

// Gaussian smooth + stride-4 decimation, clamped to [0,1].
Tensor synthesize_lr(const Tensor& hr, double blur_sigma = kDefaultLrBlurSigma);

Tensor apply_corruption(const Tensor& patch, const CorruptionSpec& spec, std::uint64_t seed);

struct ManifestOptions {
    double lr_blur_sigma = kDefaultLrBlurSigma;
    // corruption models a curation error on the ground-truth HR patch, with
    // the LR input regenerated from it; set corrupt_lr_only to corrupt the
    // LR input instead and leave HR clean
    bool corrupt_lr_only = false;
};

// Deterministic split + corruption assignment. Exactly
// round(corrupted_fraction * train_count) train pairs are corrupted in
// place; test pairs are never touched.
DatasetManifest build_manifest(std::vector<PatchPair>& pairs, double corrupted_fraction,
                               const std::vector<CorruptionSpec>& corruption_menu,
                               int train_count, int test_count, std::uint64_t seed,
                               const ManifestOptions& options = {});

// Dataset directory layout: <id>_lr.png + <id>_hr.png plus manifest.txt.
void save_dataset(const std::filesystem::path& dir, const DatasetManifest& manifest,
                  const std::vector<PatchPair>& pairs);
PatchPair load_pair(const std::filesystem::path& dir, const std::string& pair_id);
std::vector<PatchPair> load_split(const std::filesystem::path& dir,
                                  const DatasetManifest& manifest, bool train);

}  // namespace srq

#endif
