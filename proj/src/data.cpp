#include "srq/data.hpp"

#include "srq/kernels.hpp"
#include "srq/png_io.hpp"
#include "srq/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace srq {

CorruptionKind corruption_kind_from_string(const std::string& s) {
    if (s == "noise") return CorruptionKind::noise;
    if (s == "blur") return CorruptionKind::blur;
    if (s == "contrast") return CorruptionKind::contrast;
    throw std::invalid_argument("unknown corruption kind: " + s);
}

std::string to_string(CorruptionKind kind) {
    switch (kind) {
        case CorruptionKind::noise: return "noise";
        case CorruptionKind::blur: return "blur";
        case CorruptionKind::contrast: return "contrast";
    }
    throw std::invalid_argument("unknown corruption kind");
}

void PatchPair::validate() const {
    if (lr.rank() != 3 || hr.rank() != 3) throw std::invalid_argument("patch pair: expected rank-3 patches");
    if (lr.dim(0) * kScale != hr.dim(0) || lr.dim(1) * kScale != hr.dim(1))
        throw std::invalid_argument("patch pair: lr dims must be hr dims / 4");
}

std::vector<Tensor> extract_patches(const Tensor& source, int patch_size, int stride,
                                    int count_limit) {
    if (source.rank() != 3) throw std::invalid_argument("extract_patches: expected rank-3 image");
    if (stride < 1) throw std::invalid_argument("extract_patches: stride must be >= 1");
    if (patch_size < 1) throw std::invalid_argument("extract_patches: patch_size must be >= 1");
    const int h = source.dim(0), w = source.dim(1), c = source.dim(2);
    if (h < patch_size || w < patch_size) throw std::invalid_argument("extract_patches: source too small");

    auto offsets = [&](int dim) {
        std::vector<int> offs;
        for (int o = 0; o + patch_size <= dim; o += stride) offs.push_back(o);
        // clamp a final window so the right/bottom margin is covered
        if (offs.back() + patch_size < dim) offs.push_back(dim - patch_size);
        return offs;
    };
    const auto ys = offsets(h), xs = offsets(w);

    std::vector<Tensor> patches;
    for (int y0 : ys) {
        for (int x0 : xs) {
            if (static_cast<int>(patches.size()) >= count_limit) return patches;
            Tensor p({patch_size, patch_size, c});
            for (int y = 0; y < patch_size; ++y)
                for (int x = 0; x < patch_size; ++x)
                    for (int ch = 0; ch < c; ++ch) p.at(y, x, ch) = source.at(y0 + y, x0 + x, ch);
            patches.push_back(std::move(p));
        }
    }
    return patches;
}

Tensor synthesize_lr(const Tensor& hr, double blur_sigma) {
    if (blur_sigma <= 0.0) throw std::invalid_argument("synthesize_lr: blur_sigma must be positive");
    if (hr.rank() != 3 || hr.dim(0) != hr.dim(1) || hr.dim(0) % kScale != 0)
        throw std::invalid_argument("synthesize_lr: unexpected HR size " + hr.shape_str());
    Tensor lr = kernels::decimate(kernels::gaussian_blur(hr, blur_sigma), kScale);
    kernels::clamp01(lr);
    return lr;
}

Tensor apply_corruption(const Tensor& patch, const CorruptionSpec& spec, std::uint64_t seed) {
    if (spec.level < 0.0) throw std::invalid_argument("apply_corruption: level must be >= 0");
    if (spec.level == 0.0) return patch;  // identity for every kind
    switch (spec.kind) {
        case CorruptionKind::noise: {
            Rng rng(seed);
            Tensor out = patch;
            for (auto& v : out.flat()) v = std::clamp(v + spec.level * rng.normal(), 0.0, 1.0);
            return out;
        }
        case CorruptionKind::blur: {
            Tensor out = kernels::gaussian_blur(patch, spec.level);
            kernels::clamp01(out);
            return out;
        }
        case CorruptionKind::contrast: {
            Tensor out = patch;
            for (auto& v : out.flat()) v = std::clamp(0.5 + spec.level * (v - 0.5), 0.0, 1.0);
            return out;
        }
    }
    throw std::invalid_argument("apply_corruption: unknown corruption kind");
}

DatasetManifest build_manifest(std::vector<PatchPair>& pairs, double corrupted_fraction,
                               const std::vector<CorruptionSpec>& corruption_menu,
                               int train_count, int test_count, std::uint64_t seed,
                               const ManifestOptions& options) {
    if (corrupted_fraction < 0.0 || corrupted_fraction > 1.0)
        throw std::invalid_argument("build_manifest: fraction must be in [0,1]");
    if (static_cast<int>(pairs.size()) < train_count + test_count)
        throw std::invalid_argument("build_manifest: insufficient pairs");
    if (train_count < 1 || test_count < 0) throw std::invalid_argument("build_manifest: bad split sizes");
    const int corrupt_count = static_cast<int>(std::lround(corrupted_fraction * train_count));
    if (corrupt_count > 0 && corruption_menu.empty())
        throw std::invalid_argument("build_manifest: empty corruption menu");

    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (pairs[i].source_id.empty()) pairs[i].source_id = "pair" + std::to_string(i);
        pairs[i].validate();
    }

    Rng rng(derive_seed(seed, "split"));
    std::vector<std::size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size() - 1; i > 0; --i)
        std::swap(order[i], order[static_cast<std::size_t>(rng.below(i + 1))]);

    // corrupted train entries: first corrupt_count of a second seeded shuffle
    std::vector<int> train_positions(static_cast<std::size_t>(train_count));
    std::iota(train_positions.begin(), train_positions.end(), 0);
    Rng pick(derive_seed(seed, "corrupt-pick"));
    for (std::size_t i = train_positions.size() - 1; i > 0; --i)
        std::swap(train_positions[i], train_positions[static_cast<std::size_t>(pick.below(i + 1))]);
    std::vector<bool> corrupted(static_cast<std::size_t>(train_count), false);
    for (int i = 0; i < corrupt_count; ++i) corrupted[static_cast<std::size_t>(train_positions[static_cast<std::size_t>(i)])] = true;

    Rng menu_rng(derive_seed(seed, "corrupt-menu"));
    DatasetManifest manifest;
    manifest.seed = seed;
    manifest.corrupted_fraction = corrupted_fraction;

    for (int i = 0; i < train_count + test_count; ++i) {
        PatchPair& pair = pairs[order[static_cast<std::size_t>(i)]];
        ManifestEntry entry;
        entry.pair_id = pair.source_id;
        entry.is_train = i < train_count;
        entry.seed = derive_seed(seed, pair.source_id);
        if (entry.is_train && corrupted[static_cast<std::size_t>(i)]) {
            CorruptionSpec spec = corruption_menu[static_cast<std::size_t>(menu_rng.below(corruption_menu.size()))];
            entry.corruption = spec;
            pair.corruption = spec;
            if (options.corrupt_lr_only) {
                pair.lr = apply_corruption(pair.lr, spec, entry.seed);
            } else {
                // curation error: the ground-truth target itself is flawed
                pair.hr = apply_corruption(pair.hr, spec, entry.seed);
                pair.lr = synthesize_lr(pair.hr, options.lr_blur_sigma);
            }
        }
        manifest.entries.push_back(std::move(entry));
    }
    return manifest;
}

std::vector<const ManifestEntry*> DatasetManifest::split(bool train) const {
    std::vector<const ManifestEntry*> out;
    for (const auto& e : entries)
        if (e.is_train == train) out.push_back(&e);
    return out;
}

void DatasetManifest::save(const std::filesystem::path& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write manifest: " + path.string());
    os.precision(17);
    os << "# srq-manifest 1\n";
    os << "# seed " << seed << "\n";
    os << "# fraction " << corrupted_fraction << "\n";
    for (const auto& e : entries) {
        os << e.pair_id << " " << (e.is_train ? "train" : "test") << " "
           << (e.corruption ? to_string(e.corruption->kind) : "none") << " "
           << (e.corruption ? e.corruption->level : 0.0) << " " << e.seed << "\n";
    }
}

DatasetManifest DatasetManifest::load(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read manifest: " + path.string());
    DatasetManifest manifest;
    std::string line;
    bool saw_magic = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream hs(line.substr(1));
            std::string key;
            hs >> key;
            if (key == "srq-manifest") saw_magic = true;
            else if (key == "seed") hs >> manifest.seed;
            else if (key == "fraction") hs >> manifest.corrupted_fraction;
            continue;
        }
        std::istringstream ls(line);
        ManifestEntry e;
        std::string split_tag, kind;
        double level = 0.0;
        if (!(ls >> e.pair_id >> split_tag >> kind >> level >> e.seed))
            throw std::runtime_error("malformed manifest line: " + line);
        if (split_tag != "train" && split_tag != "test")
            throw std::runtime_error("malformed split tag: " + split_tag);
        e.is_train = split_tag == "train";
        if (kind != "none") e.corruption = CorruptionSpec{corruption_kind_from_string(kind), level};
        manifest.entries.push_back(std::move(e));
    }
    if (!saw_magic) throw std::runtime_error("not a manifest file: " + path.string());
    return manifest;
}

void save_dataset(const std::filesystem::path& dir, const DatasetManifest& manifest,
                  const std::vector<PatchPair>& pairs) {
    std::filesystem::create_directories(dir);
    manifest.save(dir / "manifest.txt");
    for (const auto& pair : pairs) {
        write_png(dir / (pair.source_id + "_lr.png"), pair.lr);
        write_png(dir / (pair.source_id + "_hr.png"), pair.hr);
    }
}

PatchPair load_pair(const std::filesystem::path& dir, const std::string& pair_id) {
    PatchPair pair;
    pair.source_id = pair_id;
    pair.lr = read_png(dir / (pair_id + "_lr.png"));
    pair.hr = read_png(dir / (pair_id + "_hr.png"));
    pair.validate();
    return pair;
}

std::vector<PatchPair> load_split(const std::filesystem::path& dir,
                                  const DatasetManifest& manifest, bool train) {
    std::vector<PatchPair> out;
    for (const auto* entry : manifest.split(train)) {
        PatchPair pair = load_pair(dir, entry->pair_id);
        pair.corruption = entry->corruption;
        out.push_back(std::move(pair));
    }
    return out;
}

}  // namespace srq
