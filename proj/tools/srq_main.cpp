#include "srq/config.hpp"
#include "srq/data.hpp"
#include "srq/experiments.hpp"
#include "srq/metrics.hpp"
#include "srq/networks.hpp"
#include "srq/png_io.hpp"
#include "srq/training.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace srq;

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitRuntimeError = 3;

struct CommonOpts {
    std::string config_file;
    std::vector<std::string> overrides;
    bool desk_scale = false;
    bool json = false;
    bool force = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    const char* env_config = std::getenv("SRQ_CONFIG");
    if (env_config) opts.config_file = env_config;
    cmd->add_option("--config", opts.config_file, "config file (INI); SRQ_CONFIG sets the default");
    cmd->add_option("--set", opts.overrides, "override, e.g. --set loss.q=0.5")->take_all();
    cmd->add_flag("--desk-scale", opts.desk_scale, "CPU-feasible sizes for smoke runs");
    cmd->add_flag("--json", opts.json, "machine-readable summary on stdout");
    cmd->add_flag("--force", opts.force, "allow writing into an existing output directory");
}

RunConfig resolve(const CommonOpts& opts) {
    RunConfig base;
    if (opts.desk_scale) base.apply_desk_scale();  // modified default layer under file + CLI
    std::optional<fs::path> file;
    if (!opts.config_file.empty()) file = fs::path(opts.config_file);
    return resolve_config(base, file, opts.overrides);
}

// output directories are created fresh; never silently overwritten
void prepare_out_dir(const fs::path& dir, bool force) {
    if (fs::exists(dir) && !fs::is_empty(dir) && !force)
        throw ConfigError("output directory " + dir.string() +
                          " exists and is not empty (use --force)");
    fs::create_directories(dir);
}

void write_resolved_config(const RunConfig& config, const fs::path& dir) {
    std::ofstream os(dir / "config.ini");
    os << config.to_ini();
}

std::vector<fs::path> list_pngs(const fs::path& dir) {
    std::vector<fs::path> files;
    if (!fs::is_directory(dir)) throw ConfigError("not a directory: " + dir.string());
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.path().extension() == ".png") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    return files;
}

int cmd_extract(const CommonOpts& opts, const std::string& src, const std::string& out,
                int patch, int stride, int limit) {
    RunConfig config = resolve(opts);
    if (patch > 0) config.patch = patch;
    if (stride > 0) config.stride = stride;
    if (limit > 0) config.limit = limit;
    prepare_out_dir(out, opts.force);

    std::vector<PatchPair> pairs;
    for (const auto& file : list_pngs(src)) {
        Tensor image = read_png(file);
        auto patches = extract_patches(image, config.patch, config.stride,
                                       config.limit - static_cast<int>(pairs.size()));
        for (std::size_t i = 0; i < patches.size(); ++i) {
            PatchPair pair;
            pair.source_id = file.stem().string() + "_p" + std::to_string(i);
            pair.hr = std::move(patches[i]);
            pair.lr = synthesize_lr(pair.hr, config.blur_sigma);
            pairs.push_back(std::move(pair));
        }
        if (static_cast<int>(pairs.size()) >= config.limit) break;
    }
    if (pairs.empty()) throw std::runtime_error("no patches extracted from " + src);

    int train_count = std::min<int>(config.train_count, static_cast<int>(pairs.size()));
    int test_count = std::min<int>(config.test_count, static_cast<int>(pairs.size()) - train_count);
    if (train_count < 1) throw std::runtime_error("too few patches for a training split");

    DatasetManifest manifest = build_manifest(pairs, 0.0, {}, train_count, test_count,
                                              config.seed, config.manifest_options());
    save_dataset(out, manifest, pairs);
    write_resolved_config(config, out);
    if (opts.json)
        std::cout << "{\"pairs\": " << pairs.size() << ", \"train\": " << train_count
                  << ", \"test\": " << test_count << "}\n";
    else
        std::cout << "extracted " << pairs.size() << " pairs (" << train_count << " train, "
                  << test_count << " test) into " << out << "\n";
    return 0;
}

int cmd_corrupt(const CommonOpts& opts, const std::string& manifest_path, double fraction,
                std::uint64_t seed, const std::string& out) {
    RunConfig config = resolve(opts);
    config.seed = seed;
    fs::path src_dir = fs::path(manifest_path).parent_path();
    DatasetManifest clean = DatasetManifest::load(manifest_path);
    prepare_out_dir(out, opts.force);

    std::vector<PatchPair> pairs;
    int train_count = 0, test_count = 0;
    for (const auto& entry : clean.entries) {
        PatchPair pair = load_pair(src_dir, entry.pair_id);
        pair.corruption.reset();  // start from the clean pairs
        pairs.push_back(std::move(pair));
        (entry.is_train ? train_count : test_count)++;
    }
    DatasetManifest corrupted = build_manifest(pairs, fraction, config.corruption_menu(),
                                               train_count, test_count, seed,
                                               config.manifest_options());
    save_dataset(out, corrupted, pairs);
    write_resolved_config(config, out);

    int marked = 0;
    for (const auto& e : corrupted.entries)
        if (e.corruption) ++marked;
    if (opts.json)
        std::cout << "{\"train\": " << train_count << ", \"corrupted\": " << marked << "}\n";
    else
        std::cout << "corrupted " << marked << " of " << train_count << " train pairs into " << out
                  << "\n";
    return 0;
}

int cmd_pretrain_ae(const CommonOpts& opts, const std::string& manifest_path,
                    const std::string& out) {
    RunConfig config = resolve(opts);
    fs::path dir = fs::path(manifest_path).parent_path();
    DatasetManifest manifest = DatasetManifest::load(manifest_path);
    std::vector<Tensor> train_hr;
    for (const auto& pair : load_split(dir, manifest, true)) train_hr.push_back(pair.hr);

    AutoencoderResult result = pretrain_autoencoder(train_hr, config.train_config());
    result.encoder.save(out);
    std::ofstream curve(fs::path(out).replace_extension(".loss.csv"));
    curve.precision(17);
    curve << "iter,mse\n";
    for (std::size_t i = 0; i < result.loss_curve.size(); ++i)
        curve << i + 1 << "," << result.loss_curve[i] << "\n";
    std::ofstream cfg(fs::path(out).replace_extension(".config.ini"));
    cfg << config.to_ini();

    if (opts.json)
        std::cout << "{\"iterations\": " << result.loss_curve.size()
                  << ", \"final_mse\": " << result.loss_curve.back() << "}\n";
    else
        std::cout << "autoencoder trained, final reconstruction MSE " << result.loss_curve.back()
                  << ", encoder saved to " << out << "\n";
    return 0;
}

int cmd_train(const CommonOpts& opts, const std::string& manifest_path,
              const std::string& encoder_path, const std::string& out) {
    RunConfig config = resolve(opts);
    fs::path dir = fs::path(manifest_path).parent_path();
    DatasetManifest manifest = DatasetManifest::load(manifest_path);
    auto train_pairs = load_split(dir, manifest, true);

    std::optional<Network> encoder;
    if (!encoder_path.empty()) encoder.emplace(Network::load(encoder_path));

    prepare_out_dir(out, opts.force);
    write_resolved_config(config, out);
    TrainResult result = train(train_pairs, config.train_config(),
                               encoder ? &*encoder : nullptr, fs::path(out));

    const auto& last = result.log.back().comp;
    if (opts.json)
        std::cout << "{\"iterations\": " << result.log.size() << ", \"final_total\": " << last.total
                  << "}\n";
    else
        std::cout << "trained " << result.log.size() << " iterations, final objective "
                  << last.total << ", run dir " << out << "\n";
    return 0;
}

int cmd_evaluate(const CommonOpts& opts, const std::string& sr_dir, const std::string& hr_dir,
                 const std::string& out) {
    RunConfig config = resolve(opts);
    prepare_out_dir(out, opts.force);

    std::vector<std::pair<std::string, std::pair<Tensor, Tensor>>> pairs;
    std::vector<std::string> missing;
    for (const auto& hr_file : list_pngs(hr_dir)) {
        fs::path sr_file = fs::path(sr_dir) / hr_file.filename();
        if (!fs::exists(sr_file)) {
            missing.push_back(hr_file.filename().string());
            continue;
        }
        pairs.push_back({hr_file.stem().string(), {read_png(sr_file), read_png(hr_file)}});
    }
    if (!missing.empty()) {
        std::ostringstream os;
        os << "missing SR images for: ";
        for (std::size_t i = 0; i < missing.size(); ++i) os << (i ? ", " : "") << missing[i];
        throw std::runtime_error(os.str());
    }
    MetricReport report = evaluate_pairs(pairs);

    std::ofstream csv(fs::path(out) / "metrics.csv");
    csv << report.to_csv();
    std::ofstream js(fs::path(out) / "metrics.json");
    js << report.to_json();
    write_resolved_config(config, out);

    if (opts.json) std::cout << report.to_json();
    else
        std::cout << "pairs " << report.per_image.size() << "  rrmse " << report.rrmse
                  << "  ms_mssim " << report.ms_mssim << "  qilv " << report.qilv << "\n";
    return 0;
}

int cmd_super_resolve(const CommonOpts& opts, const std::string& input,
                      const std::string& checkpoint, const std::string& out) {
    RunConfig config = resolve(opts);
    (void)config;
    Network generator = Network::load(checkpoint);
    if (generator.role() != Role::generator)
        throw std::runtime_error("checkpoint is not a generator: " + checkpoint);

    Tensor image = read_png(input);
    const int tile = generator.config().hr_size / kScale;
    if (image.dim(0) % tile != 0 || image.dim(1) % tile != 0)
        throw std::runtime_error("input dims must be multiples of the LR tile size " +
                                 std::to_string(tile));

    // non-overlapping tiles, row-major reassembly at 4x scale
    const int ty = image.dim(0) / tile, tx = image.dim(1) / tile;
    Tensor result({image.dim(0) * kScale, image.dim(1) * kScale, 3});
    for (int by = 0; by < ty; ++by)
        for (int bx = 0; bx < tx; ++bx) {
            Tensor patch({tile, tile, 3});
            for (int y = 0; y < tile; ++y)
                for (int x = 0; x < tile; ++x)
                    for (int c = 0; c < 3; ++c)
                        patch.at(y, x, c) = image.at(by * tile + y, bx * tile + x, c);
            Tensor sr = forward_image(generator, patch, Mode::eval);
            for (int y = 0; y < sr.dim(0); ++y)
                for (int x = 0; x < sr.dim(1); ++x)
                    for (int c = 0; c < 3; ++c)
                        result.at(by * tile * kScale + y, bx * tile * kScale + x, c) =
                            sr.at(y, x, c);
        }
    write_png(out, result);
    if (opts.json)
        std::cout << "{\"tiles\": " << ty * tx << ", \"width\": " << result.dim(1)
                  << ", \"height\": " << result.dim(0) << "}\n";
    else
        std::cout << "super-resolved " << input << " (" << ty * tx << " tiles) -> " << out << "\n";
    return 0;
}

int cmd_sweep(const CommonOpts& opts, const std::string& data_dir, const std::string& axis,
              const std::string& values, const std::string& methods, double fraction,
              const std::string& out) {
    RunConfig config = resolve(opts);
    if (!axis.empty()) config.sweep_axis = axis;
    if (!values.empty()) config.sweep_values = values;
    if (!methods.empty()) config.sweep_methods = methods;
    if (fraction >= 0.0) config.sweep_fraction = fraction;

    SweepSpec spec;
    spec.axis = sweep_axis_from_string(config.sweep_axis);
    spec.fixed_fraction = config.sweep_fraction;
    spec.base = config;
    {
        std::istringstream vs(config.sweep_values);
        std::string tok;
        while (std::getline(vs, tok, ',')) spec.values.push_back(std::stod(tok));
        std::istringstream ms(config.sweep_methods);
        while (std::getline(ms, tok, ',')) spec.methods.push_back(tok);
    }

    DatasetManifest manifest = DatasetManifest::load(fs::path(data_dir) / "manifest.txt");
    std::vector<PatchPair> pairs;
    for (const auto& entry : manifest.entries) {
        PatchPair pair = load_pair(data_dir, entry.pair_id);
        pair.corruption.reset();
        pairs.push_back(std::move(pair));
    }

    prepare_out_dir(out, opts.force);
    write_resolved_config(config, out);
    SweepResult result = run_sweep(spec, pairs, out);
    emit_plots(result, out);

    int failed = 0;
    for (const auto& c : result.cells)
        if (!c.ok) ++failed;
    if (opts.json)
        std::cout << "{\"cells\": " << result.cells.size() << ", \"failed\": " << failed << "}\n";
    else
        std::cout << "sweep finished: " << result.cells.size() << " cells, " << failed
                  << " failed, results in " << out << "\n";
    return failed == 0 ? 0 : kExitRuntimeError;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"corruption-robust super-resolution pipeline"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string src, out, manifest_path, encoder_path, sr_dir, hr_dir, input, checkpoint;
    std::string data_dir, axis, values, methods;
    double fraction = -1.0;
    std::uint64_t seed = 0;
    int patch = -1, stride = -1, limit = -1;

    auto* extract = app.add_subcommand("extract", "extract HR patches and synthesize LR inputs");
    extract->add_option("--src", src, "directory of source PNG images")->required();
    extract->add_option("--out", out, "output dataset directory")->required();
    extract->add_option("--patch", patch, "HR patch size (pixels)");
    extract->add_option("--stride", stride, "patch grid stride (pixels)");
    extract->add_option("--limit", limit, "maximum number of patches");
    add_common(extract, opts);

    auto* corrupt = app.add_subcommand("corrupt", "inject corruption into a training split");
    corrupt->add_option("--manifest", manifest_path, "dataset manifest file")->required();
    corrupt->add_option("--fraction", fraction, "corrupted fraction of the train split")->required();
    corrupt->add_option("--seed", seed, "corruption seed")->required();
    corrupt->add_option("--out", out, "output dataset directory")->required();
    add_common(corrupt, opts);

    auto* pretrain = app.add_subcommand("pretrain-ae", "pre-train the autoencoder on HR patches");
    pretrain->add_option("--manifest", manifest_path, "dataset manifest file")->required();
    pretrain->add_option("--out", out, "encoder checkpoint path")->required();
    add_common(pretrain, opts);

    auto* train_cmd = app.add_subcommand("train", "adversarial training of the generator");
    train_cmd->add_option("--manifest", manifest_path, "dataset manifest file")->required();
    train_cmd->add_option("--encoder", encoder_path, "pre-trained encoder checkpoint");
    train_cmd->add_option("--out", out, "run directory")->required();
    add_common(train_cmd, opts);

    auto* evaluate = app.add_subcommand("evaluate", "score SR images against HR references");
    evaluate->add_option("--sr", sr_dir, "directory of SR images")->required();
    evaluate->add_option("--hr", hr_dir, "directory of HR references")->required();
    evaluate->add_option("--out", out, "report directory")->required();
    add_common(evaluate, opts);

    auto* sr_cmd = app.add_subcommand("super-resolve", "run the generator on an image");
    sr_cmd->add_option("--input", input, "LR input image (PNG)")->required();
    sr_cmd->add_option("--checkpoint", checkpoint, "generator checkpoint")->required();
    sr_cmd->add_option("--out", out, "output image path")->required();
    add_common(sr_cmd, opts);

    auto* sweep = app.add_subcommand("sweep", "corruption-fraction or q sweep with ablations");
    sweep->add_option("--data", data_dir, "clean dataset directory")->required();
    sweep->add_option("--axis", axis, "sweep axis: corruption or q");
    sweep->add_option("--values", values, "comma-separated axis values");
    sweep->add_option("--methods", methods, "comma-separated methods");
    sweep->add_option("--fraction", fraction, "fixed corruption fraction for the q axis");
    sweep->add_option("--out", out, "sweep output directory")->required();
    add_common(sweep, opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (extract->parsed()) return cmd_extract(opts, src, out, patch, stride, limit);
        if (corrupt->parsed()) return cmd_corrupt(opts, manifest_path, fraction, seed, out);
        if (pretrain->parsed()) return cmd_pretrain_ae(opts, manifest_path, out);
        if (train_cmd->parsed()) return cmd_train(opts, manifest_path, encoder_path, out);
        if (evaluate->parsed()) return cmd_evaluate(opts, sr_dir, hr_dir, out);
        if (sr_cmd->parsed()) return cmd_super_resolve(opts, input, checkpoint, out);
        if (sweep->parsed()) return cmd_sweep(opts, data_dir, axis, values, methods, fraction, out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntimeError;
    }
    return 0;
}
