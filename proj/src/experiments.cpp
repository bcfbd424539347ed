#include "srq/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace srq {

SweepAxis sweep_axis_from_string(const std::string& s) {
    if (s == "corruption" || s == "corruption_fraction") return SweepAxis::corruption_fraction;
    if (s == "q") return SweepAxis::q;
    throw ConfigError("unknown sweep axis '" + s + "' (expected 'corruption' or 'q')");
}

void SweepSpec::validate() const {
    if (values.empty()) throw ConfigError("sweep: no axis values");
    if (!std::is_sorted(values.begin(), values.end()))
        throw ConfigError("sweep: axis values must be sorted");
    if (methods.empty()) throw ConfigError("sweep: no methods");
    for (double v : values) {
        if (axis == SweepAxis::corruption_fraction && (v < 0.0 || v > 0.5))
            throw ConfigError("sweep: corruption fractions must lie in [0, 0.5]");
        if (axis == SweepAxis::q && (v <= 0.0 || v > 2.0))
            throw ConfigError("sweep: q values must lie in (0, 2]");
    }
}

void apply_ablation(const std::string& name, RunConfig& config) {
    if (name == "SRGAN_E") {
        config.q = 2.0;
        config.lambda_S = 0.0;
    } else if (name == "SRGAN_QE") {
        config.q = 0.5;
        config.lambda_S = 0.0;
    } else if (name == "SRGAN_SQE") {
        config.q = 0.5;
        config.lambda_S = 2.0;
    } else {
        throw ConfigError("unknown method '" + name +
                          "' (expected SRGAN_E, SRGAN_QE, or SRGAN_SQE)");
    }
}

MetricReport evaluate_generator(Network& generator, const std::vector<PatchPair>& test_pairs) {
    std::vector<std::pair<std::string, std::pair<Tensor, Tensor>>> scored;
    for (const auto& pair : test_pairs) {
        Tensor sr = forward_image(generator, pair.lr, Mode::eval);
        scored.push_back({pair.source_id, {std::move(sr), pair.hr}});
    }
    return evaluate_pairs(scored);
}

namespace {

std::string cell_tag(const SweepCell& cell) {
    std::ostringstream os;
    os << cell.method << "_" << cell.axis_value;
    std::string s = os.str();
    std::replace(s.begin(), s.end(), '.', 'p');
    return s;
}

SweepCell run_cell(const SweepSpec& spec, const std::string& method, double value,
                   const std::vector<PatchPair>& pairs, const std::filesystem::path& cell_dir) {
    SweepCell cell;
    cell.method = method;
    cell.axis_value = value;

    RunConfig config = spec.base;
    apply_ablation(method, config);
    double fraction = spec.fixed_fraction;
    if (spec.axis == SweepAxis::corruption_fraction) fraction = value;
    else config.q = value;

    // seeds decorrelate across cells but are reproducible in isolation
    cell.seed = derive_seed(config.seed, method + "/" + std::to_string(value));

    try {
        std::filesystem::create_directories(cell_dir);
        std::vector<PatchPair> cell_pairs = pairs;  // corruption mutates its own copy
        // the base seed fixes the split, so the clean test set is identical
        // in every cell; only training (cell.seed) varies
        DatasetManifest manifest =
            build_manifest(cell_pairs, fraction, config.corruption_menu(), config.train_count,
                           config.test_count, config.seed, config.manifest_options());
        manifest.save(cell_dir / "manifest.txt");

        std::vector<PatchPair> train_pairs, test_pairs;
        std::vector<Tensor> train_hr;
        for (const auto& entry : manifest.entries) {
            for (const auto& p : cell_pairs)
                if (p.source_id == entry.pair_id) {
                    (entry.is_train ? train_pairs : test_pairs).push_back(p);
                    if (entry.is_train) train_hr.push_back(p.hr);
                    break;
                }
        }

        TrainConfig tc = config.train_config();
        tc.seed = cell.seed;
        Network* encoder = nullptr;
        std::optional<AutoencoderResult> ae;
        if (tc.weights.lambda_m > 0.0) {
            ae = pretrain_autoencoder(train_hr, tc);
            ae->encoder.save(cell_dir / "encoder.ckpt");
            encoder = &ae->encoder;
        }
        TrainResult trained = train(train_pairs, tc, encoder, cell_dir);
        cell.report = evaluate_generator(trained.generator, test_pairs);

        std::ofstream os(cell_dir / "metrics.csv");
        os << cell.report.to_csv();
        std::ofstream js(cell_dir / "metrics.json");
        js << cell.report.to_json();
        cell.ok = true;
    } catch (const std::exception& e) {
        cell.ok = false;
        cell.error = e.what();
        std::ofstream os(cell_dir / "error.txt");
        os << e.what() << "\n";
    }
    return cell;
}

}  // namespace

SweepResult run_sweep(const SweepSpec& spec, const std::vector<PatchPair>& pairs,
                      const std::filesystem::path& out_dir) {
    spec.validate();
    std::filesystem::create_directories(out_dir);
    SweepResult result;
    result.spec = spec;
    for (const auto& method : spec.methods)
        for (double value : spec.values) {
            SweepCell cell;
            cell.method = method;
            cell.axis_value = value;
            result.cells.push_back(
                run_cell(spec, method, value, pairs, out_dir / cell_tag(cell)));
        }
    return result;
}

std::string sweep_grid_csv(const SweepResult& result) {
    std::ostringstream os;
    os.precision(17);
    os << "axis,value,method,seed,status,rrmse,ms_mssim,qilv\n";
    const char* axis =
        result.spec.axis == SweepAxis::corruption_fraction ? "corruption" : "q";
    for (const auto& cell : result.cells) {
        os << axis << "," << cell.axis_value << "," << cell.method << "," << cell.seed << ",";
        if (cell.ok)
            os << "ok," << cell.report.rrmse << "," << cell.report.ms_mssim << ","
               << cell.report.qilv << "\n";
        else
            os << "failed,,,\n";
    }
    return os.str();
}

namespace {

// minimal SVG line chart, one polyline per method
void write_svg_plot(const std::filesystem::path& path, const SweepResult& result,
                    const std::string& metric_name, double MetricReport::* field) {
    const int width = 640, height = 420, margin = 60;
    std::vector<std::string> methods;
    for (const auto& c : result.cells)
        if (std::find(methods.begin(), methods.end(), c.method) == methods.end())
            methods.push_back(c.method);

    double xmin = result.spec.values.front(), xmax = result.spec.values.back();
    if (xmax == xmin) xmax = xmin + 1.0;
    double ymin = 1e300, ymax = -1e300;
    for (const auto& c : result.cells)
        if (c.ok) {
            double v = c.report.*field;
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, v);
        }
    if (ymin > ymax) {
        ymin = 0.0;
        ymax = 1.0;
    }
    if (ymax == ymin) ymax = ymin + 1.0;
    double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;

    auto px = [&](double x) {
        return margin + (x - xmin) / (xmax - xmin) * (width - 2 * margin);
    };
    auto py = [&](double y) {
        return height - margin - (y - ymin) / (ymax - ymin) * (height - 2 * margin);
    };

    const char* colors[] = {"#1f77b4", "#2ca02c", "#d62728", "#ff7f0e"};
    std::ofstream os(path);
    os.precision(12);
    os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
       << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
    os << "<line x1='" << margin << "' y1='" << height - margin << "' x2='" << width - margin
       << "' y2='" << height - margin << "' stroke='black'/>\n";
    os << "<line x1='" << margin << "' y1='" << margin << "' x2='" << margin << "' y2='"
       << height - margin << "' stroke='black'/>\n";
    const char* axis_label =
        result.spec.axis == SweepAxis::corruption_fraction ? "corrupted fraction" : "q";
    os << "<text x='" << width / 2 << "' y='" << height - 15
       << "' text-anchor='middle' font-size='14'>" << axis_label << "</text>\n";
    os << "<text x='20' y='" << height / 2 << "' transform='rotate(-90 20 " << height / 2
       << ")' text-anchor='middle' font-size='14'>" << metric_name << "</text>\n";

    for (std::size_t m = 0; m < methods.size(); ++m) {
        std::ostringstream pts;
        for (double v : result.spec.values)
            for (const auto& c : result.cells)
                if (c.ok && c.method == methods[m] && c.axis_value == v)
                    pts << px(c.axis_value) << "," << py(c.report.*field) << " ";
        os << "<polyline fill='none' stroke='" << colors[m % 4] << "' stroke-width='2' points='"
           << pts.str() << "'/>\n";
        os << "<text x='" << width - margin + 5 << "' y='" << margin + 18 * static_cast<int>(m)
           << "' font-size='11' fill='" << colors[m % 4] << "'>" << methods[m] << "</text>\n";
    }
    os << "</svg>\n";
}

}  // namespace

std::vector<std::filesystem::path> emit_plots(const SweepResult& result,
                                              const std::filesystem::path& out_dir) {
    if (result.cells.empty()) throw std::invalid_argument("emit_plots: empty result");
    std::filesystem::create_directories(out_dir);
    std::vector<std::filesystem::path> files;

    auto grid = out_dir / "grid.csv";
    std::ofstream os(grid);
    os << sweep_grid_csv(result);
    files.push_back(grid);

    struct PlotDef {
        const char* file;
        const char* name;
        double MetricReport::* field;
    };
    for (const auto& def : {PlotDef{"plot_msmssim.svg", "MS-mSSIM", &MetricReport::ms_mssim},
                            PlotDef{"plot_qilv.svg", "QILV", &MetricReport::qilv},
                            PlotDef{"plot_rrmse.svg", "RRMSE", &MetricReport::rrmse}}) {
        auto path = out_dir / def.file;
        write_svg_plot(path, result, def.name, def.field);
        files.push_back(path);
    }
    return files;
}

}  // namespace srq
